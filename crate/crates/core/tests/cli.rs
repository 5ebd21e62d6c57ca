use std::process::{Command, Output};

fn srds(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_srds")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn run_prints_counters() {
    let out = srds(&["run", "--steps", "25", "--tau", "0", "--max-iters", "1", "--workers", "2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("eff_serial_evals=15 total_evals=35"), "{text}");
}

#[test]
fn compare_writes_reproducible_reports() {
    let dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    let path = dir.path().join("r.json");
    for _ in 0..2 {
        let out = srds(&[
            "compare", "--model", "gmm-2", "--dim", "3", "--steps", "49", "--seed", "4", "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("wall_time_s");
        reports.push(v);
    }
    assert_eq!(reports[0], reports[1]);
    assert_eq!(reports[0]["schema"], "srds-report/1");
    assert_eq!(reports[0]["runs"].as_array().unwrap().len(), 3);
}

#[test]
fn sweep_emits_fixed_columns() {
    let out = srds(&["sweep", "--steps", "16,64", "--mode", "srds-pipelined", "--tau", "0"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("mode,N,blocks,solver,iters,converged,eff_serial_evals,total_evals,final_residual,checksum,error")
    );
    let effs: Vec<&str> = lines.map(|l| l.split(',').nth(6).unwrap()).collect();
    assert_eq!(effs, ["16", "64"]);
}

#[test]
fn schedule_reports_makespan_and_gantt() {
    let dir = tempfile::tempdir().unwrap();
    let gantt = dir.path().join("g.csv");
    let out = srds(&["schedule", "--steps", "196", "--max-iters", "1", "--gantt", gantt.to_str().unwrap()]);
    assert!(out.status.success());
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["makespan"], 27);
    assert_eq!(summary["blocks"], 14);
    let csv = std::fs::read_to_string(gantt).unwrap();
    assert!(csv.starts_with("task_id,kind,block,iter,start,end\n0,source,0,0,0,0\n"));
}

#[test]
fn exit_codes() {
    assert_eq!(srds(&["run", "--model", "linear"]).status.code(), Some(2));
    assert_eq!(srds(&["run", "--steps", "0"]).status.code(), Some(2));
    assert_eq!(srds(&["run", "--solver", "rk4"]).status.code(), Some(2));
    assert_eq!(srds(&["run", "--model", "/no/such/model.json"]).status.code(), Some(4));
    assert_eq!(srds(&["run", "--out", "/no/such/dir/r.json"]).status.code(), Some(4));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"type\": \"gaussian\", \"mu\": [0.0]}").unwrap();
    assert_eq!(srds(&["run", "--model", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn model_file_runs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    std::fs::write(&path, r#"{"type": "gaussian", "mu": [1.0, -1.0], "var": [0.5, 2.0]}"#).unwrap();
    let out = srds(&["run", "--model", path.to_str().unwrap(), "--steps", "16", "--mode", "sequential"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("total_evals=16"));
}
