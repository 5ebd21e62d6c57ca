use crate::error::{Error, Result};

/// Serial cost of one refinement iteration with `blocks` coarse blocks over
/// `n` fine steps: the widest fine solve plus a full coarse sweep.
pub fn iteration_cost(n: usize, blocks: usize) -> usize {
    n.div_ceil(blocks) + blocks
}

/// Block count minimising [`iteration_cost`] over `1..=n`.
///
/// `ceil(sqrt(n))` is always among the minimisers. Ties go to the candidate
/// closest to `sqrt(n)`, then to the smaller count.
pub fn optimal_block_size(n: usize) -> Result<usize> {
    if n < 2 {
        return Err(Error::Domain(format!("block size needs at least 2 steps, got {n}")));
    }
    let root = (n as f64).sqrt();
    let mut best = 1;
    let mut best_cost = iteration_cost(n, 1);
    let mut b = 2;
    // cost(b) > b, so nothing at or past the best cost can improve on it
    while b <= n && b < best_cost {
        let cost = iteration_cost(n, b);
        let closer = (b as f64 - root).abs() < (best as f64 - root).abs();
        if cost < best_cost || (cost == best_cost && closer) {
            best = b;
            best_cost = cost;
        }
        b += 1;
    }
    Ok(best)
}
