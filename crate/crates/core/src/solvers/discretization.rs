use serde::Serialize;

use crate::error::{Error, Result};
use crate::parareal::optimal_block_size;

/// Fine grid `u_j = j / N` plus the coarse block partition on top of it.
///
/// Blocks are numbered `1..=n_blocks`; block `i` maps the state at boundary
/// `i - 1` to the state at boundary `i`. Every block spans `ceil(N / B)` fine
/// steps except possibly the last, which takes the remainder.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Discretization {
    n_fine: usize,
    n_blocks: usize,
    boundaries: Vec<usize>,
}

impl Discretization {
    pub fn new(n_fine: usize, n_blocks: usize) -> Result<Self> {
        if n_fine == 0 {
            return Err(Error::config("steps", "need at least one fine step"));
        }
        if n_blocks == 0 || n_blocks > n_fine {
            return Err(Error::config(
                "blocks",
                format!("need 1 <= blocks <= steps, got {n_blocks} blocks for {n_fine} steps"),
            ));
        }
        let width = n_fine.div_ceil(n_blocks);
        if (n_blocks - 1) * width >= n_fine {
            return Err(Error::config(
                "blocks",
                format!(
                    "{n_blocks} blocks of width {width} overrun {n_fine} steps; \
                     only {} blocks fit",
                    n_fine.div_ceil(width)
                ),
            ));
        }
        let boundaries = (0..=n_blocks).map(|k| (k * width).min(n_fine)).collect();
        Ok(Discretization {
            n_fine,
            n_blocks,
            boundaries,
        })
    }

    /// Partition with the eval-optimal block count for `n_fine` steps.
    pub fn with_default_blocks(n_fine: usize) -> Result<Self> {
        let blocks = if n_fine < 2 { 1 } else { optimal_block_size(n_fine)? };
        Self::new(n_fine, blocks)
    }

    pub fn n_fine(&self) -> usize {
        self.n_fine
    }

    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    /// Width of a full block, `ceil(N / B)`.
    pub fn fine_steps_per_block(&self) -> usize {
        self.boundaries[1]
    }

    /// Fine index of block boundary `k`, `0 <= k <= n_blocks`.
    pub fn boundary(&self, k: usize) -> usize {
        self.boundaries[k]
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    /// `(j_start, j_end)` of block `i` in `1..=n_blocks`.
    pub fn block_span(&self, i: usize) -> (usize, usize) {
        assert!(
            (1..=self.n_blocks).contains(&i),
            "block {i} outside 1..={}",
            self.n_blocks
        );
        (self.boundaries[i - 1], self.boundaries[i])
    }

    pub fn node(&self, j: usize) -> f64 {
        j as f64 / self.n_fine as f64
    }
}
