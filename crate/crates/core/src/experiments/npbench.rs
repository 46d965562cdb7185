use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{gen_exact_cover, split_seed, CoverMode, Method};
use crate::error::{Error, Result};
use crate::solvers::{forward_stepwise, lars_lasso_path, LassoPath, StopReason, StopRule};

/// One solver run on one exact-cover instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NpBenchRow {
    pub n: usize,
    pub p: usize,
    /// Seed of the instance.
    pub seed: u64,
    pub method: Method,
    /// Support size at the first step whose residual norm fell below epsilon.
    pub support_size: usize,
    pub terminal_sse: f64,
    /// Whether the residual threshold was reached.
    pub reached: bool,
}

/// How the instance columns are generated for each ground-set size `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchMode {
    AllTriples,
    /// `p = per_row * n` columns including the planted cover.
    RandomP { per_row: usize },
}

impl BenchMode {
    fn cover_mode(self, n: usize) -> CoverMode {
        match self {
            BenchMode::AllTriples => CoverMode::AllTriples,
            BenchMode::RandomP { per_row } => CoverMode::RandomP(per_row * n),
        }
    }
}

/// Runs forward stepwise and the lasso path, both stopped at residual norm
/// `epsilon`, on one instance per size. Rows come back in input order with
/// stepwise before lasso for each size.
pub fn run_np_bench(sizes: &[usize], mode: BenchMode, epsilon: f64, seed: u64) -> Result<Vec<NpBenchRow>> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid("epsilon", format!("must be positive, got {epsilon}")));
    }
    let per_size: Vec<Result<[NpBenchRow; 2]>> = sizes
        .par_iter()
        .enumerate()
        .map(|(i, &n)| {
            let inst_seed = split_seed(seed, i as u64);
            let inst = gen_exact_cover(n, mode.cover_mode(n), inst_seed)?;
            let x = inst.design();
            let stop = StopRule::ResidualBelow(epsilon);
            let row = |method, path: LassoPath| {
                let last = path.last();
                NpBenchRow {
                    n,
                    p: inst.p(),
                    seed: inst_seed,
                    method,
                    support_size: last.support.len(),
                    terminal_sse: last.residual_norm2,
                    reached: path.stop_reason == StopReason::ResidualBelow,
                }
            };
            let sw = forward_stepwise(&inst.y, &x, stop)?;
            let lasso = lars_lasso_path(&inst.y, &x, stop)?;
            Ok([row(Method::Stepwise, sw), row(Method::Lasso, lasso)])
        })
        .collect();
    let mut rows = Vec::with_capacity(2 * sizes.len());
    for pair in per_size {
        rows.extend(pair?);
    }
    Ok(rows)
}
