//! Data generators, the Monte Carlo risk oracle, and the simulation harnesses.
//!
//! Every random quantity is drawn from a `ChaCha8Rng`. Per-trial streams are
//! split from a master seed by ChaCha stream number, so a trial's data depend
//! only on `(master seed, trial index)` and never on scheduling.

mod cover;
mod data;
mod figures;
mod montecarlo;
mod npbench;

pub use cover::{gen_exact_cover, CoverMode, ExactCoverInstance};
pub use data::{gen_collinear_trap, gen_synthetic, CollinearTrap, Dataset, SyntheticSpec};
pub use figures::{
    run_figure_experiment, run_figure_with, Figure, FigureConfig, FigureRun, ShrinkagePoint,
    StepRecord,
};
pub use montecarlo::{monte_carlo_risk, McEstimate, ThresholdRule};
pub use npbench::{run_np_bench, BenchMode, NpBenchRow};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Seed for trial `index` of a run started from `master`.
pub fn split_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng.next_u64()
}

pub(crate) fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Least-squares refit of the support chosen by the modified RIC.
    RicRefit,
    /// The lasso path step with the smallest out-of-sample error.
    LassoOosBest,
    /// Lasso path stopped by the residual rule.
    Lasso,
    Stepwise,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::RicRefit => "ric_refit",
            Method::LassoOosBest => "lasso_oos_best",
            Method::Lasso => "lasso",
            Method::Stepwise => "stepwise",
        }
    }
}

/// One row of a result table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub seed: u64,
    pub method: Method,
    pub support_size: usize,
    /// Modified-RIC criterion of the reported support, when scored.
    pub in_sample_criterion: Option<f64>,
    /// Test-set root mean squared prediction error, when a test set exists.
    pub oos_rmse: Option<f64>,
    /// Training residual sum of squares of the reported fit.
    pub terminal_sse: f64,
}
