use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{gen_synthetic, split_seed, Method, SyntheticSpec, TrialResult};
use crate::error::{Error, Result};
use crate::linalg::{norm_sq, residual, Matrix};
use crate::selection::select_on_path;
use crate::solvers::{lars_lasso_path, StopRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Figure {
    /// One true feature; lasso shrinkage of its estimate along the path.
    Fig3Shrinkage,
    /// Four true features among independent columns.
    Fig4Independent,
    /// Four true features among equicorrelated columns.
    Fig5Correlated,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig3Shrinkage => "fig3_shrinkage",
            Figure::Fig4Independent => "fig4_independent",
            Figure::Fig5Correlated => "fig5_correlated",
        }
    }

    pub fn default_config(self) -> FigureConfig {
        let (k_true, rho) = match self {
            Figure::Fig3Shrinkage => (1, 0.0),
            Figure::Fig4Independent => (4, 0.0),
            Figure::Fig5Correlated => (4, 0.64),
        };
        FigureConfig {
            n: 100,
            p: 1000,
            k_true,
            signal: 1.0,
            rho,
            noise_sd: 1.0,
        }
    }
}

/// Simulation design shared by all trials of a figure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureConfig {
    pub n: usize,
    pub p: usize,
    pub k_true: usize,
    /// Value of each nonzero coefficient.
    pub signal: f64,
    pub rho: f64,
    pub noise_sd: f64,
}

/// Per-step metrics of one trial's lasso path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub seed: u64,
    pub step: usize,
    pub support_size: usize,
    pub penalty: f64,
    pub lasso_oos_rmse: f64,
    /// Test error of the least-squares refit on the step's support.
    pub refit_oos_rmse: Option<f64>,
    /// Modified-RIC criterion of the step's support.
    pub criterion: Option<f64>,
    /// Lasso estimate of the first true coefficient.
    pub first_true_estimate: f64,
}

/// Mean lasso estimate of the true coefficient at a given support size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShrinkagePoint {
    pub support_size: usize,
    pub mean_estimate: f64,
    /// Number of trials whose path visited this support size.
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureRun {
    pub figure: Figure,
    pub config: FigureConfig,
    /// Sorted by seed, then method.
    pub trials: Vec<TrialResult>,
    /// Sorted by seed, then step.
    pub steps: Vec<StepRecord>,
    /// Filled for the shrinkage figure only.
    pub shrinkage: Vec<ShrinkagePoint>,
}

/// Runs `trials` seeded replicates of a figure with its default design.
pub fn run_figure_experiment(which: Figure, trials: usize, seed: u64) -> Result<FigureRun> {
    run_figure_with(which, &which.default_config(), trials, seed)
}

/// Runs `trials` seeded replicates of a figure with an explicit design.
pub fn run_figure_with(which: Figure, config: &FigureConfig, trials: usize, seed: u64) -> Result<FigureRun> {
    if trials == 0 {
        return Err(Error::invalid("trials", "need at least one trial"));
    }
    if !(config.noise_sd > 0.0) {
        return Err(Error::invalid("noise_sd", "the selection criterion needs a positive noise level"));
    }
    if config.k_true == 0 {
        return Err(Error::invalid("k_true", "need at least one true feature"));
    }
    let outcomes: Vec<Result<(Vec<TrialResult>, Vec<StepRecord>)>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| run_trial(config, split_seed(seed, t)))
        .collect();

    let mut results = Vec::new();
    let mut steps = Vec::new();
    for o in outcomes {
        let (r, s) = o?;
        results.extend(r);
        steps.extend(s);
    }
    results.sort_by_key(|r| (r.seed, r.method));
    steps.sort_by_key(|s| (s.seed, s.step));

    let shrinkage = if which == Figure::Fig3Shrinkage {
        shrinkage_curve(&steps)
    } else {
        Vec::new()
    };
    Ok(FigureRun {
        figure: which,
        config: config.clone(),
        trials: results,
        steps,
        shrinkage,
    })
}

fn rmse(x: &Matrix, y: &[f64], beta: &[f64]) -> f64 {
    (norm_sq(&residual(x, y, beta)) / y.len() as f64).sqrt()
}

fn run_trial(config: &FigureConfig, seed: u64) -> Result<(Vec<TrialResult>, Vec<StepRecord>)> {
    let spec = SyntheticSpec::with_leading_signal(
        config.n,
        config.p,
        config.k_true,
        config.signal,
        config.rho,
        config.noise_sd,
        seed,
    )?;
    let (train, test) = gen_synthetic(&spec)?;
    let path = lars_lasso_path(&train.y, &train.x, StopRule::FullPath)?;
    let sigma2 = config.noise_sd * config.noise_sd;
    let selection = select_on_path(&path, &train.y, &train.x, sigma2)?;

    let mut records = Vec::with_capacity(path.steps.len());
    for (i, step) in path.steps.iter().enumerate() {
        let scored = selection.scored.iter().find(|m| m.support == step.support);
        records.push(StepRecord {
            seed,
            step: i,
            support_size: step.support.len(),
            penalty: step.penalty,
            lasso_oos_rmse: rmse(&test.x, &test.y, &step.coefficients.values),
            refit_oos_rmse: scored.map(|m| rmse(&test.x, &test.y, &m.refit_coefficients.values)),
            criterion: scored.map(|m| m.criterion),
            first_true_estimate: step.coefficients.values[0],
        });
    }

    let chosen = &selection.model;
    let ric = TrialResult {
        seed,
        method: Method::RicRefit,
        support_size: chosen.support.len(),
        in_sample_criterion: Some(chosen.criterion),
        oos_rmse: Some(rmse(&test.x, &test.y, &chosen.refit_coefficients.values)),
        terminal_sse: chosen.rss,
    };
    let best = records
        .iter()
        .min_by(|a, b| a.lasso_oos_rmse.total_cmp(&b.lasso_oos_rmse))
        .expect("a path has at least one step");
    let lasso_best = TrialResult {
        seed,
        method: Method::LassoOosBest,
        support_size: best.support_size,
        in_sample_criterion: best.criterion,
        oos_rmse: Some(best.lasso_oos_rmse),
        terminal_sse: path.steps[best.step].residual_norm2,
    };
    Ok((vec![ric, lasso_best], records))
}

/// For each support size, the mean over trials of the true coefficient's
/// lasso estimate at the first step reaching that size.
fn shrinkage_curve(steps: &[StepRecord]) -> Vec<ShrinkagePoint> {
    let mut first: BTreeMap<(u64, usize), f64> = BTreeMap::new();
    for s in steps {
        first.entry((s.seed, s.support_size)).or_insert(s.first_true_estimate);
    }
    let mut by_size: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for ((_, size), est) in first {
        let e = by_size.entry(size).or_insert((0.0, 0));
        e.0 += est;
        e.1 += 1;
    }
    by_size
        .into_iter()
        .map(|(support_size, (sum, count))| ShrinkagePoint {
            support_size,
            mean_estimate: sum / count as f64,
            trials: count,
        })
        .collect()
}
