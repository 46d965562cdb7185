//! Subset selection along a path with the modified risk-inflation criterion.
//!
//! A candidate support `C` is scored by its least-squares refit:
//! `rss(C) + sigma^2 * sum_{q=1..|C|} 2 log(p / q)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{ls_refit, CoefficientVector};
use crate::linalg::{norm_sq, residual, Matrix};
use crate::solvers::LassoPath;

/// `sigma2 * sum_{q=1..k} 2 log(p/q)`.
pub fn ric_penalty(p: usize, k: usize, sigma2: f64) -> Result<f64> {
    if k > p {
        return Err(Error::invalid("k", format!("support size {k} exceeds p = {p}")));
    }
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::invalid("sigma2", format!("noise variance must be positive, got {sigma2}")));
    }
    let pf = p as f64;
    let sum: f64 = (1..=k).map(|q| 2.0 * (pf / q as f64).ln()).sum();
    Ok(sigma2 * sum)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetModel {
    pub support: Vec<usize>,
    pub refit_coefficients: CoefficientVector,
    pub rss: f64,
    pub penalty: f64,
    pub criterion: f64,
}

/// A support that could not be refit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedSupport {
    pub support: Vec<usize>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub model: SubsetModel,
    /// Every distinct support on the path that was refit, in path order.
    pub scored: Vec<SubsetModel>,
    pub skipped: Vec<SkippedSupport>,
}

/// Scores one support.
pub fn score_support(y: &[f64], x: &Matrix, support: &[usize], sigma2: f64) -> Result<SubsetModel> {
    let penalty = ric_penalty(x.ncols(), support.len(), sigma2)?;
    let refit = ls_refit(y, x, support)?;
    let rss = norm_sq(&residual(x, y, &refit.values));
    let mut support = support.to_vec();
    support.sort_unstable();
    Ok(SubsetModel {
        support,
        refit_coefficients: refit,
        rss,
        penalty,
        criterion: rss + penalty,
    })
}

/// Refits every distinct support on `path` and returns the one with the
/// smallest criterion, preferring the smaller support on ties. Supports whose
/// columns are rank deficient are reported in `skipped`.
pub fn select_on_path(path: &LassoPath, y: &[f64], x: &Matrix, sigma2: f64) -> Result<Selection> {
    if path.steps.is_empty() {
        return Err(Error::invalid("path", "path has no steps"));
    }
    ric_penalty(x.ncols(), 0, sigma2)?;

    let mut distinct: Vec<&[usize]> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for step in &path.steps {
        if seen.insert(step.support.as_slice()) {
            distinct.push(&step.support);
        }
    }

    let outcomes: Vec<Result<SubsetModel>> = distinct
        .par_iter()
        .map(|s| score_support(y, x, s, sigma2))
        .collect();

    let mut scored = Vec::new();
    let mut skipped = Vec::new();
    for (support, outcome) in distinct.iter().zip(outcomes) {
        match outcome {
            Ok(m) => scored.push(m),
            Err(e @ Error::RankDeficient { .. }) => skipped.push(SkippedSupport {
                support: support.to_vec(),
                reason: e.to_string(),
            }),
            Err(e) => return Err(e),
        }
    }

    let model = scored
        .iter()
        .min_by(|a, b| {
            a.criterion
                .total_cmp(&b.criterion)
                .then(a.support.len().cmp(&b.support.len()))
        })
        .cloned()
        .ok_or_else(|| Error::invalid("path", "no support on the path could be refit"))?;
    Ok(Selection {
        model,
        scored,
        skipped,
    })
}
