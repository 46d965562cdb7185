//! Coordinate-wise threshold estimators and least-squares refitting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{least_squares, Matrix};

/// A coefficient vector over all `p` features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientVector {
    pub values: Vec<f64>,
}

impl CoefficientVector {
    pub fn new(values: Vec<f64>) -> Self {
        CoefficientVector { values }
    }

    pub fn zeros(p: usize) -> Self {
        CoefficientVector { values: vec![0.0; p] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Indices of the nonzero entries, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn l0_norm(&self) -> usize {
        self.values.iter().filter(|v| **v != 0.0).count()
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }
}

impl From<Vec<f64>> for CoefficientVector {
    fn from(values: Vec<f64>) -> Self {
        CoefficientVector { values }
    }
}

fn check_cutoff(name: &'static str, gamma: f64) -> Result<()> {
    if gamma >= 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("cutoff must be finite and >= 0, got {gamma}")))
    }
}

/// Keeps entries with `|b| > gamma0` and zeroes the rest.
pub fn hard_threshold(beta_ls: &CoefficientVector, gamma0: f64) -> Result<CoefficientVector> {
    check_cutoff("gamma0", gamma0)?;
    Ok(beta_ls
        .values
        .iter()
        .map(|&b| if b.abs() > gamma0 { b } else { 0.0 })
        .collect::<Vec<_>>()
        .into())
}

/// `sign(b) * max(|b| - gamma1, 0)` entrywise.
pub fn soft_threshold(beta_ls: &CoefficientVector, gamma1: f64) -> Result<CoefficientVector> {
    check_cutoff("gamma1", gamma1)?;
    Ok(beta_ls
        .values
        .iter()
        .map(|&b| soft(b, gamma1))
        .collect::<Vec<_>>()
        .into())
}

pub(crate) fn soft(b: f64, gamma: f64) -> f64 {
    let shrunk = b.abs() - gamma;
    if shrunk > 0.0 {
        shrunk.copysign(b)
    } else {
        0.0
    }
}

/// Least-squares coefficients of `y` on the columns in `support`, embedded in
/// a length-`p` vector with zeros off the support.
pub fn ls_refit(y: &[f64], x: &Matrix, support: &[usize]) -> Result<CoefficientVector> {
    let mut sorted = support.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::invalid("support", "duplicate column index"));
    }
    let fit = least_squares(x, y, &sorted)?;
    let mut values = vec![0.0; x.ncols()];
    for (&j, &c) in sorted.iter().zip(&fit.coefficients) {
        values[j] = c;
    }
    Ok(values.into())
}
