//! Path algorithms: LARS with the lasso modification, and greedy forward
//! stepwise regression with least-squares refits.
//!
//! Both solvers standardize the design columns to unit Euclidean norm
//! internally and report coefficients on the original column scale. Penalties
//! are on the standardized scale with the convention
//! `||y - X b||^2 + lambda * ||b||_1`, so along the lasso path
//! `|x_j'r| = lambda / 2` on the active set.

mod lars;
mod stepwise;

pub use lars::lars_lasso_path;
pub use stepwise::forward_stepwise;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::CoefficientVector;
use crate::linalg::{norm, Matrix};

/// When a path algorithm stops.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    /// Stop after this many steps beyond the empty model.
    MaxSteps(usize),
    /// Stop at the first step whose residual 2-norm is below the value.
    ResidualBelow(f64),
    /// Run until the path cannot continue.
    FullPath,
}

/// Why a path ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxSteps,
    ResidualBelow,
    /// The lasso path reached zero penalty.
    PathEnd,
    /// No remaining column reduces the residual.
    NoDescent,
    /// The iteration cap was reached before any other rule fired.
    IterationCap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathStep {
    /// Selected columns, ascending.
    pub support: Vec<usize>,
    pub coefficients: CoefficientVector,
    pub penalty: f64,
    /// Squared residual norm `||y - X b||^2`.
    pub residual_norm2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoPath {
    pub steps: Vec<PathStep>,
    /// Fingerprint of the design (`"{n}x{p}:{hash}"`).
    pub design_id: String,
    pub stop_reason: StopReason,
}

impl LassoPath {
    pub fn last(&self) -> &PathStep {
        self.steps.last().expect("a path always holds the empty model")
    }
}

impl StopRule {
    pub fn validate(self) -> Result<()> {
        match self {
            StopRule::ResidualBelow(eps) if !(eps > 0.0 && eps.is_finite()) => Err(
                Error::invalid("stop", format!("residual threshold must be positive, got {eps}")),
            ),
            _ => Ok(()),
        }
    }

    /// Whether the path should end after recording a step.
    fn reached(self, steps_taken: usize, residual_norm2: f64) -> Option<StopReason> {
        match self {
            StopRule::MaxSteps(m) if steps_taken >= m => Some(StopReason::MaxSteps),
            StopRule::ResidualBelow(eps) if residual_norm2 < eps * eps => {
                Some(StopReason::ResidualBelow)
            }
            _ => None,
        }
    }
}

/// Unit-norm copy of `x` together with the original column norms.
pub(crate) fn standardize(x: &Matrix, y: &[f64]) -> Result<(Matrix, Vec<f64>)> {
    if y.len() != x.nrows() {
        return Err(Error::Dimension(format!(
            "y has {} rows, X has {}",
            y.len(),
            x.nrows()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("y", "response contains non-finite values"));
    }
    let mut z = x.clone();
    let mut scale = Vec::with_capacity(x.ncols());
    for j in 0..x.ncols() {
        let col = z.col_mut(j);
        if col.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("X", format!("column {j} contains non-finite values")));
        }
        let s = norm(col);
        if s == 0.0 {
            return Err(Error::ZeroColumn(j));
        }
        col.iter_mut().for_each(|v| *v /= s);
        scale.push(s);
    }
    Ok((z, scale))
}

pub(crate) fn design_id(x: &Matrix) -> String {
    // FNV-1a over the raw bits
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for j in 0..x.ncols() {
        for v in x.col(j) {
            for b in v.to_bits().to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
    }
    format!("{}x{}:{h:016x}", x.nrows(), x.ncols())
}

pub(crate) fn destandardize(beta: &[f64], scale: &[f64]) -> CoefficientVector {
    beta.iter().zip(scale).map(|(b, s)| b / s).collect::<Vec<_>>().into()
}
