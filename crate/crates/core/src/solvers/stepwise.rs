use super::{design_id, standardize, LassoPath, PathStep, StopReason, StopRule};
use crate::error::Result;
use crate::estimators::ls_refit;
use crate::linalg::{axpy, dot, norm_sq, residual, Matrix};

/// Columns whose part orthogonal to the selected set has relative norm below
/// this are never chosen.
const DEPENDENT_TOL: f64 = 1e-10;
/// Relative score gap treated as a tie.
const TIE_TOL: f64 = 1e-12;

/// Greedy forward stepwise regression with a least-squares refit per step.
///
/// Each step adds the column whose inclusion reduces the residual sum of
/// squares the most, i.e. the column with the largest absolute partial
/// correlation with the current residual given the selected set. The recorded
/// `penalty` is on the l0 scale: the running minimum of the SSE reductions,
/// which is the largest `lambda0` at which each support would be accepted.
///
/// The path ends with [`StopReason::NoDescent`] when no remaining column can
/// reduce the residual.
pub fn forward_stepwise(y: &[f64], x: &Matrix, stop: StopRule) -> Result<LassoPath> {
    stop.validate()?;
    let (xs, _) = standardize(x, y)?;
    let (n, p) = (xs.nrows(), xs.ncols());

    // Columns made orthogonal to the selected set, updated after each pick.
    let mut resid_cols = xs.clone();
    let mut resid_norm2: Vec<f64> = vec![1.0; p];
    let mut selected = vec![false; p];
    let mut support: Vec<usize> = Vec::new();
    let mut r = y.to_vec();

    let mut steps = vec![PathStep {
        support: Vec::new(),
        coefficients: vec![0.0; p].into(),
        penalty: 0.0,
        residual_norm2: norm_sq(y),
    }];
    let finish = |mut steps: Vec<PathStep>, reason| {
        if steps.len() > 1 {
            steps[0].penalty = steps[1].penalty;
        }
        LassoPath {
            steps,
            design_id: design_id(x),
            stop_reason: reason,
        }
    };
    if let Some(reason) = stop.reached(0, steps[0].residual_norm2) {
        return Ok(finish(steps, reason));
    }

    let mut penalty = f64::INFINITY;
    for _ in 0..n.min(p) {
        let scores: Vec<f64> = (0..p)
            .map(|j| {
                if selected[j] || resid_norm2[j] <= DEPENDENT_TOL * DEPENDENT_TOL {
                    return f64::NEG_INFINITY;
                }
                let c = dot(resid_cols.col(j), &r);
                c * c / resid_norm2[j]
            })
            .collect();
        let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(best > 1e-28 * norm_sq(y).max(f64::MIN_POSITIVE)) {
            return Ok(finish(steps, StopReason::NoDescent));
        }
        let j = scores
            .iter()
            .position(|&s| s >= best * (1.0 - TIE_TOL))
            .expect("best is attained");

        selected[j] = true;
        support.push(j);
        support.sort_unstable();
        let scale = resid_norm2[j].sqrt();
        let q: Vec<f64> = resid_cols.col(j).iter().map(|v| v / scale).collect();
        for k in 0..p {
            if selected[k] || resid_norm2[k] <= DEPENDENT_TOL * DEPENDENT_TOL {
                continue;
            }
            let col = resid_cols.col_mut(k);
            let proj = dot(&q, col);
            axpy(-proj, &q, col);
            resid_norm2[k] = norm_sq(col);
        }
        let proj = dot(&q, &r);
        axpy(-proj, &q, &mut r);

        let coefficients = ls_refit(y, x, &support)?;
        let fitted_resid = residual(x, y, &coefficients.values);
        let rss = norm_sq(&fitted_resid);
        r = fitted_resid;
        penalty = penalty.min(best);
        steps.push(PathStep {
            support: support.clone(),
            coefficients,
            penalty,
            residual_norm2: rss,
        });
        if let Some(reason) = stop.reached(steps.len() - 1, rss) {
            return Ok(finish(steps, reason));
        }
    }
    Ok(finish(steps, StopReason::NoDescent))
}
