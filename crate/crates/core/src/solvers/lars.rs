use super::{design_id, destandardize, standardize, LassoPath, PathStep, StopReason, StopRule};
use crate::error::Result;
use crate::linalg::{axpy, dot, norm_sq, Matrix};

/// Relative gap under which a correlation counts as tied with the maximum.
const TIE_TOL: f64 = 1e-9;
/// Squared residual norm (relative to a unit column) below which a column is
/// treated as lying in the span of the active columns.
const DEPENDENT_TOL: f64 = 1e-10;
/// Minimum shortfall `1 - s_j a_j` for a tied column to be pulled into the
/// direction problem.
const VIOLATION_TOL: f64 = 1e-9;
const DENOMINATOR_TOL: f64 = 1e-12;
/// Penalty, relative to the entry penalty, treated as the end of the path.
const END_TOL: f64 = 1e-12;

/// Lasso regularization path by least-angle regression with the lasso
/// modification.
///
/// Steps are recorded at the knots of the piecewise-linear path. At a knot
/// where several columns are tied, the equiangular direction is replaced by
/// the sign-constrained direction problem over the tied set, which is solved
/// by an active-set method that pulls in the most violated column first
/// (lowest index on ties). When more than one column joins in a single
/// segment, the joins are recorded as zero-length steps at the starting knot
/// so consecutive supports differ by one index.
pub fn lars_lasso_path(y: &[f64], x: &Matrix, stop: StopRule) -> Result<LassoPath> {
    stop.validate()?;
    let (xs, scale) = standardize(x, y)?;
    let (n, p) = (xs.nrows(), xs.ncols());

    let mut beta = vec![0.0; p];
    let mut r = y.to_vec();
    let mut c = xs.t_mul_vec(&r);
    let mut cmax = max_abs(&c);
    let mut steps = vec![PathStep {
        support: Vec::new(),
        coefficients: destandardize(&beta, &scale),
        penalty: 2.0 * cmax,
        residual_norm2: norm_sq(&r),
    }];
    let finish = |steps, reason| LassoPath {
        steps,
        design_id: design_id(x),
        stop_reason: reason,
    };
    if let Some(reason) = stop.reached(0, steps[0].residual_norm2) {
        return Ok(finish(steps, reason));
    }
    if cmax == 0.0 {
        return Ok(finish(steps, StopReason::PathEnd));
    }

    let c0 = cmax;
    let cap = 20 * (n + p) + 100;
    for _ in 0..cap {
        let tol = TIE_TOL * cmax;
        let signs: Vec<f64> = (0..p)
            .map(|j| if beta[j] != 0.0 { beta[j].signum() } else { c[j].signum() })
            .collect();
        let tied: Vec<bool> = (0..p)
            .map(|j| beta[j] != 0.0 || c[j].abs() >= cmax - tol)
            .collect();

        let dir = direction(&xs, &beta, &tied, &signs);

        // Longest step before a correlation joins the tie, an active
        // coefficient crosses zero, or the penalty reaches zero.
        let mut t_best = cmax;
        let mut drop = None;
        for j in 0..p {
            if dir.in_set[j] {
                if beta[j] != 0.0 && dir.d[j] != 0.0 {
                    let t = -beta[j] / dir.d[j];
                    if t > 0.0 && t < t_best {
                        t_best = t;
                        drop = Some(j);
                    }
                }
                continue;
            }
            let skip_same_sign = tied[j];
            let candidates = [
                (1.0, cmax - c[j], 1.0 - dir.a[j]),
                (-1.0, cmax + c[j], 1.0 + dir.a[j]),
            ];
            for (side, num, den) in candidates {
                if skip_same_sign && side == signs[j] {
                    continue;
                }
                if den > DENOMINATOR_TOL {
                    let t = num.max(0.0) / den;
                    if t < t_best {
                        t_best = t;
                        drop = None;
                    }
                }
            }
        }
        let at_end = drop.is_none() && t_best >= cmax;

        for j in 0..p {
            if dir.in_set[j] {
                beta[j] += t_best * dir.d[j];
            }
        }
        if let Some(j) = drop {
            beta[j] = 0.0;
        }
        r = y.to_vec();
        for (j, &b) in beta.iter().enumerate() {
            if b != 0.0 {
                axpy(-b, xs.col(j), &mut r);
            }
        }
        c = xs.t_mul_vec(&r);
        cmax = max_abs(&c);
        let at_end = at_end || cmax <= END_TOL * c0;
        if at_end {
            cmax = 0.0;
        }

        let support: Vec<usize> = (0..p).filter(|&j| beta[j] != 0.0).collect();
        let prev = steps.last().expect("nonempty").clone();
        let mut joined: Vec<usize> = support
            .iter()
            .copied()
            .filter(|j| prev.support.binary_search(j).is_err())
            .collect();
        joined.sort_by_key(|j| {
            dir.order
                .iter()
                .position(|k| k == j)
                .unwrap_or(usize::MAX)
        });
        if joined.len() > 1 {
            let mut partial = prev.support.clone();
            for &j in &joined[..joined.len() - 1] {
                partial.push(j);
                partial.sort_unstable();
                steps.push(PathStep {
                    support: partial.clone(),
                    ..prev.clone()
                });
                if let Some(reason) = stop.reached(steps.len() - 1, prev.residual_norm2) {
                    return Ok(finish(steps, reason));
                }
            }
        }

        let rss = norm_sq(&r);
        steps.push(PathStep {
            support,
            coefficients: destandardize(&beta, &scale),
            penalty: 2.0 * cmax,
            residual_norm2: rss,
        });
        if let Some(reason) = stop.reached(steps.len() - 1, rss) {
            return Ok(finish(steps, reason));
        }
        if at_end {
            return Ok(finish(steps, StopReason::PathEnd));
        }
    }
    Ok(finish(steps, StopReason::IterationCap))
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Direction of travel at a knot, per unit decrease of `max |c|`.
struct Direction {
    in_set: Vec<bool>,
    /// Coefficient velocities (zero outside the set).
    d: Vec<f64>,
    /// `X' X d`, the rate at which each correlation falls.
    a: Vec<f64>,
    /// Order in which tied zero coefficients were pulled in.
    order: Vec<usize>,
}

/// Solves `min 1/2 d'Gd - s'd` over the tied columns, with `s_j d_j >= 0`
/// for columns whose coefficient is currently zero. Optimality is
/// `s_j a_j >= 1` for every tied column left out, with equality inside.
fn direction(xs: &Matrix, beta: &[f64], tied: &[bool], signs: &[f64]) -> Direction {
    let p = xs.ncols();
    let free: Vec<usize> = (0..p).filter(|&j| beta[j] != 0.0).collect();
    let mut chol = Cholesky::default();
    for &j in &free {
        chol.push(xs, j);
    }
    let mut in_set = vec![false; p];
    for &j in &chol.idx {
        in_set[j] = true;
    }
    let mut excluded = vec![false; p];
    let mut order = Vec::new();
    let mut d = chol.velocities(p, signs);

    for _ in 0..4 * p + 10 {
        let a = xs.t_mul_vec(&combine(xs, &d, &chol.idx));
        let candidates = (0..p).filter(|&j| tied[j] && !in_set[j] && !excluded[j]);
        let worst = candidates
            .clone()
            .map(|j| 1.0 - signs[j] * a[j])
            .fold(0.0_f64, f64::max);
        if worst <= VIOLATION_TOL {
            return Direction { in_set, d, a, order };
        }
        let j = candidates
            .into_iter()
            .find(|&j| 1.0 - signs[j] * a[j] >= worst - 1e-12)
            .expect("the maximum is attained");
        if !chol.push(xs, j) {
            excluded[j] = true;
            continue;
        }
        in_set[j] = true;
        order.push(j);

        // Lawson-Hanson inner loop: back off along the segment towards the
        // unconstrained solution until no zero coefficient has the wrong sign.
        let mut d_old = d.clone();
        loop {
            let d_new = chol.velocities(p, signs);
            let wrong: Vec<usize> = chol
                .idx
                .iter()
                .copied()
                .filter(|&i| beta[i] == 0.0 && signs[i] * d_new[i] <= 0.0)
                .collect();
            if wrong.is_empty() {
                d = d_new;
                break;
            }
            if wrong == [j] && d_old[j] == 0.0 {
                // the new column cannot move in its sign direction here
                chol.remove(xs, j);
                in_set[j] = false;
                excluded[j] = true;
                order.pop();
                d = d_old;
                break;
            }
            let mut alpha = 1.0_f64;
            let mut blocking = wrong[0];
            for &i in &wrong {
                let e_old = signs[i] * d_old[i];
                let e_new = signs[i] * d_new[i];
                let ratio = if e_old > e_new { e_old / (e_old - e_new) } else { 0.0 };
                if ratio < alpha {
                    alpha = ratio;
                    blocking = i;
                }
            }
            for i in 0..p {
                d_old[i] += alpha * (d_new[i] - d_old[i]);
            }
            let leaving: Vec<usize> = chol
                .idx
                .iter()
                .copied()
                .filter(|&i| i == blocking || (beta[i] == 0.0 && signs[i] * d_old[i] <= 1e-14))
                .collect();
            for &i in &leaving {
                chol.remove(xs, i);
                in_set[i] = false;
                d_old[i] = 0.0;
                order.retain(|&k| k != i);
            }
        }
    }
    let a = xs.t_mul_vec(&combine(xs, &d, &chol.idx));
    Direction { in_set, d, a, order }
}

fn combine(xs: &Matrix, d: &[f64], idx: &[usize]) -> Vec<f64> {
    let mut u = vec![0.0; xs.nrows()];
    for &j in idx {
        axpy(d[j], xs.col(j), &mut u);
    }
    u
}

/// Cholesky factor of the Gram matrix of a growing set of unit columns.
#[derive(Default)]
struct Cholesky {
    idx: Vec<usize>,
    /// Row `i` of the lower factor, length `i + 1`.
    rows: Vec<Vec<f64>>,
}

impl Cholesky {
    /// Appends column `j`; returns `false` and leaves the factor untouched if
    /// it is numerically dependent on the current columns.
    fn push(&mut self, xs: &Matrix, j: usize) -> bool {
        let xj = xs.col(j);
        let mut w = Vec::with_capacity(self.idx.len() + 1);
        for (i, &k) in self.idx.iter().enumerate() {
            let g = dot(xs.col(k), xj);
            let s: f64 = self.rows[i][..i].iter().zip(&w).map(|(l, v)| l * v).sum();
            w.push((g - s) / self.rows[i][i]);
        }
        let diag = dot(xj, xj) - norm_sq(&w);
        if diag <= DEPENDENT_TOL {
            return false;
        }
        w.push(diag.sqrt());
        self.idx.push(j);
        self.rows.push(w);
        true
    }

    fn remove(&mut self, xs: &Matrix, j: usize) {
        let keep: Vec<usize> = self.idx.iter().copied().filter(|&k| k != j).collect();
        *self = Cholesky::default();
        for k in keep {
            self.push(xs, k);
        }
    }

    /// `G^{-1} s` scattered into a length-`p` vector.
    fn velocities(&self, p: usize, signs: &[f64]) -> Vec<f64> {
        let m = self.idx.len();
        let mut z = vec![0.0; m];
        for i in 0..m {
            let s: f64 = (0..i).map(|k| self.rows[i][k] * z[k]).sum();
            z[i] = (signs[self.idx[i]] - s) / self.rows[i][i];
        }
        for i in (0..m).rev() {
            let s: f64 = (i + 1..m).map(|k| self.rows[k][i] * z[k]).sum();
            z[i] = (z[i] - s) / self.rows[i][i];
        }
        let mut d = vec![0.0; p];
        for (i, &j) in self.idx.iter().enumerate() {
            d[j] = z[i];
        }
        d
    }
}
