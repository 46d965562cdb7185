//! Exact predictive risk of the hard- and soft-threshold estimators for a
//! single orthonormal coordinate (`sigma = 1`), cutoff calibration, and the
//! worst-case risk-ratio envelopes comparing the two.
//!
//! With `beta_ls = beta + Z`, `Z ~ N(0, 1)`, the hard threshold keeps
//! `beta_ls` when `|beta_ls| > gamma0` and the soft threshold shrinks it by
//! `gamma1`. Both risks are even in `beta`, so every routine works on `|beta|`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{cdf, mills_fraction, pdf, upper_tail};
use crate::scalar::{bisect, golden_max, golden_min};

/// Upper end of every cutoff search. Beyond it the zero-signal risks underflow.
pub const GAMMA_SEARCH_MAX: f64 = 60.0;

/// Extra range searched past the larger cutoff when maximizing over `beta`.
pub const BETA_MARGIN: f64 = 12.0;

/// Spacing of the dense `beta` grid that seeds the golden-section refinement.
pub const BETA_GRID_STEP: f64 = 0.025;

/// Tolerance on `|R0(gamma0) - R1(gamma1)|` accepted by calibration.
pub const CALIBRATION_TOL: f64 = 1e-10;

/// Which penalty an estimator comes from: `L0` is the hard threshold, `L1` the
/// soft threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Penalty {
    L0,
    L1,
}

impl Penalty {
    pub fn other(self) -> Penalty {
        match self {
            Penalty::L0 => Penalty::L1,
            Penalty::L1 => Penalty::L0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Penalty::L0 => "l0",
            Penalty::L1 => "l1",
        }
    }
}

/// Cutoffs of the two estimators together with their penalty-scale values.
///
/// Under an orthonormal design the l0 problem with penalty `lambda0` is solved
/// by hard thresholding at `sqrt(lambda0)`, and the l1 problem with penalty
/// `lambda1` by soft thresholding at `lambda1 / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPair {
    gamma0: f64,
    gamma1: f64,
    lambda0: f64,
    lambda1: f64,
}

impl ThresholdPair {
    pub fn new(gamma0: f64, gamma1: f64) -> Result<Self> {
        check_cutoff("gamma0", gamma0)?;
        check_cutoff("gamma1", gamma1)?;
        Ok(ThresholdPair {
            gamma0,
            gamma1,
            lambda0: gamma0 * gamma0,
            lambda1: 2.0 * gamma1,
        })
    }

    pub fn from_penalties(lambda0: f64, lambda1: f64) -> Result<Self> {
        check_cutoff("lambda0", lambda0)?;
        check_cutoff("lambda1", lambda1)?;
        ThresholdPair::new(lambda0.sqrt(), 0.5 * lambda1)
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }
    pub fn gamma1(&self) -> f64 {
        self.gamma1
    }
    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }
    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }
}

fn check_cutoff(name: &'static str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite and >= 0, got {value}")))
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("beta", format!("must be finite, got {beta}")))
    }
}

/// Risk of the hard-threshold estimator at true coefficient `beta`.
pub fn risk_l0(beta: f64, gamma0: f64) -> Result<f64> {
    check_cutoff("gamma0", gamma0)?;
    check_beta(beta)?;
    Ok(hard_risk(beta, gamma0))
}

/// Risk of the soft-threshold estimator at true coefficient `beta`.
pub fn risk_l1(beta: f64, gamma1: f64) -> Result<f64> {
    check_cutoff("gamma1", gamma1)?;
    check_beta(beta)?;
    Ok(soft_risk(beta, gamma1))
}

/// Risk of the estimator for `penalty` at cutoff `gamma`.
pub fn risk(penalty: Penalty, beta: f64, gamma: f64) -> Result<f64> {
    match penalty {
        Penalty::L0 => risk_l0(beta, gamma),
        Penalty::L1 => risk_l1(beta, gamma),
    }
}

pub(crate) fn hard_risk(beta: f64, gamma: f64) -> f64 {
    if gamma == 0.0 {
        return 1.0;
    }
    let b = beta.abs();
    let lo = gamma - b;
    let hi = gamma + b;
    let b2 = b * b;
    lo * pdf(lo) + hi * pdf(hi) + cdf(b - gamma) + b2 * cdf(lo) + (1.0 - b2) * upper_tail(hi)
}

pub(crate) fn soft_risk(beta: f64, gamma: f64) -> f64 {
    if gamma == 0.0 {
        return 1.0;
    }
    let b = beta.abs();
    let lo = gamma - b;
    let hi = gamma + b;
    // E[(Z - gamma)^2; Z > gamma - b] + E[(Z + gamma)^2; Z < -gamma - b]
    // + b^2 P(|b + Z| <= gamma)
    let upper = shifted_second_moment(lo, -b);
    let lower = shifted_second_moment(hi, b);
    let kept = b * b * (cdf(lo) - upper_tail(hi));
    upper + lower + kept
}

/// `int_a^inf (z - a + s)^2 pdf(z) dz`.
fn shifted_second_moment(a: f64, s: f64) -> f64 {
    let (j0, j1, j2) = truncated_moments(a);
    j2 + 2.0 * s * j1 + s * s * j0
}

/// `J_k(a) = int_0^inf t^k pdf(a + t) dt` for `k = 0, 1, 2`.
fn truncated_moments(a: f64) -> (f64, f64, f64) {
    if a > 6.0 {
        let density = pdf(a);
        let (m, t1, t2) = mills_fraction(a);
        let j0 = density * m;
        let j1 = j0 * t1;
        (j0, j1, j1 * t2)
    } else {
        let density = pdf(a);
        let tail = upper_tail(a);
        (tail, density - a * tail, (1.0 + a * a) * tail - a * density)
    }
}

/// `R0(gamma0)`: hard-threshold risk when the true coefficient is zero.
pub fn zero_risk_l0(gamma0: f64) -> Result<f64> {
    risk_l0(0.0, gamma0)
}

/// `R1(gamma1)`: soft-threshold risk when the true coefficient is zero.
pub fn zero_risk_l1(gamma1: f64) -> Result<f64> {
    risk_l1(0.0, gamma1)
}

/// Hard-threshold cutoff whose risk at zero equals the soft-threshold risk at
/// zero for `gamma1`.
pub fn calibrate_gamma0(gamma1: f64) -> Result<f64> {
    check_cutoff("gamma1", gamma1)?;
    calibrate(Penalty::L0, soft_risk(0.0, gamma1))
}

/// Soft-threshold cutoff whose risk at zero equals the hard-threshold risk at
/// zero for `gamma0`.
pub fn calibrate_gamma1(gamma0: f64) -> Result<f64> {
    check_cutoff("gamma0", gamma0)?;
    calibrate(Penalty::L1, hard_risk(0.0, gamma0))
}

/// Solves `R(0, gamma) = target` for the estimator `penalty`. Both zero risks
/// fall strictly from 1 at `gamma = 0` towards 0, so the root is unique.
fn calibrate(penalty: Penalty, target: f64) -> Result<f64> {
    let zero_risk = |g: f64| match penalty {
        Penalty::L0 => hard_risk(0.0, g),
        Penalty::L1 => soft_risk(0.0, g),
    };
    if target >= 1.0 {
        return Ok(0.0);
    }
    if !(target >= f64::MIN_POSITIVE) {
        return Err(Error::BracketExhausted { limit: GAMMA_SEARCH_MAX });
    }
    let mut hi = 1.0;
    while zero_risk(hi) > target {
        if hi >= GAMMA_SEARCH_MAX {
            return Err(Error::BracketExhausted { limit: GAMMA_SEARCH_MAX });
        }
        hi = (2.0 * hi).min(GAMMA_SEARCH_MAX);
    }
    let root = bisect(|g| zero_risk(g) - target, 0.0, hi);
    debug_assert!((zero_risk(root) - target).abs() < CALIBRATION_TOL);
    Ok(root)
}

/// Hard-threshold cutoff `gamma1 + 4 log(gamma1) / gamma1`, clamped at zero.
pub fn heuristic_gamma0(gamma1: f64) -> Result<f64> {
    if !(gamma1 > 0.0) || !gamma1.is_finite() {
        return Err(Error::invalid("gamma1", format!("must be finite and > 0, got {gamma1}")));
    }
    Ok((gamma1 + 4.0 * gamma1.ln() / gamma1).max(0.0))
}

/// Risk ratio with `0/0` read as 1.
fn ratio(numerator: f64, denominator: f64) -> f64 {
    if denominator == 0.0 {
        if numerator == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        numerator / denominator
    }
}

/// `R(beta, numerator) / R(beta, other)` at cutoffs `(gamma0, gamma1)`.
pub fn risk_ratio(numerator: Penalty, beta: f64, gamma0: f64, gamma1: f64) -> f64 {
    let l0 = hard_risk(beta, gamma0);
    let l1 = soft_risk(beta, gamma1);
    match numerator {
        Penalty::L0 => ratio(l0, l1),
        Penalty::L1 => ratio(l1, l0),
    }
}

/// Limit of the ratio as `beta -> inf`: the hard risk tends to 1 and the soft
/// risk to `gamma1^2 + 1`.
pub fn limit_ratio(numerator: Penalty, gamma1: f64) -> f64 {
    let soft = gamma1 * gamma1 + 1.0;
    match numerator {
        Penalty::L0 => 1.0 / soft,
        Penalty::L1 => soft,
    }
}

/// Worst case of a risk ratio over the true coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupRatio {
    pub sup: f64,
    /// `f64::INFINITY` when the supremum is the `beta -> inf` limit.
    pub argmax_beta: f64,
}

/// `sup_beta R(beta, numerator) / R(beta, other)`.
///
/// Scans `beta` in `[0, max(gamma0, gamma1) + 12]`, refines the best grid cell
/// by golden section, and compares with the limit at infinity.
pub fn sup_ratio(numerator: Penalty, gamma0: f64, gamma1: f64) -> Result<SupRatio> {
    check_cutoff("gamma0", gamma0)?;
    check_cutoff("gamma1", gamma1)?;
    Ok(sup_ratio_unchecked(numerator, gamma0, gamma1))
}

fn sup_ratio_unchecked(numerator: Penalty, gamma0: f64, gamma1: f64) -> SupRatio {
    let span = gamma0.max(gamma1) + BETA_MARGIN;
    let cells = (span / BETA_GRID_STEP).ceil() as usize;
    let step = span / cells as f64;
    let f = |b: f64| risk_ratio(numerator, b, gamma0, gamma1);

    let mut best_i = 0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=cells {
        let r = f(i as f64 * step);
        if r > best {
            best = r;
            best_i = i;
        }
    }
    let mut argmax = best_i as f64 * step;
    if best.is_finite() {
        let lo = best_i.saturating_sub(1) as f64 * step;
        let hi = (best_i + 1).min(cells) as f64 * step;
        let (x, fx) = golden_max(f, lo, hi, 1e-10);
        if fx > best {
            best = fx;
            argmax = x;
        }
    }

    let limit = limit_ratio(numerator, gamma1);
    if best <= limit * (1.0 + 1e-12) {
        SupRatio {
            sup: limit,
            argmax_beta: f64::INFINITY,
        }
    } else {
        SupRatio {
            sup: best,
            argmax_beta: argmax,
        }
    }
}

/// Which estimator sits in the numerator of an envelope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    L0OverL1,
    L1OverL0,
}

impl Direction {
    pub fn numerator(self) -> Penalty {
        match self {
            Direction::L0OverL1 => Penalty::L0,
            Direction::L1OverL0 => Penalty::L1,
        }
    }

    /// The estimator whose cutoff is swept along the grid.
    pub fn free(self) -> Penalty {
        self.numerator().other()
    }

    pub fn name(self) -> &'static str {
        match self {
            Direction::L0OverL1 => "l0_over_l1",
            Direction::L1OverL0 => "l1_over_l0",
        }
    }
}

/// How the opposing cutoff is chosen for each swept cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Calibration {
    /// Equal risk at `beta = 0`.
    EqualRiskAtZero,
    /// Minimize the worst-case ratio over the opposing cutoff.
    InfimumOptimized,
}

impl Calibration {
    pub fn name(self) -> &'static str {
        match self {
            Calibration::EqualRiskAtZero => "equal_risk_at_zero",
            Calibration::InfimumOptimized => "infimum_optimized",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopePoint {
    pub gamma_free: f64,
    pub gamma_opposing: f64,
    pub sup_ratio: f64,
    pub argmax_beta: f64,
    pub calibration: Calibration,
}

/// Worst-case ratio as a function of the opposing cutoff, the free cutoff
/// being held fixed.
fn sup_over_opposing(direction: Direction, free: f64, opposing: f64) -> SupRatio {
    match direction {
        // free = gamma1, opposing = gamma0
        Direction::L0OverL1 => sup_ratio_unchecked(Penalty::L0, opposing, free),
        // free = gamma0, opposing = gamma1
        Direction::L1OverL0 => sup_ratio_unchecked(Penalty::L1, free, opposing),
    }
}

const OPPOSING_COARSE_STEP: f64 = 0.5;

/// One envelope point. Calibration failures are returned, not panicked on.
pub fn envelope_point(direction: Direction, free: f64, calibration: Calibration) -> Result<EnvelopePoint> {
    check_cutoff("gamma", free)?;
    let (opposing, sup) = match calibration {
        Calibration::EqualRiskAtZero => {
            let opposing = match direction {
                Direction::L0OverL1 => calibrate_gamma0(free)?,
                Direction::L1OverL0 => calibrate_gamma1(free)?,
            };
            (opposing, sup_over_opposing(direction, free, opposing))
        }
        Calibration::InfimumOptimized => {
            let cells = (GAMMA_SEARCH_MAX / OPPOSING_COARSE_STEP).round() as usize;
            let coarse: Vec<SupRatio> = (0..=cells)
                .map(|j| sup_over_opposing(direction, free, j as f64 * OPPOSING_COARSE_STEP))
                .collect();
            let (best_j, best) = coarse
                .iter()
                .enumerate()
                .fold((0, coarse[0]), |acc, (j, s)| if s.sup < acc.1.sup { (j, *s) } else { acc });
            let lo = best_j.saturating_sub(1) as f64 * OPPOSING_COARSE_STEP;
            let hi = ((best_j + 1).min(cells)) as f64 * OPPOSING_COARSE_STEP;
            let (x, _) = golden_min(|g| sup_over_opposing(direction, free, g).sup, lo, hi, 1e-7);
            let refined = sup_over_opposing(direction, free, x);
            if refined.sup <= best.sup {
                (x, refined)
            } else {
                (best_j as f64 * OPPOSING_COARSE_STEP, best)
            }
        }
    };
    Ok(EnvelopePoint {
        gamma_free: free,
        gamma_opposing: opposing,
        sup_ratio: sup.sup,
        argmax_beta: sup.argmax_beta,
        calibration,
    })
}

/// Envelope over a strictly increasing grid of positive free cutoffs. A point
/// whose calibration fails is reported as an error in place; the sweep goes on.
pub fn envelope(
    direction: Direction,
    gamma_grid: &[f64],
    calibration: Calibration,
) -> Result<Vec<Result<EnvelopePoint>>> {
    if gamma_grid.is_empty() {
        return Err(Error::invalid("gamma_grid", "empty grid"));
    }
    if gamma_grid.iter().any(|g| !(*g > 0.0) || !g.is_finite()) {
        return Err(Error::invalid("gamma_grid", "grid values must be finite and positive"));
    }
    if gamma_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("gamma_grid", "grid must be strictly increasing"));
    }
    Ok(gamma_grid
        .par_iter()
        .map(|&g| envelope_point(direction, g, calibration))
        .collect())
}

/// Tabulated risks of both estimators at fixed cutoffs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskCurve {
    pub gamma: ThresholdPair,
    pub betas: Vec<f64>,
    pub r_l0: Vec<f64>,
    pub r_l1: Vec<f64>,
    pub ratio_l1_over_l0: Vec<f64>,
}

pub fn risk_curve(gamma: ThresholdPair, betas: &[f64]) -> Result<RiskCurve> {
    if betas.iter().any(|b| !(*b >= 0.0) || !b.is_finite()) {
        return Err(Error::invalid("betas", "values must be finite and >= 0"));
    }
    if betas.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("betas", "values must be ordered"));
    }
    let r_l0: Vec<f64> = betas.iter().map(|&b| hard_risk(b, gamma.gamma0)).collect();
    let r_l1: Vec<f64> = betas.iter().map(|&b| soft_risk(b, gamma.gamma1)).collect();
    let ratio_l1_over_l0 = r_l0.iter().zip(&r_l1).map(|(&h, &s)| ratio(s, h)).collect();
    Ok(RiskCurve {
        gamma,
        betas: betas.to_vec(),
        r_l0,
        r_l1,
        ratio_l1_over_l0,
    })
}

/// `2^(5/2) exp(g^2/4) / (g^6 + g^4) - g`, the lower-bound gap whose minimum
/// gives the constant in the l1-over-l0 lower bound.
pub fn c1_objective(gamma0: f64) -> f64 {
    let g2 = gamma0 * gamma0;
    2f64.powf(2.5) * (0.25 * g2).exp() / (g2 * g2 * (g2 + 1.0)) - gamma0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct C1Constant {
    pub c1: f64,
    pub argmin_gamma0: f64,
}

/// Minimum of [`c1_objective`] over `(0, 20]`.
pub fn c1_constant() -> C1Constant {
    let step = 0.05;
    let (best_i, _) = (1..=400)
        .map(|i| (i, c1_objective(i as f64 * step)))
        .fold((1, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    let lo = (best_i - 1) as f64 * step;
    let hi = ((best_i + 1).min(400)) as f64 * step;
    let (x, fx) = golden_min(c1_objective, lo.max(1e-3), hi, 1e-12);
    C1Constant {
        c1: fx,
        argmin_gamma0: x,
    }
}
