//! Standard normal density, distribution and tail functions.
//!
//! Everything here is in the standardized `sigma = 1` scale. The upper tail is
//! computed directly rather than as `1 - cdf`, so it keeps full relative
//! accuracy deep into the tail where the risk formulas multiply it by large
//! polynomial factors.

use serde::Serialize;

use crate::error::{Error, Result};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Above this point the upper tail is evaluated as `pdf(z) * mills_ratio(z)`.
const MILLS_SWITCH: f64 = 10.0;

/// Standard normal density. Underflows to `0.0` for large `|z|`.
pub fn pdf(z: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Upper-tail probability `P(Z > z)`.
pub fn upper_tail(z: f64) -> f64 {
    if z >= MILLS_SWITCH {
        if z == f64::INFINITY {
            return 0.0;
        }
        return pdf(z) * mills_ratio(z);
    }
    0.5 * libm::erfc(z * std::f64::consts::FRAC_1_SQRT_2)
}

/// Lower-tail probability `P(Z <= z)`.
pub fn cdf(z: f64) -> f64 {
    upper_tail(-z)
}

/// Mills ratio `P(Z > a) / pdf(a)` for `a >= 4`.
pub fn mills_ratio(a: f64) -> f64 {
    mills_fraction(a).0
}

/// Continued-fraction representation of the Mills ratio at `a >= 4`.
///
/// Returns `(m, t1, t2)` where `m = 1/(a + t1)`, `t1 = 1/(a + t2)` and
/// `t2 = 2/(a + t3)`, with `t_k = k/(a + t_{k+1})` evaluated bottom-up. The
/// tails give the truncated moments without cancellation:
/// `int_0^inf t pdf(a+t) dt = pdf(a) m t1` and
/// `int_0^inf t^2 pdf(a+t) dt = pdf(a) m t1 t2`.
pub(crate) fn mills_fraction(a: f64) -> (f64, f64, f64) {
    debug_assert!(a >= 4.0, "continued fraction used outside its range: {a}");
    let depth = 16 + (400.0 / (a * a)).ceil() as usize;
    let mut t = 0.0;
    let mut t2 = 0.0;
    for k in (1..=depth).rev() {
        t = k as f64 / (a + t);
        if k == 2 {
            t2 = t;
        }
    }
    (1.0 / (a + t), t, t2)
}

/// Bracket on the upper-tail probability from the alternating asymptotic series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailBoundReport {
    pub z: f64,
    pub lower: f64,
    pub upper: f64,
    pub phi_tilde: f64,
}

/// Mills-series bounds on `P(Z > z)`.
///
/// The partial sum `pdf(z) * sum_{i=0..k} (-1)^i (2i-1)!! z^-(2i+1)` overestimates
/// the tail when `k` is even and underestimates it when `k` is odd; the report
/// pairs the `k` and `k - 1` truncations. The Chernoff bound
/// `exp(-z^2/2)/2` replaces the upper side when it is tighter.
pub fn tail_bounds(z: f64, k: u32) -> Result<TailBoundReport> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::invalid("z", format!("tail bounds need finite z > 0, got {z}")));
    }
    if k == 0 {
        return Err(Error::invalid("k", "at least one correction term is required"));
    }

    let inv2 = 1.0 / (z * z);
    let mut partial = Vec::with_capacity(k as usize + 1);
    let mut term = 1.0 / z;
    let mut sum = 0.0;
    for i in 0..=k {
        if i > 0 {
            term *= -((2 * i - 1) as f64) * inv2;
        }
        sum += term;
        partial.push(sum);
    }
    let (odd, even) = if k.is_multiple_of(2) {
        (partial[k as usize - 1], partial[k as usize])
    } else {
        (partial[k as usize], partial[k as usize - 1])
    };

    let density = pdf(z);
    let mut lower = density * odd;
    if !lower.is_finite() || lower < 0.0 {
        lower = 0.0;
    }
    let mut upper = density * even;
    let chernoff = 0.5 * (-0.5 * z * z).exp();
    if !upper.is_finite() || chernoff < upper {
        upper = chernoff;
    }

    Ok(TailBoundReport {
        z,
        lower,
        upper,
        phi_tilde: upper_tail(z),
    })
}
