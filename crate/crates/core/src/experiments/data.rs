use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::rng_from;
use crate::error::{Error, Result};
use crate::estimators::CoefficientVector;
use crate::linalg::Matrix;

/// Parameters of the Gaussian regression simulations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    /// Rows in each of the training and test sets.
    pub n: usize,
    pub p: usize,
    pub k_true: usize,
    /// Common pairwise correlation of the features.
    pub rho: f64,
    pub beta_true: CoefficientVector,
    pub noise_sd: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    /// Spec whose first `k_true` coefficients equal `signal` and the rest zero.
    pub fn with_leading_signal(
        n: usize,
        p: usize,
        k_true: usize,
        signal: f64,
        rho: f64,
        noise_sd: f64,
        seed: u64,
    ) -> Result<Self> {
        if k_true > p {
            return Err(Error::invalid("k_true", format!("{k_true} nonzero coefficients with p = {p}")));
        }
        let mut beta = vec![0.0; p];
        beta[..k_true].iter_mut().for_each(|b| *b = signal);
        let spec = SyntheticSpec {
            n,
            p,
            k_true,
            rho,
            beta_true: beta.into(),
            noise_sd,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.p == 0 {
            return Err(Error::invalid("n", "need at least one row and one feature"));
        }
        if self.k_true > self.p {
            return Err(Error::invalid(
                "k_true",
                format!("{} nonzero coefficients with p = {}", self.k_true, self.p),
            ));
        }
        if self.beta_true.len() != self.p || self.beta_true.l0_norm() != self.k_true {
            return Err(Error::invalid(
                "beta_true",
                format!("expected length {} with {} nonzeros", self.p, self.k_true),
            ));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::invalid("rho", format!("correlation must lie in [0, 1), got {}", self.rho)));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(Error::invalid("noise_sd", format!("got {}", self.noise_sd)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Matrix,
    pub y: Vec<f64>,
    /// Noise-free mean `X beta`.
    pub mean: Vec<f64>,
}

/// Independent training and test sets from the same design law and
/// coefficients. Features are `sqrt(rho) g + sqrt(1 - rho) e_j` with a shared
/// standard normal factor `g` per row.
pub fn gen_synthetic(spec: &SyntheticSpec) -> Result<(Dataset, Dataset)> {
    spec.validate()?;
    let mut rng = rng_from(spec.seed);
    let train = draw(spec, &mut rng);
    let test = draw(spec, &mut rng);
    Ok((train, test))
}

fn draw<R: Rng>(spec: &SyntheticSpec, rng: &mut R) -> Dataset {
    let (n, p) = (spec.n, spec.p);
    let shared = spec.rho.sqrt();
    let own = (1.0 - spec.rho).sqrt();
    let g: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
    let mut x = Matrix::zeros(n, p);
    for j in 0..p {
        let col = x.col_mut(j);
        for (i, v) in col.iter_mut().enumerate() {
            let e: f64 = StandardNormal.sample(rng);
            *v = shared * g[i] + own * e;
        }
    }
    let mean = x.mul_vec(&spec.beta_true.values);
    let y = mean
        .iter()
        .map(|m| {
            let e: f64 = StandardNormal.sample(rng);
            m + spec.noise_sd * e
        })
        .collect();
    Dataset { x, y, mean }
}

/// Two nearly collinear features plus independent distractors.
#[derive(Debug, Clone, PartialEq)]
pub struct CollinearTrap {
    /// Columns `x1, x2, z3, ..., z_{p_spurious + 2}`.
    pub data: Dataset,
    pub eps: f64,
    /// Coefficients of the exact representation
    /// `y_mean = (x1 + x2)/4 + (x1 - x2)/(4 eps)`.
    pub two_sparse: CoefficientVector,
    /// The one-sparse reading `y_mean = x2 / eps`, kept for comparison; it
    /// does not reproduce the mean.
    pub one_sparse_claim: CoefficientVector,
}

/// Builds `x1 = z1 + eps z2`, `x2 = z1 - eps z2` and `y = (z1 + z2)/2 + noise`
/// with `p_spurious` further standard normal columns unrelated to `y`.
pub fn gen_collinear_trap(
    p_spurious: usize,
    eps: f64,
    n: usize,
    noise_sd: f64,
    seed: u64,
) -> Result<CollinearTrap> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invalid("eps", format!("must be positive, got {eps}")));
    }
    if n == 0 {
        return Err(Error::invalid("n", "need at least one row"));
    }
    let mut rng = rng_from(seed);
    let p = p_spurious + 2;
    let z1: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let z2: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut x = Matrix::zeros(n, p);
    for i in 0..n {
        x.set(i, 0, z1[i] + eps * z2[i]);
        x.set(i, 1, z1[i] - eps * z2[i]);
    }
    for j in 2..p {
        for v in x.col_mut(j) {
            *v = StandardNormal.sample(&mut rng);
        }
    }
    let mean: Vec<f64> = z1.iter().zip(&z2).map(|(a, b)| 0.5 * (a + b)).collect();
    let y = mean
        .iter()
        .map(|m| {
            let e: f64 = StandardNormal.sample(&mut rng);
            m + noise_sd * e
        })
        .collect();

    let mut two = vec![0.0; p];
    two[0] = 0.25 + 0.25 / eps;
    two[1] = 0.25 - 0.25 / eps;
    let mut one = vec![0.0; p];
    one[1] = 1.0 / eps;
    Ok(CollinearTrap {
        data: Dataset { x, y, mean },
        eps,
        two_sparse: two.into(),
        one_sparse_claim: one.into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm;
    use crate::solvers::{forward_stepwise, lars_lasso_path, StopRule};

    fn corr(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let ma = a.iter().sum::<f64>() / n;
        let mb = b.iter().sum::<f64>() / n;
        let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
        for (x, y) in a.iter().zip(b) {
            sab += (x - ma) * (y - mb);
            saa += (x - ma) * (x - ma);
            sbb += (y - mb) * (y - mb);
        }
        sab / (saa * sbb).sqrt()
    }

    fn mean_pairwise_corr(x: &Matrix, cols: usize) -> f64 {
        let mut total = 0.0;
        let mut count = 0;
        for a in 0..cols {
            for b in a + 1..cols {
                total += corr(x.col(a), x.col(b));
                count += 1;
            }
        }
        total / count as f64
    }

    #[test]
    fn independent_columns_are_uncorrelated() {
        let spec = SyntheticSpec::with_leading_signal(100, 40, 4, 1.0, 0.0, 1.0, 3).unwrap();
        let (train, _) = gen_synthetic(&spec).unwrap();
        for a in 0..10 {
            for b in a + 1..10 {
                assert!(corr(train.x.col(a), train.x.col(b)).abs() < 3.0 / 10.0);
            }
        }
    }

    #[test]
    fn equicorrelated_columns() {
        // the shared factor is drawn once per data set, so the realized mean
        // correlation scatters around rho with sd about 0.035 at n = 100
        let mut within = 0;
        let mut total = 0.0;
        for seed in 0..20 {
            let spec = SyntheticSpec::with_leading_signal(100, 40, 4, 1.0, 0.64, 1.0, seed).unwrap();
            let (train, test) = gen_synthetic(&spec).unwrap();
            assert_ne!(train.y, test.y);
            let c = mean_pairwise_corr(&train.x, 40);
            total += c;
            if (c - 0.64).abs() < 0.05 {
                within += 1;
            }
        }
        assert!((total / 20.0 - 0.64).abs() < 0.02);
        assert!(within >= 15, "{within} of 20 within 0.05");
    }

    #[test]
    fn generation_is_seed_deterministic() {
        let spec = SyntheticSpec::with_leading_signal(20, 10, 2, 1.5, 0.3, 1.0, 99).unwrap();
        let a = gen_synthetic(&spec).unwrap();
        let b = gen_synthetic(&spec).unwrap();
        assert_eq!(a, b);
        let other = SyntheticSpec { seed: 100, ..spec };
        assert_ne!(gen_synthetic(&other).unwrap().0.y, a.0.y);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(SyntheticSpec::with_leading_signal(10, 3, 4, 1.0, 0.0, 1.0, 0).is_err());
        assert!(SyntheticSpec::with_leading_signal(10, 5, 2, 1.0, 1.0, 1.0, 0).is_err());
        let mut spec = SyntheticSpec::with_leading_signal(10, 5, 2, 1.0, 0.0, 1.0, 0).unwrap();
        spec.k_true = 3;
        assert!(gen_synthetic(&spec).is_err());
    }

    #[test]
    fn noiseless_single_signal_enters_first() {
        let spec = SyntheticSpec::with_leading_signal(100, 200, 1, 1.0, 0.0, 0.0, 5).unwrap();
        let (train, _) = gen_synthetic(&spec).unwrap();
        let path = lars_lasso_path(&train.y, &train.x, StopRule::MaxSteps(1)).unwrap();
        assert_eq!(path.steps[1].support, vec![0]);
    }

    #[test]
    fn collinear_trap_representations() {
        let trap = gen_collinear_trap(5, 0.5, 50, 0.0, 1).unwrap();
        let fitted = trap.data.x.mul_vec(&trap.two_sparse.values);
        for (a, b) in fitted.iter().zip(&trap.data.y) {
            assert!((a - b).abs() < 1e-12);
        }
        let claim = trap.data.x.mul_vec(&trap.one_sparse_claim.values);
        let gap: Vec<f64> = claim.iter().zip(&trap.data.y).map(|(a, b)| a - b).collect();
        assert!(norm(&gap) > 1.0);
        assert!(gen_collinear_trap(5, 0.0, 50, 0.0, 1).is_err());
    }

    #[test]
    fn collinear_trap_distractors_are_unrelated() {
        let n = 400;
        let trap = gen_collinear_trap(20, 0.1, n, 1.0, 2).unwrap();
        for j in 2..22 {
            assert!(corr(trap.data.x.col(j), &trap.data.y).abs() < 3.0 / (n as f64).sqrt());
        }
    }

    #[test]
    fn stepwise_beats_lasso_on_the_trap() {
        let trap = gen_collinear_trap(30, 0.05, 80, 0.0, 4).unwrap();
        let (x, y) = (&trap.data.x, &trap.data.y);
        let sw = forward_stepwise(y, x, StopRule::MaxSteps(2)).unwrap();
        assert_eq!(sw.last().support, vec![0, 1]);
        assert!(sw.last().residual_norm2 < 1e-20);
        let lasso = lars_lasso_path(y, x, StopRule::FullPath).unwrap();
        let two = lasso.steps.iter().filter(|s| s.support.len() == 2).last();
        if let Some(step) = two {
            assert!(step.residual_norm2 > sw.last().residual_norm2);
        }
    }
}
