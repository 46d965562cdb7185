use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::rng_from;
use crate::error::{Error, Result};
use crate::estimators::soft;

pub const MIN_DRAWS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdRule {
    Hard,
    Soft,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
}

/// Simulated risk `E (est(beta + Z) - beta)^2` of a threshold rule.
pub fn monte_carlo_risk(
    rule: ThresholdRule,
    beta: f64,
    gamma: f64,
    n_draws: usize,
    seed: u64,
) -> Result<McEstimate> {
    if n_draws < MIN_DRAWS {
        return Err(Error::invalid("n_draws", format!("need at least {MIN_DRAWS}, got {n_draws}")));
    }
    if !(gamma >= 0.0 && gamma.is_finite()) || !beta.is_finite() {
        return Err(Error::invalid("gamma", format!("need finite beta and gamma >= 0, got ({beta}, {gamma})")));
    }
    let mut rng = rng_from(seed);
    let (mut mean, mut m2) = (0.0, 0.0);
    for i in 0..n_draws {
        let z: f64 = StandardNormal.sample(&mut rng);
        let ls = beta + z;
        let est = match rule {
            ThresholdRule::Hard => {
                if ls.abs() > gamma {
                    ls
                } else {
                    0.0
                }
            }
            ThresholdRule::Soft => soft(ls, gamma),
        };
        let loss = (est - beta) * (est - beta);
        let delta = loss - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (loss - mean);
    }
    let var = m2 / (n_draws - 1) as f64;
    Ok(McEstimate {
        mean,
        std_error: (var / n_draws as f64).sqrt(),
    })
}
