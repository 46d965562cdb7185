use std::collections::HashSet;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::rng_from;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Largest ground set for which every 3-subset is enumerated.
pub const ALL_TRIPLES_MAX_N: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverMode {
    /// Every 3-subset of the ground set.
    AllTriples,
    /// A planted cover plus distinct random triples, `p` columns in total.
    RandomP(usize),
}

/// A regression instance whose exact 3-set covers give zero residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactCoverInstance {
    pub n: usize,
    /// Ground-set elements (rows) of each column, ascending.
    pub columns: Vec<[usize; 3]>,
    /// Column indices of a disjoint cover of the ground set.
    pub planted_cover: Vec<usize>,
    /// The all-ones response.
    pub y: Vec<f64>,
}

impl ExactCoverInstance {
    pub fn p(&self) -> usize {
        self.columns.len()
    }

    /// Binary `n x p` design.
    pub fn design(&self) -> Matrix {
        let mut x = Matrix::zeros(self.n, self.p());
        for (j, t) in self.columns.iter().enumerate() {
            for &i in t {
                x.set(i, j, 1.0);
            }
        }
        x
    }
}

fn binomial3(n: usize) -> usize {
    if n < 3 {
        0
    } else {
        n * (n - 1) * (n - 2) / 6
    }
}

/// Builds an exact-cover regression instance with column order shuffled by `seed`.
pub fn gen_exact_cover(n: usize, mode: CoverMode, seed: u64) -> Result<ExactCoverInstance> {
    if n == 0 || !n.is_multiple_of(3) {
        return Err(Error::invalid("n", format!("ground set size must be a positive multiple of 3, got {n}")));
    }
    let mut rng = rng_from(seed);
    let mut triples: Vec<[usize; 3]>;
    let planted: Vec<[usize; 3]>;
    match mode {
        CoverMode::AllTriples => {
            if n > ALL_TRIPLES_MAX_N {
                return Err(Error::invalid(
                    "n",
                    format!("all-triples instances are limited to n <= {ALL_TRIPLES_MAX_N}"),
                ));
            }
            triples = Vec::with_capacity(binomial3(n));
            for a in 0..n {
                for b in a + 1..n {
                    for c in b + 1..n {
                        triples.push([a, b, c]);
                    }
                }
            }
            planted = (0..n / 3).map(|k| [3 * k, 3 * k + 1, 3 * k + 2]).collect();
        }
        CoverMode::RandomP(p) => {
            if p < n / 3 || p > binomial3(n) {
                return Err(Error::invalid(
                    "p",
                    format!("need n/3 <= p <= C(n,3) = {}, got {p}", binomial3(n)),
                ));
            }
            let mut ground: Vec<usize> = (0..n).collect();
            ground.shuffle(&mut rng);
            planted = ground
                .chunks_exact(3)
                .map(|c| {
                    let mut t = [c[0], c[1], c[2]];
                    t.sort_unstable();
                    t
                })
                .collect();
            let mut seen: HashSet<[usize; 3]> = planted.iter().copied().collect();
            triples = planted.clone();
            while triples.len() < p {
                let mut t = [0; 3];
                let picks = rand::seq::index::sample(&mut rng, n, 3);
                for (slot, i) in t.iter_mut().zip(picks.iter()) {
                    *slot = i;
                }
                t.sort_unstable();
                if seen.insert(t) {
                    triples.push(t);
                }
            }
        }
    }

    triples.shuffle(&mut rng);
    let planted_cover = planted
        .iter()
        .map(|t| triples.iter().position(|c| c == t).expect("planted triple present"))
        .collect();
    Ok(ExactCoverInstance {
        n,
        columns: triples,
        planted_cover,
        y: vec![1.0; n],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_cover(inst: &ExactCoverInstance) {
        let x = inst.design();
        let mut sum = vec![0.0; inst.n];
        for &j in &inst.planted_cover {
            for (s, v) in sum.iter_mut().zip(x.col(j)) {
                *s += v;
            }
        }
        assert_eq!(sum, inst.y);
        assert_eq!(inst.planted_cover.len(), inst.n / 3);
        for j in 0..inst.p() {
            assert_eq!(x.col(j).iter().filter(|v| **v == 1.0).count(), 3);
        }
    }

    #[test]
    fn all_triples_counts() {
        let inst = gen_exact_cover(9, CoverMode::AllTriples, 1).unwrap();
        assert_eq!(inst.p(), 84);
        assert_cover(&inst);
        let distinct: HashSet<_> = inst.columns.iter().collect();
        assert_eq!(distinct.len(), 84);
    }

    #[test]
    fn random_p_instance() {
        let inst = gen_exact_cover(99, CoverMode::RandomP(990), 7).unwrap();
        assert_eq!(inst.p(), 990);
        assert_eq!(inst.planted_cover.len(), 33);
        assert_cover(&inst);
        let distinct: HashSet<_> = inst.columns.iter().collect();
        assert_eq!(distinct.len(), 990);
    }

    #[test]
    fn seed_controls_order() {
        let a = gen_exact_cover(12, CoverMode::AllTriples, 1).unwrap();
        let b = gen_exact_cover(12, CoverMode::AllTriples, 1).unwrap();
        let c = gen_exact_cover(12, CoverMode::AllTriples, 2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.columns, c.columns);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(gen_exact_cover(10, CoverMode::AllTriples, 0).is_err());
        assert!(gen_exact_cover(33, CoverMode::AllTriples, 0).is_err());
        assert!(gen_exact_cover(9, CoverMode::RandomP(85), 0).is_err());
        assert!(gen_exact_cover(9, CoverMode::RandomP(2), 0).is_err());
    }
}
