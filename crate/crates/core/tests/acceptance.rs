//! Acceptance gate: every criterion runs at its stated tolerance and prints
//! one PASS/FAIL line. The process exits nonzero if any criterion fails.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use sparsity_core::estimators::{soft_threshold, CoefficientVector};
use sparsity_core::experiments::{
    monte_carlo_risk, run_figure_experiment, run_np_bench, split_seed, BenchMode, Figure,
    FigureRun, Method, ThresholdRule,
};
use sparsity_core::gaussian::{cdf, tail_bounds, upper_tail};
use sparsity_core::linalg::{axpy, dot, norm, Matrix};
use sparsity_core::risk::{
    c1_constant, envelope, envelope_point, risk_l0, risk_l1, Calibration, Direction,
};
use sparsity_core::solvers::{lars_lasso_path, StopRule};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| start + i as f64 * step).collect()
}

fn mc_agreement() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    let mut index = 0;
    for gamma in [0.5, 1.0, 2.0, 3.0, 4.0] {
        for beta in [0.0, 0.5, gamma, 2.0 * gamma, gamma + 5.0] {
            for rule in [ThresholdRule::Hard, ThresholdRule::Soft] {
                let mc = monte_carlo_risk(rule, beta, gamma, 200_000, split_seed(1, index)).unwrap();
                index += 1;
                let exact = match rule {
                    ThresholdRule::Hard => risk_l0(beta, gamma).unwrap(),
                    ThresholdRule::Soft => risk_l1(beta, gamma).unwrap(),
                };
                worst = worst.max((mc.mean - exact).abs() / mc.std_error);
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst < 4.0 && elapsed < Duration::from_secs(60),
        format!("max |MC - exact|/SE = {worst:.2} over 25 points and both rules, {elapsed:.1?}"),
    )
}

fn ls_identity() -> Outcome {
    let mut worst = 0.0_f64;
    for beta in [0.0, 1.0, 5.0, 50.0] {
        worst = worst.max((risk_l0(beta, 0.0).unwrap() - 1.0).abs());
        worst = worst.max((risk_l1(beta, 0.0).unwrap() - 1.0).abs());
    }
    outcome(worst < 1e-12, format!("max |R(beta, 0) - 1| = {worst:.1e}"))
}

fn asymptotes() -> Outcome {
    let mut worst = 0.0_f64;
    for g in [1.0_f64, 2.0, 4.0] {
        worst = worst.max((risk_l1(g + 40.0, g).unwrap() - (g * g + 1.0)).abs());
        worst = worst.max((risk_l0(g + 40.0, g).unwrap() - 1.0).abs());
    }
    outcome(worst < 1e-6, format!("max deviation from limits = {worst:.1e}"))
}

fn sups(direction: Direction, g: &[f64], calibration: Calibration) -> Vec<f64> {
    envelope(direction, g, calibration)
        .unwrap()
        .into_iter()
        .map(|p| p.unwrap().sup_ratio)
        .collect()
}

fn zero_calibrated_envelope() -> Outcome {
    let g = grid(0.05, 6.0, 0.05);
    let zero = sups(Direction::L0OverL1, &g, Calibration::EqualRiskAtZero);
    let (imax, max) = zero
        .iter()
        .enumerate()
        .fold((0, 0.0), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let (first, last) = (zero[0], *zero.last().unwrap());
    let inf = sups(Direction::L0OverL1, &g, Calibration::InfimumOptimized);
    let inf_max = inf.iter().copied().fold(0.0, f64::max);
    outcome(
        max <= 1.85 && first <= 1.1 && last <= 1.1,
        format!(
            "zero-calibrated max {max:.4} at gamma1 = {:.2}, ends {first:.4} and {last:.4} \
             (limits 1.85 and 1.1); infimum-optimized max {inf_max:.4}",
            g[imax]
        ),
    )
}

fn optimized_envelope_shape() -> Outcome {
    let g = grid(3.0, 6.0, 0.1);
    let inf = sups(Direction::L0OverL1, &g, Calibration::InfimumOptimized);
    let at_six = *inf.last().unwrap();
    let worst_rise = inf
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max);
    outcome(
        at_six <= 1.2 && worst_rise <= 1e-3,
        format!("value at 6 = {at_six:.4}, largest rise over [3, 6] = {worst_rise:.1e}"),
    )
}

fn soft_over_hard_growth() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for g0 in [2.0, 3.0, 4.0] {
        let p = envelope_point(Direction::L1OverL0, g0, Calibration::InfimumOptimized).unwrap();
        pass &= p.sup_ratio > g0;
        parts.push(format!(
            "gamma0={g0}: inf sup = {:.4} at gamma1 = {:.3}",
            p.sup_ratio, p.gamma_opposing
        ));
    }
    outcome(pass, parts.join("; "))
}

fn c1_fixture() -> Outcome {
    let c = c1_constant();
    outcome(
        (c.argmin_gamma0 - 5.71).abs() <= 0.05 && (c.c1.abs() - 5.161).abs() <= 0.01,
        format!(
            "argmin {:.4}, minimum {:.6} (reference magnitude 5.161, compared up to sign)",
            c.argmin_gamma0, c.c1
        ),
    )
}

fn orthonormal_lasso() -> Outcome {
    let n = 50;
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for _ in 0..n {
        let mut v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        for _ in 0..2 {
            for q in &cols {
                let d = dot(q, &v);
                axpy(-d, q, &mut v);
            }
        }
        let s = norm(&v);
        v.iter_mut().for_each(|e| *e /= s);
        cols.push(v);
    }
    let x = Matrix::from_columns(&cols).unwrap();
    let y: Vec<f64> = (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            3.0 * z
        })
        .collect();
    let ls = CoefficientVector::new(x.t_mul_vec(&y));
    let path = lars_lasso_path(&y, &x, StopRule::FullPath).unwrap();
    let mut worst = 0.0_f64;
    for step in &path.steps {
        let soft = soft_threshold(&ls, step.penalty / 2.0).unwrap();
        for (a, b) in step.coefficients.values.iter().zip(&soft.values) {
            worst = worst.max((a - b).abs());
        }
    }
    outcome(
        worst < 1e-8,
        format!(
            "{} steps, max |lasso - soft(X'y, lambda/2)| = {worst:.1e}",
            path.steps.len()
        ),
    )
}

fn all_triples_sizes() -> Outcome {
    let start = Instant::now();
    let rows = run_np_bench(&[9, 12, 15, 18], BenchMode::AllTriples, 0.25, 7).unwrap();
    let elapsed = start.elapsed();
    let mut pass = elapsed < Duration::from_secs(30);
    let mut parts = Vec::new();
    for pair in rows.chunks(2) {
        let (sw, lasso) = (&pair[0], &pair[1]);
        pass &= sw.reached && sw.support_size == sw.n / 3 && lasso.support_size >= sw.support_size;
        parts.push(format!(
            "n={}: stepwise {} lasso {}",
            sw.n, sw.support_size, lasso.support_size
        ));
    }
    outcome(pass, format!("{}; {elapsed:.1?}", parts.join(", ")))
}

fn random_cover_sparsity() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (k, n) in [99usize, 240].into_iter().enumerate() {
        let mut sparser = 0;
        let mut worst_sse = 0.0_f64;
        for s in 0..10u64 {
            let rows = run_np_bench(
                &[n],
                BenchMode::RandomP { per_row: 10 },
                0.25,
                split_seed(1000 + k as u64, s),
            )
            .unwrap();
            let (sw, lasso) = (&rows[0], &rows[1]);
            worst_sse = worst_sse.max(sw.terminal_sse).max(lasso.terminal_sse);
            pass &= sw.reached && lasso.reached;
            if sw.support_size < lasso.support_size {
                sparser += 1;
            }
        }
        pass &= worst_sse < 1.0 / 16.0 && sparser >= 9;
        parts.push(format!(
            "n={n}: stepwise sparser in {sparser}/10, max SSE {worst_sse:.4}"
        ));
    }
    outcome(pass, parts.join("; "))
}

fn sizes_for(run: &FigureRun, method: Method) -> Vec<usize> {
    run.trials
        .iter()
        .filter(|t| t.method == method)
        .map(|t| t.support_size)
        .collect()
}

fn rmse_for(run: &FigureRun, method: Method) -> Vec<f64> {
    run.trials
        .iter()
        .filter(|t| t.method == method)
        .map(|t| t.oos_rmse.unwrap())
        .collect()
}

fn independent_replica() -> Outcome {
    let run = run_figure_experiment(Figure::Fig4Independent, 20, 4).unwrap();
    let mut ric = sizes_for(&run, Method::RicRefit);
    ric.sort_unstable();
    let median = (ric[9] + ric[10]) as f64 / 2.0;
    let wins = rmse_for(&run, Method::RicRefit)
        .iter()
        .zip(rmse_for(&run, Method::LassoOosBest))
        .filter(|(a, b)| **a <= *b)
        .count();
    outcome(
        median == 4.0 && wins >= 14,
        format!("median RIC size {median}, RIC at least as good as best lasso in {wins}/20 (need 14)"),
    )
}

fn correlated_replica() -> Outcome {
    let run = run_figure_experiment(Figure::Fig5Correlated, 20, 5).unwrap();
    let mut lasso = sizes_for(&run, Method::LassoOosBest);
    let ric = sizes_for(&run, Method::RicRefit);
    let big = lasso.iter().filter(|&&s| s > 50).count();
    let small = ric.iter().filter(|&&s| s <= 10).count();
    lasso.sort_unstable();
    outcome(
        big >= 12 && small >= 12,
        format!(
            "lasso OOS-optimal size > 50 in {big}/20 (need 12, median {}), \
             RIC size <= 10 in {small}/20 (need 12)",
            lasso[10]
        ),
    )
}

fn shrinkage_replica() -> Outcome {
    let run = run_figure_experiment(Figure::Fig3Shrinkage, 20, 3).unwrap();
    match run.shrinkage.iter().find(|s| s.support_size == 4) {
        Some(at4) => outcome(
            at4.mean_estimate <= 0.9,
            format!(
                "mean lasso estimate of the unit coefficient at support size 4: {:.4} over {} trials",
                at4.mean_estimate, at4.trials
            ),
        ),
        None => outcome(false, "no path visited support size 4"),
    }
}

fn tail_suite() -> Outcome {
    let start = Instant::now();
    let zs: Vec<f64> = (0..=100)
        .map(|i| 0.1 * 380.0_f64.powf(i as f64 / 100.0))
        .collect();
    let mut bracket_ok = true;
    let mut printed_fail = Vec::new();
    for &z in &zs {
        let t = upper_tail(z);
        for k in 1..=4 {
            let b = tail_bounds(z, k).unwrap();
            let finite = [b.lower, b.upper, b.phi_tilde]
                .iter()
                .all(|v| v.is_finite() && *v >= 0.0);
            bracket_ok &= finite && b.lower <= t && t <= b.upper;
        }
        if t > 0.5 * (-z * z).exp() {
            printed_fail.push(z);
        }
    }
    let mut sym = 0.0_f64;
    for i in 0..=1000 {
        let z = i as f64 * 0.01;
        sym = sym.max(((cdf(-z) - upper_tail(z)) / upper_tail(z)).abs());
    }
    let elapsed = start.elapsed();
    let printed = match printed_fail.first() {
        None => "holds".to_string(),
        Some(z) => format!(
            "fails at {} of {} grid points (first z = {z:.3})",
            printed_fail.len(),
            zs.len()
        ),
    };
    outcome(
        bracket_ok && printed_fail.is_empty() && sym < 1e-14 && elapsed < Duration::from_secs(1),
        format!(
            "series brackets {}, cdf(-z) vs tail(z) max rel err {sym:.1e}, \
             tail <= exp(-z^2)/2 {printed}, {elapsed:.1?}",
            if bracket_ok { "hold" } else { "violated" }
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 14] = [
        ("closed-form risk vs Monte Carlo", mc_agreement),
        ("least-squares identity at zero cutoff", ls_identity),
        ("large-beta asymptotes", asymptotes),
        ("zero-calibrated hard/soft envelope", zero_calibrated_envelope),
        ("infimum-optimized hard/soft envelope shape", optimized_envelope_shape),
        ("soft/hard inf-sup exceeds gamma0", soft_over_hard_growth),
        ("C1 constant", c1_fixture),
        ("orthonormal lasso equals soft threshold", orthonormal_lasso),
        ("all-triples exact cover sizes", all_triples_sizes),
        ("random exact cover termination and sparsity", random_cover_sparsity),
        ("independent-design replica", independent_replica),
        ("correlated-design replica", correlated_replica),
        ("lasso shrinkage replica", shrinkage_replica),
        ("Gaussian tail-bound suite", tail_suite),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "[{}] {:>2}. {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
