use std::path::Path;

use serde::Serialize;
use serde_json::json;
use sparsity_core::experiments::{
    gen_synthetic, monte_carlo_risk, run_figure_with, run_np_bench, split_seed, Figure, SyntheticSpec,
    ThresholdRule,
};
use sparsity_core::risk::{c1_constant, c1_objective, envelope, risk_curve, risk_l0, risk_l1, ThresholdPair};
use sparsity_core::selection::select_on_path;
use sparsity_core::solvers::{forward_stepwise, lars_lasso_path};
use sparsity_core::{LassoPath, Matrix};

use crate::args::{
    parse_grid, C1Args, Command, DataArgs, EnvelopeArgs, McCheckArgs, NpbenchArgs, PathArgs, RicArgs,
    RiskCurveArgs, SimulateArgs, MC_RULES,
};
use crate::error::{CliError, CliResult};
use crate::output::{join_indices, Sink};
use crate::plot::Series;

/// What a command reports back for the manifest, plus a failed acceptance
/// check that should set the exit status after outputs are written.
pub struct Report {
    pub summary: serde_json::Value,
    pub check_failure: Option<CliError>,
}

impl From<serde_json::Value> for Report {
    fn from(summary: serde_json::Value) -> Self {
        Report {
            summary,
            check_failure: None,
        }
    }
}

pub fn run(command: &Command, seed: u64, sink: &mut Sink) -> CliResult<Report> {
    match command {
        Command::RiskCurve(a) => risk_curve_cmd(a, sink).map(Into::into),
        Command::Envelope(a) => envelope_cmd(a, sink).map(Into::into),
        Command::C1(a) => c1_cmd(a, sink).map(Into::into),
        Command::Lars(a) => path_cmd(a, seed, sink, lars_lasso_path).map(Into::into),
        Command::Stepwise(a) => path_cmd(a, seed, sink, forward_stepwise).map(Into::into),
        Command::RicSelect(a) => ric_cmd(a, seed, sink).map(Into::into),
        Command::Simulate(a) => simulate_cmd(a, seed, sink).map(Into::into),
        Command::Npbench(a) => npbench_cmd(a, seed, sink).map(Into::into),
        Command::McCheck(a) => mc_check_cmd(a, seed, sink),
        Command::FromConfig(_) => Err(CliError::usage("`from-config` must be resolved before dispatch")),
    }
}

#[derive(Serialize)]
struct RiskRow {
    beta: f64,
    r_l0: f64,
    r_l1: f64,
    ratio: f64,
}

fn risk_curve_cmd(a: &RiskCurveArgs, sink: &mut Sink) -> CliResult<serde_json::Value> {
    let betas = parse_grid(&a.betas)?;
    let curve = risk_curve(ThresholdPair::new(a.gamma0, a.gamma1)?, &betas)?;
    let rows: Vec<RiskRow> = (0..betas.len())
        .map(|i| RiskRow {
            beta: curve.betas[i],
            r_l0: curve.r_l0[i],
            r_l1: curve.r_l1[i],
            ratio: curve.ratio_l1_over_l0[i],
        })
        .collect();
    sink.table("risk_curve", &rows)?;
    let series = [
        Series::new("r_l0", rows.iter().map(|r| (r.beta, r.r_l0)).collect()),
        Series::new("r_l1", rows.iter().map(|r| (r.beta, r.r_l1)).collect()),
        Series::new("ratio", rows.iter().map(|r| (r.beta, r.ratio)).collect()),
    ];
    let title = format!("Risk at gamma0 = {}, gamma1 = {}", a.gamma0, a.gamma1);
    sink.plot("risk_curve", [&title, "beta", "risk"], &series, a.svg)?;
    Ok(json!({ "points": rows.len() }))
}

#[derive(Serialize)]
struct EnvelopeRow {
    gamma_free: f64,
    gamma_opposing: f64,
    sup_ratio: f64,
    argmax_beta: f64,
    calibration: &'static str,
}

fn envelope_cmd(a: &EnvelopeArgs, sink: &mut Sink) -> CliResult<serde_json::Value> {
    let grid = parse_grid(&a.grid)?;
    let mut rows = Vec::new();
    let mut series = Vec::new();
    let mut failures = Vec::new();
    for mode in a.calibration.modes() {
        let mut points = Vec::new();
        for (g, point) in grid.iter().zip(envelope(a.direction.into(), &grid, mode)?) {
            match point {
                Ok(p) => {
                    points.push((p.gamma_free, p.sup_ratio));
                    rows.push(EnvelopeRow {
                        gamma_free: p.gamma_free,
                        gamma_opposing: p.gamma_opposing,
                        sup_ratio: p.sup_ratio,
                        argmax_beta: p.argmax_beta,
                        calibration: mode.name(),
                    });
                }
                Err(e) => failures.push(json!({ "gamma_free": g, "calibration": mode.name(), "error": e.to_string() })),
            }
        }
        series.push(Series::new(mode.name(), points));
    }
    if rows.is_empty() {
        return Err(CliError::Numerical(format!("every envelope point failed: {}", failures[0]["error"])));
    }
    for f in &failures {
        eprintln!("warning: skipped envelope point {f}");
    }
    sink.table("envelope", &rows)?;
    let direction: sparsity_core::risk::Direction = a.direction.into();
    let title = format!("Worst-case risk ratio ({})", direction.name());
    sink.plot("envelope", [&title, "free cutoff", "sup ratio"], &series, a.svg)?;
    Ok(json!({ "points": rows.len(), "skipped": failures }))
}

#[derive(Serialize)]
struct C1Row {
    gamma0: f64,
    objective: f64,
}

fn c1_cmd(a: &C1Args, sink: &mut Sink) -> CliResult<serde_json::Value> {
    let grid = parse_grid(&a.grid)?;
    let c = c1_constant();
    sink.table("c1", &[c])?;
    let rows: Vec<C1Row> = grid
        .iter()
        .map(|&g| C1Row {
            gamma0: g,
            objective: c1_objective(g),
        })
        .collect();
    sink.table("c1_objective", &rows)?;
    let series = [Series::new("objective", rows.iter().map(|r| (r.gamma0, r.objective)).collect())];
    sink.plot("c1_objective", ["C1 objective", "gamma0", "objective"], &series, a.svg)?;
    println!("c1 = {:.6} at gamma0 = {:.4}", c.c1, c.argmin_gamma0);
    Ok(json!({ "c1": c.c1, "argmin_gamma0": c.argmin_gamma0 }))
}

/// Design and response from a CSV file or from the synthetic generator.
fn load_problem(d: &DataArgs, seed: u64) -> CliResult<(Matrix, Vec<f64>)> {
    match &d.data {
        Some(path) => read_problem(path, &d.response),
        None => {
            let spec = SyntheticSpec::with_leading_signal(d.n, d.p, d.k, d.signal, d.rho, d.noise_sd, seed)?;
            let (train, _) = gen_synthetic(&spec)?;
            Ok((train.x, train.y))
        }
    }
}

fn read_problem(path: &Path, response: &str) -> CliResult<(Matrix, Vec<f64>)> {
    let csv_err = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
    let headers = reader.headers().map_err(csv_err)?.clone();
    let y_col = headers
        .iter()
        .position(|h| h == response)
        .ok_or_else(|| CliError::usage(format!("{}: no column named `{response}`", path.display())))?;
    let mut y = Vec::new();
    let mut columns = vec![Vec::new(); headers.len() - 1];
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let mut feature = 0;
        for (j, cell) in record.iter().enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| {
                CliError::usage(format!("{}: row {}, column `{}`: `{cell}` is not a number", path.display(), line + 2, &headers[j]))
            })?;
            if j == y_col {
                y.push(v);
            } else {
                columns[feature].push(v);
                feature += 1;
            }
        }
    }
    if y.is_empty() || columns.is_empty() {
        return Err(CliError::usage(format!("{}: need at least one row and one feature column", path.display())));
    }
    Ok((Matrix::from_columns(&columns)?, y))
}

#[derive(Serialize)]
struct PathRow {
    step: usize,
    support_size: usize,
    penalty: f64,
    residual_norm2: f64,
    support: String,
}

#[derive(Serialize)]
struct CoefficientRow {
    step: usize,
    index: usize,
    value: f64,
}

fn write_path(path: &LassoPath, sink: &mut Sink) -> CliResult<()> {
    let rows: Vec<PathRow> = path
        .steps
        .iter()
        .enumerate()
        .map(|(step, s)| PathRow {
            step,
            support_size: s.support.len(),
            penalty: s.penalty,
            residual_norm2: s.residual_norm2,
            support: join_indices(&s.support),
        })
        .collect();
    sink.table("path", &rows)?;
    let coefs: Vec<CoefficientRow> = path
        .steps
        .iter()
        .enumerate()
        .flat_map(|(step, s)| {
            s.support.iter().map(move |&index| CoefficientRow {
                step,
                index,
                value: s.coefficients.values[index],
            })
        })
        .collect();
    sink.table("coefficients", &coefs)
}

fn path_cmd(
    a: &PathArgs,
    seed: u64,
    sink: &mut Sink,
    solver: fn(&[f64], &Matrix, sparsity_core::StopRule) -> sparsity_core::Result<LassoPath>,
) -> CliResult<serde_json::Value> {
    let (x, y) = load_problem(&a.data, seed)?;
    let path = solver(&y, &x, a.stop)?;
    write_path(&path, sink)?;
    let last = path.last();
    Ok(json!({
        "design_id": path.design_id,
        "steps": path.steps.len(),
        "stop_reason": path.stop_reason,
        "final_support_size": last.support.len(),
        "final_residual_norm2": last.residual_norm2,
    }))
}

#[derive(Serialize)]
struct SelectionRow {
    support_size: usize,
    rss: f64,
    penalty: f64,
    criterion: f64,
    selected: bool,
    support: String,
}

#[derive(Serialize)]
struct SelectedCoefficient {
    index: usize,
    value: f64,
}

fn ric_cmd(a: &RicArgs, seed: u64, sink: &mut Sink) -> CliResult<serde_json::Value> {
    let (x, y) = load_problem(&a.data, seed)?;
    let path = lars_lasso_path(&y, &x, sparsity_core::StopRule::FullPath)?;
    let sel = select_on_path(&path, &y, &x, a.sigma2)?;
    let rows: Vec<SelectionRow> = sel
        .scored
        .iter()
        .map(|m| SelectionRow {
            support_size: m.support.len(),
            rss: m.rss,
            penalty: m.penalty,
            criterion: m.criterion,
            selected: m.support == sel.model.support,
            support: join_indices(&m.support),
        })
        .collect();
    sink.table("selection", &rows)?;
    let chosen: Vec<SelectedCoefficient> = sel
        .model
        .support
        .iter()
        .map(|&index| SelectedCoefficient {
            index,
            value: sel.model.refit_coefficients.values[index],
        })
        .collect();
    sink.table("selected_coefficients", &chosen)?;
    Ok(json!({
        "design_id": path.design_id,
        "selected_support": sel.model.support,
        "criterion": sel.model.criterion,
        "rss": sel.model.rss,
        "scored": sel.scored.len(),
        "skipped": sel.skipped,
    }))
}

#[derive(Serialize)]
struct TrialRow {
    seed: u64,
    method: &'static str,
    support_size: usize,
    criterion: Option<f64>,
    oos_rmse: Option<f64>,
    terminal_sse: f64,
}

fn simulate_cmd(a: &SimulateArgs, seed: u64, sink: &mut Sink) -> CliResult<serde_json::Value> {
    let figure: Figure = a.figure.into();
    let mut cfg = figure.default_config();
    cfg.n = a.n.unwrap_or(cfg.n);
    cfg.p = a.p.unwrap_or(cfg.p);
    cfg.k_true = a.k.unwrap_or(cfg.k_true);
    cfg.signal = a.signal.unwrap_or(cfg.signal);
    cfg.rho = a.rho.unwrap_or(cfg.rho);
    cfg.noise_sd = a.noise_sd.unwrap_or(cfg.noise_sd);
    let run = run_figure_with(figure, &cfg, a.trials, seed)?;
    let trials: Vec<TrialRow> = run
        .trials
        .iter()
        .map(|t| TrialRow {
            seed: t.seed,
            method: t.method.name(),
            support_size: t.support_size,
            criterion: t.in_sample_criterion,
            oos_rmse: t.oos_rmse,
            terminal_sse: t.terminal_sse,
        })
        .collect();
    sink.table("trials", &trials)?;
    sink.table("steps", &run.steps)?;
    if !run.shrinkage.is_empty() {
        sink.table("shrinkage", &run.shrinkage)?;
        let series = [
            Series::new("mean_estimate", run.shrinkage.iter().map(|s| (s.support_size as f64, s.mean_estimate)).collect()),
            Series::new("true_value", run.shrinkage.iter().map(|s| (s.support_size as f64, cfg.signal)).collect()),
        ];
        sink.plot("shrinkage", ["Lasso estimate of the true coefficient", "support size", "estimate"], &series, a.svg)?;
    }
    Ok(json!({ "figure": figure.name(), "resolved_design": cfg, "trials": a.trials }))
}

fn npbench_cmd(a: &NpbenchArgs, seed: u64, sink: &mut Sink) -> CliResult<serde_json::Value> {
    let rows = run_np_bench(&a.sizes, a.bench_mode(), a.epsilon, seed)?;
    sink.table("npbench", &rows)?;
    for r in &rows {
        println!("n = {:>4}  {:<8} support {:>4}  sse {:.5}", r.n, r.method.name(), r.support_size, r.terminal_sse);
    }
    Ok(json!({ "rows": rows.len(), "all_reached": rows.iter().all(|r| r.reached) }))
}

#[derive(Serialize)]
struct McRow {
    rule: ThresholdRule,
    beta: f64,
    gamma: f64,
    mc_mean: f64,
    std_error: f64,
    exact: f64,
    z_score: f64,
}

fn mc_check_cmd(a: &McCheckArgs, seed: u64, sink: &mut Sink) -> CliResult<Report> {
    if a.gammas.is_empty() {
        return Err(CliError::usage("need at least one gamma"));
    }
    let mut rows = Vec::new();
    for &gamma in &a.gammas {
        for beta in [0.0, 0.5, gamma, 2.0 * gamma, gamma + 5.0] {
            for rule in MC_RULES {
                let mc = monte_carlo_risk(rule, beta, gamma, a.draws, split_seed(seed, rows.len() as u64))?;
                let exact = match rule {
                    ThresholdRule::Hard => risk_l0(beta, gamma)?,
                    ThresholdRule::Soft => risk_l1(beta, gamma)?,
                };
                rows.push(McRow {
                    rule,
                    beta,
                    gamma,
                    mc_mean: mc.mean,
                    std_error: mc.std_error,
                    exact,
                    z_score: (mc.mean - exact) / mc.std_error,
                });
            }
        }
    }
    sink.table("mc_check", &rows)?;
    let max_z = rows.iter().map(|r| r.z_score.abs()).fold(0.0, f64::max);
    let pass = max_z < a.max_z;
    println!(
        "max |MC - exact| / SE = {max_z:.3} over {} checks ({}; limit {})",
        rows.len(),
        if pass { "pass" } else { "FAIL" },
        a.max_z
    );
    Ok(Report {
        summary: json!({ "max_abs_z": max_z, "checks": rows.len(), "pass": pass }),
        check_failure: (!pass).then(|| CliError::Numerical(format!("Monte Carlo check failed: max |z| = {max_z:.3}"))),
    })
}
