use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn sparsity(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparsity"))
        .args(args)
        .arg("--output-dir")
        .arg(out)
        .env_remove("SPARSITY_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("process exited normally")
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&read(dir, "manifest.json")).unwrap()
}

#[test]
fn envelope_writes_the_documented_schema() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("env");
    let o = sparsity(
        &["envelope", "--direction", "l0_over_l1", "--grid", "0.05:6:0.05", "--calibration", "zero"],
        &out,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(&out, "envelope.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "gamma_free,gamma_opposing,sup_ratio,argmax_beta,calibration");
    assert_eq!(lines.count(), 120);
    let plot = read(&out, "envelope_plot.csv");
    assert!(plot.starts_with("series,x,y\n"));
    assert!(plot.lines().skip(1).all(|l| l.starts_with("equal_risk_at_zero,")));
    let m = manifest(&out);
    assert_eq!(m["config"]["command"], "envelope");
    assert_eq!(m["config"]["parameters"]["grid"], "0.05:6:0.05");
    assert!(m["wall_time_seconds"].as_f64().unwrap() >= 0.0);
    assert_eq!(m["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn risk_curve_has_three_plot_series_and_valid_svg() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("rc");
    let o = sparsity(&["risk-curve", "--gamma0", "3", "--gamma1", "2", "--betas", "0:4:0.5", "--svg"], &out);
    assert_eq!(code(&o), 0);
    assert!(read(&out, "risk_curve.csv").starts_with("beta,r_l0,r_l1,ratio\n"));
    let plot = read(&out, "risk_curve_plot.csv");
    for series in ["r_l0", "r_l1", "ratio"] {
        assert_eq!(plot.lines().filter(|l| l.starts_with(&format!("{series},"))).count(), 9);
    }
    let svg = read(&out, "risk_curve.svg");
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert_eq!(svg.matches("<polyline").count(), 3);
}

#[test]
fn single_point_grid_gives_one_row_and_an_svg() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("one");
    let o = sparsity(&["risk-curve", "--betas", "1:1:1", "--svg"], &out);
    assert_eq!(code(&o), 0);
    assert_eq!(read(&out, "risk_curve.csv").lines().count(), 2);
    assert!(read(&out, "risk_curve.svg").contains("<circle"));
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let args = ["simulate", "--figure", "fig4", "--trials", "3", "--n", "40", "--p", "60", "--seed", "9"];
    assert_eq!(code(&sparsity(&args, &a)), 0);
    assert_eq!(code(&sparsity(&args, &b)), 0);
    for name in ["trials.csv", "steps.csv"] {
        assert_eq!(read(&a, name), read(&b, name), "{name}");
    }
    let header = read(&a, "trials.csv").lines().next().unwrap().to_string();
    assert_eq!(header, "seed,method,support_size,criterion,oos_rmse,terminal_sse");
}

#[test]
fn manifest_config_reproduces_the_run() {
    let tmp = TempDir::new().unwrap();
    let first = tmp.path().join("first");
    let o = sparsity(&["npbench", "--sizes", "9,12", "--mode", "all", "--epsilon", "0.25", "--seed", "7"], &first);
    assert_eq!(code(&o), 0);
    let rows = read(&first, "npbench.csv");
    let header = rows.lines().next().unwrap();
    assert!(header.starts_with("n,p,seed,method,support_size,terminal_sse,reached"));
    let stepwise: Vec<&str> = rows.lines().filter(|l| l.contains(",stepwise,")).collect();
    assert_eq!(stepwise.len(), 2);
    assert!(stepwise[0].starts_with("9,") && stepwise[0].split(',').nth(4) == Some("3"));
    assert!(stepwise[1].starts_with("12,") && stepwise[1].split(',').nth(4) == Some("4"));

    let second = tmp.path().join("second");
    let mut config = manifest(&first)["config"].clone();
    config["output_dir"] = serde_json::Value::String(second.display().to_string());
    let cfg_path = tmp.path().join("config.json");
    fs::write(&cfg_path, config.to_string()).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_sparsity"))
        .args(["from-config", cfg_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read(&second, "npbench.csv"), rows);
    assert_eq!(manifest(&second)["config"]["parameters"], manifest(&first)["config"]["parameters"]);
}

#[test]
fn unknown_keys_are_usage_errors() {
    let tmp = TempDir::new().unwrap();
    let o = sparsity(&["envelope", "--colour", "red"], &tmp.path().join("x"));
    assert_eq!(code(&o), 2);

    for (name, body) in [
        ("top.json", r#"{"command": "c1", "colour": "red"}"#),
        ("param.json", r#"{"command": "c1", "parameters": {"colour": "red"}}"#),
        ("cmd.json", r#"{"command": "paint"}"#),
    ] {
        let path = tmp.path().join(name);
        fs::write(&path, body).unwrap();
        let o = Command::new(env!("CARGO_BIN_EXE_sparsity"))
            .args(["from-config", path.to_str().unwrap()])
            .output()
            .unwrap();
        assert_eq!(code(&o), 2, "{name}");
    }
}

#[test]
fn malformed_values_are_usage_errors() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("x");
    for args in [
        &["envelope", "--grid", "1:0:1"][..],
        &["risk-curve", "--gamma0", "-1"],
        &["npbench", "--sizes", "10"],
        &["lars", "--stop", "residual:0"],
        &["mc-check", "--draws", "10"],
    ] {
        assert_eq!(code(&sparsity(args, &out)), 2, "{args:?}");
    }
}

#[test]
fn numerical_failures_have_their_own_status() {
    let tmp = TempDir::new().unwrap();
    let data = tmp.path().join("zero.csv");
    fs::write(&data, "a,b,y\n1,0,1\n2,0,3\n3,0,2\n").unwrap();
    let o = sparsity(&["lars", "--data", data.to_str().unwrap()], &tmp.path().join("z"));
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));

    let out = tmp.path().join("mc");
    let o = sparsity(&["mc-check", "--draws", "1000", "--gammas", "1", "--max-z", "0.001"], &out);
    assert_eq!(code(&o), 3);
    assert_eq!(manifest(&out)["summary"]["pass"], false);
}

#[test]
fn io_failures_have_their_own_status() {
    let tmp = TempDir::new().unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "").unwrap();
    let o = sparsity(&["c1"], &blocker.join("sub"));
    assert_eq!(code(&o), 4);
    let o = sparsity(&["lars", "--data", "/nonexistent/data.csv"], &tmp.path().join("x"));
    assert_eq!(code(&o), 4);
}

#[test]
fn output_dir_falls_back_to_the_environment() {
    let tmp = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_sparsity"))
        .args(["c1"])
        .env("SPARSITY_OUTPUT_DIR", tmp.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let c1 = read(tmp.path(), "c1.csv");
    assert!(c1.starts_with("c1,argmin_gamma0\n"));
}

#[test]
fn csv_data_drives_the_path_commands() {
    let tmp = TempDir::new().unwrap();
    let data = tmp.path().join("data.csv");
    let mut text = String::from("x1,y,x2,x3\n");
    for i in 0..12 {
        let t = i as f64;
        let (x1, x2, x3) = (t.sin(), (1.7 * t).cos(), (0.3 * t * t).sin());
        text.push_str(&format!("{x1},{},{x2},{x3}\n", 3.0 * x1 - 2.0 * x3));
    }
    fs::write(&data, text).unwrap();
    for cmd in ["lars", "stepwise"] {
        let out = tmp.path().join(cmd);
        let o = sparsity(&[cmd, "--data", data.to_str().unwrap(), "--format", "json"], &out);
        assert_eq!(code(&o), 0, "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        let path: serde_json::Value = serde_json::from_str(&read(&out, "path.json")).unwrap();
        assert_eq!(path[0]["support_size"], 0);
        assert_eq!(manifest(&out)["summary"]["design_id"].as_str().unwrap().split(':').next(), Some("12x3"));
    }
    let out = tmp.path().join("ric");
    let o = sparsity(&["ric-select", "--data", data.to_str().unwrap(), "--sigma2", "0.01"], &out);
    assert_eq!(code(&o), 0);
    let sel = read(&out, "selected_coefficients.csv");
    let indices: Vec<&str> = sel.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(indices, ["0", "2"]);
}
