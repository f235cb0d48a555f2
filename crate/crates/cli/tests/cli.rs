use std::fs;
use std::path::Path;
use std::process::Command;

use fracdml_cli::{run, RunConfig};
use tempfile::tempdir;

fn run_args(args: &[&str]) -> i32 {
    run(std::iter::once("fracdml").chain(args.iter().copied()))
}

fn binary(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_fracdml"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn beta_star_record() {
    let out = binary(&["beta-star", "--model", "single", "--I", "0.019"]);
    assert_eq!(out.status.code(), Some(0));
    let line = String::from_utf8(out.stdout).unwrap();
    let record: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
    let b = record["beta_star"].as_f64().unwrap();
    assert!((b - 0.98233).abs() < 1e-4, "{b}");
}

#[test]
fn order_out_of_range_is_a_configuration_error() {
    let out = binary(&["simulate", "--beta", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("order must lie in (0, 1]"));
}

#[test]
fn malformed_input_never_panics() {
    for args in [
        vec!["sweep", "--beta-step", "nan-ish"],
        vec!["simulate", "--h", "-1"],
        vec!["simulate", "--model", "triple"],
        vec!["hopf-curve", "--I-points", "0"],
        vec!["equilibria", "--A", "0"],
        vec!["simulate", "--svg"],
        vec!["sweep", "--beta-from", "1.2"],
        vec!["simulate", "--t-end", "1", "--h", "0.1"],
        vec!["frobnicate"],
    ] {
        let out = binary(&args);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(!String::from_utf8_lossy(&out.stderr).contains("panicked"));
    }
    assert_eq!(run_args(&["--help"]), 0);
}

#[test]
fn missing_or_broken_config_file() {
    let dir = tempdir().unwrap();
    let missing = dir.path().join("none.json");
    assert_eq!(run_args(&["beta-star", "--config", path_str(&missing)]), 2);
    let broken = dir.path().join("broken.json");
    fs::write(&broken, "{ not json").unwrap();
    assert_eq!(run_args(&["beta-star", "--config", path_str(&broken)]), 2);
}

#[test]
fn sweep_csv_long_format() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let code = run_args(&[
        "sweep",
        "--model",
        "single",
        "--I",
        "0.019",
        "--beta-from",
        "1.0",
        "--beta-to",
        "0.9",
        "--beta-step",
        "0.002",
        "--h",
        "0.05",
        "--t-end",
        "100",
        "--out",
        path_str(&out),
        "--svg",
    ]);
    assert_eq!(code, 0);
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("beta,sample_index,x"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 51 * 500);
    let betas: std::collections::BTreeSet<&str> =
        rows.iter().map(|r| r.split(',').next().unwrap()).collect();
    assert_eq!(betas.len(), 51);
    assert!(dir.path().join("sweep.svg").exists());
}

#[test]
fn dimer_sweep_has_neuron_column() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let code = run_args(&[
        "sweep",
        "--model",
        "dimer-linear",
        "--theta",
        "0.008",
        "--beta-from",
        "0.99",
        "--beta-to",
        "0.98",
        "--beta-step",
        "0.005",
        "--h",
        "0.1",
        "--t-end",
        "60",
        "--tail",
        "20",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(code, 0);
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("beta,neuron,sample_index,x\n"));
    assert_eq!(text.lines().count(), 1 + 3 * 2 * 20);
}

#[test]
fn trajectory_csv_schema_and_reproducibility() {
    let dir = tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let common = [
        "simulate",
        "--model",
        "dimer-sigmoid",
        "--beta",
        "0.95",
        "--h",
        "0.05",
        "--t-end",
        "50",
        "--discard",
        "100",
        "--tail",
        "100",
    ];
    for path in [&a, &b] {
        let mut args = common.to_vec();
        args.extend(["--out", path_str(path)]);
        assert_eq!(run_args(&args), 0);
    }
    let text = fs::read(&a).unwrap();
    assert_eq!(text, fs::read(&b).unwrap());
    let text = String::from_utf8(text).unwrap();
    assert!(text.starts_with("t,x1,y1,x2,y2\n"));
    assert_eq!(text.lines().count(), 1 + 1001);
    assert!(!text.contains('\r'));
}

#[test]
fn simulate_blow_up_exits_one_with_partial_output() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("traj.csv");
    let args = [
        "simulate",
        "--y0",
        "1e300,0",
        "--h",
        "0.05",
        "--t-end",
        "5",
        "--discard",
        "0",
        "--tail",
        "10",
        "--out",
        path_str(&out),
    ];
    let res = binary(&args);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("partial trajectory"));
    assert!(fs::read_to_string(&out).unwrap().starts_with("t,x,y\n"));
}

#[test]
fn equilibria_and_stability_tables() {
    let dir = tempdir().unwrap();
    let eq = dir.path().join("eq.csv");
    assert_eq!(
        run_args(&["equilibria", "--I", "0.011", "--out", path_str(&eq)]),
        0
    );
    let text = fs::read_to_string(&eq).unwrap();
    assert!(text.starts_with("I,branch,x_star,y_star\n"));
    assert_eq!(text.lines().count(), 4);

    let st = dir.path().join("st.csv");
    assert_eq!(
        run_args(&[
            "stability",
            "--model",
            "dimer-sigmoid",
            "--sigma",
            "0.001",
            "--beta",
            "0.98",
            "--out",
            path_str(&st)
        ]),
        0
    );
    let text = fs::read_to_string(&st).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("x_star,tau_plus,delta_plus,tau_minus,delta_minus,classification,beta_star")
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[5], "asymptotically-stable");
    assert!((row[6].parse::<f64>().unwrap() - 0.98628).abs() < 1e-4);
}

#[test]
fn hopf_curve_csv() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("hopf.csv");
    let code = run_args(&[
        "hopf-curve",
        "--I-from",
        "0.016",
        "--I-to",
        "0.03",
        "--I-points",
        "15",
        "--out",
        path_str(&out),
        "--svg",
    ]);
    assert_eq!(code, 0);
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("I,beta_star,coupling_value\n"));
    assert_eq!(text.lines().count(), 16);
    let svg = fs::read_to_string(dir.path().join("hopf.svg")).unwrap();
    assert!(svg.contains(r#"viewBox="0 0 800 500""#) && svg.contains("<polyline"));
}

#[test]
fn config_file_round_trip() {
    let dir = tempdir().unwrap();
    let input = dir.path().join("in.json");
    fs::write(
        &input,
        r#"{"model": "dimer-linear", "theta": 0.008, "params": {"I": 0.022}, "beta": 0.93,
            "solver": {"h": 0.05, "t_end": 100.0}, "y0": [0.1, 0.1, -0.2, 0.1]}"#,
    )
    .unwrap();
    let first = dir.path().join("first.json");
    let second = dir.path().join("second.json");
    assert_eq!(
        run_args(&[
            "config",
            "--config",
            path_str(&input),
            "--out",
            path_str(&first)
        ]),
        0
    );
    assert_eq!(
        run_args(&[
            "config",
            "--config",
            path_str(&first),
            "--out",
            path_str(&second)
        ]),
        0
    );

    let a: RunConfig = serde_json::from_str(&fs::read_to_string(&first).unwrap()).unwrap();
    let b: RunConfig = serde_json::from_str(&fs::read_to_string(&second).unwrap()).unwrap();
    let original: RunConfig = serde_json::from_str(&fs::read_to_string(&input).unwrap()).unwrap();
    assert_eq!(a.params, original.params);
    assert_eq!(a.theta, 0.008);
    assert_eq!(a.y0, original.y0);
    // The second pass only differs by the output path it was given.
    assert_eq!(RunConfig { out: None, ..a }, RunConfig { out: None, ..b });
}

#[test]
fn flags_override_config_file() {
    let dir = tempdir().unwrap();
    let input = dir.path().join("in.json");
    fs::write(&input, r#"{"params": {"I": 0.022}, "beta": 0.9}"#).unwrap();
    let out = dir.path().join("out.json");
    assert_eq!(
        run_args(&[
            "config",
            "--config",
            path_str(&input),
            "--I",
            "0.019",
            "--out",
            path_str(&out)
        ]),
        0
    );
    let cfg: RunConfig = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(cfg.params.i, 0.019);
    assert_eq!(cfg.beta, 0.9);
}

#[test]
fn validate_command_reports_orders() {
    let out = binary(&["validate"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.matches(" ok").count(), 4, "{text}");
}
