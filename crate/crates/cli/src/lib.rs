//! Command-line front end for `fracdml`.
//!
//! [`run`] parses arguments, dispatches to the library and returns the exit
//! code: 0 on success, 1 on numerical failure, 2 on configuration errors.

mod args;
mod config;
mod svg;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use clap::Parser;
use fracdml::equilibrium::EquilibriumError;
use fracdml::experiments::{ExperimentError, SweepRange};
use fracdml::fde::{mittag_leffler, FnField};
use fracdml::model::reversal_potential_violation;
use fracdml::stability::{analyze, beta_star_from_indicators, indicators};
use fracdml::{
    bifurcation_sweep, find_equilibria, hopf_curve, run_experiment, solve_fde, BetaStar, Coupling,
    FractionalOrder, SolveError, SolverConfig, TailSettings, Trajectory,
};
use serde_json::json;
use thiserror::Error;

pub use args::{Cli, Command, CommonArgs};
pub use config::{CurrentRange, ModelKind, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<EquilibriumError> for CliError {
    fn from(e: EquilibriumError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Solve(SolveError::NonFiniteState { .. }) => {
                CliError::Numerical(e.to_string())
            }
            other => CliError::Config(other.to_string()),
        }
    }
}

/// Parse `args` (including the program name) and run the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("fracdml: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: &Command) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(command.common())?;
    match command {
        Command::Simulate(_) => simulate(&cfg),
        Command::Equilibria(_) => equilibria(&cfg),
        Command::Stability(_) => stability(&cfg),
        Command::BetaStar(_) => beta_star(&cfg),
        Command::Sweep(_) => sweep(&cfg),
        Command::HopfCurve(_) => hopf(&cfg),
        Command::Validate(_) => validate(),
        Command::Config(_) => emit(&cfg.out, &format!("{}\n", cfg.to_json())),
    }
}

/// Write to `out`, or to standard output when no path is given.
fn emit(out: &Option<std::path::PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_file(path, text),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text)
        .map_err(|e| CliError::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn write_svg(cfg: &RunConfig, svg: impl FnOnce() -> String) -> Result<(), CliError> {
    if let Some(path) = cfg.svg_path() {
        write_file(&path, &svg())?;
    }
    Ok(())
}

fn trajectory_csv(traj: &Trajectory) -> String {
    let header = if traj.dim() == 2 {
        "t,x,y"
    } else {
        "t,x1,y1,x2,y2"
    };
    let mut s = String::with_capacity(traj.len() * 48);
    s.push_str(header);
    s.push('\n');
    for (k, row) in traj.rows().enumerate() {
        s.push_str(&traj.time(k).to_string());
        for v in row {
            s.push(',');
            s.push_str(&v.to_string());
        }
        s.push('\n');
    }
    s
}

fn voltage_series(cfg: &RunConfig, traj: &Trajectory) -> Vec<svg::Series> {
    let voltages: &[(usize, &str)] = if traj.dim() == 2 {
        &[(0, "x")]
    } else {
        &[(0, "x1"), (2, "x2")]
    };
    let stride = (traj.len() / 4000).max(1);
    voltages
        .iter()
        .map(|&(i, label)| svg::Series {
            label: format!("{label}, beta = {}", cfg.beta),
            points: traj
                .rows()
                .enumerate()
                .step_by(stride)
                .map(|(k, row)| (traj.time(k), row[i]))
                .collect(),
        })
        .collect()
}

fn simulate(cfg: &RunConfig) -> Result<(), CliError> {
    let system = cfg.system()?;
    let order = cfg.order()?;
    let settings = TailSettings::new(cfg.discard, cfg.tail);
    let summary = match run_experiment(&system, order, &cfg.initial_state(), &cfg.solver, &settings)
    {
        Ok(s) => s,
        Err(ExperimentError::Solve(SolveError::NonFiniteState {
            step,
            time,
            partial,
        })) => {
            emit(&cfg.out, &trajectory_csv(&partial))?;
            eprintln!(
                "fracdml: partial trajectory written ({} of {} rows); state became non-finite at step {step}, t = {time}",
                partial.len(),
                cfg.solver.steps() + 1
            );
            return Err(CliError::Numerical("solver blow-up".into()));
        }
        Err(e) => return Err(e.into()),
    };
    if let Coupling::Sigmoid(s) = cfg.coupling() {
        let voltages = system
            .voltage_indices()
            .iter()
            .flat_map(|&i| summary.trajectory.component(i));
        if let Some(excess) = reversal_potential_violation(s.v_s, voltages) {
            eprintln!("fracdml: warning: a voltage exceeded the reversal potential by {excess}");
        }
    }
    let record = json!({
        "model": cfg.coupling().label(),
        "beta": cfg.beta,
        "I": cfg.params.i,
        "samples": summary.trajectory.len(),
        "converged": summary.converged,
        "tail_amplitude_x": summary.tail_amplitude_x,
        "tail_amplitudes": summary.tail_amplitudes,
        "final_state": summary.final_state,
    });
    if cfg.out.is_some() {
        emit(&cfg.out, &trajectory_csv(&summary.trajectory))?;
        println!("{record}");
    } else {
        emit(&None, &trajectory_csv(&summary.trajectory))?;
        eprintln!("{record}");
    }
    write_svg(cfg, || {
        svg::plot(
            &format!("{} model, I = {}", cfg.coupling().label(), cfg.params.i),
            "t",
            "voltage",
            &voltage_series(cfg, &summary.trajectory),
            svg::Mark::Line,
        )
    })
}

fn equilibria(cfg: &RunConfig) -> Result<(), CliError> {
    let set = find_equilibria(&cfg.params, &cfg.coupling())?;
    let mut csv = String::from("I,branch,x_star,y_star\n");
    for pt in &set.points {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            cfg.params.i,
            set.branch.as_str(),
            pt.x,
            pt.y
        ));
    }
    emit(&cfg.out, &csv)
}

fn beta_star_field(b: Option<BetaStar>) -> String {
    b.map(BetaStar::label).unwrap_or_else(|| "undefined".into())
}

fn stability(cfg: &RunConfig) -> Result<(), CliError> {
    let c = cfg.coupling();
    let order = cfg.order()?;
    let set = find_equilibria(&cfg.params, &c)?;
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    let mut csv =
        String::from("x_star,tau_plus,delta_plus,tau_minus,delta_minus,classification,beta_star\n");
    for pt in &set.points {
        let r = analyze(pt.x, &cfg.params, &c, order);
        let ind = r.indicators;
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            pt.x,
            ind.tau_plus,
            ind.delta_plus,
            opt(ind.tau_minus),
            opt(ind.delta_minus),
            r.classification.as_str(),
            beta_star_field(r.beta_star)
        ));
    }
    emit(&cfg.out, &csv)
}

fn beta_star(cfg: &RunConfig) -> Result<(), CliError> {
    let c = cfg.coupling();
    let set = find_equilibria(&cfg.params, &c)?;
    let mut csv = String::from("I,x_star,beta_star\n");
    for pt in &set.points {
        let ind = indicators(pt.x, &cfg.params, &c);
        let b = beta_star_from_indicators(&ind);
        let value = match &b {
            Ok(BetaStar::Threshold(v)) => json!(v),
            Ok(other) => json!(other.label()),
            Err(e) => json!(e.to_string()),
        };
        println!(
            "{}",
            json!({
                "model": c.label(),
                "I": cfg.params.i,
                "branch": set.branch.as_str(),
                "x_star": pt.x,
                "tau_plus": ind.tau_plus,
                "delta_plus": ind.delta_plus,
                "beta_star": value,
            })
        );
        csv.push_str(&format!(
            "{},{},{}\n",
            cfg.params.i,
            pt.x,
            beta_star_field(b.ok())
        ));
    }
    if cfg.out.is_some() {
        emit(&cfg.out, &csv)?;
    }
    Ok(())
}

fn sweep(cfg: &RunConfig) -> Result<(), CliError> {
    let system = cfg.system()?;
    let range: SweepRange = cfg.sweep;
    let scan = bifurcation_sweep(&system, &range, &cfg.initial_state(), &cfg.solver, cfg.tail)?;
    let dimer = cfg.coupling().is_dimer();
    let mut csv = String::from(if dimer {
        "beta,neuron,sample_index,x\n"
    } else {
        "beta,sample_index,x\n"
    });
    let mut failures = 0;
    for col in &scan.columns {
        if let Some(err) = &col.error {
            failures += 1;
            eprintln!("fracdml: beta = {} failed: {err}", col.beta);
            continue;
        }
        for (n, tail) in col.tails.iter().enumerate() {
            for (k, x) in tail.iter().enumerate() {
                if dimer {
                    csv.push_str(&format!("{},{},{k},{x}\n", col.beta, n + 1));
                } else {
                    csv.push_str(&format!("{},{k},{x}\n", col.beta));
                }
            }
        }
    }
    emit(&cfg.out, &csv)?;
    write_svg(cfg, || {
        let series: Vec<svg::Series> = (0..system.voltage_indices().len())
            .map(|n| svg::Series {
                label: if dimer {
                    format!("x{}", n + 1)
                } else {
                    "x".into()
                },
                points: scan
                    .columns
                    .iter()
                    .filter_map(|c| c.tails.get(n).map(|t| (c.beta, t)))
                    .flat_map(|(b, t)| t.iter().map(move |&x| (b, x)))
                    .collect(),
            })
            .collect();
        svg::plot(
            &format!("Bifurcation diagram, I = {}", cfg.params.i),
            "beta",
            "tail samples of x",
            &series,
            svg::Mark::Dots,
        )
    })?;
    if failures > 0 {
        return Err(CliError::Numerical(format!(
            "{failures} of {} orders failed; their rows are missing from the output",
            scan.columns.len()
        )));
    }
    Ok(())
}

fn hopf(cfg: &RunConfig) -> Result<(), CliError> {
    let r = cfg.currents;
    if r.points == 0 || !r.from.is_finite() || !r.to.is_finite() {
        return Err(CliError::Config(
            "current range needs finite bounds and at least one point".into(),
        ));
    }
    let c = cfg.coupling();
    let curve = hopf_curve(&cfg.params, &c, (r.from, r.to), r.points);
    let mut csv = String::from("I,beta_star,coupling_value\n");
    for p in &curve.points {
        csv.push_str(&format!(
            "{},{},{}\n",
            p.i, p.beta_star, curve.coupling_value
        ));
    }
    for o in &curve.omitted {
        eprintln!("fracdml: I = {} omitted: {}", o.i, o.reason);
    }
    emit(&cfg.out, &csv)?;
    write_svg(cfg, || {
        let series = [svg::Series {
            label: format!(
                "{} (coupling {})",
                curve.coupling_label, curve.coupling_value
            ),
            points: curve.points.iter().map(|p| (p.i, p.beta_star)).collect(),
        }];
        svg::plot("Hopf curve", "I", "beta*", &series, svg::Mark::Line)
    })
}

fn relaxation_error(beta: f64, h: f64) -> Result<f64, CliError> {
    let field = FnField::new(1, |_t: f64, y: &[f64], out: &mut [f64]| out[0] = -y[0]);
    let order = FractionalOrder::new(beta).map_err(config::config_error)?;
    let traj = solve_fde(&field, order, &SolverConfig::new(0.0, 1.0, h), &[1.0])
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    let exact = mittag_leffler(beta, -1.0).map_err(|e| CliError::Numerical(e.to_string()))?;
    Ok((traj.last().map(|s| s[0]).unwrap_or(f64::NAN) - exact).abs())
}

/// Relaxation `D^β x = -x` against `E_β(-t^β)` at `t = 1`.
fn validate() -> Result<(), CliError> {
    let mut ok = true;
    for beta in [0.5, 0.7, 0.9] {
        let errors = [1e-2, 5e-3, 2.5e-3]
            .into_iter()
            .map(|h| relaxation_error(beta, h))
            .collect::<Result<Vec<_>, _>>()?;
        let orders = [
            (errors[0] / errors[1]).log2(),
            (errors[1] / errors[2]).log2(),
        ];
        let pass = orders.iter().all(|&o| o >= 1.0 + beta - 0.2);
        ok &= pass;
        println!(
            "beta {beta}: errors {:.3e} {:.3e} {:.3e}, observed orders {:.3} {:.3} (expected about {:.1}) {}",
            errors[0],
            errors[1],
            errors[2],
            orders[0],
            orders[1],
            1.0 + beta,
            if pass { "ok" } else { "FAIL" }
        );
    }
    let classical = relaxation_error(1.0, 1e-3)?;
    let pass = classical < 1e-5;
    ok &= pass;
    println!(
        "beta 1: error against exp(-t) at h = 1e-3: {classical:.3e} {}",
        if pass { "ok" } else { "FAIL" }
    );
    if ok {
        Ok(())
    } else {
        Err(CliError::Numerical("solver validation failed".into()))
    }
}
