//! Long simulations with transient discard, warm-started sweeps over the
//! order, closed-form Hopf curves and simple oscillation metrics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::equilibrium::{find_equilibria, Branch};
use crate::fde::{solve_fde, FractionalOrder, SolveError, SolverConfig, Trajectory};
use crate::model::{Coupling, DmlParams, DmlSystem, ModelError};
use crate::stability::{beta_star, BetaStar};

/// Tail peak-to-peak below this counts as converged.
pub const CONVERGENCE_THRESHOLD: f64 = 1e-4;
pub const DEFAULT_DISCARD: usize = 100_000;
pub const DEFAULT_TAIL: usize = 500;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("need {needed} samples but the run produces {available}")]
    InsufficientSamples { needed: usize, available: usize },
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailSettings {
    pub discard: usize,
    pub tail: usize,
    pub convergence_threshold: f64,
}

impl Default for TailSettings {
    fn default() -> Self {
        Self {
            discard: DEFAULT_DISCARD,
            tail: DEFAULT_TAIL,
            convergence_threshold: CONVERGENCE_THRESHOLD,
        }
    }
}

impl TailSettings {
    pub fn new(discard: usize, tail: usize) -> Self {
        Self {
            discard,
            tail,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimulationSummary {
    pub trajectory: Trajectory,
    pub discard: usize,
    pub tail: usize,
    /// Largest per-neuron tail peak-to-peak of the voltage.
    pub tail_amplitude_x: f64,
    /// Tail peak-to-peak of each voltage variable.
    pub tail_amplitudes: Vec<f64>,
    pub converged: bool,
    pub final_state: Vec<f64>,
    voltage_indices: &'static [usize],
}

impl SimulationSummary {
    /// Last `tail` samples of neuron `n`'s voltage.
    pub fn tail_voltage(&self, neuron: usize) -> Vec<f64> {
        let x = self.trajectory.component(self.voltage_indices[neuron]);
        x[x.len() - self.tail..].to_vec()
    }

    /// States after the transient, as used for phase portraits.
    pub fn post_transient(&self) -> impl Iterator<Item = &[f64]> {
        self.trajectory.rows().skip(self.discard)
    }
}

pub fn run_experiment(
    system: &DmlSystem,
    order: FractionalOrder,
    y0: &[f64],
    config: &SolverConfig,
    settings: &TailSettings,
) -> Result<SimulationSummary, ExperimentError> {
    config.validate()?;
    let available = config.steps() + 1;
    let needed = settings.discard + settings.tail;
    if settings.tail == 0 || needed > available {
        return Err(ExperimentError::InsufficientSamples { needed, available });
    }
    let trajectory = solve_fde(system, order, config, y0)?;
    let voltage_indices = system.voltage_indices();
    let tail_amplitudes: Vec<f64> = voltage_indices
        .iter()
        .map(|&i| {
            let x = trajectory.component(i);
            peak_to_peak(&x[x.len() - settings.tail..])
        })
        .collect();
    let tail_amplitude_x = tail_amplitudes.iter().copied().fold(0.0, f64::max);
    let final_state = trajectory.last().map(<[f64]>::to_vec).unwrap_or_default();
    Ok(SimulationSummary {
        discard: settings.discard,
        tail: settings.tail,
        tail_amplitude_x,
        converged: tail_amplitude_x < settings.convergence_threshold,
        tail_amplitudes,
        final_state,
        trajectory,
        voltage_indices,
    })
}

/// Orders visited by a sweep, from `from` towards `to` in steps of `step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepRange {
    pub from: f64,
    pub to: f64,
    pub step: f64,
}

impl Default for SweepRange {
    fn default() -> Self {
        Self::descending(1.0, 0.9, 0.002)
    }
}

impl SweepRange {
    /// The continuation direction: from high order down to low.
    pub fn descending(high: f64, low: f64, step: f64) -> Self {
        Self {
            from: high,
            to: low,
            step,
        }
    }

    pub fn values(&self) -> Result<Vec<f64>, ExperimentError> {
        let in_range = |b: f64| b > 0.0 && b <= 1.0;
        if !in_range(self.from) || !in_range(self.to) {
            return Err(ExperimentError::InvalidSweep(format!(
                "orders must lie in (0, 1], got {} to {}",
                self.from, self.to
            )));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(ExperimentError::InvalidSweep(format!(
                "step must be positive, got {}",
                self.step
            )));
        }
        let span = (self.from - self.to).abs();
        let intervals = (span / self.step + 1e-9).floor() as usize;
        let sign = if self.to < self.from { -1.0 } else { 1.0 };
        Ok((0..=intervals)
            .map(|k| self.from + sign * k as f64 * self.step)
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepColumn {
    pub beta: f64,
    pub initial_state: Vec<f64>,
    /// `None` when the run failed.
    pub final_state: Option<Vec<f64>>,
    /// Last `W` voltage samples per neuron; empty when the run failed.
    pub tails: Vec<Vec<f64>>,
    pub error: Option<String>,
}

impl SweepColumn {
    /// Peak-to-peak over all neurons' tails.
    pub fn spread(&self) -> Option<f64> {
        if self.tails.is_empty() {
            return None;
        }
        Some(
            self.tails
                .iter()
                .map(|t| peak_to_peak(t))
                .fold(0.0, f64::max),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationScan {
    pub beta_values: Vec<f64>,
    pub columns: Vec<SweepColumn>,
    pub tail: usize,
    pub warm_start: bool,
}

impl BifurcationScan {
    /// First order in sweep order whose tail oscillates.
    pub fn first_oscillating(&self) -> Option<f64> {
        self.columns
            .iter()
            .find(|c| c.spread().is_some_and(|s| s > CONVERGENCE_THRESHOLD))
            .map(|c| c.beta)
    }

    /// Last order in sweep order whose tail oscillates. On a descending
    /// sweep this is the lowest oscillating order, i.e. the onset seen when
    /// the order is raised.
    pub fn last_oscillating(&self) -> Option<f64> {
        self.columns
            .iter()
            .rev()
            .find(|c| c.spread().is_some_and(|s| s > CONVERGENCE_THRESHOLD))
            .map(|c| c.beta)
    }
}

/// Continuation in the order. Each run starts from the previous run's final
/// state; a failed run is recorded and the next one reuses its initial state.
pub fn bifurcation_sweep(
    system: &DmlSystem,
    range: &SweepRange,
    y0: &[f64],
    config: &SolverConfig,
    tail: usize,
) -> Result<BifurcationScan, ExperimentError> {
    config.validate()?;
    let beta_values = range.values()?;
    let available = config.steps() + 1;
    if tail == 0 || tail > available {
        return Err(ExperimentError::InsufficientSamples {
            needed: tail,
            available,
        });
    }
    let settings = TailSettings::new(0, tail);
    let mut state = y0.to_vec();
    let mut columns = Vec::with_capacity(beta_values.len());
    for &beta in &beta_values {
        let initial_state = state.clone();
        let column = match FractionalOrder::new(beta)
            .map_err(ExperimentError::from)
            .and_then(|order| run_experiment(system, order, &initial_state, config, &settings))
        {
            Ok(summary) => {
                let tails = (0..system.voltage_indices().len())
                    .map(|n| summary.tail_voltage(n))
                    .collect();
                state = summary.final_state.clone();
                SweepColumn {
                    beta,
                    initial_state,
                    final_state: Some(summary.final_state),
                    tails,
                    error: None,
                }
            }
            Err(e) => SweepColumn {
                beta,
                initial_state,
                final_state: None,
                tails: Vec::new(),
                error: Some(e.to_string()),
            },
        };
        columns.push(column);
    }
    Ok(BifurcationScan {
        beta_values,
        columns,
        tail,
        warm_start: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopfPoint {
    pub i: f64,
    pub beta_star: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmittedPoint {
    pub i: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopfCurve {
    pub points: Vec<HopfPoint>,
    pub coupling_label: String,
    pub coupling_value: f64,
    pub omitted: Vec<OmittedPoint>,
}

/// `β*(I)` on `n_points` evenly spaced currents. Currents without a unique
/// equilibrium or a threshold in `(0, 1]` are listed in `omitted`.
pub fn hopf_curve(p: &DmlParams, c: &Coupling, i_range: (f64, f64), n_points: usize) -> HopfCurve {
    let (lo, hi) = i_range;
    let mut curve = HopfCurve {
        points: Vec::with_capacity(n_points),
        coupling_label: c.label().to_string(),
        coupling_value: c.strength(),
        omitted: Vec::new(),
    };
    for k in 0..n_points {
        let i = if n_points == 1 {
            lo
        } else {
            lo + (hi - lo) * k as f64 / (n_points - 1) as f64
        };
        match hopf_point(&p.with_current(i), c) {
            Ok(beta_star) => curve.points.push(HopfPoint { i, beta_star }),
            Err(reason) => curve.omitted.push(OmittedPoint { i, reason }),
        }
    }
    curve
}

fn hopf_point(p: &DmlParams, c: &Coupling) -> Result<f64, String> {
    let eq = find_equilibria(p, c).map_err(|e| e.to_string())?;
    if eq.branch != Branch::Unique {
        return Err(format!("{} equilibria", eq.len()));
    }
    match beta_star(eq.points[0].x, p, c).map_err(|e| e.to_string())? {
        BetaStar::Threshold(b) => Ok(b),
        other => Err(other.label()),
    }
}

/// One Hopf curve per coupling, computed concurrently, in input order.
pub fn hopf_family(
    p: &DmlParams,
    couplings: &[Coupling],
    i_range: (f64, f64),
    n_points: usize,
) -> Vec<HopfCurve> {
    couplings
        .par_iter()
        .map(|c| hopf_curve(p, c, i_range, n_points))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillationMetrics {
    pub amplitude: f64,
    pub is_oscillating: bool,
    pub extrema_count: usize,
}

pub fn oscillation_metrics(tail: &[f64]) -> Result<OscillationMetrics, ExperimentError> {
    if tail.len() < 3 {
        return Err(ExperimentError::InsufficientSamples {
            needed: 3,
            available: tail.len(),
        });
    }
    let amplitude = peak_to_peak(tail);
    let mut extrema_count = 0;
    let mut last_sign = 0.0;
    for w in tail.windows(2) {
        let d = w[1] - w[0];
        if d == 0.0 {
            continue;
        }
        let s = d.signum();
        if last_sign != 0.0 && s != last_sign {
            extrema_count += 1;
        }
        last_sign = s;
    }
    Ok(OscillationMetrics {
        amplitude,
        is_oscillating: amplitude > CONVERGENCE_THRESHOLD,
        extrema_count,
    })
}

fn peak_to_peak(xs: &[f64]) -> f64 {
    let (lo, hi) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    if xs.is_empty() {
        0.0
    } else {
        hi - lo
    }
}
