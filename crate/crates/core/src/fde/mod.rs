//! Commensurate Caputo fractional ODE solver.
//!
//! A system `D^β y = f(t, y)`, `y(t0) = y0` is rewritten as the Volterra
//! integral equation
//!
//! ```text
//! y(t) = y0 + 1/Γ(β) ∫_{t0}^{t} (t - s)^{β-1} f(s, y(s)) ds
//! ```
//!
//! and discretized with product-integration rules: piecewise-constant
//! interpolation of `f` for the predictor, piecewise-linear for the
//! corrector. The history sums are discrete convolutions, so they can be
//! evaluated either directly (quadratic cost) or with FFT-based block
//! convolutions (`SolverConfig::use_fft`).

mod fft;
mod mittag_leffler;
mod solver;
mod weights;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use mittag_leffler::{mittag_leffler, MittagLefflerError, ML_MAX_ARGUMENT};
pub use solver::{solve_fde, FnField, VectorField};
pub use weights::{corrector_coefficient, pi_weights, predictor_coefficient, ProductWeights};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("order must lie in (0, 1], got {0}")]
    InvalidOrder(f64),
    #[error("incommensurate orders are not supported: {0:?}")]
    IncommensurateOrder(Vec<f64>),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("state dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    /// The solution left the finite range. `partial` holds every node up to
    /// and including the last finite one.
    #[error("non-finite state at t = {time} (step {step})")]
    NonFiniteState {
        step: usize,
        time: f64,
        partial: Box<Trajectory>,
    },
}

/// Order `β` of the Caputo derivative, shared by every equation.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub fn new(beta: f64) -> Result<Self, SolveError> {
        if beta.is_finite() && beta > 0.0 && beta <= 1.0 {
            Ok(Self(beta))
        } else {
            Err(SolveError::InvalidOrder(beta))
        }
    }

    /// Builds an order from per-equation values. Only commensurate input
    /// (all values equal) is accepted.
    pub fn commensurate(orders: &[f64]) -> Result<Self, SolveError> {
        let first = *orders
            .first()
            .ok_or_else(|| SolveError::InvalidConfig("empty order list".into()))?;
        if orders.iter().any(|&b| b != first) {
            return Err(SolveError::IncommensurateOrder(orders.to_vec()));
        }
        Self::new(first)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for FractionalOrder {
    type Error = SolveError;

    fn try_from(beta: f64) -> Result<Self, Self::Error> {
        Self::new(beta)
    }
}

impl From<FractionalOrder> for f64 {
    fn from(order: FractionalOrder) -> f64 {
        order.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub t_start: f64,
    pub t_end: f64,
    pub h: f64,
    /// Corrector passes per step; 1 is plain PECE.
    pub corrector_iterations: usize,
    pub use_fft: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            t_start: 0.0,
            t_end: 6000.0,
            h: 0.01,
            corrector_iterations: 1,
            use_fft: false,
        }
    }
}

impl SolverConfig {
    pub fn new(t_start: f64, t_end: f64, h: f64) -> Self {
        Self {
            t_start,
            t_end,
            h,
            ..Self::default()
        }
    }

    pub fn with_fft(mut self, use_fft: bool) -> Self {
        self.use_fft = use_fft;
        self
    }

    pub fn with_corrector_iterations(mut self, iterations: usize) -> Self {
        self.corrector_iterations = iterations;
        self
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        let bad = |msg: &str| Err(SolveError::InvalidConfig(msg.to_string()));
        if !(self.t_start.is_finite() && self.t_end.is_finite() && self.h.is_finite()) {
            return bad("time span and step must be finite");
        }
        if self.t_end <= self.t_start {
            return bad("t_end must exceed t_start");
        }
        if self.h <= 0.0 {
            return bad("step size must be positive");
        }
        if (self.t_end - self.t_start) / self.h < 1.0 - 1e-9 {
            return bad("time span must contain at least one step");
        }
        if self.corrector_iterations == 0 {
            return bad("corrector_iterations must be at least 1");
        }
        Ok(())
    }

    /// Number of steps on the grid `t_k = t_start + k h`. A span that is not
    /// a whole multiple of `h` is truncated to the last full step.
    pub fn steps(&self) -> usize {
        ((self.t_end - self.t_start) / self.h + 1e-9).floor() as usize
    }
}

/// Solution samples on a uniform grid, stored row-major (one row per node).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    t_start: f64,
    h: f64,
    dim: usize,
    states: Vec<f64>,
}

impl Trajectory {
    pub(crate) fn with_capacity(t_start: f64, h: f64, dim: usize, nodes: usize) -> Self {
        Self {
            t_start,
            h,
            dim,
            states: Vec::with_capacity(nodes * dim),
        }
    }

    pub(crate) fn push(&mut self, state: &[f64]) {
        debug_assert_eq!(state.len(), self.dim);
        self.states.extend_from_slice(state);
    }

    pub fn len(&self) -> usize {
        self.states.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t_start + k as f64 * self.h
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.states[k * self.dim..(k + 1) * self.dim]
    }

    pub fn last(&self) -> Option<&[f64]> {
        self.len().checked_sub(1).map(|k| self.state(k))
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.states.chunks_exact(self.dim)
    }

    /// Samples of one state variable.
    pub fn component(&self, index: usize) -> Vec<f64> {
        assert!(index < self.dim, "component {index} out of range");
        self.rows().map(|row| row[index]).collect()
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.states
    }
}
