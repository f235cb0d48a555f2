//! Denatured Morris-Lecar vector fields: the single cell and the two
//! bidirectionally coupled dimers (linear flow and sigmoidal synapse).
//!
//! Both neurons of a dimer share one parameter record. The time argument is
//! accepted for solver uniformity; every system here is autonomous.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fde::VectorField;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("parameter {name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("parameter {name} must be finite")]
    NonFinite { name: &'static str },
    #[error("parameter {name} must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },
}

/// Local neuron parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DmlParams {
    /// Recovery amplitude `A`.
    #[serde(rename = "A")]
    pub a: f64,
    /// Exponential rate `α` of the recovery nullcline.
    pub alpha: f64,
    /// Recovery decay `γ`.
    pub gamma: f64,
    /// External stimulation current `I`.
    #[serde(rename = "I")]
    pub i: f64,
}

impl Default for DmlParams {
    fn default() -> Self {
        Self {
            a: 0.0041,
            alpha: 5.276,
            gamma: 0.3,
            i: 0.019,
        }
    }
}

impl DmlParams {
    pub fn with_current(mut self, i: f64) -> Self {
        self.i = i;
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        finite("I", self.i)?;
        positive("A", self.a)?;
        positive("alpha", self.alpha)?;
        positive("gamma", self.gamma)
    }

    /// `y∞(x) = A e^{αx} / γ`, the recovery nullcline.
    pub fn y_nullcline(&self, x: f64) -> f64 {
        self.a * (self.alpha * x).exp() / self.gamma
    }
}

/// Sigmoidal (fast threshold modulation) synapse parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SigmoidCoupling {
    /// Coupling strength `σ`.
    pub sigma: f64,
    /// Reversal potential `v_s`.
    pub v_s: f64,
    /// Slope `λ`.
    pub lambda: f64,
    /// Synaptic threshold `q`.
    pub q: f64,
}

impl Default for SigmoidCoupling {
    fn default() -> Self {
        Self {
            sigma: 0.001,
            v_s: 2.0,
            lambda: 10.0,
            q: -0.25,
        }
    }
}

impl SigmoidCoupling {
    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        finite("vs", self.v_s)?;
        finite("q", self.q)?;
        non_negative("sigma", self.sigma)?;
        positive("lambda", self.lambda)
    }

    /// Activation `ζ(x) = 1 / (1 + e^{-λ(x - q)})`.
    pub fn activation(&self, x: f64) -> f64 {
        sigmoid(self.lambda * (x - self.q))
    }

    /// `R(x) = dζ/dx = λ e^{-λ(x-q)} / (1 + e^{-λ(x-q)})²`.
    pub fn activation_slope(&self, x: f64) -> f64 {
        let s = self.activation(x);
        self.lambda * s * (1.0 - s)
    }

    /// Synaptic current into a neuron at voltage `x_post` from one at `x_pre`.
    pub fn current(&self, x_post: f64, x_pre: f64) -> f64 {
        self.sigma * (self.v_s - x_post) * self.activation(x_pre)
    }
}

/// How the two neurons of a dimer interact; `None` is the single cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Coupling {
    None,
    Linear { theta: f64 },
    Sigmoid(SigmoidCoupling),
}

impl Coupling {
    pub fn is_dimer(&self) -> bool {
        !matches!(self, Coupling::None)
    }

    pub fn dim(&self) -> usize {
        if self.is_dimer() {
            4
        } else {
            2
        }
    }

    /// Coupling strength (`θ` or `σ`), zero for the single cell.
    pub fn strength(&self) -> f64 {
        match self {
            Coupling::None => 0.0,
            Coupling::Linear { theta } => *theta,
            Coupling::Sigmoid(s) => s.sigma,
        }
    }

    /// Checks the parameters for use in a simulated model. A linear dimer
    /// needs `θ > 0`; zero strength is allowed in the pure evaluators.
    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            Coupling::None => Ok(()),
            Coupling::Linear { theta } => positive("theta", *theta),
            Coupling::Sigmoid(s) => s.validate(),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Coupling::None => "single",
            Coupling::Linear { .. } => "dimer-linear",
            Coupling::Sigmoid(_) => "dimer-sigmoid",
        }
    }
}

/// Logistic function, evaluated without overflow for any finite argument.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn voltage_rate(x: f64, y: f64, i: f64) -> f64 {
    x * x * (1.0 - x) - y + i
}

fn recovery_rate(x: f64, y: f64, p: &DmlParams) -> f64 {
    p.a * (p.alpha * x).exp() - p.gamma * y
}

/// Single cell: `(x²(1-x) - y + I, A e^{αx} - γy)`.
pub fn rhs_single(_t: f64, state: &[f64], p: &DmlParams) -> [f64; 2] {
    let (x, y) = (state[0], state[1]);
    [voltage_rate(x, y, p.i), recovery_rate(x, y, p)]
}

/// Dimer with linear flow `θ(x_j - x_i)` between the voltages.
pub fn rhs_coupled_linear(_t: f64, state: &[f64], p: &DmlParams, theta: f64) -> [f64; 4] {
    let [x1, y1, x2, y2] = [state[0], state[1], state[2], state[3]];
    [
        voltage_rate(x1, y1, p.i) + theta * (x2 - x1),
        recovery_rate(x1, y1, p),
        voltage_rate(x2, y2, p.i) + theta * (x1 - x2),
        recovery_rate(x2, y2, p),
    ]
}

/// Dimer with sigmoidal synapses `σ(v_s - x_i) ζ(x_j)`.
pub fn rhs_coupled_sigmoid(_t: f64, state: &[f64], p: &DmlParams, c: &SigmoidCoupling) -> [f64; 4] {
    let [x1, y1, x2, y2] = [state[0], state[1], state[2], state[3]];
    [
        voltage_rate(x1, y1, p.i) + c.current(x1, x2),
        recovery_rate(x1, y1, p),
        voltage_rate(x2, y2, p.i) + c.current(x2, x1),
        recovery_rate(x2, y2, p),
    ]
}

/// A complete dML system, usable directly as a solver right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DmlSystem {
    pub params: DmlParams,
    pub coupling: Coupling,
}

impl DmlSystem {
    pub fn new(params: DmlParams, coupling: Coupling) -> Result<Self, ModelError> {
        params.validate()?;
        coupling.validate()?;
        Ok(Self { params, coupling })
    }

    pub fn single(params: DmlParams) -> Result<Self, ModelError> {
        Self::new(params, Coupling::None)
    }

    /// Indices of the voltage variables in the state vector.
    pub fn voltage_indices(&self) -> &'static [usize] {
        if self.coupling.is_dimer() {
            &[0, 2]
        } else {
            &[0]
        }
    }

    /// Evaluates the field into a fresh vector.
    pub fn rhs(&self, t: f64, state: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.eval(t, state, &mut out);
        out
    }
}

impl VectorField for DmlSystem {
    fn dim(&self) -> usize {
        self.coupling.dim()
    }

    fn eval(&self, t: f64, state: &[f64], out: &mut [f64]) {
        match &self.coupling {
            Coupling::None => out.copy_from_slice(&rhs_single(t, state, &self.params)),
            Coupling::Linear { theta } => {
                out.copy_from_slice(&rhs_coupled_linear(t, state, &self.params, *theta))
            }
            Coupling::Sigmoid(c) => {
                out.copy_from_slice(&rhs_coupled_sigmoid(t, state, &self.params, c))
            }
        }
    }
}

/// Largest voltage excursion above the reversal potential, if any. The
/// sigmoidal synapse is excitatory only while `v_s` exceeds every visited
/// voltage; this is reported, not enforced.
pub fn reversal_potential_violation(
    v_s: f64,
    voltages: impl IntoIterator<Item = f64>,
) -> Option<f64> {
    let max = voltages.into_iter().fold(f64::NEG_INFINITY, f64::max);
    (max >= v_s).then_some(max - v_s)
}

fn finite(name: &'static str, value: f64) -> Result<(), ModelError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(ModelError::NonFinite { name })
    }
}

fn positive(name: &'static str, value: f64) -> Result<(), ModelError> {
    finite(name, value)?;
    if value > 0.0 {
        Ok(())
    } else {
        Err(ModelError::NonPositive { name, value })
    }
}

fn non_negative(name: &'static str, value: f64) -> Result<(), ModelError> {
    finite(name, value)?;
    if value >= 0.0 {
        Ok(())
    } else {
        Err(ModelError::Negative { name, value })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn defaults(i: f64) -> DmlParams {
        DmlParams::default().with_current(i)
    }

    #[test]
    fn single_cell_at_origin() {
        assert_eq!(rhs_single(0.0, &[0.0, 0.0], &defaults(0.0)), [0.0, 0.0041]);
    }

    #[test]
    fn single_cell_at_reported_equilibrium() {
        let r = rhs_single(0.0, &[0.40772, 0.11746], &defaults(0.019));
        assert!(r[0].abs() < 5e-5 && r[1].abs() < 5e-5, "{r:?}");
    }

    #[test]
    fn single_cell_arithmetic() {
        let r = rhs_single(0.0, &[1.0, 0.5], &defaults(0.2));
        assert_abs_diff_eq!(r[0], -0.3, epsilon = 1e-15);
        // 0.0041 e^{5.276} - 0.15, evaluated at 40 digits.
        assert_abs_diff_eq!(r[1], 0.651_902_455_339_187_1, epsilon = 1e-14);
    }

    #[test]
    fn linear_coupling_arithmetic() {
        let r = rhs_coupled_linear(0.0, &[0.1, 0.1, -0.2, 0.1], &defaults(0.019), 0.008);
        assert_abs_diff_eq!(r[0], -0.0744, epsilon = 1e-15);
    }

    #[test]
    fn sigmoid_coupling_arithmetic() {
        let c = SigmoidCoupling::default();
        let r = rhs_coupled_sigmoid(0.0, &[0.1, 0.1, -0.2, 0.1], &defaults(0.019), &c);
        let uncoupled = 0.1 * 0.1 * 0.9 - 0.1 + 0.019;
        let synapse = 0.001 * 1.9 / (1.0 + (-0.5f64).exp());
        assert_abs_diff_eq!(r[0], uncoupled + synapse, epsilon = 1e-16);
    }

    #[test]
    fn sigmoid_saturates() {
        let c = SigmoidCoupling::default();
        let x_pre = c.q + 100.0 / c.lambda;
        assert_abs_diff_eq!(
            c.current(0.3, x_pre),
            c.sigma * (c.v_s - 0.3),
            epsilon = 1e-10
        );
        assert_eq!(sigmoid(-1000.0), 0.0);
        assert_eq!(sigmoid(1000.0), 1.0);
        assert!(sigmoid(-700.0) > 0.0);
    }

    #[test]
    fn validation() {
        assert!(DmlParams::default().validate().is_ok());
        assert!(DmlParams {
            a: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(DmlParams {
            i: f64::NAN,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(DmlParams {
            i: -0.5,
            ..Default::default()
        }
        .validate()
        .is_ok());
        assert!(Coupling::Linear { theta: 0.0 }.validate().is_err());
        assert!(
            Coupling::Sigmoid(SigmoidCoupling::default().with_sigma(0.0))
                .validate()
                .is_ok()
        );
        let bad = SigmoidCoupling {
            lambda: 0.0,
            ..Default::default()
        };
        assert!(Coupling::Sigmoid(bad).validate().is_err());
    }

    #[test]
    fn reversal_check() {
        assert_eq!(reversal_potential_violation(2.0, [0.1, 0.5, -0.3]), None);
        assert_eq!(
            reversal_potential_violation(0.4, [0.1, 0.5, -0.3]),
            Some(0.5 - 0.4)
        );
    }

    fn state4() -> impl Strategy<Value = [f64; 4]> {
        prop::array::uniform4(-1.0..1.5f64)
    }

    proptest! {
        #[test]
        fn zero_strength_reduces_to_single_cells(s in state4(), i in -0.02..0.05f64) {
            let p = defaults(i);
            let a = rhs_single(0.0, &s[..2], &p);
            let b = rhs_single(0.0, &s[2..], &p);
            let stacked = [a[0], a[1], b[0], b[1]];
            prop_assert_eq!(rhs_coupled_linear(0.0, &s, &p, 0.0), stacked);
            let c = SigmoidCoupling::default().with_sigma(0.0);
            prop_assert_eq!(rhs_coupled_sigmoid(0.0, &s, &p, &c), stacked);
        }

        #[test]
        fn swapping_neurons_swaps_outputs(
            s in state4(),
            theta in 0.0..0.1f64,
            sigma in 0.0..0.01f64,
        ) {
            let p = defaults(0.019);
            let swapped = [s[2], s[3], s[0], s[1]];
            let a = rhs_coupled_linear(0.0, &s, &p, theta);
            let b = rhs_coupled_linear(0.0, &swapped, &p, theta);
            prop_assert_eq!([a[2], a[3], a[0], a[1]], b);
            let c = SigmoidCoupling::default().with_sigma(sigma);
            let a = rhs_coupled_sigmoid(0.0, &s, &p, &c);
            let b = rhs_coupled_sigmoid(0.0, &swapped, &p, &c);
            prop_assert_eq!([a[2], a[3], a[0], a[1]], b);
        }

        #[test]
        fn symmetric_state_has_no_linear_coupling(x in -1.0..1.5f64, y in -0.5..0.5f64, theta in 0.0..1.0f64) {
            let p = defaults(0.019);
            let r = rhs_coupled_linear(0.0, &[x, y, x, y], &p, theta);
            prop_assert_eq!(r[0], r[2]);
            prop_assert_eq!(r[0], rhs_single(0.0, &[x, y], &p)[0]);
        }
    }
}
