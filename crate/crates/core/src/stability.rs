//! Local stability of equilibria under the Caputo derivative.
//!
//! An equilibrium of a commensurate system of order `β` is asymptotically
//! stable iff every Jacobian eigenvalue satisfies `|arg λ| > βπ/2`. For a
//! 2×2 block with trace `τ` and determinant `δ` this is `δ > 0` and
//! `τ < 2√δ cos(βπ/2)`.
//!
//! At a symmetric dimer equilibrium the 4×4 Jacobian has the block form
//! `[[J, C], [C, J]]`, whose spectrum is the union of the spectra of
//! `J + C` and `J - C`; each is a 2×2 problem with its own `(τ±, δ±)`.

use std::f64::consts::FRAC_PI_2;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::equilibrium::{find_equilibria, EquilibriumError};
use crate::fde::FractionalOrder;
use crate::model::{Coupling, DmlParams};

/// `|δ|` at or below this counts as a vanishing determinant.
pub const DEGENERACY_TOLERANCE: f64 = 1e-12;

/// `|δ|` below this marks a saddle-node in [`saddle_node_condition`].
pub const SADDLE_NODE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StabilityError {
    #[error("determinant {delta:e} is not positive; the Hopf threshold is undefined")]
    DegenerateDeterminant { delta: f64 },
}

/// The `[[S, -1], [αAe^{αx*}, -γ]]` blocks at `x*`: `S±` is the voltage
/// self-term of `J ± C`.
#[derive(Debug, Clone, Copy)]
struct Blocks {
    diagonal: f64,
    coupling: f64,
    recovery_gain: f64,
    gamma: f64,
}

impl Blocks {
    fn at(x: f64, p: &DmlParams, c: &Coupling) -> Self {
        let slope = x * (2.0 - 3.0 * x);
        let (diagonal, coupling) = match c {
            Coupling::None => (slope, 0.0),
            Coupling::Linear { theta } => (slope - theta, *theta),
            Coupling::Sigmoid(s) => (
                slope - s.sigma * s.activation(x),
                s.sigma * (s.v_s - x) * s.activation_slope(x),
            ),
        };
        Self {
            diagonal,
            coupling,
            recovery_gain: p.alpha * p.a * (p.alpha * x).exp(),
            gamma: p.gamma,
        }
    }

    fn trace_det(&self, s: f64) -> (f64, f64) {
        (s - self.gamma, -self.gamma * s + self.recovery_gain)
    }
}

/// Jacobian at `x*` (2×2 for the single cell, 4×4 block matrix for dimers).
pub fn jacobian(x_star: f64, p: &DmlParams, c: &Coupling) -> DMatrix<f64> {
    let b = Blocks::at(x_star, p, c);
    let block = [[b.diagonal, -1.0], [b.recovery_gain, -b.gamma]];
    if !c.is_dimer() {
        return DMatrix::from_fn(2, 2, |r, col| block[r][col]);
    }
    DMatrix::from_fn(4, 4, |r, col| {
        let (br, bc) = (r / 2, col / 2);
        let (ir, ic) = (r % 2, col % 2);
        if br == bc {
            block[ir][ic]
        } else if ir == 0 && ic == 0 {
            b.coupling
        } else {
            0.0
        }
    })
}

/// Trace and determinant of `J + C` (plus) and `J - C` (minus). The minus
/// pair is present only for dimers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityIndicators {
    pub tau_plus: f64,
    pub delta_plus: f64,
    pub tau_minus: Option<f64>,
    pub delta_minus: Option<f64>,
}

impl StabilityIndicators {
    pub fn planar(tau: f64, delta: f64) -> Self {
        Self {
            tau_plus: tau,
            delta_plus: delta,
            tau_minus: None,
            delta_minus: None,
        }
    }

    /// `(τ, δ)` for every block present.
    pub fn branches(&self) -> Vec<(f64, f64)> {
        let mut out = vec![(self.tau_plus, self.delta_plus)];
        if let (Some(t), Some(d)) = (self.tau_minus, self.delta_minus) {
            out.push((t, d));
        }
        out
    }
}

pub fn indicators(x_star: f64, p: &DmlParams, c: &Coupling) -> StabilityIndicators {
    let b = Blocks::at(x_star, p, c);
    let (tau_plus, delta_plus) = b.trace_det(b.diagonal + b.coupling);
    if !c.is_dimer() {
        return StabilityIndicators::planar(tau_plus, delta_plus);
    }
    let (tau_minus, delta_minus) = b.trace_det(b.diagonal - b.coupling);
    StabilityIndicators {
        tau_plus,
        delta_plus,
        tau_minus: Some(tau_minus),
        delta_minus: Some(delta_minus),
    }
}

/// Eigenvalues of the Jacobian from the closed-form 2×2 quadratics.
pub fn eigenvalues(ind: &StabilityIndicators) -> Vec<Complex64> {
    ind.branches()
        .into_iter()
        .flat_map(|(tau, delta)| planar_eigenvalues(tau, delta))
        .collect()
}

/// Roots of `λ² - τλ + δ = 0`.
pub fn planar_eigenvalues(tau: f64, delta: f64) -> [Complex64; 2] {
    let half = 0.5 * tau;
    let disc = half * half - delta;
    if disc >= 0.0 {
        let r = disc.sqrt();
        [Complex64::new(half + r, 0.0), Complex64::new(half - r, 0.0)]
    } else {
        let i = (-disc).sqrt();
        [Complex64::new(half, i), Complex64::new(half, -i)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    AsymptoticallyStable,
    Unstable,
    Saddle,
    SaddleNodeDegenerate,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::AsymptoticallyStable => "asymptotically-stable",
            Classification::Unstable => "unstable",
            Classification::Saddle => "saddle",
            Classification::SaddleNodeDegenerate => "saddle-node",
        }
    }
}

pub fn classify(ind: &StabilityIndicators, order: FractionalOrder) -> Classification {
    let branches = ind.branches();
    if branches.iter().any(|&(_, d)| d < -DEGENERACY_TOLERANCE) {
        return Classification::Saddle;
    }
    if branches
        .iter()
        .any(|&(_, d)| d.abs() <= DEGENERACY_TOLERANCE)
    {
        return Classification::SaddleNodeDegenerate;
    }
    let cos = (order.value() * FRAC_PI_2).cos();
    if branches.iter().all(|&(t, d)| t < 2.0 * d.sqrt() * cos) {
        Classification::AsymptoticallyStable
    } else {
        Classification::Unstable
    }
}

/// Critical order for the Hopf bifurcation in `β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BetaStar {
    /// Stable iff `β < β*`, with `β*` in `(0, 1]`.
    Threshold(f64),
    StableForAllOrders,
    UnstableForAllOrders,
}

impl BetaStar {
    pub fn threshold(self) -> Option<f64> {
        match self {
            BetaStar::Threshold(b) => Some(b),
            _ => None,
        }
    }

    pub fn label(self) -> String {
        match self {
            BetaStar::Threshold(b) => format!("{b}"),
            BetaStar::StableForAllOrders => "stable-for-all-orders".into(),
            BetaStar::UnstableForAllOrders => "unstable-for-all-orders".into(),
        }
    }
}

/// `β* = min over blocks of (2/π) arccos(min(1, τ / (2√δ)))`.
pub fn beta_star_from_indicators(ind: &StabilityIndicators) -> Result<BetaStar, StabilityError> {
    let branches = ind.branches();
    if let Some(&(_, delta)) = branches.iter().find(|&&(_, d)| d <= DEGENERACY_TOLERANCE) {
        return Err(StabilityError::DegenerateDeterminant { delta });
    }
    let beta = branches
        .iter()
        .map(|&(t, d)| (t / (2.0 * d.sqrt())).min(1.0).acos() / FRAC_PI_2)
        .fold(f64::INFINITY, f64::min);
    Ok(if beta > 1.0 {
        BetaStar::StableForAllOrders
    } else if beta <= 0.0 {
        BetaStar::UnstableForAllOrders
    } else {
        BetaStar::Threshold(beta)
    })
}

pub fn beta_star(x_star: f64, p: &DmlParams, c: &Coupling) -> Result<BetaStar, StabilityError> {
    beta_star_from_indicators(&indicators(x_star, p, c))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub x_star: f64,
    pub indicators: StabilityIndicators,
    pub classification: Classification,
    /// `None` where a determinant vanishes or is negative.
    pub beta_star: Option<BetaStar>,
}

pub fn analyze(
    x_star: f64,
    p: &DmlParams,
    c: &Coupling,
    order: FractionalOrder,
) -> StabilityReport {
    let ind = indicators(x_star, p, c);
    StabilityReport {
        x_star,
        indicators: ind,
        classification: classify(&ind, order),
        beta_star: beta_star_from_indicators(&ind).ok(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeterminantBranch {
    Plus,
    Minus,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaddleNodeDiagnostic {
    pub detected: bool,
    /// Equilibrium where the fold was found.
    pub x_star: Option<f64>,
    pub branch: Option<DeterminantBranch>,
    /// Smallest `|δ|` over all equilibria and blocks.
    pub min_abs_delta: f64,
}

/// Whether the system undergoes a saddle-node bifurcation at current `i`.
///
/// The single cell folds where `δ` vanishes. The linear dimer folds only
/// where both `δ+` and `δ-` vanish, which needs `θ = 0` since
/// `δ- = δ+ + 2θγ`. The sigmoidal dimer folds where either block's `δ`
/// vanishes.
pub fn saddle_node_condition(
    p: &DmlParams,
    c: &Coupling,
    i: f64,
) -> Result<SaddleNodeDiagnostic, EquilibriumError> {
    let p = p.with_current(i);
    let equilibria = find_equilibria(&p, c)?;
    let mut diag = SaddleNodeDiagnostic {
        detected: false,
        x_star: None,
        branch: None,
        min_abs_delta: f64::INFINITY,
    };
    for eq in &equilibria.points {
        let ind = indicators(eq.x, &p, c);
        let plus = ind.delta_plus.abs() < SADDLE_NODE_TOLERANCE;
        let minus = ind.delta_minus.map(|d| d.abs() < SADDLE_NODE_TOLERANCE);
        for (_, d) in ind.branches() {
            diag.min_abs_delta = diag.min_abs_delta.min(d.abs());
        }
        let hit = match (c, minus) {
            (Coupling::None, _) => plus.then_some(DeterminantBranch::Plus),
            (Coupling::Linear { .. }, Some(m)) => (plus && m).then_some(DeterminantBranch::Both),
            (_, Some(m)) => match (plus, m) {
                (true, true) => Some(DeterminantBranch::Both),
                (true, false) => Some(DeterminantBranch::Plus),
                (false, true) => Some(DeterminantBranch::Minus),
                (false, false) => None,
            },
            (_, None) => None,
        };
        if let (Some(branch), false) = (hit, diag.detected) {
            diag.detected = true;
            diag.x_star = Some(eq.x);
            diag.branch = Some(branch);
        }
    }
    Ok(diag)
}
