//! Equilibria of the single cell and symmetric equilibria of the dimers.
//!
//! At rest `y = y∞(x) = A e^{αx}/γ`, so equilibria are the solutions of
//! `I = I∞(x)` with `I∞(x) = (A/γ) e^{αx} - x²(1-x)`. The two extrema of
//! `I∞` bound the current range with three equilibria.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Coupling, DmlParams, SigmoidCoupling};
use crate::roots::{find_roots, refine, ScanWindow};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EquilibriumError {
    #[error("dI∞/dx has no sign change on [{lo}, {hi}]; I∞ has no extrema")]
    NoExtrema { lo: f64, hi: f64 },
    #[error("no equilibrium found on [{lo}, {hi}] or the widened window")]
    RootWindowExhausted { lo: f64, hi: f64 },
    #[error("found {0} equilibria; only 1 to 3 are expected")]
    UnexpectedRootCount(usize),
    #[error("symmetric equilibria need a dimer coupling")]
    NotADimer,
}

/// `I∞(x) = (A/γ) e^{αx} - x²(1-x)`.
pub fn i_infinity(x: f64, p: &DmlParams) -> f64 {
    p.y_nullcline(x) - x * x * (1.0 - x)
}

/// `m`-th derivative of `I∞`. `m = 0` returns `I∞` itself.
pub fn i_infinity_derivative(x: f64, p: &DmlParams, m: u32) -> f64 {
    let exp_part = p.alpha.powi(m as i32) * p.y_nullcline(x);
    match m {
        0 => i_infinity(x, p),
        1 => exp_part - x * (2.0 - 3.0 * x),
        2 => exp_part - 2.0 * (1.0 - 3.0 * x),
        3 => exp_part + 6.0,
        _ => exp_part,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfCurveExtrema {
    pub x_max: f64,
    pub i_max: f64,
    pub x_min: f64,
    pub i_min: f64,
}

/// Local maximum and minimum of `I∞` on the default window.
pub fn find_extrema(p: &DmlParams) -> Result<InfCurveExtrema, EquilibriumError> {
    find_extrema_in(p, &ScanWindow::default())
}

pub fn find_extrema_in(
    p: &DmlParams,
    window: &ScanWindow,
) -> Result<InfCurveExtrema, EquilibriumError> {
    let d1 = |x: f64| i_infinity_derivative(x, p, 1);
    let d2 = |x: f64| i_infinity_derivative(x, p, 2);
    let critical = find_roots(d1, d2, window);
    let no_extrema = EquilibriumError::NoExtrema {
        lo: window.lo,
        hi: window.hi,
    };
    // A local maximum is followed by a local minimum.
    let x_max = *critical
        .iter()
        .find(|&&x| d2(x) < 0.0)
        .ok_or(no_extrema.clone())?;
    let x_min = *critical
        .iter()
        .find(|&&x| x > x_max && d2(x) > 0.0)
        .ok_or(no_extrema)?;
    Ok(InfCurveExtrema {
        x_max,
        i_max: i_infinity(x_max, p),
        x_min,
        i_min: i_infinity(x_min, p),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Unique,
    TwoFold,
    ThreeFold,
}

impl Branch {
    pub fn from_count(n: usize) -> Option<Self> {
        match n {
            1 => Some(Branch::Unique),
            2 => Some(Branch::TwoFold),
            3 => Some(Branch::ThreeFold),
            _ => None,
        }
    }

    pub fn count(self) -> usize {
        match self {
            Branch::Unique => 1,
            Branch::TwoFold => 2,
            Branch::ThreeFold => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Unique => "unique",
            Branch::TwoFold => "two-fold",
            Branch::ThreeFold => "three-fold",
        }
    }
}

/// Absolute tolerance on `I` for treating it as equal to `I_min` or `I_max`.
pub const BRANCH_FOLD_TOLERANCE: f64 = 1e-12;

pub fn classify_branch(i: f64, ex: &InfCurveExtrema) -> Branch {
    if (i - ex.i_min).abs() <= BRANCH_FOLD_TOLERANCE
        || (i - ex.i_max).abs() <= BRANCH_FOLD_TOLERANCE
    {
        Branch::TwoFold
    } else if i > ex.i_min && i < ex.i_max {
        Branch::ThreeFold
    } else {
        Branch::Unique
    }
}

/// An equilibrium `(x*, y*)`; for a dimer it stands for `(x*, y*, x*, y*)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSet {
    /// Sorted by ascending `x`.
    pub points: Vec<Equilibrium>,
    pub branch: Branch,
}

impl EquilibriumSet {
    fn from_roots(roots: Vec<f64>, p: &DmlParams) -> Result<Self, EquilibriumError> {
        let branch = Branch::from_count(roots.len())
            .ok_or(EquilibriumError::UnexpectedRootCount(roots.len()))?;
        let points = roots
            .into_iter()
            .map(|x| Equilibrium {
                x,
                y: p.y_nullcline(x),
            })
            .collect();
        Ok(Self { points, branch })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn find_equilibria_2d(p: &DmlParams) -> Result<EquilibriumSet, EquilibriumError> {
    find_equilibria_2d_in(p, &ScanWindow::default())
}

pub fn find_equilibria_2d_in(
    p: &DmlParams,
    window: &ScanWindow,
) -> Result<EquilibriumSet, EquilibriumError> {
    let f = |x: f64| p.i - i_infinity(x, p);
    let df = |x: f64| -i_infinity_derivative(x, p, 1);
    let roots = roots_with_widening(f, df, window)?;
    EquilibriumSet::from_roots(roots, p)
}

/// Symmetric equilibria `(x*, y*, x*, y*)` of a dimer. Linear coupling
/// cancels at symmetric states, so those match the single cell for every θ.
pub fn find_symmetric_equilibria(
    p: &DmlParams,
    c: &Coupling,
) -> Result<EquilibriumSet, EquilibriumError> {
    find_symmetric_equilibria_in(p, c, &ScanWindow::default())
}

pub fn find_symmetric_equilibria_in(
    p: &DmlParams,
    c: &Coupling,
    window: &ScanWindow,
) -> Result<EquilibriumSet, EquilibriumError> {
    match c {
        Coupling::None => Err(EquilibriumError::NotADimer),
        Coupling::Linear { .. } => find_equilibria_2d_in(p, window),
        Coupling::Sigmoid(s) => {
            let f = |x: f64| sigmoid_residual(x, p, s);
            let df = |x: f64| sigmoid_residual_derivative(x, p, s);
            let roots = roots_with_widening(f, df, window)?;
            EquilibriumSet::from_roots(roots, p)
        }
    }
}

/// Equilibria of the system selected by `c`: the single cell for
/// `Coupling::None`, otherwise the symmetric dimer equilibria.
pub fn find_equilibria(p: &DmlParams, c: &Coupling) -> Result<EquilibriumSet, EquilibriumError> {
    match c {
        Coupling::None => find_equilibria_2d(p),
        _ => find_symmetric_equilibria(p, c),
    }
}

/// `x²(1-x) - (A/γ)e^{αx} + I + σ(v_s - x) ζ(x)`.
pub fn sigmoid_residual(x: f64, p: &DmlParams, s: &SigmoidCoupling) -> f64 {
    p.i - i_infinity(x, p) + s.current(x, x)
}

fn sigmoid_residual_derivative(x: f64, p: &DmlParams, s: &SigmoidCoupling) -> f64 {
    -i_infinity_derivative(x, p, 1) - s.sigma * s.activation(x)
        + s.sigma * (s.v_s - x) * s.activation_slope(x)
}

fn roots_with_widening(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    window: &ScanWindow,
) -> Result<Vec<f64>, EquilibriumError> {
    let roots = find_roots(&f, &df, window);
    if !roots.is_empty() {
        return Ok(roots);
    }
    let wide = window.widened();
    let roots = find_roots(&f, &df, &wide);
    if roots.is_empty() {
        Err(EquilibriumError::RootWindowExhausted {
            lo: wide.lo,
            hi: wide.hi,
        })
    } else {
        Ok(roots)
    }
}

/// Refines a bracketed root of `I∞(x) = target`; handy when the caller
/// already knows a monotone interval.
pub fn solve_i_infinity(p: &DmlParams, target: f64, lo: f64, hi: f64) -> Option<f64> {
    let f = |x: f64| i_infinity(x, p) - target;
    let (flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Some(lo);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    let df = |x: f64| i_infinity_derivative(x, p, 1);
    Some(refine(&f, &df, lo, hi, flo))
}
