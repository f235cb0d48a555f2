use statrs::function::gamma::{gamma, ln_gamma};
use thiserror::Error;

/// Largest `|z|` accepted by [`mittag_leffler`].
pub const ML_MAX_ARGUMENT: f64 = 50.0;

const MAX_TERMS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MittagLefflerError {
    #[error("order must lie in (0, 1], got {0}")]
    InvalidOrder(f64),
    #[error("|z| = {0} exceeds the series budget of {ML_MAX_ARGUMENT}")]
    ArgumentOutOfRange(f64),
    #[error("series did not converge within {MAX_TERMS} terms")]
    ConvergenceBudgetExceeded,
}

/// One-parameter Mittag-Leffler function `E_β(z) = Σ z^k / Γ(βk + 1)`,
/// summed directly with Kahan compensation.
///
/// `E_β(-t^β)` solves `D^β x = -x`, `x(0) = 1`, which makes this the
/// reference solution for checking the solver.
pub fn mittag_leffler(beta: f64, z: f64) -> Result<f64, MittagLefflerError> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(MittagLefflerError::InvalidOrder(beta));
    }
    if !z.is_finite() || z.abs() > ML_MAX_ARGUMENT {
        return Err(MittagLefflerError::ArgumentOutOfRange(z.abs()));
    }
    if z == 0.0 {
        return Ok(1.0);
    }

    let mut sum = 1.0;
    let mut compensation = 0.0;
    let ln_abs_z = z.abs().ln();
    for k in 1..=MAX_TERMS {
        let term = series_term(beta, z, ln_abs_z, k);
        let y = term - compensation;
        let t = sum + y;
        compensation = (t - sum) - y;
        sum = t;
        if !sum.is_finite() {
            break;
        }
        if term.abs() < 1e-16 * sum.abs() {
            return Ok(sum);
        }
    }
    Err(MittagLefflerError::ConvergenceBudgetExceeded)
}

/// `z^k / Γ(βk + 1)`, through logarithms once `Γ` would overflow.
fn series_term(beta: f64, z: f64, ln_abs_z: f64, k: usize) -> f64 {
    let arg = beta * k as f64 + 1.0;
    if arg < 170.0 {
        return z.powi(k as i32) / gamma(arg);
    }
    log_series_term(beta, z, ln_abs_z, k)
}

fn log_series_term(beta: f64, z: f64, ln_abs_z: f64, k: usize) -> f64 {
    let magnitude = (k as f64 * ln_abs_z - ln_gamma(beta * k as f64 + 1.0)).exp();
    if z < 0.0 && k % 2 == 1 {
        -magnitude
    } else {
        magnitude
    }
}
