use statrs::function::gamma::gamma;

use super::weights::{corrector_coefficient, initial_corrector_coefficient, predictor_coefficient};
use super::{fft, FractionalOrder, SolveError, SolverConfig, Trajectory};

/// Right-hand side of an autonomous or non-autonomous system `D^β y = f(t, y)`.
pub trait VectorField {
    fn dim(&self) -> usize;

    /// Writes `f(t, state)` into `out`. Both slices have length `dim()`.
    fn eval(&self, t: f64, state: &[f64], out: &mut [f64]);
}

/// Adapts a closure to [`VectorField`].
pub struct FnField<F> {
    dim: usize,
    f: F,
}

impl<F> FnField<F>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> VectorField for FnField<F>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, t: f64, state: &[f64], out: &mut [f64]) {
        (self.f)(t, state, out)
    }
}

impl<V: VectorField + ?Sized> VectorField for &V {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn eval(&self, t: f64, state: &[f64], out: &mut [f64]) {
        (**self).eval(t, state, out)
    }
}

/// Solves `D^β y = f(t, y)`, `y(t_start) = y0` with the fractional
/// Adams-Bashforth-Moulton scheme on the grid `t_k = t_start + k h`.
///
/// On a non-finite state the solve stops and the error carries every node
/// computed so far.
pub fn solve_fde<V: VectorField + ?Sized>(
    field: &V,
    order: FractionalOrder,
    config: &SolverConfig,
    y0: &[f64],
) -> Result<Trajectory, SolveError> {
    config.validate()?;
    let dim = field.dim();
    if y0.len() != dim {
        return Err(SolveError::DimensionMismatch {
            expected: dim,
            got: y0.len(),
        });
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(SolveError::NonFiniteState {
            step: 0,
            time: config.t_start,
            partial: Box::new(Trajectory::with_capacity(config.t_start, config.h, dim, 0)),
        });
    }

    let mut state = Stepper::new(field, order, config, y0);
    if config.use_fft {
        fft::run(&mut state)?;
    } else {
        run_direct(&mut state)?;
    }
    Ok(state.trajectory)
}

/// Shared state of one solve: the weight tables, the stored `f` history and
/// the output trajectory.
pub(super) struct Stepper<'a, V: ?Sized> {
    field: &'a V,
    pub(super) dim: usize,
    pub(super) steps: usize,
    t_start: f64,
    h: f64,
    corrector_iterations: usize,
    y0: Vec<f64>,
    /// `h^β / Γ(β + 1)`
    predictor_scale: f64,
    /// `h^β / Γ(β + 2)`
    corrector_scale: f64,
    beta: f64,
    /// Predictor coefficients indexed by lag `k = m - 1 - j`.
    pub(super) predictor_w: Vec<f64>,
    /// Interior corrector coefficients indexed by the same lag.
    pub(super) corrector_w: Vec<f64>,
    /// `f(t_j, y_j)` stored component-major: `history[c][j]`.
    pub(super) history: Vec<Vec<f64>>,
    pub(super) trajectory: Trajectory,
    scratch: Scratch,
}

struct Scratch {
    y: Vec<f64>,
    base: Vec<f64>,
    f: Vec<f64>,
}

impl<'a, V: VectorField + ?Sized> Stepper<'a, V> {
    fn new(field: &'a V, order: FractionalOrder, config: &SolverConfig, y0: &[f64]) -> Self {
        let beta = order.value();
        let dim = y0.len();
        let steps = config.steps();
        let h_beta = config.h.powf(beta);
        let predictor_w = (0..steps).map(|k| predictor_coefficient(beta, k)).collect();
        let corrector_w = (0..steps).map(|k| corrector_coefficient(beta, k)).collect();
        let mut history = vec![Vec::with_capacity(steps + 1); dim];
        let mut f0 = vec![0.0; dim];
        field.eval(config.t_start, y0, &mut f0);
        for (c, v) in f0.iter().enumerate() {
            history[c].push(*v);
        }
        let mut trajectory = Trajectory::with_capacity(config.t_start, config.h, dim, steps + 1);
        trajectory.push(y0);
        Self {
            field,
            dim,
            steps,
            t_start: config.t_start,
            h: config.h,
            corrector_iterations: config.corrector_iterations,
            y0: y0.to_vec(),
            predictor_scale: h_beta / gamma(beta + 1.0),
            corrector_scale: h_beta / gamma(beta + 2.0),
            beta,
            predictor_w,
            corrector_w,
            history,
            trajectory,
            scratch: Scratch {
                y: vec![0.0; dim],
                base: vec![0.0; dim],
                f: vec![0.0; dim],
            },
        }
    }

    /// Advances to node `m` (≥ 1). `pred_hist[c]` must hold
    /// `Σ_{j=1}^{m-1} predictor_w[m-1-j] f_j` and `corr_hist[c]` the same
    /// sum with `corrector_w`; the initial-node terms are added here.
    pub(super) fn advance(
        &mut self,
        m: usize,
        pred_hist: &[f64],
        corr_hist: &[f64],
    ) -> Result<(), SolveError> {
        let t = self.t_start + m as f64 * self.h;
        let p0 = predictor_coefficient(self.beta, m - 1);
        let a0 = initial_corrector_coefficient(self.beta, m - 1);
        let Scratch { y, base, f } = &mut self.scratch;
        for c in 0..self.dim {
            let f0 = self.history[c][0];
            y[c] = self.y0[c] + self.predictor_scale * (p0 * f0 + pred_hist[c]);
            base[c] = self.y0[c] + self.corrector_scale * (a0 * f0 + corr_hist[c]);
        }
        for _ in 0..self.corrector_iterations {
            self.field.eval(t, y, f);
            for c in 0..self.dim {
                y[c] = base[c] + self.corrector_scale * f[c];
            }
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(SolveError::NonFiniteState {
                step: m,
                time: t,
                partial: Box::new(self.trajectory.clone()),
            });
        }
        self.field.eval(t, y, f);
        self.trajectory.push(y);
        for (hist, &v) in self.history.iter_mut().zip(f.iter()) {
            hist.push(v);
        }
        Ok(())
    }
}

fn run_direct<V: VectorField + ?Sized>(state: &mut Stepper<'_, V>) -> Result<(), SolveError> {
    // Reversed tables turn each history sum into a forward dot product:
    // for target m the sources j = 1..m-1 pair with rev[steps-m+1 .. steps].
    let rev_pred: Vec<f64> = state.predictor_w.iter().rev().copied().collect();
    let rev_corr: Vec<f64> = state.corrector_w.iter().rev().copied().collect();
    let mut pred_hist = vec![0.0; state.dim];
    let mut corr_hist = vec![0.0; state.dim];
    for m in 1..=state.steps {
        let offset = state.steps + 1 - m;
        for c in 0..state.dim {
            let sources = &state.history[c][1..m];
            pred_hist[c] = dot(&rev_pred[offset..], sources);
            corr_hist[c] = dot(&rev_corr[offset..], sources);
        }
        state.advance(m, &pred_hist, &corr_hist)?;
    }
    Ok(())
}

/// Dot product with four interleaved accumulators. The summation order is
/// fixed, so results are reproducible bit for bit.
pub(super) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let chunks_a = a.chunks_exact(4);
    let chunks_b = b.chunks_exact(4);
    let tail: f64 = chunks_a
        .remainder()
        .iter()
        .zip(chunks_b.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (x, y) in chunks_a.zip(chunks_b) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}
