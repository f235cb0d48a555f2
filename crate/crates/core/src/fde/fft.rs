//! FFT-accelerated evaluation of the history sums.
//!
//! The node range is split recursively. Once the left half of a range is
//! solved, its contribution to every node of the right half is a single
//! linear convolution against the lag weights, done with one FFT per state
//! component. Leaves of at most `LEAF` nodes are stepped with direct sums
//! over their own nodes. Total cost is `O(N log² N)`.

use std::collections::HashMap;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::solver::{dot, Stepper, VectorField};
use super::SolveError;

const LEAF: usize = 64;

struct BlockSpectra {
    size: usize,
    predictor: Vec<Complex64>,
    corrector: Vec<Complex64>,
}

struct Engine {
    planner: FftPlanner<f64>,
    spectra: HashMap<(usize, usize), BlockSpectra>,
    /// Contributions from already-finished blocks, `pred_acc[c][m]`.
    pred_acc: Vec<Vec<f64>>,
    corr_acc: Vec<Vec<f64>>,
}

pub(super) fn run<V: VectorField + ?Sized>(state: &mut Stepper<'_, V>) -> Result<(), SolveError> {
    if state.steps == 0 {
        return Ok(());
    }
    let mut engine = Engine {
        planner: FftPlanner::new(),
        spectra: HashMap::new(),
        pred_acc: vec![vec![0.0; state.steps + 1]; state.dim],
        corr_acc: vec![vec![0.0; state.steps + 1]; state.dim],
    };
    solve_range(state, &mut engine, 1, state.steps)
}

fn solve_range<V: VectorField + ?Sized>(
    state: &mut Stepper<'_, V>,
    engine: &mut Engine,
    lo: usize,
    hi: usize,
) -> Result<(), SolveError> {
    if hi + 1 - lo <= LEAF {
        return solve_leaf(state, engine, lo, hi);
    }
    let mid = lo + (hi - lo) / 2;
    solve_range(state, engine, lo, mid)?;
    engine.propagate(state, lo, mid, hi);
    solve_range(state, engine, mid + 1, hi)
}

fn solve_leaf<V: VectorField + ?Sized>(
    state: &mut Stepper<'_, V>,
    engine: &Engine,
    lo: usize,
    hi: usize,
) -> Result<(), SolveError> {
    let mut pred_hist = vec![0.0; state.dim];
    let mut corr_hist = vec![0.0; state.dim];
    let mut rev_pred = Vec::with_capacity(LEAF);
    let mut rev_corr = Vec::with_capacity(LEAF);
    for m in lo..=hi {
        // Lags m-1-j for sources j = lo..m-1, in source order.
        rev_pred.clear();
        rev_corr.clear();
        rev_pred.extend((lo..m).map(|j| state.predictor_w[m - 1 - j]));
        rev_corr.extend((lo..m).map(|j| state.corrector_w[m - 1 - j]));
        for c in 0..state.dim {
            let sources = &state.history[c][lo..m];
            pred_hist[c] = engine.pred_acc[c][m] + dot(&rev_pred, sources);
            corr_hist[c] = engine.corr_acc[c][m] + dot(&rev_corr, sources);
        }
        state.advance(m, &pred_hist, &corr_hist)?;
    }
    Ok(())
}

impl Engine {
    /// Adds the contribution of sources `lo..=mid` to targets `mid+1..=hi`.
    fn propagate<V: VectorField + ?Sized>(
        &mut self,
        state: &Stepper<'_, V>,
        lo: usize,
        mid: usize,
        hi: usize,
    ) {
        let left = mid + 1 - lo;
        let right = hi - mid;
        let (forward, inverse) = self.plans(left + right - 1);
        let spectra = self
            .spectra
            .entry((left, right))
            .or_insert_with(|| block_spectra(state, left, right, &forward));
        let size = spectra.size;
        let norm = 1.0 / size as f64;

        let mut src = vec![Complex64::new(0.0, 0.0); size];
        let mut pred = vec![Complex64::new(0.0, 0.0); size];
        let mut corr = vec![Complex64::new(0.0, 0.0); size];
        for c in 0..state.dim {
            src.fill(Complex64::new(0.0, 0.0));
            for (slot, &v) in src.iter_mut().zip(&state.history[c][lo..=mid]) {
                slot.re = v;
            }
            forward.process(&mut src);
            for k in 0..size {
                pred[k] = src[k] * spectra.predictor[k];
                corr[k] = src[k] * spectra.corrector[k];
            }
            inverse.process(&mut pred);
            inverse.process(&mut corr);
            // Target mid+1+k reads linear-convolution index left-1+k.
            for k in 0..right {
                self.pred_acc[c][mid + 1 + k] += pred[left - 1 + k].re * norm;
                self.corr_acc[c][mid + 1 + k] += corr[left - 1 + k].re * norm;
            }
        }
    }

    fn plans(&mut self, min_len: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
        let size = min_len.next_power_of_two();
        (
            self.planner.plan_fft_forward(size),
            self.planner.plan_fft_inverse(size),
        )
    }
}

fn block_spectra<V: VectorField + ?Sized>(
    state: &Stepper<'_, V>,
    left: usize,
    right: usize,
    forward: &Arc<dyn Fft<f64>>,
) -> BlockSpectra {
    let size = forward.len();
    let lags = left + right - 1;
    let spectrum = |weights: &[f64]| {
        let mut buf = vec![Complex64::new(0.0, 0.0); size];
        for (slot, &w) in buf.iter_mut().zip(&weights[..lags]) {
            slot.re = w;
        }
        forward.process(&mut buf);
        buf
    };
    BlockSpectra {
        size,
        predictor: spectrum(&state.predictor_w),
        corrector: spectrum(&state.corrector_w),
    }
}
