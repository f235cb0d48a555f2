//! Shared fixtures for the criterion benchmarks.

use fracdml::{Coupling, DmlParams, DmlSystem, SigmoidCoupling, SolverConfig};

pub fn single_cell() -> DmlSystem {
    DmlSystem::single(DmlParams::default()).expect("default parameters are valid")
}

pub fn sigmoid_dimer() -> DmlSystem {
    DmlSystem::new(
        DmlParams::default(),
        Coupling::Sigmoid(SigmoidCoupling::default()),
    )
    .expect("default parameters are valid")
}

/// `steps` steps of the reduced-grid step size.
pub fn grid(steps: usize, use_fft: bool) -> SolverConfig {
    let h = 0.05;
    SolverConfig::new(0.0, steps as f64 * h, h).with_fft(use_fft)
}
