//! Caputo fractional-order denatured Morris-Lecar neurons.
//!
//! The crate covers a fractional Adams predictor-corrector solver, the
//! single-cell model and two dimers (linear and sigmoidal coupling), their
//! equilibria, local stability under the Caputo derivative, the critical
//! order `β*` for the Hopf bifurcation, and sweep/curve drivers for
//! numerical experiments.

pub mod equilibrium;
pub mod experiments;
pub mod fde;
pub mod model;
mod roots;
pub mod stability;

pub use equilibrium::{
    find_equilibria, find_extrema, i_infinity, i_infinity_derivative, Branch, Equilibrium,
    EquilibriumError, EquilibriumSet, InfCurveExtrema,
};
pub use experiments::{
    bifurcation_sweep, hopf_curve, oscillation_metrics, run_experiment, BifurcationScan,
    ExperimentError, HopfCurve, SimulationSummary, SweepRange, TailSettings,
};
pub use fde::{
    mittag_leffler, solve_fde, FractionalOrder, SolveError, SolverConfig, Trajectory, VectorField,
};
pub use model::{Coupling, DmlParams, DmlSystem, ModelError, SigmoidCoupling};
pub use roots::ScanWindow;
pub use stability::{
    beta_star, classify, indicators, BetaStar, Classification, StabilityIndicators,
};
