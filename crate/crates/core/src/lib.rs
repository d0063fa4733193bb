//! Numerical engine for conformable-derivative financial systems with market
//! confidence and ethics risk.
//!
//! - [`conformable`]: conformable derivative/integral estimates and the
//!   fixed-step conformable Euler integrator.
//! - [`models`]: the 3D, 4D and 5D financial fields, their Jacobians and the
//!   discretized 5D map.
//! - [`lyapunov`]: Lyapunov spectra of discrete maps and regime labels.
//! - [`sweep`]: parameter scans, bifurcation columns and attractor traces.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conformable;
pub mod error;
pub mod lyapunov;
pub mod models;
pub mod sweep;

pub use conformable::{
    conformable_derivative_at, conformable_derivative_refined, conformable_integral, euler_step,
    integrate, step_coefficient, FnField, GridSpec, OrderVector, StepCoefficients, Trajectory,
    VectorField, DEFAULT_GUARD,
};
pub use error::{Error, Result};
pub use lyapunov::{
    classify_regime, lyapunov_spectrum, FnMap, LyapunovSettings, LyapunovSpectrum, Regime,
    TangentMap,
};
pub use models::{
    discrete_map_5d, field_3d, field_4d, field_5d, jacobian_3d, jacobian_4d, jacobian_5d,
    map_jacobian_5d, ConformableMap, FinanceParams, JacobianField, Model, ModelKind,
};
pub use sweep::{
    attractor_trace, bifurcation_scan, bifurcation_samples, component_index, spectrum_scan,
    AttractorTrace, BifurcationSettings, Scenario, SweepParameter, SweepPlan, SweepRecord,
    SweepResult, COMPONENT_NAMES,
};
