//! Inertial-theorem dynamics of a chirped two-level system.
//!
//! The drive keeps the adiabatic parameter μ(t) linear in time. The crate
//! evaluates the closed-form inertial solution and its first-order
//! correction, propagates the exact dynamics by two independent routes
//! (Liouville-space ODE and spinor), and assembles the comparison data
//! (normalized energy, distance to the exact solution, phase-space curves).

pub mod algebra;
pub mod analysis;
pub mod error;
pub mod exact;
pub mod inertial;
pub mod linalg;
pub mod ode;
pub mod protocol;
pub mod quad;
pub mod trajectory;

pub use algebra::{
    bprime, expectations_from_spinor, Branch, EigenSystem, Gauge, GeneratorMatrix, LiouvilleVec,
    SpinorState,
};
pub use analysis::{
    distance_grid, distance_series, extremum_shifts, linear_fit, normalized_distance_series,
    normalized_energy, phase_space_export, Comparison, DistanceGrid, FitResult, PhaseSpaceRow,
};
pub use error::{Error, Result};
pub use exact::{
    ground_state, initial_ground_state, integrate_exact, integrate_liouville, integrate_spinor,
    integrate_spinor_perturbed, FieldNoise, IntegratorConfig, IntegratorMethod,
};
pub use inertial::{
    adiabatic_reference, corrected_propagate, correction_operator, inertial_parameter,
    inertial_propagate, CorrectionOperator, GeometricPhase, InertialConfig, InertialReport,
    UpsilonThresholds, Verdict,
};
pub use protocol::{validate, Fields, ProtocolParams, ProtocolSample, ValidationReport};
pub use trajectory::{Trajectory, TrajectoryLabel, TrajectoryPoint};
