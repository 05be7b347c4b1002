//! Distributed Nash equilibrium seeking with the accelerated direct method (ADM).
//!
//! Players of a convex game with a restricted strongly monotone pseudo-gradient
//! each hold a local estimate of the joint action and exchange it with their
//! neighbours over a communication graph. Every iteration mixes the estimates
//! with a symmetric stochastic matrix and takes a projected pseudo-gradient
//! step with operator extrapolation on the player's own coordinate.
//!
//! The crate is organised as
//!
//! * [`game`]: games, pseudo-gradients, action intervals, certified constants,
//!   the quadratic benchmark family and an independent equilibrium oracle;
//! * [`graph`]: communication graphs, mixing matrices and their spectra;
//! * [`algorithms`]: ADM, the distributed gradient play baseline (DDP), the
//!   step-size tuner and the trace driver;
//! * [`analysis`]: consensus decomposition, rate fitting, bound verification and
//!   the scalar inequality checkers used by the tuner.
//!
//! All numerical code is generic over [`Scalar`]; the `*64` aliases below fix
//! the scalar to `f64`, which is what the harness uses.
//!
//! Player indices are zero-based throughout.

// `!(a < b)` style comparisons are used on purpose so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algorithms;
pub mod analysis;
mod error;
pub mod game;
pub mod graph;
pub mod linalg;
mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use algorithms::{
    adm_init, adm_step, ddp_step, epsilon_of, eta_of, gradient_diag, project_augmented,
    prop_constants, run, theorem_bound, thresholds, tune_parameters, AdmParams, AdmState, Algorithm, EstimationMatrix, PropConstants,
    RunConfig, RunRecord, RunStatus, RunTrace, StepSize, Thresholds,
};
pub use analysis::{
    check_appendix1, check_appendix2, consensus_split, distance_sq, fit_rate, fit_rate_window,
    verify_bound, Appendix2Outcome, BoundReport, ConsensusSplit, InequalityCheck, RateFit,
};
pub use game::{
    aggregate_lipschitz, generate_quadratic_game, nash_residual, project_interval,
    quadratic_constants, reference_equilibrium, ActionInterval, CountingOracle,
    EquilibriumCertificate, GameInstance, GeneratorConfig, GradientOracle, QuadraticConstants,
    QuadraticGameRecord, QuadraticGameSpec,
};
pub use graph::{
    generate_named, generate_tree, lazy_laplacian_weights, metropolis_weights, mix,
    second_singular_value, CommGraph, GraphKind, GraphRecord, MixingMatrix,
};
pub use linalg::Matrix;

pub type Matrix64 = Matrix<f64>;
pub type ActionInterval64 = ActionInterval<f64>;
pub type QuadraticGameSpec64 = QuadraticGameSpec<f64>;
pub type GameInstance64 = GameInstance<f64>;
pub type EquilibriumCertificate64 = EquilibriumCertificate<f64>;
pub type MixingMatrix64 = MixingMatrix<f64>;
pub type EstimationMatrix64 = EstimationMatrix<f64>;
pub type AdmParams64 = AdmParams<f64>;
pub type AdmState64 = AdmState<f64>;
pub type RunTrace64 = RunTrace<f64>;

pub type Matrix32 = Matrix<f32>;
pub type GameInstance32 = GameInstance<f32>;
pub type MixingMatrix32 = MixingMatrix<f32>;
pub type AdmParams32 = AdmParams<f32>;
