//! Stochastic auxiliary problem principle (APP).
//!
//! Minimizes `J(u) = E[j^c(u, W) + j^a(u, W)]` over a closed convex set by solving, at each
//! step, a strongly convex auxiliary problem built from a user-chosen function `K`. Quadratic
//! `K` gives (projected) SGD or stochastic proximal gradient, negative entropy on the simplex
//! gives stochastic mirror descent, and an additive `K` splits each step into independent
//! block subproblems.
//!
//! The core is generic over [`Scalar`] (`f32`, `f64`); the `*64` aliases fix the common case.

pub mod app;
pub mod auxsolve;
pub mod bias;
pub mod diagnostics;
pub mod error;
pub mod feasible;
pub mod harness;
mod linalg;
pub mod mirror;
pub mod partition;
pub mod problem;
pub mod problems;
pub mod rng;
pub mod scalar;
pub mod scenario;
pub mod vector;

pub use app::{averaged_iterate, AveragedIterate, RunOptions, StepSchedule, StochasticApp, Trajectory};
pub use auxsolve::{solve_auxiliary, vi_residual, AuxiliaryInstance, SolveOptions, SolvePath, SolveReport};
pub use bias::{BiasMode, BiasSchedule};
pub use diagnostics::{
    fit_power_law, fit_rate, lipschitz_bound_check, lyapunov_recursion_report, sum_manip_identity, LyapunovReport,
    RateFit, RecursionCoefficients, RecursionConstants,
};
pub use error::{Error, Result};
pub use feasible::FeasibleSet;
pub use mirror::{bregman, AuxiliaryFunction};
pub use partition::BlockPartition;
pub use problem::{AdditiveTerm, GrowthConstants, SampledProblem};
pub use problems::{make_block_coupled, make_l1_least_squares, make_simplex_risk, make_stochastic_quadratic, ZooProblem};
pub use scalar::Scalar;
pub use scenario::{Scenario, ScenarioSampler};
pub use vector::{DualVector, Norm, Vector};

pub type Vector64 = Vector<f64>;
pub type Vector32 = Vector<f32>;
pub type DualVector64 = DualVector<f64>;
pub type FeasibleSet64 = FeasibleSet<f64>;
pub type AuxiliaryFunction64 = AuxiliaryFunction<f64>;
pub type Trajectory64 = Trajectory<f64>;
pub type StochasticApp64 = StochasticApp<f64>;
