//! Distributed augmented Lagrangian methods.
//!
//! Every variant is an instance of the same outer loop: an inner policy moves
//! the primal iterate towards `argmin_x L_a(x; μ(k))`, then all nodes take a
//! dual ascent step `μ ← μ + α(𝓛⊗I)x`. See [`run_inexact_al`].

mod config;
mod driver;
mod policy;
mod schedule;
mod state;
mod trace;

pub use config::{AlgorithmConfig, Variant};
pub use driver::{
    run, run_det_gradient, run_det_jacobi, run_inexact_al, run_rand_gauss_seidel, run_rand_gradient,
    RunOptions,
};
pub use policy::{
    ExactMinimizer, GradientSteps, Identity, InnerPolicy, JacobiSweeps, RandomizedGaussSeidel,
    RandomizedGradient, StepCounters,
};
pub use schedule::{sample_poisson_schedule, PoissonSchedule, ScheduleStream};
pub use state::{dual_update, PrimalDualState};
pub use trace::{RunTrace, TraceRecord};
