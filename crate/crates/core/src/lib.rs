//! Multi-walk speedup prediction for Las Vegas algorithms.
//!
//! - [`distributions`]: runtime distribution families, the minimum-of-`n`
//!   transform and predicted speedups.
//! - [`fitting`]: parameter estimation and Kolmogorov–Smirnov testing on
//!   empirical runtime samples.
//! - [`solver`]: Adaptive Search on three permutation benchmarks.
//! - [`multiwalk`]: bootstrap min-resampling and first-wins parallel runs.
//! - [`io`]: CSV schemas shared by the command-line pipeline.

pub mod distributions;
pub mod error;
pub mod fitting;
pub mod io;
pub mod multiwalk;
pub mod quadrature;
pub mod solver;
pub mod special;

pub use distributions::{Family, MinTransform, RuntimeDistribution, SpeedupCurve, SpeedupPoint};
pub use error::{Error, Result};
pub use fitting::{EmpiricalSample, FitReport, Unit, Verdict};
pub use multiwalk::{BootstrapEstimate, MeasuredSpeedup, ParallelRunRecord};
pub use solver::{PermutationProblem, ProblemKind, RunSample, SolverParams};
