//! Recursive Haar averaging of pseudo-representations on finite groupoids.
//!
//! A finite groupoid with a left-invariant Haar system and a normalizing
//! function turns any arrow-indexed family of invertible fiber maps into a
//! new family by the mean-ratio formula. Representations are fixed points;
//! near representations converge to one doubly exponentially, and each run
//! carries a trace of the inequalities certifying that behaviour.
//!
//! Modules:
//! - [`groupoid`]: finite groupoids, groups, actions, validation
//! - [`haar`]: Haar systems, cut-off and normalizing functions, fiber sums
//! - [`linalg`]: dense matrices, fiber metrics and operator norms
//! - [`pseudorep`]: defects, the near-representation gate, the iteration
//! - [`cohomology`]: cochains, coboundaries and Haar contractions
//! - [`metric_avg`]: invariant metrics by averaging
//! - [`scenario`], [`io`], [`cli`]: experiment files and commands

pub mod cli;
pub mod cohomology;
pub mod error;
pub mod groupoid;
pub mod haar;
pub mod io;
pub mod linalg;
pub mod metric_avg;
pub mod pseudorep;
pub mod reps;
pub mod scenario;

pub use error::{Error, Result};
pub use groupoid::{ArrowId, FiniteGroup, FiniteGroupoid, GroupAction, ObjectId};
pub use haar::{HaarIntegrator, HaarSystem, NormalizingFunction};
pub use linalg::{FiberMetric, Matrix, VectorBundle};
pub use pseudorep::{iterate_average, mean_ratio, ConvergenceTrace, IterationOptions, PseudoRep};
pub use scenario::{Scenario, ScenarioFile};
