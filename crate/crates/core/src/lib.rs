//! Quantum state discrimination as Bayesian experimental design.
//!
//! Bob receives one of Alice's states `ρ_ν` (prior `q_ν`), measures it with a
//! POVM and then decides on a message, or declares the round inconclusive.
//! A [`utility::UtilityFunction`] scores each `(POVM, outcome, strategy,
//! message)` tuple; averaging it over the joint distribution and maximizing
//! over decision strategies gives the figure of merit of a measurement.
//!
//! Modules:
//! - [`linalg`]: Hermitian matrices, positivity, spectral decompositions.
//! - [`scenario`]: alphabets, POVMs and the probabilities they induce.
//! - [`decision`]: decision strategies and analytic optimal strategies.
//! - [`utility`]: utility functions, lexicographic scores, averaged utility.
//! - [`transforms`]: post-processing by stochastic maps, rank-1 refinement.
//! - [`monotone`]: checks for the merge/proportionality conditions and a
//!   monotonicity fuzzer.
//! - [`solvers`]: constructive and numerical measurement solvers.

pub mod decision;
pub mod error;
pub mod fixtures;
pub mod linalg;
pub mod monotone;
pub mod random;
pub mod scenario;
pub mod solvers;
pub mod transforms;
pub mod utility;

pub use decision::{Decision, DecisionStrategy};
pub use error::{Error, Result};
pub use linalg::{Hermitian, Spectrum};
pub use scenario::{DensityMatrix, Distribution, Povm, ProbabilityTable, Scenario};
pub use utility::{UtilityFunction, UtilityScore};
