//! Constructive and numerical measurement solvers.

pub mod maxconf;
pub mod optimize;
pub mod repeated;
pub mod two_state;

pub use maxconf::{
    assemble_max_confidence_povm, confidence, max_confidence_directions, minimize_inconclusive,
    ConfidenceDirection, InconclusiveSolution,
};
pub use optimize::{optimize_povm, OptimizedPovm, OptimizerConfig};
pub use repeated::{
    guess_condition, repeated_condition, simulate_repeated, verify_repeated_condition,
    RepeatedCheck, RepeatedCondition, RepeatedScenario, Witness,
};
pub use two_state::{two_state_optimal, TwoStateSolution};
