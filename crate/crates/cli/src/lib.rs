//! Command-line front end for `bedqsd`: JSON scenario files, CSV result
//! tables and the subcommands behind the `bedqsd` binary.
//!
//! Exit status contract: 0 success, 1 invalid input or usage, 2 a
//! monotonicity violation, failed reproduction or inconsistent check.

pub mod commands;
pub mod error;
pub mod scenario_file;
pub mod table;

pub use commands::{
    cmd_evaluate, cmd_monotone, cmd_optimize, cmd_repeat, cmd_reproduce, cmd_strategies,
    CommandOutput, GlobalOptions, MonotoneArgs, OptimizeArgs, RepeatMode, Status,
};
pub use error::{CliError, CliResult};
pub use scenario_file::{parse_scenario, parse_scenario_with, LoadedScenario, ScenarioFile};
pub use table::{format_number, ResultTable};
