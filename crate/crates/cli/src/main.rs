use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bedqsd::decision::DEFAULT_STRATEGY_CAP;
use bedqsd_cli::commands::parse_dims;
use bedqsd_cli::{
    cmd_evaluate, cmd_monotone, cmd_optimize, cmd_repeat, cmd_reproduce, cmd_strategies, CliError,
    CommandOutput, GlobalOptions, MonotoneArgs, OptimizeArgs, RepeatMode,
};

/// Evaluate, optimize and check measurements for quantum state discrimination.
///
/// SCENARIO arguments are JSON scenario files; the bundled names `example1`
/// and `fig1` work when no file of that name exists. Results are CSV.
#[derive(Parser, Debug)]
#[command(name = "bedqsd", version)]
struct Cli {
    /// Seed for every random choice (overrides the file's options.seed).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Tolerance for validating states and POVMs read from files.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Write the CSV table here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Maximum number of decision strategies to enumerate.
    #[arg(long, global = true, default_value_t = DEFAULT_STRATEGY_CAP)]
    cap: u64,

    /// Add a wall-clock column (makes output run-dependent).
    #[arg(long, global = true)]
    timing: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Averaged utility of named POVMs.
    Evaluate {
        scenario: String,
        /// POVM name from the file; repeatable; all POVMs when omitted.
        #[arg(long = "povm")]
        povms: Vec<String>,
        /// Utility name, or a comma-separated lexicographic chain; repeatable.
        #[arg(short, long = "utility", required = true)]
        utilities: Vec<String>,
        /// Fixed strategy such as (1,2,0): message numbers, 0 = inconclusive.
        #[arg(long)]
        strategy: Option<String>,
    },
    /// Search for the POVM with the best averaged utility.
    Optimize {
        scenario: String,
        #[command(flatten)]
        flags: OptimizeFlags,
    },
    /// Fuzz a utility for monotonicity under post-processing.
    Monotone {
        /// Utility name; repeatable.
        #[arg(short, long = "utility", required = true)]
        utilities: Vec<String>,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        /// Hilbert-space dimensions, N or LO-HI.
        #[arg(long, default_value = "2-3")]
        dims: String,
        /// Write one CSV row per violation here.
        #[arg(long, value_name = "PATH")]
        report: Option<PathBuf>,
    },
    /// Repeated measurements on several copies of the state.
    Repeat {
        scenario: String,
        /// Number of copies.
        #[arg(short = 'd', long, default_value_t = 1)]
        copies: usize,
        /// POVM applied to every copy; the file's first POVM by default.
        #[arg(long)]
        povm: Option<String>,
        /// Outcome record such as 2,2 (outcomes numbered from 1).
        #[arg(long, conflicts_with = "search")]
        record: Option<String>,
        /// Search for a record that overturns the no-measurement guess.
        #[arg(long)]
        search: bool,
        /// Random POVMs tried by --search after the file's POVMs.
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Rerun a bundled worked example: example1 or fig1.
    Reproduce { example: String },
    /// List every decision strategy for a POVM with its score.
    Strategies {
        scenario: String,
        #[arg(long)]
        povm: String,
        #[arg(short, long, default_value = "p-success")]
        utility: String,
        /// Leave out the inconclusive decision.
        #[arg(long)]
        no_inconclusive: bool,
    },
}

#[derive(Args, Debug)]
struct OptimizeFlags {
    #[arg(short, long, default_value = "p-success")]
    utility: String,
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    /// Maximum parameter sweeps per restart.
    #[arg(long, default_value_t = 200)]
    iterations: usize,
    /// Number of POVM outcomes (messages + 1 by default).
    #[arg(long)]
    outcomes: Option<usize>,
    /// Rank of each POVM factor (1 by default).
    #[arg(long)]
    rank: Option<usize>,
    #[arg(long, default_value_t = 0.5)]
    step: f64,
    #[arg(long, default_value_t = 0.5)]
    decay: f64,
    /// Write the best POVM here as a scenario file.
    #[arg(long, value_name = "PATH")]
    povm_out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<CommandOutput, CliError> {
    let opts = GlobalOptions {
        seed: cli.seed,
        tol: cli.tol,
        cap: cli.cap,
        timing: cli.timing,
    };
    match cli.command {
        Command::Evaluate {
            scenario,
            povms,
            utilities,
            strategy,
        } => cmd_evaluate(&opts, &scenario, &povms, &utilities, strategy.as_deref()),
        Command::Optimize { scenario, flags } => {
            let args = OptimizeArgs {
                utility: flags.utility,
                restarts: flags.restarts,
                iterations: flags.iterations,
                outcomes: flags.outcomes,
                rank: flags.rank,
                initial_step: flags.step,
                decay: flags.decay,
                povm_out: flags.povm_out,
            };
            cmd_optimize(&opts, &scenario, &args)
        }
        Command::Monotone {
            utilities,
            trials,
            dims,
            report,
        } => {
            let args = MonotoneArgs {
                utilities,
                trials,
                dims: parse_dims(&dims)?,
                report,
            };
            cmd_monotone(&opts, &args)
        }
        Command::Repeat {
            scenario,
            copies,
            povm,
            record,
            search,
            samples,
        } => {
            let mode = match (record, search) {
                (Some(r), _) => RepeatMode::Record(r),
                (None, true) => RepeatMode::Search { samples },
                (None, false) => RepeatMode::Condition,
            };
            cmd_repeat(&opts, &scenario, copies, povm.as_deref(), &mode)
        }
        Command::Reproduce { example } => cmd_reproduce(&opts, &example),
        Command::Strategies {
            scenario,
            povm,
            utility,
            no_inconclusive,
        } => cmd_strategies(&opts, &scenario, &povm, &utility, !no_inconclusive),
    }
}

fn emit(output: &CommandOutput, path: Option<&PathBuf>) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let f = std::fs::File::create(p).map_err(|e| CliError::Io {
                path: p.clone(),
                source: e,
            })?;
            output.table.write_csv(f)
        }
        None => output.table.write_csv(std::io::stdout().lock()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let out = cli.out.clone();
    let code = match run(cli).and_then(|o| emit(&o, out.as_ref()).map(|_| o)) {
        Ok(o) => {
            let mut err = std::io::stderr().lock();
            for n in &o.notes {
                let _ = writeln!(err, "{n}");
            }
            o.status.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
