//! The subcommands. Each returns a [`ResultTable`] plus an exit status;
//! printing is left to the binary.

use std::path::PathBuf;
use std::time::Instant;

use bedqsd::decision::{enumerate_strategies, DecisionTable, DEFAULT_STRATEGY_CAP};
use bedqsd::monotone::monotonicity_fuzz;
use bedqsd::solvers::{
    guess_condition, max_confidence_directions, optimize_povm, repeated_condition,
    simulate_repeated, verify_repeated_condition, OptimizerConfig, RepeatedCondition,
    RepeatedScenario,
};
use bedqsd::utility::{
    average_utility_table, max_confidence_utility, min_error_utility, optimality_band,
    parse_utility, score_strategy, StrategyMode,
};
use bedqsd::{Decision, DecisionStrategy, Povm, ProbabilityTable, UtilityScore};

use crate::error::{CliError, CliResult};
use crate::scenario_file::{
    bundled, parse_scenario_str, parse_scenario_with, LoadedScenario, NamedPovm, ScenarioFile,
};
use crate::table::{format_number, ResultTable};

/// Flags shared by every subcommand.
#[derive(Clone, Debug, PartialEq)]
pub struct GlobalOptions {
    /// Overrides the seed stored in the scenario file.
    pub seed: Option<u64>,
    /// Overrides the PSD and completeness tolerances used to validate input.
    pub tol: Option<f64>,
    /// Cap on enumerated decision strategies.
    pub cap: u64,
    /// Adds a `wall_ms` column where rows correspond to timed work.
    pub timing: bool,
}

impl Default for GlobalOptions {
    fn default() -> Self {
        GlobalOptions {
            seed: None,
            tol: None,
            cap: DEFAULT_STRATEGY_CAP,
            timing: false,
        }
    }
}

impl GlobalOptions {
    fn seed_for(&self, file: Option<&LoadedScenario>) -> u64 {
        self.seed.or(file.and_then(|f| f.seed)).unwrap_or(0)
    }

    fn load(&self, scenario: &str) -> CliResult<LoadedScenario> {
        parse_scenario_with(scenario, self.tol)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Success,
    /// A monotonicity violation, failed reproduction or inconsistent check.
    Violation,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Success => 0,
            Status::Violation => 2,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CommandOutput {
    pub table: ResultTable,
    pub status: Status,
    /// Human-readable remarks for stderr.
    pub notes: Vec<String>,
}

impl CommandOutput {
    fn ok(table: ResultTable) -> Self {
        CommandOutput {
            table,
            status: Status::Success,
            notes: Vec::new(),
        }
    }
}

fn score_columns(arity: usize) -> Vec<String> {
    (1..=arity).map(|k| format!("score_{k}")).collect()
}

fn score_cells(score: &UtilityScore, width: usize) -> Vec<String> {
    (0..width)
        .map(|k| {
            if k < score.arity() {
                format_number(score.get(k))
            } else {
                String::new()
            }
        })
        .collect()
}

fn joined(score: &UtilityScore) -> String {
    score
        .components()
        .iter()
        .map(|&x| format_number(x))
        .collect::<Vec<_>>()
        .join(";")
}

fn elapsed_ms(start: Instant) -> String {
    format_number(start.elapsed().as_secs_f64() * 1e3)
}

fn p_inconclusive(table: &ProbabilityTable, g: &DecisionStrategy) -> f64 {
    DecisionTable::new(table, g).probability(Decision::Inconclusive)
}

/// Parses `(1,2,0)` or `1,2,0`: message numbers from 1, 0 for inconclusive.
pub fn parse_strategy(text: &str, outcomes: usize, messages: usize) -> CliResult<DecisionStrategy> {
    let inner = text.trim().trim_start_matches('(').trim_end_matches(')');
    let indices = inner
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| CliError::Validation(format!("strategy '{text}': '{t}' is not a decision number")))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let g = DecisionStrategy::from_indices(&indices);
    g.validate(outcomes, messages)
        .map_err(|e| CliError::Validation(format!("strategy '{text}': {e}")))?;
    Ok(g)
}

/// Parses a record such as `2,2` (outcome numbers from 1) to 0-based outcomes.
pub fn parse_record(text: &str) -> CliResult<Vec<usize>> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| match t.parse::<usize>() {
            Ok(k) if k >= 1 => Ok(k - 1),
            _ => Err(CliError::Validation(format!(
                "record '{text}': '{t}' is not an outcome number (outcomes start at 1)"
            ))),
        })
        .collect()
}

/// Parses `2-3` or `2` into an inclusive range of dimensions.
pub fn parse_dims(text: &str) -> CliResult<(usize, usize)> {
    let bad = || CliError::Validation(format!("dims '{text}': expected N or LO-HI with 1 <= LO <= HI"));
    let (lo, hi) = match text.split_once('-') {
        Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
        None => {
            let d = text.trim().parse().map_err(|_| bad())?;
            (d, d)
        }
    };
    if lo == 0 || lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

/// Averaged utility of named POVMs, maximized over strategies unless one
/// is given. An empty `povms` list means every POVM in the file.
pub fn cmd_evaluate(
    opts: &GlobalOptions,
    scenario: &str,
    povms: &[String],
    utilities: &[String],
    strategy: Option<&str>,
) -> CliResult<CommandOutput> {
    if utilities.is_empty() {
        return Err(CliError::Usage("evaluate needs at least one --utility".into()));
    }
    let file = opts.load(scenario)?;
    let selected: Vec<&NamedPovm> = if povms.is_empty() {
        file.povms.iter().collect()
    } else {
        povms
            .iter()
            .map(|name| {
                file.povm(name)?;
                Ok(file.povms.iter().find(|p| &p.name == name).expect("checked above"))
            })
            .collect::<CliResult<_>>()?
    };
    if selected.is_empty() {
        return Err(CliError::Validation(format!("{}: the file defines no POVMs", file.id)));
    }
    let parsed = utilities
        .iter()
        .map(|u| parse_utility(u).map_err(CliError::from))
        .collect::<CliResult<Vec<_>>>()?;
    let width = parsed.iter().map(|u| u.arity()).max().unwrap_or(1);

    let mut header: Vec<String> = ["scenario", "povm", "utility", "strategy", "mode", "p_inconclusive"]
        .into_iter()
        .map(String::from)
        .collect();
    header.extend(score_columns(width));
    if opts.timing {
        header.push("wall_ms".into());
    }
    let mut table = ResultTable::new(header);

    for p in selected {
        let probabilities = ProbabilityTable::new(&file.scenario, &p.povm)?;
        for u in &parsed {
            let start = Instant::now();
            let mode = match strategy {
                Some(text) => StrategyMode::Fixed(parse_strategy(text, p.povm.len(), file.scenario.len())?),
                None => StrategyMode::Auto,
            };
            let result = average_utility_table(&probabilities, u, mode, opts.cap)?;
            let mut row = vec![
                file.id.clone(),
                p.name.clone(),
                u.name().to_string(),
                result.strategy.to_string(),
                result.mode.to_string(),
                format_number(p_inconclusive(&probabilities, &result.strategy)),
            ];
            row.extend(score_cells(&result.score, width));
            if opts.timing {
                row.push(elapsed_ms(start));
            }
            table.push(row);
        }
    }
    table.sort_by_leading(3);
    Ok(CommandOutput::ok(table))
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizeArgs {
    pub utility: String,
    pub restarts: usize,
    pub iterations: usize,
    pub outcomes: Option<usize>,
    pub rank: Option<usize>,
    pub initial_step: f64,
    pub decay: f64,
    /// Where to write the best POVM, as a scenario file.
    pub povm_out: Option<PathBuf>,
}

impl Default for OptimizeArgs {
    fn default() -> Self {
        let cfg = OptimizerConfig::default();
        OptimizeArgs {
            utility: "p-success".into(),
            restarts: cfg.restarts,
            iterations: cfg.iterations,
            outcomes: None,
            rank: None,
            initial_step: cfg.initial_step,
            decay: cfg.decay,
            povm_out: None,
        }
    }
}

/// Name given to the optimized POVM in the output file.
pub const OPTIMIZED_POVM: &str = "optimized";

pub fn cmd_optimize(opts: &GlobalOptions, scenario: &str, args: &OptimizeArgs) -> CliResult<CommandOutput> {
    let file = opts.load(scenario)?;
    let u = parse_utility(&args.utility)?;
    let cfg = OptimizerConfig {
        restarts: args.restarts,
        iterations: args.iterations,
        initial_step: args.initial_step,
        decay: args.decay,
        seed: opts.seed_for(Some(&file)),
        outcomes: args.outcomes,
        element_rank: args.rank,
        strategy_cap: opts.cap,
    };
    let start = Instant::now();
    let best = optimize_povm(&file.scenario, &u, &cfg)?;
    let wall = elapsed_ms(start);

    let mut header: Vec<String> = ["scenario", "povm", "utility", "strategy", "restart", "p_inconclusive"]
        .into_iter()
        .map(String::from)
        .collect();
    header.extend(score_columns(u.arity()));
    if opts.timing {
        header.push("wall_ms".into());
    }
    let mut table = ResultTable::new(header);
    let probabilities = ProbabilityTable::new(&file.scenario, &best.povm)?;
    let mut row = vec![
        file.id.clone(),
        OPTIMIZED_POVM.to_string(),
        u.name().to_string(),
        best.strategy.to_string(),
        best.restart.to_string(),
        format_number(p_inconclusive(&probabilities, &best.strategy)),
    ];
    row.extend(score_cells(&best.score, u.arity()));
    if opts.timing {
        row.push(wall);
    }
    table.push(row);

    let mut out = CommandOutput::ok(table);
    out.notes.push(format!(
        "best of {} restarts: {} (restart {})",
        cfg.restarts, best.score, best.restart
    ));
    if let Some(path) = &args.povm_out {
        let named = NamedPovm {
            name: OPTIMIZED_POVM.into(),
            povm: best.povm.clone(),
        };
        let text = ScenarioFile::from_parts(&file.labels, &file.scenario, &[named], Some(cfg.seed)).render();
        std::fs::write(path, text).map_err(|e| CliError::io(path, e))?;
        out.notes.push(format!("wrote POVM '{OPTIMIZED_POVM}' to {}", path.display()));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonotoneArgs {
    pub utilities: Vec<String>,
    pub trials: usize,
    pub dims: (usize, usize),
    /// Per-violation CSV.
    pub report: Option<PathBuf>,
}

/// Seeded monotonicity fuzzing; the status is `Violation` iff any utility
/// increased under post-processing.
pub fn cmd_monotone(opts: &GlobalOptions, args: &MonotoneArgs) -> CliResult<CommandOutput> {
    if args.utilities.is_empty() {
        return Err(CliError::Usage("monotone needs at least one --utility".into()));
    }
    let seed = opts.seed_for(None);
    let dims = args.dims.0..=args.dims.1;
    let mut header = vec!["utility", "trials", "violations", "max_violation"];
    if opts.timing {
        header.push("wall_ms");
    }
    let mut table = ResultTable::new(header);
    let mut report = ResultTable::new([
        "utility", "trial", "seed", "dim", "messages", "outcomes", "mapped_outcomes", "before", "after", "excess",
    ]);
    let mut notes = Vec::new();
    let mut status = Status::Success;

    for name in &args.utilities {
        let u = parse_utility(name)?;
        let start = Instant::now();
        let r = monotonicity_fuzz(&u, dims.clone(), args.trials, seed)?;
        let mut row = vec![
            u.name().to_string(),
            r.trials.to_string(),
            r.violations.len().to_string(),
            format_number(r.max_violation),
        ];
        if opts.timing {
            row.push(elapsed_ms(start));
        }
        table.push(row);
        if !r.violations.is_empty() {
            status = Status::Violation;
            notes.push(format!(
                "{}: {} of {} trials increased under post-processing (max {})",
                u.name(),
                r.violations.len(),
                r.trials,
                format_number(r.max_violation)
            ));
        }
        for v in &r.violations {
            report.push(vec![
                u.name().to_string(),
                v.trial.to_string(),
                v.seed.to_string(),
                v.scenario.dim().to_string(),
                v.scenario.len().to_string(),
                v.povm.len().to_string(),
                v.map.outputs().to_string(),
                joined(&v.before),
                joined(&v.after),
                format_number(v.excess),
            ]);
        }
    }
    table.sort_by_leading(1);
    report.sort_by_leading(1);
    if let Some(path) = &args.report {
        let f = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
        report.write_csv(f)?;
        notes.push(format!("wrote {} violation rows to {}", report.len(), path.display()));
    }
    Ok(CommandOutput { table, status, notes })
}

#[derive(Clone, Debug, PartialEq)]
pub enum RepeatMode {
    /// Report the guessing condition for 1..=copies.
    Condition,
    /// Posterior trajectory for a record such as `2,2`.
    Record(String),
    /// Look for a record that moves the decision away from the guess.
    Search { samples: usize },
}

fn condition_table(file: &LoadedScenario, copies: usize) -> CliResult<(ResultTable, Vec<String>)> {
    let mut table = ResultTable::new(["copies", "condition", "guess", "rival"]);
    let mut notes = Vec::new();
    for d in 1..=copies {
        let r = RepeatedScenario::new(file.scenario.clone(), d)?;
        let (cond, guess, rival, note) = match repeated_condition(&r) {
            RepeatedCondition::Holds { message } => (
                "holds",
                file.label(message).to_string(),
                String::new(),
                format!("d={d}: no measurement beats guessing {}", file.label(message)),
            ),
            RepeatedCondition::Fails { message, rival } => (
                "fails",
                file.label(message).to_string(),
                file.label(rival).to_string(),
                format!(
                    "d={d}: guessing {} is not always optimal; {} can win after measuring",
                    file.label(message),
                    file.label(rival)
                ),
            ),
            RepeatedCondition::NoCandidate => (
                "no-candidate",
                String::new(),
                String::new(),
                format!("d={d}: no message dominates, measuring is informative"),
            ),
        };
        table.push(vec![d.to_string(), cond.into(), guess, rival]);
        notes.push(note);
    }
    Ok((table, notes))
}

fn trajectory_table(
    file: &LoadedScenario,
    r: &RepeatedScenario,
    e: &Povm,
    record: &[usize],
) -> CliResult<ResultTable> {
    let mut header = vec!["step".to_string(), "outcome".to_string()];
    header.extend(file.labels.iter().map(|l| format!("p({l})")));
    let mut table = ResultTable::new(header);
    for (step, p) in simulate_repeated(r, e, record)?.iter().enumerate() {
        let mut row = vec![
            step.to_string(),
            if step == 0 { String::new() } else { (record[step - 1] + 1).to_string() },
        ];
        row.extend(p.probabilities().iter().map(|&x| format_number(x)));
        table.push(row);
    }
    Ok(table)
}

fn render_record(record: &[usize]) -> String {
    record.iter().map(|y| (y + 1).to_string()).collect::<Vec<_>>().join(",")
}

pub fn cmd_repeat(
    opts: &GlobalOptions,
    scenario: &str,
    copies: usize,
    povm: Option<&str>,
    mode: &RepeatMode,
) -> CliResult<CommandOutput> {
    let file = opts.load(scenario)?;
    let r = RepeatedScenario::new(file.scenario.clone(), copies)?;
    let pick = |name: Option<&str>| -> CliResult<&NamedPovm> {
        match name {
            Some(n) => {
                file.povm(n)?;
                Ok(file.povms.iter().find(|p| p.name == n).expect("checked above"))
            }
            None => file
                .povms
                .first()
                .ok_or_else(|| CliError::Validation(format!("{}: the file defines no POVMs", file.id))),
        }
    };

    match mode {
        RepeatMode::Condition => {
            let (table, notes) = condition_table(&file, copies)?;
            Ok(CommandOutput {
                table,
                status: Status::Success,
                notes,
            })
        }
        RepeatMode::Record(text) => {
            let record = parse_record(text)?;
            let p = pick(povm)?;
            let table = trajectory_table(&file, &r, &p.povm, &record)?;
            let last = simulate_repeated(&r, &p.povm, &record)?.pop().expect("prior is present");
            let mut out = CommandOutput::ok(table);
            if last.is_undefined() {
                out.notes.push(format!("record {} has probability zero", render_record(&record)));
            } else {
                let k = last.argmax();
                out.notes.push(format!(
                    "after record {} the posterior favours {} (p = {})",
                    render_record(&record),
                    file.label(k),
                    format_number(last.get(k))
                ));
            }
            Ok(out)
        }
        RepeatMode::Search { samples } => {
            let candidates: Vec<&NamedPovm> = match povm {
                Some(n) => vec![pick(Some(n))?],
                None => file.povms.iter().collect(),
            };
            let povms: Vec<Povm> = candidates.iter().map(|p| p.povm.clone()).collect();
            let check = verify_repeated_condition(&r, &povms, *samples, opts.seed_for(Some(&file)))?;
            let status = if check.consistent() { Status::Success } else { Status::Violation };
            match &check.witness {
                Some(w) => {
                    let source = candidates
                        .iter()
                        .find(|p| p.povm == w.povm)
                        .map(|p| format!("POVM '{}'", p.name))
                        .unwrap_or_else(|| "a generated POVM".into());
                    let table = trajectory_table(&file, &r, &w.povm, &w.record)?;
                    let notes = vec![format!(
                        "witness: record {} under {source} favours {} (p = {})",
                        render_record(&w.record),
                        file.label(w.decided),
                        format_number(w.posterior.get(w.decided))
                    )];
                    Ok(CommandOutput { table, status, notes })
                }
                None => {
                    let (table, mut notes) = condition_table(&file, copies)?;
                    notes.push(format!(
                        "no witness among {} POVMs and {} records",
                        check.povms_checked, check.records_checked
                    ));
                    Ok(CommandOutput { table, status, notes })
                }
            }
        }
    }
}

/// Identifiers accepted by [`cmd_reproduce`].
pub const REPRODUCIBLE: &[&str] = &["example1", "fig1"];

struct Checks {
    example: &'static str,
    table: ResultTable,
    failed: usize,
}

impl Checks {
    fn new(example: &'static str) -> Self {
        Checks {
            example,
            table: ResultTable::new(["example", "check", "expected", "observed", "tolerance", "status"]),
            failed: 0,
        }
    }

    fn record(&mut self, check: &str, expected: String, observed: String, tolerance: String, pass: bool) {
        if !pass {
            self.failed += 1;
        }
        self.table.push(vec![
            self.example.to_string(),
            check.to_string(),
            expected,
            observed,
            tolerance,
            if pass { "pass" } else { "fail" }.to_string(),
        ]);
    }

    fn number(&mut self, check: &str, expected: f64, observed: f64, tol: f64) {
        let pass = (observed - expected).abs() <= tol;
        self.record(check, format_number(expected), format_number(observed), format_number(tol), pass);
    }

    fn text(&mut self, check: &str, expected: &str, observed: &str) {
        self.record(check, expected.into(), observed.into(), String::new(), expected == observed);
    }
}

fn reproduce_example1(opts: &GlobalOptions, checks: &mut Checks) -> CliResult<()> {
    let file = parse_scenario_str(bundled("example1").expect("bundled"), "example1", None)?;
    let s = &file.scenario;
    for (nu, d) in max_confidence_directions(s)?.iter().enumerate() {
        let check = format!("maximal confidence of {}", file.label(nu));
        checks.number(&check, 1.0, d.confidence, 1e-9);
    }
    let u = max_confidence_utility();
    for (name, inconclusive, tol) in [("A-limit", 0.75, 1e-3), ("B", 0.5, 1e-12)] {
        let table = ProbabilityTable::new(s, file.povm(name)?)?;
        let best = average_utility_table(&table, &u, StrategyMode::Auto, opts.cap)?;
        checks.number(&format!("total confidence of POVM {name}"), 2.0, best.score.first(), 1e-9);
        checks.number(
            &format!("inconclusive probability of POVM {name}"),
            inconclusive,
            p_inconclusive(&table, &best.strategy),
            tol,
        );
    }
    Ok(())
}

fn reproduce_fig1(opts: &GlobalOptions, checks: &mut Checks) -> CliResult<()> {
    let file = parse_scenario_str(bundled("fig1").expect("bundled"), "fig1", None)?;
    let s = &file.scenario;
    let z = file.povm("projective")?;
    let guess = guess_condition(s).map(|m| file.label(m).to_string()).unwrap_or_else(|| "none".into());
    checks.text("guess without measuring (d=1)", "rho1", &guess);

    let r2 = RepeatedScenario::new(s.clone(), 2)?;
    let condition = match repeated_condition(&r2) {
        RepeatedCondition::Holds { .. } => "holds",
        RepeatedCondition::Fails { .. } => "fails",
        RepeatedCondition::NoCandidate => "no-candidate",
    };
    checks.text("guessing condition at d=2", "fails", condition);

    let last = simulate_repeated(&r2, z, &[1, 1])?.pop().expect("prior is present");
    checks.text("decision after record 2,2", "rho2", file.label(last.argmax()));
    checks.number("p(rho2) after record 2,2", 0.6136, last.get(1), 1e-3);

    let table = ProbabilityTable::new(s, z)?;
    let best = average_utility_table(&table, &min_error_utility(), StrategyMode::Auto, opts.cap)?;
    checks.number("success probability of the projective POVM", 0.85, best.score.first(), 1e-9);

    let search = verify_repeated_condition(&r2, std::slice::from_ref(z), 0, opts.seed_for(Some(&file)))?;
    let witness = search.witness.as_ref().map(|w| render_record(&w.record)).unwrap_or_else(|| "none".into());
    checks.text("witness record at d=2", "2,2", &witness);
    Ok(())
}

/// Reruns a bundled worked example and reports one pass/fail row per number.
pub fn cmd_reproduce(opts: &GlobalOptions, id: &str) -> CliResult<CommandOutput> {
    let mut checks = match id {
        "example1" => {
            let mut c = Checks::new("example1");
            reproduce_example1(opts, &mut c)?;
            c
        }
        "fig1" => {
            let mut c = Checks::new("fig1");
            reproduce_fig1(opts, &mut c)?;
            c
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown example '{other}' (known: {})",
                REPRODUCIBLE.join(", ")
            )))
        }
    };
    let status = if checks.failed == 0 { Status::Success } else { Status::Violation };
    let total = checks.table.len();
    let notes = vec![format!("{id}: {} of {total} checks passed", total - checks.failed)];
    Ok(CommandOutput {
        table: std::mem::replace(&mut checks.table, ResultTable::new(Vec::<String>::new())),
        status,
        notes,
    })
}

/// Every decision strategy for one POVM in enumeration order, with its
/// score and whether it is optimal.
pub fn cmd_strategies(
    opts: &GlobalOptions,
    scenario: &str,
    povm: &str,
    utility: &str,
    allow_inconclusive: bool,
) -> CliResult<CommandOutput> {
    let file = opts.load(scenario)?;
    let e = file.povm(povm)?;
    let u = parse_utility(utility)?;
    let table = ProbabilityTable::new(&file.scenario, e)?;
    let band = optimality_band(&table, &u, opts.cap)?;
    let mut header = vec!["strategy".to_string(), "optimal".to_string()];
    header.extend(score_columns(u.arity()));
    let mut out = ResultTable::new(header);
    for g in enumerate_strategies(table.outcomes(), table.messages(), allow_inconclusive, opts.cap)? {
        let score = score_strategy(&table, &u, &g);
        let mut row = vec![g.to_string(), if band.admits(&score) { "yes" } else { "no" }.to_string()];
        row.extend(score_cells(&score, u.arity()));
        out.push(row);
    }
    Ok(CommandOutput::ok(out))
}
