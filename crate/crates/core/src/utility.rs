//! Utility functions `U(ε, y, Γ, ν)`, their vector-valued scores and the
//! averaged utility `U(ε) = max_Γ Σ_{y,ν} p(N_ν, ε_y) U(ε, y, Γ, ν)`.
//!
//! Scores are compared in dictionary order with a per-level equality band of
//! [`LEX_TOLERANCE`]. A strategy maximum is taken in stages: first keep every
//! strategy whose level-1 value is within the band of the best level-1 value,
//! then maximize level 2 over those, and so on.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::decision::{
    enumerate_strategies, Decision, DecisionStrategy, DecisionTable, DEFAULT_ASSIGNMENT_CAP,
    DEFAULT_STRATEGY_CAP,
};
use crate::error::{Error, Result};
use crate::scenario::{Povm, ProbabilityTable, Scenario};

/// Per-level equality band for dictionary-order comparisons.
pub const LEX_TOLERANCE: f64 = 1e-9;

/// Per-outcome selection band used by the per-decision strategy construction.
const OUTCOME_TOLERANCE: f64 = 1e-12;

/// A real vector ordered lexicographically.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UtilityScore(Vec<f64>);

impl UtilityScore {
    pub fn new(components: Vec<f64>) -> Self {
        UtilityScore(components)
    }

    pub fn zeros(arity: usize) -> Self {
        UtilityScore(vec![0.0; arity])
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn first(&self) -> f64 {
        self.0[0]
    }

    pub fn get(&self, level: usize) -> f64 {
        self.0[level]
    }

    pub fn lex_cmp(&self, other: &UtilityScore, tol: f64) -> Ordering {
        lex_compare(&self.0, &other.0, tol)
    }
}

impl fmt::Display for UtilityScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Dictionary order; components closer than `tol` count as equal.
pub fn lex_compare(a: &[f64], b: &[f64], tol: f64) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        if (x - y).abs() > tol {
            return x.total_cmp(y);
        }
    }
    a.len().cmp(&b.len())
}

/// Whether a utility reads only `Γ(y)` or the whole strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StrategyDependence {
    PerDecision,
    FullStrategy,
}

/// Everything a utility may read for one measurement and one strategy.
pub struct UtilityContext<'a> {
    table: &'a ProbabilityTable,
    strategy: &'a DecisionStrategy,
    decisions: DecisionTable,
    prior_entropy: f64,
}

impl<'a> UtilityContext<'a> {
    pub fn new(table: &'a ProbabilityTable, strategy: &'a DecisionStrategy) -> Self {
        UtilityContext {
            table,
            strategy,
            decisions: DecisionTable::new(table, strategy),
            prior_entropy: table.prior_entropy(),
        }
    }

    pub fn table(&self) -> &ProbabilityTable {
        self.table
    }

    pub fn strategy(&self) -> &DecisionStrategy {
        self.strategy
    }

    pub fn decision(&self, outcome: usize) -> Decision {
        self.strategy.get(outcome)
    }

    pub fn decisions(&self) -> &DecisionTable {
        &self.decisions
    }

    pub fn prior_entropy(&self) -> f64 {
        self.prior_entropy
    }
}

type Evaluator = dyn Fn(&UtilityContext<'_>, usize, usize, &mut [f64]) + Send + Sync;
type StrategySolver = dyn Fn(&ProbabilityTable) -> Result<DecisionStrategy> + Send + Sync;

/// A (possibly vector-valued) utility `U(ε, y, Γ, ν)`.
///
/// The evaluator writes `arity` components for outcome `y` and message `ν`.
/// An optional strategy solver returns a strategy attaining the maximum over
/// `Γ`; without one, full-strategy utilities fall back to enumeration.
#[derive(Clone)]
pub struct UtilityFunction {
    name: String,
    arity: usize,
    dependence: StrategyDependence,
    evaluator: Arc<Evaluator>,
    solver: Option<Arc<StrategySolver>>,
}

impl fmt::Debug for UtilityFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UtilityFunction")
            .field("name", &self.name)
            .field("arity", &self.arity)
            .field("dependence", &self.dependence)
            .field("solver", &self.solver.is_some())
            .finish()
    }
}

impl UtilityFunction {
    pub fn new(
        name: impl Into<String>,
        arity: usize,
        dependence: StrategyDependence,
        evaluator: impl Fn(&UtilityContext<'_>, usize, usize, &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        UtilityFunction {
            name: name.into(),
            arity,
            dependence,
            evaluator: Arc::new(evaluator),
            solver: None,
        }
    }

    /// Scalar convenience constructor.
    pub fn scalar(
        name: impl Into<String>,
        dependence: StrategyDependence,
        f: impl Fn(&UtilityContext<'_>, usize, usize) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::new(name, 1, dependence, move |ctx, y, nu, out| {
            out[0] = f(ctx, y, nu)
        })
    }

    pub fn with_strategy_solver(
        mut self,
        solver: impl Fn(&ProbabilityTable) -> Result<DecisionStrategy> + Send + Sync + 'static,
    ) -> Self {
        self.solver = Some(Arc::new(solver));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn dependence(&self) -> StrategyDependence {
        self.dependence
    }

    pub fn has_strategy_solver(&self) -> bool {
        self.solver.is_some()
    }

    pub fn evaluate(&self, ctx: &UtilityContext<'_>, outcome: usize, message: usize) -> UtilityScore {
        let mut out = vec![0.0; self.arity];
        (self.evaluator)(ctx, outcome, message, &mut out);
        UtilityScore(out)
    }

    /// Same utility with `offset` added to every component-1 value.
    pub fn shifted(&self, offset: f64) -> UtilityFunction {
        let inner = self.evaluator.clone();
        UtilityFunction {
            name: format!("{}+{offset}", self.name),
            arity: self.arity,
            dependence: self.dependence,
            evaluator: Arc::new(move |ctx, y, nu, out| {
                inner(ctx, y, nu, out);
                out[0] += offset;
            }),
            solver: self.solver.clone(),
        }
    }
}

fn is_correct(ctx: &UtilityContext<'_>, y: usize, nu: usize) -> bool {
    ctx.decision(y) == Decision::Message(nu)
}

/// `δ_{Γ(y),ν}`: averaged, the probability of success.
pub fn min_error_utility() -> UtilityFunction {
    UtilityFunction::scalar("p-success", StrategyDependence::PerDecision, |ctx, y, nu| {
        if is_correct(ctx, y, nu) {
            1.0
        } else {
            0.0
        }
    })
    .with_strategy_solver(|t| Ok(t.optimal_strategy_min_error()))
}

/// `δ_{Γ(y),ν} / p(D_{Γ(y)})`: averaged, the total confidence.
pub fn max_confidence_utility() -> UtilityFunction {
    UtilityFunction::scalar(
        "total-confidence",
        StrategyDependence::FullStrategy,
        |ctx, y, nu| {
            if !is_correct(ctx, y, nu) {
                return 0.0;
            }
            let p = ctx.decisions().probability(ctx.decision(y));
            if p < crate::scenario::ZERO_PROBABILITY {
                0.0
            } else {
                1.0 / p
            }
        },
    )
    .with_strategy_solver(|t| t.optimal_strategy_max_confidence(DEFAULT_ASSIGNMENT_CAP))
}

fn log_posterior(ctx: &UtilityContext<'_>, y: usize, nu: usize) -> f64 {
    let p = ctx.table().posterior_of(y, nu);
    if p > 0.0 {
        p.log2()
    } else {
        0.0
    }
}

/// `log₂ p(N_ν | ε_y)`: averaged, `−H(N|ε)`.
pub fn log_posterior_utility() -> UtilityFunction {
    UtilityFunction::scalar(
        "neg-conditional-entropy",
        StrategyDependence::PerDecision,
        log_posterior,
    )
}

/// `log₂ p(N_ν | ε_y) + H(N)`: averaged, `I(N:ε)`.
pub fn mutual_information_utility() -> UtilityFunction {
    UtilityFunction::scalar(
        "mutual-information",
        StrategyDependence::PerDecision,
        |ctx, y, nu| log_posterior(ctx, y, nu) + ctx.prior_entropy(),
    )
}

fn decision_log_posterior(ctx: &UtilityContext<'_>, y: usize, nu: usize) -> f64 {
    if !is_correct(ctx, y, nu) {
        return 0.0;
    }
    let p = ctx.decisions().posterior(ctx.decision(y), nu);
    if p > 0.0 {
        p.log2()
    } else {
        0.0
    }
}

/// `δ_{Γ(y),ν} log₂ p(N_ν | D_{Γ(y)})`, the decision-based entropy utility.
pub fn decision_log_posterior_utility() -> UtilityFunction {
    UtilityFunction::scalar(
        "decision-neg-conditional-entropy",
        StrategyDependence::FullStrategy,
        decision_log_posterior,
    )
}

/// [`decision_log_posterior_utility`] shifted by the constant `H(N)`.
pub fn decision_mutual_information_utility() -> UtilityFunction {
    UtilityFunction::scalar(
        "decision-mutual-information",
        StrategyDependence::FullStrategy,
        |ctx, y, nu| decision_log_posterior(ctx, y, nu) + ctx.prior_entropy(),
    )
}

/// `1 − δ_{Γ(y),0}`: averaged, `1 − p(D₀)`.
pub fn conclusive_utility() -> UtilityFunction {
    UtilityFunction::scalar("conclusive", StrategyDependence::PerDecision, |ctx, y, _| {
        if ctx.decision(y) == Decision::Inconclusive {
            0.0
        } else {
            1.0
        }
    })
}

pub fn constant_utility(value: f64) -> UtilityFunction {
    UtilityFunction::scalar("constant", StrategyDependence::PerDecision, move |_, _, _| value)
}

/// Control utility that is anti-monotone by construction: `−1` when `ν` is
/// the maximum-posterior message for outcome `y`, ignoring Bob's strategy.
/// Its averaged value is minus the optimal probability of success.
pub fn anti_success_utility() -> UtilityFunction {
    UtilityFunction::scalar("anti-success", StrategyDependence::PerDecision, |ctx, y, nu| {
        let row = ctx.table().joint_row(y);
        let mut best = 0;
        for (k, &p) in row.iter().enumerate() {
            if p > row[best] {
                best = k;
            }
        }
        if best == nu {
            -1.0
        } else {
            0.0
        }
    })
}

/// Control utility returning the outcome index; breaks the proportional
/// element condition.
pub fn outcome_index_utility() -> UtilityFunction {
    UtilityFunction::scalar("outcome-index", StrategyDependence::PerDecision, |_, y, _| y as f64)
}

/// Concatenates two utilities into one dictionary-ordered score.
pub fn lexicographic(first: &UtilityFunction, second: &UtilityFunction) -> UtilityFunction {
    let (a, b) = (first.clone(), second.clone());
    let split = a.arity;
    let dependence = if a.dependence == StrategyDependence::FullStrategy
        || b.dependence == StrategyDependence::FullStrategy
    {
        StrategyDependence::FullStrategy
    } else {
        StrategyDependence::PerDecision
    };
    UtilityFunction::new(
        format!("{},{}", a.name, b.name),
        a.arity + b.arity,
        dependence,
        move |ctx, y, nu, out| {
            let (head, tail) = out.split_at_mut(split);
            (a.evaluator)(ctx, y, nu, head);
            (b.evaluator)(ctx, y, nu, tail);
        },
    )
}

/// Names accepted by [`parse_utility`].
pub const UTILITY_NAMES: &[&str] = &[
    "p-success",
    "total-confidence",
    "neg-conditional-entropy",
    "mutual-information",
    "decision-neg-conditional-entropy",
    "decision-mutual-information",
    "conclusive",
    "anti-success",
    "outcome-index",
];

pub fn by_name(name: &str) -> Option<UtilityFunction> {
    Some(match name {
        "p-success" | "min-error" => min_error_utility(),
        "total-confidence" | "max-confidence" => max_confidence_utility(),
        "neg-conditional-entropy" | "log-posterior" => log_posterior_utility(),
        "mutual-information" => mutual_information_utility(),
        "decision-neg-conditional-entropy" => decision_log_posterior_utility(),
        "decision-mutual-information" => decision_mutual_information_utility(),
        "conclusive" => conclusive_utility(),
        "anti-success" => anti_success_utility(),
        "outcome-index" => outcome_index_utility(),
        _ => return None,
    })
}

/// Parses `name` or a comma-separated lexicographic chain `a,b,...`.
pub fn parse_utility(text: &str) -> Result<UtilityFunction> {
    let mut parts = text.split(',').map(str::trim);
    let lookup = |n: &str| {
        by_name(n).ok_or_else(|| {
            Error::invalid(
                "utility",
                format!("unknown utility '{n}' (known: {})", UTILITY_NAMES.join(", ")),
            )
        })
    };
    let mut u = lookup(parts.next().unwrap_or(""))?;
    for p in parts {
        u = lexicographic(&u, &lookup(p)?);
    }
    Ok(u)
}

/// Averaged utility of a fixed strategy: `Σ_{y,ν} p(N_ν, ε_y) U(ε, y, Γ, ν)`.
pub fn score_strategy(
    table: &ProbabilityTable,
    u: &UtilityFunction,
    strategy: &DecisionStrategy,
) -> UtilityScore {
    let ctx = UtilityContext::new(table, strategy);
    let mut total = vec![0.0; u.arity];
    let mut buf = vec![0.0; u.arity];
    for y in 0..table.outcomes() {
        for nu in 0..table.messages() {
            let j = table.joint(y, nu);
            if j == 0.0 {
                continue;
            }
            (u.evaluator)(&ctx, y, nu, &mut buf);
            for (t, v) in total.iter_mut().zip(&buf) {
                *t += j * v;
            }
        }
    }
    UtilityScore(total)
}

/// How the maximum over decision strategies is found.
#[derive(Clone, Debug, PartialEq)]
pub enum StrategyMode {
    /// Analytic when possible, enumeration otherwise.
    Auto,
    Enumerate,
    Analytic,
    Fixed(DecisionStrategy),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ModeUsed {
    Enumerate,
    Analytic,
    Fixed,
}

impl fmt::Display for ModeUsed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModeUsed::Enumerate => "enumerate",
            ModeUsed::Analytic => "analytic",
            ModeUsed::Fixed => "fixed",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AveragedUtility {
    pub score: UtilityScore,
    pub strategy: DecisionStrategy,
    pub mode: ModeUsed,
}

pub fn average_utility(
    s: &Scenario,
    e: &Povm,
    u: &UtilityFunction,
    mode: StrategyMode,
) -> Result<AveragedUtility> {
    average_utility_table(&ProbabilityTable::new(s, e)?, u, mode, DEFAULT_STRATEGY_CAP)
}

pub fn average_utility_table(
    table: &ProbabilityTable,
    u: &UtilityFunction,
    mode: StrategyMode,
    cap: u64,
) -> Result<AveragedUtility> {
    match mode {
        StrategyMode::Fixed(g) => {
            g.validate(table.outcomes(), table.messages())?;
            Ok(AveragedUtility {
                score: score_strategy(table, u, &g),
                strategy: g,
                mode: ModeUsed::Fixed,
            })
        }
        StrategyMode::Enumerate => enumerate_best(table, u, cap),
        StrategyMode::Analytic => analytic_best(table, u).unwrap_or_else(|| {
            Err(Error::NotApplicable(format!(
                "utility '{}' depends on the full strategy and has no analytic solver",
                u.name
            )))
        }),
        StrategyMode::Auto => match analytic_best(table, u) {
            Some(r) => r,
            None => enumerate_best(table, u, cap),
        },
    }
}

fn analytic_best(table: &ProbabilityTable, u: &UtilityFunction) -> Option<Result<AveragedUtility>> {
    let strategy = if let Some(solver) = &u.solver {
        match solver(table) {
            Ok(g) => g,
            Err(e) => return Some(Err(e)),
        }
    } else if u.dependence == StrategyDependence::PerDecision {
        per_outcome_strategy(table, u)
    } else {
        return None;
    };
    Some(Ok(AveragedUtility {
        score: score_strategy(table, u, &strategy),
        strategy,
        mode: ModeUsed::Analytic,
    }))
}

/// Best decision for each outcome separately; valid for per-decision utilities.
fn per_outcome_strategy(table: &ProbabilityTable, u: &UtilityFunction) -> DecisionStrategy {
    let m = table.outcomes();
    let n = table.messages();
    let mut candidates: Vec<Decision> = (0..n).map(Decision::Message).collect();
    candidates.push(Decision::Inconclusive);

    let mut strategy = DecisionStrategy::constant(m, Decision::Message(0));
    let mut buf = vec![0.0; u.arity];
    for y in 0..m {
        let scores: Vec<Vec<f64>> = candidates
            .iter()
            .map(|&d| {
                let mut trial = strategy.clone();
                trial.set(y, d);
                let ctx = UtilityContext::new(table, &trial);
                let mut acc = vec![0.0; u.arity];
                for nu in 0..n {
                    let j = table.joint(y, nu);
                    if j == 0.0 {
                        continue;
                    }
                    (u.evaluator)(&ctx, y, nu, &mut buf);
                    for (a, v) in acc.iter_mut().zip(&buf) {
                        *a += j * v;
                    }
                }
                acc
            })
            .collect();
        let pick = staged_argmax(scores.iter().map(Vec::as_slice), u.arity, OUTCOME_TOLERANCE);
        strategy.set(y, candidates[pick]);
    }
    strategy
}

/// Index of the first candidate surviving a staged lexicographic maximum.
fn staged_argmax<'s>(
    candidates: impl Iterator<Item = &'s [f64]> + Clone,
    arity: usize,
    tol: f64,
) -> usize {
    let mut floors: Vec<f64> = Vec::with_capacity(arity);
    let admissible = |s: &[f64], floors: &[f64]| floors.iter().zip(s).all(|(f, v)| *v >= *f);
    for level in 0..arity {
        let best = candidates
            .clone()
            .filter(|s| admissible(s, &floors))
            .map(|s| s[level])
            .fold(f64::NEG_INFINITY, f64::max);
        floors.push(best - tol);
    }
    candidates
        .clone()
        .position(|s| admissible(s, &floors))
        .unwrap_or(0)
}

/// Per-level floors of the staged maximum: a strategy is optimal iff every
/// level of its score reaches the corresponding floor.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimalityBand(Vec<f64>);

impl OptimalityBand {
    pub fn admits(&self, score: &UtilityScore) -> bool {
        self.0.iter().zip(&score.0).all(|(f, v)| *v >= *f)
    }

    pub fn floors(&self) -> &[f64] {
        &self.0
    }
}

/// Staged lexicographic maximum over all strategies, as a band of floors.
pub fn optimality_band(
    table: &ProbabilityTable,
    u: &UtilityFunction,
    cap: u64,
) -> Result<OptimalityBand> {
    let m = table.outcomes();
    let n = table.messages();
    let mut band = OptimalityBand(Vec::with_capacity(u.arity));
    for level in 0..u.arity {
        let mut best = f64::NEG_INFINITY;
        for g in enumerate_strategies(m, n, true, cap)? {
            let s = score_strategy(table, u, &g);
            if band.admits(&s) {
                best = best.max(s.0[level]);
            }
        }
        band.0.push(best - LEX_TOLERANCE);
    }
    Ok(band)
}

fn enumerate_best(
    table: &ProbabilityTable,
    u: &UtilityFunction,
    cap: u64,
) -> Result<AveragedUtility> {
    let band = optimality_band(table, u, cap)?;
    for g in enumerate_strategies(table.outcomes(), table.messages(), true, cap)? {
        let s = score_strategy(table, u, &g);
        if band.admits(&s) {
            return Ok(AveragedUtility {
                score: s,
                strategy: g,
                mode: ModeUsed::Enumerate,
            });
        }
    }
    unreachable!("the staged maximum is attained by some strategy")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::scenario::{conditional_entropy, prior_entropy};

    fn avg(s: &Scenario, e: &Povm, u: &UtilityFunction, mode: StrategyMode) -> AveragedUtility {
        average_utility(s, e, u, mode).unwrap()
    }

    #[test]
    fn min_error_values() {
        let s = fixtures::fig1();
        let t = ProbabilityTable::new(&s, &fixtures::fig1_povm()).unwrap();
        let g = DecisionStrategy::from_indices(&[1, 0]);
        let ctx = UtilityContext::new(&t, &g);
        let u = min_error_utility();
        assert_eq!(u.evaluate(&ctx, 0, 0).first(), 1.0);
        assert_eq!(u.evaluate(&ctx, 0, 1).first(), 0.0);
        assert_eq!(u.evaluate(&ctx, 1, 0).first(), 0.0);
        assert_eq!(u.evaluate(&ctx, 1, 1).first(), 0.0);

        let r = avg(&s, &fixtures::fig1_povm(), &u, StrategyMode::Auto);
        assert!((r.score.first() - 0.85).abs() < 1e-12);
        let e = avg(&s, &fixtures::fig1_povm(), &u, StrategyMode::Enumerate);
        assert!((e.score.first() - 0.85).abs() < 1e-12);
    }

    #[test]
    fn example1_min_error_and_confidence() {
        let s = fixtures::example1();
        let b = fixtures::example1_povm_b();
        // oracle: every one of the 27 strategies
        let t = ProbabilityTable::new(&s, &b).unwrap();
        let brute = enumerate_strategies(3, 2, true, 100)
            .unwrap()
            .map(|g| t.success_probability(&g))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((brute - 0.75).abs() < 1e-12);
        let r = avg(&s, &b, &min_error_utility(), StrategyMode::Enumerate);
        assert!((r.score.first() - 0.75).abs() < 1e-12);
        assert_eq!(r.strategy.get(0), Decision::Message(0));
        assert_eq!(r.strategy.get(1), Decision::Message(1));
        assert_ne!(r.strategy.get(2), Decision::Inconclusive);

        for mode in [StrategyMode::Auto, StrategyMode::Enumerate] {
            let r = avg(&s, &b, &max_confidence_utility(), mode);
            assert!((r.score.first() - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn max_confidence_trivial_measurement() {
        let s = fixtures::fig1();
        let r = avg(
            &s,
            &Povm::identity(2),
            &max_confidence_utility(),
            StrategyMode::Fixed(DecisionStrategy::from_indices(&[1])),
        );
        assert!((r.score.first() - 0.85).abs() < 1e-15);
    }

    #[test]
    fn log_posterior_values() {
        let s = fixtures::fig1();
        let id = Povm::identity(2);
        let r = avg(&s, &id, &log_posterior_utility(), StrategyMode::Auto);
        assert!((r.score.first() + prior_entropy(&s)).abs() < 1e-14);
        let z = fixtures::fig1_povm();
        let r = avg(&s, &z, &log_posterior_utility(), StrategyMode::Auto);
        assert!((r.score.first() + conditional_entropy(&s, &z).unwrap()).abs() < 1e-12);

        let o = fixtures::orthogonal_pair();
        let r = avg(&o, &Povm::computational(2), &log_posterior_utility(), StrategyMode::Auto);
        assert!(r.score.first().abs() < 1e-15);
    }

    #[test]
    fn mutual_information_values() {
        let s = fixtures::fig1();
        let r = avg(&s, &Povm::identity(2), &mutual_information_utility(), StrategyMode::Auto);
        assert!(r.score.first().abs() < 1e-14);
        let o = fixtures::orthogonal_pair();
        let r = avg(&o, &Povm::computational(2), &mutual_information_utility(), StrategyMode::Auto);
        assert!((r.score.first() - 1.0).abs() < 1e-14);

        // strategy-independent: every fixed strategy scores the same
        let z = fixtures::fig1_povm();
        let t = ProbabilityTable::new(&s, &z).unwrap();
        let u = mutual_information_utility();
        let scores: Vec<f64> = enumerate_strategies(2, 2, true, 100)
            .unwrap()
            .map(|g| score_strategy(&t, &u, &g).first())
            .collect();
        assert!(scores.iter().all(|v| (v - scores[0]).abs() < 1e-15));
    }

    #[test]
    fn decision_entropy_values() {
        let s = fixtures::fig1();
        let id = Povm::identity(2);
        let u = decision_log_posterior_utility();
        let r = avg(&s, &id, &u, StrategyMode::Fixed(DecisionStrategy::from_indices(&[1])));
        assert!((r.score.first() - 0.85 * 0.85f64.log2()).abs() < 1e-15);

        let z = fixtures::fig1_povm();
        let r = avg(&s, &z, &u, StrategyMode::Fixed(DecisionStrategy::from_indices(&[0, 0])));
        assert_eq!(r.score.first(), 0.0);
    }

    #[test]
    fn lexicographic_confidence_then_conclusive() {
        let s = fixtures::example1();
        let u = lexicographic(&max_confidence_utility(), &conclusive_utility());
        assert_eq!(u.arity(), 2);
        let b = fixtures::example1_povm_b();
        let r = avg(&s, &b, &u, StrategyMode::Auto);
        assert_eq!(r.mode, ModeUsed::Enumerate);
        assert!((r.score.get(0) - 2.0).abs() < 1e-12);
        assert!((r.score.get(1) - 0.5).abs() < 1e-12);
        // second component is 1 - p(D0) under the chosen strategy
        let t = ProbabilityTable::new(&s, &b).unwrap();
        let p0: f64 = r
            .strategy
            .preimage(Decision::Inconclusive)
            .iter()
            .map(|&y| t.outcome_probability(y))
            .sum();
        assert!((r.score.get(1) - (1.0 - p0)).abs() < 1e-12);
    }

    #[test]
    fn lexicographic_with_zero_keeps_ordering() {
        let s = fixtures::fig1();
        let u = min_error_utility();
        let uz = lexicographic(&u, &constant_utility(0.0));
        let povms = [fixtures::fig1_povm(), Povm::identity(2)];
        for e in &povms {
            let a = avg(&s, e, &u, StrategyMode::Enumerate);
            let b = avg(&s, e, &uz, StrategyMode::Enumerate);
            assert_eq!(a.strategy, b.strategy);
            assert!((a.score.first() - b.score.first()).abs() < 1e-15);
        }
    }

    #[test]
    fn lex_compare_orders_by_first_difference() {
        assert_eq!(lex_compare(&[1.0, 0.0], &[0.5, 9.0], 1e-9), Ordering::Greater);
        assert_eq!(lex_compare(&[1.0, 0.0], &[1.0 + 1e-12, 9.0], 1e-9), Ordering::Less);
        assert_eq!(lex_compare(&[1.0, 2.0], &[1.0, 2.0], 1e-9), Ordering::Equal);
    }

    #[test]
    fn analytic_mode_requires_a_solver() {
        let s = fixtures::fig1();
        let u = decision_log_posterior_utility();
        let err = average_utility(&s, &fixtures::fig1_povm(), &u, StrategyMode::Analytic);
        assert!(matches!(err, Err(Error::NotApplicable(_))));
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let s = fixtures::fig1();
        let t = ProbabilityTable::new(&s, &fixtures::fig1_povm()).unwrap();
        let u = decision_log_posterior_utility();
        let err = average_utility_table(&t, &u, StrategyMode::Auto, 5);
        assert!(matches!(err, Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn parse_names() {
        assert_eq!(parse_utility("p-success").unwrap().name(), "p-success");
        let lex = parse_utility("total-confidence,conclusive").unwrap();
        assert_eq!(lex.arity(), 2);
        assert!(parse_utility("nope").is_err());
    }
}
