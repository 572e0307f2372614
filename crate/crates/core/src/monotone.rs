//! Property checks for utilities: the proportional-element conditions
//! (same utility, same optimal decision, merge inequality) and a seeded
//! fuzzer for monotonicity under stochastic post-processing.

use std::cmp::Ordering;
use std::ops::RangeInclusive;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rayon::prelude::*;

use crate::decision::{enumerate_strategies, DecisionStrategy, DEFAULT_STRATEGY_CAP};
use crate::error::{Error, Result};
use crate::linalg::Hermitian;
use crate::random;
use crate::scenario::{Povm, ProbabilityTable, Scenario, ZERO_PROBABILITY};
use crate::transforms::{post_process, StochasticMap};
use crate::utility::{
    average_utility_table, lex_compare, optimality_band, score_strategy, StrategyMode,
    UtilityContext, UtilityFunction, UtilityScore,
};

/// Normalized Frobenius distance below which two elements count as proportional.
pub const PROPORTIONALITY_TOL: f64 = 1e-9;
/// Equality band for utility values in the condition checks.
pub const CONDITION_TOL: f64 = 1e-9;
/// A post-processed score must exceed the original by more than this to count.
pub const VIOLATION_TOL: f64 = 1e-7;

/// Outcome of a condition check. `Inapplicable` means the precondition did
/// not hold, which is not a failure of the utility.
#[derive(Clone, Debug, PartialEq)]
pub enum ConditionCheck {
    Holds,
    Violated(String),
    Inapplicable(String),
}

impl ConditionCheck {
    pub fn holds(&self) -> bool {
        matches!(self, ConditionCheck::Holds)
    }

    pub fn is_violated(&self) -> bool {
        matches!(self, ConditionCheck::Violated(_))
    }

    pub fn is_inapplicable(&self) -> bool {
        matches!(self, ConditionCheck::Inapplicable(_))
    }
}

/// Nonzero and equal after Frobenius normalization.
pub fn proportional(a: &Hermitian, b: &Hermitian) -> bool {
    let (na, nb) = (a.frobenius_norm(), b.frobenius_norm());
    if na <= ZERO_PROBABILITY || nb <= ZERO_PROBABILITY {
        return false;
    }
    a.scale(1.0 / na).distance(&b.scale(1.0 / nb)) < PROPORTIONALITY_TOL
}

fn check_pair(e: &Povm, i: usize, j: usize) -> Result<()> {
    for k in [i, j] {
        if k >= e.len() {
            return Err(Error::IndexOutOfRange {
                what: "outcome",
                index: k,
                size: e.len(),
            });
        }
    }
    Ok(())
}

fn proportional_pair(e: &Povm, i: usize, j: usize) -> Option<ConditionCheck> {
    if i == j {
        return Some(ConditionCheck::Inapplicable("outcomes must differ".into()));
    }
    if !proportional(e.element(i), e.element(j)) {
        return Some(ConditionCheck::Inapplicable(format!(
            "elements {i} and {j} are not nonzero and proportional"
        )));
    }
    None
}

fn scores_equal(a: &UtilityScore, b: &UtilityScore) -> bool {
    a.components()
        .iter()
        .zip(b.components())
        .all(|(x, y)| (x - y).abs() <= CONDITION_TOL)
}

/// Proportional outcomes with the same decision receive the same utility.
pub fn check_c1(
    u: &UtilityFunction,
    s: &Scenario,
    e: &Povm,
    g: &DecisionStrategy,
    i: usize,
    j: usize,
) -> Result<ConditionCheck> {
    check_pair(e, i, j)?;
    let table = ProbabilityTable::new(s, e)?;
    g.validate(table.outcomes(), table.messages())?;
    if let Some(skip) = proportional_pair(e, i, j) {
        return Ok(skip);
    }
    if g.get(i) != g.get(j) {
        return Ok(ConditionCheck::Inapplicable(format!(
            "strategy assigns different decisions to outcomes {i} and {j}"
        )));
    }
    let ctx = UtilityContext::new(&table, g);
    for nu in 0..table.messages() {
        let (a, b) = (u.evaluate(&ctx, i, nu), u.evaluate(&ctx, j, nu));
        if !scores_equal(&a, &b) {
            return Ok(ConditionCheck::Violated(format!(
                "message {nu}: outcome {i} scores {a}, outcome {j} scores {b}"
            )));
        }
    }
    Ok(ConditionCheck::Holds)
}

/// Some optimal strategy assigns proportional outcomes the same decision.
pub fn check_c2(
    u: &UtilityFunction,
    s: &Scenario,
    e: &Povm,
    i: usize,
    j: usize,
    cap: u64,
) -> Result<ConditionCheck> {
    check_pair(e, i, j)?;
    if let Some(skip) = proportional_pair(e, i, j) {
        return Ok(skip);
    }
    let table = ProbabilityTable::new(s, e)?;
    let band = optimality_band(&table, u, cap)?;
    for g in enumerate_strategies(table.outcomes(), table.messages(), true, cap)? {
        if g.get(i) == g.get(j) && band.admits(&score_strategy(&table, u, &g)) {
            return Ok(ConditionCheck::Holds);
        }
    }
    Ok(ConditionCheck::Violated(format!(
        "every optimal strategy separates outcomes {i} and {j}"
    )))
}

/// The POVM with outcomes `i` and `j` merged into position `min(i, j)`,
/// the induced strategy, and where each original outcome ends up.
pub fn merge_outcomes(
    e: &Povm,
    g: &DecisionStrategy,
    i: usize,
    j: usize,
) -> Result<(Povm, DecisionStrategy, Vec<usize>)> {
    check_pair(e, i, j)?;
    let (lo, hi) = (i.min(j), i.max(j));
    let target: Vec<usize> = (0..e.len())
        .map(|k| match k.cmp(&hi) {
            Ordering::Less => k,
            Ordering::Equal => lo,
            Ordering::Greater => k - 1,
        })
        .collect();
    let mut elements: Vec<Hermitian> = Vec::with_capacity(e.len() - 1);
    let mut decisions = Vec::with_capacity(e.len() - 1);
    for k in 0..e.len() {
        if k == hi {
            continue;
        }
        if k == lo {
            elements.push(e.element(lo) + e.element(hi));
        } else {
            elements.push(e.element(k).clone());
        }
        decisions.push(g.get(k));
    }
    Ok((Povm::new(elements)?, DecisionStrategy::new(decisions), target))
}

/// Merging two outcomes with the same decision gives at most the
/// likelihood-weighted average utility, with equality for proportional
/// elements, and leaves every other outcome's utility unchanged.
pub fn check_c3(
    u: &UtilityFunction,
    s: &Scenario,
    e: &Povm,
    g: &DecisionStrategy,
    i: usize,
    j: usize,
) -> Result<ConditionCheck> {
    check_pair(e, i, j)?;
    let table = ProbabilityTable::new(s, e)?;
    g.validate(table.outcomes(), table.messages())?;
    if i == j {
        return Ok(ConditionCheck::Inapplicable("outcomes must differ".into()));
    }
    if g.get(i) != g.get(j) {
        return Ok(ConditionCheck::Inapplicable(format!(
            "strategy assigns different decisions to outcomes {i} and {j}"
        )));
    }
    let equality = proportional(e.element(i), e.element(j));
    let (merged, g_merged, target) = merge_outcomes(e, g, i, j)?;
    let merged_table = ProbabilityTable::new(s, &merged)?;
    let ctx = UtilityContext::new(&table, g);
    let merged_ctx = UtilityContext::new(&merged_table, &g_merged);
    let into = target[i];

    for nu in 0..table.messages() {
        let (pi, pj) = (table.likelihood(i, nu), table.likelihood(j, nu));
        let denom = pi + pj;
        if denom >= ZERO_PROBABILITY {
            let ui = u.evaluate(&ctx, i, nu);
            let uj = u.evaluate(&ctx, j, nu);
            let lhs = u.evaluate(&merged_ctx, into, nu);
            for c in 0..u.arity() {
                let rhs = (pi * ui.get(c) + pj * uj.get(c)) / denom;
                let l = lhs.get(c);
                if l > rhs + CONDITION_TOL {
                    return Ok(ConditionCheck::Violated(format!(
                        "message {nu}, component {c}: merged utility {l} exceeds average {rhs}"
                    )));
                }
                if equality && (l - rhs).abs() > CONDITION_TOL {
                    return Ok(ConditionCheck::Violated(format!(
                        "message {nu}, component {c}: proportional merge gives {l}, expected {rhs}"
                    )));
                }
            }
        }
        for k in (0..e.len()).filter(|&k| k != i && k != j) {
            let before = u.evaluate(&ctx, k, nu);
            let after = u.evaluate(&merged_ctx, target[k], nu);
            if !scores_equal(&before, &after) {
                return Ok(ConditionCheck::Violated(format!(
                    "message {nu}: untouched outcome {k} changed from {before} to {after}"
                )));
            }
        }
    }
    Ok(ConditionCheck::Holds)
}

/// One trial where post-processing increased the averaged utility.
#[derive(Clone, Debug)]
pub struct Violation {
    pub trial: usize,
    /// Seed that regenerates this trial's instance via [`fuzz_instance`].
    pub seed: u64,
    pub scenario: Scenario,
    pub povm: Povm,
    pub map: StochasticMap,
    pub before: UtilityScore,
    pub after: UtilityScore,
    /// Increase at the first component that differs beyond tolerance.
    pub excess: f64,
}

#[derive(Clone, Debug)]
pub struct MonotoneReport {
    pub trials: usize,
    pub violations: Vec<Violation>,
    pub max_violation: f64,
}

/// A random fuzz instance: scenario, source POVM and post-processing map.
#[derive(Clone, Debug)]
pub struct FuzzInstance {
    pub scenario: Scenario,
    pub povm: Povm,
    pub map: StochasticMap,
}

/// Regenerates the instance drawn for a trial seed.
pub fn fuzz_instance(dims: RangeInclusive<usize>, seed: u64) -> FuzzInstance {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let dim = rng.random_range(dims);
    let messages = rng.random_range(2..=3);
    let outcomes = rng.random_range(1..=5);
    let mapped = rng.random_range(1..=5);
    FuzzInstance {
        scenario: random::random_scenario(dim, messages, &mut rng),
        povm: random::random_povm(dim, outcomes, &mut rng),
        map: random::random_stochastic_map(mapped, outcomes, &mut rng),
    }
}

/// Samples `trials` instances and compares the averaged utility before and
/// after post-processing. Trials run in parallel; results are collected in
/// trial order, so the report depends only on `seed`.
pub fn monotonicity_fuzz(
    u: &UtilityFunction,
    dims: RangeInclusive<usize>,
    trials: usize,
    seed: u64,
) -> Result<MonotoneReport> {
    if trials == 0 {
        return Err(Error::invalid("trials", "must be at least 1"));
    }
    if dims.is_empty() || *dims.start() == 0 {
        return Err(Error::invalid("dims", "need a non-empty range of dimensions >= 1"));
    }
    let outcomes: Vec<Option<Violation>> = (0..trials)
        .into_par_iter()
        .map(|trial| run_trial(u, dims.clone(), trial, seed))
        .collect::<Result<_>>()?;
    let violations: Vec<Violation> = outcomes.into_iter().flatten().collect();
    let max_violation = violations.iter().map(|v| v.excess).fold(0.0, f64::max);
    Ok(MonotoneReport {
        trials,
        violations,
        max_violation,
    })
}

fn run_trial(
    u: &UtilityFunction,
    dims: RangeInclusive<usize>,
    trial: usize,
    seed: u64,
) -> Result<Option<Violation>> {
    let trial_seed = random::sub_seed(seed, trial as u64);
    let inst = fuzz_instance(dims, trial_seed);
    let after_povm = post_process(&inst.povm, &inst.map)?;
    let evaluate = |e: &Povm| -> Result<UtilityScore> {
        let table = ProbabilityTable::new(&inst.scenario, e)?;
        Ok(average_utility_table(&table, u, StrategyMode::Auto, DEFAULT_STRATEGY_CAP)?.score)
    };
    let before = evaluate(&inst.povm)?;
    let after = evaluate(&after_povm)?;
    if lex_compare(after.components(), before.components(), VIOLATION_TOL) != Ordering::Greater {
        return Ok(None);
    }
    let excess = after
        .components()
        .iter()
        .zip(before.components())
        .map(|(a, b)| a - b)
        .find(|d| d.abs() > VIOLATION_TOL)
        .unwrap_or(0.0);
    Ok(Some(Violation {
        trial,
        seed: trial_seed,
        scenario: inst.scenario,
        povm: inst.povm,
        map: inst.map,
        before,
        after,
        excess,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decision::Decision;
    use crate::fixtures;
    use crate::utility::{
        log_posterior_utility, max_confidence_utility, min_error_utility, outcome_index_utility,
        StrategyDependence,
    };

    fn duplicated_fig1() -> (Scenario, Povm) {
        let z = fixtures::fig1_povm();
        let el = z.elements();
        let e = Povm::new(vec![el[0].scale(0.4), el[1].clone(), el[0].scale(0.6)]).unwrap();
        (fixtures::fig1(), e)
    }

    #[test]
    fn proportionality_detection() {
        let a = Hermitian::diagonal(&[1.0, 0.0]);
        assert!(proportional(&a, &a.scale(0.3)));
        assert!(!proportional(&a, &Hermitian::diagonal(&[1.0, 1e-6])));
        assert!(!proportional(&a, &Hermitian::zeros(2)));
    }

    #[test]
    fn c1_examples() {
        let (s, e) = duplicated_fig1();
        let g = DecisionStrategy::from_indices(&[1, 2, 1]);
        for u in [min_error_utility(), max_confidence_utility(), log_posterior_utility()] {
            assert!(check_c1(&u, &s, &e, &g, 0, 2).unwrap().holds(), "{}", u.name());
        }
        assert!(check_c1(&outcome_index_utility(), &s, &e, &g, 0, 2)
            .unwrap()
            .is_violated());
        assert!(check_c1(&min_error_utility(), &s, &e, &g, 0, 1)
            .unwrap()
            .is_inapplicable());
        let split = DecisionStrategy::from_indices(&[1, 2, 2]);
        assert!(check_c1(&min_error_utility(), &s, &e, &split, 0, 2)
            .unwrap()
            .is_inapplicable());
    }

    #[test]
    fn c2_examples() {
        let (s, e) = duplicated_fig1();
        let cap = 1000;
        assert!(check_c2(&min_error_utility(), &s, &e, 0, 2, cap).unwrap().holds());
        assert!(check_c2(&max_confidence_utility(), &s, &e, 0, 2, cap).unwrap().holds());
        assert!(check_c2(&log_posterior_utility(), &s, &e, 0, 2, cap).unwrap().holds());

        let splitter = UtilityFunction::scalar(
            "split",
            StrategyDependence::FullStrategy,
            |ctx, _, _| {
                if ctx.decision(0) != ctx.decision(2) {
                    1.0
                } else {
                    0.0
                }
            },
        );
        assert!(check_c2(&splitter, &s, &e, 0, 2, cap).unwrap().is_violated());
    }

    #[test]
    fn c3_examples() {
        let s = fixtures::example1();
        let e = fixtures::example1_povm_a(0.5, 0.5).unwrap();
        let g = DecisionStrategy::new(vec![
            Decision::Message(0),
            Decision::Message(0),
            Decision::Inconclusive,
        ]);
        assert!(check_c3(&min_error_utility(), &s, &e, &g, 0, 1).unwrap().holds());
        assert!(check_c3(&max_confidence_utility(), &s, &e, &g, 0, 1).unwrap().holds());
        assert!(check_c3(&log_posterior_utility(), &s, &e, &g, 0, 1).unwrap().holds());

        let (s, e) = duplicated_fig1();
        let g = DecisionStrategy::from_indices(&[1, 2, 1]);
        for u in [min_error_utility(), max_confidence_utility(), log_posterior_utility()] {
            assert!(check_c3(&u, &s, &e, &g, 2, 0).unwrap().holds(), "{}", u.name());
        }
    }

    #[test]
    fn c3_strict_for_log_posterior_on_distinct_elements() {
        // merged log-posterior is strictly below the weighted average
        let s = fixtures::fig1();
        let e = fixtures::fig1_povm();
        let g = DecisionStrategy::from_indices(&[1, 1]);
        let table = ProbabilityTable::new(&s, &e).unwrap();
        let (merged, gm, _) = merge_outcomes(&e, &g, 0, 1).unwrap();
        let mt = ProbabilityTable::new(&s, &merged).unwrap();
        let u = log_posterior_utility();
        let ctx = UtilityContext::new(&table, &g);
        let mctx = UtilityContext::new(&mt, &gm);
        for nu in 0..2 {
            let (pi, pj) = (table.likelihood(0, nu), table.likelihood(1, nu));
            let rhs = (pi * u.evaluate(&ctx, 0, nu).first() + pj * u.evaluate(&ctx, 1, nu).first())
                / (pi + pj);
            assert!(u.evaluate(&mctx, 0, nu).first() < rhs - 1e-6);
        }
        assert!(check_c3(&u, &s, &e, &g, 0, 1).unwrap().holds());
    }

    #[test]
    fn merge_keeps_other_outcomes_in_order() {
        let e = fixtures::example1_povm_b();
        let g = DecisionStrategy::from_indices(&[1, 2, 1]);
        let (m, gm, target) = merge_outcomes(&e, &g, 2, 0).unwrap();
        assert_eq!(target, vec![0, 1, 0]);
        assert_eq!(m.len(), 2);
        assert_eq!(gm.indices(), vec![1, 2]);
        assert!(m.element(0).distance(&Hermitian::diagonal(&[1.0, 1.0, 0.0])) < 1e-15);
    }

    #[test]
    fn fuzz_is_reproducible() {
        let u = min_error_utility();
        let a = monotonicity_fuzz(&u, 2..=3, 20, 11).unwrap();
        let b = monotonicity_fuzz(&u, 2..=3, 20, 11).unwrap();
        assert_eq!(a.trials, 20);
        assert_eq!(a.violations.len(), b.violations.len());
        assert!(a.violations.is_empty());
        let i1 = fuzz_instance(2..=3, 99);
        let i2 = fuzz_instance(2..=3, 99);
        assert_eq!(i1.map, i2.map);
        assert_eq!(i1.povm, i2.povm);
    }

    #[test]
    fn fuzz_rejects_bad_arguments() {
        let u = min_error_utility();
        assert!(monotonicity_fuzz(&u, 2..=3, 0, 1).is_err());
        #[allow(clippy::reversed_empty_ranges)]
        let empty = 3..=2;
        assert!(monotonicity_fuzz(&u, empty, 5, 1).is_err());
    }
}
