//! Decision strategies and the optimal strategies for the two classical
//! discrimination branches.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{self, Hermitian};
use crate::scenario::{Povm, ProbabilityTable, Scenario, ZERO_PROBABILITY};

/// Default cap on the number of strategies an enumeration may visit.
pub const DEFAULT_STRATEGY_CAP: u64 = 10_000_000;
/// Default cap on injective partial assignments searched for maximal confidence.
pub const DEFAULT_ASSIGNMENT_CAP: u64 = 1_000_000;

/// What Bob concludes after seeing an outcome.
///
/// Ordered with `Inconclusive` first, then messages by index, which matches
/// the numeric encoding `0 = inconclusive, k = message k-1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Decision {
    Inconclusive,
    Message(usize),
}

impl Decision {
    pub fn from_index(index: usize) -> Self {
        match index {
            0 => Decision::Inconclusive,
            k => Decision::Message(k - 1),
        }
    }

    pub fn index(self) -> usize {
        match self {
            Decision::Inconclusive => 0,
            Decision::Message(k) => k + 1,
        }
    }

    pub fn message(self) -> Option<usize> {
        match self {
            Decision::Inconclusive => None,
            Decision::Message(k) => Some(k),
        }
    }
}

/// A deterministic map from outcomes to decisions.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DecisionStrategy {
    assignment: Vec<Decision>,
}

impl DecisionStrategy {
    pub fn new(assignment: Vec<Decision>) -> Self {
        DecisionStrategy { assignment }
    }

    /// From numeric decisions, `0` meaning inconclusive and `k ≥ 1` message `k-1`.
    pub fn from_indices(indices: &[usize]) -> Self {
        Self::new(indices.iter().map(|&i| Decision::from_index(i)).collect())
    }

    pub fn constant(outcomes: usize, decision: Decision) -> Self {
        Self::new(vec![decision; outcomes])
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn get(&self, outcome: usize) -> Decision {
        self.assignment[outcome]
    }

    pub fn set(&mut self, outcome: usize, decision: Decision) {
        self.assignment[outcome] = decision;
    }

    pub fn assignment(&self) -> &[Decision] {
        &self.assignment
    }

    pub fn indices(&self) -> Vec<usize> {
        self.assignment.iter().map(|d| d.index()).collect()
    }

    /// Outcomes mapped to `decision`.
    pub fn preimage(&self, decision: Decision) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, &d)| d == decision)
            .map(|(y, _)| y)
            .collect()
    }

    /// Checks that the strategy covers `outcomes` outcomes and only names
    /// messages below `messages`.
    pub fn validate(&self, outcomes: usize, messages: usize) -> Result<()> {
        if self.len() != outcomes {
            return Err(Error::DimensionMismatch(format!(
                "strategy covers {} outcomes, POVM has {outcomes}",
                self.len()
            )));
        }
        for d in &self.assignment {
            if let Decision::Message(k) = d {
                if *k >= messages {
                    return Err(Error::IndexOutOfRange {
                        what: "decision",
                        index: k + 1,
                        size: messages + 1,
                    });
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for DecisionStrategy {
    /// Renders as `(1,2,0)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, d) in self.assignment.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", d.index())?;
        }
        write!(f, ")")
    }
}

/// Lexicographic stream over every strategy `outcomes → decisions`.
#[derive(Clone, Debug)]
pub struct StrategyEnumerator {
    digits: Vec<usize>,
    base: usize,
    offset: usize,
    done: bool,
}

impl Iterator for StrategyEnumerator {
    type Item = DecisionStrategy;

    fn next(&mut self) -> Option<DecisionStrategy> {
        if self.done {
            return None;
        }
        let current = DecisionStrategy::from_indices(
            &self.digits.iter().map(|d| d + self.offset).collect::<Vec<_>>(),
        );
        // odometer, last position fastest
        let mut pos = self.digits.len();
        loop {
            if pos == 0 {
                self.done = true;
                break;
            }
            pos -= 1;
            self.digits[pos] += 1;
            if self.digits[pos] < self.base {
                break;
            }
            self.digits[pos] = 0;
        }
        Some(current)
    }
}

/// Number of strategies for `outcomes` outcomes and `messages` messages.
pub fn strategy_count(outcomes: usize, messages: usize, allow_inconclusive: bool) -> u128 {
    let base = (messages + usize::from(allow_inconclusive)) as u128;
    (0..outcomes).fold(1u128, |acc, _| acc.saturating_mul(base))
}

pub fn enumerate_strategies(
    outcomes: usize,
    messages: usize,
    allow_inconclusive: bool,
    cap: u64,
) -> Result<StrategyEnumerator> {
    let size = strategy_count(outcomes, messages, allow_inconclusive);
    if size > cap as u128 {
        return Err(Error::CapExceeded {
            size,
            cap,
            hint: "use an analytic strategy solver instead of enumeration".into(),
        });
    }
    let base = messages + usize::from(allow_inconclusive);
    Ok(StrategyEnumerator {
        digits: vec![0; outcomes],
        base,
        offset: usize::from(!allow_inconclusive),
        done: base == 0 && outcomes > 0,
    })
}

/// Probabilities of Bob's decisions under a strategy.
#[derive(Clone, Debug)]
pub struct DecisionTable {
    /// `p(N_ν, D_d)` indexed `[d][ν]` with `d = 0` inconclusive.
    joint: Vec<Vec<f64>>,
    /// `p(D_d)`.
    marginal: Vec<f64>,
}

impl DecisionTable {
    pub fn new(table: &ProbabilityTable, strategy: &DecisionStrategy) -> Self {
        let n = table.messages();
        let mut joint = vec![vec![0.0; n]; n + 1];
        for (y, d) in strategy.assignment().iter().enumerate() {
            let row = &mut joint[d.index()];
            for (acc, &p) in row.iter_mut().zip(table.joint_row(y)) {
                *acc += p;
            }
        }
        let marginal = joint.iter().map(|r| r.iter().sum()).collect();
        DecisionTable { joint, marginal }
    }

    pub fn probability(&self, decision: Decision) -> f64 {
        self.marginal[decision.index()]
    }

    pub fn joint(&self, decision: Decision, message: usize) -> f64 {
        self.joint[decision.index()][message]
    }

    /// `p(N_ν | D_d)`, zero when the decision is never made.
    pub fn posterior(&self, decision: Decision, message: usize) -> f64 {
        let p = self.probability(decision);
        if p < ZERO_PROBABILITY {
            0.0
        } else {
            self.joint(decision, message) / p
        }
    }
}

impl ProbabilityTable {
    pub fn success_probability(&self, strategy: &DecisionStrategy) -> f64 {
        strategy
            .assignment()
            .iter()
            .enumerate()
            .filter_map(|(y, d)| d.message().map(|nu| self.joint(y, nu)))
            .sum()
    }

    pub fn total_confidence(&self, strategy: &DecisionStrategy) -> f64 {
        let dt = DecisionTable::new(self, strategy);
        (0..self.messages())
            .map(|nu| dt.posterior(Decision::Message(nu), nu))
            .sum()
    }

    /// Argmax-posterior strategy; ties and impossible outcomes go to the
    /// lowest message index.
    pub fn optimal_strategy_min_error(&self) -> DecisionStrategy {
        DecisionStrategy::new(
            (0..self.outcomes())
                .map(|y| {
                    let row = self.joint_row(y);
                    let mut best = 0;
                    for (nu, &p) in row.iter().enumerate() {
                        if p > row[best] {
                            best = nu;
                        }
                    }
                    Decision::Message(best)
                })
                .collect(),
        )
    }

    /// Best injective partial assignment of decisions to outcomes, found by
    /// exhaustive search. Ties go to the lexicographically smallest strategy.
    pub fn optimal_strategy_max_confidence(&self, cap: u64) -> Result<DecisionStrategy> {
        let m = self.outcomes();
        let n = self.messages();
        let size = injective_partial_count(n, m);
        if size > cap as u128 {
            return Err(Error::CapExceeded {
                size,
                cap,
                hint: "too many injective assignments for exhaustive confidence search".into(),
            });
        }
        let posts: Vec<Vec<f64>> = (0..m)
            .map(|y| (0..n).map(|nu| self.posterior_of(y, nu)).collect())
            .collect();

        let mut search = AssignmentSearch {
            posts: &posts,
            chosen: vec![None; n],
            used: vec![false; m],
            best_value: f64::NEG_INFINITY,
            threshold: None,
            best: None,
        };
        search.visit(0, 0.0);
        let max = search.best_value;
        search.threshold = Some(max - 1e-12);
        search.best = None;
        search.visit(0, 0.0);
        Ok(search.best.expect("at least the empty assignment exists"))
    }
}

struct AssignmentSearch<'a> {
    posts: &'a [Vec<f64>],
    chosen: Vec<Option<usize>>,
    used: Vec<bool>,
    best_value: f64,
    threshold: Option<f64>,
    best: Option<DecisionStrategy>,
}

impl AssignmentSearch<'_> {
    fn visit(&mut self, message: usize, value: f64) {
        if message == self.chosen.len() {
            match self.threshold {
                None => self.best_value = self.best_value.max(value),
                Some(t) if value >= t => {
                    let mut assignment = vec![Decision::Inconclusive; self.used.len()];
                    for (nu, y) in self.chosen.iter().enumerate() {
                        if let Some(y) = y {
                            assignment[*y] = Decision::Message(nu);
                        }
                    }
                    let candidate = DecisionStrategy::new(assignment);
                    if self.best.as_ref().is_none_or(|b| candidate < *b) {
                        self.best = Some(candidate);
                    }
                }
                Some(_) => {}
            }
            return;
        }
        self.chosen[message] = None;
        self.visit(message + 1, value);
        for y in 0..self.used.len() {
            if !self.used[y] {
                self.used[y] = true;
                self.chosen[message] = Some(y);
                self.visit(message + 1, value + self.posts[y][message]);
                self.used[y] = false;
            }
        }
        self.chosen[message] = None;
    }
}

/// `Σ_k C(n,k) · m!/(m−k)!`.
pub fn injective_partial_count(messages: usize, outcomes: usize) -> u128 {
    let mut total = 0u128;
    for k in 0..=messages.min(outcomes) {
        let mut c = 1u128;
        for i in 0..k {
            c = c * (messages - i) as u128 / (i + 1) as u128;
        }
        let mut p = 1u128;
        for i in 0..k {
            p = p.saturating_mul((outcomes - i) as u128);
        }
        total = total.saturating_add(c.saturating_mul(p));
    }
    total
}

fn table_for(s: &Scenario, e: &Povm, g: &DecisionStrategy) -> Result<ProbabilityTable> {
    g.validate(e.len(), s.len())?;
    ProbabilityTable::new(s, e)
}

pub fn success_probability(s: &Scenario, e: &Povm, g: &DecisionStrategy) -> Result<f64> {
    Ok(table_for(s, e, g)?.success_probability(g))
}

pub fn total_confidence(s: &Scenario, e: &Povm, g: &DecisionStrategy) -> Result<f64> {
    Ok(table_for(s, e, g)?.total_confidence(g))
}

pub fn optimal_strategy_min_error(s: &Scenario, e: &Povm) -> Result<DecisionStrategy> {
    Ok(ProbabilityTable::new(s, e)?.optimal_strategy_min_error())
}

pub fn optimal_strategy_max_confidence(s: &Scenario, e: &Povm) -> Result<DecisionStrategy> {
    ProbabilityTable::new(s, e)?.optimal_strategy_max_confidence(DEFAULT_ASSIGNMENT_CAP)
}

/// Merges outcomes that share a decision: one element per decision in order
/// of first appearance, paired with the induced one-to-one strategy.
pub fn merge_by_strategy(e: &Povm, g: &DecisionStrategy) -> Result<(Povm, DecisionStrategy)> {
    if g.len() != e.len() {
        return Err(Error::DimensionMismatch(format!(
            "strategy covers {} outcomes, POVM has {}",
            g.len(),
            e.len()
        )));
    }
    let mut order: Vec<Decision> = Vec::new();
    for &d in g.assignment() {
        if !order.contains(&d) {
            order.push(d);
        }
    }
    let elements: Vec<Hermitian> = order
        .iter()
        .map(|&d| linalg::sum(e.dim(), g.preimage(d).iter().map(|&y| e.element(y))))
        .collect();
    Ok((Povm::new(elements)?, DecisionStrategy::new(order)))
}
