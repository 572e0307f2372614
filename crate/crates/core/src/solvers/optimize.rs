//! Numerical POVM search by random-restart pattern search.
//!
//! Elements are parameterized as `A_y = S^{-1/2} M_y† M_y S^{-1/2}` with
//! `S = Σ_j M_j† M_j`, so every parameter vector is a valid POVM. Each
//! restart draws Gaussian factors and then sweeps the real parameters,
//! trying `±step` on each and keeping moves that improve the averaged
//! utility in dictionary order. The step decays when a sweep makes no
//! progress.

use rayon::prelude::*;
use std::cmp::Ordering;

use crate::decision::{DecisionStrategy, DEFAULT_STRATEGY_CAP};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::random::{gaussian_matrix, povm_from_factors, rng_for};
use crate::scenario::{Povm, ProbabilityTable, Scenario};
use crate::utility::{
    average_utility_table, lex_compare, StrategyMode, UtilityFunction, UtilityScore, LEX_TOLERANCE,
};

const MIN_STEP: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerConfig {
    pub restarts: usize,
    /// Maximum parameter sweeps per restart.
    pub iterations: usize,
    pub initial_step: f64,
    /// Step multiplier after a sweep without improvement, in `(0, 1]`.
    pub decay: f64,
    pub seed: u64,
    /// Outcome count; defaults to messages + 1.
    pub outcomes: Option<usize>,
    /// Rank of each factor `M_y`; defaults to 1, raised until the
    /// elements can span the space.
    pub element_rank: Option<usize>,
    pub strategy_cap: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            restarts: 20,
            iterations: 200,
            initial_step: 0.5,
            decay: 0.5,
            seed: 0,
            outcomes: None,
            element_rank: None,
            strategy_cap: DEFAULT_STRATEGY_CAP,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.iterations == 0 {
            return Err(Error::invalid("optimizer config", "restarts and iterations must be >= 1"));
        }
        if !(self.initial_step > 0.0) {
            return Err(Error::invalid("optimizer config", "initial step must be positive"));
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return Err(Error::invalid("optimizer config", "decay must lie in (0, 1]"));
        }
        if self.outcomes == Some(0) || self.element_rank == Some(0) {
            return Err(Error::invalid("optimizer config", "outcomes and rank must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct OptimizedPovm {
    pub povm: Povm,
    pub score: UtilityScore,
    pub strategy: DecisionStrategy,
    /// Index of the restart that produced the result.
    pub restart: usize,
    /// Best score reached by every restart, in restart order.
    pub restart_scores: Vec<UtilityScore>,
}

struct Shape {
    outcomes: usize,
    rank: usize,
    dim: usize,
}

impl Shape {
    fn params(&self) -> usize {
        2 * self.outcomes * self.rank * self.dim
    }

    fn factors(&self, x: &[f64]) -> Vec<ComplexMatrix> {
        let block = self.rank * self.dim;
        (0..self.outcomes)
            .map(|y| {
                ComplexMatrix::from_fn(self.rank, self.dim, |r, c| {
                    let k = 2 * (y * block + r * self.dim + c);
                    C64::new(x[k], x[k + 1])
                })
            })
            .collect()
    }
}

struct Candidate {
    x: Vec<f64>,
    povm: Povm,
    score: UtilityScore,
    strategy: DecisionStrategy,
}

fn evaluate(
    s: &Scenario,
    u: &UtilityFunction,
    shape: &Shape,
    x: Vec<f64>,
    cap: u64,
) -> Result<Option<Candidate>> {
    let Ok(povm) = povm_from_factors(&shape.factors(&x)) else {
        return Ok(None);
    };
    let table = ProbabilityTable::new(s, &povm)?;
    let avg = average_utility_table(&table, u, StrategyMode::Auto, cap)?;
    Ok(Some(Candidate {
        x,
        povm,
        score: avg.score,
        strategy: avg.strategy,
    }))
}

/// Accepts strict dictionary-order gains, and moves inside the tie band that
/// raise some level while keeping level 1 within tolerance of its peak.
fn accepts(new: &UtilityScore, current: &UtilityScore, peak: f64) -> bool {
    match lex_compare(new.components(), current.components(), LEX_TOLERANCE) {
        Ordering::Greater => true,
        Ordering::Equal => {
            new.first() >= peak - LEX_TOLERANCE
                && lex_compare(new.components(), current.components(), 0.0) == Ordering::Greater
        }
        Ordering::Less => false,
    }
}

fn run_restart(
    s: &Scenario,
    u: &UtilityFunction,
    shape: &Shape,
    cfg: &OptimizerConfig,
    restart: usize,
) -> Result<Candidate> {
    let mut rng = rng_for(cfg.seed, restart as u64);
    let mut current = loop {
        let factors: Vec<ComplexMatrix> = (0..shape.outcomes)
            .map(|_| gaussian_matrix(shape.rank, shape.dim, &mut rng))
            .collect();
        let x: Vec<f64> = factors
            .iter()
            .flat_map(|m| m.transpose().iter().flat_map(|c| [c.re, c.im]).collect::<Vec<_>>())
            .collect();
        if let Some(c) = evaluate(s, u, shape, x, cfg.strategy_cap)? {
            break c;
        }
    };
    let mut peak = current.score.first();
    let mut step = cfg.initial_step;
    for _ in 0..cfg.iterations {
        if step < MIN_STEP {
            break;
        }
        let mut improved = false;
        for p in 0..shape.params() {
            for sign in [1.0, -1.0] {
                let mut x = current.x.clone();
                x[p] += sign * step;
                if let Some(c) = evaluate(s, u, shape, x, cfg.strategy_cap)? {
                    if accepts(&c.score, &current.score, peak) {
                        peak = peak.max(c.score.first());
                        current = c;
                        improved = true;
                        break;
                    }
                }
            }
        }
        if !improved {
            step *= cfg.decay;
        }
    }
    Ok(current)
}

/// Best POVM found for `u`. Deterministic given `cfg.seed`; restarts run in
/// parallel and are reduced in restart order.
pub fn optimize_povm(
    s: &Scenario,
    u: &UtilityFunction,
    cfg: &OptimizerConfig,
) -> Result<OptimizedPovm> {
    cfg.validate()?;
    let dim = s.dim();
    let outcomes = cfg.outcomes.unwrap_or(s.len() + 1);
    let rank = cfg
        .element_rank
        .unwrap_or(1)
        .max(dim.div_ceil(outcomes))
        .min(dim);
    let shape = Shape {
        outcomes,
        rank,
        dim,
    };
    let results: Vec<Candidate> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| run_restart(s, u, &shape, cfg, r))
        .collect::<Result<_>>()?;

    let mut best = 0;
    for (r, c) in results.iter().enumerate() {
        if lex_compare(c.score.components(), results[best].score.components(), LEX_TOLERANCE)
            == Ordering::Greater
        {
            best = r;
        }
    }
    let restart_scores = results.iter().map(|c| c.score.clone()).collect();
    let winner = results.into_iter().nth(best).expect("at least one restart");
    Ok(OptimizedPovm {
        povm: winner.povm,
        score: winner.score,
        strategy: winner.strategy,
        restart: best,
        restart_scores,
    })
}
