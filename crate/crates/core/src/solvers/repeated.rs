//! When is "no measurement, just guess" optimal, for one copy and for `d`
//! copies measured one at a time.
//!
//! A message `m` dominates when `q_m ρ_m − q_k ρ_k ⪰ 0` for every `k`; then
//! every outcome of every POVM leaves `m` as the posterior argmax. With `d`
//! copies the priors enter through their `d`-th roots.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{is_psd, spectral_decomposition, Hermitian, PSD_TOL};
use crate::random::{random_povm, rng_for};
use crate::scenario::{Distribution, Povm, Scenario, ZERO_PROBABILITY};

/// A scenario whose state is sent `copies` times.
#[derive(Clone, Debug)]
pub struct RepeatedScenario {
    base: Scenario,
    copies: usize,
}

impl RepeatedScenario {
    pub fn new(base: Scenario, copies: usize) -> Result<Self> {
        if copies == 0 {
            return Err(Error::invalid("copies", "must be at least 1"));
        }
        Ok(RepeatedScenario { base, copies })
    }

    pub fn base(&self) -> &Scenario {
        &self.base
    }

    pub fn copies(&self) -> usize {
        self.copies
    }
}

fn dominance_gap(s: &Scenario, m: usize, k: usize, root: f64) -> Hermitian {
    let q = s.priors();
    let a = s.state(m).matrix().scale(q[m].powf(root));
    let b = s.state(k).matrix().scale(q[k].powf(root));
    &a - &b
}

fn dominates(s: &Scenario, m: usize, root: f64) -> Option<usize> {
    (0..s.len()).find(|&k| k != m && !is_psd(&dominance_gap(s, m, k, root), PSD_TOL))
}

/// The message that dominates every other, if any (lowest index on ties).
pub fn guess_condition(s: &Scenario) -> Option<usize> {
    (0..s.len()).find(|&m| dominates(s, m, 1.0).is_none())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RepeatedCondition {
    /// `message` stays the posterior argmax for every record.
    Holds { message: usize },
    /// `rival`'s root-weighted state is not dominated by `message`'s.
    Fails { message: usize, rival: usize },
    /// No message dominates even for a single copy.
    NoCandidate,
}

impl RepeatedCondition {
    pub fn holds(&self) -> bool {
        matches!(self, RepeatedCondition::Holds { .. })
    }
}

/// `q_m^{1/d} ρ_m − q_k^{1/d} ρ_k ⪰ 0` for all `k`, for the single-copy
/// dominant message `m`.
pub fn repeated_condition(r: &RepeatedScenario) -> RepeatedCondition {
    let Some(m) = guess_condition(&r.base) else {
        return RepeatedCondition::NoCandidate;
    };
    match dominates(&r.base, m, 1.0 / r.copies as f64) {
        None => RepeatedCondition::Holds { message: m },
        Some(k) => RepeatedCondition::Fails {
            message: m,
            rival: k,
        },
    }
}

/// Posteriors after each measurement of `record` (0-based outcomes), the
/// same POVM applied to each copy. Entry 0 is the prior. A zero-probability
/// record yields the all-zero sentinel from then on.
pub fn simulate_repeated(r: &RepeatedScenario, e: &Povm, record: &[usize]) -> Result<Vec<Distribution>> {
    if record.len() > r.copies {
        return Err(Error::invalid(
            "record",
            format!("{} outcomes for {} copies", record.len(), r.copies),
        ));
    }
    if e.dim() != r.base.dim() {
        return Err(Error::DimensionMismatch(format!(
            "POVM acts on dimension {}, states on {}",
            e.dim(),
            r.base.dim()
        )));
    }
    let s = &r.base;
    let mut trajectory = vec![Distribution::new(s.priors().to_vec())];
    let mut current = s.priors().to_vec();
    for &y in record {
        if y >= e.len() {
            return Err(Error::IndexOutOfRange {
                what: "outcome",
                index: y,
                size: e.len(),
            });
        }
        let updated: Vec<f64> = (0..s.len())
            .map(|nu| current[nu] * s.state(nu).matrix().trace_product(e.element(y)))
            .collect();
        let norm: f64 = updated.iter().sum();
        current = if norm < ZERO_PROBABILITY {
            vec![0.0; s.len()]
        } else {
            updated.iter().map(|p| p / norm).collect()
        };
        trajectory.push(Distribution::new(current.clone()));
    }
    Ok(trajectory)
}

/// A POVM and record that move the posterior argmax away from the dominant
/// message.
#[derive(Clone, Debug)]
pub struct Witness {
    pub povm: Povm,
    pub record: Vec<usize>,
    pub posterior: Distribution,
    pub decided: usize,
}

#[derive(Clone, Debug)]
pub struct RepeatedCheck {
    pub condition: RepeatedCondition,
    pub witness: Option<Witness>,
    pub povms_checked: usize,
    pub records_checked: usize,
}

impl RepeatedCheck {
    /// The condition holds exactly when no witness was found.
    pub fn consistent(&self) -> bool {
        match self.condition {
            RepeatedCondition::Holds { .. } => self.witness.is_none(),
            RepeatedCondition::Fails { .. } => self.witness.is_some(),
            RepeatedCondition::NoCandidate => true,
        }
    }
}

/// Searches for a record of length `d` after which some message other than
/// the dominant one has strictly larger posterior.
///
/// POVMs are tried in order: `candidates`, then (when the condition fails)
/// the two-outcome measurement built from a negative eigenvector of the
/// failing root-weighted difference, then `samples` random POVMs. Every
/// record of length `d` is enumerated for each.
pub fn verify_repeated_condition(
    r: &RepeatedScenario,
    candidates: &[Povm],
    samples: usize,
    seed: u64,
) -> Result<RepeatedCheck> {
    let condition = repeated_condition(r);
    let mut check = RepeatedCheck {
        condition: condition.clone(),
        witness: None,
        povms_checked: 0,
        records_checked: 0,
    };
    let message = match condition {
        RepeatedCondition::Holds { message } | RepeatedCondition::Fails { message, .. } => message,
        RepeatedCondition::NoCandidate => return Ok(check),
    };

    let mut povms: Vec<Povm> = candidates.to_vec();
    if let RepeatedCondition::Fails { rival, .. } = condition {
        let gap = dominance_gap(&r.base, message, rival, 1.0 / r.copies as f64);
        let spectrum = spectral_decomposition(&gap);
        let v = spectrum.vector(spectrum.eigenvalues.len() - 1);
        let p = Hermitian::projector(&v);
        povms.push(Povm::new(vec![p.clone(), &Hermitian::identity(r.base.dim()) - &p])?);
    }
    let mut rng = rng_for(seed, 0);
    for _ in 0..samples {
        let outcomes = rng.random_range(2..=3);
        povms.push(random_povm(r.base.dim(), outcomes, &mut rng));
    }

    for e in povms {
        check.povms_checked += 1;
        if let Some(w) = search_records(r, &e, message, &mut check.records_checked)? {
            check.witness = Some(w);
            break;
        }
    }
    Ok(check)
}

fn search_records(
    r: &RepeatedScenario,
    e: &Povm,
    message: usize,
    counter: &mut usize,
) -> Result<Option<Witness>> {
    let d = r.copies;
    let mut record = vec![0usize; d];
    loop {
        *counter += 1;
        let trajectory = simulate_repeated(r, e, &record)?;
        let last = trajectory.last().expect("prior is always present");
        if !last.is_undefined() {
            let p = last.probabilities();
            if let Some(k) = (0..p.len()).find(|&k| k != message && p[k] > p[message] + 1e-12) {
                return Ok(Some(Witness {
                    povm: e.clone(),
                    record,
                    posterior: last.clone(),
                    decided: k,
                }));
            }
        }
        // odometer over records, last position fastest
        let mut pos = d;
        loop {
            if pos == 0 {
                return Ok(None);
            }
            pos -= 1;
            record[pos] += 1;
            if record[pos] < e.len() {
                break;
            }
            record[pos] = 0;
        }
    }
}
