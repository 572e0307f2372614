//! Alphabets, priors, measurements and every probability derived from them.
//!
//! Message indices `ν` and outcome indices `y` are zero-based throughout the
//! library. Information quantities are in bits.

use crate::error::{Error, Result};
use crate::linalg::{self, is_psd, ComplexVector, Hermitian, PSD_TOL};

/// Outcome probabilities below this are treated as impossible events.
pub const ZERO_PROBABILITY: f64 = 1e-14;

/// A unit-trace positive semi-definite operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(Hermitian);

impl DensityMatrix {
    pub fn new(matrix: Hermitian) -> Result<Self> {
        Self::with_tolerance(matrix, PSD_TOL)
    }

    pub fn with_tolerance(matrix: Hermitian, tol: f64) -> Result<Self> {
        let tr = matrix.trace();
        if (tr - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(
                "density matrix",
                format!("trace is {tr}, expected 1"),
            ));
        }
        if !is_psd(&matrix, tol) {
            return Err(Error::NotPsd {
                what: "density matrix".into(),
                min_eigenvalue: matrix.min_eigenvalue(),
            });
        }
        Ok(DensityMatrix(matrix))
    }

    /// The pure state `|ψ⟩⟨ψ|` for a (not necessarily normalized) vector.
    pub fn pure(psi: &ComplexVector) -> Result<Self> {
        if psi.norm() == 0.0 {
            return Err(Error::invalid("pure state", "zero vector"));
        }
        Self::new(Hermitian::projector(psi))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &Hermitian {
        &self.0
    }
}

/// Alice's alphabet together with her prior over messages.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    states: Vec<DensityMatrix>,
    priors: Vec<f64>,
}

impl Scenario {
    pub fn new(states: Vec<DensityMatrix>, priors: Vec<f64>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::invalid("scenario", "no states"));
        }
        if states.len() != priors.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} states but {} priors",
                states.len(),
                priors.len()
            )));
        }
        let dim = states[0].dim();
        if let Some(i) = states.iter().position(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch(format!(
                "state {i} has dimension {}, expected {dim}",
                states[i].dim()
            )));
        }
        if let Some(i) = priors.iter().position(|&q| !(q > 0.0)) {
            return Err(Error::invalid(
                "priors",
                format!("prior {i} is {}, must be > 0", priors[i]),
            ));
        }
        let total: f64 = priors.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(
                "priors",
                format!("priors sum to {total}, expected 1"),
            ));
        }
        Ok(Scenario { states, priors })
    }

    /// Number of messages `n`.
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn state(&self, message: usize) -> &DensityMatrix {
        &self.states[message]
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    /// `ρ̄ = Σ_ν q_ν ρ_ν`.
    pub fn average_state(&self) -> Hermitian {
        let weighted: Vec<Hermitian> = self
            .states
            .iter()
            .zip(&self.priors)
            .map(|(s, &q)| s.matrix().scale(q))
            .collect();
        linalg::sum(self.dim(), &weighted)
    }

    /// `q_ν ρ_ν`.
    pub fn weighted_state(&self, message: usize) -> Hermitian {
        self.states[message].matrix().scale(self.priors[message])
    }
}

/// A positive operator-valued measure.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    elements: Vec<Hermitian>,
}

impl Povm {
    pub fn new(elements: Vec<Hermitian>) -> Result<Self> {
        Self::with_tolerance(elements, PSD_TOL, 1e-10)
    }

    /// Validates each element as PSD within `psd_tol` (relative) and the
    /// completeness relation within `sum_tol` (Frobenius).
    pub fn with_tolerance(elements: Vec<Hermitian>, psd_tol: f64, sum_tol: f64) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::invalid("POVM", "no elements"));
        }
        let dim = elements[0].dim();
        if let Some(i) = elements.iter().position(|e| e.dim() != dim) {
            return Err(Error::DimensionMismatch(format!(
                "POVM element {i} has dimension {}, expected {dim}",
                elements[i].dim()
            )));
        }
        for (i, e) in elements.iter().enumerate() {
            if !is_psd(e, psd_tol) {
                return Err(Error::NotPsd {
                    what: format!("POVM element {i}"),
                    min_eigenvalue: e.min_eigenvalue(),
                });
            }
        }
        let deviation = linalg::sum(dim, &elements).distance(&Hermitian::identity(dim));
        if deviation > sum_tol {
            return Err(Error::invalid(
                "POVM",
                format!("elements sum to identity only within {deviation:.3e}"),
            ));
        }
        Ok(Povm { elements })
    }

    /// The trivial single-outcome measurement.
    pub fn identity(dim: usize) -> Self {
        Povm {
            elements: vec![Hermitian::identity(dim)],
        }
    }

    /// Projective measurement in the computational basis.
    pub fn computational(dim: usize) -> Self {
        Povm {
            elements: (0..dim)
                .map(|i| {
                    let mut d = vec![0.0; dim];
                    d[i] = 1.0;
                    Hermitian::diagonal(&d)
                })
                .collect(),
        }
    }

    /// Number of outcomes `m`.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    pub fn elements(&self) -> &[Hermitian] {
        &self.elements
    }

    pub fn element(&self, outcome: usize) -> &Hermitian {
        &self.elements[outcome]
    }

    pub fn into_elements(self) -> Vec<Hermitian> {
        self.elements
    }
}

/// A probability vector, or the all-zero sentinel for conditioning on an
/// impossible event.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution(Vec<f64>);

impl Distribution {
    pub fn new(p: Vec<f64>) -> Self {
        Distribution(p)
    }

    pub fn undefined(len: usize) -> Self {
        Distribution(vec![0.0; len])
    }

    pub fn is_undefined(&self) -> bool {
        self.0.iter().all(|&p| p == 0.0)
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Index of the largest entry; ties go to the lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.0.iter().enumerate() {
            if p > self.0[best] {
                best = i;
            }
        }
        best
    }

    /// Shannon entropy in bits, with `0 log 0 = 0`.
    pub fn entropy(&self) -> f64 {
        -self
            .0
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * p.log2())
            .sum::<f64>()
    }
}

/// The joint distribution `p(N_ν, ε_y) = q_ν tr(A_y ρ_ν)` for one scenario and
/// one measurement, with its marginals.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityTable {
    joint: Vec<Vec<f64>>,
    outcome: Vec<f64>,
    priors: Vec<f64>,
}

impl ProbabilityTable {
    pub fn new(scenario: &Scenario, povm: &Povm) -> Result<Self> {
        if scenario.dim() != povm.dim() {
            return Err(Error::DimensionMismatch(format!(
                "scenario dimension {} vs POVM dimension {}",
                scenario.dim(),
                povm.dim()
            )));
        }
        let joint: Vec<Vec<f64>> = povm
            .elements()
            .iter()
            .map(|a| {
                scenario
                    .states()
                    .iter()
                    .zip(scenario.priors())
                    .map(|(rho, &q)| q * a.trace_product(rho.matrix()))
                    .collect()
            })
            .collect();
        Ok(Self::from_joint(joint, scenario.priors().to_vec()))
    }

    /// Builds a table directly from joint probabilities (`outcomes × messages`).
    pub fn from_joint(joint: Vec<Vec<f64>>, priors: Vec<f64>) -> Self {
        let outcome = joint.iter().map(|row| row.iter().sum()).collect();
        ProbabilityTable {
            joint,
            outcome,
            priors,
        }
    }

    pub fn outcomes(&self) -> usize {
        self.joint.len()
    }

    pub fn messages(&self) -> usize {
        self.priors.len()
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn joint(&self, outcome: usize, message: usize) -> f64 {
        self.joint[outcome][message]
    }

    pub fn joint_row(&self, outcome: usize) -> &[f64] {
        &self.joint[outcome]
    }

    pub fn outcome_probability(&self, outcome: usize) -> f64 {
        self.outcome[outcome]
    }

    /// `p(ε_y | N_ν) = tr(A_y ρ_ν)`.
    pub fn likelihood(&self, outcome: usize, message: usize) -> f64 {
        self.joint[outcome][message] / self.priors[message]
    }

    pub fn posterior(&self, outcome: usize) -> Distribution {
        let p = self.outcome[outcome];
        if p < ZERO_PROBABILITY {
            return Distribution::undefined(self.messages());
        }
        Distribution::new(self.joint[outcome].iter().map(|j| j / p).collect())
    }

    /// `p(N_ν | ε_y)`, zero when the outcome is impossible.
    pub fn posterior_of(&self, outcome: usize, message: usize) -> f64 {
        let p = self.outcome[outcome];
        if p < ZERO_PROBABILITY {
            0.0
        } else {
            self.joint[outcome][message] / p
        }
    }

    pub fn prior_entropy(&self) -> f64 {
        Distribution::new(self.priors.clone()).entropy()
    }

    pub fn conditional_entropy(&self) -> f64 {
        let mut h = 0.0;
        for y in 0..self.outcomes() {
            for nu in 0..self.messages() {
                let j = self.joint[y][nu];
                let post = self.posterior_of(y, nu);
                if j > 0.0 && post > 0.0 {
                    h -= j * post.log2();
                }
            }
        }
        h
    }

    pub fn mutual_information(&self) -> f64 {
        self.prior_entropy() - self.conditional_entropy()
    }
}

fn check_index(what: &'static str, index: usize, size: usize) -> Result<()> {
    if index >= size {
        Err(Error::IndexOutOfRange { what, index, size })
    } else {
        Ok(())
    }
}

pub fn joint_probability(s: &Scenario, e: &Povm, outcome: usize, message: usize) -> Result<f64> {
    check_index("outcome", outcome, e.len())?;
    check_index("message", message, s.len())?;
    Ok(s.priors()[message] * e.element(outcome).trace_product(s.state(message).matrix()))
}

pub fn outcome_probability(s: &Scenario, e: &Povm, outcome: usize) -> Result<f64> {
    check_index("outcome", outcome, e.len())?;
    Ok(e.element(outcome).trace_product(&s.average_state()))
}

pub fn posterior(s: &Scenario, e: &Povm, outcome: usize) -> Result<Distribution> {
    check_index("outcome", outcome, e.len())?;
    Ok(ProbabilityTable::new(s, e)?.posterior(outcome))
}

pub fn prior_entropy(s: &Scenario) -> f64 {
    Distribution::new(s.priors().to_vec()).entropy()
}

pub fn conditional_entropy(s: &Scenario, e: &Povm) -> Result<f64> {
    Ok(ProbabilityTable::new(s, e)?.conditional_entropy())
}

pub fn mutual_information(s: &Scenario, e: &Povm) -> Result<f64> {
    Ok(ProbabilityTable::new(s, e)?.mutual_information())
}
