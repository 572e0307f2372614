//! Maximal-confidence measurements.
//!
//! For message `ν` the confidence of an element `A` is
//! `q_ν tr(ρ_ν A) / tr(ρ̄ A)`. Writing `A = W B W` with `W = ρ̄^{-1/2}` on the
//! support of `ρ̄` turns this into a Rayleigh quotient of `W q_ν ρ_ν W`, so the
//! best rank-1 `B` is its top eigenvector.

use crate::error::{Error, Result};
use crate::linalg::{is_psd, pinv_sqrt, spectral_decomposition, Hermitian, PSD_TOL};
use crate::scenario::{Povm, Scenario, ZERO_PROBABILITY};

/// Support cut-off for the whitening operator.
const SUPPORT_TOL: f64 = 1e-12;
/// Floor on each weight in the inconclusive-rate search.
const WEIGHT_FLOOR: f64 = 1e-6;

/// An unscaled conclusive element and the confidence it achieves.
#[derive(Clone, Debug)]
pub struct ConfidenceDirection {
    /// Normalized to unit largest eigenvalue.
    pub element: Hermitian,
    pub confidence: f64,
}

/// `q_ν tr(ρ_ν A) / tr(ρ̄ A)`, or `None` when `tr(ρ̄ A)` vanishes.
pub fn confidence(s: &Scenario, message: usize, element: &Hermitian) -> Option<f64> {
    let denom = s.average_state().trace_product(element);
    if denom < ZERO_PROBABILITY {
        None
    } else {
        Some(s.weighted_state(message).trace_product(element) / denom)
    }
}

/// One maximal-confidence direction per message.
pub fn max_confidence_directions(s: &Scenario) -> Result<Vec<ConfidenceDirection>> {
    let w = pinv_sqrt(&s.average_state(), SUPPORT_TOL)?;
    (0..s.len())
        .map(|nu| {
            let whitened = s.weighted_state(nu).sandwich(&w);
            let spectrum = spectral_decomposition(&whitened);
            let top = spectrum.eigenvalues[0];
            if top <= ZERO_PROBABILITY {
                return Err(Error::invalid(
                    "scenario",
                    format!("state {nu} has no overlap with the average state"),
                ));
            }
            let element = Hermitian::outer(&spectrum.vector(0)).sandwich(&w);
            let element = element.scale(1.0 / element.max_eigenvalue());
            Ok(ConfidenceDirection {
                element,
                confidence: top,
            })
        })
        .collect()
}

/// `(s₁A₁, …, s_nA_n, A₀)` with `A₀ = I − Σ s_ν A_ν`.
pub fn assemble_max_confidence_povm(directions: &[Hermitian], scales: &[f64]) -> Result<Povm> {
    if directions.is_empty() {
        return Err(Error::invalid("directions", "empty list"));
    }
    if directions.len() != scales.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} directions but {} scales",
            directions.len(),
            scales.len()
        )));
    }
    if let Some(k) = scales.iter().position(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::invalid("scales", format!("scale {k} = {} is negative", scales[k])));
    }
    let dim = directions[0].dim();
    let mut elements: Vec<Hermitian> = directions
        .iter()
        .zip(scales)
        .map(|(a, &x)| a.scale(x))
        .collect();
    let conclusive = crate::linalg::sum(dim, &elements);
    let a0 = &Hermitian::identity(dim) - &conclusive;
    if !is_psd(&a0, PSD_TOL) {
        return Err(Error::NotPsd {
            what: format!("inconclusive element for scales {scales:?} (reduce the scales)"),
            min_eigenvalue: a0.min_eigenvalue(),
        });
    }
    elements.push(a0);
    Povm::new(elements)
}

/// The member of a rescaling family with the smallest inconclusive rate.
#[derive(Clone, Debug)]
pub struct InconclusiveSolution {
    pub povm: Povm,
    pub scales: Vec<f64>,
    pub total_confidence: f64,
    /// `1 − p(D₀)`.
    pub conclusive_probability: f64,
}

impl InconclusiveSolution {
    pub fn inconclusive_probability(&self) -> f64 {
        1.0 - self.conclusive_probability
    }
}

/// Maximizes `Σ_ν s_ν tr(ρ̄ A_ν)` subject to `Σ_ν s_ν A_ν ≤ I`.
///
/// For a direction `w` on the simplex the largest feasible multiple is
/// `1/λ_max(Σ w_ν A_ν)`, so the search runs over `w` alone: a pairwise
/// mass-transfer pattern search with halving steps. Each weight keeps a
/// floor of `1e-6` so every conclusive element stays present.
pub fn minimize_inconclusive(s: &Scenario, directions: &[ConfidenceDirection]) -> Result<InconclusiveSolution> {
    let n = directions.len();
    if n == 0 {
        return Err(Error::invalid("directions", "empty list"));
    }
    let avg = s.average_state();
    let mass: Vec<f64> = directions.iter().map(|d| avg.trace_product(&d.element)).collect();
    let dim = s.dim();
    let objective = |w: &[f64]| -> (f64, f64) {
        let combo = crate::linalg::sum(
            dim,
            &directions
                .iter()
                .zip(w)
                .map(|(d, &x)| d.element.scale(x))
                .collect::<Vec<_>>(),
        );
        let t = 1.0 / combo.max_eigenvalue();
        let value = t * w.iter().zip(&mass).map(|(x, c)| x * c).sum::<f64>();
        (value, t)
    };

    let mut w = vec![1.0 / n as f64; n];
    let mut best = objective(&w).0;
    let mut step: f64 = 0.25;
    while step > 1e-12 {
        let mut improved = false;
        for from in 0..n {
            for to in 0..n {
                if from == to {
                    continue;
                }
                let delta = step.min(w[from] - WEIGHT_FLOOR);
                if delta <= 0.0 {
                    continue;
                }
                let mut trial = w.clone();
                trial[from] -= delta;
                trial[to] += delta;
                let v = objective(&trial).0;
                if v > best {
                    best = v;
                    w = trial;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    let (_, t) = objective(&w);
    let scales: Vec<f64> = w.iter().map(|x| x * t).collect();
    let elements: Vec<Hermitian> = directions.iter().map(|d| d.element.clone()).collect();
    let povm = assemble_max_confidence_povm(&elements, &scales)?;
    let total_confidence = directions.iter().map(|d| d.confidence).sum();
    let conclusive_probability = scales.iter().zip(&mass).map(|(x, c)| x * c).sum();
    Ok(InconclusiveSolution {
        povm,
        scales,
        total_confidence,
        conclusive_probability,
    })
}
