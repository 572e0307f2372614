//! Minimum-error discrimination of two states.

use crate::error::{Error, Result};
use crate::linalg::{spectral_decomposition, Hermitian};
use crate::scenario::{Povm, Scenario};

#[derive(Clone, Debug)]
pub struct TwoStateSolution {
    /// `(P₊, I − P₊)` where `P₊` projects onto the positive part of
    /// `q₁ρ₁ − q₂ρ₂`.
    pub povm: Povm,
    /// `½(1 + ‖q₁ρ₁ − q₂ρ₂‖₁)`.
    pub success_probability: f64,
}

pub fn two_state_optimal(s: &Scenario) -> Result<TwoStateSolution> {
    if s.len() != 2 {
        return Err(Error::NotApplicable(format!(
            "two-state solver needs exactly 2 messages, got {}",
            s.len()
        )));
    }
    let gap = &s.weighted_state(0) - &s.weighted_state(1);
    let spectrum = spectral_decomposition(&gap);
    let positive = spectrum.projector_where(|l| l > 0.0);
    let rest = &Hermitian::identity(s.dim()) - &positive;
    let trace_norm: f64 = spectrum.eigenvalues.iter().map(|l| l.abs()).sum();
    Ok(TwoStateSolution {
        povm: Povm::new(vec![positive, rest])?,
        success_probability: 0.5 * (1.0 + trace_norm),
    })
}
