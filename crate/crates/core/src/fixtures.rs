//! Worked examples used by tests, the acceptance suite and the CLI.
//!
//! * `example1`: two qutrit states with equal priors,
//!   `ρ₁ = (|0⟩⟨0| + |1⟩⟨1|)/2` and `ρ₂ = |+⟩⟨+|` with
//!   `|±⟩ = (|1⟩ ± |2⟩)/√2`.
//! * `fig1`: a biased qubit alphabet, `ρ₁ = diag(5/6, 1/6)`, `ρ₂ = |+⟩⟨+|`,
//!   priors `(0.85, 0.15)`.

use crate::linalg::{ComplexVector, Hermitian, C64};
use crate::scenario::{DensityMatrix, Povm, Scenario};
use crate::error::Result;

fn ket(entries: &[f64]) -> ComplexVector {
    ComplexVector::from_iterator(entries.len(), entries.iter().map(|&x| C64::new(x, 0.0)))
}

fn qutrit_minus() -> ComplexVector {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    ket(&[0.0, r, -r])
}

pub fn example1() -> Scenario {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let rho1 = DensityMatrix::new(Hermitian::diagonal(&[0.5, 0.5, 0.0])).unwrap();
    let rho2 = DensityMatrix::pure(&ket(&[0.0, r, r])).unwrap();
    Scenario::new(vec![rho1, rho2], vec![0.5, 0.5]).unwrap()
}

/// Unscaled conclusive directions `(|−⟩⟨−|, |2⟩⟨2|)` of the rescaling family.
pub fn example1_directions() -> Vec<Hermitian> {
    vec![
        Hermitian::projector(&qutrit_minus()),
        Hermitian::diagonal(&[0.0, 0.0, 1.0]),
    ]
}

/// The rescaling family `(a₁|−⟩⟨−|, a₂|2⟩⟨2|, A₀)`; fails when `A₀` is not PSD.
pub fn example1_povm_a(a1: f64, a2: f64) -> Result<Povm> {
    let dirs = example1_directions();
    let a1m = dirs[0].scale(a1);
    let a2m = dirs[1].scale(a2);
    let a0 = &(&Hermitian::identity(3) - &a1m) - &a2m;
    Povm::new(vec![a1m, a2m, a0])
}

/// Largest admissible `a₂` for a given `a₁`: `(2 − 2a₁)/(2 − a₁)`.
pub fn example1_a2_bound(a1: f64) -> f64 {
    (2.0 - 2.0 * a1) / (2.0 - a1)
}

/// The projective measurement `(|0⟩⟨0|, |2⟩⟨2|, |1⟩⟨1|)`.
pub fn example1_povm_b() -> Povm {
    Povm::new(vec![
        Hermitian::diagonal(&[1.0, 0.0, 0.0]),
        Hermitian::diagonal(&[0.0, 0.0, 1.0]),
        Hermitian::diagonal(&[0.0, 1.0, 0.0]),
    ])
    .unwrap()
}

pub fn fig1() -> Scenario {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let rho1 = DensityMatrix::new(Hermitian::diagonal(&[5.0 / 6.0, 1.0 / 6.0])).unwrap();
    let rho2 = DensityMatrix::pure(&ket(&[r, r])).unwrap();
    Scenario::new(vec![rho1, rho2], vec![0.85, 0.15]).unwrap()
}

/// `{|0⟩⟨0|, |1⟩⟨1|}`.
pub fn fig1_povm() -> Povm {
    Povm::computational(2)
}

/// `{|0⟩, |1⟩}` with uniform priors.
pub fn orthogonal_pair() -> Scenario {
    let rho0 = DensityMatrix::new(Hermitian::diagonal(&[1.0, 0.0])).unwrap();
    let rho1 = DensityMatrix::new(Hermitian::diagonal(&[0.0, 1.0])).unwrap();
    Scenario::new(vec![rho0, rho1], vec![0.5, 0.5]).unwrap()
}

/// Two copies of the same qubit state with the given priors.
pub fn identical_pair(q1: f64) -> Scenario {
    let rho = DensityMatrix::new(Hermitian::from_real(2, &[0.7, 0.2, 0.2, 0.3]).unwrap()).unwrap();
    Scenario::new(vec![rho.clone(), rho], vec![q1, 1.0 - q1]).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a_family_feasibility_boundary() {
        for &a1 in &[0.0, 0.25, 0.5, 1.0] {
            let a2 = example1_a2_bound(a1);
            assert!(example1_povm_a(a1, a2).is_ok(), "a1={a1}");
            assert!(example1_povm_a(a1, a2 + 1e-3).is_err(), "a1={a1}");
        }
        assert!(example1_povm_a(1.01, 0.0).is_err());
    }
}
