//! Independent oracles shared by the integration tests. They work from the
//! raw joint probability table or from first principles, never from the
//! library's own optimizers.

#![allow(dead_code)]

use bedqsd::linalg::{ComplexVector, Hermitian, C64};
use bedqsd::{ProbabilityTable, Scenario};

/// Every strategy over `messages + 1` decisions (0 = inconclusive) as plain
/// index vectors.
pub fn all_assignments(outcomes: usize, messages: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..outcomes {
        let mut next = Vec::new();
        for prefix in &out {
            for d in 0..=messages {
                let mut p = prefix.clone();
                p.push(d);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// `Σ_y p(N_{Γ(y)}, y)` computed straight from the joint table.
pub fn success_of(table: &ProbabilityTable, assignment: &[usize]) -> f64 {
    assignment
        .iter()
        .enumerate()
        .filter(|(_, &d)| d > 0)
        .map(|(y, &d)| table.joint(y, d - 1))
        .sum()
}

/// `Σ_k p(N_k | D_k)` over decisions with nonzero probability.
pub fn confidence_of(table: &ProbabilityTable, assignment: &[usize]) -> f64 {
    let mut total = 0.0;
    for k in 1..=table.messages() {
        let mut hit = 0.0;
        let mut mass = 0.0;
        for (y, &d) in assignment.iter().enumerate() {
            if d == k {
                hit += table.joint(y, k - 1);
                mass += (0..table.messages()).map(|nu| table.joint(y, nu)).sum::<f64>();
            }
        }
        if mass > 1e-14 {
            total += hit / mass;
        }
    }
    total
}

pub fn brute_force_success(table: &ProbabilityTable) -> f64 {
    all_assignments(table.outcomes(), table.messages())
        .iter()
        .map(|a| success_of(table, a))
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn brute_force_confidence(table: &ProbabilityTable) -> f64 {
    all_assignments(table.outcomes(), table.messages())
        .iter()
        .map(|a| confidence_of(table, a))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn bloch_projector(theta: f64, phi: f64) -> Hermitian {
    let v = ComplexVector::from_vec(vec![
        C64::new((theta / 2.0).cos(), 0.0),
        C64::from_polar((theta / 2.0).sin(), phi),
    ]);
    Hermitian::outer(&v)
}

/// Best minimum-error success of the two-outcome projective measurement
/// along a Bloch direction: each outcome goes to its larger joint term.
fn projective_value(s: &Scenario, p: &Hermitian) -> f64 {
    let q = s.priors();
    let (r0, r1) = (s.state(0).matrix(), s.state(1).matrix());
    let a0 = q[0] * r0.trace_product(p);
    let a1 = q[1] * r1.trace_product(p);
    let b0 = q[0] - a0;
    let b1 = q[1] - a1;
    a0.max(a1) + b0.max(b1)
}

/// Grid search over qubit projective measurements: a 100 x 100 grid in
/// `(θ, φ)` over the sphere, then `levels` further 100 x 100 grids, each
/// centred on the previous best point with a window shrunk 25-fold.
pub fn projective_grid_value(s: &Scenario, levels: usize) -> f64 {
    const N: usize = 100;
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    let (mut theta_lo, mut theta_hi) = (0.0, std::f64::consts::PI);
    let (mut phi_lo, mut phi_hi) = (0.0, 2.0 * std::f64::consts::PI);
    for _ in 0..=levels {
        for i in 0..N {
            let theta = theta_lo + (theta_hi - theta_lo) * i as f64 / (N - 1) as f64;
            for j in 0..N {
                let phi = phi_lo + (phi_hi - phi_lo) * j as f64 / (N - 1) as f64;
                let v = projective_value(s, &bloch_projector(theta, phi));
                if v > best.0 {
                    best = (v, theta, phi);
                }
            }
        }
        let half_theta = (theta_hi - theta_lo) / 25.0;
        let half_phi = (phi_hi - phi_lo) / 25.0;
        theta_lo = best.1 - half_theta;
        theta_hi = best.1 + half_theta;
        phi_lo = best.2 - half_phi;
        phi_hi = best.2 + half_phi;
    }
    best.0
}
