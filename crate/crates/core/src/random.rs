//! Seeded samplers for states, priors, POVMs and stochastic maps.
//!
//! Pure states are normalized complex Gaussian vectors. Mixed states are
//! `G G† / tr(G G†)` for a complex Gaussian `G`, the reduced state of a
//! Haar-random pure state on a doubled system. Priors and map columns come
//! from a symmetric Dirichlet(1).

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Exp1, StandardNormal};

use crate::error::Result;
use crate::linalg::{pinv_sqrt, ComplexMatrix, ComplexVector, Hermitian, C64};
use crate::scenario::{DensityMatrix, Povm, Scenario};
use crate::transforms::StochasticMap;

/// Deterministic generator for a `(seed, index)` pair.
pub fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(sub_seed(seed, index))
}

/// SplitMix64 mix of a base seed and a stream index.
pub fn sub_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian_complex(rng))
}

pub fn random_ket<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexVector {
    let v = ComplexVector::from_fn(dim, |_, _| gaussian_complex(rng));
    let norm = v.norm();
    v.unscale(norm)
}

pub fn random_pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityMatrix {
    DensityMatrix::pure(&random_ket(dim, rng)).expect("normalized ket")
}

pub fn random_mixed_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityMatrix {
    let g = gaussian_matrix(dim, dim, rng);
    let w = Hermitian::gram(&g.adjoint());
    let t = w.trace();
    DensityMatrix::new(w.scale(1.0 / t)).expect("normalized Gram matrix")
}

/// Pure or mixed with equal probability.
pub fn random_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityMatrix {
    if rng.random_bool(0.5) {
        random_pure_state(dim, rng)
    } else {
        random_mixed_state(dim, rng)
    }
}

/// Symmetric Dirichlet(1) sample; components below `1e-6` are resampled.
pub fn random_simplex<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..len).map(|_| Exp1.sample(rng)).collect();
        let total: f64 = x.iter().sum();
        let p: Vec<f64> = x.iter().map(|v| v / total).collect();
        if p.iter().all(|&v| v >= 1e-6) {
            return p;
        }
    }
}

pub fn random_scenario<R: Rng + ?Sized>(dim: usize, messages: usize, rng: &mut R) -> Scenario {
    let states = (0..messages).map(|_| random_state(dim, rng)).collect();
    let priors = random_simplex(messages, rng);
    Scenario::new(states, priors).expect("sampled scenario is valid")
}

/// `A_y = S^{-1/2} M_y† M_y S^{-1/2}` with `S = Σ_j M_j† M_j`.
///
/// Any factors whose Gram sum has full rank give a valid POVM.
pub fn povm_from_factors(factors: &[ComplexMatrix]) -> Result<Povm> {
    let grams: Vec<Hermitian> = factors.iter().map(Hermitian::gram).collect();
    let dim = grams[0].dim();
    let s = crate::linalg::sum(dim, &grams);
    let w = pinv_sqrt(&s, 1e-13 * s.max_eigenvalue().max(1e-300))?;
    Povm::new(grams.iter().map(|g| g.sandwich(&w)).collect())
}

/// Random POVM with `outcomes` elements of rank at most `rank`.
///
/// The rank is raised to `⌈dim / outcomes⌉` when needed so that the
/// elements can span the space.
pub fn random_povm_with_rank<R: Rng + ?Sized>(
    dim: usize,
    outcomes: usize,
    rank: usize,
    rng: &mut R,
) -> Povm {
    let rank = rank.max(dim.div_ceil(outcomes)).min(dim);
    loop {
        let factors: Vec<ComplexMatrix> =
            (0..outcomes).map(|_| gaussian_matrix(rank, dim, rng)).collect();
        if let Ok(p) = povm_from_factors(&factors) {
            return p;
        }
    }
}

/// Random POVM with a uniformly chosen admissible element rank.
pub fn random_povm<R: Rng + ?Sized>(dim: usize, outcomes: usize, rng: &mut R) -> Povm {
    let min_rank = dim.div_ceil(outcomes);
    let rank = rng.random_range(min_rank..=dim);
    random_povm_with_rank(dim, outcomes, rank, rng)
}

/// Each column is either a Dirichlet(1) sample or a random one-hot vector.
pub fn random_stochastic_map<R: Rng + ?Sized>(
    outputs: usize,
    inputs: usize,
    rng: &mut R,
) -> StochasticMap {
    let columns: Vec<Vec<f64>> = (0..inputs)
        .map(|_| {
            if rng.random_bool(0.5) {
                let mut c = vec![0.0; outputs];
                c[rng.random_range(0..outputs)] = 1.0;
                c
            } else {
                random_simplex(outputs, rng)
            }
        })
        .collect();
    let rows = (0..outputs)
        .map(|i| columns.iter().map(|c| c[i]).collect())
        .collect();
    StochasticMap::new(rows).expect("sampled map is stochastic")
}

/// Splits a random nonzero element `A_k` into `t A_k` and `(1 − t) A_k`,
/// appending the second part. Returns the new POVM and the pair `(k, m)`.
pub fn inject_proportional_pair<R: Rng + ?Sized>(e: &Povm, rng: &mut R) -> (Povm, usize, usize) {
    let candidates: Vec<usize> = (0..e.len())
        .filter(|&k| e.element(k).frobenius_norm() > 1e-6)
        .collect();
    let k = candidates[rng.random_range(0..candidates.len())];
    let t = rng.random_range(0.2..0.8);
    let mut elements = e.elements().to_vec();
    let a = elements[k].clone();
    elements[k] = a.scale(t);
    elements.push(a.scale(1.0 - t));
    let m = elements.len() - 1;
    (Povm::new(elements).expect("splitting keeps completeness"), k, m)
}
