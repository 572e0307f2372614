//! Post-processing of measurements by stochastic maps and rank-1 refinement.

use crate::error::{Error, Result};
use crate::linalg::{self, spectral_decomposition, Hermitian};
use crate::scenario::Povm;

const COLUMN_SUM_TOL: f64 = 1e-12;
const EIGENVALUE_DROP: f64 = 1e-12;

/// Column-stochastic matrix `p(β_i | α_j)`: rows are output outcomes,
/// columns are input outcomes.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticMap {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl StochasticMap {
    /// Builds a map from row-major entries, `entries[i][j] = p(β_i | α_j)`.
    pub fn new(entries: Vec<Vec<f64>>) -> Result<Self> {
        let rows = entries.len();
        let cols = entries.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("stochastic map", "empty matrix"));
        }
        if let Some(i) = entries.iter().position(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch(format!(
                "stochastic map row {i} has {} entries, expected {cols}",
                entries[i].len()
            )));
        }
        let flat: Vec<f64> = entries.into_iter().flatten().collect();
        Self::from_flat(rows, cols, flat)
    }

    fn from_flat(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        for (k, &p) in entries.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(
                    "stochastic map",
                    format!("entry ({}, {}) = {p} is outside [0, 1]", k / cols, k % cols),
                ));
            }
        }
        for j in 0..cols {
            let sum: f64 = (0..rows).map(|i| entries[i * cols + j]).sum();
            if (sum - 1.0).abs() > COLUMN_SUM_TOL {
                return Err(Error::invalid(
                    "stochastic map",
                    format!("column {j} sums to {sum}"),
                ));
            }
        }
        Ok(StochasticMap {
            rows,
            cols,
            entries,
        })
    }

    pub fn identity(m: usize) -> Self {
        Self::coarse_graining(&(0..m).collect::<Vec<_>>(), m).expect("identity is stochastic")
    }

    /// Deterministic map sending input `j` to output `targets[j]`.
    pub fn coarse_graining(targets: &[usize], outputs: usize) -> Result<Self> {
        let cols = targets.len();
        let mut entries = vec![0.0; outputs * cols];
        for (j, &t) in targets.iter().enumerate() {
            if t >= outputs {
                return Err(Error::IndexOutOfRange {
                    what: "output outcome",
                    index: t,
                    size: outputs,
                });
            }
            entries[t * cols + j] = 1.0;
        }
        Self::from_flat(outputs, cols, entries)
    }

    pub fn outputs(&self) -> usize {
        self.rows
    }

    pub fn inputs(&self) -> usize {
        self.cols
    }

    pub fn get(&self, output: usize, input: usize) -> f64 {
        self.entries[output * self.cols + input]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    /// The map `after ∘ self` (apply `self` first).
    pub fn then(&self, after: &StochasticMap) -> Result<StochasticMap> {
        if after.cols != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose a map with {} outputs into one with {} inputs",
                self.rows, after.cols
            )));
        }
        let mut entries = vec![0.0; after.rows * self.cols];
        for i in 0..after.rows {
            for j in 0..self.cols {
                entries[i * self.cols + j] =
                    (0..self.rows).map(|k| after.get(i, k) * self.get(k, j)).sum();
            }
        }
        // Renormalize columns against accumulated rounding.
        for j in 0..self.cols {
            let sum: f64 = (0..after.rows).map(|i| entries[i * self.cols + j]).sum();
            for i in 0..after.rows {
                entries[i * self.cols + j] = (entries[i * self.cols + j] / sum).clamp(0.0, 1.0);
            }
        }
        Self::from_flat(after.rows, self.cols, entries)
    }
}

/// `B_i = Σ_j p(β_i | α_j) A_j`.
pub fn post_process(e: &Povm, t: &StochasticMap) -> Result<Povm> {
    if t.inputs() != e.len() {
        return Err(Error::DimensionMismatch(format!(
            "map takes {} input outcomes, POVM has {}",
            t.inputs(),
            e.len()
        )));
    }
    let dim = e.dim();
    let elements = (0..t.outputs())
        .map(|i| {
            let mut acc = Hermitian::zeros(dim);
            for (j, a) in e.elements().iter().enumerate() {
                let p = t.get(i, j);
                if p != 0.0 {
                    acc = &acc + &a.scale(p);
                }
            }
            acc
        })
        .collect();
    Povm::new(elements)
}

/// A rank-1 refinement together with the outcome each element came from.
#[derive(Clone, Debug)]
pub struct Rank1Refinement {
    pub povm: Povm,
    pub origins: Vec<usize>,
    source_outcomes: usize,
}

impl Rank1Refinement {
    /// The coarse-graining that maps the refinement back onto the source POVM.
    pub fn origin_map(&self) -> StochasticMap {
        StochasticMap::coarse_graining(&self.origins, self.source_outcomes)
            .expect("origins index the source POVM")
    }
}

/// Splits every element into `λ_j |v_j⟩⟨v_j|` terms, dropping eigenvalues
/// below `1e-12`.
pub fn rank1_refine(e: &Povm) -> Result<Rank1Refinement> {
    let mut elements = Vec::new();
    let mut origins = Vec::new();
    for (y, a) in e.elements().iter().enumerate() {
        let spectrum = spectral_decomposition(a);
        for (k, &l) in spectrum.eigenvalues.iter().enumerate() {
            if l > EIGENVALUE_DROP {
                elements.push(Hermitian::outer(&spectrum.vector(k)).scale(l));
                origins.push(y);
            }
        }
    }
    if elements.is_empty() {
        return Err(Error::invalid("POVM", "every element is zero"));
    }
    let povm = Povm::new(elements)?;
    Ok(Rank1Refinement {
        povm,
        origins,
        source_outcomes: e.len(),
    })
}

/// Frobenius distance between corresponding elements, maximized over outcomes.
pub fn povm_distance(a: &Povm, b: &Povm) -> Result<f64> {
    if a.len() != b.len() || a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "POVMs have shapes {}x{} and {}x{}",
            a.len(),
            a.dim(),
            b.len(),
            b.dim()
        )));
    }
    Ok(a.elements()
        .iter()
        .zip(b.elements())
        .map(|(x, y)| x.distance(y))
        .fold(0.0, f64::max))
}

/// Sum of the elements, for completeness checks.
pub fn element_sum(e: &Povm) -> Hermitian {
    linalg::sum(e.dim(), e.elements())
}
