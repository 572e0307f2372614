//! Dense complex Hermitian matrices, positivity checks and spectral
//! decompositions.
//!
//! Everything downstream (states, POVM elements, whitening operators) is a
//! [`Hermitian`]. Construction validates the Hermitian property within
//! [`HERMITIAN_TOL`] per entry and then stores the exactly symmetrized
//! matrix `(M + M†)/2`, so later eigen-solves see an exactly Hermitian input.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::ops::{Add, Sub};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Absolute per-entry tolerance for the Hermitian check.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Default relative tolerance for positivity checks.
pub const PSD_TOL: f64 = 1e-10;

/// A square complex matrix equal to its conjugate transpose.
#[derive(Clone, Debug, PartialEq)]
pub struct Hermitian(ComplexMatrix);

impl Hermitian {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let (rows, cols) = m.shape();
        if rows != cols || rows == 0 {
            return Err(Error::NotSquare { rows, cols });
        }
        for i in 0..rows {
            for j in i..cols {
                let deviation = (m[(i, j)] - m[(j, i)].conj()).norm();
                if deviation > HERMITIAN_TOL {
                    return Err(Error::NotHermitian {
                        row: i,
                        col: j,
                        deviation,
                    });
                }
            }
        }
        Ok(Self::symmetrized(m))
    }

    fn symmetrized(m: ComplexMatrix) -> Self {
        let adj = m.adjoint();
        Hermitian((m + adj).scale(0.5))
    }

    /// Builds a Hermitian matrix from real row-major entries.
    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Self::new(ComplexMatrix::from_row_iterator(
            dim,
            dim,
            entries.iter().map(|&x| C64::new(x, 0.0)),
        ))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let d = values.len();
        let mut m = ComplexMatrix::zeros(d, d);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        Hermitian(m)
    }

    pub fn identity(dim: usize) -> Self {
        Hermitian(ComplexMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Hermitian(ComplexMatrix::zeros(dim, dim))
    }

    /// The outer product `|v⟩⟨v|` (not normalized).
    pub fn outer(v: &ComplexVector) -> Self {
        Hermitian::symmetrized(v * v.adjoint())
    }

    /// Projector onto the normalized vector `v`.
    pub fn projector(v: &ComplexVector) -> Self {
        let n = v.norm();
        Hermitian::outer(&v.unscale(n))
    }

    /// `M†M` for an arbitrary (possibly rectangular) matrix.
    pub fn gram(m: &ComplexMatrix) -> Self {
        Hermitian::symmetrized(m.adjoint() * m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_inner(self) -> ComplexMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.0[(i, i)].re).sum()
    }

    /// `Re tr(self · other)`, exact for Hermitian pairs.
    pub fn trace_product(&self, other: &Hermitian) -> f64 {
        let d = self.dim();
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                acc += (self.0[(i, j)] * other.0[(j, i)]).re;
            }
        }
        acc
    }

    pub fn scale(&self, factor: f64) -> Hermitian {
        Hermitian(self.0.scale(factor))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_norm(&self) -> f64 {
        let s = spectral_decomposition(self);
        s.eigenvalues
            .iter()
            .fold(0.0_f64, |acc, &l| acc.max(l.abs()))
    }

    pub fn max_eigenvalue(&self) -> f64 {
        spectral_decomposition(self).eigenvalues[0]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *spectral_decomposition(self).eigenvalues.last().unwrap()
    }

    /// Sum of absolute eigenvalues.
    pub fn trace_norm(&self) -> f64 {
        spectral_decomposition(self)
            .eigenvalues
            .iter()
            .map(|l| l.abs())
            .sum()
    }

    /// `W · self · W` for Hermitian `W`.
    pub fn sandwich(&self, w: &Hermitian) -> Hermitian {
        Hermitian::symmetrized(&w.0 * &self.0 * &w.0)
    }

    /// Frobenius distance to `other`.
    pub fn distance(&self, other: &Hermitian) -> f64 {
        (&self.0 - &other.0).norm()
    }
}

impl Add for &Hermitian {
    type Output = Hermitian;
    fn add(self, rhs: &Hermitian) -> Hermitian {
        Hermitian(&self.0 + &rhs.0)
    }
}

impl Sub for &Hermitian {
    type Output = Hermitian;
    fn sub(self, rhs: &Hermitian) -> Hermitian {
        Hermitian(&self.0 - &rhs.0)
    }
}

/// Sum of a non-empty collection of equally sized matrices.
pub fn sum<'a>(dim: usize, items: impl IntoIterator<Item = &'a Hermitian>) -> Hermitian {
    let mut acc = ComplexMatrix::zeros(dim, dim);
    for h in items {
        acc += &h.0;
    }
    Hermitian(acc)
}

/// Eigen-decomposition of a Hermitian matrix.
///
/// Eigenvalues are sorted descending. Each eigenvector column has its first
/// component of modulus above `1e-12` made real and positive.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl Spectrum {
    pub fn vector(&self, j: usize) -> ComplexVector {
        self.eigenvectors.column(j).into_owned()
    }

    /// `Σ_j f(λ_j) |v_j⟩⟨v_j|`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Hermitian {
        let d = self.eigenvectors.nrows();
        let mut acc = ComplexMatrix::zeros(d, d);
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            let w = f(l);
            if w != 0.0 {
                let v = self.eigenvectors.column(j);
                acc += (v * v.adjoint()).scale(w);
            }
        }
        Hermitian::symmetrized(acc)
    }

    pub fn reconstruct(&self) -> Hermitian {
        self.map(|l| l)
    }

    /// Projector onto the span of eigenvectors whose eigenvalue satisfies `keep`.
    pub fn projector_where(&self, keep: impl Fn(f64) -> bool) -> Hermitian {
        self.map(|l| if keep(l) { 1.0 } else { 0.0 })
    }
}

pub fn spectral_decomposition(m: &Hermitian) -> Spectrum {
    let d = m.dim();
    let eig = m.0.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut vectors = ComplexMatrix::zeros(d, d);
    let mut values = Vec::with_capacity(d);
    for (col, &src) in order.iter().enumerate() {
        values.push(eig.eigenvalues[src]);
        let mut v = eig.eigenvectors.column(src).into_owned();
        let norm = v.norm();
        if norm > 0.0 {
            v.unscale_mut(norm);
        }
        if let Some(lead) = v.iter().find(|c| c.norm() > 1e-12).copied() {
            let phase = lead.conj() / lead.norm();
            v *= phase;
        }
        vectors.set_column(col, &v);
    }
    Spectrum {
        eigenvalues: values,
        eigenvectors: vectors,
    }
}

/// True iff the smallest eigenvalue is at least `-tol · max(1, ‖M‖₂)`.
pub fn is_psd(m: &Hermitian, tol: f64) -> bool {
    let s = spectral_decomposition(m);
    let norm = s.eigenvalues[0].abs().max(s.eigenvalues[s.eigenvalues.len() - 1].abs());
    *s.eigenvalues.last().unwrap() >= -tol * norm.max(1.0)
}

/// Pseudo-inverse square root `Σ_{λ>tol} λ^{-1/2} |v⟩⟨v|`.
pub fn pinv_sqrt(m: &Hermitian, tol: f64) -> Result<Hermitian> {
    let s = spectral_decomposition(m);
    let min = *s.eigenvalues.last().unwrap();
    if min < -tol {
        return Err(Error::NotPsd {
            what: "operator passed to pinv_sqrt".into(),
            min_eigenvalue: min,
        });
    }
    Ok(s.map(|l| if l > tol { 1.0 / l.sqrt() } else { 0.0 }))
}
