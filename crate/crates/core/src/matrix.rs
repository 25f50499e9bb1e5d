//! Dense symmetric positive definite matrices and the operator means built
//! on their spectral decomposition.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};

/// Relative tolerance for Loewner-order comparisons.
pub const DEFAULT_LOEWNER_TOL: f64 = 1e-9;

/// Relative asymmetry accepted on input.
pub const SYMMETRY_TOL: f64 = 1e-12;

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub(crate) fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn check_symmetric(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Shape(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric(format!("{what} has non-finite entries")));
    }
    let asym = max_abs(&(m - m.transpose()));
    if asym > SYMMETRY_TOL * max_abs(m).max(1.0) {
        return Err(Error::Shape(format!(
            "{what} is not symmetric (max asymmetry {asym:e})"
        )));
    }
    Ok(())
}

/// Eigenvalues in descending order with matching eigenvector columns.
fn sorted_eigen(m: DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numeric("symmetric eigendecomposition did not converge".into()))?;
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    symmetrize(m)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// A real symmetric positive definite matrix with its spectral decomposition
/// computed once at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix {
    entries: DMatrix<f64>,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

impl SpdMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        check_symmetric(&entries, "matrix")?;
        if entries.nrows() == 0 {
            return Err(Error::Shape("matrix must have dimension >= 1".into()));
        }
        let entries = symmetrize(&entries);
        let (eigenvalues, eigenvectors) = sorted_eigen(entries.clone())?;
        let min = eigenvalues[eigenvalues.len() - 1];
        if min <= 0.0 {
            return Err(Error::Domain(format!(
                "matrix is not positive definite (smallest eigenvalue {min:e})"
            )));
        }
        Ok(SpdMatrix {
            entries,
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Shape("rows must form a square matrix".into()));
        }
        SpdMatrix::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        SpdMatrix::new(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn identity(n: usize) -> Self {
        SpdMatrix::scaled_identity(n, 1.0).expect("identity is SPD")
    }

    pub fn scaled_identity(n: usize, c: f64) -> Result<Self> {
        SpdMatrix::new(DMatrix::identity(n, n) * c)
    }

    /// Composes `U diag(values) U^T`. `vectors` must be orthogonal; its
    /// columns are reordered together with `values` into descending order.
    pub fn from_spectrum(values: &[f64], vectors: &DMatrix<f64>) -> Result<Self> {
        let n = values.len();
        if vectors.nrows() != n || vectors.ncols() != n {
            return Err(Error::Shape(format!(
                "{n} eigenvalues need an {n}x{n} eigenvector matrix"
            )));
        }
        if values.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
            return Err(Error::Domain(
                "eigenvalues must be finite and positive".into(),
            ));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
        let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| values[i]));
        let eigenvectors = DMatrix::from_fn(n, n, |r, c| vectors[(r, order[c])]);
        let entries = compose(&eigenvectors, eigenvalues.iter().copied());
        Ok(SpdMatrix {
            entries,
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Eigenvalues, largest first.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.dim() - 1]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Real power `A^t = U diag(lambda^t) U^T`.
    pub fn pow(&self, t: f64) -> Result<SpdMatrix> {
        let values: Vec<f64> = self.eigenvalues.iter().map(|l| l.powf(t)).collect();
        if values.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::Numeric(format!(
                "power {t} leaves the representable positive range"
            )));
        }
        SpdMatrix::from_spectrum(&values, &self.eigenvectors)
    }

    /// `T^T A T`
    pub fn congruence(&self, t: &DMatrix<f64>) -> Result<SpdMatrix> {
        SpdMatrix::new(symmetrize(&(t.transpose() * &self.entries * t)))
    }
}

fn compose(vectors: &DMatrix<f64>, values: impl Iterator<Item = f64>) -> DMatrix<f64> {
    let mut scaled = vectors.clone();
    for (mut col, x) in scaled.column_iter_mut().zip(values) {
        col *= x;
    }
    symmetrize(&(scaled * vectors.transpose()))
}

/// `A^t` for SPD `A`.
pub fn frac_power(a: &SpdMatrix, t: f64) -> Result<SpdMatrix> {
    a.pow(t)
}

fn same_dim(a: &SpdMatrix, b: &SpdMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::Shape(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

/// `(1 - v) A + v B`
pub fn arithmetic_mean(a: &SpdMatrix, b: &SpdMatrix, v: f64) -> DMatrix<f64> {
    a.entries() * (1.0 - v) + b.entries() * v
}

/// The weighted geometric means `A #_t B = A^{1/2} (A^{-1/2} B A^{-1/2})^t A^{1/2}`
/// of one pair for many `t`, sharing one decomposition of the middle factor.
#[derive(Debug, Clone)]
pub struct GeometricPath {
    a_half: DMatrix<f64>,
    x: SpdMatrix,
}

impl GeometricPath {
    pub fn new(a: &SpdMatrix, b: &SpdMatrix) -> Result<Self> {
        same_dim(a, b)?;
        let a_half = a.pow(0.5)?.entries().clone();
        let a_inv_half = a.pow(-0.5)?;
        let x = symmetrize(&(a_inv_half.entries() * b.entries() * a_inv_half.entries()));
        Ok(GeometricPath {
            a_half,
            x: SpdMatrix::new(x)?,
        })
    }

    /// `X = A^{-1/2} B A^{-1/2}`
    pub fn middle(&self) -> &SpdMatrix {
        &self.x
    }

    /// `A #_t B`
    pub fn sharp(&self, t: f64) -> Result<DMatrix<f64>> {
        self.apply(|x| x.powf(t))
    }

    /// `A^{1/2} f(X) A^{1/2}` for a positive function `f` of the spectrum of `X`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> Result<DMatrix<f64>> {
        let values: Vec<f64> = self.x.eigenvalues().iter().map(|&x| f(x)).collect();
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numeric("spectral function is not finite".into()));
        }
        let fx = compose(self.x.eigenvectors(), values.into_iter());
        Ok(symmetrize(&(&self.a_half * fx * &self.a_half)))
    }
}

#[derive(Debug, Clone)]
pub struct WeightedMeans {
    /// `(1 - v) A + v B`
    pub nabla: SpdMatrix,
    /// `A #_v B`
    pub sharp: SpdMatrix,
    /// `(A #_v B + A #_{1-v} B) / 2`
    pub heinz: SpdMatrix,
}

/// Weighted arithmetic, geometric and Heinz means of an SPD pair, `v` in `[0, 1]`.
pub fn weighted_means(a: &SpdMatrix, b: &SpdMatrix, v: f64) -> Result<WeightedMeans> {
    same_dim(a, b)?;
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Domain(format!("weight must lie in [0, 1], got {v}")));
    }
    let path = GeometricPath::new(a, b)?;
    let sharp = path.sharp(v)?;
    let heinz = (&sharp + path.sharp(1.0 - v)?) * 0.5;
    Ok(WeightedMeans {
        nabla: SpdMatrix::new(arithmetic_mean(a, b, v))?,
        sharp: SpdMatrix::new(sharp)?,
        heinz: SpdMatrix::new(symmetrize(&heinz))?,
    })
}

/// Outcome of testing `P <= Q` in the Loewner order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LoewnerVerdict {
    pub holds: bool,
    /// Smallest eigenvalue of `Q - P`.
    pub min_eig: f64,
    pub tol_used: f64,
    /// `max(1, |P|, |Q|)`, the magnitude the tolerance is relative to.
    pub scale: f64,
}

impl LoewnerVerdict {
    pub fn relative(&self) -> f64 {
        self.min_eig / self.scale
    }
}

/// Tests `P <= Q`, i.e. `Q - P` positive semidefinite, up to
/// `tol_rel * max(1, |P|_F, |Q|_F)`.
pub fn loewner_leq(p: &DMatrix<f64>, q: &DMatrix<f64>, tol_rel: f64) -> Result<LoewnerVerdict> {
    if p.shape() != q.shape() {
        return Err(Error::Shape(format!(
            "dimension mismatch: {:?} vs {:?}",
            p.shape(),
            q.shape()
        )));
    }
    check_symmetric(p, "left operand")?;
    check_symmetric(q, "right operand")?;
    let scale = p.norm().max(q.norm()).max(1.0);
    let tol_used = tol_rel * scale;
    let min_eig = min_eigenvalue(&(q - p));
    Ok(LoewnerVerdict {
        holds: min_eig >= -tol_used,
        min_eig,
        tol_used,
        scale,
    })
}

/// [`loewner_leq`] for scalars, i.e. 1x1 matrices.
pub fn scalar_leq(p: f64, q: f64, tol_rel: f64) -> LoewnerVerdict {
    let scale = p.abs().max(q.abs()).max(1.0);
    let tol_used = tol_rel * scale;
    let min_eig = q - p;
    LoewnerVerdict {
        holds: min_eig >= -tol_used,
        min_eig,
        tol_used,
        scale,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Orientation {
    ABelowB,
    BBelowA,
}

/// Constants with `m' I <= lower <= m I < M I <= upper <= M' I`, where
/// `lower`/`upper` is `A`/`B` or `B`/`A` according to `orientation`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralSandwich {
    pub m_prime: f64,
    pub m: f64,
    pub big_m: f64,
    pub big_m_prime: f64,
    /// `M / m`
    pub h: f64,
    /// `M' / m'`
    pub h_prime: f64,
    pub orientation: Orientation,
}

impl SpectralSandwich {
    pub fn new(
        m_prime: f64,
        m: f64,
        big_m: f64,
        big_m_prime: f64,
        orientation: Orientation,
    ) -> Result<Self> {
        let all = [m_prime, m, big_m, big_m_prime];
        if all.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::Domain(
                "sandwich constants must be finite and positive".into(),
            ));
        }
        if !(m_prime <= m && m < big_m && big_m <= big_m_prime) {
            return Err(Error::Domain(format!(
                "sandwich constants must satisfy m' <= m < M <= M', got {m_prime}, {m}, {big_m}, {big_m_prime}"
            )));
        }
        Ok(SpectralSandwich {
            m_prime,
            m,
            big_m,
            big_m_prime,
            h: big_m / m,
            h_prime: big_m_prime / m_prime,
            orientation,
        })
    }

    /// User-supplied constants, checked against the actual spectra of `A` and
    /// `B` (to `1e-12` relative). The orientation is inferred.
    pub fn checked(
        a: &SpdMatrix,
        b: &SpdMatrix,
        m_prime: f64,
        m: f64,
        big_m: f64,
        big_m_prime: f64,
    ) -> Result<Self> {
        same_dim(a, b)?;
        let fits = |lower: &SpdMatrix, upper: &SpdMatrix| {
            let slack = 1e-12;
            m_prime <= lower.min_eigenvalue() * (1.0 + slack)
                && lower.max_eigenvalue() <= m * (1.0 + slack)
                && big_m <= upper.min_eigenvalue() * (1.0 + slack)
                && upper.max_eigenvalue() <= big_m_prime * (1.0 + slack)
        };
        let orientation = if fits(a, b) {
            Orientation::ABelowB
        } else if fits(b, a) {
            Orientation::BBelowA
        } else {
            return Err(Error::Domain(format!(
                "constants ({m_prime}, {m}, {big_m}, {big_m_prime}) do not enclose the spectra"
            )));
        };
        SpectralSandwich::new(m_prime, m, big_m, big_m_prime, orientation)
    }
}

/// Tightest sandwich constants read off the two spectra. `margin` demands
/// `lambda_max(lower) < lambda_min(upper) (1 - margin)`.
pub fn sandwich_bounds(a: &SpdMatrix, b: &SpdMatrix, margin: f64) -> Result<SpectralSandwich> {
    same_dim(a, b)?;
    if !(0.0..1.0).contains(&margin) {
        return Err(Error::Domain(format!(
            "margin must lie in [0, 1), got {margin}"
        )));
    }
    let (amin, amax) = (a.min_eigenvalue(), a.max_eigenvalue());
    let (bmin, bmax) = (b.min_eigenvalue(), b.max_eigenvalue());
    if amax < bmin * (1.0 - margin) {
        SpectralSandwich::new(amin, amax, bmin, bmax, Orientation::ABelowB)
    } else if bmax < amin * (1.0 - margin) {
        SpectralSandwich::new(bmin, bmax, amin, amax, Orientation::BBelowA)
    } else {
        Err(Error::SandwichViolation {
            low: amin.max(bmin),
            high: amax.min(bmax),
        })
    }
}
