//! Dense complex matrices and the Hermitian / density-matrix wrappers built on them.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::eigen::{hermitian_eigensystem, EigenSystem};
use crate::error::{MumError, Result};

/// Max-abs deviation from Hermiticity accepted by [`HermitianOperator::new`].
pub const TOL_HERMITIAN: f64 = 1e-12;
/// Unit-trace tolerance for density matrices.
pub const TOL_TRACE: f64 = 1e-12;
/// Smallest eigenvalue still counted as non-negative.
pub const TOL_PSD: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &x) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(x, 0.0);
        }
        m
    }

    /// Builds a matrix from `dim * dim` row-major entries.
    pub fn from_row_major(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(MumError::BadShape {
                rows: dim,
                len: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(MumError::BadShape {
                    rows: dim,
                    len: row.len() * dim,
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { dim, data })
    }

    /// `|u><v|`
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        assert_eq!(u.len(), v.len());
        let dim = u.len();
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = u[i] * v[j].conj();
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_complex(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    /// Max-abs entrywise difference. Panics on dimension mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Max-abs deviation from Hermiticity.
    pub fn hermiticity_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `Tr(A^H B)`
    pub fn hs_inner(&self, other: &Self) -> Complex64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, x)| a * x).sum())
            .collect()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let d = self.dim;
        let mut out = ComplexMatrix::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..d {
                    out.data[i * d + j] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = self
                .row(i)
                .iter()
                .map(|z| format!("{:+.6}{:+.6}i", z.re, z.im))
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// A Hermitian operator. Construction checks Hermiticity at [`TOL_HERMITIAN`]
/// and then symmetrizes, so the stored matrix is exactly Hermitian.
#[derive(Clone, PartialEq, Debug)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, TOL_HERMITIAN)
    }

    pub fn with_tolerance(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        let residual = matrix.hermiticity_residual();
        if !(residual <= tol) {
            return Err(MumError::NotHermitian { residual });
        }
        Ok(Self::symmetrized(matrix))
    }

    /// `(A + A^H)/2` without any check. Used internally where Hermiticity holds by construction.
    pub(crate) fn symmetrized(matrix: ComplexMatrix) -> Self {
        let d = matrix.dim();
        let mut m = matrix;
        for i in 0..d {
            m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
            for j in (i + 1)..d {
                let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                m[(i, j)] = avg;
                m[(j, i)] = avg.conj();
            }
        }
        Self { matrix: m }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
        }
    }

    /// `I/d`
    pub fn maximally_mixed(dim: usize) -> Self {
        Self::identity(dim).scale(1.0 / dim as f64)
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::zeros(dim),
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self {
            matrix: ComplexMatrix::from_diagonal(diag),
        }
    }

    /// `|v><v|`
    pub fn projector(v: &[Complex64]) -> Self {
        Self::symmetrized(ComplexMatrix::outer(v, v))
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            matrix: self.matrix.scale(s),
        }
    }

    /// `self + s * other`
    pub fn add_scaled(&self, s: f64, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        let data = self
            .matrix
            .as_slice()
            .iter()
            .zip(other.matrix.as_slice())
            .map(|(a, b)| a + b * s)
            .collect();
        Self {
            matrix: ComplexMatrix {
                dim: self.dim(),
                data,
            },
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            matrix: &self.matrix + &other.matrix,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            matrix: &self.matrix - &other.matrix,
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.matrix.max_abs_diff(&other.matrix)
    }

    /// `<v|A|v>`
    pub fn expectation(&self, v: &[Complex64]) -> f64 {
        let av = self.matrix.mul_vec(v);
        v.iter().zip(&av).map(|(x, y)| (x.conj() * y).re).sum()
    }

    pub fn eigensystem(&self) -> Result<EigenSystem> {
        hermitian_eigensystem(self)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(hermitian_eigensystem(self)?.eigenvalues)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?[0])
    }

    /// `Tr(A^2)`
    pub fn purity(&self) -> f64 {
        self.matrix.frobenius_norm().powi(2)
    }
}

/// `Tr(a b)` for Hermitian `a`, `b`.
pub fn hs_inner(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(MumError::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(a.matrix.hs_inner(&b.matrix).re)
}

/// True iff the smallest eigenvalue of `a` is at least `-tol`.
pub fn is_psd(a: &HermitianOperator, tol: f64) -> Result<bool> {
    Ok(a.min_eigenvalue()? >= -tol)
}

/// A unit-trace positive semidefinite Hermitian operator.
#[derive(Clone, PartialEq, Debug)]
pub struct DensityMatrix {
    op: HermitianOperator,
}

impl DensityMatrix {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let report = validate_density(&op);
        if !report.passed() {
            return Err(MumError::InvalidDensity(report.to_string()));
        }
        Ok(Self { op })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            op: HermitianOperator::maximally_mixed(dim),
        }
    }

    /// Pure state from a (not necessarily normalized) nonzero vector.
    pub fn pure(v: &[Complex64]) -> Self {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let u: Vec<Complex64> = v.iter().map(|z| z / norm).collect();
        Self {
            op: HermitianOperator::projector(&u),
        }
    }

    pub(crate) fn new_unchecked(op: HermitianOperator) -> Self {
        Self { op }
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn purity(&self) -> f64 {
        self.op.purity()
    }

    pub fn rank(&self, tol: f64) -> Result<usize> {
        Ok(self.op.eigenvalues()?.iter().filter(|&&x| x > tol).count())
    }
}

/// Outcome of [`validate_density`].
#[derive(Clone, Debug, PartialEq)]
pub struct DensityReport {
    pub hermiticity_residual: f64,
    pub hermitian: bool,
    pub trace_residual: f64,
    pub unit_trace: bool,
    /// Smallest eigenvalue; `None` when the matrix is not Hermitian.
    pub min_eigenvalue: Option<f64>,
    pub positive: bool,
}

impl DensityReport {
    pub fn passed(&self) -> bool {
        self.hermitian && self.unit_trace && self.positive
    }
}

impl fmt::Display for DensityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = |ok: bool| if ok { "pass" } else { "FAIL" };
        writeln!(
            f,
            "hermiticity: {} (residual {:.3e})",
            mark(self.hermitian),
            self.hermiticity_residual
        )?;
        writeln!(
            f,
            "unit trace:  {} (residual {:.3e})",
            mark(self.unit_trace),
            self.trace_residual
        )?;
        match self.min_eigenvalue {
            Some(l) => write!(
                f,
                "positivity:  {} (min eigenvalue {:.3e})",
                mark(self.positive),
                l
            ),
            None => write!(f, "positivity:  FAIL (not evaluated)"),
        }
    }
}

/// Checks Hermiticity, unit trace and positivity and reports the residuals.
pub fn validate_density(a: &HermitianOperator) -> DensityReport {
    validate_density_matrix(a.matrix())
}

/// Same checks as [`validate_density`] for a raw matrix that may not be Hermitian.
pub fn validate_density_matrix(m: &ComplexMatrix) -> DensityReport {
    let hermiticity_residual = m.hermiticity_residual();
    let hermitian = hermiticity_residual <= TOL_HERMITIAN;
    let tr = m.trace();
    let trace_residual = (tr - Complex64::new(1.0, 0.0)).norm();
    let unit_trace = trace_residual <= TOL_TRACE;
    let min_eigenvalue = if hermitian {
        HermitianOperator::symmetrized(m.clone())
            .min_eigenvalue()
            .ok()
    } else {
        None
    };
    let positive = min_eigenvalue.is_some_and(|l| l >= -TOL_PSD);
    DensityReport {
        hermiticity_residual,
        hermitian,
        trace_residual,
        unit_trace,
        min_eigenvalue,
        positive,
    }
}
