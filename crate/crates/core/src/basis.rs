//! Traceless Hermitian operator bases and their arrangement on the
//! `(d+1) x (d-1)` grid that feeds the measurement construction.
//!
//! Grid cells are addressed as `(b, n)`: `b` is the row (future measurement
//! label, `0..=d`), `n` the column (`0..d-1`). Both are 0-based in the API;
//! reports and documents print them 1-based.

use std::fmt;

use num_complex::Complex64;

use crate::error::{MumError, Result};
use crate::operator::{hs_inner, ComplexMatrix, HermitianOperator, TOL_HERMITIAN};

/// Tracelessness tolerance for grid cells.
pub const TOL_TRACELESS: f64 = 1e-12;
/// Gram-matrix tolerance for grid orthonormality.
pub const TOL_ORTHONORMAL: f64 = 1e-10;

/// Label `(n, m)` of a generalized Gell-Mann operator, 1-based.
///
/// `n < m`: symmetric, `n > m`: antisymmetric, `n == m`: diagonal (`n < d`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GmLabel {
    pub n: usize,
    pub m: usize,
}

impl fmt::Display for GmLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "G({},{})", self.n, self.m)
    }
}

/// Labels in the order returned by [`gellmann_basis`]: symmetric, antisymmetric, diagonal.
pub fn gellmann_labels(dim: usize) -> Vec<GmLabel> {
    let mut labels = Vec::with_capacity(dim * dim - 1);
    for n in 1..=dim {
        for m in (n + 1)..=dim {
            labels.push(GmLabel { n, m });
        }
    }
    for m in 1..=dim {
        for n in (m + 1)..=dim {
            labels.push(GmLabel { n, m });
        }
    }
    for n in 1..dim {
        labels.push(GmLabel { n, m: n });
    }
    labels
}

/// The generalized Gell-Mann operator `G(n,m)`, normalized so `Tr(G^2) = 1`.
pub fn gellmann_element(dim: usize, label: GmLabel) -> Result<HermitianOperator> {
    let GmLabel { n, m } = label;
    if dim < 2 {
        return Err(MumError::InvalidDimension(dim, 2));
    }
    if n == 0 || m == 0 || n > dim || m > dim || (n == m && n == dim) {
        return Err(MumError::InvalidBasis(format!(
            "no Gell-Mann operator {label} in dimension {dim}"
        )));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let (i, j) = (n - 1, m - 1);
    let mut mat = ComplexMatrix::zeros(dim);
    if n < m {
        mat[(i, j)] = Complex64::new(s, 0.0);
        mat[(j, i)] = Complex64::new(s, 0.0);
    } else if n > m {
        // i(|n><m| - |m><n|)/sqrt2
        mat[(i, j)] = Complex64::new(0.0, s);
        mat[(j, i)] = Complex64::new(0.0, -s);
    } else {
        let norm = 1.0 / ((n * (n + 1)) as f64).sqrt();
        for k in 0..n {
            mat[(k, k)] = Complex64::new(norm, 0.0);
        }
        mat[(n, n)] = Complex64::new(-(n as f64) * norm, 0.0);
    }
    HermitianOperator::new(mat)
}

/// All `d^2 - 1` generalized Gell-Mann operators, ordered as [`gellmann_labels`].
pub fn gellmann_basis(dim: usize) -> Result<Vec<HermitianOperator>> {
    if dim < 2 {
        return Err(MumError::InvalidDimension(dim, 2));
    }
    gellmann_labels(dim)
        .into_iter()
        .map(|l| gellmann_element(dim, l))
        .collect()
}

/// How a flat list of `d^2 - 1` basis operators is placed on the grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GridMapping {
    /// Operator `k` goes to row `k / (d-1)`, column `k % (d-1)`.
    RowMajor,
    /// Expects the [`gellmann_basis`] ordering. Row `b < d` holds the
    /// off-diagonal `G(m, b)` of matrix row `b` (ascending `m`, diagonal
    /// skipped); the last row holds the diagonal `G(n, n)`.
    GellMann,
    /// Cell `b * (d-1) + n` receives operator `perm[b * (d-1) + n]`.
    Permutation(Vec<usize>),
}

impl GridMapping {
    pub const ROW_MAJOR_ID: &'static str = "row-major";
    pub const GELLMANN_ID: &'static str = "gellmann-eq-Fg2";
    pub const PERMUTATION_ID: &'static str = "permutation";

    pub fn id(&self) -> &'static str {
        match self {
            GridMapping::RowMajor => Self::ROW_MAJOR_ID,
            GridMapping::GellMann => Self::GELLMANN_ID,
            GridMapping::Permutation(_) => Self::PERMUTATION_ID,
        }
    }

    /// For each grid cell (row-major), the index of the input operator it takes.
    pub fn assignment(&self, dim: usize) -> Result<Vec<usize>> {
        let count = dim * dim - 1;
        let assignment = match self {
            GridMapping::RowMajor => (0..count).collect(),
            GridMapping::Permutation(p) => p.clone(),
            GridMapping::GellMann => {
                let labels = gellmann_labels(dim);
                let index_of = |label: GmLabel| {
                    labels
                        .iter()
                        .position(|&l| l == label)
                        .expect("label present in Gell-Mann ordering")
                };
                let mut a = Vec::with_capacity(count);
                for b in 1..=dim {
                    for m in (1..=dim).filter(|&m| m != b) {
                        a.push(index_of(GmLabel { n: m, m: b }));
                    }
                }
                for n in 1..dim {
                    a.push(index_of(GmLabel { n, m: n }));
                }
                a
            }
        };
        if assignment.len() != count {
            return Err(MumError::InvalidMapping(format!(
                "mapping covers {} cells, grid has {count}",
                assignment.len()
            )));
        }
        let mut seen = vec![false; count];
        for &k in &assignment {
            if k >= count || seen[k] {
                return Err(MumError::InvalidMapping(format!(
                    "mapping is not a bijection on 0..{count} (index {k})"
                )));
            }
            seen[k] = true;
        }
        Ok(assignment)
    }

    /// The [`gellmann_labels`] entry sitting in cell `(b, n)` under the Gell-Mann mapping.
    pub fn gellmann_label_at(dim: usize, b: usize, n: usize) -> GmLabel {
        if b < dim {
            let row = b + 1;
            let m = (1..=dim)
                .filter(|&m| m != row)
                .nth(n)
                .expect("column in range");
            GmLabel { n: m, m: row }
        } else {
            GmLabel { n: n + 1, m: n + 1 }
        }
    }
}

/// Orthonormal traceless Hermitian basis laid out on `d+1` rows of `d-1` cells.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorGrid {
    dim: usize,
    mapping: String,
    cells: Vec<HermitianOperator>,
}

impl OperatorGrid {
    /// Builds a grid from row-major cells and validates all grid invariants.
    pub fn new(
        dim: usize,
        mapping: impl Into<String>,
        cells: Vec<HermitianOperator>,
    ) -> Result<Self> {
        if dim < 2 {
            return Err(MumError::InvalidDimension(dim, 2));
        }
        let expected = dim * dim - 1;
        if cells.len() != expected {
            return Err(MumError::InvalidBasis(format!(
                "count: expected {expected} operators, found {}",
                cells.len()
            )));
        }
        let label = |k: usize| format!("(n={}, b={})", k % (dim - 1) + 1, k / (dim - 1) + 1);
        for (k, c) in cells.iter().enumerate() {
            if c.dim() != dim {
                return Err(MumError::InvalidBasis(format!(
                    "dimension: cell {} is {}x{}, expected {dim}x{dim}",
                    label(k),
                    c.dim(),
                    c.dim()
                )));
            }
            let tr = c.matrix().trace().norm();
            if tr > TOL_TRACELESS {
                return Err(MumError::InvalidBasis(format!(
                    "tracelessness: cell {} has |Tr| = {tr:e}",
                    label(k)
                )));
            }
        }
        for i in 0..expected {
            for j in i..expected {
                let g = hs_inner(&cells[i], &cells[j])?;
                let target = if i == j { 1.0 } else { 0.0 };
                if (g - target).abs() > TOL_ORTHONORMAL {
                    return Err(MumError::InvalidBasis(format!(
                        "orthonormality: Tr(F{} F{}) = {g}, expected {target}",
                        label(i),
                        label(j)
                    )));
                }
            }
        }
        Ok(Self {
            dim,
            mapping: mapping.into(),
            cells,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mapping(&self) -> &str {
        &self.mapping
    }

    pub fn rows(&self) -> usize {
        self.dim + 1
    }

    pub fn cols(&self) -> usize {
        self.dim - 1
    }

    /// Cell in row `b`, column `n` (0-based).
    pub fn cell(&self, b: usize, n: usize) -> &HermitianOperator {
        assert!(b <= self.dim && n + 1 < self.dim, "grid index out of range");
        &self.cells[b * (self.dim - 1) + n]
    }

    pub fn row(&self, b: usize) -> &[HermitianOperator] {
        let w = self.dim - 1;
        &self.cells[b * w..(b + 1) * w]
    }

    /// Cells in row-major order.
    pub fn cells(&self) -> &[HermitianOperator] {
        &self.cells
    }
}

/// Places a validated basis on the grid according to `mapping`.
pub fn arrange_grid(
    ops: &[HermitianOperator],
    dim: usize,
    mapping: &GridMapping,
) -> Result<OperatorGrid> {
    if dim < 2 {
        return Err(MumError::InvalidDimension(dim, 2));
    }
    let report = validate_operator_basis(ops, TOL_ORTHONORMAL);
    if report.dim != Some(dim) && !ops.is_empty() {
        return Err(MumError::InvalidBasis(format!(
            "dimension: operators are not all {dim}x{dim}"
        )));
    }
    if !report.passed() {
        return Err(MumError::InvalidBasis(report.to_string()));
    }
    let assignment = mapping.assignment(dim)?;
    let cells = assignment.iter().map(|&k| ops[k].clone()).collect();
    OperatorGrid::new(dim, mapping.id(), cells)
}

/// The Gell-Mann basis on its default grid.
pub fn gellmann_grid(dim: usize) -> Result<OperatorGrid> {
    arrange_grid(&gellmann_basis(dim)?, dim, &GridMapping::GellMann)
}

/// Result of [`validate_operator_basis`]. Indices are 0-based positions in the input list.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisValidationReport {
    pub tol: f64,
    /// Common dimension, `None` if the list is empty or dimensions differ.
    pub dim: Option<usize>,
    pub count: usize,
    pub count_ok: bool,
    pub hermiticity_residual: f64,
    pub hermitian: bool,
    pub trace_residual: f64,
    pub traceless: bool,
    /// Max `|Tr(F_k F_l) - δ_kl|`.
    pub orthonormality_residual: f64,
    /// Gram entry where the orthonormality residual is attained.
    pub worst_pair: Option<(usize, usize)>,
    pub orthonormal: bool,
}

impl BasisValidationReport {
    pub fn passed(&self) -> bool {
        self.dim.is_some() && self.count_ok && self.hermitian && self.traceless && self.orthonormal
    }
}

impl fmt::Display for BasisValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = |ok: bool| if ok { "pass" } else { "FAIL" };
        let expected = self.dim.map(|d| d * d - 1);
        write!(
            f,
            "count {} ({} of {:?}); hermiticity {} ({:.3e}); tracelessness {} ({:.3e}); orthonormality {} ({:.3e}",
            mark(self.count_ok),
            self.count,
            expected,
            mark(self.hermitian),
            self.hermiticity_residual,
            mark(self.traceless),
            self.trace_residual,
            mark(self.orthonormal),
            self.orthonormality_residual,
        )?;
        if let Some((i, j)) = self.worst_pair {
            write!(f, " at ({}, {})", i + 1, j + 1)?;
        }
        write!(f, ")")
    }
}

/// Checks that `ops` is an orthonormal basis of traceless Hermitian `d x d` operators.
pub fn validate_operator_basis(ops: &[HermitianOperator], tol: f64) -> BasisValidationReport {
    let dim = ops
        .first()
        .map(|o| o.dim())
        .filter(|&d| ops.iter().all(|o| o.dim() == d));
    let count = ops.len();
    let count_ok = dim.is_some_and(|d| count == d * d - 1);

    let hermiticity_residual = ops
        .iter()
        .map(|o| o.matrix().hermiticity_residual())
        .fold(0.0, f64::max);
    let trace_residual = ops
        .iter()
        .map(|o| o.matrix().trace().norm())
        .fold(0.0, f64::max);

    let mut orthonormality_residual = 0.0f64;
    let mut worst_pair = None;
    if dim.is_some() {
        for i in 0..count {
            for j in i..count {
                let g = ops[i].matrix().hs_inner(ops[j].matrix());
                let target = if i == j { 1.0 } else { 0.0 };
                let r = (g - target).norm();
                if r > orthonormality_residual {
                    orthonormality_residual = r;
                    worst_pair = Some((i, j));
                }
            }
        }
    }

    BasisValidationReport {
        tol,
        dim,
        count,
        count_ok,
        hermiticity_residual,
        hermitian: hermiticity_residual <= tol.max(TOL_HERMITIAN),
        trace_residual,
        traceless: trace_residual <= tol,
        orthonormality_residual,
        worst_pair,
        orthonormal: dim.is_some() && orthonormality_residual <= tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gellmann_d2_are_scaled_paulis() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let basis = gellmann_basis(2).unwrap();
        let x = ComplexMatrix::from_rows(&[vec![c(0., 0.), c(s, 0.)], vec![c(s, 0.), c(0., 0.)]])
            .unwrap();
        // i(|2><1| - |1><2|)/sqrt2 = sigma_y/sqrt2
        let y = ComplexMatrix::from_rows(&[vec![c(0., 0.), c(0., -s)], vec![c(0., s), c(0., 0.)]])
            .unwrap();
        let z = ComplexMatrix::from_diagonal(&[s, -s]);
        assert_eq!(
            gellmann_labels(2),
            vec![
                GmLabel { n: 1, m: 2 },
                GmLabel { n: 2, m: 1 },
                GmLabel { n: 1, m: 1 }
            ]
        );
        assert!(basis[0].matrix().max_abs_diff(&x) < 1e-16);
        assert!(basis[1].matrix().max_abs_diff(&y) < 1e-16);
        assert!(basis[2].matrix().max_abs_diff(&z) < 1e-15);
    }

    #[test]
    fn gellmann_counts_and_inner_products() {
        assert_eq!(gellmann_basis(3).unwrap().len(), 8);
        let b = gellmann_basis(2).unwrap();
        let g11 = gellmann_element(2, GmLabel { n: 1, m: 1 }).unwrap();
        assert!((hs_inner(&g11, &g11).unwrap() - 1.0).abs() < 1e-15);
        assert!(hs_inner(&b[0], &b[1]).unwrap().abs() < 1e-15);
    }

    #[test]
    fn gellmann_rejects_small_dimension() {
        assert_eq!(gellmann_basis(1), Err(MumError::InvalidDimension(1, 2)));
        assert!(gellmann_element(3, GmLabel { n: 3, m: 3 }).is_err());
    }

    #[test]
    fn gellmann_passes_validation_up_to_12() {
        for d in 2..=12 {
            let report = validate_operator_basis(&gellmann_basis(d).unwrap(), 1e-12);
            assert!(report.passed(), "d={d}: {report}");
        }
    }

    #[test]
    fn doubled_element_fails_orthonormality() {
        let mut ops = gellmann_basis(3).unwrap();
        ops[4] = ops[4].scale(2.0);
        let report = validate_operator_basis(&ops, 1e-12);
        assert!(!report.orthonormal);
        assert!((report.orthonormality_residual - 3.0).abs() < 1e-12);
        assert_eq!(report.worst_pair, Some((4, 4)));
    }

    #[test]
    fn identity_component_fails_tracelessness() {
        let mut ops = gellmann_basis(3).unwrap();
        ops[0] = HermitianOperator::identity(3).scale(1.0 / 3f64.sqrt());
        let report = validate_operator_basis(&ops, 1e-12);
        assert!(!report.traceless);
        assert!(!report.passed());
    }

    #[test]
    fn gellmann_mapping_rows() {
        let grid = gellmann_grid(2).unwrap();
        let g = |n, m| gellmann_element(2, GmLabel { n, m }).unwrap();
        assert_eq!(grid.cell(0, 0), &g(2, 1));
        assert_eq!(grid.cell(1, 0), &g(1, 2));
        assert_eq!(grid.cell(2, 0), &g(1, 1));

        let grid = gellmann_grid(3).unwrap();
        let g = |n, m| gellmann_element(3, GmLabel { n, m }).unwrap();
        assert_eq!(grid.row(0), &[g(2, 1), g(3, 1)]);
        assert_eq!(grid.row(1), &[g(1, 2), g(3, 2)]);
        assert_eq!(grid.row(2), &[g(1, 3), g(2, 3)]);
        assert_eq!(grid.row(3), &[g(1, 1), g(2, 2)]);
        assert_eq!(grid.mapping(), GridMapping::GELLMANN_ID);
        for b in 0..4 {
            for n in 0..2 {
                let label = GridMapping::gellmann_label_at(3, b, n);
                assert_eq!(grid.cell(b, n), &gellmann_element(3, label).unwrap());
            }
        }
    }

    #[test]
    fn mapping_must_be_bijection() {
        let ops = gellmann_basis(2).unwrap();
        let bad = GridMapping::Permutation(vec![0, 0, 1]);
        assert!(matches!(
            arrange_grid(&ops, 2, &bad),
            Err(MumError::InvalidMapping(_))
        ));
        let short = GridMapping::Permutation(vec![0, 1]);
        assert!(arrange_grid(&ops, 2, &short).is_err());
        let ok = GridMapping::Permutation(vec![2, 0, 1]);
        let grid = arrange_grid(&ops, 2, &ok).unwrap();
        assert_eq!(grid.cell(0, 0), &ops[2]);
    }

    #[test]
    fn arrange_rejects_invalid_basis() {
        let mut ops = gellmann_basis(3).unwrap();
        ops.pop();
        assert!(matches!(
            arrange_grid(&ops, 3, &GridMapping::RowMajor),
            Err(MumError::InvalidBasis(_))
        ));
    }

    #[test]
    fn arrange_is_a_relabeling() {
        for d in 2..=6 {
            let ops = gellmann_basis(d).unwrap();
            let grid = arrange_grid(&ops, d, &GridMapping::GellMann).unwrap();
            let mut used = vec![false; ops.len()];
            for cell in grid.cells() {
                let k = ops.iter().position(|o| o == cell).unwrap();
                assert!(!used[k]);
                used[k] = true;
            }
            let total: f64 = grid.cells().iter().map(|c| c.purity()).sum();
            assert!((total - (d * d - 1) as f64).abs() < 1e-9);
        }
    }
}
