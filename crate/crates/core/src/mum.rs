//! Mutually unbiased measurements built from an operator grid.
//!
//! From a grid row `F(b, 0..d-1)` with sum `S_b` the `d` operators
//!
//! ```text
//! F_b,n = S_b - (d + sqrt d) F(b, n)    n < d-1
//! F_b,d = (1 + sqrt d) S_b
//! ```
//!
//! sum to zero within the row and are Hilbert-Schmidt orthogonal across rows.
//! The measurement elements are `P_b,n = I/d + t F_b,n`, positive exactly when
//! `t` lies in `[-1/(d λmax), 1/(d |λmin|)]`, and every element has purity
//! `κ = 1/d + t² (1 + sqrt d)² (d - 1)`.

use std::fmt;

use rayon::prelude::*;

use crate::basis::OperatorGrid;
use crate::error::{MumError, Result};
use crate::operator::{hs_inner, HermitianOperator, TOL_PSD};

/// Tie tolerance between `|λmin|` and `λmax` when choosing the optimal `t`.
pub const TIE_TOL: f64 = 1e-12;
/// Slack accepted outside the admissible `t` interval.
pub const T_ENDPOINT_TOL: f64 = 1e-12;
/// Tolerance on the structural identities of a [`MumSet`].
pub const TOL_MUM: f64 = 1e-10;

fn beta(dim: usize) -> f64 {
    1.0 + (dim as f64).sqrt()
}

/// The `d(d+1)` traceless operators `F_b,n` derived from a grid.
#[derive(Clone, Debug)]
pub struct FOperatorSet {
    dim: usize,
    mapping: String,
    /// `ops[b][n]`, `b < d+1`, `n < d`.
    ops: Vec<Vec<HermitianOperator>>,
    row_sums: Vec<HermitianOperator>,
}

/// Largest deviations from the row/cross-row trace identities of an [`FOperatorSet`].
#[derive(Clone, Debug, PartialEq)]
pub struct FResiduals {
    pub row_sum: f64,
    pub same_row_gram: f64,
    pub cross_row_gram: f64,
}

impl FOperatorSet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mapping(&self) -> &str {
        &self.mapping
    }

    /// `F_b,n`, 0-based.
    pub fn get(&self, b: usize, n: usize) -> &HermitianOperator {
        &self.ops[b][n]
    }

    pub fn row(&self, b: usize) -> &[HermitianOperator] {
        &self.ops[b]
    }

    pub fn rows(&self) -> &[Vec<HermitianOperator>] {
        &self.ops
    }

    /// Sum of grid row `b`.
    pub fn row_sum(&self, b: usize) -> &HermitianOperator {
        &self.row_sums[b]
    }

    pub fn residuals(&self) -> FResiduals {
        let d = self.dim;
        let b2 = beta(d).powi(2);
        let mut row_sum = 0.0f64;
        let mut same_row_gram = 0.0f64;
        let mut cross_row_gram = 0.0f64;
        for b in 0..=d {
            let total = self.ops[b]
                .iter()
                .fold(HermitianOperator::zeros(d), |acc, f| acc.add(f));
            row_sum = row_sum.max(total.matrix().max_abs());
            for n in 0..d {
                for bp in b..=d {
                    for np in 0..d {
                        let g = hs_inner(&self.ops[b][n], &self.ops[bp][np]).expect("same dim");
                        if bp == b {
                            let target = if n == np { b2 * (d - 1) as f64 } else { -b2 };
                            same_row_gram = same_row_gram.max((g - target).abs());
                        } else {
                            cross_row_gram = cross_row_gram.max(g.abs());
                        }
                    }
                }
            }
        }
        FResiduals {
            row_sum,
            same_row_gram,
            cross_row_gram,
        }
    }
}

/// Builds the `F_b,n` operators of a grid.
pub fn build_f_operators(grid: &OperatorGrid) -> Result<FOperatorSet> {
    let d = grid.dim();
    let sd = (d as f64).sqrt();
    let alpha = d as f64 + sd;
    let beta = 1.0 + sd;
    let mut ops = Vec::with_capacity(d + 1);
    let mut row_sums = Vec::with_capacity(d + 1);
    for b in 0..=d {
        let sum = grid
            .row(b)
            .iter()
            .fold(HermitianOperator::zeros(d), |acc, f| acc.add(f));
        let mut row: Vec<HermitianOperator> = grid
            .row(b)
            .iter()
            .map(|f| sum.add_scaled(-alpha, f))
            .collect();
        row.push(sum.scale(beta));
        ops.push(row);
        row_sums.push(sum);
    }
    let set = FOperatorSet {
        dim: d,
        mapping: grid.mapping().to_string(),
        ops,
        row_sums,
    };
    let r = set.residuals();
    if r.row_sum > 1e-10 || r.same_row_gram > 1e-9 || r.cross_row_gram > 1e-9 {
        return Err(MumError::InvalidBasis(format!(
            "derived operators violate trace identities: {r:?}"
        )));
    }
    Ok(set)
}

/// Extreme eigenvalues over all `F_b,n` and the admissible `t` interval they imply.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TRange {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    /// 0-based `(b, n)` where `lambda_min` is attained.
    pub argmin: (usize, usize),
    pub argmax: (usize, usize),
}

impl TRange {
    /// The endpoint of larger magnitude; ties go to the positive endpoint.
    pub fn t_opt(&self) -> f64 {
        let mag_min = self.lambda_min.abs();
        if (mag_min - self.lambda_max).abs() <= TIE_TOL || mag_min < self.lambda_max {
            self.t_hi
        } else {
            self.t_lo
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t_lo - T_ENDPOINT_TOL && t <= self.t_hi + T_ENDPOINT_TOL
    }
}

/// Per-operator spectra `(b, n, eigenvalues)` in index order.
pub fn f_spectra(f: &FOperatorSet) -> Result<Vec<(usize, usize, Vec<f64>)>> {
    let d = f.dim;
    (0..(d + 1) * d)
        .into_par_iter()
        .map(|k| {
            let (b, n) = (k / d, k % d);
            f.ops[b][n].eigenvalues().map(|ev| (b, n, ev))
        })
        .collect()
}

pub fn t_range(f: &FOperatorSet) -> Result<TRange> {
    let d = f.dim as f64;
    let mut lambda_min = f64::INFINITY;
    let mut lambda_max = f64::NEG_INFINITY;
    let mut argmin = (0, 0);
    let mut argmax = (0, 0);
    for (b, n, ev) in f_spectra(f)? {
        let (lo, hi) = (ev[0], ev[ev.len() - 1]);
        if lo < lambda_min {
            lambda_min = lo;
            argmin = (b, n);
        }
        if hi > lambda_max {
            lambda_max = hi;
            argmax = (b, n);
        }
    }
    Ok(TRange {
        lambda_min,
        lambda_max,
        t_lo: -1.0 / (d * lambda_max),
        t_hi: 1.0 / (d * lambda_min.abs()),
        argmin,
        argmax,
    })
}

pub fn t_opt(f: &FOperatorSet) -> Result<f64> {
    Ok(t_range(f)?.t_opt())
}

/// `κ(t) = 1/d + t² (1 + sqrt d)² (d - 1)`
pub fn kappa_of_t(dim: usize, t: f64) -> f64 {
    let d = dim as f64;
    1.0 / d + t * t * beta(dim).powi(2) * (d - 1.0)
}

/// Positive root of `κ(t) = kappa`.
pub fn t_of_kappa(dim: usize, kappa: f64) -> Result<f64> {
    let d = dim as f64;
    if dim < 2 || !(kappa >= 1.0 / d) || kappa > 1.0 {
        return Err(MumError::KappaOutOfRange {
            kappa,
            lo: 1.0 / d,
            hi: 1.0,
        });
    }
    Ok(((kappa - 1.0 / d) / (beta(dim).powi(2) * (d - 1.0))).sqrt())
}

/// `d + 1` measurements of `d` outcomes each.
#[derive(Clone, Debug, PartialEq)]
pub struct MumSet {
    dim: usize,
    t: f64,
    kappa: f64,
    mapping: String,
    /// `measurements[b][n]`
    measurements: Vec<Vec<HermitianOperator>>,
}

impl MumSet {
    /// Assembles a set and checks positivity, unit trace, completeness and the
    /// `κ(t)` relation.
    pub fn new(
        dim: usize,
        t: f64,
        kappa: f64,
        mapping: impl Into<String>,
        measurements: Vec<Vec<HermitianOperator>>,
    ) -> Result<Self> {
        let set = Self::new_unchecked(dim, t, kappa, mapping, measurements);
        set.check_invariants()?;
        Ok(set)
    }

    /// Assembles a set without any checks. Meant for injecting defects when
    /// exercising [`verify_mum`].
    pub fn new_unchecked(
        dim: usize,
        t: f64,
        kappa: f64,
        mapping: impl Into<String>,
        measurements: Vec<Vec<HermitianOperator>>,
    ) -> Self {
        Self {
            dim,
            t,
            kappa,
            mapping: mapping.into(),
            measurements,
        }
    }

    fn check_invariants(&self) -> Result<()> {
        let d = self.dim;
        if d < 2 {
            return Err(MumError::InvalidDimension(d, 2));
        }
        if self.measurements.len() != d + 1 {
            return Err(MumError::InvalidMeasurement(format!(
                "expected {} measurements, found {}",
                d + 1,
                self.measurements.len()
            )));
        }
        let expected_kappa = kappa_of_t(d, self.t);
        if (expected_kappa - self.kappa).abs() > 1e-12 {
            return Err(MumError::InvalidMeasurement(format!(
                "kappa = {} but t = {} implies {expected_kappa}",
                self.kappa, self.t
            )));
        }
        for (b, row) in self.measurements.iter().enumerate() {
            if row.len() != d {
                return Err(MumError::InvalidMeasurement(format!(
                    "measurement b={} has {} outcomes, expected {d}",
                    b + 1,
                    row.len()
                )));
            }
            let mut total = HermitianOperator::zeros(d);
            for (n, p) in row.iter().enumerate() {
                if p.dim() != d {
                    return Err(MumError::DimensionMismatch {
                        left: d,
                        right: p.dim(),
                    });
                }
                let tr = p.trace();
                if (tr - 1.0).abs() > TOL_MUM {
                    return Err(MumError::InvalidMeasurement(format!(
                        "unit trace: P(b={}, n={}) has trace {tr}",
                        b + 1,
                        n + 1
                    )));
                }
                let lmin = p.min_eigenvalue()?;
                if lmin < -TOL_PSD {
                    return Err(MumError::InvalidMeasurement(format!(
                        "positivity: P(b={}, n={}) has eigenvalue {lmin:e}",
                        b + 1,
                        n + 1
                    )));
                }
                total = total.add(p);
            }
            let r = total.max_abs_diff(&HermitianOperator::identity(d));
            if r > TOL_MUM {
                return Err(MumError::InvalidMeasurement(format!(
                    "completeness: measurement b={} sums to identity only within {r:e}",
                    b + 1
                )));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn mapping(&self) -> &str {
        &self.mapping
    }

    /// `P_b,n`, 0-based.
    pub fn element(&self, b: usize, n: usize) -> &HermitianOperator {
        &self.measurements[b][n]
    }

    pub fn measurement(&self, b: usize) -> &[HermitianOperator] {
        &self.measurements[b]
    }

    pub fn measurements(&self) -> &[Vec<HermitianOperator>] {
        &self.measurements
    }

    pub fn num_measurements(&self) -> usize {
        self.measurements.len()
    }

    /// Smallest eigenvalue over all elements with its 0-based `(b, n)`.
    pub fn min_eigenvalue(&self) -> Result<(f64, (usize, usize))> {
        let mut best = (f64::INFINITY, (0, 0));
        for (b, row) in self.measurements.iter().enumerate() {
            for (n, p) in row.iter().enumerate() {
                let l = p.min_eigenvalue()?;
                if l < best.0 {
                    best = (l, (b, n));
                }
            }
        }
        Ok(best)
    }
}

/// `P_b,n = I/d + t F_b,n` for a precomputed operator set.
pub fn build_mum_from_f(f: &FOperatorSet, t: f64) -> Result<MumSet> {
    let d = f.dim;
    let range = t_range(f)?;
    let mixed = HermitianOperator::maximally_mixed(d);
    let measurements: Vec<Vec<HermitianOperator>> = f
        .ops
        .iter()
        .map(|row| row.iter().map(|fo| mixed.add_scaled(t, fo)).collect())
        .collect();

    if !range.contains(t) {
        let mut worst = (f64::INFINITY, 0, 0);
        for (b, row) in measurements.iter().enumerate() {
            for (n, p) in row.iter().enumerate() {
                let l = p.min_eigenvalue()?;
                if l < worst.0 {
                    worst = (l, b, n);
                }
            }
        }
        return Err(MumError::TOutOfRange {
            t,
            t_lo: range.t_lo,
            t_hi: range.t_hi,
            b: worst.1 + 1,
            n: worst.2 + 1,
            eigenvalue: worst.0,
        });
    }
    MumSet::new(d, t, kappa_of_t(d, t), f.mapping.clone(), measurements)
}

/// Builds the measurement set of a grid at scale `t`.
pub fn build_mum(grid: &OperatorGrid, t: f64) -> Result<MumSet> {
    build_mum_from_f(&build_f_operators(grid)?, t)
}

/// Worst deviation per clause of the unbiasedness conditions, with the 0-based
/// location where it occurs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClauseResidual {
    pub residual: f64,
    pub at: ((usize, usize), (usize, usize)),
}

impl ClauseResidual {
    fn zero() -> Self {
        Self {
            residual: 0.0,
            at: ((0, 0), (0, 0)),
        }
    }

    fn update(&mut self, r: f64, at: ((usize, usize), (usize, usize))) {
        if r > self.residual {
            self.residual = r;
            self.at = at;
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MumVerificationReport {
    pub dim: usize,
    pub kappa: f64,
    pub tol: f64,
    /// `|Tr P - 1|`
    pub unit_trace: ClauseResidual,
    /// `|Tr(P_b,n P_b,n) - κ|`
    pub same_diagonal: ClauseResidual,
    /// `|Tr(P_b,n P_b,n') - (1-κ)/(d-1)|`, `n ≠ n'`
    pub same_off_diagonal: ClauseResidual,
    /// `|Tr(P_b,n P_b',n') - 1/d|`, `b ≠ b'`
    pub cross: ClauseResidual,
    pub passed: bool,
}

impl MumVerificationReport {
    pub fn max_residual(&self) -> f64 {
        [
            self.unit_trace.residual,
            self.same_diagonal.residual,
            self.same_off_diagonal.residual,
            self.cross.residual,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn clauses(&self) -> [(&'static str, &ClauseResidual); 4] {
        [
            ("unit_trace", &self.unit_trace),
            ("same_b_diagonal", &self.same_diagonal),
            ("same_b_off_diagonal", &self.same_off_diagonal),
            ("cross_b", &self.cross),
        ]
    }
}

impl fmt::Display for MumVerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "d = {}, kappa = {:.15}, tol = {:e}",
            self.dim, self.kappa, self.tol
        )?;
        for (name, c) in self.clauses() {
            let ((b, n), (bp, np)) = c.at;
            writeln!(
                f,
                "  {:<20} {:>10.3e}  {}  at P(b={}, n={}) / P(b={}, n={})",
                name,
                c.residual,
                if c.residual < self.tol {
                    "pass"
                } else {
                    "FAIL"
                },
                b + 1,
                n + 1,
                bp + 1,
                np + 1
            )?;
        }
        write!(f, "overall: {}", if self.passed { "PASS" } else { "FAIL" })
    }
}

/// Checks every pairwise trace condition of a measurement set against its own `κ`.
pub fn verify_mum(m: &MumSet, tol: f64) -> MumVerificationReport {
    let d = m.dim;
    let kappa = m.kappa;
    let off_target = (1.0 - kappa) / (d as f64 - 1.0);
    let cross_target = 1.0 / d as f64;
    let mut unit_trace = ClauseResidual::zero();
    let mut same_diagonal = ClauseResidual::zero();
    let mut same_off_diagonal = ClauseResidual::zero();
    let mut cross = ClauseResidual::zero();

    let flat: Vec<((usize, usize), &HermitianOperator)> = m
        .measurements
        .iter()
        .enumerate()
        .flat_map(|(b, row)| row.iter().enumerate().map(move |(n, p)| ((b, n), p)))
        .collect();

    for (i, &(ij, p)) in flat.iter().enumerate() {
        unit_trace.update((p.trace() - 1.0).abs(), (ij, ij));
        for &(kl, q) in &flat[i..] {
            let g = p.matrix().hs_inner(q.matrix()).re;
            if ij.0 == kl.0 {
                if ij.1 == kl.1 {
                    same_diagonal.update((g - kappa).abs(), (ij, kl));
                } else {
                    same_off_diagonal.update((g - off_target).abs(), (ij, kl));
                }
            } else {
                cross.update((g - cross_target).abs(), (ij, kl));
            }
        }
    }
    let passed = [unit_trace, same_diagonal, same_off_diagonal, cross]
        .iter()
        .all(|c| c.residual < tol);
    MumVerificationReport {
        dim: d,
        kappa,
        tol,
        unit_trace,
        same_diagonal,
        same_off_diagonal,
        cross,
        passed,
    }
}

/// Closed-form optimum for the Gell-Mann grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GmOracleResult {
    pub dim: usize,
    /// `(1 + sqrt d) sqrt((d-1)/2)`: the nonzero eigenvalue magnitude of every
    /// `F_b,n` with `b < d`.
    pub eigenvalue_magnitude: f64,
    pub t_opt: f64,
    /// `1/d + 2/d²`
    pub kappa_opt: f64,
}

pub fn gm_analytic_oracle(dim: usize) -> Result<GmOracleResult> {
    if dim < 2 {
        return Err(MumError::InvalidDimension(dim, 2));
    }
    let d = dim as f64;
    let beta = beta(dim);
    Ok(GmOracleResult {
        dim,
        eigenvalue_magnitude: beta * ((d - 1.0) / 2.0).sqrt(),
        t_opt: (2.0 / (d - 1.0)).sqrt() / (d * beta),
        kappa_opt: 1.0 / d + 2.0 / (d * d),
    })
}
