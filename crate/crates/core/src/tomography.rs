//! Linear-inversion state tomography from measurement statistics.
//!
//! The reconstruction operators
//!
//! ```text
//! R_b,n = (d-1)/(κd-1) * (P_b,n - (d-κ)/(d²-1) I)
//! ```
//!
//! form the dual frame of the measurement elements, so
//! `ρ = Σ_b,n Tr(P_b,n ρ) R_b,n` exactly whenever `κ > 1/d`.
//!
//! The `d²`-outcome measurement keeps the first `d-1` outcomes of every
//! setting (scaled by `1/(d+1)`) and pools all last outcomes into one element.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::basis::gellmann_basis;
use crate::eigen::hermitian_eigensystem;
use crate::error::{MumError, Result};
use crate::mum::MumSet;
use crate::operator::{validate_density, DensityMatrix, DensityReport, HermitianOperator, TOL_PSD};
use crate::random::task_rng;

/// Entry range slack for probabilities.
pub const TOL_PROB_ENTRY: f64 = 1e-12;
/// Row-sum tolerance for probabilities.
pub const TOL_PROB_SUM: f64 = 1e-10;
/// Singular-frame margin on `κ - 1/d`.
pub const TOL_SINGULAR: f64 = 1e-12;

/// Outcome probabilities, one row per measurement setting.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityTable {
    dim: usize,
    probs: Vec<Vec<f64>>,
}

impl ProbabilityTable {
    /// Validates entry range and row normalization.
    pub fn new(dim: usize, probs: Vec<Vec<f64>>) -> Result<Self> {
        for (b, row) in probs.iter().enumerate() {
            if row.len() != dim {
                return Err(MumError::ShapeMismatch(format!(
                    "row b={} has {} entries, expected {dim}",
                    b + 1,
                    row.len()
                )));
            }
            for (n, &p) in row.iter().enumerate() {
                if !(-TOL_PROB_ENTRY..=1.0 + TOL_PROB_ENTRY).contains(&p) {
                    return Err(MumError::InvalidProbabilities(format!(
                        "p(b={}, n={}) = {p} outside [0, 1]",
                        b + 1,
                        n + 1
                    )));
                }
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > TOL_PROB_SUM {
                return Err(MumError::InvalidProbabilities(format!(
                    "row b={} sums to {s}",
                    b + 1
                )));
            }
        }
        Ok(Self { dim, probs })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_settings(&self) -> usize {
        self.probs.len()
    }

    pub fn get(&self, b: usize, n: usize) -> f64 {
        self.probs[b][n]
    }

    pub fn row(&self, b: usize) -> &[f64] {
        &self.probs[b]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.probs
    }

    /// `Σ_b,n p²`
    pub fn square_sum(&self) -> f64 {
        self.probs.iter().flatten().map(|p| p * p).sum()
    }
}

/// Born-rule statistics `Tr(P_b,n ρ)`.
pub fn born_probabilities(m: &MumSet, rho: &DensityMatrix) -> Result<ProbabilityTable> {
    if m.dim() != rho.dim() {
        return Err(MumError::DimensionMismatch {
            left: m.dim(),
            right: rho.dim(),
        });
    }
    let probs = m
        .measurements()
        .iter()
        .map(|row| {
            row.iter()
                .map(|p| p.matrix().hs_inner(rho.operator().matrix()).re)
                .collect()
        })
        .collect();
    ProbabilityTable::new(m.dim(), probs)
}

/// Dual-frame operators of a measurement set.
#[derive(Clone, Debug)]
pub struct ReconstructionSet {
    pub kappa: f64,
    /// `ops[b][n]`, same shape as the measurement set.
    pub ops: Vec<Vec<HermitianOperator>>,
}

impl ReconstructionSet {
    pub fn sum(&self) -> HermitianOperator {
        let d = self.ops[0][0].dim();
        self.ops
            .iter()
            .flatten()
            .fold(HermitianOperator::zeros(d), |acc, r| acc.add(r))
    }

    /// `Σ_b,n p_b,n R_b,n`
    pub fn apply(&self, p: &ProbabilityTable) -> Result<HermitianOperator> {
        apply_frame(&self.ops, p.rows())
    }
}

fn apply_frame(ops: &[Vec<HermitianOperator>], weights: &[Vec<f64>]) -> Result<HermitianOperator> {
    if ops.len() != weights.len() || ops.iter().zip(weights).any(|(o, w)| o.len() != w.len()) {
        return Err(MumError::ShapeMismatch(
            "probability table does not match the measurement set".into(),
        ));
    }
    let d = ops[0][0].dim();
    let mut acc = HermitianOperator::zeros(d);
    for (row, wrow) in ops.iter().zip(weights) {
        for (r, &w) in row.iter().zip(wrow) {
            acc = acc.add_scaled(w, r);
        }
    }
    Ok(acc)
}

fn check_informative(m: &MumSet) -> Result<()> {
    let inv_d = 1.0 / m.dim() as f64;
    if m.kappa() <= inv_d + TOL_SINGULAR {
        return Err(MumError::SingularFrame {
            kappa: m.kappa(),
            inv_d,
        });
    }
    Ok(())
}

pub fn reconstruction_operators(m: &MumSet) -> Result<ReconstructionSet> {
    check_informative(m)?;
    let d = m.dim() as f64;
    let kappa = m.kappa();
    let scale = (d - 1.0) / (kappa * d - 1.0);
    let shift = (d - kappa) / (d * d - 1.0);
    let identity = HermitianOperator::identity(m.dim());
    let ops = m
        .measurements()
        .iter()
        .map(|row| {
            row.iter()
                .map(|p| p.add_scaled(-shift, &identity).scale(scale))
                .collect()
        })
        .collect();
    Ok(ReconstructionSet { kappa, ops })
}

/// Linear-inversion estimate `Σ p_b,n R_b,n`. No positivity projection is applied.
pub fn reconstruct_state(m: &MumSet, p: &ProbabilityTable) -> Result<HermitianOperator> {
    if p.dim() != m.dim() || p.num_settings() != m.num_measurements() {
        return Err(MumError::ShapeMismatch(format!(
            "table is {}x{}, measurement set is {}x{}",
            p.num_settings(),
            p.dim(),
            m.num_measurements(),
            m.dim()
        )));
    }
    reconstruction_operators(m)?.apply(p)
}

/// [`reconstruct_state`] together with a density-matrix validation of the estimate.
pub fn reconstruct_with_report(
    m: &MumSet,
    p: &ProbabilityTable,
) -> Result<(HermitianOperator, DensityReport)> {
    let rho = reconstruct_state(m, p)?;
    let report = validate_density(&rho);
    Ok((rho, report))
}

/// The `d²`-outcome measurement. Elements are ordered `(b, n)` row-major over
/// `n < d-1`, followed by the pooled element.
#[derive(Clone, Debug)]
pub struct SquarePovm {
    pub dim: usize,
    pub elements: Vec<HermitianOperator>,
    /// Reconstruction operators in the same order; `None` when `κ = 1/d`.
    pub theta: Option<Vec<HermitianOperator>>,
}

impl SquarePovm {
    pub fn num_outcomes(&self) -> usize {
        self.elements.len()
    }

    pub fn probabilities(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        if rho.dim() != self.dim {
            return Err(MumError::DimensionMismatch {
                left: self.dim,
                right: rho.dim(),
            });
        }
        Ok(self
            .elements
            .iter()
            .map(|e| e.matrix().hs_inner(rho.operator().matrix()).re)
            .collect())
    }

    /// `Σ_k q_k Θ_k`
    pub fn reconstruct(&self, q: &[f64]) -> Result<HermitianOperator> {
        let theta = self.theta.as_ref().ok_or(MumError::SingularFrame {
            kappa: 1.0 / self.dim as f64,
            inv_d: 1.0 / self.dim as f64,
        })?;
        if q.len() != theta.len() {
            return Err(MumError::ShapeMismatch(format!(
                "{} probabilities for {} outcomes",
                q.len(),
                theta.len()
            )));
        }
        let mut acc = HermitianOperator::zeros(self.dim);
        for (th, &w) in theta.iter().zip(q) {
            acc = acc.add_scaled(w, th);
        }
        Ok(acc)
    }
}

pub fn build_square_povm(m: &MumSet) -> Result<SquarePovm> {
    let d = m.dim();
    let inv = 1.0 / (d as f64 + 1.0);
    let mut elements = Vec::with_capacity(d * d);
    let mut pooled = HermitianOperator::zeros(d);
    for row in m.measurements() {
        for p in &row[..d - 1] {
            elements.push(p.scale(inv));
        }
        pooled = pooled.add(&row[d - 1]);
    }
    elements.push(pooled.scale(inv));
    for (k, e) in elements.iter().enumerate() {
        let l = e.min_eigenvalue()?;
        if l < -TOL_PSD {
            return Err(MumError::InvalidMeasurement(format!(
                "square POVM element {} has eigenvalue {l:e}",
                k + 1
            )));
        }
    }
    let theta = if check_informative(m).is_ok() {
        Some(square_reconstruction_operators(m)?)
    } else {
        None
    };
    Ok(SquarePovm {
        dim: d,
        elements,
        theta,
    })
}

/// Dual basis of the `d²`-outcome measurement.
///
/// The pooled outcome only reveals `Σ_b p_b,d`, so the individual last-outcome
/// probabilities are eliminated through `p_b,d = 1 - Σ_{n<d} p_b,n` and
/// `Σ_k q_k = 1`:
///
/// ```text
/// Θ_b,n = (d+1) (R_b,n - R_b,d) + Σ_b' R_b',d     n < d
/// Θ_pool = Σ_b R_b,d
/// ```
///
/// The elements form a basis of the Hermitian operators, so this dual is unique.
pub fn square_reconstruction_operators(m: &MumSet) -> Result<Vec<HermitianOperator>> {
    let r = reconstruction_operators(m)?;
    let d = m.dim();
    let scale = d as f64 + 1.0;
    let pooled = r
        .ops
        .iter()
        .fold(HermitianOperator::zeros(d), |acc, row| acc.add(&row[d - 1]));
    let mut theta = Vec::with_capacity(d * d);
    for row in &r.ops {
        let last = &row[d - 1];
        for op in &row[..d - 1] {
            theta.push(op.sub(last).scale(scale).add(&pooled));
        }
    }
    theta.push(pooled);
    Ok(theta)
}

/// Integer outcome counts, one row per measurement setting.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountTable {
    pub dim: usize,
    pub shots: u64,
    pub counts: Vec<Vec<u64>>,
}

impl CountTable {
    pub fn frequencies(&self) -> Result<ProbabilityTable> {
        let probs = self
            .counts
            .iter()
            .map(|row| {
                let total: u64 = row.iter().sum();
                row.iter().map(|&c| c as f64 / total as f64).collect()
            })
            .collect();
        ProbabilityTable::new(self.dim, probs)
    }
}

/// One multinomial draw of `shots` trials from `probs` (clamped to `[0, 1]`,
/// renormalized), by sequential conditional binomials.
pub fn multinomial<R: Rng + ?Sized>(probs: &[f64], shots: u64, rng: &mut R) -> Result<Vec<u64>> {
    let clamped: Vec<f64> = probs.iter().map(|p| p.clamp(0.0, 1.0)).collect();
    let total: f64 = clamped.iter().sum();
    if !(total > 0.0) || probs.iter().any(|p| !p.is_finite()) {
        return Err(MumError::InvalidProbabilities(format!(
            "cannot sample from {probs:?}"
        )));
    }
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = shots;
    let mut mass = total;
    for (k, &p) in clamped.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if k + 1 == clamped.len() {
            counts[k] = remaining;
            break;
        }
        let q = (p / mass).clamp(0.0, 1.0);
        let c = Binomial::new(remaining, q)
            .map_err(|e| MumError::InvalidProbabilities(e.to_string()))?
            .sample(rng);
        counts[k] = c;
        remaining -= c;
        mass -= p;
    }
    Ok(counts)
}

/// Samples every setting independently with `shots` trials. Row `b` uses
/// stream `b` of `seed`.
pub fn sample_counts(p: &ProbabilityTable, shots: u64, seed: u64) -> Result<CountTable> {
    if shots == 0 {
        return Err(MumError::InvalidProbabilities(
            "shots must be positive".into(),
        ));
    }
    let counts = p
        .rows()
        .iter()
        .enumerate()
        .map(|(b, row)| multinomial(row, shots, &mut task_rng(seed, b as u64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(CountTable {
        dim: p.dim(),
        shots,
        counts,
    })
}

/// Single-budget sampling for one POVM, e.g. the `d²`-outcome measurement.
pub fn sample_outcomes(probs: &[f64], shots: u64, seed: u64) -> Result<Vec<u64>> {
    if shots == 0 {
        return Err(MumError::InvalidProbabilities(
            "shots must be positive".into(),
        ));
    }
    multinomial(probs, shots, &mut task_rng(seed, 0))
}

/// Singular values (descending) of the linear map from Hermitian operators
/// (real coordinates in an orthonormal basis) to outcome probabilities.
pub fn measurement_map_singular_values(m: &MumSet) -> Result<Vec<f64>> {
    let d = m.dim();
    let mut coords = vec![HermitianOperator::identity(d).scale(1.0 / (d as f64).sqrt())];
    coords.extend(gellmann_basis(d)?);
    let rows: Vec<Vec<f64>> = m
        .measurements()
        .iter()
        .flatten()
        .map(|p| {
            coords
                .iter()
                .map(|e| p.matrix().hs_inner(e.matrix()).re)
                .collect()
        })
        .collect();
    let k = coords.len();
    let mut gram = crate::operator::ComplexMatrix::zeros(k);
    for i in 0..k {
        for j in 0..k {
            let s: f64 = rows.iter().map(|r| r[i] * r[j]).sum();
            gram[(i, j)] = Complex64::new(s, 0.0);
        }
    }
    let es = hermitian_eigensystem(&HermitianOperator::new(gram)?)?;
    Ok(es
        .eigenvalues
        .iter()
        .rev()
        .map(|&l| l.max(0.0).sqrt())
        .collect())
}
