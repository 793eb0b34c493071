//! Entropic uncertainty of a complete measurement set.
//!
//! For any state the average Shannon entropy over the `d+1` settings is at
//! least `log((d+1)/(1+κ))`. Since each setting can be intrinsically noisy,
//! the unbiasedness measure subtracts each setting's state-independent
//! uncertainty `ΔP_b = min_ρ H(P_b, ρ)`:
//!
//! ```text
//! υ(ρ) = mean_b [H(P_b, ρ) - ΔP_b]  >=  log((d+1)/(1+κ)) - mean_b ΔP_b
//! ```

use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::basis::OperatorGrid;
use crate::error::{MumError, Result};
use crate::mum::{
    build_f_operators, build_mum_from_f, kappa_of_t, t_of_kappa, t_range, FOperatorSet, MumSet,
};
use crate::operator::{ComplexMatrix, DensityMatrix, HermitianOperator, TOL_PSD};
use crate::random::{derive_seed, haar_vector, random_state_with, task_rng};
use crate::tomography::{born_probabilities, ProbabilityTable};

#[derive(Clone, Debug, PartialEq)]
pub struct EntropyConfig {
    /// Logarithm base; 2 gives bits.
    pub base: f64,
    /// Random restarts of the entropy minimizer.
    pub restarts: usize,
    /// Iteration cap per restart.
    pub iterations: usize,
    /// Random states per point of a κ scan.
    pub samples: usize,
    pub seed: u64,
}

impl Default for EntropyConfig {
    fn default() -> Self {
        Self {
            base: 2.0,
            restarts: 200,
            iterations: 500,
            samples: 10_000,
            seed: 0,
        }
    }
}

impl EntropyConfig {
    fn check(&self) -> Result<()> {
        if !(self.base > 1.0) {
            return Err(MumError::InvalidProbabilities(format!(
                "log base must exceed 1, got {}",
                self.base
            )));
        }
        Ok(())
    }
}

/// `-Σ p log_base p`, with `0 log 0 = 0`.
pub fn shannon_entropy(p: &[f64], base: f64) -> Result<f64> {
    if !(base > 1.0) {
        return Err(MumError::InvalidProbabilities(format!("log base {base}")));
    }
    if p.iter().any(|&x| !(x >= -1e-12)) {
        return Err(MumError::InvalidProbabilities(format!(
            "negative entry in {p:?}"
        )));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > 1e-9 {
        return Err(MumError::InvalidProbabilities(format!(
            "entries sum to {s}"
        )));
    }
    Ok(entropy_nats(p) / base.ln())
}

fn entropy_nats(p: &[f64]) -> f64 {
    p.iter()
        .map(|&x| x.clamp(0.0, 1.0))
        .filter(|&x| x > 0.0)
        .map(|x| -x * x.ln())
        .sum()
}

/// Coefficients `r_b,n` with `ρ = I/d + Σ r_b,n F_b,n`, gauge-fixed to
/// `Σ_n r_b,n = 0` in every row.
#[derive(Clone, Debug, PartialEq)]
pub struct StateExpansion {
    pub dim: usize,
    pub coeffs: Vec<Vec<f64>>,
}

impl StateExpansion {
    pub fn reconstruct(&self, f: &FOperatorSet) -> HermitianOperator {
        let mut acc = HermitianOperator::maximally_mixed(self.dim);
        for (b, row) in self.coeffs.iter().enumerate() {
            for (n, &r) in row.iter().enumerate() {
                acc = acc.add_scaled(r, f.get(b, n));
            }
        }
        acc
    }

    /// `p_b,n = 1/d + t β² (d r_b,n - Σ_n' r_b,n')`, `β = 1 + sqrt d`.
    pub fn probabilities(&self, t: f64) -> Vec<Vec<f64>> {
        let d = self.dim as f64;
        let b2 = (1.0 + d.sqrt()).powi(2);
        self.coeffs
            .iter()
            .map(|row| {
                let s: f64 = row.iter().sum();
                row.iter()
                    .map(|&r| 1.0 / d + t * b2 * (d * r - s))
                    .collect()
            })
            .collect()
    }

    /// `Σ_b [d Σ_n r² - (Σ_n r)²]`; equals `(d-1)/(d β²)` for pure states.
    pub fn purity_sum(&self) -> f64 {
        let d = self.dim as f64;
        self.coeffs
            .iter()
            .map(|row| {
                let s: f64 = row.iter().sum();
                let sq: f64 = row.iter().map(|r| r * r).sum();
                d * sq - s * s
            })
            .sum()
    }

    /// Value [`Self::purity_sum`] takes on pure states.
    pub fn pure_state_purity_sum(dim: usize) -> f64 {
        let d = dim as f64;
        (d - 1.0) / (d * (1.0 + d.sqrt()).powi(2))
    }

    /// Adds `shift[b]` to every coefficient of row `b`. Leaves the represented
    /// state unchanged because each row of operators sums to zero.
    pub fn regauged(&self, shift: &[f64]) -> Self {
        Self {
            dim: self.dim,
            coeffs: self
                .coeffs
                .iter()
                .zip(shift)
                .map(|(row, &c)| row.iter().map(|r| r + c).collect())
                .collect(),
        }
    }
}

/// Expansion of `rho` over the `F_b,n`. With the zero-row-sum gauge the
/// coefficients are `r_b,n = Tr(ρ F_b,n) / (d β²)`.
pub fn expand_in_f_basis(f: &FOperatorSet, rho: &DensityMatrix) -> Result<StateExpansion> {
    let d = f.dim();
    if rho.dim() != d {
        return Err(MumError::DimensionMismatch {
            left: d,
            right: rho.dim(),
        });
    }
    let norm = d as f64 * (1.0 + (d as f64).sqrt()).powi(2);
    let coeffs = f
        .rows()
        .iter()
        .map(|row| {
            row.iter()
                .map(|fo| fo.matrix().hs_inner(rho.operator().matrix()).re / norm)
                .collect()
        })
        .collect();
    Ok(StateExpansion { dim: d, coeffs })
}

fn average_entropy_of(p: &ProbabilityTable, cfg: &EntropyConfig) -> f64 {
    let total: f64 = p.rows().iter().map(|row| entropy_nats(row)).sum();
    total / p.num_settings() as f64 / cfg.base.ln()
}

/// Mean Shannon entropy over all settings.
pub fn average_entropy(m: &MumSet, rho: &DensityMatrix, cfg: &EntropyConfig) -> Result<f64> {
    cfg.check()?;
    Ok(average_entropy_of(&born_probabilities(m, rho)?, cfg))
}

/// `log_base((d+1)/(1+κ))`
pub fn entropic_bound(dim: usize, kappa: f64, base: f64) -> Result<f64> {
    let lo = 1.0 / dim as f64;
    if !(kappa >= lo - 1e-12 && kappa <= 1.0 + 1e-12) || dim < 2 {
        return Err(MumError::KappaOutOfRange { kappa, lo, hi: 1.0 });
    }
    if !(base > 1.0) {
        return Err(MumError::InvalidProbabilities(format!("log base {base}")));
    }
    Ok(((dim as f64 + 1.0) / (1.0 + kappa)).ln() / base.ln())
}

/// `Σ_b,n p²` for a pure state; equals `1 + κ`.
pub fn pure_state_square_sum(m: &MumSet, rho: &DensityMatrix) -> Result<f64> {
    let purity = rho.purity();
    if (purity - 1.0).abs() > 1e-10 {
        return Err(MumError::NotPure { purity });
    }
    Ok(born_probabilities(m, rho)?.square_sum())
}

/// Best pure state found by [`min_entropy_over_states`].
#[derive(Clone, Debug)]
pub struct MinEntropy {
    /// Smallest entropy found. An upper bound on the true minimum.
    pub delta: f64,
    pub state: Vec<Complex64>,
}

fn check_povm(measurement: &[HermitianOperator]) -> Result<usize> {
    let d = measurement
        .first()
        .map(|p| p.dim())
        .ok_or_else(|| MumError::InvalidMeasurement("empty measurement".into()))?;
    let mut total = HermitianOperator::zeros(d);
    for (n, p) in measurement.iter().enumerate() {
        if p.dim() != d {
            return Err(MumError::DimensionMismatch {
                left: d,
                right: p.dim(),
            });
        }
        let l = p.min_eigenvalue()?;
        if l < -TOL_PSD {
            return Err(MumError::InvalidMeasurement(format!(
                "element n={} has eigenvalue {l:e}",
                n + 1
            )));
        }
        total = total.add(p);
    }
    let r = total.max_abs_diff(&HermitianOperator::identity(d));
    if r > 1e-10 {
        return Err(MumError::InvalidMeasurement(format!(
            "elements sum to identity only within {r:e}"
        )));
    }
    Ok(d)
}

struct EntropyLandscape<'a> {
    ops: Vec<&'a ComplexMatrix>,
}

impl EntropyLandscape<'_> {
    /// Entropy in nats.
    fn value(&self, psi: &[Complex64]) -> f64 {
        self.ops
            .iter()
            .map(|p| {
                let x = p.mul_vec(psi);
                psi.iter()
                    .zip(&x)
                    .map(|(a, b)| (a.conj() * b).re)
                    .sum::<f64>()
            })
            .map(|x| x.clamp(0.0, 1.0))
            .filter(|&x| x > 0.0)
            .map(|x| -x * x.ln())
            .sum()
    }

    /// Entropy (nats) and its gradient projected on the tangent space of the unit sphere.
    fn value_and_gradient(&self, psi: &[Complex64]) -> (f64, Vec<Complex64>) {
        let mut h = 0.0;
        let mut g = vec![Complex64::new(0.0, 0.0); psi.len()];
        for p in &self.ops {
            let x = p.mul_vec(psi);
            let prob: f64 = psi.iter().zip(&x).map(|(a, b)| (a.conj() * b).re).sum();
            if prob > 0.0 {
                let lp = prob.ln();
                h -= prob * lp;
                let w = -2.0 * (lp + 1.0);
                for (gi, xi) in g.iter_mut().zip(&x) {
                    *gi += xi * w;
                }
            }
        }
        let radial: f64 = psi.iter().zip(&g).map(|(a, b)| (a.conj() * b).re).sum();
        for (gi, a) in g.iter_mut().zip(psi) {
            *gi -= a * radial;
        }
        (h, g)
    }

    /// Normalized-step gradient descent with step doubling on success and
    /// halving on non-decrease.
    fn descend(&self, start: Vec<Complex64>, iterations: usize) -> (f64, Vec<Complex64>) {
        let mut psi = start;
        let mut step = 0.1;
        let (mut h, mut g) = self.value_and_gradient(&psi);
        for _ in 0..iterations {
            let gnorm = g.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if gnorm < 1e-15 {
                break;
            }
            let mut moved = false;
            while step > 1e-16 {
                let cand = normalize(psi.iter().zip(&g).map(|(a, b)| a - b * step).collect());
                let hc = self.value(&cand);
                if hc < h {
                    psi = cand;
                    step = (step * 2.0).min(10.0);
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if !moved {
                break;
            }
            (h, g) = self.value_and_gradient(&psi);
        }
        (h, psi)
    }
}

fn normalize(v: Vec<Complex64>) -> Vec<Complex64> {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}

/// Estimates `ΔM = min_ρ H(M, ρ)` by multi-start descent over pure states.
///
/// Entropy is concave in `ρ` and the outcome distribution is affine in `ρ`,
/// so the minimum sits on a pure state. Starts are `cfg.restarts` Haar-random
/// vectors (restart `r` uses stream `r` of `cfg.seed`) plus the top eigenvector
/// of every element. The result is an upper bound on the true minimum.
pub fn min_entropy_over_states(
    measurement: &[HermitianOperator],
    cfg: &EntropyConfig,
) -> Result<MinEntropy> {
    cfg.check()?;
    let d = check_povm(measurement)?;
    let landscape = EntropyLandscape {
        ops: measurement.iter().map(|p| p.matrix()).collect(),
    };

    let mut starts: Vec<Vec<Complex64>> = (0..cfg.restarts)
        .map(|r| haar_vector(d, &mut task_rng(cfg.seed, r as u64)))
        .collect();
    for p in measurement {
        let es = p.eigensystem()?;
        starts.push(es.eigenvectors[d - 1].clone());
    }

    let results: Vec<(f64, Vec<Complex64>)> = starts
        .into_par_iter()
        .map(|s| landscape.descend(s, cfg.iterations))
        .collect();
    let (best_h, best_psi) = results
        .into_iter()
        .reduce(|a, b| if b.0 < a.0 { b } else { a })
        .expect("at least one start");
    Ok(MinEntropy {
        delta: best_h / cfg.base.ln(),
        state: best_psi,
    })
}

/// `ΔP_b` for every setting. Setting `b` runs with seed `derive_seed(cfg.seed, b)`.
pub fn measurement_uncertainties(m: &MumSet, cfg: &EntropyConfig) -> Result<Vec<MinEntropy>> {
    m.measurements()
        .iter()
        .enumerate()
        .map(|(b, row)| {
            let sub = EntropyConfig {
                seed: derive_seed(cfg.seed, b as u64),
                ..cfg.clone()
            };
            min_entropy_over_states(row, &sub)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Unbiasedness {
    /// `mean_b [H(P_b, ρ) - ΔP_b]`
    pub upsilon: f64,
    /// `log((d+1)/(1+κ)) - mean_b ΔP_b`
    pub lower_bound: f64,
}

pub fn unbiasedness_measure(
    m: &MumSet,
    rho: &DensityMatrix,
    deltas: &[f64],
    cfg: &EntropyConfig,
) -> Result<Unbiasedness> {
    if deltas.len() != m.num_measurements() {
        return Err(MumError::ShapeMismatch(format!(
            "{} uncertainties for {} measurements",
            deltas.len(),
            m.num_measurements()
        )));
    }
    let mean_delta = deltas.iter().sum::<f64>() / deltas.len() as f64;
    let h = average_entropy(m, rho, cfg)?;
    Ok(Unbiasedness {
        upsilon: h - mean_delta,
        lower_bound: entropic_bound(m.dim(), m.kappa(), cfg.base)? - mean_delta,
    })
}

/// Entropic figures for one state under one measurement set.
#[derive(Clone, Debug, PartialEq)]
pub struct UncertaintyReport {
    pub dim: usize,
    pub t: f64,
    pub kappa: f64,
    pub base: f64,
    /// `ΔP_b` estimates (upper bounds).
    pub deltas: Vec<f64>,
    pub average_entropy: f64,
    pub bound: f64,
    pub upsilon: f64,
    pub upsilon_bound: f64,
}

impl fmt::Display for UncertaintyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "d = {}, t = {:.12}, kappa = {:.12}, log base {}",
            self.dim, self.t, self.kappa, self.base
        )?;
        writeln!(f, "average entropy      {:.12}", self.average_entropy)?;
        writeln!(f, "entropic bound       {:.12}", self.bound)?;
        writeln!(
            f,
            "margin               {:.6e}",
            self.average_entropy - self.bound
        )?;
        for (b, d) in self.deltas.iter().enumerate() {
            writeln!(f, "delta P(b={})         {:.12} (upper bound)", b + 1, d)?;
        }
        writeln!(f, "upsilon              {:.12}", self.upsilon)?;
        write!(f, "upsilon lower bound  {:.12}", self.upsilon_bound)
    }
}

/// Average entropy and bound for `rho`; with `with_deltas`, also the
/// per-setting uncertainties and the unbiasedness measure.
pub fn uncertainty_report(
    m: &MumSet,
    rho: &DensityMatrix,
    cfg: &EntropyConfig,
    with_deltas: bool,
) -> Result<UncertaintyReport> {
    let average_entropy = average_entropy(m, rho, cfg)?;
    let bound = entropic_bound(m.dim(), m.kappa(), cfg.base)?;
    let deltas: Vec<f64> = if with_deltas {
        measurement_uncertainties(m, cfg)?
            .into_iter()
            .map(|r| r.delta)
            .collect()
    } else {
        Vec::new()
    };
    let mean_delta = if deltas.is_empty() {
        0.0
    } else {
        deltas.iter().sum::<f64>() / deltas.len() as f64
    };
    Ok(UncertaintyReport {
        dim: m.dim(),
        t: m.t(),
        kappa: m.kappa(),
        base: cfg.base,
        deltas,
        average_entropy,
        bound,
        upsilon: average_entropy - mean_delta,
        upsilon_bound: bound - mean_delta,
    })
}

/// One row of a κ scan.
#[derive(Clone, Debug, PartialEq)]
pub struct KappaScanRow {
    pub kappa: f64,
    pub t: f64,
    pub bound: f64,
    pub delta_mean: f64,
    pub upsilon_bound: f64,
    pub upsilon_min_sampled: f64,
    pub states: usize,
    pub seed: u64,
}

/// How the scan draws the rank of each random state.
pub const SCAN_RANK_RULE: &str = "uniform over 1..=d";

const STATE_LABEL: u64 = 0x5354_4154;
const DELTA_LABEL: u64 = 0x4445_4c54;

/// The sampled state ensemble of a scan: state `j` uses stream `j`, first
/// drawing its rank uniformly from `1..=d`.
pub fn scan_states(dim: usize, count: usize, seed: u64) -> Result<Vec<DensityMatrix>> {
    let base = derive_seed(seed, STATE_LABEL);
    (0..count)
        .into_par_iter()
        .map(|j| {
            let mut rng = task_rng(base, j as u64);
            let rank = rng.random_range(1..=dim);
            random_state_with(dim, rank, &mut rng)
        })
        .collect()
}

/// Unbiasedness figures along a list of κ values for one grid.
///
/// Every κ is mapped to the positive `t` and must satisfy `1/d < κ <= κ(t_hi)`.
/// All κ points share the same state ensemble. Rows come out in ascending κ.
pub fn kappa_scan(
    grid: &OperatorGrid,
    kappa_values: &[f64],
    cfg: &EntropyConfig,
) -> Result<Vec<KappaScanRow>> {
    cfg.check()?;
    let d = grid.dim();
    let f = build_f_operators(grid)?;
    let range = t_range(&f)?;
    let kappa_hi = kappa_of_t(d, range.t_hi);
    let lo = 1.0 / d as f64;

    let mut kappas = kappa_values.to_vec();
    kappas.sort_by(f64::total_cmp);
    for &k in &kappas {
        if !(k > lo) || k > kappa_hi + 1e-12 {
            return Err(MumError::KappaOutOfRange {
                kappa: k,
                lo,
                hi: kappa_hi,
            });
        }
    }

    let states = scan_states(d, cfg.samples, cfg.seed)?;
    let mut rows = Vec::with_capacity(kappas.len());
    for (i, &kappa) in kappas.iter().enumerate() {
        let t = t_of_kappa(d, kappa)?.min(range.t_hi);
        let m = build_mum_from_f(&f, t)?;
        let delta_cfg = EntropyConfig {
            seed: derive_seed(derive_seed(cfg.seed, DELTA_LABEL), i as u64),
            ..cfg.clone()
        };
        let deltas = measurement_uncertainties(&m, &delta_cfg)?;
        let delta_mean = deltas.iter().map(|r| r.delta).sum::<f64>() / deltas.len() as f64;
        let bound = entropic_bound(d, m.kappa(), cfg.base)?;
        let min_entropy = states
            .par_iter()
            .map(|rho| born_probabilities(&m, rho).map(|p| average_entropy_of(&p, cfg)))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        rows.push(KappaScanRow {
            kappa: m.kappa(),
            t,
            bound,
            delta_mean,
            upsilon_bound: bound - delta_mean,
            upsilon_min_sampled: min_entropy - delta_mean,
            states: cfg.samples,
            seed: cfg.seed,
        });
    }
    Ok(rows)
}

/// `count` evenly spaced κ values in `(1/d, kappa_max]`, excluding `1/d`.
pub fn kappa_grid(dim: usize, kappa_max: f64, count: usize) -> Vec<f64> {
    let lo = 1.0 / dim as f64;
    (1..=count)
        .map(|i| lo + (kappa_max - lo) * i as f64 / count as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::gellmann_grid;
    use crate::mum::t_opt;
    use crate::random::random_state;

    fn set_at(d: usize, t: Option<f64>) -> (FOperatorSet, MumSet) {
        let f = build_f_operators(&gellmann_grid(d).unwrap()).unwrap();
        let t = t.unwrap_or_else(|| t_opt(&f).unwrap());
        let m = build_mum_from_f(&f, t).unwrap();
        (f, m)
    }

    fn bits() -> EntropyConfig {
        EntropyConfig::default()
    }

    #[test]
    fn entropy_examples() {
        assert!((shannon_entropy(&[1.0 / 6.0; 6], 2.0).unwrap() - 6f64.log2()).abs() < 1e-14);
        assert_eq!(shannon_entropy(&[1.0, 0.0, 0.0], 2.0).unwrap(), 0.0);
        assert!((shannon_entropy(&[0.5, 0.5, 0.0], 2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(shannon_entropy(&[0.5, 0.4], 2.0).is_err());
        assert!(shannon_entropy(&[1.1, -0.1], 2.0).is_err());
        assert!(shannon_entropy(&[0.5, 0.5], 1.0).is_err());
    }

    #[test]
    fn bound_examples() {
        assert!((entropic_bound(5, 1.0, 2.0).unwrap() - 3f64.log2()).abs() < 1e-15);
        assert!(
            (entropic_bound(6, 2.0 / 9.0, 2.0).unwrap() - (63.0f64 / 11.0).log2()).abs() < 1e-14
        );
        assert!((entropic_bound(6, 2.0 / 9.0, 2.0).unwrap() - 2.5179).abs() < 1e-4);
        assert!((entropic_bound(4, 0.25, 2.0).unwrap() - 2.0).abs() < 1e-14);
        assert!(entropic_bound(4, 0.2, 2.0).is_err());
        assert!(entropic_bound(4, 1.2, 2.0).is_err());
    }

    #[test]
    fn maximally_mixed_expansion_is_zero() {
        let (f, _) = set_at(4, None);
        let e = expand_in_f_basis(&f, &DensityMatrix::maximally_mixed(4)).unwrap();
        assert!(e.coeffs.iter().flatten().all(|r| r.abs() < 1e-15));
    }

    #[test]
    fn expansion_identities_for_pure_states() {
        let (f, m) = set_at(3, None);
        for seed in 0..20 {
            let rho = random_state(3, 1, seed).unwrap();
            let e = expand_in_f_basis(&f, &rho).unwrap();
            assert!(e.reconstruct(&f).max_abs_diff(rho.operator()) < 1e-9);
            assert!((e.purity_sum() - StateExpansion::pure_state_purity_sum(3)).abs() < 1e-10);
            let born = born_probabilities(&m, &rho).unwrap();
            for (prow, brow) in e.probabilities(m.t()).iter().zip(born.rows()) {
                for (a, b) in prow.iter().zip(brow) {
                    assert!((a - b).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn expansion_probabilities_are_gauge_invariant() {
        let (f, m) = set_at(4, None);
        let rho = random_state(4, 2, 3).unwrap();
        let e = expand_in_f_basis(&f, &rho).unwrap();
        let shifted = e.regauged(&[0.3, -1.0, 2.5, 0.0, 7.0]);
        assert!(shifted.reconstruct(&f).max_abs_diff(rho.operator()) < 1e-9);
        for (a, b) in e
            .probabilities(m.t())
            .iter()
            .flatten()
            .zip(shifted.probabilities(m.t()).iter().flatten())
        {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn square_sum_identity() {
        let (_, m) = set_at(3, None);
        for seed in 0..100 {
            let rho = random_state(3, 1, seed).unwrap();
            let s = pure_state_square_sum(&m, &rho).unwrap();
            assert!((s - (1.0 + 5.0 / 9.0)).abs() < 1e-10);
        }
        let (_, flat) = set_at(3, Some(0.0));
        let s = pure_state_square_sum(&flat, &random_state(3, 1, 1).unwrap()).unwrap();
        assert!((s - 4.0 / 3.0).abs() < 1e-12);
        let (_, mub) = set_at(2, None);
        let s = pure_state_square_sum(&mub, &random_state(2, 1, 1).unwrap()).unwrap();
        assert!((s - 2.0).abs() < 1e-10);
        assert!(matches!(
            pure_state_square_sum(&m, &random_state(3, 2, 1).unwrap()),
            Err(MumError::NotPure { .. })
        ));
    }

    #[test]
    fn average_entropy_limits() {
        let (_, m) = set_at(5, None);
        let h = average_entropy(&m, &DensityMatrix::maximally_mixed(5), &bits()).unwrap();
        assert!((h - 5f64.log2()).abs() < 1e-12);
        let (_, flat) = set_at(5, Some(0.0));
        let h = average_entropy(&flat, &random_state(5, 1, 4).unwrap(), &bits()).unwrap();
        assert!((h - 5f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn entropy_bound_holds_on_pure_states() {
        let (_, m) = set_at(6, None);
        let bound = entropic_bound(6, 2.0 / 9.0, 2.0).unwrap();
        for seed in 0..1000 {
            let rho = random_state(6, 1, seed).unwrap();
            assert!(average_entropy(&m, &rho, &bits()).unwrap() >= bound - 1e-12);
        }
    }

    #[test]
    fn basis_measurement_has_zero_uncertainty() {
        let (_, m) = set_at(2, None);
        let cfg = EntropyConfig {
            restarts: 20,
            ..bits()
        };
        for b in 0..3 {
            let r = min_entropy_over_states(m.measurement(b), &cfg).unwrap();
            assert!(r.delta <= 1e-6, "b={b}: {}", r.delta);
        }
    }

    #[test]
    fn flat_measurement_has_maximal_uncertainty() {
        let (_, m) = set_at(4, Some(0.0));
        let cfg = EntropyConfig {
            restarts: 5,
            ..bits()
        };
        let r = min_entropy_over_states(m.measurement(0), &cfg).unwrap();
        assert!((r.delta - 2.0).abs() < 1e-12);
    }

    #[test]
    fn min_entropy_rejects_non_povm() {
        let ops = vec![
            HermitianOperator::identity(2),
            HermitianOperator::identity(2),
        ];
        assert!(min_entropy_over_states(&ops, &bits()).is_err());
        let ops = vec![
            HermitianOperator::from_diagonal(&[1.5, 0.0]),
            HermitianOperator::from_diagonal(&[-0.5, 1.0]),
        ];
        assert!(min_entropy_over_states(&ops, &bits()).is_err());
    }

    #[test]
    fn min_entropy_is_bracketed() {
        let (_, m) = set_at(3, None);
        let cfg = EntropyConfig {
            restarts: 20,
            ..bits()
        };
        let r = min_entropy_over_states(m.measurement(0), &cfg).unwrap();
        assert!(r.delta >= 0.0 && r.delta <= 3f64.log2());
        let rho = DensityMatrix::pure(&r.state);
        let p = born_probabilities(&m, &rho).unwrap();
        let h = shannon_entropy(p.row(0), 2.0).unwrap();
        assert!((h - r.delta).abs() < 1e-12);
    }

    #[test]
    fn unbiasedness_examples() {
        let (_, m) = set_at(2, None);
        let zeros = vec![0.0; 3];
        for seed in 0..200 {
            let rho = random_state(2, 1 + seed as usize % 2, seed).unwrap();
            let u = unbiasedness_measure(&m, &rho, &zeros, &bits()).unwrap();
            assert!(u.upsilon >= 1.5f64.log2() - 1e-12);
            assert!(u.upsilon >= u.lower_bound - 1e-9);
        }
        let (_, m) = set_at(4, None);
        let deltas = vec![0.1, 0.2, 0.3, 0.4, 0.5];
        let u =
            unbiasedness_measure(&m, &DensityMatrix::maximally_mixed(4), &deltas, &bits()).unwrap();
        assert!((u.upsilon - (2.0 - 0.3)).abs() < 1e-12);
        assert!(unbiasedness_measure(
            &m,
            &DensityMatrix::maximally_mixed(4),
            &deltas[..3],
            &bits()
        )
        .is_err());
    }

    #[test]
    fn scan_rejects_out_of_range_kappa() {
        let grid = gellmann_grid(3).unwrap();
        let cfg = EntropyConfig {
            restarts: 2,
            iterations: 10,
            samples: 5,
            ..bits()
        };
        assert!(kappa_scan(&grid, &[1.0 / 3.0], &cfg).is_err());
        assert!(kappa_scan(&grid, &[0.6], &cfg).is_err());
    }

    #[test]
    fn small_scan_is_ordered_and_consistent() {
        let grid = gellmann_grid(3).unwrap();
        let cfg = EntropyConfig {
            restarts: 10,
            iterations: 200,
            samples: 200,
            seed: 17,
            ..bits()
        };
        let ks = kappa_grid(3, 5.0 / 9.0, 4);
        let mut shuffled = ks.clone();
        shuffled.reverse();
        let rows = kappa_scan(&grid, &shuffled, &cfg).unwrap();
        assert_eq!(rows.len(), 4);
        for w in rows.windows(2) {
            assert!(w[0].kappa < w[1].kappa);
            assert!(w[0].bound > w[1].bound);
        }
        for r in &rows {
            assert!(r.upsilon_min_sampled >= r.upsilon_bound - 1e-9);
        }
        assert_eq!(rows, kappa_scan(&grid, &ks, &cfg).unwrap());
    }
}
