//! Seeded random states.
//!
//! Every stochastic routine draws from a ChaCha20 stream. The seed picks the
//! key and the task index picks the stream, so `(seed, task)` pairs give
//! independent, reproducible sequences regardless of evaluation order.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{MumError, Result};
use crate::operator::{ComplexMatrix, DensityMatrix, HermitianOperator};

/// Generator for task `task` under master seed `seed`.
pub fn task_rng(seed: u64, task: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(task);
    rng
}

/// Mixes a label into a seed (SplitMix64 finalizer) to derive seeds for sub-tasks.
pub fn derive_seed(seed: u64, label: u64) -> u64 {
    let mut z = seed ^ label.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Standard complex Gaussian, `E|z|^2 = 1`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-random unit vector in `C^d`.
pub fn haar_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..dim).map(|_| complex_gaussian(rng)).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-150 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// Random density matrix of the given rank drawn from `rng`.
///
/// Rank 1 gives a Haar-random pure state. Higher ranks use `G G^H / Tr(G G^H)`
/// with `G` a `d x rank` matrix of standard complex Gaussians.
pub fn random_state_with<R: Rng + ?Sized>(
    dim: usize,
    rank: usize,
    rng: &mut R,
) -> Result<DensityMatrix> {
    if dim == 0 {
        return Err(MumError::InvalidDimension(dim, 1));
    }
    if rank == 0 || rank > dim {
        return Err(MumError::RankOutOfRange { rank, dim });
    }
    if rank == 1 {
        return Ok(DensityMatrix::pure(&haar_vector(dim, rng)));
    }
    let g: Vec<Complex64> = (0..dim * rank).map(|_| complex_gaussian(rng)).collect();
    let mut m = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..rank {
                acc += g[i * rank + k] * g[j * rank + k].conj();
            }
            m[(i, j)] = acc;
        }
    }
    let tr = m.trace().re;
    let op = HermitianOperator::symmetrized(m.scale(1.0 / tr));
    Ok(DensityMatrix::new_unchecked(op))
}

/// Random density matrix of the given rank, reproducible from `seed`.
pub fn random_state(dim: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    random_state_with(dim, rank, &mut task_rng(seed, 0))
}
