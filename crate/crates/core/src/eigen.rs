//! Cyclic Jacobi eigensolver for complex Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot `a_pq` with a diagonal
//! unitary and then applies the classical real Jacobi rotation, so a single
//! 2x2 unitary
//!
//! ```text
//! U = [[ c,            s          ],
//!      [ -s e^{-iφ},   c e^{-iφ}  ]]     (a_pq = |a_pq| e^{iφ})
//! ```
//!
//! annihilates the pivot. Sweeps stop once the off-diagonal Frobenius norm
//! drops below `OFF_DIAGONAL_TOL * max(1, ||A||_F)`.

use num_complex::Complex64;

use crate::error::{MumError, Result};
use crate::operator::{ComplexMatrix, HermitianOperator};

pub const OFF_DIAGONAL_TOL: f64 = 1e-13;
const MAX_SWEEPS: usize = 64;

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[i]` belongs to `eigenvalues[i]`.
    pub eigenvectors: Vec<Vec<Complex64>>,
}

impl EigenSystem {
    /// `sum_i λ_i |v_i><v_i|`
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = self.eigenvalues.len();
        let mut m = ComplexMatrix::zeros(d);
        for (lam, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            for i in 0..d {
                for j in 0..d {
                    m[(i, j)] += v[i] * v[j].conj() * *lam;
                }
            }
        }
        m
    }

    /// Max-abs deviation of the eigenvector Gram matrix from the identity.
    pub fn orthonormality_residual(&self) -> f64 {
        let d = self.eigenvectors.len();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let g: Complex64 = self.eigenvectors[i]
                    .iter()
                    .zip(&self.eigenvectors[j])
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - target).norm());
            }
        }
        worst
    }
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let d = a.dim();
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Diagonalizes a Hermitian operator.
pub fn hermitian_eigensystem(op: &HermitianOperator) -> Result<EigenSystem> {
    jacobi(op.matrix())
}

/// Diagonalizes a raw matrix after checking Hermiticity at [`crate::operator::TOL_HERMITIAN`].
pub fn hermitian_eigensystem_of(m: &ComplexMatrix) -> Result<EigenSystem> {
    let residual = m.hermiticity_residual();
    if !(residual <= crate::operator::TOL_HERMITIAN) {
        return Err(MumError::NotHermitian { residual });
    }
    jacobi(m)
}

fn jacobi(input: &ComplexMatrix) -> Result<EigenSystem> {
    let d = input.dim();
    let mut a = input.clone();
    let mut v = ComplexMatrix::identity(d);
    let threshold = OFF_DIAGONAL_TOL * input.frobenius_norm().max(1.0);

    let mut converged = false;
    let mut off = off_diagonal_norm(&a);
    for _ in 0..MAX_SWEEPS {
        if off < threshold {
            converged = true;
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let phase = apq / mag;
                let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * mag);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let u_pp = Complex64::new(c, 0.0);
                let u_pq = Complex64::new(s, 0.0);
                let u_qp = phase.conj() * (-s);
                let u_qq = phase.conj() * c;

                // A <- A U
                for k in 0..d {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * u_pp + akq * u_qp;
                    a[(k, q)] = akp * u_pq + akq * u_qq;
                }
                // A <- U^H A
                for k in 0..d {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
                    a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);

                // V <- V U
                for k in 0..d {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * u_pp + vkq * u_qp;
                    v[(k, q)] = vkp * u_pq + vkq * u_qq;
                }
            }
        }
        off = off_diagonal_norm(&a);
    }
    if !converged && off >= threshold {
        return Err(MumError::NoConvergence {
            sweeps: MAX_SWEEPS,
            off,
        });
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = order
        .iter()
        .map(|&j| (0..d).map(|k| v[(k, j)]).collect())
        .collect();
    Ok(EigenSystem {
        eigenvalues,
        eigenvectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_input() {
        let es = hermitian_eigensystem(&HermitianOperator::from_diagonal(&[1.0, -1.0])).unwrap();
        assert_eq!(es.eigenvalues, vec![-1.0, 1.0]);
    }

    #[test]
    fn scalar_multiple_of_identity() {
        let es = hermitian_eigensystem(&HermitianOperator::identity(3).scale(2.0)).unwrap();
        for l in es.eigenvalues {
            assert!((l - 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn pauli_y() {
        let m =
            ComplexMatrix::from_rows(&[vec![c(0., 0.), c(0., -1.)], vec![c(0., 1.), c(0., 0.)]])
                .unwrap();
        let es = hermitian_eigensystem_of(&m).unwrap();
        assert!((es.eigenvalues[0] + 1.0).abs() < 1e-15);
        assert!((es.eigenvalues[1] - 1.0).abs() < 1e-15);
        assert!(es.reconstruct().max_abs_diff(&m) < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_rows(&[vec![c(0., 0.), c(1., 0.)], vec![c(2., 0.), c(0., 0.)]])
            .unwrap();
        assert!(matches!(
            hermitian_eigensystem_of(&m),
            Err(MumError::NotHermitian { .. })
        ));
    }

    fn hermitian_strategy() -> impl Strategy<Value = ComplexMatrix> {
        (1usize..9).prop_flat_map(|d| {
            proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), d * d).prop_map(move |xs| {
                let mut m = ComplexMatrix::zeros(d);
                for i in 0..d {
                    for j in i..d {
                        let (re, im) = xs[i * d + j];
                        if i == j {
                            m[(i, i)] = c(re, 0.0);
                        } else {
                            m[(i, j)] = c(re, im);
                            m[(j, i)] = c(re, -im);
                        }
                    }
                }
                m
            })
        })
    }

    proptest! {
        #[test]
        fn reconstruction_and_orthonormality(m in hermitian_strategy()) {
            let es = hermitian_eigensystem_of(&m).unwrap();
            prop_assert!(es.reconstruct().max_abs_diff(&m) < 1e-10);
            prop_assert!(es.orthonormality_residual() < 1e-10);
            prop_assert!(es.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn traceless_spectrum_sums_to_zero(m in hermitian_strategy()) {
            let d = m.dim();
            let shift = m.trace().re / d as f64;
            let traceless = &m - &ComplexMatrix::identity(d).scale(shift);
            let es = hermitian_eigensystem_of(&traceless).unwrap();
            prop_assert!(es.eigenvalues.iter().sum::<f64>().abs() < 1e-10);
        }
    }
}
