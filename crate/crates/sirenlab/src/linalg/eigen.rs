//! Symmetric eigendecomposition by cyclic Jacobi rotations.
//!
//! Matrices in scope are at most a few hundred rows, mostly PSD kernels,
//! where Jacobi is simple and accurate to near machine precision.

use super::{DenseMatrix, LinalgError};

const MAX_SWEEPS: usize = 60;

#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Eigenvalues sorted descending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the eigenvalue order.
    pub eigenvectors: DenseMatrix,
}

/// Eigendecomposition of a symmetric matrix. The input is symmetrized as
/// `(M + M^T)/2` first, so mild asymmetry from round-off is tolerated.
pub fn eigh_symmetric(m: &DenseMatrix) -> Result<SymmetricEigen, LinalgError> {
    if m.rows() != m.cols() {
        return Err(LinalgError::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    let n = m.rows();
    let mut a = m.symmetrized();
    let mut v = DenseMatrix::identity(n);
    let mut d: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();

    if n == 1 {
        return Ok(SymmetricEigen { eigenvalues: d, eigenvectors: v });
    }

    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut converged = false;
    for sweep in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n - 1 {
            for q in p + 1..n {
                off += a.get(p, q).abs();
            }
        }
        if off <= 1e-15 * scale {
            converged = true;
            break;
        }
        // Threshold the first sweeps so tiny elements do not trigger
        // rotations before the big ones are annihilated.
        let tresh = if sweep < 3 { 0.2 * off / (n * n) as f64 } else { 0.0 };

        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a.get(p, q);
                let g = 100.0 * apq.abs();
                if sweep > 3 && d[p].abs() + g == d[p].abs() && d[q].abs() + g == d[q].abs() {
                    a.set(p, q, 0.0);
                    a.set(q, p, 0.0);
                    continue;
                }
                if apq.abs() <= tresh {
                    continue;
                }
                let h = d[q] - d[p];
                let t = if h.abs() + g == h.abs() {
                    apq / h
                } else {
                    let theta = 0.5 * h / apq;
                    let mut t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                    if theta < 0.0 {
                        t = -t;
                    }
                    t
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                let h = t * apq;
                d[p] -= h;
                d[q] += h;
                a.set(p, q, 0.0);
                a.set(q, p, 0.0);

                let rotate = |m: &mut DenseMatrix, i: usize, j: usize, k: usize, l: usize| {
                    let g = m.get(i, j);
                    let hh = m.get(k, l);
                    m.set(i, j, g - s * (hh + g * tau));
                    m.set(k, l, hh + s * (g - hh * tau));
                };
                for j in 0..p {
                    rotate(&mut a, j, p, j, q);
                }
                for j in p + 1..q {
                    rotate(&mut a, p, j, j, q);
                }
                for j in q + 1..n {
                    rotate(&mut a, p, j, q, j);
                }
                for j in 0..n {
                    rotate(&mut v, j, p, j, q);
                }
            }
        }
    }
    if !converged {
        return Err(LinalgError::ConvergenceFailure { what: "jacobi eigendecomposition", budget: MAX_SWEEPS });
    }

    // Sort descending, permuting eigenvector columns along.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].partial_cmp(&d[i]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let eigenvectors = DenseMatrix::from_fn(n, n, |i, j| v.get(i, order[j]));
    Ok(SymmetricEigen { eigenvalues, eigenvectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Rng;

    fn random_symmetric(rng: &mut Rng, n: usize) -> DenseMatrix {
        let raw = DenseMatrix::from_fn(n, n, |_, _| rng.uniform(-1.0, 1.0));
        raw.symmetrized()
    }

    #[test]
    fn diagonal_matrix_sorted_descending() {
        let m = DenseMatrix::from_rows(&[
            vec![3.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 2.0],
        ]);
        let e = eigh_symmetric(&m).unwrap();
        assert_eq!(e.eigenvalues, vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn classic_two_by_two() {
        let m = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let e = eigh_symmetric(&m).unwrap();
        assert!((e.eigenvalues[0] - 3.0).abs() <= 1e-12);
        assert!((e.eigenvalues[1] - 1.0).abs() <= 1e-12);
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        // Eigenvectors are defined up to sign.
        let v0 = e.eigenvectors.col(0);
        let v1 = e.eigenvectors.col(1);
        assert!((v0[0] * inv_sqrt2 + v0[1] * inv_sqrt2).abs() > 1.0 - 1e-12);
        assert!((v1[0] * inv_sqrt2 - v1[1] * inv_sqrt2).abs() > 1.0 - 1e-12);
    }

    #[test]
    fn reconstruction_oracle_on_random_matrix() {
        let mut rng = Rng::seed_from_u64(11);
        let m = random_symmetric(&mut rng, 8);
        let e = eigh_symmetric(&m).unwrap();
        let lambda = DenseMatrix::from_fn(8, 8, |i, j| if i == j { e.eigenvalues[i] } else { 0.0 });
        let rebuilt = e.eigenvectors.matmul(&lambda).matmul(&e.eigenvectors.transpose());
        let err = rebuilt.sub(&m).frobenius_norm();
        assert!(err <= 1e-9 * m.frobenius_norm().max(1.0), "err = {err}");
    }

    #[test]
    fn eigenvectors_are_orthonormal_and_satisfy_residual() {
        let mut rng = Rng::seed_from_u64(23);
        for n in [2usize, 5, 16, 33] {
            let m = random_symmetric(&mut rng, n);
            let e = eigh_symmetric(&m).unwrap();
            let vtv = e.eigenvectors.matmul_transa(&e.eigenvectors);
            let eye = DenseMatrix::identity(n);
            assert!(vtv.sub(&eye).frobenius_norm() <= 1e-10 * n as f64);
            for j in 0..n {
                let v = e.eigenvectors.col(j);
                let mv = m.matmul(&DenseMatrix::column(&v));
                let mut resid = 0.0;
                for i in 0..n {
                    resid += (mv.get(i, 0) - e.eigenvalues[j] * v[i]).powi(2);
                }
                assert!(resid.sqrt() <= 1e-9 * m.frobenius_norm().max(1.0));
            }
        }
    }

    #[test]
    fn trace_equals_eigenvalue_sum() {
        let mut rng = Rng::seed_from_u64(31);
        let m = random_symmetric(&mut rng, 12);
        let e = eigh_symmetric(&m).unwrap();
        let sum: f64 = e.eigenvalues.iter().sum();
        assert!((sum - m.trace()).abs() <= 1e-10 * m.trace().abs().max(1.0));
    }

    #[test]
    fn non_square_is_rejected() {
        let m = DenseMatrix::zeros(2, 3);
        assert!(matches!(eigh_symmetric(&m), Err(LinalgError::NotSquare { .. })));
    }
}
