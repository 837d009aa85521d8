//! Singular values by one-sided Jacobi (Hestenes) column orthogonalization.
//!
//! Deliberately a different route than `eigh_symmetric(M^T M)`, so the two
//! can cross-check each other in tests.

use super::{DenseMatrix, LinalgError};

const MAX_SWEEPS: usize = 60;

/// Singular values of any rectangular matrix, sorted descending.
pub fn singular_values(m: &DenseMatrix) -> Result<Vec<f64>, LinalgError> {
    // Work on the orientation with fewer columns.
    let work = if m.rows() >= m.cols() { m.clone() } else { m.transpose() };
    let (rows, cols) = (work.rows(), work.cols());

    // Column-major scratch so each column is contiguous.
    let mut col: Vec<Vec<f64>> = (0..cols).map(|j| work.col(j)).collect();

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..cols.saturating_sub(1) {
            for j in i + 1..cols {
                let (alpha, beta, gamma) = {
                    let (ci, cj) = (&col[i], &col[j]);
                    let mut alpha = 0.0;
                    let mut beta = 0.0;
                    let mut gamma = 0.0;
                    for k in 0..rows {
                        alpha += ci[k] * ci[k];
                        beta += cj[k] * cj[k];
                        gamma += ci[k] * cj[k];
                    }
                    (alpha, beta, gamma)
                };
                if alpha * beta == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                // Rotate the column pair in place.
                let (head, tail) = col.split_at_mut(j);
                let ci = &mut head[i];
                let cj = &mut tail[0];
                for k in 0..rows {
                    let a = ci[k];
                    let b = cj[k];
                    ci[k] = c * a - s * b;
                    cj[k] = s * a + c * b;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(LinalgError::ConvergenceFailure { what: "one-sided jacobi svd", budget: MAX_SWEEPS });
    }

    let mut sigma: Vec<f64> = col
        .iter()
        .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    sigma.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(sigma)
}
