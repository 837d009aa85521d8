//! Scalar special functions backing the initialization algebra.

use thiserror::Error;

/// Absolute slack allowed below the branch point `-1/e` before an input is
/// rejected as out of domain.
pub const LAMBERT_DOMAIN_TOL: f64 = 1e-15;

/// Width of the interval above `-1/e` where the square-root series replaces
/// Halley iteration (which stalls at the branch-point singularity).
const BRANCH_SERIES_WIDTH: f64 = 1e-6;

const MAX_HALLEY_STEPS: usize = 50;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MathError {
    #[error("lambert_w0: x = {x} is below the principal-branch domain x >= -1/e")]
    LambertDomain { x: f64 },
}

/// Principal real branch of the Lambert W function: solves `w * exp(w) = x`
/// for `x >= -1/e`, returning `w >= -1`.
///
/// Halley iteration from `w0 = x` for small `x` and `w0 = ln(1 + x)`
/// otherwise; a series in `p = sqrt(2(e*x + 1))` takes over next to the
/// branch point.
pub fn lambert_w0(x: f64) -> Result<f64, MathError> {
    let branch_point = -(-1.0f64).exp(); // -1/e
    if x < branch_point - LAMBERT_DOMAIN_TOL {
        return Err(MathError::LambertDomain { x });
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    // Clamp round-off below the branch point into the domain.
    let x = x.max(branch_point);

    if x < branch_point + BRANCH_SERIES_WIDTH {
        // w = -1 + p - p^2/3 + O(p^3), p = sqrt(2(e x + 1))
        let p = (2.0 * (std::f64::consts::E * x + 1.0)).max(0.0).sqrt();
        return Ok(-1.0 + p - p * p / 3.0);
    }

    let mut w = if x.abs() < 0.5 { x } else { x.ln_1p() };
    let target = 1e-14 * x.abs().max(1.0);
    for _ in 0..MAX_HALLEY_STEPS {
        let ew = w.exp();
        let f = w * ew - x;
        if f.abs() <= target {
            break;
        }
        let df = (w + 1.0) * ew;
        let d2f = (w + 2.0) * ew;
        w -= f / (df - f * d2f / (2.0 * df));
        if w < -1.0 {
            w = -1.0;
        }
    }
    Ok(w)
}
