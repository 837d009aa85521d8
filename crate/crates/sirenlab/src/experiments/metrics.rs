//! Error metrics: MSE, PSNR, SNR.

/// Mean squared difference.
pub fn mse(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "mse: length mismatch");
    assert!(!a.is_empty(), "mse: empty input");
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64
}

/// `10 log10(peak^2 / mse)` in dB; `+inf` when the arrays coincide.
pub fn psnr(a: &[f64], b: &[f64], peak: f64) -> f64 {
    assert!(peak > 0.0, "psnr: peak must be positive");
    let m = mse(a, b);
    if m == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (peak * peak / m).log10()
    }
}

/// `10 log10(sum signal^2 / sum residual^2)` in dB.
pub fn snr(signal: &[f64], residual: &[f64]) -> f64 {
    assert_eq!(signal.len(), residual.len(), "snr: length mismatch");
    let s: f64 = signal.iter().map(|x| x * x).sum();
    let r: f64 = residual.iter().map(|x| x * x).sum();
    if r == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (s / r).log10()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Rng;

    #[test]
    fn identical_arrays_give_zero_mse_and_infinite_psnr() {
        let a = [0.3, 0.7, 0.1];
        assert_eq!(mse(&a, &a), 0.0);
        assert_eq!(psnr(&a, &a, 1.0), f64::INFINITY);
    }

    #[test]
    fn hand_arithmetic_psnr() {
        let got = psnr(&[1.0, 0.0], &[0.0, 0.0], 1.0);
        // mse = 0.5 -> 10 log10(2) = 3.0103 dB.
        assert!((got - 3.010_299_956_639_812).abs() <= 1e-9, "{got}");
    }

    #[test]
    fn random_pair_matches_direct_sum_oracle() {
        let mut rng = Rng::seed_from_u64(2);
        let a: Vec<f64> = (0..64).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let b: Vec<f64> = (0..64).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let mut acc = 0.0;
        for i in 0..64 {
            acc += (a[i] - b[i]).powi(2);
        }
        assert!((mse(&a, &b) - acc / 64.0).abs() <= 1e-12);
    }

    #[test]
    fn snr_formula() {
        let signal = [2.0, 0.0];
        let residual = [0.2, 0.0];
        let want = 10.0 * (4.0f64 / 0.04).log10(); // 20 dB
        assert!((snr(&signal, &residual) - want).abs() <= 1e-12);
    }
}
