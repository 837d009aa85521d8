//! 1-D discrete Fourier transform.
//!
//! Radix-2 FFT when the length is a power of two, table-driven direct sum
//! otherwise. Grids in scope are at most a few thousand points, so the
//! O(N^2) fallback stays cheap.

use num_complex::Complex64;

/// Full forward DFT: bin `k` holds `sum_n s_n * exp(-2*pi*i*k*n/N)`.
pub fn dft_1d(signal: &[f64]) -> Vec<Complex64> {
    assert!(!signal.is_empty(), "dft_1d: empty input");
    let n = signal.len();
    if n & (n - 1) == 0 && n >= 2 {
        fft_pow2(signal)
    } else {
        direct(signal)
    }
}

/// Magnitudes of the one-sided bins `0..=N/2`.
pub fn magnitudes_one_sided(spectrum: &[Complex64]) -> Vec<f64> {
    let n = spectrum.len();
    spectrum[..=n / 2].iter().map(|c| c.norm()).collect()
}

fn direct(signal: &[f64]) -> Vec<Complex64> {
    let n = signal.len();
    // Twiddle table: w[j] = exp(-2*pi*i*j/N); index (k*m) mod N stays exact.
    let w: Vec<Complex64> = (0..n)
        .map(|j| Complex64::from_polar(1.0, -std::f64::consts::TAU * j as f64 / n as f64))
        .collect();
    (0..n)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut idx = 0usize;
            for &s in signal {
                acc += s * w[idx];
                idx += k;
                if idx >= n {
                    idx -= n;
                }
            }
            acc
        })
        .collect()
}

fn fft_pow2(signal: &[f64]) -> Vec<Complex64> {
    let n = signal.len();
    let mut buf: Vec<Complex64> = signal.iter().map(|&x| Complex64::new(x, 0.0)).collect();

    // Bit-reversal permutation.
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            buf.swap(i, j);
        }
    }

    let mut len = 2;
    while len <= n {
        let ang = -std::f64::consts::TAU / len as f64;
        let wlen = Complex64::from_polar(1.0, ang);
        for start in (0..n).step_by(len) {
            let mut w = Complex64::new(1.0, 0.0);
            for k in 0..len / 2 {
                let u = buf[start + k];
                let v = buf[start + k + len / 2] * w;
                buf[start + k] = u + v;
                buf[start + k + len / 2] = u - v;
                w *= wlen;
            }
        }
        len <<= 1;
    }
    buf
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Rng;

    /// Per-term sin/cos direct sum, independent of table and FFT paths.
    fn dft_oracle(signal: &[f64]) -> Vec<Complex64> {
        let n = signal.len();
        (0..n)
            .map(|k| {
                let mut re = 0.0;
                let mut im = 0.0;
                for (m, &s) in signal.iter().enumerate() {
                    let phi = -std::f64::consts::TAU * (k * m) as f64 / n as f64;
                    re += s * phi.cos();
                    im += s * phi.sin();
                }
                Complex64::new(re, im)
            })
            .collect()
    }

    #[test]
    fn constant_signal_concentrates_in_dc() {
        let s = dft_1d(&[1.0, 1.0, 1.0, 1.0]);
        assert!((s[0].norm() - 4.0).abs() <= 1e-12);
        for bin in &s[1..] {
            assert!(bin.norm() <= 1e-12);
        }
    }

    #[test]
    fn single_tone_peaks_at_its_bins() {
        let n = 8;
        let signal: Vec<f64> = (0..n)
            .map(|m| (std::f64::consts::TAU * m as f64 / n as f64).cos())
            .collect();
        let s = dft_1d(&signal);
        assert!((s[1].norm() - 4.0).abs() <= 1e-12);
        assert!((s[7].norm() - 4.0).abs() <= 1e-12);
        for k in [0usize, 2, 3, 4, 5, 6] {
            assert!(s[k].norm() <= 1e-12, "bin {k} = {}", s[k].norm());
        }
    }

    #[test]
    fn random_pow2_signal_matches_direct_sum_oracle() {
        let mut rng = Rng::seed_from_u64(99);
        let signal: Vec<f64> = (0..16).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let fast = dft_1d(&signal);
        let slow = dft_oracle(&signal);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() <= 1e-12);
        }
    }

    #[test]
    fn non_pow2_length_matches_oracle() {
        let mut rng = Rng::seed_from_u64(101);
        let signal: Vec<f64> = (0..12).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let fast = dft_1d(&signal);
        let slow = dft_oracle(&signal);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() <= 1e-12);
        }
    }

    #[test]
    fn parseval_identity_holds() {
        let mut rng = Rng::seed_from_u64(7);
        for n in [16usize, 100, 256] {
            let signal: Vec<f64> = (0..n).map(|_| rng.uniform(-2.0, 2.0)).collect();
            let spec = dft_1d(&signal);
            let time_energy: f64 = signal.iter().map(|x| x * x).sum();
            let freq_energy: f64 = spec.iter().map(|c| c.norm_sqr()).sum::<f64>() / n as f64;
            assert!((time_energy - freq_energy).abs() <= 1e-10 * time_energy.max(1.0));
        }
    }

    #[test]
    fn one_sided_magnitudes_have_expected_length() {
        let spec = dft_1d(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(magnitudes_one_sided(&spec).len(), 5);
    }

    #[test]
    #[should_panic(expected = "empty input")]
    fn empty_input_panics() {
        let _ = dft_1d(&[]);
    }
}
