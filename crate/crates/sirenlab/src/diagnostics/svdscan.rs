//! Singular value spectrum of the end-to-end hidden Jacobian
//! `J = dh_{L-1}/dh_1`, averaged over ensembles and sample points, scanned
//! over depth.

use super::derive_seeds;
use crate::init::{resolve_scheme, sample_network, InitScheme};
use crate::linalg::singular_values;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SingularSpectrumScan {
    pub scheme_label: String,
    pub width: usize,
    pub omega0: f64,
    pub ensembles: usize,
    pub sample_points: usize,
    pub seed: u64,
    pub depths: Vec<usize>,
    /// Mean descending spectrum per depth (element-wise average of the
    /// sorted singular values).
    pub spectra: Vec<Vec<f64>>,
    /// Maximum singular value per depth (head of the averaged spectrum);
    /// "normalized" in the sense that a norm-preserving map scores one.
    pub max_singular: Vec<f64>,
}

/// Average singular value spectra of the end-to-end Jacobian for each
/// depth in `depths` (every depth must be >= 3 so that at least one hidden
/// factor exists).
pub fn jacobian_singular_spectrum(
    scheme: InitScheme,
    width: usize,
    depths: &[usize],
    omega0: f64,
    sample_points: &[f64],
    ensembles: usize,
    seed: u64,
) -> SingularSpectrumScan {
    assert!(depths.iter().all(|&d| d >= 3), "end-to-end Jacobian needs depth >= 3");
    assert!(!sample_points.is_empty() && ensembles >= 1);

    let spectra: Vec<Vec<f64>> = depths
        .par_iter()
        .map(|&depth| {
            let resolved = resolve_scheme(scheme.clone(), omega0, 1, width, depth, 1)
                .expect("scan dimensions are valid");
            let member_seeds = derive_seeds(seed ^ (depth as u64).wrapping_mul(0xa5a5), ensembles);
            let mut mean = vec![0.0; width];
            let mut count = 0.0;
            for s in member_seeds {
                let net = sample_network(&resolved, s);
                for &x in sample_points {
                    let trace = net.forward(&[x]);
                    let j = net.end_to_end_jacobian(&trace);
                    let sv = singular_values(&j).expect("svd of a finite matrix converges");
                    for (m, v) in mean.iter_mut().zip(&sv) {
                        *m += v;
                    }
                    count += 1.0;
                }
            }
            mean.iter_mut().for_each(|m| *m /= count);
            mean
        })
        .collect();

    let max_singular = spectra.iter().map(|s| s[0]).collect();
    SingularSpectrumScan {
        scheme_label: scheme.label().to_string(),
        width,
        omega0,
        ensembles,
        sample_points: sample_points.len(),
        seed,
        depths: depths.to_vec(),
        spectra,
        max_singular,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{linspace, DenseMatrix};
    use crate::network::{Layer, SirenNet};

    #[test]
    fn identity_like_construction_gives_flat_spectrum() {
        // Hidden weights s*I with zero biases and x = 0: every z is zero,
        // so J = diag(cos 0) * (s I) = s I and all singular values equal s.
        let n = 6;
        let s = 0.8;
        let net = SirenNet {
            layers: vec![
                Layer { weight: DenseMatrix::zeros(n, 1), bias: vec![0.0; n] },
                Layer {
                    weight: DenseMatrix::from_fn(n, n, |i, j| if i == j { s } else { 0.0 }),
                    bias: vec![0.0; n],
                },
                Layer { weight: DenseMatrix::zeros(1, n), bias: vec![0.0] },
            ],
            omega0: 1.0,
            scheme_label: "custom".into(),
            seed: 0,
        };
        let trace = net.forward(&[0.0]);
        let j = net.end_to_end_jacobian(&trace);
        let sv = singular_values(&j).unwrap();
        for v in sv {
            assert!((v - s).abs() <= 1e-12);
        }
    }

    #[test]
    fn scan_shapes_and_determinism() {
        let pts = linspace(-std::f64::consts::PI, std::f64::consts::PI, 4);
        let a = jacobian_singular_spectrum(
            InitScheme::ProposedSigmaA0,
            16,
            &[3, 5],
            1.0,
            &pts,
            2,
            3,
        );
        assert_eq!(a.spectra.len(), 2);
        assert_eq!(a.spectra[0].len(), 16);
        assert_eq!(a.max_singular.len(), 2);
        for s in &a.spectra {
            for pair in s.windows(2) {
                assert!(pair[0] >= pair[1] - 1e-12, "averaged spectrum must stay sorted");
            }
        }
        let b = jacobian_singular_spectrum(
            InitScheme::ProposedSigmaA0,
            16,
            &[3, 5],
            1.0,
            &pts,
            2,
            3,
        );
        assert_eq!(a.max_singular, b.max_singular);
    }

    #[test]
    fn framework_default_spectrum_collapses_with_depth() {
        let pts = linspace(-std::f64::consts::PI, std::f64::consts::PI, 4);
        let scan = jacobian_singular_spectrum(
            InitScheme::FrameworkDefault,
            24,
            &[4, 10],
            1.0,
            &pts,
            3,
            5,
        );
        assert!(
            scan.max_singular[1] < scan.max_singular[0] / 3.0,
            "expected decay: {:?}",
            scan.max_singular
        );
    }
}
