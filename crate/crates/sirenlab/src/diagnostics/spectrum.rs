//! Output Fourier spectra with the omega0 cutoff metric, and the overlap
//! of NTK eigenvectors with discrete Fourier modes.
//!
//! Frequency convention: for a signal sampled on `M` points spanning
//! `[a, b]`, bin `k` carries the angular frequency `2 pi k / (b - a)`.
//! The cutoff bin is `ceil(omega0 (b - a) / (2 pi))`; the energy fraction
//! above the cutoff excludes the DC bin.

use super::DiagnosticsError;
use crate::linalg::{dft_1d, DenseMatrix};
use crate::network::SirenNet;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub omega0: f64,
    pub domain: (f64, f64),
    /// Angular frequency of each one-sided bin `k = 0..=M/2`.
    pub bin_angular_freq: Vec<f64>,
    /// Raw DFT magnitude `|S_k|` of the one-sided bins.
    pub magnitude: Vec<f64>,
    /// Energy per one-sided bin with conjugate bins folded in.
    pub energy: Vec<f64>,
    /// First bin at or above `omega0`.
    pub cutoff_bin: usize,
    /// Energy strictly above `omega0` over total non-DC energy.
    pub cutoff_energy_fraction: f64,
    /// `sum s_n^2` of the raw signal, for Parseval checks.
    pub signal_energy: f64,
}

/// Spectrum of a raw signal sampled uniformly (endpoints inclusive) on
/// `domain`.
pub fn spectrum_of_signal(
    signal: &[f64],
    domain: (f64, f64),
    omega0: f64,
) -> Result<SpectrumReport, DiagnosticsError> {
    assert!(signal.len() >= 2, "spectrum needs at least two samples");
    let m = signal.len();
    let (a, b) = domain;
    assert!(b > a, "spectrum domain must be a non-empty interval");
    let spacing = (b - a) / (m - 1) as f64;
    let nyquist = std::f64::consts::PI / spacing;
    if omega0 >= nyquist {
        return Err(DiagnosticsError::OmegaAboveNyquist { omega0, nyquist });
    }

    let spec = dft_1d(signal);
    let width = b - a;
    let half = m / 2;
    let mut bin_angular_freq = Vec::with_capacity(half + 1);
    let mut magnitude = Vec::with_capacity(half + 1);
    let mut energy = Vec::with_capacity(half + 1);
    for k in 0..=half {
        bin_angular_freq.push(std::f64::consts::TAU * k as f64 / width);
        magnitude.push(spec[k].norm());
        let mut e = spec[k].norm_sqr();
        // Fold in the conjugate bin M-k (absent for DC and, at even M,
        // for the Nyquist bin itself).
        if k > 0 && k < m - k {
            e += spec[m - k].norm_sqr();
        }
        energy.push(e);
    }

    let threshold = omega0 * width / std::f64::consts::TAU;
    let cutoff_bin = threshold.ceil() as usize;
    let total: f64 = energy[1..].iter().sum();
    let above: f64 = energy
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(k, _)| *k as f64 > threshold)
        .map(|(_, e)| e)
        .sum();
    let cutoff_energy_fraction = if total > 0.0 { above / total } else { 0.0 };

    Ok(SpectrumReport {
        omega0,
        domain,
        bin_angular_freq,
        magnitude,
        energy,
        cutoff_bin,
        cutoff_energy_fraction,
        signal_energy: signal.iter().map(|v| v * v).sum(),
    })
}

/// DFT spectrum of a scalar network evaluated on a uniform 1-D grid.
pub fn output_spectrum(
    net: &SirenNet,
    grid: &[f64],
    omega0: f64,
) -> Result<SpectrumReport, DiagnosticsError> {
    assert_eq!(net.n_in(), 1, "output_spectrum expects a 1-D input network");
    assert_eq!(net.n_out(), 1, "output_spectrum expects a scalar output network");
    let inputs = DenseMatrix::from_vec(grid.len(), 1, grid.to_vec());
    let out = net.forward_batch(&inputs).output;
    let signal: Vec<f64> = (0..grid.len()).map(|i| out.get(i, 0)).collect();
    spectrum_of_signal(&signal, (grid[0], *grid.last().unwrap()), omega0)
}

/// Squared overlap of NTK eigenvectors with unit-norm discrete Fourier
/// modes: row `n`, one-sided bin `k` holds `|<v_n, phi_k>|^2` (conjugate
/// bins folded), so each row of a unit eigenvector sums to one.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OverlapMap {
    /// `n_eigenvectors x n_bins`, eigen index ordered by descending
    /// eigenvalue.
    pub overlaps: DenseMatrix,
    pub bin_angular_freq: Vec<f64>,
    /// Bin of the `omega0` marker.
    pub cutoff_bin: usize,
    pub omega0: f64,
}

/// Power spectra of the NTK eigenvectors sampled on the uniform grid that
/// built the kernel.
pub fn fourier_overlap(
    ntk: &super::NtkResult,
    domain: (f64, f64),
    omega0: f64,
) -> OverlapMap {
    let m = ntk.eigenvectors.rows();
    let width = domain.1 - domain.0;
    let half = m / 2;
    let mut overlaps = DenseMatrix::zeros(m, half + 1);
    for n in 0..m {
        let v = ntk.eigenvectors.col(n);
        let spec = dft_1d(&v);
        for k in 0..=half {
            // Unitary normalization: |<v, phi_k>|^2 = |S_k|^2 / M.
            let mut e = spec[k].norm_sqr() / m as f64;
            if k > 0 && k < m - k {
                e += spec[m - k].norm_sqr() / m as f64;
            }
            overlaps.set(n, k, e);
        }
    }
    let bin_angular_freq =
        (0..=half).map(|k| std::f64::consts::TAU * k as f64 / width).collect();
    let cutoff_bin = (omega0 * width / std::f64::consts::TAU).ceil() as usize;
    OverlapMap { overlaps, bin_angular_freq, cutoff_bin, omega0 }
}
