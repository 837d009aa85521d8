//! Empirical verification of the initialization theory: variance profiles
//! across layers, gradient scaling with depth, NTK spectra and linearized
//! dynamics, output Fourier spectra, and end-to-end Jacobian singular
//! values.
//!
//! Ensemble members always draw their parameters from seeds derived off a
//! single master seed, are evaluated independently (possibly in parallel),
//! and are reduced in a fixed order, so every report is reproducible
//! bit-for-bit on one platform.

mod ntk;
mod spectrum;
mod svdscan;

pub use ntk::{linearized_dynamics, ntk_matrix, ntk_trace_depth_scan, NtkResult, NtkTraceScan};
pub use spectrum::{
    fourier_overlap, output_spectrum, spectrum_of_signal, OverlapMap, SpectrumReport,
};
pub use svdscan::{jacobian_singular_spectrum, SingularSpectrumScan};

use crate::init::{resolve_scheme, sample_network, InitScheme, ResolvedScheme};
use crate::linalg::{DenseMatrix, LinalgError, MomentAccumulator, Rng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense-NTK size guard.
pub const MAX_NTK_INPUTS: usize = 512;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagnosticsError {
    #[error("too many inputs for a dense NTK: {n} > {max}")]
    TooManyInputs { n: usize, max: usize },
    #[error("negative evolution time {t}")]
    NegativeTime { t: f64 },
    #[error("omega0 = {omega0} is at or above the grid Nyquist angular frequency {nyquist}")]
    OmegaAboveNyquist { omega0: f64, nyquist: f64 },
    #[error("NTK diagnostics require a scalar output network (d_out = {0})")]
    NonScalarOutput(usize),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Per-layer empirical statistics pooled over ensembles, inputs and
/// entries.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LayerVariance {
    /// 1-based layer index.
    pub layer: usize,
    /// Std of the pre-activation entries `z_l`.
    pub preact_std: f64,
    pub preact_se: f64,
    /// `sqrt(N * Var)` of the layer-Jacobian entries.
    pub jac_scaled_std: f64,
    pub jac_se: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VarianceProfile {
    pub scheme_label: String,
    pub width: usize,
    pub depth: usize,
    pub omega0: f64,
    pub ensembles: usize,
    pub inputs: usize,
    pub seed: u64,
    pub layers: Vec<LayerVariance>,
}

impl VarianceProfile {
    /// Last hidden layer (`l = L-1`), where the fixed point is probed.
    pub fn deep_layer(&self) -> &LayerVariance {
        &self.layers[self.depth - 2]
    }
}

/// Mean of `||x||^2` over the rows of an input block; feeds the theory
/// prediction for the first-layer variance.
pub fn mean_squared_norm(inputs: &DenseMatrix) -> f64 {
    let b = inputs.rows();
    (0..b).map(|i| inputs.row(i).iter().map(|v| v * v).sum::<f64>()).sum::<f64>() / b as f64
}

#[derive(Debug, Clone, Default)]
struct LayerAccum {
    pre: MomentAccumulator,
    jac: MomentAccumulator,
}

/// Pools pre-activation entries and layer-Jacobian entries per layer over
/// `ensembles x inputs x entries`, reporting the std and `sqrt(N * Var)`.
///
/// Standard errors follow the conservative convention `std / sqrt(eff)`
/// with `eff = ensembles * inputs` (entries within one forward pass are
/// treated as correlated).
pub fn variance_profile(
    resolved: &ResolvedScheme,
    n_ensembles: usize,
    inputs: &DenseMatrix,
    seed: u64,
) -> VarianceProfile {
    assert!(n_ensembles >= 1, "variance_profile needs at least one ensemble member");
    assert!(inputs.rows() >= 1, "variance_profile needs a non-empty input grid");
    let depth = resolved.params.depth;
    let member_seeds = derive_seeds(seed, n_ensembles);

    let per_member: Vec<Vec<LayerAccum>> = member_seeds
        .par_iter()
        .map(|&s| {
            let net = sample_network(resolved, s);
            let trace = net.forward_batch(inputs);
            let mut acc = vec![LayerAccum::default(); depth];
            for layer in 1..=depth {
                let z = &trace.z[layer - 1];
                for &v in z.data() {
                    acc[layer - 1].pre.push(v);
                }
                // J_l = diag(cos z_l) W_l: pooled entry moments reduce to
                // row sums of W against column sums of cos(z).
                let w = &net.layers[layer - 1].weight;
                let s_row: Vec<f64> = (0..w.rows()).map(|i| w.row(i).iter().sum()).collect();
                let q_row: Vec<f64> =
                    (0..w.rows()).map(|i| w.row(i).iter().map(|v| v * v).sum()).collect();
                let b = inputs.rows() as f64;
                let entries = (w.rows() * w.cols()) as f64;
                if layer < depth {
                    let cos = &trace.cos_z[layer - 1];
                    let cos_cols = cos.col_sums_of(|c| c);
                    let cos2_cols = cos.col_sums_of(|c| c * c);
                    let sum = crate::linalg::dot(&cos_cols, &s_row);
                    let sum_sq = crate::linalg::dot(&cos2_cols, &q_row);
                    acc[layer - 1].jac.push_block(b * entries, sum, sum_sq);
                } else {
                    // Final linear layer: J_L = W_L for every input.
                    let sum = s_row.iter().sum::<f64>() * b;
                    let sum_sq = q_row.iter().sum::<f64>() * b;
                    acc[layer - 1].jac.push_block(b * entries, sum, sum_sq);
                }
            }
            acc
        })
        .collect();

    let mut merged = vec![LayerAccum::default(); depth];
    for member in &per_member {
        for (m, a) in merged.iter_mut().zip(member) {
            m.pre.push_block(a.pre.count(), a.pre.sum(), a.pre.sum_sq());
            m.jac.push_block(a.jac.count(), a.jac.sum(), a.jac.sum_sq());
        }
    }

    let eff = (n_ensembles * inputs.rows()) as f64;
    let n = resolved.params.width as f64;
    let layers = merged
        .iter()
        .enumerate()
        .map(|(idx, acc)| {
            let preact_std = acc.pre.std();
            let jac_scaled_std = (n * acc.jac.variance()).sqrt();
            LayerVariance {
                layer: idx + 1,
                preact_std,
                preact_se: preact_std / eff.sqrt(),
                jac_scaled_std,
                jac_se: jac_scaled_std / eff.sqrt(),
            }
        })
        .collect();

    VarianceProfile {
        scheme_label: resolved.scheme.label().to_string(),
        width: resolved.params.width,
        depth,
        omega0: resolved.params.omega0,
        ensembles: n_ensembles,
        inputs: inputs.rows(),
        seed,
        layers,
    }
}

/// One depth of a gradient scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DepthScanPoint {
    pub depth: usize,
    /// Std of the input-gradient entries pooled over ensembles and inputs.
    pub input_grad_std: f64,
    /// Per-layer variance of the weight-gradient entries (index `l-1`).
    pub param_grad_var: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GradientDepthScan {
    pub scheme_label: String,
    pub width: usize,
    pub omega0: f64,
    pub ensembles: usize,
    pub inputs: usize,
    pub seed: u64,
    pub points: Vec<DepthScanPoint>,
    /// Fitted slope of `log(input_grad_std)` against depth; compare to
    /// `log(sigma_g)`.
    pub fitted_log_slope: f64,
}

/// Scan the input-gradient std and per-layer parameter-gradient variances
/// over network depth.
pub fn gradient_depth_scan(
    scheme: InitScheme,
    width: usize,
    depths: &[usize],
    omega0: f64,
    inputs: &DenseMatrix,
    ensembles: usize,
    seed: u64,
) -> GradientDepthScan {
    assert!(!depths.is_empty() && depths.windows(2).all(|w| w[0] < w[1]), "depths must ascend");
    let points: Vec<DepthScanPoint> = depths
        .par_iter()
        .map(|&depth| {
            let resolved = resolve_scheme(scheme.clone(), omega0, inputs.cols(), width, depth, 1)
                .expect("scan dimensions are valid");
            let member_seeds = derive_seeds(seed ^ (depth as u64).wrapping_mul(0x9e37), ensembles);
            let mut grad_acc = MomentAccumulator::new();
            let mut param_acc = vec![MomentAccumulator::new(); depth];
            for s in member_seeds {
                let net = sample_network(&resolved, s);
                let trace = net.forward_batch(inputs);
                let g = net.input_gradient_batch(&trace);
                for &v in g.data() {
                    grad_acc.push(v);
                }
                // Var of dW_l entries a_l[b,i] * h_{l-1}[b,j]: row-sum
                // sufficient statistics per input.
                let sens = net.sensitivity_batch(&trace);
                for layer in 1..=depth {
                    let (sa1, sa2) = if layer < depth {
                        row_sum_pairs(&sens[layer - 1])
                    } else {
                        let b = inputs.rows();
                        (vec![1.0; b], vec![1.0; b])
                    };
                    let (sh1, sh2) = row_sum_pairs(&trace.h[layer - 1]);
                    let n_entries = {
                        let w = &net.layers[layer - 1].weight;
                        (w.rows() * w.cols()) as f64
                    };
                    let mut sum = 0.0;
                    let mut sum_sq = 0.0;
                    for b in 0..inputs.rows() {
                        sum += sa1[b] * sh1[b];
                        sum_sq += sa2[b] * sh2[b];
                    }
                    param_acc[layer - 1].push_block(inputs.rows() as f64 * n_entries, sum, sum_sq);
                }
            }
            DepthScanPoint {
                depth,
                input_grad_std: grad_acc.std(),
                param_grad_var: param_acc.iter().map(|a| a.variance()).collect(),
            }
        })
        .collect();

    let xs: Vec<f64> = points.iter().map(|p| p.depth as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.input_grad_std.ln()).collect();
    let fitted_log_slope = linear_fit(&xs, &ys).slope;

    GradientDepthScan {
        scheme_label: scheme.label().to_string(),
        width,
        omega0,
        ensembles,
        inputs: inputs.rows(),
        seed,
        points,
        fitted_log_slope,
    }
}

fn row_sum_pairs(m: &DenseMatrix) -> (Vec<f64>, Vec<f64>) {
    let mut s1 = Vec::with_capacity(m.rows());
    let mut s2 = Vec::with_capacity(m.rows());
    for i in 0..m.rows() {
        let row = m.row(i);
        s1.push(row.iter().sum());
        s2.push(row.iter().map(|v| v * v).sum());
    }
    (s1, s2)
}

/// Deterministic per-member seeds off one master seed.
pub fn derive_seeds(seed: u64, count: usize) -> Vec<u64> {
    let mut master = Rng::seed_from_u64(seed);
    (0..count).map(|_| master.next_u64()).collect()
}

/// Ordinary least-squares line fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    assert_eq!(x.len(), y.len(), "linear_fit: mismatched lengths");
    assert!(x.len() >= 2, "linear_fit needs at least two points");
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    LinearFit { slope, intercept, r2 }
}

/// Depth-scaling regimes of the normalized NTK trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GrowthLaw {
    /// Log-trace grows linearly; `ratio` is the per-layer trace multiplier.
    Exponential { ratio: f64 },
    Linear,
    Plateau,
    Undetermined,
}

impl GrowthLaw {
    pub fn label(&self) -> &'static str {
        match self {
            GrowthLaw::Exponential { .. } => "exponential",
            GrowthLaw::Linear => "linear",
            GrowthLaw::Plateau => "plateau",
            GrowthLaw::Undetermined => "undetermined",
        }
    }
}

/// Classify the depth scaling of a positive series: exponential when the
/// log-linear fit has slope > 0.05 and R^2 > 0.95, linear when the plain
/// fit has positive slope and R^2 > 0.95 (the better R^2 wins when both
/// qualify), plateau when the last third sits within 5% of the middle
/// third.
pub fn classify_growth(depths: &[usize], values: &[f64]) -> GrowthLaw {
    assert_eq!(depths.len(), values.len());
    assert!(values.iter().all(|&v| v > 0.0), "classify_growth needs positive values");
    let xs: Vec<f64> = depths.iter().map(|&d| d as f64).collect();
    let log_fit = linear_fit(&xs, &values.iter().map(|v| v.ln()).collect::<Vec<_>>());
    let lin_fit = linear_fit(&xs, values);

    let exp_ok = log_fit.slope > 0.05 && log_fit.r2 > 0.95;
    let lin_ok = lin_fit.slope > 0.0 && lin_fit.r2 > 0.95;
    match (exp_ok, lin_ok) {
        (true, true) => {
            if log_fit.r2 >= lin_fit.r2 {
                GrowthLaw::Exponential { ratio: log_fit.slope.exp() }
            } else {
                GrowthLaw::Linear
            }
        }
        (true, false) => GrowthLaw::Exponential { ratio: log_fit.slope.exp() },
        (false, true) => GrowthLaw::Linear,
        (false, false) => {
            let third = values.len() / 3;
            if third >= 1 {
                let mid: f64 = values[third..2 * third].iter().sum::<f64>() / third as f64;
                let last: f64 = values[values.len() - third..].iter().sum::<f64>() / third as f64;
                if (last - mid).abs() < 0.05 * mid.abs() {
                    return GrowthLaw::Plateau;
                }
            }
            GrowthLaw::Undetermined
        }
    }
}
