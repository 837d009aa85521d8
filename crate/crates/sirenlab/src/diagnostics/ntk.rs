//! Neural tangent kernel construction, spectrum, and linearized dynamics.

use super::{classify_growth, derive_seeds, DiagnosticsError, GrowthLaw, MAX_NTK_INPUTS};
use crate::init::{resolve_scheme, sample_network, InitScheme};
use crate::linalg::{eigh_symmetric, DenseMatrix};
use crate::network::SirenNet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// NTK matrix with its eigendecomposition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NtkResult {
    pub matrix: DenseMatrix,
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Columns, ordered like `eigenvalues`.
    pub eigenvectors: DenseMatrix,
    /// `Tr(K) / (|I| * N)` with `N` the hidden width.
    pub normalized_trace: f64,
}

/// Gram matrix of parameter gradients: `K_ij = grad_theta Psi(x_i) .
/// grad_theta Psi(x_j)`.
///
/// Built layer by layer from the rank-one structure of weight gradients
/// (`dPsi/dW_l = a_l h_{l-1}^T`), which gives the algebraically identical
/// `K = sum_l (A_l A_l^T) o (H_{l-1} H_{l-1}^T + 1)` without ever
/// materializing the full feature vectors.
pub fn ntk_matrix(net: &SirenNet, inputs: &DenseMatrix) -> Result<NtkResult, DiagnosticsError> {
    if net.n_out() != 1 {
        return Err(DiagnosticsError::NonScalarOutput(net.n_out()));
    }
    let b = inputs.rows();
    if b > MAX_NTK_INPUTS {
        return Err(DiagnosticsError::TooManyInputs { n: b, max: MAX_NTK_INPUTS });
    }

    let trace = net.forward_batch(inputs);
    let sens = net.sensitivity_batch(&trace);
    let depth = net.depth();

    let mut k = DenseMatrix::zeros(b, b);
    for layer in 1..=depth {
        // Gram of the sensitivities; for the final layer a_L = 1.
        let ga = if layer < depth {
            sens[layer - 1].matmul_transb(&sens[layer - 1])
        } else {
            DenseMatrix::from_fn(b, b, |_, _| 1.0)
        };
        let gh = trace.h[layer - 1].matmul_transb(&trace.h[layer - 1]);
        for ((kv, &a), &h) in k.data_mut().iter_mut().zip(ga.data()).zip(gh.data()) {
            // Weight block contributes a*h, the bias block a.
            *kv += a * (h + 1.0);
        }
    }

    let eig = eigh_symmetric(&k)?;
    let tr = k.trace();
    let normalized_trace = tr / (b as f64 * net.hidden_width() as f64);
    Ok(NtkResult {
        matrix: k,
        eigenvalues: eig.eigenvalues,
        eigenvectors: eig.eigenvectors,
        normalized_trace,
    })
}

/// Residual trajectories of the linearized training dynamics
/// `u(t) = sum_i exp(-lambda_i t) <u0, v_i> v_i`.
pub fn linearized_dynamics(
    ntk: &NtkResult,
    u0: &[f64],
    times: &[f64],
) -> Result<Vec<Vec<f64>>, DiagnosticsError> {
    let n = ntk.eigenvalues.len();
    assert_eq!(u0.len(), n, "linearized_dynamics: u0 length mismatch");
    if let Some(&t) = times.iter().find(|&&t| t < 0.0) {
        return Err(DiagnosticsError::NegativeTime { t });
    }
    // Coefficients <u0, v_i>.
    let coeffs: Vec<f64> = (0..n)
        .map(|i| crate::linalg::dot(u0, &ntk.eigenvectors.col(i)))
        .collect();
    Ok(times
        .iter()
        .map(|&t| {
            let mut u = vec![0.0; n];
            for i in 0..n {
                let w = (-ntk.eigenvalues[i] * t).exp() * coeffs[i];
                for (uj, vj) in u.iter_mut().zip(ntk.eigenvectors.col(i)) {
                    *uj += w * vj;
                }
            }
            u
        })
        .collect())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NtkTraceScan {
    pub scheme_label: String,
    pub width: usize,
    pub omega0: f64,
    pub ensembles: usize,
    pub inputs: usize,
    pub seed: u64,
    pub depths: Vec<usize>,
    /// Mean normalized trace per depth.
    pub normalized_traces: Vec<f64>,
    pub law: GrowthLaw,
}

/// Normalized NTK trace against depth, with a growth-law classification.
///
/// Uses `Tr(K) = sum_i ||grad_theta Psi(x_i)||^2`, so no kernel matrix is
/// formed; this is what makes deep scans cheap.
pub fn ntk_trace_depth_scan(
    scheme: InitScheme,
    width: usize,
    depths: &[usize],
    omega0: f64,
    inputs: &DenseMatrix,
    ensembles: usize,
    seed: u64,
) -> NtkTraceScan {
    assert!(!depths.is_empty() && depths.windows(2).all(|w| w[0] < w[1]), "depths must ascend");
    let normalized_traces: Vec<f64> = depths
        .par_iter()
        .map(|&depth| {
            let resolved = resolve_scheme(scheme.clone(), omega0, inputs.cols(), width, depth, 1)
                .expect("scan dimensions are valid");
            let member_seeds = derive_seeds(seed ^ (depth as u64).wrapping_mul(0xd1b5), ensembles);
            let mut total = 0.0;
            for s in member_seeds {
                let net = sample_network(&resolved, s);
                total += ntk_trace_direct(&net, inputs);
            }
            let mean_tr = total / ensembles as f64;
            mean_tr / (inputs.rows() as f64 * width as f64)
        })
        .collect();

    let law = classify_growth(depths, &normalized_traces);
    NtkTraceScan {
        scheme_label: scheme.label().to_string(),
        width,
        omega0,
        ensembles,
        inputs: inputs.rows(),
        seed,
        depths: depths.to_vec(),
        normalized_traces,
        law,
    }
}

/// `Tr(K) = sum_b sum_l ( ||a_l[b]||^2 (||h_{l-1}[b]||^2 + 1) )`.
fn ntk_trace_direct(net: &SirenNet, inputs: &DenseMatrix) -> f64 {
    let trace = net.forward_batch(inputs);
    let sens = net.sensitivity_batch(&trace);
    let depth = net.depth();
    let b = inputs.rows();
    let mut total = 0.0;
    for layer in 1..=depth {
        for bi in 0..b {
            let a_sq: f64 = if layer < depth {
                sens[layer - 1].row(bi).iter().map(|v| v * v).sum()
            } else {
                1.0
            };
            let h_sq: f64 = trace.h[layer - 1].row(bi).iter().map(|v| v * v).sum();
            total += a_sq * (h_sq + 1.0);
        }
    }
    total
}
