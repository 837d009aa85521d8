//! SIREN evaluation with trace capture and exact reverse-mode gradients.
//!
//! A network is an ordered list of affine layers; every layer except the
//! last is followed by an element-wise sine. No autodiff framework: the
//! per-layer Jacobians `J_l = diag(cos(z_l)) W_l` and sensitivity vectors
//! are the quantities under study, so they are computed in closed form.
//!
//! Layer indices in the public API are 1-based, matching the usual
//! mathematical numbering `l = 1..=L`.

use crate::linalg::DenseMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    /// `n_out x n_in` weight matrix.
    pub weight: DenseMatrix,
    /// `n_out` bias vector.
    pub bias: Vec<f64>,
}

/// Sine MLP with a final linear layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SirenNet {
    pub layers: Vec<Layer>,
    /// First-layer frequency scale, recorded for provenance.
    pub omega0: f64,
    /// Initialization scheme the parameters were drawn from.
    pub scheme_label: String,
    /// Seed the parameters were drawn with.
    pub seed: u64,
}

/// Per-layer pre-activations and activations for one input.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    pub input: Vec<f64>,
    /// `z_l = W_l h_{l-1} + b_l` for every layer `l = 1..=L`.
    pub pre_activations: Vec<Vec<f64>>,
    /// `h_l = sin(z_l)` for `l = 1..=L-1`.
    pub activations: Vec<Vec<f64>>,
    /// `z_L`: the final layer is linear.
    pub output: Vec<f64>,
}

/// Parameter gradients with the same shapes as the network.
#[derive(Debug, Clone)]
pub struct ParamGradient {
    pub layers: Vec<Layer>,
}

impl ParamGradient {
    pub fn zeros_like(net: &SirenNet) -> Self {
        let layers = net
            .layers
            .iter()
            .map(|l| Layer {
                weight: DenseMatrix::zeros(l.weight.rows(), l.weight.cols()),
                bias: vec![0.0; l.bias.len()],
            })
            .collect();
        Self { layers }
    }

    /// Flatten in the documented order: layer 1..L, weight entries
    /// row-major, then the bias entries.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.extend_from_slice(l.weight.data());
            out.extend_from_slice(&l.bias);
        }
        out
    }
}

/// Batched forward pass state (inputs as rows).
#[derive(Debug, Clone)]
pub struct BatchTrace {
    /// `h[0]` is the input block `B x n0`; `h[l]` the activations of layer
    /// `l` for `l = 1..=L-1`.
    pub h: Vec<DenseMatrix>,
    /// Pre-activations `z_l` for every layer `l = 1..=L`.
    pub z: Vec<DenseMatrix>,
    /// `cos(z_l)` for hidden layers, cached for the backward pass.
    pub cos_z: Vec<DenseMatrix>,
    /// Final linear output, `B x d_out`.
    pub output: DenseMatrix,
}

impl SirenNet {
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn n_in(&self) -> usize {
        self.layers[0].weight.cols()
    }

    pub fn n_out(&self) -> usize {
        self.layers.last().unwrap().weight.rows()
    }

    /// Hidden width `N` (output dimension of the first layer).
    pub fn hidden_width(&self) -> usize {
        self.layers[0].weight.rows()
    }

    /// Layer dimensions `[n0, n1, ..., nL]`.
    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.n_in()];
        d.extend(self.layers.iter().map(|l| l.weight.rows()));
        d
    }

    pub fn num_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weight.rows() * l.weight.cols() + l.bias.len())
            .sum()
    }

    pub fn forward(&self, x: &[f64]) -> ForwardTrace {
        assert_eq!(x.len(), self.n_in(), "forward: input length mismatch");
        let depth = self.depth();
        let mut pre_activations = Vec::with_capacity(depth);
        let mut activations = Vec::with_capacity(depth.saturating_sub(1));
        let mut h = x.to_vec();
        for (idx, layer) in self.layers.iter().enumerate() {
            let z = affine(layer, &h);
            pre_activations.push(z.clone());
            if idx + 1 < depth {
                h = z.iter().map(|v| v.sin()).collect();
                activations.push(h.clone());
            } else {
                h = z;
            }
        }
        ForwardTrace { input: x.to_vec(), pre_activations, activations, output: h }
    }

    /// `J_l = diag(cos(z_l)) W_l` for `l < L`; `W_L` for the linear layer.
    pub fn layer_jacobian(&self, trace: &ForwardTrace, layer: usize) -> DenseMatrix {
        assert!(
            (1..=self.depth()).contains(&layer),
            "layer_jacobian: index {layer} out of range 1..={}",
            self.depth()
        );
        let l = &self.layers[layer - 1];
        if layer == self.depth() {
            return l.weight.clone();
        }
        let z = &trace.pre_activations[layer - 1];
        let mut out = l.weight.clone();
        for i in 0..out.rows() {
            let c = z[i].cos();
            for v in out.row_mut(i) {
                *v *= c;
            }
        }
        out
    }

    /// End-to-end hidden Jacobian `dh_{L-1}/dh_1 = J_{L-1} ... J_2`.
    pub fn end_to_end_jacobian(&self, trace: &ForwardTrace) -> DenseMatrix {
        assert!(self.depth() >= 3, "end_to_end_jacobian needs at least two hidden layers");
        let mut m = self.layer_jacobian(trace, 2);
        for layer in 3..self.depth() {
            m = self.layer_jacobian(trace, layer).matmul(&m);
        }
        m
    }

    /// Full input gradient `dPsi/dx`, a `d_out x n0` matrix; includes the
    /// first-layer factor `diag(cos(z_1)) W_1`.
    pub fn input_gradient(&self, trace: &ForwardTrace) -> DenseMatrix {
        let depth = self.depth();
        let mut g = self.layers[depth - 1].weight.clone(); // d_out x n_{L-1}
        for layer in (1..depth).rev() {
            let z = &trace.pre_activations[layer - 1];
            // Scale the columns of g by cos(z_l), then push through W_l.
            let mut scaled = g.clone();
            for i in 0..scaled.rows() {
                for (v, zi) in scaled.row_mut(i).iter_mut().zip(z) {
                    *v *= zi.cos();
                }
            }
            g = scaled.matmul(&self.layers[layer - 1].weight);
        }
        g
    }

    /// Exact reverse-mode parameter gradients seeded with `upstream`
    /// (length `d_out`, e.g. a loss gradient).
    pub fn param_gradient(&self, trace: &ForwardTrace, upstream: &[f64]) -> ParamGradient {
        assert_eq!(upstream.len(), self.n_out(), "param_gradient: upstream length mismatch");
        let depth = self.depth();
        let mut grad = ParamGradient::zeros_like(self);

        // Final linear layer: dW_L = g h_{L-1}^T, db_L = g.
        let mut g = upstream.to_vec();
        let h_prev = self.h_before(trace, depth);
        outer_into(&mut grad.layers[depth - 1].weight, &g, h_prev);
        grad.layers[depth - 1].bias.copy_from_slice(&g);
        g = self.layers[depth - 1].weight.matmul_transa(&DenseMatrix::column(&g)).col(0);

        for layer in (1..depth).rev() {
            let z = &trace.pre_activations[layer - 1];
            let a: Vec<f64> = g.iter().zip(z).map(|(gi, zi)| gi * zi.cos()).collect();
            let h_prev = self.h_before(trace, layer);
            outer_into(&mut grad.layers[layer - 1].weight, &a, h_prev);
            grad.layers[layer - 1].bias.copy_from_slice(&a);
            if layer > 1 {
                g = self.layers[layer - 1].weight.matmul_transa(&DenseMatrix::column(&a)).col(0);
            }
        }
        grad
    }

    /// Flat `grad_theta Psi(x)` for a scalar-output network, in the
    /// `ParamGradient::flatten` order.
    pub fn ntk_feature(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.n_out(), 1, "ntk_feature requires a scalar output network");
        let trace = self.forward(x);
        self.param_gradient(&trace, &[1.0]).flatten()
    }

    fn h_before<'a>(&self, trace: &'a ForwardTrace, layer: usize) -> &'a [f64] {
        if layer == 1 {
            &trace.input
        } else {
            &trace.activations[layer - 2]
        }
    }

    /// Batched forward over inputs as rows (`B x n0`).
    pub fn forward_batch(&self, inputs: &DenseMatrix) -> BatchTrace {
        assert_eq!(inputs.cols(), self.n_in(), "forward_batch: input width mismatch");
        let depth = self.depth();
        let mut h = Vec::with_capacity(depth);
        let mut z_all = Vec::with_capacity(depth);
        let mut cos_z = Vec::with_capacity(depth - 1);
        h.push(inputs.clone());
        let mut current = inputs.clone();
        for (idx, layer) in self.layers.iter().enumerate() {
            let mut z = current.matmul_transb(&layer.weight);
            for i in 0..z.rows() {
                for (v, b) in z.row_mut(i).iter_mut().zip(&layer.bias) {
                    *v += b;
                }
            }
            z_all.push(z.clone());
            if idx + 1 < depth {
                let mut c = DenseMatrix::zeros(z.rows(), z.cols());
                for (ci, zi) in c.data_mut().iter_mut().zip(z.data_mut().iter_mut()) {
                    let (s, co) = zi.sin_cos();
                    *ci = co;
                    *zi = s;
                }
                cos_z.push(c);
                h.push(z.clone());
                current = z;
            } else {
                current = z;
            }
        }
        BatchTrace { h, z: z_all, cos_z, output: current }
    }

    /// Batched sensitivities for a scalar-output network: returns
    /// `a_l = dPsi/dz_l` as a `B x n_l` matrix for `l = 1..=L-1`.
    /// (`a_L` is identically one.)
    pub fn sensitivity_batch(&self, trace: &BatchTrace) -> Vec<DenseMatrix> {
        assert_eq!(self.n_out(), 1, "sensitivity_batch requires a scalar output network");
        let depth = self.depth();
        let b = trace.output.rows();
        let mut out = vec![DenseMatrix::zeros(0, 0); depth - 1];
        // dPsi/dh_{L-1}: every batch row is the final weight row.
        let w_last = self.layers[depth - 1].weight.row(0);
        let mut g = DenseMatrix::from_fn(b, w_last.len(), |_, j| w_last[j]);
        for layer in (1..depth).rev() {
            let mut a = g;
            for (v, c) in a.data_mut().iter_mut().zip(trace.cos_z[layer - 1].data()) {
                *v *= c;
            }
            g = if layer > 1 { a.matmul(&self.layers[layer - 1].weight) } else { DenseMatrix::zeros(0, 0) };
            out[layer - 1] = a;
        }
        out
    }

    /// Batched input gradients `dPsi/dx` for a scalar-output network
    /// (`B x n0`, one gradient per row).
    pub fn input_gradient_batch(&self, trace: &BatchTrace) -> DenseMatrix {
        let sens = self.sensitivity_batch(trace);
        sens[0].matmul(&self.layers[0].weight)
    }

    /// Batched reverse pass: parameter gradients summed over the batch.
    pub fn backward_batch(&self, trace: &BatchTrace, upstream: &DenseMatrix) -> ParamGradient {
        assert_eq!(upstream.rows(), trace.output.rows(), "backward_batch: batch size mismatch");
        assert_eq!(upstream.cols(), self.n_out(), "backward_batch: upstream width mismatch");
        let depth = self.depth();
        let mut grad = ParamGradient::zeros_like(self);

        // g: B x n_l gradient w.r.t. the layer output.
        let mut g = upstream.clone();
        grad.layers[depth - 1].weight = g.matmul_transa(&trace.h[depth - 1]);
        grad.layers[depth - 1].bias = g.col_sums();
        if depth > 1 {
            g = g.matmul(&self.layers[depth - 1].weight);
        }

        for layer in (1..depth).rev() {
            let cos = &trace.cos_z[layer - 1];
            let mut a = g;
            for (v, c) in a.data_mut().iter_mut().zip(cos.data()) {
                *v *= c;
            }
            grad.layers[layer - 1].weight = a.matmul_transa(&trace.h[layer - 1]);
            grad.layers[layer - 1].bias = a.col_sums();
            g = if layer > 1 { a.matmul(&self.layers[layer - 1].weight) } else { a };
        }
        grad
    }

    /// JSON serialization; f64 values round-trip bit-exactly.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("network serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

fn affine(layer: &Layer, h: &[f64]) -> Vec<f64> {
    assert_eq!(h.len(), layer.weight.cols(), "affine: input length mismatch");
    (0..layer.weight.rows())
        .map(|i| crate::linalg::dot(layer.weight.row(i), h) + layer.bias[i])
        .collect()
}

/// `target += a * b^T` written into a zeroed target.
fn outer_into(target: &mut DenseMatrix, a: &[f64], b: &[f64]) {
    assert_eq!(target.rows(), a.len());
    assert_eq!(target.cols(), b.len());
    for (i, &ai) in a.iter().enumerate() {
        for (t, &bj) in target.row_mut(i).iter_mut().zip(b) {
            *t = ai * bj;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Rng;

    fn scalar_layer(w: f64, b: f64) -> Layer {
        Layer { weight: DenseMatrix::from_vec(1, 1, vec![w]), bias: vec![b] }
    }

    fn random_net(rng: &mut Rng, dims: &[usize], omega0: f64) -> SirenNet {
        let layers = dims
            .windows(2)
            .map(|w| Layer {
                weight: DenseMatrix::from_fn(w[1], w[0], |_, _| rng.uniform(-omega0, omega0)),
                bias: (0..w[1]).map(|_| rng.uniform(-0.5, 0.5)).collect(),
            })
            .collect();
        SirenNet { layers, omega0, scheme_label: "custom".into(), seed: 0 }
    }

    #[test]
    fn zero_network_outputs_zero() {
        let net = SirenNet {
            layers: vec![
                Layer { weight: DenseMatrix::zeros(4, 2), bias: vec![0.0; 4] },
                Layer { weight: DenseMatrix::zeros(1, 4), bias: vec![0.0] },
            ],
            omega0: 1.0,
            scheme_label: "custom".into(),
            seed: 0,
        };
        let trace = net.forward(&[0.3, -0.7]);
        assert_eq!(trace.output, vec![0.0]);
        assert!(trace.pre_activations.iter().all(|z| z.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn single_layer_is_pure_linear() {
        let net = SirenNet {
            layers: vec![Layer {
                weight: DenseMatrix::from_vec(1, 2, vec![2.0, -1.0]),
                bias: vec![0.25],
            }],
            omega0: 1.0,
            scheme_label: "custom".into(),
            seed: 0,
        };
        let trace = net.forward(&[1.0, 3.0]);
        // No sine on the final (only) layer.
        assert!((trace.output[0] - (2.0 - 3.0 + 0.25)).abs() <= 1e-15);
        assert!(trace.activations.is_empty());
    }

    #[test]
    fn one_hidden_layer_scalar_matches_hand_evaluation() {
        let net = SirenNet {
            layers: vec![scalar_layer(2.0, 0.5), scalar_layer(3.0, -1.0)],
            omega0: 1.0,
            scheme_label: "custom".into(),
            seed: 0,
        };
        let trace = net.forward(&[1.0]);
        let expected = 3.0 * (2.5f64).sin() - 1.0;
        assert!((trace.output[0] - expected).abs() <= 1e-15);
        assert!((trace.activations[0][0] - (2.5f64).sin()).abs() <= 1e-15);
    }

    #[test]
    fn trace_replay_is_deterministic() {
        let mut rng = Rng::seed_from_u64(4);
        let net = random_net(&mut rng, &[2, 6, 6, 1], 2.0);
        let a = net.forward(&[0.4, -0.2]);
        let b = net.forward(&[0.4, -0.2]);
        assert_eq!(a.output, b.output);
        assert_eq!(a.pre_activations, b.pre_activations);
    }

    #[test]
    fn layer_jacobian_at_zero_preactivation_is_weight_matrix() {
        let mut rng = Rng::seed_from_u64(8);
        let mut net = random_net(&mut rng, &[2, 5, 5, 1], 1.0);
        for l in &mut net.layers {
            l.bias.iter_mut().for_each(|b| *b = 0.0);
        }
        // x = 0 makes every pre-activation zero, cos(0) = 1.
        let trace = net.forward(&[0.0, 0.0]);
        for layer in 1..=net.depth() {
            let j = net.layer_jacobian(&trace, layer);
            assert_eq!(j, net.layers[layer - 1].weight);
        }
    }

    #[test]
    fn layer_jacobian_vanishes_at_half_pi() {
        // W_1 = 0 and b_1 = pi/2 force z_1 = pi/2 exactly.
        let net = SirenNet {
            layers: vec![
                Layer {
                    weight: DenseMatrix::zeros(3, 1),
                    bias: vec![std::f64::consts::FRAC_PI_2; 3],
                },
                Layer { weight: DenseMatrix::from_vec(1, 3, vec![1.0, 2.0, 3.0]), bias: vec![0.0] },
            ],
            omega0: 1.0,
            scheme_label: "custom".into(),
            seed: 0,
        };
        let trace = net.forward(&[0.9]);
        let j = net.layer_jacobian(&trace, 1);
        for &v in j.data() {
            assert!(v.abs() <= 1e-16);
        }
    }

    /// Central-difference oracle for the map h_{l-1} -> h_l.
    fn layer_map_fd(net: &SirenNet, layer: usize, h_prev: &[f64]) -> DenseMatrix {
        let step = 1e-6;
        let l = &net.layers[layer - 1];
        let apply = |h: &[f64]| -> Vec<f64> {
            let z = super::affine(l, h);
            if layer == net.depth() {
                z
            } else {
                z.iter().map(|v| v.sin()).collect()
            }
        };
        let rows = l.weight.rows();
        let mut out = DenseMatrix::zeros(rows, h_prev.len());
        for j in 0..h_prev.len() {
            let mut hp = h_prev.to_vec();
            let mut hm = h_prev.to_vec();
            hp[j] += step;
            hm[j] -= step;
            let fp = apply(&hp);
            let fm = apply(&hm);
            for i in 0..rows {
                out.set(i, j, (fp[i] - fm[i]) / (2.0 * step));
            }
        }
        out
    }

    #[test]
    fn layer_jacobian_matches_finite_differences() {
        let mut rng = Rng::seed_from_u64(21);
        let net = random_net(&mut rng, &[3, 7, 7, 2], 1.5);
        let trace = net.forward(&[0.1, -0.6, 0.3]);
        for layer in 2..=net.depth() {
            let h_prev = &trace.activations[layer - 2];
            let fd = layer_map_fd(&net, layer, h_prev);
            let j = net.layer_jacobian(&trace, layer);
            for i in 0..j.rows() {
                for c in 0..j.cols() {
                    let a = j.get(i, c);
                    let f = fd.get(i, c);
                    assert!((a - f).abs() <= 1e-6 * a.abs().max(1.0), "({i},{c}): {a} vs {f}");
                }
            }
        }
    }

    #[test]
    fn end_to_end_depth3_is_single_factor() {
        let mut rng = Rng::seed_from_u64(13);
        let net = random_net(&mut rng, &[2, 5, 5, 1], 1.0);
        let trace = net.forward(&[0.2, 0.8]);
        assert_eq!(net.end_to_end_jacobian(&trace), net.layer_jacobian(&trace, 2));
    }

    #[test]
    fn end_to_end_matches_finite_differences() {
        let mut rng = Rng::seed_from_u64(34);
        let net = random_net(&mut rng, &[2, 6, 6, 6, 1], 1.2);
        let trace = net.forward(&[-0.4, 0.5]);
        let h1 = trace.activations[0].clone();

        // Re-run the hidden chain 2..=L-1 from a perturbed h_1.
        let chain = |h: &[f64]| -> Vec<f64> {
            let mut cur = h.to_vec();
            for layer in 2..net.depth() {
                cur = super::affine(&net.layers[layer - 1], &cur)
                    .iter()
                    .map(|v| v.sin())
                    .collect();
            }
            cur
        };
        let step = 1e-6;
        let j = net.end_to_end_jacobian(&trace);
        for col in 0..h1.len() {
            let mut hp = h1.clone();
            let mut hm = h1.clone();
            hp[col] += step;
            hm[col] -= step;
            let fp = chain(&hp);
            let fm = chain(&hm);
            for row in 0..j.rows() {
                let fd = (fp[row] - fm[row]) / (2.0 * step);
                let a = j.get(row, col);
                assert!((a - fd).abs() <= 1e-5 * a.abs().max(1.0));
            }
        }
    }

    #[test]
    fn input_gradient_scalar_calculus() {
        let (w1, b1, w2, b2) = (1.7, 0.3, -2.2, 0.9);
        let net = SirenNet {
            layers: vec![scalar_layer(w1, b1), scalar_layer(w2, b2)],
            omega0: 1.0,
            scheme_label: "custom".into(),
            seed: 0,
        };
        let x = 0.37;
        let trace = net.forward(&[x]);
        let g = net.input_gradient(&trace);
        let expected = w2 * w1 * (w1 * x + b1).cos();
        assert!((g.get(0, 0) - expected).abs() <= 1e-14);
    }

    #[test]
    fn zero_first_layer_weights_give_zero_input_gradient() {
        let mut rng = Rng::seed_from_u64(3);
        let mut net = random_net(&mut rng, &[2, 4, 1], 1.0);
        net.layers[0].weight = DenseMatrix::zeros(4, 2);
        let trace = net.forward(&[0.5, 0.5]);
        let g = net.input_gradient(&trace);
        assert!(g.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn input_gradient_matches_finite_differences() {
        let mut rng = Rng::seed_from_u64(55);
        let net = random_net(&mut rng, &[3, 8, 8, 2], 2.0);
        let x = [0.3, -0.1, 0.7];
        let trace = net.forward(&x);
        let g = net.input_gradient(&trace);
        let step = 1e-6;
        for j in 0..x.len() {
            let mut xp = x;
            let mut xm = x;
            xp[j] += step;
            xm[j] -= step;
            let fp = net.forward(&xp).output;
            let fm = net.forward(&xm).output;
            for i in 0..g.rows() {
                let fd = (fp[i] - fm[i]) / (2.0 * step);
                let a = g.get(i, j);
                assert!((a - fd).abs() <= 1e-6 * a.abs().max(1.0));
            }
        }
    }

    #[test]
    fn input_gradient_equals_layer_jacobian_chain() {
        let mut rng = Rng::seed_from_u64(70);
        let net = random_net(&mut rng, &[2, 6, 6, 6, 2], 1.0);
        let trace = net.forward(&[0.25, -0.33]);
        let mut chain = net.layer_jacobian(&trace, 1);
        for layer in 2..=net.depth() {
            chain = net.layer_jacobian(&trace, layer).matmul(&chain);
        }
        let g = net.input_gradient(&trace);
        assert!(g.sub(&chain).frobenius_norm() <= 1e-12 * chain.frobenius_norm().max(1.0));
    }

    #[test]
    fn zero_upstream_gives_zero_gradient() {
        let mut rng = Rng::seed_from_u64(2);
        let net = random_net(&mut rng, &[2, 4, 1], 1.0);
        let trace = net.forward(&[0.1, 0.2]);
        let g = net.param_gradient(&trace, &[0.0]);
        for l in &g.layers {
            assert!(l.weight.data().iter().all(|&v| v == 0.0));
            assert!(l.bias.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn scalar_net_weight_gradient_calculus() {
        let (w1, b1, w2, b2) = (0.8, -0.1, 1.4, 0.2);
        let net = SirenNet {
            layers: vec![scalar_layer(w1, b1), scalar_layer(w2, b2)],
            omega0: 1.0,
            scheme_label: "custom".into(),
            seed: 0,
        };
        let x = -0.6;
        let trace = net.forward(&[x]);
        let g = net.param_gradient(&trace, &[1.0]);
        let expected_dw1 = w2 * (w1 * x + b1).cos() * x;
        assert!((g.layers[0].weight.get(0, 0) - expected_dw1).abs() <= 1e-14);
        let expected_db1 = w2 * (w1 * x + b1).cos();
        assert!((g.layers[0].bias[0] - expected_db1).abs() <= 1e-14);
        assert!((g.layers[1].weight.get(0, 0) - (w1 * x + b1).sin()).abs() <= 1e-14);
        assert!((g.layers[1].bias[0] - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn param_gradient_full_finite_difference_sweep() {
        let mut rng = Rng::seed_from_u64(99);
        let net = random_net(&mut rng, &[2, 8, 8, 1], 1.5);
        let x = [0.45, -0.8];
        let trace = net.forward(&x);
        let g = net.param_gradient(&trace, &[1.0]);
        let step = 1e-6;
        for (li, layer) in net.layers.iter().enumerate() {
            for r in 0..layer.weight.rows() {
                for c in 0..layer.weight.cols() {
                    let mut np = net.clone();
                    let mut nm = net.clone();
                    let h = step * layer.weight.get(r, c).abs().max(1.0);
                    np.layers[li].weight.set(r, c, layer.weight.get(r, c) + h);
                    nm.layers[li].weight.set(r, c, layer.weight.get(r, c) - h);
                    let fd = (np.forward(&x).output[0] - nm.forward(&x).output[0]) / (2.0 * h);
                    let a = g.layers[li].weight.get(r, c);
                    assert!((a - fd).abs() <= 1e-6 * a.abs().max(1.0), "W[{li}][{r},{c}]");
                }
            }
            for b in 0..layer.bias.len() {
                let mut np = net.clone();
                let mut nm = net.clone();
                let h = step * layer.bias[b].abs().max(1.0);
                np.layers[li].bias[b] += h;
                nm.layers[li].bias[b] -= h;
                let fd = (np.forward(&x).output[0] - nm.forward(&x).output[0]) / (2.0 * h);
                let a = g.layers[li].bias[b];
                assert!((a - fd).abs() <= 1e-6 * a.abs().max(1.0), "b[{li}][{b}]");
            }
        }
    }

    #[test]
    fn perturbing_last_bias_shifts_output_exactly() {
        let mut rng = Rng::seed_from_u64(6);
        let mut net = random_net(&mut rng, &[1, 5, 1], 1.0);
        let base = net.forward(&[0.2]).output[0];
        let delta = 0.123456;
        net.layers[1].bias[0] += delta;
        let shifted = net.forward(&[0.2]).output[0];
        assert!((shifted - base - delta).abs() <= 1e-15);
    }

    #[test]
    fn ntk_feature_consistency() {
        let mut rng = Rng::seed_from_u64(15);
        let net = random_net(&mut rng, &[2, 6, 6, 1], 1.0);
        let x = [0.3, 0.4];
        let y = [-0.5, 0.9];
        let fx = net.ntk_feature(&x);
        let fy = net.ntk_feature(&y);
        assert_eq!(fx.len(), net.num_params());

        // Equals the flattened param gradient with upstream = 1.
        let trace = net.forward(&x);
        let flat = net.param_gradient(&trace, &[1.0]).flatten();
        assert_eq!(fx, flat);

        // Dot-product symmetry and the squared-norm identity.
        let xy = crate::linalg::dot(&fx, &fy);
        let yx = crate::linalg::dot(&fy, &fx);
        assert!((xy - yx).abs() <= 1e-14 * xy.abs().max(1.0));
        let xx = crate::linalg::dot(&fx, &fx);
        let norm_sq: f64 = fx.iter().map(|v| v * v).sum();
        assert!((xx - norm_sq).abs() <= 1e-14 * norm_sq.max(1.0));
    }

    #[test]
    #[should_panic(expected = "scalar output")]
    fn ntk_feature_rejects_vector_output() {
        let mut rng = Rng::seed_from_u64(1);
        let net = random_net(&mut rng, &[2, 4, 2], 1.0);
        let _ = net.ntk_feature(&[0.0, 0.0]);
    }

    #[test]
    fn batched_forward_matches_per_input() {
        let mut rng = Rng::seed_from_u64(40);
        let net = random_net(&mut rng, &[2, 8, 8, 2], 1.3);
        let inputs = DenseMatrix::from_fn(10, 2, |_, _| rng.uniform(-1.0, 1.0));
        let batch = net.forward_batch(&inputs);
        for i in 0..inputs.rows() {
            let single = net.forward(inputs.row(i));
            for j in 0..2 {
                assert!((batch.output.get(i, j) - single.output[j]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn batched_backward_sums_per_input_gradients() {
        let mut rng = Rng::seed_from_u64(41);
        let net = random_net(&mut rng, &[2, 6, 6, 1], 1.1);
        let inputs = DenseMatrix::from_fn(7, 2, |_, _| rng.uniform(-1.0, 1.0));
        let upstream = DenseMatrix::from_fn(7, 1, |_, _| rng.uniform(-1.0, 1.0));

        let batch = net.forward_batch(&inputs);
        let got = net.backward_batch(&batch, &upstream);

        let mut want = ParamGradient::zeros_like(&net);
        for i in 0..inputs.rows() {
            let trace = net.forward(inputs.row(i));
            let g = net.param_gradient(&trace, upstream.row(i));
            for (w, g) in want.layers.iter_mut().zip(&g.layers) {
                w.weight = w.weight.add(&g.weight);
                for (a, b) in w.bias.iter_mut().zip(&g.bias) {
                    *a += b;
                }
            }
        }
        for (a, b) in got.layers.iter().zip(&want.layers) {
            let scale = b.weight.frobenius_norm().max(1.0);
            assert!(a.weight.sub(&b.weight).frobenius_norm() <= 1e-12 * scale);
            for (x, y) in a.bias.iter().zip(&b.bias) {
                assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0));
            }
        }
    }

    #[test]
    fn batched_sensitivities_match_param_gradients() {
        let mut rng = Rng::seed_from_u64(60);
        let net = random_net(&mut rng, &[2, 5, 5, 5, 1], 1.4);
        let inputs = DenseMatrix::from_fn(6, 2, |_, _| rng.uniform(-1.0, 1.0));
        let batch = net.forward_batch(&inputs);
        let sens = net.sensitivity_batch(&batch);
        for i in 0..inputs.rows() {
            let trace = net.forward(inputs.row(i));
            let g = net.param_gradient(&trace, &[1.0]);
            // Bias gradients equal the sensitivities a_l = dPsi/dz_l.
            for layer in 1..net.depth() {
                for (j, &want) in g.layers[layer - 1].bias.iter().enumerate() {
                    let got = sens[layer - 1].get(i, j);
                    assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn batched_input_gradient_matches_per_input() {
        let mut rng = Rng::seed_from_u64(61);
        let net = random_net(&mut rng, &[3, 6, 6, 1], 1.0);
        let inputs = DenseMatrix::from_fn(5, 3, |_, _| rng.uniform(-1.0, 1.0));
        let batch = net.forward_batch(&inputs);
        let grads = net.input_gradient_batch(&batch);
        for i in 0..inputs.rows() {
            let trace = net.forward(inputs.row(i));
            let g = net.input_gradient(&trace);
            for j in 0..3 {
                assert!((grads.get(i, j) - g.get(0, j)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let mut rng = Rng::seed_from_u64(77);
        let net = random_net(&mut rng, &[2, 5, 1], std::f64::consts::PI);
        let json = net.to_json();
        let back = SirenNet::from_json(&json).unwrap();
        assert_eq!(net, back);
        for (l1, l2) in net.layers.iter().zip(&back.layers) {
            for (a, b) in l1.weight.data().iter().zip(l2.weight.data()) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
