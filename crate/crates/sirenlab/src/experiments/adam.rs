//! Adam optimizer over network parameters, with bias correction.

use crate::network::{ParamGradient, SirenNet};

#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    /// Completed steps; bias correction uses `t + 1` on the next step.
    pub step: usize,
}

impl AdamState {
    pub fn new(net: &SirenNet) -> Self {
        let sizes: Vec<usize> = net
            .layers
            .iter()
            .map(|l| l.weight.rows() * l.weight.cols() + l.bias.len())
            .collect();
        Self {
            m: sizes.iter().map(|&s| vec![0.0; s]).collect(),
            v: sizes.iter().map(|&s| vec![0.0; s]).collect(),
            step: 0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { learning_rate: 1e-4, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// One Adam update in place: `theta -= lr * m_hat / (sqrt(v_hat) + eps)`.
pub fn adam_step(
    net: &mut SirenNet,
    grads: &ParamGradient,
    state: &mut AdamState,
    config: &AdamConfig,
) {
    assert_eq!(net.layers.len(), grads.layers.len(), "adam_step: layer count mismatch");
    state.step += 1;
    let t = state.step as i32;
    let bc1 = 1.0 - config.beta1.powi(t);
    let bc2 = 1.0 - config.beta2.powi(t);

    for (li, layer) in net.layers.iter_mut().enumerate() {
        let gl = &grads.layers[li];
        assert_eq!(
            (layer.weight.rows(), layer.weight.cols()),
            (gl.weight.rows(), gl.weight.cols()),
            "adam_step: gradient shape mismatch at layer {li}"
        );
        let m = &mut state.m[li];
        let v = &mut state.v[li];
        let nw = layer.weight.rows() * layer.weight.cols();

        let params = layer.weight.data_mut().iter_mut().chain(layer.bias.iter_mut());
        let grads_flat = gl.weight.data().iter().chain(gl.bias.iter());
        debug_assert_eq!(m.len(), nw + gl.bias.len());
        for (k, (p, &g)) in params.zip(grads_flat).enumerate() {
            m[k] = config.beta1 * m[k] + (1.0 - config.beta1) * g;
            v[k] = config.beta2 * v[k] + (1.0 - config.beta2) * g * g;
            let m_hat = m[k] / bc1;
            let v_hat = v[k] / bc2;
            *p -= config.learning_rate * m_hat / (v_hat.sqrt() + config.eps);
        }
    }
}
