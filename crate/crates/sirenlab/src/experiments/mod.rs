//! Desk-scale fitting and denoising experiments: synthetic multi-scale
//! targets in 1/2/3 dimensions, grayscale image fitting with upsampled
//! evaluation, high-frequency denoising, full-batch Adam training, and
//! depth/width sweep drivers.

mod adam;
mod metrics;
mod pgm;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use metrics::{mse, psnr, snr};
pub use pgm::{
    pixel_center, read_pgm, synthetic_image, synthetic_image_value, write_pgm, GrayImage,
};

use crate::diagnostics::spectrum_of_signal;
use crate::init::{resolve_scheme, sample_network, InitScheme};
use crate::linalg::{linspace, DenseMatrix, Rng};
use crate::network::SirenNet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{path}: not a valid 8-bit PGM ({msg})")]
    PgmFormat { path: String, msg: String },
    #[error("training diverged at epoch {epoch} (loss = {loss})")]
    Diverged { epoch: usize, loss: f64 },
}

/// Multi-scale 1-D target.
pub fn target_f1d(x: f64) -> f64 {
    (3.0 * x).sin() + 0.7 * (8.0 * x).cos() + 0.3 * (40.0 * x + 1.0).sin() + (-x * x).exp()
}

/// Multi-scale 2-D target.
pub fn target_f2d(x: f64, y: f64) -> f64 {
    (3.0 * x).sin() * (3.0 * y).cos()
        + (15.0 * x - 2.0).sin() * (15.0 * y).cos()
        + (-(x * x + y * y)).exp()
}

/// Multi-scale 3-D target.
pub fn target_f3d(x: f64, y: f64, z: f64) -> f64 {
    (5.0 * x).sin() * (12.0 * y).cos() * (3.0 * z).sin()
        + (-(x * x + y * y + z * z)).exp()
}

/// Angular Nyquist frequency of `points_per_axis` samples spanning a
/// width-2 domain: `pi * M / 2` (equivalently `2 pi * (M/4)` cycles).
pub fn nyquist_omega0(points_per_axis: f64) -> f64 {
    std::f64::consts::PI * points_per_axis / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TaskKind {
    Signal,
    Image,
}

/// Train/test split for one fitting task. Targets are scalar.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub task: String,
    pub kind: TaskKind,
    pub train_x: DenseMatrix,
    pub train_y: Vec<f64>,
    pub test_x: DenseMatrix,
    pub test_y: Vec<f64>,
    /// Recommended first-layer frequency scale (grid Nyquist rule).
    pub omega0: f64,
}

impl Dataset {
    pub fn n0(&self) -> usize {
        self.train_x.cols()
    }
}

/// 1-D task: `n_train` equispaced points on `[-1,1]`, denser test grid.
pub fn dataset_1d(n_train: usize, n_test: usize) -> Dataset {
    let train_x = DenseMatrix::from_vec(n_train, 1, linspace(-1.0, 1.0, n_train));
    let train_y = (0..n_train).map(|i| target_f1d(train_x.get(i, 0))).collect();
    let test_x = DenseMatrix::from_vec(n_test, 1, linspace(-1.0, 1.0, n_test));
    let test_y = (0..n_test).map(|i| target_f1d(test_x.get(i, 0))).collect();
    Dataset {
        task: "1d".into(),
        kind: TaskKind::Signal,
        train_x,
        train_y,
        test_x,
        test_y,
        omega0: nyquist_omega0(n_train as f64),
    }
}

fn random_points(rng: &mut Rng, n: usize, dim: usize) -> DenseMatrix {
    DenseMatrix::from_fn(n, dim, |_, _| rng.uniform(-1.0, 1.0))
}

/// 2-D task: random train/test points on `[-1,1]^2`.
pub fn dataset_2d(n_train: usize, n_test: usize, seed: u64) -> Dataset {
    let mut rng = Rng::seed_from_u64(seed);
    let train_x = random_points(&mut rng, n_train, 2);
    let test_x = random_points(&mut rng, n_test, 2);
    let f = |m: &DenseMatrix, i: usize| target_f2d(m.get(i, 0), m.get(i, 1));
    Dataset {
        task: "2d".into(),
        kind: TaskKind::Signal,
        train_y: (0..n_train).map(|i| f(&train_x, i)).collect(),
        test_y: (0..n_test).map(|i| f(&test_x, i)).collect(),
        train_x,
        test_x,
        omega0: nyquist_omega0((n_train as f64).sqrt()),
    }
}

/// 3-D task: random train/test points on `[-1,1]^3`.
pub fn dataset_3d(n_train: usize, n_test: usize, seed: u64) -> Dataset {
    let mut rng = Rng::seed_from_u64(seed);
    let train_x = random_points(&mut rng, n_train, 3);
    let test_x = random_points(&mut rng, n_test, 3);
    let f = |m: &DenseMatrix, i: usize| target_f3d(m.get(i, 0), m.get(i, 1), m.get(i, 2));
    Dataset {
        task: "3d".into(),
        kind: TaskKind::Signal,
        train_y: (0..n_train).map(|i| f(&train_x, i)).collect(),
        test_y: (0..n_test).map(|i| f(&test_x, i)).collect(),
        train_x,
        test_x,
        omega0: nyquist_omega0((n_train as f64).cbrt()),
    }
}

fn image_grid(image: &GrayImage) -> (DenseMatrix, Vec<f64>) {
    let m = image.width;
    assert_eq!(image.width, image.height, "image tasks expect square images");
    let mut x = DenseMatrix::zeros(m * m, 2);
    let mut y = Vec::with_capacity(m * m);
    for row in 0..m {
        for col in 0..m {
            let (px, py) = pixel_center(m, row, col);
            x.set(row * m + col, 0, px);
            x.set(row * m + col, 1, py);
            y.push(image.get(row, col));
        }
    }
    (x, y)
}

/// Image fitting task: train on the pixel grid of `image`, test against
/// `reference` (same domain, typically higher resolution).
pub fn image_dataset(image: &GrayImage, reference: &GrayImage) -> Dataset {
    let (train_x, train_y) = image_grid(image);
    let (test_x, test_y) = image_grid(reference);
    Dataset {
        task: "image".into(),
        kind: TaskKind::Image,
        train_x,
        train_y,
        test_x,
        test_y,
        omega0: nyquist_omega0(image.width as f64),
    }
}

/// Denoising task data: noisy train targets plus clean references.
#[derive(Debug, Clone)]
pub struct DenoiseDataset {
    pub dataset: Dataset,
    pub clean_train_y: Vec<f64>,
    /// The normalized noise field on the train grid (zero mean, unit
    /// variance by construction).
    pub noise: Vec<f64>,
    /// Sampled `(f_x, f_y)` pairs, all within `[2 f_nyq, 4 f_nyq]`.
    pub wave_freqs: Vec<(f64, f64)>,
    pub sigma_noise: f64,
    pub f_nyq: f64,
}

/// Corrupt the training targets of an image with a superposition of `k`
/// random plane waves whose frequencies lie strictly above the grid
/// Nyquist frequency `f_nyq` (in cycles per unit on `[-1,1]`), normalized
/// on the train grid to zero mean and unit variance, scaled by
/// `sigma_noise`. The clean `reference` becomes the test target.
pub fn make_denoise_dataset(
    image: &GrayImage,
    k: usize,
    f_nyq: f64,
    sigma_noise: f64,
    seed: u64,
    reference: &GrayImage,
) -> DenoiseDataset {
    let mut dataset = image_dataset(image, reference);
    dataset.task = "denoise".into();
    let clean_train_y = dataset.train_y.clone();

    let mut rng = Rng::seed_from_u64(seed);
    let wave_freqs: Vec<(f64, f64)> = (0..k)
        .map(|_| (rng.uniform(2.0 * f_nyq, 4.0 * f_nyq), rng.uniform(2.0 * f_nyq, 4.0 * f_nyq)))
        .collect();
    let phases: Vec<f64> = (0..k).map(|_| rng.uniform(0.0, std::f64::consts::TAU)).collect();

    let b = dataset.train_x.rows();
    let mut eta = vec![0.0; b];
    for (i, e) in eta.iter_mut().enumerate() {
        let x1 = dataset.train_x.get(i, 0);
        let x2 = dataset.train_x.get(i, 1);
        *e = wave_freqs
            .iter()
            .zip(&phases)
            .map(|(&(fx, fy), &phi)| (std::f64::consts::TAU * (fx * x1 + fy * x2) + phi).sin())
            .sum();
    }
    // Exact normalization on the train grid.
    let mean = eta.iter().sum::<f64>() / b as f64;
    let var = eta.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / b as f64;
    let std = var.sqrt();
    for v in &mut eta {
        *v = (*v - mean) / std;
    }
    for (y, n) in dataset.train_y.iter_mut().zip(&eta) {
        *y += sigma_noise * n;
    }

    DenoiseDataset { dataset, clean_train_y, noise: eta, wave_freqs, sigma_noise, f_nyq }
}

/// Full-batch Adam training configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { learning_rate: 1e-4, epochs: 5000, beta1: 0.9, beta2: 0.999, eps: 1e-8, seed: 0 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.epochs < 1 {
            return Err(format!("epochs must be >= 1, got {}", self.epochs));
        }
        if !(self.learning_rate > 0.0) {
            return Err(format!("learning rate must be positive, got {}", self.learning_rate));
        }
        if !(self.beta1 > 0.0 && self.beta1 < 1.0 && self.beta2 > 0.0 && self.beta2 < 1.0) {
            return Err(format!("betas must lie in (0,1), got {} / {}", self.beta1, self.beta2));
        }
        Ok(())
    }
}

/// Metrics and provenance of one training run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub task: String,
    pub scheme_label: String,
    pub width: usize,
    pub depth: usize,
    pub omega0: f64,
    pub seed: u64,
    pub train_mse: f64,
    pub test_mse: f64,
    pub psnr: Option<f64>,
    pub snr: Option<f64>,
    /// Full-batch MSE at the start of each epoch.
    pub loss_curve: Vec<f64>,
    pub config: TrainConfig,
    pub wall_s: f64,
}

/// Full-batch MSE training with Adam. The loss curve records the MSE
/// before each update, so entry zero is the initial loss. Deterministic
/// under `(net, dataset, config)`.
pub fn train(
    net: SirenNet,
    dataset: &Dataset,
    config: &TrainConfig,
) -> Result<(ExperimentReport, SirenNet), ExperimentError> {
    assert_eq!(net.n_in(), dataset.n0(), "train: network input dim mismatch");
    assert_eq!(net.n_out(), 1, "train: scalar targets expected");
    let start = Instant::now();
    let mut net = net;
    let mut state = AdamState::new(&net);
    let adam_cfg = AdamConfig {
        learning_rate: config.learning_rate,
        beta1: config.beta1,
        beta2: config.beta2,
        eps: config.eps,
    };
    let b = dataset.train_x.rows();
    let mut loss_curve = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        let trace = net.forward_batch(&dataset.train_x);
        let mut upstream = DenseMatrix::zeros(b, 1);
        let mut loss = 0.0;
        for i in 0..b {
            let r = trace.output.get(i, 0) - dataset.train_y[i];
            loss += r * r;
            upstream.set(i, 0, 2.0 * r / b as f64);
        }
        loss /= b as f64;
        if !loss.is_finite() {
            return Err(ExperimentError::Diverged { epoch, loss });
        }
        loss_curve.push(loss);
        let grads = net.backward_batch(&trace, &upstream);
        adam_step(&mut net, &grads, &mut state, &adam_cfg);
    }

    let report = evaluate(&net, dataset, config, loss_curve, start.elapsed().as_secs_f64());
    Ok((report, net))
}

fn evaluate(
    net: &SirenNet,
    dataset: &Dataset,
    config: &TrainConfig,
    loss_curve: Vec<f64>,
    wall_s: f64,
) -> ExperimentReport {
    let train_pred = predictions(net, &dataset.train_x);
    let test_pred = predictions(net, &dataset.test_x);
    let train_mse = mse(&train_pred, &dataset.train_y);
    let test_mse = mse(&test_pred, &dataset.test_y);
    let residual: Vec<f64> = test_pred.iter().zip(&dataset.test_y).map(|(p, y)| p - y).collect();
    let snr_db = snr(&dataset.test_y, &residual);
    let psnr_db = match dataset.kind {
        TaskKind::Image => Some(psnr(&test_pred, &dataset.test_y, 1.0)),
        TaskKind::Signal => None,
    };
    ExperimentReport {
        task: dataset.task.clone(),
        scheme_label: net.scheme_label.clone(),
        width: net.hidden_width(),
        depth: net.depth(),
        omega0: net.omega0,
        seed: net.seed,
        train_mse,
        test_mse,
        psnr: psnr_db,
        snr: Some(snr_db),
        loss_curve,
        config: config.clone(),
        wall_s,
    }
}

/// Report for an untrained network (the zero-epoch case).
pub fn evaluate_untrained(
    net: &SirenNet,
    dataset: &Dataset,
    config: &TrainConfig,
) -> ExperimentReport {
    evaluate(net, dataset, config, Vec::new(), 0.0)
}

pub fn predictions(net: &SirenNet, inputs: &DenseMatrix) -> Vec<f64> {
    let out = net.forward_batch(inputs).output;
    (0..inputs.rows()).map(|i| out.get(i, 0)).collect()
}

/// Image-fit outcome, including the upsampled field for spectral
/// inspection.
#[derive(Debug, Clone)]
pub struct ImageFitOutcome {
    pub report: ExperimentReport,
    pub upsampled: GrayImage,
    /// Mean over image rows of the 1-D cutoff energy fraction of the
    /// upsampled field.
    pub upsample_cutoff_fraction: f64,
}

/// Fit an image per scheme and evaluate on an `upsample x` denser grid to
/// probe generalization. When the clean high-resolution reference is
/// available (synthetic images), test metrics are computed against it;
/// otherwise the native image doubles as the test target and the
/// upsampled field is only recorded.
pub fn image_fit_experiment(
    image: &GrayImage,
    reference: Option<&GrayImage>,
    schemes: &[InitScheme],
    depth: usize,
    width: usize,
    upsample: usize,
    config: &TrainConfig,
) -> Result<Vec<ImageFitOutcome>, ExperimentError> {
    let hires_size = image.width * upsample;
    let fallback = image.clone();
    let reference = reference.unwrap_or(&fallback);
    let dataset = image_dataset(image, reference);

    schemes
        .iter()
        .map(|scheme| {
            let resolved = resolve_scheme(scheme.clone(), dataset.omega0, 2, width, depth, 1)
                .expect("image experiment dimensions are valid");
            let net = sample_network(&resolved, config.seed);
            let (report, net) = train(net, &dataset, config)?;

            let mut up_x = DenseMatrix::zeros(hires_size * hires_size, 2);
            for row in 0..hires_size {
                for col in 0..hires_size {
                    let (px, py) = pixel_center(hires_size, row, col);
                    up_x.set(row * hires_size + col, 0, px);
                    up_x.set(row * hires_size + col, 1, py);
                }
            }
            let up_pred = predictions(&net, &up_x);
            let upsampled = GrayImage::new(hires_size, hires_size, up_pred);
            let mut fraction = 0.0;
            for row in 0..hires_size {
                let signal = &upsampled.pixels[row * hires_size..(row + 1) * hires_size];
                fraction += spectrum_of_signal(signal, (-1.0, 1.0), dataset.omega0)
                    .expect("upsampled grid resolves omega0")
                    .cutoff_energy_fraction;
            }
            fraction /= hires_size as f64;
            Ok(ImageFitOutcome { report, upsampled, upsample_cutoff_fraction: fraction })
        })
        .collect()
}

/// Cross-product sweep over schemes, depths, widths and seeds; one report
/// per cell, in deterministic order.
pub fn depth_width_sweep(
    dataset: &Dataset,
    schemes: &[InitScheme],
    depths: &[usize],
    widths: &[usize],
    seeds: &[u64],
    config: &TrainConfig,
) -> Result<Vec<ExperimentReport>, ExperimentError> {
    let mut cells = Vec::new();
    for scheme in schemes {
        for &depth in depths {
            for &width in widths {
                for &seed in seeds {
                    cells.push((scheme.clone(), depth, width, seed));
                }
            }
        }
    }
    cells
        .par_iter()
        .map(|(scheme, depth, width, seed)| {
            let resolved =
                resolve_scheme(scheme.clone(), dataset.omega0, dataset.n0(), *width, *depth, 1)
                    .expect("sweep dimensions are valid");
            let net = sample_network(&resolved, *seed);
            let cell_config = TrainConfig { seed: *seed, ..config.clone() };
            train(net, dataset, &cell_config).map(|(report, _)| report)
        })
        .collect()
}

/// Tidy CSV with one row per report.
pub fn write_reports_csv<W: std::io::Write>(
    out: W,
    reports: &[ExperimentReport],
) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "task", "scheme", "depth", "width", "seed", "train_mse", "test_mse", "psnr", "snr",
        "epochs", "lr", "omega0", "wall_s",
    ])
    .map_err(io_from_csv)?;
    for r in reports {
        w.write_record([
            r.task.clone(),
            r.scheme_label.clone(),
            r.depth.to_string(),
            r.width.to_string(),
            r.seed.to_string(),
            format!("{:e}", r.train_mse),
            format!("{:e}", r.test_mse),
            r.psnr.map(fmt_db).unwrap_or_default(),
            r.snr.map(fmt_db).unwrap_or_default(),
            r.config.epochs.to_string(),
            format!("{:e}", r.config.learning_rate),
            r.omega0.to_string(),
            format!("{:.3}", r.wall_s),
        ])
        .map_err(io_from_csv)?;
    }
    w.flush()?;
    Ok(())
}

fn fmt_db(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        format!("{v:.4}")
    }
}

fn io_from_csv(e: csv::Error) -> ExperimentError {
    ExperimentError::Io(std::io::Error::other(e))
}
