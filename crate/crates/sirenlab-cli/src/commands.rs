//! Command implementations: dispatch into the library, write data files
//! (CSV or JSON) plus a manifest, and decide the exit status.

use crate::config::{OutputFormat, Resolved, RunConfig};
use anyhow::{bail, Context, Result};
use serde::Serialize;
use sirenlab::diagnostics::{
    derive_seeds, fourier_overlap, gradient_depth_scan, jacobian_singular_spectrum, ntk_matrix,
    ntk_trace_depth_scan, output_spectrum, variance_profile,
};
use sirenlab::experiments::{
    dataset_1d, dataset_2d, dataset_3d, depth_width_sweep, image_fit_experiment,
    make_denoise_dataset, read_pgm, synthetic_image, synthetic_image_value, write_pgm,
    write_reports_csv, Dataset, ExperimentReport, GrayImage, TrainConfig,
};
use sirenlab::init::{predicted_profile, resolve_scheme, sample_network, InitScheme};
use sirenlab::linalg::{linspace, DenseMatrix};
use std::fs::File;
use std::io::Write as _;
use std::path::{Path, PathBuf};

/// Fixed seed for the shared random datasets of the 2-D/3-D tasks, so
/// every run fits the same function samples.
const DATASET_SEED: u64 = 4242;

pub struct Outcome {
    /// Gate verdict: `Some(false)` exits with status 2.
    pub gate_passed: Option<bool>,
    pub outputs: Vec<PathBuf>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    resolved: &'a RunConfig,
    /// Raw config-file values, when a file was given (flags win on
    /// conflict; both are recorded).
    file_values: Option<&'a crate::config::FileConfig>,
    outputs: Vec<String>,
    gate_passed: Option<bool>,
}

pub fn run(resolved: &Resolved) -> Result<Outcome> {
    let cfg = &resolved.config;
    std::fs::create_dir_all(&cfg.out)
        .with_context(|| format!("cannot create output directory {}", cfg.out.display()))?;
    let mut outcome = match cfg.command.as_str() {
        "verify-init" => verify_init(cfg)?,
        "ntk-scan" => ntk_scan(cfg)?,
        "spectrum" => spectrum(cfg)?,
        "overlap" => overlap(cfg)?,
        "svd-scan" => svd_scan(cfg)?,
        "fit" => fit(cfg)?,
        "denoise" => denoise(cfg)?,
        "sweep" => sweep(cfg)?,
        other => bail!("unknown command {other}"),
    };

    let manifest_path = cfg.out.join("manifest.json");
    let manifest = Manifest {
        command: &cfg.command,
        version: env!("CARGO_PKG_VERSION"),
        resolved: cfg,
        file_values: resolved.file_values.as_ref(),
        outputs: outcome.outputs.iter().map(|p| p.display().to_string()).collect(),
        gate_passed: outcome.gate_passed,
    };
    let mut f = File::create(&manifest_path)?;
    serde_json::to_writer_pretty(&mut f, &manifest)?;
    f.write_all(b"\n")?;
    outcome.outputs.push(manifest_path);
    Ok(outcome)
}

/// Write rows as CSV or a JSON array, by the configured format.
fn write_rows<T: Serialize>(cfg: &RunConfig, stem: &str, rows: &[T]) -> Result<PathBuf> {
    match cfg.format {
        OutputFormat::Csv => {
            let path = cfg.out.join(format!("{stem}.csv"));
            let mut w = csv::Writer::from_path(&path)?;
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()?;
            Ok(path)
        }
        OutputFormat::Json => {
            let path = cfg.out.join(format!("{stem}.json"));
            let mut f = File::create(&path)?;
            serde_json::to_writer_pretty(&mut f, rows)?;
            f.write_all(b"\n")?;
            Ok(path)
        }
    }
}

fn diag_omega0(cfg: &RunConfig) -> f64 {
    cfg.omega0.unwrap_or(1.0)
}

fn grid_matrix(n: usize) -> DenseMatrix {
    DenseMatrix::from_vec(n, 1, linspace(-1.0, 1.0, n))
}

#[derive(Serialize)]
struct VarianceRow {
    scheme: String,
    layer: usize,
    preact_std: f64,
    preact_se: f64,
    preact_predicted: f64,
    jac_scaled_std: f64,
    jac_se: f64,
    jac_predicted: f64,
}

fn verify_init(cfg: &RunConfig) -> Result<Outcome> {
    let omega0 = diag_omega0(cfg);
    let inputs = grid_matrix(cfg.inputs);
    let grid = linspace(-1.0, 1.0, cfg.inputs);
    let mut rows = Vec::new();
    let mut all_pass = true;

    for scheme in cfg.scheme_values()? {
        let resolved = resolve_scheme(scheme.clone(), omega0, 1, cfg.width, cfg.depth, 1)?;
        let profile = variance_profile(&resolved, cfg.ensembles, &inputs, cfg.seed);
        let predicted = predicted_profile(&resolved, &grid, cfg.depth - 1);

        for (lv, (u, jac)) in profile
            .layers
            .iter()
            .zip(predicted.preact_var.iter().zip(&predicted.jac_scaled_std))
        {
            rows.push(VarianceRow {
                scheme: profile.scheme_label.clone(),
                layer: lv.layer,
                preact_std: lv.preact_std,
                preact_se: lv.preact_se,
                preact_predicted: u.sqrt(),
                jac_scaled_std: lv.jac_scaled_std,
                jac_se: lv.jac_se,
                jac_predicted: *jac,
            });
        }

        // Gate: deep-layer statistics against the finite-depth theory
        // trajectory, four standard errors plus a small model allowance.
        let deep = profile.deep_layer();
        let want_pre = predicted.preact_var[cfg.depth - 2].sqrt();
        let want_jac = predicted.jac_scaled_std[cfg.depth - 2];
        let pre_ok = (deep.preact_std - want_pre).abs() <= 4.0 * deep.preact_se + 0.01;
        let jac_ok = (deep.jac_scaled_std - want_jac).abs() <= 4.0 * deep.jac_se + 0.01;
        // The sigma_a = 0 scheme must also decay monotonically.
        let trend_ok = if scheme == InitScheme::ProposedSigmaA0 {
            profile.layers[..cfg.depth - 1]
                .windows(2)
                .all(|w| w[1].preact_std <= w[0].preact_std + w[0].preact_se)
        } else {
            true
        };
        let ok = pre_ok && jac_ok && trend_ok;
        all_pass &= ok;
        println!(
            "verify-init {}: {} (preact {:.4} vs {:.4}, jac {:.4} vs {:.4}{})",
            profile.scheme_label,
            if ok { "PASS" } else { "FAIL" },
            deep.preact_std,
            want_pre,
            deep.jac_scaled_std,
            want_jac,
            if trend_ok { "" } else { ", decay trend violated" },
        );
    }

    let data = write_rows(cfg, "variance_profile", &rows)?;
    Ok(Outcome { gate_passed: Some(all_pass), outputs: vec![data] })
}

#[derive(Serialize)]
struct NtkScanRow {
    scheme: String,
    depth: usize,
    normalized_trace: f64,
    law: String,
}

fn ntk_scan(cfg: &RunConfig) -> Result<Outcome> {
    let inputs = grid_matrix(cfg.inputs);
    let mut rows = Vec::new();
    let mut grad_rows = Vec::new();
    for scheme in cfg.scheme_values()? {
        let scan = ntk_trace_depth_scan(
            scheme.clone(),
            cfg.width,
            &cfg.depths,
            diag_omega0(cfg),
            &inputs,
            cfg.ensembles,
            cfg.seed,
        );
        // Companion scaling: the input-space gradient against depth.
        let grads = gradient_depth_scan(
            scheme,
            cfg.width,
            &cfg.depths,
            diag_omega0(cfg),
            &inputs,
            cfg.ensembles,
            cfg.seed,
        );
        println!(
            "ntk-scan {}: {} (input-grad log-slope {:.4})",
            scan.scheme_label,
            scan.law.label(),
            grads.fitted_log_slope
        );
        for (d, t) in scan.depths.iter().zip(&scan.normalized_traces) {
            rows.push(NtkScanRow {
                scheme: scan.scheme_label.clone(),
                depth: *d,
                normalized_trace: *t,
                law: scan.law.label().to_string(),
            });
        }
        for p in &grads.points {
            grad_rows.push(GradScanRow {
                scheme: grads.scheme_label.clone(),
                depth: p.depth,
                input_grad_std: p.input_grad_std,
                fitted_log_slope: grads.fitted_log_slope,
            });
        }
    }
    let data = write_rows(cfg, "ntk_scan", &rows)?;
    let grad_data = write_rows(cfg, "grad_scan", &grad_rows)?;
    Ok(Outcome { gate_passed: None, outputs: vec![data, grad_data] })
}

#[derive(Serialize)]
struct SpectrumRow {
    scheme: String,
    depth: usize,
    bin: usize,
    angular_freq: f64,
    magnitude: f64,
    energy: f64,
}

#[derive(Serialize)]
struct SpectrumSummaryRow {
    scheme: String,
    depth: usize,
    omega0: f64,
    cutoff_bin: usize,
    cutoff_energy_fraction: f64,
}

fn spectrum(cfg: &RunConfig) -> Result<Outcome> {
    let omega0 = cfg.omega0.unwrap_or(100.0);
    let grid = linspace(-1.0, 1.0, cfg.grid);
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for scheme in cfg.scheme_values()? {
        for &depth in &cfg.depths {
            let resolved = resolve_scheme(scheme.clone(), omega0, 1, cfg.width, depth, 1)?;
            let seeds = derive_seeds(cfg.seed ^ depth as u64, cfg.ensembles);
            let mut mean_mag: Vec<f64> = Vec::new();
            let mut mean_energy: Vec<f64> = Vec::new();
            let mut mean_fraction = 0.0;
            let mut cutoff_bin = 0;
            let mut freqs: Vec<f64> = Vec::new();
            for s in seeds {
                let net = sample_network(&resolved, s);
                let rep = output_spectrum(&net, &grid, omega0)?;
                if mean_mag.is_empty() {
                    mean_mag = vec![0.0; rep.magnitude.len()];
                    mean_energy = vec![0.0; rep.energy.len()];
                    freqs = rep.bin_angular_freq.clone();
                    cutoff_bin = rep.cutoff_bin;
                }
                for (m, v) in mean_mag.iter_mut().zip(&rep.magnitude) {
                    *m += v / cfg.ensembles as f64;
                }
                for (e, v) in mean_energy.iter_mut().zip(&rep.energy) {
                    *e += v / cfg.ensembles as f64;
                }
                mean_fraction += rep.cutoff_energy_fraction / cfg.ensembles as f64;
            }
            println!(
                "spectrum {} L={depth}: cutoff fraction {:.4}",
                scheme.label(),
                mean_fraction
            );
            summary.push(SpectrumSummaryRow {
                scheme: scheme.label().to_string(),
                depth,
                omega0,
                cutoff_bin,
                cutoff_energy_fraction: mean_fraction,
            });
            for (k, (f, (m, e))) in
                freqs.iter().zip(mean_mag.iter().zip(&mean_energy)).enumerate()
            {
                rows.push(SpectrumRow {
                    scheme: scheme.label().to_string(),
                    depth,
                    bin: k,
                    angular_freq: *f,
                    magnitude: *m,
                    energy: *e,
                });
            }
        }
    }
    let bins = write_rows(cfg, "spectrum_bins", &rows)?;
    let sum = write_rows(cfg, "spectrum_summary", &summary)?;
    Ok(Outcome { gate_passed: None, outputs: vec![bins, sum] })
}

#[derive(Serialize)]
struct OverlapRow {
    eigen_index: usize,
    eigenvalue: f64,
    bin: usize,
    angular_freq: f64,
    power: f64,
}

fn overlap(cfg: &RunConfig) -> Result<Outcome> {
    let omega0 = diag_omega0(cfg);
    let schemes = cfg.scheme_values()?;
    let scheme = schemes[0].clone();
    let resolved = resolve_scheme(scheme, omega0, 1, cfg.width, cfg.depth, 1)?;
    let net = sample_network(&resolved, cfg.seed);
    let inputs = grid_matrix(cfg.inputs);
    let k = ntk_matrix(&net, &inputs)?;
    let map = fourier_overlap(&k, (-1.0, 1.0), omega0);
    let mut rows = Vec::new();
    for n in 0..map.overlaps.rows() {
        for b in 0..map.overlaps.cols() {
            rows.push(OverlapRow {
                eigen_index: n,
                eigenvalue: k.eigenvalues[n],
                bin: b,
                angular_freq: map.bin_angular_freq[b],
                power: map.overlaps.get(n, b),
            });
        }
    }
    println!(
        "overlap {}: |I|={} eigenvectors, omega0 marker at bin {}",
        resolved.scheme.label(),
        map.overlaps.rows(),
        map.cutoff_bin
    );
    let data = write_rows(cfg, "overlap", &rows)?;
    Ok(Outcome { gate_passed: None, outputs: vec![data] })
}

#[derive(Serialize)]
struct SvdRow {
    scheme: String,
    depth: usize,
    index: usize,
    singular_value: f64,
}

#[derive(Serialize)]
struct SvdSummaryRow {
    scheme: String,
    depth: usize,
    max_singular: f64,
}

fn svd_scan(cfg: &RunConfig) -> Result<Outcome> {
    let pts = linspace(-std::f64::consts::PI, std::f64::consts::PI, cfg.inputs);
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for scheme in cfg.scheme_values()? {
        let scan = jacobian_singular_spectrum(
            scheme,
            cfg.width,
            &cfg.depths,
            diag_omega0(cfg),
            &pts,
            cfg.ensembles,
            cfg.seed,
        );
        println!("svd-scan {}: max singular {:?}", scan.scheme_label, scan.max_singular);
        for (di, depth) in scan.depths.iter().enumerate() {
            summary.push(SvdSummaryRow {
                scheme: scan.scheme_label.clone(),
                depth: *depth,
                max_singular: scan.max_singular[di],
            });
            for (i, v) in scan.spectra[di].iter().enumerate() {
                rows.push(SvdRow {
                    scheme: scan.scheme_label.clone(),
                    depth: *depth,
                    index: i,
                    singular_value: *v,
                });
            }
        }
    }
    let data = write_rows(cfg, "svd_scan", &rows)?;
    let sum = write_rows(cfg, "svd_summary", &summary)?;
    Ok(Outcome { gate_passed: None, outputs: vec![data, sum] })
}

#[derive(Serialize)]
struct GradScanRow {
    scheme: String,
    depth: usize,
    input_grad_std: f64,
    fitted_log_slope: f64,
}

fn load_or_synthetic_image(cfg: &RunConfig, size: usize) -> Result<(GrayImage, Option<GrayImage>)> {
    match &cfg.image {
        Some(path) => {
            let img = read_pgm(Path::new(path))?;
            Ok((img, None))
        }
        None => {
            let img = synthetic_image(size);
            let hi = synthetic_image(size * cfg.upsample);
            Ok((img, Some(hi)))
        }
    }
}

fn task_dataset(cfg: &RunConfig) -> Result<Dataset> {
    Ok(match cfg.task.as_str() {
        "1d" => dataset_1d(200, 1000),
        "2d" => dataset_2d(3600, 10000, DATASET_SEED),
        "3d" => dataset_3d(8000, 20000, DATASET_SEED),
        other => bail!("unknown task '{other}' (expected 1d, 2d, 3d or image)"),
    })
}

fn train_config(cfg: &RunConfig) -> TrainConfig {
    TrainConfig {
        learning_rate: cfg.lr,
        epochs: cfg.epochs,
        seed: cfg.seed,
        ..TrainConfig::default()
    }
}

fn fit(cfg: &RunConfig) -> Result<Outcome> {
    let schemes = cfg.scheme_values()?;
    let tc = train_config(cfg);
    let mut outputs = Vec::new();

    let reports: Vec<ExperimentReport> = if cfg.task == "image" {
        let (img, hires) = load_or_synthetic_image(cfg, 128)?;
        let mut all = Vec::new();
        for &seed in &cfg.seeds {
            let seeded = TrainConfig { seed, ..tc.clone() };
            let outcomes = image_fit_experiment(
                &img,
                hires.as_ref(),
                &schemes,
                cfg.depth,
                cfg.width,
                cfg.upsample,
                &seeded,
            )?;
            for oc in outcomes {
                let pgm = cfg
                    .out
                    .join(format!("upsampled_{}_seed{}.pgm", oc.report.scheme_label, seed));
                write_pgm(&oc.upsampled, &pgm, true)?;
                println!(
                    "fit image {} seed {}: train_mse={:.3e} test_mse={:.3e} cutoff_fraction={:.4}",
                    oc.report.scheme_label, seed, oc.report.train_mse, oc.report.test_mse,
                    oc.upsample_cutoff_fraction
                );
                outputs.push(pgm);
                all.push(oc.report);
            }
        }
        all
    } else {
        let mut dataset = task_dataset(cfg)?;
        if let Some(w) = cfg.omega0 {
            dataset.omega0 = w;
        }
        let reports = depth_width_sweep(
            &dataset,
            &schemes,
            &[cfg.depth],
            &[cfg.width],
            &cfg.seeds,
            &tc,
        )?;
        for r in &reports {
            println!(
                "fit {} {} seed {}: train_mse={:.3e} test_mse={:.3e}",
                r.task, r.scheme_label, r.seed, r.train_mse, r.test_mse
            );
        }
        reports
    };

    outputs.push(write_experiment_reports(cfg, "fit_reports", &reports)?);
    Ok(Outcome { gate_passed: None, outputs })
}

fn denoise(cfg: &RunConfig) -> Result<Outcome> {
    let schemes = cfg.scheme_values()?;
    let size = cfg.size;
    let img = synthetic_image(size);
    let reference = synthetic_image(size * 2);
    let f_nyq = size as f64 / 4.0;
    let tc = train_config(cfg);

    let mut reports = Vec::new();
    for &seed in &cfg.seeds {
        let dd = make_denoise_dataset(&img, cfg.waves, f_nyq, cfg.sigma_noise, seed, &reference);
        let mut dataset = dd.dataset;
        if let Some(w) = cfg.omega0 {
            dataset.omega0 = w;
        }
        let seeded = TrainConfig { seed, ..tc.clone() };
        let cell =
            depth_width_sweep(&dataset, &schemes, &[cfg.depth], &[cfg.width], &[seed], &seeded)?;
        for r in &cell {
            println!(
                "denoise {} seed {}: final_train_loss={:.3e} clean_test_mse={:.3e}",
                r.scheme_label,
                seed,
                r.loss_curve.last().copied().unwrap_or(r.train_mse),
                r.test_mse
            );
        }
        reports.extend(cell);
    }

    let data = write_experiment_reports(cfg, "denoise_reports", &reports)?;
    Ok(Outcome { gate_passed: None, outputs: vec![data] })
}

fn sweep(cfg: &RunConfig) -> Result<Outcome> {
    let schemes = cfg.scheme_values()?;
    let mut dataset = task_dataset(cfg)?;
    if let Some(w) = cfg.omega0 {
        dataset.omega0 = w;
    }
    let tc = train_config(cfg);
    let reports =
        depth_width_sweep(&dataset, &schemes, &cfg.depths, &cfg.widths, &cfg.seeds, &tc)?;
    for r in &reports {
        println!(
            "sweep {} {} L={} N={} seed {}: train_mse={:.3e} test_mse={:.3e}",
            r.task, r.scheme_label, r.depth, r.width, r.seed, r.train_mse, r.test_mse
        );
    }
    let data = write_experiment_reports(cfg, "sweep_reports", &reports)?;
    Ok(Outcome { gate_passed: None, outputs: vec![data] })
}

/// Experiment reports honor the configured format: the tidy CSV schema or
/// a JSON dump of the full reports (including loss curves).
fn write_experiment_reports(
    cfg: &RunConfig,
    stem: &str,
    reports: &[ExperimentReport],
) -> Result<PathBuf> {
    match cfg.format {
        OutputFormat::Csv => {
            let path = cfg.out.join(format!("{stem}.csv"));
            let f = File::create(&path)?;
            write_reports_csv(f, reports)?;
            Ok(path)
        }
        OutputFormat::Json => {
            let path = cfg.out.join(format!("{stem}.json"));
            let mut f = File::create(&path)?;
            serde_json::to_writer_pretty(&mut f, reports)?;
            f.write_all(b"\n")?;
            Ok(path)
        }
    }
}

