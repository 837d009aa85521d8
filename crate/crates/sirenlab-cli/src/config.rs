//! Run configuration: CLI flags merged over an optional TOML config file,
//! fully resolved (defaults filled in) and echoed into a manifest.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sirenlab::init::InitScheme;
use std::path::{Path, PathBuf};

/// Flat key-value config file with the same keys as the long CLI flags.
/// Unknown keys are rejected.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub schemes: Option<String>,
    pub width: Option<usize>,
    pub depth: Option<usize>,
    pub depths: Option<String>,
    pub widths: Option<String>,
    pub omega0: Option<f64>,
    pub seed: Option<u64>,
    pub seeds: Option<String>,
    pub ensembles: Option<usize>,
    pub inputs: Option<usize>,
    pub grid: Option<usize>,
    pub epochs: Option<usize>,
    pub lr: Option<f64>,
    pub task: Option<String>,
    pub size: Option<usize>,
    pub sigma_noise: Option<f64>,
    pub waves: Option<usize>,
    pub image: Option<String>,
    pub cw: Option<f64>,
    pub cb: Option<f64>,
    pub upsample: Option<usize>,
    pub out: Option<String>,
    pub format: Option<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        let cfg: FileConfig = toml::from_str(&text)
            .with_context(|| format!("invalid config file {}", path.display()))?;
        Ok(cfg)
    }
}

/// Output format for data files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => bail!("unknown format '{other}' (expected csv or json)"),
        }
    }
}

/// Fully-resolved run configuration; everything a command needs, with all
/// defaults applied. Serialized verbatim into the manifest.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub schemes: Vec<String>,
    pub width: usize,
    pub depth: usize,
    pub depths: Vec<usize>,
    pub widths: Vec<usize>,
    pub omega0: Option<f64>,
    pub seed: u64,
    pub seeds: Vec<u64>,
    pub ensembles: usize,
    pub inputs: usize,
    pub grid: usize,
    pub epochs: usize,
    pub lr: f64,
    pub task: String,
    pub size: usize,
    pub sigma_noise: f64,
    pub waves: usize,
    pub image: Option<String>,
    pub cw: Option<f64>,
    pub cb: Option<f64>,
    pub upsample: usize,
    pub out: PathBuf,
    pub format: OutputFormat,
}

impl RunConfig {
    /// Schemes as parsed enum values.
    pub fn scheme_values(&self) -> Result<Vec<InitScheme>> {
        self.schemes
            .iter()
            .map(|name| InitScheme::parse(name, self.cw, self.cb).map_err(Into::into))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.depth < 2 {
            bail!("--depth must be at least 2 (a hidden sine layer plus the linear output)");
        }
        if let Some(&d) = self.depths.iter().find(|&&d| d < 2) {
            bail!("--depths entries must be at least 2, got {d}");
        }
        if self.width < 1 {
            bail!("--width must be at least 1");
        }
        if let Some(w) = self.omega0 {
            if !(w > 0.0) {
                bail!("--omega0 must be positive, got {w}");
            }
        }
        if self.epochs < 1 {
            bail!("--epochs must be at least 1");
        }
        if !(self.lr > 0.0) {
            bail!("--lr must be positive, got {}", self.lr);
        }
        if self.ensembles < 1 {
            bail!("--ensembles must be at least 1");
        }
        if self.schemes.is_empty() {
            bail!("--schemes must name at least one scheme");
        }
        self.scheme_values().map(|_| ())
    }
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(|tok| tok.trim())
        .filter(|tok| !tok.is_empty())
        .map(|tok| tok.parse::<T>().map_err(|e| anyhow::anyhow!("bad {what} entry '{tok}': {e}")))
        .collect()
}

/// Raw option values shared by every subcommand; `None` means "not given
/// on the command line" so the config file and defaults can fill it.
#[derive(Debug, Clone, Default, clap::Args, Serialize)]
pub struct CommonArgs {
    /// Comma-separated scheme names: proposed-sigma0, sigma1, sitzmann,
    /// framework-default, custom-on-curve, custom
    #[arg(long, value_name = "LIST")]
    pub schemes: Option<String>,
    /// Hidden width N
    #[arg(long)]
    pub width: Option<usize>,
    /// Total layer count L (including the final linear layer)
    #[arg(long)]
    pub depth: Option<usize>,
    /// Comma-separated depth list for scans
    #[arg(long, value_name = "LIST")]
    pub depths: Option<String>,
    /// Comma-separated width list for sweeps
    #[arg(long, value_name = "LIST")]
    pub widths: Option<String>,
    /// First-layer frequency scale (defaults to the task Nyquist rule for
    /// experiments, 1.0 for diagnostics)
    #[arg(long)]
    pub omega0: Option<f64>,
    /// Master seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated seed list for multi-seed experiments
    #[arg(long, value_name = "LIST")]
    pub seeds: Option<String>,
    /// Ensemble members per diagnostic
    #[arg(long)]
    pub ensembles: Option<usize>,
    /// Input points for diagnostics
    #[arg(long)]
    pub inputs: Option<usize>,
    /// Grid size for spectrum/overlap commands
    #[arg(long)]
    pub grid: Option<usize>,
    /// Training epochs
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Learning rate
    #[arg(long)]
    pub lr: Option<f64>,
    /// Task for fit/sweep: 1d, 2d, 3d, image
    #[arg(long)]
    pub task: Option<String>,
    /// Image size for denoise (pixels per side)
    #[arg(long)]
    pub size: Option<usize>,
    /// Denoise corruption level
    #[arg(long)]
    pub sigma_noise: Option<f64>,
    /// Number of random plane waves in the denoise field
    #[arg(long)]
    pub waves: Option<usize>,
    /// Grayscale PGM to fit (image task); synthetic pattern when omitted
    #[arg(long)]
    pub image: Option<String>,
    /// c_w for the custom schemes
    #[arg(long)]
    pub cw: Option<f64>,
    /// c_b for the custom scheme
    #[arg(long)]
    pub cb: Option<f64>,
    /// Upsampling factor for image evaluation
    #[arg(long)]
    pub upsample: Option<usize>,
    /// Output directory (default: $SIRENLAB_OUT or ./sirenlab-out)
    #[arg(long)]
    pub out: Option<String>,
    /// Data file format: csv or json
    #[arg(long)]
    pub format: Option<String>,
    /// Optional TOML config file; explicit flags win over file values
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Print the fully-resolved config as JSON and exit
    #[arg(long, default_value_t = false)]
    #[serde(skip)]
    pub print_config: bool,
}

pub struct Resolved {
    pub config: RunConfig,
    pub file_values: Option<FileConfig>,
}

impl CommonArgs {
    /// Merge precedence: explicit flag > config-file value > default.
    pub fn resolve(&self, command: &str) -> Result<Resolved> {
        let file = match &self.config {
            Some(path) => Some(FileConfig::load(path)?),
            None => None,
        };
        let f = file.clone().unwrap_or_default();

        let schemes_raw = self
            .schemes
            .clone()
            .or(f.schemes)
            .unwrap_or_else(|| "proposed-sigma0,sigma1,sitzmann,framework-default".into());
        let schemes: Vec<String> = schemes_raw
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect();

        let seed = self.seed.or(f.seed).unwrap_or(1);
        let seeds = match self.seeds.clone().or(f.seeds) {
            Some(list) => parse_list::<u64>(&list, "seed")?,
            None => vec![seed],
        };
        let depths = match self.depths.clone().or(f.depths) {
            Some(list) => parse_list::<usize>(&list, "depth")?,
            None => default_depths(command),
        };
        let widths = match self.widths.clone().or(f.widths) {
            Some(list) => parse_list::<usize>(&list, "width")?,
            None => vec![self.width.or(f.width).unwrap_or(default_width(command))],
        };
        let out = self
            .out
            .clone()
            .or(f.out)
            .or_else(|| std::env::var("SIRENLAB_OUT").ok())
            .unwrap_or_else(|| "sirenlab-out".into());
        let format = OutputFormat::parse(
            &self.format.clone().or(f.format).unwrap_or_else(|| "csv".into()),
        )?;

        let config = RunConfig {
            command: command.to_string(),
            schemes,
            width: self.width.or(f.width).unwrap_or(default_width(command)),
            depth: self.depth.or(f.depth).unwrap_or(default_depth(command)),
            depths,
            widths,
            omega0: self.omega0.or(f.omega0),
            seed,
            seeds,
            ensembles: self.ensembles.or(f.ensembles).unwrap_or(default_ensembles(command)),
            inputs: self.inputs.or(f.inputs).unwrap_or(default_inputs(command)),
            grid: self.grid.or(f.grid).unwrap_or(2048),
            epochs: self.epochs.or(f.epochs).unwrap_or(default_epochs(command)),
            lr: self.lr.or(f.lr).unwrap_or(1e-4),
            task: self.task.clone().or(f.task).unwrap_or_else(|| "1d".into()),
            size: self.size.or(f.size).unwrap_or(64),
            sigma_noise: self.sigma_noise.or(f.sigma_noise).unwrap_or(0.05),
            waves: self.waves.or(f.waves).unwrap_or(32),
            image: self.image.clone().or(f.image),
            cw: self.cw.or(f.cw),
            cb: self.cb.or(f.cb),
            upsample: self.upsample.or(f.upsample).unwrap_or(4),
            out: PathBuf::from(out),
            format,
        };
        config.validate()?;
        Ok(Resolved { config, file_values: file })
    }
}

fn default_width(command: &str) -> usize {
    match command {
        "fit" | "sweep" => 128,
        "denoise" => 64,
        _ => 256,
    }
}

fn default_depth(command: &str) -> usize {
    match command {
        "fit" | "sweep" => 8,
        "denoise" | "verify-init" => 10,
        "overlap" => 8,
        _ => 10,
    }
}

fn default_depths(command: &str) -> Vec<usize> {
    match command {
        "ntk-scan" => vec![2, 4, 8, 12, 16, 20, 24, 28, 32],
        "spectrum" => vec![4, 8, 16, 32],
        "svd-scan" => vec![4, 8, 16, 32],
        "sweep" => vec![4, 6, 8, 10],
        _ => vec![default_depth(command)],
    }
}

fn default_ensembles(command: &str) -> usize {
    match command {
        "verify-init" => 20,
        "ntk-scan" => 8,
        "spectrum" => 8,
        "svd-scan" => 5,
        _ => 1,
    }
}

fn default_inputs(command: &str) -> usize {
    match command {
        "verify-init" => 500,
        "ntk-scan" => 200,
        "svd-scan" => 10,
        "overlap" => 256,
        _ => 200,
    }
}

fn default_epochs(command: &str) -> usize {
    match command {
        "denoise" => 2000,
        _ => 5000,
    }
}
