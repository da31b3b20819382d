//! Run configuration: defaults, an optional JSON file, and flag overrides.

use std::path::{Path, PathBuf};

use bikegrow_core::growth::{Triangulation, DEFAULT_BUFFER_M, DEFAULT_DELTA_M, DEFAULT_STEP_KM};
use bikegrow_core::ingest::DEFAULT_DENSITY_THRESHOLD;
use bikegrow_core::metrics::DEFAULT_DETOURS;
use serde::Deserialize;

pub const DEFAULT_SAMPLE_SIZE: usize = 30_000;
pub const DEFAULT_SEED: u64 = 20_240_101;
pub const DEFAULT_D_MAX_KM: f64 = 90.0;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{0}")]
    Usage(String),
    #[error("config {path}: {message}")]
    File { path: PathBuf, message: String },
}

fn usage(msg: impl Into<String>) -> ConfigError {
    ConfigError::Usage(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TriangulationArg {
    Greedy,
    Delaunay,
}

impl From<TriangulationArg> for Triangulation {
    fn from(t: TriangulationArg) -> Self {
        match t {
            TriangulationArg::Greedy => Triangulation::Greedy,
            TriangulationArg::Delaunay => Triangulation::Delaunay,
        }
    }
}

/// Every setting as an optional value; used for both the JSON file and the
/// command-line flags.
#[derive(Debug, Clone, Default, Deserialize, clap::Args)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub struct ConfigArgs {
    /// JSON config file; flags override its values.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub nodes: Option<PathBuf>,
    #[arg(long)]
    pub edges: Option<PathBuf>,
    #[arg(long)]
    pub crashes: Option<PathBuf>,
    #[arg(long)]
    pub zones: Option<PathBuf>,
    #[arg(long)]
    pub od: Option<PathBuf>,
    #[arg(long)]
    pub snapshot_log: Option<PathBuf>,
    /// Comma-separated alpha values.
    #[arg(long = "alpha", value_delimiter = ',')]
    #[serde(default)]
    pub alphas: Option<Vec<f64>>,
    /// Minimum seed spacing, meters.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Comma-separated seed spacings for `sweep`, meters.
    #[arg(long = "deltas", value_delimiter = ',')]
    #[serde(default)]
    pub deltas: Option<Vec<f64>>,
    /// Crash buffer, meters.
    #[arg(long)]
    pub buffer: Option<f64>,
    /// Largest budget, km.
    #[arg(long)]
    pub d_max: Option<f64>,
    /// Budget step between snapshots, km.
    #[arg(long)]
    pub step: Option<f64>,
    /// Comma-separated detour factors for trip coverage.
    #[arg(long, value_delimiter = ',')]
    #[serde(default)]
    pub detours: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub triangulation: Option<TriangulationArg>,
    /// OD records sampled for weighting and evaluation.
    #[arg(long)]
    pub sample_size: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Inhabitants per km² below which non-park zones are masked.
    #[arg(long)]
    pub density_threshold: Option<f64>,
    /// Evaluate on the weighting sample instead of a fresh one.
    #[arg(long)]
    pub reuse_weighting_sample: Option<bool>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

impl ConfigArgs {
    /// Values from `self` where set, otherwise from `base`.
    fn over(self, base: ConfigArgs) -> ConfigArgs {
        ConfigArgs {
            config: self.config.or(base.config),
            nodes: self.nodes.or(base.nodes),
            edges: self.edges.or(base.edges),
            crashes: self.crashes.or(base.crashes),
            zones: self.zones.or(base.zones),
            od: self.od.or(base.od),
            snapshot_log: self.snapshot_log.or(base.snapshot_log),
            alphas: self.alphas.or(base.alphas),
            delta: self.delta.or(base.delta),
            deltas: self.deltas.or(base.deltas),
            buffer: self.buffer.or(base.buffer),
            d_max: self.d_max.or(base.d_max),
            step: self.step.or(base.step),
            detours: self.detours.or(base.detours),
            triangulation: self.triangulation.or(base.triangulation),
            sample_size: self.sample_size.or(base.sample_size),
            seed: self.seed.or(base.seed),
            density_threshold: self.density_threshold.or(base.density_threshold),
            reuse_weighting_sample: self.reuse_weighting_sample.or(base.reuse_weighting_sample),
            output: self.output.or(base.output),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub nodes: Option<PathBuf>,
    pub edges: Option<PathBuf>,
    pub crashes: Option<PathBuf>,
    pub zones: Option<PathBuf>,
    pub od: Option<PathBuf>,
    pub snapshot_log: Option<PathBuf>,
    pub alphas: Vec<f64>,
    pub delta: f64,
    pub deltas: Vec<f64>,
    pub buffer: f64,
    pub d_max: f64,
    pub step: f64,
    pub detours: Vec<f64>,
    pub triangulation: Triangulation,
    pub sample_size: usize,
    pub seed: u64,
    pub density_threshold: f64,
    pub reuse_weighting_sample: bool,
    pub output: PathBuf,
}

fn read_file(path: &Path) -> Result<ConfigArgs, ConfigError> {
    let fail = |message: String| ConfigError::File {
        path: path.to_owned(),
        message,
    };
    let text = std::fs::read_to_string(path).map_err(|e| fail(e.to_string()))?;
    let mut args: ConfigArgs = serde_json::from_str(&text).map_err(|e| fail(e.to_string()))?;
    // Relative paths in the file are relative to the file.
    let dir = path.parent().unwrap_or(Path::new(""));
    for p in [
        &mut args.nodes,
        &mut args.edges,
        &mut args.crashes,
        &mut args.zones,
        &mut args.od,
        &mut args.snapshot_log,
        &mut args.output,
    ]
    .into_iter()
    .flatten()
    {
        if p.is_relative() {
            *p = dir.join(&*p);
        }
    }
    Ok(args)
}

fn positive(name: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(usage(format!(
            "--{name} must be a positive number, got {v}"
        )))
    }
}

impl RunConfig {
    pub fn resolve(flags: ConfigArgs) -> Result<RunConfig, ConfigError> {
        let merged = match flags.config.clone() {
            Some(path) => flags.over(read_file(&path)?),
            None => flags,
        };
        let delta = positive("delta", merged.delta.unwrap_or(DEFAULT_DELTA_M))?;
        let alphas = merged.alphas.unwrap_or_else(|| vec![0.5]);
        if alphas.is_empty() {
            return Err(usage("--alpha needs at least one value"));
        }
        if let Some(a) = alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(usage(format!("--alpha must lie in [0, 1], got {a}")));
        }
        let deltas = merged.deltas.unwrap_or_else(|| vec![delta]);
        for d in &deltas {
            positive("deltas", *d)?;
        }
        let detours = merged.detours.unwrap_or_else(|| DEFAULT_DETOURS.to_vec());
        if let Some(d) = detours.iter().find(|d| !(d.is_finite() && **d >= 0.0)) {
            return Err(usage(format!("--detours must be non-negative, got {d}")));
        }
        let step = positive("step", merged.step.unwrap_or(DEFAULT_STEP_KM))?;
        let d_max = positive("d-max", merged.d_max.unwrap_or(DEFAULT_D_MAX_KM))?;
        if d_max < step {
            return Err(usage("--d-max must be at least --step"));
        }
        let density_threshold = merged
            .density_threshold
            .unwrap_or(DEFAULT_DENSITY_THRESHOLD);
        if !(density_threshold.is_finite() && density_threshold >= 0.0) {
            return Err(usage("--density-threshold must be non-negative"));
        }
        let sample_size = merged.sample_size.unwrap_or(DEFAULT_SAMPLE_SIZE);
        if sample_size == 0 {
            return Err(usage("--sample-size must be positive"));
        }
        Ok(RunConfig {
            nodes: merged.nodes,
            edges: merged.edges,
            crashes: merged.crashes,
            zones: merged.zones,
            od: merged.od,
            snapshot_log: merged.snapshot_log,
            alphas,
            delta,
            deltas,
            buffer: positive("buffer", merged.buffer.unwrap_or(DEFAULT_BUFFER_M))?,
            d_max,
            step,
            detours,
            triangulation: merged
                .triangulation
                .map_or(Triangulation::Greedy, Into::into),
            sample_size,
            seed: merged.seed.unwrap_or(DEFAULT_SEED),
            density_threshold,
            reuse_weighting_sample: merged.reuse_weighting_sample.unwrap_or(false),
            output: merged.output.unwrap_or_else(|| PathBuf::from("out")),
        })
    }

    pub fn require<'a>(
        &self,
        value: &'a Option<PathBuf>,
        flag: &str,
    ) -> Result<&'a Path, ConfigError> {
        value
            .as_deref()
            .ok_or_else(|| usage(format!("--{flag} is required")))
    }
}
