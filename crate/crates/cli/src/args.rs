use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use saliency_core::corner::IntensityMode;
use saliency_core::pipeline::PipelineConfig;

use crate::UsageError;

#[derive(Debug, Parser)]
#[command(
    name = "saliency",
    version,
    about = "Multi-layer salient object detection"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute saliency maps for a PNG file or every PNG in a directory.
    Detect(DetectArgs),
    /// Evaluate on a dataset laid out as images/*.png and masks/*.png.
    Eval(EvalArgs),
    /// Write a synthetic dataset with exact masks.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// Input PNG or directory of PNGs.
    pub input: PathBuf,
    /// Output directory, created if missing.
    #[arg(short, long)]
    pub out: PathBuf,
    /// Also write per-scale CBP, OFP, optimized maps, objectness and SLP maps.
    #[arg(long)]
    pub dump_intermediates: bool,
    /// Run a single superpixel scale and write only its SLP map.
    #[arg(long, value_name = "N")]
    pub single_scale: Option<usize>,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(short, long)]
    pub jobs: Option<usize>,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Dataset root containing images/ and masks/.
    pub dataset: PathBuf,
    /// CSV report path for the multi-layer map; the baseline report is written next to it.
    #[arg(short, long)]
    pub report: PathBuf,
    #[arg(short, long)]
    pub jobs: Option<usize>,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output directory.
    #[arg(short, long)]
    pub out: PathBuf,
    #[arg(short = 'n', long, default_value_t = 50)]
    pub count: usize,
    /// Defaults to the config's `seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Config file; only `seed` is read.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Config file plus one override flag per config field.
#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// TOML file of `key = value` pairs; flags below take precedence.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Colour bandwidth of the affinity kernel.
    #[arg(long)]
    pub sigma1: Option<f64>,
    /// Spatial bandwidth of the affinity kernel.
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// Fusion sharpness for the objectness prior.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Comma-separated superpixel counts, ascending.
    #[arg(long, value_delimiter = ',')]
    pub scales: Option<Vec<usize>>,
    /// Corner square side as a fraction of the shorter image side.
    #[arg(long)]
    pub corner_fraction: Option<f64>,
    /// Number of window proposals kept.
    #[arg(long)]
    pub h_count: Option<usize>,
    /// Guard term of the window accuracy score.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Guided filter radius in pixels.
    #[arg(long)]
    pub guided_radius: Option<usize>,
    /// Guided filter regularizer.
    #[arg(long)]
    pub guided_eps: Option<f64>,
    /// Region intensity factor of the corner prior: const or luma.
    #[arg(long, value_parser = parse_mode)]
    pub f_mode: Option<IntensityMode>,
    /// Use squared distances in the affinity kernel.
    #[arg(long)]
    pub squared_distance: Option<bool>,
    /// Use ln(1 - x) rather than -ln(1 - x) as the foreground weight.
    #[arg(long)]
    pub literal_log_sign: Option<bool>,
    /// F-measure weight.
    #[arg(long)]
    pub beta2: Option<f64>,
    /// Default seed for synth.
    #[arg(long)]
    pub seed: Option<u64>,
    /// SLIC compactness.
    #[arg(long)]
    pub compactness: Option<f64>,
    /// SLIC iterations.
    #[arg(long)]
    pub slic_iters: Option<usize>,
}

fn parse_mode(s: &str) -> Result<IntensityMode, String> {
    match s {
        "const" => Ok(IntensityMode::Const),
        "luma" => Ok(IntensityMode::Luma),
        _ => Err(format!("expected `const` or `luma`, got `{s}`")),
    }
}

pub fn load_config_file(path: Option<&Path>) -> Result<PipelineConfig, UsageError> {
    let Some(path) = path else {
        return Ok(PipelineConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
    PipelineConfig::from_toml_str(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())))
}

impl ConfigArgs {
    pub fn resolve(&self) -> Result<PipelineConfig, UsageError> {
        let mut c = load_config_file(self.config.as_deref())?;
        macro_rules! apply {
            ($($field:ident),*) => {
                $(if let Some(v) = &self.$field {
                    c.$field = v.clone();
                })*
            };
        }
        apply!(
            sigma1,
            sigma2,
            eta,
            scales,
            corner_fraction,
            h_count,
            beta,
            guided_eps,
            f_mode,
            squared_distance,
            literal_log_sign,
            beta2,
            seed,
            compactness,
            slic_iters
        );
        if self.guided_radius.is_some() {
            c.guided_radius = self.guided_radius;
        }
        c.validate().map_err(|e| UsageError(e.to_string()))?;
        Ok(c)
    }
}
