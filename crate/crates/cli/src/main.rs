mod args;

use std::fmt;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use rayon::prelude::*;
use saliency_core::eval::evaluate_dataset;
use saliency_core::io::{read_image, write_map};
use saliency_core::objectness::write_windows;
use saliency_core::pipeline::{run_pipeline, run_single_scale, PipelineConfig};
use saliency_core::synth::{synth_corpus, write_corpus};

use args::{load_config_file, Cli, Command, DetectArgs, EvalArgs, SynthArgs};

/// Bad arguments or configuration; maps to exit status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn thread_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    if jobs == Some(0) {
        return Err(usage("--jobs must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .context("building thread pool")
}

fn png_inputs(input: &Path) -> Result<Vec<PathBuf>> {
    if input.is_file() {
        return Ok(vec![input.to_path_buf()]);
    }
    if !input.is_dir() {
        return Err(usage(format!("input {} does not exist", input.display())));
    }
    let mut files: Vec<PathBuf> = fs::read_dir(input)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e.eq_ignore_ascii_case("png")))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(usage(format!("no PNG files in {}", input.display())));
    }
    Ok(files)
}

fn detect_one(path: &Path, out: &Path, args: &DetectArgs, config: &PipelineConfig) -> Result<()> {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .with_context(|| format!("{}: unusable file name", path.display()))?;
    let img = read_image(path)?;
    let name = |suffix: String| out.join(format!("{stem}_{suffix}.png"));

    if let Some(n) = args.single_scale {
        let scale = run_single_scale(&img, n, config)?;
        write_map(name(format!("slp_{n}")), &scale.slp_map)?;
        return Ok(());
    }

    let output = run_pipeline(&img, config)?;
    write_map(name("mlp".into()), &output.mlp)?;
    if args.dump_intermediates {
        for s in &output.scales {
            let n = s.n_target;
            write_map(name(format!("cbp_{n}")), &s.cbp.render(&s.labeling))?;
            write_map(name(format!("wp_{n}")), &s.objectness.pixel_map)?;
            write_map(name(format!("ofp_{n}")), &s.ofp.render(&s.labeling))?;
            write_map(name(format!("cbp_opt_{n}")), &s.cbp_opt.render(&s.labeling))?;
            write_map(name(format!("ofp_opt_{n}")), &s.ofp_opt.render(&s.labeling))?;
            write_map(name(format!("slp_{n}")), &s.slp_map)?;
            let windows = File::create(out.join(format!("{stem}_windows_{n}.txt")))?;
            write_windows(BufWriter::new(windows), &s.windows, &s.objectness.psi)?;
        }
    }
    Ok(())
}

fn detect(args: DetectArgs) -> Result<ExitCode> {
    let config = args.config.resolve()?;
    if args.single_scale == Some(0) {
        return Err(usage("--single-scale must be positive"));
    }
    let inputs = png_inputs(&args.input)?;
    let pool = thread_pool(args.jobs)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;

    let results: Vec<(PathBuf, Result<()>)> = pool.install(|| {
        inputs
            .par_iter()
            .map(|p| (p.clone(), detect_one(p, &args.out, &args, &config)))
            .collect()
    });
    let mut failed = 0;
    for (path, r) in results {
        match r {
            Ok(()) => log::info!("{}: done", path.display()),
            Err(e) => {
                failed += 1;
                eprintln!("{}: {e:#}", path.display());
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} of {} images failed", inputs.len());
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

/// `report.csv` -> `report_mean_fusion.csv` in the same directory.
fn baseline_path(report: &Path) -> PathBuf {
    let stem = report
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("report");
    let file = match report.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}_mean_fusion.{ext}"),
        None => format!("{stem}_mean_fusion"),
    };
    report.with_file_name(file)
}

fn eval(args: EvalArgs) -> Result<ExitCode> {
    let config = args.config.resolve()?;
    if !args.dataset.is_dir() {
        return Err(usage(format!(
            "dataset {} is not a directory",
            args.dataset.display()
        )));
    }
    let pool = thread_pool(args.jobs)?;
    let result = pool.install(|| evaluate_dataset(&args.dataset, &config))?;

    if let Some(parent) = args.report.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let baseline = baseline_path(&args.report);
    fs::write(&args.report, result.mlp.to_csv())
        .with_context(|| format!("writing {}", args.report.display()))?;
    fs::write(&baseline, result.mean_fusion.to_csv())
        .with_context(|| format!("writing {}", baseline.display()))?;

    println!("samples: {}", result.mlp.samples.len());
    println!("adaptive F (multi-layer): {:.6}", result.mlp.adaptive_f);
    println!(
        "adaptive F (mean fusion): {:.6}",
        result.mean_fusion.adaptive_f
    );
    for s in &result.skipped {
        eprintln!("skipped {}: {}", s.name, s.reason);
    }
    Ok(if result.skipped.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn synth(args: SynthArgs) -> Result<ExitCode> {
    if args.count == 0 {
        return Err(usage("--count must be at least 1"));
    }
    let seed = match args.seed {
        Some(s) => s,
        None => load_config_file(args.config.as_deref())?.seed,
    };
    let samples = synth_corpus(seed, args.count);
    write_corpus(&args.out, &samples)?;
    println!("wrote {} samples to {}", samples.len(), args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Detect(a) => detect(a),
        Command::Eval(a) => eval(a),
        Command::Synth(a) => synth(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<UsageError>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
