//! Precision/recall evaluation against binary ground truth.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use log::warn;
use rayon::prelude::*;

use crate::io::{quantize, read_gray, read_image};
use crate::pipeline::{run_pipeline, PipelineConfig};
use crate::pixel::RgbImage;
use crate::{Error, Result};

pub const DEFAULT_BETA2: f64 = 0.3;
pub const THRESHOLDS: usize = 256;

/// Binary ground-truth mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl Mask {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "expected {} mask values for {width}x{height}, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Gray levels `>= 128` are foreground.
    pub fn from_gray(width: usize, height: usize, gray: &[u8]) -> Result<Self> {
        Self::new(width, height, gray.iter().map(|&g| g >= 128).collect())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let (w, h, data) = read_gray(path)?;
        Self::from_gray(w, h, &data)
    }

    pub fn to_gray(&self) -> Vec<u8> {
        self.data.iter().map(|&b| if b { 255 } else { 0 }).collect()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }
}

/// Confusion counts at one threshold.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl Confusion {
    /// `TP / (TP + FP)`, or 1 when nothing is predicted.
    pub fn precision(&self) -> f64 {
        let predicted = self.tp + self.fp;
        if predicted == 0 {
            1.0
        } else {
            self.tp as f64 / predicted as f64
        }
    }

    /// `TP / (TP + FN)`, or 0 when the ground truth is empty.
    pub fn recall(&self) -> f64 {
        let positives = self.tp + self.fn_;
        if positives == 0 {
            0.0
        } else {
            self.tp as f64 / positives as f64
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

fn check_sample(saliency: &[u8], gt: &Mask) -> Result<()> {
    if saliency.len() != gt.data.len() {
        return Err(Error::InvalidParameter(format!(
            "saliency has {} pixels, mask has {}",
            saliency.len(),
            gt.data.len()
        )));
    }
    if gt.count() == 0 {
        return Err(Error::EmptyGroundTruth);
    }
    Ok(())
}

/// Confusion counts for every threshold `t` in `0..=255`, predicting `pixel >= t`.
pub fn confusion_curve(saliency: &[u8], gt: &Mask) -> Result<Vec<Confusion>> {
    check_sample(saliency, gt)?;
    let mut pos = [0u64; THRESHOLDS];
    let mut neg = [0u64; THRESHOLDS];
    for (&s, &g) in saliency.iter().zip(&gt.data) {
        if g {
            pos[s as usize] += 1;
        } else {
            neg[s as usize] += 1;
        }
    }
    let total_pos: u64 = pos.iter().sum();
    let total_neg: u64 = neg.iter().sum();
    let mut curve = vec![Confusion::default(); THRESHOLDS];
    let (mut tp, mut fp) = (0u64, 0u64);
    for t in (0..THRESHOLDS).rev() {
        tp += pos[t];
        fp += neg[t];
        curve[t] = Confusion {
            tp,
            fp,
            tn: total_neg - fp,
            fn_: total_pos - tp,
        };
    }
    Ok(curve)
}

/// `(precision, recall)` for thresholds `0..=255`.
pub fn pr_curve(saliency: &[u8], gt: &Mask) -> Result<Vec<(f64, f64)>> {
    Ok(confusion_curve(saliency, gt)?
        .iter()
        .map(|c| (c.precision(), c.recall()))
        .collect())
}

/// `(1 + β²) P R / (β² P + R)`; zero when both are zero.
pub fn f_measure(precision: f64, recall: f64, beta2: f64) -> f64 {
    let denom = beta2 * precision + recall;
    if denom == 0.0 {
        0.0
    } else {
        (1.0 + beta2) * precision * recall / denom
    }
}

fn mean_gray(saliency: &[u8]) -> f64 {
    saliency.iter().map(|&v| f64::from(v)).sum::<f64>() / saliency.len().max(1) as f64
}

/// Twice the mean gray level, clamped to 255.
pub fn adaptive_threshold(saliency: &[u8]) -> f64 {
    (2.0 * mean_gray(saliency)).min(255.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveScore {
    pub precision: f64,
    pub recall: f64,
    pub f: f64,
}

/// Scores the binarization `pixel >= adaptive_threshold && pixel > mean`.
pub fn adaptive_f(saliency: &[u8], gt: &Mask, beta2: f64) -> Result<AdaptiveScore> {
    check_sample(saliency, gt)?;
    let thr = adaptive_threshold(saliency);
    let mean = mean_gray(saliency);
    let mut c = Confusion::default();
    for (&s, &g) in saliency.iter().zip(&gt.data) {
        let s = f64::from(s);
        // Strictly above the mean as well, so a flat map (including all-255,
        // where the clamp would otherwise admit every pixel) predicts nothing.
        match (s >= thr && s > mean, g) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    let (precision, recall) = (c.precision(), c.recall());
    Ok(AdaptiveScore {
        precision,
        recall,
        f: f_measure(precision, recall, beta2),
    })
}

/// Curve and adaptive score of one saliency map.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleEval {
    pub name: String,
    pub curve: Vec<(f64, f64)>,
    pub adaptive: AdaptiveScore,
}

pub fn evaluate_map(name: &str, saliency: &[u8], gt: &Mask, beta2: f64) -> Result<SampleEval> {
    Ok(SampleEval {
        name: name.to_string(),
        curve: pr_curve(saliency, gt)?,
        adaptive: adaptive_f(saliency, gt, beta2)?,
    })
}

/// Curves averaged over samples plus mean adaptive F-measure.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub adaptive_f: f64,
    pub beta2: f64,
    /// Per-sample results, sorted by name.
    pub samples: Vec<SampleEval>,
}

impl EvalReport {
    /// Aggregates in name order, so the result does not depend on input order.
    pub fn aggregate(mut samples: Vec<SampleEval>, beta2: f64) -> Self {
        samples.sort_by(|a, b| a.name.cmp(&b.name));
        let n = samples.len().max(1) as f64;
        let mut precision = vec![0.0; THRESHOLDS];
        let mut recall = vec![0.0; THRESHOLDS];
        for s in &samples {
            for (t, &(p, r)) in s.curve.iter().enumerate() {
                precision[t] += p;
                recall[t] += r;
            }
        }
        precision.iter_mut().for_each(|p| *p /= n);
        recall.iter_mut().for_each(|r| *r /= n);
        let adaptive_f = samples.iter().map(|s| s.adaptive.f).sum::<f64>() / n;
        Self {
            precision,
            recall,
            adaptive_f,
            beta2,
            samples,
        }
    }

    /// CSV: a `threshold,precision,recall` table, then
    /// `summary,<adaptive F>,<beta2>,<sample count>`. Six decimals, LF endings.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "threshold,precision,recall")?;
        for t in 0..THRESHOLDS {
            writeln!(out, "{t},{:.6},{:.6}", self.precision[t], self.recall[t])?;
        }
        writeln!(
            out,
            "summary,{:.6},{:.6},{}",
            self.adaptive_f,
            self.beta2,
            self.samples.len()
        )
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }
}

/// One dataset entry: an image path and its ground truth.
#[derive(Debug, Clone)]
pub struct EvalSample {
    pub name: String,
    pub image_path: PathBuf,
    pub mask: Mask,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedSample {
    pub name: String,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct DatasetEvaluation {
    pub mlp: EvalReport,
    pub mean_fusion: EvalReport,
    pub skipped: Vec<SkippedSample>,
}

fn png_stems(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        let is_png = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("png"));
        if is_png {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                out.push((stem.to_string(), path.clone()));
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Loads `images/*.png` paired with `masks/*.png` by file stem. Images without
/// a readable mask are reported as skipped.
pub fn load_dataset(dir: impl AsRef<Path>) -> Result<(Vec<EvalSample>, Vec<SkippedSample>)> {
    let dir = dir.as_ref();
    let images_dir = dir.join("images");
    let masks_dir = dir.join("masks");
    if !images_dir.is_dir() || !masks_dir.is_dir() {
        return Err(Error::Dataset(format!(
            "{} must contain images/ and masks/ subdirectories",
            dir.display()
        )));
    }
    let images = png_stems(&images_dir)?;
    if images.is_empty() {
        return Err(Error::Dataset(format!(
            "no PNG images in {}",
            images_dir.display()
        )));
    }
    let mut samples = Vec::new();
    let mut skipped = Vec::new();
    for (name, image_path) in images {
        let mask_path = masks_dir.join(format!("{name}.png"));
        match Mask::read(&mask_path) {
            Ok(mask) => samples.push(EvalSample {
                name,
                image_path,
                mask,
            }),
            Err(e) => skipped.push(SkippedSample {
                name,
                reason: format!("mask: {e}"),
            }),
        }
    }
    Ok((samples, skipped))
}

fn evaluate_one(
    name: &str,
    img: &RgbImage,
    mask: &Mask,
    config: &PipelineConfig,
) -> Result<(SampleEval, SampleEval)> {
    if (img.width(), img.height()) != mask.dims() {
        return Err(Error::dims((img.width(), img.height()), mask.dims()));
    }
    if mask.count() == 0 {
        return Err(Error::EmptyGroundTruth);
    }
    let out = run_pipeline(img, config)?;
    let mlp = evaluate_map(name, &quantize(&out.mlp), mask, config.beta2)?;
    let mean = evaluate_map(
        name,
        &quantize(&out.mean_fusion(config)?),
        mask,
        config.beta2,
    )?;
    Ok((mlp, mean))
}

/// Evaluates in-memory samples; failing samples are skipped and reported.
pub fn evaluate_images<'a, I>(samples: I, config: &PipelineConfig) -> DatasetEvaluation
where
    I: IntoParallelIterator<Item = (&'a str, &'a RgbImage, &'a Mask)>,
{
    let results: Vec<(String, Result<(SampleEval, SampleEval)>)> = samples
        .into_par_iter()
        .map(|(name, img, mask)| (name.to_string(), evaluate_one(name, img, mask, config)))
        .collect();
    collect_results(results, config.beta2, Vec::new())
}

fn collect_results(
    results: Vec<(String, Result<(SampleEval, SampleEval)>)>,
    beta2: f64,
    mut skipped: Vec<SkippedSample>,
) -> DatasetEvaluation {
    let mut mlp = Vec::new();
    let mut mean = Vec::new();
    for (name, r) in results {
        match r {
            Ok((a, b)) => {
                mlp.push(a);
                mean.push(b);
            }
            Err(e) => {
                warn!("skipping {name}: {e}");
                skipped.push(SkippedSample {
                    name,
                    reason: e.to_string(),
                });
            }
        }
    }
    skipped.sort_by(|a, b| a.name.cmp(&b.name));
    DatasetEvaluation {
        mlp: EvalReport::aggregate(mlp, beta2),
        mean_fusion: EvalReport::aggregate(mean, beta2),
        skipped,
    }
}

/// Runs the pipeline over an `images/` + `masks/` directory and reports both
/// the multi-layer map and the mean-fusion baseline.
pub fn evaluate_dataset(
    dir: impl AsRef<Path>,
    config: &PipelineConfig,
) -> Result<DatasetEvaluation> {
    config.validate()?;
    let (samples, skipped) = load_dataset(dir)?;
    let results = samples
        .par_iter()
        .map(|s| {
            let r = read_image(&s.image_path)
                .and_then(|img| evaluate_one(&s.name, &img, &s.mask, config));
            (s.name.clone(), r)
        })
        .collect();
    let eval = collect_results(results, config.beta2, skipped);
    if eval.mlp.samples.is_empty() {
        return Err(Error::Dataset("no sample could be evaluated".into()));
    }
    Ok(eval)
}
