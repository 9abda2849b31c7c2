//! Window-proposal foreground prior.
//!
//! Candidate windows come from a fixed multi-scale grid and are scored by the
//! colour contrast between the window and its surround on the superpixel-mean
//! image. Each window then contributes a Gaussian bump centred on the object
//! centre of the background-prior map, weighted by its score and by how much
//! of that map it covers (the accuracy score).

use std::io::Write;

use crate::pixel::PixelMap;
use crate::region::RegionSaliency;
use crate::superpixel::{SuperpixelFeatures, SuperpixelLabeling};
use crate::{Error, Result};

/// Window sides as fractions of `min(width, height)`.
pub const WINDOW_SCALES: [f64; 5] = [0.2, 0.35, 0.5, 0.7, 0.9];
/// Width / height ratios.
pub const WINDOW_ASPECTS: [f64; 3] = [0.5, 1.0, 2.0];
pub const MIN_WINDOW_AREA: usize = 64;
pub const DEFAULT_WINDOW_COUNT: usize = 200;
pub const DEFAULT_BETA: f64 = 1.0;

/// Raw contrasts below this many Lab units count as no contrast.
const CONTRAST_FLOOR: f64 = 1e-6;

/// Axis-aligned window `[x0, x1) x [y0, y1)` with objectness score in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowCandidate {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
    pub score: f64,
}

impl WindowCandidate {
    pub fn width(&self) -> usize {
        self.x1 - self.x0
    }

    pub fn height(&self) -> usize {
        self.y1 - self.y0
    }

    pub fn area(&self) -> usize {
        self.width() * self.height()
    }

    pub fn center(&self) -> (f64, f64) {
        (
            (self.x0 + self.x1 - 1) as f64 / 2.0,
            (self.y0 + self.y1 - 1) as f64 / 2.0,
        )
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x0 && x < self.x1 && y >= self.y0 && y < self.y1
    }

    /// Gaussian bandwidths: half the window extent along each axis.
    pub fn sigmas(&self) -> (f64, f64) {
        (self.width() as f64 / 2.0, self.height() as f64 / 2.0)
    }
}

/// Summed-area table with a zero border row and column.
struct Integral {
    stride: usize,
    sums: Vec<f64>,
}

impl Integral {
    fn new(width: usize, height: usize, value: impl Fn(usize) -> f64) -> Self {
        let stride = width + 1;
        let mut sums = vec![0.0; stride * (height + 1)];
        for y in 0..height {
            let mut row = 0.0;
            for x in 0..width {
                row += value(y * width + x);
                sums[(y + 1) * stride + x + 1] = sums[y * stride + x + 1] + row;
            }
        }
        Self { stride, sums }
    }

    fn sum(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> f64 {
        let s = self.stride;
        self.sums[y1 * s + x1] - self.sums[y0 * s + x1] - self.sums[y1 * s + x0]
            + self.sums[y0 * s + x0]
    }
}

fn window_grid(width: usize, height: usize) -> Vec<(usize, usize, usize, usize)> {
    let base = width.min(height) as f64;
    let mut out = Vec::new();
    for scale in WINDOW_SCALES {
        for aspect in WINDOW_ASPECTS {
            let side = scale * base;
            let ww = ((side * aspect.sqrt()).round() as usize).clamp(1, width);
            let wh = ((side / aspect.sqrt()).round() as usize).clamp(1, height);
            if ww * wh < MIN_WINDOW_AREA {
                continue;
            }
            let sx = ((ww as f64 / 8.0).round() as usize).max(1);
            let sy = ((wh as f64 / 8.0).round() as usize).max(1);
            for y0 in (0..=height - wh).step_by(sy) {
                for x0 in (0..=width - ww).step_by(sx) {
                    out.push((x0, y0, x0 + ww, y0 + wh));
                }
            }
        }
    }
    out
}

/// Scores every window of the fixed grid by centre-surround contrast and keeps
/// the `h_count` best (ties keep generation order). Scores are divided by the
/// best raw contrast, so a contrast-free image yields all-zero scores.
///
/// The surround is the window dilated to twice its size about the same centre
/// (clipped to the image) minus the window itself; contrast is the Lab distance
/// between the mean superpixel colour inside and in the surround.
pub fn propose_windows(
    labeling: &SuperpixelLabeling,
    features: &SuperpixelFeatures,
    h_count: usize,
) -> Result<Vec<WindowCandidate>> {
    if h_count == 0 {
        return Err(Error::InvalidParameter("window count must be >= 1".into()));
    }
    let (w, h) = labeling.dims();
    let grid = window_grid(w, h);
    if grid.is_empty() {
        return Err(Error::ImageTooSmall(format!(
            "{w}x{h} cannot hold a {MIN_WINDOW_AREA}-pixel window at the smallest scale"
        )));
    }
    let labels = labeling.labels();
    let channels: Vec<Integral> = (0..3)
        .map(|c| Integral::new(w, h, |p| features.mean_lab[labels[p]][c]))
        .collect();

    let mut scored: Vec<(f64, WindowCandidate)> = grid
        .into_iter()
        .map(|(x0, y0, x1, y1)| {
            let (hw, hh) = ((x1 - x0) / 2, (y1 - y0) / 2);
            let dx0 = x0.saturating_sub(hw);
            let dy0 = y0.saturating_sub(hh);
            let dx1 = (x1 + hw).min(w);
            let dy1 = (y1 + hh).min(h);
            let inner_area = ((x1 - x0) * (y1 - y0)) as f64;
            let ring_area = ((dx1 - dx0) * (dy1 - dy0)) as f64 - inner_area;
            let raw = if ring_area > 0.0 {
                channels
                    .iter()
                    .map(|ch| {
                        let inner = ch.sum(x0, y0, x1, y1);
                        let outer = ch.sum(dx0, dy0, dx1, dy1) - inner;
                        (inner / inner_area - outer / ring_area).powi(2)
                    })
                    .sum::<f64>()
                    .sqrt()
            } else {
                0.0
            };
            let raw = if raw < CONTRAST_FLOOR { 0.0 } else { raw };
            (
                raw,
                WindowCandidate {
                    x0,
                    y0,
                    x1,
                    y1,
                    score: 0.0,
                },
            )
        })
        .collect();

    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    scored.truncate(h_count);
    let best = scored.first().map_or(0.0, |s| s.0);
    Ok(scored
        .into_iter()
        .map(|(raw, mut win)| {
            win.score = if best > 0.0 { raw / best } else { 0.0 };
            win
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct ObjectnessResult {
    /// Object centre `(x_o, y_o)` of the background-prior map, in pixels.
    pub center: (f64, f64),
    /// Accuracy score per window, same order as the input windows.
    pub psi: Vec<f64>,
    /// Unnormalized pixel objectness.
    pub raw: PixelMap,
    /// Pixel objectness rescaled to `[0, 1]`.
    pub pixel_map: PixelMap,
}

/// Saliency-weighted centroid of the pixels at or above the map mean; the
/// image centre when that mass is zero.
pub fn object_center(map: &PixelMap) -> (f64, f64) {
    let (w, h) = map.dims();
    let threshold = map.mean();
    let (mut sx, mut sy, mut mass) = (0.0, 0.0, 0.0);
    for y in 0..h {
        for x in 0..w {
            let v = map.get(x, y);
            if v >= threshold {
                sx += v * x as f64;
                sy += v * y as f64;
                mass += v;
            }
        }
    }
    if mass > 0.0 {
        (sx / mass, sy / mass)
    } else {
        ((w - 1) as f64 / 2.0, (h - 1) as f64 / 2.0)
    }
}

/// Pixel-level objectness:
/// `W(p) = sum_h P_h * psi_h * exp(-((x - x_o)^2 / 2σx_h^2 + (y - y_o)^2 / 2σy_h^2))`
/// with `psi_h = sum_{p in h} v(p) / (|h| + beta)` and `v` the background-prior pixel map.
pub fn pixel_objectness(
    windows: &[WindowCandidate],
    cbp: &PixelMap,
    beta: f64,
) -> Result<ObjectnessResult> {
    if windows.is_empty() {
        return Err(Error::InvalidParameter("no window candidates".into()));
    }
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "beta must be > 0, got {beta}"
        )));
    }
    let (w, h) = cbp.dims();
    if let Some(bad) = windows
        .iter()
        .find(|win| win.x1 > w || win.y1 > h || win.x0 >= win.x1 || win.y0 >= win.y1)
    {
        return Err(Error::InvalidParameter(format!(
            "window {bad:?} does not fit a {w}x{h} image"
        )));
    }

    let center = object_center(cbp);
    let values = cbp.data();
    let integral = Integral::new(w, h, |p| values[p]);
    let psi: Vec<f64> = windows
        .iter()
        .map(|win| integral.sum(win.x0, win.y0, win.x1, win.y1) / (win.area() as f64 + beta))
        .collect();

    let mut raw = vec![0.0; w * h];
    let mut ex = vec![0.0; w];
    let mut ey = vec![0.0; h];
    for (win, &psi_h) in windows.iter().zip(&psi) {
        let coeff = win.score * psi_h;
        if coeff == 0.0 {
            continue;
        }
        let (sx, sy) = win.sigmas();
        for (x, e) in ex.iter_mut().enumerate() {
            *e = (-(x as f64 - center.0).powi(2) / (2.0 * sx * sx)).exp();
        }
        for (y, e) in ey.iter_mut().enumerate() {
            *e = (-(y as f64 - center.1).powi(2) / (2.0 * sy * sy)).exp();
        }
        for y in 0..h {
            let cy = coeff * ey[y];
            let row = &mut raw[y * w..(y + 1) * w];
            for (r, e) in row.iter_mut().zip(&ex) {
                *r += cy * e;
            }
        }
    }
    let raw = PixelMap::new(w, h, raw)?;
    let pixel_map = raw.clone().normalized();
    Ok(ObjectnessResult {
        center,
        psi,
        raw,
        pixel_map,
    })
}

/// Mean of `map` over each region's pixels.
pub fn region_mean(map: &PixelMap, labeling: &SuperpixelLabeling) -> Result<RegionSaliency> {
    map.check_dims(labeling.dims())?;
    let n = labeling.region_count();
    let mut sums = vec![0.0; n];
    let mut counts = vec![0usize; n];
    for (&l, &v) in labeling.labels().iter().zip(map.data()) {
        sums[l] += v;
        counts[l] += 1;
    }
    Ok(sums
        .into_iter()
        .zip(counts)
        .map(|(s, c)| s / c as f64)
        .collect::<Vec<_>>()
        .into())
}

/// Region-level objectness pooled from the normalized pixel map, then normalized.
pub fn region_objectness(
    result: &ObjectnessResult,
    labeling: &SuperpixelLabeling,
) -> Result<RegionSaliency> {
    Ok(region_mean(&result.pixel_map, labeling)?.normalized())
}

/// Debug dump: `x0 y0 x1 y1 P_h psi_h` per line.
pub fn write_windows(
    mut out: impl Write,
    windows: &[WindowCandidate],
    psi: &[f64],
) -> std::io::Result<()> {
    for (win, p) in windows.iter().zip(psi) {
        writeln!(
            out,
            "{} {} {} {} {:.6} {:.6}",
            win.x0, win.y0, win.x1, win.y1, win.score, p
        )?;
    }
    Ok(())
}

/// Intersection over union of two windows.
pub fn iou(a: &WindowCandidate, b: &WindowCandidate) -> f64 {
    let ix = a.x1.min(b.x1).saturating_sub(a.x0.max(b.x0));
    let iy = a.y1.min(b.y1).saturating_sub(a.y0.max(b.y0));
    let inter = (ix * iy) as f64;
    inter / ((a.area() + b.area()) as f64 - inter)
}
