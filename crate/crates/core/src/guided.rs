//! Guided filter with a single-channel (lightness) guide.
//!
//! For every pixel `k` the filter fits `q = a_k * I + b_k` to the input `p`
//! over the square window of radius `r` centred at `k` (clipped to the image),
//! with ridge penalty `eps * a_k^2` per pixel. The output at `i` averages the
//! linear models of all windows covering `i`.

use crate::pixel::{LabImage, PixelMap};
use crate::{Error, Result};

/// Default regularizer for maps in `[0, 1]`.
pub const DEFAULT_EPS: f64 = 1e-3;

/// Radius used when none is configured: `round(0.04 * min(width, height))`, at least 1.
pub fn default_radius(width: usize, height: usize) -> usize {
    ((0.04 * width.min(height) as f64).round() as usize).max(1)
}

/// Filters `input` guided by the lightness channel of `guide` (rescaled to `[0, 1]`).
pub fn guided_filter(
    guide: &LabImage,
    input: &PixelMap,
    radius: usize,
    eps: f64,
) -> Result<PixelMap> {
    input.check_dims(guide.dims())?;
    guided_filter_gray(&guide.lightness(), input, radius, eps)
}

/// Guided filter with an arbitrary scalar guide.
pub fn guided_filter_gray(
    guide: &PixelMap,
    input: &PixelMap,
    radius: usize,
    eps: f64,
) -> Result<PixelMap> {
    input.check_dims(guide.dims())?;
    if radius == 0 {
        return Err(Error::InvalidParameter(
            "guided filter radius must be >= 1".into(),
        ));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "guided filter eps must be > 0, got {eps}"
        )));
    }
    let (w, h) = guide.dims();
    let i = guide.data();
    let p = input.data();

    let ip: Vec<f64> = i.iter().zip(p).map(|(a, b)| a * b).collect();
    let ii: Vec<f64> = i.iter().map(|a| a * a).collect();

    let boxer = BoxMean::new(w, h, radius);
    let mean_i = boxer.apply(i);
    let mean_p = boxer.apply(p);
    let mean_ip = boxer.apply(&ip);
    let mean_ii = boxer.apply(&ii);

    let mut a = vec![0.0; w * h];
    let mut b = vec![0.0; w * h];
    for k in 0..w * h {
        let cov = mean_ip[k] - mean_i[k] * mean_p[k];
        let var = (mean_ii[k] - mean_i[k] * mean_i[k]).max(0.0);
        a[k] = cov / (var + eps);
        b[k] = mean_p[k] - a[k] * mean_i[k];
    }
    let mean_a = boxer.apply(&a);
    let mean_b = boxer.apply(&b);
    let out = (0..w * h).map(|k| mean_a[k] * i[k] + mean_b[k]).collect();
    PixelMap::new(w, h, out)
}

/// Mean over the clipped `(2r+1)^2` window, via a summed-area table.
struct BoxMean {
    width: usize,
    height: usize,
    radius: usize,
}

impl BoxMean {
    fn new(width: usize, height: usize, radius: usize) -> Self {
        Self {
            width,
            height,
            radius,
        }
    }

    fn apply(&self, src: &[f64]) -> Vec<f64> {
        let (w, h, r) = (self.width, self.height, self.radius);
        let stride = w + 1;
        let mut sat = vec![0.0; stride * (h + 1)];
        for y in 0..h {
            let mut row = 0.0;
            for x in 0..w {
                row += src[y * w + x];
                sat[(y + 1) * stride + x + 1] = sat[y * stride + x + 1] + row;
            }
        }
        let mut out = vec![0.0; w * h];
        for y in 0..h {
            let y0 = y.saturating_sub(r);
            let y1 = (y + r + 1).min(h);
            for x in 0..w {
                let x0 = x.saturating_sub(r);
                let x1 = (x + r + 1).min(w);
                let sum = sat[y1 * stride + x1] - sat[y0 * stride + x1] - sat[y1 * stride + x0]
                    + sat[y0 * stride + x0];
                out[y * w + x] = sum / ((x1 - x0) * (y1 - y0)) as f64;
            }
        }
        out
    }
}

/// Clipped box mean of a map, exposed for the large-`eps` limit check.
pub fn box_mean(input: &PixelMap, radius: usize) -> PixelMap {
    let (w, h) = input.dims();
    let data = BoxMean::new(w, h, radius).apply(input.data());
    PixelMap::new(w, h, data).expect("box mean preserves dimensions")
}
