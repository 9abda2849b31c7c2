//! Image containers shared by every stage.

use crate::{Error, Result};

/// Smallest accepted side length for images entering the pipeline.
pub const MIN_SIDE: usize = 8;

/// Relative spread below which a map is treated as constant by [`normalize`].
const FLAT_TOLERANCE: f64 = 1e-12;

/// Row-major 8-bit RGB image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl RgbImage {
    /// Wraps packed RGB triples. Any non-empty size is accepted here so that
    /// small fixtures survive I/O; the pipeline enforces [`MIN_SIDE`].
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter(format!(
                "image dimensions must be nonzero, got {width}x{height}"
            )));
        }
        if data.len() != 3 * width * height {
            return Err(Error::InvalidParameter(format!(
                "expected {} RGB bytes for {width}x{height}, got {}",
                3 * width * height,
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [u8; 3],
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(3 * width * height);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = 3 * (y * self.width + x);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub(crate) fn check_min_side(&self) -> Result<()> {
        if self.width < MIN_SIDE || self.height < MIN_SIDE {
            return Err(Error::ImageTooSmall(format!(
                "{}x{} is below the {MIN_SIDE}x{MIN_SIDE} minimum",
                self.width, self.height
            )));
        }
        Ok(())
    }
}

/// Row-major CIELAB image, `L` in `[0, 100]`, `a`/`b` roughly in `[-128, 127]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabImage {
    width: usize,
    height: usize,
    data: Vec<[f64; 3]>,
}

impl LabImage {
    pub fn new(width: usize, height: usize, data: Vec<[f64; 3]>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "expected {} Lab pixels for {width}x{height}, got {}",
                width * height,
                data.len()
            )));
        }
        if data.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "Lab image contains non-finite values".into(),
            ));
        }
        Ok(Self {
            width,
            height,
            data,
        })
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

    pub fn data(&self) -> &[[f64; 3]] {
        &self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f64; 3] {
        self.data[y * self.width + x]
    }

    /// Lightness rescaled to `[0, 1]`, used as the guided-filter guide.
    pub fn lightness(&self) -> PixelMap {
        PixelMap {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|p| p[0] / 100.0).collect(),
        }
    }
}

/// Row-major scalar map.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelMap {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl PixelMap {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "expected {} values for {width}x{height}, got {}",
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

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
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

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn normalized(mut self) -> Self {
        normalize(&mut self.data);
        self
    }

    pub fn mean(&self) -> f64 {
        mean(&self.data)
    }

    pub(crate) fn check_dims(&self, dims: (usize, usize)) -> Result<()> {
        if self.dims() != dims {
            return Err(Error::dims(dims, self.dims()));
        }
        Ok(())
    }
}

/// Linearly rescales `values` so the minimum maps to 0 and the maximum to 1.
/// A constant (or numerically flat) input maps to all zeros.
pub fn normalize(values: &mut [f64]) {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if values.is_empty() {
        return;
    }
    let range = hi - lo;
    if !(range > FLAT_TOLERANCE * lo.abs().max(hi.abs()).max(1.0)) {
        values.iter_mut().for_each(|v| *v = 0.0);
        return;
    }
    for v in values.iter_mut() {
        *v = ((*v - lo) / range).clamp(0.0, 1.0);
    }
}

/// Arithmetic mean computed as an offset from the minimum, so a constant
/// slice returns exactly its value and `v >= mean` holds for every element.
pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    lo + values.iter().map(|v| v - lo).sum::<f64>() / values.len() as f64
}
