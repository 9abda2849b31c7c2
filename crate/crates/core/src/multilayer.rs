//! Agreement-weighted integration of per-scale saliency maps.
//!
//! Maps are binarized at their mean and compared pixel by pixel. Each map's
//! judgment score is its mean agreement with the stack; the least similar map
//! is promoted to weight 1 while the others keep their judgment score.

use serde::{Deserialize, Serialize};

use crate::guided::{self, guided_filter};
use crate::pixel::{LabImage, PixelMap};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuidedParams {
    /// `None` picks [`guided::default_radius`] for the image size.
    pub radius: Option<usize>,
    pub eps: f64,
}

impl Default for GuidedParams {
    fn default() -> Self {
        Self {
            radius: None,
            eps: guided::DEFAULT_EPS,
        }
    }
}

impl GuidedParams {
    pub fn radius_for(&self, width: usize, height: usize) -> usize {
        self.radius
            .unwrap_or_else(|| guided::default_radius(width, height))
    }
}

/// Pixel-level mean-threshold binarization.
pub fn binarize_map(map: &PixelMap) -> Vec<bool> {
    let mean = map.mean();
    map.data().iter().map(|&v| v >= mean).collect()
}

/// `SM_ij` = fraction of pixels on which the binarized maps `i` and `j` agree.
pub fn similarity_matrix(maps: &[PixelMap]) -> Result<Vec<Vec<f64>>> {
    let Some(first) = maps.first() else {
        return Ok(Vec::new());
    };
    for m in maps {
        m.check_dims(first.dims())?;
    }
    let binary: Vec<Vec<bool>> = maps.iter().map(binarize_map).collect();
    let total = first.data().len() as f64;
    let m = maps.len();
    let mut sm = vec![vec![1.0; m]; m];
    for i in 0..m {
        for j in i + 1..m {
            let agree = binary[i]
                .iter()
                .zip(&binary[j])
                .filter(|(a, b)| a == b)
                .count();
            let s = agree as f64 / total;
            sm[i][j] = s;
            sm[j][i] = s;
        }
    }
    Ok(sm)
}

/// `y_m = (1/M) sum_n SM_mn`, diagonal included. Each row is summed in sorted
/// order so permuting the stack permutes `y` exactly.
pub fn judgment_vector(sm: &[Vec<f64>]) -> Vec<f64> {
    let m = sm.len() as f64;
    sm.iter()
        .map(|row| {
            let mut sorted = row.clone();
            sorted.sort_by(f64::total_cmp);
            sorted.iter().sum::<f64>() / m
        })
        .collect()
}

/// Index of the least similar map (first on ties) and the weights with that
/// entry replaced by 1.
pub fn selection_weights(judgment: &[f64]) -> (usize, Vec<f64>) {
    let selected = judgment
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v < judgment[best] { i } else { best });
    let mut weights = judgment.to_vec();
    if !weights.is_empty() {
        weights[selected] = 1.0;
    }
    (selected, weights)
}

/// Per-scale single-layer maps together with their agreement statistics.
#[derive(Debug, Clone)]
pub struct ScaleStack {
    pub scales: Vec<usize>,
    pub slp_maps: Vec<PixelMap>,
    pub similarity: Vec<Vec<f64>>,
    pub judgment: Vec<f64>,
    pub weights: Vec<f64>,
    pub selected: usize,
}

impl ScaleStack {
    pub fn new(scales: Vec<usize>, slp_maps: Vec<PixelMap>) -> Result<Self> {
        if slp_maps.is_empty() || scales.len() != slp_maps.len() {
            return Err(Error::InvalidParameter(format!(
                "need one map per scale and at least one scale, got {} scales and {} maps",
                scales.len(),
                slp_maps.len()
            )));
        }
        let similarity = similarity_matrix(&slp_maps)?;
        let judgment = judgment_vector(&similarity);
        let (selected, weights) = selection_weights(&judgment);
        Ok(Self {
            scales,
            slp_maps,
            similarity,
            judgment,
            weights,
            selected,
        })
    }

    pub fn len(&self) -> usize {
        self.slp_maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slp_maps.is_empty()
    }

    fn weighted_sum(&self, weights: &[f64]) -> PixelMap {
        let (w, h) = self.slp_maps[0].dims();
        // Accumulate in ascending scale order so stack order cannot change rounding.
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&m| (self.scales[m], m));
        let mut acc = vec![0.0; w * h];
        for m in order {
            for (a, v) in acc.iter_mut().zip(self.slp_maps[m].data()) {
                *a += weights[m] * v;
            }
        }
        PixelMap::new(w, h, acc)
            .expect("stack maps share dimensions")
            .normalized()
    }

    /// `normalize(sum_m weight_m * SLP_m)`, before refinement.
    pub fn fuse(&self) -> PixelMap {
        self.weighted_sum(&self.weights)
    }

    /// Plain average of the stack, normalized; the comparison baseline.
    pub fn mean_fusion(&self) -> PixelMap {
        let w = vec![1.0 / self.len() as f64; self.len()];
        self.weighted_sum(&w)
    }
}

/// Guided-filter refinement against the image lightness, then normalization.
pub fn refine_map(map: &PixelMap, guide: &LabImage, params: &GuidedParams) -> Result<PixelMap> {
    let radius = params.radius_for(map.width(), map.height());
    Ok(guided_filter(guide, map, radius, params.eps)?.normalized())
}

/// Fused and refined multi-layer map.
pub fn integrate_multilayer(
    stack: &ScaleStack,
    guide: &LabImage,
    params: &GuidedParams,
) -> Result<PixelMap> {
    refine_map(&stack.fuse(), guide, params)
}
