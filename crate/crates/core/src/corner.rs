//! Corner-background prior.
//!
//! Each region is scored by how little of its normalized affinity mass falls
//! on the regions of a given corner; the four per-corner maps are multiplied.

use serde::{Deserialize, Serialize};

pub use crate::superpixel::Corner;

use crate::affinity::AffinityGraph;
use crate::region::RegionSaliency;
use crate::superpixel::SuperpixelFeatures;
use crate::{Error, Result};

/// Per-region intensity factor multiplied into the corner contrast.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntensityMode {
    /// `f(i) = 1`.
    #[default]
    Const,
    /// Mean lightness of the region, rescaled to `[0, 1]`.
    Luma,
}

pub fn region_intensity(features: &SuperpixelFeatures, mode: IntensityMode) -> RegionSaliency {
    match mode {
        IntensityMode::Const => RegionSaliency::constant(features.region_count(), 1.0),
        IntensityMode::Luma => features
            .mean_lab
            .iter()
            .map(|c| c[0] / 100.0)
            .collect::<Vec<_>>()
            .into(),
    }
}

/// `v(i) = (1 - (1/n) * sum_{j in corner} g_ij) * f(i)` with `n` the corner set size.
pub fn corner_saliency(
    graph: &AffinityGraph,
    corner: Corner,
    f: &RegionSaliency,
) -> Result<RegionSaliency> {
    let set = graph.corner_set(corner);
    if set.is_empty() {
        return Err(Error::EmptyCorner(corner.name()));
    }
    let n = graph.region_count();
    assert_eq!(f.len(), n, "intensity map does not match graph");
    let mut member = vec![false; n];
    set.iter().for_each(|&j| member[j] = true);
    let inv = 1.0 / set.len() as f64;
    let values = (0..n)
        .map(|i| {
            let mass: f64 = graph
                .normalized_row(i)
                .filter(|&(j, _)| member[j])
                .map(|(_, g)| g)
                .sum();
            (1.0 - inv * mass) * f.get(i)
        })
        .collect();
    Ok(RegionSaliency::new(values))
}

/// Elementwise product of the four corner maps, normalized to `[0, 1]`.
pub fn combine_corners(maps: [&RegionSaliency; 4]) -> RegionSaliency {
    let n = maps[0].len();
    assert!(
        maps.iter().all(|m| m.len() == n),
        "corner maps differ in length"
    );
    let values = (0..n)
        .map(|i| {
            // Sorted factors make the product bit-identical under any input order.
            let mut f = maps.map(|m| m.get(i));
            f.sort_by(f64::total_cmp);
            f.iter().product()
        })
        .collect::<Vec<f64>>();
    RegionSaliency::new(values).normalized()
}

/// Full corner prior: the four corner maps and their normalized product.
pub fn corner_prior(graph: &AffinityGraph, f: &RegionSaliency) -> Result<RegionSaliency> {
    let maps = Corner::ALL
        .iter()
        .map(|&c| corner_saliency(graph, c, f))
        .collect::<Result<Vec<_>>>()?;
    Ok(combine_corners([&maps[0], &maps[1], &maps[2], &maps[3]]))
}
