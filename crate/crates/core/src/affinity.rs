//! Colour/spatial affinity between superpixels and its row normalization.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::superpixel::{Corner, SuperpixelFeatures};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffinityParams {
    /// Colour bandwidth on Lab channels rescaled to `[0, 1]`.
    pub sigma1: f64,
    /// Spatial bandwidth on normalized centroids.
    pub sigma2: f64,
    /// Use squared instead of plain Euclidean distances in the exponent.
    pub squared_distance: bool,
}

impl Default for AffinityParams {
    fn default() -> Self {
        Self {
            sigma1: 0.1,
            sigma2: 0.25,
            squared_distance: false,
        }
    }
}

/// Lab rescaled so each channel spans roughly `[0, 1]`.
pub fn scaled_lab(lab: [f64; 3]) -> [f64; 3] {
    [
        lab[0] / 100.0,
        (lab[1] + 128.0) / 255.0,
        (lab[2] + 128.0) / 255.0,
    ]
}

/// `exp(-d / (2 sigma^2))`, with `d` squared first when requested.
pub fn kernel(distance: f64, sigma: f64, squared: bool) -> f64 {
    let d = if squared {
        distance * distance
    } else {
        distance
    };
    (-d / (2.0 * sigma * sigma)).exp()
}

fn euclid<const N: usize>(a: &[f64; N], b: &[f64; N]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Sparse symmetric affinity `W`, degrees `d_i = sum_j w_ij`, and
/// `G = D^-1 W` on the same sparsity pattern.
#[derive(Debug, Clone)]
pub struct AffinityGraph {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    weights: Vec<f64>,
    normalized: Vec<f64>,
    degrees: Vec<f64>,
    background: [Vec<usize>; 4],
}

impl AffinityGraph {
    fn from_rows(rows: Vec<Vec<(usize, f64)>>, background: [Vec<usize>; 4]) -> Self {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut cols = Vec::new();
        let mut weights = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(j, _)| j);
            for (j, w) in row {
                cols.push(j);
                weights.push(w);
            }
            row_ptr.push(cols.len());
        }
        let n = row_ptr.len() - 1;
        let degrees = (0..n)
            .map(|i| weights[row_ptr[i]..row_ptr[i + 1]].iter().sum())
            .collect();
        Self {
            row_ptr,
            cols,
            normalized: vec![0.0; weights.len()],
            weights,
            degrees,
            background,
        }
    }

    /// Builds a graph from a dense weight matrix; zero off-diagonal entries are
    /// left out of the sparsity pattern and the diagonal is ignored. `G` is not
    /// filled until [`AffinityGraph::row_normalize`] is called.
    pub fn from_dense(weights: &[Vec<f64>], background: [Vec<usize>; 4]) -> Result<Self> {
        let n = weights.len();
        for (i, row) in weights.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidParameter(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
        }
        for i in 0..n {
            for j in 0..n {
                let w = weights[i][j];
                if i != j && (!(w >= 0.0) || (w - weights[j][i]).abs() > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "weights must be nonnegative and symmetric, entry ({i},{j}) = {w}"
                    )));
                }
            }
        }
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| j != i && weights[i][j] > 0.0)
                    .map(|j| (j, weights[i][j]))
                    .collect()
            })
            .collect();
        if background.iter().flatten().any(|&b| b >= n) {
            return Err(Error::InvalidParameter(
                "background index out of range".into(),
            ));
        }
        Ok(Self::from_rows(rows, background))
    }

    pub fn region_count(&self) -> usize {
        self.degrees.len()
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    /// Background regions of one corner, ascending.
    pub fn corner_set(&self, corner: Corner) -> &[usize] {
        &self.background[corner.index()]
    }

    /// All background regions across the four corners, ascending.
    pub fn background(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.background.iter().flatten().copied().collect();
        all.sort_unstable();
        all.dedup();
        all
    }

    /// `(j, w_ij)` over the stored pattern of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()]
            .iter()
            .copied()
            .zip(self.weights[r].iter().copied())
    }

    /// `(j, g_ij)` over the stored pattern of row `i`.
    pub fn normalized_row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()]
            .iter()
            .copied()
            .zip(self.normalized[r].iter().copied())
    }

    fn lookup(&self, values: &[f64], i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&j) {
            Ok(k) => values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.lookup(&self.weights, i, j)
    }

    pub fn normalized(&self, i: usize, j: usize) -> f64 {
        self.lookup(&self.normalized, i, j)
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.cols[self.row_ptr[i]..self.row_ptr[i + 1]]
            .binary_search(&j)
            .is_ok()
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    /// Fills `g_ij = w_ij / d_i`. Fails on the first zero-degree row.
    pub fn row_normalize(&mut self) -> Result<()> {
        for i in 0..self.region_count() {
            let d = self.degrees[i];
            if !(d > 0.0) {
                return Err(Error::ZeroDegree(i));
            }
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                self.normalized[k] = self.weights[k] / d;
            }
        }
        Ok(())
    }

    /// Writes `i j w_ij` per stored entry.
    pub fn write_triplets(&self, mut out: impl Write) -> std::io::Result<()> {
        for i in 0..self.region_count() {
            for (j, w) in self.row(i) {
                writeln!(out, "{i} {j} {w:e}")?;
            }
        }
        Ok(())
    }
}

/// Builds `W` on the pattern `{j in N(i)} ∪ {i, j both background}` with
/// `w_ij = exp(-|c_i - c_j| / 2σ1²) * exp(-|γ_i - γ_j| / 2σ2²)`, then row-normalizes.
pub fn build_affinity(
    features: &SuperpixelFeatures,
    params: &AffinityParams,
) -> Result<AffinityGraph> {
    if !(params.sigma1 > 0.0 && params.sigma2 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "bandwidths must be > 0, got sigma1 = {}, sigma2 = {}",
            params.sigma1, params.sigma2
        )));
    }
    let n = features.region_count();
    let background: [Vec<usize>; 4] = Corner::ALL.map(|c| features.corner_set(c));
    let is_background: Vec<bool> = features.corner.iter().map(Option::is_some).collect();
    let bg_all: Vec<usize> = (0..n).filter(|&i| is_background[i]).collect();
    let colors: Vec<[f64; 3]> = features.mean_lab.iter().map(|&c| scaled_lab(c)).collect();

    let rows = (0..n)
        .map(|i| {
            let mut cols: Vec<usize> = features.neighbors[i].clone();
            if is_background[i] {
                cols.extend(bg_all.iter().copied().filter(|&j| j != i));
                cols.sort_unstable();
                cols.dedup();
            }
            cols.into_iter()
                .map(|j| {
                    let c = kernel(
                        euclid(&colors[i], &colors[j]),
                        params.sigma1,
                        params.squared_distance,
                    );
                    let s = kernel(
                        euclid(&features.centroid[i], &features.centroid[j]),
                        params.sigma2,
                        params.squared_distance,
                    );
                    (j, c * s)
                })
                .collect()
        })
        .collect();
    let mut graph = AffinityGraph::from_rows(rows, background);
    graph.row_normalize()?;
    Ok(graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn no_background() -> [Vec<usize>; 4] {
        [vec![], vec![], vec![], vec![]]
    }

    #[test]
    fn identical_neighbours_have_unit_weight() {
        assert_eq!(kernel(0.0, 0.1, false), 1.0);
        assert_eq!(kernel(0.0, 0.25, true), 1.0);
    }

    #[test]
    fn colour_kernel_at_sigma_point_one() {
        // |Δc| = 0.2, 2σ² = 0.02 -> exp(-10)
        let want = (-10.0f64).exp();
        assert!((kernel(0.2, 0.1, false) - want).abs() < 1e-18);
        assert!((want - 4.54e-5).abs() < 1e-7);
    }

    #[test]
    fn simple_row_normalizes_to_halves() {
        let w = vec![
            vec![0.0, 2.0, 2.0],
            vec![2.0, 0.0, 0.0],
            vec![2.0, 0.0, 0.0],
        ];
        let mut g = AffinityGraph::from_dense(&w, no_background()).unwrap();
        g.row_normalize().unwrap();
        assert_eq!(g.normalized(0, 0), 0.0);
        assert_eq!(g.normalized(0, 1), 0.5);
        assert_eq!(g.normalized(0, 2), 0.5);
        assert_eq!(g.normalized(1, 0), 1.0);
    }

    #[test]
    fn four_node_graph_matches_dense_hand_computation() {
        let w = vec![
            vec![0.0, 0.5, 0.25, 0.0],
            vec![0.5, 0.0, 1.0, 0.125],
            vec![0.25, 1.0, 0.0, 0.75],
            vec![0.0, 0.125, 0.75, 0.0],
        ];
        let mut g = AffinityGraph::from_dense(&w, no_background()).unwrap();
        g.row_normalize().unwrap();
        // D = diag(0.75, 1.625, 2.0, 0.875)
        let expected = [
            [0.0, 2.0 / 3.0, 1.0 / 3.0, 0.0],
            [0.5 / 1.625, 0.0, 1.0 / 1.625, 0.125 / 1.625],
            [0.125, 0.5, 0.0, 0.375],
            [0.0, 1.0 / 7.0, 6.0 / 7.0, 0.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert!(
                    (g.normalized(i, j) - expected[i][j]).abs() <= 1e-12,
                    "({i},{j})"
                );
            }
        }
    }

    #[test]
    fn isolated_node_is_an_error() {
        let w = vec![
            vec![0.0, 1.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
        ];
        let mut g = AffinityGraph::from_dense(&w, no_background()).unwrap();
        assert!(matches!(g.row_normalize(), Err(Error::ZeroDegree(2))));
    }

    #[test]
    fn asymmetric_dense_input_is_rejected() {
        let w = vec![vec![0.0, 1.0], vec![0.5, 0.0]];
        assert!(AffinityGraph::from_dense(&w, no_background()).is_err());
    }

    proptest! {
        #[test]
        fn weight_decreases_with_colour_distance(
            d1 in 0.0f64..1.5, delta in 1e-6f64..1.0, spatial in 0.0f64..1.0, squared: bool,
        ) {
            let p = AffinityParams { squared_distance: squared, ..AffinityParams::default() };
            let s = kernel(spatial, p.sigma2, squared);
            let near = kernel(d1, p.sigma1, squared) * s;
            let far = kernel(d1 + delta, p.sigma1, squared) * s;
            prop_assert!(far <= near);
            if near > 1e-300 {
                prop_assert!(far < near);
            }
        }
    }
}
