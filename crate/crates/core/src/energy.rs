//! Adaptive binarization, quadratic energy refinement, and single-layer fusion.
//!
//! The energy over region values `s` is
//!
//! ```text
//! E(s) = 1/2 * [ sum_i a_i (s_i - 1)^2 + sum_i (1 - T_i) s_i^2 + sum_{i,j} w_ij (s_i - s_j)^2 ]
//! ```
//!
//! with `a_i = -ln(1 - xi_i)` (foreground confidence), `T` the mean-threshold
//! binarization of the same map, and the smoothness sum running over ordered
//! pairs. Setting the gradient to zero gives the sparse SPD system
//! `(diag(a) + diag(1 - T) + 2L) s = a` with `L = D - W`.

use log::warn;

use crate::affinity::AffinityGraph;
use crate::region::RegionSaliency;
use crate::solver::{conjugate_gradient, CsrMatrix};
use crate::Result;

/// Upper clip applied to `xi` before taking logarithms.
pub const XI_CLIP: f64 = 1.0 - 1e-3;
pub const SOLVER_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_ETA: f64 = 6.0;

/// `T_i = 1` iff `value_i >= mean(values)`.
pub fn binarize_adaptive(map: &RegionSaliency) -> Vec<bool> {
    let mean = map.mean();
    map.values().iter().map(|&v| v >= mean).collect()
}

/// Foreground weight for a normalized saliency value. The literal variant
/// keeps the printed sign, `ln(1 - xi)`, which is non-positive.
pub fn foreground_weight(xi: f64, literal_log_sign: bool) -> f64 {
    let w = (1.0 - xi.clamp(0.0, XI_CLIP)).ln();
    if literal_log_sign {
        w
    } else {
        -w
    }
}

#[derive(Debug, Clone)]
pub struct EnergyProblem {
    alpha: Vec<f64>,
    background: Vec<f64>,
    /// Ordered pairs `(i, j, w_ij)`, both directions present.
    edges: Vec<(usize, usize, f64)>,
}

impl EnergyProblem {
    /// `alpha` are the foreground weights, `t` the binarized map; smoothness
    /// weights are the raw affinities of `graph`.
    pub fn new(alpha: Vec<f64>, t: &[bool], graph: &AffinityGraph) -> Self {
        let n = graph.region_count();
        assert_eq!(alpha.len(), n, "alpha length");
        assert_eq!(t.len(), n, "indicator length");
        let edges = (0..n)
            .flat_map(|i| graph.row(i).map(move |(j, w)| (i, j, w)))
            .collect();
        Self {
            alpha,
            background: t.iter().map(|&b| if b { 0.0 } else { 1.0 }).collect(),
            edges,
        }
    }

    pub fn from_map(
        xi: &RegionSaliency,
        t: &[bool],
        graph: &AffinityGraph,
        literal_log_sign: bool,
    ) -> Self {
        let alpha = xi
            .values()
            .iter()
            .map(|&x| foreground_weight(x, literal_log_sign))
            .collect();
        Self::new(alpha, t, graph)
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// No data term anchors the solution: every weight is zero and every region
    /// is above threshold, so the system reduces to the singular Laplacian.
    pub fn is_singular(&self) -> bool {
        self.alpha.iter().all(|&a| a == 0.0) && self.background.iter().all(|&b| b == 0.0)
    }

    pub fn energy(&self, s: &[f64]) -> f64 {
        let fg: f64 = self
            .alpha
            .iter()
            .zip(s)
            .map(|(a, s)| a * (s - 1.0).powi(2))
            .sum();
        let bg: f64 = self.background.iter().zip(s).map(|(b, s)| b * s * s).sum();
        let smooth: f64 = self
            .edges
            .iter()
            .map(|&(i, j, w)| w * (s[i] - s[j]).powi(2))
            .sum();
        0.5 * (fg + bg + smooth)
    }

    pub fn gradient(&self, s: &[f64]) -> Vec<f64> {
        let mut g: Vec<f64> = (0..self.len())
            .map(|i| self.alpha[i] * (s[i] - 1.0) + self.background[i] * s[i])
            .collect();
        for &(i, j, w) in &self.edges {
            g[i] += 2.0 * w * (s[i] - s[j]);
        }
        g
    }

    /// `diag(alpha) + diag(1 - T) + 2(D - W)`.
    pub fn system(&self) -> CsrMatrix {
        let mut rows: Vec<Vec<(usize, f64)>> = (0..self.len())
            .map(|i| vec![(i, self.alpha[i] + self.background[i])])
            .collect();
        for &(i, j, w) in &self.edges {
            rows[i].push((i, 2.0 * w));
            rows[i].push((j, -2.0 * w));
        }
        CsrMatrix::from_rows(rows)
    }

    /// Stationary point of the energy, before any normalization.
    pub fn solve(&self) -> Result<Vec<f64>> {
        let a = self.system();
        let max_iter = 20 * self.len().max(10);
        Ok(conjugate_gradient(&a, &self.alpha, SOLVER_TOLERANCE, max_iter)?.x)
    }
}

/// Refines `xi` by minimizing the energy with `t` as background indicator.
/// Returns the normalized minimizer, or `xi` unchanged when the system is singular.
pub fn optimize_energy(
    xi: &RegionSaliency,
    t: &[bool],
    graph: &AffinityGraph,
    literal_log_sign: bool,
) -> Result<RegionSaliency> {
    let problem = EnergyProblem::from_map(xi, t, graph, literal_log_sign);
    if problem.is_singular() {
        warn!("energy system is singular (no foreground weight, no background region); keeping input map");
        return Ok(xi.clone());
    }
    Ok(RegionSaliency::new(problem.solve()?).normalized())
}

/// Binarizes `map` at its mean and refines it.
pub fn refine(
    map: &RegionSaliency,
    graph: &AffinityGraph,
    literal_log_sign: bool,
) -> Result<RegionSaliency> {
    let t = binarize_adaptive(map);
    optimize_energy(map, &t, graph, literal_log_sign)
}

/// `cbp * (1 - exp(-eta * ofp))` for one region.
pub fn fuse_value(cbp: f64, ofp: f64, eta: f64) -> f64 {
    cbp * (1.0 - (-eta * ofp).exp())
}

/// Single-layer map: [`fuse_value`] per region, normalized.
pub fn fuse_slp(cbp: &RegionSaliency, ofp: &RegionSaliency, eta: f64) -> RegionSaliency {
    assert_eq!(cbp.len(), ofp.len(), "maps over different labelings");
    let values = cbp
        .values()
        .iter()
        .zip(ofp.values())
        .map(|(&c, &o)| fuse_value(c, o, eta))
        .collect();
    RegionSaliency::new(values).normalized()
}
