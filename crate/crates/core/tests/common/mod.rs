//! Brute-force reference implementations shared by the integration tests.
//! Nothing here calls into the optimized code paths it is compared against.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use saliency_core::affinity::AffinityGraph;
use saliency_core::eval::Mask;
use saliency_core::objectness::WindowCandidate;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Guided filter by explicit ridge regression in every clipped window, then
/// averaging the per-window predictions at each pixel.
pub fn guided_filter(
    guide: &[f64],
    input: &[f64],
    w: usize,
    h: usize,
    r: usize,
    eps: f64,
) -> Vec<f64> {
    let window = |x: usize, y: usize| {
        (
            x.saturating_sub(r)..(x + r + 1).min(w),
            y.saturating_sub(r)..(y + r + 1).min(h),
        )
    };
    // Per-window coefficients from the 2x2 normal equations
    // [sum I^2 + n eps, sum I; sum I, n] [a; b] = [sum I p; sum p].
    let mut coeffs = vec![(0.0, 0.0); w * h];
    for y in 0..h {
        for x in 0..w {
            let (xs, ys) = window(x, y);
            let (mut n, mut si, mut sii, mut sp, mut sip) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for yy in ys {
                for xx in xs.clone() {
                    let (i, p) = (guide[yy * w + xx], input[yy * w + xx]);
                    n += 1.0;
                    si += i;
                    sii += i * i;
                    sp += p;
                    sip += i * p;
                }
            }
            let (m11, m12, m22) = (sii + n * eps, si, n);
            let det = m11 * m22 - m12 * m12;
            let a = (sip * m22 - m12 * sp) / det;
            let b = (m11 * sp - m12 * sip) / det;
            coeffs[y * w + x] = (a, b);
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let (xs, ys) = window(x, y);
            let (mut sum, mut n) = (0.0, 0.0);
            for yy in ys {
                for xx in xs.clone() {
                    let (a, b) = coeffs[yy * w + xx];
                    sum += a * guide[y * w + x] + b;
                    n += 1.0;
                }
            }
            out[y * w + x] = sum / n;
        }
    }
    out
}

/// Pixel objectness by a double loop over windows and pixels.
/// Returns the unnormalized map and the per-window accuracy scores.
pub fn objectness(
    windows: &[WindowCandidate],
    v: &[f64],
    w: usize,
    h: usize,
    beta: f64,
) -> (Vec<f64>, Vec<f64>) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let (mut sx, mut sy, mut mass) = (0.0, 0.0, 0.0);
    for y in 0..h {
        for x in 0..w {
            let val = v[y * w + x];
            if val >= mean {
                sx += val * x as f64;
                sy += val * y as f64;
                mass += val;
            }
        }
    }
    let (xo, yo) = if mass > 0.0 {
        (sx / mass, sy / mass)
    } else {
        ((w - 1) as f64 / 2.0, (h - 1) as f64 / 2.0)
    };

    let mut psi = Vec::new();
    let mut out = vec![0.0; w * h];
    for win in windows {
        let (mut inside, mut count) = (0.0, 0.0);
        for y in 0..h {
            for x in 0..w {
                if x >= win.x0 && x < win.x1 && y >= win.y0 && y < win.y1 {
                    inside += v[y * w + x];
                    count += 1.0;
                }
            }
        }
        let psi_h = inside / (count + beta);
        psi.push(psi_h);
        let sigma_x = (win.x1 - win.x0) as f64 / 2.0;
        let sigma_y = (win.y1 - win.y0) as f64 / 2.0;
        for y in 0..h {
            for x in 0..w {
                let dx = x as f64 - xo;
                let dy = y as f64 - yo;
                let g = (-(dx * dx / (2.0 * sigma_x * sigma_x)
                    + dy * dy / (2.0 * sigma_y * sigma_y)))
                    .exp();
                out[y * w + x] += win.score * psi_h * g;
            }
        }
    }
    (out, psi)
}

/// Dense view of an energy instance.
#[derive(Debug, Clone)]
pub struct DenseEnergy {
    pub alpha: Vec<f64>,
    pub t: Vec<bool>,
    pub w: Vec<Vec<f64>>,
}

impl DenseEnergy {
    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    /// `1/2 [sum a (s-1)^2 + sum (1-T) s^2 + sum_{i,j} w_ij (s_i - s_j)^2]`.
    pub fn energy(&self, s: &[f64]) -> f64 {
        let n = self.n();
        let mut e = 0.0;
        for i in 0..n {
            e += self.alpha[i] * (s[i] - 1.0).powi(2);
            if !self.t[i] {
                e += s[i] * s[i];
            }
            for j in 0..n {
                e += self.w[i][j] * (s[i] - s[j]).powi(2);
            }
        }
        0.5 * e
    }

    fn gradient(&self, s: &[f64]) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .map(|i| {
                let mut g = self.alpha[i] * (s[i] - 1.0);
                if !self.t[i] {
                    g += s[i];
                }
                for j in 0..n {
                    g += 2.0 * self.w[i][j] * (s[i] - s[j]);
                }
                g
            })
            .collect()
    }

    /// Gradient descent with a step below 1/L (Gershgorin bound on the
    /// Hessian), iterated until the gradient vanishes.
    pub fn minimize(&self) -> Vec<f64> {
        let n = self.n();
        let lipschitz = (0..n)
            .map(|i| {
                let row: f64 = self.w[i].iter().sum();
                self.alpha[i] + if self.t[i] { 0.0 } else { 1.0 } + 4.0 * row
            })
            .fold(0.0, f64::max);
        let step = 1.0 / lipschitz;
        let mut s = vec![0.5; n];
        for _ in 0..5_000_000 {
            let g = self.gradient(&s);
            if g.iter().all(|v| v.abs() < 1e-13) {
                break;
            }
            for (si, gi) in s.iter_mut().zip(&g) {
                *si -= step * gi;
            }
        }
        s
    }

    pub fn graph(&self) -> AffinityGraph {
        AffinityGraph::from_dense(&self.w, [vec![], vec![], vec![], vec![]])
            .expect("valid dense graph")
    }
}

/// Random connected instance: a ring guarantees connectivity, extra edges are sparse.
pub fn random_energy(rng: &mut impl Rng, n: usize) -> DenseEnergy {
    let mut w = vec![vec![0.0; n]; n];
    let link = |i: usize, j: usize, v: f64, w: &mut Vec<Vec<f64>>| {
        w[i][j] = v;
        w[j][i] = v;
    };
    for i in 0..n {
        let v = rng.random_range(0.05..1.0);
        link(i, (i + 1) % n, v, &mut w);
    }
    for i in 0..n {
        for j in i + 2..n {
            if rng.random_bool(0.3) {
                let v = rng.random_range(0.0..1.0);
                link(i, j, v, &mut w);
            }
        }
    }
    let xi: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
    let mean = xi.iter().sum::<f64>() / n as f64;
    DenseEnergy {
        alpha: xi
            .iter()
            .map(|&x| -(1.0 - x.min(1.0 - 1e-3)).ln())
            .collect(),
        t: xi.iter().map(|&x| x >= mean).collect(),
        w,
    }
}

/// Confusion counts `(tp, fp, tn, fn)` at threshold `t` by direct counting.
pub fn confusion(saliency: &[u8], gt: &[bool], t: u8) -> (u64, u64, u64, u64) {
    let mut c = (0, 0, 0, 0);
    for (&s, &g) in saliency.iter().zip(gt) {
        match (s >= t, g) {
            (true, true) => c.0 += 1,
            (true, false) => c.1 += 1,
            (false, false) => c.2 += 1,
            (false, true) => c.3 += 1,
        }
    }
    c
}

pub fn random_mask(rng: &mut impl Rng, w: usize, h: usize) -> Mask {
    loop {
        let data: Vec<bool> = (0..w * h).map(|_| rng.random_bool(0.4)).collect();
        if data.iter().any(|&b| b) {
            return Mask::new(w, h, data).unwrap();
        }
    }
}

/// Per-region mean by grouping pixel values.
pub fn region_means(values: &[f64], labels: &[usize]) -> Vec<f64> {
    let n = labels.iter().max().map_or(0, |m| m + 1);
    (0..n)
        .map(|r| {
            let members: Vec<f64> = labels
                .iter()
                .zip(values)
                .filter(|(l, _)| **l == r)
                .map(|(_, v)| *v)
                .collect();
            members.iter().sum::<f64>() / members.len() as f64
        })
        .collect()
}
