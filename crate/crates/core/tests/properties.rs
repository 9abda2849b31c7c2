mod common;

use proptest::prelude::*;
use saliency_core::color::rgb_to_lab;
use saliency_core::energy::EnergyProblem;
use saliency_core::eval::{confusion_curve, pr_curve, Mask};
use saliency_core::guided::guided_filter_gray;
use saliency_core::objectness::{pixel_objectness, WindowCandidate};
use saliency_core::superpixel::{extract_features, slic_segment};
use saliency_core::{PixelMap, RgbImage};

fn map(w: usize, h: usize) -> impl Strategy<Value = PixelMap> {
    prop::collection::vec(0.0f64..1.0, w * h).prop_map(move |v| PixelMap::new(w, h, v).unwrap())
}

/// Blocky random image: 8x8 tiles of random colours plus pixel noise, so SLIC
/// sees both edges and texture.
fn image(w: usize, h: usize) -> impl Strategy<Value = RgbImage> {
    let tiles = w.div_ceil(8) * h.div_ceil(8);
    (
        prop::collection::vec(any::<[u8; 3]>(), tiles),
        prop::collection::vec(0u8..12, w * h),
    )
        .prop_map(move |(colors, noise)| {
            RgbImage::from_fn(w, h, |x, y| {
                let c = colors[(y / 8) * w.div_ceil(8) + x / 8];
                let n = noise[y * w + x];
                c.map(|v| v.saturating_add(n))
            })
            .unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // With an arbitrary guide the window fits can overshoot the input range,
    // so the range bound is only asserted for self-guided filtering, where each
    // output is an average of convex combinations of the pixel and window means.
    #[test]
    fn self_guided_filter_stays_within_input_range(input in map(16, 16), radius in 1usize..5, eps in 1e-4f64..1.0) {
        let out = guided_filter_gray(&input, &input, radius, eps).unwrap();
        let lo = input.data().iter().copied().fold(f64::INFINITY, f64::min);
        let hi = input.data().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for &v in out.data() {
            prop_assert!(v >= lo - 1e-9 && v <= hi + 1e-9, "{v} outside [{lo}, {hi}]");
        }
    }

    #[test]
    fn guided_filter_preserves_constants(guide in map(16, 16), c in 0.0f64..1.0, radius in 1usize..5) {
        let out = guided_filter_gray(&guide, &PixelMap::filled(16, 16, c), radius, 1e-3).unwrap();
        for &v in out.data() {
            prop_assert!((v - c).abs() <= 1e-12);
        }
    }

    #[test]
    fn segmentation_features_are_consistent(img in image(48, 40), n in 16usize..60) {
        let lab = rgb_to_lab(&img);
        let labeling = slic_segment(&lab, n, 10.0, 10).unwrap();
        prop_assert!(labeling.is_connected());
        let f = extract_features(&labeling, &lab, 0.15).unwrap();
        let (w, h) = (48usize, 40usize);
        let count = labeling.region_count();

        let mut sx = vec![0.0; count];
        let mut sy = vec![0.0; count];
        let mut size = vec![0usize; count];
        for y in 0..h {
            for x in 0..w {
                let l = labeling.label(x, y);
                sx[l] += x as f64;
                sy[l] += y as f64;
                size[l] += 1;
            }
        }
        for r in 0..count {
            prop_assert_eq!(f.size[r], size[r]);
            let c = [sx[r] / size[r] as f64 / (w - 1) as f64, sy[r] / size[r] as f64 / (h - 1) as f64];
            prop_assert!((f.centroid[r][0] - c[0]).abs() < 1e-12 && (f.centroid[r][1] - c[1]).abs() < 1e-12);
            for &j in &f.adjacency[r] {
                prop_assert!(f.adjacency[j].contains(&r));
                prop_assert!(j != r);
            }
            for &j in &f.neighbors[r] {
                prop_assert!(f.neighbors[j].contains(&r));
            }
        }
        // Adjacency equals the set of label pairs across 4-connected pixel edges.
        let mut pairs = std::collections::BTreeSet::new();
        for y in 0..h {
            for x in 0..w {
                let a = labeling.label(x, y);
                if x + 1 < w && labeling.label(x + 1, y) != a {
                    pairs.insert((a.min(labeling.label(x + 1, y)), a.max(labeling.label(x + 1, y))));
                }
                if y + 1 < h && labeling.label(x, y + 1) != a {
                    pairs.insert((a.min(labeling.label(x, y + 1)), a.max(labeling.label(x, y + 1))));
                }
            }
        }
        let edges: usize = f.adjacency.iter().map(Vec::len).sum();
        prop_assert_eq!(edges, 2 * pairs.len());
        for (a, b) in pairs {
            prop_assert!(f.adjacency[a].contains(&b));
        }
    }

    #[test]
    fn single_window_objectness_decays_away_from_centre(
        v in map(20, 20),
        x0 in 0usize..10, y0 in 0usize..10, dw in 2usize..10, dh in 2usize..10,
    ) {
        let win = WindowCandidate { x0, y0, x1: x0 + dw, y1: y0 + dh, score: 0.7 };
        let r = pixel_objectness(&[win], &v, 1.0).unwrap();
        let (xo, yo) = r.center;
        for y in 0..20 {
            for x in 0..19 {
                let (a, b) = (r.raw.get(x, y), r.raw.get(x + 1, y));
                if (x + 1) as f64 <= xo {
                    prop_assert!(b >= a);
                } else if x as f64 >= xo {
                    prop_assert!(b <= a);
                }
            }
        }
        for x in 0..20 {
            for y in 0..19 {
                let (a, b) = (r.raw.get(x, y), r.raw.get(x, y + 1));
                if (y + 1) as f64 <= yo {
                    prop_assert!(b >= a);
                } else if y as f64 >= yo {
                    prop_assert!(b <= a);
                }
            }
        }
    }

    #[test]
    fn accuracy_scores_lie_in_unit_interval(v in map(20, 20), beta in 0.01f64..5.0, x0 in 0usize..18, y0 in 0usize..18) {
        let win = WindowCandidate { x0, y0, x1: 20, y1: 20, score: 1.0 };
        let r = pixel_objectness(&[win], &v, beta).unwrap();
        prop_assert!(r.psi[0] >= 0.0 && r.psi[0] < 1.0);
    }

    #[test]
    fn objectness_scales_linearly_with_scores(v in map(20, 20), k in 0.1f64..10.0) {
        let a = WindowCandidate { x0: 2, y0: 3, x1: 15, y1: 12, score: 0.3 };
        let b = WindowCandidate { x0: 0, y0: 0, x1: 20, y1: 8, score: 0.9 };
        let base = pixel_objectness(&[a, b], &v, 1.0).unwrap();
        let scaled = pixel_objectness(
            &[WindowCandidate { score: a.score * k, ..a }, WindowCandidate { score: b.score * k, ..b }],
            &v,
            1.0,
        ).unwrap();
        for (x, y) in base.raw.data().iter().zip(scaled.raw.data()) {
            prop_assert!((x * k - y).abs() <= 1e-12 * y.abs().max(1.0));
        }
        prop_assert!(common::max_abs_diff(base.pixel_map.data(), scaled.pixel_map.data()) <= 1e-12);
    }

    #[test]
    fn energy_solution_is_bounded_and_minimal(seed in any::<u64>(), n in 2usize..14) {
        let dense = common::random_energy(&mut common::rng(seed), n);
        let graph = dense.graph();
        let problem = EnergyProblem::new(dense.alpha.clone(), &dense.t, &graph);
        let s = problem.solve().unwrap();
        for &v in &s {
            prop_assert!((-1e-6..=1.0 + 1e-6).contains(&v));
        }
        let xi: Vec<f64> = dense.alpha.iter().map(|a| 1.0 - (-a).exp()).collect();
        let e = problem.energy(&s);
        for other in [vec![0.0; n], vec![1.0; n], xi] {
            prop_assert!(e <= problem.energy(&other) + 1e-12);
        }
    }

    #[test]
    fn recall_never_increases_and_counts_reconcile(
        sal in prop::collection::vec(any::<u8>(), 64),
        bits in prop::collection::vec(any::<bool>(), 64),
    ) {
        prop_assume!(bits.iter().any(|&b| b));
        let mask = Mask::new(8, 8, bits).unwrap();
        let curve = confusion_curve(&sal, &mask).unwrap();
        for c in &curve {
            prop_assert_eq!(c.total(), 64);
        }
        let pr = pr_curve(&sal, &mask).unwrap();
        prop_assert_eq!(pr[0].1, 1.0);
        for pair in pr.windows(2) {
            prop_assert!(pair[1].1 <= pair[0].1);
        }
    }
}
