mod common;

use rand::Rng;
use saliency_core::corner::combine_corners;
use saliency_core::multilayer::{
    integrate_multilayer, refine_map, selection_weights, GuidedParams, ScaleStack,
};
use saliency_core::{LabImage, PixelMap, RegionSaliency};

use common::{max_abs_diff, rng};

const W: usize = 24;
const H: usize = 18;

fn blob(cx: f64, cy: f64, r: f64) -> PixelMap {
    PixelMap::from_fn(W, H, |x, y| {
        let d2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
        (-d2 / (2.0 * r * r)).exp()
    })
    .normalized()
}

fn guide() -> LabImage {
    LabImage::new(
        W,
        H,
        (0..W * H)
            .map(|p| [(p % 7) as f64 * 10.0, 0.0, 0.0])
            .collect(),
    )
    .unwrap()
}

#[test]
fn identical_maps_fuse_to_the_common_map() {
    let m = blob(12.0, 9.0, 4.0);
    let stack = ScaleStack::new(vec![100, 200], vec![m.clone(), m.clone()]).unwrap();
    assert_eq!(stack.similarity, vec![vec![1.0, 1.0], vec![1.0, 1.0]]);
    assert_eq!(stack.judgment, vec![1.0, 1.0]);
    assert_eq!(stack.selected, 0);
    assert_eq!(stack.weights, vec![1.0, 1.0]);
    assert!(max_abs_diff(stack.fuse().data(), m.data()) <= 1e-15);
}

#[test]
fn least_similar_map_is_promoted() {
    let (m, w) = selection_weights(&[0.9, 0.6, 0.9]);
    assert_eq!(m, 1);
    assert_eq!(w, vec![0.9, 1.0, 0.9]);
}

#[test]
fn outlier_gets_unit_weight_and_fusion_matches_direct_sum() {
    let mut r = rng(61);
    let mut maps: Vec<PixelMap> = (0..4)
        .map(|_| {
            blob(
                12.0 + r.random_range(-1.0..1.0),
                9.0 + r.random_range(-1.0..1.0),
                4.0,
            )
        })
        .collect();
    let inverted = PixelMap::from_fn(W, H, |x, y| 1.0 - maps[0].get(x, y));
    maps.insert(2, inverted);
    let scales = vec![100, 150, 200, 250, 300];
    let stack = ScaleStack::new(scales, maps.clone()).unwrap();

    assert_eq!(stack.selected, 2);
    for i in 0..5 {
        assert_eq!(stack.similarity[i][i], 1.0);
        for j in 0..5 {
            assert_eq!(stack.similarity[i][j], stack.similarity[j][i]);
        }
        let expected = if i == 2 { 1.0 } else { stack.judgment[i] };
        assert_eq!(stack.weights[i], expected);
    }

    let mut direct = vec![0.0; W * H];
    for (m, wt) in maps.iter().zip(&stack.weights) {
        for (d, v) in direct.iter_mut().zip(m.data()) {
            *d += wt * v;
        }
    }
    let direct = PixelMap::new(W, H, direct).unwrap().normalized();
    assert!(max_abs_diff(stack.fuse().data(), direct.data()) <= 1e-12);
}

#[test]
fn scale_order_does_not_change_the_result() {
    let maps: Vec<PixelMap> = [(6.0, 5.0), (12.0, 9.0), (13.0, 9.0), (18.0, 12.0)]
        .iter()
        .map(|&(x, y)| blob(x, y, 4.0))
        .collect();
    let scales = vec![100, 150, 200, 250];
    let a = ScaleStack::new(scales.clone(), maps.clone()).unwrap();
    let order = [2, 0, 3, 1];
    let b = ScaleStack::new(
        order.iter().map(|&i| scales[i]).collect(),
        order.iter().map(|&i| maps[i].clone()).collect(),
    )
    .unwrap();
    for (bi, &ai) in order.iter().enumerate() {
        assert_eq!(b.judgment[bi], a.judgment[ai]);
        assert_eq!(b.weights[bi], a.weights[ai]);
    }
    let g = guide();
    let params = GuidedParams::default();
    assert_eq!(
        integrate_multilayer(&a, &g, &params).unwrap(),
        integrate_multilayer(&b, &g, &params).unwrap()
    );
}

#[test]
fn single_scale_reduces_to_refined_map() {
    let m = blob(10.0, 8.0, 3.0);
    let stack = ScaleStack::new(vec![150], vec![m.clone()]).unwrap();
    assert_eq!(stack.weights, vec![1.0]);
    let g = guide();
    let params = GuidedParams::default();
    assert_eq!(
        integrate_multilayer(&stack, &g, &params).unwrap(),
        refine_map(&m, &g, &params).unwrap()
    );
}

#[test]
fn corner_order_does_not_change_the_prior() {
    let mut r = rng(71);
    let maps: Vec<RegionSaliency> = (0..4)
        .map(|_| RegionSaliency::new((0..30).map(|_| r.random()).collect()))
        .collect();
    let base = combine_corners([&maps[0], &maps[1], &maps[2], &maps[3]]);
    for perm in [
        [1, 0, 2, 3],
        [3, 2, 1, 0],
        [2, 3, 0, 1],
        [0, 3, 1, 2],
        [1, 2, 3, 0],
    ] {
        let permuted = combine_corners(perm.map(|i| &maps[i]));
        assert_eq!(permuted, base, "{perm:?}");
    }
}
