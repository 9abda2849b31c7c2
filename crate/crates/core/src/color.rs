//! sRGB to CIELAB conversion (D65 white point, 2° observer).

use crate::pixel::{LabImage, RgbImage};

const WHITE_X: f64 = 0.950_47;
const WHITE_Y: f64 = 1.0;
const WHITE_Z: f64 = 1.088_83;

const EPSILON: f64 = 216.0 / 24_389.0;
const KAPPA: f64 = 24_389.0 / 27.0;

// Linear sRGB -> XYZ, D65.
const RGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.412_456_4, 0.357_576_1, 0.180_437_5],
    [0.212_672_9, 0.715_152_2, 0.072_175_0],
    [0.019_333_9, 0.119_192_0, 0.950_304_1],
];

fn srgb_to_linear(c: u8) -> f64 {
    let c = f64::from(c) / 255.0;
    if c <= 0.040_45 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn lab_f(t: f64) -> f64 {
    if t > EPSILON {
        t.cbrt()
    } else {
        (KAPPA * t + 16.0) / 116.0
    }
}

fn linear_to_lab(lin: [f64; 3], table: &[[f64; 3]; 3]) -> [f64; 3] {
    let xyz: Vec<f64> = table
        .iter()
        .map(|row| row[0] * lin[0] + row[1] * lin[1] + row[2] * lin[2])
        .collect();
    let fx = lab_f(xyz[0] / WHITE_X);
    let fy = lab_f(xyz[1] / WHITE_Y);
    let fz = lab_f(xyz[2] / WHITE_Z);
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

/// Converts a single sRGB pixel.
pub fn srgb_pixel_to_lab(rgb: [u8; 3]) -> [f64; 3] {
    // Black lands a hair off zero through the linear segment of f(t).
    if rgb == [0, 0, 0] {
        return [0.0; 3];
    }
    linear_to_lab(rgb.map(srgb_to_linear), &RGB_TO_XYZ)
}

pub fn rgb_to_lab(img: &RgbImage) -> LabImage {
    let lut: Vec<f64> = (0..=255u8).map(srgb_to_linear).collect();
    let data = img
        .data()
        .chunks_exact(3)
        .map(|px| {
            if px == [0, 0, 0] {
                return [0.0; 3];
            }
            let lin = [
                lut[px[0] as usize],
                lut[px[1] as usize],
                lut[px[2] as usize],
            ];
            linear_to_lab(lin, &RGB_TO_XYZ)
        })
        .collect();
    LabImage::new(img.width(), img.height(), data).expect("conversion preserves dimensions")
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from an independent converter (scikit-image rgb2lab, D65/2°).
    const FIXTURES: [([u8; 3], [f64; 3]); 5] = [
        ([255, 0, 0], [53.240_588, 80.092_308, 67.202_751]),
        ([0, 255, 0], [87.735_099, -86.183_030, 83.179_703]),
        ([0, 0, 255], [32.295_673, 79.185_591, -107.857_300]),
        ([128, 64, 32], [34.724_796, 24.999_568, 31.372_840]),
        ([255, 255, 255], [100.0, -0.002_455, 0.004_653]),
    ];

    #[test]
    fn black_is_origin() {
        assert_eq!(srgb_pixel_to_lab([0, 0, 0]), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn white_is_white_point() {
        let [l, a, b] = srgb_pixel_to_lab([255, 255, 255]);
        assert!((l - 100.0).abs() <= 0.01, "L = {l}");
        assert!(a.abs() <= 0.01 && b.abs() <= 0.01, "a = {a}, b = {b}");
    }

    #[test]
    fn matches_reference_palette() {
        for (rgb, want) in FIXTURES {
            let got = srgb_pixel_to_lab(rgb);
            for c in 0..3 {
                assert!(
                    (got[c] - want[c]).abs() <= 0.01,
                    "{rgb:?} channel {c}: {} vs {}",
                    got[c],
                    want[c]
                );
            }
        }
    }

    #[test]
    fn image_conversion_agrees_with_pixel_conversion() {
        let img = RgbImage::from_fn(4, 3, |x, y| [(x * 60) as u8, (y * 90) as u8, 17]).unwrap();
        let lab = rgb_to_lab(&img);
        for y in 0..3 {
            for x in 0..4 {
                assert_eq!(lab.pixel(x, y), srgb_pixel_to_lab(img.pixel(x, y)));
            }
        }
    }

    #[test]
    fn palette_is_injective() {
        let labs: Vec<[f64; 3]> = FIXTURES
            .iter()
            .map(|(rgb, _)| srgb_pixel_to_lab(*rgb))
            .chain(std::iter::once(srgb_pixel_to_lab([0, 0, 0])))
            .collect();
        for i in 0..labs.len() {
            for j in i + 1..labs.len() {
                assert_ne!(labs[i], labs[j]);
            }
        }
    }
}
