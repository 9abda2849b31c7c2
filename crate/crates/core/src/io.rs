//! PNG input and output.

use std::path::Path;

use image::{DynamicImage, ImageBuffer, Luma, Rgb};

use crate::pixel::{PixelMap, RgbImage};
use crate::superpixel::SuperpixelLabeling;
use crate::{Error, Result};

fn decode(path: &Path) -> Result<DynamicImage> {
    let reader = image::ImageReader::open(path)?;
    let reader = reader.with_guessed_format()?;
    if reader.format() != Some(image::ImageFormat::Png) {
        return Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            reason: "only PNG is supported".into(),
        });
    }
    reader.decode().map_err(|source| Error::Decode {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads an 8-bit PNG (gray, gray+alpha, RGB or RGBA) as RGB. Alpha is dropped.
pub fn read_image(path: impl AsRef<Path>) -> Result<RgbImage> {
    let path = path.as_ref();
    let img = decode(path)?;
    let rgb = match img {
        DynamicImage::ImageRgb8(buf) => buf,
        DynamicImage::ImageRgba8(_)
        | DynamicImage::ImageLuma8(_)
        | DynamicImage::ImageLumaA8(_) => img.to_rgb8(),
        other => {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                reason: format!("unsupported bit depth / color type {:?}", other.color()),
            })
        }
    };
    let (w, h) = rgb.dimensions();
    RgbImage::new(w as usize, h as usize, rgb.into_raw())
}

/// Reads an 8-bit grayscale PNG as raw bytes plus dimensions. Color inputs are
/// accepted and reduced to luma.
pub fn read_gray(path: impl AsRef<Path>) -> Result<(usize, usize, Vec<u8>)> {
    let path = path.as_ref();
    let img = decode(path)?;
    let gray = match img {
        DynamicImage::ImageLuma8(buf) => buf,
        DynamicImage::ImageRgb8(_) | DynamicImage::ImageRgba8(_) | DynamicImage::ImageLumaA8(_) => {
            img.to_luma8()
        }
        other => {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                reason: format!("unsupported bit depth / color type {:?}", other.color()),
            })
        }
    };
    let (w, h) = gray.dimensions();
    Ok((w as usize, h as usize, gray.into_raw()))
}

pub fn write_rgb(path: impl AsRef<Path>, img: &RgbImage) -> Result<()> {
    let path = path.as_ref();
    let buf: ImageBuffer<Rgb<u8>, _> =
        ImageBuffer::from_raw(img.width() as u32, img.height() as u32, img.data().to_vec())
            .expect("RgbImage length invariant");
    buf.save_with_format(path, image::ImageFormat::Png)
        .map_err(|source| Error::Encode {
            path: path.to_path_buf(),
            source,
        })
}

/// Quantizes a map to 8 bits as `round(255 * v)`, clamped to `[0, 255]`.
/// Halves round up.
pub fn quantize(map: &PixelMap) -> Vec<u8> {
    map.data().iter().map(|&v| quantize_value(v)).collect()
}

pub fn quantize_value(v: f64) -> u8 {
    (255.0 * v).round().clamp(0.0, 255.0) as u8
}

pub fn write_gray(
    path: impl AsRef<Path>,
    width: usize,
    height: usize,
    data: Vec<u8>,
) -> Result<()> {
    let path = path.as_ref();
    let buf: ImageBuffer<Luma<u8>, _> = ImageBuffer::from_raw(width as u32, height as u32, data)
        .ok_or_else(|| {
            Error::InvalidParameter(format!("gray buffer does not match {width}x{height}"))
        })?;
    buf.save_with_format(path, image::ImageFormat::Png)
        .map_err(|source| Error::Encode {
            path: path.to_path_buf(),
            source,
        })
}

/// Writes a map as an 8-bit grayscale PNG using [`quantize`].
pub fn write_map(path: impl AsRef<Path>, map: &PixelMap) -> Result<()> {
    write_gray(path, map.width(), map.height(), quantize(map))
}

/// Debug dump of a labeling as a 16-bit grayscale PNG of region indices.
pub fn write_labels(path: impl AsRef<Path>, labeling: &SuperpixelLabeling) -> Result<()> {
    let path = path.as_ref();
    if labeling.region_count() > usize::from(u16::MAX) + 1 {
        return Err(Error::InvalidParameter(format!(
            "{} regions do not fit a 16-bit label image",
            labeling.region_count()
        )));
    }
    let data: Vec<u16> = labeling.labels().iter().map(|&l| l as u16).collect();
    let buf: ImageBuffer<Luma<u16>, _> =
        ImageBuffer::from_raw(labeling.width() as u32, labeling.height() as u32, data)
            .expect("labeling length invariant");
    buf.save_with_format(path, image::ImageFormat::Png)
        .map_err(|source| Error::Encode {
            path: path.to_path_buf(),
            source,
        })
}
