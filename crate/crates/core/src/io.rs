//! PNG/PGM reading and writing for maps, masks and stimuli.

use std::path::Path;

use image::{GrayImage, ImageBuffer, Luma, RgbImage};

use crate::error::{Error, Result};
use crate::raster::{MapKind, RegionLabel, RegionMask, ScalarMap};

/// Writes a map as 16-bit grayscale PNG, `value = round(65535 v)`.
/// `Counts` maps are max-normalized first.
pub fn write_map_png(path: &Path, map: &ScalarMap) -> Result<()> {
    let normalized;
    let map = match map.kind() {
        MapKind::Normalized => map,
        MapKind::Counts => {
            normalized = map.max_normalized();
            &normalized
        }
    };
    let buf: Vec<u16> = map
        .values()
        .iter()
        .map(|v| (v.clamp(0.0, 1.0) * 65535.0).round() as u16)
        .collect();
    let img: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(map.width(), map.height(), buf).expect("buffer size matches map");
    img.save(path).map_err(|e| Error::image(path, e))
}

/// Reads any grayscale raster as values in `[0, 1]` (`v / 65535` after
/// widening to 16 bits). The result is not rescaled.
pub fn read_gray_map(path: &Path) -> Result<ScalarMap> {
    let img = image::open(path).map_err(|e| Error::image(path, e))?.to_luma16();
    let (w, h) = img.dimensions();
    let values = img.into_raw().into_iter().map(|v| f64::from(v) / 65535.0).collect();
    ScalarMap::new(w, h, values, MapKind::Counts)
}

/// Depth rasters: 0 is nearest, full scale is farthest.
pub fn read_depth_map(path: &Path) -> Result<ScalarMap> {
    read_gray_map(path)
}

pub fn write_depth_map(path: &Path, depth: &ScalarMap) -> Result<()> {
    let buf: Vec<u16> = depth
        .values()
        .iter()
        .map(|v| (v.clamp(0.0, 1.0) * 65535.0).round() as u16)
        .collect();
    let img: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(depth.width(), depth.height(), buf).expect("buffer size matches map");
    img.save(path).map_err(|e| Error::image(path, e))
}

/// 8-bit mask: 0 unlabeled, 1 foreground, 2 background.
pub fn read_region_mask(path: &Path) -> Result<RegionMask> {
    let img = image::open(path).map_err(|e| Error::image(path, e))?.to_luma8();
    let (w, h) = img.dimensions();
    let labels = img
        .into_raw()
        .into_iter()
        .map(RegionLabel::from_code)
        .collect::<Result<Vec<_>>>()?;
    RegionMask::new(w, h, labels)
}

pub fn write_region_mask(path: &Path, mask: &RegionMask) -> Result<()> {
    let (w, h) = mask.dims();
    let buf = mask.labels().iter().map(|l| l.code()).collect();
    let img = GrayImage::from_raw(w, h, buf).expect("buffer size matches mask");
    img.save(path).map_err(|e| Error::image(path, e))
}

pub fn read_rgb(path: &Path) -> Result<RgbImage> {
    Ok(image::open(path).map_err(|e| Error::image(path, e))?.to_rgb8())
}

pub fn write_rgb(path: &Path, img: &RgbImage) -> Result<()> {
    img.save(path).map_err(|e| Error::image(path, e))
}
