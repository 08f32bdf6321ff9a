//! Scale-free channels: horizon band, center prior, depth near/far and
//! externally supplied maps.

use std::path::{Path, PathBuf};

use image::RgbImage;

use super::filters::{ColorPlanes, Plane};
use super::tensor::{ChannelFamily, FeatureChannel};
use crate::error::{invalid_arg, Result};
use crate::io::read_gray_map;
use crate::raster::ScalarMap;

/// Band width of the horizon channel relative to image height.
pub const HORIZON_SIGMA_FRACTION: f64 = 0.05;
pub const MIN_HORIZON_HEIGHT: u32 = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct HorizonChannel {
    pub map: ScalarMap,
    /// Estimated horizon row; `None` when the image has no horizontal edges.
    pub row: Option<u32>,
    pub degenerate: bool,
}

/// Row-summed squared vertical intensity difference; entry `y` is the edge
/// between rows `y - 1` and `y`, entry 0 is zero.
pub(crate) fn row_edge_energy(gray: &Plane) -> Vec<f64> {
    let mut e = vec![0.0; gray.h];
    for (y, ey) in e.iter_mut().enumerate().skip(1) {
        *ey = (0..gray.w).map(|x| (gray.get(x, y) - gray.get(x, y - 1)).powi(2)).sum();
    }
    e
}

/// Gaussian row band of the given center and sigma, each row summing
/// (before normalization) to a row-marginal of unit total.
pub(crate) fn row_band(h: usize, center: f64, sigma: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..h)
        .map(|y| (-(y as f64 - center).powi(2) / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

/// Horizontal band centered on the row with the strongest horizontal edge.
/// A vertically uniform image gives a zero channel with `degenerate` set.
pub fn horizon_channel(image: &RgbImage) -> Result<HorizonChannel> {
    let (w, h) = (image.width(), image.height());
    if h < MIN_HORIZON_HEIGHT {
        return Err(invalid_arg!("horizon needs height >= {MIN_HORIZON_HEIGHT}, got {h}"));
    }
    let gray = ColorPlanes::from_rgb(image).intensity();
    let energy = row_edge_energy(&gray);
    let (row, peak) = energy
        .iter()
        .enumerate()
        .fold((0, 0.0), |best, (y, &e)| if e > best.1 { (y, e) } else { best });
    // quantization of an 8-bit image makes any real edge at least (1/255)^2
    if peak < 1e-6 {
        return Ok(HorizonChannel {
            map: ScalarMap::zeros(w, h, crate::raster::MapKind::Normalized),
            row: None,
            degenerate: true,
        });
    }
    let band = row_band(h as usize, row as f64, HORIZON_SIGMA_FRACTION * f64::from(h));
    let p = Plane::from_fn(w as usize, h as usize, |_, y| band[y]);
    Ok(HorizonChannel {
        map: p.into_normalized_map(),
        row: Some(row as u32),
        degenerate: false,
    })
}

/// Isotropic Gaussian at `((w-1)/2, (h-1)/2)` with sigma `min(w, h) / 4`,
/// max-normalized.
pub fn center_prior_channel(width: u32, height: u32) -> Result<ScalarMap> {
    if width == 0 || height == 0 {
        return Err(invalid_arg!("center prior needs positive dimensions"));
    }
    let sigma = f64::from(width.min(height)) / 4.0;
    let (cx, cy) = ((f64::from(width) - 1.0) / 2.0, (f64::from(height) - 1.0) / 2.0);
    let p = Plane::from_fn(width as usize, height as usize, |x, y| {
        let r2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
        (-r2 / (2.0 * sigma * sigma)).exp()
    });
    Ok(p.into_normalized_map())
}

/// Smoothing used for depth channels at `scale`, or for the scale-free pair.
pub(crate) fn depth_sigma(width: u32, height: u32, scale: Option<u8>) -> f64 {
    let base = 0.01 * f64::from(width.min(height));
    match scale {
        Some(s) => base * f64::from(1u32 << (s - 1)),
        None => 2.0 * base,
    }
}

/// Near-ness `1 - d` and far-ness `d` of a depth map with values in `[0, 1]`
/// (0 nearest). With an empty `scales` list one scale-free pair is produced;
/// otherwise one pair per scale, smoothed more at coarser scales.
pub fn depth_channels(depth: &ScalarMap, scales: &[u8]) -> Result<Vec<FeatureChannel>> {
    if let Some(v) = depth.values().iter().find(|v| **v > 1.0) {
        return Err(invalid_arg!("depth value {v} outside [0, 1]"));
    }
    if let Some(s) = scales.iter().find(|s| !(1..=3).contains(*s)) {
        return Err(invalid_arg!("depth scale {s} outside 1..=3"));
    }
    let (w, h) = depth.dims();
    let d = Plane::from_map(depth);
    let tags: Vec<Option<u8>> = if scales.is_empty() {
        vec![None]
    } else {
        scales.iter().map(|&s| Some(s)).collect()
    };
    let mut out = Vec::with_capacity(2 * tags.len());
    for tag in tags {
        let sigma = depth_sigma(w, h, tag);
        let suffix = tag.map(|s| format!(".s{s}")).unwrap_or_default();
        let near = d.map(|v| 1.0 - v).blur(sigma);
        let far = d.blur(sigma);
        out.push(FeatureChannel::new(
            format!("depth.near{suffix}"),
            ChannelFamily::Depth,
            tag,
            near.into_normalized_map(),
        ));
        out.push(FeatureChannel::new(
            format!("depth.far{suffix}"),
            ChannelFamily::Depth,
            tag,
            far.into_normalized_map(),
        ));
    }
    Ok(out)
}

pub fn external_channel_path(dir: &Path, image_id: &str, name: &str) -> PathBuf {
    dir.join(format!("{image_id}.{name}.png"))
}

/// Reads `<dir>/<image_id>.<name>.png` as a max-normalized channel; `None`
/// if the file does not exist.
pub fn load_external_channel(dir: &Path, image_id: &str, name: &str, width: u32, height: u32) -> Result<Option<FeatureChannel>> {
    let path = external_channel_path(dir, image_id, name);
    if !path.exists() {
        return Ok(None);
    }
    let map = read_gray_map(&path)?;
    if map.dims() != (width, height) {
        return Err(invalid_arg!(
            "{} is {}x{}, image is {width}x{height}",
            path.display(),
            map.width(),
            map.height()
        ));
    }
    Ok(Some(FeatureChannel::new(
        format!("external.{name}"),
        ChannelFamily::External,
        None,
        map.max_normalized(),
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::MapKind;
    use image::Rgb;

    #[test]
    fn step_edge_sets_the_horizon_row() {
        for r in [10u32, 25, 47] {
            let img = RgbImage::from_fn(40, 60, |_, y| if y < r { Rgb([200, 210, 230]) } else { Rgb([60, 90, 40]) });
            let hc = horizon_channel(&img).unwrap();
            assert_eq!(hc.row, Some(r));
            assert!(!hc.degenerate);
            let m = &hc.map;
            let peak = m.pixel_of(m.argmax_set()[0]);
            assert_eq!(peak.y, r);
            assert!((0..40).all(|x| m.get(x, r) == 1.0));
        }
    }

    #[test]
    fn vertically_uniform_image_is_degenerate() {
        let img = RgbImage::from_fn(30, 20, |x, _| Rgb([(x * 8) as u8, 0, 0]));
        let hc = horizon_channel(&img).unwrap();
        assert!(hc.degenerate);
        assert_eq!(hc.row, None);
        assert!(hc.map.is_zero());
        assert!(horizon_channel(&RgbImage::new(30, 15)).is_err());
    }

    #[test]
    fn horizon_band_marginal_integrates_to_one() {
        for (h, c) in [(100usize, 50.0), (64, 3.0), (200, 190.0)] {
            let band = row_band(h, c, HORIZON_SIGMA_FRACTION * h as f64);
            assert!((band.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn center_prior_closed_form() {
        let (w, h) = (41u32, 31u32);
        let m = center_prior_channel(w, h).unwrap();
        assert_eq!(m.get(20, 15), 1.0);
        for (x, y) in [(0, 0), (3, 29), (17, 4)] {
            assert_eq!(m.get(x, y), m.get(w - 1 - x, y));
            assert_eq!(m.get(x, y), m.get(x, h - 1 - y));
        }
        let sigma = 31.0 / 4.0;
        let r2 = 20.0f64 * 20.0 + 15.0 * 15.0;
        assert!((m.get(0, 0) - (-r2 / (2.0 * sigma * sigma)).exp()).abs() < 1e-12);
        // even sizes: symmetric too, peak normalized
        let e = center_prior_channel(40, 30).unwrap();
        assert_eq!(e.max(), 1.0);
        assert_eq!(e.get(0, 0), e.get(39, 29));
    }

    #[test]
    fn constant_depth_gives_flat_channels() {
        let d = ScalarMap::new(20, 16, vec![0.4; 320], MapKind::Counts).unwrap();
        for c in depth_channels(&d, &[]).unwrap() {
            let v = c.map.values();
            assert!(v.iter().all(|x| (x - v[0]).abs() < 1e-12), "{}", c.spec.name);
        }
    }

    #[test]
    fn two_plane_depth_separates_near_and_far() {
        let (w, h) = (40u32, 30u32);
        // left half near (black), right half far
        let v = (0..w * h).map(|i| if i % w < w / 2 { 0.0 } else { 1.0 }).collect();
        let d = ScalarMap::new(w, h, v, MapKind::Counts).unwrap();
        for scales in [vec![], vec![1, 2, 3]] {
            let ch = depth_channels(&d, &scales).unwrap();
            assert_eq!(ch.len(), 2 * scales.len().max(1));
            for c in &ch {
                let p = c.map.pixel_of(c.map.argmax_set()[0]);
                if c.spec.name.starts_with("depth.near") {
                    assert!(p.x < w / 2, "{}", c.spec.name);
                } else {
                    assert!(p.x >= w / 2, "{}", c.spec.name);
                }
            }
        }
    }

    #[test]
    fn black_means_near() {
        let d = ScalarMap::zeros(8, 8, MapKind::Counts);
        let ch = depth_channels(&d, &[]).unwrap();
        assert!(ch[0].map.values().iter().all(|v| *v == 1.0));
        assert!(ch[1].map.is_zero());
    }

    #[test]
    fn missing_external_channel_is_none() {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(load_external_channel(dir.path(), "img", "context", 4, 4).unwrap(), None);
        let m = ScalarMap::normalized_from(4, 4, (0..16).map(f64::from).collect()).unwrap();
        crate::io::write_map_png(&external_channel_path(dir.path(), "img", "context"), &m).unwrap();
        let c = load_external_channel(dir.path(), "img", "context", 4, 4).unwrap().unwrap();
        assert_eq!(c.spec.name, "external.context");
        assert!(load_external_channel(dir.path(), "img", "context", 5, 4).is_err());
    }
}
