//! Human fixation maps, Gaussian-smoothed saliency maps, combined group maps,
//! center maps and heat-map overlays.

use image::{Rgb, RgbImage};
use serde::{Deserialize, Serialize};

use crate::data::{AgeGroup, FixationRecord, GazeDataset, ImageEntry, PerGroup, Pixel};
use crate::error::{invalid_arg, Result};
use crate::raster::{MapKind, ScalarMap};

/// Standard deviation of the saliency kernel, about one degree of visual
/// angle for a 40 cm / 1280 px display viewed from 65 cm.
pub const DEFAULT_SIGMA_PX: f64 = 37.0;

/// Opacity of the colour layer at saturation.
pub const OVERLAY_ALPHA: f64 = 0.5;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixationWeighting {
    /// Each fixation adds 1.
    #[default]
    Uniform,
    /// Each fixation adds its duration in seconds.
    Duration,
}

/// How fixations become saliency maps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MapParams {
    pub sigma_px: f64,
    pub weighting: FixationWeighting,
    /// Ignore the fixation with trial index 0.
    pub drop_first_fixation: bool,
}

impl Default for MapParams {
    fn default() -> Self {
        MapParams {
            sigma_px: DEFAULT_SIGMA_PX,
            weighting: FixationWeighting::Uniform,
            drop_first_fixation: false,
        }
    }
}

impl MapParams {
    pub fn with_sigma(sigma_px: f64) -> Self {
        MapParams {
            sigma_px,
            ..MapParams::default()
        }
    }

    pub fn keeps(&self, f: &FixationRecord) -> bool {
        !(self.drop_first_fixation && f.index == 0)
    }

    fn weight(&self, f: &FixationRecord) -> f64 {
        match self.weighting {
            FixationWeighting::Uniform => 1.0,
            FixationWeighting::Duration => f.duration_ms / 1000.0,
        }
    }
}

/// Counts fixation landings per pixel.
pub fn build_fixation_map<'a, I>(fixations: I, width: u32, height: u32) -> Result<ScalarMap>
where
    I: IntoIterator<Item = &'a FixationRecord>,
{
    let mut values = vec![0.0; width as usize * height as usize];
    for f in fixations {
        if f.x >= width || f.y >= height {
            return Err(invalid_arg!(
                "fixation at ({}, {}) outside {width}x{height}",
                f.x,
                f.y
            ));
        }
        values[f.y as usize * width as usize + f.x as usize] += 1.0;
    }
    Ok(ScalarMap::from_parts_unchecked(width, height, values, MapKind::Counts))
}

/// Like [`build_fixation_map`] but honours `params` (first-fixation dropping
/// and duration weighting).
pub fn build_weighted_fixation_map<'a, I>(
    fixations: I,
    width: u32,
    height: u32,
    params: &MapParams,
) -> Result<ScalarMap>
where
    I: IntoIterator<Item = &'a FixationRecord>,
{
    let mut values = vec![0.0; width as usize * height as usize];
    for f in fixations.into_iter().filter(|f| params.keeps(f)) {
        if f.x >= width || f.y >= height {
            return Err(invalid_arg!(
                "fixation at ({}, {}) outside {width}x{height}",
                f.x,
                f.y
            ));
        }
        values[f.y as usize * width as usize + f.x as usize] += params.weight(f);
    }
    Ok(ScalarMap::from_parts_unchecked(width, height, values, MapKind::Counts))
}

pub fn fixation_map_from_pixels(pixels: &[Pixel], width: u32, height: u32) -> Result<ScalarMap> {
    let mut values = vec![0.0; width as usize * height as usize];
    for p in pixels {
        if p.x >= width || p.y >= height {
            return Err(invalid_arg!("pixel ({}, {}) outside {width}x{height}", p.x, p.y));
        }
        values[p.y as usize * width as usize + p.x as usize] += 1.0;
    }
    Ok(ScalarMap::from_parts_unchecked(width, height, values, MapKind::Counts))
}

fn gaussian_taps(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil().max(1.0) as i64;
    (-radius..=radius)
        .map(|d| (-(d * d) as f64 / (2.0 * sigma * sigma)).exp())
        .collect()
}

/// For every source position, the kernel mass that lands inside `[0, n)`.
fn inside_mass(taps: &[f64], n: usize) -> Vec<f64> {
    let r = (taps.len() / 2) as i64;
    (0..n as i64)
        .map(|i| {
            let lo = (i - r).max(0);
            let hi = (i + r).min(n as i64 - 1);
            (lo..=hi).map(|j| taps[(j - i + r) as usize]).sum()
        })
        .collect()
}

/// Gaussian smoothing that conserves total mass.
///
/// Each source pixel spreads its value with a truncated Gaussian whose
/// in-image part is rescaled to unit mass, so nothing leaks past the border.
/// The 1-D normalisations factor, so the separable passes conserve mass
/// exactly in 2-D. Zero pixels are skipped, which makes sparse fixation maps
/// cheap.
pub fn gaussian_smooth(map: &ScalarMap, sigma_px: f64) -> Result<ScalarMap> {
    if !(sigma_px > 0.0) || !sigma_px.is_finite() {
        return Err(invalid_arg!("sigma must be positive, got {sigma_px}"));
    }
    let (w, h) = (map.width() as usize, map.height() as usize);
    let taps = gaussian_taps(sigma_px);
    let r = taps.len() / 2;
    let zx = inside_mass(&taps, w);
    let zy = inside_mass(&taps, h);
    let src = map.values();

    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        let out = &mut tmp[y * w..(y + 1) * w];
        for (x, &v) in row.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let scale = v / zx[x];
            let lo = x.saturating_sub(r);
            let hi = (x + r).min(w - 1);
            for j in lo..=hi {
                out[j] += scale * taps[j + r - x];
            }
        }
    }

    let mut out = vec![0.0; w * h];
    for y in 0..h {
        let lo = y.saturating_sub(r);
        let hi = (y + r).min(h - 1);
        for x in 0..w {
            let v = tmp[y * w + x];
            if v == 0.0 {
                continue;
            }
            let scale = v / zy[y];
            for j in lo..=hi {
                out[j * w + x] += scale * taps[j + r - y];
            }
        }
    }
    Ok(ScalarMap::from_parts_unchecked(
        map.width(),
        map.height(),
        out,
        MapKind::Counts,
    ))
}

/// Smooths a fixation map and max-normalizes it. An all-zero input yields an
/// all-zero output (check [`ScalarMap::is_zero`]).
pub fn build_saliency_map(fixmap: &ScalarMap, sigma_px: f64) -> Result<ScalarMap> {
    let smoothed = gaussian_smooth(fixmap, sigma_px)?;
    if smoothed.is_zero() {
        log::debug!("saliency map built from an empty fixation map");
    }
    Ok(smoothed.max_normalized())
}

/// Equal-weight mean of three group maps, max-normalized.
pub fn combine_group_maps(
    children: &ScalarMap,
    adults: &ScalarMap,
    elderly: &ScalarMap,
) -> Result<ScalarMap> {
    children.ensure_same_dims(adults)?;
    children.ensure_same_dims(elderly)?;
    let values = children
        .values()
        .iter()
        .zip(adults.values())
        .zip(elderly.values())
        .map(|((&a, &b), &c)| {
            // sorted summation keeps the result independent of argument order
            let mut t = [a, b, c];
            t.sort_by(f64::total_cmp);
            (t[0] + t[1] + t[2]) / 3.0
        })
        .collect();
    Ok(
        ScalarMap::from_parts_unchecked(children.width(), children.height(), values, MapKind::Counts)
            .max_normalized(),
    )
}

/// Pixelwise mean over a group's saliency maps, max-normalized.
pub fn build_center_map(maps: &[ScalarMap]) -> Result<ScalarMap> {
    let first = maps
        .first()
        .ok_or_else(|| invalid_arg!("center map needs at least one saliency map"))?;
    let mut acc = vec![0.0; first.len()];
    for m in maps {
        first.ensure_same_dims(m)?;
        for (a, v) in acc.iter_mut().zip(m.values()) {
            *a += v;
        }
    }
    let n = maps.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    Ok(ScalarMap::from_parts_unchecked(first.width(), first.height(), acc, MapKind::Counts)
        .max_normalized())
}

/// Per-group saliency maps of one image plus their combination.
#[derive(Debug, Clone)]
pub struct GroupMapSet {
    pub groups: PerGroup<ScalarMap>,
    pub combined: ScalarMap,
}

impl GroupMapSet {
    pub fn build(dataset: &GazeDataset, image: &ImageEntry, params: &MapParams) -> Result<Self> {
        let groups = PerGroup::try_from_fn(|g| group_saliency_map(dataset, image, g, params))?;
        let combined = combine_group_maps(&groups.children, &groups.adults, &groups.elderly)?;
        Ok(GroupMapSet { groups, combined })
    }
}

/// Saliency map from the pooled fixations of one age group on one image.
pub fn group_saliency_map(
    dataset: &GazeDataset,
    image: &ImageEntry,
    group: AgeGroup,
    params: &MapParams,
) -> Result<ScalarMap> {
    let fixmap = build_weighted_fixation_map(
        dataset
            .fixations_for_image(&image.id)
            .filter(|f| f.group == group),
        image.width,
        image.height,
        params,
    )?;
    build_saliency_map(&fixmap, params.sigma_px)
}

/// Jet colormap, `v` in `[0, 1]`.
pub fn jet(v: f64) -> [f64; 3] {
    let v = v.clamp(0.0, 1.0);
    let ch = |offset: f64| (1.5 - (4.0 * v - offset).abs()).clamp(0.0, 1.0);
    [ch(3.0), ch(2.0), ch(1.0)]
}

/// Alpha-blends a jet colorization of `map` over `image`.
///
/// Per pixel with map value `v`, the blend weight is `a = OVERLAY_ALPHA * v`
/// and each channel becomes `round((1 - a) * image + a * 255 * jet(v))`.
pub fn render_heat_overlay(image: &RgbImage, map: &ScalarMap) -> Result<RgbImage> {
    if image.dimensions() != map.dims() {
        return Err(invalid_arg!(
            "overlay dimensions {:?} do not match map {:?}",
            image.dimensions(),
            map.dims()
        ));
    }
    let max = map.max();
    let mut out = image.clone();
    for (x, y, px) in out.enumerate_pixels_mut() {
        let raw = map.get(x, y);
        let v = if max > 0.0 { raw / max } else { 0.0 };
        if v == 0.0 {
            continue;
        }
        let a = OVERLAY_ALPHA * v;
        let c = jet(v);
        let blend = |base: u8, col: f64| {
            ((1.0 - a) * f64::from(base) + a * 255.0 * col)
                .round()
                .clamp(0.0, 255.0) as u8
        };
        *px = Rgb([blend(px[0], c[0]), blend(px[1], c[1]), blend(px[2], c[2])]);
    }
    Ok(out)
}
