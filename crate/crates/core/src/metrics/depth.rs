//! Depth bias: share of fixations on the most salient foreground and
//! background regions of each image.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{AgeGroup, GazeDataset, PerGroup, Pixel};
use crate::error::{invalid_arg, Result};
use crate::maps::{GroupMapSet, MapParams};
use crate::raster::{RegionLabel, RegionMask, ScalarMap};

/// Default salient-area thresholds, percent of pixels.
pub const DEFAULT_THRESHOLDS: [f64; 2] = [5.0, 10.0];

#[derive(Debug, Clone, PartialEq)]
pub struct SalientRegion {
    /// Pixel indices in scan order.
    pub pixels: Vec<usize>,
    pub label: RegionLabel,
}

/// 8-connected components of the top-`t` percent pixels of a map.
#[derive(Debug, Clone)]
pub struct SalientRegionSet {
    width: u32,
    height: u32,
    regions: Vec<SalientRegion>,
    region_of: Vec<Option<u32>>,
    /// The percentile cut fell inside a run of tied values and was resolved
    /// by scan order.
    pub degenerate: bool,
}

impl SalientRegionSet {
    pub fn regions(&self) -> &[SalientRegion] {
        &self.regions
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn selected_count(&self) -> usize {
        self.regions.iter().map(|r| r.pixels.len()).sum()
    }

    /// Label of the region covering `p`, or `None` outside the salient area.
    pub fn label_at(&self, p: Pixel) -> Option<RegionLabel> {
        let i = p.y as usize * self.width as usize + p.x as usize;
        self.region_of[i].map(|r| self.regions[r as usize].label)
    }
}

pub fn threshold_salient_regions(
    combined: &ScalarMap,
    t_pct: f64,
    mask: &RegionMask,
) -> Result<SalientRegionSet> {
    if !(t_pct > 0.0 && t_pct < 100.0) {
        return Err(invalid_arg!("threshold must lie in (0, 100), got {t_pct}"));
    }
    if combined.dims() != mask.dims() {
        return Err(invalid_arg!(
            "mask {:?} does not match map {:?}",
            mask.dims(),
            combined.dims()
        ));
    }
    let n = combined.len();
    let k = ((n as f64 * t_pct / 100.0).round() as usize).clamp(1, n);
    let vals = combined.values();
    let mut order: Vec<usize> = (0..n).collect();
    // stable: ties resolve in scan order
    order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
    let degenerate = k < n && vals[order[k - 1]] == vals[order[k]];

    let mut selected = vec![false; n];
    for &i in &order[..k] {
        selected[i] = true;
    }

    let (w, h) = (combined.width() as i64, combined.height() as i64);
    let mut region_of: Vec<Option<u32>> = vec![None; n];
    let mut regions = Vec::new();
    for start in 0..n {
        if !selected[start] || region_of[start].is_some() {
            continue;
        }
        let id = regions.len() as u32;
        let mut stack = vec![start];
        let mut pixels = Vec::new();
        region_of[start] = Some(id);
        while let Some(i) = stack.pop() {
            pixels.push(i);
            let (x, y) = ((i as i64) % w, (i as i64) / w);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if (dx, dy) == (0, 0) || nx < 0 || ny < 0 || nx >= w || ny >= h {
                        continue;
                    }
                    let j = (ny * w + nx) as usize;
                    if selected[j] && region_of[j].is_none() {
                        region_of[j] = Some(id);
                        stack.push(j);
                    }
                }
            }
        }
        pixels.sort_unstable();
        let (mut fg, mut bg) = (0usize, 0usize);
        for &i in &pixels {
            match mask.labels()[i] {
                RegionLabel::Foreground => fg += 1,
                RegionLabel::Background => bg += 1,
                RegionLabel::Unlabeled => {}
            }
        }
        let label = match fg.cmp(&bg) {
            std::cmp::Ordering::Greater => RegionLabel::Foreground,
            std::cmp::Ordering::Less => RegionLabel::Background,
            std::cmp::Ordering::Equal => RegionLabel::Unlabeled,
        };
        regions.push(SalientRegion { pixels, label });
    }
    if degenerate {
        log::debug!("salient threshold {t_pct}% cuts through tied values");
    }
    Ok(SalientRegionSet {
        width: combined.width(),
        height: combined.height(),
        regions,
        region_of,
        degenerate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthSplit {
    pub foreground_pct: f64,
    pub background_pct: f64,
}

/// Percentages of `fixations` inside foreground and background regions.
/// `None` when there are no fixations.
pub fn fixation_depth_split(
    regions: &SalientRegionSet,
    fixations: impl IntoIterator<Item = Pixel>,
) -> Option<DepthSplit> {
    let (mut total, mut fg, mut bg) = (0usize, 0usize, 0usize);
    for p in fixations {
        total += 1;
        match regions.label_at(p) {
            Some(RegionLabel::Foreground) => fg += 1,
            Some(RegionLabel::Background) => bg += 1,
            _ => {}
        }
    }
    (total > 0).then(|| DepthSplit {
        foreground_pct: 100.0 * fg as f64 / total as f64,
        background_pct: 100.0 * bg as f64 / total as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthBiasScore {
    pub foreground_pct: f64,
    pub background_pct: f64,
    pub n_images: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthBiasResult {
    pub thresholds: Vec<f64>,
    /// One entry per threshold; `None` for a group with no scored image.
    pub per_threshold: Vec<PerGroup<Option<DepthBiasScore>>>,
}

impl DepthBiasResult {
    pub fn at(&self, t_pct: f64) -> Option<&PerGroup<Option<DepthBiasScore>>> {
        self.thresholds
            .iter()
            .position(|&t| t == t_pct)
            .map(|i| &self.per_threshold[i])
    }
}

/// Averages per-image foreground/background fixation percentages over every
/// image that has a region mask. Images where a group has no fixations are
/// left out of that group's average.
pub fn depth_bias(
    dataset: &GazeDataset,
    params: &MapParams,
    masks: &HashMap<String, RegionMask>,
    thresholds: &[f64],
) -> Result<DepthBiasResult> {
    let images: Vec<_> = dataset
        .images()
        .iter()
        .filter(|img| masks.contains_key(&img.id))
        .collect();
    let by_image = dataset.fixations_by_image();

    let per_image: Vec<Vec<PerGroup<Option<DepthSplit>>>> = images
        .par_iter()
        .map(|img| -> Result<_> {
            let maps = GroupMapSet::build(dataset, img, params)?;
            let fixations = by_image.get(img.id.as_str()).cloned().unwrap_or_default();
            thresholds
                .iter()
                .map(|&t| {
                    let regions = threshold_salient_regions(&maps.combined, t, &masks[&img.id])?;
                    Ok(PerGroup::from_fn(|g| {
                        let split = fixation_depth_split(
                            &regions,
                            fixations
                                .iter()
                                .filter(|f| f.group == g && params.keeps(f))
                                .map(|f| f.pixel()),
                        );
                        if split.is_none() {
                            log::debug!("image `{}` has no {g} fixations; excluded", img.id);
                        }
                        split
                    }))
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let per_threshold = (0..thresholds.len())
        .map(|ti| {
            PerGroup::from_fn(|g: AgeGroup| {
                let splits: Vec<DepthSplit> = per_image.iter().filter_map(|img| img[ti][g]).collect();
                (!splits.is_empty()).then(|| {
                    let n = splits.len() as f64;
                    DepthBiasScore {
                        foreground_pct: splits.iter().map(|s| s.foreground_pct).sum::<f64>() / n,
                        background_pct: splits.iter().map(|s| s.background_pct).sum::<f64>() / n,
                        n_images: splits.len(),
                    }
                })
            })
        })
        .collect();
    Ok(DepthBiasResult {
        thresholds: thresholds.to_vec(),
        per_threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::MapKind;

    fn ramp(n: u32) -> ScalarMap {
        ScalarMap::normalized_from(n, 1, (0..n).map(f64::from).collect()).unwrap()
    }

    #[test]
    fn exact_percentile_count() {
        let m = ScalarMap::normalized_from(10, 10, (0..100).map(|i| f64::from((i * 37) % 100)).collect()).unwrap();
        let r = threshold_salient_regions(&m, 5.0, &RegionMask::unlabeled(10, 10)).unwrap();
        assert_eq!(r.selected_count(), 5);
        assert!(!r.degenerate);
        let r = threshold_salient_regions(&ramp(100), 10.0, &RegionMask::unlabeled(100, 1)).unwrap();
        assert_eq!(r.regions().len(), 1);
        assert_eq!(r.regions()[0].pixels, (90..100).collect::<Vec<_>>());
    }

    #[test]
    fn constant_map_takes_scan_order_and_flags() {
        let m = ScalarMap::new(10, 10, vec![0.5; 100], MapKind::Counts).unwrap();
        let r = threshold_salient_regions(&m, 5.0, &RegionMask::unlabeled(10, 10)).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.regions().len(), 1);
        assert_eq!(r.regions()[0].pixels, vec![0, 1, 2, 3, 4]);
    }

    fn two_blob_scene() -> (ScalarMap, RegionMask) {
        // two 3x3 blobs far apart on a 20x10 canvas
        let (w, h) = (20u32, 10u32);
        let mut v = vec![0.0; (w * h) as usize];
        let mut mask = RegionMask::unlabeled(w, h);
        for y in 3..6 {
            for x in 2..5 {
                v[(y * w + x) as usize] = 1.0;
                mask.set(x, y, RegionLabel::Foreground);
            }
            for x in 14..17 {
                v[(y * w + x) as usize] = 0.9;
                mask.set(x, y, RegionLabel::Background);
            }
        }
        (ScalarMap::new(w, h, v, MapKind::Normalized).unwrap(), mask)
    }

    #[test]
    fn two_blobs_get_their_labels() {
        let (m, mask) = two_blob_scene();
        // 18 of 200 pixels = 9%
        let r = threshold_salient_regions(&m, 9.0, &mask).unwrap();
        let labels: Vec<_> = r.regions().iter().map(|r| r.label).collect();
        assert_eq!(labels, vec![RegionLabel::Foreground, RegionLabel::Background]);
        assert_eq!(r.label_at(Pixel::new(3, 4)), Some(RegionLabel::Foreground));
        assert_eq!(r.label_at(Pixel::new(15, 4)), Some(RegionLabel::Background));
        assert_eq!(r.label_at(Pixel::new(10, 4)), None);
    }

    #[test]
    fn diagonal_neighbours_join() {
        let mut v = vec![0.0; 16];
        v[0] = 1.0;
        v[5] = 1.0;
        v[15] = 1.0;
        let m = ScalarMap::new(4, 4, v, MapKind::Normalized).unwrap();
        let r = threshold_salient_regions(&m, 18.75, &RegionMask::unlabeled(4, 4)).unwrap();
        assert_eq!(r.regions().len(), 2);
        assert_eq!(r.regions()[0].pixels, vec![0, 5]);
    }

    #[test]
    fn split_percentages() {
        let (m, mask) = two_blob_scene();
        let r = threshold_salient_regions(&m, 9.0, &mask).unwrap();
        let fg = Pixel::new(3, 3);
        let bg = Pixel::new(15, 5);
        let s = fixation_depth_split(&r, [fg, fg, fg]).unwrap();
        assert_eq!((s.foreground_pct, s.background_pct), (100.0, 0.0));
        let s = fixation_depth_split(&r, [fg, bg, fg, bg]).unwrap();
        assert_eq!((s.foreground_pct, s.background_pct), (50.0, 50.0));
        let s = fixation_depth_split(&r, [fg, Pixel::new(10, 0)]).unwrap();
        assert!(s.foreground_pct + s.background_pct <= 100.0);
        assert!(fixation_depth_split(&r, []).is_none());
    }

    #[test]
    fn argument_checks() {
        let (m, mask) = two_blob_scene();
        assert!(threshold_salient_regions(&m, 0.0, &mask).is_err());
        assert!(threshold_salient_regions(&m, 100.0, &mask).is_err());
        assert!(threshold_salient_regions(&m, 5.0, &RegionMask::unlabeled(3, 3)).is_err());
    }
}
