//! Center bias: centroid offset of a group's center map and how well that
//! map predicts the group's own fixations.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{AgeGroup, GazeDataset, ImageEntry, Pixel};
use crate::error::{invalid_arg, Error, Result};
use crate::maps::{build_center_map, group_saliency_map, MapParams};
use crate::raster::{MapKind, ScalarMap};
use crate::roc::{auc_score, NegativePolicy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupCenterBias {
    pub group: AgeGroup,
    /// Intensity-weighted mean pixel `(x, y)` of the center map.
    pub centroid: (f64, f64),
    /// Euclidean distance from the centroid to `((w-1)/2, (h-1)/2)`.
    pub distance_px: f64,
    /// Mean AUC of the group's fixations on each image against the center
    /// map of the remaining images. `None` with fewer than two images.
    pub center_auc: Option<f64>,
    pub n_images: usize,
}

/// Intensity-weighted centroid `(x, y)`.
pub fn map_centroid(map: &ScalarMap) -> Result<(f64, f64)> {
    let total = map.sum();
    if !(total > 0.0) {
        return Err(Error::UndefinedScore("centroid of an all-zero map".into()));
    }
    let w = map.width() as usize;
    let (mut sx, mut sy) = (0.0, 0.0);
    for (i, &v) in map.values().iter().enumerate() {
        sx += v * (i % w) as f64;
        sy += v * (i / w) as f64;
    }
    Ok((sx / total, sy / total))
}

pub fn center_offset(map: &ScalarMap) -> Result<f64> {
    let (cx, cy) = map_centroid(map)?;
    let mx = (f64::from(map.width()) - 1.0) / 2.0;
    let my = (f64::from(map.height()) - 1.0) / 2.0;
    Ok(((cx - mx).powi(2) + (cy - my).powi(2)).sqrt())
}

/// Center map over every image the group fixated, its centroid offset, and
/// the leave-one-image-out center-map AUC. All contributing images must share
/// dimensions.
pub fn center_bias(dataset: &GazeDataset, params: &MapParams, group: AgeGroup) -> Result<GroupCenterBias> {
    let by_image = dataset.fixations_by_image();
    let images: Vec<(&ImageEntry, Vec<Pixel>)> = dataset
        .images()
        .iter()
        .filter_map(|img| {
            let pts: Vec<Pixel> = by_image
                .get(img.id.as_str())?
                .iter()
                .filter(|f| f.group == group && params.keeps(f))
                .map(|f| f.pixel())
                .collect();
            (!pts.is_empty()).then_some((img, pts))
        })
        .collect();
    let Some((first, _)) = images.first() else {
        return Err(invalid_arg!("no {group} fixations to build a center map from"));
    };
    let dims = (first.width, first.height);
    if let Some((img, _)) = images.iter().find(|(i, _)| (i.width, i.height) != dims) {
        return Err(invalid_arg!(
            "center map needs equal image sizes; `{}` is {}x{}, expected {}x{}",
            img.id,
            img.width,
            img.height,
            dims.0,
            dims.1
        ));
    }

    let maps: Vec<ScalarMap> = images
        .par_iter()
        .map(|(img, _)| group_saliency_map(dataset, img, group, params))
        .collect::<Result<_>>()?;
    let center = build_center_map(&maps)?;
    let centroid = map_centroid(&center)?;
    let distance_px = center_offset(&center)?;

    let center_auc = if maps.len() >= 2 {
        let scores: Vec<f64> = (0..maps.len())
            .into_par_iter()
            .map(|k| {
                let mut acc = vec![0.0; maps[0].len()];
                for (j, m) in maps.iter().enumerate() {
                    if j != k {
                        acc.iter_mut().zip(m.values()).for_each(|(a, v)| *a += v);
                    }
                }
                let loo = ScalarMap::new(dims.0, dims.1, acc, MapKind::Counts)?;
                Ok(auc_score(&loo, &images[k].1, &NegativePolicy::AllNonFixated)?.value)
            })
            .collect::<Result<_>>()?;
        Some(scores.iter().sum::<f64>() / scores.len() as f64)
    } else {
        None
    };

    Ok(GroupCenterBias {
        group,
        centroid,
        distance_px,
        center_auc,
        n_images: maps.len(),
    })
}
