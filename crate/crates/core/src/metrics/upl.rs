//! Upper performance limit: split-half agreement within an age group.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{AgeGroup, FixationRecord, GazeDataset, PerGroup, Pixel};
use crate::error::{invalid_arg, Result};
use crate::maps::{build_saliency_map, build_weighted_fixation_map, MapParams};
use crate::roc::{auc_score, NegativePolicy};
use crate::seed;

pub const DEFAULT_UPL_REPETITIONS: usize = 50;

/// Mean over `n_reps` random observer half-splits of the AUC with which the
/// first half's saliency map predicts the second half's fixations on one
/// image. With an odd observer count the predicting half is the smaller one.
pub fn upper_performance_limit(
    dataset: &GazeDataset,
    params: &MapParams,
    group: AgeGroup,
    image_id: &str,
    n_reps: usize,
    seed: u64,
) -> Result<f64> {
    let img = dataset.require_image(image_id)?;
    if n_reps == 0 {
        return Err(invalid_arg!("UPL needs at least one repetition"));
    }
    let fixations: Vec<&FixationRecord> = dataset
        .fixations_for_image(image_id)
        .filter(|f| f.group == group && params.keeps(f))
        .collect();
    // observers in dataset order, so results depend only on the seed
    let mut observers: Vec<&str> = Vec::new();
    for o in dataset.observers_in(group) {
        if fixations.iter().any(|f| f.observer_id == o.id) {
            observers.push(&o.id);
        }
    }
    if observers.len() < 2 {
        return Err(invalid_arg!(
            "UPL needs at least two {group} observers on `{image_id}`, found {}",
            observers.len()
        ));
    }
    let half = observers.len() / 2;
    let mut rng = seed::rng_for(seed, &format!("upl/{image_id}/{group}"));
    let mut total = 0.0;
    for _ in 0..n_reps {
        observers.shuffle(&mut rng);
        let (predictors, targets) = observers.split_at(half);
        let fixmap = build_weighted_fixation_map(
            fixations.iter().copied().filter(|f| predictors.contains(&f.observer_id.as_str())),
            img.width,
            img.height,
            params,
        )?;
        let sal = build_saliency_map(&fixmap, params.sigma_px)?;
        let positives: Vec<Pixel> = fixations
            .iter()
            .filter(|f| targets.contains(&f.observer_id.as_str()))
            .map(|f| f.pixel())
            .collect();
        total += auc_score(&sal, &positives, &NegativePolicy::AllNonFixated)?.value;
    }
    Ok(total / n_reps as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UplResult {
    /// Mean over scored images; `None` if no image had two observers.
    pub per_group: PerGroup<Option<f64>>,
    pub n_images: PerGroup<usize>,
    pub n_repetitions: usize,
}

/// Per-image UPL, `None` where the group has fewer than two observers.
pub fn upl_per_image(
    dataset: &GazeDataset,
    params: &MapParams,
    group: AgeGroup,
    n_reps: usize,
    seed: u64,
) -> Result<Vec<(String, Option<f64>)>> {
    dataset
        .images()
        .par_iter()
        .map(|img| {
            let n_obs = {
                let mut ids: Vec<&str> = dataset
                    .fixations_for_image(&img.id)
                    .filter(|f| f.group == group && params.keeps(f))
                    .map(|f| f.observer_id.as_str())
                    .collect();
                ids.sort_unstable();
                ids.dedup();
                ids.len()
            };
            if n_obs < 2 {
                return Ok((img.id.clone(), None));
            }
            let v = upper_performance_limit(dataset, params, group, &img.id, n_reps, seed)?;
            Ok((img.id.clone(), Some(v)))
        })
        .collect()
}

/// UPL for every group, averaged over the dataset's images.
pub fn upl_summary(dataset: &GazeDataset, params: &MapParams, n_reps: usize, seed: u64) -> Result<UplResult> {
    let mut per_group = PerGroup::default();
    let mut n_images = PerGroup::default();
    for g in AgeGroup::ALL {
        let scores: Vec<f64> = upl_per_image(dataset, params, g, n_reps, seed)?
            .into_iter()
            .filter_map(|(_, v)| v)
            .collect();
        n_images[g] = scores.len();
        per_group[g] = (!scores.is_empty()).then(|| scores.iter().sum::<f64>() / scores.len() as f64);
    }
    Ok(UplResult {
        per_group,
        n_images,
        n_repetitions: n_reps,
    })
}
