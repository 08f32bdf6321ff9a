//! Inter- and intra-individual similarity: how well one observer's saliency
//! map predicts the pooled fixations of the other observers of a group.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{AgeGroup, GazeDataset, PerGroup, Pixel, StimulusCategory};
use crate::error::{Error, Result};
use crate::maps::{build_saliency_map, build_weighted_fixation_map, MapParams};
use crate::roc::RankedMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityEntry {
    pub source: AgeGroup,
    pub target: AgeGroup,
    /// Mean over source observers of their per-image average AUC.
    pub mean_auc: f64,
    /// `(observer id, average AUC over scored images)`.
    pub per_observer: Vec<(String, f64)>,
    /// (observer, image) pairs skipped because the target pool was empty
    /// once the source observer was excluded.
    pub skipped: usize,
}

/// Source group x target group mean AUC.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    pub category: Option<StimulusCategory>,
    /// `entries[source][target]`; `None` when nothing could be scored.
    pub entries: PerGroup<PerGroup<Option<f64>>>,
}

impl SimilarityMatrix {
    pub fn get(&self, source: AgeGroup, target: AgeGroup) -> Option<f64> {
        self.entries[source][target]
    }
}

/// Per (source observer, target group): sum of AUCs, images scored, skips.
type Tally = HashMap<(usize, AgeGroup), (f64, usize, usize)>;

fn tally(dataset: &GazeDataset, params: &MapParams, sources: &[usize], targets: &[AgeGroup]) -> Result<Tally> {
    let by_image = dataset.fixations_by_image();

    let per_image: Vec<Vec<(usize, AgeGroup, Option<f64>)>> = dataset
        .images()
        .par_iter()
        .map(|img| -> Result<_> {
            let fixations: Vec<_> = by_image
                .get(img.id.as_str())
                .map(|v| v.iter().copied().filter(|f| params.keeps(f)).collect())
                .unwrap_or_default();
            let mut out = Vec::new();
            for &src in sources {
                let src_id = dataset.observers()[src].id.as_str();
                let own: Vec<_> = fixations.iter().copied().filter(|f| f.observer_id == src_id).collect();
                if own.is_empty() {
                    continue;
                }
                let fixmap = build_weighted_fixation_map(own, img.width, img.height, params)?;
                let sal = build_saliency_map(&fixmap, params.sigma_px)?;
                let ranked = RankedMap::new(&sal);
                for &target in targets {
                    let pool: Vec<Pixel> = fixations
                        .iter()
                        .filter(|f| f.group == target && f.observer_id != src_id)
                        .map(|f| f.pixel())
                        .collect();
                    if pool.is_empty() {
                        log::debug!("image `{}`: empty {target} pool without `{src_id}`", img.id);
                        out.push((src, target, None));
                        continue;
                    }
                    match ranked.auc(&pool) {
                        Ok(s) => out.push((src, target, Some(s.value))),
                        Err(Error::UndefinedScore(m)) => {
                            log::debug!("image `{}`: {m}", img.id);
                            out.push((src, target, None));
                        }
                        Err(e) => return Err(e),
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut t: Tally = HashMap::new();
    for rows in per_image {
        for (src, target, auc) in rows {
            let e = t.entry((src, target)).or_insert((0.0, 0, 0));
            match auc {
                Some(a) => {
                    e.0 += a;
                    e.1 += 1;
                }
                None => e.2 += 1,
            }
        }
    }
    Ok(t)
}

fn entry_from_tally(
    dataset: &GazeDataset,
    t: &Tally,
    sources: &[usize],
    source: AgeGroup,
    target: AgeGroup,
) -> Option<SimilarityEntry> {
    let mut per_observer = Vec::new();
    let mut skipped = 0;
    for &src in sources {
        if let Some(&(sum, n, skip)) = t.get(&(src, target)) {
            skipped += skip;
            if n > 0 {
                per_observer.push((dataset.observers()[src].id.clone(), sum / n as f64));
            }
        }
    }
    if per_observer.is_empty() {
        return None;
    }
    let mean_auc = per_observer.iter().map(|(_, a)| a).sum::<f64>() / per_observer.len() as f64;
    Some(SimilarityEntry {
        source,
        target,
        mean_auc,
        per_observer,
        skipped,
    })
}

fn group_members(dataset: &GazeDataset, group: AgeGroup) -> Vec<usize> {
    dataset
        .observers()
        .iter()
        .enumerate()
        .filter(|(_, o)| o.group == group)
        .map(|(i, _)| i)
        .collect()
}

/// Each source observer's individual saliency map scores the pooled fixations
/// of the target group (the observer itself excluded) per image; scores are
/// averaged over images per observer and then over observers.
pub fn inter_individual_similarity(
    dataset: &GazeDataset,
    params: &MapParams,
    source: AgeGroup,
    target: AgeGroup,
) -> Result<SimilarityEntry> {
    let sources = group_members(dataset, source);
    if sources.is_empty() {
        return Err(Error::InvalidArgument(format!("no {source} observers")));
    }
    if dataset.observers_in(target).next().is_none() {
        return Err(Error::InvalidArgument(format!("no {target} observers")));
    }
    let t = tally(dataset, params, &sources, &[target])?;
    entry_from_tally(dataset, &t, &sources, source, target).ok_or_else(|| {
        Error::UndefinedScore(format!("no image could score {source} against {target}"))
    })
}

/// All nine source/target combinations; each observer's map is built once.
pub fn similarity_matrix(dataset: &GazeDataset, params: &MapParams) -> Result<SimilarityMatrix> {
    let sources: Vec<usize> = (0..dataset.observers().len()).collect();
    let t = tally(dataset, params, &sources, &AgeGroup::ALL)?;
    let entries = PerGroup::from_fn(|s| {
        let members = group_members(dataset, s);
        PerGroup::from_fn(|g| entry_from_tally(dataset, &t, &members, s, g).map(|e| e.mean_auc))
    });
    let category = {
        let mut cats = dataset.images().iter().map(|i| i.category);
        match cats.next() {
            Some(c) if cats.all(|x| x == c) => Some(c),
            _ => None,
        }
    };
    Ok(SimilarityMatrix { category, entries })
}
