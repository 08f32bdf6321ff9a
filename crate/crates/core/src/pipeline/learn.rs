//! Training and evaluation over datasets held in memory. Features come from
//! a caller-supplied extractor so stimuli can live on disk or in memory.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{AgeGroup, GazeDataset, ImageEntry, PerGroup, Pixel, StimulusCategory};
use crate::error::{invalid_arg, Error, Result};
use crate::features::{
    assemble_features, center_prior_channel, ChannelManifest, intensity_contrast_map, FeatureChannelSet, FeatureTensor, ScaleSelection,
};
use crate::learner::{blend_center, predict, sample_pixels, train, AgeModel, SampleOrigin, SamplingParams, SvmConfig};
use crate::maps::{build_center_map, group_saliency_map, MapParams};
use crate::metrics::upl_per_image;
use crate::raster::ScalarMap;
use crate::roc::{auc_score, NegativePolicy};

/// Feature channels for one stimulus.
pub type Extractor<'a> = dyn Fn(&ImageEntry) -> Result<FeatureChannelSet> + Sync + 'a;

#[derive(Debug, Clone)]
pub struct LearnSettings {
    pub map_params: MapParams,
    pub scales: ScaleSelection,
    pub sampling: SamplingParams,
    pub svm: SvmConfig,
    pub center_alpha: PerGroup<f64>,
    pub seed: u64,
}

fn group_pixels(ds: &GazeDataset, img: &ImageEntry, group: AgeGroup, params: &MapParams) -> Vec<Pixel> {
    ds.fixations_for_image(&img.id)
        .filter(|f| f.group == group && params.keeps(f))
        .map(|f| f.pixel())
        .collect()
}

/// One model per requested group, trained on samples pooled over every
/// training image the group looked at.
pub fn train_models(
    train_set: &GazeDataset,
    extract: &Extractor<'_>,
    s: &LearnSettings,
    groups: &[AgeGroup],
) -> Result<Vec<AgeModel>> {
    s.scales.validate()?;
    let per_image: Vec<Vec<(AgeGroup, ChannelManifest, Vec<_>)>> = train_set
        .images()
        .par_iter()
        .map(|img| -> Result<_> {
            let mut out = Vec::new();
            let mut set = None;
            for &g in groups {
                if group_pixels(train_set, img, g, &s.map_params).is_empty() {
                    continue;
                }
                if set.is_none() {
                    set = Some(extract(img)?);
                }
                let sal = group_saliency_map(train_set, img, g, &s.map_params)?;
                let tensor = assemble_features(set.as_ref().unwrap(), &s.scales, g)?;
                let origin = SampleOrigin {
                    image_id: &img.id,
                    group: g,
                };
                let samples = sample_pixels(&sal, &tensor, &s.sampling, s.seed, origin)?;
                out.push((g, tensor.manifest().clone(), samples));
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    groups
        .iter()
        .map(|&g| {
            let mut manifest = None;
            let mut samples = Vec::new();
            for (gg, t, smp) in per_image.iter().flatten() {
                if *gg != g {
                    continue;
                }
                match &manifest {
                    None => manifest = Some(t.clone()),
                    Some(m) if m.hash() != t.hash() => {
                        return Err(Error::Validation(format!(
                            "{g}: training images disagree on the channel set (image `{}`)",
                            smp.first().map(|x| x.image_id.as_str()).unwrap_or("?")
                        )));
                    }
                    _ => {}
                }
                samples.extend(smp.iter().cloned());
            }
            let manifest = manifest.ok_or_else(|| invalid_arg!("no {g} fixations on any training image"))?;
            let mut model = train(g, &manifest, &samples, &s.svm, s.seed)?;
            model.center_alpha = s.center_alpha[g];
            Ok(model)
        })
        .collect()
}

/// Mean saliency map of each group over the training images it looked at;
/// `None` when there are none or the stimuli differ in size.
pub fn training_center_maps(train_set: &GazeDataset, params: &MapParams) -> Result<PerGroup<Option<ScalarMap>>> {
    let dims: Vec<(u32, u32)> = train_set.images().iter().map(|i| (i.width, i.height)).collect();
    let uniform = dims.windows(2).all(|w| w[0] == w[1]);
    PerGroup::try_from_fn(|g| {
        if !uniform {
            return Ok(None);
        }
        let maps: Vec<ScalarMap> = train_set
            .images()
            .par_iter()
            .filter(|img| !group_pixels(train_set, img, g, params).is_empty())
            .map(|img| group_saliency_map(train_set, img, g, params))
            .collect::<Result<_>>()?;
        if maps.is_empty() {
            return Ok(None);
        }
        build_center_map(&maps).map(Some)
    })
}

/// Picks the model's channels out of `set` in manifest order.
pub fn tensor_for_model(set: &FeatureChannelSet, model: &AgeModel) -> Result<FeatureTensor> {
    let maps: Vec<&ScalarMap> = model
        .manifest
        .channels
        .iter()
        .map(|spec| {
            set.get(&spec.name)
                .map(|c| &c.map)
                .ok_or_else(|| invalid_arg!("{} model needs channel `{}`, which was not extracted", model.group, spec.name))
        })
        .collect::<Result<_>>()?;
    let (w, h) = set.dims();
    FeatureTensor::from_channels(w, h, &maps, model.manifest.clone())
}

/// Center-blended prediction of `model` for one stimulus.
pub fn predict_blended(set: &FeatureChannelSet, model: &AgeModel, center: Option<&ScalarMap>) -> Result<ScalarMap> {
    let tensor = tensor_for_model(set, model)?;
    let pred = predict(model, &tensor)?;
    if pred.degenerate {
        log::warn!("{} model gives a constant map", model.group);
    }
    let (w, h) = set.dims();
    let center = match center {
        Some(c) if c.dims() == (w, h) => c.clone(),
        _ => center_prior_channel(w, h)?,
    };
    blend_center(&pred.map, &center, model.center_alpha)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageScore {
    pub image_id: String,
    pub category: StimulusCategory,
    pub group: AgeGroup,
    pub model: f64,
    pub intensity_contrast: f64,
    pub center_prior: f64,
    pub upl: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    /// `None` pools every category.
    pub category: Option<StimulusCategory>,
    pub group: AgeGroup,
    pub model: f64,
    pub intensity_contrast: f64,
    pub center_prior: f64,
    pub upl: Option<f64>,
    pub n_images: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub per_image: Vec<ImageScore>,
    pub table: Vec<EvalRow>,
}

impl Evaluation {
    pub fn row(&self, category: Option<StimulusCategory>, group: AgeGroup) -> Option<&EvalRow> {
        self.table.iter().find(|r| r.category == category && r.group == group)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EvalSettings {
    pub map_params: MapParams,
    pub upl_repetitions: usize,
    pub upl_seed: u64,
}

/// AUC of each model and of the two baselines on the group's own
/// fixations, plus the group's split-half limit, per test image.
pub fn evaluate(
    test_set: &GazeDataset,
    extract: &Extractor<'_>,
    models: &[AgeModel],
    centers: &PerGroup<Option<ScalarMap>>,
    s: &EvalSettings,
) -> Result<Evaluation> {
    if test_set.images().is_empty() {
        return Err(invalid_arg!("the test split is empty"));
    }
    if models.is_empty() {
        return Err(invalid_arg!("no models to evaluate"));
    }
    let params = &s.map_params;
    let negatives = NegativePolicy::AllNonFixated;
    let scored: Vec<Vec<ImageScore>> = test_set
        .images()
        .par_iter()
        .map(|img| -> Result<_> {
            let todo: Vec<(&AgeModel, Vec<Pixel>)> = models
                .iter()
                .map(|m| (m, group_pixels(test_set, img, m.group, params)))
                .filter(|(_, px)| !px.is_empty())
                .collect();
            if todo.is_empty() {
                return Ok(Vec::new());
            }
            let set = extract(img)?;
            let ic = intensity_contrast_map(&set)?;
            let cp = center_prior_channel(img.width, img.height)?;
            todo.into_iter()
                .map(|(m, px)| {
                    let blended = predict_blended(&set, m, centers[m.group].as_ref())?;
                    Ok(ImageScore {
                        image_id: img.id.clone(),
                        category: img.category,
                        group: m.group,
                        model: auc_score(&blended, &px, &negatives)?.value,
                        intensity_contrast: auc_score(&ic, &px, &negatives)?.value,
                        center_prior: auc_score(&cp, &px, &negatives)?.value,
                        upl: None,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut per_image: Vec<ImageScore> = scored.into_iter().flatten().collect();

    for m in models {
        let upl: BTreeMap<String, Option<f64>> =
            upl_per_image(test_set, params, m.group, s.upl_repetitions, s.upl_seed)?
                .into_iter()
                .collect();
        for sc in per_image.iter_mut().filter(|sc| sc.group == m.group) {
            sc.upl = upl.get(&sc.image_id).copied().flatten();
        }
    }
    if per_image.is_empty() {
        return Err(invalid_arg!("no test image has fixations from the evaluated groups"));
    }

    let mut table = Vec::new();
    let cats: Vec<Option<StimulusCategory>> = StimulusCategory::ALL
        .iter()
        .filter(|c| per_image.iter().any(|s| s.category == **c))
        .map(|c| Some(*c))
        .chain([None])
        .collect();
    for cat in cats {
        for g in AgeGroup::ALL {
            let rows: Vec<&ImageScore> = per_image
                .iter()
                .filter(|s| s.group == g && cat.is_none_or(|c| s.category == c))
                .collect();
            if rows.is_empty() {
                continue;
            }
            let n = rows.len() as f64;
            let mean = |f: fn(&ImageScore) -> f64| rows.iter().map(|s| f(s)).sum::<f64>() / n;
            let upls: Vec<f64> = rows.iter().filter_map(|s| s.upl).collect();
            table.push(EvalRow {
                category: cat,
                group: g,
                model: mean(|s| s.model),
                intensity_contrast: mean(|s| s.intensity_contrast),
                center_prior: mean(|s| s.center_prior),
                upl: (!upls.is_empty()).then(|| upls.iter().sum::<f64>() / upls.len() as f64),
                n_images: rows.len(),
            });
        }
    }
    Ok(Evaluation { per_image, table })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{extract_channels, FeatureOptions};
    use crate::synth::{generate_cohort, CohortConfig, SyntheticCohort};
    use crate::data::split_train_test;

    fn cohort() -> SyntheticCohort {
        generate_cohort(&CohortConfig {
            width: 96,
            height: 72,
            n_images: 9,
            group_sizes: PerGroup {
                children: 4,
                adults: 4,
                elderly: 4,
            },
            fixations_per_image: 8,
            n_blobs: 3,
            ..CohortConfig::default()
        })
        .unwrap()
    }

    fn extractor(c: &SyntheticCohort) -> impl Fn(&ImageEntry) -> Result<FeatureChannelSet> + Sync + '_ {
        move |e: &ImageEntry| {
            let img = c.images.iter().find(|i| i.id == e.id).unwrap();
            extract_channels(&img.stimulus.image, Some(&img.stimulus.depth), &[], &FeatureOptions::default())
        }
    }

    fn settings(c: &SyntheticCohort) -> LearnSettings {
        LearnSettings {
            map_params: MapParams::with_sigma(c.config.sigma_px()),
            scales: ScaleSelection::default(),
            sampling: SamplingParams::default(),
            svm: SvmConfig::default(),
            center_alpha: PerGroup::from_fn(|_| 0.2),
            seed: 5,
        }
    }

    #[test]
    fn train_then_evaluate_end_to_end() {
        let c = cohort();
        let (tr, te) = split_train_test(&c.dataset, 6, 1).unwrap();
        let ex = extractor(&c);
        let s = settings(&c);
        let models = train_models(&tr, &ex, &s, &AgeGroup::ALL).unwrap();
        assert_eq!(models.len(), 3);
        // children keep only scale-3 channels
        assert!(models[0].manifest.len() < models[1].manifest.len());
        assert!(models.iter().all(|m| m.center_alpha == 0.2));
        let centers = training_center_maps(&tr, &s.map_params).unwrap();
        assert!(centers.iter().all(|(_, c)| c.is_some()));
        let es = EvalSettings {
            map_params: s.map_params,
            upl_repetitions: 5,
            upl_seed: 3,
        };
        let ev = evaluate(&te, &ex, &models, &centers, &es).unwrap();
        assert_eq!(ev.per_image.len(), 3 * 3);
        for r in &ev.table {
            for v in [r.model, r.intensity_contrast, r.center_prior, r.upl.unwrap()] {
                assert!((0.0..=1.0).contains(&v));
            }
        }
        let all = ev.row(None, AgeGroup::Adults).unwrap();
        assert_eq!(all.n_images, 3);
        assert_eq!(ev.table.len(), 4 * 3);
        let again = evaluate(&te, &ex, &models, &centers, &es).unwrap();
        assert_eq!(ev, again);
    }

    #[test]
    fn empty_splits_and_groups_are_errors() {
        let c = cohort();
        let ex = extractor(&c);
        let s = settings(&c);
        let empty = c.dataset.subset(|_| false);
        assert!(train_models(&empty, &ex, &s, &[AgeGroup::Adults]).is_err());
        let models = train_models(&c.dataset, &ex, &s, &[AgeGroup::Adults]).unwrap();
        let es = EvalSettings {
            map_params: s.map_params,
            upl_repetitions: 2,
            upl_seed: 0,
        };
        assert!(evaluate(&empty, &ex, &models, &PerGroup::default(), &es).is_err());
    }

    #[test]
    fn missing_channels_are_named() {
        let c = cohort();
        let ex = extractor(&c);
        let models = train_models(&c.dataset, &ex, &settings(&c), &[AgeGroup::Elderly]).unwrap();
        let img = &c.images[0];
        let no_depth = extract_channels(&img.stimulus.image, None, &[], &FeatureOptions::default()).unwrap();
        let err = tensor_for_model(&no_depth, &models[0]).unwrap_err().to_string();
        assert!(err.contains("depth"), "{err}");
    }
}
