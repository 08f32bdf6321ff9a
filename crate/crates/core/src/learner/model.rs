//! Per-group linear saliency model: training, prediction, center blending
//! and JSON persistence.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sampling::TrainingSample;
use super::svm::{fit, SvmConfig};
use crate::data::{AgeGroup, PerGroup, Pixel};
use crate::error::{invalid_arg, Error, Result};
use crate::features::{ChannelManifest, FeatureTensor};
use crate::raster::{MapKind, ScalarMap};
use crate::roc::{auc_score, NegativePolicy};

/// Per-channel mean and standard deviation of the training samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: Vec<f64>,
    /// Constant channels get 1 so they standardize to 0.
    pub std: Vec<f64>,
}

impl Standardization {
    pub fn fit(rows: &[&[f64]]) -> Self {
        let d = rows.first().map_or(0, |r| r.len());
        let n = rows.len() as f64;
        let mut mean = vec![0.0; d];
        for r in rows {
            mean.iter_mut().zip(*r).for_each(|(m, v)| *m += v / n);
        }
        let mut var = vec![0.0; d];
        for r in rows {
            for ((s, v), m) in var.iter_mut().zip(*r).zip(&mean) {
                *s += (v - m).powi(2) / n;
            }
        }
        let std = var.into_iter().map(|v| if v.sqrt() > 1e-12 { v.sqrt() } else { 1.0 }).collect();
        Standardization { mean, std }
    }

    pub fn identity(d: usize) -> Self {
        Standardization {
            mean: vec![0.0; d],
            std: vec![1.0; d],
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainDiagnostics {
    pub objective: Vec<f64>,
    pub final_loss: f64,
    pub accuracy: f64,
    pub n_samples: usize,
    pub n_positive: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgeModel {
    pub group: AgeGroup,
    pub manifest: ChannelManifest,
    pub manifest_hash: String,
    /// Weights on standardized features.
    pub weights: Vec<f64>,
    pub bias: f64,
    pub standardization: Standardization,
    pub center_alpha: f64,
    pub lambda: f64,
    pub seed: u64,
    pub diagnostics: Option<TrainDiagnostics>,
}

/// Center blend weights used when none are configured.
pub fn default_center_alpha() -> PerGroup<f64> {
    PerGroup {
        children: 0.3,
        adults: 0.1,
        elderly: 0.2,
    }
}

impl AgeModel {
    /// A model from explicit parameters, with no training diagnostics.
    pub fn from_parts(
        group: AgeGroup,
        manifest: ChannelManifest,
        weights: Vec<f64>,
        bias: f64,
        standardization: Standardization,
    ) -> Result<Self> {
        if weights.len() != manifest.len()
            || standardization.mean.len() != manifest.len()
            || standardization.std.len() != manifest.len()
        {
            return Err(invalid_arg!(
                "{} weights / {} standardization entries for {} channels",
                weights.len(),
                standardization.mean.len(),
                manifest.len()
            ));
        }
        Ok(AgeModel {
            group,
            manifest_hash: manifest.hash(),
            manifest,
            weights,
            bias,
            standardization,
            center_alpha: default_center_alpha()[group],
            lambda: 0.0,
            seed: 0,
            diagnostics: None,
        })
    }

    /// Weights and bias expressed on unstandardized features.
    pub fn raw_weights(&self) -> (Vec<f64>, f64) {
        let w: Vec<f64> = self
            .weights
            .iter()
            .zip(&self.standardization.std)
            .map(|(w, s)| w / s)
            .collect();
        let b = self.bias - w.iter().zip(&self.standardization.mean).map(|(w, m)| w * m).sum::<f64>();
        (w, b)
    }

    pub fn decision(&self, x: &[f64]) -> f64 {
        self.standardization
            .apply(x)
            .iter()
            .zip(&self.weights)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            + self.bias
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let s = serde_json::to_string_pretty(self)?;
        fs::write(path, s + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: AgeModel = serde_json::from_str(&s)?;
        if m.manifest.hash() != m.manifest_hash {
            return Err(Error::Validation(format!(
                "{}: manifest hash does not match its channel list",
                path.display()
            )));
        }
        Ok(m)
    }
}

/// Fits a group model on pooled samples. Features are standardized with
/// statistics of these samples, which the model keeps for prediction.
pub fn train(
    group: AgeGroup,
    manifest: &ChannelManifest,
    samples: &[TrainingSample],
    cfg: &SvmConfig,
    seed: u64,
) -> Result<AgeModel> {
    if samples.len() < 2 {
        return Err(invalid_arg!("need at least 2 training samples, got {}", samples.len()));
    }
    if let Some(s) = samples.iter().find(|s| s.features.len() != manifest.len()) {
        return Err(invalid_arg!(
            "sample from `{}` has {} features, manifest has {}",
            s.image_id,
            s.features.len(),
            manifest.len()
        ));
    }
    if samples.iter().any(|s| s.features.iter().any(|v| !v.is_finite())) {
        return Err(invalid_arg!("non-finite feature value in training samples"));
    }
    let rows: Vec<&[f64]> = samples.iter().map(|s| s.features.as_slice()).collect();
    let standardization = Standardization::fit(&rows);
    let x: Vec<Vec<f64>> = rows.iter().map(|r| standardization.apply(r)).collect();
    let y: Vec<f64> = samples.iter().map(|s| f64::from(s.label)).collect();
    let f = fit(&x, &y, cfg)?;
    log::debug!(
        "{group}: {} samples, loss {:.4} after {} iterations, accuracy {:.3}",
        samples.len(),
        f.objective.last().unwrap(),
        f.objective.len() - 1,
        f.accuracy
    );
    let mut model = AgeModel::from_parts(group, manifest.clone(), f.weights, f.bias, standardization)?;
    model.lambda = cfg.lambda;
    model.seed = seed;
    model.diagnostics = Some(TrainDiagnostics {
        final_loss: *f.objective.last().unwrap(),
        objective: f.objective,
        accuracy: f.accuracy,
        n_samples: samples.len(),
        n_positive: y.iter().filter(|v| **v > 0.0).count(),
    });
    Ok(model)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// `w.f + b` per pixel, before normalization.
    pub raw: Vec<f64>,
    /// Min-max normalized to `[0, 1]`.
    pub map: ScalarMap,
    /// Set when the raw scores are constant and `map` is all zero.
    pub degenerate: bool,
}

/// Per-pixel linear score, then min-max normalization.
pub fn predict(model: &AgeModel, features: &FeatureTensor) -> Result<Prediction> {
    if features.n_channels() != model.weights.len() {
        return Err(invalid_arg!(
            "{} model expects {} channels, tensor has {}",
            model.group,
            model.weights.len(),
            features.n_channels()
        ));
    }
    let hash = features.manifest().hash();
    if hash != model.manifest_hash {
        return Err(invalid_arg!(
            "{} model was trained on channel manifest {}, features have {}",
            model.group,
            &model.manifest_hash[..12],
            &hash[..12]
        ));
    }
    let n = features.n_pixels();
    let mut raw = vec![model.bias; n];
    for c in 0..features.n_channels() {
        let k = model.weights[c] / model.standardization.std[c];
        let off = k * model.standardization.mean[c];
        if k == 0.0 {
            continue;
        }
        raw.par_iter_mut()
            .zip(features.channel(c).par_iter())
            .for_each(|(r, v)| *r += k * v - off);
    }
    let (lo, hi) = raw
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let degenerate = !(hi - lo > 1e-12 * hi.abs().max(1.0));
    let values = if degenerate {
        vec![0.0; n]
    } else {
        raw.iter().map(|v| (v - lo) / (hi - lo)).collect()
    };
    let map = ScalarMap::new(features.width(), features.height(), values, MapKind::Normalized)?;
    Ok(Prediction { raw, map, degenerate })
}

/// `(1 - alpha) * prediction + alpha * center`, max-normalized.
pub fn blend_center(prediction: &ScalarMap, center: &ScalarMap, alpha: f64) -> Result<ScalarMap> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(invalid_arg!("center blend weight {alpha} is outside [0, 1]"));
    }
    prediction.ensure_same_dims(center)?;
    let v = prediction
        .values()
        .iter()
        .zip(center.values())
        .map(|(p, c)| (1.0 - alpha) * p + alpha * c)
        .collect();
    Ok(ScalarMap::new(prediction.width(), prediction.height(), v, MapKind::Counts)?.max_normalized())
}

/// Blend weight from `grid` with the best mean AUC over validation images
/// given as `(prediction, center, fixations)`. Ties go to the smaller weight.
pub fn tune_center_alpha(validation: &[(ScalarMap, ScalarMap, Vec<Pixel>)], grid: &[f64]) -> Result<f64> {
    if validation.is_empty() || grid.is_empty() {
        return Err(invalid_arg!("alpha tuning needs validation images and a grid"));
    }
    let mut best = (f64::NEG_INFINITY, grid[0]);
    for &a in grid {
        let mut total = 0.0;
        for (p, c, fix) in validation {
            total += auc_score(&blend_center(p, c, a)?, fix, &NegativePolicy::AllNonFixated)?.value;
        }
        let mean = total / validation.len() as f64;
        if mean > best.0 {
            best = (mean, a);
        }
    }
    Ok(best.1)
}
