use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{AgeGroup, GazeDataset, PerGroup};
use crate::error::{Error, Result};
use crate::features::{FeatureOptions, ScaleSelection};
use crate::learner::{default_center_alpha, SamplingParams, SvmConfig};
use crate::maps::{MapParams, DEFAULT_SIGMA_PX};
use crate::metrics::{DEFAULT_ENTROPY_BINS, DEFAULT_THRESHOLDS, DEFAULT_UPL_REPETITIONS};
use crate::seed::derive_seed;
use crate::synth::CohortConfig;

/// Width of the display the default kernel width refers to.
const REFERENCE_WIDTH: f64 = 1280.0;

/// Named seeds; every random draw of a run comes from one of these.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Seeds {
    pub split: u64,
    pub sampling: u64,
    pub upl: u64,
    pub synth: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Seeds {
            split: 1,
            sampling: 2,
            upl: 3,
            synth: 4,
        }
    }
}

impl Seeds {
    pub fn from_master(seed: u64) -> Self {
        Seeds {
            split: derive_seed(seed, "split"),
            sampling: derive_seed(seed, "sampling"),
            upl: derive_seed(seed, "upl"),
            synth: derive_seed(seed, "synth"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Dataset manifest (JSON).
    pub dataset: PathBuf,
    pub out_dir: PathBuf,
    /// Saliency kernel width; when unset, 37 px scaled by the widest
    /// stimulus over 1280.
    pub sigma_px: Option<f64>,
    pub entropy_bins: usize,
    /// Salient-region thresholds in percent of the combined map's maximum.
    pub t1: f64,
    pub t2: f64,
    pub upl_repetitions: usize,
    /// Training images; defaults to 120 of every 192.
    pub n_train: Option<usize>,
    pub seeds: Seeds,
    pub scales: PerGroup<Option<Vec<u8>>>,
    pub center_alpha: PerGroup<Option<f64>>,
    pub features: FeatureOptions,
    pub sampling: SamplingParams,
    pub svm: SvmConfig,
    /// Cohort written by the `synth` stage; its seed is `seeds.synth`.
    pub synth: CohortConfig,
    pub overlays_per_category: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dataset: PathBuf::from("dataset/manifest.json"),
            out_dir: PathBuf::from("out"),
            sigma_px: None,
            entropy_bins: DEFAULT_ENTROPY_BINS,
            t1: DEFAULT_THRESHOLDS[0],
            t2: DEFAULT_THRESHOLDS[1],
            upl_repetitions: DEFAULT_UPL_REPETITIONS,
            n_train: None,
            seeds: Seeds::default(),
            scales: PerGroup::default(),
            center_alpha: PerGroup::default(),
            features: FeatureOptions::default(),
            sampling: SamplingParams::default(),
            svm: SvmConfig::default(),
            synth: CohortConfig::default(),
            overlays_per_category: 2,
        }
    }
}

impl RunConfig {
    /// Parses a TOML file; relative paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.dataset);
        fix(&mut self.out_dir);
        if let Some(d) = self.features.external_dir.as_mut() {
            fix(d);
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.t1 < self.t2) || !(self.t1 > 0.0) || !(self.t2 <= 100.0) {
            return bad(format!("need 0 < t1 < t2 <= 100, got t1={} t2={}", self.t1, self.t2));
        }
        if let Some(s) = self.sigma_px {
            if !(s > 0.0 && s.is_finite()) {
                return bad(format!("sigma_px must be positive, got {s}"));
            }
        }
        if self.entropy_bins == 0 {
            return bad("entropy_bins must be at least 1".into());
        }
        if self.upl_repetitions == 0 {
            return bad("upl_repetitions must be at least 1".into());
        }
        for (g, a) in self.center_alpha.iter() {
            if let Some(a) = a {
                if !(0.0..=1.0).contains(a) {
                    return bad(format!("center_alpha.{g} = {a} is outside [0, 1]"));
                }
            }
        }
        self.scale_selection().validate()
    }

    pub fn thresholds(&self) -> [f64; 2] {
        [self.t1, self.t2]
    }

    pub fn scale_selection(&self) -> ScaleSelection {
        let d = ScaleSelection::default();
        ScaleSelection(PerGroup::from_fn(|g| self.scales[g].clone().unwrap_or_else(|| d.0[g].clone())))
    }

    pub fn alphas(&self) -> PerGroup<f64> {
        let d = default_center_alpha();
        PerGroup::from_fn(|g| self.center_alpha[g].unwrap_or(d[g]))
    }

    pub fn cohort(&self) -> CohortConfig {
        CohortConfig {
            seed: self.seeds.synth,
            ..self.synth.clone()
        }
    }

    /// Map parameters for `dataset`, resolving a default kernel width.
    pub fn map_params(&self, dataset: &GazeDataset) -> MapParams {
        let sigma = self.sigma_px.unwrap_or_else(|| {
            let w = dataset.images().iter().map(|i| i.width).max().unwrap_or(REFERENCE_WIDTH as u32);
            DEFAULT_SIGMA_PX * f64::from(w) / REFERENCE_WIDTH
        });
        MapParams::with_sigma(sigma)
    }

    /// 120 of every 192 images, at least one on each side.
    pub fn n_train_for(&self, n_images: usize) -> Result<usize> {
        if n_images < 2 {
            return Err(Error::Config(format!("a train/test split needs at least 2 images, have {n_images}")));
        }
        let n = self
            .n_train
            .unwrap_or_else(|| ((n_images * 120) as f64 / 192.0).round() as usize);
        if n == 0 || n >= n_images {
            return Err(Error::Config(format!("n_train = {n} leaves an empty split of {n_images} images")));
        }
        Ok(n)
    }

    pub fn model_path(&self, group: AgeGroup) -> PathBuf {
        self.out_dir.join("models").join(format!("{group}.json"))
    }
}
