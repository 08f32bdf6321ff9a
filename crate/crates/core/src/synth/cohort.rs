//! Whole synthetic datasets: stimuli for three categories and observers of
//! three age groups with group-level planted preferences.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::observer::{fixation_records, FixationSampler, ObserverProfile};
use super::stimulus::{attention_surface, generate_stimulus_with, Blob, Stimulus, StimulusParams};
use crate::data::{
    write_fixation_csv, AgeGroup, DatasetManifest, FixationRecord, GazeDataset, ImageEntry, Observer, PerGroup,
    StimulusCategory,
};
use crate::error::{invalid_arg, Error, Result};
use crate::io::{write_depth_map, write_region_mask, write_rgb};
use crate::raster::ScalarMap;
use crate::seed;

/// Planted viewing style shared by every observer of a group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupProfile {
    pub center_strength: f64,
    pub foreground_pref: f64,
    pub explorativeness_temp: f64,
}

/// Children: strong center bias, near preference, concentrated. Adults:
/// weak center bias, exploratory. Elderly: far preference, in between.
pub fn default_group_profiles() -> PerGroup<GroupProfile> {
    PerGroup {
        children: GroupProfile {
            center_strength: 0.8,
            foreground_pref: 0.6,
            explorativeness_temp: 0.5,
        },
        adults: GroupProfile {
            center_strength: 0.3,
            foreground_pref: 0.0,
            explorativeness_temp: 2.0,
        },
        elderly: GroupProfile {
            center_strength: 0.5,
            foreground_pref: -0.6,
            explorativeness_temp: 1.0,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurfaceMode {
    /// All groups look at the same attention surface.
    Shared,
    /// Each group draws its own interest weights and hidden hotspots and
    /// favors a different blob.
    GroupDistinct,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CohortConfig {
    pub width: u32,
    pub height: u32,
    /// Images are assigned to categories round-robin.
    pub n_images: usize,
    pub categories: Vec<StimulusCategory>,
    pub group_sizes: PerGroup<usize>,
    pub fixations_per_image: usize,
    pub profiles: PerGroup<GroupProfile>,
    pub n_blobs: usize,
    /// Attractors in the surface that leave no trace in the image.
    pub hidden_hotspots: usize,
    pub surfaces: SurfaceMode,
    /// Fractional `[x0, y0, x1, y1]` placement region for blobs.
    pub blob_region: [f64; 4],
    pub seed: u64,
}

impl Default for CohortConfig {
    fn default() -> Self {
        CohortConfig {
            width: 320,
            height: 240,
            n_images: 64,
            categories: StimulusCategory::ALL.to_vec(),
            group_sizes: PerGroup {
                children: 18,
                adults: 23,
                elderly: 17,
            },
            fixations_per_image: 15,
            profiles: default_group_profiles(),
            n_blobs: 5,
            hidden_hotspots: 2,
            surfaces: SurfaceMode::GroupDistinct,
            blob_region: [0.0, 0.0, 1.0, 1.0],
            seed: 1,
        }
    }
}

impl CohortConfig {
    /// Fixation-map smoothing matched to the canvas: 37 px at 1280 wide.
    pub fn sigma_px(&self) -> f64 {
        37.0 * f64::from(self.width) / 1280.0
    }

    fn validate(&self) -> Result<()> {
        if self.n_images == 0 || self.categories.is_empty() {
            return Err(invalid_arg!("cohort needs images and categories"));
        }
        if self.group_sizes.iter().all(|(_, n)| *n == 0) {
            return Err(invalid_arg!("cohort needs observers"));
        }
        if self.surfaces == SurfaceMode::GroupDistinct && self.n_blobs < 3 {
            return Err(invalid_arg!("group-distinct surfaces need at least 3 blobs"));
        }
        for (g, p) in self.profiles.iter() {
            ObserverProfile {
                center_strength: p.center_strength,
                foreground_pref: p.foreground_pref,
                explorativeness_temp: p.explorativeness_temp,
                n_fixations: self.fixations_per_image,
                seed: 0,
            }
            .validate()
            .map_err(|e| invalid_arg!("{g} profile: {e}"))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticImage {
    pub id: String,
    pub category: StimulusCategory,
    pub stimulus: Stimulus,
    pub surfaces: PerGroup<ScalarMap>,
}

#[derive(Debug, Clone)]
pub struct SyntheticCohort {
    pub config: CohortConfig,
    /// Paths in the entries are relative (`images/`, `depth/`, `masks/`)
    /// until the cohort is written.
    pub dataset: GazeDataset,
    pub images: Vec<SyntheticImage>,
}

pub fn observer_id(group: AgeGroup, k: usize) -> String {
    format!("{}{:02}", &group.as_str()[..1], k + 1)
}

fn hotspots(cfg: &CohortConfig, rng: &mut impl Rng) -> Vec<Blob> {
    let (w, h) = (f64::from(cfg.width), f64::from(cfg.height));
    let m = w.min(h);
    (0..cfg.hidden_hotspots)
        .map(|_| Blob {
            cx: rng.random_range(0.1 * w..0.9 * w),
            cy: rng.random_range(0.1 * h..0.9 * h),
            sigma: m * rng.random_range(0.04..0.065),
            near: false,
            color: [0, 0, 0],
            interest: rng.random_range(0.5..1.5),
        })
        .collect()
}

fn group_surfaces(cfg: &CohortConfig, id: &str, st: &Stimulus) -> PerGroup<ScalarMap> {
    match cfg.surfaces {
        SurfaceMode::Shared => {
            let mut rng = seed::rng_for(cfg.seed, &format!("surface/{id}"));
            let extra = hotspots(cfg, &mut rng);
            let s = attention_surface(cfg.width, cfg.height, &st.blobs, &extra);
            PerGroup::from_fn(|_| s.clone())
        }
        SurfaceMode::GroupDistinct => {
            let mut order: Vec<usize> = (0..st.blobs.len()).collect();
            order.shuffle(&mut seed::rng_for(cfg.seed, &format!("preferred/{id}")));
            PerGroup::from_fn(|g| {
                let mut rng = seed::rng_for(cfg.seed, &format!("surface/{id}/{g}"));
                let preferred = order[AgeGroup::ALL.iter().position(|x| *x == g).unwrap()];
                let blobs: Vec<Blob> = st
                    .blobs
                    .iter()
                    .enumerate()
                    .map(|(k, b)| Blob {
                        interest: if k == preferred { 2.0 } else { rng.random_range(0.2..1.0) },
                        ..b.clone()
                    })
                    .collect();
                let extra = hotspots(cfg, &mut rng);
                attention_surface(cfg.width, cfg.height, &blobs, &extra)
            })
        }
    }
}

pub fn generate_cohort(cfg: &CohortConfig) -> Result<SyntheticCohort> {
    cfg.validate()?;
    let specs: Vec<(String, StimulusCategory)> = (0..cfg.n_images)
        .map(|i| {
            let cat = cfg.categories[i % cfg.categories.len()];
            (format!("{}_{:03}", cat.as_str(), i / cfg.categories.len()), cat)
        })
        .collect();

    let images: Vec<SyntheticImage> = specs
        .par_iter()
        .map(|(id, cat)| {
            let mut p = StimulusParams::new(cfg.width, cfg.height, cfg.n_blobs);
            p.region = cfg.blob_region;
            p.category = *cat;
            let stimulus = generate_stimulus_with(&p, seed::derive_seed(cfg.seed, &format!("stimulus/{id}")))?;
            let surfaces = group_surfaces(cfg, id, &stimulus);
            Ok(SyntheticImage {
                id: id.clone(),
                category: *cat,
                stimulus,
                surfaces,
            })
        })
        .collect::<Result<_>>()?;

    let observers: Vec<Observer> = AgeGroup::ALL
        .iter()
        .flat_map(|&g| {
            (0..cfg.group_sizes[g]).map(move |k| Observer {
                id: observer_id(g, k),
                group: g,
            })
        })
        .collect();

    let records: Vec<FixationRecord> = images
        .par_iter()
        .map(|img| {
            let samplers = PerGroup::try_from_fn(|g| {
                let gp = cfg.profiles[g];
                let profile = ObserverProfile {
                    center_strength: gp.center_strength,
                    foreground_pref: gp.foreground_pref,
                    explorativeness_temp: gp.explorativeness_temp,
                    n_fixations: cfg.fixations_per_image,
                    seed: 0,
                };
                if cfg.group_sizes[g] == 0 {
                    return Ok(None);
                }
                FixationSampler::new(&profile, &img.surfaces[g], &img.stimulus.depth).map(Some)
            })?;
            let mut out = Vec::new();
            for o in &observers {
                let sampler = samplers[o.group].as_ref().expect("sampler for a populated group");
                let seed = seed::derive_seed(cfg.seed, &format!("fix/{}/{}", o.id, img.id));
                let px = sampler.draw(cfg.fixations_per_image, seed);
                out.extend(fixation_records(&px, &o.id, o.group, &img.id));
            }
            Ok(out)
        })
        .collect::<Result<Vec<Vec<_>>>>()?
        .into_iter()
        .flatten()
        .collect();

    let entries = images
        .iter()
        .map(|img| ImageEntry {
            id: img.id.clone(),
            category: img.category,
            width: cfg.width,
            height: cfg.height,
            image: PathBuf::from(format!("images/{}.png", img.id)),
            depth: Some(PathBuf::from(format!("depth/{}.png", img.id))),
            mask: Some(PathBuf::from(format!("masks/{}.pgm", img.id))),
        })
        .collect();
    let dataset = GazeDataset::new(entries, observers)?.with_fixations(records)?;
    Ok(SyntheticCohort {
        config: cfg.clone(),
        dataset,
        images,
    })
}

pub const FIXATIONS_FILE: &str = "fixations.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Writes stimuli, depth maps, masks, fixations and a dataset manifest under
/// `dir`; returns the manifest path.
pub fn write_cohort(cohort: &SyntheticCohort, dir: &Path) -> Result<PathBuf> {
    for sub in ["images", "depth", "masks"] {
        let d = dir.join(sub);
        fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
    }
    cohort.images.par_iter().try_for_each(|img| -> Result<()> {
        write_rgb(&dir.join(format!("images/{}.png", img.id)), &img.stimulus.image)?;
        write_depth_map(&dir.join(format!("depth/{}.png", img.id)), &img.stimulus.depth)?;
        write_region_mask(&dir.join(format!("masks/{}.pgm", img.id)), &img.stimulus.mask)
    })?;
    write_fixation_csv(&dir.join(FIXATIONS_FILE), cohort.dataset.fixations())?;
    let manifest = DatasetManifest {
        images: cohort.dataset.images().to_vec(),
        observers: cohort.dataset.observers().to_vec(),
        fixations: vec![PathBuf::from(FIXATIONS_FILE)],
    };
    let path = dir.join(MANIFEST_FILE);
    manifest.write(&path)?;
    Ok(path)
}
