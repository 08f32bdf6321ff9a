//! Seeded fixation sampling with planted center, depth and exploration
//! preferences.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::data::{AgeGroup, FixationRecord, Pixel};
use crate::error::{invalid_arg, Result};
use crate::features::center_prior_channel;
use crate::raster::ScalarMap;
use crate::seed;

/// Duration written for every synthetic fixation.
pub const SYNTHETIC_DURATION_MS: f64 = 250.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObserverProfile {
    /// Exponent on the central Gaussian, in `[0, 1]`.
    pub center_strength: f64,
    /// Positive prefers near pixels, negative far ones; in `[-1, 1]`.
    pub foreground_pref: f64,
    /// Exponent `1/tau` on the attention surface; larger spreads fixations.
    /// May be infinite, which ignores the surface.
    pub explorativeness_temp: f64,
    pub n_fixations: usize,
    pub seed: u64,
}

impl ObserverProfile {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.center_strength) {
            return Err(invalid_arg!("center strength {} outside [0, 1]", self.center_strength));
        }
        if !(-1.0..=1.0).contains(&self.foreground_pref) {
            return Err(invalid_arg!("foreground preference {} outside [-1, 1]", self.foreground_pref));
        }
        if !(self.explorativeness_temp > 0.0) {
            return Err(invalid_arg!("temperature must be positive, got {}", self.explorativeness_temp));
        }
        if self.n_fixations == 0 {
            return Err(invalid_arg!("observer needs at least one fixation"));
        }
        Ok(())
    }
}

/// Unnormalized sampling density
/// `surface^(1/tau) * center^alpha * near^max(beta,0) * far^max(-beta,0)`
/// with `near = 1 - depth`, `far = depth`.
pub fn sampling_density(profile: &ObserverProfile, surface: &ScalarMap, depth: &ScalarMap) -> Result<Vec<f64>> {
    profile.validate()?;
    surface.ensure_same_dims(depth)?;
    let (w, h) = surface.dims();
    let center = center_prior_channel(w, h)?;
    let inv_tau = 1.0 / profile.explorativeness_temp;
    let beta_near = profile.foreground_pref.max(0.0);
    let beta_far = (-profile.foreground_pref).max(0.0);
    let density: Vec<f64> = surface
        .values()
        .iter()
        .zip(center.values())
        .zip(depth.values())
        .map(|((&s, &c), &d)| {
            let mut v = s.powf(inv_tau) * c.powf(profile.center_strength);
            if beta_near > 0.0 {
                v *= (1.0 - d).max(0.0).powf(beta_near);
            }
            if beta_far > 0.0 {
                v *= d.max(0.0).powf(beta_far);
            }
            v
        })
        .collect();
    Ok(density)
}

/// Planted density ready for repeated draws; observers that share a profile
/// and differ only in seed can share one sampler.
#[derive(Debug, Clone)]
pub struct FixationSampler {
    dist: WeightedIndex<f64>,
    width: u32,
}

impl FixationSampler {
    pub fn new(profile: &ObserverProfile, surface: &ScalarMap, depth: &ScalarMap) -> Result<Self> {
        let density = sampling_density(profile, surface, depth)?;
        let dist = WeightedIndex::new(&density).map_err(|e| invalid_arg!("sampling density is degenerate: {e}"))?;
        Ok(FixationSampler {
            dist,
            width: surface.width(),
        })
    }

    pub fn draw(&self, n: usize, seed: u64) -> Vec<Pixel> {
        let mut rng = seed::rng_from(seed);
        let w = self.width as usize;
        (0..n)
            .map(|_| {
                let i = self.dist.sample(&mut rng);
                Pixel::new((i % w) as u32, (i / w) as u32)
            })
            .collect()
    }
}

/// Draws `profile.n_fixations` pixels from the planted density.
pub fn sample_fixation_pixels(profile: &ObserverProfile, surface: &ScalarMap, depth: &ScalarMap) -> Result<Vec<Pixel>> {
    Ok(FixationSampler::new(profile, surface, depth)?.draw(profile.n_fixations, profile.seed))
}

/// Turns sampled pixels into fixation records.
pub fn fixation_records(pixels: &[Pixel], observer_id: &str, group: AgeGroup, image_id: &str) -> Vec<FixationRecord> {
    pixels
        .iter()
        .enumerate()
        .map(|(i, p)| FixationRecord {
            observer_id: observer_id.to_string(),
            group,
            image_id: image_id.to_string(),
            index: i as u32,
            x: p.x,
            y: p.y,
            duration_ms: SYNTHETIC_DURATION_MS,
        })
        .collect()
}

/// Fixation records for one observer on one image.
pub fn sample_fixations(
    profile: &ObserverProfile,
    surface: &ScalarMap,
    depth: &ScalarMap,
    observer_id: &str,
    group: AgeGroup,
    image_id: &str,
) -> Result<Vec<FixationRecord>> {
    Ok(fixation_records(
        &sample_fixation_pixels(profile, surface, depth)?,
        observer_id,
        group,
        image_id,
    ))
}
