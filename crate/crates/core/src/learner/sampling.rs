//! Strong positive / negative training pixels from a human saliency map.

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::data::{AgeGroup, Pixel};
use crate::error::{invalid_arg, Result};
use crate::features::FeatureTensor;
use crate::raster::ScalarMap;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSample {
    pub features: Vec<f64>,
    /// `+1` or `-1`.
    pub label: i8,
    pub image_id: String,
    pub pixel: Pixel,
    pub group: AgeGroup,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingParams {
    pub n_pos: usize,
    pub n_neg: usize,
    /// Positives come from the pixels at or above the value found at this
    /// fraction from the top.
    pub top_fraction: f64,
    /// Negatives come from the pixels at or below the value found at this
    /// fraction from the bottom.
    pub bottom_fraction: f64,
}

impl Default for SamplingParams {
    fn default() -> Self {
        SamplingParams {
            n_pos: 10,
            n_neg: 10,
            top_fraction: 0.05,
            bottom_fraction: 0.20,
        }
    }
}

/// Where a batch of samples comes from.
#[derive(Debug, Clone, Copy)]
pub struct SampleOrigin<'a> {
    pub image_id: &'a str,
    pub group: AgeGroup,
}

/// Candidate pixel indices `(positives, negatives)`. Ties at a cut are kept
/// whole so no pixel is preferred by its scan position.
pub fn candidate_pixels(saliency: &ScalarMap, params: &SamplingParams) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(params.top_fraction > 0.0 && params.top_fraction <= 1.0)
        || !(params.bottom_fraction > 0.0 && params.bottom_fraction <= 1.0)
    {
        return Err(invalid_arg!("sampling fractions must lie in (0, 1]"));
    }
    let v = saliency.values();
    let n = v.len();
    if n == 0 {
        return Err(invalid_arg!("empty saliency map"));
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(f64::total_cmp);
    let k_top = ((n as f64 * params.top_fraction).round() as usize).clamp(1, n);
    let k_bot = ((n as f64 * params.bottom_fraction).round() as usize).clamp(1, n);
    let hi = sorted[n - k_top];
    let lo = sorted[k_bot - 1];
    if hi <= lo {
        return Err(invalid_arg!(
            "saliency map too flat to separate strong positives from negatives"
        ));
    }
    let pos = (0..n).filter(|&i| v[i] >= hi).collect();
    let neg = (0..n).filter(|&i| v[i] <= lo).collect();
    Ok((pos, neg))
}

fn draw(candidates: &[usize], n: usize, rng: &mut impl rand::Rng, what: &str) -> Vec<usize> {
    if candidates.len() <= n {
        if candidates.len() < n {
            log::debug!("only {} {what} candidates for {n} requested", candidates.len());
        }
        return candidates.to_vec();
    }
    index::sample(rng, candidates.len(), n)
        .into_iter()
        .map(|i| candidates[i])
        .collect()
}

/// Draws `n_pos` positives uniformly from the top pixels of `saliency` and
/// `n_neg` negatives from the bottom ones, with their feature vectors.
pub fn sample_pixels(
    saliency: &ScalarMap,
    features: &FeatureTensor,
    params: &SamplingParams,
    seed: u64,
    origin: SampleOrigin<'_>,
) -> Result<Vec<TrainingSample>> {
    if params.n_pos == 0 || params.n_neg == 0 {
        return Err(invalid_arg!("sample counts must be at least 1"));
    }
    if (features.width(), features.height()) != saliency.dims() {
        return Err(invalid_arg!(
            "feature tensor {}x{} does not match saliency map {:?}",
            features.width(),
            features.height(),
            saliency.dims()
        ));
    }
    let (pos, neg) = candidate_pixels(saliency, params)?;
    let mut rng = seed::rng_for(seed, &format!("sample/{}/{}", origin.image_id, origin.group));
    let chosen_pos = draw(&pos, params.n_pos, &mut rng, "positive");
    let chosen_neg = draw(&neg, params.n_neg, &mut rng, "negative");
    let make = |i: usize, label: i8| TrainingSample {
        features: features.pixel(i),
        label,
        image_id: origin.image_id.to_string(),
        pixel: saliency.pixel_of(i),
        group: origin.group,
    };
    Ok(chosen_pos
        .into_iter()
        .map(|i| make(i, 1))
        .chain(chosen_neg.into_iter().map(|i| make(i, -1)))
        .collect())
}
