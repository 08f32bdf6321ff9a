//! Age-group analysis measures: explorativeness, depth bias, similarity,
//! center bias and the upper performance limit.

mod center;
mod depth;
mod entropy;
mod similarity;
mod upl;

pub use center::{center_bias, center_offset, map_centroid, GroupCenterBias};
pub use depth::{
    depth_bias, fixation_depth_split, threshold_salient_regions, DepthBiasResult, DepthBiasScore,
    DepthSplit, SalientRegion, SalientRegionSet, DEFAULT_THRESHOLDS,
};
pub use entropy::{explorativeness_entropy, quantize, DEFAULT_ENTROPY_BINS};
pub use similarity::{inter_individual_similarity, similarity_matrix, SimilarityEntry, SimilarityMatrix};
pub use upl::{upl_per_image, upl_summary, upper_performance_limit, UplResult, DEFAULT_UPL_REPETITIONS};

use crate::data::PerGroup;

/// Center bias for all three groups.
pub type CenterBiasResult = PerGroup<Option<GroupCenterBias>>;
