//! Age-specific linear saliency models trained on human saliency maps.

mod model;
mod sampling;
mod svm;

pub use model::{
    blend_center, default_center_alpha, predict, train, tune_center_alpha, AgeModel, Prediction, Standardization,
    TrainDiagnostics,
};
pub use sampling::{candidate_pixels, sample_pixels, SampleOrigin, SamplingParams, TrainingSample};
pub use svm::{fit, SvmConfig, SvmFit};
