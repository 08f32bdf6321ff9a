//! Synthetic stimuli, observers and fixations with planted age-style
//! viewing biases.

mod cohort;
mod observer;
mod stimulus;

pub use cohort::{
    default_group_profiles, generate_cohort, observer_id, write_cohort, CohortConfig, GroupProfile, SurfaceMode,
    SyntheticCohort, SyntheticImage, FIXATIONS_FILE, MANIFEST_FILE,
};
pub use observer::{
    fixation_records, sample_fixation_pixels, sample_fixations, sampling_density, FixationSampler, ObserverProfile,
    SYNTHETIC_DURATION_MS,
};
pub use stimulus::{
    generate_stimulus, generate_stimulus_with, Blob, Stimulus, StimulusParams, BACKGROUND_DEPTH, FAR_DEPTH,
    NEAR_DEPTH, SURFACE_FLOOR,
};
