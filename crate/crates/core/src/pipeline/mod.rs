//! Run configuration and the ingest → maps → metrics → train → predict →
//! eval → report stages.

mod config;
mod learn;
mod stages;

pub use config::{RunConfig, Seeds};
pub use learn::{
    evaluate, predict_blended, tensor_for_model, train_models, training_center_maps, EvalRow, EvalSettings,
    Evaluation, Extractor, ImageScore, LearnSettings,
};
pub use stages::{
    check_stimuli, evaluation, load_models, load_run_dataset, run_all, run_eval, run_ingest, run_maps, run_metrics,
    run_predict, run_report, run_synth, run_train, Selection, StageOutput, METRIC_FILES,
};
