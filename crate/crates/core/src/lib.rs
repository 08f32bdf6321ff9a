pub mod data;
pub mod error;
pub mod features;
pub mod io;
pub mod learner;
pub mod maps;
pub mod metrics;
pub mod pipeline;
pub mod raster;
pub mod roc;
pub mod seed;
pub mod synth;

pub use data::{AgeGroup, FixationRecord, GazeDataset, ImageEntry, Observer, PerGroup, Pixel, StimulusCategory};
pub use error::{Error, Result};
pub use raster::{MapKind, RegionLabel, RegionMask, ScalarMap};
pub use roc::AucScore;
