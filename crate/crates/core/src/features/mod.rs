//! Per-pixel feature channels and age-specific feature tensors.

mod channels;
mod filters;
mod itti;
mod orientation;
mod tensor;

use std::path::PathBuf;

use image::RgbImage;
use serde::{Deserialize, Serialize};

pub use channels::{
    center_prior_channel, depth_channels, external_channel_path, horizon_channel, load_external_channel,
    HorizonChannel, HORIZON_SIGMA_FRACTION, MIN_HORIZON_HEIGHT,
};
pub use itti::intensity_color_channels;
pub use orientation::{
    band_orientation_deg, pyramid_orientation_energy, DEFAULT_LEVELS, DEFAULT_ORIENTATIONS,
    DEFAULT_WORKING_LONG_SIDE,
};
pub use tensor::{
    assemble_features, ChannelFamily, ChannelManifest, ChannelSpec, FeatureChannel, FeatureChannelSet,
    FeatureTensor, ScaleSelection,
};

use crate::data::ImageEntry;
use crate::error::{invalid_arg, Result};
use crate::io::{read_depth_map, read_rgb};
use crate::raster::{MapKind, ScalarMap};
use filters::ColorPlanes;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureOptions {
    pub n_orientations: usize,
    pub n_levels: usize,
    pub working_long_side: usize,
    pub horizon: bool,
    pub center_prior: bool,
    pub depth: bool,
    /// Names of external channels looked up in `external_dir`.
    pub external: Vec<String>,
    pub external_dir: Option<PathBuf>,
}

impl Default for FeatureOptions {
    fn default() -> Self {
        FeatureOptions {
            n_orientations: DEFAULT_ORIENTATIONS,
            n_levels: DEFAULT_LEVELS,
            working_long_side: DEFAULT_WORKING_LONG_SIDE,
            horizon: true,
            center_prior: true,
            depth: true,
            external: Vec::new(),
            external_dir: None,
        }
    }
}

impl FeatureOptions {
    pub fn without_depth(mut self) -> Self {
        self.depth = false;
        self
    }
}

/// Every configured channel for one image. Order: center-surround,
/// orientation energy, horizon, center prior, depth, external. A missing
/// depth map or external file is recorded in `absent`.
pub fn extract_channels(
    image: &RgbImage,
    depth: Option<&ScalarMap>,
    externals: &[FeatureChannel],
    opts: &FeatureOptions,
) -> Result<FeatureChannelSet> {
    let (w, h) = image.dimensions();
    if w == 0 || h == 0 {
        return Err(invalid_arg!("empty image"));
    }
    if opts.working_long_side < 16 {
        return Err(invalid_arg!("working resolution {} is too small", opts.working_long_side));
    }
    let planes = ColorPlanes::from_rgb(image).at_working_resolution(opts.working_long_side);
    let mut set = FeatureChannelSet::new(w, h);
    set.extend(itti::center_surround_channels(&planes, w, h))?;
    set.extend(orientation::orientation_channels(
        &planes.intensity(),
        w,
        h,
        opts.n_orientations,
        opts.n_levels,
    )?)?;
    if opts.horizon {
        let hc = horizon_channel(image)?;
        if hc.degenerate {
            set.degenerate.push("horizon".into());
        }
        set.push(FeatureChannel::new("horizon", ChannelFamily::Horizon, None, hc.map))?;
    }
    if opts.center_prior {
        set.push(FeatureChannel::new(
            "center",
            ChannelFamily::CenterPrior,
            None,
            center_prior_channel(w, h)?,
        ))?;
    }
    if opts.depth {
        match depth {
            Some(d) => {
                if d.dims() != (w, h) {
                    return Err(invalid_arg!("depth map {:?} does not match image {w}x{h}", d.dims()));
                }
                set.extend(depth_channels(d, &[])?)?;
            }
            None => set.absent.push(ChannelFamily::Depth),
        }
    }
    if !opts.external.is_empty() && externals.len() < opts.external.len() {
        set.absent.push(ChannelFamily::External);
    }
    set.extend(externals.iter().cloned())?;
    Ok(set)
}

/// Loads the stimulus, its depth map and external channels from disk and
/// extracts channels.
pub fn extract_for_entry(entry: &ImageEntry, opts: &FeatureOptions) -> Result<FeatureChannelSet> {
    let image = read_rgb(&entry.image)?;
    if image.dimensions() != (entry.width, entry.height) {
        return Err(invalid_arg!(
            "{} is {}x{}, manifest says {}x{}",
            entry.image.display(),
            image.width(),
            image.height(),
            entry.width,
            entry.height
        ));
    }
    let depth = match (&entry.depth, opts.depth) {
        (Some(p), true) if p.exists() => Some(read_depth_map(p)?),
        (Some(p), true) => {
            log::warn!("depth map {} for `{}` not found", p.display(), entry.id);
            None
        }
        _ => None,
    };
    let externals = load_externals(entry, opts)?;
    extract_channels(&image, depth.as_ref(), &externals, opts)
}

fn load_externals(entry: &ImageEntry, opts: &FeatureOptions) -> Result<Vec<FeatureChannel>> {
    let Some(dir) = opts.external_dir.as_deref() else {
        return Ok(Vec::new());
    };
    let mut out = Vec::new();
    for name in &opts.external {
        match load_external_channel(dir, &entry.id, name, entry.width, entry.height)? {
            Some(c) => out.push(c),
            None => log::debug!("no external `{name}` channel for `{}` in {}", entry.id, dir.display()),
        }
    }
    Ok(out)
}

/// Intensity-contrast baseline: sum of the intensity and color
/// center-surround channels, max-normalized.
pub fn intensity_contrast_map(set: &FeatureChannelSet) -> Result<ScalarMap> {
    let (w, h) = set.dims();
    let mut acc = vec![0.0; w as usize * h as usize];
    let mut n = 0;
    for c in set
        .channels()
        .iter()
        .filter(|c| matches!(c.spec.family, ChannelFamily::Intensity | ChannelFamily::Color))
    {
        acc.iter_mut().zip(c.map.values()).for_each(|(a, v)| *a += v);
        n += 1;
    }
    if n == 0 {
        return Err(invalid_arg!("no intensity or color channels in the set"));
    }
    Ok(ScalarMap::new(w, h, acc, MapKind::Counts)?.max_normalized())
}

/// Extracts only what the intensity-contrast baseline needs.
pub fn intensity_contrast_baseline(image: &RgbImage, working_long_side: usize) -> Result<ScalarMap> {
    let (w, h) = image.dimensions();
    let planes = ColorPlanes::from_rgb(image).at_working_resolution(working_long_side);
    let mut set = FeatureChannelSet::new(w, h);
    set.extend(itti::center_surround_channels(&planes, w, h))?;
    intensity_contrast_map(&set)
}
