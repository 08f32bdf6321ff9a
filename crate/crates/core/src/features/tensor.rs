//! Channel sets, manifests, per-group scale selection and the stacked feature
//! tensor handed to the learner.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::{AgeGroup, PerGroup};
use crate::error::{invalid_arg, Error, Result};
use crate::raster::ScalarMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelFamily {
    Color,
    Intensity,
    OrientationEnergy,
    Horizon,
    CenterPrior,
    Depth,
    External,
}

/// Identity of a channel: name, family and scale (1 finest .. 3 coarsest).
/// Scale-free channels have `scale == None` and pass every selection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub name: String,
    pub family: ChannelFamily,
    pub scale: Option<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureChannel {
    pub spec: ChannelSpec,
    pub map: ScalarMap,
}

impl FeatureChannel {
    pub fn new(name: impl Into<String>, family: ChannelFamily, scale: Option<u8>, map: ScalarMap) -> Self {
        FeatureChannel {
            spec: ChannelSpec {
                name: name.into(),
                family,
                scale,
            },
            map,
        }
    }
}

/// All channels extracted for one image, at the image's full resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureChannelSet {
    width: u32,
    height: u32,
    channels: Vec<FeatureChannel>,
    /// Requested families that could not be produced (e.g. no depth file).
    pub absent: Vec<ChannelFamily>,
    /// Channels whose extractor flagged a degenerate input.
    pub degenerate: Vec<String>,
}

impl FeatureChannelSet {
    pub fn new(width: u32, height: u32) -> Self {
        FeatureChannelSet {
            width,
            height,
            channels: Vec::new(),
            absent: Vec::new(),
            degenerate: Vec::new(),
        }
    }

    pub fn push(&mut self, channel: FeatureChannel) -> Result<()> {
        if channel.map.dims() != (self.width, self.height) {
            return Err(invalid_arg!(
                "channel `{}` is {}x{}, the set is {}x{}",
                channel.spec.name,
                channel.map.width(),
                channel.map.height(),
                self.width,
                self.height
            ));
        }
        if self.channels.iter().any(|c| c.spec.name == channel.spec.name) {
            return Err(invalid_arg!("duplicate channel `{}`", channel.spec.name));
        }
        self.channels.push(channel);
        Ok(())
    }

    pub fn extend(&mut self, channels: impl IntoIterator<Item = FeatureChannel>) -> Result<()> {
        channels.into_iter().try_for_each(|c| self.push(c))
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn channels(&self) -> &[FeatureChannel] {
        &self.channels
    }

    pub fn get(&self, name: &str) -> Option<&FeatureChannel> {
        self.channels.iter().find(|c| c.spec.name == name)
    }

    pub fn family(&self, family: ChannelFamily) -> impl Iterator<Item = &FeatureChannel> {
        self.channels.iter().filter(move |c| c.spec.family == family)
    }

    pub fn manifest(&self) -> ChannelManifest {
        ChannelManifest {
            channels: self.channels.iter().map(|c| c.spec.clone()).collect(),
            absent: self.absent.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelManifest {
    pub channels: Vec<ChannelSpec>,
    #[serde(default)]
    pub absent: Vec<ChannelFamily>,
}

impl ChannelManifest {
    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    /// SHA-256 over the ordered channel list, hex encoded.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for c in &self.channels {
            let fam = serde_json::to_string(&c.family).expect("family serializes");
            let scale = c.scale.map_or(0, |s| s);
            h.update(format!("{}\t{}\t{}\n", c.name, fam, scale).as_bytes());
        }
        hex::encode(h.finalize())
    }

    /// Channels that `selection` keeps for `group`, in manifest order.
    pub fn selected(&self, selection: &ScaleSelection, group: AgeGroup) -> ChannelManifest {
        ChannelManifest {
            channels: self
                .channels
                .iter()
                .filter(|c| selection.keeps(group, c.scale))
                .cloned()
                .collect(),
            absent: self.absent.clone(),
        }
    }
}

/// Scales kept per age group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScaleSelection(pub PerGroup<Vec<u8>>);

impl Default for ScaleSelection {
    fn default() -> Self {
        ScaleSelection(PerGroup {
            children: vec![3],
            adults: vec![1, 2, 3],
            elderly: vec![2, 3],
        })
    }
}

impl ScaleSelection {
    /// The same scales for every group.
    pub fn uniform(scales: &[u8]) -> Self {
        ScaleSelection(PerGroup::from_fn(|_| scales.to_vec()))
    }

    pub fn validate(&self) -> Result<()> {
        for (g, s) in self.0.iter() {
            if s.is_empty() {
                return Err(Error::Config(format!("empty scale set for {g}")));
            }
            if let Some(bad) = s.iter().find(|v| !(1..=3).contains(*v)) {
                return Err(Error::Config(format!("scale {bad} for {g} is outside 1..=3")));
            }
        }
        Ok(())
    }

    pub fn scales(&self, group: AgeGroup) -> &[u8] {
        &self.0[group]
    }

    pub fn keeps(&self, group: AgeGroup, scale: Option<u8>) -> bool {
        scale.is_none_or(|s| self.0[group].contains(&s))
    }
}

/// Channel-major stack of the selected channels of one image.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTensor {
    width: u32,
    height: u32,
    manifest: ChannelManifest,
    data: Vec<f64>,
}

impl FeatureTensor {
    pub fn from_channels(width: u32, height: u32, channels: &[&ScalarMap], manifest: ChannelManifest) -> Result<Self> {
        if channels.len() != manifest.len() {
            return Err(invalid_arg!(
                "{} channels for a manifest of {}",
                channels.len(),
                manifest.len()
            ));
        }
        let n = width as usize * height as usize;
        let mut data = Vec::with_capacity(n * channels.len());
        for m in channels {
            if m.dims() != (width, height) {
                return Err(invalid_arg!("channel size {:?} differs from tensor {width}x{height}", m.dims()));
            }
            data.extend_from_slice(m.values());
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(invalid_arg!("non-finite feature value"));
        }
        Ok(FeatureTensor {
            width,
            height,
            manifest,
            data,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn n_pixels(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn n_channels(&self) -> usize {
        self.manifest.len()
    }

    pub fn manifest(&self) -> &ChannelManifest {
        &self.manifest
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        let n = self.n_pixels();
        &self.data[c * n..(c + 1) * n]
    }

    /// Feature vector of the pixel at row-major `index`.
    pub fn pixel(&self, index: usize) -> Vec<f64> {
        let n = self.n_pixels();
        (0..self.n_channels()).map(|c| self.data[c * n + index]).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Stacks the channels that the group's scale set keeps; scale-free channels
/// always pass. Channel order follows the set.
pub fn assemble_features(channels: &FeatureChannelSet, selection: &ScaleSelection, group: AgeGroup) -> Result<FeatureTensor> {
    selection.validate()?;
    let kept: Vec<&FeatureChannel> = channels
        .channels()
        .iter()
        .filter(|c| selection.keeps(group, c.spec.scale))
        .collect();
    if kept.is_empty() {
        return Err(Error::Config(format!("no channels left for {group} after scale selection")));
    }
    let manifest = ChannelManifest {
        channels: kept.iter().map(|c| c.spec.clone()).collect(),
        absent: channels.absent.clone(),
    };
    let maps: Vec<&ScalarMap> = kept.iter().map(|c| &c.map).collect();
    let (w, h) = channels.dims();
    FeatureTensor::from_channels(w, h, &maps, manifest)
}
