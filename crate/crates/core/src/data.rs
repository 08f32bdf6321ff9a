//! Gaze data: observers, stimuli, fixation logs and their validation.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::ops::{Index, IndexMut};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, Error, Result};
use crate::seed;

/// Column order of the fixation CSV.
pub const FIXATION_CSV_HEADER: [&str; 7] = [
    "observer_id",
    "group",
    "image_id",
    "index",
    "x",
    "y",
    "duration_ms",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgeGroup {
    Children,
    Adults,
    Elderly,
}

impl AgeGroup {
    pub const ALL: [AgeGroup; 3] = [AgeGroup::Children, AgeGroup::Adults, AgeGroup::Elderly];

    pub fn as_str(self) -> &'static str {
        match self {
            AgeGroup::Children => "children",
            AgeGroup::Adults => "adults",
            AgeGroup::Elderly => "elderly",
        }
    }
}

impl fmt::Display for AgeGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AgeGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "children" => Ok(AgeGroup::Children),
            "adults" => Ok(AgeGroup::Adults),
            "elderly" => Ok(AgeGroup::Elderly),
            other => Err(invalid_arg!("unknown age group `{other}`")),
        }
    }
}

/// One value per age group.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerGroup<T> {
    pub children: T,
    pub adults: T,
    pub elderly: T,
}

impl<T> PerGroup<T> {
    pub fn from_fn(mut f: impl FnMut(AgeGroup) -> T) -> Self {
        PerGroup {
            children: f(AgeGroup::Children),
            adults: f(AgeGroup::Adults),
            elderly: f(AgeGroup::Elderly),
        }
    }

    pub fn map<U>(&self, mut f: impl FnMut(AgeGroup, &T) -> U) -> PerGroup<U> {
        PerGroup::from_fn(|g| f(g, &self[g]))
    }

    pub fn iter(&self) -> impl Iterator<Item = (AgeGroup, &T)> {
        AgeGroup::ALL.into_iter().map(move |g| (g, &self[g]))
    }

    pub fn try_from_fn<E>(mut f: impl FnMut(AgeGroup) -> Result<T, E>) -> Result<Self, E> {
        Ok(PerGroup {
            children: f(AgeGroup::Children)?,
            adults: f(AgeGroup::Adults)?,
            elderly: f(AgeGroup::Elderly)?,
        })
    }
}

impl<T> Index<AgeGroup> for PerGroup<T> {
    type Output = T;

    fn index(&self, g: AgeGroup) -> &T {
        match g {
            AgeGroup::Children => &self.children,
            AgeGroup::Adults => &self.adults,
            AgeGroup::Elderly => &self.elderly,
        }
    }
}

impl<T> IndexMut<AgeGroup> for PerGroup<T> {
    fn index_mut(&mut self, g: AgeGroup) -> &mut T {
        match g {
            AgeGroup::Children => &mut self.children,
            AgeGroup::Adults => &mut self.adults,
            AgeGroup::Elderly => &mut self.elderly,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StimulusCategory {
    #[serde(rename = "naturals")]
    Naturals,
    #[serde(rename = "manmade")]
    ManMade,
    #[serde(rename = "fractals")]
    Fractals,
}

impl StimulusCategory {
    pub const ALL: [StimulusCategory; 3] = [
        StimulusCategory::Naturals,
        StimulusCategory::ManMade,
        StimulusCategory::Fractals,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StimulusCategory::Naturals => "naturals",
            StimulusCategory::ManMade => "manmade",
            StimulusCategory::Fractals => "fractals",
        }
    }
}

impl fmt::Display for StimulusCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StimulusCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "naturals" | "natural" | "nature" => Ok(StimulusCategory::Naturals),
            "manmade" => Ok(StimulusCategory::ManMade),
            "fractals" | "fractal" => Ok(StimulusCategory::Fractals),
            other => Err(invalid_arg!("unknown stimulus category `{other}`")),
        }
    }
}

/// A pixel coordinate, `x` = column, `y` = row, both 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pixel {
    pub x: u32,
    pub y: u32,
}

impl Pixel {
    pub fn new(x: u32, y: u32) -> Self {
        Pixel { x, y }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixationRecord {
    pub observer_id: String,
    pub group: AgeGroup,
    pub image_id: String,
    /// Ordinal of the fixation within the trial.
    pub index: u32,
    pub x: u32,
    pub y: u32,
    pub duration_ms: f64,
}

impl FixationRecord {
    pub fn pixel(&self) -> Pixel {
        Pixel::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageEntry {
    pub id: String,
    pub category: StimulusCategory,
    pub width: u32,
    pub height: u32,
    pub image: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observer {
    pub id: String,
    pub group: AgeGroup,
}

/// Images, observers and validated fixations. Immutable once built; every
/// mutation-like operation returns a new dataset.
#[derive(Debug, Clone, Default)]
pub struct GazeDataset {
    images: Vec<ImageEntry>,
    observers: Vec<Observer>,
    fixations: Vec<FixationRecord>,
    image_index: HashMap<String, usize>,
    observer_index: HashMap<String, usize>,
}

impl GazeDataset {
    pub fn new(images: Vec<ImageEntry>, observers: Vec<Observer>) -> Result<Self> {
        let mut image_index = HashMap::with_capacity(images.len());
        for (i, img) in images.iter().enumerate() {
            if img.width == 0 || img.height == 0 {
                return Err(Error::Validation(format!(
                    "image `{}` has non-positive dimensions {}x{}",
                    img.id, img.width, img.height
                )));
            }
            if image_index.insert(img.id.clone(), i).is_some() {
                return Err(Error::Validation(format!("duplicate image id `{}`", img.id)));
            }
        }
        let mut observer_index = HashMap::with_capacity(observers.len());
        for (i, obs) in observers.iter().enumerate() {
            if observer_index.insert(obs.id.clone(), i).is_some() {
                return Err(Error::Validation(format!("duplicate observer id `{}`", obs.id)));
            }
        }
        Ok(GazeDataset {
            images,
            observers,
            fixations: Vec::new(),
            image_index,
            observer_index,
        })
    }

    pub fn images(&self) -> &[ImageEntry] {
        &self.images
    }

    pub fn observers(&self) -> &[Observer] {
        &self.observers
    }

    pub fn fixations(&self) -> &[FixationRecord] {
        &self.fixations
    }

    pub fn image(&self, id: &str) -> Option<&ImageEntry> {
        self.image_index.get(id).map(|&i| &self.images[i])
    }

    pub fn require_image(&self, id: &str) -> Result<&ImageEntry> {
        self.image(id)
            .ok_or_else(|| Error::UnknownReference(format!("image `{id}`")))
    }

    pub fn observer(&self, id: &str) -> Option<&Observer> {
        self.observer_index.get(id).map(|&i| &self.observers[i])
    }

    pub fn observers_in(&self, group: AgeGroup) -> impl Iterator<Item = &Observer> {
        self.observers.iter().filter(move |o| o.group == group)
    }

    pub fn fixations_for_image<'a>(
        &'a self,
        image_id: &'a str,
    ) -> impl Iterator<Item = &'a FixationRecord> + 'a {
        self.fixations.iter().filter(move |f| f.image_id == image_id)
    }

    /// Fixations grouped by image id, in record order.
    pub fn fixations_by_image(&self) -> HashMap<&str, Vec<&FixationRecord>> {
        let mut out: HashMap<&str, Vec<&FixationRecord>> = HashMap::new();
        for f in &self.fixations {
            out.entry(f.image_id.as_str()).or_default().push(f);
        }
        out
    }

    /// Validates and appends records. Unknown observers are registered with
    /// the group carried by their first record.
    pub fn with_fixations(
        mut self,
        records: impl IntoIterator<Item = FixationRecord>,
    ) -> Result<Self> {
        let mut seen: HashSet<(String, String, u32)> = self
            .fixations
            .iter()
            .map(|f| (f.observer_id.clone(), f.image_id.clone(), f.index))
            .collect();
        for rec in records {
            self.validate_record(&rec)?;
            match self.observer_index.get(&rec.observer_id) {
                Some(&i) => {
                    let known = self.observers[i].group;
                    if known != rec.group {
                        return Err(Error::Validation(format!(
                            "observer `{}` is registered as {known} but record {} on `{}` says {}",
                            rec.observer_id, rec.index, rec.image_id, rec.group
                        )));
                    }
                }
                None => {
                    self.observer_index
                        .insert(rec.observer_id.clone(), self.observers.len());
                    self.observers.push(Observer {
                        id: rec.observer_id.clone(),
                        group: rec.group,
                    });
                }
            }
            let key = (rec.observer_id.clone(), rec.image_id.clone(), rec.index);
            if !seen.insert(key) {
                return Err(Error::Validation(format!(
                    "duplicate fixation (observer `{}`, image `{}`, index {})",
                    rec.observer_id, rec.image_id, rec.index
                )));
            }
            self.fixations.push(rec);
        }
        Ok(self)
    }

    fn validate_record(&self, rec: &FixationRecord) -> Result<()> {
        let img = self.image(&rec.image_id).ok_or_else(|| {
            Error::UnknownReference(format!(
                "image `{}` (observer `{}`, index {})",
                rec.image_id, rec.observer_id, rec.index
            ))
        })?;
        if rec.x >= img.width || rec.y >= img.height {
            return Err(Error::Validation(format!(
                "fixation (observer `{}`, image `{}`, index {}) at ({}, {}) lies outside {}x{}",
                rec.observer_id, rec.image_id, rec.index, rec.x, rec.y, img.width, img.height
            )));
        }
        if !(rec.duration_ms >= 0.0) || !rec.duration_ms.is_finite() {
            return Err(Error::Validation(format!(
                "fixation (observer `{}`, image `{}`, index {}) has invalid duration {}",
                rec.observer_id, rec.image_id, rec.index, rec.duration_ms
            )));
        }
        Ok(())
    }

    /// Keeps only the listed images (in dataset order) and their fixations.
    pub fn subset(&self, keep: impl Fn(&ImageEntry) -> bool) -> GazeDataset {
        let images: Vec<ImageEntry> = self.images.iter().filter(|i| keep(i)).cloned().collect();
        let ids: HashSet<&str> = images.iter().map(|i| i.id.as_str()).collect();
        let fixations = self
            .fixations
            .iter()
            .filter(|f| ids.contains(f.image_id.as_str()))
            .cloned()
            .collect();
        let image_index = images
            .iter()
            .enumerate()
            .map(|(i, img)| (img.id.clone(), i))
            .collect();
        GazeDataset {
            images,
            observers: self.observers.clone(),
            fixations,
            image_index,
            observer_index: self.observer_index.clone(),
        }
    }

    pub fn filter_category(&self, category: StimulusCategory) -> GazeDataset {
        self.subset(|img| img.category == category)
    }

    /// Keeps fixations matching `keep`. Observers are untouched.
    pub fn filter_fixations(&self, keep: impl Fn(&FixationRecord) -> bool) -> GazeDataset {
        let mut out = self.clone();
        out.fixations.retain(|f| keep(f));
        out
    }
}

/// JSON manifest describing a dataset on disk. Relative paths resolve
/// against the manifest's directory.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub images: Vec<ImageEntry>,
    #[serde(default)]
    pub observers: Vec<Observer>,
    /// Fixation CSV files.
    #[serde(default)]
    pub fixations: Vec<PathBuf>,
}

impl DatasetManifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut manifest: DatasetManifest = serde_json::from_str(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for img in &mut manifest.images {
            resolve(&mut img.image);
            if let Some(d) = img.depth.as_mut() {
                resolve(d);
            }
            if let Some(m) = img.mask.as_mut() {
                resolve(m);
            }
        }
        for f in &mut manifest.fixations {
            resolve(f);
        }
        Ok(manifest)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

/// Loads a manifest and every fixation file it lists.
pub fn load_dataset(manifest_path: &Path) -> Result<GazeDataset> {
    let manifest = DatasetManifest::read(manifest_path)?;
    let mut dataset = GazeDataset::new(manifest.images, manifest.observers)?;
    for csv_path in &manifest.fixations {
        dataset = parse_fixation_csv(csv_path, dataset)?;
    }
    Ok(dataset)
}

pub fn parse_fixation_csv(path: &Path, dataset: GazeDataset) -> Result<GazeDataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_fixations(file, dataset)
}

/// Parses fixation rows from any reader. The header must match
/// [`FIXATION_CSV_HEADER`] exactly.
pub fn read_fixations<R: Read>(reader: R, dataset: GazeDataset) -> Result<GazeDataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    if headers.iter().ne(FIXATION_CSV_HEADER.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "header `{}` does not match `{}`",
                headers.iter().collect::<Vec<_>>().join(","),
                FIXATION_CSV_HEADER.join(",")
            ),
        });
    }
    let mut records = Vec::new();
    for row in rdr.deserialize::<FixationRecord>() {
        let rec = row.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        records.push(rec);
    }
    dataset.with_fixations(records)
}

pub fn write_fixations<W: Write>(writer: W, records: &[FixationRecord]) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    wtr.write_record(FIXATION_CSV_HEADER)?;
    for rec in records {
        wtr.serialize(rec)?;
    }
    wtr.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

pub fn write_fixation_csv(path: &Path, records: &[FixationRecord]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_fixations(std::io::BufWriter::new(file), records)
}

/// Splits an image's fixations by the age group of the observer.
pub fn partition_by_group<'a>(
    dataset: &'a GazeDataset,
    image_id: &str,
) -> Result<PerGroup<Vec<&'a FixationRecord>>> {
    dataset.require_image(image_id)?;
    let mut out: PerGroup<Vec<&FixationRecord>> = PerGroup::default();
    for f in dataset.fixations.iter().filter(|f| f.image_id == image_id) {
        out[f.group].push(f);
    }
    Ok(out)
}

/// Stratified train/test split by stimulus category.
///
/// Each category receives a share of `n_train` proportional to its size
/// (largest-remainder rounding), so per-category counts are within one image
/// of exact proportionality. Images keep their dataset order in both halves.
pub fn split_train_test(
    dataset: &GazeDataset,
    n_train: usize,
    seed: u64,
) -> Result<(GazeDataset, GazeDataset)> {
    let total = dataset.images.len();
    if n_train >= total {
        return Err(invalid_arg!(
            "n_train ({n_train}) must be smaller than the image count ({total})"
        ));
    }
    let mut by_cat: BTreeMap<StimulusCategory, Vec<&str>> = BTreeMap::new();
    for img in &dataset.images {
        by_cat.entry(img.category).or_default().push(&img.id);
    }

    // Largest-remainder apportionment.
    let mut quotas: Vec<(StimulusCategory, usize, f64)> = by_cat
        .iter()
        .map(|(&c, ids)| {
            let exact = n_train as f64 * ids.len() as f64 / total as f64;
            (c, exact.floor() as usize, exact - exact.floor())
        })
        .collect();
    let assigned: usize = quotas.iter().map(|q| q.1).sum();
    let mut order: Vec<usize> = (0..quotas.len()).collect();
    order.sort_by(|&a, &b| quotas[b].2.total_cmp(&quotas[a].2).then(a.cmp(&b)));
    for &i in order.iter().take(n_train - assigned) {
        quotas[i].1 += 1;
    }

    let mut train_ids: HashSet<&str> = HashSet::new();
    for (cat, quota, _) in quotas {
        let mut ids = by_cat[&cat].clone();
        let mut rng = seed::rng_for(seed, cat.as_str());
        ids.shuffle(&mut rng);
        train_ids.extend(ids.into_iter().take(quota));
    }
    let train = dataset.subset(|img| train_ids.contains(img.id.as_str()));
    let test = dataset.subset(|img| !train_ids.contains(img.id.as_str()));
    Ok((train, test))
}
