//! On-disk pipeline stages. Each stage reads the run configuration, writes
//! its files under `out_dir` and returns their paths. Numeric CSVs use a
//! fixed float format so repeated runs are byte-identical.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::RunConfig;
use super::learn::{
    evaluate, predict_blended, train_models, training_center_maps, EvalSettings, Evaluation, LearnSettings,
};
use crate::data::{load_dataset, split_train_test, AgeGroup, GazeDataset, ImageEntry, StimulusCategory};
use crate::error::{Error, Result};
use crate::features::extract_for_entry;
use crate::io::{read_gray_map, read_region_mask, read_rgb, write_map_png};
use crate::learner::AgeModel;
use crate::maps::{render_heat_overlay, GroupMapSet, MapParams};
use crate::metrics::{center_bias, depth_bias, explorativeness_entropy, similarity_matrix, upl_per_image};
use crate::synth::{generate_cohort, write_cohort};

/// Optional `--group` / `--category` restriction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Selection {
    pub group: Option<AgeGroup>,
    pub category: Option<StimulusCategory>,
}

impl Selection {
    pub fn groups(&self) -> Vec<AgeGroup> {
        match self.group {
            Some(g) => vec![g],
            None => AgeGroup::ALL.to_vec(),
        }
    }

    fn categories(&self, ds: &GazeDataset) -> Vec<Option<StimulusCategory>> {
        match self.category {
            Some(c) => vec![Some(c)],
            None => StimulusCategory::ALL
                .iter()
                .filter(|c| ds.images().iter().any(|i| i.category == **c))
                .map(|c| Some(*c))
                .chain([None])
                .collect(),
        }
    }

    fn restrict(&self, ds: &GazeDataset) -> GazeDataset {
        match self.category {
            Some(c) => ds.filter_category(c),
            None => ds.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageOutput {
    pub stage: &'static str,
    pub files: Vec<PathBuf>,
}

pub const METRIC_FILES: [&str; 6] = [
    "entropy.csv",
    "entropy_summary.csv",
    "center_bias.csv",
    "depth_bias.csv",
    "similarity.csv",
    "upl.csv",
];

fn cat_label(c: Option<StimulusCategory>) -> &'static str {
    c.map_or("all", |c| c.as_str())
}

fn num(v: f64) -> String {
    format!("{v:.6}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    if let Some(d) = path.parent() {
        ensure_dir(d)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(d) = path.parent() {
        ensure_dir(d)?;
    }
    let s = serde_json::to_string_pretty(value)?;
    fs::write(path, s + "\n").map_err(|e| Error::io(path, e))
}

fn missing_or(missing: Vec<PathBuf>) -> Result<()> {
    if missing.is_empty() {
        Ok(())
    } else {
        Err(Error::MissingInputs(missing))
    }
}

pub fn load_run_dataset(cfg: &RunConfig) -> Result<GazeDataset> {
    missing_or(if cfg.dataset.exists() { vec![] } else { vec![cfg.dataset.clone()] })?;
    load_dataset(&cfg.dataset)
}

/// Every stimulus, depth map and mask the dataset references, plus the
/// external channel directory, must exist.
pub fn check_stimuli(cfg: &RunConfig, ds: &GazeDataset) -> Result<()> {
    let mut missing: Vec<PathBuf> = Vec::new();
    for img in ds.images() {
        let paths = [Some(&img.image), img.depth.as_ref(), img.mask.as_ref()];
        missing.extend(paths.into_iter().flatten().filter(|p| !p.exists()).cloned());
    }
    if let Some(d) = &cfg.features.external_dir {
        if !d.exists() {
            missing.push(d.clone());
        }
    }
    missing_or(missing)
}

fn split(cfg: &RunConfig, ds: &GazeDataset) -> Result<(GazeDataset, GazeDataset)> {
    split_train_test(ds, cfg.n_train_for(ds.images().len())?, cfg.seeds.split)
}

fn extractor(cfg: &RunConfig) -> impl Fn(&ImageEntry) -> Result<crate::features::FeatureChannelSet> + Sync + '_ {
    move |e: &ImageEntry| extract_for_entry(e, &cfg.features)
}

/// Writes a synthetic cohort next to the configured dataset path, or into
/// `out` when given. Returns the manifest written.
pub fn run_synth(cfg: &RunConfig, out: Option<&Path>) -> Result<PathBuf> {
    let dir = match out {
        Some(d) => d.to_path_buf(),
        None => cfg.dataset.parent().unwrap_or(Path::new(".")).to_path_buf(),
    };
    ensure_dir(&dir)?;
    let cohort = generate_cohort(&cfg.cohort())?;
    write_cohort(&cohort, &dir)
}

pub fn run_ingest(cfg: &RunConfig) -> Result<StageOutput> {
    let ds = load_run_dataset(cfg)?;
    check_stimuli(cfg, &ds)?;
    let (train, _) = split(cfg, &ds)?;
    let dir = cfg.out_dir.join("ingest");

    let mut summary = Vec::new();
    for c in StimulusCategory::ALL {
        let sub = ds.filter_category(c);
        if sub.images().is_empty() {
            continue;
        }
        for g in AgeGroup::ALL {
            let fix: Vec<_> = sub.fixations().iter().filter(|f| f.group == g).collect();
            let mut obs: Vec<&str> = fix.iter().map(|f| f.observer_id.as_str()).collect();
            obs.sort_unstable();
            obs.dedup();
            summary.push(vec![
                c.as_str().into(),
                g.as_str().into(),
                sub.images().len().to_string(),
                obs.len().to_string(),
                fix.len().to_string(),
            ]);
        }
    }
    let summary_path = dir.join("summary.csv");
    write_csv(
        &summary_path,
        &["category", "group", "n_images", "n_observers", "n_fixations"],
        &summary,
    )?;

    let rows: Vec<Vec<String>> = ds
        .images()
        .iter()
        .map(|i| {
            let side = if train.image(&i.id).is_some() { "train" } else { "test" };
            vec![i.id.clone(), i.category.as_str().into(), side.into()]
        })
        .collect();
    let split_path = dir.join("split.csv");
    write_csv(&split_path, &["image_id", "category", "split"], &rows)?;
    Ok(StageOutput {
        stage: "ingest",
        files: vec![summary_path, split_path],
    })
}

pub fn run_maps(cfg: &RunConfig, sel: &Selection) -> Result<StageOutput> {
    let ds = load_run_dataset(cfg)?;
    let params = cfg.map_params(&ds);
    let ds = sel.restrict(&ds);
    let dir = cfg.out_dir.join("maps");
    let groups = sel.groups();
    let files: Vec<Vec<PathBuf>> = ds
        .images()
        .par_iter()
        .map(|img| -> Result<_> {
            let maps = GroupMapSet::build(&ds, img, &params)?;
            let mut out = Vec::new();
            for &g in &groups {
                let p = dir.join(g.as_str()).join(format!("{}.png", img.id));
                ensure_dir(p.parent().unwrap())?;
                write_map_png(&p, &maps.groups[g])?;
                out.push(p);
            }
            if sel.group.is_none() {
                let p = dir.join("combined").join(format!("{}.png", img.id));
                ensure_dir(p.parent().unwrap())?;
                write_map_png(&p, &maps.combined)?;
                out.push(p);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(StageOutput {
        stage: "maps",
        files: files.into_iter().flatten().collect(),
    })
}

fn load_masks(ds: &GazeDataset) -> Result<HashMap<String, crate::raster::RegionMask>> {
    ds.images()
        .par_iter()
        .filter_map(|img| img.mask.as_ref().map(|m| (img, m)))
        .map(|(img, m)| Ok((img.id.clone(), read_region_mask(m)?)))
        .collect()
}

fn metric_tables(cfg: &RunConfig, ds: &GazeDataset, params: &MapParams, sel: &Selection) -> Result<Vec<Vec<Vec<String>>>> {
    let groups = sel.groups();
    let cats = sel.categories(ds);

    // per-image entropy
    let per_image: Vec<Vec<(AgeGroup, f64)>> = ds
        .images()
        .par_iter()
        .map(|img| -> Result<_> {
            let maps = GroupMapSet::build(ds, img, params)?;
            groups
                .iter()
                .filter(|g| !maps.groups[**g].is_zero())
                .map(|&g| Ok((g, explorativeness_entropy(&maps.groups[g], cfg.entropy_bins)?)))
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut entropy = Vec::new();
    for (img, vals) in ds.images().iter().zip(&per_image) {
        for (g, e) in vals {
            entropy.push(vec![img.id.clone(), img.category.as_str().into(), g.as_str().into(), num(*e)]);
        }
    }
    let mut entropy_summary = Vec::new();
    for &c in &cats {
        for &g in &groups {
            let v: Vec<f64> = ds
                .images()
                .iter()
                .zip(&per_image)
                .filter(|(img, _)| c.is_none_or(|c| img.category == c))
                .flat_map(|(_, vals)| vals.iter().filter(|(gg, _)| *gg == g).map(|(_, e)| *e))
                .collect();
            if !v.is_empty() {
                let mean = v.iter().sum::<f64>() / v.len() as f64;
                entropy_summary.push(vec![cat_label(c).into(), g.as_str().into(), num(mean), v.len().to_string()]);
            }
        }
    }

    let mut center = Vec::new();
    let mut similarity = Vec::new();
    let mut depth = Vec::new();
    let masks = load_masks(ds)?;
    for &c in &cats {
        let sub = match c {
            Some(c) => ds.filter_category(c),
            None => ds.clone(),
        };
        for &g in &groups {
            match center_bias(&sub, params, g) {
                Ok(b) => center.push(vec![
                    cat_label(c).into(),
                    g.as_str().into(),
                    num(b.centroid.0),
                    num(b.centroid.1),
                    num(b.distance_px),
                    opt(b.center_auc),
                    b.n_images.to_string(),
                ]),
                Err(e @ (Error::InvalidArgument(_) | Error::UndefinedScore(_))) => {
                    log::warn!("center bias for {g} on {}: {e}", cat_label(c));
                }
                Err(e) => return Err(e),
            }
        }
        let m = similarity_matrix(&sub, params)?;
        for &s in &groups {
            for t in AgeGroup::ALL {
                similarity.push(vec![cat_label(c).into(), s.as_str().into(), t.as_str().into(), opt(m.get(s, t))]);
            }
        }
        let d = depth_bias(&sub, params, &masks, &cfg.thresholds())?;
        for (t, per) in d.thresholds.iter().zip(&d.per_threshold) {
            for &g in &groups {
                if let Some(s) = per[g] {
                    depth.push(vec![
                        cat_label(c).into(),
                        num(*t),
                        g.as_str().into(),
                        num(s.foreground_pct),
                        num(s.background_pct),
                        s.n_images.to_string(),
                    ]);
                }
            }
        }
    }

    let mut upl = Vec::new();
    let per_group: Vec<(AgeGroup, BTreeMap<String, Option<f64>>)> = groups
        .iter()
        .map(|&g| Ok((g, upl_per_image(ds, params, g, cfg.upl_repetitions, cfg.seeds.upl)?.into_iter().collect())))
        .collect::<Result<_>>()?;
    for &c in &cats {
        for (g, vals) in &per_group {
            let v: Vec<f64> = ds
                .images()
                .iter()
                .filter(|img| c.is_none_or(|c| img.category == c))
                .filter_map(|img| vals.get(&img.id).copied().flatten())
                .collect();
            if !v.is_empty() {
                let mean = v.iter().sum::<f64>() / v.len() as f64;
                upl.push(vec![cat_label(c).into(), g.as_str().into(), num(mean), v.len().to_string()]);
            }
        }
    }
    Ok(vec![entropy, entropy_summary, center, depth, similarity, upl])
}

pub fn run_metrics(cfg: &RunConfig, sel: &Selection) -> Result<StageOutput> {
    let ds = load_run_dataset(cfg)?;
    let params = cfg.map_params(&ds);
    let ds = sel.restrict(&ds);
    let tables = metric_tables(cfg, &ds, &params, sel)?;
    let headers: [&[&str]; 6] = [
        &["image_id", "category", "group", "entropy_bits"],
        &["category", "group", "mean_entropy_bits", "n_images"],
        &["category", "group", "centroid_x", "centroid_y", "distance_px", "center_auc", "n_images"],
        &["category", "threshold_pct", "group", "foreground_pct", "background_pct", "n_images"],
        &["category", "source", "target", "mean_auc"],
        &["category", "group", "upl", "n_images"],
    ];
    let dir = cfg.out_dir.join("metrics");
    let mut files = Vec::new();
    for ((name, header), rows) in METRIC_FILES.iter().zip(headers).zip(&tables) {
        let p = dir.join(name);
        write_csv(&p, header, rows)?;
        files.push(p);
    }
    Ok(StageOutput { stage: "metrics", files })
}

fn learn_settings(cfg: &RunConfig, params: MapParams) -> LearnSettings {
    LearnSettings {
        map_params: params,
        scales: cfg.scale_selection(),
        sampling: cfg.sampling,
        svm: cfg.svm,
        center_alpha: cfg.alphas(),
        seed: cfg.seeds.sampling,
    }
}

pub fn run_train(cfg: &RunConfig, sel: &Selection) -> Result<StageOutput> {
    let ds = load_run_dataset(cfg)?;
    check_stimuli(cfg, &ds)?;
    let params = cfg.map_params(&ds);
    let (train, _) = split(cfg, &ds)?;
    let models = train_models(&train, &extractor(cfg), &learn_settings(cfg, params), &sel.groups())?;
    let mut files = Vec::new();
    for m in &models {
        let p = cfg.model_path(m.group);
        ensure_dir(p.parent().unwrap())?;
        m.save(&p)?;
        files.push(p);
    }
    Ok(StageOutput { stage: "train", files })
}

/// Trained models for the selected groups; a missing one is reported by
/// group with the command that produces it.
pub fn load_models(cfg: &RunConfig, sel: &Selection) -> Result<Vec<AgeModel>> {
    sel.groups()
        .into_iter()
        .map(|g| {
            let p = cfg.model_path(g);
            if !p.exists() {
                return Err(Error::Config(format!(
                    "no trained model for {g} at {}; run `train --group {g}` first",
                    p.display()
                )));
            }
            AgeModel::load(&p)
        })
        .collect()
}

fn test_split(cfg: &RunConfig, sel: &Selection) -> Result<(GazeDataset, GazeDataset, MapParams)> {
    let ds = load_run_dataset(cfg)?;
    check_stimuli(cfg, &ds)?;
    let params = cfg.map_params(&ds);
    let (train, test) = split(cfg, &ds)?;
    let test = sel.restrict(&test);
    if test.images().is_empty() {
        return Err(Error::InvalidArgument(format!(
            "the test split has no images{}",
            sel.category.map(|c| format!(" in category {c}")).unwrap_or_default()
        )));
    }
    Ok((train, test, params))
}

pub fn run_predict(cfg: &RunConfig, sel: &Selection) -> Result<StageOutput> {
    let models = load_models(cfg, sel)?;
    let (train, test, params) = test_split(cfg, sel)?;
    let centers = training_center_maps(&train, &params)?;
    let dir = cfg.out_dir.join("predictions");
    let extract = extractor(cfg);
    let files: Vec<Vec<PathBuf>> = test
        .images()
        .par_iter()
        .map(|img| -> Result<_> {
            let set = extract(img)?;
            models
                .iter()
                .map(|m| {
                    let map = predict_blended(&set, m, centers[m.group].as_ref())?;
                    let p = dir.join(m.group.as_str()).join(format!("{}.png", img.id));
                    ensure_dir(p.parent().unwrap())?;
                    write_map_png(&p, &map)?;
                    Ok(p)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(StageOutput {
        stage: "predict",
        files: files.into_iter().flatten().collect(),
    })
}

/// Evaluation of the trained models on the test split, without writing.
pub fn evaluation(cfg: &RunConfig, sel: &Selection) -> Result<Evaluation> {
    let models = load_models(cfg, sel)?;
    let (train, test, params) = test_split(cfg, sel)?;
    let centers = training_center_maps(&train, &params)?;
    let s = EvalSettings {
        map_params: params,
        upl_repetitions: cfg.upl_repetitions,
        upl_seed: cfg.seeds.upl,
    };
    evaluate(&test, &extractor(cfg), &models, &centers, &s)
}

pub fn run_eval(cfg: &RunConfig, sel: &Selection) -> Result<StageOutput> {
    let ev = evaluation(cfg, sel)?;
    let dir = cfg.out_dir.join("eval");
    let table: Vec<Vec<String>> = ev
        .table
        .iter()
        .map(|r| {
            vec![
                cat_label(r.category).into(),
                r.group.as_str().into(),
                num(r.model),
                num(r.intensity_contrast),
                num(r.center_prior),
                opt(r.upl),
                r.n_images.to_string(),
            ]
        })
        .collect();
    let per_image: Vec<Vec<String>> = ev
        .per_image
        .iter()
        .map(|s| {
            vec![
                s.image_id.clone(),
                s.category.as_str().into(),
                s.group.as_str().into(),
                num(s.model),
                num(s.intensity_contrast),
                num(s.center_prior),
                opt(s.upl),
            ]
        })
        .collect();
    let t = dir.join("table.csv");
    let p = dir.join("per_image.csv");
    write_csv(
        &t,
        &["category", "group", "age_adapted", "intensity_contrast", "center_prior", "upl", "n_images"],
        &table,
    )?;
    write_csv(
        &p,
        &["image_id", "category", "group", "age_adapted", "intensity_contrast", "center_prior", "upl"],
        &per_image,
    )?;
    Ok(StageOutput {
        stage: "eval",
        files: vec![t, p],
    })
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn list_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
        .collect::<Result<_>>()?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            list_files(&p, out)?;
        } else {
            out.push(p);
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct OutputDigest {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    config: &'a RunConfig,
    sigma_px: f64,
    n_train: usize,
    dataset_sha256: String,
    outputs: Vec<OutputDigest>,
}

/// Per category: (source, target) -> formatted AUC.
type SimilarityCells = BTreeMap<String, BTreeMap<(String, String), String>>;

fn similarity_matrices(path: &Path) -> Result<SimilarityCells> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = SimilarityCells::new();
    for rec in r.records() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).unwrap_or_default().to_string();
        out.entry(field(0)).or_default().insert((field(1), field(2)), field(3));
    }
    Ok(out)
}

pub fn run_report(cfg: &RunConfig, sel: &Selection) -> Result<StageOutput> {
    let metrics_dir = cfg.out_dir.join("metrics");
    let mut missing: Vec<PathBuf> = METRIC_FILES
        .iter()
        .map(|f| metrics_dir.join(f))
        .filter(|p| !p.exists())
        .collect();
    if !cfg.dataset.exists() {
        missing.push(cfg.dataset.clone());
    }
    missing_or(missing)?;
    let ds = load_run_dataset(cfg)?;
    check_stimuli(cfg, &ds)?;
    let params = cfg.map_params(&ds);
    let dir = cfg.out_dir.join("report");
    ensure_dir(&dir)?;
    let mut files = Vec::new();

    let eval_dir = cfg.out_dir.join("eval");
    let mut data: Vec<PathBuf> = METRIC_FILES.iter().map(|f| metrics_dir.join(f)).collect();
    data.extend(["table.csv", "per_image.csv"].iter().map(|f| eval_dir.join(f)).filter(|p| p.exists()));
    ensure_dir(&dir.join("data"))?;
    for src in data {
        let prefix = if src.starts_with(&eval_dir) { "eval_" } else { "" };
        let dst = dir.join("data").join(format!("{prefix}{}", src.file_name().unwrap().to_string_lossy()));
        fs::copy(&src, &dst).map_err(|e| Error::io(&dst, e))?;
        files.push(dst);
    }

    for (cat, m) in similarity_matrices(&metrics_dir.join("similarity.csv"))? {
        let rows: Vec<Vec<String>> = AgeGroup::ALL
            .iter()
            .filter(|s| m.keys().any(|(src, _)| src == s.as_str()))
            .map(|s| {
                let mut row = vec![s.as_str().to_string()];
                row.extend(
                    AgeGroup::ALL
                        .iter()
                        .map(|t| m.get(&(s.as_str().into(), t.as_str().into())).cloned().unwrap_or_default()),
                );
                row
            })
            .collect();
        let p = dir.join(format!("similarity_{cat}.csv"));
        write_csv(&p, &["source", "children", "adults", "elderly"], &rows)?;
        files.push(p);
    }

    let ds_sel = sel.restrict(&ds);
    let mut chosen: Vec<&ImageEntry> = Vec::new();
    for c in StimulusCategory::ALL {
        chosen.extend(ds_sel.images().iter().filter(|i| i.category == c).take(cfg.overlays_per_category));
    }
    let overlay_dir = dir.join("overlays");
    ensure_dir(&overlay_dir)?;
    let groups = sel.groups();
    let overlays: Vec<Vec<PathBuf>> = chosen
        .par_iter()
        .map(|img| -> Result<_> {
            let rgb = read_rgb(&img.image)?;
            let maps = GroupMapSet::build(&ds, img, &params)?;
            let mut out = Vec::new();
            let mut emit = |name: String, map: &crate::raster::ScalarMap| -> Result<()> {
                let p = overlay_dir.join(name);
                render_heat_overlay(&rgb, map)?
                    .save(&p)
                    .map_err(|e| Error::image(&p, e))?;
                out.push(p);
                Ok(())
            };
            emit(format!("{}.combined.png", img.id), &maps.combined)?;
            for &g in &groups {
                emit(format!("{}.{g}.png", img.id), &maps.groups[g])?;
                let pred = cfg.out_dir.join("predictions").join(g.as_str()).join(format!("{}.png", img.id));
                if pred.exists() {
                    emit(format!("{}.{g}.model.png", img.id), &read_gray_map(&pred)?)?;
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    files.extend(overlays.into_iter().flatten());

    let manifest_path = dir.join("run_manifest.json");
    let mut all = Vec::new();
    list_files(&cfg.out_dir, &mut all)?;
    let outputs = all
        .iter()
        .filter(|p| **p != manifest_path)
        .map(|p| {
            Ok(OutputDigest {
                path: p.strip_prefix(&cfg.out_dir).unwrap_or(p).to_string_lossy().replace('\\', "/"),
                sha256: sha256_file(p)?,
            })
        })
        .collect::<Result<_>>()?;
    let manifest = RunManifest {
        config: cfg,
        sigma_px: params.sigma_px,
        n_train: cfg.n_train_for(ds.images().len())?,
        dataset_sha256: sha256_file(&cfg.dataset)?,
        outputs,
    };
    write_json(&manifest_path, &manifest)?;
    files.push(manifest_path);
    Ok(StageOutput { stage: "report", files })
}

/// Every stage from ingest to report.
pub fn run_all(cfg: &RunConfig, sel: &Selection) -> Result<Vec<StageOutput>> {
    Ok(vec![
        run_ingest(cfg)?,
        run_maps(cfg, sel)?,
        run_metrics(cfg, sel)?,
        run_train(cfg, sel)?,
        run_predict(cfg, sel)?,
        run_eval(cfg, sel)?,
        run_report(cfg, sel)?,
    ])
}
