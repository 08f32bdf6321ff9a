//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits nonzero if any fails. Pass names as arguments to run a subset.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::panic;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;

use agesal::data::split_train_test;
use agesal::features::{extract_channels, FeatureOptions, FeatureTensor, ScaleSelection};
use agesal::learner::{fit, predict, train, AgeModel, SamplingParams, Standardization, SvmConfig, TrainingSample};
use agesal::maps::{build_center_map, fixation_map_from_pixels, gaussian_smooth, group_saliency_map, MapParams};
use agesal::metrics::{center_offset, depth_bias, explorativeness_entropy, similarity_matrix};
use agesal::pipeline::{
    evaluate, run_all, run_synth, train_models, training_center_maps, EvalSettings, LearnSettings, RunConfig,
    Selection,
};
use agesal::roc::{auc_bruteforce, auc_score, NegativePolicy, RankedMap};
use agesal::seed::rng_from;
use agesal::synth::{generate_cohort, CohortConfig, GroupProfile, SurfaceMode, SyntheticCohort};
use agesal::{AgeGroup, ImageEntry, PerGroup, Pixel, ScalarMap};

type Outcome = (bool, String);

const SEEDS: u64 = 20;

fn profile(alpha: f64, beta: f64, tau: f64) -> GroupProfile {
    GroupProfile {
        center_strength: alpha,
        foreground_pref: beta,
        explorativeness_temp: tau,
    }
}

fn small_cohort(seed: u64) -> CohortConfig {
    CohortConfig {
        width: 160,
        height: 120,
        n_images: 12,
        group_sizes: PerGroup {
            children: 8,
            adults: 8,
            elderly: 8,
        },
        fixations_per_image: 15,
        seed,
        ..CohortConfig::default()
    }
}

fn params(c: &SyntheticCohort) -> MapParams {
    MapParams::with_sigma(c.config.sigma_px())
}

fn extractor(c: &SyntheticCohort, opts: FeatureOptions) -> impl Fn(&ImageEntry) -> agesal::Result<agesal::features::FeatureChannelSet> + Sync + '_ {
    move |e: &ImageEntry| {
        let img = c.images.iter().find(|i| i.id == e.id).expect("stimulus");
        extract_channels(&img.stimulus.image, Some(&img.stimulus.depth), &[], &opts)
    }
}

fn count_summary(wins: usize, needed: usize, values: &[f64], what: &str) -> Outcome {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let med = v.get(v.len() / 2).copied().unwrap_or(f64::NAN);
    (
        wins >= needed,
        format!(
            "{wins}/{} seeds (need {needed}); {what} min {:.4} median {med:.4}",
            values.len(),
            v.first().copied().unwrap_or(f64::NAN)
        ),
    )
}

fn auc_oracle() -> Outcome {
    let mut rng = rng_from(2024);
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        // every other map on a few levels so ties are common
        let levels = if i % 2 == 0 { 0 } else { rng.random_range(2..6) };
        let values: Vec<f64> = (0..256)
            .map(|_| {
                let u: f64 = rng.random();
                if levels > 0 {
                    (u * levels as f64).floor()
                } else {
                    u
                }
            })
            .collect();
        let map = ScalarMap::normalized_from(16, 16, values).unwrap();
        let k = rng.random_range(1..=10);
        let pos: Vec<Pixel> = (0..k)
            .map(|_| Pixel::new(rng.random_range(0..16), rng.random_range(0..16)))
            .collect();
        let unique: BTreeSet<(u32, u32)> = pos.iter().map(|p| (p.x, p.y)).collect();
        let unique_pos: Vec<Pixel> = unique.iter().map(|&(x, y)| Pixel::new(x, y)).collect();
        let neg: Vec<Pixel> = (0..16u32)
            .flat_map(|y| (0..16u32).map(move |x| (x, y)))
            .filter(|xy| !unique.contains(xy))
            .map(|(x, y)| Pixel::new(x, y))
            .collect();
        let brute = auc_bruteforce(&map, &unique_pos, &neg).unwrap().value;
        let sweep = auc_score(&map, &pos, &NegativePolicy::AllNonFixated).unwrap().value;
        let ranked = RankedMap::new(&map).auc(&pos).unwrap().value;
        worst = worst.max((sweep - brute).abs()).max((ranked - brute).abs());
    }
    let el = t.elapsed();
    (
        worst <= 1e-9 && el < Duration::from_secs(5),
        format!("max |fast - brute| = {worst:.2e} over 100 maps in {:.2}s", el.as_secs_f64()),
    )
}

fn entropy_oracle(values: &[f64], bins: usize) -> f64 {
    let max = values.iter().copied().fold(0.0, f64::max);
    let mut counts: HashMap<usize, f64> = HashMap::new();
    for &v in values {
        let b = if max > 0.0 { ((v / max) * bins as f64) as usize } else { 0 };
        *counts.entry(b.min(bins - 1)).or_default() += 1.0;
    }
    let n = values.len() as f64;
    counts.values().map(|c| -c * (c / n).log2()).sum()
}

fn entropy_suite() -> Outcome {
    let constant = ScalarMap::normalized_from(4, 4, vec![0.7; 16]).unwrap();
    let h_const = explorativeness_entropy(&constant, 256).unwrap();
    let half = ScalarMap::normalized_from(4, 4, (0..16).map(|i| if i < 8 { 0.0 } else { 1.0 }).collect()).unwrap();
    let h_half = explorativeness_entropy(&half, 256).unwrap();

    let mut rng = rng_from(77);
    let mut worst_oracle: f64 = 0.0;
    for _ in 0..50 {
        let (w, h) = (rng.random_range(4..40u32), rng.random_range(4..40u32));
        let bins = [2, 16, 64, 256][rng.random_range(0..4)];
        let v: Vec<f64> = (0..w * h).map(|_| rng.random::<f64>().powi(3)).collect();
        let m = ScalarMap::normalized_from(w, h, v).unwrap();
        let got = explorativeness_entropy(&m, bins).unwrap();
        worst_oracle = worst_oracle.max((got - entropy_oracle(m.values(), bins)).abs());
    }

    let v: Vec<f64> = (0..24 * 18).map(|_| rng.random::<f64>()).collect();
    let base = explorativeness_entropy(&ScalarMap::normalized_from(24, 18, v.clone()).unwrap(), 256).unwrap();
    let mut worst_perm: f64 = 0.0;
    for _ in 0..50 {
        let mut s = v.clone();
        s.shuffle(&mut rng);
        let h = explorativeness_entropy(&ScalarMap::normalized_from(24, 18, s).unwrap(), 256).unwrap();
        worst_perm = worst_perm.max((h - base).abs());
    }
    let pass = h_const == 0.0 && (h_half - 16.0).abs() < 1e-12 && worst_oracle <= 1e-9 && worst_perm <= 1e-9;
    (
        pass,
        format!(
            "constant {h_const}, half/half {h_half}, oracle gap {worst_oracle:.1e}, shuffle gap {worst_perm:.1e}"
        ),
    )
}

fn mass_conservation() -> Outcome {
    let mut rng = rng_from(31);
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let (w, h) = (rng.random_range(5..80u32), rng.random_range(5..80u32));
        let mut px: Vec<Pixel> = (0..rng.random_range(1..30))
            .map(|_| Pixel::new(rng.random_range(0..w), rng.random_range(0..h)))
            .collect();
        px.extend([Pixel::new(0, 0), Pixel::new(w - 1, h - 1), Pixel::new(0, h / 2), Pixel::new(w - 1, 0)]);
        let sigma = [0.5, 2.0, 9.25, 37.0][i % 4] * rng.random_range(0.5..1.5);
        let fm = fixation_map_from_pixels(&px, w, h).unwrap();
        let sm = gaussian_smooth(&fm, sigma).unwrap();
        worst = worst.max((sm.sum() - fm.sum()).abs() / fm.sum());
    }
    (worst <= 1e-6, format!("max relative mass error {worst:.2e} over 50 maps"))
}

fn diagonal_dominance() -> Outcome {
    let t = Instant::now();
    let margins: Vec<f64> = (0..SEEDS)
        .map(|s| {
            // equal viewing styles, so only the attention surfaces differ
            let c = generate_cohort(&CohortConfig {
                surfaces: SurfaceMode::GroupDistinct,
                profiles: PerGroup::from_fn(|_| profile(0.3, 0.0, 1.0)),
                ..small_cohort(1000 + s)
            })
            .unwrap();
            let m = similarity_matrix(&c.dataset, &params(&c)).unwrap();
            AgeGroup::ALL
                .iter()
                .map(|&r| {
                    let d = m.get(r, r).unwrap();
                    let off = AgeGroup::ALL
                        .iter()
                        .filter(|&&c| c != r)
                        .map(|&c| m.get(r, c).unwrap())
                        .fold(f64::NEG_INFINITY, f64::max);
                    d - off
                })
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let wins = margins.iter().filter(|&&m| m >= 0.05).count();
    let (pass, detail) = count_summary(wins, 18, &margins, "smallest row margin");
    let el = t.elapsed();
    (pass && el < Duration::from_secs(120), format!("{detail}; {:.1}s", el.as_secs_f64()))
}

fn depth_bias_recovery() -> Outcome {
    let mut wins = 0;
    let mut gaps = Vec::new();
    for s in 0..SEEDS {
        let mut cfg = small_cohort(2000 + s);
        cfg.surfaces = SurfaceMode::Shared;
        cfg.profiles = PerGroup {
            children: profile(0.3, 0.8, 1.0),
            adults: profile(0.3, 0.0, 1.0),
            elderly: profile(0.3, -0.8, 1.0),
        };
        let c = generate_cohort(&cfg).unwrap();
        let masks: HashMap<String, _> = c.images.iter().map(|i| (i.id.clone(), i.stimulus.mask.clone())).collect();
        let r = depth_bias(&c.dataset, &params(&c), &masks, &[5.0, 10.0]).unwrap();
        let mut ok = true;
        let mut gap = f64::INFINITY;
        for per in &r.per_threshold {
            let (ch, el) = (per.children.unwrap(), per.elderly.unwrap());
            ok &= ch.foreground_pct > el.foreground_pct && el.background_pct > ch.background_pct;
            gap = gap
                .min(ch.foreground_pct - el.foreground_pct)
                .min(el.background_pct - ch.background_pct);
        }
        wins += usize::from(ok);
        gaps.push(gap);
    }
    count_summary(wins, 18, &gaps, "smallest FG/BG gap (pct points)")
}

fn center_monotonicity() -> Outcome {
    let mut wins = 0;
    let mut steps = Vec::new();
    for s in 0..SEEDS {
        let d: Vec<f64> = [0.0, 0.5, 1.0]
            .iter()
            .map(|&a| {
                let cfg = CohortConfig {
                    n_images: 24,
                    group_sizes: PerGroup {
                        children: 0,
                        adults: 20,
                        elderly: 0,
                    },
                    surfaces: SurfaceMode::Shared,
                    n_blobs: 2,
                    blob_region: [0.0, 0.0, 0.6, 0.6],
                    profiles: PerGroup::from_fn(|_| profile(a, 0.0, 1.0)),
                    ..small_cohort(3000 + s)
                };
                let c = generate_cohort(&cfg).unwrap();
                let p = params(&c);
                let maps: Vec<ScalarMap> = c
                    .dataset
                    .images()
                    .iter()
                    .map(|img| group_saliency_map(&c.dataset, img, AgeGroup::Adults, &p).unwrap())
                    .collect();
                center_offset(&build_center_map(&maps).unwrap()).unwrap()
            })
            .collect();
        wins += usize::from(d[0] > d[1] && d[1] > d[2]);
        steps.push((d[0] - d[1]).min(d[1] - d[2]));
    }
    count_summary(wins, 18, &steps, "smallest distance drop (px)")
}

fn mean_entropy(c: &SyntheticCohort, g: AgeGroup) -> f64 {
    let p = params(c);
    let v: Vec<f64> = c
        .dataset
        .images()
        .iter()
        .map(|img| explorativeness_entropy(&group_saliency_map(&c.dataset, img, g, &p).unwrap(), 256).unwrap())
        .collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn explorativeness_ordering() -> Outcome {
    let mut wins = 0;
    let mut gaps = Vec::new();
    for s in 0..SEEDS {
        let mut cfg = small_cohort(4000 + s);
        cfg.surfaces = SurfaceMode::Shared;
        cfg.profiles = PerGroup {
            children: profile(0.3, 0.0, 0.5),
            adults: profile(0.3, 0.0, 2.0),
            elderly: profile(0.3, 0.0, 1.0),
        };
        let c = generate_cohort(&cfg).unwrap();
        let h = PerGroup::from_fn(|g| mean_entropy(&c, g));
        wins += usize::from(h.children < h.elderly && h.elderly < h.adults);
        gaps.push((h.elderly - h.children).min(h.adults - h.elderly));
    }
    count_summary(wins, 18, &gaps, "smallest entropy step (bits)")
}

fn learn_settings(c: &SyntheticCohort, seed: u64) -> LearnSettings {
    LearnSettings {
        map_params: params(c),
        scales: ScaleSelection::default(),
        sampling: SamplingParams::default(),
        svm: SvmConfig::default(),
        center_alpha: agesal::learner::default_center_alpha(),
        seed,
    }
}

fn upper_bound() -> Outcome {
    // full default cohort: 64 images of 320x240, 58 observers
    let c = generate_cohort(&CohortConfig {
        seed: 5000,
        ..CohortConfig::default()
    })
    .unwrap();
    let (tr, te) = split_train_test(&c.dataset, 40, 1).unwrap();
    let ex = extractor(&c, FeatureOptions::default());
    let models = train_models(&tr, &ex, &learn_settings(&c, 7), &AgeGroup::ALL).unwrap();
    let centers = training_center_maps(&tr, &params(&c)).unwrap();
    let es = EvalSettings {
        map_params: params(&c),
        upl_repetitions: 50,
        upl_seed: 11,
    };
    let ev = evaluate(&te, &ex, &models, &centers, &es).unwrap();
    let cells: Vec<_> = ev.table.iter().filter(|r| r.category.is_some()).collect();
    let gaps: Vec<f64> = cells.iter().map(|r| r.upl.unwrap_or(f64::NAN) - r.model).collect();
    let ok = gaps.iter().all(|g| *g >= 0.0);
    let worst = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    (ok && cells.len() == 9, format!("{} cells, smallest UPL - model gap {worst:.4}", cells.len()))
}

fn depth_lift() -> Outcome {
    let t = Instant::now();
    let mut wins = 0;
    let mut lifts = Vec::new();
    for s in 0..SEEDS {
        let cfg = CohortConfig {
            n_images: 24,
            group_sizes: PerGroup {
                children: 12,
                adults: 0,
                elderly: 0,
            },
            profiles: PerGroup {
                children: profile(0.8, 0.8, 0.5),
                ..CohortConfig::default().profiles
            },
            surfaces: SurfaceMode::Shared,
            ..small_cohort(6000 + s)
        };
        let c = generate_cohort(&cfg).unwrap();
        let (tr, te) = split_train_test(&c.dataset, 15, s).unwrap();
        let centers = training_center_maps(&tr, &params(&c)).unwrap();
        let es = EvalSettings {
            map_params: params(&c),
            upl_repetitions: 1,
            upl_seed: 0,
        };
        let score = |opts: FeatureOptions| {
            let ex = extractor(&c, opts);
            let m = train_models(&tr, &ex, &learn_settings(&c, s), &[AgeGroup::Children]).unwrap();
            let ev = evaluate(&te, &ex, &m, &centers, &es).unwrap();
            ev.row(None, AgeGroup::Children).unwrap().model
        };
        let lift = score(FeatureOptions::default()) - score(FeatureOptions::default().without_depth());
        wins += usize::from(lift >= 0.02);
        lifts.push(lift);
    }
    let (pass, detail) = count_summary(wins, 16, &lifts, "AUC lift");
    let el = t.elapsed();
    (pass && el < Duration::from_secs(300), format!("{detail}; {:.1}s", el.as_secs_f64()))
}

fn learner_contract() -> Outcome {
    let mut rng = rng_from(99);
    let d = 8;
    let planted: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let b0 = 0.2;
    let x: Vec<Vec<f64>> = (0..2000).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let y: Vec<f64> = x
        .iter()
        .map(|r| {
            let s: f64 = r.iter().zip(&planted).map(|(a, b)| a * b).sum::<f64>() + b0;
            if s >= 0.0 {
                1.0
            } else {
                -1.0
            }
        })
        .collect();
    let f = fit(&x, &y, &SvmConfig::default()).unwrap();
    let dot: f64 = f.weights.iter().zip(&planted).map(|(a, b)| a * b).sum();
    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let cosine = dot / (norm(&f.weights) * norm(&planted));

    // raw-score linearity on a trained model
    let (w, h) = (23u32, 17u32);
    let maps: Vec<ScalarMap> = (0..d)
        .map(|_| ScalarMap::normalized_from(w, h, (0..w * h).map(|_| rng.random::<f64>()).collect()).unwrap())
        .collect();
    let manifest = agesal::features::ChannelManifest {
        channels: (0..d)
            .map(|i| agesal::features::ChannelSpec {
                name: format!("c{i}"),
                family: agesal::features::ChannelFamily::External,
                scale: None,
            })
            .collect(),
        absent: vec![],
    };
    let refs: Vec<&ScalarMap> = maps.iter().collect();
    let tensor = FeatureTensor::from_channels(w, h, &refs, manifest.clone()).unwrap();
    let samples: Vec<TrainingSample> = x
        .iter()
        .zip(&y)
        .take(300)
        .map(|(r, l)| TrainingSample {
            features: r.iter().map(|v| v * 3.0 + 1.0).collect(),
            label: *l as i8,
            image_id: "planted".into(),
            pixel: Pixel::new(0, 0),
            group: AgeGroup::Adults,
        })
        .collect();
    let model = train(AgeGroup::Adults, &manifest, &samples, &SvmConfig::default(), 1).unwrap();
    let extra = AgeModel::from_parts(
        AgeGroup::Elderly,
        manifest,
        (0..d).map(|_| rng.random_range(-2.0..2.0)).collect(),
        0.3,
        Standardization {
            mean: (0..d).map(|_| rng.random_range(-1.0..1.0)).collect(),
            std: (0..d).map(|_| rng.random_range(0.5..2.0)).collect(),
        },
    )
    .unwrap();
    let mut lin_err: f64 = 0.0;
    for m in [&model, &extra] {
        let (rw, rb) = m.raw_weights();
        let p = predict(m, &tensor).unwrap();
        for i in 0..tensor.n_pixels() {
            let f = tensor.pixel(i);
            let direct: f64 = f.iter().zip(&rw).map(|(a, b)| a * b).sum::<f64>() + rb;
            lin_err = lin_err.max((p.raw[i] - direct).abs());
        }
    }
    let pass = cosine >= 0.95 && f.accuracy >= 0.99 && lin_err <= 1e-9;
    (
        pass,
        format!("cosine {cosine:.4}, training accuracy {:.4}, raw-score error {lin_err:.1e}", f.accuracy),
    )
}

fn csv_files(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|x| x == "csv") {
                out.push(p.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig {
        dataset: tmp.path().join("dataset/manifest.json"),
        upl_repetitions: 10,
        synth: CohortConfig {
            width: 128,
            height: 96,
            n_images: 12,
            group_sizes: PerGroup {
                children: 5,
                adults: 6,
                elderly: 4,
            },
            fixations_per_image: 10,
            n_blobs: 4,
            ..CohortConfig::default()
        },
        ..RunConfig::default()
    };
    run_synth(&cfg, None).unwrap();
    let mut listings = Vec::new();
    for run in ["run_a", "run_b"] {
        cfg.out_dir = tmp.path().join(run);
        run_all(&cfg, &Selection::default()).unwrap();
        listings.push(csv_files(&cfg.out_dir));
    }
    let same_list = listings[0] == listings[1] && !listings[0].is_empty();
    let differing: Vec<&PathBuf> = listings[0]
        .iter()
        .filter(|p| fs::read(tmp.path().join("run_a").join(p)).ok() != fs::read(tmp.path().join("run_b").join(p)).ok())
        .collect();
    (
        same_list && differing.is_empty(),
        format!("{} CSV files compared, {} differ", listings[0].len(), differing.len()),
    )
}

fn main() -> ExitCode {
    panic::set_hook(Box::new(|_| {}));
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("auc_oracle_equivalence", auc_oracle),
        ("entropy_suite", entropy_suite),
        ("mass_conservation", mass_conservation),
        ("diagonal_dominance", diagonal_dominance),
        ("depth_bias_recovery", depth_bias_recovery),
        ("center_bias_monotonicity", center_monotonicity),
        ("explorativeness_ordering", explorativeness_ordering),
        ("upper_bound_property", upper_bound),
        ("depth_channel_lift", depth_lift),
        ("learner_contract", learner_contract),
        ("determinism", determinism),
    ];
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let start = Instant::now();
    let (mut run, mut failed) = (0, 0);
    for (name, f) in criteria {
        if !filters.is_empty() && !filters.iter().any(|x| name.contains(x.as_str())) {
            continue;
        }
        let t = Instant::now();
        let (pass, detail) = panic::catch_unwind(f).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        });
        run += 1;
        failed += usize::from(!pass);
        println!(
            "{} {name}: {detail} ({:.1}s)",
            if pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64()
        );
    }
    println!("{}/{run} criteria passed in {:.1}s", run - failed, start.elapsed().as_secs_f64());
    if failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
