//! ROC-AUC of a saliency map as a classifier of fixated pixels.
//!
//! The score is the Mann-Whitney statistic `P(s(pos) > s(neg)) + 0.5 P(tie)`.
//! Counts are accumulated as doubled integers, so the sweep, the ranked
//! lookup and the pairwise oracle all produce the same rational value.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::data::Pixel;
use crate::error::{invalid_arg, Error, Result};
use crate::raster::ScalarMap;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AucScore {
    pub value: f64,
    pub n_positives: usize,
    pub n_negatives: usize,
}

/// Where negatives come from.
#[derive(Debug, Clone, PartialEq)]
pub enum NegativePolicy {
    /// Every pixel that is not a positive.
    AllNonFixated,
    /// An explicit pixel list, e.g. fixations borrowed from other images
    /// (shuffled-negatives AUC). Duplicates count with multiplicity.
    Pixels(Vec<Pixel>),
}

/// Deduplicated, in-bounds positive set in scan order.
fn positive_set(map: &ScalarMap, positives: &[Pixel]) -> Result<Vec<Pixel>> {
    if positives.is_empty() {
        return Err(Error::UndefinedScore("no positive pixels".into()));
    }
    let mut set = BTreeSet::new();
    for &p in positives {
        if !map.contains(p) {
            return Err(invalid_arg!(
                "positive ({}, {}) outside {}x{} map",
                p.x,
                p.y,
                map.width(),
                map.height()
            ));
        }
        set.insert((p.y, p.x));
    }
    Ok(set.into_iter().map(|(y, x)| Pixel::new(x, y)).collect())
}

/// Scores `map` against fixated pixels by sweeping a threshold over its
/// distinct values and integrating the ROC curve with trapezoids.
///
/// Repeated positives count once. A constant map scores exactly 0.5.
pub fn auc_score(map: &ScalarMap, positives: &[Pixel], negatives: &NegativePolicy) -> Result<AucScore> {
    let pos = positive_set(map, positives)?;
    let mut scored: Vec<(f64, bool)> = match negatives {
        NegativePolicy::AllNonFixated => {
            let mut is_pos = vec![false; map.len()];
            for p in &pos {
                is_pos[map.index_of(p.x, p.y)] = true;
            }
            map.values().iter().copied().zip(is_pos).collect()
        }
        NegativePolicy::Pixels(neg) => {
            let mut v: Vec<(f64, bool)> = pos.iter().map(|&p| (map.at(p), true)).collect();
            for &p in neg {
                if !map.contains(p) {
                    return Err(invalid_arg!("negative ({}, {}) outside map", p.x, p.y));
                }
                v.push((map.at(p), false));
            }
            v
        }
    };
    let n_pos = pos.len() as u64;
    let n_neg = scored.len() as u64 - n_pos;
    if n_neg == 0 {
        return Err(Error::UndefinedScore("no negative pixels".into()));
    }

    scored.sort_unstable_by(|a, b| b.0.total_cmp(&a.0));
    // doubled trapezoid area in (fp, tp) count units
    let mut area2: u128 = 0;
    let mut tp: u64 = 0;
    let mut i = 0;
    while i < scored.len() {
        let v = scored[i].0;
        let (mut tp_g, mut fp_g) = (0u64, 0u64);
        while i < scored.len() && scored[i].0 == v {
            if scored[i].1 {
                tp_g += 1;
            } else {
                fp_g += 1;
            }
            i += 1;
        }
        area2 += u128::from(fp_g) * u128::from(2 * tp + tp_g);
        tp += tp_g;
    }
    Ok(AucScore {
        value: area2 as f64 / (2.0 * n_pos as f64 * n_neg as f64),
        n_positives: n_pos as usize,
        n_negatives: n_neg as usize,
    })
}

/// Exact pairwise AUC: `(#{s(p) > s(n)} + 0.5 #{ties}) / (|P| |N|)`.
///
/// Positives and negatives are taken as given, with multiplicity. This is
/// the quadratic reference the fast paths are checked against.
pub fn auc_bruteforce(map: &ScalarMap, positives: &[Pixel], negatives: &[Pixel]) -> Result<AucScore> {
    if positives.is_empty() || negatives.is_empty() {
        return Err(invalid_arg!("brute-force AUC needs nonempty positive and negative lists"));
    }
    for p in positives.iter().chain(negatives) {
        if !map.contains(*p) {
            return Err(invalid_arg!("pixel ({}, {}) outside map", p.x, p.y));
        }
    }
    let pos: Vec<f64> = positives.iter().map(|&p| map.at(p)).collect();
    let neg: Vec<f64> = negatives.iter().map(|&p| map.at(p)).collect();
    let value = auc_from_scores(&pos, &neg)?;
    Ok(AucScore {
        value,
        n_positives: pos.len(),
        n_negatives: neg.len(),
    })
}

/// Pairwise AUC on raw score lists.
pub fn auc_from_scores(pos: &[f64], neg: &[f64]) -> Result<f64> {
    if pos.is_empty() || neg.is_empty() {
        return Err(invalid_arg!("AUC needs nonempty positive and negative scores"));
    }
    let mut wins2: u128 = 0;
    for &p in pos {
        for &n in neg {
            if p > n {
                wins2 += 2;
            } else if p == n {
                wins2 += 1;
            }
        }
    }
    Ok(wins2 as f64 / (2.0 * pos.len() as f64 * neg.len() as f64))
}

/// A map with its values pre-sorted, for scoring many fixation sets against
/// the same map with the all-non-fixated negative policy.
#[derive(Debug, Clone)]
pub struct RankedMap<'a> {
    map: &'a ScalarMap,
    sorted: Vec<f64>,
}

impl<'a> RankedMap<'a> {
    pub fn new(map: &'a ScalarMap) -> Self {
        let mut sorted = map.values().to_vec();
        sorted.sort_unstable_by(f64::total_cmp);
        RankedMap { map, sorted }
    }

    pub fn map(&self) -> &ScalarMap {
        self.map
    }

    /// Same value as `auc_score(map, positives, &NegativePolicy::AllNonFixated)`.
    pub fn auc(&self, positives: &[Pixel]) -> Result<AucScore> {
        let pos = positive_set(self.map, positives)?;
        let n_pos = pos.len() as u64;
        let n_neg = self.sorted.len() as u64 - n_pos;
        if n_neg == 0 {
            return Err(Error::UndefinedScore("no negative pixels".into()));
        }
        let mut pos_vals: Vec<f64> = pos.iter().map(|&p| self.map.at(p)).collect();
        pos_vals.sort_unstable_by(f64::total_cmp);

        let mut u2: u128 = 0;
        for &v in &pos_vals {
            let below_all = self.sorted.partition_point(|s| *s < v) as u64;
            let upto_all = self.sorted.partition_point(|s| *s <= v) as u64;
            let below_pos = pos_vals.partition_point(|s| *s < v) as u64;
            let upto_pos = pos_vals.partition_point(|s| *s <= v) as u64;
            let neg_below = below_all - below_pos;
            let neg_equal = (upto_all - below_all) - (upto_pos - below_pos);
            u2 += u128::from(2 * neg_below + neg_equal);
        }
        Ok(AucScore {
            value: u2 as f64 / (2.0 * n_pos as f64 * n_neg as f64),
            n_positives: n_pos as usize,
            n_negatives: n_neg as usize,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::MapKind;
    use proptest::prelude::*;
    use rand::Rng;

    fn map(w: u32, h: u32, v: Vec<f64>) -> ScalarMap {
        ScalarMap::new(w, h, v, MapKind::Counts).unwrap()
    }

    fn all_negatives(m: &ScalarMap, pos: &[Pixel]) -> Vec<Pixel> {
        (0..m.len())
            .map(|i| m.pixel_of(i))
            .filter(|p| !pos.contains(p))
            .collect()
    }

    #[test]
    fn constant_map_is_chance() {
        let m = map(4, 4, vec![0.3; 16]);
        let pos = [Pixel::new(0, 0), Pixel::new(3, 2)];
        let s = auc_score(&m, &pos, &NegativePolicy::AllNonFixated).unwrap();
        assert_eq!(s.value, 0.5);
        assert_eq!((s.n_positives, s.n_negatives), (2, 14));
        assert_eq!(RankedMap::new(&m).auc(&pos).unwrap().value, 0.5);
    }

    #[test]
    fn indicator_map_is_perfect() {
        let pos = [Pixel::new(1, 1), Pixel::new(2, 3), Pixel::new(1, 1)];
        let mut v = vec![0.0; 20];
        v[5 + 1] = 1.0;
        v[3 * 5 + 2] = 1.0;
        let m = map(5, 4, v);
        let s = auc_score(&m, &pos, &NegativePolicy::AllNonFixated).unwrap();
        assert_eq!(s.value, 1.0);
        assert_eq!(s.n_positives, 2);
    }

    #[test]
    fn bruteforce_hand_cases() {
        let m = map(3, 1, vec![1.0, 0.0, 0.5]);
        let p = |x| Pixel::new(x, 0);
        assert_eq!(auc_bruteforce(&m, &[p(0)], &[p(1)]).unwrap().value, 1.0);
        assert_eq!(auc_bruteforce(&m, &[p(2)], &[p(2)]).unwrap().value, 0.5);
        // pairs (1 vs 0.5) win, (0 vs 0.5) lose
        assert_eq!(auc_bruteforce(&m, &[p(0), p(1)], &[p(2)]).unwrap().value, 0.5);
        // pairs (1 vs 0.5) win, (0.5 vs 0.5) tie
        assert_eq!(auc_bruteforce(&m, &[p(0), p(2)], &[p(2)]).unwrap().value, 0.75);
        assert!(auc_bruteforce(&m, &[], &[p(1)]).is_err());
        assert!(auc_bruteforce(&m, &[p(1)], &[]).is_err());
    }

    #[test]
    fn error_paths() {
        let m = map(2, 1, vec![0.1, 0.2]);
        assert!(matches!(
            auc_score(&m, &[], &NegativePolicy::AllNonFixated),
            Err(Error::UndefinedScore(_))
        ));
        assert!(matches!(
            auc_score(&m, &[Pixel::new(0, 0), Pixel::new(1, 0)], &NegativePolicy::AllNonFixated),
            Err(Error::UndefinedScore(_))
        ));
        assert!(auc_score(&m, &[Pixel::new(2, 0)], &NegativePolicy::AllNonFixated).is_err());
    }

    #[test]
    fn sweep_matches_bruteforce_on_random_maps() {
        let mut rng = crate::seed::rng_from(99);
        for _ in 0..100 {
            // coarse values so that ties actually occur
            let v: Vec<f64> = (0..256).map(|_| f64::from(rng.random_range(0..12u32)) / 11.0).collect();
            let m = map(16, 16, v);
            let k = rng.random_range(1..=10);
            let pos: Vec<Pixel> = (0..k)
                .map(|_| Pixel::new(rng.random_range(0..16), rng.random_range(0..16)))
                .collect();
            let mut uniq = pos.clone();
            uniq.sort();
            uniq.dedup();
            let want = auc_bruteforce(&m, &uniq, &all_negatives(&m, &uniq)).unwrap().value;
            let got = auc_score(&m, &pos, &NegativePolicy::AllNonFixated).unwrap().value;
            let ranked = RankedMap::new(&m).auc(&pos).unwrap().value;
            assert!((got - want).abs() < 1e-12);
            assert!((ranked - want).abs() < 1e-12);
        }
    }

    fn instance() -> impl Strategy<Value = (ScalarMap, Vec<Pixel>, Vec<Pixel>)> {
        (2u32..33, 2u32..33).prop_flat_map(|(w, h)| {
            let n = (w * h) as usize;
            (
                proptest::collection::vec(0u32..50, n),
                proptest::collection::vec((0..w, 0..h), 1..12),
                proptest::collection::vec((0..w, 0..h), 1..12),
            )
                .prop_map(move |(vals, p, q)| {
                    let m = ScalarMap::new(w, h, vals.into_iter().map(|v| f64::from(v) / 49.0).collect(), MapKind::Counts).unwrap();
                    let px = |v: Vec<(u32, u32)>| v.into_iter().map(|(x, y)| Pixel::new(x, y)).collect::<Vec<_>>();
                    (m, px(p), px(q))
                })
        })
    }

    proptest! {
        #[test]
        fn fast_paths_equal_bruteforce((m, pos, _) in instance()) {
            let mut uniq = pos.clone();
            uniq.sort();
            uniq.dedup();
            let neg = all_negatives(&m, &uniq);
            prop_assume!(!neg.is_empty());
            let want = auc_bruteforce(&m, &uniq, &neg).unwrap().value;
            prop_assert!((auc_score(&m, &pos, &NegativePolicy::AllNonFixated).unwrap().value - want).abs() < 1e-9);
            prop_assert!((RankedMap::new(&m).auc(&pos).unwrap().value - want).abs() < 1e-9);
        }

        #[test]
        fn explicit_negatives_match_bruteforce((m, pos, neg) in instance()) {
            let mut uniq = pos.clone();
            uniq.sort();
            uniq.dedup();
            let want = auc_bruteforce(&m, &uniq, &neg).unwrap().value;
            let got = auc_score(&m, &pos, &NegativePolicy::Pixels(neg)).unwrap().value;
            prop_assert!((got - want).abs() < 1e-12);
        }

        #[test]
        fn complement_symmetry((m, pos, neg) in instance()) {
            let a = auc_bruteforce(&m, &pos, &neg).unwrap().value;
            let b = auc_bruteforce(&m, &neg, &pos).unwrap().value;
            prop_assert!((a + b - 1.0).abs() < 1e-12);
        }

        #[test]
        fn monotone_transform_invariance((m, pos, _) in instance()) {
            let f = |v: f64| v * v * v + 2.0 * v + 0.25;
            let t = ScalarMap::new(m.width(), m.height(), m.values().iter().map(|&v| f(v)).collect(), MapKind::Counts).unwrap();
            let a = auc_score(&m, &pos, &NegativePolicy::AllNonFixated);
            let b = auc_score(&t, &pos, &NegativePolicy::AllNonFixated);
            if let (Ok(a), Ok(b)) = (a, b) {
                prop_assert_eq!(a.value, b.value);
            }
        }
    }
}
