use crate::error::{invalid_arg, Result};
use crate::raster::ScalarMap;

/// 8-bit quantization of normalized maps.
pub const DEFAULT_ENTROPY_BINS: usize = 256;

/// Histogram bin of every pixel after scaling by the map maximum.
pub fn quantize(map: &ScalarMap, n_bins: usize) -> Vec<usize> {
    let max = map.max();
    map.values()
        .iter()
        .map(|&v| {
            let u = if max > 0.0 { v / max } else { 0.0 };
            ((u * n_bins as f64).floor() as usize).min(n_bins - 1)
        })
        .collect()
}

/// First-order entropy of a saliency map, in bits:
/// `H = sum_l h(l) log2(L / h(l))` over occupied bins, with `L` the pixel
/// count. The sum is not divided by `L`, so `H` grows with image size.
pub fn explorativeness_entropy(map: &ScalarMap, n_bins: usize) -> Result<f64> {
    if n_bins < 2 {
        return Err(invalid_arg!("entropy needs at least 2 bins, got {n_bins}"));
    }
    if map.is_empty() {
        return Err(invalid_arg!("entropy of an empty map"));
    }
    let mut hist = vec![0u64; n_bins];
    for b in quantize(map, n_bins) {
        hist[b] += 1;
    }
    let total = map.len() as f64;
    Ok(hist
        .into_iter()
        .filter(|&h| h > 0)
        .map(|h| {
            let h = h as f64;
            h * (total / h).log2()
        })
        .sum())
}
