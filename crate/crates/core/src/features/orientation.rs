//! Oriented band-pass energy over a Gaussian pyramid.
//!
//! Each level is filtered with a steered quadrature pair (second derivative
//! of a Gaussian and its Hilbert-transform approximation), and the local
//! energy `even^2 + odd^2` is smoothed and brought back to full resolution.
//! Level `l` (0-based) is tagged with scale `l + 1`; levels beyond the third
//! are folded into scale 3.

use std::f64::consts::PI;

use image::RgbImage;

use super::filters::{normalize_by, ColorPlanes, Plane};
use super::tensor::{ChannelFamily, FeatureChannel};
use crate::error::{invalid_arg, Result};

pub const DEFAULT_ORIENTATIONS: usize = 4;
pub const DEFAULT_LEVELS: usize = 3;
pub const DEFAULT_WORKING_LONG_SIDE: usize = 320;

const TAPS: usize = 9;
const SPACING: f64 = 0.67;
const ENERGY_SIGMA: f64 = 1.0;

struct QuadraturePair {
    even: Vec<f64>,
    odd: Vec<f64>,
}

/// `theta` is the direction along which intensity varies, i.e. the normal of
/// the stripes the pair responds to.
fn steered_pair(theta: f64) -> QuadraturePair {
    let r = (TAPS / 2) as isize;
    let (c, s) = (theta.cos(), theta.sin());
    let mut even = Vec::with_capacity(TAPS * TAPS);
    let mut odd = Vec::with_capacity(TAPS * TAPS);
    for j in -r..=r {
        for i in -r..=r {
            let (x, y) = (i as f64 * SPACING, j as f64 * SPACING);
            let u = x * c + y * s;
            let g = (-(x * x + y * y)).exp();
            even.push(0.9213 * (2.0 * u * u - 1.0) * g);
            odd.push((-2.205 * u + 0.9780 * u * u * u) * g);
        }
    }
    for k in [&mut even, &mut odd] {
        let mean = k.iter().sum::<f64>() / k.len() as f64;
        k.iter_mut().for_each(|v| *v -= mean);
    }
    QuadraturePair { even, odd }
}

/// Stripe orientation of band `k` of `n`, in degrees: 0 is horizontal.
pub fn band_orientation_deg(k: usize, n: usize) -> f64 {
    180.0 * k as f64 / n as f64
}

pub(crate) fn channel_name(level: usize, k: usize, n: usize) -> String {
    format!(
        "orientation.l{}.{}deg",
        level + 1,
        band_orientation_deg(k, n).round() as i64
    )
}

/// Raw (unnormalized) energy per level and orientation at the input's
/// resolution, `[level][orientation]`.
pub(crate) fn band_energies(gray: &Plane, n_orientations: usize, n_levels: usize) -> Result<Vec<Vec<Plane>>> {
    if n_orientations < 2 {
        return Err(invalid_arg!("need at least 2 orientations, got {n_orientations}"));
    }
    if n_levels < 3 {
        return Err(invalid_arg!("need at least 3 pyramid levels, got {n_levels}"));
    }
    let pyr = gray.pyramid(n_levels);
    let coarsest = pyr.last().unwrap();
    if coarsest.w.min(coarsest.h) < TAPS {
        return Err(invalid_arg!(
            "{}x{} image is too small for {n_levels} levels: coarsest level {}x{} is under the {TAPS}-pixel filter support",
            gray.w,
            gray.h,
            coarsest.w,
            coarsest.h
        ));
    }
    let pairs: Vec<QuadraturePair> = (0..n_orientations)
        .map(|k| steered_pair(band_orientation_deg(k, n_orientations).to_radians() + PI / 2.0))
        .collect();
    Ok(pyr
        .iter()
        .map(|level| {
            pairs
                .iter()
                .map(|p| {
                    let e = level.convolve2d(&p.even, TAPS);
                    let o = level.convolve2d(&p.odd, TAPS);
                    e.zip(&o, |a, b| a * a + b * b).blur(ENERGY_SIGMA).resize(gray.w, gray.h)
                })
                .collect()
        })
        .collect())
}

/// Orientation-energy channels at `(width, height)` from a working-resolution
/// gray plane. The bands of one level share a normalizer so relative
/// orientation strength is kept.
pub(crate) fn orientation_channels(
    gray: &Plane,
    width: u32,
    height: u32,
    n_orientations: usize,
    n_levels: usize,
) -> Result<Vec<FeatureChannel>> {
    let energies = band_energies(gray, n_orientations, n_levels)?;
    let mut out = Vec::with_capacity(n_orientations * n_levels);
    for (level, bands) in energies.into_iter().enumerate() {
        let full: Vec<Plane> = bands
            .into_iter()
            .map(|p| p.resize(width as usize, height as usize))
            .collect();
        let shared = full.iter().map(Plane::max).fold(0.0, f64::max);
        let scale = (level + 1).min(3) as u8;
        for (k, p) in full.into_iter().enumerate() {
            out.push(FeatureChannel::new(
                channel_name(level, k, n_orientations),
                ChannelFamily::OrientationEnergy,
                Some(scale),
                normalize_by(p, Some(shared)),
            ));
        }
    }
    Ok(out)
}

/// Orientation energy of an RGB image's intensity, `n_orientations` x
/// `n_levels` channels at full resolution. Filtering runs with the long side
/// capped at 320 px.
pub fn pyramid_orientation_energy(image: &RgbImage, n_orientations: usize, n_levels: usize) -> Result<Vec<FeatureChannel>> {
    if image.width() == 0 || image.height() == 0 {
        return Err(invalid_arg!("empty image"));
    }
    let gray = ColorPlanes::from_rgb(image)
        .at_working_resolution(DEFAULT_WORKING_LONG_SIDE)
        .intensity();
    orientation_channels(&gray, image.width(), image.height(), n_orientations, n_levels)
}
