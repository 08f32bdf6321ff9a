//! Synthetic stimuli: colored Gaussian blobs on a textured background, each
//! blob on a near or far depth plane.

use image::{Rgb, RgbImage};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::StimulusCategory;
use crate::error::{invalid_arg, Result};
use crate::raster::{MapKind, RegionLabel, RegionMask, ScalarMap};
use crate::seed;

pub const NEAR_DEPTH: f64 = 0.1;
pub const FAR_DEPTH: f64 = 0.85;
pub const BACKGROUND_DEPTH: f64 = 0.95;
/// Share of the attention surface spread uniformly over the image.
pub const SURFACE_FLOOR: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Blob {
    pub cx: f64,
    pub cy: f64,
    pub sigma: f64,
    pub near: bool,
    pub color: [u8; 3],
    /// Relative attraction in the attention surface.
    pub interest: f64,
}

impl Blob {
    /// Radius of the labeled disk and of the flat depth plane.
    pub fn radius(&self) -> f64 {
        2.0 * self.sigma
    }

    pub fn weight_at(&self, x: f64, y: f64) -> f64 {
        let r2 = (x - self.cx).powi(2) + (y - self.cy).powi(2);
        (-r2 / (2.0 * self.sigma * self.sigma)).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StimulusParams {
    pub width: u32,
    pub height: u32,
    pub n_blobs: usize,
    /// Blob sigma range as a fraction of `min(width, height)`.
    pub sigma_range: (f64, f64),
    /// Fractional region `[x0, y0, x1, y1]` that must contain every blob
    /// disk; the whole canvas by default.
    pub region: [f64; 4],
    pub category: StimulusCategory,
}

impl StimulusParams {
    pub fn new(width: u32, height: u32, n_blobs: usize) -> Self {
        StimulusParams {
            width,
            height,
            n_blobs,
            sigma_range: (0.04, 0.065),
            region: [0.0, 0.0, 1.0, 1.0],
            category: StimulusCategory::Naturals,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stimulus {
    pub image: RgbImage,
    /// 0 nearest, 1 farthest.
    pub depth: ScalarMap,
    pub mask: RegionMask,
    /// Blob mixture weighted by interest plus a uniform floor; sums to 1.
    pub surface: ScalarMap,
    pub blobs: Vec<Blob>,
}

fn place_blobs(p: &StimulusParams, rng: &mut impl Rng) -> Result<Vec<Blob>> {
    let (w, h) = (f64::from(p.width), f64::from(p.height));
    let m = w.min(h);
    let [fx0, fy0, fx1, fy1] = p.region;
    let (rx0, ry0, rx1, ry1) = (fx0 * w, fy0 * h, fx1 * w, fy1 * h);
    let mut blobs: Vec<Blob> = Vec::with_capacity(p.n_blobs);
    for k in 0..p.n_blobs {
        let sigma = m * rng.random_range(p.sigma_range.0..=p.sigma_range.1);
        let r = 2.0 * sigma;
        if rx1 - rx0 < 2.0 * r || ry1 - ry0 < 2.0 * r {
            return Err(invalid_arg!(
                "blob of radius {r:.1} px does not fit the {:.0}x{:.0} placement region",
                rx1 - rx0,
                ry1 - ry0
            ));
        }
        let mut placed = None;
        for _ in 0..2000 {
            let cx = rng.random_range(rx0 + r..=rx1 - r);
            let cy = rng.random_range(ry0 + r..=ry1 - r);
            let clear = blobs
                .iter()
                .all(|b| ((b.cx - cx).powi(2) + (b.cy - cy).powi(2)).sqrt() > b.radius() + r + 2.0);
            if clear {
                placed = Some((cx, cy));
                break;
            }
        }
        let Some((cx, cy)) = placed else {
            return Err(invalid_arg!(
                "could not place {} non-overlapping blobs on a {}x{} canvas",
                p.n_blobs,
                p.width,
                p.height
            ));
        };
        // at least one plane of each kind once there are two blobs
        let near = match k {
            0 => true,
            1 => false,
            _ => rng.random_bool(0.5),
        };
        let color = [rng.random_range(30..=230), rng.random_range(30..=230), rng.random_range(30..=230)];
        blobs.push(Blob {
            cx,
            cy,
            sigma,
            near,
            color,
            interest: rng.random_range(0.5..=1.5),
        });
    }
    // the first blob is not always the near one
    if p.n_blobs == 1 {
        blobs[0].near = rng.random_bool(0.5);
    }
    Ok(blobs)
}

fn background(p: &StimulusParams, rng: &mut impl Rng) -> impl Fn(u32, u32) -> [f64; 3] {
    let base = [rng.random_range(70.0..150.0), rng.random_range(70.0..150.0), rng.random_range(70.0..150.0)];
    let tint = [rng.random_range(-30.0..30.0), rng.random_range(-30.0..30.0), rng.random_range(-30.0..30.0)];
    let (w, h) = (f64::from(p.width), f64::from(p.height));
    let horizon = rng.random_range(0.3..0.6) * h;
    let freq = rng.random_range(0.05..0.15);
    let phase = rng.random_range(0.0..std::f64::consts::TAU);
    let category = p.category;
    move |x, y| {
        let (fx, fy) = (f64::from(x), f64::from(y));
        let t = match category {
            // smooth vertical gradient
            StimulusCategory::Naturals => fy / h - 0.5,
            // sky / ground split
            StimulusCategory::ManMade => {
                if fy < horizon {
                    -0.5
                } else {
                    0.5
                }
            }
            // interfering sinusoids
            StimulusCategory::Fractals => 0.5 * ((fx * freq + phase).sin() * (fy * freq * 1.3).cos()) + 0.1 * (fx / w),
        };
        [base[0] + t * tint[0], base[1] + t * tint[1], base[2] + t * tint[2]]
    }
}

/// Blob mixture weighted by `interest`, plus `extra` unnormalized Gaussians,
/// normalized to unit mass and mixed with the uniform floor.
pub(crate) fn attention_surface(width: u32, height: u32, blobs: &[Blob], extra: &[Blob]) -> ScalarMap {
    let n = width as usize * height as usize;
    let mut v = vec![0.0; n];
    for (i, o) in v.iter_mut().enumerate() {
        let (x, y) = ((i % width as usize) as f64, (i / width as usize) as f64);
        *o = blobs.iter().chain(extra).map(|b| b.interest * b.weight_at(x, y)).sum();
    }
    let total: f64 = v.iter().sum();
    let floor = SURFACE_FLOOR / n as f64;
    for o in v.iter_mut() {
        *o = if total > 0.0 {
            (1.0 - SURFACE_FLOOR) * *o / total + floor
        } else {
            1.0 / n as f64
        };
    }
    ScalarMap::from_parts_unchecked(width, height, v, MapKind::Counts)
}

pub fn generate_stimulus_with(params: &StimulusParams, seed: u64) -> Result<Stimulus> {
    if params.n_blobs == 0 {
        return Err(invalid_arg!("need at least one blob"));
    }
    if params.width == 0 || params.height == 0 {
        return Err(invalid_arg!("empty canvas"));
    }
    let [x0, y0, x1, y1] = params.region;
    if !(0.0 <= x0 && x0 < x1 && x1 <= 1.0 && 0.0 <= y0 && y0 < y1 && y1 <= 1.0) {
        return Err(invalid_arg!("placement region {:?} is not inside the unit square", params.region));
    }
    let mut rng = seed::rng_from(seed);
    let blobs = place_blobs(params, &mut rng)?;
    let bg = background(params, &mut rng);
    let (w, h) = (params.width, params.height);

    let image = RgbImage::from_fn(w, h, |x, y| {
        let mut c = bg(x, y);
        for b in &blobs {
            let a = b.weight_at(f64::from(x), f64::from(y));
            for k in 0..3 {
                c[k] = c[k] * (1.0 - a) + f64::from(b.color[k]) * a;
            }
        }
        Rgb(c.map(|v| v.round().clamp(0.0, 255.0) as u8))
    });

    let mut depth = vec![BACKGROUND_DEPTH; w as usize * h as usize];
    let mut mask = RegionMask::unlabeled(w, h);
    for b in &blobs {
        let r = b.radius();
        let (xa, xb) = ((b.cx - r).floor().max(0.0) as u32, ((b.cx + r).ceil() as u32).min(w - 1));
        let (ya, yb) = ((b.cy - r).floor().max(0.0) as u32, ((b.cy + r).ceil() as u32).min(h - 1));
        for y in ya..=yb {
            for x in xa..=xb {
                if (f64::from(x) - b.cx).powi(2) + (f64::from(y) - b.cy).powi(2) <= r * r {
                    let (d, l) = if b.near {
                        (NEAR_DEPTH, RegionLabel::Foreground)
                    } else {
                        (FAR_DEPTH, RegionLabel::Background)
                    };
                    depth[(y * w + x) as usize] = d;
                    mask.set(x, y, l);
                }
            }
        }
    }
    let depth = ScalarMap::new(w, h, depth, MapKind::Counts)?;
    let surface = attention_surface(w, h, &blobs, &[]);
    Ok(Stimulus {
        image,
        depth,
        mask,
        surface,
        blobs,
    })
}

/// Stimulus with default blob sizes over the whole canvas.
pub fn generate_stimulus(width: u32, height: u32, n_blobs: usize, seed: u64) -> Result<Stimulus> {
    generate_stimulus_with(&StimulusParams::new(width, height, n_blobs), seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labeled_components(mask: &RegionMask) -> usize {
        let (w, h) = mask.dims();
        let mut seen = vec![false; (w * h) as usize];
        let mut count = 0;
        for start in 0..(w * h) as usize {
            if seen[start] || mask.labels()[start] == RegionLabel::Unlabeled {
                continue;
            }
            count += 1;
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(i) = stack.pop() {
                let (x, y) = ((i as u32 % w) as i64, (i as u32 / w) as i64);
                for (dx, dy) in [(-1, 0), (1, 0), (0, -1), (0, 1)] {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= i64::from(w) || ny >= i64::from(h) {
                        continue;
                    }
                    let j = (ny as u32 * w + nx as u32) as usize;
                    if !seen[j] && mask.labels()[j] != RegionLabel::Unlabeled {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        count
    }

    #[test]
    fn single_blob_gives_one_region() {
        for s in 0..5 {
            let st = generate_stimulus(120, 90, 1, s).unwrap();
            assert_eq!(labeled_components(&st.mask), 1);
        }
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let a = generate_stimulus(100, 80, 3, 17).unwrap();
        let b = generate_stimulus(100, 80, 3, 17).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.image, generate_stimulus(100, 80, 3, 18).unwrap().image);
    }

    #[test]
    fn surface_integrates_to_one() {
        for s in 0..5 {
            let st = generate_stimulus(160, 120, 4, s).unwrap();
            assert!((st.surface.sum() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn depth_and_mask_agree() {
        let st = generate_stimulus(160, 120, 4, 3).unwrap();
        for (d, l) in st.depth.values().iter().zip(st.mask.labels()) {
            match l {
                RegionLabel::Foreground => assert_eq!(*d, NEAR_DEPTH),
                RegionLabel::Background => assert_eq!(*d, FAR_DEPTH),
                RegionLabel::Unlabeled => assert_eq!(*d, BACKGROUND_DEPTH),
            }
        }
        assert!(st.blobs.iter().any(|b| b.near) && st.blobs.iter().any(|b| !b.near));
    }

    #[test]
    fn blobs_stay_inside_the_region() {
        let mut p = StimulusParams::new(200, 150, 3);
        p.region = [0.55, 0.0, 1.0, 1.0];
        let st = generate_stimulus_with(&p, 5).unwrap();
        for b in &st.blobs {
            assert!(b.cx - b.radius() >= 110.0 - 1e-9);
        }
    }

    #[test]
    fn impossible_layouts_are_rejected() {
        assert!(generate_stimulus(20, 20, 1, 0).is_ok());
        assert!(generate_stimulus(40, 30, 60, 0).is_err());
        assert!(generate_stimulus(40, 30, 0, 0).is_err());
        let mut p = StimulusParams::new(100, 100, 1);
        p.sigma_range = (0.3, 0.3);
        assert!(generate_stimulus_with(&p, 0).is_err());
    }
}
