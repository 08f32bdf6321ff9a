//! Dense single-channel float planes and the filtering they need: separable
//! and 2-D convolution with replicated borders, Gaussian pyramids, bilinear
//! resampling.

use image::RgbImage;

use crate::raster::{MapKind, ScalarMap};

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Plane {
    pub w: usize,
    pub h: usize,
    pub data: Vec<f64>,
}

/// Binomial 5-tap kernel used for pyramid reduction.
const REDUCE_TAPS: [f64; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];

impl Plane {
    pub fn zeros(w: usize, h: usize) -> Self {
        Plane {
            w,
            h,
            data: vec![0.0; w * h],
        }
    }

    pub fn from_fn(w: usize, h: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(w * h);
        for y in 0..h {
            for x in 0..w {
                data.push(f(x, y));
            }
        }
        Plane { w, h, data }
    }

    pub fn from_map(map: &ScalarMap) -> Self {
        Plane {
            w: map.width() as usize,
            h: map.height() as usize,
            data: map.values().to_vec(),
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.w + x]
    }

    #[inline]
    fn clamped(&self, x: isize, y: isize) -> f64 {
        let x = x.clamp(0, self.w as isize - 1) as usize;
        let y = y.clamp(0, self.h as isize - 1) as usize;
        self.data[y * self.w + x]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Plane {
        Plane {
            w: self.w,
            h: self.h,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip(&self, other: &Plane, f: impl Fn(f64, f64) -> f64) -> Plane {
        debug_assert_eq!((self.w, self.h), (other.w, other.h));
        Plane {
            w: self.w,
            h: self.h,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Correlation with a separable kernel (odd lengths), replicated borders.
    pub fn convolve_separable(&self, kx: &[f64], ky: &[f64]) -> Plane {
        let (rx, ry) = ((kx.len() / 2) as isize, (ky.len() / 2) as isize);
        let mut tmp = Plane::zeros(self.w, self.h);
        for y in 0..self.h {
            for x in 0..self.w {
                let mut acc = 0.0;
                for (k, &t) in kx.iter().enumerate() {
                    acc += t * self.clamped(x as isize + k as isize - rx, y as isize);
                }
                tmp.data[y * self.w + x] = acc;
            }
        }
        let mut out = Plane::zeros(self.w, self.h);
        for y in 0..self.h {
            for x in 0..self.w {
                let mut acc = 0.0;
                for (k, &t) in ky.iter().enumerate() {
                    acc += t * tmp.clamped(x as isize, y as isize + k as isize - ry);
                }
                out.data[y * self.w + x] = acc;
            }
        }
        out
    }

    /// Correlation with a square `n x n` kernel stored row-major.
    pub fn convolve2d(&self, kernel: &[f64], n: usize) -> Plane {
        let r = (n / 2) as isize;
        let mut out = Plane::zeros(self.w, self.h);
        let interior = |x: usize, y: usize| {
            x as isize >= r && y as isize >= r && x + (r as usize) < self.w && y + (r as usize) < self.h
        };
        for y in 0..self.h {
            for x in 0..self.w {
                let mut acc = 0.0;
                if interior(x, y) {
                    for ky in 0..n {
                        let row = &self.data[(y + ky - r as usize) * self.w + x - r as usize..][..n];
                        let krow = &kernel[ky * n..(ky + 1) * n];
                        acc += row.iter().zip(krow).map(|(a, b)| a * b).sum::<f64>();
                    }
                } else {
                    for ky in 0..n {
                        for kx in 0..n {
                            acc += kernel[ky * n + kx]
                                * self.clamped(x as isize + kx as isize - r, y as isize + ky as isize - r);
                        }
                    }
                }
                out.data[y * self.w + x] = acc;
            }
        }
        out
    }

    /// Gaussian blur with a unit-sum truncated kernel and replicated borders.
    pub fn blur(&self, sigma: f64) -> Plane {
        if sigma <= 0.0 {
            return self.clone();
        }
        let taps = gaussian_kernel(sigma);
        self.convolve_separable(&taps, &taps)
    }

    /// Blur with the binomial kernel and keep every second pixel.
    pub fn reduce(&self) -> Plane {
        let b = self.convolve_separable(&REDUCE_TAPS, &REDUCE_TAPS);
        let (w, h) = (self.w.div_ceil(2), self.h.div_ceil(2));
        Plane::from_fn(w, h, |x, y| b.get(2 * x, 2 * y))
    }

    /// Bilinear resampling with pixel centers aligned.
    pub fn resize(&self, w: usize, h: usize) -> Plane {
        if (w, h) == (self.w, self.h) {
            return self.clone();
        }
        let sx = self.w as f64 / w as f64;
        let sy = self.h as f64 / h as f64;
        let src = if sx > 1.0 || sy > 1.0 {
            // anti-alias before shrinking
            let s = 0.5 * (sx.max(sy).powi(2) - 1.0).sqrt();
            self.blur(s)
        } else {
            self.clone()
        };
        let coord = |d: usize, scale: f64, n: usize| {
            let c = ((d as f64 + 0.5) * scale - 0.5).clamp(0.0, (n - 1) as f64);
            let i0 = c.floor() as usize;
            let i1 = (i0 + 1).min(n - 1);
            (i0, i1, c - i0 as f64)
        };
        let cols: Vec<_> = (0..w).map(|x| coord(x, sx, self.w)).collect();
        let mut out = Plane::zeros(w, h);
        for y in 0..h {
            let (y0, y1, fy) = coord(y, sy, self.h);
            for (x, &(x0, x1, fx)) in cols.iter().enumerate() {
                let top = src.get(x0, y0) * (1.0 - fx) + src.get(x1, y0) * fx;
                let bot = src.get(x0, y1) * (1.0 - fx) + src.get(x1, y1) * fx;
                out.data[y * w + x] = top * (1.0 - fy) + bot * fy;
            }
        }
        out
    }

    /// `levels` planes, the first being `self`.
    pub fn pyramid(&self, levels: usize) -> Vec<Plane> {
        let mut out = vec![self.clone()];
        while out.len() < levels {
            let next = out.last().unwrap().reduce();
            out.push(next);
        }
        out
    }

    /// Max-normalized map; values at or below `NEAR_ZERO` everywhere give a
    /// zero map. Negative values are clipped.
    pub fn into_normalized_map(self) -> ScalarMap {
        normalize_by(self, None)
    }
}

/// Maxima below this are treated as numerical noise.
pub(crate) const NEAR_ZERO: f64 = 1e-9;

/// Max-normalizes with an explicit divisor (e.g. a maximum shared by several
/// planes), or the plane's own maximum when `None`.
pub(crate) fn normalize_by(p: Plane, max: Option<f64>) -> ScalarMap {
    let m = max.unwrap_or_else(|| p.max());
    let values = if m > NEAR_ZERO {
        p.data.iter().map(|&v| (v / m).clamp(0.0, 1.0)).collect()
    } else {
        vec![0.0; p.data.len()]
    };
    ScalarMap::from_parts_unchecked(p.w as u32, p.h as u32, values, MapKind::Normalized)
}

pub(crate) fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let r = (3.0 * sigma).ceil().max(1.0) as i64;
    let mut taps: Vec<f64> = (-r..=r)
        .map(|d| (-(d * d) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= s);
    taps
}

/// R, G, B in `[0, 1]`.
pub(crate) struct ColorPlanes {
    pub r: Plane,
    pub g: Plane,
    pub b: Plane,
}

impl ColorPlanes {
    pub fn from_rgb(image: &RgbImage) -> Self {
        let (w, h) = (image.width() as usize, image.height() as usize);
        let mut r = Plane::zeros(w, h);
        let mut g = Plane::zeros(w, h);
        let mut b = Plane::zeros(w, h);
        for (i, px) in image.pixels().enumerate() {
            r.data[i] = f64::from(px[0]) / 255.0;
            g.data[i] = f64::from(px[1]) / 255.0;
            b.data[i] = f64::from(px[2]) / 255.0;
        }
        ColorPlanes { r, g, b }
    }

    /// Shrinks so the long side is at most `long_side`; never enlarges.
    pub fn at_working_resolution(self, long_side: usize) -> Self {
        let (w, h) = (self.r.w, self.r.h);
        let long = w.max(h);
        if long <= long_side {
            return self;
        }
        let f = long_side as f64 / long as f64;
        let (nw, nh) = (((w as f64 * f).round() as usize).max(1), ((h as f64 * f).round() as usize).max(1));
        ColorPlanes {
            r: self.r.resize(nw, nh),
            g: self.g.resize(nw, nh),
            b: self.b.resize(nw, nh),
        }
    }

    pub fn intensity(&self) -> Plane {
        Plane {
            w: self.r.w,
            h: self.r.h,
            data: (0..self.r.data.len())
                .map(|i| (self.r.data[i] + self.g.data[i] + self.b.data[i]) / 3.0)
                .collect(),
        }
    }

    pub fn red_green(&self) -> Plane {
        self.r.zip(&self.g, |r, g| r - g)
    }

    pub fn blue_yellow(&self) -> Plane {
        Plane {
            w: self.r.w,
            h: self.r.h,
            data: (0..self.r.data.len())
                .map(|i| self.b.data[i] - (self.r.data[i] + self.g.data[i]) / 2.0)
                .collect(),
        }
    }
}
