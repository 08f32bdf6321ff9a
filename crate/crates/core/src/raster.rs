//! Single-channel rasters shared by every stage: fixation counts, saliency
//! maps, feature channels, depth maps and region masks.

use serde::{Deserialize, Serialize};

use crate::data::Pixel;
use crate::error::{invalid_arg, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MapKind {
    /// Raw nonnegative values (fixation counts, densities, depths).
    Counts,
    /// Values in `[0, 1]` with maximum exactly 1 unless the map is all zero.
    Normalized,
}

/// Row-major `f64` raster.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarMap {
    width: u32,
    height: u32,
    values: Vec<f64>,
    kind: MapKind,
}

impl ScalarMap {
    pub fn zeros(width: u32, height: u32, kind: MapKind) -> Self {
        ScalarMap {
            width,
            height,
            values: vec![0.0; width as usize * height as usize],
            kind,
        }
    }

    pub fn new(width: u32, height: u32, values: Vec<f64>, kind: MapKind) -> Result<Self> {
        if values.len() != width as usize * height as usize {
            return Err(invalid_arg!(
                "{} values cannot fill a {width}x{height} map",
                values.len()
            ));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(invalid_arg!("map value {v} is not a finite nonnegative number"));
        }
        if kind == MapKind::Normalized {
            let max = values.iter().copied().fold(0.0, f64::max);
            if max > 1.0 + 1e-12 || (max > 0.0 && (max - 1.0).abs() > 1e-12) {
                return Err(invalid_arg!("normalized map has maximum {max}, expected 1"));
            }
        }
        Ok(ScalarMap {
            width,
            height,
            values,
            kind,
        })
    }

    /// Builds a map from raw nonnegative values and max-normalizes it.
    pub fn normalized_from(width: u32, height: u32, values: Vec<f64>) -> Result<Self> {
        Ok(ScalarMap::new(width, height, values, MapKind::Counts)?.max_normalized())
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn kind(&self) -> MapKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn index_of(&self, x: u32, y: u32) -> usize {
        y as usize * self.width as usize + x as usize
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.values[self.index_of(x, y)]
    }

    #[inline]
    pub fn at(&self, p: Pixel) -> f64 {
        self.get(p.x, p.y)
    }

    pub fn pixel_of(&self, index: usize) -> Pixel {
        let w = self.width as usize;
        Pixel::new((index % w) as u32, (index / w) as u32)
    }

    pub fn contains(&self, p: Pixel) -> bool {
        p.x < self.width && p.y < self.height
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    /// Indices attaining the maximum value.
    pub fn argmax_set(&self) -> Vec<usize> {
        let max = self.max();
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v == max)
            .map(|(i, _)| i)
            .collect()
    }

    /// Divides by the maximum. A zero map stays zero.
    pub fn max_normalized(&self) -> ScalarMap {
        let max = self.max();
        let values = if max > 0.0 {
            self.values.iter().map(|v| v / max).collect()
        } else {
            vec![0.0; self.values.len()]
        };
        ScalarMap {
            width: self.width,
            height: self.height,
            values,
            kind: MapKind::Normalized,
        }
    }

    pub fn ensure_same_dims(&self, other: &ScalarMap) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(invalid_arg!(
                "dimension mismatch: {}x{} vs {}x{}",
                self.width,
                self.height,
                other.width,
                other.height
            ));
        }
        Ok(())
    }

    pub(crate) fn from_parts_unchecked(
        width: u32,
        height: u32,
        values: Vec<f64>,
        kind: MapKind,
    ) -> Self {
        debug_assert_eq!(values.len(), width as usize * height as usize);
        ScalarMap {
            width,
            height,
            values,
            kind,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionLabel {
    Unlabeled,
    Foreground,
    Background,
}

impl RegionLabel {
    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(RegionLabel::Unlabeled),
            1 => Ok(RegionLabel::Foreground),
            2 => Ok(RegionLabel::Background),
            other => Err(Error::Validation(format!("region mask value {other} is not 0, 1 or 2"))),
        }
    }

    pub fn code(self) -> u8 {
        match self {
            RegionLabel::Unlabeled => 0,
            RegionLabel::Foreground => 1,
            RegionLabel::Background => 2,
        }
    }
}

/// Per-pixel foreground/background labels for an image.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMask {
    width: u32,
    height: u32,
    labels: Vec<RegionLabel>,
}

impl RegionMask {
    pub fn new(width: u32, height: u32, labels: Vec<RegionLabel>) -> Result<Self> {
        if labels.len() != width as usize * height as usize {
            return Err(invalid_arg!(
                "{} labels cannot fill a {width}x{height} mask",
                labels.len()
            ));
        }
        Ok(RegionMask {
            width,
            height,
            labels,
        })
    }

    pub fn unlabeled(width: u32, height: u32) -> Self {
        RegionMask {
            width,
            height,
            labels: vec![RegionLabel::Unlabeled; width as usize * height as usize],
        }
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn labels(&self) -> &[RegionLabel] {
        &self.labels
    }

    pub fn get(&self, x: u32, y: u32) -> RegionLabel {
        self.labels[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, label: RegionLabel) {
        let w = self.width as usize;
        self.labels[y as usize * w + x as usize] = label;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalized_invariants_enforced() {
        assert!(ScalarMap::new(2, 1, vec![0.5, 1.0], MapKind::Normalized).is_ok());
        assert!(ScalarMap::new(2, 1, vec![0.5, 0.4], MapKind::Normalized).is_err());
        assert!(ScalarMap::new(2, 1, vec![0.0, 0.0], MapKind::Normalized).is_ok());
        assert!(ScalarMap::new(2, 1, vec![-1.0, 0.0], MapKind::Counts).is_err());
        assert!(ScalarMap::new(2, 2, vec![0.0], MapKind::Counts).is_err());
    }

    #[test]
    fn max_normalization_keeps_argmax() {
        let m = ScalarMap::new(3, 1, vec![2.0, 4.0, 4.0], MapKind::Counts).unwrap();
        let n = m.max_normalized();
        assert_eq!(n.values(), &[0.5, 1.0, 1.0]);
        assert_eq!(n.argmax_set(), m.argmax_set());
        assert!(ScalarMap::zeros(2, 2, MapKind::Counts).max_normalized().is_zero());
    }
}
