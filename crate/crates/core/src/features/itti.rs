//! Center-surround contrast of intensity and opponent color.
//!
//! Each feature gets a 6-level Gaussian pyramid. Center level `c` in
//! {1, 2, 3} is compared with surround level `c + 2` brought to the center's
//! size; the rectified difference is upsampled to full resolution and tagged
//! with scale `c`.

use image::RgbImage;

use super::filters::{ColorPlanes, Plane};
use super::orientation::DEFAULT_WORKING_LONG_SIDE;
use super::tensor::{ChannelFamily, FeatureChannel};

const CENTERS: [usize; 3] = [1, 2, 3];
const DELTA: usize = 2;

fn center_surround(feature: &Plane, width: u32, height: u32) -> Vec<Plane> {
    let pyr = feature.pyramid(CENTERS[2] + DELTA + 1);
    CENTERS
        .iter()
        .map(|&c| {
            let center = &pyr[c];
            let surround = pyr[c + DELTA].resize(center.w, center.h);
            center
                .zip(&surround, |a, b| (a - b).abs())
                .resize(width as usize, height as usize)
        })
        .collect()
}

pub(crate) fn center_surround_channels(planes: &ColorPlanes, width: u32, height: u32) -> Vec<FeatureChannel> {
    let features = [
        ("intensity", ChannelFamily::Intensity, planes.intensity()),
        ("rg", ChannelFamily::Color, planes.red_green()),
        ("by", ChannelFamily::Color, planes.blue_yellow()),
    ];
    let mut out = Vec::with_capacity(9);
    for (name, family, plane) in features {
        for (c, p) in CENTERS.iter().zip(center_surround(&plane, width, height)) {
            out.push(FeatureChannel::new(
                format!("{name}.c{c}"),
                family,
                Some(*c as u8),
                p.into_normalized_map(),
            ));
        }
    }
    out
}

/// Intensity, red-green and blue-yellow center-surround channels, three
/// scales each.
pub fn intensity_color_channels(image: &RgbImage) -> Vec<FeatureChannel> {
    let planes = ColorPlanes::from_rgb(image).at_working_resolution(DEFAULT_WORKING_LONG_SIDE);
    center_surround_channels(&planes, image.width(), image.height())
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::Rgb;

    fn by_name<'a>(ch: &'a [FeatureChannel], name: &str) -> &'a FeatureChannel {
        ch.iter().find(|c| c.spec.name == name).unwrap()
    }

    #[test]
    fn gray_image_has_no_color_contrast() {
        let img = RgbImage::from_fn(64, 48, |x, y| {
            let v = ((x * 5 + y * 11) % 256) as u8;
            Rgb([v, v, v])
        });
        let ch = intensity_color_channels(&img);
        assert_eq!(ch.len(), 9);
        for c in ch.iter().filter(|c| c.spec.family == ChannelFamily::Color) {
            assert!(c.map.is_zero(), "{}", c.spec.name);
        }
        assert!(!by_name(&ch, "intensity.c1").map.is_zero());
    }

    #[test]
    fn uniform_red_has_no_contrast() {
        let img = RgbImage::from_pixel(64, 64, Rgb([220, 10, 10]));
        for c in intensity_color_channels(&img) {
            assert!(c.map.values().iter().all(|v| *v < 1e-6), "{}", c.spec.name);
        }
    }

    #[test]
    fn red_square_on_gray_peaks_on_the_square() {
        let (x0, y0, s) = (40u32, 30u32, 24u32);
        let img = RgbImage::from_fn(128, 96, |x, y| {
            if (x0..x0 + s).contains(&x) && (y0..y0 + s).contains(&y) {
                Rgb([230, 20, 20])
            } else {
                Rgb([128, 128, 128])
            }
        });
        let ch = intensity_color_channels(&img);
        for c in 1..=3 {
            let m = &by_name(&ch, &format!("rg.c{c}")).map;
            let p = m.pixel_of(m.argmax_set()[0]);
            // interior or boundary, allowing for pyramid blur at the edge
            let margin = 2u32 << c;
            assert!(
                p.x + margin >= x0 && p.x < x0 + s + margin && p.y + margin >= y0 && p.y < y0 + s + margin,
                "rg.c{c} argmax at ({}, {})",
                p.x,
                p.y
            );
        }
    }

    #[test]
    fn scales_are_tagged_by_center_level() {
        let img = RgbImage::from_fn(64, 64, |x, y| Rgb([(x * 4) as u8, (y * 4) as u8, 90]));
        let ch = intensity_color_channels(&img);
        for c in &ch {
            let lvl: u8 = c.spec.name.rsplit(".c").next().unwrap().parse().unwrap();
            assert_eq!(c.spec.scale, Some(lvl));
            assert_eq!(c.map.dims(), (64, 64));
        }
    }
}
