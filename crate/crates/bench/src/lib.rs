//! Fixtures shared by the benchmarks.

use agesal::seed::rng_from;
use agesal::synth::{generate_stimulus, Stimulus};
use agesal::{Pixel, ScalarMap};
use rand::Rng;

pub fn random_map(width: u32, height: u32, seed: u64) -> ScalarMap {
    let mut rng = rng_from(seed);
    let v = (0..width * height).map(|_| rng.random::<f64>()).collect();
    ScalarMap::normalized_from(width, height, v).expect("valid dimensions")
}

pub fn random_pixels(width: u32, height: u32, n: usize, seed: u64) -> Vec<Pixel> {
    let mut rng = rng_from(seed);
    (0..n)
        .map(|_| Pixel::new(rng.random_range(0..width), rng.random_range(0..height)))
        .collect()
}

pub fn stimulus(width: u32, height: u32, seed: u64) -> Stimulus {
    generate_stimulus(width, height, 5, seed).expect("stimulus fits")
}
