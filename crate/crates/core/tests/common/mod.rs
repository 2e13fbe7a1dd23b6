#![allow(dead_code)]

use std::path::PathBuf;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rcexp_core::{Channel, Distribution, DistortionModel, ModelSpec};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Full support, smallest entry bounded away from zero.
pub fn dist(rng: &mut ChaCha8Rng, k: usize) -> Distribution {
    Distribution::normalized((0..k).map(|_| rng.random_range(0.05..1.0)).collect()).unwrap()
}

pub fn channel(rng: &mut ChaCha8Rng, nx: usize, ny: usize) -> Channel {
    let rows = (0..nx).map(|_| dist(rng, ny).probs().to_vec()).collect();
    Channel::new(rows).unwrap()
}

pub fn distortion(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DistortionModel {
    DistortionModel::new((0..r).map(|_| (0..c).map(|_| rng.random_range(0.0..1.0)).collect()).collect()).unwrap()
}

pub fn fixture(name: &str) -> ModelSpec {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures", name].iter().collect();
    ModelSpec::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap()
}
