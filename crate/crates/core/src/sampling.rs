//! Seeded, platform-independent sampling for batch checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::euler::EulerAngles;
use crate::linalg3::SymMat3;

/// Identifier written into every report header.
pub const PRNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.9, seed_from_u64)";

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Symmetric matrix with all six entries uniform in `[−half_width, half_width]`.
pub fn random_symmetric(rng: &mut SampleRng, half_width: f64) -> SymMat3 {
    let mut e = [0.0; 6];
    for v in e.iter_mut() {
        *v = rng.random_range(-half_width..=half_width);
    }
    SymMat3::new(e[0], e[1], e[2], e[3], e[4], e[5])
}

/// Angles uniform in `[−π, π]³`.
pub fn random_angles(rng: &mut SampleRng) -> EulerAngles {
    let pi = std::f64::consts::PI;
    EulerAngles::new(
        rng.random_range(-pi..=pi),
        rng.random_range(-pi..=pi),
        rng.random_range(-pi..=pi),
    )
}

/// `n` matrices drawn in order from one stream.
pub fn symmetric_batch(seed: u64, n: usize, half_width: f64) -> Vec<SymMat3> {
    let mut r = rng(seed);
    (0..n)
        .map(|_| random_symmetric(&mut r, half_width))
        .collect()
}
