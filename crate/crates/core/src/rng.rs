//! Seeded random streams. Every random quantity of a trajectory comes from one
//! 64-bit seed, split into independent ChaCha streams by fixed labels.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::scalar::Scalar;

pub type StreamRng = ChaCha8Rng;

/// Fixed substream labels. Changing these changes every recorded trace.
pub mod label {
    pub const SCENARIO: u64 = 1;
    pub const BIAS: u64 = 2;
    pub const PROBE: u64 = 3;
    pub const MONTE_CARLO: u64 = 4;
    pub const CONSTRUCTION: u64 = 5;
}

pub fn stream(seed: u64, label: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(label);
    rng
}

/// Random state owned by one trajectory.
#[derive(Debug, Clone)]
pub struct TrajectoryRng {
    pub scenarios: StreamRng,
    pub bias: StreamRng,
    pub probes: StreamRng,
}

impl TrajectoryRng {
    pub fn new(seed: u64) -> Self {
        Self {
            scenarios: stream(seed, label::SCENARIO),
            bias: stream(seed, label::BIAS),
            probes: stream(seed, label::PROBE),
        }
    }
}

pub(crate) fn uniform<T: Scalar, R: Rng + ?Sized>(rng: &mut R, lo: T, hi: T) -> T {
    let t: f64 = rng.random();
    lo + (hi - lo) * T::lit(t)
}

pub(crate) fn normal<T: Scalar, R: Rng + ?Sized>(rng: &mut R) -> T {
    let z: f64 = rng.sample(StandardNormal);
    T::lit(z)
}

pub(crate) fn normal_vec<T: Scalar, R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<T> {
    (0..d).map(|_| normal(rng)).collect()
}
