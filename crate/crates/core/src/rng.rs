//! Deterministic uniform streams for trajectories.
//!
//! Every trajectory draws from its own xoshiro256++ generator. The generator
//! for trajectory `index` of an ensemble with master seed `master` is
//! obtained as follows, so that any implementation can reproduce the stream:
//!
//! 1. `seed = splitmix64_mix(master + (index + 1) * 0x9E3779B97F4A7C15)`
//!    with wrapping 64-bit arithmetic, where `splitmix64_mix` is the
//!    SplitMix64 output function.
//! 2. The 256-bit xoshiro state is four consecutive SplitMix64 outputs
//!    started from `seed` (the reference `seed_from_u64` expansion).
//! 3. Uniforms are `(next_u64 >> 11) * 2^-53`, which lie in `[0, 1)`.

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// A source of i.i.d. uniform variates on `[0, 1)`.
pub trait UniformSource {
    fn next_uniform(&mut self) -> f64;
}

impl<F: FnMut() -> f64> UniformSource for F {
    fn next_uniform(&mut self) -> f64 {
        self()
    }
}

/// SplitMix64 output function.
pub fn splitmix64_mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trajectory `index` under `master_seed`.
pub fn trajectory_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64_mix(master_seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

#[derive(Clone, Debug)]
pub struct TrajectoryRng {
    inner: Xoshiro256PlusPlus,
}

impl TrajectoryRng {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            inner: Xoshiro256PlusPlus::seed_from_u64(seed),
        }
    }

    pub fn for_trajectory(master_seed: u64, index: u64) -> Self {
        Self::from_seed(trajectory_seed(master_seed, index))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
}

impl UniformSource for TrajectoryRng {
    fn next_uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}
