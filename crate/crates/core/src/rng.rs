//! Seeded, splittable uniform sources.
//!
//! Every trial draws from its own ChaCha8 stream addressed by
//! `(master_seed, trial_index)`, so a trial's samples never depend on how
//! trials were scheduled across workers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A single-owner deterministic uniform source.
#[derive(Clone, Debug)]
pub struct RandomStream {
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Sub-stream `index` of the master seed. ChaCha supports 2^64 streams
    /// per key, one per trial.
    pub fn substream(master_seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(index);
        Self { rng }
    }

    /// Uniform draw on `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}
