//! Per-trial random streams.
//!
//! Trial `t` of a run seeded with `s` draws from ChaCha8 keyed by `s` on
//! stream `t`, so every trial's randomness is fixed by `(s, t)` alone and
//! batches give identical results however they are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

pub fn trial_rng(seed: u64, trial: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}
