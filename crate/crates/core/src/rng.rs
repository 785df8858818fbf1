//! Counter-based random streams.
//!
//! Every Monte Carlo trial draws from generators keyed by
//! `(master_seed, purpose, trial_index)`, so results do not depend on how
//! trials are scheduled across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a random stream is used for. Each purpose gets an independent key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Channel = 1,
    Data = 2,
    Noise = 3,
    Pilots = 4,
    Misc = 5,
}

/// Generator for `(master_seed, purpose, trial)`.
pub fn trial_rng(master_seed: u64, purpose: Stream, trial: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8] = purpose as u8;
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(trial);
    rng
}
