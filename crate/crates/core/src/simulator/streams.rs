//! Counter-based random streams: one ChaCha key per (seed, role), one stream
//! per trial, so every trial is reproducible on its own.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub(crate) enum Role {
    Types = 1,
    Signals = 2,
    Aggregate = 3,
}

pub(crate) fn stream(seed: u64, role: Role, trial: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(role as u64).to_le_bytes());
    key[16..].copy_from_slice(b"committee-trials");
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(trial);
    rng
}
