//! Counter-based RNG substreams.
//!
//! A master seed keys a ChaCha8 generator; each `(trial, role)` pair selects
//! its own 64-bit stream id, so streams never overlap and adding a role or a
//! trial leaves every other stream untouched.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Independent randomness consumers inside one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Role {
    Trial = 0,
    Code = 1,
    Channel = 2,
    Symbols = 3,
    Noise = 4,
    Delays = 5,
}

const LANE_BITS: u32 = 16;

/// Generator for `(master_seed, trial, role, user)`. `user` must be below 4096.
pub fn substream(master_seed: u64, trial: u64, role: Role, user: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    let lane = (role as u64) | (user << 4);
    rng.set_stream((trial << LANE_BITS) | lane);
    rng
}

/// A single 64-bit seed drawn from the given substream.
pub fn derive_seed(master_seed: u64, trial: u64, role: Role, user: u64) -> u64 {
    substream(master_seed, trial, role, user).next_u64()
}
