//! Seeded randomness. Every stochastic operation takes an explicit `u64`
//! seed and builds its own [`SimRng`].

use rand::SeedableRng;

/// The generator used throughout the crate.
pub type SimRng = rand_chacha::ChaCha8Rng;

pub fn seeded(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// splitmix64 finaliser.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for trial `trial` at SNR index `snr_index`: `base ⊕ hash(trial, snr_index)`.
pub fn trial_seed(base: u64, trial: u64, snr_index: u64) -> u64 {
    base ^ mix64(mix64(trial) ^ snr_index.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// Derives an independent sub-stream seed (e.g. noise vs. tap draws).
pub fn substream(seed: u64, stream: u64) -> u64 {
    mix64(seed ^ mix64(stream.wrapping_add(1)))
}
