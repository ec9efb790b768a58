//! Seed derivation and per-unit random streams.
//!
//! Every Monte Carlo unit (a path, an antithetic pair, a sample point) gets
//! its own ChaCha8 stream keyed by (task seed, unit index), so any unit can be
//! regenerated in isolation and results do not depend on the worker layout.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type UnitRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive an independent task seed from a master seed and a label.
pub fn derive_seed(master: u64, label: &str) -> u64 {
    let mut h = splitmix64(master);
    for b in label.bytes() {
        h = splitmix64(h ^ b as u64);
    }
    h
}

pub fn derive_seed_indexed(master: u64, label: &str, index: u64) -> u64 {
    splitmix64(derive_seed(master, label) ^ splitmix64(index))
}

pub fn unit_stream(seed: u64, index: u64) -> UnitRng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index);
    r
}
