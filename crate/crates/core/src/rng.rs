//! Seeded random streams.
//!
//! Every agent owns one ChaCha8 stream selected by `(master seed, agent id)`,
//! so the draws an agent sees do not depend on the order in which agents are
//! processed within a round.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator type every agent owns.
pub type AgentRng = ChaCha8Rng;

/// Private stream of agent `agent` under `seed`.
pub fn agent_rng(seed: u64, agent: usize) -> AgentRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(agent as u64);
    rng
}

/// SplitMix64 finalizer.
pub fn mix64(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Derives an independent sub-seed for a named purpose (graph, partition, ...).
pub fn derive_seed(master: u64, tag: &str) -> u64 {
    let mut h = mix64(master.wrapping_add(0x9E37_79B9_7F4A_7C15));
    for b in tag.bytes() {
        h = mix64(h ^ u64::from(b));
    }
    h
}
