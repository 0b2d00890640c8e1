//! Deterministic seed derivation.
//!
//! A master seed is split into independent subsystem streams by folding
//! labels (or index tuples) through SplitMix64. The mapping is part of the
//! reproducibility contract: a run manifest records only the master seed, and
//! every derived stream follows from it.

/// One SplitMix64 step.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the subsystem seed `master -> label`, e.g. `split(seed, "chain")`.
pub fn split(master: u64, label: &str) -> u64 {
    let mut state = master;
    let mut out = splitmix64(&mut state);
    for &byte in label.as_bytes() {
        state ^= u64::from(byte);
        out = splitmix64(&mut state);
    }
    out
}

/// Derives a seed for an indexed substream, e.g. one per (quantity, time
/// point, branch) in shot sampling.
pub fn substream(master: u64, parts: &[u64]) -> u64 {
    let mut state = master;
    let mut out = splitmix64(&mut state);
    for &part in parts {
        state ^= part;
        out = splitmix64(&mut state);
    }
    out
}
