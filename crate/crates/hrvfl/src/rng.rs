//! Seeded randomness with a pinned generator contract.
//!
//! Reproducibility across runs, thread counts, and scalar types requires the
//! random streams themselves to be part of the public contract:
//!
//! * Generator: ChaCha with 8 rounds (`rand_chacha::ChaCha8Rng`), seeded via
//!   `SeedableRng::seed_from_u64` (SplitMix64 key expansion as specified by
//!   `rand_core`).
//! * Unit doubles: the top 53 bits of `next_u64`, i.e.
//!   `(u >> 11) as f64 * 2^-53`, uniform on `[0, 1)`.
//! * Bounded integers: rejection sampling on `next_u64` (no modulo bias).
//! * Index subsets and shuffles: Fisher–Yates driven by the bounded-integer
//!   primitive.
//! * Normals: Box–Muller on two unit doubles.
//!
//! Sub-seeds for independent consumers are derived by hashing the master seed
//! together with a list of context strings (SHA-256, first 8 bytes,
//! little-endian), so no two consumers ever share a stream.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use sha2::{Digest, Sha256};

/// The crate's deterministic generator.
pub type Rng = ChaCha8Rng;

/// Create the pinned generator from a 64-bit seed.
pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform double on `[0, 1)` from the top 53 bits of one `next_u64` draw.
pub fn unit_f64(rng: &mut Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform integer in `[0, bound)` via rejection sampling. `bound` must be > 0.
pub fn index_below(rng: &mut Rng, bound: usize) -> usize {
    debug_assert!(bound > 0);
    let bound = bound as u64;
    let zone = u64::MAX - (u64::MAX % bound);
    loop {
        let v = rng.next_u64();
        if v < zone {
            return (v % bound) as usize;
        }
    }
}

/// The first `count` elements of a seeded Fisher–Yates shuffle of `0..n`:
/// a uniform random subset of size `count`, in shuffle order.
pub fn sample_indices(rng: &mut Rng, n: usize, count: usize) -> Vec<usize> {
    debug_assert!(count <= n);
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..count {
        let j = i + index_below(rng, n - i);
        pool.swap(i, j);
    }
    pool.truncate(count);
    pool
}

/// Seeded in-place Fisher–Yates shuffle.
pub fn shuffle<T>(rng: &mut Rng, items: &mut [T]) {
    let n = items.len();
    for i in 0..n.saturating_sub(1) {
        let j = i + index_below(rng, n - i);
        items.swap(i, j);
    }
}

/// Standard normal draw via Box–Muller on two unit doubles.
pub fn standard_normal(rng: &mut Rng) -> f64 {
    // u must be > 0 for the log; 1 - unit keeps it in (0, 1].
    let u = 1.0 - unit_f64(rng);
    let v = unit_f64(rng);
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

/// Derive a sub-seed from a master seed and a context path.
///
/// SHA-256 over the master seed (little-endian) followed by each context
/// string prefixed with its length, taking the first 8 digest bytes.
pub fn derive_seed(master: u64, context: &[&str]) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    for part in context {
        hasher.update((part.len() as u64).to_le_bytes());
        hasher.update(part.as_bytes());
    }
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}
