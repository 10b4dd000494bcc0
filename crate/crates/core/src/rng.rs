//! Deterministic PRNG streams.
//!
//! Every source of randomness in the toolkit is a ChaCha8 stream derived from
//! a run seed plus a `(stage, index)` pair. Streams are independent, so work
//! scheduled in parallel draws the same numbers regardless of thread count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stages that own a dedicated substream namespace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// Train/test split shuffling.
    Split = 1,
    /// Internal validation re-split inside the optimizer.
    ValidationSplit = 2,
    /// Per-particle draws (init + velocity updates).
    Particle = 3,
    /// Model-internal randomness (bootstraps, random thresholds, init).
    Model = 4,
    /// Cross-validation fold shuffling.
    Fold = 5,
    /// Background sampling and coalition sampling for attributions.
    Shapley = 6,
}

/// A ChaCha8 generator on the substream identified by `(seed, stage, index)`.
pub fn stream(seed: u64, stage: Stage, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((stage as u64) << 48) ^ index);
    rng
}
