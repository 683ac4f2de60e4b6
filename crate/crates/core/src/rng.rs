//! Seeded, counter-based random streams.
//!
//! Every Monte-Carlo consumer in this crate draws sample `j` from an
//! independent ChaCha8 stream selected by `(seed, j)`. ChaCha is a
//! counter-mode generator with 2^64 independent streams, so parallel and
//! serial runs produce identical values and two consumers given the same
//! seed see the same sample sequence.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator for sample index `index` of the stream family `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// A uniform point of `dim` coordinates in the half-open-above cube
/// (0,1]^dim, drawn from the substream `(seed, index)`.
///
/// Discrepancy evaluation points must avoid coordinate 0 (the anchored
/// box [0, x) is empty there), so the unit draw u in [0,1) is mapped to
/// 1 - u.
pub fn sample_point(seed: u64, index: u64, dim: usize) -> Vec<f64> {
    let mut rng = substream(seed, index);
    (0..dim).map(|_| 1.0 - rng.random::<f64>()).collect()
}
