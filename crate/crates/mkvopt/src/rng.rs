//! Deterministic random-number streams.
//!
//! Every run owns one stream per purpose (initialization, per-particle noise,
//! common noise). Keeping the channels on separate streams means toggling the
//! common-noise plug-in never perturbs the per-particle draw sequence, which
//! is what makes paired comparisons across noise variants meaningful.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

/// Purpose tag selecting a sub-stream within one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StreamPurpose {
    Init,
    ParticleNoise,
    CommonNoise,
}

impl StreamPurpose {
    fn stream_id(self) -> u64 {
        match self {
            StreamPurpose::Init => 0,
            StreamPurpose::ParticleNoise => 1,
            StreamPurpose::CommonNoise => 2,
        }
    }
}

/// Seed descriptor for one deterministic draw sequence.
///
/// Identical `(seed, stream_id)` pairs yield bit-identical sequences across
/// executions and thread counts: the generator is counter-based ChaCha12 with
/// the stream id mapped onto the cipher's stream field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn for_purpose(seed: u64, purpose: StreamPurpose) -> Self {
        Self::new(seed, purpose.stream_id())
    }

    /// Instantiate the generator positioned at the start of the stream.
    pub fn rng(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn identical_stream_identical_draws() {
        let a: Vec<u64> = RngStream::new(7, 3).rng().random_iter().take(32).collect();
        let b: Vec<u64> = RngStream::new(7, 3).rng().random_iter().take(32).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn streams_are_distinct() {
        let a: Vec<u64> = RngStream::new(7, 0).rng().random_iter().take(8).collect();
        let b: Vec<u64> = RngStream::new(7, 1).rng().random_iter().take(8).collect();
        let c: Vec<u64> = RngStream::new(8, 0).rng().random_iter().take(8).collect();
        assert_ne!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn purposes_map_to_fixed_ids() {
        assert_eq!(RngStream::for_purpose(1, StreamPurpose::Init).stream_id, 0);
        assert_eq!(
            RngStream::for_purpose(1, StreamPurpose::CommonNoise).stream_id,
            2
        );
    }

    #[test]
    fn gaussian_draws_reproducible() {
        let mut r1 = RngStream::new(99, 2).rng();
        let mut r2 = RngStream::new(99, 2).rng();
        for _ in 0..100 {
            let x: f64 = r1.sample(rand_distr::StandardNormal);
            let y: f64 = r2.sample(rand_distr::StandardNormal);
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
}
