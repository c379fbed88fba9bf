use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Master seed plus stream index; each `(seed, stream)` pair owns an
/// independent ChaCha8 keystream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub seed: u64,
    pub stream: u64,
}

impl SeedSpec {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Stream for replication `index` below this spec's stream.
    ///
    /// Streams are split as `stream * 2^32 + index`, so the experiment
    /// drivers can hand out up to 2^32 replications per base stream.
    pub fn replication(&self, index: u64) -> Self {
        Self { seed: self.seed, stream: (self.stream << 32).wrapping_add(index) }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}
