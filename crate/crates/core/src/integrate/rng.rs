use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Address of a reproducible random stream.
///
/// Each `(seed, stream_id)` pair is an independent ChaCha8 keystream;
/// chunk `k` of that stream starts at block offset `k · 2^36`, so any chunk
/// can be regenerated without replaying the ones before it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct SeededStream {
    pub seed: u64,
    pub stream_id: u64,
}

const CHUNK_WORDS: u128 = 1 << 40;

impl SeededStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// A derived stream for a sub-task, e.g. one trial of a search.
    pub fn substream(&self, index: u64) -> Self {
        Self {
            seed: self.seed,
            stream_id: self
                .stream_id
                .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                .wrapping_add(index.wrapping_add(1)),
        }
    }

    /// Generator for the start of the stream.
    pub fn rng(&self) -> ChaCha8Rng {
        self.chunk_rng(0)
    }

    /// Generator positioned at chunk `chunk`.
    pub fn chunk_rng(&self, chunk: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng.set_word_pos(chunk as u128 * CHUNK_WORDS);
        rng
    }
}
