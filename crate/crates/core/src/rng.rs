//! Seeded random streams and deterministic chunked execution.
//!
//! Work that consumes random numbers is cut into fixed-size chunks. Chunk
//! `c` always reads from the same position of the ChaCha stream selected by
//! `(seed, stream)`, so results do not depend on how chunks are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Words of keystream reserved for each block.
const BLOCK_SHIFT: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed {
    pub seed: u64,
    pub stream: u64,
}

impl RngSeed {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngSeed { seed, stream }
    }

    pub fn rng(&self) -> ChaCha20Rng {
        self.rng_at_block(0)
    }

    /// Generator positioned at the start of block `block` of this stream.
    pub fn rng_at_block(&self, block: u64) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng.set_word_pos(u128::from(block) << BLOCK_SHIFT);
        rng
    }

    /// The same seed on another stream.
    pub fn with_stream(&self, stream: u64) -> Self {
        RngSeed {
            seed: self.seed,
            stream,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecutionMode {
    #[default]
    Sequential,
    Parallel,
}

/// Splits `total` items into chunks of `chunk_size` and maps each chunk
/// `(index, len, rng)` to a value. Output order is chunk order in both modes.
pub fn map_chunks<T, F>(
    total: usize,
    chunk_size: usize,
    seed: RngSeed,
    mode: ExecutionMode,
    f: F,
) -> Vec<T>
where
    T: Send,
    F: Fn(usize, usize, &mut ChaCha20Rng) -> T + Sync,
{
    let chunk_size = chunk_size.max(1);
    let chunks = total.div_ceil(chunk_size);
    let run = |c: usize| {
        let len = chunk_size.min(total - c * chunk_size);
        let mut rng = seed.rng_at_block(c as u64);
        f(c, len, &mut rng)
    };
    match mode {
        ExecutionMode::Sequential => (0..chunks).map(run).collect(),
        ExecutionMode::Parallel => (0..chunks).into_par_iter().map(run).collect(),
    }
}
