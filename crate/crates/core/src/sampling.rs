//! Reproducible chunked Monte Carlo.
//!
//! A run of `samples` draws is cut into fixed chunks of [`CHUNK_SIZE`]. Chunk
//! `i` draws from the ChaCha8 stream `i` under the master seed, and the
//! per-chunk sums are merged in chunk order, so the result does not depend on
//! how many workers evaluated the chunks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::numeric::{compensated_sum, with_workers};

pub const CHUNK_SIZE: u64 = 1 << 16;

pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Sums of one chunk of draws of a nonnegative statistic.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ChunkStats {
    pub count: u64,
    /// Draws with a nonzero value.
    pub hits: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl ChunkStats {
    pub fn push(&mut self, value: f64) {
        self.count += 1;
        if value != 0.0 {
            self.hits += 1;
            self.sum += value;
            self.sum_sq += value * value;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub samples: u64,
    pub hits: u64,
    pub mean: f64,
    /// Sample standard deviation over `√samples`.
    pub std_error: f64,
}

pub fn summarize(chunks: &[ChunkStats]) -> Summary {
    let samples: u64 = chunks.iter().map(|c| c.count).sum();
    let hits = chunks.iter().map(|c| c.hits).sum();
    let sum = compensated_sum(chunks.iter().map(|c| c.sum));
    let sum_sq = compensated_sum(chunks.iter().map(|c| c.sum_sq));
    let n = samples as f64;
    let mean = if samples == 0 { 0.0 } else { sum / n };
    let var = if samples < 2 {
        0.0
    } else {
        ((sum_sq - sum * mean) / (n - 1.0)).max(0.0)
    };
    Summary {
        samples,
        hits,
        mean,
        std_error: (var / n).sqrt(),
    }
}

/// Evaluate `draw` on `samples` fresh draws split into chunks, in parallel.
pub fn run<F>(samples: u64, seed: u64, workers: Option<usize>, draw: F) -> Summary
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let chunks = samples.div_ceil(CHUNK_SIZE);
    let stats: Vec<ChunkStats> = with_workers(workers, || {
        (0..chunks)
            .into_par_iter()
            .map(|i| {
                let len = CHUNK_SIZE.min(samples - i * CHUNK_SIZE);
                let mut rng = chunk_rng(seed, i);
                let mut st = ChunkStats::default();
                for _ in 0..len {
                    st.push(draw(&mut rng));
                }
                st
            })
            .collect()
    });
    summarize(&stats)
}
