//! Seeded fan-out over independent replicas.

use rayon::prelude::*;
use serde::Serialize;

use crate::rng::{stream, Stream};

/// How many replicas to run, from which seed, on how many threads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Replication {
    pub reps: u64,
    pub seed: u64,
    /// Worker threads; 0 uses all available cores.
    pub workers: usize,
}

impl Replication {
    pub fn new(reps: u64, seed: u64) -> Self {
        Replication { reps, seed, workers: 0 }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    /// Same worker setting, different seed and count.
    pub fn derive(&self, reps: u64, tag: u64) -> Self {
        Replication { reps, seed: crate::rng::subseed(self.seed, tag), workers: self.workers }
    }

    /// Runs `f(i, stream_i)` for every replica and returns the results in replica order.
    pub fn run<T, F>(&self, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64, &mut Stream) -> T + Sync + Send,
    {
        self.run_range(0..self.reps, f)
    }

    /// Like `run`, for the replica indices in `range` only.
    pub fn run_range<T, F>(&self, range: std::ops::Range<u64>, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64, &mut Stream) -> T + Sync + Send,
    {
        let seed = self.seed;
        let job = || range.into_par_iter().map(|i| f(i, &mut stream(seed, i))).collect();
        if self.workers == 0 {
            job()
        } else {
            rayon::ThreadPoolBuilder::new().num_threads(self.workers).build().expect("thread pool").install(job)
        }
    }
}
