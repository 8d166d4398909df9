//! Thread-parallel drivers that reproduce the sequential core results.
//!
//! Blocks are computed in any order but always merged in block order, so
//! the output does not depend on the thread count.

use rand::Rng;
use rayon::prelude::*;

use molekom_core::mc::slot_level::{SlotLevelSim, SlotLevelTally};
use molekom_core::mc::{rng_stream, ArrivalHistogram, TrajectorySim};

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "MOLEKOM_THREADS";

/// Worker count from [`THREADS_ENV`], if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

pub struct Pool {
    inner: rayon::ThreadPool,
}

impl Pool {
    /// `None` uses every available core.
    pub fn new(threads: Option<usize>) -> Pool {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = threads {
            builder = builder.num_threads(n);
        }
        Pool { inner: builder.build().expect("thread pool") }
    }

    pub fn threads(&self) -> usize {
        self.inner.current_num_threads()
    }

    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.inner.install(f)
    }
}

/// Order-preserving parallel map.
pub fn map<T: Sync, R: Send>(items: &[T], f: impl Fn(usize, &T) -> R + Sync) -> Vec<R> {
    items.par_iter().enumerate().map(|(i, x)| f(i, x)).collect()
}

pub fn slot_level(sim: &SlotLevelSim) -> SlotLevelTally {
    let blocks: Vec<SlotLevelTally> = (0..sim.block_count()).into_par_iter().map(|b| sim.run_block(b)).collect();
    let mut iter = blocks.into_iter();
    let mut total = iter.next().expect("at least one block");
    for block in iter {
        total.merge(&block);
    }
    total
}

/// `(coarse, fine)` histograms of a trajectory run.
pub fn trajectory(sim: &TrajectorySim) -> (ArrivalHistogram, ArrivalHistogram) {
    let blocks: Vec<_> = (0..sim.block_count()).into_par_iter().map(|b| sim.run_block(b)).collect();
    let mut iter = blocks.into_iter();
    let (mut coarse, mut fine) = iter.next().expect("at least one block");
    for (c, f) in iter {
        coarse.merge(&c);
        fine.merge(&f);
    }
    (coarse, fine)
}

/// Seed of sweep point `index`, derived from the config seed on a stream
/// range the trials themselves never use.
pub fn point_seed(seed: u64, index: usize) -> u64 {
    rng_stream(seed, (1 << 63) | index as u64).random()
}

#[cfg(test)]
mod tests {
    use super::*;
    use molekom_core::mc::McConfig;
    use molekom_core::{ArrivalTable, ChannelParams, NoiseParams, TxSchedule};

    #[test]
    fn parallel_matches_sequential() {
        let p = ChannelParams::new(1e-6, 5e-10, 1e-9, 1e-9, 1e-2).unwrap();
        let t = ArrivalTable::compute(4, &p).unwrap();
        let s = TxSchedule::uniform(20, 4, 0.5).unwrap();
        let n = NoiseParams::new(1.0, 4.0).unwrap();
        let sim = SlotLevelSim::new(&s, &n, &t, McConfig::slot_level(20_000, 3)).unwrap();
        let seq = sim.run();
        for threads in [1, 3] {
            assert_eq!(Pool::new(Some(threads)).install(|| slot_level(&sim)), seq);
        }
        let cfg = McConfig::trajectory(3000, 2, 1e-4, 2);
        let traj = TrajectorySim::new(&p, 1, 3000, &cfg, 2).unwrap();
        assert_eq!(Pool::new(Some(2)).install(|| trajectory(&traj)), traj.run());
    }

    #[test]
    fn point_seeds_differ() {
        assert_ne!(point_seed(1, 0), point_seed(1, 1));
        assert_eq!(point_seed(5, 7), point_seed(5, 7));
    }
}
