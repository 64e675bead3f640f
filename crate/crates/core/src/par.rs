//! Trial-level parallelism. Every trial owns the sub-stream
//! `(master_seed, trial index)`, and counts are reduced by integer addition,
//! so results do not depend on the worker count or scheduling.

use std::ops::Add;

use crate::error::{Error, Result};
use crate::rng::RandomStream;
use crate::screen::{TrialKernel, TrialOutcome};

/// Error-event counts over a batch of trials.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counts {
    pub trials: u64,
    pub unscreened: u64,
    pub screened: u64,
}

impl Counts {
    fn of(o: TrialOutcome) -> Self {
        Counts { trials: 1, unscreened: o.unscreened_error as u64, screened: o.screened_error as u64 }
    }
}

impl Add for Counts {
    type Output = Counts;
    fn add(self, o: Counts) -> Counts {
        Counts {
            trials: self.trials + o.trials,
            unscreened: self.unscreened + o.unscreened,
            screened: self.screened + o.screened,
        }
    }
}

/// Trials handed to a worker at a time.
#[cfg(feature = "parallel")]
const BLOCK: u64 = 1024;

pub enum Pool {
    Sequential,
    #[cfg(feature = "parallel")]
    Threads(rayon::ThreadPool),
}

impl Pool {
    /// `jobs` workers (default: available parallelism). Without the
    /// `parallel` feature this is always sequential.
    pub fn new(jobs: Option<usize>) -> Result<Self> {
        if jobs == Some(0) {
            return Err(Error::Config("--jobs must be at least 1".into()));
        }
        #[cfg(feature = "parallel")]
        {
            let jobs = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(Pool::Threads(pool))
        }
        #[cfg(not(feature = "parallel"))]
        {
            Ok(Pool::Sequential)
        }
    }

    pub fn workers(&self) -> usize {
        match self {
            Pool::Sequential => 1,
            #[cfg(feature = "parallel")]
            Pool::Threads(p) => p.current_num_threads(),
        }
    }

    /// `f(0), …, f(n-1)` in index order.
    pub fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        match self {
            Pool::Sequential => (0..n).map(f).collect(),
            #[cfg(feature = "parallel")]
            Pool::Threads(p) => {
                use rayon::prelude::*;
                p.install(|| (0..n).into_par_iter().map(&f).collect())
            }
        }
    }

    /// Runs `trials` trials of `kernel`; trial `i` draws from
    /// `substream(seed, offset + i)`.
    pub fn run_trials(&self, kernel: &TrialKernel, seed: u64, offset: u64, trials: u64) -> Counts {
        let one = |i: u64| Counts::of(kernel.outcome(&mut RandomStream::substream(seed, offset + i)));
        match self {
            Pool::Sequential => (0..trials).map(one).fold(Counts::default(), Add::add),
            #[cfg(feature = "parallel")]
            Pool::Threads(p) => {
                use rayon::prelude::*;
                let blocks = trials.div_ceil(BLOCK);
                p.install(|| {
                    (0..blocks)
                        .into_par_iter()
                        .map(|b| {
                            let end = ((b + 1) * BLOCK).min(trials);
                            (b * BLOCK..end).map(one).fold(Counts::default(), Add::add)
                        })
                        .reduce(Counts::default, Add::add)
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{DistributionModel, ObservablePair};
    use crate::screen::{ScreenConfig, Sidedness};

    #[test]
    fn counts_do_not_depend_on_workers() {
        let cfg = ScreenConfig { epsilon: 0.1, u: 0.3, n: 20, sidedness: Sidedness::TwoSided };
        let k = TrialKernel::new(&DistributionModel::ParetoLike, &ObservablePair::heavy_tail_example(), &cfg).unwrap();
        let a = Pool::Sequential.run_trials(&k, 5, 0, 3000);
        let b = Pool::new(Some(3)).unwrap().run_trials(&k, 5, 0, 3000);
        assert_eq!(a, b);
        assert_eq!(a.trials, 3000);
        assert!(a.screened <= a.unscreened && a.unscreened > 0);
        assert!(Pool::new(Some(0)).is_err());
    }

    #[test]
    fn map_keeps_order() {
        let v = Pool::new(Some(2)).unwrap().map(100, |i| i * i);
        assert_eq!(v, (0..100).map(|i| i * i).collect::<Vec<_>>());
    }
}
