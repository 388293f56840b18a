//! Haar-random pure states and seeded, parallel Monte Carlo averaging.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::linalg::{CVector, StateVector, C64};

/// Samples per independent RNG stream.
pub const CHUNK: usize = 1024;

/// Haar-random ket: a normalized complex Gaussian vector.
pub fn haar_random_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> StateVector {
    loop {
        let v = CVector::from_fn(dim, |_, _| {
            C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
        });
        if let Ok(psi) = StateVector::from_vector(v) {
            return psi;
        }
    }
}

/// Welford accumulator with Chan's pairwise merge.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningStats {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(self, other: RunningStats) -> RunningStats {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.count as f64 / count as f64;
        let m2 = self.m2 + other.m2 + delta * delta * (self.count as f64 * other.count as f64) / count as f64;
        RunningStats { count, mean, m2 }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn std_err(&self) -> f64 {
        if self.count == 0 {
            return f64::NAN;
        }
        (self.variance() / self.count as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub samples: u64,
}

impl McEstimate {
    /// `|mean - target| <= k·std_err`
    pub fn agrees_with(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_err
    }
}

/// Averages `f(ψ)` over `samples` Haar-random kets of dimension `dim`.
///
/// Chunk `i` draws from stream `i` of a ChaCha8 generator seeded with `seed`,
/// and chunk results are merged in index order, so the estimate does not
/// depend on the thread count.
pub fn haar_mean<F>(dim: usize, samples: usize, seed: u64, f: F) -> McEstimate
where
    F: Fn(&StateVector) -> f64 + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<RunningStats> = (0..chunks)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let len = CHUNK.min(samples - i * CHUNK);
            let mut stats = RunningStats::default();
            for _ in 0..len {
                stats.push(f(&haar_random_state(dim, &mut rng)));
            }
            stats
        })
        .collect();
    let stats = partial.into_iter().fold(RunningStats::default(), RunningStats::merge);
    McEstimate { mean: stats.mean(), std_err: stats.std_err(), samples: stats.count() }
}

/// `count` Haar-random kets from stream 0 of a generator seeded with `seed`.
pub fn seeded_haar_states(dim: usize, count: usize, seed: u64) -> Vec<StateVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| haar_random_state(dim, &mut rng)).collect()
}
