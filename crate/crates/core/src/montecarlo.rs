//! Seeded, sharded Monte Carlo harness.
//!
//! Trials are split over `shards` independent streams. Shard `i` uses a
//! ChaCha8 generator seeded from the master seed with stream number `i`, and
//! gets `trials / shards` trials plus one if `i < trials % shards`. Shards run
//! in parallel; tallies are reduced in shard order, so results depend only on
//! `(master_seed, shards, trials)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Generator type handed to every trial closure.
pub type McRng = ChaCha8Rng;

/// Independent stream for `(master_seed, shard)`.
pub fn shard_rng(master_seed: u64, shard: usize) -> McRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(shard as u64);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McPlan {
    pub trials: u64,
    pub master_seed: u64,
    pub shards: usize,
}

impl McPlan {
    pub fn new(trials: u64, master_seed: u64, shards: usize) -> Self {
        McPlan {
            trials,
            master_seed,
            shards: shards.max(1),
        }
    }

    pub fn shard_trials(&self, shard: usize) -> u64 {
        let n = self.shards as u64;
        self.trials / n + u64::from((shard as u64) < self.trials % n)
    }

    /// Run `trial` once per trial; it returns `true` on an error event.
    pub fn count<F>(&self, trial: F) -> Tally
    where
        F: Fn(&mut McRng) -> bool + Sync,
    {
        let per_shard: Vec<u64> = (0..self.shards)
            .into_par_iter()
            .map(|s| {
                let mut rng = shard_rng(self.master_seed, s);
                (0..self.shard_trials(s)).filter(|_| trial(&mut rng)).count() as u64
            })
            .collect();
        Tally {
            trials: self.trials,
            events: per_shard.iter().sum(),
        }
    }
}

/// Event count out of a number of Bernoulli trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Tally {
    pub trials: u64,
    pub events: u64,
}

impl Tally {
    pub fn rate(&self) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        self.events as f64 / self.trials as f64
    }

    /// Binomial standard deviation of the rate evaluated at probability `p`.
    pub fn sigma_at(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    /// Whether the observed rate lies within `k` binomial standard
    /// deviations of the reference probability `p`.
    pub fn within_sigmas(&self, p: f64, k: f64) -> bool {
        (self.rate() - p).abs() <= k * self.sigma_at(p)
    }

    /// Half-width of the Wilson score interval at normal quantile `z`.
    pub fn wilson_half_width(&self, z: f64) -> f64 {
        if self.trials == 0 {
            return 0.5;
        }
        let n = self.trials as f64;
        let p = self.rate();
        let z2 = z * z;
        z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn shard_split_covers_all_trials() {
        let plan = McPlan::new(10, 0, 4);
        let parts: Vec<u64> = (0..4).map(|s| plan.shard_trials(s)).collect();
        assert_eq!(parts, vec![3, 3, 2, 2]);
        assert_eq!(parts.iter().sum::<u64>(), 10);
    }

    #[test]
    fn fixed_seed_and_shards_reproduce() {
        let plan = McPlan::new(100_000, 42, 7);
        let f = |rng: &mut McRng| rng.random::<f64>() < 0.3;
        assert_eq!(plan.count(f), plan.count(f));
    }

    #[test]
    fn streams_differ_between_shards() {
        let a: u64 = shard_rng(5, 0).random();
        let b: u64 = shard_rng(5, 1).random();
        assert_ne!(a, b);
    }

    #[test]
    fn wilson_interval_is_nonzero_at_zero_events() {
        let t = Tally {
            trials: 1000,
            events: 0,
        };
        assert!(t.wilson_half_width(1.96) > 0.0);
        assert_eq!(t.rate(), 0.0);
    }
}
