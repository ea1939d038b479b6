//! Acceptance-rate benchmark of the completion sampler.
//!
//! For each masking ratio a fixed set of random masks is generated and every
//! strategy (traversal × root choice) is run on the same masks. Mask `i` of
//! ratio `r` draws from its own stream seeded by
//! `splitmix64(seed ^ (r * masks_per_ratio + i))`, so results do not depend
//! on how the work is split across threads.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::completion::{completion_order, CompletionConfig, RootStrategy, Traversal, DEFAULT_MAX_TRIALS};
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::masking::{random_connected_mask, DEFAULT_MAX_ATTEMPTS};
use crate::rng::{splitmix64, Rng};

/// Strategies in report order.
pub const STRATEGIES: [(Traversal, RootStrategy); 4] = [
    (Traversal::Dfs, RootStrategy::Random),
    (Traversal::Dfs, RootStrategy::Farthest),
    (Traversal::Bfs, RootStrategy::Random),
    (Traversal::Bfs, RootStrategy::Farthest),
];

pub const DEFAULT_MASKS_PER_RATIO: usize = 5000;

pub fn default_ratios() -> Vec<f64> {
    (1..=9).map(|k| k as f64 / 10.0).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub height: usize,
    pub width: usize,
    pub ratios: Vec<f64>,
    pub masks_per_ratio: usize,
    pub max_trials: usize,
    pub max_mask_attempts: usize,
    pub seed: u64,
    /// Worker threads; 0 uses the global rayon pool.
    pub workers: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            height: 16,
            width: 16,
            ratios: default_ratios(),
            masks_per_ratio: DEFAULT_MASKS_PER_RATIO,
            max_trials: DEFAULT_MAX_TRIALS,
            max_mask_attempts: DEFAULT_MAX_ATTEMPTS,
            seed: 0,
            workers: 0,
        }
    }
}

impl BenchConfig {
    fn validate(&self) -> Result<Lattice> {
        let lattice = Lattice::new(self.height, self.width)?;
        if self.masks_per_ratio == 0 {
            return Err(Error::InvalidConfig("masks per ratio must be at least 1".into()));
        }
        if self.max_trials == 0 {
            return Err(Error::InvalidConfig("max trials must be at least 1".into()));
        }
        if let Some(&r) = self.ratios.iter().find(|&&r| !(r > 0.0 && r < 1.0)) {
            return Err(Error::InvalidRatio(r));
        }
        Ok(lattice)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub ratio: f64,
    pub traversal: Traversal,
    pub root: RootStrategy,
    /// Mean over all masks, failed runs counted at the trial cap.
    pub mean_trials: f64,
    pub failure_ratio: f64,
    pub n_masks: usize,
    /// Mean over accepted runs only; empty when nothing was accepted.
    pub accepted_mean_trials: Option<f64>,
}

/// Outcome of every strategy on one mask, in [`STRATEGIES`] order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaskOutcome {
    pub trials: [usize; 4],
    pub accepted: [bool; 4],
}

pub fn mask_seed(master: u64, global_index: u64) -> u64 {
    splitmix64(master ^ global_index)
}

/// Generates one mask from `seed` and runs all strategies on it.
pub fn evaluate_mask(lattice: Lattice, ratio: f64, seed: u64, max_trials: usize, max_attempts: usize) -> Result<MaskOutcome> {
    let mask = random_connected_mask(lattice, ratio, &mut Rng::new(seed), max_attempts)?;
    let mut outcome = MaskOutcome { trials: [0; 4], accepted: [false; 4] };
    for (s, &(traversal, root)) in STRATEGIES.iter().enumerate() {
        let mut rng = Rng::substream(seed, s as u64 + 1);
        let config = CompletionConfig { traversal, root, max_trials };
        let result = completion_order(lattice, mask.region(), &mut rng, config)?;
        outcome.trials[s] = result.trials;
        outcome.accepted[s] = result.accepted;
    }
    Ok(outcome)
}

fn summarize(ratio: f64, outcomes: &[MaskOutcome]) -> Vec<TrialStats> {
    let n = outcomes.len();
    STRATEGIES
        .iter()
        .enumerate()
        .map(|(s, &(traversal, root))| {
            let total: usize = outcomes.iter().map(|o| o.trials[s]).sum();
            let accepted: Vec<usize> = outcomes.iter().filter(|o| o.accepted[s]).map(|o| o.trials[s]).collect();
            let failures = n - accepted.len();
            TrialStats {
                ratio,
                traversal,
                root,
                mean_trials: total as f64 / n as f64,
                failure_ratio: failures as f64 / n as f64,
                n_masks: n,
                accepted_mean_trials: (!accepted.is_empty())
                    .then(|| accepted.iter().sum::<usize>() as f64 / accepted.len() as f64),
            }
        })
        .collect()
}

/// One [`TrialStats`] per ratio and strategy, ratios in config order.
pub fn acceptance_experiment(config: &BenchConfig) -> Result<Vec<TrialStats>> {
    let lattice = config.validate()?;
    let run = || -> Result<Vec<TrialStats>> {
        let mut stats = Vec::with_capacity(config.ratios.len() * STRATEGIES.len());
        for (r, &ratio) in config.ratios.iter().enumerate() {
            let base = (r * config.masks_per_ratio) as u64;
            let outcomes: Vec<MaskOutcome> = (0..config.masks_per_ratio as u64)
                .into_par_iter()
                .map(|i| {
                    let seed = mask_seed(config.seed, base + i);
                    evaluate_mask(lattice, ratio, seed, config.max_trials, config.max_mask_attempts)
                })
                .collect::<Result<_>>()
                .map_err(|e| Error::AtRatio { ratio, source: Box::new(e) })?;
            stats.extend(summarize(ratio, &outcomes));
        }
        Ok(stats)
    };
    if config.workers == 0 {
        run()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        pool.install(run)
    }
}

pub const STATS_HEADER: [&str; 7] =
    ["ratio", "traversal", "root", "mean_trials", "failure_ratio", "n_masks", "accepted_mean_trials"];

pub fn write_stats_csv<W: Write>(stats: &[TrialStats], out: W) -> std::result::Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(STATS_HEADER)?;
    for s in stats {
        w.serialize(s)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_stats_csv<R: Read>(input: R) -> std::result::Result<Vec<TrialStats>, csv::Error> {
    csv::Reader::from_reader(input).deserialize().collect()
}
