use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::randomness::{seeds, RandomnessConfiguration};
use crate::Result;

use super::{run_protocol, ProtocolRun, ProtocolSpec, RunOptions, RunStatus};

/// Failures kept verbatim in a summary; the rest are only counted.
pub const MAX_LISTED_FAILURES: usize = 20;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct RoundStats {
    pub min: usize,
    pub median: usize,
    pub p99: usize,
    pub max: usize,
}

impl RoundStats {
    /// Nearest-rank statistics, `None` for an empty sample.
    pub fn of(rounds: &[usize]) -> Option<Self> {
        if rounds.is_empty() {
            return None;
        }
        let mut sorted = rounds.to_vec();
        sorted.sort_unstable();
        let rank = |q_num: usize, q_den: usize| {
            let r = (sorted.len() * q_num).div_ceil(q_den);
            sorted[r.max(1) - 1]
        };
        Some(RoundStats {
            min: sorted[0],
            median: rank(1, 2),
            p99: rank(99, 100),
            max: sorted[sorted.len() - 1],
        })
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Failure {
    pub trial: u64,
    pub seed: u64,
    pub status: RunStatus,
    pub rounds_used: usize,
}

#[derive(Clone, PartialEq, Debug)]
pub struct MonteCarloSummary {
    pub protocol: &'static str,
    pub trials: u64,
    pub successes: u64,
    pub success_rate: f64,
    /// Rounds of the successful trials.
    pub rounds: Option<RoundStats>,
    pub status_counts: BTreeMap<&'static str, u64>,
    pub failures: Vec<Failure>,
    /// Per successful matching trial, the final matching size.
    pub matching_sizes: BTreeMap<usize, u64>,
}

/// Summary of `runs`, given in trial order with their seeds.
pub fn summarize(protocol: &'static str, runs: &[(u64, ProtocolRun)]) -> MonteCarloSummary {
    let mut rounds = Vec::new();
    let mut status_counts = BTreeMap::new();
    let mut failures = Vec::new();
    let mut matching_sizes = BTreeMap::new();
    for (trial, (seed, run)) in runs.iter().enumerate() {
        *status_counts.entry(run.status.label()).or_insert(0) += 1;
        if run.status.is_success() {
            rounds.push(run.rounds_used);
            if let Some(m) = &run.matching {
                *matching_sizes.entry(m.matching.len()).or_insert(0) += 1;
            }
        } else if failures.len() < MAX_LISTED_FAILURES {
            failures.push(Failure {
                trial: trial as u64,
                seed: *seed,
                status: run.status.clone(),
                rounds_used: run.rounds_used,
            });
        }
    }
    let trials = runs.len() as u64;
    let successes = rounds.len() as u64;
    MonteCarloSummary {
        protocol,
        trials,
        successes,
        success_rate: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
        rounds: RoundStats::of(&rounds),
        status_counts,
        failures,
        matching_sizes,
    }
}

/// Seed of trial `i` under master seed `seed`.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    seeds::derive_seed(seed, seeds::TAG_TRIAL, trial)
}

/// Sequential Monte Carlo over `trials` derived seeds.
pub fn monte_carlo(
    spec: &ProtocolSpec,
    alpha: &RandomnessConfiguration,
    trials: u64,
    seed: u64,
    opts: &RunOptions,
) -> Result<MonteCarloSummary> {
    let mut runs = Vec::with_capacity(trials as usize);
    let mut protocol = "";
    for i in 0..trials {
        let s = trial_seed(seed, i);
        let run = run_protocol(spec, alpha, s, opts)?;
        protocol = run.protocol;
        runs.push((s, run));
    }
    Ok(summarize(protocol, &runs))
}
