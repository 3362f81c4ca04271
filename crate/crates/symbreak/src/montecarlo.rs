//! Parallel trials. Each trial seed is derived from the master seed, so
//! results do not depend on scheduling.

use rayon::prelude::*;

use symbreak_core::protocols::{run_protocol, summarize, trial_seed, MonteCarloSummary, ProtocolRun, ProtocolSpec, RunOptions};
use symbreak_core::randomness::RandomnessConfiguration;
use symbreak_core::Result;

/// Runs trials `0..trials`, returning `(trial seed, run)` in trial order.
pub fn run_trials(
    spec: &ProtocolSpec,
    alpha: &RandomnessConfiguration,
    trials: u64,
    seed: u64,
    opts: &RunOptions,
) -> Result<Vec<(u64, ProtocolRun)>> {
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let s = trial_seed(seed, i);
            run_protocol(spec, alpha, s, opts).map(|run| (s, run))
        })
        .collect()
}

pub fn monte_carlo_parallel(
    spec: &ProtocolSpec,
    alpha: &RandomnessConfiguration,
    trials: u64,
    seed: u64,
    opts: &RunOptions,
) -> Result<MonteCarloSummary> {
    let runs = run_trials(spec, alpha, trials, seed, opts)?;
    let protocol = runs.first().map_or("", |(_, r)| r.protocol);
    Ok(summarize(protocol, &runs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use symbreak_core::knowledge::PortAssignment;
    use symbreak_core::protocols::monte_carlo;

    #[test]
    fn parallel_matches_sequential() {
        let a = RandomnessConfiguration::from_counts(&[2, 3]).unwrap();
        let spec = ProtocolSpec::GcdLe {
            ports: PortAssignment::random(5, 4),
        };
        let opts = RunOptions::new(250);
        assert_eq!(
            monte_carlo_parallel(&spec, &a, 64, 11, &opts).unwrap(),
            monte_carlo(&spec, &a, 64, 11, &opts).unwrap()
        );
    }
}
