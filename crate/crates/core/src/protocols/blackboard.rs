use crate::knowledge::{Model, ModelKind, Refiner};
use crate::randomness::RandomnessConfiguration;
use crate::Result;

use super::{PartyBits, ProtocolRun, RunOptions, RunStatus, TraceRecord};

/// Blackboard leader election: in round `t + 1`, once the classes at time
/// `t` contain a singleton, the singleton of smallest knowledge outputs 1
/// and every other party outputs 0.
pub fn run_blackboard_le(alpha: &RandomnessConfiguration, seed: u64, opts: &RunOptions) -> Result<ProtocolRun> {
    let n = alpha.n();
    let model = Model::Blackboard;
    let mut run = ProtocolRun::new("bb-le", ModelKind::Blackboard, alpha, seed);
    let mut refiner = Refiner::new(&model, n)?;
    let mut bits = PartyBits::new(alpha, seed, 0);
    for round in 1..=opts.max_rounds {
        let partition = refiner.partition();
        let classes = partition.classes();
        // class ranks follow knowledge order, which on a blackboard is the
        // lexicographic order of bit strings
        let leader = classes.iter().find(|c| c.len() == 1).map(|c| c[0]);
        if let Some(leader) = leader {
            for p in 0..n {
                run.outcome[p] = Some((p == leader) as u64);
            }
            run.status = RunStatus::Elected { leader };
            run.rounds_used = round;
            run.output_time = Some(round - 1);
        }
        if opts.record_trace {
            for p in 0..n {
                run.trace.push(TraceRecord {
                    round,
                    party: p,
                    class: Some(partition.class_of[p]),
                    state: match leader {
                        Some(l) if l == p => "leader",
                        Some(_) => "follower",
                        None => "undecided",
                    },
                    output: run.outcome[p],
                });
            }
        }
        if leader.is_some() {
            return Ok(run);
        }
        refiner.step(&bits.round_bits(round));
    }
    run.rounds_used = opts.max_rounds;
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::audit_name_independence;
    use crate::randomness::{realize, sample_draw};

    fn alpha(ids: &[usize]) -> RandomnessConfiguration {
        RandomnessConfiguration::from_source_ids(ids).unwrap()
    }

    #[test]
    fn single_party_decides_in_round_one() {
        let run = run_blackboard_le(&alpha(&[1]), 3, &RunOptions::new(10)).unwrap();
        assert_eq!(run.status, RunStatus::Elected { leader: 0 });
        assert_eq!(run.rounds_used, 1);
        assert_eq!(run.outcome, [Some(1)]);
    }

    #[test]
    fn identical_sources_time_out() {
        for seed in 0..20 {
            let run = run_blackboard_le(&alpha(&[1, 1]), seed, &RunOptions::new(30)).unwrap();
            assert_eq!(run.status, RunStatus::Timeout);
            assert_eq!(run.rounds_used, 30);
            assert!(run.outcome.iter().all(Option::is_none));
        }
    }

    #[test]
    fn first_difference_decides_next_round() {
        let a = alpha(&[1, 2]);
        for seed in 0..50 {
            let run = run_blackboard_le(&a, seed, &RunOptions::new(100).traced()).unwrap();
            let leader = run.unique_leader().expect("elected");
            let t = run.output_time.unwrap();
            assert_eq!(run.rounds_used, t + 1);
            let rho = realize(&a, &sample_draw(&a, t, seed)).unwrap();
            // first differing bit is the last one
            assert_ne!(rho.string(0), rho.string(1));
            assert_eq!(rho.prefix(t - 1).string(0), rho.prefix(t - 1).string(1));
            // smaller string wins
            assert!(rho.string(leader) < rho.string(1 - leader));
            assert!(audit_name_independence(&run, &Model::Blackboard, None).unwrap());
            assert_eq!(run.trace.len(), 2 * run.rounds_used);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let a = alpha(&[1, 2, 2, 3]);
        let opts = RunOptions::new(64).traced();
        assert_eq!(run_blackboard_le(&a, 9, &opts).unwrap(), run_blackboard_le(&a, 9, &opts).unwrap());
    }
}
