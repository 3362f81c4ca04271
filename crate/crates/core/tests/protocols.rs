use proptest::prelude::*;

use symbreak_core::knowledge::{adversarial_ports, Model, PortAssignment};
use symbreak_core::protocols::{
    audit_name_independence, monte_carlo, run_blackboard_le, run_create_matching, run_gcd_le, run_protocol,
    run_task_by_leader, MLeaderElection, MaxOfInputs, PartyStatus, ProtocolSpec, RunOptions, RunStatus, TaskChoice,
};
use symbreak_core::randomness::RandomnessConfiguration;

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 { a } else { gcd(b, a % b) }
}

fn counts_strategy(max_k: usize, max_count: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1..=max_count, 1..=max_k)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn blackboard_le_is_name_independent(counts in counts_strategy(3, 3), seed: u64) {
        let alpha = RandomnessConfiguration::from_counts(&counts).unwrap();
        let run = run_blackboard_le(&alpha, seed, &RunOptions::new(40)).unwrap();
        prop_assert!(audit_name_independence(&run, &Model::Blackboard, None).unwrap());
        match run.status {
            RunStatus::Elected { leader } => {
                prop_assert_eq!(run.unique_leader(), Some(leader));
                prop_assert_eq!(run.output_time, Some(run.rounds_used - 1));
            }
            // 40 rounds without a distinct string is not a realistic outcome
            _ => prop_assert!(alpha.min_count() > 1),
        }
    }

    #[test]
    fn gcd_le_runs_are_sound(counts in counts_strategy(3, 3), port_seed: u64, seed: u64) {
        let alpha = RandomnessConfiguration::from_counts(&counts).unwrap();
        let n = alpha.n();
        let ports = PortAssignment::random(n, port_seed);
        let run = run_gcd_le(&alpha, &ports, seed, &RunOptions::new(50 * n)).unwrap();
        prop_assert!(audit_name_independence(&run, &Model::MessagePassing(ports), None).unwrap());
        for step in &run.euclid {
            let before = step.before.iter().fold(0, |g, &s| gcd(g, s));
            let after = step.after.iter().fold(0, |g, &s| gcd(g, s));
            prop_assert_eq!(before, after);
            prop_assert!(step.after.iter().sum::<usize>() <= step.before.iter().sum::<usize>());
        }
        match &run.status {
            RunStatus::Elected { leader } => prop_assert_eq!(run.unique_leader(), Some(*leader)),
            RunStatus::StuckAtGcd { sizes } => {
                prop_assert!(sizes.iter().all(|s| s % alpha.gcd() == 0));
                prop_assert!(alpha.gcd() > 1 || sizes.len() == 1);
            }
            RunStatus::Timeout => prop_assert_eq!(run.rounds_used, 50 * n),
            other => prop_assert!(false, "unexpected status {:?}", other),
        }
    }

    #[test]
    fn matching_grows_until_perfect(a in 1usize..5, extra in 0usize..4, port_seed: u64, seed: u64) {
        let b = a + extra;
        let n = a + b;
        let ids: Vec<usize> = (0..n).map(|p| if p < a { 1 } else { 2 }).collect();
        let alpha = RandomnessConfiguration::from_source_ids(&ids).unwrap();
        let v1: Vec<usize> = (0..a).collect();
        let v2: Vec<usize> = (a..n).collect();
        let ports = PortAssignment::random(n, port_seed);
        // passing the sides swapped must not matter
        for (x, y) in [(&v1, &v2), (&v2, &v1)] {
            let st = run_create_matching(&alpha, &ports, x, y, seed, &RunOptions::new(50 * n)).unwrap();
            prop_assert!(st.complete && st.is_perfect() && st.is_consistent());
            prop_assert!(st.sizes.windows(2).all(|w| w[0] < w[1]));
            prop_assert_eq!(st.matching.len(), a);
            let unmatched = st.status.iter().filter(|s| **s == PartyStatus::Unmatched).count();
            prop_assert_eq!(unmatched, b - a);
        }
    }

    #[test]
    fn leader_computes_the_maximum(counts in counts_strategy(3, 2), inputs in prop::collection::vec(0u64..5, 6), port_seed: Option<u64>, seed: u64) {
        let mut counts = counts;
        counts[0] = 1;
        let alpha = RandomnessConfiguration::from_counts(&counts).unwrap();
        let n = alpha.n();
        let inputs = &inputs[..n];
        let model = match port_seed {
            None => Model::Blackboard,
            Some(s) => Model::MessagePassing(PortAssignment::random(n, s)),
        };
        let run = run_task_by_leader(&alpha, &model, &MaxOfInputs, inputs, seed, &RunOptions::new(50 * n)).unwrap();
        if run.status == RunStatus::Completed {
            let max = *inputs.iter().max().unwrap();
            prop_assert!(run.outcome.iter().all(|o| *o == Some(max)));
            prop_assert!(audit_name_independence(&run, &model, Some(inputs)).unwrap());
        }
    }
}

#[test]
fn two_leaders_from_three_parties() {
    let alpha = RandomnessConfiguration::from_counts(&[1, 2]).unwrap();
    let inputs = [0; 3];
    for seed in 0..100 {
        let run = run_task_by_leader(&alpha, &Model::Blackboard, &MLeaderElection(2), &inputs, seed, &RunOptions::new(60))
            .unwrap();
        if run.status == RunStatus::Completed {
            assert_eq!(run.outcome.iter().filter(|o| **o == Some(1)).count(), 2);
            assert!(audit_name_independence(&run, &Model::Blackboard, Some(&inputs)).unwrap());
        }
    }
}

#[test]
fn monte_carlo_is_reproducible() {
    let alpha = RandomnessConfiguration::from_counts(&[1, 2, 2]).unwrap();
    let specs = [
        ProtocolSpec::BlackboardLe,
        ProtocolSpec::GcdLe {
            ports: PortAssignment::random(5, 9),
        },
        ProtocolSpec::TaskByLeader {
            model: Model::Blackboard,
            task: TaskChoice::MLeader(MLeaderElection(2)),
            inputs: vec![0; 5],
        },
    ];
    let opts = RunOptions::new(250);
    for spec in &specs {
        let a = monte_carlo(spec, &alpha, 200, 5, &opts).unwrap();
        assert_eq!(a, monte_carlo(spec, &alpha, 200, 5, &opts).unwrap());
        assert_ne!(a, monte_carlo(spec, &alpha, 200, 6, &opts).unwrap());
    }
}

#[test]
fn adversarial_ports_block_gcd_le() {
    for counts in [[2usize, 2], [3, 3], [2, 4]] {
        let alpha = RandomnessConfiguration::from_counts(&counts).unwrap();
        let ports = adversarial_ports(&alpha).unwrap().original();
        for seed in 0..20 {
            let run = run_protocol(&ProtocolSpec::GcdLe { ports: ports.clone() }, &alpha, seed, &RunOptions::new(300))
                .unwrap();
            assert!(run.leaders().is_empty(), "{counts:?} seed {seed}");
            assert!(matches!(run.status, RunStatus::StuckAtGcd { .. }), "{counts:?} seed {seed}: {:?}", run.status);
        }
    }
}
