use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::complexes::Value;
use crate::knowledge::{Model, Refiner};
use crate::randomness::RandomnessConfiguration;
use crate::tasks::OutputComplex;
use crate::{Error, Result};

use super::{run_blackboard_le, run_gcd_le, PartyBits, ProtocolRun, RunOptions, RunStatus, TraceRecord};

/// A name-independent task solved centrally by an elected leader.
///
/// The leader sees the parties as `groups`: sets of parties with equal
/// knowledge, which it must treat alike. The first group is the leader
/// itself; the rest come in the leader's order (its port order under
/// message passing, knowledge order on a blackboard).
pub trait LeaderTask {
    fn name(&self) -> &'static str;

    /// One output per party, constant on each group, or `None` when no
    /// such assignment satisfies the task.
    fn assign(&self, inputs: &[u64], groups: &[Vec<usize>]) -> Option<Vec<u64>>;

    /// Whether `outputs` is allowed for `inputs`.
    fn accepts(&self, inputs: &[u64], outputs: &[u64]) -> bool;
}

/// Every party outputs the maximum input.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct MaxOfInputs;

impl LeaderTask for MaxOfInputs {
    fn name(&self) -> &'static str {
        "max-of-inputs"
    }

    fn assign(&self, inputs: &[u64], _groups: &[Vec<usize>]) -> Option<Vec<u64>> {
        let max = inputs.iter().copied().max()?;
        Some(vec![max; inputs.len()])
    }

    fn accepts(&self, inputs: &[u64], outputs: &[u64]) -> bool {
        let max = inputs.iter().copied().max();
        outputs.iter().all(|&o| Some(o) == max)
    }
}

/// Exactly `m` parties output 1. The leader takes itself and then whole
/// groups in its order, skipping a group only when the rest cannot fill
/// the quota.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct MLeaderElection(pub usize);

impl LeaderTask for MLeaderElection {
    fn name(&self) -> &'static str {
        "m-leader"
    }

    fn assign(&self, inputs: &[u64], groups: &[Vec<usize>]) -> Option<Vec<u64>> {
        let m = self.0;
        // reachable[i][s]: sizes of groups[i..] can sum to s
        let mut reachable = vec![vec![false; m + 1]; groups.len() + 1];
        reachable[groups.len()][0] = true;
        for i in (0..groups.len()).rev() {
            for s in 0..=m {
                let g = groups[i].len();
                reachable[i][s] = reachable[i + 1][s] || (s >= g && reachable[i + 1][s - g]);
            }
        }
        if !reachable[0][m] {
            return None;
        }
        let mut out = vec![0u64; inputs.len()];
        let mut need = m;
        for (i, group) in groups.iter().enumerate() {
            if need >= group.len() && reachable[i + 1][need - group.len()] {
                for &p in group {
                    out[p] = 1;
                }
                need -= group.len();
            }
        }
        Some(out)
    }

    fn accepts(&self, _inputs: &[u64], outputs: &[u64]) -> bool {
        outputs.iter().all(|&o| o <= 1) && outputs.iter().filter(|&&o| o == 1).count() == self.0
    }
}

/// The leader picks the first facet (in facet order) that is constant on
/// every group, up to a permutation of names. Values must be decimal
/// integers.
impl LeaderTask for OutputComplex {
    fn name(&self) -> &'static str {
        "output-complex"
    }

    fn assign(&self, inputs: &[u64], groups: &[Vec<usize>]) -> Option<Vec<u64>> {
        let n = inputs.len();
        if n != self.n() {
            return None;
        }
        // facets are closed under permutation, so it suffices to find one
        // whose value multiset splits into runs matching the group sizes
        for facet in self.facets() {
            let values: Option<Vec<u64>> = facet.iter().map(Value::to_u64).collect();
            let Some(mut values) = values else { continue };
            values.sort_unstable();
            if let Some(out) = fill_groups(&values, groups, n) {
                return Some(out);
            }
        }
        None
    }

    fn accepts(&self, _inputs: &[u64], outputs: &[u64]) -> bool {
        let facet: Vec<Value> = outputs.iter().map(|&o| Value::from_u64(o)).collect();
        self.contains_facet(&facet)
    }
}

/// Assigns each group one value from the multiset `values` (sorted), using
/// up exactly `group.len()` copies, by backtracking.
fn fill_groups(values: &[u64], groups: &[Vec<usize>], n: usize) -> Option<Vec<u64>> {
    let mut remaining: Vec<(u64, usize)> = Vec::new();
    for &v in values {
        match remaining.last_mut() {
            Some((last, c)) if *last == v => *c += 1,
            _ => remaining.push((v, 1)),
        }
    }
    let mut chosen = vec![0u64; groups.len()];
    fn go(i: usize, groups: &[Vec<usize>], remaining: &mut [(u64, usize)], chosen: &mut [u64]) -> bool {
        if i == groups.len() {
            return remaining.iter().all(|&(_, c)| c == 0);
        }
        for r in 0..remaining.len() {
            if remaining[r].1 >= groups[i].len() {
                remaining[r].1 -= groups[i].len();
                chosen[i] = remaining[r].0;
                if go(i + 1, groups, remaining, chosen) {
                    return true;
                }
                remaining[r].1 += groups[i].len();
            }
        }
        false
    }
    if !go(0, groups, &mut remaining, &mut chosen) {
        return None;
    }
    let mut out = vec![0u64; n];
    for (g, &v) in groups.iter().zip(&chosen) {
        for &p in g {
            out[p] = v;
        }
    }
    Some(out)
}

/// Knowledge classes at the current time, leader first, the rest ordered
/// by the leader's view.
fn groups(model: &Model, class_of: &[usize], leader: usize) -> Vec<Vec<usize>> {
    let n = class_of.len();
    let classes = class_of.iter().max().map_or(0, |m| m + 1);
    let mut by_class = vec![Vec::new(); classes];
    for p in 0..n {
        by_class[class_of[p]].push(p);
    }
    let mut order: Vec<Vec<usize>> = by_class.into_iter().filter(|g| !g.is_empty()).collect();
    let key = |g: &Vec<usize>| -> usize {
        if g.contains(&leader) {
            return 0;
        }
        match model {
            Model::MessagePassing(ports) => g.iter().map(|&p| ports.port_to(leader, p)).min().expect("nonempty"),
            Model::Blackboard => 1 + class_of[g[0]],
        }
    };
    order.sort_by_key(key);
    order
}

/// Elects a leader, gathers every input at the leader in one round, and
/// distributes the leader's assignment in the next. On a blackboard the
/// leader waits for finer classes while the task has no assignment.
pub fn run_task_by_leader(
    alpha: &RandomnessConfiguration,
    model: &Model,
    task: &dyn LeaderTask,
    inputs: &[u64],
    seed: u64,
    opts: &RunOptions,
) -> Result<ProtocolRun> {
    let n = alpha.n();
    if inputs.len() != n {
        return Err(Error::InvalidTask(format!("{} inputs for {n} parties", inputs.len())));
    }
    let mut run = match model {
        Model::Blackboard => run_blackboard_le(alpha, seed, opts)?,
        Model::MessagePassing(ports) => run_gcd_le(alpha, ports, seed, opts)?,
    };
    run.protocol = "task-by-leader";
    let RunStatus::Elected { leader } = run.status else {
        return Ok(run);
    };
    run.outcome = vec![None; n];

    let mut refiner = Refiner::with_initial(model, inputs)?;
    let mut bits = PartyBits::new(alpha, seed, 0);
    // input round, then one output round once the leader has an assignment
    let mut time = run.rounds_used + 1;
    for round in 1..=time {
        refiner.step(&bits.round_bits(round));
    }
    let outputs = loop {
        if time + 1 > opts.max_rounds {
            run.status = RunStatus::Timeout;
            run.rounds_used = opts.max_rounds;
            run.output_time = None;
            return Ok(run);
        }
        let groups = groups(model, refiner.class_of(), leader);
        if let Some(out) = task.assign(inputs, &groups) {
            break out;
        }
        if matches!(model, Model::MessagePassing(_)) && groups.iter().all(|g| g.len() == 1) {
            run.status = RunStatus::Unsatisfiable;
            run.rounds_used = time;
            run.output_time = None;
            return Ok(run);
        }
        time += 1;
        refiner.step(&bits.round_bits(time));
    };
    debug_assert!(task.accepts(inputs, &outputs));
    run.outcome = outputs.iter().map(|&o| Some(o)).collect();
    run.status = RunStatus::Completed;
    run.rounds_used = time + 1;
    run.output_time = Some(time);
    if opts.record_trace {
        let first = run.trace.last().map_or(1, |r| r.round + 1);
        for round in first..=run.rounds_used {
            for (p, &out) in outputs.iter().enumerate() {
                let last = round == run.rounds_used;
                run.trace.push(TraceRecord {
                    round,
                    party: p,
                    class: None,
                    state: if p == leader { "leader" } else { "follower" },
                    output: last.then_some(out),
                });
            }
        }
    }
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge::PortAssignment;
    use crate::protocols::audit_name_independence;

    fn alpha(ids: &[usize]) -> RandomnessConfiguration {
        RandomnessConfiguration::from_source_ids(ids).unwrap()
    }

    #[test]
    fn max_of_inputs_everywhere() {
        let a = alpha(&[1, 2, 3]);
        for model in [Model::Blackboard, Model::MessagePassing(PortAssignment::random(3, 1))] {
            for seed in 0..20 {
                let run = run_task_by_leader(&a, &model, &MaxOfInputs, &[3, 1, 2], seed, &RunOptions::new(200)).unwrap();
                assert_eq!(run.status, RunStatus::Completed);
                assert_eq!(run.outcome, [Some(3); 3]);
            }
        }
    }

    #[test]
    fn two_leaders_from_one() {
        let a = alpha(&[1, 2, 3]);
        for model in [Model::Blackboard, Model::MessagePassing(PortAssignment::random(3, 8))] {
            for seed in 0..30 {
                let run = run_task_by_leader(&a, &model, &MLeaderElection(2), &[0, 0, 0], seed, &RunOptions::new(300))
                    .unwrap();
                assert_eq!(run.status, RunStatus::Completed);
                assert_eq!(run.outcome.iter().filter(|o| **o == Some(1)).count(), 2);
                assert!(audit_name_independence(&run, &model, Some(&[0, 0, 0])).unwrap());
            }
        }
    }

    #[test]
    fn leader_picks_its_lowest_port() {
        let a = alpha(&[1, 2, 3]);
        let ports = PortAssignment::random(3, 2);
        let model = Model::MessagePassing(ports.clone());
        let le = run_gcd_le(&a, &ports, 4, &RunOptions::new(300)).unwrap();
        let leader = le.unique_leader().unwrap();
        let run = run_task_by_leader(&a, &model, &MLeaderElection(2), &[5, 5, 5], 4, &RunOptions::new(300)).unwrap();
        let partner = ports.target(leader, 1);
        let winners: Vec<usize> = (0..3).filter(|&p| run.outcome[p] == Some(1)).collect();
        let mut expected = vec![leader, partner];
        expected.sort();
        assert_eq!(winners, expected);
    }

    #[test]
    fn unbreakable_symmetry_times_out() {
        let a = alpha(&[1, 1]);
        let run = run_task_by_leader(&a, &Model::Blackboard, &MLeaderElection(1), &[0, 0], 1, &RunOptions::new(40)).unwrap();
        assert_eq!(run.status, RunStatus::Timeout);
    }

    #[test]
    fn output_complex_as_leader_task() {
        let le = crate::tasks::make_m_leader_election(4, 2).unwrap();
        let groups = vec![vec![2], vec![0, 3], vec![1]];
        let out = le.assign(&[0; 4], &groups).unwrap();
        assert_eq!(out, [1, 0, 0, 1]);
        assert!(le.accepts(&[0; 4], &out));
        assert_eq!(le.assign(&[0; 4], &[vec![0, 1, 2], vec![3]]), None);
        let a = alpha(&[1, 2, 3]);
        let run = run_task_by_leader(&a, &Model::Blackboard, &le_for(3), &[0; 3], 2, &RunOptions::new(100)).unwrap();
        assert_eq!(run.leaders().len(), 1);
    }

    fn le_for(n: usize) -> OutputComplex {
        crate::tasks::make_leader_election(n).unwrap()
    }

    #[test]
    fn m_leader_assignment_respects_groups() {
        let groups = vec![vec![0], vec![1, 2], vec![3]];
        assert_eq!(MLeaderElection(2).assign(&[0; 4], &groups), Some(vec![1, 0, 0, 1]));
        assert_eq!(MLeaderElection(3).assign(&[0; 4], &groups), Some(vec![1, 1, 1, 0]));
        assert_eq!(MLeaderElection(2).assign(&[0; 3], &[vec![0, 1, 2]]), None);
    }
}
