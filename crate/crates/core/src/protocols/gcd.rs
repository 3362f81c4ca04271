use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::knowledge::{ModelKind, PortAssignment};
use crate::randomness::RandomnessConfiguration;
use crate::{Error, Result};

use super::matching::{Matcher, Step};
use super::{gcd_of, EuclidStep, PartyBits, ProtocolRun, RunOptions, RunStatus, TraceRecord};

/// A working class: active parties whose strings agree so far. The label is
/// computable by every party (bit strings plus split tags), so all parties
/// order classes the same way.
#[derive(Clone, Debug)]
struct WorkClass {
    label: String,
    members: Vec<usize>,
}

enum Tick {
    Continue,
    Diverged,
    Timeout,
}

struct Sim<'a> {
    ports: &'a PortAssignment,
    opts: &'a RunOptions,
    bits: PartyBits,
    round: usize,
    /// Bits up to this index are already folded into the labels.
    folded: usize,
    classes: Vec<WorkClass>,
    active: Vec<bool>,
    run: ProtocolRun,
}

impl Sim<'_> {
    fn n(&self) -> usize {
        self.active.len()
    }

    fn sort_classes(&mut self) {
        self.classes.sort_by(|a, b| a.label.cmp(&b.label));
    }

    fn sizes(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.classes.iter().map(|c| c.members.len()).collect();
        s.sort_unstable();
        s
    }

    fn class_index(&self, party: usize) -> Option<usize> {
        self.classes.iter().position(|c| c.members.contains(&party))
    }

    /// Splits every class by the strings its members received since the
    /// last fold.
    fn fold(&mut self) {
        let upto = self.round;
        let mut next = Vec::new();
        for class in core::mem::take(&mut self.classes) {
            let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
            for &p in &class.members {
                let suffix: String = (self.folded..upto)
                    .map(|i| if self.bits.bit(p, i) { '1' } else { '0' })
                    .collect();
                groups.entry(suffix).or_default().push(p);
            }
            for (suffix, members) in groups {
                let label = if suffix.is_empty() {
                    class.label.clone()
                } else {
                    format!("{}/{suffix}", class.label)
                };
                next.push(WorkClass { label, members });
            }
        }
        self.classes = next;
        self.folded = upto;
        self.sort_classes();
    }

    /// Advances one round. A divergence inside a working class refines the
    /// classes and is reported so the caller can restart.
    fn tick(&mut self, matcher: Option<&Matcher>) -> Tick {
        if self.round == self.opts.max_rounds {
            return Tick::Timeout;
        }
        self.round += 1;
        let idx = self.round - 1;
        let diverged = self.classes.iter().any(|c| {
            let first = self.bits.bit(c.members[0], idx);
            c.members[1..].iter().any(|&p| self.bits.bit(p, idx) != first)
        });
        self.record(matcher);
        if diverged {
            self.run.restarts += 1;
            self.fold();
            Tick::Diverged
        } else {
            Tick::Continue
        }
    }

    fn record(&mut self, matcher: Option<&Matcher>) {
        if !self.opts.record_trace {
            return;
        }
        for p in 0..self.n() {
            let state = if self.round <= self.opts.bootstrap_window {
                "bootstrap"
            } else if !self.active[p] {
                "passive"
            } else if let Some(m) = matcher {
                m.state_of(p)
            } else {
                "active"
            };
            let class = self.class_index(p);
            self.run.trace.push(TraceRecord {
                round: self.round,
                party: p,
                class,
                state,
                output: self.run.outcome[p],
            });
        }
    }
}

enum MatchResult {
    Done(Matcher),
    Restart,
    Timeout,
}

/// Euclid-style election under message passing: match the two smallest
/// working classes, deactivate the matched part of the larger one, repeat
/// until some class is a singleton.
pub fn run_gcd_le(
    alpha: &RandomnessConfiguration,
    ports: &PortAssignment,
    seed: u64,
    opts: &RunOptions,
) -> Result<ProtocolRun> {
    let n = alpha.n();
    if ports.n() != n {
        return Err(Error::InvalidPorts(format!("ports on {} parties, configuration on {n}", ports.n())));
    }
    let window = opts.bootstrap_window;
    let mut sim = Sim {
        ports,
        opts,
        bits: PartyBits::new(alpha, seed, window),
        round: 0,
        folded: 0,
        classes: vec![WorkClass {
            label: String::new(),
            members: (0..n).collect(),
        }],
        active: vec![true; n],
        run: ProtocolRun::new("gcd-le", ModelKind::MessagePassing, alpha, seed),
    };

    if n > 1 {
        while sim.round < window {
            // divergences during the bootstrap are folded at its end
            if sim.round == opts.max_rounds {
                sim.run.rounds_used = sim.round;
                return Ok(sim.run);
            }
            sim.round += 1;
            sim.record(None);
        }
        sim.fold();
    }

    loop {
        if let Some(leader) = sim.classes.iter().find(|c| c.members.len() == 1).map(|c| c.members[0]) {
            // announcement round
            if sim.round == opts.max_rounds {
                break;
            }
            for p in 0..n {
                sim.run.outcome[p] = Some((p == leader) as u64);
            }
            sim.round += 1;
            sim.record(None);
            sim.run.status = RunStatus::Elected { leader };
            sim.run.output_time = Some(sim.round - 1);
            sim.run.rounds_used = sim.round;
            return Ok(sim.run);
        }
        if sim.classes.len() == 1 {
            let members = &sim.classes[0].members;
            let source = sim.bits.source_of(members[0]);
            if members.iter().all(|&p| sim.bits.source_of(p) == source) {
                sim.run.status = RunStatus::StuckAtGcd { sizes: sim.sizes() };
                sim.run.rounds_used = sim.round;
                return Ok(sim.run);
            }
            // different sources that have agreed so far: wait for a split
            match sim.tick(None) {
                Tick::Timeout => break,
                _ => continue,
            }
        }
        match match_two_smallest(&mut sim) {
            MatchResult::Timeout => break,
            MatchResult::Restart => continue,
            MatchResult::Done(matcher) => {
                let before = sim.sizes();
                let larger = matcher.v2().to_vec();
                for &q in &larger {
                    if matcher.partner(q).is_some() {
                        sim.active[q] = false;
                        sim.run.outcome[q] = Some(0);
                    }
                }
                let mut next = Vec::new();
                for mut class in core::mem::take(&mut sim.classes) {
                    if class.members.iter().any(|p| larger.contains(p)) {
                        class.members.retain(|&p| sim.active[p]);
                        if class.members.is_empty() {
                            continue;
                        }
                        class.label.push('u');
                    }
                    next.push(class);
                }
                sim.classes = next;
                sim.sort_classes();
                let after = sim.sizes();
                debug_assert_eq!(gcd_of(&before), gcd_of(&after));
                sim.run.euclid.push(EuclidStep {
                    round: sim.round,
                    before,
                    after,
                });
            }
        }
    }
    sim.run.rounds_used = sim.round;
    sim.run.status = RunStatus::Timeout;
    sim.run.output_time = None;
    for o in &mut sim.run.outcome {
        *o = None;
    }
    Ok(sim.run)
}

fn match_two_smallest(sim: &mut Sim<'_>) -> MatchResult {
    let mut order: Vec<usize> = (0..sim.classes.len()).collect();
    order.sort_by(|&a, &b| {
        let (ca, cb) = (&sim.classes[a], &sim.classes[b]);
        (ca.members.len(), &ca.label).cmp(&(cb.members.len(), &cb.label))
    });
    let v1 = sim.classes[order[0]].members.clone();
    let v2 = sim.classes[order[1]].members.clone();
    let mut matcher = Matcher::new(sim.n(), &v1, &v2);
    loop {
        if sim.round == sim.opts.max_rounds {
            return MatchResult::Timeout;
        }
        let step = matcher.step(sim.ports, &mut sim.bits, sim.round + 1);
        match sim.tick(Some(&matcher)) {
            Tick::Timeout => return MatchResult::Timeout,
            Tick::Diverged => return MatchResult::Restart,
            Tick::Continue => {}
        }
        if step == Step::Done && matcher.is_complete() {
            return MatchResult::Done(matcher);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge::{adversarial_ports, Model};
    use crate::protocols::audit_name_independence;

    fn counts(c: &[usize]) -> RandomnessConfiguration {
        RandomnessConfiguration::from_counts(c).unwrap()
    }

    #[test]
    fn single_party_is_leader() {
        let a = counts(&[1]);
        let run = run_gcd_le(&a, &PortAssignment::random(1, 0), 0, &RunOptions::new(10)).unwrap();
        assert_eq!(run.status, RunStatus::Elected { leader: 0 });
        assert_eq!(run.rounds_used, 1);
    }

    #[test]
    fn two_and_three_elect_via_euclid() {
        let a = counts(&[2, 3]);
        let mut euclid_seen = false;
        for seed in 0..200 {
            let ports = PortAssignment::random(5, seed);
            let run = run_gcd_le(&a, &ports, seed, &RunOptions::new(250)).unwrap();
            let leader = run.unique_leader().expect("elected");
            assert_eq!(run.outcome.iter().filter(|o| **o == Some(0)).count(), 4);
            assert!(audit_name_independence(&run, &Model::MessagePassing(ports), None).unwrap());
            for step in &run.euclid {
                assert_eq!(gcd_of(&step.before), gcd_of(&step.after));
            }
            if run.restarts == 0 {
                let steps: Vec<(Vec<usize>, Vec<usize>)> =
                    run.euclid.iter().map(|s| (s.before.clone(), s.after.clone())).collect();
                assert_eq!(steps, [(vec![2, 3], vec![1, 2])]);
                // the leader is the leftover of the larger set
                assert_eq!(a.source_of(leader), 1);
                euclid_seen = true;
            }
        }
        assert!(euclid_seen);
    }

    #[test]
    fn equal_halves_get_stuck() {
        let a = counts(&[2, 2]);
        let ports = adversarial_ports(&a).unwrap().original();
        for seed in 0..50 {
            let run = run_gcd_le(&a, &ports, seed, &RunOptions::new(200)).unwrap();
            assert_eq!(run.status, RunStatus::StuckAtGcd { sizes: vec![2] }, "seed {seed}");
            assert!(run.leaders().is_empty());
            assert_eq!(run.euclid.last().map(|s| s.before.clone()), Some(vec![2, 2]));
        }
    }

    #[test]
    fn traces_are_deterministic() {
        let a = counts(&[1, 2, 2]);
        let ports = PortAssignment::random(5, 3);
        let opts = RunOptions::new(250).traced();
        let first = run_gcd_le(&a, &ports, 17, &opts).unwrap();
        assert_eq!(first, run_gcd_le(&a, &ports, 17, &opts).unwrap());
        assert_eq!(first.trace.len(), 5 * first.rounds_used);
    }
}
