use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::knowledge::{ModelKind, PortAssignment};
use crate::randomness::RandomnessConfiguration;
use crate::{Error, Result};

use super::{PartyBits, ProtocolRun, RunOptions, RunStatus, TraceRecord};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PartyStatus {
    Matched(usize),
    Unmatched,
    NotParticipating,
}

/// Result of one matching between two disjoint sets.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MatchingState {
    /// The smaller side after the swap.
    pub v1: Vec<usize>,
    pub v2: Vec<usize>,
    pub swapped: bool,
    /// `(v1 party, v2 party)` pairs, sorted.
    pub matching: Vec<(usize, usize)>,
    pub status: Vec<PartyStatus>,
    /// Matching size after each completed iteration.
    pub sizes: Vec<usize>,
    pub rounds_used: usize,
    pub complete: bool,
}

impl MatchingState {
    /// Every member of `v1` is matched.
    pub fn is_perfect(&self) -> bool {
        self.complete && self.matching.len() == self.v1.len()
    }

    /// Pairs are disjoint and cross the sides; statuses agree with the
    /// pairs; sizes strictly increase.
    pub fn is_consistent(&self) -> bool {
        let n = self.status.len();
        let mut seen = vec![false; n];
        for &(a, b) in &self.matching {
            if !self.v1.contains(&a) || !self.v2.contains(&b) || seen[a] || seen[b] {
                return false;
            }
            seen[a] = true;
            seen[b] = true;
            if self.status[a] != PartyStatus::Matched(b) || self.status[b] != PartyStatus::Matched(a) {
                return false;
            }
        }
        let statuses_ok = (0..n).all(|p| {
            let side = self.v1.contains(&p) || self.v2.contains(&p);
            match self.status[p] {
                PartyStatus::Matched(_) => seen[p],
                PartyStatus::Unmatched => side && !seen[p],
                PartyStatus::NotParticipating => !side,
            }
        });
        statuses_ok && self.sizes.windows(2).all(|w| w[0] < w[1])
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Phase {
    Request,
    Ack,
    Done,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub(crate) enum Step {
    /// Some side-1 party lacks the bits for its pick.
    Wait,
    Request,
    Ack,
    Done,
}

/// Round-by-round CreateMatching: every unmatched `v1` party sends a
/// request through a uniformly chosen port leading to an unmatched `v2`
/// party; every `v2` party acknowledges the request that arrived on its
/// smallest port; matched parties announce they are done.
#[derive(Clone, Debug)]
pub(crate) struct Matcher {
    v1: Vec<usize>,
    v2: Vec<usize>,
    swapped: bool,
    side: Vec<u8>,
    partner: Vec<Option<usize>>,
    picks: Vec<Option<usize>>,
    /// `(v2 party, arrival port)` per requesting `v1` party.
    requests: Vec<(usize, usize)>,
    phase: Phase,
    sizes: Vec<usize>,
}

impl Matcher {
    pub(crate) fn new(n: usize, v1: &[usize], v2: &[usize]) -> Self {
        let (v1, v2, swapped) = if v1.len() > v2.len() {
            (v2.to_vec(), v1.to_vec(), true)
        } else {
            (v1.to_vec(), v2.to_vec(), false)
        };
        let mut side = vec![0u8; n];
        for &p in &v1 {
            side[p] = 1;
        }
        for &p in &v2 {
            side[p] = 2;
        }
        Matcher {
            v1,
            v2,
            swapped,
            side,
            partner: vec![None; n],
            picks: vec![None; n],
            requests: Vec::new(),
            phase: Phase::Request,
            sizes: Vec::new(),
        }
    }

    pub(crate) fn matched_count(&self) -> usize {
        self.v1.iter().filter(|&&p| self.partner[p].is_some()).count()
    }

    pub(crate) fn is_complete(&self) -> bool {
        self.phase == Phase::Request && self.matched_count() == self.v1.len()
    }

    pub(crate) fn partner(&self, party: usize) -> Option<usize> {
        self.partner[party]
    }

    pub(crate) fn v2(&self) -> &[usize] {
        &self.v2
    }

    pub(crate) fn state_of(&self, party: usize) -> &'static str {
        match (self.side[party], self.partner[party]) {
            (0, _) => "idle",
            (_, Some(_)) => "matched",
            (1, None) => "v1",
            _ => "v2",
        }
    }

    /// Performs round `round`. Picks may read the bits of earlier rounds only.
    pub(crate) fn step(&mut self, ports: &PortAssignment, bits: &mut PartyBits, round: usize) -> Step {
        let n = self.side.len();
        match self.phase {
            Phase::Request => {
                let waiting: Vec<usize> = self.v1.iter().copied().filter(|&p| self.partner[p].is_none()).collect();
                let mut options = Vec::with_capacity(waiting.len());
                let mut ready = true;
                for &p in &waiting {
                    let free: Vec<usize> = (1..n)
                        .filter(|&j| {
                            let q = ports.target(p, j);
                            self.side[q] == 2 && self.partner[q].is_none()
                        })
                        .collect();
                    if self.picks[p].is_none() {
                        self.picks[p] = bits.try_pick(p, free.len(), round - 1);
                    }
                    ready &= self.picks[p].is_some();
                    options.push(free);
                }
                if !ready {
                    return Step::Wait;
                }
                self.requests = vec![(usize::MAX, 0); n];
                for (&p, free) in waiting.iter().zip(&options) {
                    let q = ports.target(p, free[self.picks[p].take().expect("ready")]);
                    self.requests[p] = (q, ports.port_to(q, p));
                }
                self.phase = Phase::Ack;
                Step::Request
            }
            Phase::Ack => {
                let mut best: Vec<Option<usize>> = vec![None; n];
                for &(q, port) in &self.requests {
                    if q != usize::MAX && best[q].is_none_or(|b| port < b) {
                        best[q] = Some(port);
                    }
                }
                for &q in &self.v2 {
                    if let Some(port) = best[q] {
                        let p = ports.target(q, port);
                        self.partner[p] = Some(q);
                        self.partner[q] = Some(p);
                    }
                }
                self.requests.clear();
                self.phase = Phase::Done;
                Step::Ack
            }
            Phase::Done => {
                self.sizes.push(self.matched_count());
                self.phase = Phase::Request;
                Step::Done
            }
        }
    }

    pub(crate) fn into_state(self, rounds_used: usize) -> MatchingState {
        let complete = self.is_complete();
        let mut matching: Vec<(usize, usize)> = self
            .v1
            .iter()
            .filter_map(|&p| self.partner[p].map(|q| (p, q)))
            .collect();
        matching.sort();
        let status = (0..self.side.len())
            .map(|p| match (self.side[p], self.partner[p]) {
                (0, _) => PartyStatus::NotParticipating,
                (_, Some(q)) => PartyStatus::Matched(q),
                _ => PartyStatus::Unmatched,
            })
            .collect();
        MatchingState {
            v1: self.v1,
            v2: self.v2,
            swapped: self.swapped,
            matching,
            status,
            sizes: self.sizes,
            rounds_used,
            complete,
        }
    }
}

fn validate(alpha: &RandomnessConfiguration, ports: &PortAssignment, v1: &[usize], v2: &[usize]) -> Result<()> {
    let n = alpha.n();
    if ports.n() != n {
        return Err(Error::InvalidPorts(format!("ports on {} parties, configuration on {n}", ports.n())));
    }
    let mut seen = vec![false; n];
    for &p in v1.iter().chain(v2) {
        if p >= n || seen[p] {
            return Err(Error::InvalidConfiguration(format!(
                "matching sides must be disjoint parties below {n}"
            )));
        }
        seen[p] = true;
    }
    if v1.is_empty() || v2.is_empty() {
        return Err(Error::InvalidConfiguration("matching sides must be nonempty".into()));
    }
    Ok(())
}

fn drive(
    alpha: &RandomnessConfiguration,
    ports: &PortAssignment,
    v1: &[usize],
    v2: &[usize],
    seed: u64,
    opts: &RunOptions,
    mut trace: Option<&mut Vec<TraceRecord>>,
) -> Result<MatchingState> {
    validate(alpha, ports, v1, v2)?;
    let n = alpha.n();
    let mut bits = PartyBits::new(alpha, seed, 0);
    let mut matcher = Matcher::new(n, v1, v2);
    for round in 1..=opts.max_rounds {
        matcher.step(ports, &mut bits, round);
        if let Some(trace) = trace.as_deref_mut() {
            for p in 0..n {
                trace.push(TraceRecord {
                    round,
                    party: p,
                    class: None,
                    state: matcher.state_of(p),
                    output: None,
                });
            }
        }
        if matcher.is_complete() {
            return Ok(matcher.into_state(round));
        }
    }
    Ok(matcher.into_state(opts.max_rounds))
}

/// CreateMatching between `v1` and `v2` under message passing. The smaller
/// side is matched into the larger one.
pub fn run_create_matching(
    alpha: &RandomnessConfiguration,
    ports: &PortAssignment,
    v1: &[usize],
    v2: &[usize],
    seed: u64,
    opts: &RunOptions,
) -> Result<MatchingState> {
    drive(alpha, ports, v1, v2, seed, opts, None)
}

/// CreateMatching as a protocol run: matched parties output 1, unmatched
/// participants 0.
pub(crate) fn run_matching_protocol(
    alpha: &RandomnessConfiguration,
    ports: &PortAssignment,
    v1: &[usize],
    v2: &[usize],
    seed: u64,
    opts: &RunOptions,
) -> Result<ProtocolRun> {
    let mut run = ProtocolRun::new("matching", ModelKind::MessagePassing, alpha, seed);
    let trace = opts.record_trace.then_some(&mut run.trace);
    let state = drive(alpha, ports, v1, v2, seed, opts, trace)?;
    run.rounds_used = state.rounds_used;
    if state.complete {
        run.status = RunStatus::Completed;
        run.output_time = Some(state.rounds_used);
        for (p, s) in state.status.iter().enumerate() {
            run.outcome[p] = match s {
                PartyStatus::Matched(_) => Some(1),
                PartyStatus::Unmatched => Some(0),
                PartyStatus::NotParticipating => None,
            };
        }
    }
    run.matching = Some(state);
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn split_alpha(a: usize, b: usize) -> RandomnessConfiguration {
        let ids: Vec<usize> = (0..a + b).map(|p| if p < a { 1 } else { 2 }).collect();
        RandomnessConfiguration::from_source_ids(&ids).unwrap()
    }

    #[test]
    fn one_to_one_matches_in_one_iteration() {
        let alpha = split_alpha(1, 1);
        let ports = PortAssignment::random(2, 0);
        let state = run_create_matching(&alpha, &ports, &[0], &[1], 5, &RunOptions::new(50)).unwrap();
        assert!(state.is_perfect());
        assert_eq!(state.sizes, [1]);
        assert_eq!(state.matching, [(0, 1)]);
        assert_eq!(state.rounds_used, 3);
    }

    #[test]
    fn two_into_three_leaves_one_unmatched() {
        let alpha = split_alpha(2, 3);
        for seed in 0..100 {
            let ports = PortAssignment::random(5, seed);
            let state = run_create_matching(&alpha, &ports, &[0, 1], &[2, 3, 4], seed, &RunOptions::new(200)).unwrap();
            assert!(state.is_perfect());
            assert!(state.is_consistent());
            let unmatched = state.status.iter().filter(|s| **s == PartyStatus::Unmatched).count();
            assert_eq!(unmatched, 1);
        }
    }

    #[test]
    fn larger_first_side_is_swapped() {
        let alpha = split_alpha(3, 2);
        let ports = PortAssignment::random(5, 1);
        let state = run_create_matching(&alpha, &ports, &[0, 1, 2], &[3, 4], 2, &RunOptions::new(200)).unwrap();
        assert!(state.swapped);
        assert_eq!(state.v1, [3, 4]);
        assert!(state.is_perfect());
    }

    #[test]
    fn shared_source_inside_first_side() {
        let alpha = split_alpha(3, 3);
        for seed in 0..100 {
            let ports = PortAssignment::random(6, seed ^ 0xabc);
            let state = run_create_matching(&alpha, &ports, &[0, 1, 2], &[3, 4, 5], seed, &RunOptions::new(500)).unwrap();
            assert!(state.is_perfect(), "seed {seed}");
            assert!(state.is_consistent());
        }
    }

    #[test]
    fn rejects_overlapping_sides() {
        let alpha = split_alpha(2, 2);
        let ports = PortAssignment::random(4, 1);
        assert!(run_create_matching(&alpha, &ports, &[0, 1], &[1, 2], 0, &RunOptions::new(10)).is_err());
        assert!(run_create_matching(&alpha, &ports, &[], &[1, 2], 0, &RunOptions::new(10)).is_err());
    }
}
