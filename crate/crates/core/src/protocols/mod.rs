//! Round-synchronous protocol simulations over realized source streams.
//!
//! Every run is a deterministic function of the protocol, the model, the
//! configuration and the seed. Party `i` receives bit `r` of the stream of
//! its source in round `r`, the same stream `sample_draw` exposes.

mod blackboard;
mod gcd;
mod matching;
mod montecarlo;
mod reduction;

use alloc::vec;
use alloc::vec::Vec;

pub use blackboard::run_blackboard_le;
pub use gcd::run_gcd_le;
pub use matching::{run_create_matching, MatchingState, PartyStatus};
pub use montecarlo::{monte_carlo, summarize, trial_seed, Failure, MonteCarloSummary, RoundStats, MAX_LISTED_FAILURES};
pub use reduction::{run_task_by_leader, LeaderTask, MLeaderElection, MaxOfInputs};

use crate::knowledge::{Model, ModelKind, PortAssignment, Refiner};
use crate::randomness::{RandomnessConfiguration, SourceStream};
use crate::tasks::OutputComplex;
use crate::Result;

pub const DEFAULT_BOOTSTRAP_WINDOW: usize = 8;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct RunOptions {
    pub max_rounds: usize,
    /// Rounds of pure randomness exchange before the GCD main phase.
    pub bootstrap_window: usize,
    pub record_trace: bool,
}

impl RunOptions {
    pub fn new(max_rounds: usize) -> Self {
        RunOptions {
            max_rounds,
            bootstrap_window: DEFAULT_BOOTSTRAP_WINDOW,
            record_trace: false,
        }
    }

    pub fn traced(mut self) -> Self {
        self.record_trace = true;
        self
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum RunStatus {
    Elected { leader: usize },
    /// Matching or task run that produced its full outcome.
    Completed,
    Timeout,
    /// A single class of size > 1 remains whose members can never diverge.
    StuckAtGcd { sizes: Vec<usize> },
    /// The task admits no assignment the leader can address.
    Unsatisfiable,
}

impl RunStatus {
    pub fn label(&self) -> &'static str {
        match self {
            RunStatus::Elected { .. } => "elected",
            RunStatus::Completed => "completed",
            RunStatus::Timeout => "timeout",
            RunStatus::StuckAtGcd { .. } => "stuck_at_gcd",
            RunStatus::Unsatisfiable => "unsatisfiable",
        }
    }

    pub fn is_success(&self) -> bool {
        matches!(self, RunStatus::Elected { .. } | RunStatus::Completed)
    }
}

/// One `(round, party)` line of a trace.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TraceRecord {
    pub round: usize,
    pub party: usize,
    pub class: Option<usize>,
    pub state: &'static str,
    pub output: Option<u64>,
}

/// Multiset of active class sizes before and after one matching step.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct EuclidStep {
    pub round: usize,
    pub before: Vec<usize>,
    pub after: Vec<usize>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ProtocolRun {
    pub protocol: &'static str,
    pub model: ModelKind,
    pub alpha: RandomnessConfiguration,
    pub seed: u64,
    pub status: RunStatus,
    pub rounds_used: usize,
    /// Knowledge time the outputs are a function of.
    pub output_time: Option<usize>,
    pub outcome: Vec<Option<u64>>,
    pub trace: Vec<TraceRecord>,
    pub euclid: Vec<EuclidStep>,
    pub restarts: usize,
    pub matching: Option<MatchingState>,
}

impl ProtocolRun {
    fn new(protocol: &'static str, model: ModelKind, alpha: &RandomnessConfiguration, seed: u64) -> Self {
        ProtocolRun {
            protocol,
            model,
            alpha: alpha.clone(),
            seed,
            status: RunStatus::Timeout,
            rounds_used: 0,
            output_time: None,
            outcome: vec![None; alpha.n()],
            trace: Vec::new(),
            euclid: Vec::new(),
            restarts: 0,
            matching: None,
        }
    }

    pub fn leaders(&self) -> Vec<usize> {
        (0..self.outcome.len()).filter(|&p| self.outcome[p] == Some(1)).collect()
    }

    /// The unique leader, if the run elected exactly one.
    pub fn unique_leader(&self) -> Option<usize> {
        match (&self.status, self.leaders().as_slice()) {
            (RunStatus::Elected { leader }, [only]) if leader == only => Some(*only),
            _ => None,
        }
    }
}

/// Per-party access to realized bits plus a pick cursor for protocol choices.
#[derive(Clone, Debug)]
pub(crate) struct PartyBits {
    source_of: Vec<usize>,
    streams: Vec<SourceStream>,
    cursor: Vec<usize>,
}

impl PartyBits {
    pub(crate) fn new(alpha: &RandomnessConfiguration, seed: u64, cursor_start: usize) -> Self {
        PartyBits {
            source_of: (0..alpha.n()).map(|p| alpha.source_of(p)).collect(),
            streams: (0..alpha.k()).map(|c| SourceStream::for_source(seed, c)).collect(),
            cursor: vec![cursor_start; alpha.n()],
        }
    }

    pub(crate) fn bit(&mut self, party: usize, index: usize) -> bool {
        self.streams[self.source_of[party]].bit(index)
    }

    /// Bits delivered in round `round` (1-based).
    pub(crate) fn round_bits(&mut self, round: usize) -> Vec<bool> {
        (0..self.source_of.len()).map(|p| self.bit(p, round - 1)).collect()
    }

    pub(crate) fn source_of(&self, party: usize) -> usize {
        self.source_of[party]
    }

    /// Uniform choice in `0..m` from the party's own bits, MSB first, by
    /// rejection. Only the first `available` bits may be read; `None` means
    /// the party has to wait for more rounds. Rejected bits stay consumed.
    pub(crate) fn try_pick(&mut self, party: usize, m: usize, available: usize) -> Option<usize> {
        assert!(m > 0, "pick from an empty range");
        if m == 1 {
            return Some(0);
        }
        let width = (usize::BITS - (m - 1).leading_zeros()) as usize;
        loop {
            let start = self.cursor[party];
            if start + width > available {
                return None;
            }
            let mut v = 0usize;
            for i in start..start + width {
                v = (v << 1) | self.bit(party, i) as usize;
            }
            self.cursor[party] = start + width;
            if v < m {
                return Some(v);
            }
        }
    }
}

/// Protocols runnable through `run_protocol` and the Monte Carlo harness.
#[derive(Clone, Debug)]
pub enum ProtocolSpec {
    BlackboardLe,
    GcdLe { ports: PortAssignment },
    Matching { ports: PortAssignment, v1: Vec<usize>, v2: Vec<usize> },
    TaskByLeader { model: Model, task: TaskChoice, inputs: Vec<u64> },
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum TaskChoice {
    MaxOfInputs,
    MLeader(MLeaderElection),
    /// Input-free task given by a symmetric output complex with numeric values.
    Complex(OutputComplex),
}

impl TaskChoice {
    pub fn as_task(&self) -> &dyn LeaderTask {
        match self {
            TaskChoice::MaxOfInputs => &MaxOfInputs,
            TaskChoice::MLeader(m) => m,
            TaskChoice::Complex(o) => o,
        }
    }
}

pub fn run_protocol(
    spec: &ProtocolSpec,
    alpha: &RandomnessConfiguration,
    seed: u64,
    opts: &RunOptions,
) -> Result<ProtocolRun> {
    match spec {
        ProtocolSpec::BlackboardLe => run_blackboard_le(alpha, seed, opts),
        ProtocolSpec::GcdLe { ports } => run_gcd_le(alpha, ports, seed, opts),
        ProtocolSpec::Matching { ports, v1, v2 } => matching::run_matching_protocol(alpha, ports, v1, v2, seed, opts),
        ProtocolSpec::TaskByLeader { model, task, inputs } => {
            run_task_by_leader(alpha, model, task.as_task(), inputs, seed, opts)
        }
    }
}

/// Checks that parties with equal knowledge at the run's output time were
/// given equal outputs. Knowledge starts from `inputs` when present.
pub fn audit_name_independence(run: &ProtocolRun, model: &Model, inputs: Option<&[u64]>) -> Result<bool> {
    let Some(time) = run.output_time else {
        return Ok(true);
    };
    let n = run.alpha.n();
    // outputs may depend on port-addressed messages, so receivers know the
    // sender's port as well
    let mut refiner = match inputs {
        Some(inputs) => Refiner::with_initial(model, inputs)?,
        None => Refiner::new(model, n)?,
    }
    .with_sender_ports();
    let mut bits = PartyBits::new(&run.alpha, run.seed, 0);
    for round in 1..=time {
        refiner.step(&bits.round_bits(round));
    }
    let class_of = refiner.class_of();
    Ok((0..n).all(|a| (0..n).all(|b| class_of[a] != class_of[b] || run.outcome[a] == run.outcome[b])))
}

pub(crate) fn gcd_of(sizes: &[usize]) -> usize {
    sizes.iter().fold(0, |g, &s| num_integer::gcd(g, s))
}
