//! The `symbreak` command line.
//!
//! Exit codes: 0 success or solvable, 1 invalid input, 2 unsolvable,
//! 3 unknown, 4 enumeration cap exceeded or (with `--strict`) a
//! timeout-dominated simulation.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use symbreak_core::analysis::{
    decide_blackboard, decide_message_passing_fixed_ports, decide_message_passing_worst_case, solvability_curve,
    Solvability,
};
use symbreak_core::complexes::{export_dot, project_pi_complex, ChromaticComplex};
use symbreak_core::knowledge::{adversarial_ports, project_pi_tilde, Model, PortAssignment};
use symbreak_core::protocols::{MLeaderElection, ProtocolSpec, RunOptions, TaskChoice};
use symbreak_core::randomness::{enumerate_consistent, RandomnessConfiguration, Realization, DEFAULT_ENUMERATION_CAP};
use symbreak_core::tasks::{make_leader_election, make_m_leader_election, OutputComplex};

use crate::formats::{read_json, trace_lines, write_atomic, AlphaJson, ComplexJson, CurveJson, OutputComplexJson, PortsJson, SummaryJson};
use crate::montecarlo::run_trials;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_UNSOLVABLE: i32 = 2;
pub const EXIT_UNKNOWN: i32 = 3;
pub const EXIT_CAP: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "symbreak", version, about = "Randomized symmetry breaking in anonymous networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Eventual solvability of leader election.
    Decide(Common),
    /// Exact solvability probabilities over a range of rounds.
    Analyze(AnalyzeArgs),
    /// Monte Carlo runs of a protocol.
    Simulate(SimulateArgs),
    /// Emit a complex as DOT or JSON.
    Complex(ComplexArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Blackboard,
    Mp,
}

#[derive(Args, Debug)]
pub struct Common {
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    /// Parties per source, e.g. `1,2,2`.
    #[arg(long)]
    pub sources: Option<String>,
    /// Explicit assignment file `{"n":..,"source_of":[..]}`.
    #[arg(long)]
    pub assignment: Option<PathBuf>,
    /// `adversarial`, `random:SEED` or a ports file.
    #[arg(long, default_value = "adversarial")]
    pub ports: String,
    /// `le`, `mle:M`, `max` or an output complex file.
    #[arg(long, default_value = "le")]
    pub task: String,
    /// Largest number of enumerated source bits `k t`.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    pub cap: u32,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub common: Common,
    /// Inclusive range `A..B`, or a single round.
    #[arg(long, default_value = "0..4")]
    pub t: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProtocolArg {
    BbLe,
    GcdLe,
    Matching,
    TaskByLeader,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub protocol: ProtocolArg,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Round limit per trial; defaults to `50 n`.
    #[arg(long)]
    pub max_rounds: Option<usize>,
    /// Private inputs for task-by-leader, e.g. `3,1,2`; zeros by default.
    #[arg(long)]
    pub inputs: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write per-round traces as JSON lines (needs `--out`).
    #[arg(long)]
    pub trace: bool,
    /// Exit 4 when more than half of the trials time out.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ComplexKind {
    PiTilde,
    PiOutput,
    Realizations,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Dot,
    Json,
}

#[derive(Args, Debug)]
pub struct ComplexArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub kind: ComplexKind,
    /// Realization for `pi-tilde`, strings separated by commas, e.g. `0,1,1`.
    #[arg(long)]
    pub rho: Option<String>,
    /// Number of parties for `pi-output` and `realizations` when no configuration is given.
    #[arg(long)]
    pub n: Option<usize>,
    /// Round for `realizations`.
    #[arg(long, default_value_t = 1)]
    pub t: usize,
    #[arg(long, value_enum, default_value = "dot")]
    pub format: FormatArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses arguments, runs the command, prints errors, returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code_for(&e)
        }
    }
}

fn exit_code_for(e: &anyhow::Error) -> i32 {
    match e.downcast_ref::<symbreak_core::Error>() {
        Some(symbreak_core::Error::CapExceeded { .. }) => EXIT_CAP,
        _ => EXIT_INVALID,
    }
}

pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Decide(c) => cmd_decide(&c),
        Command::Analyze(a) => cmd_analyze(&a),
        Command::Simulate(s) => cmd_simulate(&s),
        Command::Complex(c) => cmd_complex(&c),
    }
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(|s| s.trim().parse::<T>().map_err(|_| anyhow!("bad {what} entry {s:?}")))
        .collect()
}

impl Common {
    fn alpha(&self) -> Result<Option<RandomnessConfiguration>> {
        match (&self.sources, &self.assignment) {
            (Some(_), Some(_)) => bail!("give either --sources or --assignment, not both"),
            (Some(s), None) => Ok(Some(RandomnessConfiguration::from_counts(&parse_list::<usize>(s, "source count")?)?)),
            (None, Some(path)) => Ok(Some(read_json::<AlphaJson>(path)?.to_alpha()?)),
            (None, None) => Ok(None),
        }
    }

    fn require_alpha(&self) -> Result<RandomnessConfiguration> {
        self.alpha()?.ok_or_else(|| anyhow!("a configuration is required (--sources or --assignment)"))
    }

    fn model_arg(&self) -> ModelArg {
        self.model.unwrap_or(ModelArg::Blackboard)
    }

    fn port_assignment(&self, n: usize, alpha: Option<&RandomnessConfiguration>) -> Result<PortAssignment> {
        if self.ports == "adversarial" {
            let alpha = alpha.ok_or_else(|| anyhow!("adversarial ports need a configuration"))?;
            return Ok(adversarial_ports(alpha)?.original());
        }
        if let Some(seed) = self.ports.strip_prefix("random:") {
            let seed: u64 = seed.parse().with_context(|| format!("bad port seed {seed:?}"))?;
            return Ok(PortAssignment::random(n, seed));
        }
        let ports = read_json::<PortsJson>(Path::new(&self.ports))?.to_ports()?;
        if ports.n() != n {
            bail!("ports file is for {} parties, configuration has {n}", ports.n());
        }
        Ok(ports)
    }

    fn build_model(&self, n: usize, alpha: Option<&RandomnessConfiguration>) -> Result<Model> {
        Ok(match self.model_arg() {
            ModelArg::Blackboard => Model::Blackboard,
            ModelArg::Mp => Model::MessagePassing(self.port_assignment(n, alpha)?),
        })
    }

    fn output_complex(&self, n: usize) -> Result<OutputComplex> {
        if self.task == "le" {
            return Ok(make_leader_election(n)?);
        }
        if let Some(m) = self.task.strip_prefix("mle:") {
            return Ok(make_m_leader_election(n, m.parse().with_context(|| format!("bad m {m:?}"))?)?);
        }
        if self.task == "max" {
            bail!("max-of-inputs has inputs and no output complex");
        }
        let o = read_json::<OutputComplexJson>(Path::new(&self.task))?.to_output()?;
        if o.n() != n {
            bail!("task is on {} parties, configuration has {n}", o.n());
        }
        Ok(o)
    }

    fn leader_task(&self, n: usize) -> Result<TaskChoice> {
        if self.task == "max" {
            return Ok(TaskChoice::MaxOfInputs);
        }
        if self.task == "le" {
            return Ok(TaskChoice::MLeader(MLeaderElection(1)));
        }
        if let Some(m) = self.task.strip_prefix("mle:") {
            let m: usize = m.parse().with_context(|| format!("bad m {m:?}"))?;
            make_m_leader_election(n, m)?;
            return Ok(TaskChoice::MLeader(MLeaderElection(m)));
        }
        Ok(TaskChoice::Complex(self.output_complex(n)?))
    }
}

pub fn cmd_decide(c: &Common) -> Result<i32> {
    let alpha = c.require_alpha()?;
    if c.task != "le" {
        bail!("decide covers leader election only");
    }
    let verdict = match c.model_arg() {
        ModelArg::Blackboard => decide_blackboard(&alpha),
        ModelArg::Mp if c.ports == "adversarial" => decide_message_passing_worst_case(&alpha),
        ModelArg::Mp => {
            // validates the ports even though the verdict does not read them
            c.port_assignment(alpha.n(), Some(&alpha))?;
            decide_message_passing_fixed_ports(&alpha)
        }
    };
    println!("{verdict}");
    Ok(match verdict.solvability {
        Solvability::Solvable => EXIT_OK,
        Solvability::Unsolvable => EXIT_UNSOLVABLE,
        Solvability::Unknown => EXIT_UNKNOWN,
    })
}

/// Inclusive `A..B`; an empty range when `B < A`.
pub fn parse_t_range(text: &str) -> Result<Vec<usize>> {
    match text.split_once("..") {
        Some((a, b)) => {
            let a: usize = a.trim().parse().with_context(|| format!("bad range start {a:?}"))?;
            let b: usize = b.trim().parse().with_context(|| format!("bad range end {b:?}"))?;
            Ok((a..=b).collect())
        }
        None => Ok(vec![text.trim().parse().with_context(|| format!("bad round {text:?}"))?]),
    }
}

pub fn cmd_analyze(a: &AnalyzeArgs) -> Result<i32> {
    let alpha = a.common.require_alpha()?;
    let model = a.common.build_model(alpha.n(), Some(&alpha))?;
    let task = a.common.output_complex(alpha.n())?;
    let ts = parse_t_range(&a.t)?;
    let curve = solvability_curve(&model, &alpha, &task, ts, a.common.cap)?;
    let json = CurveJson::from_curve(&curve)?;
    let csv = json.to_csv();
    match &a.out {
        Some(dir) => {
            write_atomic(&dir.join("curve.csv"), csv.as_bytes())?;
            write_atomic(&dir.join("curve.json"), (serde_json::to_string_pretty(&json)? + "\n").as_bytes())?;
        }
        None => print!("{csv}"),
    }
    Ok(EXIT_OK)
}

pub fn cmd_simulate(s: &SimulateArgs) -> Result<i32> {
    let alpha = s.common.require_alpha()?;
    let n = alpha.n();
    let wanted = match s.protocol {
        ProtocolArg::BbLe => Some(ModelArg::Blackboard),
        ProtocolArg::GcdLe | ProtocolArg::Matching => Some(ModelArg::Mp),
        ProtocolArg::TaskByLeader => None,
    };
    if let (Some(w), Some(given)) = (wanted, s.common.model) {
        if w != given {
            bail!("protocol {:?} runs in the {:?} model", s.protocol, w);
        }
    }
    let ports = || s.common.port_assignment(n, Some(&alpha));
    let spec = match s.protocol {
        ProtocolArg::BbLe => ProtocolSpec::BlackboardLe,
        ProtocolArg::GcdLe => ProtocolSpec::GcdLe { ports: ports()? },
        ProtocolArg::Matching => {
            if alpha.k() < 2 {
                bail!("matching needs two sources: source 1 is one side, source 2 the other");
            }
            let side = |c: usize| (0..n).filter(|&p| alpha.source_of(p) == c).collect::<Vec<_>>();
            ProtocolSpec::Matching {
                ports: ports()?,
                v1: side(0),
                v2: side(1),
            }
        }
        ProtocolArg::TaskByLeader => {
            let inputs = match &s.inputs {
                Some(text) => parse_list::<u64>(text, "input")?,
                None => vec![0; n],
            };
            ProtocolSpec::TaskByLeader {
                model: s.common.build_model(n, Some(&alpha))?,
                task: s.common.leader_task(n)?,
                inputs,
            }
        }
    };
    let model_name = match &spec {
        ProtocolSpec::BlackboardLe => "blackboard",
        ProtocolSpec::TaskByLeader { model: Model::Blackboard, .. } => "blackboard",
        _ => "mp",
    };
    if s.trace && s.out.is_none() {
        bail!("--trace needs --out");
    }
    if s.trials == 0 {
        bail!("--trials must be at least 1");
    }
    let max_rounds = s.max_rounds.unwrap_or(50 * n);
    let mut opts = RunOptions::new(max_rounds);
    opts.record_trace = s.trace;
    let runs = run_trials(&spec, &alpha, s.trials, s.seed, &opts)?;
    let protocol = runs.first().map_or("", |(_, r)| r.protocol);
    let summary = symbreak_core::protocols::summarize(protocol, &runs);
    let json = serde_json::to_string_pretty(&SummaryJson::new(&summary, model_name, &alpha, s.seed, max_rounds))? + "\n";
    if let Some(dir) = &s.out {
        write_atomic(&dir.join("summary.json"), json.as_bytes())?;
        if s.trace {
            let mut lines = String::new();
            for (trial, (_, run)) in runs.iter().enumerate() {
                trace_lines(trial as u64, run, &mut lines)?;
            }
            write_atomic(&dir.join("trace.jsonl"), lines.as_bytes())?;
        }
    }
    print!("{json}");
    let timeouts = summary.status_counts.get("timeout").copied().unwrap_or(0);
    if s.strict && 2 * timeouts > summary.trials {
        eprintln!("error: {timeouts} of {} trials timed out", summary.trials);
        return Ok(EXIT_CAP);
    }
    Ok(EXIT_OK)
}

fn realizations_complex(alpha: &RandomnessConfiguration, t: usize, cap: u32) -> Result<ChromaticComplex> {
    let facets: Vec<_> = enumerate_consistent(alpha, t, cap)?.map(|rho| rho.to_simplex()).collect();
    Ok(ChromaticComplex::from_simplices(alpha.n(), facets)?)
}

pub fn cmd_complex(c: &ComplexArgs) -> Result<i32> {
    let alpha = c.common.alpha()?;
    let complex = match c.kind {
        ComplexKind::PiTilde => {
            let text = c.rho.as_deref().ok_or_else(|| anyhow!("pi-tilde needs --rho"))?;
            let strings: Vec<&str> = text.split(',').map(str::trim).collect();
            let rho = Realization::parse(&strings)?;
            if let Some(a) = &alpha {
                if !rho.is_consistent_with(a) {
                    bail!("realization is not consistent with the configuration");
                }
            }
            let model = c.common.build_model(rho.n(), alpha.as_ref())?;
            project_pi_tilde(&model, &rho)?
        }
        ComplexKind::PiOutput => {
            let n = match (c.n, &alpha) {
                (Some(n), _) => n,
                (None, Some(a)) => a.n(),
                (None, None) => bail!("pi-output needs --n or a configuration"),
            };
            project_pi_complex(&c.common.output_complex(n)?.to_chromatic())
        }
        ComplexKind::Realizations => {
            // --n alone means n independent sources, i.e. every string assignment
            let alpha = match (alpha, c.n) {
                (Some(a), _) => a,
                (None, Some(n)) => RandomnessConfiguration::from_counts(&vec![1; n])?,
                (None, None) => bail!("realizations need --n or a configuration"),
            };
            realizations_complex(&alpha, c.t, c.common.cap)?
        }
    };
    let text = match c.format {
        FormatArg::Dot => export_dot(&complex),
        FormatArg::Json => serde_json::to_string_pretty(&ComplexJson::from_complex(&complex))? + "\n",
    };
    match &c.out {
        Some(path) => write_atomic(path, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(EXIT_OK)
}
