//! JSON and CSV shapes of the library types.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use symbreak_core::analysis::SolvabilityCurve;
use symbreak_core::complexes::{ChromaticComplex, Simplex, Value, Vertex};
use symbreak_core::knowledge::PortAssignment;
use symbreak_core::protocols::{MonteCarloSummary, ProtocolRun};
use symbreak_core::randomness::{RandomnessConfiguration, Realization};
use symbreak_core::tasks::OutputComplex;

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct VertexJson {
    pub name: u32,
    /// Hex of the value bytes.
    pub value: String,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct ComplexJson {
    pub n: usize,
    pub facets: Vec<Vec<VertexJson>>,
}

impl ComplexJson {
    pub fn from_complex(k: &ChromaticComplex) -> Self {
        ComplexJson {
            n: k.n(),
            facets: k
                .facets()
                .map(|f| {
                    f.vertices()
                        .map(|v| VertexJson {
                            name: v.name,
                            value: v.value.to_hex(),
                        })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn to_complex(&self) -> Result<ChromaticComplex> {
        let facets = self
            .facets
            .iter()
            .map(|f| {
                let vs = f
                    .iter()
                    .map(|v| {
                        let value = Value::from_hex(&v.value).ok_or_else(|| anyhow!("bad hex value {:?}", v.value))?;
                        Ok(Vertex::new(v.name, value))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Simplex::new(vs)?)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ChromaticComplex::from_simplices(self.n, facets)?)
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct AlphaJson {
    pub n: usize,
    /// 1-based source per party.
    pub source_of: Vec<usize>,
}

impl AlphaJson {
    pub fn from_alpha(alpha: &RandomnessConfiguration) -> Self {
        AlphaJson {
            n: alpha.n(),
            source_of: alpha.source_ids(),
        }
    }

    pub fn to_alpha(&self) -> Result<RandomnessConfiguration> {
        if self.source_of.len() != self.n {
            bail!("assignment lists {} parties but n = {}", self.source_of.len(), self.n);
        }
        Ok(RandomnessConfiguration::from_source_ids(&self.source_of)?)
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct RealizationJson {
    pub t: usize,
    pub strings: Vec<String>,
}

impl RealizationJson {
    pub fn from_realization(rho: &Realization) -> Self {
        RealizationJson {
            t: rho.t(),
            strings: rho.strings().iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn to_realization(&self) -> Result<Realization> {
        let strs: Vec<&str> = self.strings.iter().map(String::as_str).collect();
        let rho = Realization::parse(&strs)?;
        if rho.t() != self.t {
            bail!("strings have length {} but t = {}", rho.t(), self.t);
        }
        Ok(rho)
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct PortsJson {
    pub n: usize,
    /// Row `i` lists the parties behind ports `1..n-1` of party `i`.
    pub target: Vec<Vec<usize>>,
}

impl PortsJson {
    pub fn from_ports(p: &PortAssignment) -> Self {
        PortsJson {
            n: p.n(),
            target: p.rows().to_vec(),
        }
    }

    pub fn to_ports(&self) -> Result<PortAssignment> {
        Ok(PortAssignment::new(self.n, self.target.clone())?)
    }
}

/// An output value: an integer, or a string of hex bytes.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
#[serde(untagged)]
pub enum ValueJson {
    Int(u64),
    Hex(String),
}

impl ValueJson {
    pub fn from_value(v: &Value) -> Self {
        match v.to_u64() {
            Some(x) if Value::from_u64(x) == *v => ValueJson::Int(x),
            _ => ValueJson::Hex(v.to_hex()),
        }
    }

    pub fn to_value(&self) -> Result<Value> {
        match self {
            ValueJson::Int(x) => Ok(Value::from_u64(*x)),
            ValueJson::Hex(h) => Value::from_hex(h).ok_or_else(|| anyhow!("bad hex value {h:?}")),
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct OutputComplexJson {
    pub n: usize,
    pub alphabet: Vec<ValueJson>,
    pub facets: Vec<Vec<ValueJson>>,
}

impl OutputComplexJson {
    pub fn from_output(o: &OutputComplex) -> Self {
        OutputComplexJson {
            n: o.n(),
            alphabet: o.alphabet().iter().map(ValueJson::from_value).collect(),
            facets: o.facets().map(|f| f.iter().map(ValueJson::from_value).collect()).collect(),
        }
    }

    pub fn to_output(&self) -> Result<OutputComplex> {
        let facets = self
            .facets
            .iter()
            .map(|f| f.iter().map(ValueJson::to_value).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let o = OutputComplex::new(self.n, facets)?;
        let alphabet = self.alphabet.iter().map(ValueJson::to_value).collect::<Result<std::collections::BTreeSet<_>>>()?;
        if !o.alphabet().is_subset(&alphabet) {
            bail!("facets use values outside the declared alphabet");
        }
        Ok(o)
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct CurveRowJson {
    pub t: usize,
    pub numerator: u64,
    pub denominator: u64,
    pub solving_count: u64,
    pub total_count: u64,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct CurveJson {
    pub model: String,
    pub alpha: AlphaJson,
    pub rows: Vec<CurveRowJson>,
}

impl CurveJson {
    pub fn from_curve(c: &SolvabilityCurve) -> Result<Self> {
        let rows = c
            .rows
            .iter()
            .map(|r| {
                Ok(CurveRowJson {
                    t: r.t,
                    numerator: r.probability.numer().to_u64().context("numerator exceeds 64 bits")?,
                    denominator: r.probability.denom().to_u64().context("denominator exceeds 64 bits")?,
                    solving_count: r.solving,
                    total_count: r.total,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CurveJson {
            model: c.model.clone(),
            alpha: AlphaJson::from_alpha(&c.alpha),
            rows,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,numerator,denominator,solving_count,total_count\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{},{}", r.t, r.numerator, r.denominator, r.solving_count, r.total_count);
        }
        out
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct TraceLine {
    pub trial: u64,
    pub round: usize,
    pub party: usize,
    pub class: Option<usize>,
    pub state: String,
    pub output: Option<u64>,
}

/// JSON-lines trace of one run.
pub fn trace_lines(trial: u64, run: &ProtocolRun, out: &mut String) -> Result<()> {
    for r in &run.trace {
        let line = TraceLine {
            trial,
            round: r.round,
            party: r.party,
            class: r.class,
            state: r.state.to_string(),
            output: r.output,
        };
        out.push_str(&serde_json::to_string(&line)?);
        out.push('\n');
    }
    Ok(())
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct RoundsJson {
    pub min: usize,
    pub median: usize,
    pub p99: usize,
    pub max: usize,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct FailureJson {
    pub trial: u64,
    pub seed: u64,
    pub status: String,
    pub rounds_used: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stuck_sizes: Option<Vec<usize>>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct SummaryJson {
    pub protocol: String,
    pub model: String,
    pub alpha: AlphaJson,
    pub seed: u64,
    pub max_rounds: usize,
    pub trials: u64,
    pub successes: u64,
    pub success_rate: f64,
    pub rounds: Option<RoundsJson>,
    pub status_counts: BTreeMap<String, u64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub matching_sizes: BTreeMap<String, u64>,
    pub failures: Vec<FailureJson>,
}

impl SummaryJson {
    pub fn new(s: &MonteCarloSummary, model: &str, alpha: &RandomnessConfiguration, seed: u64, max_rounds: usize) -> Self {
        use symbreak_core::protocols::RunStatus;
        SummaryJson {
            protocol: s.protocol.to_string(),
            model: model.to_string(),
            alpha: AlphaJson::from_alpha(alpha),
            seed,
            max_rounds,
            trials: s.trials,
            successes: s.successes,
            success_rate: s.success_rate,
            rounds: s.rounds.map(|r| RoundsJson {
                min: r.min,
                median: r.median,
                p99: r.p99,
                max: r.max,
            }),
            status_counts: s.status_counts.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            matching_sizes: s.matching_sizes.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            failures: s
                .failures
                .iter()
                .map(|f| FailureJson {
                    trial: f.trial,
                    seed: f.seed,
                    status: f.status.label().to_string(),
                    rounds_used: f.rounds_used,
                    stuck_sizes: match &f.status {
                        RunStatus::StuckAtGcd { sizes } => Some(sizes.clone()),
                        _ => None,
                    },
                })
                .collect(),
        }
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    use std::io::Write;
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use symbreak_core::tasks::make_leader_election;

    #[test]
    fn alpha_round_trip() {
        let a = RandomnessConfiguration::from_source_ids(&[1, 2, 2]).unwrap();
        let j = AlphaJson::from_alpha(&a);
        assert_eq!(serde_json::to_string(&j).unwrap(), r#"{"n":3,"source_of":[1,2,2]}"#);
        assert_eq!(j.to_alpha().unwrap(), a);
        assert!(AlphaJson { n: 2, source_of: vec![1, 3] }.to_alpha().is_err());
    }

    #[test]
    fn ports_round_trip() {
        let p = PortAssignment::random(4, 2);
        let j = PortsJson::from_ports(&p);
        assert_eq!(j.to_ports().unwrap(), p);
        let bad = PortsJson { n: 2, target: vec![vec![0], vec![0]] };
        assert!(bad.to_ports().is_err());
    }

    #[test]
    fn output_complex_round_trip() {
        let le = make_leader_election(3).unwrap();
        let j = OutputComplexJson::from_output(&le);
        let text = serde_json::to_string(&j).unwrap();
        assert!(text.starts_with(r#"{"n":3,"alphabet":[0,1],"facets":[[0,0,1]"#));
        let back: OutputComplexJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_output().unwrap(), le);
        let asym = OutputComplexJson {
            n: 2,
            alphabet: vec![ValueJson::Int(0), ValueJson::Int(1)],
            facets: vec![vec![ValueJson::Int(1), ValueJson::Int(0)]],
        };
        assert!(asym.to_output().is_err());
    }

    #[test]
    fn realization_and_complex_round_trip() {
        let rho = Realization::parse(&["01", "11"]).unwrap();
        let j = RealizationJson::from_realization(&rho);
        assert_eq!(j.to_realization().unwrap(), rho);
        let k = make_leader_election(2).unwrap().to_chromatic();
        let cj = ComplexJson::from_complex(&k);
        assert_eq!(cj.facets[0][0].value, "30");
        assert_eq!(cj.to_complex().unwrap(), k);
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/out.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "two");
    }
}
