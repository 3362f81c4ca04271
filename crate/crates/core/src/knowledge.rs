//! Full-information knowledge in the blackboard and message-passing models.
//!
//! Knowledge can be materialized as explicit recursive terms
//! ([`evolve_structural`]) or tracked as per-round consistency classes
//! ([`refine`]). Class ids are dense ranks of the knowledge terms in their
//! canonical order, so the two views agree on equality *and* on ordering.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use sha2::{Digest, Sha256};

use crate::complexes::{ChromaticComplex, Simplex, Value, Vertex};
use crate::randomness::{RandomnessConfiguration, Realization};
use crate::{Error, Result};

/// Depth cap for explicit knowledge terms.
pub const DEFAULT_STRUCTURAL_CAP: usize = 4;

const NO_PORT: usize = usize::MAX;

/// Per-party private numbering of the `n - 1` clique neighbours.
///
/// Parties are 0-indexed; ports are `1..=n-1`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PortAssignment {
    n: usize,
    target: Vec<Vec<usize>>,
    // port[i][p] = port at i leading to p
    port: Vec<Vec<usize>>,
}

/// Every row is a bijection from ports onto the other parties.
pub fn validate_ports(n: usize, rows: &[Vec<usize>]) -> bool {
    rows.len() == n
        && rows.iter().enumerate().all(|(i, row)| {
            let mut seen = vec![false; n];
            row.len() == n.saturating_sub(1)
                && row.iter().all(|&p| {
                    let fresh = p < n && p != i && !seen[p];
                    if fresh {
                        seen[p] = true;
                    }
                    fresh
                })
        })
}

impl PortAssignment {
    /// `rows[i][j - 1]` is the party behind port `j` of party `i`.
    pub fn new(n: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidPorts("no parties".into()));
        }
        if !validate_ports(n, &rows) {
            return Err(Error::InvalidPorts(format!(
                "rows must be bijections onto the other {} parties",
                n - 1
            )));
        }
        let mut port = vec![vec![NO_PORT; n]; n];
        for (i, row) in rows.iter().enumerate() {
            for (j, &p) in row.iter().enumerate() {
                port[i][p] = j + 1;
            }
        }
        Ok(PortAssignment {
            n,
            target: rows,
            port,
        })
    }

    /// Uniformly random numbering of every party's ports.
    pub fn random(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = (0..n)
            .map(|i| {
                let mut row: Vec<usize> = (0..n).filter(|&p| p != i).collect();
                for a in (1..row.len()).rev() {
                    let b = (rng.next_u64() % (a as u64 + 1)) as usize;
                    row.swap(a, b);
                }
                row
            })
            .collect();
        Self::new(n, rows).expect("shuffled rows are bijections")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Party behind port `port` (1-based) of `party`.
    pub fn target(&self, party: usize, port: usize) -> usize {
        self.target[party][port - 1]
    }

    /// Port of `party` leading to `other`.
    pub fn port_to(&self, party: usize, other: usize) -> usize {
        let p = self.port[party][other];
        assert!(p != NO_PORT, "no port from a party to itself");
        p
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.target
    }

    pub fn is_valid(&self) -> bool {
        validate_ports(self.n, &self.target)
    }

    /// The same wiring after renaming party `p` to `renaming[p]`.
    pub fn renamed(&self, renaming: &[usize]) -> PortAssignment {
        let mut rows = vec![Vec::new(); self.n];
        for (p, row) in self.target.iter().enumerate() {
            rows[renaming[p]] = row.iter().map(|&q| renaming[q]).collect();
        }
        PortAssignment::new(self.n, rows).expect("renaming preserves bijectivity")
    }
}

/// The cyclic shift `r + m g -> ((r + 1) mod g) + m g`.
pub fn shift_map(g: usize, party: usize) -> usize {
    let (r, m) = (party % g, party / g);
    (r + 1) % g + m * g
}

/// Port numbering under which the shift map is an automorphism.
///
/// Port `j` of party `i` leads to
/// `((i + j) mod g + floor(i / g) g + ceil(j / g) g) mod n`.
/// Bijectivity and the automorphism property are checked before returning.
pub fn shift_ports(n: usize, g: usize) -> Result<PortAssignment> {
    let fail = |reason: String| Error::InvalidConstruction { n, g, reason };
    if g == 0 || n == 0 || !n.is_multiple_of(g) {
        return Err(fail("g must be positive and divide n".into()));
    }
    let rows: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (1..n)
                .map(|j| ((i + j) % g + (i / g) * g + j.div_ceil(g) * g) % n)
                .collect()
        })
        .collect();
    if !validate_ports(n, &rows) {
        return Err(fail("formula does not give a bijection onto the other parties".into()));
    }
    for (i, row) in rows.iter().enumerate() {
        for (j, &p) in row.iter().enumerate() {
            if rows[shift_map(g, i)][j] != shift_map(g, p) {
                return Err(fail(format!("shift is not an automorphism at party {i}, port {}", j + 1)));
            }
        }
    }
    PortAssignment::new(n, rows)
}

/// Adversarial ports for a configuration, with the renaming they rely on.
#[derive(Clone, Debug)]
pub struct AdversarialPorts {
    /// Ports over renamed parties (grouped contiguously by source).
    pub renamed: PortAssignment,
    /// `renaming[p]` is the renamed index of original party `p`.
    pub renaming: Vec<usize>,
    pub g: usize,
}

impl AdversarialPorts {
    /// The same ports expressed over the original party names.
    pub fn original(&self) -> PortAssignment {
        let mut inverse = vec![0; self.renaming.len()];
        for (p, &r) in self.renaming.iter().enumerate() {
            inverse[r] = p;
        }
        self.renamed.renamed(&inverse)
    }

    /// Orbit `{f^c(p) : c < g}` of original party `p` under the shift.
    pub fn orbit(&self, party: usize) -> Vec<usize> {
        let mut inverse = vec![0; self.renaming.len()];
        for (p, &r) in self.renaming.iter().enumerate() {
            inverse[r] = p;
        }
        let mut cur = self.renaming[party];
        let mut out = Vec::with_capacity(self.g);
        for _ in 0..self.g {
            out.push(inverse[cur]);
            cur = shift_map(self.g, cur);
        }
        out
    }
}

/// Ports witnessing that every consistency class size is a multiple of
/// `gcd(n_1, ..., n_k)`.
pub fn adversarial_ports(alpha: &RandomnessConfiguration) -> Result<AdversarialPorts> {
    let n = alpha.n();
    let g = alpha.gcd();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&p| alpha.source_of(p));
    let mut renaming = vec![0; n];
    for (new, &old) in order.iter().enumerate() {
        renaming[old] = new;
    }
    let renamed = shift_ports(n, g)?;
    let out = AdversarialPorts {
        renamed,
        renaming,
        g,
    };
    for p in 0..n {
        if out.orbit(p).iter().any(|&q| alpha.source_of(q) != alpha.source_of(p)) {
            return Err(Error::InvalidConstruction {
                n,
                g,
                reason: format!("shift moves party {p} to another source"),
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ModelKind {
    Blackboard,
    MessagePassing,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Model {
    Blackboard,
    MessagePassing(PortAssignment),
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Blackboard => ModelKind::Blackboard,
            Model::MessagePassing(_) => ModelKind::MessagePassing,
        }
    }

    pub fn ports(&self) -> Option<&PortAssignment> {
        match self {
            Model::Blackboard => None,
            Model::MessagePassing(p) => Some(p),
        }
    }

    fn check_size(&self, n: usize) -> Result<()> {
        match self {
            Model::MessagePassing(p) if p.n() != n => Err(Error::InvalidPorts(format!(
                "ports are for {} parties, realization has {n}",
                p.n()
            ))),
            _ => Ok(()),
        }
    }
}

/// Explicit knowledge term: `⊥`, or (previous knowledge, fresh bit, what
/// was heard). Heard terms are sorted on a blackboard and port-ordered in
/// message passing. Derived ordering is the canonical lexicographic one.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Knowledge {
    Bottom,
    Step {
        prev: Arc<Knowledge>,
        bit: bool,
        heard: Vec<Arc<Knowledge>>,
    },
}

impl Knowledge {
    pub fn depth(&self) -> usize {
        match self {
            Knowledge::Bottom => 0,
            Knowledge::Step { prev, .. } => prev.depth() + 1,
        }
    }

    /// Prefix-free canonical encoding.
    pub fn encode_into(&self, out: &mut Vec<u8>) {
        match self {
            Knowledge::Bottom => out.push(0),
            Knowledge::Step { prev, bit, heard } => {
                out.push(1);
                out.push(*bit as u8);
                out.extend_from_slice(&(heard.len() as u32).to_le_bytes());
                prev.encode_into(out);
                for h in heard {
                    h.encode_into(out);
                }
            }
        }
    }

    pub fn digest(&self) -> Value {
        let mut buf = Vec::new();
        self.encode_into(&mut buf);
        Value::new(Sha256::digest(&buf).to_vec())
    }

    /// Whether `earlier` is this term's knowledge at some previous time.
    pub fn embeds(&self, earlier: &Knowledge) -> bool {
        match self {
            _ if self == earlier => true,
            Knowledge::Bottom => false,
            Knowledge::Step { prev, .. } => prev.embeds(earlier),
        }
    }
}

/// Explicit knowledge of every party after `rho.t()` rounds.
pub fn evolve_structural(model: &Model, rho: &Realization, cap: usize) -> Result<Vec<Arc<Knowledge>>> {
    let n = rho.n();
    model.check_size(n)?;
    if rho.t() > cap {
        return Err(Error::CapExceeded {
            what: "structural knowledge depth",
            requested: rho.t() as u64,
            cap: cap as u64,
        });
    }
    let mut current: Vec<Arc<Knowledge>> = (0..n).map(|_| Arc::new(Knowledge::Bottom)).collect();
    for round in 1..=rho.t() {
        let next = (0..n)
            .map(|i| {
                let heard = match model {
                    Model::Blackboard => {
                        let mut board: Vec<Arc<Knowledge>> = (0..n)
                            .filter(|&j| j != i)
                            .map(|j| current[j].clone())
                            .collect();
                        board.sort();
                        board
                    }
                    Model::MessagePassing(ports) => {
                        (1..n).map(|j| current[ports.target(i, j)].clone()).collect()
                    }
                };
                Arc::new(Knowledge::Step {
                    prev: current[i].clone(),
                    bit: rho.string(i).round(round),
                    heard,
                })
            })
            .collect();
        current = next;
    }
    Ok(current)
}

/// The facet `{(i, K_i(t))}` of the protocol complex, with knowledge
/// digests as values and a table recovering the terms.
pub fn knowledge_facet(
    model: &Model,
    rho: &Realization,
    cap: usize,
) -> Result<(Simplex, BTreeMap<Value, Arc<Knowledge>>)> {
    let ks = evolve_structural(model, rho, cap)?;
    let mut table = BTreeMap::new();
    let vertices: Vec<Vertex> = ks
        .iter()
        .enumerate()
        .map(|(i, k)| {
            let d = k.digest();
            table.insert(d.clone(), k.clone());
            Vertex::new(i as u32 + 1, d)
        })
        .collect();
    Ok((Simplex::new(vertices).expect("one vertex per party"), table))
}

/// Partition of parties by equal knowledge at time `t`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ConsistencyPartition {
    pub t: usize,
    /// Dense rank of each party's knowledge in canonical order.
    pub class_of: Vec<usize>,
}

impl ConsistencyPartition {
    pub fn class_count(&self) -> usize {
        self.class_of.iter().max().map_or(0, |m| m + 1)
    }

    /// Classes in rank order, members ascending.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.class_count()];
        for (p, &c) in self.class_of.iter().enumerate() {
            out[c].push(p);
        }
        out
    }

    pub fn same_class(&self, a: usize, b: usize) -> bool {
        self.class_of[a] == self.class_of[b]
    }

    /// Every class of `self` lies inside a class of `coarser`.
    pub fn refines(&self, coarser: &ConsistencyPartition) -> bool {
        let mut image: BTreeMap<usize, usize> = BTreeMap::new();
        self.class_of
            .iter()
            .zip(&coarser.class_of)
            .all(|(&fine, &coarse)| *image.entry(fine).or_insert(coarse) == coarse)
    }

    pub fn has_singleton(&self) -> bool {
        self.classes().iter().any(|c| c.len() == 1)
    }
}

/// Incremental class refinement, one round at a time.
///
/// The signature of party `i` in round `r` is its previous class, its bit,
/// and the previous classes it hears (sorted multiset on a blackboard,
/// port order in message passing).
#[derive(Clone, Debug)]
pub struct Refiner<'m> {
    model: &'m Model,
    class_of: Vec<usize>,
    t: usize,
    sender_ports: bool,
}

impl<'m> Refiner<'m> {
    pub fn new(model: &'m Model, n: usize) -> Result<Self> {
        model.check_size(n)?;
        Ok(Refiner {
            model,
            class_of: vec![0; n],
            t: 0,
            sender_ports: false,
        })
    }

    /// Refinement whose time-0 knowledge is a private input per party.
    pub fn with_initial<T: Ord>(model: &'m Model, inputs: &[T]) -> Result<Self> {
        model.check_size(inputs.len())?;
        let mut distinct: Vec<&T> = inputs.iter().collect();
        distinct.sort();
        distinct.dedup();
        Ok(Refiner {
            model,
            class_of: inputs
                .iter()
                .map(|x| distinct.binary_search(&x).expect("present"))
                .collect(),
            t: 0,
            sender_ports: false,
        })
    }

    /// In message passing, also record on which of its own ports each
    /// neighbour reaches this party. This is what a receiver learns from
    /// messages addressed to a single port.
    pub fn with_sender_ports(mut self) -> Self {
        self.sender_ports = true;
        self
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn class_of(&self) -> &[usize] {
        &self.class_of
    }

    pub fn partition(&self) -> ConsistencyPartition {
        ConsistencyPartition {
            t: self.t,
            class_of: self.class_of.clone(),
        }
    }

    /// Advance by one round in which party `i` receives `bits[i]`.
    pub fn step(&mut self, bits: &[bool]) {
        let n = self.class_of.len();
        assert_eq!(bits.len(), n, "one bit per party");
        let prev = &self.class_of;
        let sigs: Vec<(usize, bool, Vec<usize>)> = (0..n)
            .map(|i| {
                let heard = match self.model {
                    Model::Blackboard => {
                        let mut h: Vec<usize> =
                            (0..n).filter(|&j| j != i).map(|j| prev[j]).collect();
                        h.sort_unstable();
                        h
                    }
                    Model::MessagePassing(ports) if self.sender_ports => (1..n)
                        .flat_map(|j| {
                            let q = ports.target(i, j);
                            [prev[q], ports.port_to(q, i)]
                        })
                        .collect(),
                    Model::MessagePassing(ports) => {
                        (1..n).map(|j| prev[ports.target(i, j)]).collect()
                    }
                };
                (prev[i], bits[i], heard)
            })
            .collect();
        let mut distinct = sigs.clone();
        distinct.sort();
        distinct.dedup();
        self.class_of = sigs
            .iter()
            .map(|s| distinct.binary_search(s).expect("present"))
            .collect();
        self.t += 1;
    }
}

/// Consistency partitions at times `0..=rho.t()`.
pub fn refine_history(model: &Model, rho: &Realization) -> Result<Vec<ConsistencyPartition>> {
    let mut refiner = Refiner::new(model, rho.n())?;
    let mut out = Vec::with_capacity(rho.t() + 1);
    out.push(refiner.partition());
    for round in 1..=rho.t() {
        let bits: Vec<bool> = rho.strings().iter().map(|s| s.round(round)).collect();
        refiner.step(&bits);
        out.push(refiner.partition());
    }
    Ok(out)
}

/// Consistency partition at time `rho.t()`.
pub fn refine(model: &Model, rho: &Realization) -> Result<ConsistencyPartition> {
    Ok(refine_history(model, rho)?.pop().expect("time 0 always present"))
}

/// Consistency projection of a realization: facets are the knowledge classes.
pub fn project_pi_tilde(model: &Model, rho: &Realization) -> Result<ChromaticComplex> {
    let partition = refine(model, rho)?;
    let facets = partition.classes().into_iter().map(|class| {
        Simplex::new(
            class
                .into_iter()
                .map(|p| Vertex::new(p as u32 + 1, rho.string(p).to_value())),
        )
        .expect("distinct parties")
    });
    ChromaticComplex::from_simplices(rho.n(), facets)
}
