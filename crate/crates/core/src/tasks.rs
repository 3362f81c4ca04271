//! Symmetric output complexes and per-realization solvability.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::complexes::{ChromaticComplex, Simplex, Value, Vertex};
use crate::knowledge::{evolve_structural, refine, Knowledge, Model};
use crate::randomness::Realization;
use crate::{Error, Result};

/// Output complex of an input-free symmetry-breaking task. Each facet is
/// stored as the value of party `1..=n` in order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct OutputComplex {
    n: usize,
    facets: BTreeSet<Vec<Value>>,
}

fn multinomial(n: usize, parts: impl Iterator<Item = usize>) -> u128 {
    let mut result: u128 = 1;
    let mut placed = 0usize;
    for part in parts {
        for i in 1..=part {
            placed += 1;
            result = result * placed as u128 / i as u128;
        }
    }
    debug_assert_eq!(placed, n);
    result
}

impl OutputComplex {
    /// Validates purity (every facet names all parties) and symmetry under
    /// permuting values across names.
    pub fn new(n: usize, facets: impl IntoIterator<Item = Vec<Value>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidTask("no parties".into()));
        }
        let facets: BTreeSet<Vec<Value>> = facets.into_iter().collect();
        if facets.is_empty() {
            return Err(Error::InvalidTask("no facets".into()));
        }
        if let Some(f) = facets.iter().find(|f| f.len() != n) {
            return Err(Error::InvalidTask(format!(
                "facet with {} values in a complex on {n} names is not pure",
                f.len()
            )));
        }
        // closed under permutations iff each value multiset appears in all
        // of its distinct arrangements
        let mut arrangements: BTreeMap<Vec<&Value>, u128> = BTreeMap::new();
        for f in &facets {
            let mut key: Vec<&Value> = f.iter().collect();
            key.sort();
            *arrangements.entry(key).or_default() += 1;
        }
        for (key, count) in arrangements {
            let mut runs: BTreeMap<&Value, usize> = BTreeMap::new();
            for v in &key {
                *runs.entry(*v).or_default() += 1;
            }
            if multinomial(n, runs.values().copied()) != count {
                return Err(Error::InvalidTask(format!(
                    "not symmetric: value multiset {key:?} appears in {count} arrangements"
                )));
            }
        }
        Ok(OutputComplex { n, facets })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn facets(&self) -> impl ExactSizeIterator<Item = &Vec<Value>> {
        self.facets.iter()
    }

    pub fn contains_facet(&self, values: &[Value]) -> bool {
        self.facets.contains(values)
    }

    pub fn alphabet(&self) -> BTreeSet<Value> {
        self.facets.iter().flatten().cloned().collect()
    }

    pub fn facet_simplex(values: &[Value]) -> Simplex {
        Simplex::new(
            values
                .iter()
                .enumerate()
                .map(|(i, v)| Vertex::new(i as u32 + 1, v.clone())),
        )
        .expect("one vertex per name")
    }

    pub fn to_chromatic(&self) -> ChromaticComplex {
        ChromaticComplex::from_simplices(self.n, self.facets.iter().map(|f| Self::facet_simplex(f)))
            .expect("names in range")
    }

    /// Closure under every permutation of names, checked by brute force.
    pub fn is_symmetric_by_permutation(&self) -> bool {
        let mut perm: Vec<usize> = (0..self.n).collect();
        loop {
            for f in &self.facets {
                let permuted: Vec<Value> = perm.iter().map(|&i| f[i].clone()).collect();
                if !self.facets.contains(&permuted) {
                    return false;
                }
            }
            if !next_permutation(&mut perm) {
                return true;
            }
        }
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("exists");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Exactly one party outputs 1, the rest output 0.
pub fn make_leader_election(n: usize) -> Result<OutputComplex> {
    make_m_leader_election(n, 1)
}

/// Exactly `m` parties output 1, the rest output 0.
pub fn make_m_leader_election(n: usize, m: usize) -> Result<OutputComplex> {
    if n == 0 || m == 0 || m > n {
        return Err(Error::InvalidArity { n, m });
    }
    let mut facets = Vec::new();
    let mut chosen: Vec<usize> = (0..m).collect();
    loop {
        let mut f = vec![Value::from_u64(0); n];
        for &c in &chosen {
            f[c] = Value::from_u64(1);
        }
        facets.push(f);
        // next m-combination of 0..n
        let Some(pos) = (0..m).rev().find(|&i| chosen[i] < n - m + i) else {
            break;
        };
        chosen[pos] += 1;
        for i in pos + 1..m {
            chosen[i] = chosen[i - 1] + 1;
        }
    }
    OutputComplex::new(n, facets)
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Witness {
    /// The facet reached, value per party.
    pub facet: Vec<Value>,
    /// Value assigned to each consistency class (in class-rank order).
    pub class_values: Vec<Value>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TaskVerdict {
    pub solvable: bool,
    pub witness: Option<Witness>,
}

/// Solvability of a realization: some facet is constant on every
/// consistency class. The first such facet (in facet order) is the witness.
pub fn solves_realization(model: &Model, rho: &Realization, task: &OutputComplex) -> Result<TaskVerdict> {
    check_arity(rho, task)?;
    let partition = refine(model, rho)?;
    let classes = partition.classes();
    for facet in task.facets() {
        let homogeneous = classes
            .iter()
            .all(|c| c.iter().all(|&p| facet[p] == facet[c[0]]));
        if homogeneous {
            return Ok(TaskVerdict {
                solvable: true,
                witness: Some(Witness {
                    facet: facet.clone(),
                    class_values: classes.iter().map(|c| facet[c[0]].clone()).collect(),
                }),
            });
        }
    }
    Ok(TaskVerdict {
        solvable: false,
        witness: None,
    })
}

/// Solvability of the global state reached under `rho`: search for a
/// function from knowledge to output values whose image is a facet.
pub fn solves_global_state(
    model: &Model,
    rho: &Realization,
    task: &OutputComplex,
    cap: usize,
) -> Result<bool> {
    check_arity(rho, task)?;
    let knowledge = evolve_structural(model, rho, cap)?;
    let distinct: Vec<&Arc<Knowledge>> = {
        let mut d: Vec<&Arc<Knowledge>> = knowledge.iter().collect();
        d.sort();
        d.dedup();
        d
    };
    let index: Vec<usize> = knowledge
        .iter()
        .map(|k| distinct.binary_search(&k).expect("present"))
        .collect();
    let alphabet: Vec<Value> = task.alphabet().into_iter().collect();
    let mut choice = vec![0usize; distinct.len()];
    loop {
        let candidate: Vec<Value> = index.iter().map(|&d| alphabet[choice[d]].clone()).collect();
        if task.contains_facet(&candidate) {
            return Ok(true);
        }
        // odometer over alphabet^distinct
        let mut pos = 0;
        loop {
            if pos == choice.len() {
                return Ok(false);
            }
            choice[pos] += 1;
            if choice[pos] < alphabet.len() {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

fn check_arity(rho: &Realization, task: &OutputComplex) -> Result<()> {
    if rho.n() != task.n() {
        return Err(Error::InvalidTask(format!(
            "task is on {} parties, realization on {}",
            task.n(),
            rho.n()
        )));
    }
    Ok(())
}
