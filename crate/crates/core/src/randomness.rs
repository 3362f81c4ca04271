//! Randomness configurations, realizations and their probabilities.
//!
//! Bit strings are indexed by round: position `r` holds the bit of round
//! `r + 1`, so the state after `t` rounds is the length-`t` prefix.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::complexes::{Simplex, Value, Vertex};
use crate::{Error, Rational, Result};

/// Default cap on `k * t` for exhaustive enumeration (2^24 realizations).
pub const DEFAULT_ENUMERATION_CAP: u32 = 24;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn new(bits: Vec<bool>) -> Self {
        BitString(bits)
    }

    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidRealization(format!("bad bit {other:?} in {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitString)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    /// Bit of round `round` (1-based).
    pub fn round(&self, round: usize) -> bool {
        self.0[round - 1]
    }

    pub fn prefix(&self, t: usize) -> BitString {
        BitString(self.0[..t].to_vec())
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }

    pub fn to_value(&self) -> Value {
        Value::new(self.to_string().into_bytes())
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

/// Which source each party is wired to. Sources are `0..k` internally and
/// every source has at least one party.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct RandomnessConfiguration {
    source_of: Vec<usize>,
    k: usize,
}

impl RandomnessConfiguration {
    /// From 1-based source ids per party, e.g. `[1, 2, 2]`.
    pub fn from_source_ids(ids: &[usize]) -> Result<Self> {
        if ids.is_empty() {
            return Err(Error::InvalidConfiguration("no parties".into()));
        }
        if ids.contains(&0) {
            return Err(Error::InvalidConfiguration("source ids start at 1".into()));
        }
        let k = *ids.iter().max().expect("nonempty");
        let mut used = vec![false; k];
        for &s in ids {
            used[s - 1] = true;
        }
        if let Some(gap) = used.iter().position(|u| !u) {
            return Err(Error::InvalidConfiguration(format!(
                "source ids must be exactly 1..={k}; {} is unused",
                gap + 1
            )));
        }
        Ok(RandomnessConfiguration {
            source_of: ids.iter().map(|s| s - 1).collect(),
            k,
        })
    }

    /// Canonical configuration with `counts[i]` consecutive parties on source `i + 1`.
    pub fn from_counts(counts: &[usize]) -> Result<Self> {
        if counts.is_empty() || counts.contains(&0) {
            return Err(Error::InvalidConfiguration("every source needs at least one party".into()));
        }
        let ids: Vec<usize> = counts
            .iter()
            .enumerate()
            .flat_map(|(i, &c)| core::iter::repeat_n(i + 1, c))
            .collect();
        Self::from_source_ids(&ids)
    }

    pub fn n(&self) -> usize {
        self.source_of.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// 0-based source of 0-based `party`.
    pub fn source_of(&self, party: usize) -> usize {
        self.source_of[party]
    }

    /// 1-based source ids per party.
    pub fn source_ids(&self) -> Vec<usize> {
        self.source_of.iter().map(|s| s + 1).collect()
    }

    /// `(n_1, ..., n_k)`: parties per source.
    pub fn source_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.k];
        for &s in &self.source_of {
            counts[s] += 1;
        }
        counts
    }

    pub fn gcd(&self) -> usize {
        self.source_counts()
            .into_iter()
            .fold(0, num_integer::gcd)
    }

    pub fn min_count(&self) -> usize {
        self.source_counts().into_iter().min().expect("k >= 1")
    }

    /// Facet `{(i, source_i)}` of the assignment complex.
    pub fn to_simplex(&self) -> Simplex {
        Simplex::new(
            self.source_of
                .iter()
                .enumerate()
                .map(|(p, &s)| Vertex::new(p as u32 + 1, Value::from_u64(s as u64 + 1))),
        )
        .expect("one vertex per party")
    }
}

impl fmt::Display for RandomnessConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, s) in self.source_of.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", s + 1)?;
        }
        f.write_str(")")
    }
}

/// Multiset of parties per source.
pub fn source_counts(alpha: &RandomnessConfiguration) -> Vec<usize> {
    alpha.source_counts()
}

/// Per-party bit strings of a common length `t`: a facet of the realization complex.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Realization {
    t: usize,
    strings: Vec<BitString>,
}

impl Realization {
    pub fn new(strings: Vec<BitString>) -> Result<Self> {
        let t = strings.first().map(BitString::len).ok_or_else(|| {
            Error::InvalidRealization("a realization needs at least one party".into())
        })?;
        if strings.iter().any(|s| s.len() != t) {
            return Err(Error::InvalidRealization("strings differ in length".into()));
        }
        Ok(Realization { t, strings })
    }

    /// Convenience constructor from `"01"`-style strings.
    pub fn parse(strings: &[&str]) -> Result<Self> {
        Self::new(strings.iter().map(|s| BitString::parse(s)).collect::<Result<_>>()?)
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn n(&self) -> usize {
        self.strings.len()
    }

    pub fn strings(&self) -> &[BitString] {
        &self.strings
    }

    pub fn string(&self, party: usize) -> &BitString {
        &self.strings[party]
    }

    pub fn prefix(&self, t: usize) -> Realization {
        Realization {
            t,
            strings: self.strings.iter().map(|s| s.prefix(t)).collect(),
        }
    }

    /// `self` strictly precedes `later` and is its prefix.
    pub fn is_succeeded_by(&self, later: &Realization) -> bool {
        later.t > self.t && later.n() == self.n() && later.prefix(self.t) == *self
    }

    pub fn to_simplex(&self) -> Simplex {
        Simplex::new(
            self.strings
                .iter()
                .enumerate()
                .map(|(p, s)| Vertex::new(p as u32 + 1, s.to_value())),
        )
        .expect("one vertex per party")
    }

    /// No two parties on a common source disagree.
    pub fn is_consistent_with(&self, alpha: &RandomnessConfiguration) -> bool {
        if alpha.n() != self.n() {
            return false;
        }
        let mut seen: Vec<Option<&BitString>> = vec![None; alpha.k()];
        for (p, s) in self.strings.iter().enumerate() {
            match seen[alpha.source_of(p)] {
                Some(prev) if prev != s => return false,
                Some(_) => {}
                None => seen[alpha.source_of(p)] = Some(s),
            }
        }
        true
    }
}

/// One bit string per source.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SourceDraw {
    t: usize,
    source_strings: Vec<BitString>,
}

impl SourceDraw {
    pub fn new(source_strings: Vec<BitString>) -> Result<Self> {
        let t = source_strings.first().map_or(0, BitString::len);
        if source_strings.iter().any(|s| s.len() != t) {
            return Err(Error::InvalidRealization("source strings differ in length".into()));
        }
        Ok(SourceDraw { t, source_strings })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn source_strings(&self) -> &[BitString] {
        &self.source_strings
    }
}

/// Each party receives its source's string.
pub fn realize(alpha: &RandomnessConfiguration, draw: &SourceDraw) -> Result<Realization> {
    if draw.source_strings.len() != alpha.k() {
        return Err(Error::InvalidRealization(format!(
            "draw has {} strings for {} sources",
            draw.source_strings.len(),
            alpha.k()
        )));
    }
    Ok(Realization {
        t: draw.t,
        strings: (0..alpha.n())
            .map(|p| draw.source_strings[alpha.source_of(p)].clone())
            .collect(),
    })
}

/// `2^-exp` as an exact rational.
pub fn pow2_inv(exp: usize) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << exp)
}

/// `Pr[rho | alpha]`: zero when inconsistent, otherwise `2^(-t k)`.
pub fn probability(rho: &Realization, alpha: &RandomnessConfiguration) -> Rational {
    if rho.is_consistent_with(alpha) {
        pow2_inv(rho.t * alpha.k())
    } else {
        Rational::zero()
    }
}

fn check_cap(alpha: &RandomnessConfiguration, t: usize, cap: u32) -> Result<usize> {
    let bits = (alpha.k() as u64).saturating_mul(t as u64);
    if bits > cap as u64 || bits >= 64 {
        return Err(Error::CapExceeded {
            what: "k*t for enumeration",
            requested: bits,
            cap: cap as u64,
        });
    }
    Ok(bits as usize)
}

/// All `2^(k t)` consistent realizations, source strings counted
/// lexicographically (source 1 most significant).
pub fn enumerate_consistent(
    alpha: &RandomnessConfiguration,
    t: usize,
    cap: u32,
) -> Result<ConsistentRealizations<'_>> {
    let bits = check_cap(alpha, t, cap)?;
    Ok(ConsistentRealizations {
        alpha,
        t,
        next: 0,
        end: 1u64 << bits,
    })
}

pub struct ConsistentRealizations<'a> {
    alpha: &'a RandomnessConfiguration,
    t: usize,
    next: u64,
    end: u64,
}

impl ConsistentRealizations<'_> {
    pub fn draw_at(&self, index: u64) -> SourceDraw {
        let k = self.alpha.k();
        let t = self.t;
        let total = k * t;
        let strings = (0..k)
            .map(|s| {
                BitString(
                    (0..t)
                        .map(|r| (index >> (total - 1 - (s * t + r))) & 1 == 1)
                        .collect(),
                )
            })
            .collect();
        SourceDraw {
            t,
            source_strings: strings,
        }
    }
}

impl Iterator for ConsistentRealizations<'_> {
    type Item = Realization;

    fn next(&mut self) -> Option<Realization> {
        if self.next >= self.end {
            return None;
        }
        let draw = self.draw_at(self.next);
        self.next += 1;
        Some(realize(self.alpha, &draw).expect("draw sized for alpha"))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.end - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for ConsistentRealizations<'_> {}

/// Seed derivation.
///
/// Every random choice descends from one master seed:
/// `derive_seed(master, TAG_TRIAL, i)` seeds trial `i`,
/// `derive_seed(run, TAG_SOURCE, c)` seeds the bit stream of source `c`,
/// `derive_seed(master, TAG_PORTS, j)` seeds the `j`-th random port assignment.
pub mod seeds {
    pub const TAG_TRIAL: u64 = 0x7472_6961_6c00_0001;
    pub const TAG_SOURCE: u64 = 0x736f_7572_6365_0002;
    pub const TAG_PORTS: u64 = 0x706f_7274_7300_0003;

    pub fn splitmix64(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    pub fn derive_seed(parent: u64, tag: u64, index: u64) -> u64 {
        splitmix64(parent ^ splitmix64(tag.wrapping_add(splitmix64(index))))
    }
}

/// Lazily generated infinite uniform bit stream of one source.
#[derive(Clone, Debug)]
pub struct SourceStream {
    rng: ChaCha8Rng,
    words: Vec<u64>,
}

impl SourceStream {
    pub fn new(seed: u64) -> Self {
        SourceStream {
            rng: ChaCha8Rng::seed_from_u64(seed),
            words: Vec::new(),
        }
    }

    /// Stream of source `source` (0-based) under run seed `seed`.
    pub fn for_source(seed: u64, source: usize) -> Self {
        Self::new(seeds::derive_seed(seed, seeds::TAG_SOURCE, source as u64))
    }

    /// Bit at 0-based position `index` (the bit of round `index + 1`).
    pub fn bit(&mut self, index: usize) -> bool {
        while self.words.len() <= index / 64 {
            let w = self.rng.next_u64();
            self.words.push(w);
        }
        (self.words[index / 64] >> (index % 64)) & 1 == 1
    }

    pub fn prefix(&mut self, t: usize) -> BitString {
        BitString((0..t).map(|i| self.bit(i)).collect())
    }
}

/// Deterministic uniform draw of `t` rounds for every source of `alpha`.
///
/// Uses the same per-source streams as the protocol simulations, so
/// `realize(alpha, sample_draw(alpha, t, s))` is the first `t` rounds of a
/// run seeded with `s`.
pub fn sample_draw(alpha: &RandomnessConfiguration, t: usize, seed: u64) -> SourceDraw {
    SourceDraw {
        t,
        source_strings: (0..alpha.k())
            .map(|c| SourceStream::for_source(seed, c).prefix(t))
            .collect(),
    }
}

/// Per-party strings in compact text form, e.g. `("0","1","1")`.
pub fn describe(rho: &Realization) -> String {
    let parts: Vec<String> = rho.strings.iter().map(|s| format!("\"{s}\"")).collect();
    format!("({})", parts.join(","))
}
