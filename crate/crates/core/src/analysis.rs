//! Exact solvability probabilities and eventual-solvability classifiers.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::One;

use crate::knowledge::{adversarial_ports, refine, Model};
use crate::randomness::{enumerate_consistent, pow2_inv, RandomnessConfiguration, Realization};
use crate::tasks::{solves_realization, OutputComplex};
use crate::{Rational, Result};

/// `Pr[S(t) | alpha]` together with the counts it is made of.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CurveRow {
    pub t: usize,
    pub probability: Rational,
    pub solving: u64,
    pub total: u64,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SolvabilityCurve {
    pub alpha: RandomnessConfiguration,
    pub model: String,
    pub rows: Vec<CurveRow>,
}

impl SolvabilityCurve {
    pub fn is_nondecreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[0].probability <= w[1].probability)
    }
}

/// Exact probability that the state after `t` rounds solves `task`.
pub fn exact_probability(
    model: &Model,
    alpha: &RandomnessConfiguration,
    task: &OutputComplex,
    t: usize,
    cap: u32,
) -> Result<CurveRow> {
    let mut solving = 0u64;
    let mut total = 0u64;
    for rho in enumerate_consistent(alpha, t, cap)? {
        total += 1;
        if solves_realization(model, &rho, task)?.solvable {
            solving += 1;
        }
    }
    // all consistent realizations are equiprobable at 2^(-t k)
    let probability = Rational::from_integer(BigInt::from(solving)) * pow2_inv(t * alpha.k());
    Ok(CurveRow {
        t,
        probability,
        solving,
        total,
    })
}

pub fn solvability_curve(
    model: &Model,
    alpha: &RandomnessConfiguration,
    task: &OutputComplex,
    ts: impl IntoIterator<Item = usize>,
    cap: u32,
) -> Result<SolvabilityCurve> {
    let ts: Vec<usize> = ts.into_iter().collect();
    // fail before any work when the last round is over the cap
    if let Some(&t) = ts.iter().max() {
        enumerate_consistent(alpha, t, cap)?;
    }
    let rows = ts
        .into_iter()
        .map(|t| exact_probability(model, alpha, task, t, cap))
        .collect::<Result<Vec<_>>>()?;
    let model = match model {
        Model::Blackboard => "blackboard".into(),
        Model::MessagePassing(_) => "message-passing".into(),
    };
    Ok(SolvabilityCurve {
        alpha: alpha.clone(),
        model,
        rows,
    })
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Solvability {
    Solvable,
    Unsolvable,
    /// Fixed, non-adversarial ports with a source-count gcd above one.
    Unknown,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct EventualVerdict {
    pub solvability: Solvability,
    /// Which criterion decided, e.g. `n_1=1` or `gcd=2`.
    pub criterion: String,
}

impl EventualVerdict {
    pub fn solvable(&self) -> bool {
        self.solvability == Solvability::Solvable
    }
}

impl core::fmt::Display for EventualVerdict {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let word = match self.solvability {
            Solvability::Solvable => "solvable",
            Solvability::Unsolvable => "unsolvable",
            Solvability::Unknown => "unknown",
        };
        write!(f, "{word} ({})", self.criterion)
    }
}

/// Blackboard: leader election is eventually solvable iff some source
/// feeds exactly one party.
pub fn decide_blackboard(alpha: &RandomnessConfiguration) -> EventualVerdict {
    let counts = alpha.source_counts();
    match counts.iter().position(|&c| c == 1) {
        Some(i) => EventualVerdict {
            solvability: Solvability::Solvable,
            criterion: format!("n_{}=1", i + 1),
        },
        None => EventualVerdict {
            solvability: Solvability::Unsolvable,
            criterion: format!("min n_i={}", alpha.min_count()),
        },
    }
}

/// Message passing under adversarial ports: solvable iff the source
/// counts are coprime.
pub fn decide_message_passing_worst_case(alpha: &RandomnessConfiguration) -> EventualVerdict {
    let g = alpha.gcd();
    EventualVerdict {
        solvability: if g == 1 {
            Solvability::Solvable
        } else {
            Solvability::Unsolvable
        },
        criterion: format!("gcd={g}"),
    }
}

/// Message passing with one fixed port assignment. Coprime counts suffice
/// for any ports; otherwise the answer depends on the ports.
pub fn decide_message_passing_fixed_ports(alpha: &RandomnessConfiguration) -> EventualVerdict {
    let verdict = decide_message_passing_worst_case(alpha);
    if verdict.solvable() {
        verdict
    } else {
        EventualVerdict {
            solvability: Solvability::Unknown,
            criterion: "fixed ports, g>1".into(),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LowerBounds {
    /// `((2^t - 1) / 2^t)^(k-1)`
    pub product: Rational,
    /// `1 - (k-1) / 2^t`
    pub linear: Rational,
}

/// Bounds on the blackboard election probability when a source feeds a
/// single party: the share of draws where that party's string is unique.
pub fn blackboard_lower_bound(k: usize, t: usize) -> LowerBounds {
    let two_t = BigInt::one() << t;
    let base = Rational::new(&two_t - BigInt::one(), two_t.clone());
    let mut product = Rational::one();
    for _ in 1..k {
        product *= &base;
    }
    let linear = Rational::one() - Rational::new(BigInt::from(k as u64 - 1), two_t);
    LowerBounds { product, linear }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SuccessionReport {
    pub t: usize,
    pub solving_checked: u64,
    pub extensions_checked: u64,
    /// `(rho, extension)` pairs where `rho` solves and the extension does not.
    pub violations: Vec<(Realization, Realization)>,
}

impl SuccessionReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that every solving realization at time `t` stays solving under
/// each of its `2^k` consistent one-round extensions.
pub fn succession_check(
    model: &Model,
    alpha: &RandomnessConfiguration,
    task: &OutputComplex,
    t: usize,
    cap: u32,
) -> Result<SuccessionReport> {
    let mut report = SuccessionReport {
        t,
        solving_checked: 0,
        extensions_checked: 0,
        violations: Vec::new(),
    };
    // realizations at t + 1 grouped by their prefix
    let mut extensions: BTreeMap<Realization, Vec<Realization>> = BTreeMap::new();
    for next in enumerate_consistent(alpha, t + 1, cap)? {
        extensions.entry(next.prefix(t)).or_default().push(next);
    }
    for (rho, nexts) in extensions {
        if !solves_realization(model, &rho, task)?.solvable {
            continue;
        }
        report.solving_checked += 1;
        for next in nexts {
            report.extensions_checked += 1;
            if !solves_realization(model, &next, task)?.solvable {
                report.violations.push((rho.clone(), next));
            }
        }
    }
    Ok(report)
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DivisibilityAudit {
    pub g: usize,
    /// Per time `t`, class size -> number of classes of that size.
    pub histograms: Vec<(usize, BTreeMap<usize, u64>)>,
    pub violations: u64,
}

impl DivisibilityAudit {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// With adversarial ports, every consistency class size at times `1..=t`
/// must be a multiple of `g = gcd(n_1, ..., n_k)`.
pub fn divisibility_audit(alpha: &RandomnessConfiguration, t: usize, cap: u32) -> Result<DivisibilityAudit> {
    let adv = adversarial_ports(alpha)?;
    let model = Model::MessagePassing(adv.original());
    let mut audit = DivisibilityAudit {
        g: adv.g,
        histograms: Vec::new(),
        violations: 0,
    };
    for time in 1..=t {
        let mut hist = BTreeMap::new();
        for rho in enumerate_consistent(alpha, time, cap)? {
            for class in refine(&model, &rho)?.classes() {
                *hist.entry(class.len()).or_insert(0u64) += 1;
                if class.len() % adv.g != 0 {
                    audit.violations += 1;
                }
            }
        }
        audit.histograms.push((time, hist));
    }
    Ok(audit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tasks::make_leader_election;
    use alloc::string::ToString;
    use num_traits::Zero;

    fn alpha(ids: &[usize]) -> RandomnessConfiguration {
        RandomnessConfiguration::from_source_ids(ids).unwrap()
    }

    fn q(a: i64, b: i64) -> Rational {
        Rational::new(a.into(), b.into())
    }

    #[test]
    fn probability_examples() {
        let le2 = make_leader_election(2).unwrap();
        let le3 = make_leader_election(3).unwrap();
        let bb = Model::Blackboard;
        assert_eq!(exact_probability(&bb, &alpha(&[1, 2]), &le2, 2, 24).unwrap().probability, q(3, 4));
        assert_eq!(exact_probability(&bb, &alpha(&[1, 2, 2]), &le3, 1, 24).unwrap().probability, q(1, 2));
        for t in 0..5 {
            assert!(exact_probability(&bb, &alpha(&[1, 1]), &le2, t, 24).unwrap().probability.is_zero());
        }
    }

    #[test]
    fn classifier_examples() {
        assert!(decide_blackboard(&RandomnessConfiguration::from_counts(&[1, 2]).unwrap()).solvable());
        let v = decide_blackboard(&RandomnessConfiguration::from_counts(&[2, 2]).unwrap());
        assert_eq!(v.solvability, Solvability::Unsolvable);
        assert!(decide_blackboard(&alpha(&[1])).solvable());

        let mp = |c: &[usize]| decide_message_passing_worst_case(&RandomnessConfiguration::from_counts(c).unwrap());
        assert!(mp(&[2, 3]).solvable());
        assert_eq!(mp(&[2, 2]).to_string(), "unsolvable (gcd=2)");
        assert_eq!(mp(&[2, 4, 6]).to_string(), "unsolvable (gcd=2)");
        let fixed = decide_message_passing_fixed_ports(&RandomnessConfiguration::from_counts(&[2, 2]).unwrap());
        assert_eq!(fixed.to_string(), "unknown (fixed ports, g>1)");
        assert_eq!(
            decide_blackboard(&RandomnessConfiguration::from_counts(&[1, 2, 2]).unwrap()).to_string(),
            "solvable (n_1=1)"
        );
    }

    #[test]
    fn lower_bound_examples() {
        assert_eq!(blackboard_lower_bound(2, 3).product, q(7, 8));
        for t in 1..6 {
            assert_eq!(blackboard_lower_bound(1, t).product, q(1, 1));
            assert_eq!(blackboard_lower_bound(1, t).linear, q(1, 1));
        }
        let b = blackboard_lower_bound(3, 1);
        assert_eq!((b.product, b.linear), (q(1, 4), q(0, 1)));
    }

    #[test]
    fn succession_examples() {
        let le2 = make_leader_election(2).unwrap();
        for t in 0..=3 {
            assert!(succession_check(&Model::Blackboard, &alpha(&[1, 2]), &le2, t, 24).unwrap().passed());
        }
        let le3 = make_leader_election(3).unwrap();
        let mp = Model::MessagePassing(crate::knowledge::PortAssignment::random(3, 11));
        for t in 0..=2 {
            assert!(succession_check(&mp, &alpha(&[1, 2, 2]), &le3, t, 24).unwrap().passed());
        }
    }

    #[test]
    fn divisibility_examples() {
        let a = divisibility_audit(&RandomnessConfiguration::from_counts(&[2, 2]).unwrap(), 2, 24).unwrap();
        assert!(a.passed());
        assert!(a.histograms.iter().all(|(_, h)| h.keys().all(|s| [2, 4].contains(s))));
        let b = divisibility_audit(&RandomnessConfiguration::from_counts(&[3, 3]).unwrap(), 2, 24).unwrap();
        assert!(b.passed());
        assert!(b.histograms.iter().all(|(_, h)| h.keys().all(|s| [3, 6].contains(s))));
        let c = divisibility_audit(&RandomnessConfiguration::from_counts(&[2, 3]).unwrap(), 2, 24).unwrap();
        assert_eq!(c.g, 1);
        assert!(c.passed());
    }
}
