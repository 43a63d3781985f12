use std::collections::BTreeMap;

use num::One;
use serde::{Deserialize, Serialize};

use super::{
    divergence_witness, growth_magnitude, sup_constant, CheckError, Condition, ConditionRecord,
    DoublingVerdict, Horizon, Outcome,
};
use crate::cantor::{CantorConfig, TailRegime};
use crate::measure::{MatchingSequence, MeasureSpec};
use crate::rational::{symmetric_ratio, Rational};
use crate::uniformity::{min_uniform_constant, UniformityReport};

/// The simplified criteria.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Corollary {
    /// Bounded branching: neighbouring entries plus the product condition.
    BoundedBranching,
    /// Bounded depths `m_k`: the uniformity conditions without the product
    /// condition.
    BoundedDepth,
    /// Ultimately uniform vectors are always doubling.
    UltimatelyUniform,
}

impl Corollary {
    pub fn from_index(i: u8) -> Option<Self> {
        match i {
            1 => Some(Corollary::BoundedBranching),
            2 => Some(Corollary::BoundedDepth),
            3 => Some(Corollary::UltimatelyUniform),
            _ => None,
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Corollary::BoundedBranching => 1,
            Corollary::BoundedDepth => 2,
            Corollary::UltimatelyUniform => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Corollary::BoundedBranching => "bounded-branching criterion",
            Corollary::BoundedDepth => "bounded-depth criterion",
            Corollary::UltimatelyUniform => "ultimately-uniform criterion",
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct ConditionSet {
    adjacent: bool,
    pairs: bool,
    products: bool,
}

const FULL: ConditionSet = ConditionSet {
    adjacent: false,
    pairs: true,
    products: true,
};

struct Kernel<'a> {
    config: &'a CantorConfig,
    seq: &'a MatchingSequence,
    set: ConditionSet,
    memo: BTreeMap<(Vec<Rational>, usize), UniformityReport>,
}

impl<'a> Kernel<'a> {
    fn new(config: &'a CantorConfig, seq: &'a MatchingSequence, set: ConditionSet) -> Self {
        Kernel {
            config,
            seq,
            set,
            memo: BTreeMap::new(),
        }
    }

    fn uniformity(&mut self, p: Vec<Rational>, s: usize) -> UniformityReport {
        self.memo
            .entry((p, s))
            .or_insert_with_key(|(p, s)| min_uniform_constant(p, *s))
            .clone()
    }

    fn vector_record(&mut self, k: usize) -> ConditionRecord {
        let p = self.seq.vector(self.config, k);
        if self.set.adjacent {
            let mut best = (Rational::one(), None);
            for (i, pair) in p.entries().windows(2).enumerate() {
                let r = symmetric_ratio(&pair[0], &pair[1]);
                if best.1.is_none() || r > best.0 {
                    best = (r, Some((i, i + 1, 1)));
                }
            }
            return record(k, Condition::AdjacentRatio, best.0, best.1);
        }
        let report = self.uniformity(p.entries().to_vec(), 1);
        record(k, Condition::VectorUniform, report.min_c, report.windows)
    }

    fn gap_records(&mut self, k: usize) -> Vec<ConditionRecord> {
        let Some(gap) = self.config.gap_context(k) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        let mut firsts = Rational::one();
        let mut lasts = Rational::one();
        for t in 1..gap.m {
            let p = self.seq.vector(self.config, k + t);
            if self.set.pairs {
                let report = self.uniformity(p.doubled(), 1);
                out.push(record(
                    k,
                    Condition::PairUniform { t },
                    report.min_c,
                    report.windows,
                ));
            }
            if self.set.products {
                firsts *= p.first();
                lasts *= p.last();
                out.push(record(
                    k,
                    Condition::ProductRatio { t },
                    symmetric_ratio(&firsts, &lasts),
                    None,
                ));
            }
        }
        if self.set.pairs {
            let p = self.seq.vector(self.config, k + gap.m);
            let report = self.uniformity(p.doubled(), gap.s);
            out.push(record(
                k,
                Condition::PairSUniform { s: gap.s },
                report.min_c,
                report.windows,
            ));
        }
        out
    }

    fn records(&mut self, upto: usize) -> Vec<ConditionRecord> {
        let mut out = Vec::new();
        for k in 1..=upto {
            out.push(self.vector_record(k));
            out.extend(self.gap_records(k));
        }
        out
    }
}

fn record(
    level: usize,
    condition: Condition,
    constant: Rational,
    windows: Option<(usize, usize, usize)>,
) -> ConditionRecord {
    ConditionRecord {
        level,
        condition,
        constant,
        windows,
        word: None,
        gap_index: None,
    }
}

/// Levels from which `(Λ, m_k, s_k, P_k)` repeat, when the gap ratios are
/// eventually periodic. Checking up to this level plus one joint period
/// decides every level.
pub fn finite_verification_horizon(config: &CantorConfig, seq: &MatchingSequence) -> Option<usize> {
    match config.tail_regime() {
        TailRegime::Periodic { start, .. } => Some(start.max(seq.tail_start())),
        TailRegime::Decaying { .. } => None,
    }
}

fn verdict(
    outcome: Outcome,
    checked_up_to: usize,
    records: Vec<ConditionRecord>,
) -> DoublingVerdict {
    DoublingVerdict {
        sup_constant: sup_constant(&records),
        outcome,
        checked_up_to,
        records,
        warnings: Vec::new(),
    }
}

fn evaluate(
    config: &CantorConfig,
    seq: &MatchingSequence,
    set: ConditionSet,
    horizon: Horizon,
) -> DoublingVerdict {
    let mut kernel = Kernel::new(config, seq, set);
    let spec = MeasureSpec::matching(seq.clone());
    let (rho, period) = spec.eventual_chain_factor(config);
    let diverges = set.products && config.depth_unbounded() && !rho.is_one();
    let not_doubling = |records: &[ConditionRecord]| Outcome::NotDoubling {
        witness: divergence_witness(records),
        growth_per_period: growth_magnitude(&rho),
        period,
    };

    match horizon {
        Horizon::Levels(k) => {
            let records = kernel.records(k);
            let outcome = if diverges {
                not_doubling(&records)
            } else {
                Outcome::Unknown { checked_up_to: k }
            };
            verdict(outcome, k, records)
        }
        Horizon::Symbolic => {
            let regime = config.tail_regime();
            let last = match regime {
                TailRegime::Periodic { start, period } => {
                    let joint = crate::sequence::lcm_all([period, seq.period()]);
                    start.max(seq.tail_start()) + joint - 1
                }
                TailRegime::Decaying { start, .. } => {
                    let tail = start.max(seq.joint_start(config));
                    if diverges {
                        tail + 4 * period + 4
                    } else {
                        // Past the first level whose chains span a whole
                        // period, every window phase and length recurs, so
                        // the records attain the supremum.
                        let mut k = tail;
                        while config.gap_context(k).is_none_or(|g| g.m <= period) {
                            k += 1;
                        }
                        k + period - 1
                    }
                }
            };
            let records = kernel.records(last);
            let outcome = if diverges {
                not_doubling(&records)
            } else {
                Outcome::Doubling {
                    constant: sup_constant(&records),
                }
            };
            verdict(outcome, last, records)
        }
    }
}

/// Decides the doubling property of `μ_P` through the per-level conditions.
pub fn check_theorem1(
    config: &CantorConfig,
    seq: &MatchingSequence,
    horizon: Horizon,
) -> Result<DoublingVerdict, CheckError> {
    seq.validate(config)?;
    Ok(evaluate(config, seq, FULL, horizon))
}

/// Decides the doubling property through one of the simplified criteria,
/// after checking its hypothesis.
pub fn check_corollary(
    config: &CantorConfig,
    seq: &MatchingSequence,
    which: Corollary,
    horizon: Horizon,
) -> Result<DoublingVerdict, CheckError> {
    seq.validate(config)?;
    match which {
        Corollary::BoundedBranching => {
            // n is eventually periodic, hence bounded.
            let set = ConditionSet {
                adjacent: true,
                pairs: false,
                products: true,
            };
            Ok(evaluate(config, seq, set, horizon))
        }
        Corollary::BoundedDepth => {
            if config.depth_unbounded() {
                return Err(CheckError::Inapplicable {
                    criterion: which.name(),
                    reason: "c_k tends to 0, so m_k is unbounded".into(),
                });
            }
            let set = ConditionSet {
                adjacent: false,
                pairs: true,
                products: false,
            };
            Ok(evaluate(config, seq, set, horizon))
        }
        Corollary::UltimatelyUniform => {
            if seq.ultimately_one_uniform_index().is_none() {
                return Err(CheckError::Inapplicable {
                    criterion: which.name(),
                    reason: "the vectors are not eventually uniform".into(),
                });
            }
            let mut v = evaluate(config, seq, FULL, Horizon::Symbolic);
            debug_assert!(matches!(v.outcome, Outcome::Doubling { .. }));
            v.outcome = Outcome::Doubling {
                constant: v.sup_constant.clone(),
            };
            if let Horizon::Levels(k) = horizon {
                v.warnings.push(format!(
                    "level horizon {k} ignored: the criterion decides every level"
                ));
            }
            Ok(v)
        }
    }
}
