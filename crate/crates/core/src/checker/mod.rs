//! Verification of the characterisations of doubling measures: per-level
//! conditions for vector sequences, the word-indexed generalisation, and the
//! three simplified criteria.

mod theorem1;
mod theorem2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Word;
use crate::measure::MeasureError;
use crate::rational::{serde_str, Rational};

pub use theorem1::{check_corollary, check_theorem1, finite_verification_horizon, Corollary};
pub use theorem2::{check_theorem2, DEFAULT_BUDGET};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("{criterion} does not apply: {reason}")]
    Inapplicable {
        criterion: &'static str,
        reason: String,
    },
    #[error("checking to level {requested} needs {required} word checks, over the budget of {budget}; largest feasible level is {largest_feasible}")]
    BudgetExceeded {
        requested: usize,
        required: u64,
        budget: u64,
        largest_feasible: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Condition {
    /// The vector itself is `C`-uniform.
    VectorUniform,
    /// Neighbouring entries differ by at most a factor `C`.
    AdjacentRatio,
    /// The doubled (or paired) vector at depth `t` below a gap level is
    /// `C`-uniform.
    PairUniform { t: usize },
    /// Products of first and last entries over `t` levels below a gap level
    /// are comparable.
    ProductRatio { t: usize },
    /// The paired vector at depth `m_k` is `(C, s_k)`-uniform.
    PairSUniform { s: usize },
}

/// The minimal constant for one condition at one level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionRecord {
    pub level: usize,
    pub condition: Condition,
    #[serde(with = "serde_str")]
    pub constant: Rational,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub windows: Option<(usize, usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub word: Option<Word>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_index: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Outcome {
    Doubling {
        #[serde(with = "serde_str")]
        constant: Rational,
    },
    /// The product condition grows by `growth_per_period` every `period`
    /// levels along chains that get arbitrarily long. `witness` lists the
    /// per-level maxima at which the running maximum strictly increases.
    NotDoubling {
        witness: Vec<ConditionRecord>,
        #[serde(with = "serde_str")]
        growth_per_period: Rational,
        period: usize,
    },
    Unknown {
        checked_up_to: usize,
    },
}

impl Outcome {
    pub fn kind(&self) -> &'static str {
        match self {
            Outcome::Doubling { .. } => "doubling",
            Outcome::NotDoubling { .. } => "not_doubling",
            Outcome::Unknown { .. } => "unknown",
        }
    }

    pub fn same_kind(&self, other: &Outcome) -> bool {
        self.kind() == other.kind()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DoublingVerdict {
    pub outcome: Outcome,
    /// Largest constant over all records.
    #[serde(with = "serde_str")]
    pub sup_constant: Rational,
    pub checked_up_to: usize,
    pub records: Vec<ConditionRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// How far to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Horizon {
    /// Gap levels `k <= K` and vectors up to level `K`.
    Levels(usize),
    /// Decide for all levels from the tail rules.
    Symbolic,
}

fn sup_constant(records: &[ConditionRecord]) -> Rational {
    records
        .iter()
        .map(|r| r.constant.clone())
        .max()
        .unwrap_or_else(num::One::one)
}

/// Per-level maxima of the product condition, kept where they set a new
/// running maximum.
fn divergence_witness(records: &[ConditionRecord]) -> Vec<ConditionRecord> {
    let mut per_level: Vec<ConditionRecord> = Vec::new();
    for r in records
        .iter()
        .filter(|r| matches!(r.condition, Condition::ProductRatio { .. }))
    {
        match per_level.last_mut() {
            Some(last) if last.level == r.level => {
                if r.constant > last.constant {
                    *last = r.clone();
                }
            }
            _ => per_level.push(r.clone()),
        }
    }
    let mut out: Vec<ConditionRecord> = Vec::new();
    for r in per_level {
        if out.last().is_none_or(|last| r.constant > last.constant) {
            out.push(r);
        }
    }
    out
}

fn growth_magnitude(rho: &Rational) -> Rational {
    if rho >= &num::One::one() {
        rho.clone()
    } else {
        rho.recip()
    }
}
