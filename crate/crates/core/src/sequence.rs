//! Finitely described infinite sequences: an explicit prefix followed by a
//! closed-form tail rule.

use num::{BigInt, Integer, One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{serde_str, serde_str_vec, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SequenceError {
    #[error("periodic tail needs at least one value")]
    EmptyPeriod,
    #[error("geometric tail ratio {ratio} must lie strictly between 0 and 1")]
    GeometricRatio { ratio: Rational },
    #[error("power tail exponent must be a positive integer")]
    PowerExponent,
}

/// Values of a sequence past its explicit prefix.
///
/// Indices are absolute (the first term is `k = 1`). Periodic tails start
/// their first period right after the prefix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailRule {
    /// `a` for every tail index.
    Constant {
        #[serde(with = "serde_str")]
        value: Rational,
    },
    /// Cycles through `values`.
    Periodic {
        #[serde(with = "serde_str_vec")]
        values: Vec<Rational>,
    },
    /// `coefficient * ratio^k`.
    Geometric {
        #[serde(with = "serde_str")]
        coefficient: Rational,
        #[serde(with = "serde_str")]
        ratio: Rational,
    },
    /// `coefficient * k^(-exponent)`.
    Power {
        #[serde(with = "serde_str")]
        coefficient: Rational,
        exponent: u32,
    },
}

impl TailRule {
    pub fn constant(value: Rational) -> Self {
        TailRule::Constant { value }
    }

    pub fn validate(&self) -> Result<(), SequenceError> {
        match self {
            TailRule::Constant { .. } => Ok(()),
            TailRule::Periodic { values } if values.is_empty() => Err(SequenceError::EmptyPeriod),
            TailRule::Periodic { .. } => Ok(()),
            TailRule::Geometric { ratio, .. } => {
                if ratio.is_positive() && ratio < &Rational::one() {
                    Ok(())
                } else {
                    Err(SequenceError::GeometricRatio {
                        ratio: ratio.clone(),
                    })
                }
            }
            TailRule::Power { exponent, .. } => {
                if *exponent > 0 {
                    Ok(())
                } else {
                    Err(SequenceError::PowerExponent)
                }
            }
        }
    }

    /// Value at absolute index `k`, where `tail_start` is the first tail index.
    pub fn value(&self, k: usize, tail_start: usize) -> Rational {
        debug_assert!(k >= tail_start && k >= 1);
        match self {
            TailRule::Constant { value } => value.clone(),
            TailRule::Periodic { values } => values[(k - tail_start) % values.len()].clone(),
            TailRule::Geometric { coefficient, ratio } => coefficient * num::pow(ratio.clone(), k),
            TailRule::Power {
                coefficient,
                exponent,
            } => {
                let base = Rational::from_integer(BigInt::from(k));
                coefficient / num::pow(base, *exponent as usize)
            }
        }
    }

    /// Period of an eventually periodic tail (1 for constants); `None` for
    /// decaying tails.
    pub fn period(&self) -> Option<usize> {
        match self {
            TailRule::Constant { .. } => Some(1),
            TailRule::Periodic { values } => Some(values.len()),
            TailRule::Geometric { .. } | TailRule::Power { .. } => None,
        }
    }

    /// Geometric and power tails tend to zero (given a positive coefficient).
    pub fn is_decaying(&self) -> bool {
        self.period().is_none()
    }
}

/// A sequence `a_1, a_2, ...` given by an explicit prefix and a tail rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSequence", into = "RawSequence")]
pub struct SequenceSpec {
    prefix: Vec<Rational>,
    tail: TailRule,
}

#[derive(Serialize, Deserialize)]
struct RawSequence {
    #[serde(with = "serde_str_vec", default)]
    prefix: Vec<Rational>,
    tail: TailRule,
}

impl TryFrom<RawSequence> for SequenceSpec {
    type Error = SequenceError;

    fn try_from(raw: RawSequence) -> Result<Self, Self::Error> {
        SequenceSpec::new(raw.prefix, raw.tail)
    }
}

impl From<SequenceSpec> for RawSequence {
    fn from(s: SequenceSpec) -> Self {
        RawSequence {
            prefix: s.prefix,
            tail: s.tail,
        }
    }
}

impl SequenceSpec {
    pub fn new(prefix: Vec<Rational>, tail: TailRule) -> Result<Self, SequenceError> {
        tail.validate()?;
        Ok(SequenceSpec { prefix, tail })
    }

    pub fn constant(value: Rational) -> Self {
        SequenceSpec {
            prefix: Vec::new(),
            tail: TailRule::constant(value),
        }
    }

    pub fn prefix(&self) -> &[Rational] {
        &self.prefix
    }

    pub fn tail(&self) -> &TailRule {
        &self.tail
    }

    /// First index governed by the tail rule.
    pub fn tail_start(&self) -> usize {
        self.prefix.len() + 1
    }

    /// Value at `k >= 1`.
    pub fn value(&self, k: usize) -> Rational {
        assert!(k >= 1, "sequences are indexed from 1");
        if k <= self.prefix.len() {
            self.prefix[k - 1].clone()
        } else {
            self.tail.value(k, self.tail_start())
        }
    }

    /// Largest value taken anywhere in the tail, when the tail is eventually
    /// periodic or decaying from a positive coefficient (the first tail value
    /// is then the largest).
    pub fn tail_max(&self) -> Rational {
        match &self.tail {
            TailRule::Constant { value } => value.clone(),
            TailRule::Periodic { values } => {
                values.iter().max().cloned().unwrap_or_else(Rational::zero)
            }
            _ => self.value(self.tail_start()),
        }
    }

    /// `Some(i)` if `value(i)` fails to be an integer, for the first such `i`
    /// found scanning up to `limit`.
    pub fn first_non_integer(&self, limit: usize) -> Option<usize> {
        (1..=limit).find(|&k| !self.value(k).is_integer())
    }
}

/// Least common multiple of a set of periods.
pub fn lcm_all(periods: impl IntoIterator<Item = usize>) -> usize {
    periods
        .into_iter()
        .fold(1usize, |acc, p| acc.lcm(&p.max(1)))
}
