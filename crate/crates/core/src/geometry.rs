//! Words, component and gap intervals, and the integer lattice used for fast
//! exact comparisons.

use std::fmt;

use num::{BigInt, Integer, One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cantor::CantorConfig;
use crate::rational::{ceil_scaled, floor_scaled, serde_str, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("letter {letter} at position {position} is outside 1..={max}")]
    LetterOutOfRange {
        position: usize,
        letter: u32,
        max: u32,
    },
    #[error("gap index {index} is outside 1..{n} at level {level}")]
    GapIndexOutOfRange { index: u32, n: u32, level: usize },
}

/// Address `i_1 i_2 ... i_k` of a level-`k` component, letters 1-based.
///
/// The derived ordering is lexicographic, which is left-to-right order for
/// words of equal length.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(Vec<u32>);

impl Word {
    pub fn new(letters: Vec<u32>) -> Self {
        Word(letters)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// `1^k`.
    pub fn ones(k: usize) -> Self {
        Word(vec![1; k])
    }

    /// `n_1 n_2 ... n_k`, the rightmost word of length `k`.
    pub fn maximal(config: &CantorConfig, k: usize) -> Self {
        Word((1..=k).map(|j| config.n(j)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[u32] {
        &self.0
    }

    pub fn last(&self) -> Option<u32> {
        self.0.last().copied()
    }

    pub fn child(&self, letter: u32) -> Word {
        let mut letters = self.0.clone();
        letters.push(letter);
        Word(letters)
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn validate(&self, config: &CantorConfig) -> Result<(), WordError> {
        for (pos, &letter) in self.0.iter().enumerate() {
            let max = config.n(pos + 1);
            if letter == 0 || letter > max {
                return Err(WordError::LetterOutOfRange {
                    position: pos + 1,
                    letter,
                    max,
                });
            }
        }
        Ok(())
    }

    /// All words of length `k` in lexicographic order.
    pub fn all(config: &CantorConfig, k: usize) -> Vec<Word> {
        let mut out = vec![Word::empty()];
        for level in 1..=k {
            let n = config.n(level);
            out = out
                .iter()
                .flat_map(|w| (1..=n).map(move |i| w.child(i)))
                .collect();
        }
        out
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

/// A closed interval `[lo, hi]` with exact endpoints. Gap intervals reuse the
/// type; the gap itself is the open interior.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    #[serde(with = "serde_str")]
    pub lo: Rational,
    #[serde(with = "serde_str")]
    pub hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        assert!(lo <= hi, "interval endpoints out of order: {lo} > {hi}");
        Interval { lo, hi }
    }

    pub fn unit() -> Self {
        Interval::new(Rational::zero(), Rational::one())
    }

    pub fn length(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }
}

/// `I_w`: `lo = Σ_j (i_j - 1)(δ_j + ε_j)`, `hi = lo + δ_k`.
pub fn component_interval(config: &CantorConfig, w: &Word) -> Result<Interval, WordError> {
    w.validate(config)?;
    let stats = config.levels(w.len());
    let mut lo = Rational::zero();
    for (j, &letter) in w.letters().iter().enumerate() {
        let level = &stats[j + 1];
        let step = &level.delta + level.epsilon.as_ref().expect("level >= 1");
        lo += step * Rational::from_integer(BigInt::from(letter - 1));
    }
    let hi = &lo + &stats[w.len()].delta;
    Ok(Interval::new(lo, hi))
}

/// `G_{wi}`, the `i`-th gap of level `|w| + 1` inside `I_w` (its closure).
pub fn gap_interval(config: &CantorConfig, w: &Word, i: u32) -> Result<Interval, WordError> {
    let level = w.len() + 1;
    let n = config.n(level);
    if i == 0 || i >= n {
        return Err(WordError::GapIndexOutOfRange { index: i, n, level });
    }
    let left = component_interval(config, &w.child(i))?;
    let eps = config.level_stats(level).epsilon.expect("level >= 1");
    let hi = &left.hi + eps;
    Ok(Interval::new(left.hi, hi))
}

/// The maximal word `w i n_{k+1} ... n_{k+t}` and the minimal word
/// `w (i+1) 1^t` flanking the gap `G_{wi}` at level `k + t`, `k = |w| + 1`.
pub fn adjacent_boundary_words(
    config: &CantorConfig,
    w: &Word,
    i: u32,
    t: usize,
) -> Result<(Word, Word), WordError> {
    w.validate(config)?;
    let k = w.len() + 1;
    let n = config.n(k);
    if i == 0 || i >= n {
        return Err(WordError::GapIndexOutOfRange {
            index: i,
            n,
            level: k,
        });
    }
    let mut left = w.child(i);
    let mut right = w.child(i + 1);
    for j in 1..=t {
        left = left.child(config.n(k + j));
        right = right.child(1);
    }
    Ok((left, right))
}

/// Positions of level-`<= depth` geometry as integers over a common
/// denominator `scale`.
///
/// Every component endpoint up to `depth` is a lattice point, and so is every
/// half-distance between two of them (the scale carries an extra factor 2).
#[derive(Debug, Clone)]
pub struct Lattice {
    depth: usize,
    scale: BigInt,
    /// `δ_j * scale`, `j = 0..=depth`.
    delta: Vec<BigInt>,
    /// `(δ_j + ε_j) * scale`, index `j = 1..=depth` (entry 0 unused).
    step: Vec<BigInt>,
    n: Vec<u32>,
}

impl Lattice {
    pub fn new(config: &CantorConfig, depth: usize) -> Self {
        let stats = config.levels(depth);
        let mut scale = BigInt::one();
        for s in &stats {
            scale = scale.lcm(s.delta.denom());
            if let Some(e) = &s.epsilon {
                scale = scale.lcm(e.denom());
            }
        }
        scale *= 2;
        let to_int = |x: &Rational| -> BigInt {
            let v = x * Rational::from_integer(scale.clone());
            debug_assert!(v.is_integer());
            v.to_integer()
        };
        let delta = stats.iter().map(|s| to_int(&s.delta)).collect();
        let step = stats
            .iter()
            .map(|s| match &s.epsilon {
                Some(e) => to_int(&(&s.delta + e)),
                None => BigInt::zero(),
            })
            .collect();
        let n = (0..=depth)
            .map(|j| if j == 0 { 1 } else { config.n(j) })
            .collect();
        Lattice {
            depth,
            scale,
            delta,
            step,
            n,
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn scale(&self) -> &BigInt {
        &self.scale
    }

    pub fn delta(&self, j: usize) -> &BigInt {
        &self.delta[j]
    }

    pub fn step(&self, j: usize) -> &BigInt {
        &self.step[j]
    }

    pub fn n(&self, j: usize) -> u32 {
        self.n[j]
    }

    pub fn to_rational(&self, x: &BigInt) -> Rational {
        Rational::new(x.clone(), self.scale.clone())
    }

    /// Smallest lattice point `>= x`.
    pub fn ceil(&self, x: &Rational) -> BigInt {
        ceil_scaled(x, &self.scale)
    }

    /// Largest lattice point `<= x`.
    pub fn floor(&self, x: &Rational) -> BigInt {
        floor_scaled(x, &self.scale)
    }

    /// Exact lattice coordinate of a rational that is known to be on the
    /// lattice.
    pub fn exact(&self, x: &Rational) -> Option<BigInt> {
        let v = x * Rational::from_integer(self.scale.clone());
        v.is_integer().then(|| v.to_integer())
    }

    /// Left endpoints of the level-`level` components, left to right.
    pub fn component_starts(&self, level: usize) -> Vec<BigInt> {
        assert!(level <= self.depth);
        let mut out = vec![BigInt::zero()];
        for j in 1..=level {
            let n = self.n[j];
            let step = &self.step[j];
            out = out
                .iter()
                .flat_map(|lo| (0..n).map(move |i| lo + step * BigInt::from(i)))
                .collect();
        }
        out
    }

    /// Sorted endpoints of all level-`level` components. These include every
    /// endpoint of every coarser level.
    pub fn endpoints(&self, level: usize) -> Vec<BigInt> {
        let d = &self.delta[level];
        let mut out = Vec::new();
        for lo in self.component_starts(level) {
            let hi = &lo + d;
            out.push(lo);
            out.push(hi);
        }
        out
    }

    /// Whether lattice point `x` lies strictly inside a gap of level
    /// `<= level` (or outside `[0, 1]`).
    pub fn in_gap(&self, x: &BigInt, level: usize) -> bool {
        if x < &BigInt::zero() || x > &self.delta[0] {
            return true;
        }
        let mut lo = BigInt::zero();
        for j in 1..=level {
            let offset = x - &lo;
            let q = offset.div_floor(&self.step[j]);
            let idx = q.min(BigInt::from(self.n[j] - 1));
            let child = &lo + &self.step[j] * &idx;
            let rem = x - &child;
            if rem > self.delta[j] {
                return true;
            }
            lo = child;
        }
        false
    }
}
