//! Probability measures on `E` given by vector sequences or word-indexed
//! rules, and the finite automaton that drives every per-word computation.

use std::collections::{BTreeMap, BTreeSet};

use num::{BigInt, One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cantor::CantorConfig;
use crate::geometry::{Word, WordError};
use crate::rational::{format_rational, parse_rational, Rational};
use crate::sequence::lcm_all;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MeasureError {
    #[error("probability vector is empty")]
    Empty,
    #[error("entry {index} of a probability vector is not positive")]
    NonPositive { index: usize },
    #[error("probability vector sums to {sum}, not 1")]
    NotNormalized { sum: Rational },
    #[error("vector for level {level} has {got} entries but n_{level} = {expected}")]
    LengthMismatch {
        level: usize,
        expected: u32,
        got: usize,
    },
    #[error("periodic tail needs at least one vector")]
    EmptyPeriod,
    #[error("last-letter rule has period {period} but {tables} tables")]
    TableCount { period: usize, tables: usize },
    #[error("last-letter rule has no vector for phase {phase} and letter {letter}")]
    MissingEntry { phase: usize, letter: u32 },
    #[error("table word {word} is listed twice")]
    DuplicateWord { word: Word },
    #[error(transparent)]
    Word(#[from] WordError),
}

/// A positive probability vector with exact entries.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct ProbVector(Vec<Rational>);

impl TryFrom<Vec<String>> for ProbVector {
    type Error = String;

    fn try_from(raw: Vec<String>) -> Result<Self, Self::Error> {
        let entries = raw
            .iter()
            .map(|t| parse_rational(t).map_err(|e| e.to_string()))
            .collect::<Result<Vec<_>, _>>()?;
        ProbVector::new(entries).map_err(|e| e.to_string())
    }
}

impl From<ProbVector> for Vec<String> {
    fn from(p: ProbVector) -> Self {
        p.0.iter().map(format_rational).collect()
    }
}

impl ProbVector {
    pub fn new(entries: Vec<Rational>) -> Result<Self, MeasureError> {
        if entries.is_empty() {
            return Err(MeasureError::Empty);
        }
        if let Some(index) = entries.iter().position(|p| !p.is_positive()) {
            return Err(MeasureError::NonPositive { index: index + 1 });
        }
        let sum: Rational = entries.iter().sum();
        if !sum.is_one() {
            return Err(MeasureError::NotNormalized { sum });
        }
        Ok(ProbVector(entries))
    }

    /// `(1/n, ..., 1/n)`.
    pub fn uniform(n: u32) -> Self {
        let p = Rational::new(BigInt::one(), BigInt::from(n));
        ProbVector(vec![p; n as usize])
    }

    pub fn entries(&self) -> &[Rational] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Entry `i`, 1-based.
    pub fn get(&self, i: u32) -> &Rational {
        &self.0[i as usize - 1]
    }

    pub fn first(&self) -> &Rational {
        &self.0[0]
    }

    pub fn last(&self) -> &Rational {
        self.0.last().expect("non-empty")
    }

    pub fn is_uniform(&self) -> bool {
        self.0.iter().all(|p| p == &self.0[0])
    }

    /// `(P, P)`.
    pub fn doubled(&self) -> Vec<Rational> {
        let mut out = self.0.clone();
        out.extend(self.0.iter().cloned());
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MatchingTail {
    /// `P_k = (1/n_k, ..., 1/n_k)`.
    Uniform,
    /// Cycles through `vectors`, first one right after the prefix.
    Periodic { vectors: Vec<ProbVector> },
}

/// An `n`-matching sequence `P_1, P_2, ...`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchingSequence {
    #[serde(default)]
    pub prefix: Vec<ProbVector>,
    pub tail: MatchingTail,
}

impl MatchingSequence {
    pub fn uniform() -> Self {
        MatchingSequence {
            prefix: Vec::new(),
            tail: MatchingTail::Uniform,
        }
    }

    /// The same vector at every level.
    pub fn constant(p: ProbVector) -> Self {
        MatchingSequence {
            prefix: Vec::new(),
            tail: MatchingTail::Periodic { vectors: vec![p] },
        }
    }

    pub fn tail_start(&self) -> usize {
        self.prefix.len() + 1
    }

    pub fn period(&self) -> usize {
        match &self.tail {
            MatchingTail::Uniform => 1,
            MatchingTail::Periodic { vectors } => vectors.len().max(1),
        }
    }

    /// `P_k`.
    pub fn vector(&self, config: &CantorConfig, k: usize) -> ProbVector {
        assert!(k >= 1, "vector levels start at 1");
        if k <= self.prefix.len() {
            return self.prefix[k - 1].clone();
        }
        match &self.tail {
            MatchingTail::Uniform => ProbVector::uniform(config.n(k)),
            MatchingTail::Periodic { vectors } => {
                vectors[(k - self.tail_start()) % vectors.len()].clone()
            }
        }
    }

    /// First level from which the tail of `(n, P)` repeats with period
    /// [`Self::joint_period`].
    pub fn joint_start(&self, config: &CantorConfig) -> usize {
        self.tail_start().max(config.n_spec().tail_start())
    }

    pub fn joint_period(&self, config: &CantorConfig) -> usize {
        lcm_all([self.period(), config.n_period()])
    }

    pub fn validate(&self, config: &CantorConfig) -> Result<(), MeasureError> {
        if let MatchingTail::Periodic { vectors } = &self.tail {
            if vectors.is_empty() {
                return Err(MeasureError::EmptyPeriod);
            }
        }
        let end = self.joint_start(config) + self.joint_period(config);
        for k in 1..end {
            let got = self.vector(config, k).len();
            let expected = config.n(k);
            if got != expected as usize {
                return Err(MeasureError::LengthMismatch {
                    level: k,
                    expected,
                    got,
                });
            }
        }
        Ok(())
    }

    /// Least `k_0` with `P_k` uniform for every `k >= k_0`.
    pub fn ultimately_one_uniform_index(&self) -> Option<usize> {
        let tail_uniform = match &self.tail {
            MatchingTail::Uniform => true,
            MatchingTail::Periodic { vectors } => vectors.iter().all(ProbVector::is_uniform),
        };
        if !tail_uniform {
            return None;
        }
        let last_bad = self.prefix.iter().rposition(|p| !p.is_uniform());
        Some(last_bad.map_or(1, |i| i + 2))
    }
}

/// One row of an explicit word table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableEntry {
    pub word: Word,
    pub vector: ProbVector,
}

/// A deterministic rule `w ↦ P_w` from a finitely described family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum WordMeasureRule {
    /// `P_w = P_{|w|+1}` of a matching sequence.
    LevelOnly { sequence: MatchingSequence },
    /// `P_w = table[(|w| + 1) mod period][last letter of w]`. The empty word
    /// uses `root`, or the letter-1 entry when `root` is absent.
    LastLetter {
        period: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        root: Option<ProbVector>,
        #[serde(with = "letter_tables")]
        table: Vec<BTreeMap<u32, ProbVector>>,
    },
    /// Listed words get their own vector; every other word uses `fallback`.
    ExplicitTable {
        entries: Vec<TableEntry>,
        fallback: MatchingSequence,
    },
}

/// Letter-keyed tables with the keys written as strings, which JSON needs
/// inside tagged enums.
mod letter_tables {
    use std::collections::BTreeMap;

    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::ProbVector;

    type Table = BTreeMap<u32, ProbVector>;

    pub fn serialize<S: Serializer>(tables: &[Table], s: S) -> Result<S::Ok, S::Error> {
        let raw: Vec<BTreeMap<String, &ProbVector>> = tables
            .iter()
            .map(|t| t.iter().map(|(k, v)| (k.to_string(), v)).collect())
            .collect();
        raw.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Table>, D::Error> {
        let raw: Vec<BTreeMap<String, ProbVector>> = Vec::deserialize(d)?;
        raw.into_iter()
            .map(|t| {
                t.into_iter()
                    .map(|(k, v)| {
                        k.parse::<u32>().map(|k| (k, v)).map_err(|_| {
                            D::Error::custom(format!("letter key {k:?} is not a positive integer"))
                        })
                    })
                    .collect()
            })
            .collect()
    }
}

/// Either measure class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureSpec {
    Matching { sequence: MatchingSequence },
    WordIndexed { rule: WordMeasureRule },
}

impl MeasureSpec {
    pub fn matching(sequence: MatchingSequence) -> Self {
        MeasureSpec::Matching { sequence }
    }

    pub fn uniform() -> Self {
        MeasureSpec::matching(MatchingSequence::uniform())
    }

    /// The underlying matching sequence, when the measure is level-only.
    pub fn as_matching(&self) -> Option<&MatchingSequence> {
        match self {
            MeasureSpec::Matching { sequence } => Some(sequence),
            MeasureSpec::WordIndexed {
                rule: WordMeasureRule::LevelOnly { sequence },
            } => Some(sequence),
            MeasureSpec::WordIndexed { .. } => None,
        }
    }

    pub fn validate(&self, config: &CantorConfig) -> Result<(), MeasureError> {
        match self {
            MeasureSpec::Matching { sequence } => sequence.validate(config),
            MeasureSpec::WordIndexed { rule } => rule.validate(config),
        }
    }

    /// `P_w` (the matching case ignores everything but `|w|`).
    pub fn vector_at(&self, config: &CantorConfig, w: &Word) -> ProbVector {
        match self {
            MeasureSpec::Matching { sequence } => sequence.vector(config, w.len() + 1),
            MeasureSpec::WordIndexed { rule } => rule.vector_at(config, w),
        }
    }

    /// `μ(I_w)`, the product of selected entries along the path to `w`.
    pub fn component_measure(
        &self,
        config: &CantorConfig,
        w: &Word,
    ) -> Result<Rational, MeasureError> {
        w.validate(config)?;
        let mut mass = Rational::one();
        let mut prefix = Word::empty();
        for &letter in w.letters() {
            mass *= self.vector_at(config, &prefix).get(letter);
            prefix = prefix.child(letter);
        }
        Ok(mass)
    }

    /// Least `k_0` with every vector at levels `>= k_0` uniform.
    pub fn ultimately_one_uniform_index(&self) -> Option<usize> {
        match self {
            MeasureSpec::Matching { sequence } => sequence.ultimately_one_uniform_index(),
            MeasureSpec::WordIndexed { rule } => rule.ultimately_one_uniform_index(),
        }
    }

    /// Per-period growth of the boundary chains: the product, over one
    /// eventual period of levels `ℓ`, of `b_ℓ / a_ℓ`, where `a_ℓ` is the last
    /// entry selected on a maximal chain and `b_ℓ` the first entry on a
    /// minimal chain. Returns `(ρ, period)`.
    pub fn eventual_chain_factor(&self, config: &CantorConfig) -> (Rational, usize) {
        let automaton = self.chain_model(config);
        automaton.factor()
    }

    fn chain_model(&self, config: &CantorConfig) -> ChainModel {
        match self {
            MeasureSpec::Matching { sequence }
            | MeasureSpec::WordIndexed {
                rule: WordMeasureRule::LevelOnly { sequence },
            }
            | MeasureSpec::WordIndexed {
                rule:
                    WordMeasureRule::ExplicitTable {
                        fallback: sequence, ..
                    },
            } => {
                let start = sequence.joint_start(config) + self.table_depth();
                let period = sequence.joint_period(config);
                let ratios = (start..start + period)
                    .map(|l| {
                        let p = sequence.vector(config, l);
                        p.first() / p.last()
                    })
                    .collect();
                ChainModel { ratios }
            }
            MeasureSpec::WordIndexed {
                rule: WordMeasureRule::LastLetter { period, table, .. },
            } => {
                let start = config.n_spec().tail_start() + 1;
                let joint = lcm_all([*period, config.n_period()]);
                let ratios = (start..start + joint)
                    .map(|l| {
                        let phase = l % period;
                        let left = table[phase][&config.n(l - 1)].last().clone();
                        let right = table[phase][&1].first().clone();
                        right / left
                    })
                    .collect();
                ChainModel { ratios }
            }
        }
    }

    fn table_depth(&self) -> usize {
        match self {
            MeasureSpec::WordIndexed {
                rule: WordMeasureRule::ExplicitTable { entries, .. },
            } => entries.iter().map(|e| e.word.len() + 1).max().unwrap_or(0),
            _ => 0,
        }
    }
}

struct ChainModel {
    ratios: Vec<Rational>,
}

impl ChainModel {
    fn factor(&self) -> (Rational, usize) {
        (self.ratios.iter().product(), self.ratios.len())
    }
}

impl WordMeasureRule {
    pub fn validate(&self, config: &CantorConfig) -> Result<(), MeasureError> {
        match self {
            WordMeasureRule::LevelOnly { sequence } => sequence.validate(config),
            WordMeasureRule::LastLetter {
                period,
                root,
                table,
            } => {
                if *period == 0 {
                    return Err(MeasureError::EmptyPeriod);
                }
                if table.len() != *period {
                    return Err(MeasureError::TableCount {
                        period: *period,
                        tables: table.len(),
                    });
                }
                let check_len = |level: usize, p: &ProbVector| {
                    let expected = config.n(level);
                    if p.len() != expected as usize {
                        Err(MeasureError::LengthMismatch {
                            level,
                            expected,
                            got: p.len(),
                        })
                    } else {
                        Ok(())
                    }
                };
                let first =
                    match root {
                        Some(p) => p.clone(),
                        None => table[1 % period].get(&1).cloned().ok_or(
                            MeasureError::MissingEntry {
                                phase: 1 % period,
                                letter: 1,
                            },
                        )?,
                    };
                check_len(1, &first)?;
                let end = config.n_spec().tail_start() + 1 + lcm_all([*period, config.n_period()]);
                for k in 2..=end {
                    let phase = k % period;
                    for letter in 1..=config.n(k - 1) {
                        let p = table[phase]
                            .get(&letter)
                            .ok_or(MeasureError::MissingEntry { phase, letter })?;
                        check_len(k, p)?;
                    }
                }
                Ok(())
            }
            WordMeasureRule::ExplicitTable { entries, fallback } => {
                fallback.validate(config)?;
                let mut seen = BTreeSet::new();
                for entry in entries {
                    entry.word.validate(config)?;
                    if !seen.insert(entry.word.clone()) {
                        return Err(MeasureError::DuplicateWord {
                            word: entry.word.clone(),
                        });
                    }
                    let level = entry.word.len() + 1;
                    let expected = config.n(level);
                    if entry.vector.len() != expected as usize {
                        return Err(MeasureError::LengthMismatch {
                            level,
                            expected,
                            got: entry.vector.len(),
                        });
                    }
                }
                Ok(())
            }
        }
    }

    pub fn vector_at(&self, config: &CantorConfig, w: &Word) -> ProbVector {
        match self {
            WordMeasureRule::LevelOnly { sequence } => sequence.vector(config, w.len() + 1),
            WordMeasureRule::LastLetter {
                period,
                root,
                table,
            } => {
                let phase = (w.len() + 1) % period;
                match (w.last(), root) {
                    (None, Some(p)) => p.clone(),
                    (None, None) => table[phase][&1].clone(),
                    (Some(letter), _) => table[phase][&letter].clone(),
                }
            }
            WordMeasureRule::ExplicitTable { entries, fallback } => entries
                .iter()
                .find(|e| &e.word == w)
                .map(|e| e.vector.clone())
                .unwrap_or_else(|| fallback.vector(config, w.len() + 1)),
        }
    }

    pub fn ultimately_one_uniform_index(&self) -> Option<usize> {
        match self {
            WordMeasureRule::LevelOnly { sequence } => sequence.ultimately_one_uniform_index(),
            WordMeasureRule::LastLetter { root, table, .. } => {
                let rest = table
                    .iter()
                    .flat_map(|t| t.values())
                    .all(ProbVector::is_uniform);
                if !rest {
                    return None;
                }
                match root {
                    Some(p) if !p.is_uniform() => Some(2),
                    _ => Some(1),
                }
            }
            WordMeasureRule::ExplicitTable { entries, fallback } => {
                let base = fallback.ultimately_one_uniform_index()?;
                let table = entries
                    .iter()
                    .filter(|e| !e.vector.is_uniform())
                    .map(|e| e.word.len() + 2)
                    .max()
                    .unwrap_or(1);
                Some(base.max(table))
            }
        }
    }
}

/// Equivalence class of words under a rule: two words in the same state at
/// the same level carry identical vectors on their whole subtrees.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleState {
    /// Level-only measures: one state per level.
    Level,
    /// The empty word of a last-letter rule.
    Root,
    Letter(u32),
    /// A word that is a prefix of some explicit table entry.
    Prefix(Word),
    /// Below every explicit table entry.
    Fallback,
}

#[derive(Debug, Clone)]
pub struct StateNode {
    pub state: RuleState,
    /// Lexicographically smallest word in this state.
    pub rep: Word,
    pub vector: ProbVector,
    /// Child state index at the next level, per letter (0-based).
    pub children: Vec<usize>,
}

/// The states of a rule, level by level, down to a fixed depth.
#[derive(Debug, Clone)]
pub struct Automaton {
    levels: Vec<Vec<StateNode>>,
}

impl Automaton {
    /// States for word lengths `0..=depth`; vectors at the last level are
    /// included, children there are empty.
    pub fn new(spec: &MeasureSpec, config: &CantorConfig, depth: usize) -> Self {
        let prefixes: BTreeSet<Word> = match spec {
            MeasureSpec::WordIndexed {
                rule: WordMeasureRule::ExplicitTable { entries, .. },
            } => entries
                .iter()
                .flat_map(|e| (0..=e.word.len()).map(|l| Word::new(e.word.letters()[..l].to_vec())))
                .collect(),
            _ => BTreeSet::new(),
        };
        let root_state = match spec {
            MeasureSpec::Matching { .. }
            | MeasureSpec::WordIndexed {
                rule: WordMeasureRule::LevelOnly { .. },
            } => RuleState::Level,
            MeasureSpec::WordIndexed {
                rule: WordMeasureRule::LastLetter { .. },
            } => RuleState::Root,
            MeasureSpec::WordIndexed {
                rule: WordMeasureRule::ExplicitTable { .. },
            } => {
                if prefixes.is_empty() {
                    RuleState::Fallback
                } else {
                    RuleState::Prefix(Word::empty())
                }
            }
        };
        let transition = |state: &RuleState, child: &Word| -> RuleState {
            match state {
                RuleState::Level => RuleState::Level,
                RuleState::Root | RuleState::Letter(_) => {
                    RuleState::Letter(child.last().expect("non-empty"))
                }
                RuleState::Prefix(_) => {
                    if prefixes.contains(child) {
                        RuleState::Prefix(child.clone())
                    } else {
                        RuleState::Fallback
                    }
                }
                RuleState::Fallback => RuleState::Fallback,
            }
        };

        let root = Word::empty();
        let mut levels = vec![vec![StateNode {
            state: root_state,
            vector: spec.vector_at(config, &root),
            rep: root,
            children: Vec::new(),
        }]];
        for j in 0..depth {
            let n = config.n(j + 1);
            let mut next: Vec<StateNode> = Vec::new();
            let mut index: BTreeMap<RuleState, usize> = BTreeMap::new();
            for node in levels[j].iter_mut() {
                for letter in 1..=n {
                    let child = node.rep.child(letter);
                    let state = transition(&node.state, &child);
                    let idx = *index.entry(state.clone()).or_insert_with(|| {
                        next.push(StateNode {
                            state,
                            vector: spec.vector_at(config, &child),
                            rep: child.clone(),
                            children: Vec::new(),
                        });
                        next.len() - 1
                    });
                    node.children.push(idx);
                }
            }
            levels.push(next);
        }
        Automaton { levels }
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    /// States of words of length `j`, ordered by representative.
    pub fn level(&self, j: usize) -> &[StateNode] {
        &self.levels[j]
    }

    pub fn node(&self, j: usize, index: usize) -> &StateNode {
        &self.levels[j][index]
    }

    /// Index of the state of `w` at level `|w|`.
    pub fn locate(&self, w: &Word) -> usize {
        let mut idx = 0;
        for (j, &letter) in w.letters().iter().enumerate() {
            idx = self.levels[j][idx].children[letter as usize - 1];
        }
        idx
    }
}

/// Distinct vectors `P_w` over all `w` of length `j`, in first-seen order.
pub fn distinct_vectors(automaton: &Automaton, j: usize) -> Vec<ProbVector> {
    let mut seen = BTreeSet::new();
    automaton
        .level(j)
        .iter()
        .filter(|node| seen.insert(node.vector.clone()))
        .map(|node| node.vector.clone())
        .collect()
}

/// Largest `μ(I_w)` over all words of length `k`.
pub fn max_component_measure(spec: &MeasureSpec, config: &CantorConfig, k: usize) -> Rational {
    let automaton = Automaton::new(spec, config, k);
    // Per-state maxima propagate down the automaton.
    let mut best = vec![Rational::one()];
    for j in 0..k {
        let mut next = vec![Rational::zero(); automaton.level(j + 1).len()];
        for (node, mass) in automaton.level(j).iter().zip(&best) {
            for (i, &child) in node.children.iter().enumerate() {
                let m = mass * node.vector.get(i as u32 + 1);
                if m > next[child] {
                    next[child] = m;
                }
            }
        }
        best = next;
    }
    best.into_iter().max().unwrap_or_else(Rational::zero)
}
