use std::collections::BTreeMap;

use num::One;

use super::{
    divergence_witness, growth_magnitude, sup_constant, CheckError, Condition, ConditionRecord,
    DoublingVerdict, Outcome,
};
use crate::cantor::CantorConfig;
use crate::measure::{Automaton, MeasureSpec, WordMeasureRule};
use crate::rational::{symmetric_ratio, Rational};
use crate::uniformity::{min_uniform_constant, UniformityReport};

/// Default cap on word-condition checks after deduplication.
pub const DEFAULT_BUDGET: u64 = 1_000_000;

/// Word-condition checks needed for gap levels `k <= horizon`: one per
/// distinct vector at each level, plus one per (state, gap, depth) triple.
fn cost(
    config: &CantorConfig,
    automaton: &Automaton,
    depths: &[Option<usize>],
    horizon: usize,
) -> u64 {
    let mut total = 0u64;
    for k in 1..=horizon {
        let states = automaton.level(k - 1).len() as u64;
        total += states;
        if let Some(m) = depths[k] {
            total += states * (config.n(k) as u64 - 1) * m as u64;
        }
    }
    total
}

/// Keeps the first strictly largest record per condition.
struct Best {
    records: Vec<ConditionRecord>,
    index: BTreeMap<(usize, Condition), usize>,
}

impl Best {
    fn new() -> Self {
        Best {
            records: Vec::new(),
            index: BTreeMap::new(),
        }
    }

    fn offer(&mut self, candidate: ConditionRecord) {
        let key = (candidate.level, candidate.condition);
        match self.index.get(&key) {
            Some(&i) => {
                if candidate.constant > self.records[i].constant {
                    self.records[i] = candidate;
                }
            }
            None => {
                self.index.insert(key, self.records.len());
                self.records.push(candidate);
            }
        }
    }
}

/// Checks the word-indexed conditions for gap levels `k <= horizon`.
///
/// Words sharing a rule state carry identical vectors on their subtrees, so
/// each state is checked once through its smallest representative word.
pub fn check_theorem2(
    config: &CantorConfig,
    rule: &WordMeasureRule,
    horizon: usize,
    budget: u64,
) -> Result<DoublingVerdict, CheckError> {
    rule.validate(config)?;
    let spec = MeasureSpec::WordIndexed { rule: rule.clone() };

    let gaps: Vec<_> = (0..=horizon)
        .map(|k| if k == 0 { None } else { config.gap_context(k) })
        .collect();
    let depths: Vec<Option<usize>> = gaps.iter().map(|g| g.map(|g| g.m)).collect();
    let deepest = gaps
        .iter()
        .flatten()
        .map(|g| g.k + g.m)
        .max()
        .unwrap_or(0)
        .max(horizon);
    let automaton = Automaton::new(&spec, config, deepest);

    let required = cost(config, &automaton, &depths, horizon);
    if required > budget {
        let largest_feasible = (0..horizon)
            .rev()
            .find(|&k| cost(config, &automaton, &depths, k) <= budget)
            .unwrap_or(0);
        return Err(CheckError::BudgetExceeded {
            requested: horizon,
            required,
            budget,
            largest_feasible,
        });
    }

    let mut memo: BTreeMap<(Vec<Rational>, usize), UniformityReport> = BTreeMap::new();
    let mut uniformity = |p: Vec<Rational>, s: usize| {
        memo.entry((p, s))
            .or_insert_with_key(|(p, s)| min_uniform_constant(p, *s))
            .clone()
    };

    let mut best = Best::new();
    for k in 1..=horizon {
        for node in automaton.level(k - 1) {
            let report = uniformity(node.vector.entries().to_vec(), 1);
            best.offer(ConditionRecord {
                level: k,
                condition: Condition::VectorUniform,
                constant: report.min_c,
                windows: report.windows,
                word: Some(node.rep.clone()),
                gap_index: None,
            });
        }
        let Some(gap) = gaps[k] else { continue };
        for node in automaton.level(k - 1) {
            for i in 1..config.n(k) {
                let word = Some(node.rep.clone());
                let mut left = node.children[i as usize - 1];
                let mut right = node.children[i as usize];
                let mut left_product = Rational::one();
                let mut right_product = Rational::one();
                for t in 1..=gap.m {
                    let lv = &automaton.node(k + t - 1, left).vector;
                    let rv = &automaton.node(k + t - 1, right).vector;
                    let mut pair = lv.entries().to_vec();
                    pair.extend(rv.entries().iter().cloned());
                    if t == gap.m {
                        let report = uniformity(pair, gap.s);
                        best.offer(ConditionRecord {
                            level: k,
                            condition: Condition::PairSUniform { s: gap.s },
                            constant: report.min_c,
                            windows: report.windows,
                            word: word.clone(),
                            gap_index: Some(i),
                        });
                        break;
                    }
                    let report = uniformity(pair, 1);
                    best.offer(ConditionRecord {
                        level: k,
                        condition: Condition::PairUniform { t },
                        constant: report.min_c,
                        windows: report.windows,
                        word: word.clone(),
                        gap_index: Some(i),
                    });
                    left_product *= lv.last();
                    right_product *= rv.first();
                    best.offer(ConditionRecord {
                        level: k,
                        condition: Condition::ProductRatio { t },
                        constant: symmetric_ratio(&left_product, &right_product),
                        windows: None,
                        word: word.clone(),
                        gap_index: Some(i),
                    });
                    let n_next = config.n(k + t);
                    left = automaton.node(k + t - 1, left).children[n_next as usize - 1];
                    right = automaton.node(k + t - 1, right).children[0];
                }
            }
        }
    }

    let records = best.records;
    let (rho, period) = spec.eventual_chain_factor(config);
    let outcome = if config.depth_unbounded() && !rho.is_one() {
        Outcome::NotDoubling {
            witness: divergence_witness(&records),
            growth_per_period: growth_magnitude(&rho),
            period,
        }
    } else {
        Outcome::Unknown {
            checked_up_to: horizon,
        }
    };
    Ok(DoublingVerdict {
        sup_constant: sup_constant(&records),
        outcome,
        checked_up_to: horizon,
        records,
        warnings: Vec::new(),
    })
}
