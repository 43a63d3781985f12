//! The subcommands, as functions from a resolved configuration to a report
//! body.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use cantor_doubling::rational::serde_str;
use cantor_doubling::{
    check_corollary, check_theorem1, check_theorem2, check_theorem3, doubling_series,
    growth_classification, CantorConfig, CheckError, Corollary, DoublingVerdict, ExtensionOptions,
    ExtensionVerdict, Growth, Horizon, MeasureSpec, OracleOptions, OracleReport, Outcome,
    ProductTail, Rational, TailRegime,
};
use serde::Serialize;

use crate::config::{Resolved, RunConfig};
use crate::error::CliError;

#[derive(Debug, Serialize)]
pub struct LevelRow {
    pub k: usize,
    pub n: Option<u32>,
    pub count: String,
    #[serde(with = "serde_str")]
    pub delta: Rational,
    pub epsilon: Option<String>,
    pub in_lambda: bool,
    pub m: Option<usize>,
    pub s: Option<usize>,
}

#[derive(Debug, Serialize)]
pub struct Describe {
    pub regime: TailRegime,
    pub depth_unbounded: bool,
    pub product_tail: ProductTail,
    pub lebesgue_lo: String,
    pub lebesgue_hi: String,
    pub levels: Vec<LevelRow>,
}

pub fn describe(config: &CantorConfig, depth: usize, tolerance: &Rational) -> Describe {
    let levels = config
        .levels(depth)
        .into_iter()
        .map(|s| {
            let gap = (s.k >= 1).then(|| config.gap_context(s.k)).flatten();
            LevelRow {
                k: s.k,
                n: (s.k >= 1).then(|| config.n(s.k)),
                count: s.count.to_string(),
                delta: s.delta,
                epsilon: s.epsilon.map(|e| e.to_string()),
                in_lambda: s.k >= 1 && config.in_lambda(s.k),
                m: gap.map(|g| g.m),
                s: gap.map(|g| g.s),
            }
        })
        .collect();
    let (lo, hi) = config.lebesgue_of_e(tolerance);
    Describe {
        regime: config.tail_regime(),
        depth_unbounded: config.depth_unbounded(),
        product_tail: config.product_tail(),
        lebesgue_lo: lo.to_string(),
        lebesgue_hi: hi.to_string(),
        levels,
    }
}

#[derive(Debug, Serialize)]
pub struct CorollaryResult {
    pub index: u8,
    pub name: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<DoublingVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inapplicable: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct Check {
    /// `level_vectors` or `word_vectors`.
    pub criterion: &'static str,
    pub verdict: DoublingVerdict,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub corollaries: Vec<CorollaryResult>,
}

/// Runs the characterization that fits the measure, plus either every
/// simplified criterion (reporting inapplicable ones) or just the requested
/// one (failing if it does not apply).
pub fn check(
    config: &CantorConfig,
    measure: &MeasureSpec,
    horizon: Horizon,
    word_budget: u64,
    only: Option<Corollary>,
) -> Result<Check, CliError> {
    let Some(seq) = measure.as_matching() else {
        let MeasureSpec::WordIndexed { rule } = measure else {
            unreachable!("level measures handled above")
        };
        if only.is_some() {
            return Err(CliError::Inapplicable(
                "the simplified criteria need level-indexed vectors".into(),
            ));
        }
        let Horizon::Levels(k) = horizon else {
            return Err(CliError::Inapplicable(
                "symbolic verdicts need level-indexed vectors; give a level horizon".into(),
            ));
        };
        let verdict = check_theorem2(config, rule, k, word_budget)?;
        return Ok(Check {
            criterion: "word_vectors",
            verdict,
            corollaries: Vec::new(),
        });
    };
    let verdict = check_theorem1(config, seq, horizon)?;
    let which: Vec<Corollary> = match only {
        Some(c) => vec![c],
        None => (1..=3).filter_map(Corollary::from_index).collect(),
    };
    let mut corollaries = Vec::new();
    for c in which {
        let (verdict, inapplicable) = match check_corollary(config, seq, c, horizon) {
            Ok(v) => (Some(v), None),
            Err(e @ CheckError::Inapplicable { .. }) if only.is_none() => {
                (None, Some(e.to_string()))
            }
            Err(e) => return Err(e.into()),
        };
        corollaries.push(CorollaryResult {
            index: c.index(),
            name: c.name(),
            verdict,
            inapplicable,
        });
    }
    Ok(Check {
        criterion: "level_vectors",
        verdict,
        corollaries,
    })
}

#[derive(Debug, Serialize)]
pub struct Oracle {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub growth: Option<Growth>,
    #[serde(with = "serde_str")]
    pub gamma: Rational,
    pub report: OracleReport,
}

pub fn oracle(
    config: &CantorConfig,
    measure: &MeasureSpec,
    schedule: &[usize],
    options: &OracleOptions,
) -> Result<Oracle, CliError> {
    let (growth, report) = if schedule.len() >= 3 {
        let g = growth_classification(measure, config, schedule, options)?;
        (Some(g.label), g.report)
    } else {
        (None, doubling_series(measure, config, schedule, options)?)
    };
    Ok(Oracle {
        growth,
        gamma: options.gamma.clone(),
        report,
    })
}

pub fn extend(
    config: &CantorConfig,
    measure: &MeasureSpec,
    schedule: &[usize],
    options: &ExtensionOptions,
) -> Result<ExtensionVerdict, CliError> {
    Ok(check_theorem3(config, measure, schedule, options)?)
}

#[derive(Debug, Serialize)]
pub struct CrossEntry {
    pub file: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub checker: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constant: Option<String>,
    pub oracle: Growth,
    pub series: Vec<String>,
    /// `None` when the checker leaves the question open.
    pub agree: Option<bool>,
}

#[derive(Debug, Serialize)]
pub struct CrossValidation {
    pub entries: Vec<CrossEntry>,
    /// Checker verdict, then oracle label, to count.
    pub matrix: BTreeMap<&'static str, BTreeMap<&'static str, usize>>,
    pub agreed: usize,
    pub disagreed: usize,
    pub undecided: usize,
}

/// Overrides applied on top of each corpus file's own horizons.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub horizon: Option<usize>,
    pub schedule: Option<Vec<usize>>,
    pub budget: Option<u64>,
    pub symbolic: bool,
}

impl Overrides {
    pub fn apply(&self, run: &mut RunConfig) {
        if let Some(k) = self.horizon {
            run.horizons.checker = k;
        }
        if let Some(s) = &self.schedule {
            run.horizons.schedule = s.clone();
            let last = *s.last().unwrap_or(&0);
            run.horizons.eval_depth = run.horizons.eval_depth.max(last);
        }
        if self.symbolic {
            run.horizons.symbolic = true;
        }
    }
}

pub fn oracle_options(run: &RunConfig, budget: Option<u64>) -> OracleOptions {
    OracleOptions {
        eval_depth: run.horizons.eval_depth,
        budget: budget.map_or(run.horizons.ball_budget, |b| b as usize),
        gamma: run.horizons.gamma.clone(),
    }
}

pub fn checker_horizon(run: &RunConfig) -> Horizon {
    if run.horizons.symbolic {
        Horizon::Symbolic
    } else {
        Horizon::Levels(run.horizons.checker)
    }
}

fn corpus_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let read = std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
    let mut files = Vec::new();
    for entry in read {
        let path = entry.map_err(|e| CliError::io(dir, e))?.path();
        if path.extension().is_some_and(|x| x == "json") {
            files.push(path);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(CliError::Validation(format!(
            "no .json configurations in {}",
            dir.display()
        )));
    }
    Ok(files)
}

/// Compares the checker's verdict with the oracle's growth label for every
/// configuration in `dir`. Level-indexed measures are checked symbolically.
pub fn cross_validate(dir: &Path, overrides: &Overrides) -> Result<CrossValidation, CliError> {
    let mut entries = Vec::new();
    let mut matrix: BTreeMap<&'static str, BTreeMap<&'static str, usize>> = BTreeMap::new();
    let (mut agreed, mut disagreed, mut undecided) = (0, 0, 0);
    for path in corpus_files(dir)? {
        let mut run = RunConfig::load(&path)?;
        overrides.apply(&mut run);
        let Resolved { run, config } = run.resolve()?;
        let verdict = match (&run.measure.as_matching(), &run.measure) {
            (Some(seq), _) => check_theorem1(&config, seq, Horizon::Symbolic)?,
            (None, MeasureSpec::WordIndexed { rule }) => check_theorem2(
                &config,
                rule,
                run.horizons.checker,
                run.horizons.word_budget,
            )?,
            (None, MeasureSpec::Matching { .. }) => {
                unreachable!("matching measures have a sequence")
            }
        };
        let options = oracle_options(&run, overrides.budget);
        let growth =
            growth_classification(&run.measure, &config, &run.horizons.schedule, &options)?;
        let agree = match (&verdict.outcome, growth.label) {
            (Outcome::Unknown { .. }, _) => None,
            (Outcome::Doubling { .. }, label) => Some(label == Growth::Bounded),
            (Outcome::NotDoubling { .. }, label) => Some(label == Growth::Growing),
        };
        match agree {
            Some(true) => agreed += 1,
            Some(false) => disagreed += 1,
            None => undecided += 1,
        }
        let label = match growth.label {
            Growth::Bounded => "bounded",
            Growth::Growing => "growing",
        };
        *matrix
            .entry(verdict.outcome.kind())
            .or_default()
            .entry(label)
            .or_default() += 1;
        entries.push(CrossEntry {
            file: path
                .file_name()
                .map(|f| f.to_string_lossy().into_owned())
                .unwrap_or_default(),
            name: run.name.clone(),
            checker: verdict.outcome.kind(),
            constant: match &verdict.outcome {
                Outcome::Doubling { constant } => Some(constant.to_string()),
                _ => None,
            },
            oracle: growth.label,
            series: growth
                .report
                .series
                .iter()
                .map(|p| p.sup_ratio.to_string())
                .collect(),
            agree,
        });
    }
    Ok(CrossValidation {
        entries,
        matrix,
        agreed,
        disagreed,
        undecided,
    })
}
