//! Run configuration files.

use std::path::Path;

use cantor_doubling::rational::{ratio, serde_str};
use cantor_doubling::{CantorConfig, MeasureSpec, Rational, SequenceSpec};
use num::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Describe,
    Check,
    Oracle,
    Extend,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Describe => "describe",
            Command::Check => "check",
            Command::Oracle => "oracle",
            Command::Extend => "extend",
        }
    }

    pub fn all() -> Vec<Command> {
        vec![
            Command::Describe,
            Command::Check,
            Command::Oracle,
            Command::Extend,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CantorSpec {
    pub n: SequenceSpec,
    pub c: SequenceSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Horizons {
    /// Highest gap level for finite checks.
    pub checker: usize,
    /// Decide every level from the tail rules.
    pub symbolic: bool,
    pub schedule: Vec<usize>,
    pub eval_depth: usize,
    pub ball_budget: usize,
    pub word_budget: u64,
    pub describe_depth: usize,
    #[serde(with = "serde_str")]
    pub tolerance: Rational,
    #[serde(with = "serde_str")]
    pub gamma: Rational,
}

impl Default for Horizons {
    fn default() -> Self {
        Horizons {
            checker: 8,
            symbolic: false,
            schedule: vec![4, 6, 8, 10],
            eval_depth: 14,
            ball_budget: cantor_doubling::DEFAULT_BALL_BUDGET,
            word_budget: cantor_doubling::DEFAULT_BUDGET,
            describe_depth: 12,
            tolerance: ratio(1, 1_000_000_000_000),
            gamma: ratio(3, 2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub cantor: CantorSpec,
    pub measure: MeasureSpec,
    #[serde(default)]
    pub horizons: Horizons,
    #[serde(default = "Command::all")]
    pub commands: Vec<Command>,
}

/// A run configuration together with its validated set.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub run: RunConfig,
    pub config: CantorConfig,
}

impl RunConfig {
    pub fn parse(path: &Path, text: &str) -> Result<RunConfig, CliError> {
        let parse_err = |message: String| CliError::Parse {
            path: path.to_path_buf(),
            message,
        };
        let run: RunConfig = serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?;
        if run.schema != SCHEMA {
            return Err(parse_err(format!(
                "unsupported schema {} (expected {SCHEMA})",
                run.schema
            )));
        }
        Ok(run)
    }

    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        RunConfig::parse(path, &text)
    }

    pub fn resolve(self) -> Result<Resolved, CliError> {
        let config = CantorConfig::new(self.cantor.n.clone(), self.cantor.c.clone())
            .map_err(|e| CliError::Validation(e.to_string()))?;
        self.measure
            .validate(&config)
            .map_err(|e| CliError::Validation(e.to_string()))?;
        self.horizons.validate()?;
        if self.commands.is_empty() {
            return Err(CliError::Validation("no commands enabled".into()));
        }
        Ok(Resolved { run: self, config })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("run configs serialize")
    }
}

impl Horizons {
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Validation(m.to_string()));
        if self.checker == 0 {
            return bad("checker horizon must be at least 1");
        }
        validate_schedule(&self.schedule)?;
        let last = *self.schedule.last().expect("validated");
        if self.eval_depth < last {
            return bad("eval_depth must be at least the largest scheduled depth");
        }
        if self.ball_budget == 0 || self.word_budget == 0 {
            return bad("budgets must be positive");
        }
        if !self.tolerance.is_positive() {
            return bad("tolerance must be positive");
        }
        if self.gamma < Rational::one() {
            return bad("gamma must be at least 1");
        }
        Ok(())
    }
}

pub fn validate_schedule(schedule: &[usize]) -> Result<(), CliError> {
    if schedule.is_empty() || schedule[0] == 0 {
        return Err(CliError::Validation(
            "schedule must be non-empty with positive depths".into(),
        ));
    }
    if !schedule.windows(2).all(|w| w[0] < w[1]) {
        return Err(CliError::Validation(
            "schedule must be strictly increasing".into(),
        ));
    }
    Ok(())
}
