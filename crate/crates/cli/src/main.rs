use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cantor_doubling::{Corollary, ExtensionOptions};
use cantor_doubling_cli::commands::{self, Overrides};
use cantor_doubling_cli::{series_csv, CliError, Command, Report, Resolved, RunConfig};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

/// Doubling measures on uniform Cantor sets.
#[derive(Debug, Parser)]
#[command(name = "cantor-doubling", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Level statistics and the gap table.
    Describe(Target),
    /// Decide the doubling property from the per-level conditions.
    Check {
        #[command(flatten)]
        target: Target,
        /// Run only this simplified criterion (1, 2 or 3) and fail if it
        /// does not apply.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        corollary: Option<u8>,
    },
    /// Brute-force sup-ratio series over enumerated balls.
    Oracle(Target),
    /// Extension to a doubling measure on [0, 1].
    Extend(Target),
    /// Every command enabled in the configuration.
    Run(Target),
    /// Checker verdicts against oracle growth over a directory of configs.
    CrossValidate {
        dir: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Debug, Args)]
struct Target {
    config: PathBuf,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Args)]
struct Flags {
    /// Checker horizon, or table depth for `describe`.
    #[arg(long)]
    horizon: Option<usize>,
    /// Oracle depths, comma separated and strictly increasing.
    #[arg(long, value_delimiter = ',')]
    schedule: Option<Vec<usize>>,
    /// Word-check budget for `check`, ball budget otherwise.
    #[arg(long)]
    budget: Option<u64>,
    /// Decide every level from the tail rules.
    #[arg(long)]
    symbolic: bool,
    /// Write reports into this directory instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Flags {
    fn overrides(&self) -> Overrides {
        Overrides {
            horizon: self.horizon,
            schedule: self.schedule.clone(),
            budget: self.budget,
            symbolic: self.symbolic,
        }
    }
}

struct Output<'a> {
    dir: Option<&'a Path>,
    stem: String,
}

impl Output<'_> {
    fn write(&self, command: &str, ext: &str, text: &str) -> Result<(), CliError> {
        match self.dir {
            None => {
                print!("{text}");
                Ok(())
            }
            Some(dir) => {
                std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
                let path = dir.join(format!("{}.{command}.{ext}", self.stem));
                std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
                println!("{}", path.display());
                Ok(())
            }
        }
    }

    fn report<T: Serialize>(
        &self,
        command: &'static str,
        name: Option<String>,
        body: T,
    ) -> Result<(), CliError> {
        self.write(command, "json", &Report::new(command, name, body).to_json())
    }
}

fn load(target: &Target) -> Result<Resolved, CliError> {
    let mut run = RunConfig::load(&target.config)?;
    target.flags.overrides().apply(&mut run);
    run.resolve()
}

fn execute(
    resolved: &Resolved,
    command: Command,
    flags: &Flags,
    corollary: Option<u8>,
    out: &Output,
) -> Result<(), CliError> {
    let Resolved { run, config } = resolved;
    if !run.commands.contains(&command) {
        return Err(CliError::Validation(format!(
            "command {} is not enabled in this configuration",
            command.name()
        )));
    }
    let name = run.name.clone();
    let h = &run.horizons;
    match command {
        Command::Describe => {
            let depth = flags.horizon.unwrap_or(h.describe_depth);
            out.report(
                "describe",
                name,
                commands::describe(config, depth, &h.tolerance),
            )
        }
        Command::Check => {
            let only = corollary.map(|i| Corollary::from_index(i).expect("range checked by clap"));
            let budget = flags.budget.unwrap_or(h.word_budget);
            let body = commands::check(
                config,
                &run.measure,
                commands::checker_horizon(run),
                budget,
                only,
            )?;
            out.report("check", name, body)
        }
        Command::Oracle => {
            let options = commands::oracle_options(run, flags.budget);
            let body = commands::oracle(config, &run.measure, &h.schedule, &options)?;
            let csv = series_csv(&body.report.series);
            out.report("oracle", name, body)?;
            if out.dir.is_some() {
                out.write("oracle", "csv", &csv)?;
            }
            Ok(())
        }
        Command::Extend => {
            let options = ExtensionOptions {
                tolerance: h.tolerance.clone(),
                budget: flags.budget.map_or(h.ball_budget, |b| b as usize),
                gamma: h.gamma.clone(),
            };
            out.report(
                "extend",
                name,
                commands::extend(config, &run.measure, &h.schedule, &options)?,
            )
        }
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "report".into())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let single = |target: &Target, command: Command, corollary: Option<u8>| {
        let resolved = load(target)?;
        let out = Output {
            dir: target.flags.out.as_deref(),
            stem: stem(&target.config),
        };
        execute(&resolved, command, &target.flags, corollary, &out)
    };
    match &cli.command {
        Sub::Describe(t) => single(t, Command::Describe, None),
        Sub::Check { target, corollary } => single(target, Command::Check, *corollary),
        Sub::Oracle(t) => single(t, Command::Oracle, None),
        Sub::Extend(t) => single(t, Command::Extend, None),
        Sub::Run(t) => {
            let Some(dir) = t.flags.out.as_deref() else {
                return Err(CliError::Usage(
                    "run writes one report per command and needs --out DIR".into(),
                ));
            };
            let resolved = load(t)?;
            let out = Output {
                dir: Some(dir),
                stem: stem(&t.config),
            };
            for &command in &resolved.run.commands {
                execute(&resolved, command, &t.flags, None, &out)?;
            }
            Ok(())
        }
        Sub::CrossValidate { dir, flags } => {
            let body = commands::cross_validate(dir, &flags.overrides())?;
            let out = Output {
                dir: flags.out.as_deref(),
                stem: "corpus".into(),
            };
            out.report("cross-validate", None, body)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = std::panic::catch_unwind(|| dispatch(cli)).unwrap_or_else(|_| {
        Err(CliError::Internal(
            "unexpected failure; see the message above".into(),
        ))
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
