//! Command-line sweeps over the nonlinear phase estimation model.

pub mod config;
pub mod sweeps;
pub mod table;
pub mod validate;

use std::fs::File;
use std::io::{BufWriter, Write};

use clap::{Parser, Subcommand};

use config::{Command, ConfigError, SweepArgs, SweepConfig};
use table::Table;

#[derive(Debug, Parser)]
#[command(
    name = "nlphase",
    version,
    about = "Sweeps and validation for second-order nonlinear phase estimation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArg,
    #[command(flatten)]
    pub args: SweepArgs,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum CommandArg {
    /// Expectation value against the nonlinear phase
    Fringe,
    /// Fringe visibility against N
    Visibility,
    /// Optimal homodyne sensitivity against N, with reference bounds
    Sensitivity,
    /// Fraction of the quantum Fisher information reached
    FisherRatio,
    /// Allowable maximum loss against N
    LossBound,
    /// Oracle checks of every closed form
    Validate,
}

impl From<CommandArg> for Command {
    fn from(c: CommandArg) -> Self {
        match c {
            CommandArg::Fringe => Command::Fringe,
            CommandArg::Visibility => Command::Visibility,
            CommandArg::Sensitivity => Command::Sensitivity,
            CommandArg::FisherRatio => Command::FisherRatio,
            CommandArg::LossBound => Command::LossBound,
            CommandArg::Validate => Command::Validate,
        }
    }
}

pub const EXIT_OK: u8 = 0;
pub const EXIT_INVARIANT: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Model(nlphase::Error),
    Io(std::io::Error),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "configuration error: {e}"),
            RunError::Model(e) => write!(f, "error: {e}"),
            RunError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) | RunError::Model(nlphase::Error::InvalidParameter { .. }) => {
                EXIT_CONFIG
            }
            _ => EXIT_INVARIANT,
        }
    }
}

impl From<nlphase::Error> for RunError {
    fn from(e: nlphase::Error) -> Self {
        RunError::Model(e)
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

pub struct Outcome {
    pub table: Table,
    pub invariant_failure: bool,
}

pub fn execute(config: &SweepConfig) -> Result<Outcome, RunError> {
    let mut invariant_failure = false;
    let mut table = match config.command {
        Command::Fringe => sweeps::fringe(config)?,
        Command::Visibility => sweeps::visibility(config)?,
        Command::Sensitivity => sweeps::sensitivity(config)?,
        Command::FisherRatio => sweeps::fisher_ratio(config)?,
        Command::LossBound => sweeps::loss_bound(config)?,
        Command::Validate => {
            let report = validate::run_validate(config)?;
            invariant_failure = report.failed();
            report.to_table()
        }
    };
    let mut meta = vec![
        (
            "nlphase".to_string(),
            table::Cell::from(env!("CARGO_PKG_VERSION")),
        ),
        ("command".to_string(), config.command.name().into()),
        ("config".to_string(), config.echo().to_string().into()),
    ];
    meta.append(&mut table.meta);
    table.meta = meta;
    Ok(Outcome {
        table,
        invariant_failure,
    })
}

/// Resolves, runs and writes; returns the process exit code.
pub fn run(cli: &Cli) -> u8 {
    let config = match SweepConfig::resolve(cli.command.into(), &cli.args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}", RunError::Config(e));
            return EXIT_CONFIG;
        }
    };
    let result = execute(&config).and_then(|outcome| {
        match &config.out {
            Some(path) => {
                let mut w = BufWriter::new(File::create(path)?);
                outcome.table.write(config.format, &mut w)?;
                w.flush()?;
            }
            None => outcome
                .table
                .write(config.format, std::io::stdout().lock())?,
        }
        Ok(outcome.invariant_failure)
    });
    match result {
        Ok(false) => EXIT_OK,
        Ok(true) => {
            eprintln!("validate: hard invariant failure");
            EXIT_INVARIANT
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
