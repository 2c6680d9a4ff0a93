//! Sweep configuration: command-line flags layered over an optional TOML
//! file layered over per-command defaults.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use nlphase::{LossPlacement, LossSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Fringe,
    Visibility,
    Sensitivity,
    FisherRatio,
    LossBound,
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Fringe => "fringe",
            Command::Visibility => "visibility",
            Command::Sensitivity => "sensitivity",
            Command::FisherRatio => "fisher-ratio",
            Command::LossBound => "loss-bound",
            Command::Validate => "validate",
        }
    }

    fn default_n_range(self) -> &'static str {
        match self {
            Command::Fringe => "20:20:1",
            Command::Visibility => "1:80:1",
            Command::Sensitivity => "1:50:1",
            Command::FisherRatio | Command::LossBound => "1:100:1",
            Command::Validate => "1:30:1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PlacementArg {
    None,
    Before,
    After,
}

impl From<PlacementArg> for LossPlacement {
    fn from(p: PlacementArg) -> Self {
        match p {
            PlacementArg::None => LossPlacement::None,
            PlacementArg::Before => LossPlacement::BeforePhase,
            PlacementArg::After => LossPlacement::AfterPhase,
        }
    }
}

/// Flags shared by every subcommand. Unset flags fall through to the config
/// file.
#[derive(Debug, Clone, Default, Args)]
pub struct SweepArgs {
    /// Single mean photon number
    #[arg(long = "n", global = true, conflicts_with = "n_range")]
    pub n: Option<String>,
    /// Mean photon numbers `start:stop:step` (inclusive)
    #[arg(long = "n-range", global = true)]
    pub n_range: Option<String>,
    /// Nonlinear phases `start:stop:points`; `pi` expressions allowed
    #[arg(long = "phi-range", global = true, allow_hyphen_values = true)]
    pub phi_range: Option<String>,
    /// Linear phase in radians (default pi/2)
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub theta: Option<String>,
    /// Transmissivity of each arm
    #[arg(long = "loss-T", global = true)]
    pub loss_t: Option<String>,
    #[arg(long = "loss-placement", global = true, value_enum)]
    pub loss_placement: Option<PlacementArg>,
    /// Add brute-force Fock-space columns
    #[arg(long = "with-oracle", global = true)]
    pub with_oracle: bool,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// TOML file with the same keys as the long flags (underscored)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Fixed photon-number cutoff for the oracle
    #[arg(long = "n-max", global = true)]
    pub n_max: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub n: Option<Real>,
    pub n_range: Option<String>,
    pub phi_range: Option<String>,
    pub theta: Option<Real>,
    #[serde(alias = "loss_T")]
    pub loss_t: Option<Real>,
    pub loss_placement: Option<PlacementArg>,
    pub with_oracle: Option<bool>,
    pub format: Option<OutputFormat>,
    pub out: Option<PathBuf>,
    pub n_max: Option<usize>,
}

/// A number, or a string such as `"3pi/4"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Real {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    fn new(field: &str, message: impl Into<String>) -> Self {
        Self {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Fully resolved sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub command: Command,
    pub n_grid: Vec<f64>,
    pub phi_grid: Vec<f64>,
    pub theta: f64,
    pub loss: LossSpec,
    pub with_oracle: bool,
    pub format: OutputFormat,
    pub n_max: Option<usize>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl SweepConfig {
    /// Compact description for output metadata; grids are summarized.
    pub fn echo(&self) -> serde_json::Value {
        let grid = |g: &[f64]| {
            serde_json::json!({
                "first": g.first(),
                "last": g.last(),
                "points": g.len(),
            })
        };
        serde_json::json!({
            "command": self.command,
            "n": grid(&self.n_grid),
            "phi": grid(&self.phi_grid),
            "theta": self.theta,
            "loss": self.loss,
            "with_oracle": self.with_oracle,
            "format": self.format,
            "n_max": self.n_max,
        })
    }
}

/// Parses `1.5`, `pi`, `-pi/2`, `3pi/4`, `2*pi`, `0.25*pi/3`.
pub fn parse_real(text: &str) -> Result<f64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let s = s.to_ascii_lowercase();
    if s.is_empty() {
        return Err("empty value".into());
    }
    let (sign, body) = match s.as_bytes()[0] {
        b'-' => (-1.0, &s[1..]),
        b'+' => (1.0, &s[1..]),
        _ => (1.0, &s[..]),
    };
    let (numerator, denominator) = match body.split_once('/') {
        Some((a, b)) => (a, Some(b)),
        None => (body, None),
    };
    let bad = || format!("cannot parse `{text}` as a number");
    let number = |t: &str| -> Result<f64, String> {
        let v: f64 = t.parse().map_err(|_| bad())?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(bad())
        }
    };
    let mut value = match numerator.strip_suffix("pi") {
        Some(coefficient) => {
            let coefficient = coefficient.strip_suffix('*').unwrap_or(coefficient);
            if coefficient.is_empty() {
                PI
            } else {
                number(coefficient)? * PI
            }
        }
        None => number(numerator)?,
    };
    if let Some(d) = denominator {
        let d = number(d)?;
        if d == 0.0 {
            return Err(format!("division by zero in `{text}`"));
        }
        value /= d;
    }
    Ok(sign * value)
}

fn split3<'a>(field: &str, text: &'a str) -> Result<[&'a str; 3], ConfigError> {
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [a, b, c] => Ok([a, b, c]),
        _ => Err(ConfigError::new(
            field,
            format!(
                "expected `start:stop:{}`, got `{text}`",
                if field == "phi_range" {
                    "points"
                } else {
                    "step"
                }
            ),
        )),
    }
}

fn real(field: &str, text: &str) -> Result<f64, ConfigError> {
    parse_real(text).map_err(|m| ConfigError::new(field, m))
}

/// Inclusive `start:stop:step` grid of mean photon numbers.
pub fn parse_n_range(text: &str) -> Result<Vec<f64>, ConfigError> {
    let field = "n_range";
    let [a, b, c] = split3(field, text)?;
    let (start, stop, step) = (real(field, a)?, real(field, b)?, real(field, c)?);
    if start <= 0.0 {
        return Err(ConfigError::new(
            field,
            format!("mean photon numbers must be > 0, got {start}"),
        ));
    }
    if stop < start {
        return Err(ConfigError::new(
            field,
            format!("stop {stop} is below start {start}"),
        ));
    }
    if step <= 0.0 {
        return Err(ConfigError::new(
            field,
            format!("step must be > 0, got {step}"),
        ));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > 1_000_000 {
        return Err(ConfigError::new(
            field,
            format!("{count} points is too many"),
        ));
    }
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

/// `start:stop:points` grid of nonlinear phases (endpoints included).
pub fn parse_phi_range(text: &str) -> Result<Vec<f64>, ConfigError> {
    let field = "phi_range";
    let [a, b, c] = split3(field, text)?;
    let (start, stop) = (real(field, a)?, real(field, b)?);
    let points: usize = c.trim().parse().map_err(|_| {
        ConfigError::new(
            field,
            format!("point count `{c}` is not a positive integer"),
        )
    })?;
    match points {
        0 => Err(ConfigError::new(field, "grid is empty")),
        1 => Ok(vec![start]),
        _ if stop <= start => Err(ConfigError::new(
            field,
            format!("stop {stop} must exceed start {start}"),
        )),
        _ => Ok(nlphase::search::linspace(start, stop, points)),
    }
}

pub fn load_file(path: &Path) -> Result<FileConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new("config", format!("{}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| ConfigError::new("config", format!("{}: {e}", path.display())))
}

fn file_real(field: &str, value: &Real) -> Result<f64, ConfigError> {
    match value {
        Real::Number(v) => Ok(*v),
        Real::Text(t) => real(field, t),
    }
}

impl SweepConfig {
    /// Flags win over the file, the file over the defaults.
    pub fn resolve(command: Command, args: &SweepArgs) -> Result<Self, ConfigError> {
        let file = match &args.config {
            Some(path) => load_file(path)?,
            None => FileConfig::default(),
        };
        Self::from_layers(command, args, &file)
    }

    pub fn from_layers(
        command: Command,
        args: &SweepArgs,
        file: &FileConfig,
    ) -> Result<Self, ConfigError> {
        let n_grid = match (&args.n, &args.n_range) {
            (Some(n), _) => vec![real("n", n)?],
            (None, Some(r)) => parse_n_range(r)?,
            (None, None) => match (&file.n, &file.n_range) {
                (Some(_), Some(_)) => {
                    return Err(ConfigError::new(
                        "n",
                        "set either `n` or `n_range`, not both",
                    ))
                }
                (Some(n), None) => vec![file_real("n", n)?],
                (None, Some(r)) => parse_n_range(r)?,
                (None, None) => parse_n_range(command.default_n_range())?,
            },
        };
        if let Some(&bad) = n_grid.iter().find(|&&n| n.is_nan() || n <= 0.0) {
            return Err(ConfigError::new(
                "n",
                format!("mean photon number must be > 0, got {bad}"),
            ));
        }

        let phi_grid = parse_phi_range(
            args.phi_range
                .as_deref()
                .or(file.phi_range.as_deref())
                .unwrap_or("-pi/2:pi/2:2001"),
        )?;

        let theta = match (&args.theta, &file.theta) {
            (Some(t), _) => real("theta", t)?,
            (None, Some(t)) => file_real("theta", t)?,
            (None, None) => PI / 2.0,
        };

        let transmissivity = match (&args.loss_t, &file.loss_t) {
            (Some(t), _) => Some(real("loss_T", t)?),
            (None, Some(t)) => Some(file_real("loss_T", t)?),
            (None, None) => None,
        };
        let placement = args.loss_placement.or(file.loss_placement);
        let loss = match (transmissivity, placement) {
            (None, None) | (None, Some(PlacementArg::None)) => LossSpec::none(),
            (Some(_), None) => {
                return Err(ConfigError::new(
                    "loss_placement",
                    "required when `loss_T` is set",
                ))
            }
            (Some(t), Some(PlacementArg::None)) if t != 1.0 => {
                return Err(ConfigError::new(
                    "loss_placement",
                    "`none` contradicts `loss_T` below 1",
                ))
            }
            (Some(_), Some(PlacementArg::None)) => LossSpec::none(),
            (None, Some(_)) => {
                return Err(ConfigError::new(
                    "loss_T",
                    "required when a loss placement is set",
                ))
            }
            (Some(t), Some(p)) => {
                if !(t > 0.0 && t <= 1.0) {
                    return Err(ConfigError::new(
                        "loss_T",
                        format!("must lie in (0, 1], got {t}"),
                    ));
                }
                LossSpec::new(t, p.into()).map_err(|e| ConfigError::new("loss_T", e.to_string()))?
            }
        };

        let n_max = args.n_max.or(file.n_max);
        if n_max == Some(0) {
            return Err(ConfigError::new("n_max", "must be positive"));
        }

        Ok(Self {
            command,
            n_grid,
            phi_grid,
            theta,
            loss,
            with_oracle: args.with_oracle || file.with_oracle.unwrap_or(false),
            format: args.format.or(file.format).unwrap_or_default(),
            n_max,
            out: args.out.clone().or_else(|| file.out.clone()),
        })
    }
}
