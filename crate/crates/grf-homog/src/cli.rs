use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use crate::error::{CliError, CliResult};
use crate::io;
use crate::space::SpaceArgs;

#[derive(Parser, Debug)]
#[command(name = "grf-homog", version, about = "Bismut-Ricci-flat pairs and generalized Ricci flow on homogeneous spaces")]
pub struct Cli {
    /// Read the command and its options from a JSON file instead of flags.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Reproduce the closed-form tables and structural checks for a space.
    Verify(VerifyArgs),
    /// Solve the BRF equations on the chart of M_{p,q}.
    Brf(BrfArgs),
    /// Integrate the generalized Ricci flow on M_{p,q}.
    Flow(FlowArgs),
    /// Linearize the flow at a point (by default the BRF fixed point).
    Stability(StabilityArgs),
    /// Check the Kobayashi circle-bundle conditions and return (c, h).
    Kobayashi(KobayashiArgs),
    /// List or dump catalog spaces.
    #[command(subcommand)]
    Catalog(CatalogCommand),
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    /// Random parameter points per table comparison.
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// JSON report path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartKind {
    /// Diagonal metric for p != q, the 8-parameter chart for p = q.
    Auto,
    Diagonal,
    /// p = q with s = 0 and harmonic h3, h4 = 0.
    Equal,
    /// p = q with all of (mu, a, b, c, s, h1, h3, h4).
    Full,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaugeKind {
    /// Hold the torsion normalization coefficient fixed.
    Fix,
    /// Append |H|^2 - target to the residual.
    Pin,
    /// No scale gauge.
    Free,
}

#[derive(Args, Debug)]
pub struct BrfArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    #[arg(long, value_enum, default_value_t = ChartKind::Auto)]
    pub chart: ChartKind,
    /// Initial chart parameters (JSON array or comma separated).
    #[arg(long, conflicts_with = "multistart")]
    pub init: Option<String>,
    /// Number of random initial points.
    #[arg(long)]
    pub multistart: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
    #[arg(long, value_enum, default_value_t = GaugeKind::Fix)]
    pub gauge: GaugeKind,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// Closed-form ODE when p != q, generic field otherwise.
    Auto,
    /// Closed-form ODE in (M, A, B) (p != q only).
    Ode,
    /// Generic projected field on metric and b parameters.
    Grf,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
pub struct FlowArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Initial metric parameters: M,A,B (p != q) or M,A,B,C,S (p = q).
    #[arg(long)]
    pub init: String,
    /// Initial b parameters (defaults to zero).
    #[arg(long)]
    pub b: Option<String>,
    #[arg(long)]
    pub tmax: f64,
    /// Uniformly spaced output times in (0, tmax].
    #[arg(long, default_value_t = 400)]
    pub samples: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub rtol: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub atol: f64,
    #[arg(long, value_enum, default_value_t = ModelKind::Auto)]
    pub model: ModelKind,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct StabilityArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Point to linearize at (metric then b parameters); defaults to the fixed point.
    #[arg(long)]
    pub point: Option<String>,
    #[arg(long, value_enum, default_value_t = ModelKind::Auto)]
    pub model: ModelKind,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct KobayashiArgs {
    /// Synthetic flat-base data with this lambda (ignored with --data).
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 2.0)]
    pub mu: f64,
    /// JSON with g0, ric0 (matrices), alpha, beta (forms), lambda, mu.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum CatalogCommand {
    /// Names of the catalog entries.
    List {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Structure constants, Killing form and charts of M_{p,q}.
    Mpq {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        q: u32,
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// A bi-invariant group model.
    Group {
        #[arg(long)]
        name: String,
        #[arg(long)]
        dump: Option<PathBuf>,
    },
}

/// Turns a config document into the equivalent argument vector, so flags
/// and files go through the same validation. `"command"` holds the
/// subcommand (`"catalog mpq"` for nested ones); other keys become
/// `--key value`, with `_` read as `-`, arrays joined by commas and `true`
/// as a bare flag.
pub fn config_to_args(doc: &Value) -> CliResult<Vec<String>> {
    let obj = doc.as_object().ok_or_else(|| CliError::usage("config must be a JSON object"))?;
    let command = obj
        .get("command")
        .and_then(Value::as_str)
        .ok_or_else(|| CliError::usage("config needs a string \"command\""))?;
    let mut args = vec!["grf-homog".to_string()];
    args.extend(command.split_whitespace().map(str::to_string));
    for (key, value) in obj {
        if key == "command" {
            continue;
        }
        if key == "config" {
            return Err(CliError::usage("a config file cannot name another config"));
        }
        let flag = format!("--{}", key.replace('_', "-"));
        let scalar = |v: &Value| -> CliResult<String> {
            match v {
                Value::String(s) => Ok(s.clone()),
                Value::Number(n) => Ok(n.to_string()),
                _ => Err(CliError::usage(format!("config key {key:?} has an unsupported value {v}"))),
            }
        };
        match value {
            Value::Bool(true) => args.push(flag),
            Value::Bool(false) => {}
            Value::Array(items) => {
                args.push(flag);
                args.push(items.iter().map(scalar).collect::<CliResult<Vec<_>>>()?.join(","));
            }
            other => {
                args.push(flag);
                args.push(scalar(other)?);
            }
        }
    }
    Ok(args)
}

fn parse_from<I, T>(args: I) -> CliResult<Cli>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    Cli::try_parse_from(args).map_err(|e| CliError::usage(e.render().to_string()))
}

/// Parses flags, following `--config` when present.
pub fn load(cli: Cli) -> CliResult<Command> {
    match (cli.config, cli.command) {
        (Some(_), Some(_)) => Err(CliError::usage("use either --config or a subcommand, not both")),
        (None, None) => Err(CliError::usage("missing subcommand (try --help)")),
        (None, Some(cmd)) => Ok(cmd),
        (Some(path), None) => load_config(&path),
    }
}

pub fn load_config(path: &Path) -> CliResult<Command> {
    let doc: Value =
        serde_json::from_str(&io::read_text(path)?).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let parsed = parse_from(config_to_args(&doc)?).map_err(|e| e.context(path.display()))?;
    parsed.command.ok_or_else(|| CliError::usage("config names no command"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn config_becomes_flags() {
        let doc = json!({"command": "catalog mpq", "p": 2, "q": 1, "init": [1, "1/2"], "fast_mode": true, "off": false});
        let args = config_to_args(&doc).unwrap();
        assert_eq!(args, ["grf-homog", "catalog", "mpq", "--fast-mode", "--init", "1,1/2", "--p", "2", "--q", "1"]);
        assert!(config_to_args(&json!({"command": "verify", "config": "x.json"})).is_err());
        assert!(config_to_args(&json!({"command": 3})).is_err());
    }
}
