use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "stla", version, about = "Small-time local attainability of smooth targets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify the base point and print the matrices, margins and witness.
    Analyze(AnalyzeArgs),
    /// Integrate a single-switch trajectory and fit the Taylor residual orders.
    Simulate(SimulateArgs),
    /// Brute-force minimum times along offsets from the base point.
    Mintime(MintimeArgs),
    /// Check the second-order margin over a box around the base point.
    Scan(ScanArgs),
    /// List the built-in examples.
    Examples(ExamplesArgs),
}

#[derive(Debug, Args)]
#[group(id = "source", required = true, multiple = false)]
pub struct Source {
    /// Built-in example (ex1..ex6).
    #[arg(long, group = "source")]
    pub example: Option<String>,
    /// JSON problem file.
    #[arg(long, group = "source")]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Common {
    #[command(flatten)]
    pub source: Source,
    /// Base point override, comma separated; the level becomes u(point).
    #[arg(long, value_name = "CSV", allow_hyphen_values = true)]
    pub point: Option<String>,
    /// Relative tolerance for tangency, Petrov and margin tests.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Output directory for report files.
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
    /// Print JSON instead of the text report.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub common: Common,
    /// Also evaluate the term-by-term form of the sufficient condition.
    #[arg(long)]
    pub literal_form: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Switch time; the trajectory runs on [0, 2t].
    #[arg(long, default_value_t = 0.1)]
    pub t: f64,
    /// RK4 step (lowered so that the switch lands on a grid node).
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    /// First control: a CSV vector, or a label/index for general systems.
    #[arg(long, allow_hyphen_values = true, requires = "a2", conflicts_with = "witness")]
    pub a1: Option<String>,
    /// Second control.
    #[arg(long, allow_hyphen_values = true, requires = "a1", conflicts_with = "witness")]
    pub a2: Option<String>,
    /// Use the classifier's controls (the default when no controls are given).
    #[arg(long)]
    pub witness: bool,
}

#[derive(Debug, Args)]
pub struct MintimeArgs {
    #[command(flatten)]
    pub common: Common,
    /// Offsets LO:HI:N, log-spaced.
    #[arg(long, default_value = "1e-4:1e-1:8")]
    pub deltas: String,
    /// `normal`, signed axes such as `+z` or `-e2`, or one CSV vector.
    #[arg(long, default_value = "normal", allow_hyphen_values = true)]
    pub dirs: String,
    #[arg(long, default_value_t = 2.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub common: Common,
    /// Half-width of the box.
    #[arg(long = "box", default_value_t = 0.1)]
    pub radius: f64,
    /// Points per axis.
    #[arg(long, default_value_t = 5)]
    pub grid: usize,
    /// Required margin; defaults to half the witness margin at the base point.
    #[arg(long)]
    pub rho: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ExamplesArgs {
    #[arg(long)]
    pub json: bool,
}

pub fn parse_csv(text: &str, what: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("{what}: `{s}` is not a finite number"))
        })
        .collect()
}

/// `LO:HI:N` as a decreasing list.
pub fn parse_deltas(text: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || format!("--deltas expects LO:HI:N, got `{text}`");
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) || n == 0 || (n > 1 && hi == lo) {
        return Err(format!("--deltas needs 0 < LO < HI and N >= 1, got `{text}`"));
    }
    let mut v = stla_core::mintime::log_space(lo, hi, n).map_err(|e| e.to_string())?;
    v.reverse();
    Ok(v)
}

/// Directions from `normal`, signed axis tokens, or one numeric vector.
pub fn parse_dirs(text: &str, vars: &[String], normal: Option<&[f64]>) -> Result<Vec<Vec<f64>>, String> {
    let n = vars.len();
    if let Ok(v) = parse_csv(text, "--dirs") {
        if v.len() != n {
            return Err(format!("--dirs vector has {} entries, system has {n}", v.len()));
        }
        return Ok(vec![v]);
    }
    text.split(',')
        .map(|tok| {
            let tok = tok.trim();
            if tok == "normal" {
                return normal
                    .map(<[f64]>::to_vec)
                    .ok_or_else(|| "--dirs normal needs a nonzero gradient at the base point".to_string());
            }
            let (sign, name) = match tok.split_at_checked(1) {
                Some(("+", rest)) => (1.0, rest),
                Some(("-", rest)) => (-1.0, rest),
                _ => (1.0, tok),
            };
            let idx = vars
                .iter()
                .position(|v| v == name)
                .or_else(|| name.strip_prefix('e').and_then(|k| k.parse::<usize>().ok()).filter(|k| (1..=n).contains(k)).map(|k| k - 1))
                .ok_or_else(|| format!("--dirs: unknown direction `{tok}`"))?;
            let mut d = vec![0.0; n];
            d[idx] = sign;
            Ok(d)
        })
        .collect()
}
