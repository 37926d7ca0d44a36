use std::fmt;

use serde::Serialize;
use serde_json::Value;

use crate::args::{Cli, Command, Format};

mod gg;
mod rate;
mod stein;
mod transform;
mod tree;
mod urn;
mod walk;

/// Cap on Monte Carlo sample counts.
pub const MAX_SAMPLES: u64 = 100_000_000;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Output of one command: the artifact text and its self-checks.
#[derive(Debug)]
pub struct Report {
    pub stem: String,
    pub format: Format,
    pub body: String,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn json(stem: &str, value: &Value, checks: Vec<Check>) -> Self {
        let mut body = serde_json::to_string_pretty(value).expect("json values serialize");
        body.push('\n');
        Self {
            stem: stem.into(),
            format: Format::Json,
            body,
            checks,
        }
    }

    pub fn csv(stem: &str, body: String, checks: Vec<Check>) -> Self {
        Self {
            stem: stem.into(),
            format: Format::Csv,
            body,
            checks,
        }
    }

    pub fn extension(&self) -> &'static str {
        match self.format {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug)]
pub enum Failure {
    Invalid(String),
    Resource(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Resource(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Invalid(m) => write!(f, "invalid configuration: {m}"),
            Failure::Resource(m) => write!(f, "{m}"),
        }
    }
}

impl From<urnflow::Error> for Failure {
    fn from(e: urnflow::Error) -> Self {
        match e {
            urnflow::Error::ResourceLimit(_) => Failure::Resource(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

pub type Outcome = Result<Report, Failure>;

pub fn check_samples(samples: u64) -> Result<(), Failure> {
    if samples == 0 {
        return Err(Failure::Invalid("samples must be positive".into()));
    }
    if samples > MAX_SAMPLES {
        return Err(Failure::Resource(format!("resource limit exceeded: at most {MAX_SAMPLES} samples")));
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Outcome {
    let seed = cli.seed;
    match &cli.command {
        Command::Urn { cmd } => urn::run(cmd, seed),
        Command::Identity(a) => urn::identity(a),
        Command::Gg { cmd } => gg::run(cmd, seed),
        Command::Tree { cmd } => tree::run(cmd, seed),
        Command::Walk { cmd } => walk::run(cmd, seed),
        Command::Stein { cmd } => stein::run(cmd, seed),
        Command::Transform { cmd } => transform::run(cmd, seed),
        Command::Rate(a) => rate::run(a),
    }
}

/// Counts of integer draws on `lo..=hi`; draws outside are reported
/// separately.
pub fn aligned_counts(values: &[(i64, u64)], lo: i64, hi: i64) -> (Vec<u64>, u64) {
    let mut counts = vec![0u64; (hi - lo + 1) as usize];
    let mut outside = 0;
    for &(x, c) in values {
        if x < lo || x > hi {
            outside += c;
        } else {
            counts[(x - lo) as usize] += c;
        }
    }
    (counts, outside)
}

/// Chi-square check of simulated integer counts against an exact law.
pub fn fit_check(values: &[(i64, u64)], exact: &urnflow::ExactPmf<f64>) -> Result<(Value, Check), Failure> {
    let (lo, hi) = (exact.min_support(), exact.max_support());
    let (counts, outside) = aligned_counts(values, lo, hi);
    let probs: Vec<f64> = (lo..=hi).map(|x| exact.get(x)).collect();
    let chi = urnflow::stats::chi_square_gof(&counts, &probs)?;
    let passed = outside == 0 && chi.p_value > 1e-3;
    let detail = format!("p = {:.4}, df = {}, outside support = {outside}", chi.p_value, chi.df);
    Ok((serde_json::to_value(&chi).expect("plain data"), Check::new("chi-square", passed, detail)))
}

/// Nonzero `(value, count)` pairs from a histogram starting at 0.
pub fn histogram_pairs(counts: &[u64]) -> Vec<(i64, u64)> {
    counts
        .iter()
        .enumerate()
        .filter(|(_, c)| **c > 0)
        .map(|(x, c)| (x as i64, *c))
        .collect()
}

pub fn merge_counts(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    if a.len() < b.len() {
        a.resize(b.len(), 0);
    }
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

pub fn counts_json(pairs: &[(i64, u64)]) -> Value {
    Value::Array(pairs.iter().map(|(x, c)| serde_json::json!([x, c])).collect())
}
