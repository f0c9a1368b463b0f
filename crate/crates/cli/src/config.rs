//! Run configuration: a flat `key = value` file merged with command-line
//! flags. Lines starting with `#` and blank lines are ignored.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use fracdyn::specfun::FracOrder;

use crate::error::CliError;
use crate::Common;

pub const DEFAULT_STEP: f64 = 1.0 / 256.0;
pub const DEFAULT_HORIZON: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: String,
    pub alpha: Option<f64>,
    /// Discount rate, when one was given.
    pub rho: Option<f64>,
    /// Model and operator parameters not covered by a dedicated field.
    pub params: BTreeMap<String, String>,
    pub grid_step: f64,
    pub horizon: f64,
    pub output: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub seed: u64,
    pub strict_paper: bool,
}

/// Parses `1/256`, `0.5`, `1e-3`.
pub fn parse_real(s: &str) -> Result<f64, CliError> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let num: f64 = a.trim().parse().map_err(|_| CliError::input(format!("bad number '{s}'")))?;
            let den: f64 = b.trim().parse().map_err(|_| CliError::input(format!("bad number '{s}'")))?;
            num / den
        }
        None => s.parse().map_err(|_| CliError::input(format!("bad number '{s}'")))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::input(format!("number '{s}' is not finite")))
    }
}

fn parse_bool(s: &str) -> Result<bool, CliError> {
    match s.trim() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        other => Err(CliError::input(format!("bad boolean '{other}'"))),
    }
}

/// Splits config text into keys and values, rejecting malformed lines and
/// duplicate keys with their line numbers.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| CliError::input(format!("line {}: expected key = value", i + 1)))?;
        let k = k.trim();
        if k.is_empty() || !k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(CliError::input(format!("line {}: bad key '{k}'", i + 1)));
        }
        if out.insert(k.to_string(), v.trim().to_string()).is_some() {
            return Err(CliError::input(format!("line {}: duplicate key '{k}'", i + 1)));
        }
    }
    Ok(out)
}

impl RunConfig {
    pub fn from_flags(command: &str, common: &Common) -> Result<Self, CliError> {
        Self::build(command, BTreeMap::new(), common)
    }

    pub fn load(command: &str, path: &Path, common: &Common) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
        let kv = parse_kv(&text).map_err(|e| e.context(&path.display().to_string()))?;
        Self::build(command, kv, common)
    }

    fn build(command: &str, mut kv: BTreeMap<String, String>, common: &Common) -> Result<Self, CliError> {
        let mut take = |k: &str| kv.remove(k);
        let alpha = take("alpha").map(|s| parse_real(&s)).transpose()?;
        let rho = take("rho").map(|s| parse_real(&s)).transpose()?;
        let grid_step = take("grid_step").map(|s| parse_real(&s)).transpose()?;
        let horizon = take("horizon").map(|s| parse_real(&s)).transpose()?;
        let seed = take("seed").map(|s| s.parse::<u64>().map_err(|_| CliError::input(format!("bad seed '{s}'")))).transpose()?;
        let strict = take("strict_paper").map(|s| parse_bool(&s)).transpose()?;
        let output = take("output").map(PathBuf::from);
        let summary = take("summary").map(PathBuf::from);
        let cfg = RunConfig {
            command: command.to_string(),
            alpha: common.alpha.or(alpha),
            rho: common.rho.or(rho),
            params: kv,
            grid_step: match &common.grid_step {
                Some(s) => parse_real(s)?,
                None => grid_step.unwrap_or(DEFAULT_STEP),
            },
            horizon: common.horizon.or(horizon).unwrap_or(DEFAULT_HORIZON),
            output: common.output.clone().or(output),
            summary,
            seed: common.seed.or(seed).unwrap_or(0),
            strict_paper: common.strict_paper || strict.unwrap_or(false),
        };
        if !(cfg.rho() >= 0.0) {
            return Err(CliError::input(format!("rho must be nonnegative, got {}", cfg.rho())));
        }
        if !(cfg.grid_step > 0.0) || !(cfg.horizon > 0.0) {
            return Err(CliError::input("grid step and horizon must be positive"));
        }
        Ok(cfg)
    }

    /// Discount rate, 0 when none was given.
    pub fn rho(&self) -> f64 {
        self.rho.unwrap_or(0.0)
    }

    pub fn alpha(&self) -> Result<f64, CliError> {
        self.alpha.ok_or_else(|| CliError::input("--alpha is required"))
    }

    /// The order as a `FracOrder`: (0, 1), or exactly 1 for classical mode.
    pub fn order(&self) -> Result<FracOrder, CliError> {
        let a = self.alpha()?;
        FracOrder::new_or_classical(a).map_err(|_| CliError::input(format!("alpha must lie in (0, 1) or equal 1, got {a}")))
    }

    pub fn real(&self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.params.get(key) {
            Some(s) => parse_real(s).map_err(|e| e.context(key)),
            None => Ok(default),
        }
    }

    pub fn text(&self, key: &str) -> Option<&str> {
        self.params.get(key).map(String::as_str)
    }

    /// Fails on parameters that no part of the run consumed.
    pub fn reject_unknown(&self, known: &[&str]) -> Result<(), CliError> {
        match self.params.keys().find(|k| !known.contains(&k.as_str())) {
            Some(k) => Err(CliError::input(format!("unknown config key '{k}'"))),
            None => Ok(()),
        }
    }
}
