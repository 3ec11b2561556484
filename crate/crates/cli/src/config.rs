//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # comment
//! scenario = lab-run-3
//! M = 10
//! J = 8, 16, 32      # comma lists are only accepted by `sweep`
//! alpha_sq = 1000
//! ```
//!
//! Unset fields take the `paper-sec5` values. Keys are case-sensitive except
//! `M`/`m` and `J`/`j`.

use std::path::{Path, PathBuf};

use qnsc_core::analytics::SystemParams;

use crate::error::CliError;

pub const PAPER_SEC5: &str = "paper-sec5";
pub const DEFAULT_TRIALS: u64 = 10_000;
pub const DEFAULT_SHARDS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: String,
    pub params: SystemParams,
    pub trials: u64,
    pub master_seed: u64,
    pub shards: usize,
    /// Extra JSON record destination written by `simulate`.
    pub json_out: Option<PathBuf>,
    /// Extra CSV destination written by `simulate` and `sweep`.
    pub csv_out: Option<PathBuf>,
    /// Stream-mode mode count; defaults to `M` rounded up to a power of two.
    pub stream_m: Option<usize>,
    /// Stream-mode phase count; defaults to `J` rounded up to a power of two.
    pub stream_j: Option<u64>,
}

impl ExperimentConfig {
    pub fn paper_sec5() -> Self {
        ExperimentConfig {
            scenario: PAPER_SEC5.into(),
            params: SystemParams::paper_sec5(),
            trials: DEFAULT_TRIALS,
            master_seed: 0,
            shards: DEFAULT_SHARDS,
            json_out: None,
            csv_out: None,
            stream_m: None,
            stream_j: None,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.trials == 0 {
            return Err(CliError::input("trials must be at least 1"));
        }
        if self.shards == 0 {
            return Err(CliError::input("shards must be at least 1"));
        }
        self.params.validate().map_err(|e| CliError::input(e.to_string()))
    }

    pub fn stream_shape(&self) -> (usize, u64) {
        let m = self.stream_m.unwrap_or(self.params.m_modes.max(2).next_power_of_two());
        let j = self.stream_j.unwrap_or(self.params.j_phases.next_power_of_two());
        (m, j)
    }
}

/// Sweep axes; each holds at least one value.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxes {
    pub j: Vec<u64>,
    pub m: Vec<usize>,
    pub alpha_sq: Vec<f64>,
}

impl SweepAxes {
    /// Grid points in lexicographic `(J, M, alpha_sq)` order.
    pub fn points(&self) -> Vec<(u64, usize, f64)> {
        let mut j = self.j.clone();
        let mut m = self.m.clone();
        let mut a = self.alpha_sq.clone();
        j.sort_unstable();
        j.dedup();
        m.sort_unstable();
        m.dedup();
        a.sort_by(f64::total_cmp);
        a.dedup();
        let mut out = Vec::with_capacity(j.len() * m.len() * a.len());
        for &jj in &j {
            for &mm in &m {
                for &aa in &a {
                    out.push((jj, mm, aa));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedConfig {
    pub config: ExperimentConfig,
    pub axes: SweepAxes,
}

fn valid_label(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c))
}

fn scalar<T: std::str::FromStr>(line: usize, field: &str, raw: &str) -> Result<T, CliError> {
    raw.parse()
        .map_err(|_| CliError::config(line, field, format!("cannot parse {raw:?}")))
}

fn list<T: std::str::FromStr>(line: usize, field: &str, raw: &str) -> Result<Vec<T>, CliError> {
    let items: Vec<&str> = raw.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(CliError::config(line, field, "empty value"));
    }
    items.into_iter().map(|s| scalar(line, field, s)).collect()
}

/// Parse configuration text. Comma lists are kept in the returned axes;
/// scalar fields use the first listed value.
pub fn parse(text: &str) -> Result<ParsedConfig, CliError> {
    let mut cfg = ExperimentConfig::paper_sec5();
    cfg.scenario = "custom".into();
    let p = cfg.params;
    let mut axes = SweepAxes {
        j: vec![p.j_phases],
        m: vec![p.m_modes],
        alpha_sq: vec![p.alpha_sq],
    };
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| CliError::config(line, content, "expected key = value"))?;
        let (key, value) = (key.trim(), value.trim());
        let p = &mut cfg.params;
        match key {
            "scenario" => {
                if !valid_label(value) {
                    return Err(CliError::config(line, key, "use letters, digits, '-', '_' or '.'"));
                }
                cfg.scenario = value.into();
            }
            "M" | "m" => {
                axes.m = list(line, key, value)?;
                p.m_modes = axes.m[0];
            }
            "J" | "j" => {
                axes.j = list(line, key, value)?;
                p.j_phases = axes.j[0];
            }
            "alpha_sq" => {
                axes.alpha_sq = list(line, key, value)?;
                p.alpha_sq = axes.alpha_sq[0];
            }
            "sigma_ho" => p.sigma_ho = scalar(line, key, value)?,
            "sigma_he" => p.sigma_he = scalar(line, key, value)?,
            "b_base" => p.b_base = scalar(line, key, value)?,
            "lambda" => p.lambda_factor = scalar(line, key, value)?,
            "b_s" => p.b_s = scalar(line, key, value)?,
            "key_bits" => p.key_bits = scalar(line, key, value)?,
            "trials" => cfg.trials = scalar(line, key, value)?,
            "seed" => cfg.master_seed = scalar(line, key, value)?,
            "shards" => cfg.shards = scalar(line, key, value)?,
            "json_out" => cfg.json_out = Some(value.into()),
            "csv_out" => cfg.csv_out = Some(value.into()),
            "stream_m" => cfg.stream_m = Some(scalar(line, key, value)?),
            "stream_j" => cfg.stream_j = Some(scalar(line, key, value)?),
            _ => return Err(CliError::config(line, key, "unknown key")),
        }
    }
    Ok(ParsedConfig { config: cfg, axes })
}

pub fn load(path: &Path) -> Result<ParsedConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text)
}
