//! Result records and their JSON / CSV encodings.
//!
//! JSON fields are written in a fixed order and floats with 17 significant
//! digits (`{:.16e}`), so records from identical runs are byte-identical.

use std::io::Write;

use qnsc_core::analytics::{Probability, SystemParams};
use qnsc_core::montecarlo::Tally;

use crate::error::CliError;

/// First line of every CSV file.
pub const CSV_SCHEMA: &str = "# schema: qnsc-result-csv/1";

pub const CSV_COLUMNS: [&str; 18] = [
    "scenario",
    "M",
    "J",
    "alpha_sq",
    "sigma_ho",
    "sigma_he",
    "trials",
    "bob_mc",
    "bob_ci",
    "bob_analytic_paper",
    "bob_analytic_exact",
    "eve_mc",
    "eve_ci",
    "eve_analytic_paper",
    "srm_error",
    "masking_ratio",
    "w_channel_hz",
    "seed",
];

/// Normal quantile for the reported 95 % Wilson intervals.
pub const CI_Z: f64 = 1.959_963_984_540_054;

pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".into()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub trials: u64,
    pub events: u64,
    pub rate: f64,
    pub ci_half_width: f64,
}

impl From<Tally> for McEstimate {
    fn from(t: Tally) -> Self {
        McEstimate {
            trials: t.trials,
            events: t.events,
            rate: t.rate(),
            ci_half_width: t.wilson_half_width(CI_Z),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub scenario: String,
    pub params: SystemParams,
    pub trials: u64,
    pub master_seed: u64,
    pub shards: usize,
    pub bob_mc: McEstimate,
    pub bob_analytic_paper: Probability,
    pub bob_analytic_sign_rule: Probability,
    pub bob_analytic_exact: Probability,
    /// Absent when `J` is odd.
    pub eve_mc: Option<McEstimate>,
    pub eve_analytic_paper: Probability,
    pub eve_analytic_chord: Probability,
    pub eve_analytic_exact: Probability,
    pub srm_error: f64,
    pub masking_ratio: f64,
    pub masking_satisfied: bool,
    pub w_cppm_hz: f64,
    pub w_channel_hz: f64,
    pub w_channel_min_hz: f64,
    pub channel_bound_ok: bool,
    pub block_length_bits: f64,
    pub key_capacity_log2: f64,
    pub rld_crb: f64,
    pub code_version: String,
    pub wall_time_s: Option<f64>,
}

/// Minimal ordered JSON object writer.
pub struct JsonObject {
    indent: usize,
    fields: Vec<(String, String)>,
}

impl JsonObject {
    pub fn new(indent: usize) -> Self {
        JsonObject {
            indent,
            fields: Vec::new(),
        }
    }

    fn raw(&mut self, key: &str, value: String) -> &mut Self {
        self.fields.push((key.into(), value));
        self
    }

    /// Strings are restricted to characters that need no escaping.
    pub fn str(&mut self, key: &str, value: &str) -> &mut Self {
        debug_assert!(value.chars().all(|c| c != '"' && c != '\\' && !c.is_control()));
        self.raw(key, format!("\"{value}\""))
    }

    pub fn num(&mut self, key: &str, value: f64) -> &mut Self {
        self.raw(key, fmt_f64(value))
    }

    pub fn int(&mut self, key: &str, value: u64) -> &mut Self {
        self.raw(key, value.to_string())
    }

    pub fn bool(&mut self, key: &str, value: bool) -> &mut Self {
        self.raw(key, value.to_string())
    }

    pub fn null(&mut self, key: &str) -> &mut Self {
        self.raw(key, "null".into())
    }

    pub fn object(&mut self, key: &str, build: impl FnOnce(&mut JsonObject)) -> &mut Self {
        let mut inner = JsonObject::new(self.indent + 2);
        build(&mut inner);
        self.raw(key, inner.render())
    }

    pub fn render(&self) -> String {
        let pad = " ".repeat(self.indent + 2);
        let body: Vec<String> = self.fields.iter().map(|(k, v)| format!("{pad}\"{k}\": {v}")).collect();
        format!("{{\n{}\n{}}}", body.join(",\n"), " ".repeat(self.indent))
    }
}

fn probability(o: &mut JsonObject, p: Probability) {
    o.num("value", p.value()).bool("underflow", p.underflowed());
}

fn estimate(o: &mut JsonObject, e: &McEstimate) {
    o.int("trials", e.trials)
        .int("events", e.events)
        .num("rate", e.rate)
        .num("ci_half_width", e.ci_half_width);
}

impl ResultRecord {
    pub fn to_json(&self) -> String {
        let p = &self.params;
        let mut o = JsonObject::new(0);
        o.str("scenario", &self.scenario)
            .str("code_version", &self.code_version)
            .object("params", |q| {
                q.int("M", p.m_modes as u64)
                    .int("J", p.j_phases)
                    .num("alpha_sq", p.alpha_sq)
                    .num("sigma_ho", p.sigma_ho)
                    .num("sigma_he", p.sigma_he)
                    .num("b_base_hz", p.b_base)
                    .num("lambda", p.lambda_factor)
                    .num("b_s_hz", p.b_s)
                    .int("key_bits", p.key_bits as u64);
            })
            .int("trials", self.trials)
            .int("seed", self.master_seed)
            .int("shards", self.shards as u64)
            .object("bob_mc", |q| estimate(q, &self.bob_mc))
            .object("bob_analytic_paper", |q| probability(q, self.bob_analytic_paper))
            .object("bob_analytic_sign_rule", |q| {
                probability(q, self.bob_analytic_sign_rule)
            })
            .object("bob_analytic_exact", |q| probability(q, self.bob_analytic_exact));
        match &self.eve_mc {
            Some(e) => o.object("eve_mc", |q| estimate(q, e)),
            None => o.null("eve_mc"),
        };
        o.object("eve_analytic_paper", |q| probability(q, self.eve_analytic_paper))
            .object("eve_analytic_chord", |q| probability(q, self.eve_analytic_chord))
            .object("eve_analytic_exact", |q| probability(q, self.eve_analytic_exact))
            .num("srm_error", self.srm_error)
            .num("masking_ratio", self.masking_ratio)
            .bool("masking_satisfied", self.masking_satisfied)
            .num("w_cppm_hz", self.w_cppm_hz)
            .num("w_channel_hz", self.w_channel_hz)
            .num("w_channel_min_hz", self.w_channel_min_hz)
            .bool("channel_bound_ok", self.channel_bound_ok)
            .num("block_length_bits", self.block_length_bits)
            .num("key_capacity_log2", self.key_capacity_log2)
            .num("rld_crb", self.rld_crb);
        match self.wall_time_s {
            Some(t) => o.num("wall_time_s", t),
            None => o.null("wall_time_s"),
        };
        o.render() + "\n"
    }

    pub fn csv_row(&self) -> Vec<String> {
        let p = &self.params;
        let (eve_mc, eve_ci) = match &self.eve_mc {
            Some(e) => (fmt_f64(e.rate), fmt_f64(e.ci_half_width)),
            None => (String::new(), String::new()),
        };
        vec![
            self.scenario.clone(),
            p.m_modes.to_string(),
            p.j_phases.to_string(),
            fmt_f64(p.alpha_sq),
            fmt_f64(p.sigma_ho),
            fmt_f64(p.sigma_he),
            self.trials.to_string(),
            fmt_f64(self.bob_mc.rate),
            fmt_f64(self.bob_mc.ci_half_width),
            fmt_f64(self.bob_analytic_paper.value()),
            fmt_f64(self.bob_analytic_exact.value()),
            eve_mc,
            eve_ci,
            fmt_f64(self.eve_analytic_paper.value()),
            fmt_f64(self.srm_error),
            fmt_f64(self.masking_ratio),
            fmt_f64(self.w_channel_hz),
            self.master_seed.to_string(),
        ]
    }
}

/// Write the schema line, the header and one row per record.
pub fn write_csv<W: Write>(out: W, records: &[ResultRecord]) -> Result<(), CliError> {
    let mut out = out;
    let fail = |e: std::io::Error| CliError::Io {
        path: "<csv>".into(),
        source: e,
    };
    writeln!(out, "{CSV_SCHEMA}").map_err(fail)?;
    let mut w = csv::Writer::from_writer(out);
    let csv_fail = |e: csv::Error| CliError::Io {
        path: "<csv>".into(),
        source: e.into(),
    };
    w.write_record(CSV_COLUMNS).map_err(csv_fail)?;
    for r in records {
        w.write_record(r.csv_row()).map_err(csv_fail)?;
    }
    w.flush().map_err(fail)
}
