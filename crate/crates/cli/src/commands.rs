use std::time::Instant;

use qnsc_core::adversary::{eve_decode_block, gram_srm_brute, srm_error_psk, PskConstellation};
use qnsc_core::analytics::{
    bandwidth_cppm, bandwidth_proposed, block_length, bob_error_exact_argmin, bob_error_paper, bob_error_sign_rule,
    eve_block_error_exact, eve_error_heterodyne, key_capacity_log2, masking_ratio, masking_satisfied, DeltaMode,
};
use qnsc_core::keystream::SecretKey;
use qnsc_core::montecarlo::{shard_rng, McPlan};
use qnsc_core::sim;
use qnsc_core::transceiver::{
    bits_to_bytes, bytes_to_bits, stream_decrypt, stream_encrypt, symbols_to_bits, uniform_block, Frame,
    PlaintextSymbol, StreamConfig,
};
use qnsc_core::{adversary, Error};

use crate::config::{ExperimentConfig, ParsedConfig};
use crate::error::CliError;
use crate::record::{fmt_f64, JsonObject, ResultRecord};

/// Offset added to the master seed for the eavesdropper simulation so its
/// streams do not coincide with the legitimate receiver's.
pub const EVE_SEED_OFFSET: u64 = 0x9E37_79B9_7F4A_7C15;

/// Largest `J` for which `srm` also runs the Gram-matrix computation.
pub const BRUTE_MAX_J: u64 = 16;

fn finite(name: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Numeric(format!("{name} evaluated to {x}")).into())
    }
}

/// Run both Monte Carlo receivers and evaluate every closed form.
pub fn cmd_simulate(cfg: &ExperimentConfig, timing: bool) -> Result<ResultRecord, CliError> {
    cfg.validate()?;
    let start = Instant::now();
    let p = cfg.params;
    let a = p.alpha_mag();
    if a == 0.0 {
        return Err(CliError::input("alpha_sq must be > 0 to simulate"));
    }
    let (m, j) = (p.m_modes, p.j_phases);
    let input = |e: Error| CliError::input(e.to_string());

    let plan = McPlan::new(cfg.trials, cfg.master_seed, cfg.shards);
    let bob = sim::bob_symbol_error(&plan, m, a, p.sigma_ho, Some(j)).map_err(input)?;
    let eve = if j % 2 == 0 {
        let eve_plan = McPlan::new(cfg.trials, cfg.master_seed.wrapping_add(EVE_SEED_OFFSET), cfg.shards);
        Some(
            sim::eve_block_error(&eve_plan, m, a, p.sigma_he, j)
                .map_err(input)?
                .into(),
        )
    } else {
        None
    };

    let srm_error = finite("srm_error", srm_error_psk(&PskConstellation::new(a, j)?, m)?)?;
    let bw = bandwidth_proposed(&p);
    let record = ResultRecord {
        scenario: cfg.scenario.clone(),
        params: p,
        trials: cfg.trials,
        master_seed: cfg.master_seed,
        shards: cfg.shards,
        bob_mc: bob.into(),
        bob_analytic_paper: bob_error_paper(&p),
        bob_analytic_sign_rule: bob_error_sign_rule(&p),
        bob_analytic_exact: bob_error_exact_argmin(&p),
        eve_mc: eve,
        eve_analytic_paper: eve_error_heterodyne(&p, DeltaMode::Paper),
        eve_analytic_chord: eve_error_heterodyne(&p, DeltaMode::Chord),
        eve_analytic_exact: eve_block_error_exact(&p),
        srm_error,
        masking_ratio: masking_ratio(&p),
        masking_satisfied: masking_satisfied(&p),
        w_cppm_hz: bandwidth_cppm(&p),
        w_channel_hz: bw.w_channel,
        w_channel_min_hz: bw.minimum,
        channel_bound_ok: bw.satisfies_bound(),
        block_length_bits: block_length(&p),
        key_capacity_log2: key_capacity_log2(&p),
        rld_crb: adversary::rld_crb(a),
        code_version: env!("CARGO_PKG_VERSION").into(),
        wall_time_s: timing.then(|| start.elapsed().as_secs_f64()),
    };
    for (name, prob) in [
        ("bob_analytic_paper", record.bob_analytic_paper),
        ("bob_analytic_sign_rule", record.bob_analytic_sign_rule),
        ("bob_analytic_exact", record.bob_analytic_exact),
        ("eve_analytic_paper", record.eve_analytic_paper),
        ("eve_analytic_chord", record.eve_analytic_chord),
        ("eve_analytic_exact", record.eve_analytic_exact),
    ] {
        finite(name, prob.value())?;
    }
    Ok(record)
}

/// Simulate every `(J, M, alpha_sq)` grid point, in lexicographic order.
pub fn cmd_sweep(parsed: &ParsedConfig) -> Result<Vec<ResultRecord>, CliError> {
    let points = parsed.axes.points();
    if points.is_empty() {
        return Err(CliError::input("sweep range is empty"));
    }
    points
        .into_iter()
        .map(|(j, m, alpha_sq)| {
            let mut cfg = parsed.config.clone();
            cfg.params.j_phases = j;
            cfg.params.m_modes = m;
            cfg.params.alpha_sq = alpha_sq;
            cmd_simulate(&cfg, false)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SrmReport {
    pub j: u64,
    pub alpha_sq: f64,
    pub m: usize,
    pub per_mode_error: f64,
    pub error: f64,
    /// Gram-matrix route, `J <= 16` only: `(per-mode, M-mode)`.
    pub brute: Option<(f64, f64)>,
}

/// Agreement required between the two square-root-measurement routes.
pub const SRM_CROSS_TOL: f64 = 1e-10;

pub fn cmd_srm(j: u64, alpha_sq: f64, m: usize) -> Result<SrmReport, CliError> {
    if !(alpha_sq.is_finite() && alpha_sq >= 0.0) {
        return Err(CliError::input(format!(
            "alpha_sq must be finite and >= 0, got {alpha_sq}"
        )));
    }
    if m == 0 {
        return Err(CliError::input("M must be at least 1"));
    }
    let c = PskConstellation::new(alpha_sq.sqrt(), j).map_err(|e| CliError::input(e.to_string()))?;
    let per_mode_error = srm_error_psk(&c, 1)?;
    let error = srm_error_psk(&c, m)?;
    let brute = if j <= BRUTE_MAX_J {
        let p1 = gram_srm_brute(&c.states())?;
        let pm = -(m as f64 * (-p1).ln_1p()).exp_m1();
        if (p1 - per_mode_error).abs() > SRM_CROSS_TOL || (pm - error).abs() > SRM_CROSS_TOL {
            return Err(Error::Numeric(format!(
                "SRM routes disagree: series {per_mode_error}, Gram matrix {p1}"
            ))
            .into());
        }
        Some((p1, pm))
    } else {
        None
    };
    Ok(SrmReport {
        j,
        alpha_sq,
        m,
        per_mode_error,
        error,
        brute,
    })
}

impl SrmReport {
    pub fn to_json(&self) -> String {
        let mut o = JsonObject::new(0);
        o.int("J", self.j)
            .num("alpha_sq", self.alpha_sq)
            .int("M", self.m as u64)
            .num("per_mode_error", self.per_mode_error)
            .num("error", self.error);
        match self.brute {
            Some((p1, pm)) => o.num("brute_per_mode_error", p1).num("brute_error", pm).num(
                "max_abs_diff",
                (p1 - self.per_mode_error).abs().max((pm - self.error).abs()),
            ),
            None => o.null("brute_per_mode_error").null("brute_error").null("max_abs_diff"),
        };
        o.render() + "\n"
    }
}

/// Parse a 256-bit key written as 64 lowercase hex digits.
pub fn parse_key(text: &str) -> Result<SecretKey, CliError> {
    let t = text.trim();
    if t.len() != 64 || !t.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b)) {
        return Err(CliError::input("key must be 64 lowercase hex digits"));
    }
    let bytes = hex::decode(t).map_err(|e| CliError::input(e.to_string()))?;
    SecretKey::new(bytes).map_err(|e| CliError::input(e.to_string()))
}

pub fn stream_config(cfg: &ExperimentConfig) -> Result<StreamConfig, CliError> {
    cfg.validate()?;
    let (m, j) = cfg.stream_shape();
    StreamConfig::new(m, j, cfg.params.alpha_mag()).map_err(|e| CliError::input(e.to_string()))
}

/// Encrypt `plain` into serialized frame bytes.
pub fn cmd_encrypt(plain: &[u8], cfg: &ExperimentConfig, key: &SecretKey) -> Result<Vec<u8>, CliError> {
    let sc = stream_config(cfg)?;
    Ok(stream_encrypt(&bytes_to_bits(plain), sc, key)?.to_bytes())
}

fn read_frame(bytes: &[u8]) -> Result<Frame, CliError> {
    Frame::from_bytes(bytes).map_err(|e| CliError::input(e.to_string()))
}

/// Decrypt serialized frame bytes with homodyne noise `sigma_ho`.
pub fn cmd_decrypt(frame: &[u8], key: &SecretKey, sigma_ho: f64, seed: u64) -> Result<Vec<u8>, CliError> {
    if !(sigma_ho.is_finite() && sigma_ho >= 0.0) {
        return Err(CliError::input(format!(
            "sigma_ho must be finite and >= 0, got {sigma_ho}"
        )));
    }
    let frame = read_frame(frame)?;
    let bits = stream_decrypt(&frame, key, sigma_ho, &mut shard_rng(seed, 0))?;
    bits_to_bytes(&bits).map_err(|e| CliError::input(e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackReport {
    pub symbols: usize,
    pub bits: usize,
    pub bits_recovered: usize,
    pub rate: f64,
    /// Binomial standard deviation of the rate under pure chance.
    pub sigma_chance: f64,
    pub within_3_sigma_of_chance: bool,
}

/// Keyless interception: heterodyne every mode, derandomize with a guessed
/// running key and take the mode closest to phase π as the symbol. Reports
/// the fraction of plaintext bits recovered.
pub fn cmd_attack(frame: &[u8], plain: &[u8], sigma_he: f64, seed: u64) -> Result<AttackReport, CliError> {
    if !(sigma_he.is_finite() && sigma_he >= 0.0) {
        return Err(CliError::input(format!(
            "sigma_he must be finite and >= 0, got {sigma_he}"
        )));
    }
    let frame = read_frame(frame)?;
    let sc = frame.config;
    let (m, j) = (sc.m, sc.j);
    let mut rng = shard_rng(seed, 0);
    let symbols: Vec<PlaintextSymbol> = frame
        .codewords
        .iter()
        .map(|cw| {
            let seen = eve_decode_block(cw, j, sigma_he, &mut rng);
            let guess = uniform_block(m, j, &mut rng);
            let off_pi = |k: usize| {
                let d = (seen[k] + j - guess.indices()[k]) % j;
                d.abs_diff(j / 2)
            };
            let k = (0..m).min_by_key(|&k| off_pi(k)).expect("M >= 2");
            PlaintextSymbol::new(k + 1, m).expect("mode in range")
        })
        .collect();
    let got = symbols_to_bits(&symbols, sc, frame.pad_bits)?;
    let truth = bytes_to_bits(plain);
    if got.len() != truth.len() {
        return Err(CliError::input(format!(
            "plaintext has {} bits, ciphertext carries {}",
            truth.len(),
            got.len()
        )));
    }
    let bits = truth.len();
    let bits_recovered = got.iter().zip(&truth).filter(|(a, b)| a == b).count();
    let rate = if bits == 0 {
        0.0
    } else {
        bits_recovered as f64 / bits as f64
    };
    let sigma_chance = 0.5 / (bits.max(1) as f64).sqrt();
    Ok(AttackReport {
        symbols: symbols.len(),
        bits,
        bits_recovered,
        rate,
        sigma_chance,
        within_3_sigma_of_chance: (rate - 0.5).abs() <= 3.0 * sigma_chance,
    })
}

impl AttackReport {
    pub fn to_json(&self) -> String {
        let mut o = JsonObject::new(0);
        o.int("symbols", self.symbols as u64)
            .int("bits", self.bits as u64)
            .int("bits_recovered", self.bits_recovered as u64)
            .num("rate", self.rate)
            .num("sigma_chance", self.sigma_chance)
            .bool("within_3_sigma_of_chance", self.within_3_sigma_of_chance);
        o.render() + "\n"
    }
}

/// One-line human summary of a record.
pub fn summary(r: &ResultRecord) -> String {
    let eve = r.eve_mc.map(|e| fmt_f64(e.rate)).unwrap_or_else(|| "n/a".into());
    format!(
        "{}: bob_mc={} eve_mc={} srm_error={} masking_ratio={}",
        r.scenario,
        fmt_f64(r.bob_mc.rate),
        eve,
        fmt_f64(r.srm_error),
        fmt_f64(r.masking_ratio)
    )
}
