//! Closed-form error, masking and bandwidth expressions.
//!
//! All functions are pure. Probabilities are returned as [`Probability`],
//! which reports values below [`UNDERFLOW_FLOOR`] as zero with an underflow
//! flag instead of as denormals.
//!
//! Noise scales are Gaussian standard deviations: `sigma_ho` for the
//! homodyne quadrature, `sigma_he` per heterodyne quadrature.
//!
//! The homodyne codeword error comes in three forms:
//!
//! * [`bob_error_paper`]: `1 - erf(|α| / (√2 σ_ho))^M`. Since
//!   `erf(x/√2) = 1 - 2Q(x)` this equals `1 - (1 - 2Q(|α|/σ_ho))^M`, i.e. it
//!   charges each mode twice the binary antipodal error.
//! * [`bob_error_sign_rule`]: `1 - (1 - Q(|α|/σ_ho))^M`, per-mode sign
//!   decisions with the codeword correct only if every mode is.
//! * [`bob_error_exact_argmin`]: the exact error of picking the most negative
//!   of `M` homodyne outcomes, which is what the simulated receiver does.
//!
//! For the eavesdropper's heterodyne error, the neighbour separation `Δ` has
//! two readings, selected by [`DeltaMode`]:
//!
//! * `Paper`: `Δ = |α|(1 - cos δ)`, `δ = 2π/J`;
//! * `Chord`: the Euclidean distance `2|α| sin(δ/2)`.
//!
//! At the recommended operating point (`M = 10`, `J = 60000`, `|α|² = 1000`,
//! `σ_he = 1`) the `Paper` reading gives `δ ≈ 1.0472e-4`,
//! `Δ ≈ 31.623 × 5.483e-9 ≈ 1.734e-7`, `erf(Δ/2) ≈ 9.78e-8`, and the codeword
//! error `1 - (9.78e-8)^10 ≈ 1 - 8e-71`, which rounds to 1.

use std::f64::consts::{PI, SQRT_2};

use crate::keystream;
use crate::quad::{erfc, integrate_rel, normal_cdf, normal_pdf, q_function};
use crate::{Error, Result};

/// Smallest probability reported as nonzero.
pub const UNDERFLOW_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probability {
    value: f64,
    underflow: bool,
}

impl Probability {
    /// A probability that is exactly `value` (no rounding concern).
    pub fn exact(value: f64) -> Self {
        Probability {
            value: value.clamp(0.0, 1.0),
            underflow: false,
        }
    }

    /// A computed probability. Anything below [`UNDERFLOW_FLOOR`], including a
    /// result that rounded to zero, is reported as zero with the flag set.
    pub fn computed(value: f64) -> Self {
        if value < UNDERFLOW_FLOOR {
            Probability {
                value: 0.0,
                underflow: true,
            }
        } else {
            Self::exact(value)
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn underflowed(&self) -> bool {
        self.underflow
    }
}

/// System parameters shared by the analytic expressions and the simulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Number of frequency modes `M`.
    pub m_modes: usize,
    /// Number of basis phases `J`.
    pub j_phases: u64,
    /// Mean photon number per mode `|α|²`.
    pub alpha_sq: f64,
    pub sigma_ho: f64,
    pub sigma_he: f64,
    /// Baseband bandwidth in Hz.
    pub b_base: f64,
    /// Channel bandwidth expansion factor `Λ`.
    pub lambda_factor: f64,
    /// On-off PPM slot rate in Hz.
    pub b_s: f64,
    /// Secret key length `|K|` in bits.
    pub key_bits: usize,
}

impl SystemParams {
    /// Recommended first-demonstration values: `B_base = 1 GHz`, `M = 10`,
    /// `J = 6e4`, `|α|² = 1e3`, with `σ_ho = 1/4`, `σ_he = 1`, a 256-bit key,
    /// the minimum expansion `Λ = 2M` and a 1 GHz on-off slot rate.
    pub fn paper_sec5() -> Self {
        SystemParams {
            m_modes: 10,
            j_phases: 60_000,
            alpha_sq: 1000.0,
            sigma_ho: 0.25,
            sigma_he: 1.0,
            b_base: 1e9,
            lambda_factor: 20.0,
            b_s: 1e9,
            key_bits: 256,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_modes < 1 {
            return Err(Error::invalid("M must be at least 1"));
        }
        if self.j_phases < 2 {
            return Err(Error::invalid(format!("J must be at least 2, got {}", self.j_phases)));
        }
        let non_negative = [
            ("alpha_sq", self.alpha_sq),
            ("sigma_ho", self.sigma_ho),
            ("sigma_he", self.sigma_he),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        let positive = [
            ("b_base", self.b_base),
            ("lambda", self.lambda_factor),
            ("b_s", self.b_s),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        if self.key_bits == 0 {
            return Err(Error::invalid("key_bits must be positive"));
        }
        Ok(())
    }

    pub fn alpha_mag(&self) -> f64 {
        self.alpha_sq.sqrt()
    }
}

/// `1 - (1 - q)^m` without cancellation for small `q`.
fn any_of(q: f64, m: f64) -> f64 {
    -(m * (-q).ln_1p()).exp_m1()
}

/// Homodyne codeword error `1 - erf(|α| / (√2 σ_ho))^M`.
pub fn bob_error_paper(p: &SystemParams) -> Probability {
    let a = p.alpha_mag();
    if a == 0.0 {
        return Probability::exact(1.0);
    }
    if p.sigma_ho == 0.0 {
        return Probability::exact(0.0);
    }
    // 1 - erf(x) = erfc(x) keeps precision when erf(x) is close to 1.
    let tail = erfc(a / (SQRT_2 * p.sigma_ho));
    Probability::computed(any_of(tail, p.m_modes as f64))
}

/// Per-mode sign-test codeword error `1 - (1 - Q(|α|/σ_ho))^M`.
pub fn bob_error_sign_rule(p: &SystemParams) -> Probability {
    let a = p.alpha_mag();
    if p.sigma_ho == 0.0 {
        return Probability::exact(if a == 0.0 {
            1.0 - 0.5f64.powi(p.m_modes as i32)
        } else {
            0.0
        });
    }
    Probability::computed(any_of(q_function(a / p.sigma_ho), p.m_modes as f64))
}

/// Exact symbol error of the argmin homodyne receiver:
/// `1 - ∫ φ(x; -|α|, σ) (1 - Φ(x; |α|, σ))^{M-1} dx`.
///
/// Integrated in the standardized variable `t = (x + |α|)/σ`, where a
/// competing mode undercuts the signal mode with probability `Φ(t - 2|α|/σ)`.
pub fn bob_error_exact_argmin(p: &SystemParams) -> Probability {
    let m = p.m_modes;
    if m == 1 {
        return Probability::exact(0.0);
    }
    let a = p.alpha_mag();
    if p.sigma_ho == 0.0 {
        return Probability::exact(if a == 0.0 { 1.0 - 1.0 / m as f64 } else { 0.0 });
    }
    let d = 2.0 * a / p.sigma_ho;
    let others = (m - 1) as f64;
    let integrand = |t: f64| normal_pdf(t) * any_of(normal_cdf(t - d), others);
    let breaks = [-40.0, -8.0, 0.0, 0.5 * d, d, d + 8.0, d + 40.0];
    let mut sorted = breaks.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    Probability::computed(integrate_rel(integrand, &sorted, 1e-13))
}

/// On-off PPM error with photon counting, `exp(-|α|²)`.
pub fn cppm_bob_error(alpha_sq: f64) -> Probability {
    if alpha_sq == 0.0 {
        return Probability::exact(1.0);
    }
    Probability::computed((-alpha_sq).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DeltaMode {
    /// `|α| (1 - cos δ)`
    Paper,
    /// `2 |α| sin(δ/2)`
    Chord,
}

/// Neighbour separation `Δ` of the `J`-ary constellation.
pub fn neighbour_delta(alpha_mag: f64, j: u64, mode: DeltaMode) -> f64 {
    let half = (PI / j as f64).sin();
    match mode {
        // 1 - cos δ = 2 sin²(δ/2)
        DeltaMode::Paper => alpha_mag * 2.0 * half * half,
        DeltaMode::Chord => 2.0 * alpha_mag * half,
    }
}

/// Heterodyne codeword error `1 - erf(Δ / (2 σ_he))^M`.
pub fn eve_error_heterodyne(p: &SystemParams, mode: DeltaMode) -> Probability {
    let delta = neighbour_delta(p.alpha_mag(), p.j_phases, mode);
    if delta == 0.0 {
        return Probability::exact(1.0);
    }
    if p.sigma_he == 0.0 {
        return Probability::exact(0.0);
    }
    let x = delta / (2.0 * p.sigma_he);
    Probability::computed(any_of(erfc(x), p.m_modes as f64))
}

/// Exact per-mode error of nearest-phase decoding after heterodyne detection:
/// the probability that the phase of `|α| + n` (complex Gaussian `n`, std
/// `sigma_he` per quadrature) leaves the decision wedge `|φ| < π/J`.
///
/// Uses the phase density of a noisy phasor, with `ρ = |α|²/(2σ²)`:
///
/// ```text
/// p(φ) = e^{-ρ}/(2π) + √(πρ) cos φ e^{-ρ sin²φ} (1 + erf(√ρ cos φ)) / (2π)
/// ```
pub fn eve_mode_error_exact(alpha_mag: f64, sigma_he: f64, j: u64) -> Probability {
    let lo = PI / j as f64;
    if sigma_he == 0.0 {
        return Probability::exact(if alpha_mag == 0.0 { 1.0 - 1.0 / j as f64 } else { 0.0 });
    }
    let rho = alpha_mag * alpha_mag / (2.0 * sigma_he * sigma_he);
    let sr = rho.sqrt();
    let density = |phi: f64| {
        let (s, c) = phi.sin_cos();
        ((-rho).exp() + (PI * rho).sqrt() * c * (-rho * s * s).exp() * erfc(-sr * c)) / (2.0 * PI)
    };
    let width = 1.0 / (2.0 * rho + 1.0).sqrt();
    let mut breaks = vec![lo];
    for k in [1.0, 4.0, 16.0, 64.0] {
        let b = lo + k * width;
        if b < PI {
            breaks.push(b);
        }
    }
    breaks.push(PI);
    Probability::computed(2.0 * integrate_rel(density, &breaks, 1e-12))
}

/// Codeword (block) error of the heterodyne eavesdropper from the exact
/// per-mode error: `1 - (1 - p_mode)^M`.
pub fn eve_block_error_exact(p: &SystemParams) -> Probability {
    let per_mode = eve_mode_error_exact(p.alpha_mag(), p.sigma_he, p.j_phases).value();
    Probability::computed(any_of(per_mode, p.m_modes as f64))
}

/// Masking ratio `2π|α|/J`; masking holds when it is below one.
pub fn masking_ratio(p: &SystemParams) -> f64 {
    2.0 * PI * p.alpha_mag() / p.j_phases as f64
}

pub fn masking_satisfied(p: &SystemParams) -> bool {
    masking_ratio(p) < 1.0
}

/// On-off PPM bandwidth `W_cppm ≈ M B_S`.
pub fn bandwidth_cppm(p: &SystemParams) -> f64 {
    p.m_modes as f64 * p.b_s
}

/// On-off PPM bandwidth under the exponential reading `M → 2^{M*}`.
pub fn bandwidth_cppm_exponential(m_star: u32, b_s: f64) -> f64 {
    2f64.powi(m_star as i32) * b_s
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelBandwidth {
    /// `Λ B_base`
    pub w_channel: f64,
    /// `2 B_base M`
    pub minimum: f64,
}

impl ChannelBandwidth {
    pub fn satisfies_bound(&self) -> bool {
        self.w_channel >= self.minimum
    }
}

/// Proposed-scheme channel bandwidth `W = Λ B_base`, with its lower bound.
pub fn bandwidth_proposed(p: &SystemParams) -> ChannelBandwidth {
    ChannelBandwidth {
        w_channel: p.lambda_factor * p.b_base,
        minimum: 2.0 * p.b_base * p.m_modes as f64,
    }
}

/// Running-key bits per block, `M log2 J`.
pub fn block_length(p: &SystemParams) -> f64 {
    keystream::block_length_bits(p.m_modes, p.j_phases as f64)
}

/// `log2` of the number of running-key blocks, `|K| - log2(M log2 J)`.
pub fn key_capacity_log2(p: &SystemParams) -> f64 {
    keystream::running_key_capacity(p.key_bits, p.m_modes, p.j_phases as f64)
}

/// `n = log2 M` and `S = |α|²` for the on-off PPM eavesdropper bound.
pub fn cppm_bound_inputs(p: &SystemParams) -> (f64, f64) {
    ((p.m_modes as f64).log2(), p.alpha_sq)
}
