//! Eavesdropper receivers.
//!
//! Without the running key, Eve sees every mode as one of `J` equally spaced
//! PSK phases (the key phase, possibly shifted by π). Two models are here:
//!
//! * heterodyne interception: both quadratures with Gaussian noise
//!   `sigma_he` each, decoded to the nearest constellation phase;
//! * the square-root measurement (SRM), which is Bayes optimal for a
//!   symmetric pure-state set. Its error is computed two ways: from the
//!   eigenvalues of the circulant Gram matrix of the PSK set
//!   ([`srm_error_psk`]), and by brute-force linear algebra on an arbitrary
//!   list of states ([`gram_srm_brute`]).
//!
//! # Gram spectrum of a coherent PSK set
//!
//! With `u = exp(i 2π/J)` and states `α_k = |α| u^(k-1)`,
//!
//! ```text
//! λ_l = Σ_{k=1..J} <α_1|α_k> u^{-(k-1) l},    P_c = (Σ_l √λ_l)² / J²
//! ```
//!
//! Expanding `<α_1|α_k> = e^{-|α|²} Σ_n |α|^{2n} u^{(k-1)n} / n!` and summing
//! over `k` collapses the transform to an aliased Poisson series,
//!
//! ```text
//! λ_l = J Σ_{n ≡ l (mod J)} e^{-|α|²} |α|^{2n} / n!
//! ```
//!
//! which is what [`psk_gram_spectrum`] evaluates. Every term is positive, so
//! small eigenvalues keep full relative precision; a floating-point transform
//! leaves them with absolute round-off near 1e-15, which `√λ` inflates to
//! ~1e-8 in the error probability. The transform itself is available as
//! [`psk_gram_spectrum_dft`] (direct sum up to `J = 4096`, FFT above).

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;

use crate::keystream::RunningKeyBlock;
use crate::quad::{golden_section_max, normal_cdf};
use crate::signal::{coherent_inner_product, CodeWord, ComplexAmp};
use crate::transceiver::PlaintextSymbol;
use crate::{Error, Result};

/// Eigenvalues below this indicate a broken overlap computation; negative
/// values above it are round-off and clamp to zero.
pub const LAMBDA_FAIL: f64 = -1e-9;

const DIRECT_DFT_MAX_J: u64 = 4096;
const MAX_BRUTE_STATES: usize = 64;

/// `J`-ary PSK set `{|α| e^{i 2π l / J}}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PskConstellation {
    alpha_mag: f64,
    j: u64,
}

impl PskConstellation {
    pub fn new(alpha_mag: f64, j: u64) -> Result<Self> {
        if !(alpha_mag.is_finite() && alpha_mag >= 0.0) {
            return Err(Error::invalid(format!(
                "|alpha| must be finite and >= 0, got {alpha_mag}"
            )));
        }
        if j < 2 {
            return Err(Error::invalid(format!("J must be at least 2, got {j}")));
        }
        Ok(PskConstellation { alpha_mag, j })
    }

    pub fn alpha_mag(&self) -> f64 {
        self.alpha_mag
    }

    pub fn j(&self) -> u64 {
        self.j
    }

    pub fn state(&self, l: u64) -> ComplexAmp {
        ComplexAmp::from_polar(self.alpha_mag, 2.0 * PI * (l % self.j) as f64 / self.j as f64)
            .expect("finite constellation point")
    }

    pub fn states(&self) -> Vec<ComplexAmp> {
        (0..self.j).map(|l| self.state(l)).collect()
    }
}

/// Eigenvalues `λ_1..λ_J` of the Gram matrix of a PSK set, in that order.
#[derive(Debug, Clone, PartialEq)]
pub struct GramSpectrum {
    pub lambdas: Vec<f64>,
    /// Largest `|Im λ_l|` before it was discarded (zero for the series form).
    pub max_imag_residue: f64,
}

impl GramSpectrum {
    pub fn trace(&self) -> f64 {
        self.lambdas.iter().sum()
    }

    /// SRM probability of a correct decision for one mode.
    pub fn srm_correct(&self) -> f64 {
        let j = self.lambdas.len() as f64;
        let s: f64 = self.lambdas.iter().map(|l| l.sqrt()).sum();
        (s * s / (j * j)).min(1.0)
    }

    fn from_complex(values: Vec<Complex64>) -> Result<Self> {
        let max_imag_residue = values.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        let lambdas = values
            .into_iter()
            .map(|z| {
                if z.re < LAMBDA_FAIL {
                    Err(Error::Numeric(format!("Gram eigenvalue {} below {LAMBDA_FAIL}", z.re)))
                } else if z.re < 0.0 {
                    Ok(0.0)
                } else {
                    Ok(z.re)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GramSpectrum {
            lambdas,
            max_imag_residue,
        })
    }
}

/// `ln` of the Poisson probability of `n` photons at mean `mean`.
fn ln_poisson(n: u64, mean: f64) -> f64 {
    if mean == 0.0 {
        return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    -mean + n as f64 * mean.ln() - libm::lgamma(n as f64 + 1.0)
}

/// Poisson probabilities for `n = 0..=n_max`, built by ratio recursion out
/// from the mode and normalized over the range.
fn poisson_pmf(mean: f64, n_max: u64) -> Vec<f64> {
    let len = n_max as usize + 1;
    let mut w = vec![0.0f64; len];
    if mean == 0.0 {
        w[0] = 1.0;
        return w;
    }
    let mode = (mean.floor() as usize).min(len - 1);
    w[mode] = 1.0;
    for n in mode..len - 1 {
        w[n + 1] = w[n] * mean / (n + 1) as f64;
    }
    for n in (1..=mode).rev() {
        w[n - 1] = w[n] * n as f64 / mean;
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

/// Gram spectrum of a PSK set through the aliased Poisson series.
pub fn psk_gram_spectrum(c: &PskConstellation) -> GramSpectrum {
    let j = c.j;
    let mean = c.alpha_mag * c.alpha_mag;
    // Past mean + 40 sd the Poisson terms are below e^-800.
    let hi = (mean + 40.0 * mean.sqrt() + 50.0).ceil() as u64;
    let pmf = poisson_pmf(mean, hi.max(j - 1));
    let mut by_class = vec![0.0f64; j as usize];
    for (n, p) in pmf.iter().enumerate() {
        by_class[n % j as usize] += p;
    }
    // λ_l for l = 1..J; l = J is the n ≡ 0 class.
    let lambdas = (1..=j).map(|l| j as f64 * by_class[(l % j) as usize]).collect();
    GramSpectrum {
        lambdas,
        max_imag_residue: 0.0,
    }
}

/// Gram spectrum of a PSK set by a floating-point discrete Fourier transform
/// of the overlaps `<α_1|α_k>`.
pub fn psk_gram_spectrum_dft(c: &PskConstellation) -> Result<GramSpectrum> {
    let j = c.j;
    let a2 = c.alpha_mag * c.alpha_mag;
    let overlaps: Vec<Complex64> = (0..j)
        .map(|k| {
            let theta = 2.0 * PI * k as f64 / j as f64;
            let half = (0.5 * theta).sin();
            Complex64::from_polar((-2.0 * a2 * half * half).exp(), a2 * theta.sin())
        })
        .collect();
    let values: Vec<Complex64> = if j <= DIRECT_DFT_MAX_J {
        let twiddle: Vec<Complex64> = (0..j)
            .map(|n| Complex64::from_polar(1.0, -2.0 * PI * n as f64 / j as f64))
            .collect();
        (1..=j)
            .map(|l| {
                overlaps
                    .iter()
                    .enumerate()
                    .map(|(k, &o)| o * twiddle[((k as u64 * l) % j) as usize])
                    .sum()
            })
            .collect()
    } else {
        let mut buf = overlaps;
        FftPlanner::new().plan_fft_forward(j as usize).process(&mut buf);
        // buf[l] = Σ_k o_k e^{-2πi k l / J}; reorder to l = 1..J.
        buf.rotate_left(1);
        buf
    };
    GramSpectrum::from_complex(values)
}

/// SRM error for `m_modes` independent PSK-randomized modes:
/// `1 - {(Σ √λ_l)² / J²}^M`.
pub fn srm_error_psk(c: &PskConstellation, m_modes: usize) -> Result<f64> {
    if m_modes == 0 {
        return Err(Error::invalid("M must be at least 1"));
    }
    let pc = psk_gram_spectrum(c).srm_correct();
    Ok(-(m_modes as f64 * (pc.ln())).exp_m1())
}

/// `G_jk = <α_j|α_k>`.
pub fn gram_matrix(states: &[ComplexAmp]) -> DMatrix<Complex64> {
    let n = states.len();
    DMatrix::from_fn(n, n, |r, c| coherent_inner_product(states[r], states[c]))
}

/// Fock-basis amplitudes `<n|α>` for `n = 0..len`.
fn fock_amplitudes(a: ComplexAmp, len: usize) -> Vec<Complex64> {
    let mean = a.norm_sqr();
    let theta = a.arg();
    (0..len as u64)
        .map(|n| {
            let mag = (0.5 * ln_poisson(n, mean)).exp();
            Complex64::from_polar(mag, (n as f64 * theta).rem_euclid(2.0 * PI))
        })
        .collect()
}

/// Square-root-measurement error for equiprobable pure coherent states by
/// direct linear algebra.
///
/// The Gram matrix is built and checked for positive semidefiniteness. The
/// SRM success probability for state `j` is `|(G^{1/2})_jj|²`. `G^{1/2}` is
/// formed as `V Σ V^H` from the singular value decomposition `B = U Σ V^H`
/// of the matrix whose columns are the states in a truncated photon-number
/// basis (`B^H B = G`), so that singular values near zero are not squared
/// into round-off.
pub fn gram_srm_brute(states: &[ComplexAmp]) -> Result<f64> {
    let n = states.len();
    if !(2..=MAX_BRUTE_STATES).contains(&n) {
        return Err(Error::invalid(format!(
            "brute-force SRM needs 2..={MAX_BRUTE_STATES} states, got {n}"
        )));
    }
    let gram = gram_matrix(states);
    let eig = SymmetricEigen::new(gram);
    if let Some(&worst) = eig.eigenvalues.iter().find(|&&l| l < LAMBDA_FAIL) {
        return Err(Error::Numeric(format!(
            "Gram matrix not positive semidefinite: eigenvalue {worst:e}"
        )));
    }

    let max_mean = states.iter().map(|a| a.norm_sqr()).fold(0.0, f64::max);
    let rows = (max_mean + 14.0 * max_mean.sqrt() + 60.0).ceil() as usize;
    let columns: Vec<Complex64> = states.iter().flat_map(|&a| fock_amplitudes(a, rows)).collect();
    let basis = DMatrix::from_column_slice(rows, n, &columns);
    let svd = basis.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Numeric("SVD did not return right singular vectors".into()))?;
    let correct: f64 = (0..n)
        .map(|j| {
            let diag: f64 = svd
                .singular_values
                .iter()
                .enumerate()
                .map(|(i, s)| v_t[(i, j)].norm_sqr() * s)
                .sum();
            diag * diag
        })
        .sum::<f64>()
        / n as f64;
    Ok((1.0 - correct).max(0.0))
}

/// Heterodyne outcome: `a` plus independent Gaussian noise of std `sigma_he`
/// on each quadrature.
pub fn heterodyne_measure<R: Rng + ?Sized>(a: ComplexAmp, sigma_he: f64, rng: &mut R) -> ComplexAmp {
    if sigma_he == 0.0 {
        return a;
    }
    let gr: f64 = StandardNormal.sample(rng);
    let gi: f64 = StandardNormal.sample(rng);
    ComplexAmp::new(a.re() + sigma_he * gr, a.im() + sigma_he * gi).expect("finite outcome")
}

/// Constellation index whose phase `2π l / J` is circularly nearest `phase`.
pub fn nearest_phase_index(phase: f64, j: u64) -> u64 {
    let x = (phase.rem_euclid(2.0 * PI) * j as f64 / (2.0 * PI)).round() as u64;
    x % j
}

/// Heterodyne every mode and return the nearest PSK index per mode.
/// The phase is the only statistic used.
pub fn eve_decode_block<R: Rng + ?Sized>(cw: &CodeWord, j: u64, sigma_he: f64, rng: &mut R) -> Vec<u64> {
    cw.iter()
        .map(|&a| nearest_phase_index(heterodyne_measure(a, sigma_he, rng).arg(), j))
        .collect()
}

/// Constellation indices of the transmitted (randomized) phase-PPM codeword:
/// the key index, plus `J/2` on the mode carrying the symbol. `J` must be even.
pub fn ciphertext_indices(x: PlaintextSymbol, block: &RunningKeyBlock) -> Result<Vec<u64>> {
    let j = block.j();
    if !j.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "ciphertext phases lie on the J-ary grid only for even J, got {j}"
        )));
    }
    if x.mode() >= block.len() {
        return Err(Error::DimensionMismatch {
            expected: block.len(),
            got: x.get(),
        });
    }
    Ok(block
        .indices()
        .iter()
        .enumerate()
        .map(|(k, &i)| if k == x.mode() { (i + j / 2) % j } else { i })
        .collect())
}

/// Right-logarithmic-derivative Cramér-Rao bound on the variance of a
/// coherent amplitude estimate: `1 / <α|a a†|α> = 1 / (|α|² + 1)`.
pub fn rld_crb(alpha_mag: f64) -> f64 {
    1.0 / (alpha_mag * alpha_mag + 1.0)
}

/// Lower bound on the eavesdropper's error against on-off coherent PPM,
/// `1 - Φ(z)^n Φ(z - 2S)`, at a given `z`.
pub fn cppm_eve_bound(z: f64, n: f64, s: f64) -> f64 {
    1.0 - normal_cdf(z).powf(n) * normal_cdf(z - 2.0 * s)
}

/// [`cppm_eve_bound`] maximized over `z` in `[-10, 10 + 2s]` by golden-section
/// search with bracket tolerance `tol`. Returns `(z*, bound)`.
///
/// `Φ(z)^n Φ(z - 2S)` increases with `z`, so the maximum sits at the left end
/// of the search interval.
pub fn cppm_eve_bound_max(n: f64, s: f64, tol: f64) -> (f64, f64) {
    golden_section_max(|z| cppm_eve_bound(z, n, s), -10.0, 10.0 + 2.0 * s, tol)
}
