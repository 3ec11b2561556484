//! Monte Carlo experiments over the transceiver and the eavesdropper.
//!
//! Each trial draws a uniform plaintext symbol and, where a running key is
//! involved, an independent uniform key block from the trial generator
//! (an ideal keystream). Results are [`Tally`]s of error events.

use rand::Rng;

use crate::adversary::{ciphertext_indices, eve_decode_block};
use crate::montecarlo::{McPlan, McRng, Tally};
use crate::signal::ComplexAmp;
use crate::transceiver::{
    bob_decode, cppm_decode, derandomize, ook_ppm_encode, photon_count, ppm_encode, randomize, uniform_block,
    NoiseModel, PlaintextSymbol,
};
use crate::{Error, Result};

fn random_symbol(m: usize, rng: &mut McRng) -> PlaintextSymbol {
    PlaintextSymbol::new(rng.random_range(1..=m), m).expect("symbol drawn in range")
}

fn check(m: usize, alpha_mag: f64, j: Option<u64>) -> Result<()> {
    if m == 0 {
        return Err(Error::invalid("M must be at least 1"));
    }
    if !(alpha_mag.is_finite() && alpha_mag > 0.0) {
        return Err(Error::invalid(format!(
            "|alpha| must be finite and > 0, got {alpha_mag}"
        )));
    }
    if let Some(j) = j {
        if j < 2 {
            return Err(Error::invalid(format!("J must be at least 2, got {j}")));
        }
    }
    Ok(())
}

/// Legitimate receiver symbol error. With `j = Some(J)` each codeword is
/// randomized and derandomized with the same key block before homodyne
/// decoding; with `None` the plain codeword is decoded.
pub fn bob_symbol_error(plan: &McPlan, m: usize, alpha_mag: f64, sigma_ho: f64, j: Option<u64>) -> Result<Tally> {
    check(m, alpha_mag, j)?;
    let noise = NoiseModel::new(sigma_ho, 0.0, alpha_mag)?;
    Ok(plan.count(|rng| {
        let x = random_symbol(m, rng);
        let mut cw = ppm_encode(x, alpha_mag, m).expect("validated");
        if let Some(j) = j {
            let block = uniform_block(m, j, rng);
            cw = derandomize(&randomize(&cw, &block).expect("dims"), &block).expect("dims");
        }
        bob_decode(&cw, &noise, rng) != x
    }))
}

/// Receiver holding an independent (wrong) key block: symbol error rate.
pub fn wrong_key_symbol_error(plan: &McPlan, m: usize, alpha_mag: f64, sigma_ho: f64, j: u64) -> Result<Tally> {
    check(m, alpha_mag, Some(j))?;
    let noise = NoiseModel::new(sigma_ho, 0.0, alpha_mag)?;
    Ok(plan.count(|rng| {
        let x = random_symbol(m, rng);
        let sent = uniform_block(m, j, rng);
        let guess = uniform_block(m, j, rng);
        let cw = randomize(&ppm_encode(x, alpha_mag, m).expect("validated"), &sent).expect("dims");
        bob_decode(&derandomize(&cw, &guess).expect("dims"), &noise, rng) != x
    }))
}

/// Heterodyne eavesdropper block error: the block counts as an error unless
/// every mode's phase index is recovered. `J` must be even.
pub fn eve_block_error(plan: &McPlan, m: usize, alpha_mag: f64, sigma_he: f64, j: u64) -> Result<Tally> {
    check(m, alpha_mag, Some(j))?;
    if !j.is_multiple_of(2) {
        return Err(Error::invalid(format!("eavesdropper simulation needs even J, got {j}")));
    }
    NoiseModel::new(0.0, sigma_he, alpha_mag)?;
    Ok(plan.count(|rng| {
        let x = random_symbol(m, rng);
        let block = uniform_block(m, j, rng);
        let cw = randomize(&ppm_encode(x, alpha_mag, m).expect("validated"), &block).expect("dims");
        let truth = ciphertext_indices(x, &block).expect("even J");
        eve_decode_block(&cw, j, sigma_he, rng) != truth
    }))
}

/// Frequency of zero photon counts from a coherent state of mean `alpha_sq`.
pub fn zero_count(plan: &McPlan, alpha_sq: f64) -> Result<Tally> {
    if alpha_sq.is_nan() || alpha_sq < 0.0 {
        return Err(Error::invalid("mean photon number must be >= 0"));
    }
    let a = ComplexAmp::real(alpha_sq.sqrt())?;
    Ok(plan.count(|rng| photon_count(a, rng) == 0))
}

/// On-off PPM codeword error with photon counting (erasure or wrong slot).
pub fn cppm_codeword_error(plan: &McPlan, m: usize, alpha_sq: f64) -> Result<Tally> {
    let alpha_mag = alpha_sq.sqrt();
    check(m, alpha_mag, None)?;
    Ok(plan.count(|rng| {
        let x = random_symbol(m, rng);
        let cw = ook_ppm_encode(x, alpha_mag, m).expect("validated");
        cppm_decode(&cw, rng) != Some(x)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_bob_never_errs() {
        let plan = McPlan::new(2000, 1, 4);
        assert_eq!(bob_symbol_error(&plan, 8, 1.0, 0.0, Some(64)).unwrap().events, 0);
    }

    #[test]
    fn odd_j_rejected_for_eve() {
        let plan = McPlan::new(10, 1, 1);
        assert!(eve_block_error(&plan, 2, 1.0, 1.0, 5).is_err());
    }

    #[test]
    fn noiseless_eve_reads_ciphertext() {
        let plan = McPlan::new(1000, 3, 2);
        assert_eq!(eve_block_error(&plan, 4, 2.0, 0.0, 16).unwrap().events, 0);
    }

    #[test]
    fn deterministic_for_fixed_plan() {
        let plan = McPlan::new(5000, 9, 3);
        let a = eve_block_error(&plan, 3, 1.0, 0.5, 8).unwrap();
        let b = eve_block_error(&plan, 3, 1.0, 0.5, 8).unwrap();
        assert_eq!(a, b);
    }
}
