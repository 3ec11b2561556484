//! Simulator and analysis library for the multi-frequency phase-PPM
//! quantum-noise stream cipher.
//!
//! A plaintext symbol selects which of `M` frequency modes carries a
//! π-shifted coherent pulse. A running key drawn from a keystream then
//! rotates every mode by one of `J` equally spaced phases. The legitimate
//! receiver undoes the rotation and detects the π mode with homodyne
//! receivers; an eavesdropper without the key must resolve the `J`-ary
//! phases directly through quantum noise.
//!
//! Modules:
//!
//! * [`signal`]: complex amplitudes, codewords and linear (symplectic) maps.
//! * [`keystream`]: secret key expansion into running-key blocks.
//! * [`transceiver`]: encoders, randomization, homodyne and photon-counting
//!   receivers, and the framed stream mode.
//! * [`adversary`]: heterodyne interception and square-root-measurement error.
//! * [`analytics`]: closed-form error, masking and bandwidth expressions.
//! * [`montecarlo`]: seeded, sharded Monte Carlo harness.
//! * [`sim`]: Monte Carlo experiments built on the harness.

pub mod adversary;
pub mod analytics;
mod error;
pub mod keystream;
pub mod montecarlo;
pub mod quad;
pub mod signal;
pub mod sim;
pub mod transceiver;

pub use error::{Error, Result};
