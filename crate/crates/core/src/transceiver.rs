//! Transmitter and legitimate receiver.
//!
//! Phase PPM: symbol `m` of `M` is sent as `M` coherent pulses of equal
//! magnitude `|α|`, all at phase 0 except mode `m`, which is at phase π.
//! The transmitter then rotates mode `k` by `2π k_R[k] / J` for a running-key
//! block `k_R`. The receiver undoes the rotation, homodyne-detects every mode
//! and picks the most negative quadrature.
//!
//! The on-off coherent PPM baseline (one pulse, `M - 1` vacuum slots,
//! photon-counting detection) lives here too.
//!
//! Stream mode packs `log2 M` plaintext bits per symbol into a versioned
//! binary frame; see [`Frame`].

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::keystream::{self, RunningKeyBlock, SecretKey, Sha256Ctr};
use crate::signal::{apply_symplectic, diagonal_phase_matrix, CodeWord, ComplexAmp};
use crate::{Error, Result};

/// Plaintext symbol `X_m`, `m` in `[1, M]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlaintextSymbol(usize);

impl PlaintextSymbol {
    pub fn new(m: usize, modes: usize) -> Result<Self> {
        if m == 0 || m > modes {
            return Err(Error::invalid(format!("symbol {m} outside [1, {modes}]")));
        }
        Ok(PlaintextSymbol(m))
    }

    /// One-based symbol value.
    pub fn get(self) -> usize {
        self.0
    }

    /// Zero-based mode index carrying the symbol.
    pub fn mode(self) -> usize {
        self.0 - 1
    }
}

/// Measurement noise scales and signal magnitude.
///
/// `sigma_ho` and `sigma_he` are Gaussian standard deviations, used as-is by
/// both the Monte Carlo samplers and the closed-form error expressions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub sigma_ho: f64,
    pub sigma_he: f64,
    pub alpha_mag: f64,
}

impl NoiseModel {
    pub fn new(sigma_ho: f64, sigma_he: f64, alpha_mag: f64) -> Result<Self> {
        for (name, v) in [("sigma_ho", sigma_ho), ("sigma_he", sigma_he), ("alpha_mag", alpha_mag)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(NoiseModel {
            sigma_ho,
            sigma_he,
            alpha_mag,
        })
    }

    pub fn noiseless(alpha_mag: f64) -> Self {
        NoiseModel {
            sigma_ho: 0.0,
            sigma_he: 0.0,
            alpha_mag,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcomes {
    Homodyne(Vec<f64>),
    Heterodyne(Vec<ComplexAmp>),
}

/// Per-mode measurement outcomes of one codeword.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub outcomes: Outcomes,
    /// Seed of the stream that produced the noise, when known.
    pub rng_seed: Option<u64>,
}

impl MeasurementRecord {
    pub fn len(&self) -> usize {
        match &self.outcomes {
            Outcomes::Homodyne(v) => v.len(),
            Outcomes::Heterodyne(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn check_alpha(alpha_mag: f64) -> Result<()> {
    if alpha_mag.is_finite() && alpha_mag > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "|alpha| must be finite and > 0, got {alpha_mag}"
        )))
    }
}

/// Phase-PPM codeword: `+|α|` on every mode except `-|α|` on mode `x`.
pub fn ppm_encode(x: PlaintextSymbol, alpha_mag: f64, m: usize) -> Result<CodeWord> {
    check_alpha(alpha_mag)?;
    PlaintextSymbol::new(x.get(), m)?;
    let amps = (0..m)
        .map(|k| ComplexAmp::real(if k == x.mode() { -alpha_mag } else { alpha_mag }))
        .collect::<Result<Vec<_>>>()?;
    CodeWord::new(amps)
}

/// On-off PPM codeword: `|α|` on mode `x`, vacuum elsewhere.
pub fn ook_ppm_encode(x: PlaintextSymbol, alpha_mag: f64, m: usize) -> Result<CodeWord> {
    check_alpha(alpha_mag)?;
    PlaintextSymbol::new(x.get(), m)?;
    let amps = (0..m)
        .map(|k| ComplexAmp::real(if k == x.mode() { alpha_mag } else { 0.0 }))
        .collect::<Result<Vec<_>>>()?;
    CodeWord::new(amps)
}

fn rotate(cw: &CodeWord, block: &RunningKeyBlock, sign: f64) -> Result<CodeWord> {
    if block.len() != cw.len() {
        return Err(Error::DimensionMismatch {
            expected: cw.len(),
            got: block.len(),
        });
    }
    let phases: Vec<f64> = block.phases().into_iter().map(|p| sign * p).collect();
    apply_symplectic(&diagonal_phase_matrix(&phases)?, cw)
}

/// Multiply mode `k` by `exp(i 2π block[k] / J)`.
pub fn randomize(cw: &CodeWord, block: &RunningKeyBlock) -> Result<CodeWord> {
    rotate(cw, block, 1.0)
}

/// Inverse of [`randomize`] for the same block.
pub fn derandomize(cw: &CodeWord, block: &RunningKeyBlock) -> Result<CodeWord> {
    rotate(cw, block, -1.0)
}

/// Homodyne outcome: in-phase quadrature plus Gaussian noise of std `sigma_ho`.
pub fn homodyne_measure<R: Rng + ?Sized>(a: ComplexAmp, sigma_ho: f64, rng: &mut R) -> f64 {
    if sigma_ho == 0.0 {
        return a.re();
    }
    let g: f64 = StandardNormal.sample(rng);
    a.re() + sigma_ho * g
}

/// Homodyne-measure every mode of `cw`.
pub fn homodyne_record<R: Rng + ?Sized>(cw: &CodeWord, sigma_ho: f64, rng: &mut R) -> MeasurementRecord {
    MeasurementRecord {
        outcomes: Outcomes::Homodyne(cw.iter().map(|&a| homodyne_measure(a, sigma_ho, rng)).collect()),
        rng_seed: None,
    }
}

/// Decide the symbol as the mode with the smallest homodyne outcome.
pub fn bob_decode<R: Rng + ?Sized>(cw: &CodeWord, noise: &NoiseModel, rng: &mut R) -> PlaintextSymbol {
    let mut best = (0usize, f64::INFINITY);
    for (k, &a) in cw.iter().enumerate() {
        let y = homodyne_measure(a, noise.sigma_ho, rng);
        if y < best.1 {
            best = (k, y);
        }
    }
    PlaintextSymbol(best.0 + 1)
}

/// Photon count of a coherent state: Poisson with mean `|a|²`.
pub fn photon_count<R: Rng + ?Sized>(a: ComplexAmp, rng: &mut R) -> u64 {
    let mean = a.norm_sqr();
    if mean == 0.0 {
        return 0;
    }
    let d = Poisson::new(mean).expect("finite positive mean");
    d.sample(rng) as u64
}

/// Photon-counting decision for on-off PPM: the first slot with a nonzero
/// count; `None` when every slot counted zero (erasure).
pub fn cppm_decode<R: Rng + ?Sized>(cw: &CodeWord, rng: &mut R) -> Option<PlaintextSymbol> {
    let counts: Vec<u64> = cw.iter().map(|&a| photon_count(a, rng)).collect();
    counts.iter().position(|&n| n > 0).map(|k| PlaintextSymbol(k + 1))
}

// ---------------------------------------------------------------------------
// Stream mode

pub const FRAME_MAGIC: [u8; 4] = *b"QNSC";
pub const FRAME_VERSION: u8 = 1;
const HEADER_LEN: usize = 4 + 1 + 4 + 8 + 8 + 1 + 8;

/// Parameters fixed for a whole stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamConfig {
    pub m: usize,
    pub j: u64,
    pub alpha_mag: f64,
}

impl StreamConfig {
    pub fn new(m: usize, j: u64, alpha_mag: f64) -> Result<Self> {
        if m < 2 || !m.is_power_of_two() {
            return Err(Error::NotPowerOfTwo {
                what: "M",
                value: m as u64,
            });
        }
        if j < 2 || !j.is_power_of_two() {
            return Err(Error::NotPowerOfTwo { what: "J", value: j });
        }
        check_alpha(alpha_mag)?;
        Ok(StreamConfig { m, j, alpha_mag })
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.m.trailing_zeros() as usize
    }
}

/// A ciphertext stream.
///
/// Serialized layout, all integers and floats big-endian:
///
/// ```text
/// offset  size  field
///      0     4  magic "QNSC"
///      4     1  version (1)
///      5     4  M (u32)
///      9     8  J (u64)
///     17     8  |alpha| (f64)
///     25     1  pad: zero bits appended to the plaintext (< log2 M)
///     26     8  codeword count N (u64)
///     34     -  N * M amplitudes, each re (f64) then im (f64)
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub config: StreamConfig,
    pub pad_bits: u8,
    pub codewords: Vec<CodeWord>,
}

impl Frame {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.codewords.len() * self.config.m * 16);
        out.extend_from_slice(&FRAME_MAGIC);
        out.push(FRAME_VERSION);
        out.extend_from_slice(&(self.config.m as u32).to_be_bytes());
        out.extend_from_slice(&self.config.j.to_be_bytes());
        out.extend_from_slice(&self.config.alpha_mag.to_be_bytes());
        out.push(self.pad_bits);
        out.extend_from_slice(&(self.codewords.len() as u64).to_be_bytes());
        for a in self.codewords.iter().flat_map(|cw| cw.iter()) {
            out.extend_from_slice(&a.re().to_be_bytes());
            out.extend_from_slice(&a.im().to_be_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { buf: bytes, pos: 0 };
        if r.take(4)? != FRAME_MAGIC {
            return Err(Error::Frame("bad magic".into()));
        }
        let version = r.take(1)?[0];
        if version != FRAME_VERSION {
            return Err(Error::Frame(format!("unsupported version {version}")));
        }
        let m = u32::from_be_bytes(r.array()?) as usize;
        let j = u64::from_be_bytes(r.array()?);
        let alpha_mag = f64::from_be_bytes(r.array()?);
        let config = StreamConfig::new(m, j, alpha_mag).map_err(|e| Error::Frame(e.to_string()))?;
        let pad_bits = r.take(1)?[0];
        if pad_bits as usize >= config.bits_per_symbol() {
            return Err(Error::Frame(format!("pad length {pad_bits} not below log2 M")));
        }
        let n = u64::from_be_bytes(r.array()?) as usize;
        let expected = n
            .checked_mul(m * 16)
            .ok_or_else(|| Error::Frame("codeword count overflows".into()))?;
        if bytes.len() - r.pos != expected {
            return Err(Error::Frame(format!(
                "payload is {} bytes, header implies {expected}",
                bytes.len() - r.pos
            )));
        }
        if n == 0 && pad_bits != 0 {
            return Err(Error::Frame("padding on an empty stream".into()));
        }
        let mut codewords = Vec::with_capacity(n);
        for _ in 0..n {
            let amps = (0..m)
                .map(|_| {
                    let re = f64::from_be_bytes(r.array()?);
                    let im = f64::from_be_bytes(r.array()?);
                    ComplexAmp::new(re, im).map_err(|_| Error::Frame("non-finite amplitude".into()))
                })
                .collect::<Result<Vec<_>>>()?;
            codewords.push(CodeWord::new(amps)?);
        }
        Ok(Frame {
            config,
            pad_bits,
            codewords,
        })
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos + n;
        if end > self.buf.len() {
            return Err(Error::Frame("truncated frame".into()));
        }
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }
}

/// Bits of `bytes`, most significant first.
pub fn bytes_to_bits(bytes: &[u8]) -> Vec<bool> {
    bytes
        .iter()
        .flat_map(|&b| (0..8).rev().map(move |s| (b >> s) & 1 == 1))
        .collect()
}

/// Pack bits (most significant first) into bytes; length must be a multiple of 8.
pub fn bits_to_bytes(bits: &[bool]) -> Result<Vec<u8>> {
    if !bits.len().is_multiple_of(8) {
        return Err(Error::invalid(format!(
            "{} bits is not a whole number of bytes",
            bits.len()
        )));
    }
    Ok(bits
        .chunks(8)
        .map(|c| c.iter().fold(0u8, |acc, &b| (acc << 1) | u8::from(b)))
        .collect())
}

/// Encrypt a bit stream: `log2 M` bits per symbol (big-endian, symbol value
/// plus one), zero-padded to a whole symbol, one running-key block per symbol.
pub fn stream_encrypt(bits: &[bool], config: StreamConfig, key: &SecretKey) -> Result<Frame> {
    let b = config.bits_per_symbol();
    let pad = (b - bits.len() % b) % b;
    let mut gen = Sha256Ctr::new(key);
    let codewords = bits
        .chunks(b)
        .map(|chunk| {
            let value = chunk
                .iter()
                .chain(std::iter::repeat(&false))
                .take(b)
                .fold(0usize, |acc, &bit| (acc << 1) | usize::from(bit));
            let symbol = PlaintextSymbol::new(value + 1, config.m)?;
            let block = keystream::next_block(&mut gen, config.m, config.j)?;
            randomize(&ppm_encode(symbol, config.alpha_mag, config.m)?, &block)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Frame {
        config,
        pad_bits: pad as u8,
        codewords,
    })
}

/// Derandomize every codeword of `frame` with `key` and homodyne-decode it.
pub fn stream_decrypt_symbols<R: Rng + ?Sized>(
    frame: &Frame,
    key: &SecretKey,
    sigma_ho: f64,
    rng: &mut R,
) -> Result<Vec<PlaintextSymbol>> {
    let config = frame.config;
    let noise = NoiseModel::new(sigma_ho, 0.0, config.alpha_mag)?;
    let mut gen = Sha256Ctr::new(key);
    frame
        .codewords
        .iter()
        .map(|cw| {
            if cw.len() != config.m {
                return Err(Error::DimensionMismatch {
                    expected: config.m,
                    got: cw.len(),
                });
            }
            let block = keystream::next_block(&mut gen, config.m, config.j)?;
            Ok(bob_decode(&derandomize(cw, &block)?, &noise, rng))
        })
        .collect()
}

/// Unpack decoded symbols into bits and strip the frame padding.
pub fn symbols_to_bits(symbols: &[PlaintextSymbol], config: StreamConfig, pad_bits: u8) -> Result<Vec<bool>> {
    let b = config.bits_per_symbol();
    let mut bits: Vec<bool> = symbols
        .iter()
        .flat_map(|s| {
            let v = s.get() - 1;
            (0..b).rev().map(move |sh| (v >> sh) & 1 == 1)
        })
        .collect();
    let pad = pad_bits as usize;
    if pad > bits.len() || (pad > 0 && pad >= b) {
        return Err(Error::Frame(format!(
            "pad length {pad} invalid for {} bits",
            bits.len()
        )));
    }
    bits.truncate(bits.len() - pad);
    Ok(bits)
}

/// Decrypt a frame back to plaintext bits.
pub fn stream_decrypt<R: Rng + ?Sized>(
    frame: &Frame,
    key: &SecretKey,
    sigma_ho: f64,
    rng: &mut R,
) -> Result<Vec<bool>> {
    let symbols = stream_decrypt_symbols(frame, key, sigma_ho, rng)?;
    symbols_to_bits(&symbols, frame.config, frame.pad_bits)
}

/// Draw an independent uniform running-key block, modelling an ideal keystream.
pub fn uniform_block<R: Rng + ?Sized>(m: usize, j: u64, rng: &mut R) -> RunningKeyBlock {
    RunningKeyBlock::new((0..m).map(|_| rng.random_range(0..j)).collect(), j).expect("indices drawn below j")
}
