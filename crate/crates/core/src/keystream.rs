//! Running-key generation.
//!
//! A short [`SecretKey`] is expanded into a bit stream, and the bit stream is
//! cut into [`RunningKeyBlock`]s of `M` phase indices, each `log2 J` bits.
//!
//! # Reference generator
//!
//! [`Sha256Ctr`] is the reference bit generator. Output block `c`
//! (`c = 0, 1, 2, ...`) is
//!
//! ```text
//! block_c = SHA-256(key_bytes || be64(c))
//! ```
//!
//! and the stream is `block_0 || block_1 || ...`, read most significant bit
//! of each byte first. A block of `M` indices consumes exactly `M * log2 J`
//! bits; each index is the next `log2 J` bits read as a big-endian unsigned
//! integer. Blocks are not byte aligned: block `n+1` starts at the bit where
//! block `n` ended.
//!
//! No cryptographic strength is claimed for this construction; it exists so
//! that transmitter and receiver (and other implementations) agree bit for
//! bit.

use std::f64::consts::PI;

use sha2::{Digest, Sha256};

use crate::{Error, Result};

/// Minimum key length in bytes (256 bits).
pub const MIN_KEY_BYTES: usize = 32;

#[derive(Clone, PartialEq, Eq)]
pub struct SecretKey {
    bytes: Vec<u8>,
}

impl SecretKey {
    pub fn new(bytes: impl Into<Vec<u8>>) -> Result<Self> {
        let bytes = bytes.into();
        if bytes.len() < MIN_KEY_BYTES {
            return Err(Error::KeyTooShort {
                len: bytes.len(),
                min: MIN_KEY_BYTES,
            });
        }
        Ok(SecretKey { bytes })
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn bit_len(&self) -> usize {
        self.bytes.len() * 8
    }
}

impl std::fmt::Debug for SecretKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SecretKey")
            .field("bits", &self.bit_len())
            .finish_non_exhaustive()
    }
}

/// `M` phase indices, each in `[0, J)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunningKeyBlock {
    indices: Vec<u64>,
    j: u64,
}

impl RunningKeyBlock {
    pub fn new(indices: Vec<u64>, j: u64) -> Result<Self> {
        if j < 2 {
            return Err(Error::invalid(format!("J must be at least 2, got {j}")));
        }
        if indices.is_empty() {
            return Err(Error::invalid("running-key block needs at least one index"));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= j) {
            return Err(Error::IndexOutOfRange { index: bad, bound: j });
        }
        Ok(RunningKeyBlock { indices, j })
    }

    pub fn indices(&self) -> &[u64] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn j(&self) -> u64 {
        self.j
    }

    /// Basis phases `2π k / J` for each index.
    pub fn phases(&self) -> Vec<f64> {
        self.indices
            .iter()
            .map(|&k| 2.0 * PI * k as f64 / self.j as f64)
            .collect()
    }
}

/// Deterministic source of key bits.
pub trait KeystreamGenerator {
    /// Next `n` bits (`n <= 64`) as a big-endian unsigned integer.
    fn next_bits(&mut self, n: u32) -> u64;
}

/// SHA-256 in counter mode; see the module docs for the exact construction.
#[derive(Clone)]
pub struct Sha256Ctr {
    key: Vec<u8>,
    counter: u64,
    buf: [u8; 32],
    // bit offset into buf; 256 means exhausted
    pos: usize,
}

impl Sha256Ctr {
    pub fn new(key: &SecretKey) -> Self {
        Sha256Ctr {
            key: key.as_bytes().to_vec(),
            counter: 0,
            buf: [0; 32],
            pos: 256,
        }
    }

    fn refill(&mut self) {
        let mut h = Sha256::new();
        h.update(&self.key);
        h.update(self.counter.to_be_bytes());
        self.buf.copy_from_slice(&h.finalize());
        self.counter += 1;
        self.pos = 0;
    }

    fn next_bit(&mut self) -> u64 {
        if self.pos == 256 {
            self.refill();
        }
        let byte = self.buf[self.pos / 8];
        let bit = (byte >> (7 - (self.pos % 8))) & 1;
        self.pos += 1;
        bit as u64
    }
}

impl KeystreamGenerator for Sha256Ctr {
    fn next_bits(&mut self, n: u32) -> u64 {
        assert!(n <= 64, "at most 64 bits per call");
        (0..n).fold(0u64, |acc, _| (acc << 1) | self.next_bit())
    }
}

fn check_block_shape(m: usize, j: u64) -> Result<u32> {
    if m == 0 {
        return Err(Error::invalid("M must be at least 1"));
    }
    if j < 2 || !j.is_power_of_two() {
        return Err(Error::NotPowerOfTwo { what: "J", value: j });
    }
    Ok(j.trailing_zeros())
}

/// Pull one block of `m` indices from `gen`.
pub fn next_block<G: KeystreamGenerator>(gen: &mut G, m: usize, j: u64) -> Result<RunningKeyBlock> {
    let bits = check_block_shape(m, j)?;
    let indices = (0..m).map(|_| gen.next_bits(bits)).collect();
    RunningKeyBlock::new(indices, j)
}

/// Expand `key` into `n_blocks` running-key blocks with the reference generator.
///
/// `j` must be a power of two, `j >= 2`.
pub fn expand(key: &SecretKey, m: usize, j: u64, n_blocks: usize) -> Result<Vec<RunningKeyBlock>> {
    check_block_shape(m, j)?;
    let mut gen = Sha256Ctr::new(key);
    (0..n_blocks).map(|_| next_block(&mut gen, m, j)).collect()
}

/// Basis phase `2π index / j` in radians.
pub fn phase_of(index: u64, j: u64) -> Result<f64> {
    if index >= j {
        return Err(Error::IndexOutOfRange { index, bound: j });
    }
    Ok(2.0 * PI * index as f64 / j as f64)
}

/// Key bits consumed per running-key block, `N_B = M log2 J`.
///
/// Any `J >= 2` is accepted here; non powers of two give a fractional value.
pub fn block_length_bits(m: usize, j: f64) -> f64 {
    m as f64 * j.log2()
}

/// `log2 |K^R_N| = |K| - log2(M log2 J)`, the base-2 log of the number of
/// running-key blocks a key of `key_bits` bits can supply.
pub fn running_key_capacity(key_bits: usize, m: usize, j: f64) -> f64 {
    key_bits as f64 - block_length_bits(m, j).log2()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(seed: u8) -> SecretKey {
        SecretKey::new(
            (0..32)
                .map(|i| seed.wrapping_mul(31).wrapping_add(i))
                .collect::<Vec<_>>(),
        )
        .unwrap()
    }

    #[test]
    fn short_key_rejected() {
        assert_eq!(
            SecretKey::new(vec![0u8; 31]),
            Err(Error::KeyTooShort { len: 31, min: 32 })
        );
        assert!(SecretKey::new(vec![0u8; 32]).is_ok());
    }

    #[test]
    fn expand_is_deterministic() {
        let k = key(7);
        assert_eq!(expand(&k, 5, 64, 20).unwrap(), expand(&k, 5, 64, 20).unwrap());
    }

    #[test]
    fn non_power_of_two_rejected() {
        let k = key(1);
        assert_eq!(
            expand(&k, 4, 60000, 1),
            Err(Error::NotPowerOfTwo {
                what: "J",
                value: 60000
            })
        );
        assert!(expand(&k, 4, 1, 1).is_err());
        assert!(expand(&k, 0, 16, 1).is_err());
    }

    #[test]
    fn block_consumes_m_log2j_bits() {
        // m=16, j=256: one block equals 128 raw bits, i.e. the first 16 bytes
        // of SHA-256(key || 0).
        let k = key(3);
        let blocks = expand(&k, 16, 256, 3).unwrap();
        let mut h = Sha256::new();
        h.update(k.as_bytes());
        h.update(0u64.to_be_bytes());
        let digest = h.finalize();
        let first: Vec<u64> = digest[..16].iter().map(|&b| b as u64).collect();
        let second: Vec<u64> = digest[16..].iter().map(|&b| b as u64).collect();
        assert_eq!(blocks[0].indices(), &first[..]);
        assert_eq!(blocks[1].indices(), &second[..]);
        assert_eq!(block_length_bits(16, 256.0), 128.0);
    }

    #[test]
    fn indices_are_big_endian_and_unaligned() {
        // j=8: 3 bits per index, crossing byte boundaries.
        let k = key(9);
        let mut h = Sha256::new();
        h.update(k.as_bytes());
        h.update(0u64.to_be_bytes());
        let digest = h.finalize();
        let bits: Vec<u64> = digest
            .iter()
            .flat_map(|&b| (0..8).rev().map(move |s| ((b >> s) & 1) as u64))
            .collect();
        let expect: Vec<u64> = bits
            .chunks(3)
            .take(6)
            .map(|c| c.iter().fold(0, |a, &b| (a << 1) | b))
            .collect();
        let blocks = expand(&k, 3, 8, 2).unwrap();
        let got: Vec<u64> = blocks.iter().flat_map(|b| b.indices().to_vec()).collect();
        assert_eq!(got, expect);
    }

    #[test]
    fn counter_rolls_over_into_next_digest() {
        // 256 bits per digest; j=2^32 -> 8 indices per digest.
        let k = key(4);
        let blocks = expand(&k, 9, 1 << 32, 1).unwrap();
        let mut h = Sha256::new();
        h.update(k.as_bytes());
        h.update(1u64.to_be_bytes());
        let d1 = h.finalize();
        let expect = u32::from_be_bytes([d1[0], d1[1], d1[2], d1[3]]) as u64;
        assert_eq!(blocks[0].indices()[8], expect);
    }

    #[test]
    fn phase_of_examples() {
        assert_eq!(phase_of(0, 8).unwrap(), 0.0);
        assert!((phase_of(4, 8).unwrap() - PI).abs() < 1e-15);
        assert!((phase_of(1, 60000).unwrap() - 1.047_197_551_196_597_7e-4).abs() < 1e-18);
        assert_eq!(phase_of(8, 8), Err(Error::IndexOutOfRange { index: 8, bound: 8 }));
    }

    #[test]
    fn capacity_examples() {
        assert_eq!(running_key_capacity(256, 16, 256.0), 249.0);
        assert_eq!(running_key_capacity(256, 1, 2.0), 256.0);
        let v = running_key_capacity(256, 10, 65536.0);
        assert!((v - (256.0 - 160f64.log2())).abs() < 1e-12);
        assert!((v - 248.678_071_905_112_6).abs() < 1e-9);
    }

    #[test]
    fn block_rejects_out_of_range() {
        assert!(RunningKeyBlock::new(vec![0, 4], 4).is_err());
        assert!(RunningKeyBlock::new(vec![], 4).is_err());
    }
}
