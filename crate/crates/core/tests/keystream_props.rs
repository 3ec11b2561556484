use proptest::prelude::*;
use qnsc_core::keystream::{expand, next_block, SecretKey, Sha256Ctr};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_key(rng: &mut ChaCha8Rng) -> [u8; 32] {
    let mut k = [0u8; 32];
    rng.fill(&mut k);
    k
}

fn indices(key: &[u8], m: usize, j: u64, n: usize) -> Vec<u64> {
    let key = SecretKey::new(key.to_vec()).unwrap();
    expand(&key, m, j, n)
        .unwrap()
        .iter()
        .flat_map(|b| b.indices().to_vec())
        .collect()
}

#[test]
fn one_bit_key_change_changes_stream() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let a = random_key(&mut rng);
        let mut b = a;
        let bit = rng.random_range(0..256);
        b[bit / 8] ^= 0x80 >> (bit % 8);
        let (sa, sb) = (indices(&a, 8, 16, 4), indices(&b, 8, 16, 4));
        // 128 bits per stream: agreement everywhere has probability 2^-128
        assert_ne!(sa, sb);
        let same = sa.iter().zip(&sb).filter(|(x, y)| x == y).count();
        assert!(same < 24, "{same} of 32 indices agree");
    }
}

#[test]
fn indices_in_range_over_a_million_samples() {
    let key = [0x5au8; 32];
    for j in [2u64, 8, 1024, 65536] {
        let all = indices(&key, 10, j, 100_000);
        assert_eq!(all.len(), 1_000_000);
        assert!(all.iter().all(|&i| i < j));
    }
}

#[test]
fn chi_square_uniform_at_j16() {
    let key: Vec<u8> = (0u8..32).collect();
    let all = indices(&key, 4, 16, 250_000);
    let mut hist = [0u64; 16];
    for i in all {
        hist[i as usize] += 1;
    }
    let expected = 1_000_000.0 / 16.0;
    let chi2: f64 = hist.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // scipy.stats.chi2.ppf(0.999, 15)
    assert!(chi2 < 37.697_298_218_353_83, "chi2 = {chi2}");
}

#[test]
fn expand_matches_incremental_blocks() {
    let key = SecretKey::new(vec![3u8; 48]).unwrap();
    let all = expand(&key, 5, 32, 20).unwrap();
    let mut gen = Sha256Ctr::new(&key);
    for block in &all {
        assert_eq!(&next_block(&mut gen, 5, 32).unwrap(), block);
    }
}

#[test]
fn short_key_rejected() {
    assert!(SecretKey::new(vec![0u8; 31]).is_err());
}

proptest! {
    #[test]
    fn expand_is_deterministic(
        key in prop::collection::vec(any::<u8>(), 32..64),
        m in 1usize..12,
        log_j in 1u32..20,
        n in 1usize..8,
    ) {
        let j = 1u64 << log_j;
        let k = SecretKey::new(key).unwrap();
        let a = expand(&k, m, j, n).unwrap();
        prop_assert_eq!(&a, &expand(&k, m, j, n).unwrap());
        prop_assert_eq!(a.len(), n);
        prop_assert!(a.iter().all(|b| b.len() == m && b.indices().iter().all(|&i| i < j)));
    }

    #[test]
    fn non_power_of_two_rejected(j in 3u64..10_000) {
        prop_assume!(!j.is_power_of_two());
        let k = SecretKey::new(vec![1u8; 32]).unwrap();
        prop_assert!(expand(&k, 2, j, 1).is_err());
    }
}
