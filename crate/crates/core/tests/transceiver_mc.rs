use qnsc_core::analytics::{bob_error_exact_argmin, cppm_bob_error, SystemParams};
use qnsc_core::keystream::{expand, SecretKey};
use qnsc_core::montecarlo::McPlan;
use qnsc_core::sim;
use qnsc_core::transceiver::{
    bob_decode, bytes_to_bits, derandomize, ppm_encode, randomize, stream_decrypt, stream_encrypt, Frame, NoiseModel,
    PlaintextSymbol, StreamConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn params(m: usize, alpha_mag: f64, sigma_ho: f64) -> SystemParams {
    SystemParams {
        m_modes: m,
        alpha_sq: alpha_mag * alpha_mag,
        sigma_ho,
        ..SystemParams::paper_sec5()
    }
}

#[test]
fn correct_key_round_trips_are_error_free() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10_000 {
        let mut key = [0u8; 32];
        rng.fill(&mut key);
        let key = SecretKey::new(key.to_vec()).unwrap();
        let m = rng.random_range(1..=16);
        let j = 1u64 << rng.random_range(1..=16);
        let x = PlaintextSymbol::new(rng.random_range(1..=m), m).unwrap();
        let alpha = rng.random_range(0.1..40.0);
        let block = &expand(&key, m, j, 1).unwrap()[0];
        let cw = ppm_encode(x, alpha, m).unwrap();
        let sent = randomize(&cw, block).unwrap();
        for (a, b) in sent.iter().zip(cw.iter()) {
            assert!((a.norm() - b.norm()).abs() <= 1e-12 * alpha);
        }
        let got = bob_decode(
            &derandomize(&sent, block).unwrap(),
            &NoiseModel::noiseless(alpha),
            &mut rng,
        );
        assert_eq!(got, x);
    }
}

#[test]
fn wrong_key_error_at_operating_point() {
    let p = SystemParams::paper_sec5();
    let plan = McPlan::new(10_000, 0x5EC5, 8);
    let t = sim::wrong_key_symbol_error(&plan, p.m_modes, p.alpha_mag(), p.sigma_ho, p.j_phases).unwrap();
    // Every derandomized mode has a uniform phase, so the guess is uniform: 1 - 1/M.
    assert!(t.within_sigmas(0.9, 3.0), "rate {}", t.rate());
}

#[test]
fn photon_zero_class_matches_poisson() {
    for (i, a2) in [0.5, 1.0, 2.0, 5.0].into_iter().enumerate() {
        let t = sim::zero_count(&McPlan::new(1_000_000, 40 + i as u64, 8), a2).unwrap();
        assert!(t.within_sigmas((-a2).exp(), 3.0), "|a|^2={a2}: {}", t.rate());
    }
}

#[test]
fn cppm_codeword_error_matches_closed_form() {
    let t = sim::cppm_codeword_error(&McPlan::new(1_000_000, 50, 8), 8, 1.0).unwrap();
    assert!(t.within_sigmas(cppm_bob_error(1.0).value(), 3.0), "{}", t.rate());
}

#[test]
fn bob_argmin_oracle_fixtures() {
    // scipy.integrate.quad on the same integral, mpmath cross-checked
    let a = bob_error_exact_argmin(&params(2, 1.0, 0.25)).value();
    assert!((a / 7.708_628_950_139_952e-9 - 1.0).abs() < 1e-9);
    let b = bob_error_exact_argmin(&params(4, 0.8, 0.5)).value();
    assert!((b / 0.031_058_708_039_858_805 - 1.0).abs() < 1e-9);
}

#[test]
fn bob_mc_matches_argmin_oracle() {
    for (i, (m, a, s)) in [(2, 1.0, 0.25), (4, 0.8, 0.5)].into_iter().enumerate() {
        let p = bob_error_exact_argmin(&params(m, a, s)).value();
        let t = sim::bob_symbol_error(&McPlan::new(10_000_000, 500 + i as u64, 16), m, a, s, None).unwrap();
        assert!(t.within_sigmas(p, 3.0), "M={m}: mc {} vs {p}", t.rate());
    }
}

#[test]
fn randomized_path_matches_plain_path_statistics() {
    let p = bob_error_exact_argmin(&params(4, 0.8, 0.5)).value();
    let t = sim::bob_symbol_error(&McPlan::new(200_000, 77, 8), 4, 0.8, 0.5, Some(64)).unwrap();
    assert!(t.within_sigmas(p, 3.0), "{}", t.rate());
}

#[test]
fn stream_round_trip_and_wrong_key() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut bytes = vec![0u8; 1250];
    rng.fill(&mut bytes[..]);
    let bits = bytes_to_bits(&bytes);
    assert_eq!(bits.len(), 10_000);
    let cfg = StreamConfig::new(16, 1024, 1000f64.sqrt()).unwrap();
    let key = SecretKey::new(vec![0x11u8; 32]).unwrap();
    let frame = Frame::from_bytes(&stream_encrypt(&bits, cfg, &key).unwrap().to_bytes()).unwrap();

    assert_eq!(stream_decrypt(&frame, &key, 0.0, &mut rng).unwrap(), bits);
    assert_eq!(stream_decrypt(&frame, &key, 0.25, &mut rng).unwrap(), bits);

    let wrong = SecretKey::new(vec![0x12u8; 32]).unwrap();
    let got = stream_decrypt(&frame, &wrong, 0.25, &mut rng).unwrap();
    let agree = got.iter().zip(&bits).filter(|(a, b)| a == b).count() as f64 / bits.len() as f64;
    assert!((agree - 0.5).abs() <= 3.0 * 0.5 / 100.0, "agreement {agree}");
}
