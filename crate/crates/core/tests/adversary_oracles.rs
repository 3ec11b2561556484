use std::f64::consts::PI;

use proptest::prelude::*;
use qnsc_core::adversary::{
    cppm_eve_bound, cppm_eve_bound_max, eve_decode_block, gram_srm_brute, nearest_phase_index, psk_gram_spectrum,
    psk_gram_spectrum_dft, srm_error_psk, PskConstellation,
};
use qnsc_core::analytics::eve_mode_error_exact;
use qnsc_core::montecarlo::McPlan;
use qnsc_core::quad::integrate;
use qnsc_core::signal::{CodeWord, ComplexAmp};
use qnsc_core::sim;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn psk(a2: f64, j: u64) -> PskConstellation {
    PskConstellation::new(a2.sqrt(), j).unwrap()
}

#[test]
fn srm_series_matches_brute_force_gram() {
    for j in [2u64, 3, 4, 8, 16] {
        for a2 in [0.1, 0.5, 1.0, 2.0] {
            let c = psk(a2, j);
            let fast = srm_error_psk(&c, 1).unwrap();
            let brute = gram_srm_brute(&c.states()).unwrap();
            assert!((fast - brute).abs() < 1e-10, "J={j} |a|^2={a2}: {fast} vs {brute}");
        }
    }
}

#[test]
fn binary_helstrom() {
    let want = (1.0 - (1.0 - (-2.0f64).exp()).sqrt()) / 2.0;
    assert!((srm_error_psk(&psk(0.5, 2), 1).unwrap() - want).abs() < 1e-10);
    assert!((want - 0.035_063_2).abs() < 1e-7);
}

#[test]
fn vacuum_is_pure_guessing() {
    for j in [2u64, 4, 8] {
        for m in 1..=3 {
            let e = srm_error_psk(&psk(0.0, j), m).unwrap();
            assert!((e - (1.0 - (j as f64).powi(-(m as i32)))).abs() < 1e-12);
        }
    }
}

#[test]
fn mode_product_rule() {
    for (a2, j) in [(0.3, 5u64), (2.0, 16), (10.0, 64)] {
        let c = psk(a2, j);
        let p1 = srm_error_psk(&c, 1).unwrap();
        for m in [2usize, 5, 10] {
            let pm = srm_error_psk(&c, m).unwrap();
            assert!((pm - (1.0 - (1.0 - p1).powi(m as i32))).abs() < 1e-12);
        }
    }
}

#[test]
fn spectrum_trace_and_imaginary_residue() {
    for (a2, j) in [
        (0.1, 2u64),
        (1.0, 7),
        (5.0, 64),
        (100.0, 256),
        (1000.0, 4096),
        (1000.0, 8192),
    ] {
        let c = psk(a2, j);
        let s = psk_gram_spectrum(&c);
        assert!((s.trace() - j as f64).abs() < 1e-9, "J={j}");
        let d = psk_gram_spectrum_dft(&c).unwrap();
        assert!(d.max_imag_residue < 1e-10 * j as f64, "J={j}: {}", d.max_imag_residue);
    }
}

#[test]
fn masking_regime_monotone_in_j() {
    // mpmath, 40 digits: 1 - ((Σ√λ)/J)^8 at |α|² = 100, M = 4
    let oracle = [
        (4u64, 0.0),
        (8, 7.255_181_009_998_95e-26),
        (16, 4.889_789_957_344_545e-7),
        (32, 0.042_903_981_781_641_22),
        (64, 0.679_597_437_319_890_9),
    ];
    let mut last = 0.0;
    for (j, want) in oracle {
        let e = srm_error_psk(&psk(100.0, j), 4).unwrap();
        assert!(e >= last, "J={j}");
        assert!((e - want).abs() <= 1e-12 + 1e-9 * want, "J={j}: {e} vs {want}");
        last = e;
    }
}

#[test]
#[ignore = "fails by construction: at J = 64, the first J with 2π|α|/J < 1, the error is 0.6796, not > 0.99"]
fn masking_threshold_implies_near_certain_error() {
    let alpha = 10.0;
    let j = [4u64, 8, 16, 32, 64]
        .into_iter()
        .find(|&j| 2.0 * PI * alpha / (j as f64) < 1.0)
        .unwrap();
    assert!(srm_error_psk(&psk(alpha * alpha, j), 4).unwrap() > 0.99);
}

/// Nearest-phase error from the 2-D Gaussian density integrated in polar
/// coordinates over the correct wedge.
fn wedge_error(alpha: f64, sigma: f64, j: u64) -> f64 {
    let s2 = 2.0 * sigma * sigma;
    let r_max = alpha + 40.0 * sigma;
    let radial = |phi: f64| {
        let (sn, c) = phi.sin_cos();
        // |r e^{iφ} - α|² written without cancellation
        let f = |r: f64| r / (PI * s2) * (-((r - alpha * c).powi(2) + (alpha * sn).powi(2)) / s2).exp();
        let peak = (alpha * c).max(0.0);
        integrate(f, 0.0, peak, 1e-14) + integrate(f, peak, r_max, 1e-14)
    };
    let w = PI / j as f64;
    // outer tolerance stays well above the inner round-off noise
    1.0 - integrate(radial, -w, w, 1e-10)
}

#[test]
fn phase_density_agrees_with_polar_integration() {
    for (j, a, s) in [(4u64, 1.0, 1.0), (8, 2.0, 1.0), (16, 3.0, 0.5), (64, 31.6, 1.0)] {
        let exact = eve_mode_error_exact(a, s, j).value();
        let polar = wedge_error(a, s, j);
        assert!((exact - polar).abs() < 1e-9, "J={j}: {exact} vs {polar}");
    }
}

#[test]
fn heterodyne_mc_matches_wedge_oracle() {
    for (i, (j, a, s)) in [(4u64, 1.0, 1.0), (8, 2.0, 1.0), (16, 3.0, 0.5)]
        .into_iter()
        .enumerate()
    {
        let p = wedge_error(a, s, j);
        let t = sim::eve_block_error(&McPlan::new(1_000_000, 900 + i as u64, 8), 1, a, s, j).unwrap();
        assert!(t.within_sigmas(p, 3.0), "J={j}: mc {} vs {p}", t.rate());
    }
}

#[test]
fn vacuum_heterodyne_indices_are_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let cw = CodeWord::new(vec![ComplexAmp::ZERO; 10]).unwrap();
    let mut hist = [0u64; 8];
    for _ in 0..100_000 {
        for i in eve_decode_block(&cw, 8, 1.0, &mut rng) {
            hist[i as usize] += 1;
        }
    }
    let expected = 1_000_000.0 / 8.0;
    let chi2: f64 = hist.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // scipy.stats.chi2.ppf(0.999, 7)
    assert!(chi2 < 24.321_886_347_856_854, "chi2 = {chi2}");
}

#[test]
fn cppm_bound_evaluator() {
    assert_eq!(cppm_eve_bound(0.0, 1.0, 0.0), 0.75);
    for n in [1.0, 2.0, 10f64.log2(), 10.0] {
        for s in [0.0, 0.5, 5.0, 1000.0] {
            let (_, coarse) = cppm_eve_bound_max(n, s, 1e-3);
            let (_, fine) = cppm_eve_bound_max(n, s, 1e-8);
            assert!((coarse - fine).abs() < 1e-9);
            assert!(fine <= 1.0);
        }
    }
}

proptest! {
    #[test]
    fn srm_error_is_a_probability(a2 in 0.0f64..50.0, j in 2u64..200, m in 1usize..12) {
        let e = srm_error_psk(&psk(a2, j), m).unwrap();
        prop_assert!((0.0..=1.0).contains(&e));
    }

    #[test]
    fn nearest_index_recovers_grid_points(j in 2u64..100_000, l in 0u64..100_000, jitter in -0.49f64..0.49) {
        let l = l % j;
        let phase = 2.0 * PI * (l as f64 + jitter) / j as f64;
        prop_assert_eq!(nearest_phase_index(phase, j), l);
        prop_assert_eq!(nearest_phase_index(phase - 2.0 * PI, j), l);
    }
}
