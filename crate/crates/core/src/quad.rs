//! Numerical helpers: adaptive quadrature, normal distribution functions and
//! golden-section maximization.

use libm::{erf as erf_impl, erfc as erfc_impl};

/// Most subintervals [`integrate`] will create.
pub const MAX_SUBINTERVALS: usize = 2000;

/// Globally adaptive Gauss-Kronrod (7/15) integral of `f` over `[a, b]`.
///
/// The subinterval with the largest Kronrod/Gauss difference is bisected
/// until the summed difference is below `abs_tol` or at round-off level
/// relative to the result, or [`MAX_SUBINTERVALS`] is reached. The best
/// available estimate is returned either way.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    // (lo, hi, estimate, error)
    let piece = |lo: f64, hi: f64| {
        let (k, g) = gk15(&f, lo, hi);
        (lo, hi, k, (k - g).abs())
    };
    let mut pieces = vec![piece(a, b)];
    loop {
        let total: f64 = pieces.iter().map(|p| p.2).sum();
        let err: f64 = pieces.iter().map(|p| p.3).sum();
        if err <= abs_tol.max(50.0 * f64::EPSILON * total.abs()) || pieces.len() >= MAX_SUBINTERVALS {
            return total;
        }
        let worst = (0..pieces.len())
            .max_by(|&i, &j| pieces[i].3.total_cmp(&pieces[j].3))
            .expect("non-empty");
        let (lo, hi, _, _) = pieces.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // interval exhausted at floating-point resolution
            return total;
        }
        pieces.push(piece(lo, mid));
        pieces.push(piece(mid, hi));
    }
}

/// Integral of `f` over consecutive `breaks` to relative accuracy `rel`.
///
/// A first pass fixes the magnitude of the result; the second pass refines
/// every piece against `rel` times that magnitude, so tiny integrals keep
/// their relative precision.
pub fn integrate_rel<F: Fn(f64) -> f64>(f: F, breaks: &[f64], rel: f64) -> f64 {
    let pieces = || breaks.windows(2);
    let coarse: f64 = pieces().map(|w| integrate(&f, w[0], w[1], f64::MAX)).sum();
    let tol = (rel * coarse.abs()).max(f64::MIN_POSITIVE);
    pieces()
        .map(|w| integrate(&f, w[0], w[1], tol / (breaks.len() as f64)))
        .sum()
}

// Nodes and weights from the QUADPACK qk15 routine, digits as published.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = half * XGK[i];
        let s = f(center - dx) + f(center + dx);
        kronrod += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kronrod * half, gauss * half)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal CDF `Φ(x)`, accurate in both tails.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc_impl(-x / std::f64::consts::SQRT_2)
}

/// Gaussian tail `Q(x) = 1 - Φ(x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc_impl(x / std::f64::consts::SQRT_2)
}

/// Error function.
pub fn erf(x: f64) -> f64 {
    erf_impl(x)
}

/// Complementary error function, accurate far into the upper tail.
pub fn erfc(x: f64) -> f64 {
    erfc_impl(x)
}

/// Maximize a unimodal `f` on `[lo, hi]` by golden-section search, stopping
/// once the bracket is narrower than `tol`. Returns `(argmax, max)`.
///
/// For monotone `f` the search converges to the better endpoint.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    // The bracket may have collapsed onto an endpoint; compare explicitly.
    let mid = 0.5 * (a + b);
    [(mid, f(mid)), (lo, f(lo)), (hi, f(hi))]
        .into_iter()
        .fold(
            (mid, f64::NEG_INFINITY),
            |best, cand| if cand.1 > best.1 { cand } else { best },
        )
}
