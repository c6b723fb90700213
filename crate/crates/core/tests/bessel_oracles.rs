use dirac_bag::bessel::{bessel_j, bessel_j_deriv, bessel_j_int, bessel_k, bessel_k_scaled};
use proptest::prelude::*;

/// Plain power series, summed with compensated accumulation. Only trusted
/// for small x, where it serves as an independent reference.
fn j0_series(x: f64) -> f64 {
    let t = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut comp = 0.0;
    for k in 1..80 {
        term *= t / (k * k) as f64;
        let y = term - comp;
        let s = sum + y;
        comp = (s - sum) - y;
        sum = s;
    }
    sum
}

#[test]
fn first_j0_zero_from_independent_bisection() {
    let (mut lo, mut hi) = (2.0, 3.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if j0_series(lo).signum() == j0_series(mid).signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let zero = 0.5 * (lo + hi);
    assert!((zero - 2.404825557695773).abs() < 1e-12);
    assert!(bessel_j(0, 2.404825557695773).unwrap().abs() < 1e-10);
    assert!(bessel_j(0, zero).unwrap().abs() < 1e-12);
}

#[test]
fn k0_at_one_from_integral_representation() {
    // K_0(1) = ∫_0^∞ exp(-cosh t) dt, composite Simpson on [0, 8]
    let n = 20_000;
    let h = 8.0 / n as f64;
    let mut s = (-1f64).exp() + (-(8f64).cosh()).exp();
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * (-(i as f64 * h).cosh()).exp();
    }
    let oracle = s * h / 3.0;
    assert!((oracle - 0.42102443824070834).abs() < 1e-12);
    assert!((bessel_k(0, 1.0).unwrap() - oracle).abs() < 1e-9);
}

#[test]
fn k_asymptotic_band() {
    for m in [0u32, 1] {
        let mut prev = None;
        for i in 0..50 {
            let x = 10.0 + 12.0 * i as f64;
            let g = bessel_k_scaled(m, x).unwrap() * x.sqrt();
            let lead = (std::f64::consts::PI / 2.0).sqrt();
            assert!((g / lead - 1.0).abs() < 0.1, "m={m} x={x}");
            if let Some(p) = prev {
                let ratio: f64 = g / p;
                assert!((ratio - 1.0).abs() < 0.05);
            }
            prev = Some(g);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn j_three_term_recurrence(m in 1i32..59, x in 0.5f64..1000.0) {
        let a = bessel_j_int(m - 1, x).unwrap();
        let b = bessel_j_int(m + 1, x).unwrap();
        let c = bessel_j_int(m, x).unwrap();
        let rhs = 2.0 * m as f64 / x * c;
        let scale = a.abs().max(b.abs()).max(rhs.abs());
        prop_assert!((a + b - rhs).abs() <= 1e-10 * scale + 1e-300);
    }

    #[test]
    fn j_derivative_matches_central_difference(m in 0i32..40, x in 0.1f64..500.0) {
        let h = 1e-6;
        let fd = (bessel_j_int(m, x + h).unwrap() - bessel_j_int(m, x - h).unwrap()) / (2.0 * h);
        let d = bessel_j_deriv(m, x).unwrap();
        prop_assert!((fd - d).abs() < 1e-6);
    }

    #[test]
    fn k_three_term_recurrence(m in 1u32..59, x in 0.05f64..700.0) {
        let (a, b, c) = match (bessel_k(m - 1, x), bessel_k(m + 1, x), bessel_k(m, x)) {
            (Ok(a), Ok(b), Ok(c)) => (a, b, c),
            _ => return Ok(()),
        };
        prop_assert!((b - a - 2.0 * m as f64 / x * c).abs() <= 1e-9 * b);
    }

    #[test]
    fn k_positive_and_decreasing(m in 0u32..30, x in 0.01f64..600.0, dx in 0.001f64..5.0) {
        let (a, b) = match (bessel_k(m, x), bessel_k(m, x + dx)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => return Ok(()),
        };
        prop_assert!(a > 0.0 && b > 0.0 && b < a);
    }
}
