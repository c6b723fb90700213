//! Integer-order Bessel functions `J_m` and `K_m` on the positive axis.
//!
//! `J_m`: power series for small arguments, Miller's backward recurrence
//! (normalised with `J_0 + 2 Σ J_{2k} = 1`) in the bulk, and the Hankel
//! asymptotic expansion once `x > 50·max(1, m)`.
//!
//! `K_m`: `K_0`, `K_1` from their logarithmic series for `x ≤ 2` and from
//! Steed's continued fraction (scaled by `e^x`) above, then forward
//! recurrence in the order, which is the stable direction for `K`.

use std::f64::consts::{FRAC_2_PI, PI};

use crate::error::{Error, Result};

pub const MAX_ORDER: i32 = 60;
pub const J_MAX_ARG: f64 = 1.0e3;
pub const K_MIN_ARG: f64 = 1.0e-6;
pub const K_MAX_ARG: f64 = 700.0;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_LIMIT: f64 = 2.0;

fn check_order(m: i32) -> Result<()> {
    if m.abs() > MAX_ORDER {
        return Err(Error::OutOfEnvelope(format!("Bessel order {m} exceeds |m| <= {MAX_ORDER}")));
    }
    Ok(())
}

/// `J_m(x)` for `0 ≤ m ≤ 60`, `0 ≤ x ≤ 1000`.
pub fn bessel_j(m: u32, x: f64) -> Result<f64> {
    bessel_j_int(m as i32, x)
}

/// `J_m(x)` for any integer order with `|m| ≤ 60`, using `J_{-m} = (-1)^m J_m`.
pub fn bessel_j_int(m: i32, x: f64) -> Result<f64> {
    check_order(m)?;
    if !(0.0..=J_MAX_ARG).contains(&x) {
        return Err(Error::OutOfEnvelope(format!("J argument {x} outside [0, {J_MAX_ARG}]")));
    }
    let n = m.unsigned_abs();
    let v = j_nonneg(n, x);
    Ok(if m < 0 && n % 2 == 1 { -v } else { v })
}

fn j_nonneg(n: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if x <= SERIES_LIMIT {
        j_series(n, x)
    } else if x > 50.0 * (n.max(1) as f64) {
        j_hankel(n, x)
    } else {
        j_miller(n, x)
    }
}

fn j_series(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let t = -half * half;
    // (x/2)^n / n!
    let mut lead = 1.0;
    for k in 1..=n {
        lead *= half / k as f64;
    }
    let mut term = lead;
    let mut sum = term;
    for k in 1..200 {
        term *= t / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn j_miller(n: u32, x: f64) -> f64 {
    let top = (n as f64).max(x);
    let mut start = (top + 30.0 + 2.0 * (40.0 * top).sqrt()) as usize;
    start += start % 2;
    let mut next = 0.0f64; // J_{k+1}
    let mut cur = 1.0e-300f64; // J_k
    let mut sum = 0.0f64;
    let mut target = 0.0f64;
    let inv_x = 1.0 / x;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 * inv_x * cur - next; // J_{k-1}
        next = cur;
        cur = prev;
        if cur.abs() > 1.0e250 {
            cur *= 1.0e-250;
            next *= 1.0e-250;
            sum *= 1.0e-250;
            target *= 1.0e-250;
        }
        let idx = k - 1;
        if idx % 2 == 0 && idx > 0 {
            sum += cur;
        }
        if idx == n as usize {
            target = cur;
        }
    }
    let norm = 2.0 * sum + cur;
    target / norm
}

fn j_hankel(n: u32, x: f64) -> f64 {
    let mu = 4.0 * (n as f64) * (n as f64);
    let eight_x = 8.0 * x;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * eight_x);
        if term.abs() > last {
            break;
        }
        last = term.abs();
        // terms alternate between Q (odd k) and P (even k) with signs + - - + ...
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    // χ = x - (n/2 + 1/4) π, expanded to keep the large x exact
    let phase = (n as f64 * 0.5 + 0.25) * PI;
    let (sx, cx) = x.sin_cos();
    let (sp, cp) = phase.sin_cos();
    let cos_chi = cx * cp + sx * sp;
    let sin_chi = sx * cp - cx * sp;
    (FRAC_2_PI / x).sqrt() * (p * cos_chi - q * sin_chi)
}

/// `J_m'(x) = (m/x) J_m(x) - J_{m+1}(x)` (with `J_0' = -J_1`).
pub fn bessel_j_deriv(m: i32, x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(if m.abs() == 1 { 0.5 * m.signum() as f64 } else { 0.0 });
    }
    Ok(m as f64 / x * bessel_j_int(m, x)? - bessel_j_int(m + 1, x)?)
}

/// `K_m(x)` for `0 ≤ m ≤ 60`, `1e-6 ≤ x ≤ 700`.
pub fn bessel_k(m: u32, x: f64) -> Result<f64> {
    bessel_k_int(m as i32, x)
}

/// `K_m(x)` for any integer order with `|m| ≤ 60`, using `K_{-m} = K_m`.
pub fn bessel_k_int(m: i32, x: f64) -> Result<f64> {
    check_order(m)?;
    if !(K_MIN_ARG..=K_MAX_ARG).contains(&x) {
        return Err(Error::OutOfEnvelope(format!(
            "K argument {x} outside [{K_MIN_ARG}, {K_MAX_ARG}]; use bessel_k_scaled"
        )));
    }
    let v = bessel_k_scaled_int(m, x)? * (-x).exp();
    if !v.is_finite() || v <= 0.0 {
        return Err(Error::OutOfEnvelope(format!("K_{m}({x}) overflows")));
    }
    Ok(v)
}

/// `e^x K_m(x)` for `x ≥ 1e-6`; no upper bound on `x`.
pub fn bessel_k_scaled(m: u32, x: f64) -> Result<f64> {
    bessel_k_scaled_int(m as i32, x)
}

pub fn bessel_k_scaled_int(m: i32, x: f64) -> Result<f64> {
    check_order(m)?;
    if !(x >= K_MIN_ARG) || !x.is_finite() {
        return Err(Error::OutOfEnvelope(format!("K argument {x} below {K_MIN_ARG}")));
    }
    let n = m.unsigned_abs();
    let (k0, k1) = k01_scaled(x);
    if n == 0 {
        return Ok(k0);
    }
    let mut prev = k0;
    let mut cur = k1;
    for j in 1..n {
        let next = prev + 2.0 * j as f64 / x * cur;
        prev = cur;
        cur = next;
        if !cur.is_finite() {
            return Err(Error::OutOfEnvelope(format!("K_{m}({x}) overflows")));
        }
    }
    Ok(cur)
}

/// `(e^x K_0(x), e^x K_1(x))`.
fn k01_scaled(x: f64) -> (f64, f64) {
    if x <= SERIES_LIMIT {
        let (k0, k1) = k01_series(x);
        let e = x.exp();
        (k0 * e, k1 * e)
    } else {
        k01_steed(x)
    }
}

fn k01_series(x: f64) -> (f64, f64) {
    let t = 0.25 * x * x;
    let lg = (0.5 * x).ln() + EULER_GAMMA;
    // I_0, I_1 and the harmonic-number sums share the same powers of t
    let mut i0 = 1.0;
    let mut i1_sum = 1.0; // Σ t^k / (k! (k+1)!)
    let mut k0_tail = 0.0; // Σ_{k≥1} H_k t^k / (k!)^2
    let mut k1_tail = 1.0; // Σ_{k≥0} (H_k + H_{k+1}) t^k / (k! (k+1)!)
    let mut a = 1.0; // t^k / (k!)^2
    let mut b = 1.0; // t^k / (k! (k+1)!)
    let mut h = 0.0;
    for k in 1..60 {
        let kf = k as f64;
        a *= t / (kf * kf);
        b *= t / (kf * (kf + 1.0));
        h += 1.0 / kf;
        let h_next = h + 1.0 / (kf + 1.0);
        i0 += a;
        i1_sum += b;
        k0_tail += h * a;
        k1_tail += (h + h_next) * b;
        if a < 1e-18 * i0 && b < 1e-18 {
            break;
        }
    }
    let i1 = 0.5 * x * i1_sum;
    let k0 = -lg * i0 + k0_tail;
    let k1 = 1.0 / x + lg * i1 - 0.25 * x * k1_tail;
    (k0, k1)
}

/// Steed's continued-fraction evaluation (order 0 and 1), valid for `x ≳ 2`.
fn k01_steed(x: f64) -> (f64, f64) {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..100_000 {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    h *= a1;
    let k0 = (PI / (2.0 * x)).sqrt() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

/// Worst observed value of one invariant over the self-test grid.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SelfTestRow {
    pub name: &'static str,
    pub worst: f64,
    pub tolerance: f64,
}

impl SelfTestRow {
    pub fn passed(&self) -> bool {
        self.worst <= self.tolerance
    }
}

/// Recurrence, derivative and asymptotic-band checks on a fixed grid of
/// orders and arguments covering the envelope.
pub fn selftest() -> Result<Vec<SelfTestRow>> {
    let xs: Vec<f64> = (0..=60).map(|i| 0.1 * 10f64.powf(i as f64 / 60.0 * 4.0)).collect();
    let mut j_rec: f64 = 0.0;
    let mut j_der: f64 = 0.0;
    for m in 0..MAX_ORDER {
        for &x in xs.iter().filter(|&&x| x <= J_MAX_ARG - 1.0) {
            if m >= 1 {
                let a = bessel_j_int(m - 1, x)?;
                let b = bessel_j_int(m + 1, x)?;
                let c = 2.0 * m as f64 / x * bessel_j_int(m, x)?;
                let scale = a.abs().max(b.abs()).max(c.abs());
                if scale > 1e-290 {
                    j_rec = j_rec.max((a + b - c).abs() / scale);
                }
            }
            if m < 40 {
                let h = 1e-6;
                let fd = (bessel_j_int(m, x + h)? - bessel_j_int(m, x - h)?) / (2.0 * h);
                j_der = j_der.max((fd - bessel_j_deriv(m, x)?).abs());
            }
        }
    }
    let mut k_rec: f64 = 0.0;
    let mut k_mono = 0.0;
    for m in 1..MAX_ORDER as u32 {
        for &x in xs.iter().filter(|&&x| (0.05..=K_MAX_ARG).contains(&x)) {
            if let (Ok(a), Ok(b), Ok(c)) = (bessel_k(m - 1, x), bessel_k(m + 1, x), bessel_k(m, x)) {
                if b.is_finite() && b > 0.0 {
                    k_rec = k_rec.max((b - a - 2.0 * m as f64 / x * c).abs() / b);
                }
                if !(c > 0.0) || bessel_k(m, x * 1.01).is_ok_and(|d| d >= c) {
                    k_mono += 1.0;
                }
            }
        }
    }
    let mut band: f64 = 0.0;
    let lead = (PI / 2.0).sqrt();
    for m in [0u32, 1] {
        for i in 0..50 {
            let x = 10.0 + 12.0 * i as f64;
            let g = bessel_k_scaled(m, x)? * x.sqrt();
            band = band.max((g / lead - 1.0).abs());
        }
    }
    Ok(vec![
        SelfTestRow { name: "j_recurrence", worst: j_rec, tolerance: 1e-10 },
        SelfTestRow { name: "j_derivative", worst: j_der, tolerance: 1e-6 },
        SelfTestRow { name: "k_recurrence", worst: k_rec, tolerance: 1e-9 },
        SelfTestRow { name: "k_positive_decreasing", worst: k_mono, tolerance: 0.0 },
        SelfTestRow { name: "k_asymptotic_band", worst: band, tolerance: 0.1 },
        SelfTestRow { name: "k0_at_one", worst: (bessel_k(0, 1.0)? - 0.421_024_438_240_708_34).abs(), tolerance: 1e-9 },
        SelfTestRow { name: "j0_first_zero", worst: bessel_j(0, 2.404_825_557_695_773)?.abs(), tolerance: 1e-10 },
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    const J_REF: &[(u32, f64, f64)] = &[
        (0, 0.5, 0.938_469_807_240_812_9),
        (0, 1.9, 0.281_818_559_374_385_55),
        (0, 2.5, -0.048_383_776_468_198),
        (0, 7.3, 0.288_216_947_635_014_4),
        (0, 11.9, 0.025_049_441_699_589_645),
        (0, 12.5, 0.146_884_054_700_421_1),
        (0, 49.0, -0.052_900_033_322_273_51),
        (0, 51.0, 0.111_564_658_244_686_07),
        (0, 300.0, -0.033_298_554_876_305_67),
        (0, 999.5, 0.024_019_300_140_883_57),
        (1, 0.7, 0.328_995_741_540_058_95),
        (1, 13.0, -0.070_318_052_121_778_37),
        (1, 75.0, -0.085_139_995_044_829_11),
        (2, 5.0, 0.046_565_116_277_752_214),
        (3, 120.0, 0.009_404_539_121_233_908),
        (5, 1.0, 0.000_249_757_730_211_234_44),
        (5, 30.0, -0.143_240_295_512_077_06),
        (10, 3.0, 0.000_012_928_351_645_715_883),
        (20, 20.0, 0.164_747_773_775_326_54),
        (20, 45.0, 0.004_763_343_790_031_299),
        (35, 500.0, 0.028_566_535_607_260_538),
        (60, 2.0, 1.182_237_218_320_969_4e-82),
        (60, 61.0, 0.139_765_236_193_618_94),
        (60, 1000.0, -0.010_245_851_850_792_055),
        (7, 400.0, 0.011_533_808_405_340_83),
    ];

    const K_REF: &[(u32, f64, f64)] = &[
        (0, 1e-06, 13.931_442_073_626_42),
        (0, 0.1, 2.427_069_024_702_016_4),
        (0, 1.0, 0.421_024_438_240_708_34),
        (0, 1.999, 0.114_033_830_589_232_92),
        (0, 2.001, 0.113_754_098_736_684_63),
        (0, 5.0, 0.003_691_098_334_042_594_2),
        (0, 50.0, 3.410_167_749_789_495_6e-23),
        (0, 700.0, 4.669_776_431_685_377e-306),
        (1, 0.001, 999.996_238_156_085_6),
        (1, 1.0, 0.601_907_230_197_234_6),
        (1, 2.0, 0.139_865_881_816_522_43),
        (1, 3.7, 0.017_628_035_102_223_26),
        (1, 100.0, 4.679_853_735_636_909_5e-45),
        (2, 0.5, 7.550_183_551_240_869_5),
        (5, 10.0, 0.000_057_541_849_985_312_28),
        (10, 0.01, 1.857_940_439_048_063_6e28),
        (20, 15.0, 0.012_141_257_729_731_15),
        (60, 1.0, 7.960_735_226_220_905e97),
        (60, 80.0, 5.372_704_742_891_701e-27),
        (60, 700.0, 6.089_442_771_467_785e-305),
        (3, 650.0, 2.529_944_003_800_093_4e-284),
    ];

    #[test]
    fn j_matches_high_precision_reference() {
        for &(m, x, want) in J_REF {
            let got = bessel_j(m, x).unwrap();
            let err = (got - want).abs();
            assert!(
                err <= 1e-12 * want.abs() || err <= 1e-14,
                "J_{m}({x}) = {got}, want {want}, err {err}"
            );
        }
    }

    #[test]
    fn j_at_origin() {
        assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(1, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn j_negative_order_reflection() {
        assert_eq!(bessel_j_int(-1, 3.0).unwrap(), -bessel_j_int(1, 3.0).unwrap());
        assert_eq!(bessel_j_int(-2, 3.0).unwrap(), bessel_j_int(2, 3.0).unwrap());
    }

    #[test]
    fn envelope_errors() {
        assert!(bessel_j(61, 1.0).is_err());
        assert!(bessel_j(0, 1000.5).is_err());
        assert!(bessel_j(0, -0.1).is_err());
        assert!(bessel_k(0, 0.0).is_err());
        assert!(bessel_k(0, 800.0).is_err());
        assert!(bessel_k(60, 1e-6).is_err());
    }

    #[test]
    fn k_matches_high_precision_reference() {
        for &(m, x, want) in K_REF {
            let got = bessel_k(m, x).unwrap();
            let rel = ((got - want) / want).abs();
            assert!(rel < 1e-12, "K_{m}({x}) = {got}, want {want}, rel {rel}");
        }
    }

    #[test]
    fn k_scaled_large_arguments() {
        let refs = [
            (0, 1e4, 0.012_532_984_717_699_286),
            (1, 1e5, 0.003_963_342_160_036_932),
            (5, 3e3, 0.022_976_849_363_071_775),
            (2, 800.0, 0.044_415_257_759_424_544),
        ];
        for (m, x, want) in refs {
            let got = bessel_k_scaled(m, x).unwrap();
            assert!(((got - want) / want).abs() < 1e-12, "K_{m}({x})");
        }
    }

    #[test]
    fn k_decreasing() {
        assert!(bessel_k(0, 2.0).unwrap() < bessel_k(0, 1.0).unwrap());
    }
}
