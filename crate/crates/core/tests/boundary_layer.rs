use dirac_bag::disk::{eigenvalue_finite_near, eigenvalues_infinite, normalize_mode, DiskProblem, Sign};
use dirac_bag::layer::{
    apply_t_minus_xi, boundary_identity_check, compare_exterior, decay_rate_fit, disk_stack,
    exp_neg_zb, first_profile, leading_profile, profile_recursion, CollarSpec, ProfileStack,
};
use dirac_bag::quadrature::gauss_legendre;
use dirac_bag::spinor::{tangent_frame_2d, Spinor2, C64};

fn frame_field(c: &CollarSpec, hp: impl Fn(f64) -> C64, hm: impl Fn(f64) -> C64) -> Vec<Spinor2> {
    c.theta.iter().map(|&t| tangent_frame_2d(t).join(hp(t), hm(t))).collect()
}

fn hp_test(t: f64) -> C64 {
    C64::from_polar(1.0 + 0.3 * t.cos(), 2.0 * t)
}

fn hm_test(t: f64) -> C64 {
    C64::from_polar(0.2, -t) + C64::new(0.05 * (3.0 * t).sin(), 0.0)
}

/// `T F` at `(x, y)` by fourth-order central differences, for `F` given
/// pointwise.
fn t_fd(f: &impl Fn(f64, f64) -> Spinor2, x: f64, y: f64, h: f64) -> Spinor2 {
    let d = |dx: f64, dy: f64| {
        let a = f(x + dx, y + dy);
        let b = f(x - dx, y - dy);
        let c = f(x + 2.0 * dx, y + 2.0 * dy);
        let e = f(x - 2.0 * dx, y - 2.0 * dy);
        [
            (8.0 * (a[0] - b[0]) - (c[0] - e[0])) / (12.0 * h),
            (8.0 * (a[1] - b[1]) - (c[1] - e[1])) / (12.0 * h),
        ]
    };
    let d1 = d(h, 0.0);
    let d2 = d(0.0, h);
    let i = C64::new(0.0, 1.0);
    [-i * (d1[1] - i * d2[1]), -i * (d1[0] + i * d2[0])]
}

fn extended(hp: fn(f64) -> C64, hm: fn(f64) -> C64) -> impl Fn(f64, f64) -> Spinor2 {
    move |x: f64, y: f64| {
        let t = y.atan2(x);
        tangent_frame_2d(t).join(hp(t), hm(t))
    }
}

#[test]
fn frame_operator_matches_two_dimensional_differences() {
    let c = CollarSpec::disk(1.0, 256, 0.2).unwrap();
    let xi = C64::new(0.7, 0.0);
    let w = frame_field(&c, hp_test, hm_test);
    let out = apply_t_minus_xi(&c, &w, xi).unwrap();
    let f = extended(hp_test, hm_test);
    let mut worst: f64 = 0.0;
    for k in (0..c.len()).step_by(8) {
        let th = c.theta[k];
        let (x, y) = (th.cos(), th.sin());
        let tf = t_fd(&f, x, y, 1e-3);
        let v = f(x, y);
        for q in 0..2 {
            worst = worst.max((tf[q] - xi * v[q] - out[k][q]).norm());
        }
    }
    assert!(worst < 1e-5, "worst {worst}");
}

#[test]
fn first_profile_constant_seed() {
    let c = CollarSpec::disk(2.0, 256, 0.2).unwrap();
    let g = C64::new(0.8, -0.1);
    let a0 = frame_field(&c, |_| g, |_| C64::new(0.0, 0.0));
    let zero = vec![[C64::new(0.0, 0.0); 2]; c.len()];
    let st = first_profile(&c, &a0, &zero, C64::new(0.0, 0.0)).unwrap();
    for k in 0..c.len() {
        let (p, m) = tangent_frame_2d(c.theta[k]).split(&st.alpha[1][1][k]);
        assert!((p + 0.25 * g).norm() < 1e-12);
        assert!(m.norm() < 1e-14);
    }
}

#[test]
fn first_profile_zero_seed_keeps_free_datum() {
    let c = CollarSpec::disk(1.0, 256, 0.2).unwrap();
    let zero = vec![[C64::new(0.0, 0.0); 2]; c.len()];
    let a1 = frame_field(&c, hp_test, |_| C64::new(0.0, 0.0));
    let st = first_profile(&c, &zero, &a1, C64::new(1.0, 0.0)).unwrap();
    for k in 0..c.len() {
        for q in 0..2 {
            assert!((st.alpha[1][0][k][q] - a1[k][q]).norm() < 1e-15);
            assert_eq!(st.alpha[1][1][k][q], C64::new(0.0, 0.0));
        }
    }
}

#[test]
fn leading_profile_and_growing_branch() {
    let c = CollarSpec::disk(1.0, 64, 0.2).unwrap();
    let a0 = frame_field(&c, hp_test, |_| C64::new(0.0, 0.0));
    let v = leading_profile(&c, &a0, 0.0).unwrap();
    assert_eq!(v, a0);
    let v = leading_profile(&c, &a0, 1.0).unwrap();
    for (a, b) in v.iter().zip(&a0) {
        assert!((a[0] - b[0] * (-1f64).exp()).norm() < 1e-15);
    }
    let w = frame_field(&c, |_| C64::new(1.0, 0.0), |_| C64::new(1.0, 0.0));
    let e = exp_neg_zb(&c, &w, 2.0).unwrap();
    for (k, v) in e.iter().enumerate() {
        let (p, m) = tangent_frame_2d(c.theta[k]).split(v);
        assert!((p.re - (-2f64).exp()).abs() < 1e-14 && (m.re - 2f64.exp()).abs() < 1e-12);
    }
}

/// Evaluate `e^{−zB} α_{j+1} − ∫₀^z e^{−(z−s)B} BΘ (T−ξ) V^j(s) ds` by
/// Gauss quadrature and compare with the closed-form stack.
#[test]
fn recursion_matches_quadrature_of_duhamel_integral() {
    let c = CollarSpec::disk(1.0, 256, 0.2).unwrap();
    let xi = C64::new(1.3, 0.0);
    let a0 = frame_field(&c, hp_test, |_| C64::new(0.0, 0.0));
    let st = ProfileStack::new(c.clone(), a0, xi).unwrap();
    let st = profile_recursion(&st, 3, &[]).unwrap();
    let rule = gauss_legendre(96).unwrap();
    for j in 0..3 {
        let g: Vec<Vec<Spinor2>> = st.alpha[j].iter().map(|a| apply_t_minus_xi(&c, a, xi).unwrap()).collect();
        for &k in &[0usize, 37, 150] {
            let frame = tangent_frame_2d(c.theta[k]);
            let (a_p, a_m) = frame.split(&st.alpha[j + 1][0][k]);
            for z in [0.5, 2.0, 7.0] {
                let (mut ip, mut im) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
                for (s, w) in rule.mapped(0.0, z) {
                    // (T−ξ)V^j(s) in the frame
                    let (mut gp, mut gm) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
                    for (kk, gk) in g.iter().enumerate() {
                        let (p, m) = frame.split(&gk[k]);
                        let f = s.powi(kk as i32) * (-s).exp();
                        gp += p * f;
                        gm += m * f;
                    }
                    // BΘ (h₊, h₋) = (h₋, −h₊)
                    ip += gm * ((-(z - s)).exp() * w);
                    im += -gp * ((z - s).exp() * w);
                }
                let want_p = a_p * (-z).exp() - ip;
                let want_m = a_m * z.exp() - im;
                let (got_p, got_m) = frame.split(&st.eval(j + 1, k, z));
                assert!((want_p - got_p).norm() < 1e-10, "j={j} z={z}");
                assert!((want_m - got_m).norm() < 1e-9 * z.exp(), "j={j} z={z}");
            }
        }
    }
    assert!(st.forcing_residual() < 1e-8);
}

/// The closed form `P₋α_{2,1} = −½ P₋Θ(T−ξ)(α_{1,1} + ½α_{1,2})` follows from
/// boundedness; the combination `¼α_{1,2} − ½α_{1,1}` does not.
#[test]
fn second_order_minus_condition() {
    let c = CollarSpec::disk(1.0, 256, 0.2).unwrap();
    let xi = C64::new(0.4, 0.0);
    let a0 = frame_field(&c, hp_test, |_| C64::new(0.0, 0.0));
    let a1 = frame_field(&c, |t| C64::new(0.5 * t.sin(), 0.1), |_| C64::new(0.0, 0.0));
    let st = first_profile(&c, &a0, &a1, xi).unwrap();
    let st = profile_recursion(&st, 2, std::slice::from_ref(&a1)).unwrap();
    let combo = |wa: f64, wb: f64| -> Vec<Spinor2> {
        st.alpha[1][0].iter().zip(&st.alpha[1][1]).map(|(a, b)| [a[0] * wa + b[0] * wb, a[1] * wa + b[1] * wb]).collect()
    };
    let minus_of_theta = |v: &[Spinor2]| -> Vec<C64> {
        let tv = apply_t_minus_xi(&c, v, xi).unwrap();
        tv.iter().zip(&c.theta).map(|(w, &t)| -0.5 * tangent_frame_2d(t).split(w).0).collect()
    };
    let derived = minus_of_theta(&combo(1.0, 0.5));
    let printed = minus_of_theta(&combo(-0.5, 0.25));
    let mut d_ok: f64 = 0.0;
    let mut d_printed: f64 = 0.0;
    for k in 0..c.len() {
        let m = tangent_frame_2d(c.theta[k]).split(&st.alpha[2][0][k]).1;
        d_ok = d_ok.max((m - derived[k]).norm());
        d_printed = d_printed.max((m - printed[k]).norm());
    }
    assert!(d_ok < 1e-12);
    assert!(d_printed > 1e-2);
}

#[test]
fn exterior_comparison_rates() {
    let l = eigenvalues_infinite(0, 1, 1.0, Sign::Plus).unwrap()[0];
    let c = CollarSpec::disk(1.0, 256, 0.2).unwrap();
    let mut err0 = Vec::new();
    let mut err1 = Vec::new();
    for mass in [400.0, 800.0] {
        let lm = eigenvalue_finite_near(0, mass, 1.0, l).unwrap();
        let mode = normalize_mode(&DiskProblem::finite(1.0, 0, mass).unwrap(), lm).unwrap();
        let st = disk_stack(&mode, &c, 1).unwrap();
        let cmp = compare_exterior(&mode, &st, 10.0, 101).unwrap();
        assert!(cmp.err_plus_at_zero < 1e-10);
        err0.push(cmp.err0);
        err1.push(cmp.err1.unwrap());
    }
    let ratio = err0[0] / err0[1];
    assert!((ratio - 2.0).abs() < 0.3 * 2.0);
    assert!(err0[1] / err1[1] >= 5.0);
}

#[test]
fn exterior_comparison_needs_matching_geometry() {
    let l = eigenvalues_infinite(0, 1, 1.0, Sign::Plus).unwrap()[0];
    let lm = eigenvalue_finite_near(0, 100.0, 1.0, l).unwrap();
    let mode = normalize_mode(&DiskProblem::finite(1.0, 0, 100.0).unwrap(), lm).unwrap();
    let c = CollarSpec::disk(1.0, 256, 0.2).unwrap();
    let st = disk_stack(&mode, &c, 1).unwrap();
    let other = CollarSpec::disk(2.0, 256, 0.2).unwrap();
    let a0 = st.alpha[0][0].clone();
    let st2 = ProfileStack::new(other, a0, st.xi);
    assert!(st2.is_err() || compare_exterior(&mode, &st2.unwrap(), 10.0, 11).is_err());
}

#[test]
fn decay_rates() {
    let l = eigenvalues_infinite(0, 1, 1.0, Sign::Plus).unwrap()[0];
    let mut prev = 0.0;
    for mass in [100.0, 200.0, 400.0, 800.0] {
        let lm = eigenvalue_finite_near(0, mass, 1.0, l).unwrap();
        let mode = normalize_mode(&DiskProblem::finite(1.0, 0, mass).unwrap(), lm).unwrap();
        let fit = decay_rate_fit(&mode).unwrap();
        let k = (mass * mass - lm * lm).sqrt();
        assert!((fit.rate / k - 1.0).abs() < 0.02);
        assert!(fit.rate > prev);
        prev = fit.rate;
    }
}

#[test]
fn cascade_equation_residual() {
    // (T−ξ)V⁰ + ΘB V¹_z + ΘV¹ = 0, with T applied to the collar fields by 2D differences
    let c = CollarSpec::disk(1.0, 512, 0.2).unwrap();
    let xi = C64::new(0.9, 0.0);
    let a0 = frame_field(&c, hp_test, |_| C64::new(0.0, 0.0));
    let zero = vec![[C64::new(0.0, 0.0); 2]; c.len()];
    let st = first_profile(&c, &a0, &zero, xi).unwrap();
    let a11: Vec<(C64, C64)> = st.alpha[1][0].iter().zip(&c.theta).map(|(v, &t)| tangent_frame_2d(t).split(v)).collect();
    let a12: Vec<(C64, C64)> = st.alpha[1][1].iter().zip(&c.theta).map(|(v, &t)| tangent_frame_2d(t).split(v)).collect();
    let mut worst: f64 = 0.0;
    for z in [0.0f64, 0.7, 3.0] {
        let e = (-z).exp();
        let v0 = move |x: f64, y: f64| {
            let t = y.atan2(x);
            let p = hp_test(t) * e;
            tangent_frame_2d(t).join(p, C64::new(0.0, 0.0))
        };
        for k in (0..c.len()).step_by(32) {
            let th = c.theta[k];
            let tv = t_fd(&v0, th.cos(), th.sin(), 1e-3);
            let v = v0(th.cos(), th.sin());
            let lhs0 = [tv[0] - xi * v[0], tv[1] - xi * v[1]];
            // V¹ = (α₁₁ + z α₁₂) e^{−z}; V¹_z = (α₁₂ − α₁₁ − z α₁₂) e^{−z}
            let (p11, m11) = a11[k];
            let (p12, m12) = a12[k];
            let v1p = (p11 + p12 * z) * e;
            let v1m = (m11 + m12 * z) * e;
            let dzp = (p12 - p11 - p12 * z) * e;
            let dzm = (m12 - m11 - m12 * z) * e;
            // ΘB (h₊, h₋) = (−h₋, h₊), Θ (h₊, h₋) = (h₋, h₊)
            let rp = -dzm + v1m;
            let rm = dzp + v1p;
            let add = tangent_frame_2d(th).join(rp, rm);
            for q in 0..2 {
                worst = worst.max((lhs0[q] + add[q]).norm());
            }
        }
    }
    assert!(worst < 1e-5, "worst {worst}");
}

#[test]
fn boundary_identity_ratio() {
    let c = CollarSpec::disk(1.0, 256, 0.2).unwrap();
    for (m, sign) in [(0, Sign::Plus), (1, Sign::Minus), (-1, Sign::Plus)] {
        let l = eigenvalues_infinite(m, 1, 1.0, sign).unwrap()[0];
        let mode = normalize_mode(&DiskProblem::infinite(1.0, m).unwrap(), l).unwrap();
        let xi = C64::new(0.25, 0.0);
        let rep = boundary_identity_check(&mode, &c, xi).unwrap();
        assert!((rep.ratio - rep.predicted_ratio).norm() < 1e-10);
        assert!(rep.residual > 0.1);
    }
}
