use proptest::prelude::*;
use shg_core::equilibrium::{Method, Support};
use shg_core::model::*;
use shg_core::oracle::project_simplex;
use shg_core::parametrix::{pairing, Parametrix};
use shg_core::quad::cosine_grid;
use shg_core::tba::*;
use shg_core::wiener_hopf::WhFactors;
use shg_core::C64;
use std::sync::OnceLock;

fn tba() -> &'static TbaSolution {
    static T: OnceLock<TbaSolution> = OnceLock::new();
    T.get_or_init(|| solve_tba(10.0, 1.0, &GridConfig::default()).unwrap())
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn potential_alpha_reflection(alpha in -2.0..2.0f64, l in -1.5..1.5f64, n in 10u64..100_000) {
        let p = derive_scales(10.0, 1.0, alpha, n, 0.1).unwrap();
        let pos = Potential::new(&p, Some(tba())).unwrap();
        let neg = Potential::new(&p.with_alpha(-alpha), Some(tba())).unwrap();
        for order in 0..=2u8 {
            let a = neg.eval(l, order);
            let b = if order == 1 { -pos.eval(-l, order) } else { pos.eval(-l, order) };
            prop_assert!((a - b).abs() <= 1e-13 * a.abs().max(1e-12));
        }
    }

    #[test]
    fn zero_g_is_analytic(r in 0.1..20.0f64, alpha in -1.0..1.0f64, l in -2.0..2.0f64) {
        let p = derive_scales(r, 1.0, alpha, 1000, 0.1).unwrap();
        let v = potential(&p, None, l, 0).unwrap();
        let want = r / (p.nf() * p.tau) * (p.tau * l).cosh() - alpha * l / p.nf();
        prop_assert!((v - want).abs() <= 1e-14 * want.abs().max(1e-12));
    }

    #[test]
    fn convexity_margin_ignores_alpha(alpha in -3.0..3.0f64) {
        let p = derive_scales(10.0, 1.0, alpha, 1000, 0.1).unwrap();
        let grid: Vec<f64> = (-20..=20).map(|k| 0.05 * k as f64).collect();
        let a = convexity_margin(&p, Some(tba()), &grid).unwrap();
        let b = convexity_margin(&p.with_alpha(0.0), Some(tba()), &grid).unwrap();
        prop_assert_eq!(a, b);
        prop_assert!(a > 0.0);
    }

    #[test]
    fn tba_even_and_above_driving(x in 0.0..6.0f64, j in 0usize..2048) {
        let t = tba();
        prop_assert_eq!(t.eps_at(x).to_bits(), t.eps_at(-x).to_bits());
        prop_assert_eq!(t.g_of(x), t.g_of(-x));
        let y = t.grid[j];
        prop_assert!(t.eps_values[j] >= driving_amplitude(10.0, 1.0) * y.cosh() * (1.0 - 1e-15));
        // off the grid only up to interpolation error
        prop_assert!(t.eps_at(x) >= driving_amplitude(10.0, 1.0) * x.cosh() * (1.0 - 1e-9));
    }

    #[test]
    fn fourier_g_even(mu in -30.0..30.0f64) {
        let t = tba();
        let a = t.fourier_g(C64::new(mu, 0.0));
        let b = t.fourier_g(C64::new(-mu, 0.0));
        let scale = t.fourier_g(C64::new(0.0, 0.0)).norm();
        prop_assert!((a - b).norm() <= 1e-15 * scale);
    }

    #[test]
    fn wh_identities(b in 0.4..2.5f64, x in -30.0..30.0f64, y in -0.45..0.45f64) {
        prop_assume!(x.abs() > 1e-3 || y.abs() > 1e-3);
        let p = derive_scales(1.0, b, 0.0, 100, 0.1).unwrap();
        let wh = WhFactors::from_params(&p).unwrap();
        let l = C64::new(x, y);
        prop_assert!(rel(wh.r_up(l) * wh.r_down(l), wh.r(l)) < 1e-10);
        prop_assert!(rel(wh.r_up(-l) * l, wh.r_down(l)) < 1e-10);
        prop_assert!(rel(wh.r_up(l.conj()).conj(), wh.r_down(l) / l) < 1e-10);
        // oddness of R and reality on the real axis
        prop_assert!(rel(-wh.r(-l), wh.r(l)) < 1e-12);
        if y == 0.0 {
            prop_assert!(wh.r(l).im.abs() <= 1e-14 * wh.r(l).norm());
        }
    }

    #[test]
    fn continuation_round_trip(x in -10.0..10.0f64, y in 0.01..0.8f64) {
        let p = derive_scales(10.0, 1.0, 0.2, 1000, 0.1).unwrap();
        let wh = WhFactors::from_params(&p).unwrap();
        let s = Support::from_bars(&p, -6.9, 6.95, Method::NewtonSolved);
        let px = Parametrix::new(&wh, &s);
        let l = C64::new(x, y);
        let (c11, c12) = px.upper(l);
        let (m11, m12) = px.upper_minus(l);
        let e = (C64::new(0.0, 1.0) * l * s.bar_x).exp();
        prop_assert!(rel(e * m11, c11) < 1e-10);
        prop_assert!(rel(e * m12, c12) < 1e-10);
        prop_assert!(rel(c12, 1.0 / wh.r_up(l)) < 1e-12);
    }

    #[test]
    fn u_identity(x in -8.0..8.0f64, alpha in -1.0..1.0f64) {
        let p = derive_scales(10.0, 1.0, alpha, 1000, 0.1).unwrap();
        let wh = WhFactors::from_params(&p).unwrap();
        let s = Support::from_bars(&p, -6.9, 6.95, Method::NewtonSolved);
        let px = Parametrix::new(&wh, &s);
        let u = px.u_functions(&s);
        let l = C64::new(x, 0.2);
        let (c11, c12) = px.upper(l);
        prop_assert!(u.identity_residual(l, c11, c12) < 10.0 * s.budget.max(1e-13));
    }

    #[test]
    fn reflection_within_budget(x in -8.0..8.0f64, y in 0.05..0.3f64) {
        let p = derive_scales(10.0, 1.0, 0.0, 1000, 0.1).unwrap();
        let wh = WhFactors::from_params(&p).unwrap();
        let s = Support::from_bars(&p, -6.9, 6.9, Method::NewtonSolved);
        let px = Parametrix::new(&wh, &s);
        let l = C64::new(x, y);
        let scale = px.upper(l).0.norm().max(px.upper(l).1.norm());
        prop_assert!(px.reflection_residual(l) <= 10.0 * s.budget * scale.max(1.0));
    }

    #[test]
    fn upper_pairing_vanishes(x in -10.0..10.0f64, y in 0.05..0.5f64) {
        let p = derive_scales(10.0, 1.0, 0.0, 1000, 0.1).unwrap();
        let wh = WhFactors::from_params(&p).unwrap();
        let s = Support::from_bars(&p, -6.9, 6.9, Method::NewtonSolved);
        let px = Parametrix::new(&wh, &s);
        let e = px.e_vectors(C64::new(x, y));
        prop_assert!(pairing(e.e_l_up, e.e_r_up).norm() <= 1e-15 * e.e_l_up[0].norm().powi(2));
    }

    #[test]
    fn support_identity(ba in -9.0..-3.0f64, bb in 3.0..9.0f64) {
        let p = derive_scales(10.0, 1.0, 0.0, 1000, 0.1).unwrap();
        let s = Support::from_bars(&p, ba, bb, Method::NewtonSolved);
        let lhs = s.nu() * s.nu() - s.v_n * s.v_n;
        let rhs = 4.0 * (bb - ba).exp();
        prop_assert!((lhs / rhs - 1.0).abs() < 1e-12);
        prop_assert!(s.a_n < 0.0 && s.b_n > 0.0);
        prop_assert!((s.x_n - (s.b_n - s.a_n)).abs() < 1e-15);
    }

    #[test]
    fn cosine_grid_rules(a in -3.0..0.0f64, w in 0.1..5.0f64, n in 16usize..500) {
        let (xs, ws) = cosine_grid(a, a + w, n);
        prop_assert_eq!(xs.len(), n);
        prop_assert!(ws.iter().all(|&v| v >= 0.0));
        // exact for the semicircle, whose θ-integrand is a trigonometric polynomial
        let semi: f64 = xs.iter().zip(&ws).map(|(&x, &v)| v * ((x - a) * (a + w - x)).max(0.0).sqrt()).sum();
        prop_assert!((semi / (std::f64::consts::PI * w * w / 8.0) - 1.0).abs() < 1e-12);
        let mid = a + 0.5 * w;
        for k in 0..n {
            prop_assert!(((xs[k] - mid) + (xs[n - 1 - k] - mid)).abs() < 1e-14 * w);
            prop_assert_eq!(ws[k], ws[n - 1 - k]);
        }
        prop_assert!(xs.windows(2).all(|p| p[1] > p[0]));
    }

    #[test]
    fn simplex_projection(v in prop::collection::vec(-5.0..5.0f64, 2..60)) {
        let p = project_simplex(&v);
        prop_assert!(p.iter().all(|&x| x >= 0.0));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        let q = project_simplex(&p);
        for (a, b) in p.iter().zip(&q) {
            prop_assert!((a - b).abs() < 1e-14);
        }
    }
}
