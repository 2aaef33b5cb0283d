//! Acceptance suite: one PASS/FAIL line per criterion, then a single assert.
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::io::Write;
use shg_core::equilibrium::*;
use shg_core::model::*;
use shg_core::oracle::*;
use shg_core::tba::*;
use shg_core::wiener_hopf::*;
use shg_core::C64;
use statrs::function::gamma::gamma as gamma_real;
use std::f64::consts::PI;
use std::time::Instant;

struct Outcome {
    id: u32,
    pass: bool,
    detail: String,
}

fn line(id: u32, pass: bool, detail: String) -> Outcome {
    Outcome { id, pass, detail }
}

fn tba10() -> TbaSolution {
    solve_tba(10.0, 1.0, &GridConfig::default()).unwrap()
}

fn criterion_1() -> Outcome {
    let t0 = Instant::now();
    let (mut fac, mut refl, mut conj) = (0f64, 0f64, 0f64);
    for b in [0.5, 1.0, 2.0] {
        let p = derive_scales(1.0, b, 0.0, 100, 0.1).unwrap();
        let wh = WhFactors::from_params(&p).unwrap();
        for im in [0.0, 0.4, -0.4] {
            for k in 0..=480 {
                // offset keeps λ = 0 (pole of R↑) off the grid
                let l = C64::new(-30.0 + 0.125 * k as f64 + 0.0625, im);
                let r = wh.r(l);
                fac = fac.max((r - wh.r_up(l) * wh.r_down(l)).norm() / r.norm());
                let rd = wh.r_down(l);
                refl = refl.max((wh.r_up(-l) * l - rd).norm() / rd.norm());
                conj = conj.max((wh.r_up(l.conj()).conj() - rd / l).norm() / (rd / l).norm());
            }
        }
    }
    let dt = t0.elapsed().as_secs_f64();
    let pass = fac < 1e-10 && refl < 1e-10 && conj < 1e-10 && dt < 5.0;
    line(1, pass, format!("Wiener-Hopf identities: factorization {fac:.2e}, reflection {refl:.2e}, conjugation {conj:.2e} (tol 1e-10), {dt:.2}s"))
}

fn criterion_2() -> Outcome {
    let mut worst = 0f64;
    let mut re_dlog = 0f64;
    for b in [0.5, 1.0, 2.0] {
        let p = derive_scales(1.0, b, 0.0, 100, 0.1).unwrap();
        let wh = WhFactors::from_params(&p).unwrap();
        let sw = (p.omega1 + p.omega2).sqrt();
        let s = wh.special;
        worst = worst.max((s.r_down_0 - C64::new(0.0, -sw)).norm());
        worst = worst.max((s.lim0_lambda_r_up - C64::new(0.0, sw)).norm());
        re_dlog = re_dlog.max(s.dlog_r_down_0.re.abs());
    }
    line(2, worst < 1e-8 && re_dlog < 1e-8, format!("special values: |R↓(0)+i√w|, |(λR↑)(0)-i√w| <= {worst:.2e}; |Re (ln R↓)′(0)| = {re_dlog:.2e} (tol 1e-8)"))
}

fn criterion_3() -> Outcome {
    let g14 = gamma_real(0.25);
    let d0_closed = 2f64.sqrt() * g14 * g14 / PI.sqrt();
    let r = 10.0;
    let p = derive_scales(r, 1.0, 0.0, 1000, 0.1).unwrap();
    let c = constants(&p, Which::All).unwrap();
    let e_d0 = (c.d0 * r / d0_closed - 1.0).abs();
    let e_c0 = (c.c0 * r / (2.0 * d0_closed) - 1.0).abs();
    let e_d1 = (c.d1 / (r * r / (8.0 * PI)) - 1.0).abs();
    let mut e_ratio = 0f64;
    for b in [0.7, 1.0, 1.3] {
        let p = derive_scales(r, b, 0.0, 1000, 0.1).unwrap();
        let c = constants(&p, Which::All).unwrap();
        let s1 = 1.0 / (2.0 * (1.0 + b * b));
        let s2 = 1.0 / (2.0 * (1.0 + 1.0 / (b * b)));
        let want = (2.0 * s1).powf(-2.0 * s1) * (2.0 * s2).powf(-2.0 * s2);
        e_ratio = e_ratio.max((c.ratio_c0_d0 / want - 1.0).abs());
    }
    // the rounded decimals 10.48836 / 20.97672 sit 1.2e-5 away from the closed form
    let dec = (c.d0 * r / 10.48836 - 1.0).abs();
    let pass = e_d0 < 1e-6 && e_c0 < 1e-6 && e_ratio < 1e-8 && e_d1 < 1e-10;
    line(
        3,
        pass,
        format!(
            "constants at b=1: d0·r = {:.7} (rel {e_d0:.1e} vs √2Γ(1/4)²/√π), c0·r = {:.7} (rel {e_c0:.1e}), ratio rel {e_ratio:.1e}, d1 rel {e_d1:.1e}; printed decimal 10.48836 differs by {dec:.1e}",
            c.d0 * r,
            c.c0 * r
        ),
    )
}

fn criterion_4() -> Outcome {
    let t0 = Instant::now();
    let t = tba10();
    let dt = t0.elapsed().as_secs_f64();
    let n = t.eps_values.len();
    let even = (0..n).map(|j| (t.eps_values[j] - t.eps_values[n - 1 - j]).abs()).fold(0.0, f64::max);
    let e0 = t.eps_at(0.0) - 20.0;
    let mut res = t.residual_sup;
    for b in [0.5, 2.0] {
        res = res.max(solve_tba(10.0, b, &GridConfig::default()).unwrap().residual_sup);
    }
    let pass = res < 1e-8 && even < 1e-12 && (0.0..=1e-6).contains(&e0) && dt < 10.0;
    line(4, pass, format!("TBA: residual {res:.2e}, evenness {even:.1e}, ε(0)-20 = {e0:.3e}, {dt:.2}s"))
}

fn criterion_5(tba: &TbaSolution) -> Outcome {
    let wh = WhFactors::new(2.0 / PI, 2.0 / PI).unwrap();
    let fgi = fourier_g_at_i(Some(tba));
    let mut res = 0f64;
    let mut sym = 0f64;
    let mut gaps = Vec::new();
    for n in [1000u64, 10_000, 100_000] {
        for alpha in [0.0, 0.5] {
            let p = derive_scales(10.0, 1.0, alpha, n, 0.1).unwrap();
            let (s, rep) = solve_endpoints_with(&p, &wh, fgi, &NewtonConfig::default()).unwrap();
            res = res.max(rep.j_residual.abs()).max(rep.mass_residual.abs());
            if alpha == 0.0 {
                sym = sym.max((s.a_n + s.b_n).abs());
                let asy = endpoints_asymptotic(&p, &wh, fgi, Variant::LemmaC0);
                gaps.push((s.bar_b - asy.bar_b).abs());
            }
        }
    }
    let mono = gaps.windows(2).all(|w| w[1] < w[0]);
    let pass = res < 1e-10 && sym < 1e-10 && mono;
    line(5, pass, format!("endpoints: Newton residual {res:.1e}, |a+b| {sym:.1e}, |Δb̄| vs closed form over N=1e3,1e4,1e5: {}", gaps.iter().map(|g| format!("{g:.2e}")).collect::<Vec<_>>().join(", ")))
}

fn criterion_6(tba: &TbaSolution) -> Outcome {
    let wh = WhFactors::new(2.0 / PI, 2.0 / PI).unwrap();
    let fgi = fourier_g_at_i(Some(tba));
    let mut pass = true;
    let mut parts = Vec::new();
    for alpha in [0.0, 0.5] {
        let p = derive_scales(10.0, 1.0, alpha, 1000, 0.1).unwrap();
        let (s, _) = solve_endpoints_with(&p, &wh, fgi, &NewtonConfig::default()).unwrap();
        let d = density(&p, Some(tba), &wh, &s, &DensityConfig::default()).unwrap();
        let mass_err = (d.mass() - 1.0).abs();
        let mass_tol = 1e-3f64.max(10.0 * d.budget);
        let min = d.min_rho();
        let mut spread = 0f64;
        for edge in [1.0, -1.0] {
            let r: Vec<f64> = [1e-2, 1e-3, 1e-4]
                .iter()
                .map(|&dl| {
                    let x = if edge > 0.0 { s.b_n - dl } else { s.a_n + dl };
                    d.model.rho(x) / dl.sqrt()
                })
                .collect();
            let hi = r.iter().cloned().fold(f64::MIN, f64::max);
            let lo = r.iter().cloned().fold(f64::MAX, f64::min);
            spread = spread.max(hi / lo - 1.0);
        }
        let asym = if alpha == 0.0 { d.asymmetry() } else { 0.0 };
        pass &= mass_err < mass_tol && min >= -1e-6 && asym < 1e-6 && spread < 0.2;
        parts.push(format!("α={alpha}: |mass-1| {mass_err:.1e}, min ρ {min:.1e}, asym {asym:.1e}, edge spread {:.1}%", 100.0 * spread));
    }
    line(6, pass, format!("density N=1e3: {}", parts.join("; ")))
}

fn criterion_7(tba: &TbaSolution) -> Outcome {
    let t0 = Instant::now();
    let wh = WhFactors::new(2.0 / PI, 2.0 / PI).unwrap();
    let fgi = fourier_g_at_i(Some(tba));
    let mut pass = true;
    let mut parts = Vec::new();
    for alpha in [0.0, 0.5] {
        let p = derive_scales(10.0, 1.0, alpha, 1000, 0.1).unwrap();
        let (s, _) = solve_endpoints_with(&p, &wh, fgi, &NewtonConfig::default()).unwrap();
        let d = density(&p, Some(tba), &wh, &s, &DensityConfig::default()).unwrap();
        let pot = Potential::new(&p, Some(tba)).unwrap();
        let mid = 0.5 * (s.a_n + s.b_n);
        let q = 0.25 * s.x_n;
        let v: Vec<f64> = (0..=20).map(|k| effective_potential(&p, &pot, &d, mid - q + 2.0 * q * k as f64 / 20.0)).collect();
        let hi = v.iter().cloned().fold(f64::MIN, f64::max);
        let lo = v.iter().cloned().fold(f64::MAX, f64::min);
        let c_eq = v.iter().sum::<f64>() / v.len() as f64;
        let rel = (hi - lo) / c_eq.abs();
        let ext = [0.05, 0.2, 0.5]
            .iter()
            .flat_map(|&f| [s.b_n + f * s.x_n, s.a_n - f * s.x_n])
            .map(|x| effective_potential(&p, &pot, &d, x))
            .fold(f64::MAX, f64::min);
        let scale = vprime_scale(&pot, &s);
        let n = d.xi_grid.len();
        let pv = (1..=5)
            .map(|k| singular_residual(&p, &pot, &d, d.xi_grid[k * (n - 1) / 6]).unwrap().abs() / scale)
            .fold(0.0, f64::max);
        pass &= rel < 1e-2 && ext > hi && pv < 1e-3;
        parts.push(format!("α={alpha}: spread/|C| {rel:.1e}, exterior gap {:.3}, PV {pv:.1e}", ext - hi));
    }
    let dt = t0.elapsed().as_secs_f64();
    pass &= dt < 120.0;
    line(7, pass, format!("variational N=1e3: {}, {dt:.1}s", parts.join("; ")))
}

fn criterion_8(tba: &TbaSolution) -> Outcome {
    let wh = WhFactors::new(2.0 / PI, 2.0 / PI).unwrap();
    let fgi = fourier_g_at_i(Some(tba));
    let moment = |alpha: f64, n: u64| {
        let p = derive_scales(10.0, 1.0, alpha, n, 0.1).unwrap();
        let (s, _) = solve_endpoints_with(&p, &wh, fgi, &NewtonConfig::default()).unwrap();
        let d = density(&p, Some(tba), &wh, &s, &DensityConfig::default()).unwrap();
        (d.first_moment(), first_moment_asymptotic(&p, &wh).leading)
    };
    let (m0, _) = moment(0.0, 1000);
    let (m4, l4) = moment(0.5, 10_000);
    let (m6, l6) = moment(0.5, 1_000_000);
    let (r4, r6) = (m4 / l4, m6 / l6);
    let pass = m0.abs() < 1e-8 && (r4 - 1.0).abs() < 0.15 && (r6 - 1.0).abs() < 0.08;
    line(8, pass, format!("moment: α=0 gives {m0:.1e}; leading-order ratio {r4:.4} at N=1e4 (tol 15%), {r6:.4} at N=1e6 (tol 8%)"))
}

fn criterion_9(tba: &TbaSolution) -> Outcome {
    let t0 = Instant::now();
    let wh = WhFactors::new(2.0 / PI, 2.0 / PI).unwrap();
    let fgi = fourier_g_at_i(Some(tba));
    let cfg = OracleConfig::default();
    let p = derive_scales(10.0, 1.0, 0.0, 200, 0.1).unwrap();
    let (s, _) = solve_endpoints_with(&p, &wh, fgi, &NewtonConfig::default()).unwrap();
    let d = density(&p, Some(tba), &wh, &s, &DensityConfig::default()).unwrap();
    let (disc, m) = discriminator(&p, Some(tba), &cfg).unwrap();
    let (a, b) = oracle_endpoints(&m, cfg.threshold).unwrap();
    let ea = (a - s.a_n).abs() / s.x_n;
    let eb = (b - s.b_n).abs() / s.x_n;
    let mean0 = (m.mean() - d.first_moment()).abs();
    // the mean comparison is only informative with α ≠ 0
    let p5 = p.with_alpha(0.5);
    let (s5, _) = solve_endpoints_with(&p5, &wh, fgi, &NewtonConfig::default()).unwrap();
    let d5 = density(&p5, Some(tba), &wh, &s5, &DensityConfig::default()).unwrap();
    let m5 = minimize_energy(&p5, Some(tba), &cfg).unwrap();
    let mean5 = (m5.mean() - d5.first_moment()).abs();
    let dt = t0.elapsed().as_secs_f64();
    let pass = ea < 0.05 && eb < 0.05 && mean0 < 1e-2 && mean5 < 1e-2 && disc.clear && dt < 300.0;
    line(
        9,
        pass,
        format!(
            "oracle N=200: endpoint errors {ea:.1e}, {eb:.1e} of x_N; |mean-moment| {mean0:.1e} (α=0), {mean5:.1e} (α=0.5); b̄ oracle {:.4} vs ln(c0N/2) {:.4}, ln(d0N/2) {:.4}, bias {:.3}: winner {} ({}), {dt:.0}s",
            disc.bbar_oracle,
            disc.bbar_c0,
            disc.bbar_d0,
            disc.bias,
            disc.winner,
            if disc.clear { "clear" } else { "not clear" }
        ),
    )
}

fn criterion_10(tba: &TbaSolution) -> Outcome {
    let q = QuadConfig::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [2usize, 3] {
        let pts = if n == 2 { 200 } else { 100 };
        let base = derive_scales(10.0, 1.0, 0.3, 200, 0.1).unwrap();
        let z = |alpha: f64, pts: usize| {
            z_small_n(&base.with_alpha(alpha), Some(tba), n, &QuadConfig { points: Some(pts), ..q }).unwrap()
        };
        let (zp, zm, z2) = (z(0.3, pts), z(-0.3, pts), z(0.3, 2 * pts));
        let h = 1e-3;
        let dz = (z(h, pts) - z(-h, pts)) / (2.0 * h);
        let even = (zp - zm).abs();
        let refine = (z2 - zp).abs();
        pass &= zp.is_finite() && even < 1e-8 && refine < 1e-6 && dz.abs() < 1e-6;
        parts.push(format!("n={n}: log Z {zp:.6}, even {even:.1e}, refine {refine:.1e}, ∂α {:.1e}", dz.abs()));
    }
    line(10, pass, format!("small-N partition: {}", parts.join("; ")))
}

#[test]
fn acceptance() {
    let tba = tba10();
    let outcomes = vec![
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(&tba),
        criterion_6(&tba),
        criterion_7(&tba),
        criterion_8(&tba),
        criterion_9(&tba),
        criterion_10(&tba),
    ];
    // straight to the handle so the lines show without --nocapture
    let mut out = std::io::stdout().lock();
    for o in &outcomes {
        writeln!(out, "criterion {:>2} {} {}", o.id, if o.pass { "PASS" } else { "FAIL" }, o.detail).unwrap();
    }
    drop(out);
    let failed: Vec<u32> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
