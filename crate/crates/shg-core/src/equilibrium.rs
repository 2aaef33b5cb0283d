//! Support endpoints, equilibrium density and the checks built on it.
//!
//! Endpoints solve the two constraints (J = 0, unit mass) in the variables
//! N u = e^{b̄} + e^{-ā}, v = e^{b̄} - e^{-ā}. The density is
//! ρ = ϖ⁽¹⁾ + ϖ⁽²⁾ + σϖ⁽³⁾ with every piece written as a contour integral
//! against the leading parametrix. The λ-contours are bent,
//! λ = x ∓ i(c + k|x|), so that e^{-iλτ(ξ-a)} (resp. e^{iλτ(b-ξ)}) decays
//! exponentially along them.

use crate::error::{domain, numerical, Result};
use crate::model::{ModelParams, Potential};
use crate::parametrix::Parametrix;
use crate::quad::{cosine_grid, panel_rule};
use crate::tba::TbaSolution;
use crate::wiener_hopf::{c0, d0, d1, WhFactors};
use crate::C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    NewtonSolved,
    AsymptoticC0,
    AsymptoticD0,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Support {
    pub a_n: f64,
    pub b_n: f64,
    pub x_n: f64,
    pub bar_a: f64,
    pub bar_b: f64,
    pub bar_x: f64,
    pub u_n: f64,
    pub v_n: f64,
    pub method: Method,
    /// e^{-ζ(1-η)x̄}, the size of the dropped parametrix corrections.
    pub budget: f64,
    pub n: u64,
}

impl Support {
    pub fn from_bars(params: &ModelParams, bar_a: f64, bar_b: f64, method: Method) -> Support {
        let tau = params.tau;
        let nf = params.nf();
        let (eb, ema) = (bar_b.exp(), (-bar_a).exp());
        let bar_x = bar_b - bar_a;
        Support {
            a_n: bar_a / tau,
            b_n: bar_b / tau,
            x_n: bar_x / tau,
            bar_a,
            bar_b,
            bar_x,
            u_n: (eb + ema) / nf,
            v_n: eb - ema,
            method,
            budget: (-params.zeta * (1.0 - params.eta) * bar_x).exp(),
            n: params.n,
        }
    }

    /// From (u, v); needs N u > |v|.
    pub fn from_uv(params: &ModelParams, u: f64, v: f64, method: Method) -> Result<Support> {
        let nu = params.nf() * u;
        if !(nu > v.abs()) {
            return domain(format!("(u, v) = ({u}, {v}) is outside N u > |v|"));
        }
        let bar_b = (0.5 * (nu + v)).ln();
        let bar_a = -(0.5 * (nu - v)).ln();
        // keep (u, v) exact: recomputing v = e^{b̄} - e^{-ā} loses digits at large N
        Ok(Support { u_n: u, v_n: v, ..Support::from_bars(params, bar_a, bar_b, method) })
    }

    /// N u_N.
    pub fn nu(&self) -> f64 {
        self.n as f64 * self.u_n
    }

    pub fn contains(&self, xi: f64) -> bool {
        xi > self.a_n && xi < self.b_n
    }
}

/// F[g](i), zero in the g ≡ 0 mode.
pub fn fourier_g_at_i(tba: Option<&TbaSolution>) -> f64 {
    tba.map_or(0.0, |t| t.fourier_g(I).re)
}

/// Raw complex values of the two constraint expressions.
fn constraints_raw(params: &ModelParams, wh: &WhFactors, fgi: f64, s: &Support) -> (C64, C64) {
    let px = Parametrix::new(wh, s);
    let m0 = px.minus_at_zero();
    let (c11i, c12i) = px.at_i();
    let (nf, tau, r, al) = (params.nf(), params.tau, params.r, params.alpha);
    let sig = params.correction_sign();
    let v = s.v_n;
    let nu = s.nu();
    let sp = &wh.special;
    let j = r * c11i * v / (2.0 * I * nf * tau)
        - al * m0.chi11m0 / (I * nf * tau)
        - sig * fgi * ((-s.bar_b).exp() - s.bar_a.exp()) / (PI * nf * tau * wh.r_up_minus_i());
    let m = -(al / (2.0 * PI * nf)) * m0.chi11m0_prime * m0.chi12m0
        - (r / (4.0 * I * PI * nf))
            * (I * v * (m0.chi11m0 * c11i * 0.5 - m0.chi12m0_prime * c11i)
                + nu * (m0.chi11m0 * c12i - m0.chi12m0 * c11i - 0.5 * I * m0.chi11m0 * c11i))
        + sig * fgi * ((-s.bar_b).exp() + s.bar_a.exp()) / (2.0 * PI * PI * nf * sp.r_down_i * sp.r_down_0);
    (j, m)
}

fn real_part(z: C64, what: &str) -> Result<f64> {
    if z.im.abs() > 1e-8 * z.re.abs().max(1e-6) {
        return numerical(format!("{what} has imaginary part {:.3e} (real part {:.3e})", z.im, z.re));
    }
    Ok(z.re)
}

/// The leading constraint functional J at a given support.
pub fn constraint_j(params: &ModelParams, wh: &WhFactors, fgi: f64, support: &Support) -> Result<f64> {
    real_part(constraints_raw(params, wh, fgi, support).0, "J")
}

/// The leading expression for ∫ρ at a given support.
pub fn mass_formula(params: &ModelParams, wh: &WhFactors, fgi: f64, support: &Support) -> Result<f64> {
    real_part(constraints_raw(params, wh, fgi, support).1, "mass")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NewtonConfig {
    pub tol: f64,
    pub max_iter: usize,
    /// Smallest allowed x_N (the ς of the admissible domain is half of it).
    pub min_width: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig { tol: 1e-13, max_iter: 60, min_width: 0.2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonReport {
    pub iterations: usize,
    pub j_residual: f64,
    pub mass_residual: f64,
}

fn scaled_residual(params: &ModelParams, wh: &WhFactors, fgi: f64, u: f64, v: f64) -> Result<[f64; 2]> {
    let s = Support::from_uv(params, u, v, Method::NewtonSolved)?;
    let (j, m) = constraints_raw(params, wh, fgi, &s);
    Ok([j.re * params.nf() * params.tau, m.re - 1.0])
}

/// Damped Newton on (u, v) from (c₀, αc₀/(π(ω₁+ω₂))). A step is halved until
/// the residual decreases and the iterate stays admissible.
pub fn solve_endpoints_with(
    params: &ModelParams,
    wh: &WhFactors,
    fgi: f64,
    cfg: &NewtonConfig,
) -> Result<(Support, NewtonReport)> {
    let c = c0(params, wh);
    let mut u = c;
    let mut v = params.alpha * c / (PI * wh.omega_sum());
    let admissible = |u: f64, v: f64| -> bool {
        Support::from_uv(params, u, v, Method::NewtonSolved).is_ok_and(|s| s.x_n >= cfg.min_width)
    };
    if !admissible(u, v) {
        return domain("initial endpoint guess is outside the admissible domain (N too small?)");
    }
    let norm = |f: [f64; 2]| f[0].abs().max(f[1].abs());
    let mut f = scaled_residual(params, wh, fgi, u, v)?;
    let mut it = 0;
    while norm(f) > cfg.tol {
        if it == cfg.max_iter {
            return numerical(format!("endpoint Newton did not converge, residual {:.3e}", norm(f)));
        }
        it += 1;
        let hu = 1e-7 * u;
        let hv = 1e-7 * u.max(v.abs());
        let fu_p = scaled_residual(params, wh, fgi, u + hu, v)?;
        let fu_m = scaled_residual(params, wh, fgi, u - hu, v)?;
        let fv_p = scaled_residual(params, wh, fgi, u, v + hv)?;
        let fv_m = scaled_residual(params, wh, fgi, u, v - hv)?;
        let jac = [
            [(fu_p[0] - fu_m[0]) / (2.0 * hu), (fv_p[0] - fv_m[0]) / (2.0 * hv)],
            [(fu_p[1] - fu_m[1]) / (2.0 * hu), (fv_p[1] - fv_m[1]) / (2.0 * hv)],
        ];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == 0.0 || !det.is_finite() {
            return numerical("singular Jacobian in the endpoint Newton solve");
        }
        let du = -(jac[1][1] * f[0] - jac[0][1] * f[1]) / det;
        let dv = -(-jac[1][0] * f[0] + jac[0][0] * f[1]) / det;
        let mut step = 1.0;
        loop {
            let (un, vn) = (u + step * du, v + step * dv);
            if admissible(un, vn) {
                let fnew = scaled_residual(params, wh, fgi, un, vn)?;
                if norm(fnew) < norm(f) {
                    u = un;
                    v = vn;
                    f = fnew;
                    break;
                }
            }
            step *= 0.5;
            if step < 1e-12 {
                // no decrease possible: either converged to rounding or stuck
                if norm(f) < 1e3 * cfg.tol {
                    return finish(params, wh, fgi, u, v, it);
                }
                return numerical(format!("endpoint Newton line search failed at residual {:.3e}", norm(f)));
            }
        }
    }
    finish(params, wh, fgi, u, v, it)
}

fn finish(params: &ModelParams, wh: &WhFactors, fgi: f64, u: f64, v: f64, it: usize) -> Result<(Support, NewtonReport)> {
    let s = Support::from_uv(params, u, v, Method::NewtonSolved)?;
    let j = constraint_j(params, wh, fgi, &s)?;
    let m = mass_formula(params, wh, fgi, &s)?;
    Ok((s, NewtonReport { iterations: it, j_residual: j.abs(), mass_residual: (m - 1.0).abs() }))
}

pub fn solve_endpoints(params: &ModelParams, tba: Option<&TbaSolution>, wh: &WhFactors) -> Result<Support> {
    Ok(solve_endpoints_with(params, wh, fourier_g_at_i(tba), &NewtonConfig::default())?.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    LemmaC0,
    TheoremD0,
}

/// Closed-form endpoint expansions through the 1/N² term.
pub fn endpoints_asymptotic(params: &ModelParams, wh: &WhFactors, fgi: f64, variant: Variant) -> Support {
    let nf = params.nf();
    let w = wh.omega_sum();
    let al = params.alpha;
    let sig = params.correction_sign();
    let lin = al / (PI * nf * w);
    let quad = al * al / (2.0 * PI * PI * w * w);
    match variant {
        Variant::LemmaC0 => {
            let c = c0(params, wh);
            let sp = &wh.special;
            let k = (4.0 * I * sp.r_up_i / (c * c * sp.r_down_i)).re * (1.0 + sig * 2.0 * fgi / (PI * params.r));
            let l = (c * nf / 2.0).ln();
            let bar_b = l + lin - (k + quad) / (nf * nf);
            let bar_a = -l + lin + (k - quad) / (nf * nf);
            Support::from_bars(params, bar_a, bar_b, Method::AsymptoticC0)
        }
        Variant::TheoremD0 => {
            let l = (d0(params) * nf / 2.0).ln();
            let k = d1(params) * (1.0 + sig * 2.0 * fgi / (PI * params.r) * (1.0 + al / PI));
            let bar_b = l + lin + (k - quad) / (nf * nf);
            let bar_a = -l + lin - (k + quad) / (nf * nf);
            Support::from_bars(params, bar_a, bar_b, Method::AsymptoticD0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DensityConfig {
    /// Number of cosine-spaced sample points on [a, b].
    pub points: usize,
    /// Contour λ = x ± i(offset + slope·|x|); offset must stay below 1 (poles at ±i).
    pub offset: f64,
    pub slope: f64,
    pub gl_order: usize,
    /// Smallest distance to an edge, relative to x_N, resolved without tail loss.
    pub edge_floor: f64,
    /// Half-width of the real-line and μ-line integrals carrying F[g].
    pub f_half_width: f64,
    pub f_panel: f64,
}

impl Default for DensityConfig {
    fn default() -> Self {
        DensityConfig {
            points: 401,
            offset: 0.5,
            slope: 1.0,
            gl_order: 24,
            edge_floor: 1e-7,
            f_half_width: 40.0,
            f_panel: 0.5,
        }
    }
}

#[derive(Debug, Clone)]
struct Node {
    lambda: C64,
    /// quadrature weight in x
    wx: f64,
    w1: C64,
    w3: C64,
}


/// Precomputed contour nodes; evaluating ρ at a point is then a sum of exponentials.
#[derive(Debug, Clone)]
pub struct DensityModel {
    pub support: Support,
    pub tau: f64,
    pub sigma: f64,
    lower: Vec<Node>,
    upper: Vec<Node>,
    zero: Vec<(f64, C64)>,
    /// Worst-case contribution of the contour parts beyond the last node.
    pub tail_bound: f64,
    /// |λ| where the contours stop.
    pub truncation: f64,
}

fn contour_nodes(offset: f64, slope: f64, order: usize, x_max: f64, sgn: f64) -> Vec<(C64, C64, f64)> {
    let mut breaks = vec![0.0, 0.125];
    while *breaks.last().unwrap() < x_max {
        let l = *breaks.last().unwrap();
        breaks.push(l * std::f64::consts::SQRT_2);
    }
    let half = panel_rule(&breaks, order);
    let mut out = Vec::with_capacity(2 * half.len());
    for &side in &[-1.0, 1.0] {
        for &(x, w) in &half {
            let xs = side * x;
            let lambda = C64::new(xs, sgn * (offset + slope * x));
            let dl = C64::new(1.0, sgn * slope * side) * w;
            out.push((lambda, dl, w));
        }
    }
    out
}

impl DensityModel {
    pub fn new(
        params: &ModelParams,
        tba: Option<&TbaSolution>,
        wh: &WhFactors,
        support: &Support,
        cfg: &DensityConfig,
    ) -> Result<DensityModel> {
        if !(cfg.offset > 0.0 && cfg.offset < 1.0) || !(cfg.slope > 0.0) || cfg.points < 5 {
            return domain("density contour needs 0 < offset < 1, slope > 0 and at least 5 points");
        }
        let tau = params.tau;
        let nf = params.nf();
        let pref = tau / (8.0 * PI * PI * nf);
        let t_floor = tau * cfg.edge_floor * support.x_n;
        let x_max = 60.0 / (cfg.slope * t_floor);
        let px = Parametrix::new(wh, support);
        let uf = px.u_functions(support);
        let sigma = params.correction_sign();
        let fgi = fourier_g_at_i(tba);
        let kappa = params.kappa_eta;
        let with_f = tba.is_some() && sigma != 0.0;

        // μ-lines ℝ ∓ iκ for the 𝓔 vectors, and ℝ for ϖ₀
        let f_rule = {
            let nb = (2.0 * cfg.f_half_width / cfg.f_panel).round() as usize;
            let breaks: Vec<f64> = (0..=nb).map(|k| -cfg.f_half_width + k as f64 * cfg.f_panel).collect();
            panel_rule(&breaks, 16)
        };
        let (mu_up, mu_down, zero): (Vec<(C64, C64)>, Vec<(C64, C64)>, Vec<(f64, C64)>) = match tba {
            Some(t) if with_f => {
                let up = f_rule
                    .par_iter()
                    .map(|&(x, w)| {
                        let mu = C64::new(x, -kappa);
                        let m = w * mu * t.fourier_g(mu) * (-I * support.bar_b * mu).exp()
                            / ((PI * mu / 2.0).cosh() * wh.r_up(mu))
                            / (2.0 * PI * I);
                        (mu, m)
                    })
                    .collect();
                let down = f_rule
                    .par_iter()
                    .map(|&(x, w)| {
                        let mu = C64::new(x, kappa);
                        let m = w * mu * mu * t.fourier_g(mu) * (-I * support.bar_a * mu).exp()
                            / ((PI * mu / 2.0).cosh() * wh.r_down(mu))
                            / (2.0 * PI * I);
                        (mu, m)
                    })
                    .collect();
                let zero = f_rule
                    .par_iter()
                    .map(|&(x, w)| {
                        let l = C64::new(x, 0.0);
                        // λ/R(λ) is smooth through 0, where it behaves like λ²/w
                        let l_over_r = if x.abs() < 1e-12 { C64::new(0.0, 0.0) } else { l / wh.r(l) };
                        (x, -pref * w * l_over_r * t.fourier_g(l) / (PI * x / 2.0).cosh())
                    })
                    .collect();
                (up, down, zero)
            }
            _ => (Vec::new(), Vec::new(), Vec::new()),
        };
        let e_up_explicit = |l: C64| {
            (-support.bar_b).exp() * 2.0 * fgi / (PI * (l + I)) / wh.r_up_minus_i()
        };
        let e_down_explicit = |l: C64| {
            support.bar_a.exp() * 2.0 * fgi / (PI * (I - l)) * (I / wh.special.r_down_i)
        };
        let cauchy = |mu: &[(C64, C64)], l: C64| -> C64 { mu.iter().map(|&(m, c)| c / (m - l)).sum() };

        let r = params.r;
        let lower: Vec<Node> = contour_nodes(cfg.offset, cfg.slope, cfg.gl_order, x_max, -1.0)
            .par_iter()
            .map(|&(l, dl, wx)| {
                let lru = wh.lambda_r_up(l);
                let big_l = (uf.u11(l) + uf.u12(l)) / lru;
                let w1 = -pref * r * big_l * dl;
                let w3 = if with_f {
                    -pref * (e_down_explicit(l) + cauchy(&mu_down, l)) / lru * dl
                } else {
                    C64::new(0.0, 0.0)
                };
                Node { lambda: l, wx, w1, w3 }
            })
            .collect();
        let upper: Vec<Node> = contour_nodes(cfg.offset, cfg.slope, cfg.gl_order, x_max, 1.0)
            .par_iter()
            .map(|&(l, dl, wx)| {
                let rd = wh.r_down(l);
                let w1 = pref * r * uf.u11(l) / rd * dl;
                let w3 = if with_f {
                    pref * (e_up_explicit(l) + cauchy(&mu_up, l)) / rd * dl
                } else {
                    C64::new(0.0, 0.0)
                };
                Node { lambda: l, wx, w1, w3 }
            })
            .collect();

        // tail: the ϖ⁽¹⁾ integrands decay like |λ|^{-3/2}, so the part beyond |x| = X
        // is at most 2C/√X per contour, C measured on the outer half of the nodes
        let c_tail = lower
            .iter()
            .chain(upper.iter())
            .filter(|n| n.lambda.re.abs() > 0.5 * x_max)
            .map(|n| {
                (n.w1.norm() / n.wx) * n.lambda.norm().powf(1.5)
            })
            .fold(0.0f64, f64::max);
        let truncation = x_max * (1.0 + cfg.slope * cfg.slope).sqrt();

        Ok(DensityModel {
            support: *support,
            tau,
            sigma,
            lower,
            upper,
            zero,
            tail_bound: 4.0 * c_tail / x_max.sqrt(),
            truncation,
        })
    }

    /// (ϖ⁽¹⁾, ϖ⁽²⁾, σϖ⁽³⁾) at ξ; all zero outside the open support and at the edges.
    pub fn components(&self, xi: f64) -> [f64; 3] {
        let s = &self.support;
        if !(xi > s.a_n && xi < s.b_n) {
            return [0.0; 3];
        }
        let t = self.tau * (xi - s.a_n);
        let sr = self.tau * (s.b_n - xi);
        let mut p1 = C64::new(0.0, 0.0);
        let mut p3 = C64::new(0.0, 0.0);
        for n in &self.lower {
            let e = (-I * n.lambda * t).exp();
            p1 += e * n.w1;
            p3 += e * n.w3;
        }
        for n in &self.upper {
            let e = (I * n.lambda * sr).exp();
            p1 += e * n.w1;
            p3 += e * n.w3;
        }
        for &(x, w) in &self.zero {
            p3 += C64::new(0.0, -self.tau * x * xi).exp() * w;
        }
        // ϖ⁽²⁾ carries the factor χ₁₂;₋(0), which vanishes for the leading parametrix
        [p1.re, 0.0, self.sigma * p3.re]
    }

    pub fn rho(&self, xi: f64) -> f64 {
        let c = self.components(xi);
        c[0] + c[1] + c[2]
    }

    /// Largest |Im| of the ϖ⁽¹⁾ contour sum over a few points (should vanish).
    pub fn imag_check(&self, xis: &[f64]) -> f64 {
        let s = &self.support;
        xis.iter()
            .filter(|&&x| s.contains(x))
            .map(|&xi| {
                let t = self.tau * (xi - s.a_n);
                let sr = self.tau * (s.b_n - xi);
                let a: C64 = self.lower.iter().map(|n| (-I * n.lambda * t).exp() * n.w1).sum();
                let b: C64 = self.upper.iter().map(|n| (I * n.lambda * sr).exp() * n.w1).sum();
                (a + b).im.abs()
            })
            .fold(0.0, f64::max)
    }
}


/// Density samples on a cosine grid, with the model kept for off-grid values.
#[derive(Debug, Clone)]
pub struct Density {
    pub xi_grid: Vec<f64>,
    pub weights: Vec<f64>,
    pub rho_values: Vec<f64>,
    pub varpi1: Vec<f64>,
    pub varpi2: Vec<f64>,
    /// σϖ⁽³⁾, so that rho = varpi1 + varpi2 + varpi3.
    pub varpi3: Vec<f64>,
    pub budget: f64,
    pub model: DensityModel,
}

pub fn density(
    params: &ModelParams,
    tba: Option<&TbaSolution>,
    wh: &WhFactors,
    support: &Support,
    cfg: &DensityConfig,
) -> Result<Density> {
    let model = DensityModel::new(params, tba, wh, support, cfg)?;
    let (xs, ws) = cosine_grid(support.a_n, support.b_n, cfg.points);
    let comps: Vec<[f64; 3]> = xs.par_iter().map(|&x| model.components(x)).collect();
    if comps.iter().any(|c| !c.iter().all(|v| v.is_finite())) {
        return numerical("non-finite density value");
    }
    let rho_values: Vec<f64> = comps.iter().map(|c| c[0] + c[1] + c[2]).collect();
    Ok(Density {
        xi_grid: xs,
        weights: ws,
        rho_values,
        varpi1: comps.iter().map(|c| c[0]).collect(),
        varpi2: comps.iter().map(|c| c[1]).collect(),
        varpi3: comps.iter().map(|c| c[2]).collect(),
        budget: support.budget,
        model,
    })
}

impl Density {
    pub fn mass(&self) -> f64 {
        self.weights.iter().zip(&self.rho_values).map(|(w, r)| w * r).sum()
    }

    pub fn first_moment(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.rho_values)
            .zip(&self.xi_grid)
            .map(|((w, r), x)| w * r * x)
            .sum()
    }

    pub fn min_rho(&self) -> f64 {
        self.rho_values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// sup |ρ(ξ_k) - ρ(ξ_{M-1-k})|.
    pub fn asymmetry(&self) -> f64 {
        let n = self.rho_values.len();
        (0..n).map(|k| (self.rho_values[k] - self.rho_values[n - 1 - k]).abs()).fold(0.0, f64::max)
    }
}

pub fn mass(d: &Density) -> f64 {
    d.mass()
}

pub fn first_moment(d: &Density) -> f64 {
    d.first_moment()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentAsymptotic {
    /// α/(π(ω₁+ω₂)Nτ)·[ln(Nc₀/2) + i(ln R↓)′(0)]
    pub full: f64,
    /// α ln N/((1+b²)(1+b⁻²)Nτ)
    pub leading: f64,
}

pub fn first_moment_asymptotic(params: &ModelParams, wh: &WhFactors) -> MomentAsymptotic {
    let nf = params.nf();
    let w = wh.omega_sum();
    let shift = (I * wh.special.dlog_r_down_0).re;
    let full = params.alpha / (PI * w * nf * params.tau) * ((nf * c0(params, wh) / 2.0).ln() + shift);
    let b2 = params.b * params.b;
    let leading = params.alpha * nf.ln() / ((1.0 + b2) * (1.0 + 1.0 / b2) * nf * params.tau);
    MomentAsymptotic { full, leading }
}

/// ln(sinh(x)/x) for x ≥ 0 without overflow.
fn ln_sinhc(x: f64) -> f64 {
    if x < 1e-4 {
        x * x / 6.0
    } else if x < 20.0 {
        (x.sinh() / x).ln()
    } else {
        x - std::f64::consts::LN_2 - x.ln() + (-(2.0 * x)).exp().ln_1p()
    }
}

/// ρ at λ, using the grid value when λ is a node.
fn rho_at(d: &Density, lambda: f64) -> (f64, Option<usize>) {
    match d.xi_grid.iter().position(|&x| (x - lambda).abs() <= 1e-14 * (1.0 + lambda.abs())) {
        Some(k) => (d.rho_values[k], Some(k)),
        None => (d.model.rho(lambda), None),
    }
}

/// V_eff(λ) = V(λ) - (1/τ) ∫ ρ(s) Σ_a ln|sinh(ω̄_a(λ-s)/2)| ds, with ln|λ-s|
/// subtracted and integrated in closed form.
pub fn effective_potential(params: &ModelParams, pot: &Potential, d: &Density, lambda: f64) -> f64 {
    let s = &d.model.support;
    let (a, b) = (s.a_n, s.b_n);
    let cs = [PI * params.tau * params.omega1, PI * params.tau * params.omega2];
    let (rl, _) = if s.contains(lambda) { rho_at(d, lambda) } else { (0.0, None) };
    let mut acc = 0.0;
    for (k, (&x, &w)) in d.xi_grid.iter().zip(&d.weights).enumerate() {
        let dist = (lambda - x).abs();
        let mut f = 0.0;
        if dist > 0.0 {
            f += 2.0 * (d.rho_values[k] - rl) * dist.ln();
        }
        let smooth: f64 = cs.iter().map(|&c| ln_sinhc(c * dist) + c.ln()).sum();
        f += d.rho_values[k] * smooth;
        acc += w * f;
    }
    if rl != 0.0 {
        let xlnx = |u: f64| if u > 0.0 { u * u.ln() } else { 0.0 };
        acc += 2.0 * rl * (xlnx(lambda - a) + xlnx(b - lambda) - (b - a));
    }
    pot.eval(lambda, 0) - acc / params.tau
}

/// Σ_a πω_a PV∫ ρ(s) coth(ω̄_a(λ-s)/2) ds - V′(λ).
pub fn singular_residual(params: &ModelParams, pot: &Potential, d: &Density, lambda: f64) -> Result<f64> {
    let s = &d.model.support;
    if !s.contains(lambda) {
        return domain(format!("λ = {lambda} is not inside the support"));
    }
    let (a, b) = (s.a_n, s.b_n);
    let (rl, node) = rho_at(d, lambda);
    let h = 1e-6 * s.x_n;
    let drho = (d.model.rho(lambda + h) - d.model.rho(lambda - h)) / (2.0 * h);
    let mut total = 0.0;
    for om in [params.omega1, params.omega2] {
        let c = PI * params.tau * om;
        let mut acc = 0.0;
        for (k, (&x, &w)) in d.xi_grid.iter().zip(&d.weights).enumerate() {
            if Some(k) == node {
                acc += w * (-drho / c);
            } else {
                acc += w * (d.rho_values[k] - rl) / (c * (lambda - x)).tanh();
            }
        }
        // ∫_a^b coth(c(λ-s)) ds in closed form
        let log_ratio = ((c * (lambda - a)).sinh() / (c * (b - lambda)).sinh()).ln();
        let log_ratio = if log_ratio.is_finite() {
            log_ratio
        } else {
            c * (lambda - a) - c * (b - lambda)
                + (-(2.0 * c * (lambda - a))).exp().ln_1p()
                - (-(2.0 * c * (b - lambda))).exp().ln_1p()
        };
        acc += rl * log_ratio / c;
        total += PI * om * acc;
    }
    Ok(total - pot.eval(lambda, 1))
}

/// max |V′| at the two edges, the scale for PV residuals.
pub fn vprime_scale(pot: &Potential, s: &Support) -> f64 {
    pot.eval(s.a_n, 1).abs().max(pot.eval(s.b_n, 1).abs())
}
