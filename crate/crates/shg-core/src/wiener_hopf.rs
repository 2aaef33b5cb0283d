//! The jump function R and its Gamma-function Wiener-Hopf factors
//!
//!   R(λ) = sinh(λ(1/ω₁+1/ω₂)/2) / (2 sinh(λ/2ω₁) sinh(λ/2ω₂)) = R↑(λ) R↓(λ),
//!
//! with R↑ analytic and zero-free above ℝ (apart from the simple pole of R↑
//! at 0) and R↓ below. Both factors are evaluated through their logarithms
//! written with Γ(1 ± i c λ), which have no pole at λ = 0:
//!
//!   ln R↓(λ)    = ln(-i√w) - iλp + lnΓ(1+ic₁λ) + lnΓ(1+ic₂λ) - lnΓ(1+iλ/ζ)
//!   ln(λR↑)(λ)  = ln( i√w) + iλp + lnΓ(1-ic₁λ) + lnΓ(1-ic₂λ) - lnΓ(1-iλ/ζ)
//!
//! where w = ω₁+ω₂, c_a = 1/(2πω_a) and p = c₁ ln(ω₂/w) + c₂ ln(ω₁/w).

use crate::error::{domain, numerical, Result};
use crate::gamma::ln_gamma;
use crate::model::ModelParams;
use crate::C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const I: C64 = C64 { re: 0.0, im: 1.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Distance below which a pole or zero is reported instead of evaluated.
pub const POLE_GUARD: f64 = 1e-10;

/// Values of the factors at the points used downstream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpecialValues {
    /// R↓(0)
    pub r_down_0: C64,
    /// (λR↑)(0)
    pub lim0_lambda_r_up: C64,
    /// (ln R↓)′(0)
    pub dlog_r_down_0: C64,
    pub r_up_i: C64,
    pub r_down_i: C64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WhFactors {
    pub omega1: f64,
    pub omega2: f64,
    c1: f64,
    c2: f64,
    cz: f64,
    p: f64,
    ln_sqrt_w: f64,
    pub special: SpecialValues,
}

impl WhFactors {
    pub fn new(omega1: f64, omega2: f64) -> Result<WhFactors> {
        if !(omega1 > 0.0 && omega2 > 0.0) {
            return domain("periods must be positive");
        }
        let w = omega1 + omega2;
        let c1 = 1.0 / (2.0 * PI * omega1);
        let c2 = 1.0 / (2.0 * PI * omega2);
        let zeta = 2.0 * PI * omega1 * omega2 / w;
        let mut f = WhFactors {
            omega1,
            omega2,
            c1,
            c2,
            cz: 1.0 / zeta,
            p: c1 * (omega2 / w).ln() + c2 * (omega1 / w).ln(),
            ln_sqrt_w: 0.5 * w.ln(),
            special: SpecialValues {
                r_down_0: C64::default(),
                lim0_lambda_r_up: C64::default(),
                dlog_r_down_0: C64::default(),
                r_up_i: C64::default(),
                r_down_i: C64::default(),
            },
        };
        f.special = f.extrapolate_special()?;
        Ok(f)
    }

    pub fn from_params(p: &ModelParams) -> Result<WhFactors> {
        WhFactors::new(p.omega1, p.omega2)
    }

    pub fn omega_sum(&self) -> f64 {
        self.omega1 + self.omega2
    }

    /// ln R↓(λ), pole-free at 0.
    pub fn ln_r_down(&self, l: C64) -> C64 {
        C64::new(self.ln_sqrt_w, -PI / 2.0) - I * l * self.p + ln_gamma(ONE + I * self.c1 * l)
            + ln_gamma(ONE + I * self.c2 * l)
            - ln_gamma(ONE + I * self.cz * l)
    }

    /// ln(λR↑(λ)), pole-free at 0.
    pub fn ln_lambda_r_up(&self, l: C64) -> C64 {
        C64::new(self.ln_sqrt_w, PI / 2.0) + I * l * self.p + ln_gamma(ONE - I * self.c1 * l)
            + ln_gamma(ONE - I * self.c2 * l)
            - ln_gamma(ONE - I * self.cz * l)
    }

    pub fn r_down(&self, l: C64) -> C64 {
        self.ln_r_down(l).exp()
    }

    pub fn lambda_r_up(&self, l: C64) -> C64 {
        self.ln_lambda_r_up(l).exp()
    }

    pub fn r_up(&self, l: C64) -> C64 {
        self.lambda_r_up(l) / l
    }

    /// R(λ), written with decaying exponentials so that large |Re λ| does not overflow.
    pub fn r(&self, l: C64) -> C64 {
        let a1 = 0.5 / self.omega1;
        let a2 = 0.5 / self.omega2;
        let big_a = 2.0 * (a1 + a2);
        if l.norm() < 1e-2 {
            // λR = w · S(λA/2) / (S(λa₁) S(λa₂)), S(x) = sinh(x)/x
            let s = |x: C64| {
                let x2 = x * x;
                ONE + x2 / 6.0 + x2 * x2 / 120.0 + x2 * x2 * x2 / 5040.0
            };
            return self.omega_sum() * s(l * (0.5 * big_a)) / (s(l * a1) * s(l * a2)) / l;
        }
        let (z, sgn) = if l.re >= 0.0 { (l, 1.0) } else { (-l, -1.0) };
        let e = |c: f64| (-(z * c)).exp();
        sgn * (ONE - e(big_a)) / ((ONE - e(2.0 * a1)) * (ONE - e(2.0 * a2)))
    }

    /// Nearest pole of R (λ = 2πiω_a n, n ≠ 0).
    fn r_pole_distance(&self, l: C64) -> f64 {
        [self.omega1, self.omega2]
            .iter()
            .map(|&om| {
                let step = 2.0 * PI * om;
                let n = (l.im / step).round();
                let n = if n != 0.0 { n } else if l.im >= 0.0 { 1.0 } else { -1.0 };
                (l - C64::new(0.0, n * step)).norm()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Distance to the nearest pole or zero of λR↑ (all in the lower half-plane,
    /// at -i(n+1)/c₁, -i(n+1)/c₂ and -i(n+1)ζ).
    fn up_singular_distance(&self, l: C64) -> f64 {
        [self.c1, self.c2, self.cz]
            .iter()
            .map(|&c| {
                let step = 1.0 / c;
                let n = (-l.im / step).round().max(1.0);
                (l + I * (n * step)).norm()
            })
            .fold(f64::INFINITY, f64::min)
    }

    fn extrapolate_special(&self) -> Result<SpecialValues> {
        let hs = [1e-3, 5e-4, 2.5e-4];
        let r = |f: &dyn Fn(f64) -> C64, order: i32| -> (C64, f64) {
            let v: Vec<C64> = hs.iter().map(|&h| f(h)).collect();
            richardson(&v, order)
        };
        let (rd0, e1) = r(&|h| self.r_down(C64::new(h, 0.0)), 1);
        let (lru0, e2) = r(&|h| self.lambda_r_up(C64::new(h, 0.0)), 1);
        let (dl, e3) = r(
            &|h| (self.ln_r_down(C64::new(h, 0.0)) - self.ln_r_down(C64::new(-h, 0.0))) / (2.0 * h),
            2,
        );
        let spread = e1.max(e2).max(e3);
        if spread > 1e-5 {
            return numerical(format!("special-value extrapolation disagreement {spread:.3e}"));
        }
        Ok(SpecialValues {
            r_down_0: rd0,
            lim0_lambda_r_up: lru0,
            dlog_r_down_0: dl,
            r_up_i: self.r_up(I),
            r_down_i: self.r_down(I),
        })
    }

    /// R↑(-i) = R↓(i)/i.
    pub fn r_up_minus_i(&self) -> C64 {
        self.special.r_down_i / I
    }

    /// i(ln R↓)′(0) in closed form: s₁ ln(2s₁) + s₂ ln(2s₂) with s_a = ω_{a'}/(2w).
    pub fn i_dlog_closed_form(&self) -> f64 {
        let w = self.omega_sum();
        let s1 = 0.5 * self.omega2 / w;
        let s2 = 0.5 * self.omega1 / w;
        s1 * (2.0 * s1).ln() + s2 * (2.0 * s2).ln()
    }
}

/// Richardson table for values at h, h/2, h/4 with error expansion in h^order.
/// Returns the extrapolated value and the size of the last correction.
fn richardson(v: &[C64], order: i32) -> (C64, f64) {
    let f1 = 2f64.powi(order);
    let f2 = 2f64.powi(2 * order);
    let a = (v[1] * f1 - v[0]) / (f1 - 1.0);
    let b = (v[2] * f1 - v[1]) / (f1 - 1.0);
    let c = (b * f2 - a) / (f2 - 1.0);
    (c, (c - b).norm())
}

/// R(λ) with a pole-proximity check.
pub fn r_kernel(omega1: f64, omega2: f64, lambda: C64) -> Result<C64> {
    let f = WhFactors::new(omega1, omega2)?;
    if f.r_pole_distance(lambda) < POLE_GUARD {
        return domain(format!("λ = {lambda} is at a pole of R"));
    }
    Ok(f.r(lambda))
}

/// R↑(λ) with a pole/zero-proximity check.
pub fn r_up(omega1: f64, omega2: f64, lambda: C64) -> Result<C64> {
    let f = WhFactors::new(omega1, omega2)?;
    if lambda.norm() < POLE_GUARD || f.up_singular_distance(lambda) < POLE_GUARD {
        return domain(format!("λ = {lambda} is at a pole or zero of R↑"));
    }
    Ok(f.r_up(lambda))
}

/// R↓(λ) with a pole/zero-proximity check (singularities mirror those of λR↑).
pub fn r_down(omega1: f64, omega2: f64, lambda: C64) -> Result<C64> {
    let f = WhFactors::new(omega1, omega2)?;
    if f.up_singular_distance(-lambda) < POLE_GUARD {
        return domain(format!("λ = {lambda} is at a pole or zero of R↓"));
    }
    Ok(f.r_down(lambda))
}

pub fn wh_special(omega1: f64, omega2: f64) -> Result<SpecialValues> {
    Ok(WhFactors::new(omega1, omega2)?.special)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticConstants {
    pub c0: f64,
    pub d0: f64,
    pub d1: f64,
    pub ratio_c0_d0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    C0,
    D0,
    D1,
    All,
}

/// c₀ = 4π√w R↑(i)/r.
pub fn c0(params: &ModelParams, wh: &WhFactors) -> f64 {
    4.0 * PI * wh.omega_sum().sqrt() * wh.special.r_up_i.re / params.r
}

/// d₀ = (2/(r√π)) ∏_± (1+b^{±2})^{-s} Γ(s), s = 1/(2(1+b^{±2})).
pub fn d0(params: &ModelParams) -> f64 {
    let mut prod = 1.0;
    for e in [params.b * params.b, 1.0 / (params.b * params.b)] {
        let q = 1.0 + e;
        let s = 0.5 / q;
        prod *= q.powf(-s) * ln_gamma(C64::new(s, 0.0)).re.exp();
    }
    2.0 / (params.r * PI.sqrt()) * prod
}

/// d₁ = (r²/π) ∏_± sin(π/(2(1+b^{±2})))/(1+b^{±2}).
pub fn d1(params: &ModelParams) -> f64 {
    let mut prod = 1.0;
    for e in [params.b * params.b, 1.0 / (params.b * params.b)] {
        let q = 1.0 + e;
        prod *= (PI / (2.0 * q)).sin() / q;
    }
    params.r * params.r / PI * prod
}

pub fn constants(params: &ModelParams, which: Which) -> Result<AsymptoticConstants> {
    if !params.specialized {
        return domain("closed-form constants need the specialized periods");
    }
    let wh = WhFactors::from_params(params)?;
    let nan = f64::NAN;
    let c = c0(params, &wh);
    let d = d0(params);
    let mut out = AsymptoticConstants { c0: c, d0: d, d1: d1(params), ratio_c0_d0: c / d };
    match which {
        Which::C0 => {
            out.d0 = nan;
            out.d1 = nan;
        }
        Which::D0 => {
            out.c0 = nan;
            out.d1 = nan;
        }
        Which::D1 => {
            out.c0 = nan;
            out.d0 = nan;
        }
        Which::All => {}
    }
    Ok(out)
}
