//! Model parameters, derived scales and the confining potential V_{N;α}.

use crate::error::{domain, numerical, Result};
use crate::tba::TbaSolution;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Sign with which the convolution part 𝔴 enters V = 𝔳 ± 𝔴.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ConvSign {
    #[default]
    Minus,
    Plus,
}

impl ConvSign {
    pub fn value(self) -> f64 {
        match self {
            ConvSign::Minus => -1.0,
            ConvSign::Plus => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub r: f64,
    pub b: f64,
    pub alpha: f64,
    pub n: u64,
    pub eta: f64,
    pub tau: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub omega_bar1: f64,
    pub omega_bar2: f64,
    pub zeta: f64,
    pub kappa_eta: f64,
    pub specialized: bool,
    pub conv_sign: ConvSign,
}

/// Fill in all derived scales, with the periods ω₁ = (1+b²)/π, ω₂ = (1+b⁻²)/π.
pub fn derive_scales(r: f64, b: f64, alpha: f64, n: u64, eta: f64) -> Result<ModelParams> {
    let omega1 = (1.0 + b * b) / PI;
    let omega2 = (1.0 + 1.0 / (b * b)) / PI;
    with_periods(r, b, alpha, n, eta, omega1, omega2, true)
}

#[allow(clippy::too_many_arguments)]
pub fn with_periods(
    r: f64,
    b: f64,
    alpha: f64,
    n: u64,
    eta: f64,
    omega1: f64,
    omega2: f64,
    specialized: bool,
) -> Result<ModelParams> {
    if !(r > 0.0) {
        return domain(format!("r must be positive, got {r}"));
    }
    if !(b > 0.0) {
        return domain(format!("b must be positive, got {b}"));
    }
    if n < 2 {
        return domain(format!("N must be at least 2, got {n}"));
    }
    if !(eta > 0.0 && eta < 0.5) {
        return domain(format!("eta must lie in (0, 1/2), got {eta}"));
    }
    if !alpha.is_finite() {
        return domain("alpha must be finite");
    }
    if !(omega1 > 0.0 && omega2 > 0.0) {
        return domain("periods must be positive");
    }
    let tau = (n as f64).ln();
    let zeta = 2.0 * PI * omega1 * omega2 / (omega1 + omega2);
    Ok(ModelParams {
        r,
        b,
        alpha,
        n,
        eta,
        tau,
        omega1,
        omega2,
        omega_bar1: 2.0 * PI * tau * omega1,
        omega_bar2: 2.0 * PI * tau * omega2,
        zeta,
        kappa_eta: (1.0 - eta) * zeta.min(2.0),
        specialized,
        conv_sign: ConvSign::Minus,
    })
}

impl ModelParams {
    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    /// ω₁ + ω₂.
    pub fn omega_sum(&self) -> f64 {
        self.omega1 + self.omega2
    }

    /// κ̃_η = min{1, (1-η)ζ}, the weaker remainder exponent.
    pub fn kappa_tilde(&self) -> f64 {
        1f64.min((1.0 - self.eta) * self.zeta)
    }

    /// Same parameters with another N.
    pub fn with_n(&self, n: u64) -> Result<ModelParams> {
        let mut p = with_periods(self.r, self.b, self.alpha, n, self.eta, self.omega1, self.omega2, self.specialized)?;
        p.conv_sign = self.conv_sign;
        Ok(p)
    }

    pub fn with_alpha(&self, alpha: f64) -> ModelParams {
        ModelParams { alpha, ..*self }
    }

    pub fn with_sign(&self, conv_sign: ConvSign) -> ModelParams {
        ModelParams { conv_sign, ..*self }
    }

    /// The ±1 factor in front of the F[g](i) correction terms (active since ζ > 1).
    pub fn correction_sign(&self) -> f64 {
        if self.zeta > 1.0 {
            self.conv_sign.value()
        } else {
            0.0
        }
    }
}

/// V_{N;α} = 𝔳 + σ𝔴, with the convolution discretized on the TBA grid in
/// the variable y = τμ.
#[derive(Debug, Clone)]
pub struct Potential {
    pub params: ModelParams,
    nodes: Vec<(f64, f64)>,
    tail: f64,
}

/// Tolerance on the part of 𝔴 lost beyond the TBA grid.
pub const TAIL_TOL: f64 = 1e-12;

impl Potential {
    /// `tba = None` is the g ≡ 0 test mode.
    pub fn new(params: &ModelParams, tba: Option<&TbaSolution>) -> Result<Potential> {
        let (nodes, tail) = match tba {
            None => (Vec::new(), 0.0),
            Some(t) => {
                let g = t.g_values();
                let nodes = t.grid.iter().enumerate().map(|(j, &y)| (y, t.weight(j) * g[j])).collect();
                (nodes, t.tail_mass_bound())
            }
        };
        let p = Potential { params: *params, nodes, tail };
        if p.tail_error() > TAIL_TOL {
            return numerical(format!(
                "convolution tail beyond the TBA grid is {:.3e}, above {TAIL_TOL:e}",
                p.tail_error()
            ));
        }
        Ok(p)
    }

    /// Bound on the truncated part of V, V′, V″ (sech and its derivatives are <= 1).
    pub fn tail_error(&self) -> f64 {
        self.tail / (2.0 * PI * self.params.nf()) * self.params.tau.max(1.0)
    }

    /// The analytic part 𝔳 and its derivatives.
    pub fn v_part(&self, lambda: f64, order: u8) -> f64 {
        let p = &self.params;
        let (n, t) = (p.nf(), p.tau);
        match order {
            0 => p.r / (n * t) * (t * lambda).cosh() - p.alpha * lambda / n,
            1 => p.r / n * (t * lambda).sinh() - p.alpha / n,
            _ => p.r * t / n * (t * lambda).cosh(),
        }
    }

    /// The convolution part 𝔴 = ∫ dμ/(2πN) g(τμ)/cosh(τ(λ-μ)) and its derivatives.
    pub fn w_part(&self, lambda: f64, order: u8) -> f64 {
        let p = &self.params;
        let x = p.tau * lambda;
        let mut s = 0.0;
        for &(y, hg) in &self.nodes {
            let z = x - y;
            let sech = 1.0 / z.cosh();
            s += hg
                * match order {
                    0 => sech,
                    1 => -sech * z.tanh(),
                    _ => sech * (2.0 * z.tanh().powi(2) - 1.0),
                };
        }
        let scale = match order {
            0 => 1.0 / p.tau,
            1 => 1.0,
            _ => p.tau,
        };
        s * scale / (2.0 * PI * p.nf())
    }

    /// V^{(order)}_{N;α}(λ) for order ∈ {0, 1, 2}.
    pub fn eval(&self, lambda: f64, order: u8) -> f64 {
        self.v_part(lambda, order) + self.params.conv_sign.value() * self.w_part(lambda, order)
    }
}

/// V^{(order)}_{N;α}(λ); builds the quadrature nodes on every call.
pub fn potential(params: &ModelParams, tba: Option<&TbaSolution>, lambda: f64, order: u8) -> Result<f64> {
    if order > 2 {
        return domain(format!("potential order must be 0, 1 or 2, got {order}"));
    }
    Ok(Potential::new(params, tba)?.eval(lambda, order))
}

/// min over the grid of V″.
pub fn convexity_margin(params: &ModelParams, tba: Option<&TbaSolution>, lambda_grid: &[f64]) -> Result<f64> {
    let pot = Potential::new(params, tba)?;
    Ok(lambda_grid.iter().map(|&l| pot.eval(l, 2)).fold(f64::INFINITY, f64::min))
}
