//! Leading-order parametrix χ∞ of the 2×2 Riemann-Hilbert problem, its
//! continuations χ_{1a;-}(λ) = e^{-iλx̄}χ_{1a}(λ), the E-vectors and the
//! functions U11, U12.
//!
//! Corrections to χ∞ are O(e^{-ζ(1-η)x̄}); they are never evaluated, and the
//! bound is carried along as `budget`.

use crate::equilibrium::Support;
use crate::error::{domain, Result};
use crate::wiener_hopf::WhFactors;
use crate::C64;
use serde::{Deserialize, Serialize};

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// Between ℝ and the line Γ↑ above it.
    UpperBand,
    /// Between Γ↓ and ℝ.
    LowerBand,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiEval {
    pub region: Region,
    pub chi11: C64,
    pub chi12: C64,
    /// Lower band only; both have a simple pole at 0.
    pub chi21: Option<C64>,
    pub chi22: Option<C64>,
    pub budget: f64,
}

/// Values of the continuations at 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiMinusZero {
    pub chi11m0: C64,
    pub chi11m0_prime: C64,
    pub chi12m0: C64,
    pub chi12m0_prime: C64,
}

/// χ∞ for a fixed support.
#[derive(Debug, Clone, Copy)]
pub struct Parametrix {
    pub wh: WhFactors,
    pub bar_x: f64,
    pub budget: f64,
}

impl Parametrix {
    pub fn new(wh: &WhFactors, support: &Support) -> Parametrix {
        Parametrix { wh: *wh, bar_x: support.bar_x, budget: support.budget }
    }

    /// (χ11, χ12) in the upper band, no checks.
    pub fn upper(&self, l: C64) -> (C64, C64) {
        let lru = self.wh.lambda_r_up(l);
        let chi11 = 1.0 / lru - (I * l * self.bar_x).exp() / self.wh.r_down(l);
        (chi11, l / lru)
    }

    /// (χ11, χ12, χ21, χ22) in the lower band, no checks.
    pub fn lower(&self, l: C64) -> [C64; 4] {
        let lru = self.wh.lambda_r_up(l);
        let rd = self.wh.r_down(l);
        let e = (-I * l * self.bar_x).exp();
        [-1.0 / rd + e / lru, l * e / lru, rd / l, rd]
    }

    /// χ_{1a;-} = e^{-iλx̄}χ_{1a} from the upper band.
    pub fn upper_minus(&self, l: C64) -> (C64, C64) {
        let lru = self.wh.lambda_r_up(l);
        let e = (-I * l * self.bar_x).exp();
        (e / lru - 1.0 / self.wh.r_down(l), l * e / lru)
    }

    pub fn eval(&self, l: C64, region: Region) -> Result<ChiEval> {
        match region {
            Region::UpperBand => {
                if l.im < 0.0 {
                    return domain(format!("λ = {l} is below the upper band"));
                }
                let (chi11, chi12) = self.upper(l);
                Ok(ChiEval { region, chi11, chi12, chi21: None, chi22: None, budget: self.budget })
            }
            Region::LowerBand => {
                if l.im > 0.0 {
                    return domain(format!("λ = {l} is above the lower band"));
                }
                if l.norm() == 0.0 {
                    return domain("χ21 and χ22 have a pole at λ = 0");
                }
                let [chi11, chi12, chi21, chi22] = self.lower(l);
                Ok(ChiEval { region, chi11, chi12, chi21: Some(chi21), chi22: Some(chi22), budget: self.budget })
            }
        }
    }

    /// Series of the leading continuations at 0, written with the special
    /// values of the factors and D = (ln R↓)′(0), using (ln λR↑)′(0) = -D.
    pub fn minus_at_zero(&self) -> ChiMinusZero {
        let s = &self.wh.special;
        let l0 = s.lim0_lambda_r_up;
        let rd0 = s.r_down_0;
        let d = s.dlog_r_down_0;
        ChiMinusZero {
            chi11m0: 1.0 / l0 - 1.0 / rd0,
            chi11m0_prime: (-I * self.bar_x + d) / l0 + d / rd0,
            chi12m0: C64::new(0.0, 0.0),
            chi12m0_prime: 1.0 / l0,
        }
    }

    /// (χ11(i), χ12(i)) from the upper band.
    pub fn at_i(&self) -> (C64, C64) {
        let s = &self.wh.special;
        (1.0 / (I * s.r_up_i) - (-self.bar_x).exp() / s.r_down_i, 1.0 / s.r_up_i)
    }

    /// (χ11(-i), χ12(-i)) through χ11(-λ) = χ11(λ), χ12(-λ) = χ12(λ) - λχ11(λ).
    pub fn at_minus_i(&self) -> (C64, C64) {
        let (p, q) = self.at_i();
        (p, q - I * p)
    }

    /// Residual of the reflection relation between the two band formulas at λ
    /// (λ in the upper band, -λ in the lower band).
    pub fn reflection_residual(&self, l: C64) -> f64 {
        let (a11, a12) = self.upper(l);
        let [b11, b12, _, _] = self.lower(-l);
        let r1 = (b11 - a11).norm();
        let r2 = (b12 - (-l * a11 + a12)).norm();
        r1.max(r2)
    }

    pub fn e_vectors(&self, l: C64) -> EVectors {
        let ru = self.wh.r_up(l);
        let rd = self.wh.r_down(l);
        let zero = C64::new(0.0, 0.0);
        EVectors {
            e_l_up: [1.0 / ru, -1.0 / ru],
            e_l_down: [l / rd, zero],
            e_r_up: [1.0 / ru, 1.0 / ru],
            e_r_down: [zero, l / rd],
        }
    }

    pub fn u_functions(&self, support: &Support) -> UFunctions {
        let (chi11_i, chi12_i) = self.at_i();
        UFunctions {
            nu: support.nu(),
            v: support.v_n,
            e_b: support.bar_b.exp(),
            e_ma: (-support.bar_a).exp(),
            chi11_i,
            chi12_i,
        }
    }
}

/// χ∞ at one point, as a free function.
pub fn chi_eval(support: &Support, wh: &WhFactors, lambda: C64, region: Region) -> Result<ChiEval> {
    Parametrix::new(wh, support).eval(lambda, region)
}

pub fn chi_minus_at_zero(support: &Support, wh: &WhFactors) -> ChiMinusZero {
    Parametrix::new(wh, support).minus_at_zero()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EVectors {
    pub e_l_up: [C64; 2],
    pub e_l_down: [C64; 2],
    pub e_r_up: [C64; 2],
    pub e_r_down: [C64; 2],
}

/// Bilinear (not Hermitian) pairing of two 2-vectors.
pub fn pairing(vl: [C64; 2], vr: [C64; 2]) -> C64 {
    vl[0] * vr[0] + vl[1] * vr[1]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UFunctions {
    /// N u_N = e^{b̄} + e^{-ā}
    pub nu: f64,
    /// v_N = e^{b̄} - e^{-ā}
    pub v: f64,
    pub e_b: f64,
    pub e_ma: f64,
    pub chi11_i: C64,
    pub chi12_i: C64,
}

impl UFunctions {
    pub fn u12(&self, l: C64) -> C64 {
        (self.nu * l + I * self.v) / (1.0 + l * l) * I * self.chi11_i
    }

    pub fn u11(&self, l: C64) -> C64 {
        -self.chi12_i * (I * self.nu + l * self.v) / (1.0 + l * l)
            - I * self.chi11_i / (I + l) * (0.5 * (self.nu - self.v))
    }

    /// |lhs - rhs| of the decomposition identity
    ///   Σ_σ e^{b̄^{(σ)}} [χ11(λ)χ12(σi) - (σi/λ)χ11(σi)χ12(λ)]/(i - σλ) = χ12U12/λ + χ11U11
    /// with b̄^{(+)} = b̄, b̄^{(-)} = -ā, given χ at λ and χ(-i) from the reflection relation.
    pub fn identity_residual(&self, l: C64, chi11: C64, chi12: C64) -> f64 {
        let (p, q) = (self.chi11_i, self.chi12_i);
        let (pm, qm) = (p, q - I * p);
        let plus = self.e_b * (chi11 * q - I / l * p * chi12) / (I - l);
        let minus = self.e_ma * (chi11 * qm + I / l * pm * chi12) / (I + l);
        let rhs = chi12 * self.u12(l) / l + chi11 * self.u11(l);
        (plus + minus - rhs).norm() / (plus.norm() + minus.norm()).max(1e-300)
    }
}
