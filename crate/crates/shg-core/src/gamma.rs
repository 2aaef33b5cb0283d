//! Complex log-Gamma, Lanczos g = 7 with 9 coefficients.
//!
//! Only `exp` of sums of these values is ever used downstream, so the result is
//! a logarithm of Gamma, not necessarily the branch that is continuous in `z`.

use crate::C64;
use std::f64::consts::PI;

const G: f64 = 7.0;
const P: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// ln Γ(z). Uses the reflection formula for Re z < 1/2.
pub fn ln_gamma(z: C64) -> C64 {
    if z.re < 0.5 {
        C64::new(PI.ln(), 0.0) - ln_sin_pi(z) - lanczos(C64::new(1.0, 0.0) - z)
    } else {
        lanczos(z)
    }
}

/// Γ(z) = exp(ln Γ(z)).
pub fn gamma(z: C64) -> C64 {
    ln_gamma(z).exp()
}

fn lanczos(z: C64) -> C64 {
    let z = z - 1.0;
    let mut a = C64::new(P[0], 0.0);
    for (k, &p) in P.iter().enumerate().skip(1) {
        a += p / (z + k as f64);
    }
    let t = z + G + 0.5;
    HALF_LN_2PI + (z + 0.5) * t.ln() - t + a.ln()
}

// ln sin(πz) without overflow for large |Im z|.
fn ln_sin_pi(z: C64) -> C64 {
    let i = C64::i();
    if z.im > 0.0 {
        // sin(πz) = (i/2) e^{-iπz} (1 - e^{2iπz})
        let q = (2.0 * PI * i * z).exp();
        -i * PI * z + C64::new(0.5f64.ln(), PI / 2.0) + (C64::new(1.0, 0.0) - q).ln()
    } else {
        let q = (-2.0 * PI * i * z).exp();
        i * PI * z + C64::new(0.5f64.ln(), -PI / 2.0) + (C64::new(1.0, 0.0) - q).ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: C64, b: C64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn known_values() {
        let g14 = gamma(C64::new(0.25, 0.0));
        assert!((g14.re - 3.625_609_908_221_908).abs() < 1e-13);
        let g12 = gamma(C64::new(0.5, 0.0));
        assert!((g12.re - PI.sqrt()).abs() < 1e-14);
        assert!((gamma(C64::new(5.0, 0.0)).re - 24.0).abs() < 1e-11);
    }

    #[test]
    fn imaginary_axis_modulus() {
        // |Γ(iy)|² = π / (y sinh πy)
        for &y in &[0.3, 1.0, 4.0, 25.0] {
            let g = ln_gamma(C64::new(0.0, y));
            let want = (PI / (y * (PI * y).sinh())).ln();
            assert!((2.0 * g.re - want).abs() < 1e-11, "y={y}");
        }
    }

    #[test]
    fn recurrence_and_reflection() {
        for &z in &[C64::new(0.3, 2.0), C64::new(-3.7, 0.4), C64::new(2.5, -40.0), C64::new(-200.2, 150.0)] {
            let lhs = ln_gamma(z + 1.0);
            let rhs = z.ln() + ln_gamma(z);
            // equal modulo 2πi, relative to the size of the logarithm
            let d = lhs - rhs;
            let k = (d.im / (2.0 * PI)).round();
            let d = C64::new(d.re, d.im - 2.0 * PI * k);
            assert!(d.norm() < 1e-12 * (1.0 + lhs.norm()), "z={z}");
            let prod = (ln_gamma(z) + ln_gamma(1.0 - z)).exp();
            let want = PI / (PI * z).sin();
            if want.is_finite() && want.norm() > 1e-250 {
                assert!(rel(prod, want) < 1e-10, "z={z}");
            }
        }
    }

    #[test]
    fn real_axis_matches_statrs() {
        for &x in &[0.7, 1.3, 3.2, 17.5, 140.0] {
            let g = ln_gamma(C64::new(x, 0.0));
            assert!((g.re - statrs::function::gamma::ln_gamma(x)).abs() < 1e-12 * (1.0 + g.re.abs()));
        }
    }
}
