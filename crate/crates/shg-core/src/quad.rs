//! Quadrature helpers: adaptive Gauss-Kronrod (15 points) for complex-valued
//! integrands on real intervals, fixed Gauss-Legendre panels, and the cosine
//! grid used for densities with square-root edges.

use crate::C64;
use gauss_quad::legendre::GaussLegendre;
use std::num::NonZeroUsize;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One 15-point Kronrod panel: (integral, error estimate).
pub fn gk15<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> (C64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += s * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    ((k * h), ((k - g) * h).norm())
}

#[derive(Debug, Clone, Copy)]
pub struct Adaptive {
    pub value: C64,
    pub error: f64,
    pub converged: bool,
}

/// Globally adaptive bisection on [a, b]. Stops when the summed error estimate
/// is below max(abs_tol, rel_tol * |value|) or after `max_panels` panels.
pub fn adaptive<F: Fn(f64) -> C64>(
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Adaptive {
    let (v, e) = gk15(f, a, b);
    let mut panels = vec![(a, b, v, e)];
    loop {
        let value: C64 = panels.iter().map(|p| p.2).sum();
        let error: f64 = panels.iter().map(|p| p.3).sum();
        if error <= abs_tol.max(rel_tol * value.norm()) {
            return Adaptive { value, error, converged: true };
        }
        if panels.len() >= max_panels {
            return Adaptive { value, error, converged: false };
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
        let (pa, pb, _, _) = panels[idx];
        let m = 0.5 * (pa + pb);
        let (v1, e1) = gk15(f, pa, m);
        let (v2, e2) = gk15(f, m, pb);
        panels[idx] = (pa, m, v1, e1);
        panels.push((m, pb, v2, e2));
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1], ascending.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let n = NonZeroUsize::new(n.max(1)).unwrap();
    let mut v = GaussLegendre::new(n).as_node_weight_pairs().to_vec();
    v.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    v
}

/// Composite Gauss-Legendre rule over the given panel breakpoints.
pub fn panel_rule(breaks: &[f64], order: usize) -> Vec<(f64, f64)> {
    let base = gauss_legendre(order);
    let mut out = Vec::with_capacity(base.len() * breaks.len().saturating_sub(1));
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        out.extend(base.iter().map(|&(x, wt)| (c + h * x, h * wt)));
    }
    out
}

/// Breakpoints 0, 1, 2, 4, ... up to the first power of two >= `x_max`.
pub fn geometric_breaks(first: f64, x_max: f64) -> Vec<f64> {
    let mut v = vec![0.0, first];
    while *v.last().unwrap() < x_max {
        let l = *v.last().unwrap();
        v.push(2.0 * l);
    }
    v
}

/// Cosine grid on [a, b]: ξ_k = (a+b)/2 - (b-a)/2 cos(πk/(n-1)), with the
/// trapezoid weights of the angle variable (so ∫ f dξ ≈ Σ w_k f(ξ_k)).
pub fn cosine_grid(a: f64, b: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 3);
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let dth = std::f64::consts::PI / (n - 1) as f64;
    let mut xs = Vec::with_capacity(n);
    let mut ws = Vec::with_capacity(n);
    for k in 0..n {
        let th = dth * k as f64;
        // exact mirror symmetry of the nodes about c
        let x = if 2 * k + 1 == n {
            c
        } else if 2 * k < n {
            c - h * th.cos()
        } else {
            c + h * (dth * (n - 1 - k) as f64).cos()
        };
        xs.push(x);
        let s = if 2 * k < n { th.sin() } else { (dth * (n - 1 - k) as f64).sin() };
        let end = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
        ws.push(end * dth * h * s);
    }
    xs[0] = a;
    xs[n - 1] = b;
    (xs, ws)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk_polynomial_exact() {
        let f = |x: f64| C64::new(x.powi(5) - 2.0 * x * x, x);
        let (v, _) = gk15(&f, -1.0, 2.0);
        let want = (64.0 - 1.0) / 6.0 - 2.0 * (8.0 + 1.0) / 3.0;
        assert!((v.re - want).abs() < 1e-13);
        assert!((v.im - 1.5).abs() < 1e-13);
    }

    #[test]
    fn adaptive_oscillatory() {
        let f = |x: f64| C64::new(0.0, 40.0 * x).exp();
        let r = adaptive(&f, 0.0, 3.0, 1e-14, 1e-13, 500);
        let want = (C64::new(0.0, 120.0).exp() - 1.0) / C64::new(0.0, 40.0);
        assert!(r.converged);
        assert!((r.value - want).norm() < 1e-12);
    }

    #[test]
    fn cosine_grid_integrates_sqrt_edge() {
        // ∫_{-1}^{1} sqrt(1-x²) dx = π/2
        let (x, w) = cosine_grid(-1.0, 1.0, 41);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * (1.0 - x * x).max(0.0).sqrt()).sum();
        assert!((s - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        for k in 0..41 {
            assert_eq!(x[k], -x[40 - k]);
        }
    }

    #[test]
    fn panels_integrate_exp() {
        let r = panel_rule(&[0.0, 1.0, 3.0], 12);
        let s: f64 = r.iter().map(|(x, w)| w * x.exp()).sum();
        assert!((s - (3f64.exp() - 1.0)).abs() < 1e-12);
    }
}
