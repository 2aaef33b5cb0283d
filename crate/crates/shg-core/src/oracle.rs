//! Brute-force checks that share no code with the analytic pipeline beyond
//! the potential: direct minimization of the discretized energy functional,
//! and tensor quadrature of the partition integral for N ≤ 4.

use crate::error::{domain, numerical, Result};
use crate::model::{ModelParams, Potential};
use crate::quad::gauss_legendre;
use crate::tba::TbaSolution;
use crate::wiener_hopf::{c0, d0, WhFactors};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleConfig {
    pub nodes: usize,
    /// Grid half-width; `None` uses 1.5 ln(c₀N/2)/τ.
    pub half_width: Option<f64>,
    pub threshold: f64,
    pub max_iter: usize,
    /// Projected-gradient stopping tolerance on the step length.
    pub tol: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { nodes: 800, half_width: None, threshold: 1e-6, max_iter: 3000, tol: 1e-13 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub energy: f64,
    pub iterations: usize,
    pub grad_norm: f64,
    /// Energy after each accepted projected-gradient step, then after the polish.
    pub history: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn spacing(&self) -> f64 {
        self.nodes[1] - self.nodes[0]
    }

    pub fn mean(&self) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| x * w).sum()
    }
}

/// ln sinh(x) for x > 0.
fn ln_sinh(x: f64) -> f64 {
    x + (-(2.0 * x)).exp_m1().abs().ln() - std::f64::consts::LN_2
}

struct Problem {
    v: DVector<f64>,
    a: DMatrix<f64>,
}

impl Problem {
    fn energy(&self, w: &DVector<f64>) -> f64 {
        self.v.dot(w) + 0.5 * w.dot(&(&self.a * w))
    }

    fn grad(&self, w: &DVector<f64>) -> DVector<f64> {
        &self.v + &self.a * w
    }
}

/// Euclidean projection onto the probability simplex.
pub fn project_simplex(y: &[f64]) -> Vec<f64> {
    let mut u = y.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut css = 0.0;
    let mut theta = 0.0;
    for (k, &uk) in u.iter().enumerate() {
        css += uk;
        let t = (css - 1.0) / (k + 1) as f64;
        if uk - t > 0.0 {
            theta = t;
        }
    }
    let mut x: Vec<f64> = y.iter().map(|&v| (v - theta).max(0.0)).collect();
    // exact unit sum
    let s: f64 = x.iter().sum();
    x.iter_mut().for_each(|v| *v /= s);
    x
}

/// Minimize E(w) = Σ V(x_i) w_i - (1/2τ) Σ_{i,j} w_i w_j Σ_a ln sinh(ω̄_a|x_i - x_j|/2)
/// over the simplex. The diagonal uses the cell value ln sinh(ω̄_a Δ/4).
pub fn minimize_energy(params: &ModelParams, tba: Option<&TbaSolution>, cfg: &OracleConfig) -> Result<DiscreteMeasure> {
    let wh = WhFactors::from_params(params)?;
    let half = match cfg.half_width {
        Some(l) => l,
        None => 1.5 * (c0(params, &wh) * params.nf() / 2.0).ln() / params.tau,
    };
    minimize_on_grid(params, tba, cfg, half)
}

fn minimize_on_grid(params: &ModelParams, tba: Option<&TbaSolution>, cfg: &OracleConfig, half: f64) -> Result<DiscreteMeasure> {
    let m = cfg.nodes;
    if m < 400 {
        return domain(format!("oracle needs at least 400 nodes, got {m}"));
    }
    if !(half > 0.0) {
        return domain("oracle grid half-width must be positive");
    }
    let pot = Potential::new(params, tba)?;
    let dx = 2.0 * half / (m - 1) as f64;
    let x: Vec<f64> = (0..m).map(|i| -half + i as f64 * dx).collect();
    let cs = [PI * params.tau * params.omega1, PI * params.tau * params.omega2];
    let lk = |d: f64| -> f64 { cs.iter().map(|&c| ln_sinh(c * d)).sum::<f64>() / params.tau };
    let diag = lk(0.5 * dx);
    let row_vals: Vec<f64> = (0..m).map(|k| if k == 0 { diag } else { lk(k as f64 * dx) }).collect();
    let a = DMatrix::from_fn(m, m, |i, j| -row_vals[i.abs_diff(j)]);
    let v = DVector::from_iterator(m, x.iter().map(|&xi| pot.eval(xi, 0)));
    let prob = Problem { v, a };

    // spectral projected gradient with a monotone Armijo search
    let mut w = DVector::from_element(m, 1.0 / m as f64);
    let mut e = prob.energy(&w);
    let mut g = prob.grad(&w);
    let mut history = vec![e];
    let mut step = 1.0 / prob.a.amax().max(1e-300);
    let mut it = 0;
    while it < cfg.max_iter {
        it += 1;
        let trial: Vec<f64> = w.iter().zip(g.iter()).map(|(wi, gi)| wi - step * gi).collect();
        let d = DVector::from_vec(project_simplex(&trial)) - &w;
        let dn = d.amax();
        if dn < cfg.tol {
            break;
        }
        let gd = g.dot(&d);
        let mut t = 1.0;
        let accepted = loop {
            let wn = &w + &d * t;
            let en = prob.energy(&wn);
            if en <= e + 1e-4 * t * gd {
                break Some((wn, en));
            }
            t *= 0.5;
            if t < 1e-20 {
                break None;
            }
        };
        let Some((wn, en)) = accepted else { break };
        let mut s = &wn - &w;
        if s.amax() < 1e-14 * wn.amax() {
            history.push(en);
            w = wn;
            break;
        }
        // drop the roundoff component along (1,...,1), where A is very negative
        s.add_scalar_mut(-s.mean());
        let gn = prob.grad(&wn);
        let sy = s.dot(&(&prob.a * &s));
        if sy < -1e-14 * m as f64 * s.norm_squared() * prob.a.amax() {
            return numerical("negative curvature in the oracle energy (kernel sign?)");
        }
        step = if sy > 0.0 { s.norm_squared() / sy } else { step * 2.0 };
        w = wn;
        g = gn;
        e = en;
        history.push(e);
    }

    // polish: equality-constrained solve on the current support, add/drop nodes
    let (w, e) = active_set_polish(&prob, w)?;
    if e <= *history.last().unwrap() + 1e-14 * e.abs() {
        history.push(e);
    } else {
        return numerical("active-set polish increased the energy");
    }
    let g = prob.grad(&w);
    // projected-gradient norm: g - C on the support, min(0, g - C) off it
    let supp: Vec<usize> = (0..m).filter(|&i| w[i] > 0.0).collect();
    let c = supp.iter().map(|&i| g[i]).sum::<f64>() / supp.len() as f64;
    let grad_norm = (0..m)
        .map(|i| if w[i] > 0.0 { (g[i] - c).abs() } else { (c - g[i]).max(0.0) })
        .fold(0.0, f64::max);
    Ok(DiscreteMeasure {
        nodes: x,
        weights: w.iter().cloned().collect(),
        energy: e,
        iterations: it,
        grad_norm,
        history,
    })
}

fn active_set_polish(prob: &Problem, w0: DVector<f64>) -> Result<(DVector<f64>, f64)> {
    let m = w0.len();
    let wmax = w0.amax();
    let mut set: Vec<usize> = (0..m).filter(|&i| w0[i] > 1e-10 * wmax).collect();
    for _ in 0..200 {
        let n = set.len();
        let mut k = DMatrix::zeros(n + 1, n + 1);
        let mut rhs = DVector::zeros(n + 1);
        for (p, &i) in set.iter().enumerate() {
            for (q, &j) in set.iter().enumerate() {
                k[(p, q)] = prob.a[(i, j)];
            }
            k[(p, n)] = -1.0;
            k[(n, p)] = 1.0;
            rhs[p] = -prob.v[i];
        }
        rhs[n] = 1.0;
        let sol = k.lu().solve(&rhs).ok_or_else(|| crate::Error::Numerical("singular KKT system".into()))?;
        if let Some(p) = (0..n).filter(|&p| sol[p] < 0.0).min_by(|&a, &b| sol[a].partial_cmp(&sol[b]).unwrap()) {
            set.remove(p);
            continue;
        }
        let mut w = DVector::zeros(m);
        for (p, &i) in set.iter().enumerate() {
            w[i] = sol[p];
        }
        let c = sol[n];
        let g = prob.grad(&w);
        let viol: Vec<usize> = (0..m).filter(|&i| w[i] == 0.0 && !set.contains(&i) && g[i] - c < -1e-12 * c.abs().max(1.0)).collect();
        if viol.is_empty() {
            let s: f64 = w.iter().sum();
            w /= s;
            let e = prob.energy(&w);
            return Ok((w, e));
        }
        set.extend(viol);
        set.sort_unstable();
    }
    numerical("active-set polish did not settle")
}

/// Outermost nodes with weight above threshold·max, refined by fitting
/// w² ≈ c²(edge - ξ) on the last 10 nodes at each end.
pub fn oracle_endpoints(measure: &DiscreteMeasure, threshold: f64) -> Result<(f64, f64)> {
    let wmax = measure.weights.iter().cloned().fold(0.0, f64::max);
    let idx: Vec<usize> = (0..measure.weights.len()).filter(|&i| measure.weights[i] > threshold * wmax).collect();
    if idx.len() < 10 {
        return numerical(format!("only {} nodes carry weight; cannot locate the edges", idx.len()));
    }
    let (lo, hi) = (idx[0], *idx.last().unwrap());
    let fit = |ks: Vec<usize>| -> f64 {
        // least squares y = p + q x with y = w²; edge at y = 0
        let n = ks.len() as f64;
        let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
        for &k in &ks {
            let x = measure.nodes[k];
            let y = measure.weights[k].powi(2);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        let q = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let p = (sy - q * sx) / n;
        -p / q
    };
    let dx = measure.spacing();
    let b_raw = measure.nodes[hi];
    let a_raw = measure.nodes[lo];
    let b = fit((hi - 9..=hi).collect());
    let a = fit((lo..=lo + 9).collect());
    // keep the refinement within a cell of the raw edge
    let b = if (b - b_raw).abs() <= 2.0 * dx { b } else { b_raw + 0.5 * dx };
    let a = if (a - a_raw).abs() <= 2.0 * dx { a } else { a_raw - 0.5 * dx };
    Ok((a, b))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discriminator {
    pub bbar_oracle: f64,
    pub bbar_c0: f64,
    pub bbar_d0: f64,
    /// τ|b(M) - b(2M)|
    pub bias: f64,
    pub gap: f64,
    pub winner: String,
    pub clear: bool,
}

/// Decide between e^{b̄} ≈ c₀N/2 and e^{b̄} ≈ d₀N/2 from oracle runs at M and 2M nodes.
pub fn discriminator(params: &ModelParams, tba: Option<&TbaSolution>, cfg: &OracleConfig) -> Result<(Discriminator, DiscreteMeasure)> {
    let wh = WhFactors::from_params(params)?;
    let m1 = minimize_energy(params, tba, cfg)?;
    let cfg2 = OracleConfig { nodes: 2 * cfg.nodes, ..*cfg };
    let m2 = minimize_energy(params, tba, &cfg2)?;
    let (_, b1) = oracle_endpoints(&m1, cfg.threshold)?;
    let (_, b2) = oracle_endpoints(&m2, cfg.threshold)?;
    let nf = params.nf();
    let bc = (c0(params, &wh) * nf / 2.0).ln();
    let bd = (d0(params) * nf / 2.0).ln();
    let bo = params.tau * b2;
    let bias = params.tau * (b1 - b2).abs();
    let gap = (bc - bd).abs();
    let (dc, dd) = ((bo - bc).abs(), (bo - bd).abs());
    let winner = if dc < dd { "c0" } else { "d0" }.to_string();
    let clear = gap > 3.0 * bias && (dc - dd).abs() > 3.0 * bias;
    Ok((Discriminator { bbar_oracle: bo, bbar_c0: bc, bbar_d0: bd, bias, gap, winner, clear }, m2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadConfig {
    /// Gauss-Legendre points per dimension; `None` picks 200/100/80 for n = 2/3/4.
    pub points: Option<usize>,
    /// Required drop of NτV at the box edge beyond the pair-factor growth.
    pub margin: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig { points: None, margin: 60.0 }
    }
}

#[derive(Default)]
struct Lse {
    max: f64,
    sum: f64,
}

impl Lse {
    fn push(&mut self, t: f64) {
        if t == f64::NEG_INFINITY {
            return;
        }
        if self.sum == 0.0 {
            self.max = t;
            self.sum = 1.0;
        } else if t > self.max {
            self.sum = self.sum * (self.max - t).exp() + 1.0;
            self.max = t;
        } else {
            self.sum += (t - self.max).exp();
        }
    }
}

/// log 𝒵 for n_small ∈ {2, 3, 4} particles, with N = n_small in the potential.
pub fn z_small_n(params: &ModelParams, tba: Option<&TbaSolution>, n_small: usize, cfg: &QuadConfig) -> Result<f64> {
    if !(2..=4).contains(&n_small) {
        return domain(format!("n_small must be 2, 3 or 4, got {n_small}"));
    }
    let p = params.with_n(n_small as u64)?;
    let pot = Potential::new(&p, tba)?;
    let nt = p.nf() * p.tau;
    let cs = [0.5 * p.omega_bar1, 0.5 * p.omega_bar2];
    let growth = (cs[0] + cs[1]) * (n_small - 1) as f64;
    // the box: NτV must exceed its minimum by margin + pair growth at ±Λ
    let vmin = (-200..=200).map(|k| nt * pot.eval(k as f64 * 0.01, 0)).fold(f64::INFINITY, f64::min);
    let ok = |l: f64| {
        nt * pot.eval(l, 0) - vmin >= cfg.margin + growth * 2.0 * l
            && nt * pot.eval(-l, 0) - vmin >= cfg.margin + growth * 2.0 * l
    };
    let mut lam = 0.5;
    while !ok(lam) {
        lam *= 1.25;
        if lam > 1e3 {
            return numerical("could not find a box containing the partition integrand");
        }
    }
    let np = cfg.points.unwrap_or(match n_small {
        2 => 200,
        3 => 100,
        _ => 80,
    });
    let rule = gauss_legendre(np);
    let x: Vec<f64> = rule.iter().map(|&(t, _)| lam * t).collect();
    let lw: Vec<f64> = rule.iter().zip(&x).map(|(&(_, w), &xi)| (lam * w).ln() - nt * pot.eval(xi, 0)).collect();
    let pair = |i: usize, j: usize| -> f64 {
        let d = (x[i] - x[j]).abs();
        if d == 0.0 {
            f64::NEG_INFINITY
        } else {
            cs.iter().map(|&c| ln_sinh(c * d)).sum()
        }
    };
    let pt: Vec<f64> = (0..np * np).map(|k| pair(k / np, k % np)).collect();
    let pt = &pt;
    let lw = &lw;
    // The integrand is symmetric and vanishes when two nodes coincide, so only
    // strictly increasing index tuples are summed (times n!). Online
    // log-sum-exp per first index, combined in index order.
    let parts: Vec<(f64, f64)> = (0..np)
        .into_par_iter()
        .map(|i0| {
            let mut acc = Lse::default();
            match n_small {
                2 => {
                    for i1 in i0 + 1..np {
                        acc.push(lw[i0] + lw[i1] + pt[i0 * np + i1]);
                    }
                }
                3 => {
                    for i1 in i0 + 1..np {
                        let b = lw[i0] + lw[i1] + pt[i0 * np + i1];
                        for i2 in i1 + 1..np {
                            acc.push(b + lw[i2] + pt[i0 * np + i2] + pt[i1 * np + i2]);
                        }
                    }
                }
                _ => {
                    for i1 in i0 + 1..np {
                        let b1 = lw[i0] + lw[i1] + pt[i0 * np + i1];
                        for i2 in i1 + 1..np {
                            let b2 = b1 + lw[i2] + pt[i0 * np + i2] + pt[i1 * np + i2];
                            for i3 in i2 + 1..np {
                                acc.push(b2 + lw[i3] + pt[i0 * np + i3] + pt[i1 * np + i3] + pt[i2 * np + i3]);
                            }
                        }
                    }
                }
            }
            (acc.max, acc.sum)
        })
        .collect();
    let mx = parts.iter().filter(|p| p.1 > 0.0).map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = parts.iter().filter(|p| p.1 > 0.0).map(|p| p.1 * (p.0 - mx).exp()).sum();
    let ln_fact: f64 = (2..=n_small).map(|k| (k as f64).ln()).sum();
    let log_z = mx + s.ln() + ln_fact;
    if !log_z.is_finite() {
        return numerical("partition integral is not finite");
    }
    Ok(log_z)
}
