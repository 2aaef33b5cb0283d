//! `shgeq` subcommands: config in, CSV tables and `report.json` out.

use crate::config::RunConfig;
use crate::equilibrium::{
    density, effective_potential, first_moment_asymptotic, fourier_g_at_i, singular_residual, solve_endpoints_with,
    vprime_scale, Density, Method, NewtonReport, Support,
};
use crate::model::{ModelParams, Potential};
use crate::oracle::{discriminator, oracle_endpoints, z_small_n, DiscreteMeasure, Discriminator, QuadConfig};
use crate::tba::{solve_tba, GridConfig, TbaSolution};
use crate::wiener_hopf::{constants, WhFactors, Which};
use crate::{Error, Result, C64};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "shgeq", version, about = "Equilibrium measure of the sinh-Gordon log-gas")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the TBA equation; writes tba.json and tba.csv.
    SolveTba(Args),
    /// Support endpoints by Newton on the two constraints.
    Endpoints(Args),
    /// Equilibrium density; writes density.csv.
    Density(Args),
    /// First moment and its large-N formula.
    Moment(Args),
    /// Brute-force energy minimization; writes oracle.csv.
    Oracle(Args),
    /// Run every check.
    Verify(Args),
}

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides output.dir from the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportReport {
    pub a: f64,
    pub b: f64,
    pub method: Method,
    pub budget: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub c0: f64,
    pub d0: f64,
    pub d1: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub a: f64,
    pub b: f64,
    pub mean: f64,
    pub discriminator: Discriminator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Report {
    pub support: Option<SupportReport>,
    pub constants: Option<ConstantsReport>,
    pub mass: Option<f64>,
    pub moment: Option<f64>,
    pub moment_asymptotic: Option<f64>,
    #[serde(rename = "J_residual")]
    pub j_residual: Option<f64>,
    pub veff_constancy: Option<f64>,
    pub pv_residual: Option<f64>,
    pub oracle: Option<OracleReport>,
    pub checks: Vec<Check>,
}

impl Report {
    fn check(&mut self, name: &str, value: f64, tol: f64) {
        self.checks.push(Check { name: name.into(), value, tol, pass: value <= tol });
    }

    fn check_with(&mut self, name: &str, value: f64, tol: f64, pass: bool) {
        self.checks.push(Check { name: name.into(), value, tol, pass });
    }

    pub fn failed(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect()
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct TbaCache {
    r: f64,
    b: f64,
    grid: GridConfig,
    solution: TbaSolution,
}

/// State shared by the subcommands of one run.
pub struct Run {
    pub cfg: RunConfig,
    pub params: ModelParams,
    pub out: PathBuf,
    tba: Option<TbaSolution>,
    wh: Option<WhFactors>,
}

impl Run {
    pub fn new(cfg: RunConfig, out: Option<PathBuf>) -> Result<Run> {
        let params = cfg.params()?;
        let out = out.unwrap_or_else(|| cfg.output.dir.clone());
        std::fs::create_dir_all(&out)
            .map_err(|e| Error::Domain(format!("output directory {} is not writable: {e}", out.display())))?;
        Ok(Run { cfg, params, out, tba: None, wh: None })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    /// The TBA solution, from `tba.json` when it matches the config.
    pub fn tba(&mut self) -> Result<&TbaSolution> {
        if self.tba.is_none() {
            let m = &self.cfg.model;
            let path = self.path("tba.json");
            let cached = std::fs::read_to_string(&path)
                .ok()
                .and_then(|t| serde_json::from_str::<TbaCache>(&t).ok())
                .filter(|c| c.r == m.r && c.b == m.b && c.grid == self.cfg.tba);
            let sol = match cached {
                Some(c) => {
                    eprintln!("tba: cached ({})", path.display());
                    c.solution.restore()
                }
                None => {
                    let sol = solve_tba(m.r, m.b, &self.cfg.tba)?;
                    let cache = TbaCache { r: m.r, b: m.b, grid: self.cfg.tba, solution: sol.clone() };
                    std::fs::write(&path, serde_json::to_string(&cache)?)?;
                    write_tba_csv(&self.path("tba.csv"), &sol)?;
                    eprintln!("tba: solved in {} iterations, residual {:e}", sol.iterations, sol.residual_sup);
                    sol
                }
            };
            self.tba = Some(sol);
        }
        Ok(self.tba.as_ref().unwrap())
    }

    pub fn wh(&mut self) -> Result<WhFactors> {
        if self.wh.is_none() {
            self.wh = Some(WhFactors::from_params(&self.params)?);
        }
        Ok(self.wh.unwrap())
    }

    fn fgi(&mut self) -> Result<f64> {
        Ok(fourier_g_at_i(Some(self.tba()?)))
    }

    pub fn endpoints(&mut self, rep: &mut Report) -> Result<Support> {
        let wh = self.wh()?;
        let fgi = self.fgi()?;
        let (s, nr): (Support, NewtonReport) = solve_endpoints_with(&self.params, &wh, fgi, &self.cfg.quadrature.newton)?;
        rep.support = Some(SupportReport { a: s.a_n, b: s.b_n, method: s.method, budget: s.budget });
        let c = constants(&self.params, Which::All)?;
        rep.constants = Some(ConstantsReport { c0: c.c0, d0: c.d0, d1: c.d1, ratio: c.ratio_c0_d0 });
        rep.j_residual = Some(nr.j_residual);
        rep.check("newton_residual", nr.j_residual.abs().max(nr.mass_residual.abs()), 1e-10);
        if self.params.alpha == 0.0 {
            rep.check("endpoint_symmetry", (s.a_n + s.b_n).abs(), 1e-10);
        }
        Ok(s)
    }

    pub fn density(&mut self, s: &Support, rep: &mut Report) -> Result<Density> {
        let wh = self.wh()?;
        let params = self.params;
        let dcfg = self.cfg.quadrature.density;
        let d = density(&params, Some(self.tba()?), &wh, s, &dcfg)?;
        write_density_csv(&self.path("density.csv"), &d)?;
        let mass = d.mass();
        rep.mass = Some(mass);
        rep.moment = Some(d.first_moment());
        rep.check("mass", (mass - 1.0).abs(), 1e-3f64.max(10.0 * d.budget));
        rep.check("rho_nonnegative", (-d.min_rho()).max(0.0), 1e-6);
        if params.alpha == 0.0 {
            rep.check("density_symmetry", d.asymmetry(), 1e-6);
        }
        Ok(d)
    }

    pub fn moment(&mut self, d: &Density, rep: &mut Report) -> Result<()> {
        let wh = self.wh()?;
        let ma = first_moment_asymptotic(&self.params, &wh);
        let m = d.first_moment();
        rep.moment = Some(m);
        rep.moment_asymptotic = Some(ma.full);
        if self.params.alpha == 0.0 {
            rep.check("moment_zero", m.abs(), 1e-8);
        } else {
            rep.check("moment_vs_asymptotic", (m / ma.full - 1.0).abs(), 1e-2);
        }
        Ok(())
    }

    pub fn variational(&mut self, d: &Density, rep: &mut Report) -> Result<()> {
        let params = self.params;
        let pot = Potential::new(&params, Some(self.tba()?))?;
        let s = &d.model.support;
        let mid = 0.5 * (s.a_n + s.b_n);
        let q = 0.25 * s.x_n;
        let inner: Vec<f64> =
            (0..=20).map(|k| effective_potential(&params, &pot, d, mid - q + 2.0 * q * k as f64 / 20.0)).collect();
        let hi = inner.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = inner.iter().cloned().fold(f64::INFINITY, f64::min);
        let c_eq = inner.iter().sum::<f64>() / inner.len() as f64;
        let spread = (hi - lo) / c_eq.abs();
        rep.veff_constancy = Some(spread);
        rep.check("veff_constancy", spread, 1e-2);
        let outer = [0.05, 0.1, 0.2]
            .iter()
            .flat_map(|&f| [s.b_n + f * s.x_n, s.a_n - f * s.x_n])
            .map(|x| effective_potential(&params, &pot, d, x))
            .fold(f64::INFINITY, f64::min);
        // positive gap means the exterior lies strictly above the plateau
        let gap = outer - hi;
        rep.check_with("veff_exterior_gap", gap, 0.0, gap > 0.0);
        let scale = vprime_scale(&pot, s);
        let n = d.xi_grid.len();
        let mut worst: f64 = 0.0;
        for k in 1..=5 {
            let x = d.xi_grid[k * (n - 1) / 6];
            worst = worst.max(singular_residual(&params, &pot, d, x)?.abs() / scale);
        }
        rep.pv_residual = Some(worst);
        rep.check("pv_residual", worst, 1e-3);
        Ok(())
    }

    pub fn oracle(&mut self, s: &Support, d: &Density, rep: &mut Report) -> Result<DiscreteMeasure> {
        let params = self.params;
        let ocfg = self.cfg.oracle;
        let (disc, m) = discriminator(&params, Some(self.tba()?), &ocfg)?;
        let (a, b) = oracle_endpoints(&m, ocfg.threshold)?;
        write_oracle_csv(&self.path("oracle.csv"), &m)?;
        let mean = m.mean();
        rep.check("oracle_endpoint_a", (a - s.a_n).abs() / s.x_n, 0.05);
        rep.check("oracle_endpoint_b", (b - s.b_n).abs() / s.x_n, 0.05);
        rep.check("oracle_mean", (mean - d.first_moment()).abs(), 1e-2);
        rep.check_with("oracle_discriminator_clear", 3.0 * disc.bias / disc.gap, 1.0, disc.clear);
        rep.check_with("oracle_energy_monotone", 0.0, 0.0, m.history.windows(2).all(|w| w[1] <= w[0]));
        rep.oracle = Some(OracleReport { a, b, mean, discriminator: disc });
        Ok(m)
    }

    pub fn partition(&mut self, rep: &mut Report) -> Result<()> {
        let qc = self.cfg.quadrature.partition;
        let alpha = if self.params.alpha != 0.0 { self.params.alpha } else { 0.3 };
        let base = self.params.with_alpha(alpha);
        let tba = self.tba()?.clone();
        for n in [2usize, 3] {
            let pts = qc.points.unwrap_or(if n == 2 { 200 } else { 100 });
            let at = |p: &ModelParams, pts: usize| z_small_n(p, Some(&tba), n, &QuadConfig { points: Some(pts), ..qc });
            let z = at(&base, pts)?;
            let zm = at(&base.with_alpha(-alpha), pts)?;
            let z2 = at(&base, 2 * pts)?;
            let h = 1e-3;
            let dz = (at(&base.with_alpha(h), pts)? - at(&base.with_alpha(-h), pts)?) / (2.0 * h);
            rep.check(&format!("partition_n{n}_even"), (z - zm).abs(), 1e-8);
            rep.check(&format!("partition_n{n}_refine"), (z2 - z).abs(), 1e-6);
            rep.check(&format!("partition_n{n}_dalpha_zero"), dz.abs(), 1e-6);
        }
        Ok(())
    }

    /// Factorization and special-value checks at the run's b.
    pub fn wiener_hopf_checks(&mut self, rep: &mut Report) -> Result<()> {
        let wh = self.wh()?;
        let mut worst: f64 = 0.0;
        for &im in &[0.0, 0.4, -0.4] {
            for k in -30..=30 {
                let l = C64::new(k as f64 + 0.37, im);
                let r = wh.r(l);
                worst = worst.max((r - wh.r_up(l) * wh.r_down(l)).norm() / r.norm());
            }
        }
        rep.check("wh_factorization", worst, 1e-10);
        let sw = wh.omega_sum().sqrt();
        let sp = wh.special;
        rep.check("wh_r_down_0", (sp.r_down_0 - C64::new(0.0, -sw)).norm(), 1e-8);
        rep.check("wh_lambda_r_up_0", (sp.lim0_lambda_r_up - C64::new(0.0, sw)).norm(), 1e-8);
        rep.check("wh_dlog_real_part", sp.dlog_r_down_0.re.abs(), 1e-8);
        let (s1, s2) = (1.0 / (2.0 * (1.0 + self.params.b.powi(2))), 1.0 / (2.0 * (1.0 + self.params.b.powi(-2))));
        let want = (2.0 * s1).powf(-2.0 * s1) * (2.0 * s2).powf(-2.0 * s2);
        let c = constants(&self.params, Which::All)?;
        rep.check("constants_ratio", (c.ratio_c0_d0 / want - 1.0).abs(), 1e-8);
        Ok(())
    }

    pub fn tba_checks(&mut self, rep: &mut Report) -> Result<()> {
        let t = self.tba()?;
        let res = t.residual_sup;
        let n = t.eps_values.len();
        let even = (0..n).map(|j| (t.eps_values[j] - t.eps_values[n - 1 - j]).abs()).fold(0.0, f64::max);
        rep.check("tba_residual", res, 1e-8);
        rep.check("tba_even", even, 1e-12);
        Ok(())
    }

    pub fn write_report(&self, rep: &Report) -> Result<()> {
        let path = self.path("report.json");
        std::fs::write(&path, serde_json::to_string_pretty(rep)? + "\n")?;
        eprintln!("wrote {}", path.display());
        Ok(())
    }
}

fn write_tba_csv(path: &Path, t: &TbaSolution) -> Result<()> {
    let mut s = String::from("lambda,eps,g\n");
    for ((x, e), g) in t.grid.iter().zip(&t.eps_values).zip(t.g_values()) {
        writeln!(s, "{x},{e},{g}").unwrap();
    }
    Ok(std::fs::write(path, s)?)
}

fn write_density_csv(path: &Path, d: &Density) -> Result<()> {
    let mut s = String::from("xi,rho,varpi1,varpi2,varpi3\n");
    for k in 0..d.xi_grid.len() {
        writeln!(s, "{},{},{},{},{}", d.xi_grid[k], d.rho_values[k], d.varpi1[k], d.varpi2[k], d.varpi3[k]).unwrap();
    }
    Ok(std::fs::write(path, s)?)
}

fn write_oracle_csv(path: &Path, m: &DiscreteMeasure) -> Result<()> {
    let mut s = String::from("node,weight\n");
    for (x, w) in m.nodes.iter().zip(&m.weights) {
        writeln!(s, "{x},{w}").unwrap();
    }
    Ok(std::fs::write(path, s)?)
}

/// Run one subcommand. A failed check is reported as `Error::Check` after
/// the report has been written.
pub fn run(cli: Cli) -> Result<Report> {
    let (args, cmd) = match &cli.command {
        Command::SolveTba(a) => (a, 0),
        Command::Endpoints(a) => (a, 1),
        Command::Density(a) => (a, 2),
        Command::Moment(a) => (a, 3),
        Command::Oracle(a) => (a, 4),
        Command::Verify(a) => (a, 5),
    };
    let cfg = RunConfig::load(&args.config)?;
    let mut run = Run::new(cfg, args.out.clone())?;
    let mut rep = Report::default();
    if cmd == 0 {
        run.tba()?;
        let t = run.tba.as_ref().unwrap();
        write_tba_csv(&run.path("tba.csv"), t)?;
        return Ok(rep);
    }
    if cmd == 5 {
        run.tba_checks(&mut rep)?;
        run.wiener_hopf_checks(&mut rep)?;
    }
    let s = run.endpoints(&mut rep)?;
    if cmd >= 2 {
        let d = run.density(&s, &mut rep)?;
        if cmd == 3 || cmd == 5 {
            run.moment(&d, &mut rep)?;
        }
        if cmd == 5 {
            run.variational(&d, &mut rep)?;
            run.partition(&mut rep)?;
        }
        if cmd == 4 || cmd == 5 {
            run.oracle(&s, &d, &mut rep)?;
        }
    }
    run.write_report(&rep)?;
    let failed = rep.failed();
    if !failed.is_empty() {
        return Err(Error::Check(failed.join(", ")));
    }
    Ok(rep)
}

/// Entry point for the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("shgeq: {e}");
            e.exit_code()
        }
    }
}
