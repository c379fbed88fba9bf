//! Fast invariant suite behind `fracbridge selftest`. Statistical checks
//! use the configured seed, so a given config always gives the same verdict.

use std::sync::Arc;

use anyhow::Result;
use fracbridge::gauss::{
    inner_product_high_h, inner_product_low_h, BvFunction, CholeskySampler, CirculantSampler, StepFunction,
};
use fracbridge::limitlaw::{ks_two_sample, CrLaw};
use fracbridge::quad::tanh_sinh_real;
use fracbridge::special::gamma;
use fracbridge::{
    cgamma, cr_sample, fbm_covariance, ks_statistic, lse_continuous, lse_discrete, mc_chaos_checks,
    BridgePaths, Complex, Complex64, ModelParams, SeedSpec, TimeGrid,
};
use serde::Serialize;

use crate::config::Config;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelftestReport {
    pub checks: Vec<Check>,
    pub pass: bool,
}

fn check(name: &str, pass: bool, detail: String) -> Check {
    Check { name: name.into(), pass, detail }
}

/// Runs every section and prints one line per check.
pub fn run(cfg: &Config) -> Result<SelftestReport> {
    let base = SeedSpec::new(cfg.seed, cfg.stream);
    let checks = vec![
        special()?,
        isometry()?,
        samplers(base.replication(1))?,
        cr_law(cfg.cr_samples, base.replication(2))?,
        chaos(cfg.chaos_trials, base.replication(3))?,
        invariance(base.replication(4))?,
    ];
    for c in &checks {
        println!("[{}] {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(SelftestReport { checks, pass })
}

fn special() -> Result<Check> {
    let pi = std::f64::consts::PI;
    let e1 = (gamma(1.0f64)? - 1.0).abs();
    let e2 = (gamma(0.5f64)? - pi.sqrt()).abs() / pi.sqrt();
    let e3 = (cgamma(Complex64::new(1.0, 1.0))?.norm_sqr() * pi.sinh() / pi - 1.0).abs();
    let mut worst = 0.0f64;
    for k in 0..40 {
        let z = Complex64::new(0.15 + 0.23 * k as f64, 3.0 * (0.7 * k as f64).sin());
        let lhs = cgamma(z + 1.0)?;
        worst = worst.max((lhs - z * cgamma(z)?).norm() / lhs.norm());
    }
    Ok(check(
        "special",
        e1 <= 1e-12 && e2 <= 1e-12 && e3 <= 1e-10 && worst <= 1e-12,
        format!("gamma(1) {e1:.1e}, gamma(1/2) {e2:.1e}, |gamma(1+i)| {e3:.1e}, recurrence {worst:.1e}"),
    ))
}

fn isometry() -> Result<Check> {
    let mut worst = 0.0f64;
    for (s, t) in [(0.3, 0.7), (0.5, 0.5), (1.0, 0.2)] {
        let f = StepFunction::indicator(0.0, s, 1.0)?;
        let g = StepFunction::indicator(0.0, t, 1.0)?;
        let r: f64 = fbm_covariance(0.75, t, s)?;
        worst = worst.max((inner_product_high_h(&f, &g, 0.75)? - r).abs() / r);
        let gb = BvFunction::indicator(t, 1.0)?;
        let r: f64 = fbm_covariance(0.4, t, s)?;
        worst = worst.max((inner_product_low_h(&f, &gb, 0.4)? - r).abs() / r);
    }
    Ok(check("isometry", worst <= 1e-4, format!("worst relative error {worst:.1e} (H=0.75 and H=0.4)")))
}

fn samplers(seed: SeedSpec) -> Result<Check> {
    let grid = Arc::new(TimeGrid::uniform(32, 1.0)?);
    let n = 4000;
    // about the 0.1% point of the two-sample KS null
    let threshold = 1.95 * (2.0 / n as f64).sqrt();
    let mut worst = 0.0f64;
    for (i, h) in [0.3, 0.7].into_iter().enumerate() {
        let circ = CirculantSampler::new(h, grid.clone())?;
        let chol = CholeskySampler::new(h, grid.clone())?;
        let mut r1 = seed.replication(2 * i as u64).rng();
        let mut r2 = seed.replication(2 * i as u64 + 1).rng();
        let a: Vec<f64> = (0..n).map(|_| *circ.sample_pair(&mut r1).0.last().expect("nonempty")).collect();
        let b: Vec<f64> = (0..n).map(|_| *chol.sample_values(&mut r2).last().expect("nonempty")).collect();
        worst = worst.max(ks_two_sample(&a, &b)?);
    }
    Ok(check(
        "samplers",
        worst <= threshold,
        format!("circulant vs Cholesky KS {worst:.4} (threshold {threshold:.4}, {n} draws each)"),
    ))
}

fn cr_law(n: usize, seed: SeedSpec) -> Result<Check> {
    let law = CrLaw::new(2.5)?;
    let radii: Vec<f64> = cr_sample(&law, n, seed).iter().map(|z| z.norm()).collect();
    let ks = ks_statistic(&radii, |r| law.radial_cdf(r))?;
    let threshold = 1.95 / (n as f64).sqrt();
    let mass = tanh_sinh_real(
        |x: f64| {
            let r = x / (1.0 - x);
            2.0 * std::f64::consts::PI * r * law.density(Complex::new(r, 0.0)) / ((1.0 - x) * (1.0 - x))
        },
        0.0,
        1.0,
        1e-13,
    )?;
    let m0 = (law.marginal_density(0.0) * 2.0 * law.s.sqrt() - 1.0).abs();
    Ok(check(
        "cr_law",
        ks <= threshold && (mass - 1.0).abs() <= 1e-8 && m0 <= 1e-12,
        format!("radial KS {ks:.4} (threshold {threshold:.4}), mass - 1 {:.1e}, marginal(0) {m0:.1e}", mass - 1.0),
    ))
}

fn chaos(trials: usize, seed: SeedSpec) -> Result<Check> {
    let r = mc_chaos_checks(0.7, trials, seed)?;
    let failed: Vec<&str> = r.isometry.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    Ok(check(
        "chaos",
        r.pass,
        format!(
            "{} isometry entries ({} outside 3 SE), product {:.1e}, conjugation {:.1e}, hypercontractivity {}",
            r.isometry.len(),
            failed.len(),
            r.product_identity_max_residual,
            r.conjugation_max_residual,
            r.hypercontractivity_pass
        ),
    ))
}

fn invariance(seed: SeedSpec) -> Result<Check> {
    let p = ModelParams::new(0.7, Complex64::new(0.3, -0.2), 1.0)?;
    let grid = Arc::new(TimeGrid::uniform(500, 0.99)?);
    let b = BridgePaths::simulate(p, grid, seed)?;
    let d0 = lse_discrete(&b.z, 1.0, 500)?;
    let c0 = lse_continuous(&b.z, 1.0, 500)?;
    let mut worst = 0.0f64;
    for k in 0..10 {
        let c = Complex64::from_polar(10f64.powi(k - 5), 0.6 * k as f64);
        let z = b.z.scaled(c);
        worst = worst.max((lse_discrete(&z, 1.0, 500)? - d0).norm() / d0.norm());
        worst = worst.max((lse_continuous(&z, 1.0, 500)? - c0).norm() / c0.norm());
    }
    Ok(check("invariance", worst <= 1e-10, format!("estimators under Z -> cZ: worst relative change {worst:.1e}")))
}
