//! One function per subcommand. Each writes its artifacts into `out` and
//! returns the JSON summary it wrote.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};
use fracbridge::bridge::bridge_euler;
use fracbridge::estimate::{
    run_consistency_experiment, run_estimate_experiment, run_limit_experiment,
    LimitCase, McSummary,
};
use fracbridge::gauss::ComplexFbmSampler;
use fracbridge::limitlaw::CrLaw;
use fracbridge::special::{a_tilde_second_moment, nested_kernel_value, xi_terminal_second_moment};
use fracbridge::{cr_sample, cr_scale, omega_terminal_second_moment, BridgePaths, SeedSpec, TimeGrid};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{Config, Subcommand};
use crate::selftest;

/// Outcome of a subcommand: the summary and whether it counts as a failure.
pub struct Outcome {
    pub summary: Value,
    pub failed: bool,
}

/// Validates the preconditions of `cmd`, then runs it.
pub fn run(cmd: Subcommand, cfg: &Config, out: &Path) -> Result<Outcome> {
    cfg.validate_for(cmd)?;
    fs::create_dir_all(out).with_context(|| format!("creating output directory {}", out.display()))?;
    let (result, failed) = match cmd {
        Subcommand::Simulate => (simulate(cfg, out)?, false),
        Subcommand::Estimate => (experiment(cmd, cfg, out)?, false),
        Subcommand::Consistency => (experiment(cmd, cfg, out)?, false),
        Subcommand::Limitlaw => (limitlaw(cfg, out)?, false),
        Subcommand::Constants => (constants(cfg)?, false),
        Subcommand::Selftest => {
            let r = selftest::run(cfg)?;
            let failed = !r.pass;
            (serde_json::to_value(r)?, failed)
        }
    };
    let summary = json!({
        "subcommand": cmd.name(),
        "config_hash": cfg.hash(),
        "seed": cfg.seed,
        "stream": cfg.stream,
        "config": cfg,
        "result": result,
    });
    write_json(&out.join(format!("{}.json", cmd.name())), &summary)?;
    Ok(Outcome { summary, failed })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, v)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn simulate(cfg: &Config, out: &Path) -> Result<Value> {
    let p = cfg.params()?;
    let grid = Arc::new(TimeGrid::uniform(cfg.n_steps, cfg.t_max())?);
    let sampler = ComplexFbmSampler::new(p.hurst, grid.clone())?;
    let base = SeedSpec::new(cfg.seed, cfg.stream);
    let dumped = cfg.paths.min(cfg.replications);

    let terminal: Vec<(usize, fracbridge::Complex64, f64)> = (0..cfg.replications)
        .into_par_iter()
        .map(|r| -> Result<_> {
            let b = BridgePaths::from_zeta(p, sampler.sample(base.replication(r as u64)))?;
            Ok((r, b.omega.last(), b.z.last().norm()))
        })
        .collect::<Result<_>>()?;

    let mut w = create(&out.join("simulate_paths.csv"))?;
    writeln!(w, "replication,t,re_zeta,im_zeta,re_omega,im_omega,re_z,im_z")?;
    let mut euler = Value::Null;
    for r in 0..dumped {
        let b = BridgePaths::from_zeta(p, sampler.sample(base.replication(r as u64)))?;
        for (k, t) in grid.times().iter().enumerate() {
            let (a, o, z) = (b.zeta.values[k], b.omega.values[k], b.z.values[k]);
            writeln!(w, "{r},{t},{},{},{},{},{},{}", a.re, a.im, o.re, o.im, z.re, z.im)?;
        }
        if r == 0 {
            let e = bridge_euler(&b.zeta, &p)?;
            let gap = e.path.values.iter().zip(&b.z.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            euler = json!({
                "max_abs_difference_replication_0": gap,
                "stiffness": e.stiffness,
                "step_too_large": e.step_too_large,
            });
        }
    }
    w.flush()?;

    let mut w = create(&out.join("simulate_terminal.csv"))?;
    writeln!(w, "replication,t,re_omega,im_omega,abs_z")?;
    for (r, o, z) in &terminal {
        writeln!(w, "{r},{},{},{},{z}", grid.t_max(), o.re, o.im)?;
    }
    w.flush()?;

    let m: Vec<f64> = terminal.iter().map(|(_, o, _)| o.norm_sqr()).collect();
    let n = m.len() as f64;
    let mean = m.iter().sum::<f64>() / n;
    let se = if m.len() > 1 {
        (m.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
    } else {
        f64::NAN
    };
    let exact = omega_terminal_second_moment(&p)?;
    Ok(json!({
        "n_steps": cfg.n_steps,
        "t_max": grid.t_max(),
        "replications": cfg.replications,
        "paths_dumped": dumped,
        "mc_mean_abs_omega_sq": mean,
        "mc_std_error": if se.is_finite() { json!(se) } else { Value::Null },
        "E_omega_T_sq": exact,
        "relative_deviation": (mean - exact) / exact,
        "euler": euler,
    }))
}

fn write_records(s: &McSummary, path: PathBuf) -> Result<()> {
    let mut w = create(&path)?;
    s.write_records_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

fn experiment(cmd: Subcommand, cfg: &Config, out: &Path) -> Result<Value> {
    let ec = cfg.experiment(cfg.t_list_for(cmd)?);
    let s = match cmd {
        Subcommand::Estimate => run_estimate_experiment(&ec)?,
        _ => run_consistency_experiment(&ec)?,
    };
    write_records(&s, out.join(format!("{}.csv", cmd.name())))?;
    Ok(serde_json::to_value(&s)?)
}

fn limitlaw(cfg: &Config, out: &Path) -> Result<Value> {
    let ec = cfg.experiment(cfg.t_list_for(Subcommand::Limitlaw)?);
    let s = run_limit_experiment(&ec)?;
    write_records(&s, out.join("limitlaw.csv"))?;

    let case = cfg.case()?;
    let scale = match case {
        LimitCase::CaseI | LimitCase::CaseII => {
            Some(cr_scale(cfg.hurst, ec.params.alpha, cfg.horizon, case)?)
        }
        _ => cfg.scale,
    };
    let mut tables = Value::Null;
    if let Some(sc) = scale {
        let law = CrLaw::new(sc)?;
        let k = cfg.table_points;
        let width = 10.0 * sc.sqrt();
        let mut w = create(&out.join("cr_marginal_table.csv"))?;
        writeln!(w, "x,density,cdf")?;
        for i in 0..k {
            let x = -width + 2.0 * width * i as f64 / (k - 1) as f64;
            writeln!(w, "{x},{},{}", law.marginal_density(x), law.marginal_cdf(x))?;
        }
        w.flush()?;
        let mut w = create(&out.join("cr_radial_table.csv"))?;
        writeln!(w, "r,cdf")?;
        for i in 0..k {
            let r = width * i as f64 / (k - 1) as f64;
            writeln!(w, "{r},{}", law.radial_cdf(r))?;
        }
        w.flush()?;
        // a stream no replication uses
        let seed = SeedSpec::new(cfg.seed, cfg.stream).replication(u64::from(u32::MAX));
        let z = cr_sample(&law, cfg.cr_samples, seed);
        let mut w = create(&out.join("cr_samples.csv"))?;
        writeln!(w, "index,re,im")?;
        for (i, v) in z.iter().enumerate() {
            writeln!(w, "{i},{},{}", v.re, v.im)?;
        }
        w.flush()?;
        tables = json!({
            "scale": sc,
            "radial_median": law.radial_median(),
            "table_points": k,
            "cr_samples": cfg.cr_samples,
        });
    }
    let mut v = serde_json::to_value(&s)?;
    v["cr_tables"] = tables;
    Ok(v)
}

fn opt<T: serde::Serialize>(r: fracbridge::Result<T>) -> Value {
    r.ok().map(|v| json!(v)).unwrap_or(Value::Null)
}

fn constants(cfg: &Config) -> Result<Value> {
    let p = cfg.params()?;
    let (h, a, t) = (p.hurst, p.alpha, p.horizon);
    let case = cfg.case().ok();
    let nested = nested_kernel_value(h, a, t).map(|c| [c.re, c.im]);
    let c = h * (2.0 * h - 1.0);
    let g_inf = nested_kernel_value(h, a, t).map(|v| [v.re * c, v.im * c]);
    Ok(json!({
        "H": h,
        "alpha": cfg.alpha,
        "T": t,
        "case": case.map(|c| c.label()),
        "E_omega_T_sq": omega_terminal_second_moment(&p)?,
        "E_xi_T_sq_real_drift": opt(xi_terminal_second_moment(h, p.lambda(), t)),
        "E_A_tilde_sq": opt(a_tilde_second_moment(h, a)),
        "cr_scale_case_i": opt(cr_scale(h, a, t, LimitCase::CaseI)),
        "cr_scale_case_ii": opt(cr_scale(h, a, t, LimitCase::CaseII)),
        "nested_kernel_integral": opt(nested),
        "eta_mean_at_T": opt(g_inf),
    }))
}
