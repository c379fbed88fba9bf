//! The complex-ratio law `CR(s)` of `eta_1 / eta_2` for independent
//! `eta_1 ~ CN(0, s)`, `eta_2 ~ CN(0, 1)`, and Kolmogorov–Smirnov tools.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::gauss::SeedSpec;
use crate::scalar::Real;

/// `CR(s)` with density `(s/pi) (|z|^2 + s)^{-2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrLaw<T> {
    pub s: T,
}

impl<T: Real> CrLaw<T> {
    pub fn new(s: T) -> Result<Self> {
        if s > T::zero() && s.is_finite() {
            Ok(Self { s })
        } else {
            domain(format!("CR scale must be positive, got {s}"))
        }
    }

    pub fn density(&self, z: Complex<T>) -> T {
        cr_density(z, self)
    }

    pub fn marginal_density(&self, x: T) -> T {
        cr_marginal_density(x, self)
    }

    /// CDF of either real marginal.
    pub fn marginal_cdf(&self, x: T) -> T {
        T::lit(0.5) * (T::one() + x / (x * x + self.s).sqrt())
    }

    pub fn radial_cdf(&self, r: T) -> T {
        cr_radial_cdf(r, self)
    }

    /// Median of `|Z|`, which is `sqrt(s)`.
    pub fn radial_median(&self) -> T {
        self.s.sqrt()
    }
}

pub fn cr_density<T: Real>(z: Complex<T>, law: &CrLaw<T>) -> T {
    let d = z.norm_sqr() + law.s;
    law.s / (T::PI() * d * d)
}

/// `s / (2 (x^2 + s)^{3/2})`; heavier-shouldered than a Cauchy law.
pub fn cr_marginal_density<T: Real>(x: T, law: &CrLaw<T>) -> T {
    let d = x * x + law.s;
    T::lit(0.5) * law.s / (d * d.sqrt())
}

/// `P(|Z| <= r) = r^2 / (r^2 + s)`.
pub fn cr_radial_cdf<T: Real>(r: T, law: &CrLaw<T>) -> T {
    if r <= T::zero() {
        return T::zero();
    }
    let r2 = r * r;
    r2 / (r2 + law.s)
}

/// `n` i.i.d. draws as `eta_1 / eta_2`, redrawing an exactly zero denominator.
pub fn cr_sample<T: Real>(law: &CrLaw<T>, n: usize, seed: SeedSpec) -> Vec<Complex<T>> {
    let mut rng = seed.rng();
    // CN(0, v) has N(0, v/2) parts
    let sx = (law.s * T::lit(0.5)).sqrt();
    let sy = T::lit(0.5).sqrt();
    (0..n)
        .map(|_| {
            let num = Complex::new(T::standard_normal(&mut rng), T::standard_normal(&mut rng)) * sx;
            loop {
                let den = Complex::new(T::standard_normal(&mut rng), T::standard_normal(&mut rng)) * sy;
                if den.norm_sqr() > T::zero() {
                    break num / den;
                }
            }
        })
        .collect()
}

fn sorted<T: Real>(samples: &[T]) -> Result<Vec<T>> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    if samples.iter().any(|x| x.is_nan()) {
        return domain("NaN in KS sample");
    }
    let mut v = samples.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
    Ok(v)
}

/// One-sample statistic `sup |F_n - F|` for a continuous reference CDF.
pub fn ks_statistic<T: Real, F: Fn(T) -> T>(samples: &[T], cdf: F) -> Result<T> {
    let v = sorted(samples)?;
    let n = T::from_usize_lossy(v.len());
    let mut d = T::zero();
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        let lo = T::from_usize_lossy(i) / n;
        let hi = T::from_usize_lossy(i + 1) / n;
        d = d.max(f - lo).max(hi - f);
    }
    Ok(d)
}

/// Two-sample statistic `sup |F_n - G_m|`.
pub fn ks_two_sample<T: Real>(a: &[T], b: &[T]) -> Result<T> {
    let a = sorted(a)?;
    let b = sorted(b)?;
    let (na, nb) = (T::from_usize_lossy(a.len()), T::from_usize_lossy(b.len()));
    let (mut i, mut j) = (0, 0);
    let mut d = T::zero();
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        let diff = (T::from_usize_lossy(i) / na - T::from_usize_lossy(j) / nb).abs();
        d = d.max(diff);
    }
    Ok(d)
}

/// Asymptotic Kolmogorov tail `P(sqrt(n_eff) D > x)` at `x = sqrt(n_eff) d`.
pub fn ks_p_value(d: f64, n_eff: f64) -> f64 {
    let x = (n_eff.sqrt() + 0.12 + 0.11 / n_eff.sqrt()) * d;
    if x < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = 2.0 * (-1f64).powi(k - 1) * (-2.0 * kf * kf * x * x).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}
