//! Complex fractional Brownian bridge paths: the Wiener integral `omega`,
//! the explicit solution `Z_t = sigma (T-t)^alpha omega_t`, an Euler scheme
//! on the SDE and the rescaled process `Y` for `Re(alpha) >= H`.

use std::sync::Arc;

use num_complex::Complex;

use crate::error::{domain, Error, Result};
use crate::gauss::{sample_complex_fbm, ComplexPath, SeedSpec, TimeGrid};
use crate::scalar::{real_pow_complex, Real};
use crate::special::ModelParams;

/// Driving noise, Wiener integral and bridge on one grid.
#[derive(Debug, Clone)]
pub struct BridgePaths<T: Real> {
    pub zeta: ComplexPath<T>,
    pub omega: ComplexPath<T>,
    pub z: ComplexPath<T>,
    pub params: ModelParams<T>,
}

impl<T: Real> BridgePaths<T> {
    pub fn simulate(params: ModelParams<T>, grid: Arc<TimeGrid<T>>, seed: SeedSpec) -> Result<Self> {
        Self::from_zeta(params, sample_complex_fbm(params.hurst, grid, seed)?)
    }

    pub fn from_zeta(params: ModelParams<T>, zeta: ComplexPath<T>) -> Result<Self> {
        let omega = omega_path(&zeta, &params)?;
        let z = bridge_exact(&omega, &params)?;
        Ok(Self { zeta, omega, z, params })
    }
}

/// Left-point sums `omega[k] = sum_{j<k} (T-t_j)^{-alpha} (zeta[j+1]-zeta[j])`.
pub fn omega_path<T: Real>(zeta: &ComplexPath<T>, p: &ModelParams<T>) -> Result<ComplexPath<T>> {
    zeta.grid.check_before(p.horizon)?;
    let t = zeta.grid.times();
    let mut values = Vec::with_capacity(t.len());
    let mut acc = Complex::new(T::zero(), T::zero());
    values.push(acc);
    for k in 0..t.len() - 1 {
        let kernel = real_pow_complex(p.horizon - t[k], -p.alpha);
        acc += kernel * (zeta.values[k + 1] - zeta.values[k]);
        values.push(acc);
    }
    Ok(ComplexPath { grid: zeta.grid.clone(), values })
}

/// `Z[k] = sigma (T-t_k)^alpha omega[k]`, principal power of a positive base.
pub fn bridge_exact<T: Real>(omega: &ComplexPath<T>, p: &ModelParams<T>) -> Result<ComplexPath<T>> {
    omega.grid.check_before(p.horizon)?;
    let values = omega
        .grid
        .times()
        .iter()
        .zip(&omega.values)
        .map(|(&t, &w)| real_pow_complex(p.horizon - t, p.alpha) * w * p.sigma)
        .collect();
    Ok(ComplexPath { grid: omega.grid.clone(), values })
}

/// Euler scheme output with the stiffness diagnostic.
#[derive(Debug, Clone)]
pub struct EulerPath<T: Real> {
    pub path: ComplexPath<T>,
    /// `max_k h_k * lambda / (T - t_max)`.
    pub stiffness: T,
    /// Set when the stiffness exceeds 1/2.
    pub step_too_large: bool,
}

/// `Z[k+1] = Z[k] - alpha Z[k] h_k / (T-t_k) + sigma (zeta[k+1]-zeta[k])`.
pub fn bridge_euler<T: Real>(zeta: &ComplexPath<T>, p: &ModelParams<T>) -> Result<EulerPath<T>> {
    let grid = &zeta.grid;
    grid.check_before(p.horizon)?;
    let t = grid.times();
    let mut values = Vec::with_capacity(t.len());
    let mut z = Complex::new(T::zero(), T::zero());
    values.push(z);
    for k in 0..t.len() - 1 {
        let h = t[k + 1] - t[k];
        z = z - p.alpha * z * (h / (p.horizon - t[k])) + (zeta.values[k + 1] - zeta.values[k]) * p.sigma;
        values.push(z);
    }
    let stiffness = grid.max_step() * p.lambda() / (p.horizon - grid.t_max());
    Ok(EulerPath {
        path: ComplexPath { grid: grid.clone(), values },
        stiffness,
        step_too_large: stiffness > T::lit(0.5),
    })
}

/// Rescaled Wiener integral together with the indices left out of the
/// logarithmic normalisation.
#[derive(Debug, Clone)]
pub struct ScaledPath<T: Real> {
    pub path: ComplexPath<T>,
    /// Grid points with `|log(T-t)| = 0`; their values are set to 0.
    pub skipped: Vec<usize>,
}

/// `Y_t = omega_t / sqrt(2|log(T-t)|)` when `Re(alpha) = H`, and
/// `Y_t = sqrt(lambda-H) (T-t)^{lambda-H} omega_t` when `H < Re(alpha) < 1`.
pub fn scaled_y_path<T: Real>(omega: &ComplexPath<T>, p: &ModelParams<T>) -> Result<ScaledPath<T>> {
    omega.grid.check_before(p.horizon)?;
    let (h, lam) = (p.hurst, p.lambda());
    let tol = T::lit(1e-12);
    if lam < h - tol || lam >= T::one() {
        return domain(format!("Y normalisation requires H<=Re(alpha)<1 (Re(alpha)={lam}, H={h})"));
    }
    let log_case = (lam - h).abs() <= tol;
    let mut skipped = Vec::new();
    let mut values = Vec::with_capacity(omega.values.len());
    for (k, (&t, &w)) in omega.grid.times().iter().zip(&omega.values).enumerate() {
        let r = p.horizon - t;
        let factor = if log_case {
            let l = r.ln().abs();
            if l == T::zero() {
                skipped.push(k);
                values.push(Complex::new(T::zero(), T::zero()));
                continue;
            }
            (T::lit(2.0) * l).sqrt().recip()
        } else {
            (lam - h).sqrt() * r.powf(lam - h)
        };
        values.push(w * factor);
    }
    Ok(ScaledPath { path: ComplexPath { grid: omega.grid.clone(), values }, skipped })
}

/// `max_{j<k} |x_k - x_j| / (t_k - t_j)^gamma` over all grid pairs.
pub fn holder_quotient<T: Real>(path: &ComplexPath<T>, gamma: T) -> Result<T> {
    if !(gamma > T::zero() && gamma <= T::one()) {
        return domain(format!("Hölder exponent must lie in (0,1], got {gamma}"));
    }
    let t = path.grid.times();
    if t.len() < 2 {
        return Err(Error::EmptyInput);
    }
    let mut best = T::zero();
    for k in 1..t.len() {
        for j in 0..k {
            let q = (path.values[k] - path.values[j]).norm() / (t[k] - t[j]).powf(gamma);
            best = best.max(q);
        }
    }
    Ok(best)
}
