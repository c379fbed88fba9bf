//! The centred process `G_t = eta_t - E[eta_t]`, where
//! `eta_t = int_0^t (T-u)^{conj(alpha)-1} conj(omega_u) dzeta_u` is the
//! stochastic part of `alpha_hat_t - alpha` (up to the denominator).
//!
//! The centring uses the exact mean of the discrete left-point sum, so `G`
//! is unbiased on every grid; it tends to the continuous correction
//! [`g_correction_continuous`] as the grid is refined.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::FftPlanner;

use super::kernel_pow;
use crate::bridge::omega_path;
use crate::error::{domain, Result};
use crate::gauss::{covariance_unchecked, ComplexPath, TimeGrid};
use crate::scalar::Real;
use crate::special::{nested_kernel_integral, ModelParams};

// non-uniform grids fall back to an O(n^2) mean computation
const DIRECT_MEAN_CAP: usize = 20_000;

/// Precomputed centring for one model and grid.
#[derive(Debug, Clone)]
pub struct GProcess<T: Real> {
    params: ModelParams<T>,
    grid: Arc<TimeGrid<T>>,
    // mean[k] = E[eta at t_k] for the discrete sum
    mean: Vec<Complex<T>>,
}

impl<T: Real> GProcess<T> {
    pub fn new(params: ModelParams<T>, grid: Arc<TimeGrid<T>>) -> Result<Self> {
        params.require_estimable()?;
        grid.check_before(params.horizon)?;
        let n = grid.n_steps();
        let t = grid.times();
        let ab = params.alpha.conj();
        let a: Vec<Complex<T>> = t[..n].iter().map(|&tj| kernel_pow(params.horizon, tj, -ab)).collect();
        // inner[k] = sum_{j<k} a_j E[dB_j dB_k]
        let inner = match grid.step() {
            Some(h) => toeplitz_causal(&a, params.hurst, h),
            None => {
                if grid.len() > DIRECT_MEAN_CAP {
                    return domain(format!("non-uniform grids are limited to {DIRECT_MEAN_CAP} points here"));
                }
                let hh = params.hurst;
                (0..n)
                    .map(|k| {
                        (0..k).fold(Complex::new(T::zero(), T::zero()), |acc, j| {
                            acc + a[j] * increment_cov(hh, t[j], t[j + 1], t[k], t[k + 1])
                        })
                    })
                    .collect()
            }
        };
        let mut mean = Vec::with_capacity(n + 1);
        let mut acc = Complex::new(T::zero(), T::zero());
        mean.push(acc);
        for k in 0..n {
            acc += kernel_pow(params.horizon, t[k], ab - T::one()) * inner[k];
            mean.push(acc);
        }
        Ok(Self { params, grid, mean })
    }

    /// `E[eta_{t_k}]` for the discrete sum.
    pub fn mean(&self, upto: usize) -> Complex<T> {
        self.mean[upto]
    }

    /// `G` at each requested index, from one driving noise path.
    pub fn eval_many(&self, zeta: &ComplexPath<T>, upto: &[usize]) -> Result<Vec<Complex<T>>> {
        if *zeta.grid != *self.grid {
            return domain("noise path lives on a different grid");
        }
        if let Some(&bad) = upto.iter().find(|&&k| k >= self.grid.len()) {
            return domain(format!("index {bad} beyond the grid"));
        }
        let omega = omega_path(zeta, &self.params)?;
        let t = self.grid.times();
        let ab = self.params.alpha.conj();
        let last = upto.iter().copied().max().unwrap_or(0);
        let mut eta = Vec::with_capacity(last + 1);
        let mut acc = Complex::new(T::zero(), T::zero());
        eta.push(acc);
        for k in 0..last {
            acc += kernel_pow(self.params.horizon, t[k], ab - T::one())
                * omega.values[k].conj()
                * (zeta.values[k + 1] - zeta.values[k]);
            eta.push(acc);
        }
        Ok(upto.iter().map(|&k| eta[k] - self.mean[k]).collect())
    }

    pub fn eval(&self, zeta: &ComplexPath<T>, upto: usize) -> Result<Complex<T>> {
        Ok(self.eval_many(zeta, &[upto])?[0])
    }
}

/// `G` at `t_upto` for one noise path (centring rebuilt on every call).
pub fn simulate_g<T: Real>(zeta: &ComplexPath<T>, p: &ModelParams<T>, upto: usize) -> Result<Complex<T>> {
    GProcess::new(*p, zeta.grid.clone())?.eval(zeta, upto)
}

/// `H(2H-1) int_0^t (T-u)^{conj(alpha)-1} int_0^u (T-v)^{-conj(alpha)} (u-v)^{2H-2} dv du`,
/// the mean of the continuous-time `eta_t`.
pub fn g_correction_continuous<T: Real>(p: &ModelParams<T>, t: T) -> Result<Complex<T>> {
    let h = p.hurst;
    let c = h * (h + h - T::one());
    Ok(nested_kernel_integral(h, p.alpha, p.horizon, t)? * c)
}

fn increment_cov<T: Real>(hurst: T, a: T, b: T, c: T, d: T) -> T {
    covariance_unchecked(hurst, b, d) - covariance_unchecked(hurst, a, d) - covariance_unchecked(hurst, b, c)
        + covariance_unchecked(hurst, a, c)
}

/// `out[k] = sum_{j<k} a[j] gamma(k-j)` with the fGn autocovariance at step `h`.
fn toeplitz_causal<T: Real>(a: &[Complex<T>], hurst: T, h: T) -> Vec<Complex<T>> {
    let n = a.len();
    if n == 0 {
        return Vec::new();
    }
    let len = (2 * n).next_power_of_two();
    let scale = h.powf(hurst + hurst);
    let zero = Complex::new(T::zero(), T::zero());
    let mut x = vec![zero; len];
    x[..n].copy_from_slice(a);
    let mut g = vec![zero; len];
    for (k, gk) in g.iter_mut().enumerate().take(n).skip(1) {
        *gk = Complex::new(crate::gauss::fgn_autocov(hurst, k) * scale, T::zero());
    }
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    fwd.process(&mut x);
    fwd.process(&mut g);
    for (xi, gi) in x.iter_mut().zip(&g) {
        *xi *= *gi;
    }
    inv.process(&mut x);
    let norm = T::from_usize_lossy(len).recip();
    x.truncate(n);
    x.iter().map(|v| v * norm).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fft_convolution_matches_direct_sum() {
        let h = 0.01;
        let a: Vec<Complex<f64>> = (0..37).map(|k| Complex::new((k as f64).sin(), 0.1 * k as f64)).collect();
        let fast = toeplitz_causal(&a, 0.7, h);
        for k in 0..a.len() {
            let slow: Complex<f64> = (0..k)
                .map(|j| a[j] * crate::gauss::fgn_autocov(0.7, k - j) * h.powf(1.4))
                .sum();
            assert!((fast[k] - slow).norm() < 1e-13, "k={k}");
        }
    }

    #[test]
    fn uniform_and_direct_means_agree() {
        let p = ModelParams::new(0.7, Complex::new(0.3, -0.2), 1.0).unwrap();
        let g = Arc::new(TimeGrid::uniform(64, 0.9).unwrap());
        let fast = GProcess::new(p, g.clone()).unwrap();
        let g2 = Arc::new(TimeGrid::from_times(g.times().to_vec()).unwrap());
        let slow = GProcess::new(p, g2).unwrap();
        for k in [0, 1, 10, 64] {
            assert!((fast.mean(k) - slow.mean(k)).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_noise_gives_minus_mean() {
        let p = ModelParams::new(0.7, Complex::new(0.3, -0.2), 1.0).unwrap();
        let g = Arc::new(TimeGrid::uniform(32, 0.9).unwrap());
        let gp = GProcess::new(p, g.clone()).unwrap();
        let v = gp.eval(&ComplexPath::zeros(g), 32).unwrap();
        assert_eq!(v, -gp.mean(32));
        assert!(gp.mean(32).norm() > 0.0);
    }

    #[test]
    fn requires_h_above_half() {
        let p = ModelParams::new(0.4, Complex::new(0.3, -0.2), 1.0).unwrap();
        let g = Arc::new(TimeGrid::uniform(8, 0.9).unwrap());
        assert!(GProcess::new(p, g).is_err());
    }
}
