use std::sync::Arc;

use rand::Rng;

use super::{check_hurst, covariance_unchecked, RealPath, SeedSpec, TimeGrid};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest grid (in points) the Cholesky sampler accepts by default.
pub const DEFAULT_CHOLESKY_CAP: usize = 4096;

// pivots this far below zero, relative to the largest diagonal entry, are
// treated as rounding noise and clipped
const PSD_JITTER: f64 = 1e-10;

/// Lower Cholesky factor of the fBm covariance on a grid, reusable across
/// samples.
#[derive(Debug, Clone)]
pub struct CholeskySampler<T> {
    grid: Arc<TimeGrid<T>>,
    // packed row-major lower triangle over the times t_1..t_n
    factor: Vec<T>,
    dim: usize,
}

impl<T: Real> CholeskySampler<T> {
    pub fn new(hurst: T, grid: Arc<TimeGrid<T>>) -> Result<Self> {
        Self::with_cap(hurst, grid, DEFAULT_CHOLESKY_CAP)
    }

    pub fn with_cap(hurst: T, grid: Arc<TimeGrid<T>>, cap: usize) -> Result<Self> {
        check_hurst(hurst)?;
        if grid.len() > cap {
            return Err(Error::GridTooLarge { points: grid.len(), cap });
        }
        let t = &grid.times()[1..];
        let dim = t.len();
        let mut cov = Vec::with_capacity(dim * (dim + 1) / 2);
        for i in 0..dim {
            for j in 0..=i {
                cov.push(covariance_unchecked(hurst, t[i], t[j]));
            }
        }
        let factor = cholesky_packed(cov, dim)?;
        Ok(Self { grid, factor, dim })
    }

    pub fn grid(&self) -> &Arc<TimeGrid<T>> {
        &self.grid
    }

    /// Path values including the leading `B_0 = 0`.
    pub fn sample_values<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        let z: Vec<T> = (0..self.dim).map(|_| T::standard_normal(rng)).collect();
        let mut out = Vec::with_capacity(self.dim + 1);
        out.push(T::zero());
        let mut row = 0;
        for i in 0..self.dim {
            let l = &self.factor[row..row + i + 1];
            out.push(l.iter().zip(&z).fold(T::zero(), |acc, (&a, &b)| acc + a * b));
            row += i + 1;
        }
        out
    }

    pub fn sample(&self, seed: SeedSpec) -> RealPath<T> {
        let values = self.sample_values(&mut seed.rng());
        RealPath { grid: self.grid.clone(), values }
    }
}

fn cholesky_packed<T: Real>(mut a: Vec<T>, n: usize) -> Result<Vec<T>> {
    let idx = |i: usize, j: usize| i * (i + 1) / 2 + j;
    let max_diag = (0..n).map(|i| a[idx(i, i)]).fold(T::zero(), T::max);
    let tol = T::lit(PSD_JITTER) * max_diag;
    for j in 0..n {
        let mut d = a[idx(j, j)];
        for k in 0..j {
            let l = a[idx(j, k)];
            d -= l * l;
        }
        if d < -tol {
            return Err(Error::Decomposition { row: j, pivot: d.as_f64() });
        }
        if d <= tol {
            // numerically singular direction: zero the column
            a[idx(j, j)] = T::zero();
            for i in j + 1..n {
                a[idx(i, j)] = T::zero();
            }
            continue;
        }
        let d = d.sqrt();
        a[idx(j, j)] = d;
        for i in j + 1..n {
            let mut s = a[idx(i, j)];
            for k in 0..j {
                s -= a[idx(i, k)] * a[idx(j, k)];
            }
            a[idx(i, j)] = s / d;
        }
    }
    Ok(a)
}
