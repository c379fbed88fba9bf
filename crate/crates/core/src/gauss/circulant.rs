use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rand::Rng;
use rustfft::{Fft, FftPlanner};

use super::{check_hurst, RealPath, SeedSpec, TimeGrid};
use crate::error::{Error, Result};
use crate::scalar::Real;

// negative eigenvalues within this fraction of the largest one are clipped
const CLIP_RELATIVE: f64 = 1e-10;

/// Record of the eigenvalue check done while building the embedding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingReport {
    pub size: usize,
    pub clipped: usize,
    /// Most negative eigenvalue over the largest, 0 if none was negative.
    pub min_relative: f64,
}

/// Circulant embedding of fractional Gaussian noise on a uniform grid.
///
/// One complex FFT yields two independent fBm paths, the real and the
/// imaginary part.
#[derive(Clone)]
pub struct CirculantSampler<T: Real> {
    grid: Arc<TimeGrid<T>>,
    n: usize,
    sqrt_eig: Vec<T>,
    fft: Option<Arc<dyn Fft<T>>>,
    report: EmbeddingReport,
}

impl<T: Real> fmt::Debug for CirculantSampler<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CirculantSampler").field("n", &self.n).field("report", &self.report).finish()
    }
}

impl<T: Real> CirculantSampler<T> {
    pub fn new(hurst: T, grid: Arc<TimeGrid<T>>) -> Result<Self> {
        check_hurst(hurst)?;
        let h = grid
            .step()
            .ok_or_else(|| Error::InvalidGrid("circulant embedding needs a uniform grid".into()))?;
        let n = grid.n_steps();
        if n == 0 {
            let report = EmbeddingReport { size: 0, clipped: 0, min_relative: 0.0 };
            return Ok(Self { grid, n, sqrt_eig: Vec::new(), fft: None, report });
        }
        let m = 2 * n;
        let scale = h.powf(hurst + hurst);
        let gamma = |k: usize| -> T { fgn_autocov(hurst, k) * scale };
        let mut c: Vec<Complex<T>> = Vec::with_capacity(m);
        for k in 0..=n {
            c.push(Complex::new(gamma(k), T::zero()));
        }
        for k in (1..n).rev() {
            c.push(Complex::new(gamma(k), T::zero()));
        }
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(m);
        fft.process(&mut c);

        let max = c.iter().map(|z| z.re).fold(T::zero(), T::max);
        let mut min_relative = 0.0f64;
        let mut clipped = 0;
        let mf = T::from_usize_lossy(m);
        let mut sqrt_eig = Vec::with_capacity(m);
        for z in &c {
            let mut lam = z.re;
            if lam < T::zero() {
                let rel = (lam / max).as_f64();
                min_relative = min_relative.min(rel);
                if -rel > CLIP_RELATIVE {
                    return Err(Error::EmbeddingNegative { value: lam.as_f64(), relative: rel });
                }
                lam = T::zero();
                clipped += 1;
            }
            sqrt_eig.push((lam / mf).sqrt());
        }
        let report = EmbeddingReport { size: m, clipped, min_relative };
        Ok(Self { grid, n, sqrt_eig, fft: Some(fft), report })
    }

    pub fn grid(&self) -> &Arc<TimeGrid<T>> {
        &self.grid
    }

    pub fn report(&self) -> EmbeddingReport {
        self.report
    }

    /// Two independent fBm paths (values including `B_0 = 0`).
    pub fn sample_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<T>, Vec<T>) {
        let Some(fft) = &self.fft else {
            return (vec![T::zero()], vec![T::zero()]);
        };
        let mut w: Vec<Complex<T>> = self
            .sqrt_eig
            .iter()
            .map(|&s| {
                let x = T::standard_normal(rng);
                let y = T::standard_normal(rng);
                Complex::new(s * x, s * y)
            })
            .collect();
        fft.process(&mut w);
        let mut a = Vec::with_capacity(self.n + 1);
        let mut b = Vec::with_capacity(self.n + 1);
        let (mut sa, mut sb) = (T::zero(), T::zero());
        a.push(sa);
        b.push(sb);
        for z in &w[..self.n] {
            sa += z.re;
            sb += z.im;
            a.push(sa);
            b.push(sb);
        }
        (a, b)
    }

    pub fn sample(&self, seed: SeedSpec) -> RealPath<T> {
        let (values, _) = self.sample_pair(&mut seed.rng());
        RealPath { grid: self.grid.clone(), values }
    }
}

/// Autocovariance of unit-step fractional Gaussian noise at lag `k`.
pub(crate) fn fgn_autocov<T: Real>(hurst: T, k: usize) -> T {
    let e = hurst + hurst;
    let k = T::from_usize_lossy(k);
    let p = |x: T| x.abs().powf(e);
    T::lit(0.5) * (p(k + T::one()) - p(k) - p(k) + p(k - T::one()))
}
