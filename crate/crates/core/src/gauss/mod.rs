//! Fractional Brownian motion: covariance, exact samplers on time grids,
//! the circularly-symmetric complex fBm, and inner products of the
//! reproducing Hilbert space.

mod cholesky;
mod circulant;
mod inner;
mod seed;

use std::io::{self, Write};
use std::sync::Arc;

use num_complex::Complex;
use rand::Rng;

use crate::error::{domain, Error, Result};
use crate::scalar::Real;

pub use cholesky::{CholeskySampler, DEFAULT_CHOLESKY_CAP};
pub use circulant::{CirculantSampler, EmbeddingReport};
pub(crate) use circulant::fgn_autocov;
pub use inner::{
    inner_product_high_h, inner_product_high_h_fn, inner_product_low_h, BvFunction, StepFunction,
};
pub use seed::SeedSpec;

/// `R_H(t,s) = (|t|^{2H} + |s|^{2H} - |t-s|^{2H}) / 2`.
pub fn fbm_covariance<T: Real>(hurst: T, t: T, s: T) -> Result<T> {
    check_hurst(hurst)?;
    Ok(covariance_unchecked(hurst, t, s))
}

#[inline]
pub(crate) fn covariance_unchecked<T: Real>(hurst: T, t: T, s: T) -> T {
    let e = hurst + hurst;
    T::lit(0.5) * (t.abs().powf(e) + s.abs().powf(e) - (t - s).abs().powf(e))
}

pub(crate) fn check_hurst<T: Real>(hurst: T) -> Result<()> {
    if hurst > T::zero() && hurst < T::one() {
        Ok(())
    } else {
        domain(format!("Hurst index must lie in (0,1), got {hurst}"))
    }
}

/// Strictly increasing sample times starting at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid<T> {
    times: Vec<T>,
    step: Option<T>,
}

impl<T: Real> TimeGrid<T> {
    /// `n_steps + 1` equally spaced points on `[0, t_max]`.
    pub fn uniform(n_steps: usize, t_max: T) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::InvalidGrid("a uniform grid needs at least one step".into()));
        }
        if !(t_max > T::zero()) || !t_max.is_finite() {
            return Err(Error::InvalidGrid(format!("t_max must be positive, got {t_max}")));
        }
        let h = t_max / T::from_usize_lossy(n_steps);
        let mut times: Vec<T> = (0..=n_steps).map(|k| h * T::from_usize_lossy(k)).collect();
        times[n_steps] = t_max;
        Ok(Self { times, step: Some(h) })
    }

    pub fn from_times(times: Vec<T>) -> Result<Self> {
        match times.first() {
            None => return Err(Error::InvalidGrid("empty grid".into())),
            Some(&t0) if t0 != T::zero() => {
                return Err(Error::InvalidGrid(format!("grid must start at 0, got {t0}")))
            }
            _ => {}
        }
        if let Some(k) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidGrid(format!("times not strictly increasing at index {}", k + 1)));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidGrid("non-finite time".into()));
        }
        Ok(Self { times, step: None })
    }

    /// The single point grid `[0]`.
    pub fn origin() -> Self {
        Self { times: vec![T::zero()], step: None }
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn n_steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn t_max(&self) -> T {
        *self.times.last().expect("grid is never empty")
    }

    pub fn is_uniform(&self) -> bool {
        self.step.is_some()
    }

    pub fn step(&self) -> Option<T> {
        self.step
    }

    pub fn max_step(&self) -> T {
        self.times.windows(2).map(|w| w[1] - w[0]).fold(T::zero(), T::max)
    }

    /// Index of the grid point closest to `t`.
    pub fn nearest_index(&self, t: T) -> usize {
        match self.times.binary_search_by(|x| x.partial_cmp(&t).expect("finite times")) {
            Ok(k) => k,
            Err(0) => 0,
            Err(k) if k >= self.times.len() => self.times.len() - 1,
            Err(k) => {
                if t - self.times[k - 1] <= self.times[k] - t {
                    k - 1
                } else {
                    k
                }
            }
        }
    }

    /// Rejects grids touching or passing the bridge horizon.
    pub fn check_before(&self, horizon: T) -> Result<()> {
        if self.t_max() < horizon {
            Ok(())
        } else {
            Err(Error::GridReachesHorizon { t_max: self.t_max().as_f64(), horizon: horizon.as_f64() })
        }
    }
}

/// Real-valued process samples aligned to a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RealPath<T> {
    pub grid: Arc<TimeGrid<T>>,
    pub values: Vec<T>,
}

/// Complex-valued process samples aligned to a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPath<T> {
    pub grid: Arc<TimeGrid<T>>,
    pub values: Vec<Complex<T>>,
}

impl<T: Real> RealPath<T> {
    pub fn new(grid: Arc<TimeGrid<T>>, values: Vec<T>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::InvalidGrid(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    /// CSV with header `t,x`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,x")?;
        for (t, x) in self.grid.times().iter().zip(&self.values) {
            writeln!(w, "{t},{x}")?;
        }
        Ok(())
    }
}

impl<T: Real> ComplexPath<T> {
    pub fn new(grid: Arc<TimeGrid<T>>, values: Vec<Complex<T>>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::InvalidGrid(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<TimeGrid<T>>) -> Self {
        let values = vec![Complex::new(T::zero(), T::zero()); grid.len()];
        Self { grid, values }
    }

    /// `(x + i y)` from two real paths on the same grid.
    pub fn from_parts(re: &RealPath<T>, im: &RealPath<T>) -> Result<Self> {
        if re.grid != im.grid {
            return Err(Error::InvalidGrid("real and imaginary parts on different grids".into()));
        }
        let values = re.values.iter().zip(&im.values).map(|(&a, &b)| Complex::new(a, b)).collect();
        Ok(Self { grid: re.grid.clone(), values })
    }

    pub fn scaled(&self, c: Complex<T>) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|&v| v * c).collect() }
    }

    pub fn last(&self) -> Complex<T> {
        *self.values.last().expect("paths are never empty")
    }

    /// CSV with header `t,re,im`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,re,im")?;
        for (t, z) in self.grid.times().iter().zip(&self.values) {
            writeln!(w, "{t},{},{}", z.re, z.im)?;
        }
        Ok(())
    }
}

/// Exact sampler for the complex fBm `zeta = (B1 + i B2)/sqrt(2)`.
///
/// Uniform grids use circulant embedding; non-uniform grids, or embeddings
/// that fail the eigenvalue check, fall back to Cholesky when within its cap.
#[derive(Debug, Clone)]
pub enum ComplexFbmSampler<T: Real> {
    Circulant(CirculantSampler<T>),
    Cholesky(CholeskySampler<T>),
}

impl<T: Real> ComplexFbmSampler<T> {
    pub fn new(hurst: T, grid: Arc<TimeGrid<T>>) -> Result<Self> {
        check_hurst(hurst)?;
        if grid.is_uniform() {
            match CirculantSampler::new(hurst, grid.clone()) {
                Ok(s) => return Ok(Self::Circulant(s)),
                Err(Error::EmbeddingNegative { .. }) if grid.len() <= DEFAULT_CHOLESKY_CAP => {}
                Err(e) => return Err(e),
            }
        }
        CholeskySampler::new(hurst, grid).map(Self::Cholesky)
    }

    pub fn grid(&self) -> &Arc<TimeGrid<T>> {
        match self {
            Self::Circulant(s) => s.grid(),
            Self::Cholesky(s) => s.grid(),
        }
    }

    pub fn sample(&self, seed: SeedSpec) -> ComplexPath<T> {
        self.sample_with(&mut seed.rng())
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R) -> ComplexPath<T> {
        let (a, b) = match self {
            Self::Circulant(s) => s.sample_pair(rng),
            Self::Cholesky(s) => (s.sample_values(rng), s.sample_values(rng)),
        };
        let r = T::FRAC_1_SQRT_2();
        let values = a.into_iter().zip(b).map(|(x, y)| Complex::new(x * r, y * r)).collect();
        ComplexPath { grid: self.grid().clone(), values }
    }
}

/// One exact fBm path via the Cholesky factor of the grid covariance.
pub fn sample_fbm_cholesky<T: Real>(hurst: T, grid: Arc<TimeGrid<T>>, seed: SeedSpec) -> Result<RealPath<T>> {
    let s = CholeskySampler::new(hurst, grid)?;
    Ok(s.sample(seed))
}

/// One exact fBm path via circulant embedding of fractional Gaussian noise.
pub fn sample_fbm_circulant<T: Real>(hurst: T, grid: Arc<TimeGrid<T>>, seed: SeedSpec) -> Result<RealPath<T>> {
    let s = CirculantSampler::new(hurst, grid)?;
    Ok(s.sample(seed))
}

pub fn sample_complex_fbm<T: Real>(hurst: T, grid: Arc<TimeGrid<T>>, seed: SeedSpec) -> Result<ComplexPath<T>> {
    Ok(ComplexFbmSampler::new(hurst, grid)?.sample(seed))
}
