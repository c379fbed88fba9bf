//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! All math is written against [`Real`], implemented for `f32` and `f64`.
//! Stated tolerances (1e-12 and tighter) only make sense for `f64`; `f32`
//! instantiations are useful for fast, lower-fidelity path generation.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftNum;

pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + FftNum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Converts an `f64` literal. Never fails for the implemented types.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar converts to f64")
    }
}

impl Real for f64 {
    #[inline]
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}

impl Real for f32 {
    #[inline]
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}

/// `x^a` for a positive real base and complex exponent, principal branch.
#[inline]
pub fn real_pow_complex<T: Real>(x: T, a: Complex<T>) -> Complex<T> {
    let l = x.ln();
    Complex::from_polar((a.re * l).exp(), a.im * l)
}

#[inline]
pub fn is_finite_complex<T: Real>(z: Complex<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_power_modulus_is_real_power() {
        let a = Complex::new(0.3_f64, -0.2);
        for &x in &[0.001, 0.5, 1.0, 3.7] {
            let p = real_pow_complex(x, a);
            assert!((p.norm() - x.powf(0.3)).abs() < 1e-14 * x.powf(0.3));
        }
        let p = real_pow_complex(2.0_f64, Complex::new(1.5, 0.0));
        assert!((p.re - 2.0_f64.powf(1.5)).abs() < 1e-14 && p.im.abs() < 1e-15);
    }
}
