//! Complex Hermite polynomials `J_{m,n}(z)` and Monte Carlo checks of the
//! low-order chaos identities: isometry, product formula, hypercontractivity.
//!
//! Normalisation follows the generating function
//! `exp(lambda conj(z) + conj(lambda) z - 2|lambda|^2)`, so `J_{m,n}(Z)` with
//! `Z ~ CN(0, 2)` has second moment `m! n! 2^{m+n}`.

use std::ops::{Add, Mul};
use std::sync::Arc;

use num_complex::Complex;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::gauss::{ComplexFbmSampler, SeedSpec, TimeGrid};
use crate::scalar::Real;

pub const DEFAULT_DEGREE_CAP: usize = 12;

/// Bi-degree `(m, n)` of `J_{m,n}`: degree `m` in `z`, `n` in `conj(z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct HermiteIndex {
    pub m: usize,
    pub n: usize,
}

impl HermiteIndex {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        Self::with_cap(m, n, DEFAULT_DEGREE_CAP)
    }

    pub fn with_cap(m: usize, n: usize, cap: usize) -> Result<Self> {
        if m + n > cap {
            return Err(Error::CapExceeded { m, n, cap });
        }
        Ok(Self { m, n })
    }

    pub fn conj(self) -> Self {
        Self { m: self.n, n: self.m }
    }

    /// All indices with `m + n <= order`.
    pub fn up_to(order: usize) -> Vec<Self> {
        let mut v = Vec::new();
        for total in 0..=order {
            for m in (0..=total).rev() {
                v.push(Self { m, n: total - m });
            }
        }
        v
    }
}

/// `sum c[j][k] z^j conj(z)^k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiPolynomial<C> {
    coef: Vec<Vec<C>>,
}

impl<C: Copy + Zero> BiPolynomial<C> {
    pub fn zero(deg_z: usize, deg_zbar: usize) -> Self {
        Self { coef: vec![vec![C::zero(); deg_zbar + 1]; deg_z + 1] }
    }

    /// Coefficient of `z^j conj(z)^k`, zero outside the support.
    pub fn coeff(&self, j: usize, k: usize) -> C {
        self.coef.get(j).and_then(|r| r.get(k)).copied().unwrap_or_else(C::zero)
    }

    pub fn degrees(&self) -> (usize, usize) {
        (self.coef.len() - 1, self.coef[0].len() - 1)
    }

    fn set(&mut self, j: usize, k: usize, c: C) {
        self.coef[j][k] = c;
    }

    /// Swaps the roles of `z` and `conj(z)`.
    pub fn transpose(&self) -> Self {
        let (dj, dk) = self.degrees();
        let mut out = Self::zero(dk, dj);
        for j in 0..=dj {
            for k in 0..=dk {
                out.set(k, j, self.coef[j][k]);
            }
        }
        out
    }
}

impl<C: Copy + Zero + ToPrimitive> BiPolynomial<C> {
    /// Evaluation from the expanded coefficients.
    pub fn eval<T: Real>(&self, z: Complex<T>) -> Complex<T> {
        let zb = z.conj();
        let mut acc = Complex::new(T::zero(), T::zero());
        let mut zj = Complex::new(T::one(), T::zero());
        for row in &self.coef {
            let mut term = zj;
            for c in row {
                let c = T::from(*c).expect("coefficient representable");
                acc += term * c;
                term *= zb;
            }
            zj *= z;
        }
        acc
    }
}

impl<C> BiPolynomial<C>
where
    C: Copy + Zero + Add<Output = C> + Mul<Output = C> + From<i32>,
{
    fn shift_z(&self) -> Self {
        let (dj, dk) = self.degrees();
        let mut out = Self::zero(dj + 1, dk);
        for j in 0..=dj {
            for k in 0..=dk {
                out.set(j + 1, k, self.coef[j][k]);
            }
        }
        out
    }

    fn shift_zbar(&self) -> Self {
        self.transpose().shift_z().transpose()
    }

    fn axpy(&self, a: C, other: &Self) -> Self {
        let (dj, dk) = self.degrees();
        let (oj, ok) = other.degrees();
        let mut out = Self::zero(dj.max(oj), dk.max(ok));
        for j in 0..=dj.max(oj) {
            for k in 0..=dk.max(ok) {
                out.set(j, k, self.coeff(j, k) + a * other.coeff(j, k));
            }
        }
        out
    }
}

/// Coefficients of `J_{m,n}` from `J_{m+1,n} = z J_{m,n} - 2n J_{m,n-1}` and
/// `J_{m,n+1} = conj(z) J_{m,n} - 2m J_{m-1,n}`.
pub fn hermite_poly(idx: HermiteIndex) -> BiPolynomial<i64> {
    let (m, n) = (idx.m, idx.n);
    // table[i][k] = J_{i,k}
    let mut table: Vec<Vec<BiPolynomial<i64>>> = Vec::with_capacity(m + 1);
    let mut one = BiPolynomial::zero(0, 0);
    one.set(0, 0, 1);
    for i in 0..=m {
        let mut row = Vec::with_capacity(n + 1);
        row.push(if i == 0 { one.clone() } else { table[i - 1][0].shift_z() });
        for k in 0..n {
            let next = if i == 0 {
                row[k].shift_zbar()
            } else {
                row[k].shift_zbar().axpy(-2 * i as i64, &table[i - 1][k])
            };
            row.push(next);
        }
        table.push(row);
    }
    table.swap_remove(m).swap_remove(n)
}

/// `J_{m,n}(z)` by running the recurrences numerically.
pub fn hermite_eval<T: Real>(idx: HermiteIndex, z: Complex<T>) -> Complex<T> {
    let (m, n) = (idx.m, idx.n);
    let zb = z.conj();
    let two = T::lit(2.0);
    // row[k] = J_{i,k}, built from the previous row J_{i-1,.}
    let mut row: Vec<Complex<T>> = Vec::new();
    for i in 0..=m {
        let mut next = vec![Complex::new(T::zero(), T::zero()); n + 1];
        next[0] = if i == 0 { Complex::new(T::one(), T::zero()) } else { z * row[0] };
        for k in 0..n {
            next[k + 1] = zb * next[k];
            if i > 0 {
                next[k + 1] -= row[k] * (two * T::from_usize_lossy(i));
            }
        }
        row = next;
    }
    row[n]
}

/// One Monte Carlo comparison against a predicted value.
#[derive(Debug, Clone, Serialize)]
pub struct ChaosCheck {
    pub name: String,
    pub estimate_re: f64,
    pub estimate_im: f64,
    pub predicted: f64,
    pub std_error: f64,
    pub pass: bool,
}

/// Isometry constant measured for one diagonal index, on the `2^k` scale.
#[derive(Debug, Clone, Serialize)]
pub struct NormConvention {
    pub m: usize,
    pub n: usize,
    /// `log2(E|J_{m,n}|^2 / (m! n!))`; the convention predicts `m + n`.
    pub measured_power_of_two: f64,
    pub matches: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChaosReport {
    pub trials: usize,
    pub hurst: f64,
    pub isometry: Vec<ChaosCheck>,
    pub norm_convention: Vec<NormConvention>,
    pub product_identity_max_residual: f64,
    pub conjugation_max_residual: f64,
    pub hypercontractivity_lhs: f64,
    pub hypercontractivity_rhs: f64,
    pub hypercontractivity_pass: bool,
    pub pass: bool,
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Monte Carlo checks with `Z = sqrt(2) zeta_1`, the Wiener integral of
/// `sqrt(2) 1_{[0,1]}` against a complex fBm of index `hurst`.
pub fn mc_chaos_checks(hurst: f64, trials: usize, seed: SeedSpec) -> Result<ChaosReport> {
    if !(hurst > 0.5 && hurst < 1.0) {
        return domain(format!("chaos checks need 1/2 < H < 1, got {hurst}"));
    }
    if trials < 10_000 {
        return domain(format!("chaos checks need at least 10000 trials, got {trials}"));
    }
    let grid = Arc::new(TimeGrid::uniform(1, 1.0)?);
    let sampler = ComplexFbmSampler::new(hurst, grid)?;
    let mut rng = seed.rng();
    let zs: Vec<Complex<f64>> =
        (0..trials).map(|_| sampler.sample_with(&mut rng).last() * std::f64::consts::SQRT_2).collect();

    let idx = HermiteIndex::up_to(3);
    let vals: Vec<Vec<Complex<f64>>> =
        zs.iter().map(|&z| idx.iter().map(|&i| hermite_eval(i, z)).collect()).collect();
    let nf = trials as f64;
    let mut isometry = Vec::new();
    let mut norm_convention = Vec::new();
    for (a, ia) in idx.iter().enumerate() {
        for (b, ib) in idx.iter().enumerate() {
            let prods: Vec<Complex<f64>> = vals.iter().map(|v| v[a] * v[b].conj()).collect();
            let mean = prods.iter().sum::<Complex<f64>>() / nf;
            let var = prods.iter().map(|p| (p - mean).norm_sqr()).sum::<f64>() / (nf - 1.0);
            let se = (var / nf).sqrt();
            let predicted =
                if a == b { factorial(ia.m) * factorial(ia.n) * 2f64.powi((ia.m + ia.n) as i32) } else { 0.0 };
            isometry.push(ChaosCheck {
                name: format!("E[J({},{}) conj J({},{})]", ia.m, ia.n, ib.m, ib.n),
                estimate_re: mean.re,
                estimate_im: mean.im,
                predicted,
                std_error: se,
                pass: (mean - predicted).norm() <= 3.0 * se,
            });
            if a == b && ia.m + ia.n >= 1 {
                let p2 = (mean.re / (factorial(ia.m) * factorial(ia.n))).log2();
                norm_convention.push(NormConvention {
                    m: ia.m,
                    n: ia.n,
                    measured_power_of_two: p2,
                    matches: p2.round() as i64 == (ia.m + ia.n) as i64,
                });
            }
        }
    }

    let at = |m, n| idx.iter().position(|&i| i == HermiteIndex { m, n }).expect("index present");
    let (i10, i01, i11) = (at(1, 0), at(0, 1), at(1, 1));
    let product_identity_max_residual = vals
        .iter()
        .map(|v| ((v[i10] * v[i01] - v[i11] - 2.0).norm()) / (1.0 + v[i11].norm()))
        .fold(0.0, f64::max);

    let conj_idx: Vec<HermiteIndex> = HermiteIndex::up_to(6);
    let conjugation_max_residual = zs
        .iter()
        .take(1000)
        .flat_map(|&z| {
            conj_idx.iter().map(move |&i| {
                let a = hermite_eval(i, z).conj();
                let b = hermite_eval(i.conj(), z);
                (a - b).norm() / (1.0 + b.norm())
            })
        })
        .fold(0.0, f64::max);

    let m2 = vals.iter().map(|v| v[i11].norm_sqr()).sum::<f64>() / nf;
    let m4 = vals.iter().map(|v| v[i11].norm_sqr().powi(2)).sum::<f64>() / nf;
    let hypercontractivity_lhs = m4.powf(0.25);
    let hypercontractivity_rhs = 3.0 * m2.sqrt();
    let hypercontractivity_pass = hypercontractivity_lhs <= hypercontractivity_rhs;

    let pass = isometry.iter().all(|c| c.pass)
        && norm_convention.iter().all(|c| c.matches)
        && product_identity_max_residual < 1e-12
        && conjugation_max_residual < 1e-10
        && hypercontractivity_pass;
    Ok(ChaosReport {
        trials,
        hurst,
        isometry,
        norm_convention,
        product_identity_max_residual,
        conjugation_max_residual,
        hypercontractivity_lhs,
        hypercontractivity_rhs,
        hypercontractivity_pass,
        pass,
    })
}
