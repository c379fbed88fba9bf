//! Least-squares estimation of the drift `alpha` from one bridge path,
//! the normalisations of the limit theorems, the chaos process `G`, and
//! Monte Carlo experiment drivers.

mod experiment;
mod g_process;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::gauss::ComplexPath;
use crate::scalar::{real_pow_complex, Real};
use crate::special::ModelParams;

pub use experiment::{
    run_consistency_experiment, run_estimate_experiment, run_limit_experiment, EstimateRecord,
    EstimatorKind, ExperimentConfig, ExperimentGrid, GofReport, McSummary, TimeSummary, Verdict,
};
pub use g_process::{g_correction_continuous, simulate_g, GProcess};

const CASE_TOL: f64 = 1e-12;

/// Asymptotic regime of the estimation error, by `lambda = Re(alpha)` and `H`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LimitCase {
    /// `lambda < 1 - H`
    CaseI,
    /// `lambda = 1 - H`
    CaseII,
    /// `1 - H < lambda < 1/2`
    CaseIII,
    /// `lambda = 1/2`
    CaseIV,
    /// `1/2 < lambda < H`: the estimator does not converge.
    Inconsistent,
}

impl LimitCase {
    pub fn label(self) -> &'static str {
        match self {
            Self::CaseI => "case_i",
            Self::CaseII => "case_ii",
            Self::CaseIII => "case_iii",
            Self::CaseIV => "case_iv",
            Self::Inconsistent => "inconsistent",
        }
    }
}

/// Classifies `(H, alpha)` on `H in (1/2, 1)`, `0 < lambda < H`.
/// Boundary values are matched with tolerance `1e-12`.
pub fn classify_case<T: Real>(hurst: T, alpha: Complex<T>) -> Result<LimitCase> {
    let lam = alpha.re;
    if !(hurst > T::lit(0.5) && hurst < T::one()) {
        return domain(format!("case classification needs 1/2 < H < 1, got {hurst}"));
    }
    if !(lam > T::zero() && lam < hurst) || !alpha.im.is_finite() {
        return domain(format!("case classification needs 0 < Re(alpha) < H, got {lam}"));
    }
    let tol = T::lit(CASE_TOL);
    let b1 = T::one() - hurst;
    let half = T::lit(0.5);
    Ok(if (lam - b1).abs() <= tol {
        LimitCase::CaseII
    } else if (lam - half).abs() <= tol {
        LimitCase::CaseIV
    } else if lam < b1 {
        LimitCase::CaseI
    } else if lam < half {
        LimitCase::CaseIII
    } else {
        LimitCase::Inconsistent
    })
}

/// The factor multiplying `alpha - alpha_hat` in the limit theorem of `case`.
pub fn normalization_factor<T: Real>(p: &ModelParams<T>, t: T, case: LimitCase) -> Result<T> {
    let r = p.horizon - t;
    if !(r > T::zero()) {
        return domain(format!("evaluation time must be before the horizon, got t={t}"));
    }
    let (h, lam) = (p.hurst, p.lambda());
    let one = T::one();
    let two = T::lit(2.0);
    Ok(match case {
        LimitCase::CaseI => r.powf(lam - h),
        LimitCase::CaseII => r.powf(one - two * h) / (two * r.ln().abs()).sqrt(),
        LimitCase::CaseIII => r.powf(two * lam - one) / (one - two * lam),
        LimitCase::CaseIV => r.ln().abs(),
        LimitCase::Inconsistent => {
            return domain("no normalised limit law when 1/2 < Re(alpha) < H");
        }
    })
}

/// `factor(t) * (alpha - alpha_hat)` for the case of `p`.
pub fn normalized_error<T: Real>(alpha_hat: Complex<T>, p: &ModelParams<T>, t: T) -> Result<Complex<T>> {
    let case = classify_case(p.hurst, p.alpha)?;
    let f = normalization_factor(p, t, case)?;
    Ok((p.alpha - alpha_hat) * f)
}

fn check_upto<T: Real>(z: &ComplexPath<T>, horizon: T, upto: usize) -> Result<()> {
    if upto < 2 || upto >= z.values.len() {
        return domain(format!("estimator needs 2 <= upto < {}, got {upto}", z.values.len()));
    }
    let t = z.grid.times()[upto];
    if !(t < horizon) {
        return Err(Error::GridReachesHorizon { t_max: t.as_f64(), horizon: horizon.as_f64() });
    }
    Ok(())
}

fn finish<T: Real>(num: Complex<T>, den: T) -> Result<Complex<T>> {
    if !(den > T::zero()) || !den.is_finite() {
        return Err(Error::ZeroDenominator);
    }
    let v = -num / den;
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow("estimator value".into()))
    }
}

/// Discrete estimator over `t_1..t_upto` with right-endpoint evaluation:
/// `-sum conj(Z_k)/(T-t_k) (Z_k - Z_{k-1}) / sum |Z_k|^2/(T-t_k)^2 (t_k - t_{k-1})`.
pub fn lse_discrete<T: Real>(z: &ComplexPath<T>, horizon: T, upto: usize) -> Result<Complex<T>> {
    check_upto(z, horizon, upto)?;
    let t = z.grid.times();
    let v = &z.values;
    let mut num = Complex::new(T::zero(), T::zero());
    let mut den = T::zero();
    for k in 1..=upto {
        let r = horizon - t[k];
        num += v[k].conj() * (v[k] - v[k - 1]) / r;
        den += v[k].norm_sqr() / (r * r) * (t[k] - t[k - 1]);
    }
    finish(num, den)
}

/// Continuous-time estimator on `[0, t_upto]`: left-point Young sum in the
/// numerator, trapezoidal rule in the denominator.
pub fn lse_continuous<T: Real>(z: &ComplexPath<T>, horizon: T, upto: usize) -> Result<Complex<T>> {
    check_upto(z, horizon, upto)?;
    let t = z.grid.times();
    let v = &z.values;
    let q = |k: usize| {
        let r = horizon - t[k];
        v[k].norm_sqr() / (r * r)
    };
    let mut num = Complex::new(T::zero(), T::zero());
    let mut den = T::zero();
    let half = T::lit(0.5);
    for k in 0..upto {
        num += v[k].conj() * (v[k + 1] - v[k]) / (horizon - t[k]);
        den += (q(k) + q(k + 1)) * half * (t[k + 1] - t[k]);
    }
    finish(num, den)
}

/// `(T - t)^alpha` helper shared by the submodules.
#[inline]
pub(crate) fn kernel_pow<T: Real>(horizon: T, t: T, a: Complex<T>) -> Complex<T> {
    real_pow_complex(horizon - t, a)
}
