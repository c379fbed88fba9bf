//! Estimator behaviour on simulated bridges and moments of the chaos process `G`.

use std::sync::Arc;

use fracbridge::estimate::{
    classify_case, g_correction_continuous, normalization_factor, normalized_error, run_consistency_experiment,
    ExperimentConfig, GProcess, LimitCase,
};
use fracbridge::gauss::ComplexFbmSampler;
use fracbridge::{fbm_covariance, lse_continuous, lse_discrete, BridgePaths, Complex, ComplexPath, ModelParams, SeedSpec, TimeGrid};
use proptest::prelude::*;

fn cx(re: f64, im: f64) -> Complex<f64> {
    Complex::new(re, im)
}

fn mean_se(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|a| (a - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

fn subsample(p: &ComplexPath<f64>, step: usize) -> ComplexPath<f64> {
    let t: Vec<f64> = p.grid.times().iter().step_by(step).copied().collect();
    let v: Vec<Complex<f64>> = p.values.iter().step_by(step).copied().collect();
    ComplexPath::new(Arc::new(TimeGrid::from_times(t).unwrap()), v).unwrap()
}

#[test]
fn discrete_and_continuous_estimators_merge_under_refinement() {
    let p = ModelParams::new(0.7, cx(0.3, -0.2), 1.0).unwrap();
    let grid = Arc::new(TimeGrid::uniform(4096, 0.9).unwrap());
    let s = ComplexFbmSampler::new(0.7, grid).unwrap();
    let steps = [8usize, 4, 2];
    let mut gap = [0.0f64; 3];
    for r in 0..50 {
        let b = BridgePaths::from_zeta(p, s.sample(SeedSpec::new(40, r))).unwrap();
        for (i, &st) in steps.iter().enumerate() {
            let z = subsample(&b.z, st);
            let n = z.values.len() - 1;
            gap[i] += (lse_continuous(&z, 1.0, n).unwrap() - lse_discrete(&z, 1.0, n).unwrap()).norm();
        }
    }
    for w in gap.windows(2) {
        let ratio = w[1] / w[0];
        assert!((0.25..=1.0).contains(&ratio), "gaps {gap:?}");
    }
}

#[test]
fn g_process_is_centred() {
    let p = ModelParams::new(0.7, cx(0.3, -0.2), 1.0).unwrap();
    let grid = Arc::new(TimeGrid::uniform(256, 0.9).unwrap());
    let g = GProcess::new(p, grid.clone()).unwrap();
    let s = ComplexFbmSampler::new(0.7, grid).unwrap();
    let base = SeedSpec::new(41, 0);
    let v: Vec<Complex<f64>> = (0..20_000).map(|r| g.eval(&s.sample(base.replication(r)), 256).unwrap()).collect();
    let (mr, sr) = mean_se(&v.iter().map(|z| z.re).collect::<Vec<_>>());
    let (mi, si) = mean_se(&v.iter().map(|z| z.im).collect::<Vec<_>>());
    assert!(mr.abs() <= 3.0 * sr && mi.abs() <= 3.0 * si, "E G = {mr} + {mi}i (se {sr}, {si})");
    // the centring is not negligible, so this is a real check
    assert!(g.mean(256).norm() > 10.0 * sr.max(si));
}

#[test]
fn discrete_centring_tends_to_the_continuous_correction() {
    let p = ModelParams::new(0.7, cx(0.3, -0.2), 1.0).unwrap();
    let exact = g_correction_continuous(&p, 0.9).unwrap();
    let mut errs = Vec::new();
    for n in [256, 1024, 4096] {
        let grid = Arc::new(TimeGrid::uniform(n, 0.9).unwrap());
        let g = GProcess::new(p, grid).unwrap();
        errs.push((g.mean(n) - exact).norm() / exact.norm());
    }
    // the left-point sum is off by O(h^{2H-1}), so each 4x refinement
    // should shrink the gap by about 4^{-0.4} = 0.57
    for w in errs.windows(2) {
        assert!((0.45..=0.7).contains(&(w[1] / w[0])), "{errs:?}");
    }
}

/// Exact `Var(eta_{t_m})` for the discrete sum on `grid`: the pseudo-covariance
/// of complex fBm vanishes, which leaves
/// `sum_{j,k<m} kappa_j conj(kappa_k) E[conj(omega_j) omega_k] E[dB_j dB_k]`.
fn exact_discrete_variance(p: &ModelParams<f64>, grid: &TimeGrid<f64>, m: usize) -> f64 {
    let t = grid.times();
    let r = |a: f64, b: f64| fbm_covariance(p.hurst, a, b).unwrap();
    let gam = |i: usize, j: usize| r(t[i + 1], t[j + 1]) - r(t[i], t[j + 1]) - r(t[i + 1], t[j]) + r(t[i], t[j]);
    let c: Vec<Complex<f64>> = (0..m).map(|j| cx(1.0 - t[j], 0.0).powc(-p.alpha)).collect();
    let kap: Vec<Complex<f64>> = (0..m).map(|j| cx(1.0 - t[j], 0.0).powc(p.alpha.conj() - 1.0)).collect();
    // row[b] = sum_{a<j} conj(c_a) gam(a, b)
    let mut row = vec![cx(0.0, 0.0); m];
    let mut total = 0.0;
    for j in 0..m {
        let g: Vec<f64> = (0..m).map(|b| gam(j, b)).collect();
        let mut s = cx(0.0, 0.0);
        for k in 0..=j {
            let term = kap[j] * kap[k].conj() * s * g[k];
            total += if k == j { term.re } else { 2.0 * term.re };
            s += c[k] * row[k];
        }
        for b in 0..m {
            row[b] += c[j].conj() * g[b];
        }
    }
    total
}

#[test]
fn g_second_moment_matches_the_exact_discrete_variance() {
    let p = ModelParams::new(0.7, cx(0.4, -0.2), 1.0).unwrap();
    let grid = Arc::new(TimeGrid::uniform(1000, 0.99).unwrap());
    let k = grid.len() - 1;
    let exact = exact_discrete_variance(&p, &grid, k);
    let g = GProcess::new(p, grid.clone()).unwrap();
    let s = ComplexFbmSampler::new(0.7, grid).unwrap();
    let base = SeedSpec::new(44, 0);
    let v: Vec<f64> = (0..5000).map(|r| g.eval(&s.sample(base.replication(r)), k).unwrap().norm_sqr()).collect();
    let (m, se) = mean_se(&v);
    assert!((m - exact).abs() <= 3.0 * se, "{m} vs {exact} (se {se})");
}

/// The limit is finite here, but the tail decays only like
/// `(T-t)^{2(Re alpha + H - 1)}`; see the decisions notes for the numbers.
#[test]
fn g_second_moment_stabilises_above_one_minus_h() {
    let p = ModelParams::new(0.7, cx(0.4, -0.2), 1.0).unwrap();
    let grid = Arc::new(TimeGrid::uniform(50_000, 0.999).unwrap());
    let ks = [grid.nearest_index(0.99), grid.len() - 1];
    let g = GProcess::new(p, grid.clone()).unwrap();
    let s = ComplexFbmSampler::new(0.7, grid).unwrap();
    let base = SeedSpec::new(42, 0);
    let mut v = [Vec::new(), Vec::new()];
    for r in 0..5000 {
        let vals = g.eval_many(&s.sample(base.replication(r)), &ks).unwrap();
        v[0].push(vals[0].norm_sqr());
        v[1].push(vals[1].norm_sqr());
    }
    let (a, _) = mean_se(&v[0]);
    let (b, _) = mean_se(&v[1]);
    assert!((b / a - 1.0).abs() <= 0.1, "E|G|^2 at T-0.01: {a}, at T-0.001: {b}");
}

#[test]
fn medians_shrink_along_a_refinement_ladder() {
    let p = ModelParams::new(0.7, cx(0.2, -0.1), 1.0).unwrap();
    let c = ExperimentConfig::new(p, vec![0.9, 0.99], 200, 43);
    let s = run_consistency_experiment(&c).unwrap();
    let (a, b) = (&s.times[0], &s.times[1]);
    assert!(
        b.median_abs_error <= a.median_abs_error + 2.0 * (a.median_se.powi(2) + b.median_se.powi(2)).sqrt(),
        "{} -> {}",
        a.median_abs_error,
        b.median_abs_error
    );
    assert!(s.verdict.pass);
}

proptest! {
    #[test]
    fn classification_partitions_the_drift_range(h in 0.51f64..0.99, frac in 0.001f64..0.999) {
        let lam = frac * h;
        let case = classify_case(h, cx(lam, 0.3)).unwrap();
        let expect = if (lam - (1.0 - h)).abs() <= 1e-12 {
            LimitCase::CaseII
        } else if (lam - 0.5).abs() <= 1e-12 {
            LimitCase::CaseIV
        } else if lam < 1.0 - h {
            LimitCase::CaseI
        } else if lam < 0.5 {
            LimitCase::CaseIII
        } else {
            LimitCase::Inconsistent
        };
        prop_assert_eq!(case, expect);
    }

    #[test]
    fn normalised_error_is_linear(
        h in 0.55f64..0.95, frac in 0.05f64..0.95, w in -1.0f64..1.0,
        e1 in (-1.0f64..1.0, -1.0f64..1.0), e2 in (-1.0f64..1.0, -1.0f64..1.0), c in -3.0f64..3.0,
    ) {
        let lam = frac * h;
        let p = ModelParams::new(h, cx(lam, -w), 1.0).unwrap();
        prop_assume!(classify_case(h, p.alpha).unwrap() != LimitCase::Inconsistent);
        let (d1, d2) = (cx(e1.0, e1.1), cx(e2.0, e2.1));
        let t = 0.97;
        let lhs = normalized_error(p.alpha - (d1 * c + d2), &p, t).unwrap();
        let rhs = normalized_error(p.alpha - d1, &p, t).unwrap() * c + normalized_error(p.alpha - d2, &p, t).unwrap();
        let f = normalization_factor(&p, t, classify_case(h, p.alpha).unwrap()).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * f * (1.0 + lhs.norm()));
    }

    #[test]
    fn estimators_are_scale_invariant(re in -5.0f64..5.0, im in -5.0f64..5.0, seed in 0u64..1000) {
        let c = cx(re, im);
        prop_assume!(c.norm() > 1e-3);
        let p = ModelParams::new(0.7, cx(0.3, -0.2), 1.0).unwrap();
        let grid = Arc::new(TimeGrid::uniform(64, 0.9).unwrap());
        let b = BridgePaths::simulate(p, grid, SeedSpec::new(seed, 0)).unwrap();
        let z = b.z.scaled(c);
        for (x, y) in [
            (lse_discrete(&z, 1.0, 64).unwrap(), lse_discrete(&b.z, 1.0, 64).unwrap()),
            (lse_continuous(&z, 1.0, 64).unwrap(), lse_continuous(&b.z, 1.0, 64).unwrap()),
        ] {
            prop_assert!((x - y).norm() <= 1e-10 * y.norm());
        }
    }
}
