//! Path-level checks of the Wiener integral, the bridge, the Euler scheme
//! and the rescaled process `Y`.

use std::sync::Arc;

use fracbridge::bridge::{bridge_euler, holder_quotient, scaled_y_path};
use fracbridge::gauss::{inner_product_high_h_fn, ComplexFbmSampler};
use fracbridge::special::y_terminal_second_moment;
use fracbridge::{
    bridge_exact, omega_path, BridgePaths, Complex, ComplexPath, ModelParams, SeedSpec, TimeGrid,
};
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

/// Every `step`-th point of a path, as a path on the coarser grid.
fn subsample(p: &ComplexPath<f64>, step: usize) -> ComplexPath<f64> {
    let t: Vec<f64> = p.grid.times().iter().step_by(step).copied().collect();
    let v: Vec<Complex<f64>> = p.values.iter().step_by(step).copied().collect();
    ComplexPath::new(Arc::new(TimeGrid::from_times(t).unwrap()), v).unwrap()
}

#[test]
fn omega_variance_matches_isometry() {
    let p = ModelParams::new(0.7, cx(0.3, -0.2), 1.0).unwrap();
    let t_max = 0.9;
    // E|omega_t|^2 = <Re f, Re f> + <Im f, Im f> for f(u) = (T-u)^{-alpha}
    let fr = |u: f64| Complex::new(1.0 - u, 0.0).powc(-p.alpha).re;
    let fi = |u: f64| Complex::new(1.0 - u, 0.0).powc(-p.alpha).im;
    let exact = inner_product_high_h_fn(fr, fr, t_max, 0.7, 1e-6).unwrap()
        + inner_product_high_h_fn(fi, fi, t_max, 0.7, 1e-6).unwrap();
    let grid = Arc::new(TimeGrid::uniform(4096, t_max).unwrap());
    let s = ComplexFbmSampler::new(0.7, grid).unwrap();
    let base = SeedSpec::new(30, 0);
    let m: Vec<f64> =
        (0..20_000).map(|r| omega_path(&s.sample(base.replication(r)), &p).unwrap().last().norm_sqr()).collect();
    let (mean, se) = mean_se(&m);
    assert!((mean - exact).abs() <= 3.0 * se, "{mean} vs {exact} (se {se})");
}

#[test]
fn holder_quotient_stays_bounded_under_refinement() {
    let p = ModelParams::new(0.7, cx(0.3, -0.2), 1.0).unwrap();
    let gamma = p.hurst - p.lambda() - 0.05;
    let grid = Arc::new(TimeGrid::uniform(1 << 12, 0.999).unwrap());
    let s = ComplexFbmSampler::new(0.7, grid).unwrap();
    for r in 0..3 {
        let omega = omega_path(&s.sample(SeedSpec::new(31, r)), &p).unwrap();
        let fine = holder_quotient(&omega, gamma).unwrap();
        let coarse = holder_quotient(&subsample(&omega, 4), gamma).unwrap();
        assert!(fine <= 2.0 * coarse, "replication {r}: {fine} vs {coarse}");
    }
}

#[test]
fn bridge_is_pinned_at_the_horizon() {
    let p = ModelParams::new(0.7, cx(0.3, -0.2), 1.0).unwrap();
    let grid = Arc::new(TimeGrid::uniform(1 << 14, 0.999).unwrap());
    let ks: Vec<usize> = [0.9, 0.99, 0.999].iter().map(|&t| grid.nearest_index(t)).collect();
    let s = ComplexFbmSampler::new(0.7, grid).unwrap();
    let base = SeedSpec::new(32, 0);
    let mut sq = vec![Vec::new(); 3];
    for r in 0..2000 {
        let b = BridgePaths::from_zeta(p, s.sample(base.replication(r))).unwrap();
        for (i, &k) in ks.iter().enumerate() {
            sq[i].push(b.z.values[k].norm_sqr());
        }
    }
    let ms: Vec<(f64, f64)> = sq.iter().map(|v| mean_se(v)).collect();
    for w in ms.windows(2) {
        let ((a, sa), (b, sb)) = (w[0], w[1]);
        assert!(b < a + 2.0 * (sa * sa + sb * sb).sqrt(), "{ms:?}");
    }
    assert!(ms[2].0 < 0.5 * ms[0].0, "{ms:?}");
}

#[test]
fn euler_scheme_converges_to_the_explicit_solution() {
    let p = ModelParams::new(0.7, cx(0.3, -0.2), 1.0).unwrap();
    let n = 512;
    let grid = Arc::new(TimeGrid::uniform(4 * n, 0.9).unwrap());
    let s = ComplexFbmSampler::new(0.7, grid).unwrap();
    let mut err = [0.0f64; 2];
    for r in 0..50 {
        let zeta = s.sample(SeedSpec::new(33, r));
        for (i, step) in [4usize, 2].into_iter().enumerate() {
            let z = subsample(&zeta, step);
            let exact = bridge_exact(&omega_path(&z, &p).unwrap(), &p).unwrap();
            let euler = bridge_euler(&z, &p).unwrap();
            assert!(!euler.step_too_large);
            err[i] += euler.path.values.iter().zip(&exact.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        }
    }
    let ratio = err[1] / err[0];
    assert!((0.3..=0.8).contains(&ratio), "error ratio {ratio}");
}

#[test]
fn omega_is_linear_in_the_noise() {
    let p = ModelParams::new(0.4, cx(0.2, 0.5), 1.0).unwrap();
    let grid = Arc::new(TimeGrid::uniform(300, 0.95).unwrap());
    let zeta = ComplexFbmSampler::new(0.4, grid).unwrap().sample(SeedSpec::new(34, 0));
    let base = omega_path(&zeta, &p).unwrap();
    for c in [cx(2.0, -1.0), cx(-0.3, 0.0), cx(0.0, 7.0)] {
        let scaled = omega_path(&zeta.scaled(c), &p).unwrap();
        for (a, b) in scaled.values.iter().zip(&base.values) {
            assert!((a - b * c).norm() <= 1e-12 * (1.0 + a.norm()));
        }
    }
}

#[test]
fn real_drift_and_real_noise_give_the_real_bridge() {
    let p = ModelParams::new(0.6, cx(0.35, 0.0), 1.0).unwrap();
    let grid = Arc::new(TimeGrid::uniform(200, 0.95).unwrap());
    let zeta = ComplexFbmSampler::new(0.6, grid.clone()).unwrap().sample(SeedSpec::new(35, 0));
    let re: Vec<Complex<f64>> = zeta.values.iter().map(|z| cx(z.re, 0.0)).collect();
    let zeta = ComplexPath::new(grid.clone(), re).unwrap();
    let b = BridgePaths::from_zeta(p, zeta.clone()).unwrap();
    let t = grid.times();
    // X_t = (T-t)^a sum_{j<k} (T-t_j)^{-a} dB_j
    let mut acc = 0.0;
    for k in 0..t.len() {
        let x = (1.0 - t[k]).powf(0.35) * acc;
        assert!(b.z.values[k].im.abs() <= 1e-15);
        assert!((b.z.values[k].re - x).abs() <= 1e-12 * (1.0 + x.abs()));
        if k + 1 < t.len() {
            acc += (1.0 - t[k]).powf(-0.35) * (zeta.values[k + 1].re - zeta.values[k].re);
        }
    }
}

#[test]
fn y_second_moment_above_h() {
    let (h, alpha) = (0.3, cx(0.9, -0.2));
    let p = ModelParams::new(h, alpha, 1.0).unwrap();
    let target = y_terminal_second_moment(h, alpha).unwrap();
    let grid = Arc::new(TimeGrid::uniform(10_000, 0.99).unwrap());
    let s = ComplexFbmSampler::new(h, grid).unwrap();
    let base = SeedSpec::new(36, 0);
    let m: Vec<f64> = (0..4000)
        .map(|r| {
            let omega = omega_path(&s.sample(base.replication(r)), &p).unwrap();
            scaled_y_path(&omega, &p).unwrap().path.last().norm_sqr()
        })
        .collect();
    let (mean, se) = mean_se(&m);
    assert!((mean - target).abs() <= 3.0 * se, "{mean} vs {target} (se {se})");
}

/// At `Re(alpha) = H` the rescaled moment approaches its limit only like
/// `1/|log(T-t)|`; check that rate rather than a match at finite `t`.
#[test]
fn y_second_moment_log_case_converges_at_log_rate() {
    let (h, alpha) = (0.7, cx(0.7, -0.2));
    let p = ModelParams::new(h, alpha, 1.0).unwrap();
    let target = y_terminal_second_moment(h, alpha).unwrap();
    let grid = Arc::new(TimeGrid::uniform(50_000, 0.999).unwrap());
    let ks = [grid.nearest_index(0.99), grid.len() - 1];
    let s = ComplexFbmSampler::new(h, grid).unwrap();
    let base = SeedSpec::new(37, 0);
    let mut v = [Vec::new(), Vec::new()];
    for r in 0..600 {
        let omega = omega_path(&s.sample(base.replication(r)), &p).unwrap();
        let y = scaled_y_path(&omega, &p).unwrap().path;
        for i in 0..2 {
            v[i].push(y.values[ks[i]].norm_sqr());
        }
    }
    let (m2, _) = mean_se(&v[0]);
    let (m3, _) = mean_se(&v[1]);
    let diff: Vec<f64> = v[1].iter().zip(&v[0]).map(|(a, b)| a - b).collect();
    let (d, dse) = mean_se(&diff);
    assert!(d > 2.0 * dse, "no movement toward the limit: {m2} -> {m3} (target {target})");
    assert!(m3 < target, "{m3} overshoots {target}");
    // deviation times |log delta| should be roughly constant
    let c2 = (target - m2) * 0.01f64.ln().abs();
    let c3 = (target - m3) * 0.001f64.ln().abs();
    assert!((c3 / c2 - 1.0).abs() < 0.5, "{c2} vs {c3}");
}

proptest! {
    #[test]
    fn bridge_modulus_is_power_of_omega(
        lam in 0.05f64..0.6, w in -2.0f64..2.0, sigma in 0.1f64..3.0,
        vals in proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 8),
    ) {
        let p = ModelParams::with_sigma(0.7, cx(lam, -w), 1.0, sigma).unwrap();
        let grid = Arc::new(TimeGrid::uniform(8, 0.9).unwrap());
        let mut v: Vec<Complex<f64>> = vals.iter().map(|&(a, b)| cx(a, b)).collect();
        v.insert(0, cx(0.0, 0.0));
        let omega = ComplexPath::new(grid.clone(), v).unwrap();
        let z = bridge_exact(&omega, &p).unwrap();
        for (k, t) in grid.times().iter().enumerate() {
            let expect = sigma * (1.0 - t).powf(lam) * omega.values[k].norm();
            prop_assert!((z.values[k].norm() - expect).abs() <= 1e-12 * (1.0 + expect));
        }
    }

    #[test]
    fn zero_noise_gives_zero_paths(h in 0.05f64..0.95, lam in 0.01f64..0.9) {
        prop_assume!(lam < 0.99);
        let p = ModelParams::new(h, cx(lam, 0.3), 1.0).unwrap();
        let grid = Arc::new(TimeGrid::uniform(16, 0.9).unwrap());
        let b = BridgePaths::from_zeta(p, ComplexPath::zeros(grid)).unwrap();
        prop_assert!(b.omega.values.iter().chain(&b.z.values).all(|z| z.norm() == 0.0));
    }
}
