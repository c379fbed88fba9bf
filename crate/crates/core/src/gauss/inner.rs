//! Inner products `<f, g>_H = E[ (int f dB) (int g dB) ]` of the fBm
//! reproducing space.
//!
//! For `H > 1/2` both arguments are step functions and the kernel is
//! integrated exactly over every pair of cells. For `H < 1/2` the first
//! argument is a step function and the second a function of bounded
//! variation, represented by its derivative, interior jumps and endpoint
//! values.

use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::quad::{gauss_legendre, tanh_sinh_real};
use crate::scalar::Real;

/// Piecewise-constant function on `[knots[0] = 0, knots[m]]`, zero beyond.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction<T> {
    knots: Vec<T>,
    values: Vec<T>,
}

impl<T: Real> StepFunction<T> {
    pub fn new(knots: Vec<T>, values: Vec<T>) -> Result<Self> {
        if knots.len() != values.len() + 1 || values.is_empty() {
            return Err(Error::InvalidGrid(format!(
                "{} knots for {} cell values",
                knots.len(),
                values.len()
            )));
        }
        if knots[0] != T::zero() {
            return Err(Error::InvalidGrid("step functions start at 0".into()));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidGrid("knots must be strictly increasing".into()));
        }
        Ok(Self { knots, values })
    }

    /// `1_{(a, b]}` on `[0, length]`.
    pub fn indicator(a: T, b: T, length: T) -> Result<Self> {
        if !(T::zero() <= a && a < b && b <= length) {
            return domain(format!("indicator needs 0 <= a < b <= length, got a={a} b={b} length={length}"));
        }
        let mut knots = vec![T::zero()];
        let mut values = Vec::new();
        if a > T::zero() {
            knots.push(a);
            values.push(T::zero());
        }
        knots.push(b);
        values.push(T::one());
        if b < length {
            knots.push(length);
            values.push(T::zero());
        }
        Self::new(knots, values)
    }

    /// Cell averages of `f` on `cells` equal cells of `[0, length]`.
    pub fn from_fn<F: Fn(T) -> T>(f: F, length: T, cells: usize) -> Result<Self> {
        if cells == 0 || !(length > T::zero()) {
            return domain("need a positive length and at least one cell");
        }
        let (x, w) = gauss_legendre::<T>(6);
        let h = length / T::from_usize_lossy(cells);
        let mut knots: Vec<T> = (0..=cells).map(|k| h * T::from_usize_lossy(k)).collect();
        knots[cells] = length;
        let values = knots
            .windows(2)
            .map(|c| {
                let (mid, half) = ((c[0] + c[1]) * T::lit(0.5), (c[1] - c[0]) * T::lit(0.5));
                let s = x.iter().zip(&w).fold(T::zero(), |acc, (&xi, &wi)| acc + wi * f(mid + half * xi));
                s * T::lit(0.5)
            })
            .collect();
        Self::new(knots, values)
    }

    pub fn knots(&self) -> &[T] {
        &self.knots
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn length(&self) -> T {
        *self.knots.last().expect("nonempty")
    }

    /// Value on the cell containing `x` (right-closed cells), 0 outside.
    pub fn value_at(&self, x: T) -> T {
        if x <= T::zero() || x > self.length() {
            return T::zero();
        }
        let k = self.knots.partition_point(|&u| u < x);
        self.values[k - 1]
    }

    /// `phi(s) = int f(t) |t-s|^{2H-1} sgn(t-s) dt`.
    fn phi(&self, hurst: T, s: T) -> T {
        let e = hurst + hurst;
        let mut acc = T::zero();
        let mut prev = (self.knots[0] - s).abs().powf(e);
        for (k, &v) in self.values.iter().enumerate() {
            let next = (self.knots[k + 1] - s).abs().powf(e);
            if v != T::zero() {
                acc += v * (next - prev);
            }
            prev = next;
        }
        acc / e
    }
}

type RealFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Bounded-variation function on `[0, length]`: absolutely continuous part
/// plus finitely many interior jumps.
#[derive(Clone)]
pub struct BvFunction<T> {
    value: RealFn<T>,
    derivative: RealFn<T>,
    jumps: Vec<(T, T)>,
    length: T,
}

impl<T: Real> fmt::Debug for BvFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BvFunction").field("jumps", &self.jumps).field("length", &self.length).finish()
    }
}

impl<T: Real> BvFunction<T> {
    /// `value` must agree with the continuous part plus the jumps; `jumps`
    /// holds `(position, g(s+) - g(s-))` for interior positions.
    pub fn new<V, D>(value: V, derivative: D, jumps: Vec<(T, T)>, length: T) -> Result<Self>
    where
        V: Fn(T) -> T + Send + Sync + 'static,
        D: Fn(T) -> T + Send + Sync + 'static,
    {
        if !(length > T::zero()) {
            return domain("length must be positive");
        }
        if jumps.iter().any(|&(s, _)| !(s > T::zero() && s < length)) {
            return domain("jumps must lie strictly inside (0, length)");
        }
        Ok(Self { value: Arc::new(value), derivative: Arc::new(derivative), jumps, length })
    }

    pub fn smooth<V, D>(value: V, derivative: D, length: T) -> Result<Self>
    where
        V: Fn(T) -> T + Send + Sync + 'static,
        D: Fn(T) -> T + Send + Sync + 'static,
    {
        Self::new(value, derivative, Vec::new(), length)
    }

    /// `1_{[0, s]}` on `[0, length]`.
    pub fn indicator(s: T, length: T) -> Result<Self> {
        if !(s > T::zero()) {
            return domain("indicator endpoint must be positive");
        }
        let jumps = if s < length { vec![(s, -T::one())] } else { Vec::new() };
        Self::new(move |x| if x <= s { T::one() } else { T::zero() }, |_| T::zero(), jumps, length)
    }

    pub fn length(&self) -> T {
        self.length
    }
}

/// Exact `<f, g>_H` for step functions, `1/2 < H < 1`.
pub fn inner_product_high_h<T: Real>(f: &StepFunction<T>, g: &StepFunction<T>, hurst: T) -> Result<T> {
    if !(hurst > T::lit(0.5) && hurst < T::one()) {
        return domain(format!("this inner product needs 1/2 < H < 1, got {hurst}"));
    }
    let knots = merge_knots(f.knots(), g.knots());
    let m = knots.len() - 1;
    let mid = |k: usize| (knots[k] + knots[k + 1]) * T::lit(0.5);
    let fv: Vec<T> = (0..m).map(|k| f.value_at(mid(k))).collect();
    let gv: Vec<T> = (0..m).map(|k| g.value_at(mid(k))).collect();
    let e = hurst + hurst;
    let row = |i: usize| -> Vec<T> { knots.iter().map(|&u| (knots[i] - u).abs().powf(e)).collect() };
    // cell pair (i, j): E[dB_i dB_j] from the four knot distances
    let mut acc = T::zero();
    let mut lo = row(0);
    for i in 0..m {
        let hi = row(i + 1);
        if fv[i] != T::zero() {
            let mut s = T::zero();
            for j in 0..m {
                if gv[j] != T::zero() {
                    s += gv[j] * (hi[j] + lo[j + 1] - lo[j] - hi[j + 1]);
                }
            }
            acc += fv[i] * s;
        }
        lo = hi;
    }
    Ok(acc * T::lit(0.5))
}

/// `<f, g>_H` for general integrands, `1/2 < H < 1`, by step-function
/// approximation with cell doubling until the relative change is below
/// `rel_tol`.
pub fn inner_product_high_h_fn<T, F, G>(f: F, g: G, length: T, hurst: T, rel_tol: T) -> Result<T>
where
    T: Real,
    F: Fn(T) -> T,
    G: Fn(T) -> T,
{
    let mut cells = 32;
    let mut prev: Option<T> = None;
    while cells <= 2048 {
        let fs = StepFunction::from_fn(&f, length, cells)?;
        let gs = StepFunction::from_fn(&g, length, cells)?;
        let v = inner_product_high_h(&fs, &gs, hurst)?;
        if let Some(p) = prev {
            if (v - p).abs() <= rel_tol * v.abs() {
                return Ok(v);
            }
        }
        prev = Some(v);
        cells *= 2;
    }
    Err(Error::QuadratureNonConvergence(format!(
        "inner product did not settle to relative tolerance {rel_tol} with 2048 cells"
    )))
}

/// `<f, g>_H` for a step function `f` and a bounded-variation `g`,
/// `0 < H < 1/2`.
pub fn inner_product_low_h<T: Real>(f: &StepFunction<T>, g: &BvFunction<T>, hurst: T) -> Result<T> {
    if !(hurst > T::zero() && hurst < T::lit(0.5)) {
        return domain(format!("this inner product needs 0 < H < 1/2, got {hurst}"));
    }
    let len = g.length;
    let mut acc = (g.value)(T::zero()) * f.phi(hurst, T::zero()) - (g.value)(len) * f.phi(hurst, len);
    for &(s, jump) in &g.jumps {
        acc += jump * f.phi(hurst, s);
    }
    // absolutely continuous part, cell by cell between the kinks of phi
    let mut cuts: Vec<T> = f.knots().iter().copied().filter(|&u| u < len).collect();
    cuts.extend(g.jumps.iter().map(|&(s, _)| s));
    cuts.push(len);
    cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    cuts.dedup();
    for c in cuts.windows(2) {
        acc += tanh_sinh_real(|s| (g.derivative)(s) * f.phi(hurst, s), c[0], c[1], T::lit(1e-10))?;
    }
    Ok(acc * hurst)
}

fn merge_knots<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    let mut k: Vec<T> = a.iter().chain(b).copied().collect();
    k.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    let scale = k.last().copied().unwrap_or(T::one()).max(T::one());
    let eps = T::lit(1e-14) * scale;
    k.dedup_by(|x, y| (*x - *y).abs() <= eps);
    k
}
