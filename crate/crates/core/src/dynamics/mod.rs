//! Nonlinear delay maps `x_{n+1} = F_0(x_n, ..., x_{n-k+1})`, their expansions
//! `F_m`, orbits, and one-dimensional fixed point and 2-cycle search.
//!
//! Argument lists passed to a map are newest first. Histories and orbit
//! values are stored oldest first.

pub mod expr;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::expand::{classify_schur, CoeffVector, SchurOptions};
use crate::scalar::Real;
use crate::verdict::Verdict;

/// Deepest expansion `eval_expanded` accepts.
pub const MAX_EXPANSION: usize = 64;

type MapFn<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;
type ScalarFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// `F_0` of a `k`-th order delay recurrence.
#[derive(Clone)]
pub struct DelayMap<T = f64> {
    k: usize,
    f: MapFn<T>,
    pub domain_low: T,
    pub domain_high: T,
}

impl<T: Real> DelayMap<T> {
    pub fn new(k: usize, f: impl Fn(&[T]) -> T + Send + Sync + 'static) -> Result<Self> {
        if k == 0 {
            return Err(invalid("a delay map needs k >= 1 arguments"));
        }
        Ok(DelayMap { k, f: Arc::new(f), domain_low: T::zero(), domain_high: T::infinity() })
    }

    /// `x_{n+1} = sum_j a_j x_{n-j}`.
    pub fn linear(v0: &CoeffVector<T>) -> Self {
        let a = v0.entries().to_vec();
        let k = a.len();
        let mut map = Self::new(k, move |x| a.iter().zip(x).fold(T::zero(), |s, (a, x)| s + *a * *x))
            .expect("coefficient vectors are non-empty");
        map.domain_low = T::neg_infinity();
        map
    }

    pub fn with_domain(mut self, low: T, high: T) -> Self {
        self.domain_low = low;
        self.domain_high = high;
        self
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn in_domain(&self, x: T) -> bool {
        x >= self.domain_low && x <= self.domain_high
    }

    pub fn eval(&self, args: &[T]) -> Result<T> {
        if args.len() != self.k {
            return Err(Error::ArgumentCount { expected: self.k, got: args.len() });
        }
        Ok((self.f)(args))
    }

    /// Value on the diagonal `F_0(x, ..., x)`.
    pub fn diagonal(&self, x: T) -> T {
        (self.f)(&vec![x; self.k])
    }

    /// `F_m` as a map of `k + m` arguments.
    pub fn expanded(&self, m: usize) -> Result<Self> {
        if m > MAX_EXPANSION {
            return Err(invalid(format!("expansion order {m} exceeds {MAX_EXPANSION}")));
        }
        let base = self.clone();
        let mut map = Self::new(self.k + m, move |args| {
            eval_expanded(&base, m, args).unwrap_or_else(|_| T::nan())
        })?;
        map.domain_low = self.domain_low;
        map.domain_high = self.domain_high;
        Ok(map)
    }
}

impl<T> fmt::Debug for DelayMap<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DelayMap").field("k", &self.k).finish_non_exhaustive()
    }
}

/// A real function of one variable with an optional exact derivative.
#[derive(Clone)]
pub struct ScalarMap1D<T = f64> {
    f: ScalarFn<T>,
    df: Option<ScalarFn<T>>,
    pub lo: T,
    pub hi: T,
}

impl<T: Real> ScalarMap1D<T> {
    pub fn new(f: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        ScalarMap1D { f: Arc::new(f), df: None, lo: T::neg_infinity(), hi: T::infinity() }
    }

    pub fn with_derivative(mut self, df: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        self.df = Some(Arc::new(df));
        self
    }

    pub fn with_domain(mut self, lo: T, hi: T) -> Self {
        self.lo = lo;
        self.hi = hi;
        self
    }

    pub fn eval(&self, x: T) -> T {
        (self.f)(x)
    }

    pub fn has_derivative(&self) -> bool {
        self.df.is_some()
    }

    /// Exact derivative when available, otherwise a central difference.
    pub fn derivative(&self, x: T) -> T {
        match &self.df {
            Some(df) => df(x),
            None => {
                let h = T::lit(1e-6) * (T::one() + x.abs());
                (self.eval(x + h) - self.eval(x - h)) / (h + h)
            }
        }
    }

    pub fn compose(&self, inner: &ScalarMap1D<T>) -> ScalarMap1D<T> {
        let (f, g) = (self.clone(), inner.clone());
        ScalarMap1D::new(move |x| f.eval(g.eval(x))).with_domain(inner.lo, inner.hi)
    }
}

impl<T> fmt::Debug for ScalarMap1D<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarMap1D").field("has_derivative", &self.df.is_some()).finish_non_exhaustive()
    }
}

/// `F_m(args)`. The trailing `k` arguments hold `x_{n-m}, ..., x_{n-m-k+1}`;
/// the leading `m` are free arguments that `F_m` ignores.
pub fn eval_expanded<T: Real>(f: &DelayMap<T>, m: usize, args: &[T]) -> Result<T> {
    let k = f.k();
    if args.len() != k + m {
        return Err(Error::ArgumentCount { expected: k + m, got: args.len() });
    }
    if m > MAX_EXPANSION {
        return Err(invalid(format!("expansion order {m} exceeds {MAX_EXPANSION}")));
    }
    let mut window = args[m..].to_vec();
    for step in 0..m {
        let next = (f.f)(&window);
        if !next.is_finite() {
            return Err(Error::NonFinite(format!("F_0 at expansion step {step}")));
        }
        window.rotate_right(1);
        window[0] = next;
    }
    let value = (f.f)(&window);
    if !value.is_finite() {
        return Err(Error::NonFinite(format!("F_0 at expansion step {m}")));
    }
    Ok(value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrbitStop {
    Converged,
    StepLimit,
    Overflow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord<T = f64> {
    /// `x_{-k+1}, ..., x_N`, oldest first.
    pub values: Vec<T>,
    pub k: usize,
    pub converged: bool,
    pub limit: Option<T>,
    pub iterations_used: usize,
    pub stop: OrbitStop,
}

impl<T: Real> OrbitRecord<T> {
    /// Index of `values[i]` in the usual numbering (`x_{-k+1}` first).
    pub fn index_of(&self, i: usize) -> i64 {
        i as i64 - self.k as i64 + 1
    }

    /// `x_n` for `n >= -k+1`.
    pub fn x(&self, n: i64) -> Option<T> {
        let i = n + self.k as i64 - 1;
        usize::try_from(i).ok().and_then(|i| self.values.get(i).copied())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,x_n\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{},{:.16e}\n", self.index_of(i), v.to_f64_lossy()));
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OrbitOptions<T> {
    pub n_steps: usize,
    /// Spread of the trailing window below which the orbit is declared
    /// convergent. Zero disables the early stop.
    pub conv_tol: T,
    pub window: usize,
}

impl<T: Real> Default for OrbitOptions<T> {
    fn default() -> Self {
        OrbitOptions { n_steps: 1000, conv_tol: T::lit(1e-10), window: 10 }
    }
}

/// Iterates `F_0` from the oldest-first history `init` (length `k`).
pub fn orbit<T: Real>(f: &DelayMap<T>, init: &[T], opts: &OrbitOptions<T>) -> Result<OrbitRecord<T>> {
    let k = f.k();
    if init.len() != k {
        return Err(Error::ArgumentCount { expected: k, got: init.len() });
    }
    if opts.n_steps == 0 {
        return Err(invalid("n_steps must be >= 1"));
    }
    if opts.window == 0 {
        return Err(invalid("window must be >= 1"));
    }
    let mut values = init.to_vec();
    let mut args: Vec<T> = init.iter().rev().copied().collect();
    let mut stop = OrbitStop::StepLimit;
    let mut iterations_used = 0;
    for _ in 0..opts.n_steps {
        let next = (f.f)(&args);
        if !next.is_finite() {
            stop = OrbitStop::Overflow;
            break;
        }
        iterations_used += 1;
        values.push(next);
        args.rotate_right(1);
        args[0] = next;
        if opts.conv_tol > T::zero() && iterations_used >= opts.window && spread(&values, opts.window) < opts.conv_tol {
            stop = OrbitStop::Converged;
            break;
        }
    }
    let converged = stop == OrbitStop::Converged;
    let limit = converged.then(|| *values.last().expect("orbit has values"));
    Ok(OrbitRecord { values, k, converged, limit, iterations_used, stop })
}

fn spread<T: Real>(values: &[T], window: usize) -> T {
    let tail = &values[values.len() - window..];
    let (lo, hi) = tail.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
    hi - lo
}

/// History for the `F_m` orbit that reproduces the `F_0` orbit from `x0`
/// shifted by `m`: returns `x_{-k+1}, ..., x_m` (oldest first), so that
/// `z_n = x_{n+m}`.
pub fn calibrate_initial<T: Real>(f: &DelayMap<T>, x0: &[T], m: usize) -> Result<Vec<T>> {
    if m == 0 {
        if x0.len() != f.k() {
            return Err(Error::ArgumentCount { expected: f.k(), got: x0.len() });
        }
        return Ok(x0.to_vec());
    }
    let rec = orbit(f, x0, &OrbitOptions { n_steps: m, conv_tol: T::zero(), window: 1 })?;
    if rec.stop == OrbitStop::Overflow {
        return Err(Error::NonFinite("orbit overflowed during calibration".into()));
    }
    Ok(rec.values)
}

/// `grad F_m` at a fixed point, from the partials `v0` of `F_0` there.
pub fn gradient_expanded<T: Real>(v0: &CoeffVector<T>, m: usize) -> Result<CoeffVector<T>> {
    v0.expand_m(m)
}

/// Central-difference partials of `F_0` at the diagonal point `(x, ..., x)`.
pub fn partials_at<T: Real>(f: &DelayMap<T>, x: T, step: T) -> Result<CoeffVector<T>> {
    let k = f.k();
    let mut out = Vec::with_capacity(k);
    for i in 0..k {
        let mut plus = vec![x; k];
        let mut minus = vec![x; k];
        plus[i] = x + step;
        minus[i] = x - step;
        let d = ((f.f)(&plus) - (f.f)(&minus)) / (step + step);
        if !d.is_finite() {
            return Err(Error::Singular(format!("finite difference for argument {i} is not finite")));
        }
        out.push(d);
    }
    CoeffVector::new(out)
}

#[derive(Debug, Clone)]
pub struct LocalOptions<T> {
    pub schur: SchurOptions<T>,
    /// Allowed `|F_0(x, ..., x) - x|` at the supplied point.
    pub fixed_point_tol: T,
    /// Finite-difference step; `None` uses `1e-6 (1 + |xbar|)`.
    pub fd_step: Option<T>,
    /// Exact partials, bypassing finite differences.
    pub partials: Option<Vec<T>>,
}

impl<T: Real> Default for LocalOptions<T> {
    fn default() -> Self {
        LocalOptions {
            schur: SchurOptions::default(),
            fixed_point_tol: T::lit(1e-8),
            fd_step: None,
            partials: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalReport<T> {
    pub xbar: T,
    pub partials: Vec<T>,
    pub verdict: Verdict<T>,
}

/// Local stability of the fixed point `xbar` through the expansion of the
/// linearization.
pub fn classify_local<T: Real>(f: &DelayMap<T>, xbar: T, opts: &LocalOptions<T>) -> Result<LocalReport<T>> {
    let residual = f.diagonal(xbar) - xbar;
    if !(residual.abs() < opts.fixed_point_tol) {
        return Err(Error::NotFixedPoint { point: xbar.to_f64_lossy(), residual: residual.to_f64_lossy() });
    }
    let v0 = match &opts.partials {
        Some(p) if p.len() != f.k() => return Err(Error::ArgumentCount { expected: f.k(), got: p.len() }),
        Some(p) => CoeffVector::new(p.clone())?,
        None => {
            let step = opts.fd_step.unwrap_or_else(|| T::lit(1e-6) * (T::one() + xbar.abs()));
            partials_at(f, xbar, step)?
        }
    };
    let verdict = classify_schur(&v0, &opts.schur)?;
    Ok(LocalReport { xbar, partials: v0.entries().to_vec(), verdict })
}

/// Roots of `g(x) = x` on `[lo, hi]`: sign changes of `g(x) - x` on a uniform
/// grid of `n_scan` points, each refined by bisection to `tol`. Tangential
/// fixed points are missed.
pub fn find_fixed_points_1d<T: Real>(g: &ScalarMap1D<T>, lo: T, hi: T, n_scan: usize, tol: T) -> Result<Vec<T>> {
    sign_change_roots(|x| g.eval(x) - x, lo, hi, n_scan, tol)
}

pub(crate) fn sign_change_roots<T: Real>(h: impl Fn(T) -> T, lo: T, hi: T, n_scan: usize, tol: T) -> Result<Vec<T>> {
    if !(lo < hi) || n_scan < 2 {
        return Err(invalid("need lo < hi and n_scan >= 2"));
    }
    if !(tol > T::zero()) {
        return Err(invalid("tol must be positive"));
    }
    let step = (hi - lo) / T::from_usize(n_scan - 1).expect("grid size fits");
    let xs: Vec<T> = (0..n_scan).map(|i| lo + step * T::from_usize(i).expect("grid index fits")).collect();
    let hs: Vec<T> = xs.iter().map(|x| h(*x)).collect();
    if hs.iter().all(|v| v.abs() <= tol) {
        return Err(Error::IdentityMap);
    }
    let mut roots: Vec<T> = Vec::new();
    let push = |r: T, roots: &mut Vec<T>| {
        if roots.last().map_or(true, |last| (r - *last).abs() > tol + tol) {
            roots.push(r);
        }
    };
    for i in 0..n_scan {
        if !hs[i].is_finite() {
            continue;
        }
        if hs[i] == T::zero() {
            push(xs[i], &mut roots);
            continue;
        }
        if i + 1 < n_scan && hs[i + 1].is_finite() && hs[i + 1] != T::zero() && (hs[i] < T::zero()) != (hs[i + 1] < T::zero()) {
            push(bisect(&h, xs[i], xs[i + 1], hs[i], tol), &mut roots);
        }
    }
    Ok(roots)
}

/// Bisection on a bracket with `h(a)` of sign `ha`, to width `tol`.
pub(crate) fn bisect<T: Real>(h: impl Fn(T) -> T, mut a: T, mut b: T, ha: T, tol: T) -> T {
    let negative_at_a = ha < T::zero();
    let two = T::one() + T::one();
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let mid = (a + b) / two;
        let hm = h(mid);
        if hm == T::zero() {
            return mid;
        }
        if (hm < T::zero()) == negative_at_a {
            a = mid;
        } else {
            b = mid;
        }
    }
    (a + b) / two
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoCycle<T> {
    pub x: T,
    pub y: T,
}

/// Searches for `x != y` with `g(x) = y`, `g(y) = x` on `[lo, hi]` via the
/// fixed points of `g o g`. A scan heuristic, not a proof of absence.
pub fn has_two_cycle<T: Real>(g: &ScalarMap1D<T>, lo: T, hi: T, n_scan: usize, tol: T) -> Result<Option<TwoCycle<T>>> {
    let gg = |x: T| {
        let y = g.eval(x);
        if y.is_finite() { g.eval(y) - x } else { T::nan() }
    };
    let separation = T::lit(100.0) * tol;
    let is_cycle = |x: T| {
        let y = g.eval(x);
        ((y - x).abs() > separation * (T::one() + x.abs())).then_some(TwoCycle { x, y })
    };
    match sign_change_roots(gg, lo, hi, n_scan, tol) {
        Ok(roots) => Ok(roots.into_iter().find_map(is_cycle)),
        // g o g is the identity on the grid: every non-fixed point is 2-periodic.
        Err(Error::IdentityMap) => {
            let step = (hi - lo) / T::from_usize(n_scan - 1).expect("grid size fits");
            Ok((0..n_scan).map(|i| lo + step * T::from_usize(i).expect("grid index fits")).find_map(is_cycle))
        }
        Err(e) => Err(e),
    }
}
