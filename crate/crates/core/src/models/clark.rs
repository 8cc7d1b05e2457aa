//! Clark's model `x_{n+1} = a x_n + (1 - a) f(x_{n-k})`.

use crate::dynamics::{self, DelayMap, ScalarMap1D};
use crate::error::{invalid, Error, Result};

use super::ConditionSet;

#[derive(Debug, Clone)]
pub struct ClarkParams {
    pub a: f64,
    pub k: usize,
    pub f: ScalarMap1D<f64>,
}

impl ClarkParams {
    pub fn new(a: f64, k: usize, f: ScalarMap1D<f64>) -> Result<Self> {
        if !(a > 0.0 && a < 1.0) {
            return Err(invalid(format!("a must lie in (0, 1), got {a}")));
        }
        if k == 0 {
            return Err(invalid("k must be >= 1"));
        }
        Ok(ClarkParams { a, k, f })
    }

    /// `F_0` with `k + 1` arguments.
    pub fn delay_map(&self) -> DelayMap<f64> {
        let (a, k, f) = (self.a, self.k, self.f.clone());
        DelayMap::new(k + 1, move |x: &[f64]| a * x[0] + (1.0 - a) * f.eval(x[k])).expect("k + 1 >= 2")
    }

    /// Positive fixed point of `f` (the equilibrium), by bisection on
    /// `[0, f(0)]`.
    pub fn equilibrium(&self) -> Result<f64> {
        let f0 = self.f.eval(0.0);
        if !(f0 > 0.0 && f0.is_finite()) {
            return Err(Error::Infeasible(format!("f(0) = {f0} is not positive")));
        }
        let h = |x: f64| self.f.eval(x) - x;
        if !(h(f0) <= 0.0) {
            return Err(Error::NotMonotone("f(f(0)) > f(0)".into()));
        }
        Ok(dynamics::bisect(h, 0.0, f0, h(0.0), 1e-15 * (1.0 + f0)))
    }

    pub fn gamma(&self) -> f64 {
        -self.a.powi(self.k as i32 + 1) / (1.0 - self.a)
    }

    pub fn gamma1(&self) -> f64 {
        let ak1 = self.a.powi(self.k as i32 + 1);
        -(1.0 + ak1) / (1.0 - ak1)
    }

    pub fn gamma2(&self) -> f64 {
        (1.0 - self.a.powi(self.k as i32)) / (1.0 - self.a)
    }

    /// `g_2(x) = -((gamma1 + 1)/(1 - gamma1)) x + (2/(1 - gamma1)) f(x)`.
    pub fn g2(&self) -> ScalarMap1D<f64> {
        let (g1, f) = (self.gamma1(), self.f.clone());
        ScalarMap1D::new(move |x| -((g1 + 1.0) / (1.0 - g1)) * x + (2.0 / (1.0 - g1)) * f.eval(x))
    }

    /// `g_3(x) = (gamma2 x - f(x)) / (gamma2 - 1)`.
    pub fn g3(&self) -> ScalarMap1D<f64> {
        let (g2, f) = (self.gamma2(), self.f.clone());
        ScalarMap1D::new(move |x| (g2 * x - f.eval(x)) / (g2 - 1.0))
    }
}

/// `||V_0||_1 = a + (1 - a)|beta|`.
pub fn clark_v0_norm(a: f64, beta: f64) -> f64 {
    a + (1.0 - a) * beta.abs()
}

/// `||V_k||_1 = |a^{k+1} + (1 - a) beta| + a |beta| (1 - a^k)`.
pub fn clark_vk_norm(a: f64, k: usize, beta: f64) -> f64 {
    let k = k as i32;
    (a.powi(k + 1) + (1.0 - a) * beta).abs() + a * beta.abs() * (1.0 - a.powi(k))
}

/// `||V_{k+1}||_1 = |a^{k+2} + 2a(1 - a) beta| + a^2 |beta| (1 - a^{k-1})
///  + (1 - a)|beta| |a^{k+1} + (1 - a) beta|`.
pub fn clark_vk1_norm(a: f64, k: usize, beta: f64) -> f64 {
    let k = k as i32;
    (a.powi(k + 2) + 2.0 * a * (1.0 - a) * beta).abs()
        + a * a * beta.abs() * (1.0 - a.powi(k - 1))
        + (1.0 - a) * beta.abs() * (a.powi(k + 1) + (1.0 - a) * beta).abs()
}

/// `V_0 = (a, 0, ..., 0, (1 - a) beta)` with `k + 1` entries.
pub fn clark_v0(a: f64, k: usize, beta: f64) -> Vec<f64> {
    let mut v = vec![0.0; k + 1];
    v[0] = a;
    v[k] += (1.0 - a) * beta;
    v
}

pub fn clark_v0_vk_norms(a: f64, k: usize, beta: f64) -> Result<ConditionSet> {
    if !(a > 0.0 && a < 1.0) || k == 0 {
        return Err(invalid("need 0 < a < 1 and k >= 1"));
    }
    let mut s = ConditionSet::new();
    for (name, v) in [
        ("norm_v0", clark_v0_norm(a, beta)),
        ("norm_vk", clark_vk_norm(a, k, beta)),
        ("norm_vk1", clark_vk1_norm(a, k, beta)),
    ] {
        s.push(name, v < 1.0, Some(v));
    }
    Ok(s)
}

/// `(a, beta)` for which `x^{k+1} - a x^k - (1 - a) beta` has the root `e^{it}`.
pub fn clark_unit_circle_curve(k: usize, t: f64) -> Result<(f64, f64)> {
    if k == 0 {
        return Err(invalid("k must be >= 1"));
    }
    let kf = k as f64;
    let (s_k, s_k1) = ((kf * t).sin(), ((kf + 1.0) * t).sin());
    if s_k.abs() < 1e-12 || (s_k1 - s_k).abs() < 1e-12 {
        return Err(Error::Singular(format!("t = {t} is a singular parameter for k = {k}")));
    }
    Ok((s_k1 / s_k, t.sin() / (s_k1 - s_k)))
}

/// `F_k(x_n, ..., x_{n-2k}) = a^{k+1} x_{n-k} + (1 - a) sum_{j=0}^{k} a^j f(x_{n-k-j})`.
/// The first `k` arguments are ignored.
pub fn clark_fk_map(c: &ClarkParams) -> DelayMap<f64> {
    let (a, k, f) = (c.a, c.k, c.f.clone());
    DelayMap::new(2 * k + 1, move |x: &[f64]| {
        let w = &x[k..];
        let tail: f64 = (0..=k).map(|j| a.powi(j as i32) * f.eval(w[j])).sum();
        a.powi(k as i32 + 1) * w[0] + (1.0 - a) * tail
    })
    .expect("2k + 1 >= 3")
}

#[derive(Debug, Clone, Copy)]
pub struct ClarkScan {
    /// Points used for `sup f'` and `inf f'`.
    pub n_derivative: usize,
    /// Points used for the monotonicity check of `f`.
    pub n_monotone: usize,
    /// Points used by the 2-cycle scan of `g_4`.
    pub n_cycle: usize,
    /// Sampling range for `f'`; `None` means `[0, f(0)]`.
    pub range: Option<(f64, f64)>,
    pub tol: f64,
}

impl Default for ClarkScan {
    fn default() -> Self {
        ClarkScan { n_derivative: 8192, n_monotone: 1024, n_cycle: 4096, range: None, tol: 1e-12 }
    }
}

/// `f^{-1}(y)` by bisection on `[0, T]`, `T` doubled until `f(T) < y`.
/// NaN when `y` is outside `(0, f(0)]`.
pub fn invert_decreasing(f: &ScalarMap1D<f64>, y: f64) -> f64 {
    let f0 = f.eval(0.0);
    if !(y > 0.0 && y <= f0) {
        return f64::NAN;
    }
    if y == f0 {
        return 0.0;
    }
    let mut hi = 1.0;
    while f.eval(hi) >= y {
        hi *= 2.0;
        if hi > 1e300 {
            return f64::NAN;
        }
    }
    let h = |t: f64| f.eval(t) - y;
    dynamics::bisect(h, 0.0, hi, h(0.0), 1e-15 * (1.0 + hi))
}

/// The two sufficient conditions for global attractivity:
/// (i) `sup f' < gamma` and `f' != gamma1`; (ii) `inf f' > gamma` and `g_4`
/// has no 2-cycle on `(x*, g_3^{-1}(f(0))]`. Derivative bounds come from
/// grid sampling and are heuristic.
pub fn clark_global_check(c: &ClarkParams, scan: ClarkScan) -> Result<ConditionSet> {
    if scan.n_derivative < 2 || scan.n_monotone < 2 || scan.n_cycle < 2 {
        return Err(invalid("scan sizes must be >= 2"));
    }
    let f0 = c.f.eval(0.0);
    let (lo, hi) = scan.range.unwrap_or((0.0, f0));
    if !(lo < hi) {
        return Err(invalid(format!("empty sampling range [{lo}, {hi}]")));
    }
    let grid = |n: usize| (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64);

    let samples: Vec<f64> = grid(scan.n_monotone).map(|t| c.f.eval(t)).collect();
    if let Some(w) = samples.windows(2).position(|w| !(w[1] < w[0])) {
        return Err(Error::NotMonotone(format!(
            "f is not decreasing near t = {:.6}",
            lo + (hi - lo) * w as f64 / (scan.n_monotone - 1) as f64
        )));
    }

    let xbar = c.equilibrium()?;
    let (gamma, gamma1, gamma2) = (c.gamma(), c.gamma1(), c.gamma2());
    let derivs: Vec<f64> = grid(scan.n_derivative).map(|t| c.f.derivative(t)).collect();
    let sup = derivs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let inf = derivs.iter().copied().fold(f64::INFINITY, f64::min);

    let mut s = ConditionSet::new();
    s.record("xbar", xbar);
    s.record("gamma", gamma);
    s.record("gamma1", gamma1);
    s.record("gamma2", gamma2);
    s.record("sup_fprime", sup);
    s.record("inf_fprime", inf);

    let crosses_gamma1 = derivs.iter().any(|d| (d - gamma1).abs() <= scan.tol)
        || derivs.windows(2).any(|w| (w[0] < gamma1) != (w[1] < gamma1));
    let case_i = sup < gamma && !crosses_gamma1;
    s.push("global_cond_i", case_i, Some(sup))
        .with_note(format!("sup f' < gamma = {gamma:.6} and f' != gamma1 = {gamma1:.6} on the grid"));

    let case_ii = if inf > gamma {
        let (holds, note) = case_ii_cycle_check(c, scan)?;
        s.push("global_cond_ii", holds, Some(inf)).with_note(note);
        holds
    } else {
        s.push("global_cond_ii", false, Some(inf))
            .with_note(format!("inf f' <= gamma = {gamma:.6}; g_4 not examined"));
        false
    };
    s.push("global", case_i || case_ii, None)
        .with_note(if case_i || case_ii { "established" } else { "not established" });
    Ok(s)
}

/// Zero `x*` of `g_3` and the right endpoint `g_3^{-1}(f(0))`. Needs
/// `k >= 2` so that `gamma2 > 1`.
pub fn clark_g3_landmarks(c: &ClarkParams, n_scan: usize) -> Result<(f64, f64)> {
    if c.k < 2 {
        return Err(Error::Singular("g_3 needs gamma2 > 1, i.e. k >= 2".into()));
    }
    let g3 = c.g3();
    let f0 = c.f.eval(0.0);
    let xbar = c.equilibrium()?;
    let first_root = |target: f64, hi: f64| -> Result<f64> {
        dynamics::sign_change_roots(|x| g3.eval(x) - target, 0.0, hi, n_scan, 1e-14)?
            .first()
            .copied()
            .ok_or(Error::BracketNotFound { limit: hi })
    };
    // g_3(0) < 0 < g_3(xbar) = xbar, and g_3(f(0)) >= f(0).
    Ok((first_root(0.0, xbar)?, first_root(f0, f0)?))
}

/// `g_4 = f^{-1} o g_3`.
pub fn clark_g4(c: &ClarkParams) -> ScalarMap1D<f64> {
    let (g3, f) = (c.g3(), c.f.clone());
    ScalarMap1D::new(move |x| invert_decreasing(&f, g3.eval(x)))
}

fn case_ii_cycle_check(c: &ClarkParams, scan: ClarkScan) -> Result<(bool, String)> {
    let (x_star, right) = match clark_g3_landmarks(c, scan.n_cycle) {
        Ok(v) => v,
        Err(e) => return Ok((false, format!("could not locate x* or g_3^-1(f(0)): {e}"))),
    };
    let lo = x_star + 1e-9 * (1.0 + x_star);
    match dynamics::has_two_cycle(&clark_g4(c), lo, right, scan.n_cycle, scan.tol)? {
        Some(w) => Ok((false, format!("g_4 has a 2-cycle near {{{:.6}, {:.6}}}", w.x, w.y))),
        None => Ok((true, format!("no 2-cycle of g_4 on ({x_star:.6}, {right:.6}]"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::eval_expanded;
    use crate::dynamics::expr::Expr;
    use crate::expand::CoeffVector;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex;

    fn f_expr(s: &str) -> ScalarMap1D<f64> {
        Expr::parse(s).unwrap().into_scalar_map().unwrap()
    }

    fn final_example() -> ClarkParams {
        ClarkParams::new(0.7, 3, f_expr("2/(1+t)")).unwrap()
    }

    #[test]
    fn v0_norm_example() {
        assert_abs_diff_eq!(clark_v0_norm(0.5, -0.9), 0.95, epsilon = 1e-15);
        let s = clark_v0_vk_norms(0.5, 2, -0.9).unwrap();
        assert!(s.holds("norm_v0"));
    }

    #[test]
    fn norms_at_beta_one() {
        for k in 1..6 {
            for a in [0.1, 0.5, 0.9] {
                let s = clark_v0_vk_norms(a, k, 1.0).unwrap();
                for n in ["norm_v0", "norm_vk", "norm_vk1"] {
                    assert_abs_diff_eq!(s.value(n).unwrap(), 1.0, epsilon = 1e-12);
                    assert!(!s.holds(n) || s.value(n).unwrap() < 1.0);
                }
            }
        }
    }

    #[test]
    fn closed_forms_match_recurrence() {
        for k in 1..=4 {
            for i in 0..10 {
                for j in 0..10 {
                    let a = 0.05 + 0.09 * i as f64;
                    let beta = -3.0 + 0.6 * j as f64;
                    let v0 = CoeffVector::new(clark_v0(a, k, beta)).unwrap();
                    assert_abs_diff_eq!(clark_v0_norm(a, beta), v0.l1_norm(), epsilon = 1e-12);
                    assert_abs_diff_eq!(clark_vk_norm(a, k, beta), v0.expand_m(k).unwrap().l1_norm(), epsilon = 1e-12);
                    assert_abs_diff_eq!(clark_vk1_norm(a, k, beta), v0.expand_m(k + 1).unwrap().l1_norm(), epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn vk_norm_tends_to_beta() {
        assert_abs_diff_eq!(clark_vk_norm(0.6, 200, -0.8), 0.8, epsilon = 1e-3);
    }

    #[test]
    fn unit_circle_curve_satisfies_characteristic_equation() {
        for k in [2usize, 5, 8, 15] {
            for i in 1..100 {
                let t = std::f64::consts::PI * i as f64 / 100.0;
                let Ok((a, beta)) = clark_unit_circle_curve(k, t) else { continue };
                let z = Complex::from_polar(1.0, t);
                let r = z.powu(k as u32 + 1) - a * z.powu(k as u32) - (1.0 - a) * beta;
                assert!(r.norm() < 1e-10, "k={k}, t={t}: {}", r.norm());
            }
        }
    }

    #[test]
    fn unit_circle_curve_near_zero() {
        let (_, beta) = clark_unit_circle_curve(3, 1e-6).unwrap();
        assert_abs_diff_eq!(beta, 1.0, epsilon = 1e-5);
        assert!(clark_unit_circle_curve(2, std::f64::consts::PI / 2.0).is_err());
    }

    #[test]
    fn final_example_constants() {
        let c = final_example();
        assert_abs_diff_eq!(c.gamma2(), 2.19, epsilon = 1e-15);
        assert_abs_diff_eq!(c.equilibrium().unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn final_example_g3_g4_closed_forms() {
        let c = final_example();
        let (g3, g4) = (c.g3(), clark_g4(&c));
        let (x_star, right) = clark_g3_landmarks(&c, 4096).unwrap();
        // 219 x^2 + 219 x - 200 = 0
        assert_abs_diff_eq!(x_star, (-219.0 + (219.0f64 * 219.0 + 4.0 * 219.0 * 200.0).sqrt()) / 438.0, epsilon = 1e-10);
        assert_abs_diff_eq!(g3.eval(right), 2.0, epsilon = 1e-10);
        for i in 0..50 {
            let x = x_star + (right - x_star) * (i as f64 + 0.5) / 50.0;
            assert_abs_diff_eq!(g3.eval(x), 219.0 / 119.0 * x - 200.0 / (119.0 * (x + 1.0)), epsilon = 1e-10);
            let closed = (438.0 + 19.0 * x - 219.0 * x * x) / (219.0 * x * x + 219.0 * x - 200.0);
            assert!((g4.eval(x) - closed).abs() < 1e-10 * (1.0 + closed.abs()), "x={x}");
        }
    }

    #[test]
    fn final_example_global_check_reports_cases() {
        let s = clark_global_check(&final_example(), ClarkScan::default()).unwrap();
        assert_abs_diff_eq!(s.value("gamma").unwrap(), -0.7f64.powi(4) / 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(s.value("inf_fprime").unwrap(), -2.0, epsilon = 1e-9);
        assert!(!s.holds("global_cond_i"));
        assert!(!s.holds("global_cond_ii"));
    }

    #[test]
    fn affine_f_case_one() {
        // f' = -1 < gamma iff a(1 + a^k) < 1.
        for (a, k) in [(0.5, 2usize), (0.6, 1), (0.7, 3)] {
            let c = ClarkParams::new(a, k, f_expr("-t + 4")).unwrap();
            let s = clark_global_check(&c, ClarkScan { range: Some((0.0, 3.9)), ..ClarkScan::default() }).unwrap();
            let expect = a * (1.0 + a.powi(k as i32)) < 1.0;
            assert_eq!(s.holds("global_cond_i"), expect, "a={a}, k={k}");
        }
    }

    #[test]
    fn non_monotone_f_rejected() {
        let c = ClarkParams::new(0.5, 2, f_expr("1 + t^2")).unwrap();
        assert!(matches!(clark_global_check(&c, ClarkScan::default()), Err(Error::NotMonotone(_))));
    }

    #[test]
    fn fk_map_matches_recursion() {
        let c = ClarkParams::new(0.7, 3, f_expr("2/(1+t)")).unwrap();
        let fk = clark_fk_map(&c);
        let f0 = c.delay_map();
        let mut seed = 7u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64 * 5.0
        };
        for _ in 0..100 {
            let args: Vec<f64> = (0..7).map(|_| next()).collect();
            let want = eval_expanded(&f0, 3, &args).unwrap();
            assert_abs_diff_eq!(fk.eval(&args).unwrap(), want, epsilon = 1e-10);
        }
        assert_abs_diff_eq!(fk.diagonal(1.0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn g2_is_defined() {
        let c = ClarkParams::new(0.5, 2, f_expr("exp(1 - t)")).unwrap();
        let xbar = c.equilibrium().unwrap();
        assert_abs_diff_eq!(c.g2().eval(xbar), xbar, epsilon = 1e-12);
        assert!(dynamics::has_two_cycle(&c.g2(), 0.0, 3.0, 4096, 1e-12).unwrap().is_none());
    }

    #[test]
    fn invert_decreasing_round_trip() {
        let f = f_expr("2/(1+t)");
        for y in [0.1, 0.5, 1.0, 1.9, 2.0] {
            assert_abs_diff_eq!(f.eval(invert_decreasing(&f, y)), y, epsilon = 1e-12);
        }
        assert!(invert_decreasing(&f, 2.5).is_nan());
        assert!(invert_decreasing(&f, -1.0).is_nan());
    }
}
