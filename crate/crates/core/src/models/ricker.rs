//! `x_{n+1} = x_n f(x_{n-2}) + h` with `f` positive and decreasing.
//!
//! At the equilibrium `xbar = xbar f(xbar) + h` the linearization has
//! `V_0 = (a0, 0, a2)` with `a0 = f(xbar) = 1 - h/xbar` and
//! `a2 = xbar f'(xbar)`.

use crate::dynamics::{self, DelayMap, ScalarMap1D};
use crate::error::{invalid, Error, Result};
use crate::poly::MonicPoly;
use crate::verdict::{Reason, Verdict, VerdictKind};

use super::ConditionSet;

#[derive(Debug, Clone)]
pub enum RickerKind {
    /// `f(t) = e^{b - t}`.
    Exp,
    Custom(ScalarMap1D<f64>),
}

#[derive(Debug, Clone)]
pub struct RickerParams {
    /// Exponent of the exponential family, or `f(0)` for a custom `f`.
    pub b: f64,
    pub h: f64,
    pub kind: RickerKind,
}

impl RickerParams {
    pub fn exp(b: f64, h: f64) -> Result<Self> {
        check_positive("b", b)?;
        check_positive("h", h)?;
        Ok(RickerParams { b, h, kind: RickerKind::Exp })
    }

    pub fn custom(f: ScalarMap1D<f64>, h: f64) -> Result<Self> {
        check_positive("h", h)?;
        let b = f.eval(0.0);
        if !(b.is_finite() && b > 0.0) {
            return Err(invalid(format!("f(0) must be finite and positive, got {b}")));
        }
        Ok(RickerParams { b, h, kind: RickerKind::Custom(f) })
    }

    pub fn f(&self, t: f64) -> f64 {
        match &self.kind {
            RickerKind::Exp => (self.b - t).exp(),
            RickerKind::Custom(f) => f.eval(t),
        }
    }

    pub fn df(&self, t: f64) -> f64 {
        match &self.kind {
            RickerKind::Exp => -(self.b - t).exp(),
            RickerKind::Custom(f) => f.derivative(t),
        }
    }

    /// `F_0(x, y, z) = x f(z) + h` on `[0, inf)^3`.
    pub fn delay_map(&self) -> DelayMap<f64> {
        let p = self.clone();
        DelayMap::new(3, move |a: &[f64]| a[0] * p.f(a[2]) + p.h).expect("k = 3")
    }

    /// `g(x) = F_2(x, x, x) = x f^3 + h f^2 + h f + h` with `f = f(x)`.
    pub fn g_map(&self) -> ScalarMap1D<f64> {
        let p = self.clone();
        ScalarMap1D::new(move |x: f64| {
            let f = p.f(x);
            x * f * f * f + p.h * f * f + p.h * f + p.h
        })
        .with_domain(0.0, f64::INFINITY)
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite and positive, got {v}")))
    }
}

/// The positive equilibrium, by bisection on `x f(x) + h - x` over `[h, H]`
/// with `H` doubled until the sign changes.
pub fn ricker_equilibrium(p: &RickerParams, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(invalid("tol must be positive"));
    }
    let phi = |x: f64| x * p.f(x) + p.h - x;
    let lo = p.h;
    if !(phi(lo) > 0.0) {
        return Err(Error::Infeasible(format!("x f(x) + h - x is not positive at x = h = {}", p.h)));
    }
    let mut hi = 2.0 * p.h.max(1.0);
    let mut doublings = 0;
    while !(phi(hi) < 0.0) {
        doublings += 1;
        if doublings > 200 || !hi.is_finite() {
            return Err(Error::BracketNotFound { limit: hi });
        }
        hi *= 2.0;
    }
    let x = dynamics::bisect(phi, lo, hi, phi(lo), 4.0 * f64::EPSILON * hi);
    let residual = phi(x);
    if !(residual.abs() < tol) {
        return Err(Error::NotFixedPoint { point: x, residual });
    }
    Ok(x)
}

/// `(a0, a2) = (f(xbar), xbar f'(xbar))`.
pub fn ricker_coefficients(p: &RickerParams, xbar: f64) -> (f64, f64) {
    (p.f(xbar), xbar * p.df(xbar))
}

/// `||V_0||_1`.
pub fn ricker_v0_norm(a0: f64, a2: f64) -> f64 {
    a0.abs() + a2.abs()
}

/// `||V_2||_1 = |a0^3 + a2| + a0 (1 + a0) |a2|` for `a0 > 0`.
pub fn ricker_v2_norm(a0: f64, a2: f64) -> f64 {
    (a0.powi(3) + a2).abs() + a0 * (1.0 + a0) * a2.abs()
}

/// `||V_3||_1 = a0 |a0^3 + 2 a2| + a0^2 |a2| + |a2| |a0^3 + a2|` for `a0 > 0`.
pub fn ricker_v3_norm(a0: f64, a2: f64) -> f64 {
    a0 * (a0.powi(3) + 2.0 * a2).abs() + a0 * a0 * a2.abs() + a2.abs() * (a0.powi(3) + a2).abs()
}

/// `a0 |a0^3 + 2 a2| + |a2 (a0^3 + a0^2 + a2)|`, as commonly stated for
/// `||V_3||_1`. Equal to [`ricker_v3_norm`] only when `a0^3 + a2 >= 0`;
/// elsewhere it underestimates the norm and is not a stability test.
pub fn ricker_v3_printed(a0: f64, a2: f64) -> f64 {
    a0 * (a0.powi(3) + 2.0 * a2).abs() + (a2 * (a0.powi(3) + a0 * a0 + a2)).abs()
}

/// The two margins of the exact condition `|a0 + a2| < 1`,
/// `a2 (a2 - a0) < 1`, each positive when it holds.
pub fn ricker_exact_margins(a0: f64, a2: f64) -> (f64, f64) {
    (1.0 - (a0 + a2).abs(), 1.0 - a2 * (a2 - a0))
}

pub fn ricker_conditions(a0: f64, a2: f64) -> ConditionSet {
    let mut s = ConditionSet::new();
    let v0 = ricker_v0_norm(a0, a2);
    let v2 = ricker_v2_norm(a0, a2);
    let v3 = ricker_v3_norm(a0, a2);
    let (m1, m2) = ricker_exact_margins(a0, a2);
    s.push("v0_cond", v0 < 1.0, Some(v0));
    s.push("v2_cond", v2 < 1.0, Some(v2));
    s.push("v3_cond", v3 < 1.0, Some(v3));
    s.push("exact_cond", m1 > 0.0 && m2 > 0.0, Some(1.0 - m1.min(m2)))
        .with_note("value is max(|a0 + a2|, a2 (a2 - a0)), compared with 1");
    s
}

/// Exact local verdict from the closed form, cross-checked against the roots
/// of `t^3 - a0 t^2 - a2`.
pub fn ricker_exact_verdict(a0: f64, a2: f64, tol: f64) -> Result<Verdict<f64>> {
    if !(a0 > 0.0 && a0 < 1.0 && a2 <= 0.0) {
        return Err(invalid(format!("need 0 < a0 < 1 and a2 <= 0, got a0 = {a0}, a2 = {a2}")));
    }
    let (m1, m2) = ricker_exact_margins(a0, a2);
    let closed = if m1 > tol && m2 > tol {
        VerdictKind::Stable
    } else if m1 < -tol || m2 < -tol {
        VerdictKind::Unstable
    } else {
        VerdictKind::MarginalSuspected
    };
    let cubic = MonicPoly::new(vec![-a0, 0.0, -a2])?;
    let oracle = cubic.root_verdict(1e-9, tol)?.kind;
    use VerdictKind::*;
    match (closed, oracle) {
        (Stable, Unstable) | (Unstable, Stable) => Err(Error::Inconsistent(format!(
            "closed form says {closed:?}, roots say {oracle:?} at a0 = {a0}, a2 = {a2}"
        ))),
        (MarginalSuspected, _) | (_, MarginalSuspected) => {
            Ok(Verdict::new(MarginalSuspected, Reason::ClosedForm, Vec::new()))
        }
        (kind, _) => Ok(Verdict::new(kind, Reason::ClosedForm, Vec::new())),
    }
}

/// Upper boundary `b_inf(h) = ln(1 + (h - h0)/2) + (h + h0)/2`,
/// `h0 = sqrt(h^2 + 4h)`, of the global stability region.
pub fn ricker_b_infinity(h: f64) -> Result<f64> {
    check_positive("h", h)?;
    let h0 = (h * h + 4.0 * h).sqrt();
    Ok((1.0 + 0.5 * (h - h0)).ln() + 0.5 * (h + h0))
}

/// Point `(h, b)` of the curve `a2 (a2 - a0) = 1` for the exponential family,
/// parametrized by the equilibrium.
pub fn ricker_lc_boundary(xbar: f64) -> Result<(f64, f64)> {
    if !(xbar > 0.0 && xbar.is_finite()) {
        return Err(invalid("xbar must be positive"));
    }
    let h = xbar - (xbar / (1.0 + xbar)).sqrt();
    if !(h > 0.0) {
        return Err(Error::Infeasible(format!("h = {h} <= 0 at xbar = {xbar}")));
    }
    Ok((h, xbar + (1.0 - h / xbar).ln()))
}

#[derive(Debug, Clone, Copy)]
pub struct GlobalScan {
    pub n_scan: usize,
    pub tol: f64,
}

impl Default for GlobalScan {
    fn default() -> Self {
        GlobalScan { n_scan: 4096, tol: 1e-12 }
    }
}

/// Scan interval for 2-cycles of `g`: `[0, max(e^{2b-1} + h, 1.01 sup g)]`,
/// with `sup g` sampled on the first interval.
pub fn ricker_scan_range(p: &RickerParams, n_scan: usize) -> f64 {
    let base = (2.0 * p.b - 1.0).exp() + p.h;
    let g = p.g_map();
    let sup = (0..n_scan.max(2))
        .map(|i| g.eval(base * i as f64 / (n_scan.max(2) - 1) as f64))
        .filter(|v| v.is_finite())
        .fold(0.0f64, f64::max);
    base.max(1.01 * sup)
}

/// Hypotheses for global attractivity: `g` has no 2-cycle and
/// `q(x) = x + f(x)/f'(x) > -(h/b)(1 + 1/b)`. Reports "established" or not;
/// a failed hypothesis says nothing about instability.
pub fn ricker_global_check(p: &RickerParams, scan: GlobalScan) -> Result<ConditionSet> {
    if scan.n_scan < 2 {
        return Err(invalid("scan needs at least 2 points"));
    }
    let mut s = ConditionSet::new();
    let xbar = ricker_equilibrium(p, 1e-10)?;
    s.record("xbar", xbar);

    let hi = ricker_scan_range(p, scan.n_scan);
    let q_holds = match p.kind {
        RickerKind::Exp => {
            let threshold = p.b * p.b / (p.b * p.b + p.b + 1.0);
            let c = s.push("q_cond", p.h > threshold, Some(threshold));
            c.with_note("sufficient condition h > b^2/(b^2+b+1); value is the threshold");
            p.h > threshold
        }
        RickerKind::Custom(_) => {
            let bound = -(p.h / p.b) * (1.0 + 1.0 / p.b);
            let q_min = (1..scan.n_scan)
                .map(|i| {
                    let x = hi * i as f64 / (scan.n_scan - 1) as f64;
                    x + p.f(x) / p.df(x)
                })
                .filter(|v| v.is_finite())
                .fold(f64::INFINITY, f64::min);
            let c = s.push("q_cond", q_min > bound, Some(q_min));
            c.with_note(format!("sampled min of q(x) against -(h/b)(1 + 1/b) = {bound}"));
            q_min > bound
        }
    };

    let cycle = dynamics::has_two_cycle(&p.g_map(), 0.0, hi, scan.n_scan, scan.tol)?;
    let c = s.push("no_two_cycle", cycle.is_none(), None);
    match cycle {
        Some(w) => c.with_note(format!("2-cycle near {{{:.6}, {:.6}}}", w.x, w.y)),
        None => c.with_note(format!("none found scanning [0, {hi:.6}]")),
    };
    let established = q_holds && cycle.is_none();
    s.push("global", established, None)
        .with_note(if established { "established" } else { "not established" });
    Ok(s)
}
