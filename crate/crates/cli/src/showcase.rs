//! Built-in worked examples.

use std::fmt::Write as _;

use dde_expand::dynamics::{classify_local, eval_expanded, find_fixed_points_1d, LocalOptions, LocalReport};
use dde_expand::format::sig6;
use dde_expand::models::algebraic::{quintic_intervals, QuinticScan};
use dde_expand::models::clark::{clark_g3_landmarks, clark_global_check, ClarkScan};
use dde_expand::models::{ClarkParams, ConditionSet};
use dde_expand::{
    classify_schur, CoeffVector, DelayMap, ExactCoeffVec, MonicPoly, Rational, ScalarMap1D, SchurOptions, Verdict,
};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::args::{ExampleName, Global};
use crate::commands::{complex6, snap, conditions_text, verdict_line};
use crate::output::{CliError, Output};

type Res<T> = Result<T, CliError>;

pub fn run(name: ExampleName, g: &Global) -> Res<Output> {
    match name {
        ExampleName::Table1 => table1(),
        ExampleName::Table2 => table2(g),
        ExampleName::Easy1 => easy1(g),
        ExampleName::AlgebraicC => algebraic_c(),
        ExampleName::NewFixedPoints => new_fixed_points(g),
        ExampleName::ClarkFinal => clark_final(),
    }
}

fn q(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn easy_v0() -> ExactCoeffVec {
    CoeffVector::new(vec![q(5, 4), q(-3, 8)]).expect("finite")
}

fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `x_{n+1} = b_0 x_{n-m} + b_1 x_{n-m-1} + ...` with exact coefficients.
fn system_string(v: &ExactCoeffVec) -> String {
    let mut s = String::from("x_{n+1} =");
    let mut first = true;
    for (j, b) in v.entries().iter().enumerate() {
        if b.is_zero() {
            continue;
        }
        let lag = v.order() + j;
        let var = if lag == 0 { "x_n".to_string() } else { format!("x_{{n-{lag}}}") };
        let sign = match (first, b.is_negative()) {
            (true, true) => " -",
            (true, false) => "",
            (false, true) => " -",
            (false, false) => " +",
        };
        let _ = write!(s, "{sign} {} {var}", b.abs());
        first = false;
    }
    if first {
        s.push_str(" 0");
    }
    s
}

#[derive(Serialize)]
struct Table1Row {
    m: usize,
    system: String,
    coefficients: Vec<String>,
    norm_p: f64,
    norm_p_exact: String,
}

fn table1() -> Res<Output> {
    let v0 = easy_v0();
    let mut rows = Vec::new();
    for (m, v) in v0.expansion().take(5).enumerate() {
        let v = v?;
        let norm = Rational::from_integer(BigInt::from(1)) + v.l1_norm();
        rows.push(Table1Row {
            m,
            system: system_string(&v),
            coefficients: v.entries().iter().map(|b| b.to_string()).collect(),
            norm_p: to_f64(&norm),
            norm_p_exact: norm.to_string(),
        });
    }
    let mut text = String::from("m  system  ||p_m||_l1\n");
    for r in &rows {
        let _ = writeln!(text, "{}  {}  {:.3} ({})", r.m, r.system, r.norm_p, r.norm_p_exact);
    }
    Ok(Output::new(&rows, text))
}

#[derive(Serialize)]
struct Table2Row {
    m: usize,
    q: String,
    coefficients: Vec<String>,
    zeros: Vec<[f64; 2]>,
}

fn table2(g: &Global) -> Res<Output> {
    let v0 = easy_v0();
    let mut rows = Vec::new();
    for m in 0..=4 {
        let qm = v0.q_polynomial(m)?;
        let float = MonicPoly::new(qm.coeffs().iter().map(to_f64).collect())?;
        let zeros = if m == 0 { Vec::new() } else { float.roots(g.tol)?.iter().map(snap).collect() };
        rows.push(Table2Row { m, q: qm.to_string(), coefficients: qm.coeffs().iter().map(|c| c.to_string()).collect(), zeros });
    }
    let mut text = String::from("m  q_m(x)  zeros\n");
    for r in &rows {
        let zs: Vec<String> = r.zeros.iter().map(|z| complex6(z[0], z[1])).collect();
        let zs = if zs.is_empty() { "none".to_string() } else { zs.join(", ") };
        let _ = writeln!(text, "{}  {}  {}", r.m, r.q, zs);
    }
    Ok(Output::new(&rows, text))
}

#[derive(Serialize)]
struct Easy1 {
    p0_roots: Vec<[f64; 2]>,
    p1_roots: Vec<[f64; 2]>,
    verdict_f0: Verdict<f64>,
    /// `x_{n+1} = 19/16 x_{n-1} - 15/32 x_{n-2}` taken as a system of its own.
    verdict_f1: Verdict<f64>,
}

fn easy1(g: &Global) -> Res<Output> {
    let v0 = CoeffVector::new(vec![1.25, -0.375])?;
    let v1 = v0.expand_once(&v0)?;
    let roots = |p: MonicPoly<f64>| -> Res<Vec<[f64; 2]>> {
        Ok(p.roots(g.tol)?.iter().map(snap).collect())
    };
    let standalone = CoeffVector::new(vec![0.0, v1.entries()[0], v1.entries()[1]])?;
    let opts = SchurOptions::default().tol(g.tol);
    let report = Easy1 {
        p0_roots: roots(v0.p_polynomial())?,
        p1_roots: roots(v1.p_polynomial())?,
        verdict_f0: classify_schur(&v0, &opts)?,
        verdict_f1: classify_schur(&standalone, &opts)?,
    };
    let fmt = |z: &[[f64; 2]]| z.iter().map(|c| complex6(c[0], c[1])).collect::<Vec<_>>().join(", ");
    let text = format!(
        "roots of p_0: {}\nroots of p_1: {}\nF_0 system: {}\nF_1 system alone: {}\n",
        fmt(&report.p0_roots),
        fmt(&report.p1_roots),
        verdict_line(&report.verdict_f0),
        verdict_line(&report.verdict_f1)
    );
    Ok(Output::new(&report, text))
}

fn algebraic_c() -> Res<Output> {
    let r = quintic_intervals(QuinticScan::default());
    let iv = |v: &[(f64, f64)]| {
        v.iter().map(|(a, b)| format!("({}, {})", sig6(*a), sig6(*b))).collect::<Vec<_>>().join(" U ")
    };
    let mut text = format!(
        "|p(0)| < 1: {}\np(1) > 0: {}\n-p(-1) > 0: {}\nall necessary: {}\n",
        iv(&r.det),
        iv(&r.at_one),
        iv(&r.at_minus_one),
        iv(&r.screened)
    );
    for n in &r.norms {
        let _ = writeln!(text, "R = {}, ||V_{}||_1 < 1: {}", sig6(n.radius), n.m, iv(&n.intervals));
    }
    let _ = writeln!(text, "spectral radius at c = 18.5: {}", sig6(r.spectral_radius_at_18_5));
    Ok(Output::new(&r, text))
}

#[derive(Serialize)]
struct NewFixedPoint {
    x: f64,
    fixed_point_of_f0: bool,
    /// Local analysis of the lowest-order map that has `x` as a fixed point.
    local: LocalReport<f64>,
    order: usize,
    oracle: Verdict<f64>,
}

fn new_fixed_points(g: &Global) -> Res<Output> {
    let f0 = DelayMap::new(2, |a: &[f64]| a[1] * (2.0 - a[0]).exp() + 1.0)?;
    let f1 = f0.expanded(1)?;
    let base = f0.clone();
    let diag1 = ScalarMap1D::new(move |x| eval_expanded(&base, 1, &[x, x, x]).unwrap_or(f64::NAN));
    let xs = find_fixed_points_1d(&diag1, 0.0, 10.0, 8192, 1e-13)?;
    let opts = LocalOptions::default();
    let mut out = Vec::new();
    for x in xs {
        let own = (f0.diagonal(x) - x).abs() < 1e-8;
        let (order, map) = if own { (0, &f0) } else { (1, &f1) };
        let local = classify_local(map, x, &opts)?;
        let oracle = CoeffVector::new(local.partials.clone())?.p_polynomial().root_verdict(g.tol, g.tol)?;
        out.push(NewFixedPoint { x, fixed_point_of_f0: own, local, order, oracle });
    }
    let mut text = String::from("F_0(x, y) = y e^(2-x) + 1; fixed points of F_1 on [0, 10]\n");
    for p in &out {
        let _ = writeln!(
            text,
            "x = {}: fixed point of F_0: {}; F_{} expansion: {}; roots: {}",
            sig6(p.x),
            p.fixed_point_of_f0,
            p.order,
            verdict_line(&p.local.verdict),
            verdict_line(&p.oracle)
        );
    }
    Ok(Output::new(&out, text))
}

#[derive(Serialize)]
struct ClarkFinal {
    a: f64,
    k: usize,
    gamma2: f64,
    x_star: f64,
    g3_inverse_f0: f64,
    global: ConditionSet,
}

fn clark_final() -> Res<Output> {
    let f = ScalarMap1D::new(|t: f64| 2.0 / (1.0 + t)).with_derivative(|t: f64| -2.0 / ((1.0 + t) * (1.0 + t)));
    let c = ClarkParams::new(0.7, 3, f)?;
    let (x_star, right) = clark_g3_landmarks(&c, 4096)?;
    let global = clark_global_check(&c, ClarkScan::default())?;
    let report = ClarkFinal { a: c.a, k: c.k, gamma2: c.gamma2(), x_star, g3_inverse_f0: right, global };
    let mut text = format!(
        "f(t) = 2/(1+t), k = 3, a = 0.7\ngamma2 = {}, x* = {}, g3^-1(f(0)) = {}\n",
        sig6(report.gamma2),
        sig6(x_star),
        sig6(right)
    );
    text += &conditions_text("global conditions", &report.global);
    Ok(Output::new(&report, text))
}
