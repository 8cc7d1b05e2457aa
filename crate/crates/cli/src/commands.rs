use std::fmt::Write as _;

use dde_expand::dynamics::{
    classify_local as local, find_fixed_points_1d, orbit as simulate, LocalOptions, LocalReport, OrbitOptions,
    OrbitStop,
};
use dde_expand::format::{sig17, sig6};
use dde_expand::jury::{jury_table, jury_verdict};
use dde_expand::models::clark::{clark_global_check, clark_v0, clark_v0_vk_norms, ClarkScan};
use dde_expand::models::ricker::{
    ricker_b_infinity, ricker_coefficients, ricker_conditions, ricker_equilibrium, ricker_exact_verdict,
    ricker_global_check, GlobalScan, RickerKind,
};
use dde_expand::models::{ClarkParams, ConditionSet, RickerParams};
use dde_expand::sweep::{soundness_check, Axis, SoundnessReport};
use dde_expand::{
    classify_schur, CoeffVector, DelayMap, Expr, MonicPoly, OrbitRecord, Plane, Reason, RegionGrid, SchurOptions,
    ScalarMap1D, SweepSpec, Verdict,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::args::*;
use crate::output::{usage, write_body, CliError, Output};

type Res<T> = Result<T, CliError>;

pub fn reason_name(r: Reason) -> String {
    serde_json::to_value(r).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
}

pub fn verdict_line(v: &Verdict<f64>) -> String {
    let mut s = format!("{:?} ({})", v.kind, reason_name(v.reason));
    if let Some(m) = v.witness_m {
        let _ = write!(s, ", witness m = {m}");
    }
    s
}

pub fn join6(v: &[f64]) -> String {
    v.iter().map(|x| sig6(*x)).collect::<Vec<_>>().join(", ")
}

fn schur_options(s: &SchurArgs, g: &Global) -> SchurOptions<f64> {
    SchurOptions::default().m_max(s.m_max).tol(g.tol).oracle(s.oracle == Toggle::On)
}

fn read_poly(input: &PolyInput) -> Res<(MonicPoly<f64>, CoeffVector<f64>)> {
    match (&input.coeffs, &input.v0) {
        (Some(c), _) => {
            let p = MonicPoly::new(c.0.clone())?;
            let v0 = CoeffVector::from_poly(&p)?;
            Ok((p, v0))
        }
        (None, Some(v)) => {
            let v0 = CoeffVector::new(v.0.clone())?;
            Ok((v0.p_polynomial(), v0))
        }
        (None, None) => Err(usage("one of --coeffs or --v0 is required")),
    }
}

fn parse_map(m: &MapInput) -> Res<DelayMap<f64>> {
    let expr: Expr = m.f.parse()?;
    let k = m.k.unwrap_or(expr.arity().max(1));
    if k == 0 {
        return Err(usage("--k must be at least 1"));
    }
    Ok(expr.into_delay_map(k)?)
}

fn parse_fn(src: &str) -> Res<ScalarMap1D<f64>> {
    let expr: Expr = src.parse()?;
    Ok(expr.into_scalar_map()?)
}

#[derive(Serialize)]
struct CheckPolyReport {
    coeffs: Vec<f64>,
    v0: Vec<f64>,
    verdict: Verdict<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    spectral_radius: Option<f64>,
}

pub fn check_poly(a: &PolyArgs, g: &Global) -> Res<Output> {
    let (p, v0) = read_poly(&a.poly)?;
    let opts = schur_options(&a.schur, g);
    let verdict = classify_schur(&v0, &opts)?;
    let spectral_radius = match a.schur.oracle {
        Toggle::On => Some(p.spectral_radius(g.tol)?),
        Toggle::Off => None,
    };
    let mut text = format!("polynomial: {p}\nverdict: {}\n", verdict_line(&verdict));
    if verdict.norms.is_empty() {
        text.push_str("norms ||V_m||_1: none computed\n");
    } else {
        let _ = writeln!(text, "norms ||V_m||_1: {}", join6(&verdict.norms));
    }
    if let Some(r) = spectral_radius {
        let _ = writeln!(text, "spectral radius: {}", sig6(r));
    }
    let report = CheckPolyReport { coeffs: p.coeffs().to_vec(), v0: v0.entries().to_vec(), verdict, spectral_radius };
    Ok(Output::new(&report, text))
}

pub fn jury(a: &JuryArgs, g: &Global) -> Res<Output> {
    let (p, _) = read_poly(&a.poly)?;
    let table = jury_table(&p, g.tol)?;
    let verdict = jury_verdict(&table);
    let mut text = format!("polynomial: {p}\n");
    for (i, row) in table.rows.iter().enumerate() {
        let _ = writeln!(text, "row {i}: {}", join6(row));
    }
    for c in &table.constraints {
        let _ = writeln!(text, "{}: {} ({:?})", c.label, sig6(c.value), c.status);
    }
    let _ = writeln!(text, "verdict: {}", verdict_line(&verdict));
    #[derive(Serialize)]
    struct Report<'a> {
        table: &'a dde_expand::JuryTable<f64>,
        verdict: &'a Verdict<f64>,
    }
    Ok(Output::new(&Report { table: &table, verdict: &verdict }, text))
}

#[derive(Serialize)]
struct ExpandRow {
    m: usize,
    v: Vec<f64>,
    norm_v: f64,
    norm_p: f64,
    /// Non-leading coefficients of `q_m`.
    q: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    q_zeros: Option<Vec<[f64; 2]>>,
}

pub fn expand(a: &ExpandArgs, g: &Global) -> Res<Output> {
    let (_, v0) = read_poly(&a.poly)?;
    let mut rows = Vec::new();
    let mut q = Vec::new();
    for (m, v) in v0.expansion().take(a.m_max + 1).enumerate() {
        let v = v?;
        let q_zeros = if a.roots && m > 0 {
            let qm = MonicPoly::new(q.clone())?;
            Some(qm.roots(g.tol)?.iter().map(snap).collect())
        } else if a.roots {
            Some(Vec::new())
        } else {
            None
        };
        let norm_v = v.l1_norm();
        rows.push(ExpandRow { m, v: v.entries().to_vec(), norm_v, norm_p: 1.0 + norm_v, q: q.clone(), q_zeros });
        q.push(*v.first());
    }
    let k = v0.k();
    let mut csv = String::from("m,norm_v,norm_p");
    for j in 0..k {
        let _ = write!(csv, ",b{j}");
    }
    csv.push('\n');
    let mut text = String::from("m  ||V_m||_1  ||p_m||_l1  V_m\n");
    for r in &rows {
        let _ = write!(csv, "{},{},{}", r.m, sig17(r.norm_v), sig17(r.norm_p));
        for b in &r.v {
            let _ = write!(csv, ",{}", sig17(*b));
        }
        csv.push('\n');
        let _ = writeln!(text, "{}  {}  {}  ({})", r.m, sig6(r.norm_v), sig6(r.norm_p), join6(&r.v));
        if let Some(z) = &r.q_zeros {
            let zs: Vec<String> = z.iter().map(|c| complex6(c[0], c[1])).collect();
            let zs = if zs.is_empty() { "none".to_string() } else { zs.join(", ") };
            let _ = writeln!(text, "   zeros of q_{}: {}", r.m, zs);
        }
    }
    Ok(Output::new(&rows, text).with_csv(csv))
}

/// `[re, im]` with an imaginary part below `1e-12 max(1, |re|)` set to zero.
pub fn snap(z: &Complex64) -> [f64; 2] {
    let im = if z.im.abs() < 1e-12 * z.re.abs().max(1.0) { 0.0 } else { z.im };
    [z.re, im]
}

pub fn complex6(re: f64, im: f64) -> String {
    if im == 0.0 {
        sig6(re)
    } else if im > 0.0 {
        format!("{}+{}i", sig6(re), sig6(im))
    } else {
        format!("{}-{}i", sig6(re), sig6(-im))
    }
}

#[derive(Serialize)]
struct LocalSummary {
    k: usize,
    m: usize,
    fixed_points: Vec<LocalReport<f64>>,
}

pub fn classify_local(a: &LocalArgs, g: &Global) -> Res<Output> {
    let f0 = parse_map(&a.map)?;
    let k = f0.k();
    let map = if a.m == 0 { f0 } else { f0.expanded(a.m)? };
    let points = match &a.xbar {
        Some(list) => list.0.clone(),
        None => {
            let diag = map.clone();
            let d = ScalarMap1D::new(move |x| diag.diagonal(x));
            find_fixed_points_1d(&d, a.x_range.0, a.x_range.1, a.scan, 1e-13)?
        }
    };
    let opts = LocalOptions { schur: schur_options(&a.schur, g), ..LocalOptions::default() };
    let mut reports = Vec::new();
    for x in points {
        match local(&map, x, &opts) {
            Ok(r) => reports.push(r),
            Err(e @ dde_expand::Error::NotFixedPoint { .. }) if a.xbar.is_some() => return Err(usage(e.to_string())),
            Err(e) => return Err(e.into()),
        }
    }
    let mut text = format!("F_{} with {} arguments: {} fixed point(s)\n", a.m, k + a.m, reports.len());
    for r in &reports {
        let _ = writeln!(text, "xbar = {}: {}", sig6(r.xbar), verdict_line(&r.verdict));
        let _ = writeln!(text, "   partials: {}", join6(&r.partials));
    }
    Ok(Output::new(&LocalSummary { k, m: a.m, fixed_points: reports }, text))
}

#[derive(Serialize)]
struct OrbitSummary {
    init: Vec<f64>,
    stop: OrbitStop,
    converged: bool,
    limit: Option<f64>,
    iterations_used: usize,
    last: f64,
}

impl OrbitSummary {
    fn of(init: Vec<f64>, r: &OrbitRecord<f64>) -> Self {
        OrbitSummary {
            init,
            stop: r.stop,
            converged: r.converged,
            limit: r.limit,
            iterations_used: r.iterations_used,
            last: *r.values.last().expect("orbit has values"),
        }
    }
}

pub fn orbit(a: &OrbitArgs, g: &Global) -> Res<Output> {
    let f = parse_map(&a.map)?;
    let opts = OrbitOptions { n_steps: a.steps, conv_tol: a.conv_tol, window: 10 };
    if let Some(init) = &a.init {
        let rec = simulate(&f, &init.0, &opts)?;
        let text = format!(
            "{} steps, stop: {:?}, last value {}\n",
            rec.iterations_used,
            rec.stop,
            sig6(*rec.values.last().expect("orbit has values"))
        );
        let csv = rec.to_csv();
        return Ok(Output::new(&rec, text).with_csv(csv));
    }
    let n = a.batch.unwrap_or(1);
    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
    let mut runs = Vec::with_capacity(n);
    for _ in 0..n {
        let init: Vec<f64> = (0..f.k()).map(|_| rng.gen_range(a.x_range.0..a.x_range.1)).collect();
        let rec = simulate(&f, &init, &opts)?;
        runs.push(OrbitSummary::of(init, &rec));
    }
    let mut csv = String::from("orbit,stop,iterations,last\n");
    let mut text = String::new();
    for (i, r) in runs.iter().enumerate() {
        let stop = serde_json::to_value(r.stop).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
        let _ = writeln!(csv, "{i},{stop},{},{}", r.iterations_used, sig17(r.last));
        let _ = writeln!(text, "orbit {i}: {stop} after {} steps, last {}", r.iterations_used, sig6(r.last));
    }
    #[derive(Serialize)]
    struct Batch {
        seed: u64,
        orbits: Vec<OrbitSummary>,
    }
    Ok(Output::new(&Batch { seed: g.seed, orbits: runs }, text).with_csv(csv))
}

pub fn conditions_text(title: &str, s: &ConditionSet) -> String {
    let mut out = format!("{title}:\n");
    for c in &s.conditions {
        let value = c.value.map(sig6).unwrap_or_else(|| "-".into());
        let _ = write!(out, "  {:<16} {:<5} {}", c.name, c.holds, value);
        if let Some(n) = &c.note {
            let _ = write!(out, "  ({n})");
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct RickerReport {
    model: &'static str,
    b: f64,
    h: f64,
    xbar: f64,
    a0: f64,
    a2: f64,
    local: ConditionSet,
    exact_verdict: Verdict<f64>,
    global: ConditionSet,
    #[serde(skip_serializing_if = "Option::is_none")]
    b_infinity: Option<f64>,
}

pub fn ricker(a: &RickerArgs, g: &Global) -> Res<Output> {
    let p = match (&a.f, a.b) {
        (Some(src), _) => RickerParams::custom(parse_fn(src)?, a.h)?,
        (None, Some(b)) => RickerParams::exp(b, a.h)?,
        (None, None) => return Err(usage("one of --b or --f is required")),
    };
    let xbar = ricker_equilibrium(&p, g.tol)?;
    let (a0, a2) = ricker_coefficients(&p, xbar);
    let exact_verdict = ricker_exact_verdict(a0, a2, g.tol)?;
    let global = ricker_global_check(&p, GlobalScan { n_scan: a.scan, tol: 1e-12 })?;
    let exp = matches!(p.kind, RickerKind::Exp);
    let report = RickerReport {
        model: if exp { "exp" } else { "custom" },
        b: p.b,
        h: p.h,
        xbar,
        a0,
        a2,
        local: ricker_conditions(a0, a2),
        exact_verdict,
        global,
        b_infinity: if exp { Some(ricker_b_infinity(p.h)?) } else { None },
    };
    let mut text = format!(
        "b = {}, h = {}, xbar = {}, a0 = {}, a2 = {}\nlocal verdict: {}\n",
        sig6(p.b),
        sig6(p.h),
        sig6(xbar),
        sig6(a0),
        sig6(a2),
        verdict_line(&report.exact_verdict)
    );
    text += &conditions_text("local conditions", &report.local);
    text += &conditions_text("global conditions", &report.global);
    if let Some(bi) = report.b_infinity {
        let _ = writeln!(text, "b_infinity(h) = {}", sig6(bi));
    }
    Ok(Output::new(&report, text))
}

#[derive(Serialize)]
struct ClarkReport {
    a: f64,
    k: usize,
    xbar: f64,
    beta: f64,
    norms: ConditionSet,
    verdict: Verdict<f64>,
    global: ConditionSet,
}

pub fn clark(a: &ClarkArgs, g: &Global) -> Res<Output> {
    let c = ClarkParams::new(a.a, a.k, parse_fn(&a.f)?)?;
    let xbar = c.equilibrium()?;
    let beta = c.f.derivative(xbar);
    let norms = clark_v0_vk_norms(a.a, a.k, beta)?;
    let v0 = CoeffVector::new(clark_v0(a.a, a.k, beta))?;
    let verdict = classify_schur(&v0, &SchurOptions::default().tol(g.tol))?;
    let scan = ClarkScan { range: a.sample_range.map(|r| (r.0, r.1)), ..ClarkScan::default() };
    let global = clark_global_check(&c, scan)?;
    let mut text = format!(
        "a = {}, k = {}, xbar = {}, beta = f'(xbar) = {}\nlocal verdict: {}\n",
        sig6(a.a),
        a.k,
        sig6(xbar),
        sig6(beta),
        verdict_line(&verdict)
    );
    text += &conditions_text("norms", &norms);
    text += &conditions_text("global conditions", &global);
    Ok(Output::new(&ClarkReport { a: a.a, k: a.k, xbar, beta, norms, verdict, global }, text))
}

#[derive(Serialize)]
struct SweepSummary<'a> {
    spec: &'a SweepSpec,
    counts: Vec<(String, usize)>,
    masked: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    soundness: Option<SoundnessReport>,
    cells: Vec<i64>,
}

pub fn build_spec(a: &SweepArgs, g: &Global) -> Res<SweepSpec> {
    let name = match a.plane {
        PlaneName::Eig => "eig",
        PlaneName::ComplexEig => "complex-eig",
        PlaneName::A0a2 => "a0a2",
        PlaneName::Hb => "hb",
        PlaneName::Abeta => "abeta",
    };
    let plane = Plane::parse(name, a.k)?;
    let mut spec = SweepSpec::new(plane);
    if let Some(r) = a.x_range {
        spec.x = Axis::new(r.0, r.1, a.grid.0)?;
    }
    if let Some(r) = a.y_range {
        spec.y = Axis::new(r.0, r.1, a.grid.1)?;
    }
    spec.x.n = a.grid.0;
    spec.y.n = a.grid.1;
    if let Some(c) = &a.conditions {
        spec.conditions = c.iter().map(|s| s.trim().to_string()).collect();
    }
    spec.tol = g.tol;
    spec.validate()?;
    Ok(spec)
}

pub fn sweep(a: &SweepArgs, g: &Global) -> Res<()> {
    let spec = build_spec(a, g)?;
    let grid: RegionGrid = dde_expand::run_sweep(&spec)?;
    let soundness = if a.soundness > 0.0 { Some(soundness_check(&grid, a.soundness.min(1.0), g.seed)?) } else { None };
    if let Some(s) = soundness.as_ref().filter(|s| !s.violations.is_empty()) {
        return Err(CliError::Compute(format!(
            "{} sampled cells are flagged stable but have a root outside the open unit disk",
            s.violations.len()
        )));
    }
    let counts: Vec<(String, usize)> =
        spec.conditions.iter().enumerate().map(|(i, c)| (c.clone(), grid.count(1 << i))).collect();
    let mut text = format!("{} x {} cells on plane {:?}, {} masked\n", spec.x.n, spec.y.n, spec.plane, grid.masked());
    for (c, n) in &counts {
        let _ = writeln!(text, "  {c:<8} {n}");
    }
    if let Some(s) = &soundness {
        let _ = writeln!(text, "soundness: {} sampled, {} flagged, {} violations", s.sampled, s.flagged, s.violations.len());
    }
    match g.format.unwrap_or(Format::Csv) {
        Format::Csv => match &g.out {
            Some(path) => {
                grid.write(path)?;
                eprint!("{text}");
                Ok(())
            }
            None => write_body(&grid.to_csv(), g),
        },
        Format::Json => {
            let cells = grid.cells.iter().map(|c| c.map_or(-1, i64::from)).collect();
            let summary = SweepSummary { spec: &spec, counts, masked: grid.masked(), soundness, cells };
            write_body(&dde_expand::format::to_json_pretty(&summary), g)
        }
        Format::Text => write_body(&text, g),
    }
}
