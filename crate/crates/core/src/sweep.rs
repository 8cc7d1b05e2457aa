//! Parameter-plane grids of per-cell condition flags.
//!
//! Each cell center is mapped to a coefficient vector `V_0` and a set of
//! named conditions is evaluated there. The flags of a cell form a bitset
//! with bit `i` set when condition `i` of the spec holds. Cells whose
//! evaluation fails are masked and written as `-1`.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::expand::{classify_schur, CoeffVector, SchurOptions};
use crate::format;
use crate::models::clark::{clark_vk1_norm, clark_vk_norm, clark_v0, clark_v0_norm};
use crate::models::ricker::{
    ricker_coefficients, ricker_conditions, ricker_equilibrium, ricker_global_check, GlobalScan,
    RickerParams,
};
use crate::models::ConditionSet;

/// Highest expansion order accepted in an `m<j>` condition.
pub const MAX_WITNESS_ORDER: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Plane {
    /// `x = λ1`, `y = λ2`, real roots of a quadratic.
    Eig,
    /// `x = r`, `y = θ`, the pair `r e^{±iθ}`.
    ComplexEig,
    /// `x = -a2`, `y = a0` for the Ricker linearization.
    A0A2,
    /// `x = h`, `y = b` for `f(t) = e^{b - t}`.
    Hb,
    /// `x = a`, `y = β` for Clark's model with delay `k`.
    ABeta { k: usize },
}

impl Plane {
    pub fn parse(name: &str, k: Option<usize>) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "eig" => Ok(Plane::Eig),
            "complex-eig" | "complex" => Ok(Plane::ComplexEig),
            "a0a2" => Ok(Plane::A0A2),
            "hb" => Ok(Plane::Hb),
            "abeta" => match k {
                Some(k) if k >= 1 => Ok(Plane::ABeta { k }),
                _ => Err(invalid("plane abeta needs k >= 1")),
            },
            other => Err(invalid(format!(
                "unknown plane '{other}' (expected eig, complex-eig, a0a2, hb, abeta)"
            ))),
        }
    }

    pub fn default_conditions(&self) -> Vec<String> {
        let names: &[&str] = match self {
            Plane::Eig | Plane::ComplexEig => &["m0", "m1", "m2", "oracle"],
            Plane::A0A2 | Plane::Hb => &["v0", "v2", "v3", "exact", "oracle"],
            Plane::ABeta { .. } => &["v0", "vk", "vk1", "oracle"],
        };
        names.iter().map(|s| s.to_string()).collect()
    }

    /// Default `(x_range, y_range)`.
    pub fn default_ranges(&self) -> ((f64, f64), (f64, f64)) {
        match self {
            Plane::Eig => ((-1.0, 1.0), (-1.0, 1.0)),
            Plane::ComplexEig => ((0.0, 1.0), (0.0, std::f64::consts::PI)),
            Plane::A0A2 => ((0.0, 3.0), (0.0, 1.0)),
            Plane::Hb => ((0.0, 2.0), (0.0, 3.0)),
            Plane::ABeta { .. } => ((0.0, 1.0), (-2.0, 1.5)),
        }
    }

    fn accepts(&self, cond: &str) -> bool {
        match self {
            Plane::Eig | Plane::ComplexEig => cond == "schur" || cond == "oracle" || witness_order(cond).is_some(),
            Plane::A0A2 => matches!(cond, "v0" | "v2" | "v3" | "exact" | "oracle"),
            Plane::Hb => matches!(cond, "v0" | "v2" | "v3" | "exact" | "oracle" | "global"),
            Plane::ABeta { .. } => matches!(cond, "v0" | "vk" | "vk1" | "oracle"),
        }
    }
}

fn witness_order(cond: &str) -> Option<usize> {
    let m: usize = cond.strip_prefix('m')?.parse().ok()?;
    (m <= MAX_WITNESS_ORDER).then_some(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        let a = Axis { lo, hi, n };
        a.validate()?;
        Ok(a)
    }

    fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(invalid(format!("axis range needs lo < hi, got {}:{}", self.lo, self.hi)));
        }
        if self.n < 2 {
            return Err(invalid(format!("axis needs at least 2 cells, got {}", self.n)));
        }
        Ok(())
    }

    /// Center of cell `i`.
    pub fn center(&self, i: usize) -> f64 {
        self.lo + (self.hi - self.lo) * (2 * i + 1) as f64 / (2 * self.n) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub plane: Plane,
    pub x: Axis,
    pub y: Axis,
    pub conditions: Vec<String>,
    /// Norm conditions hold when the norm is below `1 - tol`.
    pub tol: f64,
}

impl SweepSpec {
    /// Default 400 x 400 grid over the plane's default ranges with its
    /// default conditions.
    pub fn new(plane: Plane) -> Self {
        let ((xl, xh), (yl, yh)) = plane.default_ranges();
        SweepSpec {
            plane,
            x: Axis { lo: xl, hi: xh, n: 400 },
            y: Axis { lo: yl, hi: yh, n: 400 },
            conditions: plane.default_conditions(),
            tol: 1e-9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.x.validate()?;
        self.y.validate()?;
        if self.conditions.is_empty() || self.conditions.len() > 32 {
            return Err(invalid("between 1 and 32 conditions are required"));
        }
        if let Some(bad) = self.conditions.iter().find(|c| !self.plane.accepts(c)) {
            return Err(invalid(format!("condition '{bad}' is not available on plane {:?}", self.plane)));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(invalid("tol must lie in (0, 1)"));
        }
        Ok(())
    }

    pub fn bit(&self, cond: &str) -> Option<u32> {
        self.conditions.iter().position(|c| c == cond).map(|i| 1 << i)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionGrid {
    pub spec: SweepSpec,
    /// Row-major, `y` index outer; `None` for masked cells.
    pub cells: Vec<Option<u32>>,
}

impl RegionGrid {
    pub fn get(&self, i: usize, j: usize) -> Option<u32> {
        self.cells[j * self.spec.x.n + i]
    }

    pub fn center(&self, idx: usize) -> (f64, f64) {
        let n = self.spec.x.n;
        (self.spec.x.center(idx % n), self.spec.y.center(idx / n))
    }

    /// Number of unmasked cells with every bit of `mask` set.
    pub fn count(&self, mask: u32) -> usize {
        self.cells.iter().filter(|c| c.is_some_and(|f| f & mask == mask)).count()
    }

    pub fn masked(&self) -> usize {
        self.cells.iter().filter(|c| c.is_none()).count()
    }

    /// `x,y,flags` with one row per cell, masked cells as `-1`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,flags\n");
        for (idx, c) in self.cells.iter().enumerate() {
            let (x, y) = self.center(idx);
            let flags = c.map_or(-1, i64::from);
            let _ = writeln!(out, "{},{},{}", format::sig17(x), format::sig17(y), flags);
        }
        out
    }

    /// Writes the CSV to `path` and the spec to `path` with a `.json`
    /// extension.
    pub fn write(&self, path: &Path) -> Result<()> {
        let io = |e: std::io::Error| invalid(format!("{}: {e}", path.display()));
        std::fs::write(path, self.to_csv()).map_err(io)?;
        let sidecar = path.with_extension("json");
        std::fs::write(&sidecar, format::to_json_pretty(&self.spec)).map_err(io)?;
        Ok(())
    }
}

/// What a cell center maps to.
struct Cell {
    v0: CoeffVector<f64>,
    /// Closed-form condition values for the model planes.
    model: Option<ConditionSet>,
    ricker: Option<RickerParams>,
}

fn cell_at(plane: Plane, x: f64, y: f64) -> Result<Cell> {
    let plain = |v: Vec<f64>| -> Result<Cell> { Ok(Cell { v0: CoeffVector::new(v)?, model: None, ricker: None }) };
    match plane {
        Plane::Eig => plain(vec![x + y, -x * y]),
        Plane::ComplexEig => plain(vec![2.0 * x * y.cos(), -x * x]),
        Plane::A0A2 => ricker_cell(y, -x, None),
        Plane::Hb => {
            let p = RickerParams::exp(y, x)?;
            let xbar = ricker_equilibrium(&p, 1e-9)?;
            let (a0, a2) = ricker_coefficients(&p, xbar);
            ricker_cell(a0, a2, Some(p))
        }
        Plane::ABeta { k } => {
            if !(x > 0.0 && x < 1.0) {
                return Err(Error::Infeasible(format!("a = {x} outside (0, 1)")));
            }
            let mut s = ConditionSet::new();
            for (name, v) in [
                ("v0", clark_v0_norm(x, y)),
                ("vk", clark_vk_norm(x, k, y)),
                ("vk1", clark_vk1_norm(x, k, y)),
            ] {
                s.push(name, v < 1.0, Some(v));
            }
            Ok(Cell { v0: CoeffVector::new(clark_v0(x, k, y))?, model: Some(s), ricker: None })
        }
    }
}

fn ricker_cell(a0: f64, a2: f64, ricker: Option<RickerParams>) -> Result<Cell> {
    if !(a0 > 0.0 && a0 < 1.0 && a2 <= 0.0) {
        return Err(Error::Infeasible(format!("(a0, a2) = ({a0}, {a2}) outside 0 < a0 < 1, a2 <= 0")));
    }
    let mut s = ConditionSet::new();
    for c in ricker_conditions(a0, a2).conditions {
        let name = c.name.trim_end_matches("_cond").to_string();
        s.push(&name, c.holds, c.value);
    }
    Ok(Cell { v0: CoeffVector::new(vec![a0, 0.0, a2])?, model: Some(s), ricker })
}

fn eval_cell(spec: &SweepSpec, x: f64, y: f64) -> Result<u32> {
    let cell = cell_at(spec.plane, x, y)?;
    let below = |v: f64| v < 1.0 - spec.tol;
    let max_order = spec.conditions.iter().filter_map(|c| witness_order(c)).max();
    let norms: Vec<f64> = match max_order {
        Some(m) => cell.v0.expansion().take(m + 1).map(|v| v.map(|v| v.l1_norm())).collect::<Result<_>>()?,
        None => Vec::new(),
    };
    let mut flags = 0u32;
    for (i, cond) in spec.conditions.iter().enumerate() {
        let holds = match cond.as_str() {
            "oracle" => below(cell.v0.p_polynomial().spectral_radius(spec.tol)?),
            "schur" => {
                let opts = SchurOptions::default().tol(spec.tol).oracle(false);
                classify_schur(&cell.v0, &opts)?.is_stable()
            }
            "global" => {
                let p = cell.ricker.as_ref().ok_or_else(|| invalid("global needs the hb plane"))?;
                ricker_global_check(p, GlobalScan::default())?.holds("global")
            }
            other => match witness_order(other) {
                Some(m) => norms[..=m].iter().any(|v| below(*v)),
                None => {
                    let model = cell.model.as_ref().expect("model planes carry closed forms");
                    model.value(other).is_some_and(below)
                }
            },
        };
        if holds {
            flags |= 1 << i;
        }
    }
    Ok(flags)
}

/// Evaluates every cell center. Cells are independent and computed in
/// parallel; the output order is fixed by the cell index.
pub fn run_sweep(spec: &SweepSpec) -> Result<RegionGrid> {
    spec.validate()?;
    let (nx, ny) = (spec.x.n, spec.y.n);
    let cells = (0..nx * ny)
        .into_par_iter()
        .map(|idx| eval_cell(spec, spec.x.center(idx % nx), spec.y.center(idx / nx)).ok())
        .collect();
    Ok(RegionGrid { spec: spec.clone(), cells })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoundnessReport {
    pub sampled: usize,
    /// Sampled cells with at least one sufficient condition set.
    pub flagged: usize,
    /// Cell indices flagged stable whose spectral radius is at least one.
    pub violations: Vec<usize>,
}

/// Re-checks a random `fraction` of the cells against the root oracle. A
/// cell with any condition other than `oracle` set must have all roots in
/// the open unit disk.
pub fn soundness_check(grid: &RegionGrid, fraction: f64, seed: u64) -> Result<SoundnessReport> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(invalid("fraction must lie in (0, 1]"));
    }
    let total = grid.cells.len();
    let amount = ((total as f64 * fraction).ceil() as usize).clamp(1, total);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = sample(&mut rng, total, amount).into_vec();
    picked.sort_unstable();
    let sufficient = !grid.spec.bit("oracle").unwrap_or(0);
    let mut report = SoundnessReport { sampled: amount, flagged: 0, violations: Vec::new() };
    for idx in picked {
        let Some(flags) = grid.cells[idx] else { continue };
        if flags & sufficient == 0 {
            continue;
        }
        report.flagged += 1;
        let (x, y) = grid.center(idx);
        let rho = cell_at(grid.spec.plane, x, y)?.v0.p_polynomial().spectral_radius(grid.spec.tol)?;
        if rho >= 1.0 {
            report.violations.push(idx);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(plane: Plane, n: usize) -> SweepSpec {
        let mut s = SweepSpec::new(plane);
        s.x.n = n;
        s.y.n = n;
        s
    }

    #[test]
    fn eig_examples() {
        let spec = SweepSpec { x: Axis::new(0.2, 0.4, 2).unwrap(), y: Axis::new(-0.4, -0.2, 2).unwrap(), ..small(Plane::Eig, 2) };
        let g = run_sweep(&spec).unwrap();
        // center (0.35, -0.25) and neighbours are all in the innermost region
        assert!(g.cells.iter().all(|c| *c == Some(0b1111)));

        let cell = cell_at(Plane::Eig, 0.3, -0.3).unwrap();
        assert!((cell.v0.entries()[0]).abs() < 1e-15 && (cell.v0.entries()[1] - 0.09).abs() < 1e-15);

        let spec = SweepSpec { x: Axis::new(0.85, 0.95, 2).unwrap(), y: Axis::new(0.85, 0.95, 2).unwrap(), ..small(Plane::Eig, 2) };
        let flags = eval_cell(&spec, 0.9, 0.9).unwrap();
        assert_eq!(flags & 1, 0);
        assert_ne!(flags & 0b1000, 0);
        let v = CoeffVector::new(vec![1.8, -0.81]).unwrap();
        let verdict = classify_schur(&v, &SchurOptions::default()).unwrap();
        assert!(verdict.witness_m.unwrap() >= 1);
    }

    #[test]
    fn eig_nesting_and_soundness() {
        let g = run_sweep(&small(Plane::Eig, 101)).unwrap();
        for c in g.cells.iter().flatten() {
            let (m0, m1, m2, oracle) = (c & 1 != 0, c & 2 != 0, c & 4 != 0, c & 8 != 0);
            assert!(!m0 || m1);
            assert!(!m1 || m2);
            assert!(!m2 || oracle);
        }
        assert!(g.count(1) < g.count(2) && g.count(2) < g.count(4));
        let r = soundness_check(&g, 1.0, 1).unwrap();
        assert!(r.violations.is_empty());
    }

    #[test]
    fn complex_plane_nesting() {
        let g = run_sweep(&small(Plane::ComplexEig, 64)).unwrap();
        for c in g.cells.iter().flatten() {
            assert!(c & 1 == 0 || c & 2 != 0);
            assert!(c & 2 == 0 || c & 4 != 0);
            assert!(c & 4 == 0 || c & 8 != 0);
        }
    }

    #[test]
    fn abeta_beta_one_sets_nothing() {
        let spec = SweepSpec {
            x: Axis::new(0.0, 1.0, 10).unwrap(),
            y: Axis::new(0.0, 2.0, 3).unwrap(),
            conditions: vec!["v0".into(), "vk".into(), "vk1".into()],
            ..SweepSpec::new(Plane::ABeta { k: 2 })
        };
        assert_eq!(spec.y.center(1), 1.0);
        let g = run_sweep(&spec).unwrap();
        for i in 0..10 {
            assert_eq!(g.get(i, 1), Some(0));
        }
    }

    #[test]
    fn a0a2_sufficient_inside_exact() {
        let g = run_sweep(&small(Plane::A0A2, 80)).unwrap();
        let exact = g.spec.bit("exact").unwrap();
        let oracle = g.spec.bit("oracle").unwrap();
        for c in g.cells.iter().flatten() {
            if c & 0b111 != 0 {
                assert_ne!(c & exact, 0);
            }
            if c & exact != 0 {
                assert_ne!(c & oracle, 0);
            }
        }
    }

    #[test]
    fn hb_plane_runs() {
        let mut spec = small(Plane::Hb, 20);
        spec.conditions.push("global".into());
        let g = run_sweep(&spec).unwrap();
        assert_eq!(g.masked(), 0);
        assert!(g.count(spec.bit("exact").unwrap()) > 0);
        assert!(soundness_check(&g, 1.0, 3).unwrap().violations.is_empty());
    }

    #[test]
    fn csv_is_deterministic() {
        let spec = small(Plane::ABeta { k: 5 }, 30);
        let a = run_sweep(&spec).unwrap().to_csv();
        let b = run_sweep(&spec).unwrap().to_csv();
        assert_eq!(a, b);
        assert!(a.starts_with("x,y,flags\n"));
        assert_eq!(a.lines().count(), 901);
    }

    #[test]
    fn rejects_bad_specs() {
        let mut s = small(Plane::A0A2, 4);
        s.conditions = vec!["vk".into()];
        assert!(run_sweep(&s).unwrap_err().is_validation());
        s = small(Plane::Eig, 1);
        assert!(run_sweep(&s).is_err());
        assert!(Plane::parse("abeta", None).is_err());
        assert_eq!(Plane::parse("abeta", Some(3)).unwrap(), Plane::ABeta { k: 3 });
    }
}
