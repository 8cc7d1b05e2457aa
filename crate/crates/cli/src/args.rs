use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "dde-expand", version, about = "Stability analysis of delay difference equations by delay expansion")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Output format; each command has its own default.
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// Write the result to this file instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Numerical tolerance.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Toggle {
    On,
    Off,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Schur stability of a monic polynomial by the expansion test.
    CheckPoly(PolyArgs),
    /// Jury table and verdict for a monic polynomial.
    Jury(JuryArgs),
    /// Coefficient vectors V_m, norms and quotient polynomials q_m.
    Expand(ExpandArgs),
    /// Local stability of fixed points of a nonlinear map.
    ClassifyLocal(LocalArgs),
    /// Simulate orbits of a delay map.
    Orbit(OrbitArgs),
    /// Local and global conditions for x_{n+1} = x_n f(x_{n-2}) + h.
    Ricker(RickerArgs),
    /// Local and global conditions for x_{n+1} = a x_n + (1-a) f(x_{n-k}).
    Clark(ClarkArgs),
    /// Condition flags over a parameter-plane grid.
    Sweep(SweepArgs),
    /// Reproduce a built-in worked example.
    Example(ExampleArgs),
}

/// A polynomial given by its non-leading coefficients or by `V_0`.
#[derive(Debug, Args)]
pub struct PolyInput {
    /// Coefficients c_0,...,c_{n-1} of x^n + c_0 x^{n-1} + ... + c_{n-1}.
    /// For x_{n+1} = a_0 x_n + ... + a_{k-1} x_{n-k+1} these are -a_0,...,-a_{k-1}.
    #[arg(long, allow_hyphen_values = true, required_unless_present = "v0", conflicts_with = "v0")]
    pub coeffs: Option<List>,
    /// Recurrence coefficients a_0,...,a_{k-1}, the negated polynomial coefficients.
    #[arg(long, allow_hyphen_values = true)]
    pub v0: Option<List>,
}

#[derive(Debug, Args)]
pub struct SchurArgs {
    /// Largest expansion order tried.
    #[arg(long, default_value_t = 200)]
    pub m_max: usize,
    /// Consult the polynomial root finder when the expansion alone cannot decide.
    #[arg(long, value_enum, default_value = "on")]
    pub oracle: Toggle,
}

#[derive(Debug, Args)]
pub struct PolyArgs {
    #[command(flatten)]
    pub poly: PolyInput,
    #[command(flatten)]
    pub schur: SchurArgs,
}

#[derive(Debug, Args)]
pub struct JuryArgs {
    #[command(flatten)]
    pub poly: PolyInput,
}

#[derive(Debug, Args)]
pub struct ExpandArgs {
    #[command(flatten)]
    pub poly: PolyInput,
    /// Last order listed.
    #[arg(long, default_value_t = 10)]
    pub m_max: usize,
    /// Also list the zeros of each q_m.
    #[arg(long)]
    pub roots: bool,
}

/// A map F_0 given as an expression in x0, x1, ... (newest first).
#[derive(Debug, Args)]
pub struct MapInput {
    /// Expression for F_0; x (or x0) is x_n, y (or x1) is x_{n-1}, and so on.
    #[arg(long = "f")]
    pub f: String,
    /// Number of arguments; defaults to the highest variable used.
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Debug, Args)]
pub struct LocalArgs {
    #[command(flatten)]
    pub map: MapInput,
    /// Fixed points to classify; found by scanning --x-range when omitted.
    #[arg(long, allow_hyphen_values = true)]
    pub xbar: Option<List>,
    /// Classify the fixed points of the expanded map F_m.
    #[arg(long, default_value_t = 0)]
    pub m: usize,
    /// Scan interval for fixed points.
    #[arg(long, allow_hyphen_values = true, default_value = "0:10")]
    pub x_range: Range,
    /// Scan points for fixed points.
    #[arg(long, default_value_t = 4096)]
    pub scan: usize,
    #[command(flatten)]
    pub schur: SchurArgs,
}

#[derive(Debug, Args)]
pub struct OrbitArgs {
    #[command(flatten)]
    pub map: MapInput,
    /// Initial history x_{-k+1},...,x_0, oldest first.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "batch")]
    pub init: Option<List>,
    /// Number of orbits from random histories drawn uniformly from --x-range.
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long, allow_hyphen_values = true, default_value = "0:1")]
    pub x_range: Range,
    /// Maximum number of steps.
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    /// Stop once the last 10 values spread less than this; 0 never stops early.
    #[arg(long, default_value_t = 1e-10)]
    pub conv_tol: f64,
}

#[derive(Debug, Args)]
pub struct RickerArgs {
    /// Exponent b of f(t) = e^{b-t}.
    #[arg(long, required_unless_present = "f", allow_hyphen_values = true)]
    pub b: Option<f64>,
    /// Stocking constant h.
    #[arg(long, allow_hyphen_values = true)]
    pub h: f64,
    /// Custom positive decreasing f(t) instead of e^{b-t}.
    #[arg(long = "f", conflicts_with = "b")]
    pub f: Option<String>,
    /// Scan points for the global checks.
    #[arg(long, default_value_t = 4096)]
    pub scan: usize,
}

#[derive(Debug, Args)]
pub struct ClarkArgs {
    /// Survivorship a in (0, 1).
    #[arg(long, allow_hyphen_values = true)]
    pub a: f64,
    /// Recruitment delay.
    #[arg(long)]
    pub k: usize,
    /// Positive decreasing recruitment function f(t).
    #[arg(long = "f")]
    pub f: String,
    /// Interval on which f' is sampled; defaults to [0, f(0)].
    #[arg(long, allow_hyphen_values = true)]
    pub sample_range: Option<Range>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub plane: PlaneName,
    /// Delay for the abeta plane.
    #[arg(long)]
    pub k: Option<usize>,
    /// Cells along x and y.
    #[arg(long, default_value = "400x400")]
    pub grid: Grid,
    #[arg(long, allow_hyphen_values = true)]
    pub x_range: Option<Range>,
    #[arg(long, allow_hyphen_values = true)]
    pub y_range: Option<Range>,
    /// Comma-separated condition names; bit i of the flags is condition i.
    #[arg(long, value_delimiter = ',')]
    pub conditions: Option<Vec<String>>,
    /// Fraction of cells re-checked against the root finder.
    #[arg(long, default_value_t = 0.01)]
    pub soundness: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlaneName {
    Eig,
    ComplexEig,
    A0a2,
    Hb,
    Abeta,
}

#[derive(Debug, Args)]
pub struct ExampleArgs {
    #[arg(long, value_enum)]
    pub name: ExampleName,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExampleName {
    /// Coefficient vectors and norms for x_{n+1} = 5/4 x_n - 3/8 x_{n-1}.
    Table1,
    /// Quotient polynomials q_m and their zeros for the same system.
    Table2,
    /// Roots and verdicts of the two-dimensional system and its first expansion.
    Easy1,
    /// Admissible intervals of c for the quintic example.
    AlgebraicC,
    /// Fixed points created by expanding F_0(x, y) = y e^{2-x} + 1.
    NewFixedPoints,
    /// Clark's model with f(t) = 2/(1+t), k = 3, a = 0.7.
    ClarkFinal,
}

/// Comma-separated reals.
#[derive(Debug, Clone, PartialEq)]
pub struct List(pub Vec<f64>);

impl FromStr for List {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v = s
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|e| format!("'{}': {e}", t.trim())))
            .collect::<Result<Vec<_>, _>>()?;
        if v.iter().any(|x| !x.is_finite()) {
            return Err("values must be finite".into());
        }
        Ok(List(v))
    }
}

/// `lo:hi` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range(pub f64, pub f64);

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (lo, hi) = s.split_once(':').ok_or("expected lo:hi")?;
        let lo: f64 = lo.trim().parse().map_err(|e| format!("lower bound: {e}"))?;
        let hi: f64 = hi.trim().parse().map_err(|e| format!("upper bound: {e}"))?;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(format!("need finite lo < hi, got {lo}:{hi}"));
        }
        Ok(Range(lo, hi))
    }
}

/// `NxM` cell counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid(pub usize, pub usize);

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (n, m) = s.split_once(['x', 'X']).ok_or("expected NxM")?;
        let n: usize = n.trim().parse().map_err(|e| format!("{e}"))?;
        let m: usize = m.trim().parse().map_err(|e| format!("{e}"))?;
        if n < 2 || m < 2 {
            return Err("each grid dimension must be at least 2".into());
        }
        Ok(Grid(n, m))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn value_parsers() {
        assert_eq!("-1.25, 0.375".parse::<List>().unwrap(), List(vec![-1.25, 0.375]));
        assert!("1,,2".parse::<List>().is_err());
        assert_eq!("-1:2.5".parse::<Range>().unwrap(), Range(-1.0, 2.5));
        assert!("2:1".parse::<Range>().is_err());
        assert_eq!("40x30".parse::<Grid>().unwrap(), Grid(40, 30));
        assert!("1x30".parse::<Grid>().is_err());
    }
}
