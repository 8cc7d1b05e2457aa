pub mod dynamics;
pub mod error;
pub mod expand;
pub mod format;
pub mod jury;
pub mod models;
pub mod poly;
pub mod sample;
pub mod scalar;
pub mod sweep;
pub mod verdict;

pub use dynamics::expr::Expr;
pub use dynamics::{DelayMap, OrbitRecord, ScalarMap1D};
pub use sweep::{run_sweep, Plane, RegionGrid, SweepSpec};
pub use error::{Error, Result};
pub use expand::{classify_schur, CoeffVector, SchurOptions};
pub use jury::{jury_stable, jury_table, JuryTable};
pub use poly::MonicPoly;
pub use scalar::{Real, Scalar};
pub use verdict::{Reason, Verdict, VerdictKind};

pub type Poly = MonicPoly<f64>;
pub type CoeffVec = CoeffVector<f64>;
pub type Rational = num_rational::BigRational;
pub type ExactPoly = MonicPoly<Rational>;
pub type ExactCoeffVec = CoeffVector<Rational>;
