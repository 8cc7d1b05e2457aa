//! Outcome of a stability decision, shared by the expansion test, the Jury
//! table and the root-modulus oracle.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VerdictKind {
    Stable,
    Unstable,
    MarginalSuspected,
    Inconclusive,
}

/// Machine-readable code naming what settled a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reason {
    /// Some `||V_m||_1 < 1`.
    NormWitness,
    NecessaryDet,
    NecessaryAtOne,
    NecessaryAtMinusOne,
    /// Root oracle found a root outside the closed unit disk.
    OracleRootOutside,
    /// Root oracle found a root within the marginal band of the unit circle.
    OracleMarginal,
    /// Root oracle found every root strictly inside the disk.
    OracleRootsInside,
    NormDivergence,
    MmaxExhausted,
    JuryConstraint,
    JuryPivot,
    JuryAllHold,
    /// Closed-form inequality on a model's coefficients.
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict<T> {
    pub kind: VerdictKind,
    /// Smallest `m` with `||V_m||_1 < 1`; set exactly when the verdict came
    /// from a norm witness.
    pub witness_m: Option<usize>,
    pub reason: Reason,
    /// `||V_0||_1, ..., ||V_m||_1` as far as the expansion went.
    pub norms: Vec<T>,
}

impl<T> Verdict<T> {
    pub fn stable_witness(m: usize, norms: Vec<T>) -> Self {
        Verdict { kind: VerdictKind::Stable, witness_m: Some(m), reason: Reason::NormWitness, norms }
    }

    pub fn new(kind: VerdictKind, reason: Reason, norms: Vec<T>) -> Self {
        Verdict { kind, witness_m: None, reason, norms }
    }

    pub fn is_stable(&self) -> bool {
        self.kind == VerdictKind::Stable
    }

    pub fn is_unstable(&self) -> bool {
        self.kind == VerdictKind::Unstable
    }

    pub fn map_norms<U>(self, f: impl FnMut(T) -> U) -> Verdict<U> {
        Verdict {
            kind: self.kind,
            witness_m: self.witness_m,
            reason: self.reason,
            norms: self.norms.into_iter().map(f).collect(),
        }
    }
}
