//! Jury table test for roots in the open unit disk.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::poly::{Check, MonicPoly};
use crate::scalar::Real;
use crate::verdict::{Reason, Verdict, VerdictKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JuryConstraint<T> {
    pub label: String,
    /// Must be strictly positive for stability.
    pub value: T,
    pub status: Check,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JuryTable<T> {
    /// Coefficient rows in ascending powers; row 0 is the polynomial itself,
    /// later rows are scaled so their largest entry has magnitude one.
    pub rows: Vec<Vec<T>>,
    pub constraints: Vec<JuryConstraint<T>>,
    /// A reduction row vanished entirely.
    pub degenerate: bool,
}

/// Builds the table: `p(1) > 0`, `(-1)^n p(-1) > 0`, `|p(0)| < 1`, then one
/// constraint `|r_0| > |r_last|` per reduction row until three entries remain.
pub fn jury_table<T: Real>(p: &MonicPoly<T>, tol: T) -> Result<JuryTable<T>> {
    let n = p.degree();
    if n == 0 {
        return Err(invalid("Jury test needs degree >= 1"));
    }
    let mut row: Vec<T> = p.coeffs().iter().rev().copied().collect();
    row.push(T::one());

    let at_one = p.eval(&T::one());
    let at_minus_one = if n % 2 == 0 { p.eval(&-T::one()) } else { -p.eval(&-T::one()) };
    let det = T::one() - row[0].abs();
    let mut constraints = vec![
        constraint("p(1)", at_one, tol),
        constraint("(-1)^n p(-1)", at_minus_one, tol),
        constraint("1 - |p(0)|", det, tol),
    ];

    let mut rows = vec![row.clone()];
    let mut degenerate = false;
    while row.len() > 3 {
        let last = row.len() - 1;
        let next: Vec<T> = (0..last).map(|k| row[0] * row[k] - row[last] * row[last - k]).collect();
        let scale = next.iter().fold(T::zero(), |m, c| m.max(c.abs()));
        if !(scale > T::zero()) {
            degenerate = true;
            break;
        }
        let next: Vec<T> = next.into_iter().map(|c| c / scale).collect();
        let label = format!("row {}: |r_0| - |r_{}|", rows.len(), next.len() - 1);
        constraints.push(constraint(&label, next[0].abs() - next[next.len() - 1].abs(), tol));
        rows.push(next.clone());
        row = next;
    }
    Ok(JuryTable { rows, constraints, degenerate })
}

fn constraint<T: Real>(label: &str, value: T, tol: T) -> JuryConstraint<T> {
    JuryConstraint { label: label.to_string(), value, status: Check::from_margin(value, tol) }
}

pub fn jury_stable<T: Real>(p: &MonicPoly<T>, tol: T) -> Result<Verdict<T>> {
    Ok(jury_verdict(&jury_table(p, tol)?))
}

pub fn jury_verdict<T: Real>(table: &JuryTable<T>) -> Verdict<T> {
    let (kind, reason) = if table.constraints.iter().any(|c| c.status == Check::Fails) {
        (VerdictKind::Unstable, Reason::JuryConstraint)
    } else if table.degenerate {
        (VerdictKind::MarginalSuspected, Reason::JuryPivot)
    } else if table.constraints.iter().any(|c| c.status == Check::Marginal) {
        (VerdictKind::MarginalSuspected, Reason::JuryConstraint)
    } else {
        (VerdictKind::Stable, Reason::JuryAllHold)
    };
    Verdict::new(kind, reason, Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expand::{classify_schur, CoeffVector, SchurOptions};
    use crate::sample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(c: &[f64]) -> MonicPoly<f64> {
        MonicPoly::new(c.to_vec()).unwrap()
    }

    #[test]
    fn quadratic_with_roots_half_and_three_quarters() {
        let v = jury_stable(&p(&[-1.25, 0.375]), 1e-9).unwrap();
        assert_eq!(v.kind, VerdictKind::Stable);
    }

    #[test]
    fn cubic_with_root_minus_five_quarters() {
        let v = jury_stable(&p(&[0.0, -19.0 / 16.0, 15.0 / 32.0]), 1e-9).unwrap();
        assert_eq!(v.kind, VerdictKind::Unstable);
    }

    #[test]
    fn root_at_one_is_marginal() {
        assert_eq!(jury_stable(&p(&[-1.0]), 1e-9).unwrap().kind, VerdictKind::MarginalSuspected);
    }

    #[test]
    fn rows_shrink_by_one() {
        let t = jury_table(&p(&[0.1, -0.2, 0.05, 0.01, -0.02]), 1e-9).unwrap();
        assert_eq!(t.rows.len(), 4);
        for w in t.rows.windows(2) {
            assert_eq!(w[1].len() + 1, w[0].len());
        }
        assert_eq!(t.rows.last().unwrap().len(), 3);
        assert_eq!(t.constraints.len(), 3 + 3);
    }

    #[test]
    fn textbook_cubic_row() {
        // z^3 + 0.5z^2 - 0.2z + 0.1: b_k = a_0 a_k - a_3 a_{3-k}
        let t = jury_table(&p(&[0.5, -0.2, 0.1]), 1e-9).unwrap();
        let b: [f64; 3] = [0.1 * 0.1 - 1.0, 0.1 * -0.2 - 0.5, 0.1 * 0.5 + 0.2];
        let scale = b.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        for (got, want) in t.rows[1].iter().zip(b) {
            assert!((got - want / scale).abs() < 1e-15);
        }
    }

    #[test]
    fn vanishing_reduction_row_is_marginal() {
        // z^4 - 1 style symmetry: constant +-1 makes the reduced row vanish.
        let v = jury_stable(&p(&[0.0, 0.0, 0.0, 1.0]), 1e-9).unwrap();
        assert_eq!(v.kind, VerdictKind::MarginalSuspected);
    }

    #[test]
    fn zero_degree_rejected() {
        assert!(jury_stable(&MonicPoly::<f64>::one(), 1e-9).is_err());
    }

    #[test]
    fn agrees_with_roots_and_expansion_on_gapped_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let opts = SchurOptions::default().m_max(20_000);
        for _ in 0..1000 {
            let degree = 1 + (rand::Rng::gen_range(&mut rng, 0..8));
            let poly = sample::gapped_poly(&mut rng, degree, 0.02, 2.0);
            let by_roots = poly.spectral_radius(1e-9).unwrap() < 1.0;
            let jury = jury_stable(&poly, 1e-9).unwrap();
            assert_eq!(jury.is_stable(), by_roots, "{poly}");
            assert_eq!(jury.is_unstable(), !by_roots, "{poly}");
            let schur = classify_schur(&CoeffVector::from_poly(&poly).unwrap(), &opts).unwrap();
            assert_eq!(schur.kind, jury.kind, "{poly}");
        }
    }
}
