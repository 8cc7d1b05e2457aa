//! Delay expansion of linear recurrences.
//!
//! Substituting `x_n = sum_j a_j x_{n-1-j}` back into
//! `x_{n+1} = sum_j a_j x_{n-j}` gives a recurrence with one more step of delay
//! whose `k` trailing coefficients obey
//!
//! ```text
//! b_{m+1,j}   = a_j b_{m,0} + b_{m,j+1}     (j < k-1)
//! b_{m+1,k-1} = a_{k-1} b_{m,0}
//! ```
//!
//! i.e. `V_{m+1} = J_0^t V_m` with `J_0` the companion matrix. The origin is
//! Schur stable if and only if `||V_m||_1 < 1` for some finite `m`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::poly::MonicPoly;
use crate::scalar::{Real, Scalar};
use crate::verdict::{Reason, Verdict, VerdictKind};

pub use crate::verdict::Verdict as SchurVerdict;

/// Coefficients `(b_{m,0}, ..., b_{m,k-1})` of the `m`-th expanded system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffVector<T> {
    entries: Vec<T>,
    order: usize,
}

impl<T: Scalar> CoeffVector<T> {
    /// An order-0 vector `V_0 = (a_0, ..., a_{k-1})`.
    pub fn new(entries: Vec<T>) -> Result<Self> {
        Self::with_order(entries, 0)
    }

    pub fn with_order(entries: Vec<T>, order: usize) -> Result<Self> {
        if entries.is_empty() {
            return Err(invalid("coefficient vector needs k >= 1 entries"));
        }
        if let Some(i) = entries.iter().position(|c| !c.is_finite_value()) {
            return Err(Error::NonFinite(format!("coefficient a_{i}")));
        }
        Ok(CoeffVector { entries, order })
    }

    /// `V_0` of the recurrence whose characteristic polynomial is `p`:
    /// the non-leading coefficients negated.
    pub fn from_poly(p: &MonicPoly<T>) -> Result<Self> {
        Self::new(p.coeffs().iter().map(|c| T::zero() - c.clone()).collect())
    }

    pub fn k(&self) -> usize {
        self.entries.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn first(&self) -> &T {
        &self.entries[0]
    }

    pub fn l1_norm(&self) -> T {
        self.entries.iter().fold(T::zero(), |acc, c| acc + c.magnitude())
    }

    pub fn sum(&self) -> T {
        self.entries.iter().fold(T::zero(), |acc, c| acc + c.clone())
    }

    /// One step of the recurrence. `v0` is the original `V_0`: the update
    /// always multiplies by the original coefficients.
    pub fn expand_once(&self, v0: &CoeffVector<T>) -> Result<Self> {
        if v0.k() != self.k() {
            return Err(invalid(format!(
                "V_0 has {} entries but V_m has {}",
                v0.k(),
                self.k()
            )));
        }
        let lead = self.entries[0].clone();
        let k = self.k();
        let entries: Vec<T> = (0..k)
            .map(|j| {
                let carried = if j + 1 < k { self.entries[j + 1].clone() } else { T::zero() };
                v0.entries[j].clone() * lead.clone() + carried
            })
            .collect();
        if entries.iter().any(|c| !c.is_finite_value()) {
            return Err(Error::ExpansionDiverged { order: self.order + 1 });
        }
        Ok(CoeffVector { entries, order: self.order + 1 })
    }

    /// `V_m = (J_0^t)^m V_0` by `m` applications of the recurrence.
    pub fn expand_m(&self, m: usize) -> Result<Self> {
        let mut v = self.clone();
        for _ in 0..m {
            v = v.expand_once(self)?;
        }
        Ok(v)
    }

    /// `V_0, V_1, V_2, ...` with `self` as `V_0`. A non-finite step is
    /// yielded as an error and ends the sequence.
    pub fn expansion(&self) -> Expansion<'_, T> {
        Expansion { v0: self, next: Some(Ok(self.clone())) }
    }

    /// Characteristic polynomial `p_m(x) = x^{k+m} - sum_j b_{m,j} x^{k-j-1}`
    /// of the expanded system, where `m` is this vector's order.
    pub fn p_polynomial(&self) -> MonicPoly<T> {
        let coeffs = std::iter::repeat(T::zero())
            .take(self.order)
            .chain(self.entries.iter().map(|b| T::zero() - b.clone()))
            .collect();
        MonicPoly::new(coeffs).expect("entries are finite")
    }

    /// `q_m(x) = x^m + sum_{i<m} b_{i,0} x^{m-i-1}`, with `self` as `V_0`.
    /// Satisfies `p_m = p_0 q_m`.
    pub fn q_polynomial(&self, m: usize) -> Result<MonicPoly<T>> {
        let mut coeffs = Vec::with_capacity(m);
        for v in self.expansion().take(m) {
            coeffs.push(v?.first().clone());
        }
        MonicPoly::new(coeffs)
    }
}

pub struct Expansion<'a, T> {
    v0: &'a CoeffVector<T>,
    next: Option<Result<CoeffVector<T>>>,
}

impl<T: Scalar> Iterator for Expansion<'_, T> {
    type Item = Result<CoeffVector<T>>;

    fn next(&mut self) -> Option<Self::Item> {
        let current = self.next.take()?;
        if let Ok(v) = &current {
            self.next = Some(v.expand_once(self.v0));
        }
        Some(current)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SchurOptions<T> {
    pub m_max: usize,
    /// Margin on the strict inequality `||V_m||_1 < 1 - tol`, also used for
    /// the necessary conditions and the root residual.
    pub tol: T,
    pub use_oracle: bool,
    /// Norm above which the root oracle is consulted once.
    pub divergence_bound: T,
    /// Root moduli within this distance of one are reported as marginal.
    pub marginal_tol: T,
}

impl<T: Real> Default for SchurOptions<T> {
    fn default() -> Self {
        SchurOptions {
            m_max: 200,
            tol: T::lit(1e-9),
            use_oracle: true,
            divergence_bound: T::lit(1e12),
            marginal_tol: T::lit(1e-9),
        }
    }
}

impl<T: Real> SchurOptions<T> {
    pub fn m_max(mut self, m_max: usize) -> Self {
        self.m_max = m_max;
        self
    }

    pub fn tol(mut self, tol: T) -> Self {
        self.tol = tol;
        self
    }

    pub fn oracle(mut self, use_oracle: bool) -> Self {
        self.use_oracle = use_oracle;
        self
    }
}

/// Decides whether all roots of `p_0` lie in the open unit disk.
///
/// Screens the three necessary conditions, then expands until
/// `||V_m||_1 < 1 - tol`. Norm growth alone never proves instability: past
/// `divergence_bound` the root oracle is consulted (when enabled) and
/// otherwise the verdict is `Inconclusive`. A `Stable` verdict always carries
/// a norm witness.
pub fn classify_schur<T: Real>(v0: &CoeffVector<T>, opts: &SchurOptions<T>) -> Result<Verdict<T>> {
    if !(opts.tol > T::zero()) {
        return Err(invalid("tol must be positive"));
    }
    let p0 = v0.p_polynomial();
    let screen = p0.necessary_conditions(opts.tol);
    if let Some(reason) = screen.strict_failure() {
        return Ok(Verdict::new(VerdictKind::Unstable, reason, Vec::new()));
    }
    if let Some(reason) = screen.marginal() {
        return Ok(Verdict::new(VerdictKind::MarginalSuspected, reason, Vec::new()));
    }

    let mut norms = Vec::new();
    let mut oracle_cleared = false;
    let mut v = v0.clone();
    for m in 0..=opts.m_max {
        let norm = v.l1_norm();
        norms.push(norm);
        if norm < T::one() - opts.tol {
            return Ok(Verdict::stable_witness(m, norms));
        }
        if norm > opts.divergence_bound && !oracle_cleared {
            if !opts.use_oracle {
                return Ok(Verdict::new(VerdictKind::Inconclusive, Reason::NormDivergence, norms));
            }
            match p0.root_verdict(opts.tol, opts.marginal_tol)?.kind {
                VerdictKind::Unstable => {
                    return Ok(Verdict::new(VerdictKind::Unstable, Reason::NormDivergence, norms))
                }
                VerdictKind::MarginalSuspected => {
                    return Ok(Verdict::new(
                        VerdictKind::MarginalSuspected,
                        Reason::OracleMarginal,
                        norms,
                    ))
                }
                // Transient growth of a stable system: keep expanding.
                _ => oracle_cleared = true,
            }
        }
        if m < opts.m_max {
            v = v.expand_once(v0)?;
        }
    }

    if opts.use_oracle {
        let oracle = p0.root_verdict(opts.tol, opts.marginal_tol)?;
        if matches!(oracle.kind, VerdictKind::Unstable | VerdictKind::MarginalSuspected) {
            return Ok(Verdict::new(oracle.kind, oracle.reason, norms));
        }
    }
    Ok(Verdict::new(VerdictKind::Inconclusive, Reason::MmaxExhausted, norms))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FixedPointClass {
    /// Only the origin is a fixed point.
    TrivialOnly,
    /// Every real number is a fixed point.
    AllReals,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointStructure<T> {
    /// `alpha_k = sum_j a_j`.
    pub alpha_k: T,
    /// `beta_m = sum_{j<=m} b_{j,0}` for `m = 0..=m_max`.
    pub beta_sequence: Vec<T>,
    /// Classification of `F_0, ..., F_{m_max+1}`.
    pub stages: Vec<FixedPointClass>,
}

/// Fixed points of the expanded linear maps. Uses
/// `F_{m+1}(1,...,1) = (alpha_k - 1)(1 + beta_m) + 1`.
pub fn fixed_point_structure<T: Real>(
    v0: &CoeffVector<T>,
    m_max: usize,
    tol: T,
) -> Result<FixedPointStructure<T>> {
    let alpha_k = v0.sum();
    let alpha_is_one = (alpha_k - T::one()).abs() < tol;
    let class = |all: bool| if all { FixedPointClass::AllReals } else { FixedPointClass::TrivialOnly };

    let mut beta_sequence = Vec::with_capacity(m_max + 1);
    let mut stages = vec![class(alpha_is_one)];
    let mut beta = T::zero();
    for v in v0.expansion().take(m_max + 1) {
        beta = beta + *v?.first();
        beta_sequence.push(beta);
        stages.push(class(alpha_is_one || (beta + T::one()).abs() < tol));
    }
    Ok(FixedPointStructure { alpha_k, beta_sequence, stages })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn v(e: &[f64]) -> CoeffVector<f64> {
        CoeffVector::new(e.to_vec()).unwrap()
    }

    #[test]
    fn expand_once_table_rows_exact() {
        let v0 = CoeffVector::new(vec![q(5, 4), q(-3, 8)]).unwrap();
        let v1 = v0.expand_once(&v0).unwrap();
        assert_eq!(v1.entries(), &[q(19, 16), q(-15, 32)]);
        assert_eq!(v1.order(), 1);
        let v2 = v1.expand_once(&v0).unwrap();
        assert_eq!(v2.entries(), &[q(65, 64), q(-57, 128)]);
    }

    #[test]
    fn expand_once_zero_vector() {
        let z = v(&[0.0, 0.0, 0.0]);
        assert_eq!(z.expand_once(&z).unwrap().entries(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn expand_once_rejects_mismatched_v0() {
        assert!(v(&[0.1, 0.2]).expand_once(&v(&[0.1])).is_err());
    }

    #[test]
    fn expand_once_overflow_is_divergence() {
        let big = v(&[1e200, 1e200]);
        let e = big.expand_once(&big).unwrap_err();
        assert!(matches!(e, Error::ExpansionDiverged { .. }));
    }

    #[test]
    fn expansion_yields_divergence_then_stops() {
        let big = v(&[1e200, 1e200]);
        let mut it = big.expansion();
        assert!(it.next().unwrap().is_ok());
        assert!(matches!(it.next(), Some(Err(Error::ExpansionDiverged { order: 1 }))));
        assert!(it.next().is_none());
    }

    #[test]
    fn expand_m_table_row_four() {
        let v0 = CoeffVector::new(vec![q(5, 4), q(-3, 8)]).unwrap();
        assert_eq!(v0.expand_m(4).unwrap().entries(), &[q(665, 1024), q(-633, 2048)]);
        assert_eq!(v0.expand_m(0).unwrap(), v0);
    }

    /// Dense `(J_0^t)^m V_0` with `J_0` laid out as the companion matrix:
    /// first row `a`, ones on the subdiagonal.
    fn dense_oracle(a: &[f64], m: usize) -> Vec<f64> {
        let k = a.len();
        let mut j = vec![vec![0.0; k]; k];
        j[0].copy_from_slice(a);
        for i in 1..k {
            j[i][i - 1] = 1.0;
        }
        let mut x = a.to_vec();
        for _ in 0..m {
            x = (0..k).map(|r| (0..k).map(|c| j[c][r] * x[c]).sum()).collect();
        }
        x
    }

    #[test]
    fn expand_m_matches_dense_matrix_power() {
        let (a, beta) = (0.5, -0.8);
        let e = [a, 0.0, (1.0 - a) * beta];
        let got = v(&e).expand_m(2).unwrap();
        let want = dense_oracle(&e, 2);
        for (g, w) in got.entries().iter().zip(&want) {
            assert_abs_diff_eq!(g, w, epsilon = 1e-15);
        }
    }

    #[test]
    fn q_polynomial_table_rows() {
        let v0 = CoeffVector::new(vec![q(5, 4), q(-3, 8)]).unwrap();
        assert_eq!(v0.q_polynomial(2).unwrap().coeffs(), &[q(5, 4), q(19, 16)]);
        assert_eq!(v0.q_polynomial(0).unwrap(), MonicPoly::one());
        assert_eq!(
            v0.q_polynomial(4).unwrap().coeffs(),
            &[q(5, 4), q(19, 16), q(65, 64), q(211, 256)]
        );
    }

    #[test]
    fn p_polynomial_layout() {
        let v1 = v(&[19.0 / 16.0, -15.0 / 32.0]);
        let v1 = CoeffVector::with_order(v1.entries().to_vec(), 1).unwrap();
        assert_eq!(v1.p_polynomial().coeffs(), &[0.0, -19.0 / 16.0, 15.0 / 32.0]);
    }

    #[test]
    fn classify_table_one() {
        let verdict = classify_schur(&v(&[1.25, -0.375]), &SchurOptions::default().m_max(10)).unwrap();
        assert_eq!(verdict.kind, VerdictKind::Stable);
        assert_eq!(verdict.witness_m, Some(4));
        assert_abs_diff_eq!(*verdict.norms.last().unwrap(), 1963.0 / 2048.0, epsilon = 1e-15);
        assert!(verdict.norms[..4].iter().all(|n| *n >= 1.0));
    }

    #[test]
    fn classify_expanded_example_unstable() {
        // x^3 - (19/16)x + 15/32, root -5/4: (-1)^3 p(-1) = -21/32 < 0.
        let v0 = v(&[0.0, 19.0 / 16.0, -15.0 / 32.0]);
        let verdict = classify_schur(&v0, &SchurOptions::default()).unwrap();
        assert_eq!(verdict.kind, VerdictKind::Unstable);
        assert_eq!(verdict.reason, Reason::NecessaryAtMinusOne);
    }

    #[test]
    fn classify_contraction_at_order_zero() {
        let verdict = classify_schur(&v(&[0.4, 0.45]), &SchurOptions::default()).unwrap();
        assert_eq!(verdict.kind, VerdictKind::Stable);
        assert_eq!(verdict.witness_m, Some(0));
        assert_abs_diff_eq!(verdict.norms[0], 0.85, epsilon = 1e-15);
    }

    #[test]
    fn classify_marginal_root_at_one() {
        let verdict = classify_schur(&v(&[1.0]), &SchurOptions::default()).unwrap();
        assert_eq!(verdict.kind, VerdictKind::MarginalSuspected);
    }

    #[test]
    fn classify_without_oracle_is_inconclusive_for_unstable_pass_of_screen() {
        // Roots 1.1 e^{+-i pi/2} (= +-1.1i) and 0.1: passes all three screens.
        let p = MonicPoly::new(vec![-0.1, 1.21, -0.121]).unwrap();
        assert!(p.necessary_conditions(1e-9).strict_failure().is_none());
        let v0 = CoeffVector::from_poly(&p).unwrap();
        let off = classify_schur(&v0, &SchurOptions::default().oracle(false)).unwrap();
        assert_eq!(off.kind, VerdictKind::Inconclusive);
        let on = classify_schur(&v0, &SchurOptions::default()).unwrap();
        assert_eq!(on.kind, VerdictKind::Unstable);
        assert!(matches!(on.reason, Reason::NormDivergence | Reason::OracleRootOutside));
    }

    #[test]
    fn classify_rejects_bad_tol() {
        assert!(classify_schur(&v(&[0.1]), &SchurOptions::default().tol(0.0)).is_err());
    }

    #[test]
    fn classify_leading_zero_coefficients() {
        // a_0 = 0: x^3 - 0.5x - 0.2, roots inside the disk.
        let v0 = v(&[0.0, 0.5, 0.2]);
        let verdict = classify_schur(&v0, &SchurOptions::default()).unwrap();
        assert_eq!(verdict.kind, VerdictKind::Stable);
        assert_eq!(verdict.witness_m, Some(0));
        assert!(v0.p_polynomial().spectral_radius(1e-9).unwrap() < 1.0);
    }

    #[test]
    fn fixed_point_structure_beta_hits_minus_one() {
        let (a0, a2) = (1.0, 0.0);
        let v0 = v(&[a0, -(a0 * a0 + a0 + 1.0), a2]);
        let s = fixed_point_structure(&v0, 5, 1e-12).unwrap();
        assert_abs_diff_eq!(s.beta_sequence[0], a0);
        assert_abs_diff_eq!(s.beta_sequence[1], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.beta_sequence[2], a2 - (a0 + 1.0) * (a0 * a0 + a0 + 1.0), epsilon = 1e-12);
        assert_abs_diff_eq!(s.alpha_k, a2 - (a0 * a0 + 1.0), epsilon = 1e-15);
        assert_eq!(s.stages[0], FixedPointClass::TrivialOnly);
        assert_eq!(s.stages[2], FixedPointClass::AllReals);
        assert_eq!(s.stages[3], FixedPointClass::TrivialOnly);
    }

    #[test]
    fn fixed_point_structure_alpha_one() {
        let s = fixed_point_structure(&v(&[0.5, 0.5]), 4, 1e-12).unwrap();
        assert!(s.stages.iter().all(|c| *c == FixedPointClass::AllReals));
        assert_eq!(s.stages.len(), 6);
    }

    #[test]
    fn fixed_point_structure_positive_betas() {
        let s = fixed_point_structure(&v(&[0.4, 0.45]), 10, 1e-12).unwrap();
        assert_abs_diff_eq!(s.alpha_k, 0.85);
        assert!(s.beta_sequence.iter().all(|b| *b > 0.0));
        assert!(s.stages.iter().all(|c| *c == FixedPointClass::TrivialOnly));
    }

    #[test]
    fn linear_value_identity_on_ones() {
        // F_{m+1}(1,...,1) = (alpha - 1)(1 + beta_m) + 1
        let v0 = v(&[0.7, -0.2, 0.35]);
        let s = fixed_point_structure(&v0, 6, 1e-12).unwrap();
        for m in 0..6 {
            let next = v0.expand_m(m + 1).unwrap().sum();
            assert_abs_diff_eq!(next, (s.alpha_k - 1.0) * (1.0 + s.beta_sequence[m]) + 1.0, epsilon = 1e-12);
        }
    }

    fn coeffs_strategy() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1.5f64..1.5, 1..=6)
    }

    proptest! {
        #[test]
        fn factorization_p_m_equals_p0_q_m(a in coeffs_strategy(), m in 0usize..=8) {
            let v0 = CoeffVector::new(a).unwrap();
            let lhs = v0.p_polynomial().mul(&v0.q_polynomial(m).unwrap());
            let rhs = v0.expand_m(m).unwrap().p_polynomial();
            prop_assert_eq!(lhs.degree(), rhs.degree());
            for (x, y) in lhs.coeffs().iter().zip(rhs.coeffs()) {
                prop_assert!((x - y).abs() < 1e-10, "{} vs {}", x, y);
            }
        }

        #[test]
        fn norm_identity(a in coeffs_strategy(), m in 0usize..=8) {
            let vm = CoeffVector::new(a).unwrap().expand_m(m).unwrap();
            let (lhs, rhs) = (vm.p_polynomial().l1_norm(), 1.0 + vm.l1_norm());
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs, "{} vs {}", lhs, rhs);
        }

        #[test]
        fn iterator_agrees_with_expand_m(a in coeffs_strategy(), m in 0usize..=8) {
            let v0 = CoeffVector::new(a).unwrap();
            let via_iter = v0.expansion().nth(m).unwrap().unwrap();
            prop_assert_eq!(via_iter, v0.expand_m(m).unwrap());
        }
    }
}
