//! Real monic polynomials.
//!
//! A [`MonicPoly`] of degree `n` stores `c_0, ..., c_{n-1}` and represents
//! `x^n + c_0 x^{n-1} + ... + c_{n-1}`; the leading one is implicit. The root
//! finder here is the independent eigenvalue oracle for everything else in the
//! crate and deliberately shares no code with the expansion recurrence.

use std::fmt;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::{Real, Scalar};
use crate::verdict::{Reason, Verdict, VerdictKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolyRepr<T>", into = "PolyRepr<T>")]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct MonicPoly<T> {
    coeffs: Vec<T>,
}

#[derive(Serialize, Deserialize)]
struct PolyRepr<T> {
    degree: usize,
    coeffs: Vec<T>,
}

impl<T: Scalar> TryFrom<PolyRepr<T>> for MonicPoly<T> {
    type Error = Error;

    fn try_from(r: PolyRepr<T>) -> Result<Self> {
        if r.degree != r.coeffs.len() {
            return Err(invalid(format!(
                "degree {} does not match {} coefficients",
                r.degree,
                r.coeffs.len()
            )));
        }
        MonicPoly::new(r.coeffs)
    }
}

impl<T: Scalar> From<MonicPoly<T>> for PolyRepr<T> {
    fn from(p: MonicPoly<T>) -> Self {
        PolyRepr { degree: p.coeffs.len(), coeffs: p.coeffs }
    }
}

impl<T: Scalar> MonicPoly<T> {
    /// Builds `x^n + c_0 x^{n-1} + ... + c_{n-1}` from `c_0..c_{n-1}`.
    pub fn new(coeffs: Vec<T>) -> Result<Self> {
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite_value()) {
            return Err(Error::NonFinite(format!("polynomial coefficient {i}")));
        }
        Ok(MonicPoly { coeffs })
    }

    /// The constant polynomial 1.
    pub fn one() -> Self {
        MonicPoly { coeffs: Vec::new() }
    }

    /// `x^n`.
    pub fn monomial(n: usize) -> Self {
        MonicPoly { coeffs: vec![T::zero(); n] }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    /// Constant term `p(0)`.
    pub fn constant(&self) -> T {
        self.coeffs.last().cloned().unwrap_or_else(T::one)
    }

    /// Absolute sum of all coefficients, leading one included.
    pub fn l1_norm(&self) -> T {
        self.coeffs.iter().fold(T::one(), |acc, c| acc + c.magnitude())
    }

    /// Horner evaluation at a point of the coefficient ring.
    pub fn eval(&self, x: &T) -> T {
        self.coeffs.iter().fold(T::one(), |acc, c| acc * x.clone() + c.clone())
    }

    /// Coefficient convolution.
    pub fn mul(&self, other: &Self) -> Self {
        let a = self.full_descending();
        let b = other.full_descending();
        let mut out = vec![T::zero(); a.len() + b.len() - 1];
        for (i, ai) in a.iter().enumerate() {
            for (j, bj) in b.iter().enumerate() {
                out[i + j] = out[i + j].clone() + ai.clone() * bj.clone();
            }
        }
        out.remove(0);
        MonicPoly { coeffs: out }
    }

    /// `R^{-n} p(R x)`: the monic polynomial whose roots are those of `p`
    /// divided by `R`.
    pub fn scale_to_disk(&self, radius: &T) -> Result<Self> {
        if !(*radius > T::zero()) {
            return Err(invalid("disk radius must be positive"));
        }
        let mut scale = T::one();
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                scale = scale.clone() * radius.clone();
                c.clone() / scale.clone()
            })
            .collect();
        MonicPoly::new(coeffs)
    }

    /// `[1, c_0, ..., c_{n-1}]`.
    pub fn full_descending(&self) -> Vec<T> {
        std::iter::once(T::one()).chain(self.coeffs.iter().cloned()).collect()
    }
}

/// Status of one strict inequality checked with a tolerance band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    Holds,
    Marginal,
    Fails,
}

impl Check {
    /// Classifies a margin that must be strictly positive.
    pub fn from_margin<T: Real>(margin: T, tol: T) -> Self {
        if margin > tol {
            Check::Holds
        } else if margin < -tol {
            Check::Fails
        } else {
            Check::Marginal
        }
    }

    pub fn holds(self) -> bool {
        self == Check::Holds
    }
}

/// The three necessary conditions for all roots to lie in the open unit disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NecessaryReport<T> {
    pub det_ok: bool,
    pub at_one_ok: bool,
    pub at_minus_one_ok: bool,
    /// `|p(0)|`, `p(1)`, `(-1)^n p(-1)`.
    pub det_value: T,
    pub at_one_value: T,
    pub at_minus_one_value: T,
    pub det: Check,
    pub at_one: Check,
    pub at_minus_one: Check,
}

impl<T> NecessaryReport<T> {
    /// The first condition that fails by more than the tolerance.
    pub fn strict_failure(&self) -> Option<Reason> {
        [
            (self.det, Reason::NecessaryDet),
            (self.at_one, Reason::NecessaryAtOne),
            (self.at_minus_one, Reason::NecessaryAtMinusOne),
        ]
        .into_iter()
        .find(|(c, _)| *c == Check::Fails)
        .map(|(_, r)| r)
    }

    pub fn marginal(&self) -> Option<Reason> {
        [
            (self.at_one, Reason::NecessaryAtOne),
            (self.at_minus_one, Reason::NecessaryAtMinusOne),
            (self.det, Reason::NecessaryDet),
        ]
        .into_iter()
        .find(|(c, _)| *c == Check::Marginal)
        .map(|(_, r)| r)
    }

    pub fn all_hold(&self) -> bool {
        self.det_ok && self.at_one_ok && self.at_minus_one_ok
    }
}

/// Aberth-Ehrlich iteration controls.
#[derive(Debug, Clone, Copy)]
pub struct RootOptions<T> {
    pub max_iterations: usize,
    /// Converged when every correction is below `step_tol * (1 + |z|)`.
    pub step_tol: T,
    /// Accepted residual scale, see [`MonicPoly::roots`].
    pub residual_tol: T,
}

impl<T: Real> RootOptions<T> {
    pub fn with_tol(tol: T) -> Self {
        RootOptions {
            max_iterations: 500,
            step_tol: T::lit(1e-13).max(T::epsilon() * T::lit(8.0)),
            residual_tol: tol,
        }
    }
}

impl<T: Real> MonicPoly<T> {
    /// Monic polynomial with the given roots. Non-real roots must come in
    /// conjugate pairs; imaginary parts of the product are discarded.
    pub fn from_roots(roots: &[Complex<T>]) -> Result<Self> {
        let mut acc = vec![Complex::new(T::one(), T::zero())];
        for r in roots {
            let mut next = vec![Complex::new(T::zero(), T::zero()); acc.len() + 1];
            for (i, a) in acc.iter().enumerate() {
                next[i] = next[i] + *a;
                next[i + 1] = next[i + 1] - *a * *r;
            }
            acc = next;
        }
        let scale = acc.iter().map(|c| c.norm()).fold(T::one(), T::max);
        if acc.iter().any(|c| c.im.abs() > T::lit(1e-8) * scale) {
            return Err(invalid("roots are not closed under conjugation"));
        }
        MonicPoly::new(acc.into_iter().skip(1).map(|c| c.re).collect())
    }

    pub fn eval_complex(&self, z: Complex<T>) -> Complex<T> {
        self.coeffs
            .iter()
            .fold(Complex::new(T::one(), T::zero()), |acc, c| acc * z + *c)
    }

    /// `p(z)` and `p'(z)` in one Horner sweep.
    fn eval_with_derivative(&self, z: Complex<T>) -> (Complex<T>, Complex<T>) {
        let mut p = Complex::new(T::one(), T::zero());
        let mut dp = Complex::new(T::zero(), T::zero());
        for c in &self.coeffs {
            dp = dp * z + p;
            p = p * z + *c;
        }
        (p, dp)
    }

    /// `sum |c_i| |z|^{n-i}` with the leading one included: the natural scale
    /// of rounding error when evaluating at `z`.
    fn eval_scale(&self, z: Complex<T>) -> T {
        let r = z.norm();
        self.coeffs.iter().fold(T::one(), |acc, c| acc * r + c.abs())
    }

    /// `|p(0)| < 1`, `p(1) > 0`, `(-1)^n p(-1) > 0`, each judged with a
    /// `+-tol` marginal band.
    pub fn necessary_conditions(&self, tol: T) -> NecessaryReport<T> {
        let det_value = self.constant().abs();
        let at_one_value = self.eval(&T::one());
        let sign = if self.degree() % 2 == 0 { T::one() } else { -T::one() };
        let at_minus_one_value = sign * self.eval(&-T::one());
        let det = Check::from_margin(T::one() - det_value, tol);
        let at_one = Check::from_margin(at_one_value, tol);
        let at_minus_one = Check::from_margin(at_minus_one_value, tol);
        NecessaryReport {
            det_ok: det.holds(),
            at_one_ok: at_one.holds(),
            at_minus_one_ok: at_minus_one.holds(),
            det_value,
            at_one_value,
            at_minus_one_value,
            det,
            at_one,
            at_minus_one,
        }
    }

    /// All `n` roots with multiplicity, sorted by real then imaginary part.
    ///
    /// Each returned root satisfies `|p(z)| < tol * max(1 + ||p||, s(z))`
    /// where `s(z) = sum |c_i| |z|^{n-i}`; for roots in the closed unit disk
    /// the bound is `tol * (1 + ||p||)`.
    pub fn roots(&self, tol: T) -> Result<Vec<Complex<T>>> {
        self.roots_with(RootOptions::with_tol(tol))
    }

    pub fn roots_with(&self, opts: RootOptions<T>) -> Result<Vec<Complex<T>>> {
        let n = self.degree();
        if n == 0 {
            return Ok(Vec::new());
        }
        if n == 1 {
            return Ok(vec![Complex::new(-self.coeffs[0], T::zero())]);
        }

        let radius = T::one() + self.coeffs.iter().fold(T::zero(), |m, c| m.max(c.abs()));
        let two_pi = T::TAU();
        let nf = T::from_usize(n).unwrap();
        // The offset keeps the starting points off the real axis.
        let mut z: Vec<Complex<T>> = (0..n)
            .map(|j| {
                let theta = two_pi * T::from_usize(j).unwrap() / nf + T::lit(0.4);
                Complex::from_polar(radius, theta)
            })
            .collect();

        // Step convergence is the usual exit; the residual check below is what
        // the caller is promised either way.
        for _ in 0..opts.max_iterations {
            let mut max_step = T::zero();
            for j in 0..n {
                let (p, dp) = self.eval_with_derivative(z[j]);
                if p.norm() == T::zero() {
                    continue;
                }
                let ratio = p / dp;
                let repulsion = (0..n)
                    .filter(|&l| l != j)
                    .fold(Complex::new(T::zero(), T::zero()), |acc, l| {
                        acc + (z[j] - z[l]).inv()
                    });
                let mut step = ratio / (Complex::new(T::one(), T::zero()) - ratio * repulsion);
                if !step.re.is_finite() || !step.im.is_finite() {
                    // Critical point or coincident estimates: nudge off it.
                    step = Complex::new(T::lit(1e-7), T::lit(1e-7)) * (T::one() + z[j].norm());
                }
                z[j] = z[j] - step;
                max_step = max_step.max(step.norm() / (T::one() + z[j].norm()));
            }
            if max_step < opts.step_tol {
                break;
            }
        }

        let base = T::one() + self.l1_norm();
        let worst = z
            .iter()
            .map(|&r| self.eval_complex(r).norm() / base.max(self.eval_scale(r)))
            .fold(T::zero(), T::max);
        if !(worst < opts.residual_tol) {
            return Err(Error::RootsNotConverged {
                iterations: opts.max_iterations,
                residual: worst.to_f64_lossy(),
            });
        }
        z.sort_by(|a, b| {
            a.re.partial_cmp(&b.re)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
        });
        Ok(z)
    }

    /// Largest root modulus according to the root oracle.
    pub fn spectral_radius(&self, tol: T) -> Result<T> {
        Ok(self.roots(tol)?.iter().map(|z| z.norm()).fold(T::zero(), T::max))
    }

    /// Classifies by the largest root modulus: marginal when it lies within
    /// `marginal_tol` of one.
    pub fn root_verdict(&self, tol: T, marginal_tol: T) -> Result<Verdict<T>> {
        let rho = self.spectral_radius(tol)?;
        let (kind, reason) = if (rho - T::one()).abs() < marginal_tol {
            (VerdictKind::MarginalSuspected, Reason::OracleMarginal)
        } else if rho > T::one() {
            (VerdictKind::Unstable, Reason::OracleRootOutside)
        } else {
            (VerdictKind::Stable, Reason::OracleRootsInside)
        };
        Ok(Verdict::new(kind, reason, Vec::new()))
    }
}

impl<T: Scalar + fmt::Display> fmt::Display for MonicPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.degree();
        match n {
            0 => write!(f, "1")?,
            1 => write!(f, "x")?,
            _ => write!(f, "x^{n}")?,
        }
        for (i, c) in self.coeffs.iter().enumerate() {
            let pow = n - 1 - i;
            if *c == T::zero() {
                continue;
            }
            let (sign, mag) = if *c < T::zero() { ("-", c.magnitude()) } else { ("+", c.clone()) };
            match pow {
                0 => write!(f, " {sign} {mag}")?,
                1 => write!(f, " {sign} {mag}x")?,
                _ => write!(f, " {sign} {mag}x^{pow}")?,
            }
        }
        Ok(())
    }
}
