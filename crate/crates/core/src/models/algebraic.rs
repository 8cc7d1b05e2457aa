//! The quintic family
//! `p_c(x) = x^5 - (7/5)x^4 + (3509/3600)x^3 - (2933/7200)x^2 + (3199/32400)x + (299959/16200 - c)`
//! and the ranges of `c` on which each stability test succeeds.

use serde::{Deserialize, Serialize};

use crate::expand::CoeffVector;
use crate::poly::MonicPoly;

use super::intervals_where;

pub const CONSTANT: f64 = 299959.0 / 16200.0;

pub fn quintic(c: f64) -> MonicPoly<f64> {
    MonicPoly::new(vec![-1.4, 3509.0 / 3600.0, -2933.0 / 7200.0, 3199.0 / 32400.0, CONSTANT - c])
        .expect("finite coefficients")
}

/// `||V_m||_1` of `R^{-5} p_c(R x)`.
pub fn scaled_norm(c: f64, radius: f64, m: usize) -> f64 {
    let p = quintic(c).scale_to_disk(&radius).expect("radius > 0");
    let v0 = CoeffVector::from_poly(&p).expect("finite");
    v0.expand_m(m).map(|v| v.l1_norm()).unwrap_or(f64::INFINITY)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormInterval {
    pub radius: f64,
    pub m: usize,
    pub intervals: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuinticReport {
    /// `|p(0)| < 1`.
    pub det: Vec<(f64, f64)>,
    /// `p(1) > 0`.
    pub at_one: Vec<(f64, f64)>,
    /// `-p(-1) > 0`.
    pub at_minus_one: Vec<(f64, f64)>,
    /// All three necessary conditions.
    pub screened: Vec<(f64, f64)>,
    pub norms: Vec<NormInterval>,
    pub spectral_radius_at_18_5: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct QuinticScan {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    pub tol: f64,
}

impl Default for QuinticScan {
    fn default() -> Self {
        QuinticScan { lo: 10.0, hi: 25.0, n: 15001, tol: 1e-9 }
    }
}

pub fn quintic_intervals(scan: QuinticScan) -> QuinticReport {
    let find = |pred: &dyn Fn(f64) -> bool| intervals_where(pred, scan.lo, scan.hi, scan.n, scan.tol);
    let det = |c: f64| quintic(c).constant().abs() < 1.0;
    let at_one = |c: f64| quintic(c).eval(&1.0) > 0.0;
    let at_minus_one = |c: f64| -quintic(c).eval(&-1.0) > 0.0;
    let norms = [(1.0, 3), (1.5, 1), (1.25, 3)]
        .into_iter()
        .map(|(radius, m)| NormInterval { radius, m, intervals: find(&|c| scaled_norm(c, radius, m) < 1.0) })
        .collect();
    QuinticReport {
        det: find(&det),
        at_one: find(&at_one),
        at_minus_one: find(&at_minus_one),
        screened: find(&|c| det(c) && at_one(c) && at_minus_one(c)),
        norms,
        spectral_radius_at_18_5: quintic(18.5).spectral_radius(1e-9).unwrap_or(f64::NAN),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn closed_form_endpoints() {
        let r = quintic_intervals(QuinticScan::default());
        assert_eq!(r.det.len(), 1);
        assert_abs_diff_eq!(r.det[0].0, 283759.0 / 16200.0, epsilon = 1e-8);
        assert_abs_diff_eq!(r.det[0].1, 316159.0 / 16200.0, epsilon = 1e-8);
        assert_abs_diff_eq!(r.at_one[0].1, 45077.0 / 2400.0, epsilon = 1e-8);
        assert_abs_diff_eq!(r.at_minus_one[0].0, 14.635, epsilon = 1e-3);
        assert_abs_diff_eq!(r.screened[0].0, 283759.0 / 16200.0, epsilon = 1e-8);
        assert_abs_diff_eq!(r.screened[0].1, 45077.0 / 2400.0, epsilon = 1e-8);
    }

    #[test]
    fn norm_intervals() {
        let r = quintic_intervals(QuinticScan::default());
        let v3 = &r.norms[0].intervals;
        assert_eq!(v3.len(), 1);
        assert_abs_diff_eq!(v3[0].0, 860489737.0 / 46994400.0, epsilon = 1e-6);
        assert_abs_diff_eq!(v3[0].1, 18.7821, epsilon = 1e-3);
        let r15 = &r.norms[1].intervals;
        assert_abs_diff_eq!(r15[0].0, 33561737.0 / 1879200.0, epsilon = 1e-6);
        assert_abs_diff_eq!(r15[0].1, 36297467.0 / 1879200.0, epsilon = 1e-6);
        assert_abs_diff_eq!(r.spectral_radius_at_18_5, 0.691, epsilon = 1e-3);
    }

    #[test]
    fn l1_norm_formula() {
        for c in [17.0, 18.5, 20.0] {
            assert_abs_diff_eq!(quintic(c).l1_norm(), 251477.0 / 64800.0 + (c - CONSTANT).abs(), epsilon = 1e-12);
        }
    }
}
