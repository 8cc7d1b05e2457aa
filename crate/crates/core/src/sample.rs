//! Random real polynomials with controlled root placement.

use num_complex::Complex;
use rand::Rng;

use crate::poly::MonicPoly;

/// Conjugate-closed roots of a degree-`degree` real polynomial, each drawn
/// uniformly (by area) from the annulus `r_lo <= |z| <= r_hi`.
pub fn roots_in_annulus<R: Rng + ?Sized>(
    rng: &mut R,
    degree: usize,
    r_lo: f64,
    r_hi: f64,
) -> Vec<Complex<f64>> {
    let radius = |rng: &mut R| {
        let u: f64 = rng.gen();
        (r_lo * r_lo + u * (r_hi * r_hi - r_lo * r_lo)).sqrt()
    };
    let mut roots = Vec::with_capacity(degree);
    while roots.len() < degree {
        let r = radius(rng);
        if degree - roots.len() >= 2 && rng.gen_bool(0.5) {
            let theta = rng.gen_range(0.0..std::f64::consts::PI);
            roots.push(Complex::from_polar(r, theta));
            roots.push(Complex::from_polar(r, -theta));
        } else {
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            roots.push(Complex::new(sign * r, 0.0));
        }
    }
    roots
}

/// Polynomial with all roots in the disk of radius `r_max`.
pub fn stable_poly<R: Rng + ?Sized>(rng: &mut R, degree: usize, r_max: f64) -> MonicPoly<f64> {
    from_roots(&roots_in_annulus(rng, degree, 0.0, r_max))
}

/// Polynomial whose roots all stay at least `gap` away from the unit circle,
/// each independently inside or outside with equal odds, moduli up to
/// `r_outer`.
pub fn gapped_poly<R: Rng + ?Sized>(
    rng: &mut R,
    degree: usize,
    gap: f64,
    r_outer: f64,
) -> MonicPoly<f64> {
    let mut roots = Vec::with_capacity(degree);
    while roots.len() < degree {
        let remaining = degree - roots.len();
        let chunk = if remaining >= 2 && rng.gen_bool(0.5) { 2 } else { 1 };
        let (lo, hi) = if rng.gen_bool(0.5) { (0.0, 1.0 - gap) } else { (1.0 + gap, r_outer) };
        roots.extend(roots_in_annulus(rng, chunk, lo, hi));
    }
    from_roots(&roots)
}

fn from_roots(roots: &[Complex<f64>]) -> MonicPoly<f64> {
    MonicPoly::from_roots(roots).expect("roots are conjugate-closed by construction")
}
