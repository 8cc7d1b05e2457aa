//! Cross-module invariants on the public API.

use dde_expand::dynamics::{orbit, OrbitOptions};
use dde_expand::sample::roots_in_annulus;
use dde_expand::sweep::{soundness_check, Axis};
use dde_expand::{
    classify_schur, jury_stable, run_sweep, CoeffVector, DelayMap, MonicPoly, Plane, Rational, SchurOptions,
    SweepSpec, VerdictKind,
};
use num_traits::{FromPrimitive, ToPrimitive};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.5f64..1.5, 1..=5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn stable_witness_implies_spectral_radius_below_one(a in coeffs()) {
        let v0 = CoeffVector::new(a).unwrap();
        let v = classify_schur(&v0, &SchurOptions::default().oracle(false)).unwrap();
        if v.kind == VerdictKind::Stable {
            let rho = v0.p_polynomial().spectral_radius(1e-12).unwrap();
            prop_assert!(rho < 1.0, "witness m = {:?} but rho = {}", v.witness_m, rho);
        }
    }

    #[test]
    fn definite_verdicts_never_contradict(a in coeffs()) {
        let v0 = CoeffVector::new(a).unwrap();
        let p = v0.p_polynomial();
        let expansion = classify_schur(&v0, &SchurOptions::default()).unwrap();
        let jury = jury_stable(&p, 1e-9).unwrap();
        let roots = p.root_verdict(1e-12, 1e-9).unwrap();
        let definite = [expansion.kind, jury.kind, roots.kind]
            .into_iter()
            .filter(|k| matches!(k, VerdictKind::Stable | VerdictKind::Unstable))
            .collect::<Vec<_>>();
        prop_assert!(definite.windows(2).all(|w| w[0] == w[1]), "{:?}", definite);
    }

    #[test]
    fn float_expansion_tracks_exact(a in prop::collection::vec(-8i32..=8, 1..=4), m in 0usize..=6) {
        // Dyadic entries keep the f64 inputs exact.
        let a: Vec<f64> = a.into_iter().map(|n| n as f64 / 8.0).collect();
        let float = CoeffVector::new(a.clone()).unwrap().expand_m(m).unwrap();
        let exact = CoeffVector::new(a.iter().map(|x| Rational::from_f64(*x).unwrap()).collect()).unwrap();
        let exact = exact.expand_m(m).unwrap();
        for (x, y) in float.entries().iter().zip(exact.entries()) {
            let y = y.to_f64().unwrap();
            prop_assert!((x - y).abs() <= 1e-12 * (1.0 + y.abs()), "{} vs {}", x, y);
        }
    }

    #[test]
    fn stable_linear_orbits_decay(seed in any::<u64>(), degree in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = MonicPoly::from_roots(&roots_in_annulus(&mut rng, degree, 0.0, 0.8)).unwrap();
        let v0 = CoeffVector::from_poly(&p).unwrap();
        let map = DelayMap::linear(&v0);
        let rec = orbit(&map, &vec![1.0; degree], &OrbitOptions { n_steps: 2000, conv_tol: 1e-12, window: 10 }).unwrap();
        prop_assert!(rec.values.last().unwrap().abs() < 1e-8);
    }
}

#[test]
fn random_polynomials_jury_and_roots_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for i in 0..300 {
        let degree = 1 + i % 8;
        let (lo, hi) = if i % 2 == 0 { (0.0, 0.95) } else { (1.05, 1.8) };
        let p = MonicPoly::from_roots(&roots_in_annulus(&mut rng, degree, lo, hi)).unwrap();
        let jury = jury_stable(&p, 1e-9).unwrap();
        let roots = p.root_verdict(1e-12, 1e-9).unwrap();
        assert_eq!(jury.kind, roots.kind, "{p}");
        let expected = if i % 2 == 0 { VerdictKind::Stable } else { VerdictKind::Unstable };
        assert_eq!(roots.kind, expected, "{p}");
    }
}

#[test]
fn complex_eig_sweep_is_sound() {
    let mut spec = SweepSpec::new(Plane::ComplexEig);
    spec.x = Axis::new(0.0, 1.2, 60).unwrap();
    spec.y = Axis::new(0.0, std::f64::consts::PI, 60).unwrap();
    let grid = run_sweep(&spec).unwrap();
    let report = soundness_check(&grid, 1.0, 7).unwrap();
    assert_eq!(report.sampled, 3600);
    assert!(report.violations.is_empty(), "{:?}", report.violations);
    // Pairs with r < 1 are all Schur stable, so the oracle flags exactly
    // the cells with r < 1.
    let oracle = grid.count(spec.bit("oracle").unwrap());
    assert_eq!(oracle, 50 * 60);
}
