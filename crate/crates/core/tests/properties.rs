use kgfield::currents::{continuity_residual, rho_a, total_probability, Which};
use kgfield::gauge::{gauge_transform, GaugeElement};
use kgfield::inner::{inner_a, inner_a_split};
use kgfield::localization::{map_ua, map_ua_inverse};
use kgfield::random::random_field;
use kgfield::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn lattice() -> MomentumLattice {
    MomentumLattice::new(vec![6.0, 5.0], vec![12, 8]).unwrap()
}

fn field(seed: u64, a: f64, t0: f64) -> LatticeField {
    let p = ModelParams::new(1.1, 0.8, a).unwrap();
    random_field(
        &lattice(),
        &p,
        0.7,
        t0,
        &mut ChaCha8Rng::seed_from_u64(seed),
    )
}

fn gap(x: &LatticeField, y: &LatticeField) -> f64 {
    x.max_coeff_diff(y) / x.max_coeff().max(y.max_coeff())
}

fn close(x: C64, y: C64, tol: f64) -> bool {
    (x - y).norm() <= tol * x.norm().max(y.norm())
}

fn param_a() -> impl Strategy<Value = f64> {
    -0.95f64..0.95
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn grading_is_an_involution(seed: u64, a in param_a()) {
        let f = field(seed, a, 0.0);
        prop_assert!(gap(&f.apply_c().apply_c(), &f) <= 1e-13);
    }

    #[test]
    fn evolution_commutes_with_grading(seed: u64, a in param_a(), dt in -5.0f64..5.0) {
        let f = field(seed, a, 0.3);
        prop_assert!(gap(&f.evolve(dt).unwrap().apply_c(), &f.apply_c().evolve(dt).unwrap()) <= 1e-13);
    }

    #[test]
    fn energy_split_is_a_projection_pair(seed: u64) {
        let f = field(seed, 0.0, 0.0);
        let (p, m) = f.energy_split();
        let (pp, pm) = p.energy_split();
        let (mp, mm) = m.energy_split();
        prop_assert_eq!(pp, p.clone());
        prop_assert_eq!(mm, m.clone());
        prop_assert!(pm.is_zero() && mp.is_zero());
        prop_assert!(gap(&p.add(&m).unwrap(), &f) <= 1e-15);
    }

    #[test]
    fn evolution_is_a_one_parameter_group(seed: u64, s in -3.0f64..3.0, t in -3.0f64..3.0) {
        let f = field(seed, 0.2, 0.0);
        prop_assert!(gap(&f.evolve(s).unwrap().evolve(t).unwrap(), &f.evolve(s + t).unwrap()) <= 1e-13);
    }

    #[test]
    fn inner_product_is_positive_and_conserved(seed: u64, a in param_a(), t in -10.0f64..10.0) {
        let f = field(seed, a, 0.0);
        let n0 = inner_a(&f, &f, 0.0).unwrap();
        prop_assert!(n0.re > 0.0);
        prop_assert!(n0.im.abs() <= 1e-12 * n0.re);
        prop_assert!(close(inner_a(&f, &f, t).unwrap(), n0, 1e-12));
    }

    #[test]
    fn sesquilinear_in_both_slots(
        seed: u64,
        a in param_a(),
        al in (-2.0f64..2.0, -2.0f64..2.0),
        be in (-2.0f64..2.0, -2.0f64..2.0),
    ) {
        let (f1, f2, f3) = (field(seed, a, 0.0), field(seed ^ 1, a, 0.4), field(seed ^ 2, a, -0.2));
        let (al, be) = (C64::new(al.0, al.1), C64::new(be.0, be.1));
        let combo = f1.scaled(al).add(&f2.scaled(be)).unwrap();
        let x1 = inner_a(&f1, &f3, 0.1).unwrap();
        let x2 = inner_a(&f2, &f3, 0.1).unwrap();
        let tol = 1e-12 * (al.norm() * x1.norm() + be.norm() * x2.norm());
        prop_assert!((inner_a(&combo, &f3, 0.1).unwrap() - (al.conj() * x1 + be.conj() * x2)).norm() <= tol);
        let y1 = inner_a(&f3, &f1, 0.1).unwrap();
        let y2 = inner_a(&f3, &f2, 0.1).unwrap();
        prop_assert!((inner_a(&f3, &combo, 0.1).unwrap() - (al * y1 + be * y2)).norm() <= tol);
    }

    #[test]
    fn hermitian_and_grading_symmetric(seed: u64, a in param_a()) {
        let (f1, f2) = (field(seed, a, 0.0), field(seed ^ 7, a, 0.0));
        let x = inner_a(&f1, &f2, 0.5).unwrap();
        prop_assert!(close(x, inner_a(&f2, &f1, 0.5).unwrap().conj(), 1e-12));
        prop_assert!(close(inner_a(&f1, &f2.apply_c(), 0.5).unwrap(), inner_a(&f1.apply_c(), &f2, 0.5).unwrap(), 1e-12));
        prop_assert!(close(x, inner_a_split(&f1, &f2, 0.5).unwrap(), 1e-12));
    }

    #[test]
    fn gauge_group_law(seed: u64, a in param_a(), t1 in -10.0f64..10.0, t2 in -10.0f64..10.0) {
        let f = field(seed, a, 0.0);
        let two = gauge_transform(&gauge_transform(&f, t2, a).unwrap(), t1, a).unwrap();
        prop_assert!(gap(&two, &gauge_transform(&f, t1 + t2, a).unwrap()) <= 1e-13);
        let g = GaugeElement::new(t1, a).unwrap().compose(&GaugeElement::new(-t1, a).unwrap()).unwrap();
        prop_assert!(gap(&g.apply(&f), &f) <= 1e-13);
    }

    #[test]
    fn gauge_commutes_with_evolution_and_keeps_norm(seed: u64, a in param_a(), th in -6.0f64..6.0, dt in -4.0f64..4.0) {
        let f = field(seed, a, 0.0);
        let x = gauge_transform(&f.evolve(dt).unwrap(), th, a).unwrap();
        let y = gauge_transform(&f, th, a).unwrap().evolve(dt).unwrap();
        prop_assert!(gap(&x, &y) <= 1e-13);
        let n = inner_a(&f, &f, 0.0).unwrap().re;
        prop_assert!((inner_a(&y, &y, 0.0).unwrap().re - n).abs() <= 1e-12 * n);
    }

    #[test]
    fn ua_is_unitary_and_invertible(seed: u64, a in prop::sample::select(vec![-0.9, 0.0, 0.9])) {
        let (f1, f2) = (field(seed, a, 0.2), field(seed ^ 3, a, 0.2));
        let (x1, x2) = (map_ua(&f1, a).unwrap(), map_ua(&f2, a).unwrap());
        prop_assert!(close(x1.inner(&x2).unwrap(), inner_a(&f1, &f2, 0.2).unwrap(), 1e-12));
        let back = map_ua_inverse(&x1, a, 0.2, *f1.params()).unwrap();
        prop_assert!(gap(&back, &f1) <= 1e-12);
    }

    #[test]
    fn current_is_conserved_and_density_nonnegative(seed: u64, a in param_a(), t in 0.0f64..4.0) {
        let f = field(seed, a, 0.0);
        prop_assert!(continuity_residual(&f, t, Which::Ja) <= 1e-10);
        let rho = rho_a(&f, t).unwrap();
        prop_assert!(rho.iter().all(|r| *r >= 0.0));
        let p0 = total_probability(&f, 0.0).unwrap();
        prop_assert!((total_probability(&f, t).unwrap() - p0).abs() <= 1e-12 * p0);
    }

    #[test]
    fn boosted_plane_waves_stay_on_shell(
        k in prop::collection::vec(-3.0f64..3.0, 2),
        beta in prop::collection::vec(-0.6f64..0.6, 2),
        minus: bool,
    ) {
        let p = ModelParams::new(1.0, 1.0, 0.0).unwrap();
        let eps = if minus { Sector::Minus } else { Sector::Plus };
        let f = PlaneWaveField::new(p, vec![PlaneMode { epsilon: eps, k, coeff: C64::new(1.0, 0.0) }]).unwrap();
        let b = Boost::exact(beta).unwrap();
        let g = f.boost(&b).unwrap();
        let q = b.apply(&f.four_momentum(&f.modes()[0]));
        prop_assert_eq!(g.modes()[0].epsilon, eps);
        prop_assert!((q[0].abs() - g.omega(&g.modes()[0])).abs() <= 1e-12 * q[0].abs());
        let x = [0.3, -1.2, 0.8];
        prop_assert!((f.value(&x) - g.value(&b.apply(&x))).norm() <= 1e-12);
    }
}
