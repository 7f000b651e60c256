use kgfield::currents::total_probability;
use kgfield::gauge::*;
use kgfield::inner::{inner_a, normalize_a};
use kgfield::random::{random_field, random_sector_field};
use kgfield::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn lattice() -> MomentumLattice {
    MomentumLattice::new(vec![5.0, 6.0], vec![8, 10]).unwrap()
}

fn field(a: f64, seed: u64) -> LatticeField {
    let p = ModelParams::new(1.2, 0.9, a).unwrap();
    random_field(
        &lattice(),
        &p,
        0.6,
        0.0,
        &mut ChaCha8Rng::seed_from_u64(seed),
    )
}

#[test]
fn zero_angle_is_identity_and_half_turn_negates() {
    let f = field(0.0, 1);
    assert_eq!(gauge_transform(&f, 0.0, 0.4).unwrap(), f);
    let flipped = gauge_transform(&f, PI, 0.0).unwrap();
    assert!(flipped.max_coeff_diff(&f.scaled(C64::new(-1.0, 0.0))) <= 1e-15 * f.max_coeff());
}

#[test]
fn transformation_is_unitary() {
    let f = field(0.3, 2);
    let g = gauge_transform(&f, 0.7, 0.3).unwrap();
    let (n, m) = (
        inner_a(&f, &f, 0.0).unwrap().re,
        inner_a(&g, &g, 0.0).unwrap().re,
    );
    assert!((n - m).abs() <= 1e-12 * n);
}

#[test]
fn exponential_form_matches_diagonal_form() {
    let f = field(-0.6, 3);
    for th in [-2.1, 0.4, 5.5] {
        let d = gauge_transform(&f, th, -0.6).unwrap();
        let e = gauge_transform_exponential(&f, th, -0.6).unwrap();
        assert!(d.max_coeff_diff(&e) <= 1e-13 * f.max_coeff());
    }
}

#[test]
fn generator_is_first_order_accurate() {
    let f = field(0.45, 4);
    let dev = generator_check(&f, 0.45, 1e-4).unwrap();
    assert!(dev <= 1e-3 * f.max_coeff());
    let ratio = generator_check(&f, 0.45, 5e-5).unwrap() / dev;
    assert!((0.4..=0.6).contains(&ratio), "ratio {ratio}");
    assert!(generator_check(&f, 0.45, 1e-3).is_err());
}

#[test]
fn generator_acts_as_minus_i_on_positive_energy() {
    let p = ModelParams::new(1.0, 1.0, 0.0).unwrap();
    let f = random_sector_field(
        &lattice(),
        &p,
        0.6,
        1,
        0.0,
        &mut ChaCha8Rng::seed_from_u64(5),
    );
    assert_eq!(generator_apply(&f, 0.0), f.scaled(C64::new(0.0, -1.0)));
}

#[test]
fn charge_equals_probability() {
    let f = normalize_a(&field(-0.2, 6)).unwrap();
    assert!((charge_phase_space(&f, 1.7).unwrap() - 1.0).abs() <= 1e-10);
    assert!((total_probability(&f, 1.7).unwrap() - 1.0).abs() <= 1e-10);

    let lat = lattice();
    let zero = LatticeField::zero(lat.clone(), ModelParams::new(1.0, 1.0, 0.0).unwrap(), 0.0);
    assert_eq!(charge_phase_space(&zero, 0.0).unwrap(), 0.0);

    let (a, c) = (0.35, C64::new(0.4, -1.1));
    let p = ModelParams::new(1.4, 0.6, a).unwrap();
    let flat = lat.flat_from_signed(&[1, -2]).unwrap();
    let mut plus = vec![C64::new(0.0, 0.0); lat.len()];
    plus[flat] = c;
    let single = LatticeField::new(
        lat.clone(),
        p,
        plus,
        vec![C64::new(0.0, 0.0); lat.len()],
        0.0,
    )
    .unwrap();
    let expect =
        p.kappa() * (1.0 + a) * p.omega(lat.ksq(flat)) * lat.volume() / p.m() * c.norm_sqr();
    assert!((charge_phase_space(&single, 0.3).unwrap() - expect).abs() <= 1e-12 * expect);
}

#[test]
fn classification_of_group_parameters() {
    let half = group_classify(&GroupParameter::Rational { num: 1, den: 2 }).unwrap();
    assert_eq!(half.kind, GroupKind::U1);
    assert!((half.period.unwrap() - 4.0 * PI).abs() <= 1e-12);

    let zero = group_classify(&GroupParameter::Rational { num: 0, den: 1 }).unwrap();
    assert_eq!(zero.kind, GroupKind::U1);
    assert!((zero.period.unwrap() - 2.0 * PI).abs() <= 1e-12);

    let third = group_classify(&GroupParameter::Rational { num: -2, den: 3 }).unwrap();
    assert!((third.period.unwrap() - 6.0 * PI).abs() <= 1e-12);

    let irr = group_classify(&GroupParameter::Irrational {
        value: 0.5f64.sqrt(),
        label: "sqrt2/2".into(),
    })
    .unwrap();
    assert_eq!(irr.kind, GroupKind::Rplus);
    assert!(irr.period.is_none());
    assert!(irr.witness.min_return_deviation > 1e-6);

    for (num, den) in [(2, 4), (1, 0), (3, 2), (1, -2)] {
        assert!(matches!(
            group_classify(&GroupParameter::Rational { num, den }),
            Err(KgError::MalformedRational(_))
        ));
    }
}
