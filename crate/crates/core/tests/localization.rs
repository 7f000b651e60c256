use kgfield::bessel::{besselk_profile, momentum_integral_profile};
use kgfield::inner::{inner_0, inner_a};
use kgfield::localization::*;
use kgfield::packets::{gaussian_packet, PacketEnergy};
use kgfield::random::{random_field, random_real_field, random_sector_field};
use kgfield::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn lattice() -> MomentumLattice {
    MomentumLattice::new(vec![6.0, 7.0], vec![10, 12]).unwrap()
}

fn params(a: f64) -> ModelParams {
    ModelParams::new(0.9, 1.2, a).unwrap()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn max_abs(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn single_sector_fields_fill_one_component() {
    let lat = lattice();
    let pos = random_sector_field(&lat, &params(0.0), 0.6, 1, 0.0, &mut rng(1));
    let neg = random_sector_field(&lat, &params(0.0), 0.6, -1, 0.0, &mut rng(2));
    let (xp, xn) = (map_ua(&pos, 0.0).unwrap(), map_ua(&neg, 0.0).unwrap());
    assert!(xp.xi2().iter().all(|z| z.norm() == 0.0) && max_abs(xp.xi1()) > 0.0);
    assert!(xn.xi1().iter().all(|z| z.norm() == 0.0) && max_abs(xn.xi2()) > 0.0);

    let zero = vec![C64::new(0.0, 0.0); lat.len()];
    let xi = TwoComponent::new(lat.clone(), xp.xi1().to_vec(), zero).unwrap();
    assert!(map_u_inverse(&xi, 0.0, params(0.0))
        .unwrap()
        .phi_minus()
        .iter()
        .all(|z| z.norm() == 0.0));
}

#[test]
fn maps_are_unitary_and_invert() {
    for a in [-0.9, 0.0, 0.9] {
        let f1 = random_field(&lattice(), &params(a), 0.6, 0.4, &mut rng(3));
        let f2 = random_field(&lattice(), &params(a), 0.6, 0.4, &mut rng(4));
        let (x1, x2) = (map_ua(&f1, a).unwrap(), map_ua(&f2, a).unwrap());
        let ip = inner_a(&f1, &f2, 0.4).unwrap();
        assert!((x1.inner(&x2).unwrap() - ip).norm() <= 1e-12 * ip.norm());
        let back = map_ua_inverse(&x1, a, 0.4, params(a)).unwrap();
        assert!(back.max_coeff_diff(&f1) <= 1e-12 * f1.max_coeff());
    }
}

#[test]
fn space_change_carries_inner_products() {
    let f1 = random_field(&lattice(), &params(0.0), 0.6, 0.0, &mut rng(5));
    let f2 = random_field(&lattice(), &params(0.0), 0.6, 0.0, &mut rng(6));
    let zero = inner_0(&f1, &f2, 0.0).unwrap();
    for a in [-0.7, 0.5] {
        let (g1, g2) = (cal_ua(&f1, a).unwrap(), cal_ua(&f2, a).unwrap());
        assert!((inner_a(&g1, &g2, 0.0).unwrap() - zero).norm() <= 1e-12 * zero.norm());
        assert!(cal_ua_inverse(&g1).unwrap().max_coeff_diff(&f1) <= 1e-12 * f1.max_coeff());
    }
}

#[test]
fn localized_states_are_orthonormal_deltas() {
    let lat = lattice();
    let p = params(0.0);
    let nodes = [0usize, 17, 63, 119];
    let states: Vec<LocalizedState> = nodes
        .iter()
        .flat_map(|&n| {
            [Sector::Plus, Sector::Minus]
                .map(|e| localized_state_at_node(e, n, &lat, p, 0.0).unwrap())
        })
        .collect();
    for (i, s) in states.iter().enumerate() {
        for (j, r) in states.iter().enumerate() {
            let ip = inner_0(s.field(), r.field(), 0.0).unwrap();
            let expect = if i == j { 1.0 } else { 0.0 };
            assert!((ip - C64::new(expect, 0.0)).norm() <= 1e-12);
        }
        let d = s.dirac_scaled();
        let self_ip = inner_0(&d, &d, 0.0).unwrap().re;
        assert!((self_ip * lat.cell_volume() - 1.0).abs() <= 1e-12);

        let (fp, fm) = wavefunction_f(s.field());
        let (hit, miss) = if s.epsilon() == Sector::Plus {
            (fp, fm)
        } else {
            (fm, fp)
        };
        assert!(miss.iter().all(|z| z.norm() <= 1e-13));
        let root = lat.cell_volume().sqrt();
        for (n, z) in hit.iter().enumerate() {
            let e = if n == s.node() { 1.0 / root } else { 0.0 };
            assert!((z - C64::new(e, 0.0)).norm() <= 1e-12 / root);
        }
    }
}

#[test]
fn localized_states_are_position_eigenstates() {
    let lat = lattice();
    let y = lat.node_position(47);
    let s = localized_state(Sector::Minus, &y[..2], &lat, params(0.0), 0.0).unwrap();
    let xs = position_conjugation(s.field()).unwrap();
    for (i, x) in xs.iter().enumerate() {
        let scaled = s.field().scaled(C64::new(s.y()[i], 0.0));
        assert!(x.max_coeff_diff(&scaled) <= 1e-12 * s.field().max_coeff().max(scaled.max_coeff()));
    }
}

#[test]
fn centred_packet_has_zero_mean_position() {
    let lat = MomentumLattice::cubic(2, 48.0, 96).unwrap();
    let p = ModelParams::new(2.0, 1.0, 0.0).unwrap();
    let f = gaussian_packet(
        &lat,
        &p,
        &[0.0, 0.0],
        1.5,
        &[0.0, 0.0],
        PacketEnergy::Positive,
        0.0,
    )
    .unwrap();
    let xs = position_apply(&f).unwrap();
    let n = inner_0(&f, &f, 0.0).unwrap().re;
    for x in xs {
        assert!(inner_0(&f, &x, 0.0).unwrap().norm() <= 1e-8 * n);
    }
}

#[test]
fn position_routes_agree_for_interior_fields() {
    let lat = MomentumLattice::cubic(2, 48.0, 96).unwrap();
    let p = ModelParams::new(2.0, 1.0, 0.0).unwrap();
    let f = gaussian_packet(
        &lat,
        &p,
        &[0.8, -0.5],
        1.4,
        &[0.6, 0.3],
        PacketEnergy::Standing,
        0.0,
    )
    .unwrap();
    assert!(position_apply(&f).is_ok());
    let edge = gaussian_packet(
        &lat,
        &p,
        &[22.0, 0.0],
        1.4,
        &[0.0, 0.0],
        PacketEnergy::Positive,
        0.0,
    )
    .unwrap();
    assert!(matches!(
        position_apply(&edge),
        Err(KgError::Precondition(_))
    ));
}

#[test]
fn localized_basis_resolves_any_field() {
    let lat = MomentumLattice::new(vec![4.0, 5.0], vec![6, 8]).unwrap();
    let f = random_field(&lat, &params(0.0), 0.7, 0.3, &mut rng(7));
    let (cp, cm) = localized_expansion(&f);
    let back = resum_localized(&cp, &cm, &lat, params(0.0), 0.3).unwrap();
    assert!(back.max_coeff_diff(&f) <= 1e-12 * f.max_coeff());
    let n = inner_0(&f, &f, 0.3).unwrap().re;
    let parseval: f64 = cp.iter().chain(&cm).map(|c| c.norm_sqr()).sum();
    assert!((parseval - n).abs() <= 1e-12 * n);
}

#[test]
fn wavefunctions_reproduce_the_inner_product() {
    let lat = lattice();
    let (f1, f2) = (
        random_field(&lat, &params(0.0), 0.6, 0.0, &mut rng(8)),
        random_field(&lat, &params(0.0), 0.6, 0.0, &mut rng(9)),
    );
    let (a1, b1) = wavefunction_f(&f1);
    let (a2, b2) = wavefunction_f(&f2);
    let sum: C64 = a1
        .iter()
        .zip(&a2)
        .chain(b1.iter().zip(&b2))
        .map(|(x, y)| x.conj() * y)
        .sum::<C64>()
        * lat.cell_volume();
    let ip = inner_0(&f1, &f2, 0.0).unwrap();
    assert!((sum - ip).norm() <= 1e-12 * ip.norm());

    let real = random_real_field(&lat, &params(0.0), 0.6, 0.0, &mut rng(10));
    let (fp, fm) = wavefunction_f(&real);
    assert!(fp
        .iter()
        .zip(&fm)
        .all(|(x, y)| (x - y.conj()).norm() <= 1e-12 * max_abs(&fp)));
}

#[test]
fn region_probabilities() {
    let lat = lattice();
    let p = params(0.0);
    let f = kgfield::inner::normalize_a(&random_field(&lat, &p, 0.6, 0.0, &mut rng(11))).unwrap();
    assert!((probability_region(&f, &Region::whole(&lat), false).unwrap() - 1.0).abs() <= 1e-12);
    let flat = Region::new(&lat, vec![0.5, -1.0], vec![0.5, 2.0]).unwrap();
    assert_eq!(probability_region(&f, &flat, false).unwrap(), 0.0);

    let s = localized_state(Sector::Plus, &[0.6, 1.75], &lat, p, 0.0).unwrap();
    let y = s.y().to_vec();
    let around = Region::new(
        &lat,
        vec![y[0] - 0.1, y[1] - 0.1],
        vec![y[0] + 0.1, y[1] + 0.1],
    )
    .unwrap();
    assert!((probability_region(s.field(), &around, false).unwrap() - 1.0).abs() <= 1e-12);

    let unnormalized = f.scaled(C64::new(3.0, 0.0));
    assert!(probability_region(&unnormalized, &Region::whole(&lat), false).is_err());
    assert!(
        (probability_region(&unnormalized, &Region::whole(&lat), true).unwrap() - 1.0).abs()
            <= 1e-12
    );
}

#[test]
fn density_routes_agree() {
    let f = random_field(&lattice(), &params(0.55), 0.6, 0.0, &mut rng(12));
    let rho = kgfield::currents::rho_a(&f, 0.9).unwrap();
    let prime = rho_a_prime_route(&f, 0.9);
    let scale = rho.iter().fold(0.0f64, |m, v| m.max(*v));
    assert!(rho
        .iter()
        .zip(&prime)
        .all(|(x, y)| (x - y).abs() <= 1e-12 * scale));
}

#[test]
fn bessel_profile_routes_and_decay() {
    let p = ModelParams::new(1.0, 1.0, 0.0).unwrap();
    let (x, y) = (
        besselk_profile(1.0, &p, 3).unwrap(),
        momentum_integral_profile(1.0, &p).unwrap(),
    );
    assert!((x - y).abs() <= 1e-8 * x.abs());
    assert!(
        besselk_profile(10.0, &p, 3).unwrap().abs()
            < 1e-3 * besselk_profile(0.5, &p, 3).unwrap().abs()
    );
}
