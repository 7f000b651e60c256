use kgfield::currents::*;
use kgfield::gauge::charge_phase_space;
use kgfield::random::{random_field, random_real_field, random_sector_field};
use kgfield::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn lattice() -> MomentumLattice {
    MomentumLattice::new(vec![2.0 * PI, 4.0 * PI], vec![8, 12]).unwrap()
}

fn params(a: f64) -> ModelParams {
    ModelParams::new(1.3, 0.7, a).unwrap()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Field with a single coefficient `c` at signed index `s` in one sector.
fn single_mode(s: [i64; 2], c: C64, plus: bool, a: f64) -> LatticeField {
    let lat = lattice();
    let mut modes = vec![C64::new(0.0, 0.0); lat.len()];
    modes[lat.flat_from_signed(&s).unwrap()] = c;
    let zero = vec![C64::new(0.0, 0.0); lat.len()];
    let (p, m) = if plus { (modes, zero) } else { (zero, modes) };
    LatticeField::new(lat, params(a), p, m, 0.0).unwrap()
}

#[test]
fn single_positive_mode_current_is_constant_along_k() {
    let c = C64::new(0.6, -0.8);
    let a = 0.4;
    let f = single_mode([2, -3], c, true, a);
    let k = f
        .lattice()
        .wavevector(f.lattice().flat_from_signed(&[2, -3]).unwrap());
    let p = f.params();
    let w = p.omega(k[0] * k[0] + k[1] * k[1]);
    let expect = [w, k[0], k[1]].map(|km| p.kappa() * (1.0 + a) / p.m() * c.norm_sqr() * km);
    let j = current_ja(&f, 0.9);
    for (comp, e) in j.components.iter().zip(expect) {
        for z in comp {
            assert!((z - C64::new(e, 0.0)).norm() <= 1e-12 * w, "{z} vs {e}");
        }
    }
}

#[test]
fn negative_mode_current_is_real_with_positive_density() {
    let f = single_mode([1, 4], C64::new(0.3, 0.5), false, -0.6);
    let j = current_ja(&f, 0.2);
    assert!(j
        .components
        .iter()
        .flatten()
        .all(|z| z.im.abs() <= 1e-14 * j.max_abs()));
    assert!(j.components[0].iter().all(|z| z.re > 0.0));
}

#[test]
fn mixed_energy_density_is_complex_somewhere() {
    let f = random_field(&lattice(), &params(0.3), 0.5, 0.0, &mut rng(5));
    let j0 = &current_ja(&f, 0.0).components[0];
    let peak = j0.iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(j0.iter().any(|z| z.im.abs() > 1e-3 * peak));
}

#[test]
fn time_component_matches_direct_form() {
    let f = random_field(&lattice(), &params(-0.5), 0.6, 0.1, &mut rng(6));
    let j0 = &current_ja(&f, 1.3).components[0];
    let direct = ja0_direct(&f, 1.3);
    let scale = j0.iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(j0
        .iter()
        .zip(&direct)
        .all(|(x, y)| (x - y).norm() <= 1e-12 * scale));
}

#[test]
fn twisted_current_is_conserved_and_probability_current_is_not() {
    let f = random_field(&lattice(), &params(0.2), 0.5, 0.0, &mut rng(7));
    assert!(continuity_residual(&f, 0.7, Which::Ja) <= 1e-10);
    assert!(continuity_residual(&f, 0.7, Which::CalJa) > 1e-6);
}

#[test]
fn equal_frequencies_conserve_probability_current() {
    let o = TwoModeOracle::new(
        vec![1.0, 0.0],
        vec![0.0, 1.0],
        C64::new(1.0, 0.2),
        C64::new(-0.4, 0.7),
        params(0.0),
    )
    .unwrap();
    let f = o.lattice_field(&lattice(), 0.3).unwrap();
    assert!(continuity_residual(&f, 0.4, Which::CalJa) <= 1e-10);
}

#[test]
fn lattice_currents_match_two_mode_closed_forms() {
    let o = TwoModeOracle::new(
        vec![2.0, 0.5],
        vec![-1.0, 1.5],
        C64::new(0.8, -0.1),
        C64::new(0.3, 0.9),
        params(0.0),
    )
    .unwrap();
    let a = -0.35;
    let f = o.lattice_field(&lattice(), a).unwrap();
    let t = 0.65;
    let cal = current_calja(&f, t);
    let ja = current_ja(&f, t);
    let div = divergence(&f, t, Which::CalJa);
    let fine = lattice().padded();
    let scale = cal.max_abs();
    for node in (0..fine.len()).step_by(7) {
        let x = fine.node_position(node);
        let rec = two_mode_oracle(&o, a, &[t, x[0], x[1]]).unwrap();
        for mu in 0..3 {
            assert!((cal.components[mu][node] - rec.cal_j[mu]).abs() <= 1e-12 * scale);
            assert!((ja.components[mu][node] - rec.j[mu]).norm() <= 1e-12 * scale);
        }
        assert!((div[node].re - rec.div_cal_j).abs() <= 1e-10 * scale);
        assert_eq!(rec.div_j, 0.0);
    }
}

#[test]
fn single_mode_oracle_reduces_to_plane_wave() {
    let c1 = C64::new(0.5, 0.5);
    let o = TwoModeOracle::new(vec![0.7], vec![1.9], c1, C64::new(0.0, 0.0), params(0.0)).unwrap();
    let a = 0.25;
    let (k1, _) = o.four_vectors();
    let rec = two_mode_oracle(&o, a, &[0.3, -2.0]).unwrap();
    let p = o.params;
    for mu in 0..2 {
        let e = (1.0 + a) * p.kappa() / p.m() * c1.norm_sqr() * k1[mu];
        assert!((rec.cal_j[mu] - e).abs() <= 1e-14);
    }
}

#[test]
fn noncovariance_vanishes_without_boost() {
    let o = TwoModeOracle::new(
        vec![0.0],
        vec![3f64.sqrt()],
        C64::new(1.0, 0.0),
        C64::new(1.0, 0.0),
        ModelParams::new(1.0, 1.0, 0.0).unwrap(),
    )
    .unwrap();
    let r = noncovariance_demo(&o, &Boost::exact(vec![0.0]).unwrap()).unwrap();
    assert_eq!(r.delta, 0.0);
    let r = noncovariance_demo(&o, &Boost::exact(vec![0.5]).unwrap()).unwrap();
    assert!((r.ksq_before + 6.5).abs() <= 1e-12);
    assert!(r.delta > 1e-3);
    assert!((r.k1k2_before - r.k1k2_after).abs() <= 1e-12);
}

#[test]
fn probability_current_agrees_with_rosenstein_horwitz_for_positive_energy() {
    let f = random_sector_field(&lattice(), &params(0.0), 0.6, 1, 0.0, &mut rng(8));
    let cal = current_calja(&f, 0.5);
    let rh = current_rosenstein_horwitz(&f, 0.5);
    let scale = cal.max_abs();
    for (x, y) in cal
        .components
        .iter()
        .flatten()
        .zip(rh.components.iter().flatten())
    {
        assert!((x - y).abs() <= 1e-12 * scale);
    }
    let rho = rho_a(&f, 0.5).unwrap();
    assert!(rho
        .iter()
        .zip(&rh.components[0])
        .all(|(x, y)| (x - y).abs() <= 1e-12 * scale));
}

#[test]
fn density_is_nonnegative_and_matches_both_routes() {
    for a in [-0.9, 0.0, 0.9] {
        let f = random_field(&lattice(), &params(a), 0.5, 0.0, &mut rng(9));
        let rho = rho_a(&f, 1.1).unwrap();
        let cal0 = &current_calja(&f, 1.1).components[0];
        let vel = rho_a_velocity_form(&f, 1.1);
        let scale = rho.iter().fold(0.0f64, |m, v| m.max(*v));
        assert!(rho.iter().all(|v| *v >= 0.0) && cal0.iter().all(|v| *v >= 0.0));
        assert!(rho
            .iter()
            .zip(&vel)
            .all(|(x, y)| (x - y).abs() <= 1e-12 * scale));
    }
    let zero = LatticeField::zero(lattice(), params(0.1), 0.0);
    assert!(rho_a(&zero, 0.0).unwrap().iter().all(|v| *v == 0.0));
}

#[test]
fn total_probability_agrees_with_charge_forms() {
    let f = random_field(&lattice(), &params(0.45), 0.5, 0.0, &mut rng(10));
    let total = total_probability(&f, 0.8).unwrap();
    let ja0 = total_ja0(&f, 0.8);
    assert!((ja0.re - total).abs() <= 1e-12 * total && ja0.im.abs() <= 1e-12 * total);
    assert!((charge_phase_space(&f, 0.8).unwrap() - total).abs() <= 1e-10 * total);
}

#[test]
fn real_part_split_reassembles_and_vanishes_where_expected() {
    let f = random_field(&lattice(), &params(0.3), 0.5, 0.0, &mut rng(11));
    let (re, im) = split_re_im(&f, 0.4);
    let j = current_ja(&f, 0.4);
    let scale = j.max_abs();
    for mu in 0..3 {
        for n in 0..j.components[mu].len() {
            let z = C64::new(re.components[mu][n], im.components[mu][n]);
            assert!((z - j.components[mu][n]).norm() <= 1e-12 * scale);
        }
    }

    let pos = random_sector_field(&lattice(), &params(0.3), 0.5, 1, 0.0, &mut rng(12));
    let (_, im) = split_re_im(&pos, 0.4);
    assert!(im.max_abs() <= 1e-13 * current_ja(&pos, 0.4).max_abs());

    let real = random_real_field(&lattice(), &params(-0.8), 0.5, 0.0, &mut rng(13));
    let (re_a, im_a) = split_re_im(&real, 0.4);
    let (re_b, _) = split_re_im(&real.with_params(params(0.6)), 0.4);
    assert!(im_a.max_abs() <= 1e-13 * re_a.max_abs());
    let gap = re_a
        .components
        .iter()
        .flatten()
        .zip(re_b.components.iter().flatten())
        .map(|(x, y)| (x - y).abs());
    assert!(gap.fold(0.0, f64::max) <= 1e-12 * re_a.max_abs());
}

#[test]
fn boosted_plane_wave_currents_transform_as_vectors() {
    let p = params(0.2);
    let f = PlaneWaveField::new(
        p,
        vec![
            PlaneMode {
                epsilon: Sector::Plus,
                k: vec![0.4, -0.2],
                coeff: C64::new(1.0, 0.3),
            },
            PlaneMode {
                epsilon: Sector::Minus,
                k: vec![-0.9, 0.6],
                coeff: C64::new(-0.2, 0.5),
            },
        ],
    )
    .unwrap();
    let b = Boost::exact(vec![0.3, -0.45]).unwrap();
    let g = f.boost(&b).unwrap();
    let x = [0.7, 1.1, -0.4];
    let xp = b.apply(&x);
    let j = current_ja_at(&f, &x);
    let jp = current_ja_at(&g, &xp);
    let re: Vec<f64> = j.iter().map(|z| z.re).collect();
    let im: Vec<f64> = j.iter().map(|z| z.im).collect();
    let (bre, bim) = (b.apply(&re), b.apply(&im));
    for mu in 0..3 {
        assert!((jp[mu] - C64::new(bre[mu], bim[mu])).norm() <= 1e-12);
    }
}
