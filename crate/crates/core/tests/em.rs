use kgfield::em::*;
use kgfield::inner::inner_a;
use kgfield::random::random_field;
use kgfield::*;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn lattice(n: usize) -> MomentumLattice {
    MomentumLattice::new(vec![5.0, 7.0], vec![n, n + 2]).unwrap()
}

fn params() -> ModelParams {
    ModelParams::new(1.1, 0.8, -0.3).unwrap()
}

/// `sum_i (2 pi n_i / L_i - s_i)^2 + M^2` over signed indices, sorted.
fn shifted_spectrum(lat: &MomentumLattice, shift: [f64; 2], m: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..lat.len())
        .map(|j| {
            let s = lat.signed_index(j);
            (0..2)
                .map(|i| (2.0 * PI * s[i] as f64 / lat.lengths()[i] - shift[i]).powi(2))
                .sum::<f64>()
                + m * m
        })
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

fn worst_rel(got: &[f64], want: &[f64]) -> f64 {
    got.iter()
        .zip(want)
        .map(|(a, b)| (a - b).abs() / b)
        .fold(0.0, f64::max)
}

fn rotating_background(lat: &MomentumLattice, q: f64) -> EMBackground {
    let (lx, ly) = (lat.lengths()[0], lat.lengths()[1]);
    EMBackground::from_fn(lat.clone(), q, |x| {
        [
            0.4 * (2.0 * PI * x[1] / ly).cos(),
            -0.3 * (2.0 * PI * x[0] / lx).sin(),
        ]
    })
    .unwrap()
}

#[test]
fn free_operator_has_lattice_dispersion() {
    let lat = lattice(8);
    let op = build_dq(&EMBackground::free(lat.clone(), 1.3).unwrap(), &params()).unwrap();
    assert!(worst_rel(op.eigenvalues(), &shifted_spectrum(&lat, [0.0, 0.0], 1.1)) <= 1e-12);
}

#[test]
fn constant_potential_shifts_momenta() {
    let lat = lattice(8);
    let (q, a0) = (0.6, [0.9, 0.0]);
    let op = build_dq(
        &EMBackground::constant(lat.clone(), q, a0).unwrap(),
        &params(),
    )
    .unwrap();
    assert!(
        worst_rel(
            op.eigenvalues(),
            &shifted_spectrum(&lat, [q * a0[0], 0.0], 1.1)
        ) <= 1e-10
    );
}

#[test]
fn magnetic_spectrum_is_positive_and_root_squares_back() {
    let lat = lattice(8);
    let op = build_dq(&rotating_background(&lat, 2.0), &params()).unwrap();
    assert!(op.eigenvalues()[0] >= 1.1f64.powi(2) * (1.0 - 1e-9));
    let h = op.power_matrix(0.5);
    let diff = (&h * &h - op.matrix()).norm() / op.matrix().norm();
    assert!(diff <= 1e-11);
    assert!(op.symmetrization_residual() <= 1e-10);
}

#[test]
fn free_dense_evolution_matches_spectral_evolution() {
    let lat = lattice(6);
    let p = params();
    let op = build_dq(&EMBackground::free(lat.clone(), 0.4).unwrap(), &p).unwrap();
    let f = random_field(&lat, &p, 0.7, 0.0, &mut ChaCha8Rng::seed_from_u64(3));
    let (psi0, dot0) = f.evaluate(0.0).unwrap();
    for t in [0.4, 2.5] {
        let e = em_inner_and_evolve(&psi0, &dot0, &op, &p, t).unwrap();
        let (psi, dot) = f.evaluate(t).unwrap();
        let scale = psi.iter().chain(&dot).map(|z| z.norm()).fold(0.0, f64::max);
        let gap = psi
            .iter()
            .zip(&e.psi)
            .chain(dot.iter().zip(&e.psidot))
            .map(|(x, y)| (x - y).norm());
        assert!(gap.fold(0.0, f64::max) <= 1e-10 * scale);
        let n = inner_a(&f, &f, t).unwrap();
        assert!((e.inner - n).norm() <= 1e-10 * n.norm());
    }
}

#[test]
fn inner_product_is_conserved_in_a_magnetic_background() {
    let lat = lattice(6);
    let p = params();
    let op = build_dq(&rotating_background(&lat, 1.2), &p).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut draw = || -> Vec<C64> {
        (0..lat.len())
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    };
    let (psi, dot) = (draw(), draw());
    let n0 = em_inner_and_evolve(&psi, &dot, &op, &p, 0.0).unwrap().inner;
    assert!(n0.re > 0.0);
    for j in 1..=10 {
        let n = em_inner_and_evolve(&psi, &dot, &op, &p, 0.6 * j as f64)
            .unwrap()
            .inner;
        assert!((n - n0).norm() <= 1e-10 * n0.norm());
    }
}

#[test]
fn eigenmodes_evolve_by_a_phase() {
    let lat = lattice(6);
    let p = params();
    let op = build_dq(&rotating_background(&lat, 1.2), &p).unwrap();
    let w = op.eigenvalues()[3].sqrt();
    let psi: Vec<C64> = op.eigenvectors().column(3).iter().copied().collect();
    let dot: Vec<C64> = psi.iter().map(|z| z * C64::new(0.0, -w)).collect();
    let e = em_inner_and_evolve(&psi, &dot, &op, &p, 2.2).unwrap();
    let ph = C64::from_polar(1.0, -2.2 * w);
    assert!(e
        .psi
        .iter()
        .zip(&psi)
        .all(|(x, y)| (x - ph * y).norm() <= 1e-12));
}

#[test]
fn scalar_potential_phase_removes_the_potential() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let events: Vec<Vec<f64>> = (0..100)
        .map(|_| (0..3).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect();
    let no_a = WaveVectorPotential {
        alpha: vec![0.0, 0.0],
        k: vec![0.0, 0.0],
    };

    let (m, q) = (1.1, 0.7);
    let p = vec![0.5, -0.8];
    let omega = (p.iter().map(|x| x * x).sum::<f64>() + m * m).sqrt();
    let free = ManufacturedPacket {
        omega,
        p: p.clone(),
        s: None,
    };
    let r = em_gauge_residual(
        &WavePotential::uniform(0.0, 2),
        &no_a,
        &free,
        q,
        m,
        0.0,
        &events,
    )
    .unwrap();
    assert!(r <= 1e-12);
    let uniform = WavePotential::uniform(0.45, 2);
    assert!(em_gauge_residual(&uniform, &no_a, &free, q, m, 0.3, &events).unwrap() <= 1e-10);

    let phi = WavePotential {
        phi0: -0.1,
        amp: 0.35,
        nu: 0.8,
        k: vec![0.5, 1.1],
    };
    let a = WaveVectorPotential {
        alpha: vec![0.2, -0.3],
        k: vec![0.6, 0.4],
    };
    let packet = ManufacturedPacket {
        omega: 1.2,
        p,
        s: Some(1.3),
    };
    assert!(em_gauge_residual(&phi, &a, &packet, q, m, 0.0, &events).unwrap() <= 1e-8);
}

#[test]
fn invalid_backgrounds_and_operators_are_rejected() {
    let lat = lattice(6);
    let zeros = vec![0.0; lat.len()];
    let mut phi = zeros.clone();
    phi[3] = 0.2;
    let bg = EMBackground::new(lat.clone(), vec![zeros.clone(), zeros.clone()], phi, 1.0).unwrap();
    assert!(matches!(
        build_dq(&bg, &params()),
        Err(KgError::Precondition(_))
    ));

    assert!(EMBackground::free(MomentumLattice::cubic(3, 4.0, 4).unwrap(), 1.0).is_err());
    assert!(EMBackground::free(MomentumLattice::cubic(2, 4.0, 34).unwrap(), 1.0).is_err());
    assert!(EMBackground::new(lat.clone(), vec![zeros.clone()], zeros.clone(), 1.0).is_err());

    let mut skew = DMatrix::<C64>::identity(lat.len(), lat.len());
    skew[(0, 1)] = C64::new(0.5, 0.0);
    assert!(matches!(
        DenseOperator::from_matrix(lat, skew),
        Err(KgError::OperatorCheck(_))
    ));
}
