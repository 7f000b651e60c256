use kgfield::currents::Which;
use kgfield::limits::*;
use kgfield::packets::PacketEnergy;
use kgfield::MomentumLattice;

fn sweep(energy: PacketEnergy) -> LimitSweep {
    let lat = MomentumLattice::cubic(2, 24.0, 64).unwrap();
    LimitSweep::doubling(lat, 1.5, vec![1.0, 0.5], 0.3, 0.02, 6, energy)
}

fn in_band(slope: f64, centre: f64) -> bool {
    (slope - centre).abs() <= 0.4
}

#[test]
fn currents_approach_schrodinger_densities() {
    let s = sweep(PacketEnergy::Nonrelativistic);
    for which in [Which::Ja, Which::CalJa] {
        let t = limit_deviation(&s, which).unwrap();
        assert!(
            in_band(t.slope_rho, -2.0) && in_band(t.slope_j, -2.0),
            "{t:?}"
        );
    }
}

#[test]
fn field_ladders() {
    let s = sweep(PacketEnergy::Nonrelativistic);
    let c = psi_c_ladder(&s).unwrap();
    let tl = psi_tilde_ladder(&s).unwrap();
    let mu = mutual_density_ladder(&s.with_energy(PacketEnergy::Positive)).unwrap();
    let chi = schrodinger_residual_ladder(&s.with_energy(PacketEnergy::Positive)).unwrap();
    for l in [c, tl, chi] {
        assert!(in_band(l.slope, -2.0), "{l:?}");
    }
    // leading corrections of the two densities coincide, so their gap closes at fourth order
    assert!(in_band(mu.slope, -4.0), "{mu:?}");
}

#[test]
fn inverse_root_expansion_is_fifth_order() {
    let s = sweep(PacketEnergy::Positive);
    let phi =
        kgfield::packets::gaussian_samples(&s.lattice, &s.center, s.sigma, &s.carrier).unwrap();
    let l = operator_expansion_ladder(&s.lattice, &phi, &s.masses).unwrap();
    assert!(in_band(l.slope, -5.0), "{l:?}");
}
