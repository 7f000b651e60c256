//! Seeded random band-limited fields for property checks.

use crate::field::LatticeField;
use crate::lattice::{MomentumLattice, C64};
use crate::params::ModelParams;
use rand::Rng;

fn in_band(lattice: &MomentumLattice, flat: usize, band: f64) -> bool {
    let s = lattice.signed_index(flat);
    (0..lattice.dim()).all(|i| (s[i].abs() as f64) < band * lattice.counts()[i] as f64 / 2.0)
}

fn draw<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Random coefficients on modes with `|n_i| < band * N_i / 2` in both sectors.
pub fn random_field<R: Rng + ?Sized>(
    lattice: &MomentumLattice,
    params: &ModelParams,
    band: f64,
    t0: f64,
    rng: &mut R,
) -> LatticeField {
    let n = lattice.len();
    let mut plus = vec![C64::new(0.0, 0.0); n];
    let mut minus = plus.clone();
    for f in 0..n {
        if in_band(lattice, f, band) {
            plus[f] = draw(rng);
            minus[f] = draw(rng);
        }
    }
    LatticeField::new(lattice.clone(), *params, plus, minus, t0).expect("valid random field")
}

/// Random field with one sector only (`sign = +1` or `-1`).
pub fn random_sector_field<R: Rng + ?Sized>(
    lattice: &MomentumLattice,
    params: &ModelParams,
    band: f64,
    sign: i32,
    t0: f64,
    rng: &mut R,
) -> LatticeField {
    let f = random_field(lattice, params, band, t0, rng);
    let (p, m) = f.energy_split();
    if sign > 0 {
        p
    } else {
        m
    }
}

/// Random field whose data `(psi, psidot)` at `t0` are real: `phi_minus(k) = phi_plus(-k)^*`.
pub fn random_real_field<R: Rng + ?Sized>(
    lattice: &MomentumLattice,
    params: &ModelParams,
    band: f64,
    t0: f64,
    rng: &mut R,
) -> LatticeField {
    let n = lattice.len();
    let mut plus = vec![C64::new(0.0, 0.0); n];
    for (f, c) in plus.iter_mut().enumerate() {
        if in_band(lattice, f, band) {
            *c = draw(rng);
        }
    }
    let minus: Vec<C64> = (0..n).map(|f| plus[lattice.neg_flat(f)].conj()).collect();
    LatticeField::new(lattice.clone(), *params, plus, minus, t0).expect("valid random field")
}
