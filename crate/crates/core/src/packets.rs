use crate::error::{KgError, Result};
use crate::field::LatticeField;
use crate::lattice::{MomentumLattice, C64};
use crate::params::ModelParams;
use serde::{Deserialize, Serialize};

/// Energy content of a Gaussian packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PacketEnergy {
    /// `phi_plus` from the profile, `phi_minus = 0`.
    Positive,
    /// `phi_minus` from the profile, `phi_plus = 0`.
    Negative,
    /// `psidot = 0` at `t0`: equal weight in both sectors.
    Standing,
    /// `psidot = -i M psi` at `t0`, the leading nonrelativistic data.
    Nonrelativistic,
}

/// Samples of `exp(-|x-c|^2 / (2 w^2)) e^{i k0 (x-c)}` with minimum-image displacements.
pub fn gaussian_samples(
    lattice: &MomentumLattice,
    center: &[f64],
    width: f64,
    carrier: &[f64],
) -> Result<Vec<C64>> {
    let d = lattice.dim();
    if center.len() != d || carrier.len() != d {
        return Err(KgError::InvalidParameter(
            "center and carrier must have the lattice dimension".into(),
        ));
    }
    if !(width.is_finite() && width > 0.0) {
        return Err(KgError::InvalidParameter(format!(
            "width must be positive, got {width}"
        )));
    }
    Ok((0..lattice.len())
        .map(|f| {
            let x = lattice.node_position(f);
            let mut r2 = 0.0;
            let mut phase = 0.0;
            for i in 0..d {
                let l = lattice.lengths()[i];
                let dx = (x[i] - center[i] + 0.5 * l).rem_euclid(l) - 0.5 * l;
                r2 += dx * dx;
                phase += carrier[i] * dx;
            }
            C64::from_polar((-0.5 * r2 / (width * width)).exp(), phase)
        })
        .collect())
}

pub fn gaussian_packet(
    lattice: &MomentumLattice,
    params: &ModelParams,
    center: &[f64],
    width: f64,
    carrier: &[f64],
    energy: PacketEnergy,
    t0: f64,
) -> Result<LatticeField> {
    let psi = gaussian_samples(lattice, center, width, carrier)?;
    let zero = vec![C64::new(0.0, 0.0); lattice.len()];
    match energy {
        PacketEnergy::Positive => {
            LatticeField::new(lattice.clone(), *params, lattice.to_modes(&psi), zero, t0)
        }
        PacketEnergy::Negative => {
            LatticeField::new(lattice.clone(), *params, zero, lattice.to_modes(&psi), t0)
        }
        PacketEnergy::Standing => {
            LatticeField::from_initial_data(&psi, &zero, lattice.clone(), *params, t0)
        }
        PacketEnergy::Nonrelativistic => {
            let dot: Vec<C64> = psi.iter().map(|z| z * C64::new(0.0, -params.m())).collect();
            LatticeField::from_initial_data(&psi, &dot, lattice.clone(), *params, t0)
        }
    }
}
