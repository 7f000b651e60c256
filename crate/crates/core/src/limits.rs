//! Nonrelativistic limit on a ladder of growing masses at fixed spatial content.

use crate::currents::{current_calja, current_ja, Which};
use crate::error::{KgError, Result};
use crate::field::LatticeField;
use crate::lattice::{MomentumLattice, C64};
use crate::packets::{gaussian_packet, PacketEnergy};
use crate::params::ModelParams;
use serde::{Deserialize, Serialize};

pub const MIN_LADDER: usize = 4;

/// `rho = |psi|^2` and `j = -(i/2M)[psi^* grad psi - psi grad psi^*]` on the padded grid at time `t`.
pub fn schrodinger_reference(field: &LatticeField, t: f64) -> (Vec<f64>, Vec<Vec<f64>>) {
    let lat = field.lattice();
    let modes = field.psi_modes(t);
    let psi = lat.to_padded_samples(&modes);
    let rho = psi.iter().map(|z| z.norm_sqr()).collect();
    let m = field.params().m();
    let j = (0..lat.dim())
        .map(|i| {
            let g = lat.to_padded_samples(&lat.derivative_modes(&modes, i));
            psi.iter()
                .zip(&g)
                .map(|(p, g)| (p.conj() * g).im / m)
                .collect()
        })
        .collect();
    (rho, j)
}

/// Gaussian profile held fixed while the mass climbs the ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSweep {
    pub lattice: MomentumLattice,
    pub center: Vec<f64>,
    pub sigma: f64,
    pub carrier: Vec<f64>,
    pub a: f64,
    pub masses: Vec<f64>,
    /// Must equal `1/(1+a)` when given.
    #[serde(default)]
    pub kappa: Option<f64>,
    pub energy: PacketEnergy,
    #[serde(default)]
    pub t: f64,
}

impl LimitSweep {
    /// Ladder `M_j = M_0 2^j`, `j = 0..steps`, with `M_0` chosen so that `(k/M_0)^2 = ratio` for the
    /// packet's mean-square wave number `k^2 = |k0|^2 + d / (2 sigma^2)`.
    pub fn doubling(
        lattice: MomentumLattice,
        sigma: f64,
        carrier: Vec<f64>,
        a: f64,
        ratio: f64,
        steps: usize,
        energy: PacketEnergy,
    ) -> Self {
        let d = lattice.dim() as f64;
        let k2 = carrier.iter().map(|k| k * k).sum::<f64>() + d / (2.0 * sigma * sigma);
        let m0 = (k2 / ratio).sqrt();
        LimitSweep {
            center: vec![0.0; lattice.dim()],
            lattice,
            sigma,
            carrier,
            a,
            masses: (0..steps).map(|j| m0 * 2f64.powi(j as i32)).collect(),
            kappa: None,
            energy,
            t: 0.0,
        }
    }

    pub fn with_energy(&self, energy: PacketEnergy) -> Self {
        LimitSweep {
            energy,
            ..self.clone()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.masses.len() < MIN_LADDER {
            return Err(KgError::Precondition(format!(
                "ladder has {} points, at least {MIN_LADDER} required",
                self.masses.len()
            )));
        }
        self.check_kappa()
    }

    /// Rejects an explicit `kappa` other than `1/(1+a)`.
    pub fn check_kappa(&self) -> Result<()> {
        if let Some(k) = self.kappa {
            let want = 1.0 / (1.0 + self.a);
            if (k - want).abs() > 1e-14 * want {
                return Err(KgError::Precondition(format!(
                    "kappa must equal 1/(1+a) = {want}, got {k}"
                )));
            }
        }
        Ok(())
    }

    pub fn params(&self, m: f64) -> Result<ModelParams> {
        ModelParams::schrodinger_normalized(m, self.a)
    }

    pub fn packet(&self, m: f64) -> Result<LatticeField> {
        gaussian_packet(
            &self.lattice,
            &self.params(m)?,
            &self.center,
            self.sigma,
            &self.carrier,
            self.energy,
            0.0,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitRow {
    pub m: f64,
    pub rel_dev_rho: f64,
    pub rel_dev_j: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitTable {
    pub which: Which,
    pub rows: Vec<LimitRow>,
    pub slope_rho: f64,
    pub slope_j: f64,
}

fn l2(v: impl Iterator<Item = f64>) -> f64 {
    v.map(|x| x * x).sum::<f64>().sqrt()
}

fn rel(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(KgError::InvalidParameter(
            "slope fit needs two or more matched points".into(),
        ));
    }
    if xs.iter().chain(ys).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(KgError::InvalidParameter(
            "slope fit needs positive finite values".into(),
        ));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

fn current_parts(field: &LatticeField, t: f64, which: Which) -> (Vec<f64>, Vec<Vec<f64>>) {
    match which {
        Which::Ja => {
            let cur = current_ja(field, t);
            let re = |c: &Vec<C64>| c.iter().map(|z| z.re).collect::<Vec<f64>>();
            (
                re(&cur.components[0]),
                cur.components[1..].iter().map(re).collect(),
            )
        }
        Which::CalJa => {
            let cur = current_calja(field, t);
            (cur.components[0].clone(), cur.components[1..].to_vec())
        }
    }
}

/// Relative L2 deviations of the chosen current from the Schrodinger densities along the ladder.
///
/// The density row uses the positive-energy packet. The spatial row uses nonrelativistic data
/// `psi_dot = -i M psi`, because for a positive-energy field the spatial `J_a` equals `j` identically.
/// The sweep's own `energy` setting is not consulted here.
pub fn limit_deviation(sweep: &LimitSweep, which: Which) -> Result<LimitTable> {
    sweep.validate()?;
    let rows = sweep
        .masses
        .iter()
        .map(|&m| limit_row(sweep, which, m))
        .collect::<Result<Vec<_>>>()?;
    let ms: Vec<f64> = rows.iter().map(|r| r.m).collect();
    let slope_rho = loglog_slope(&ms, &rows.iter().map(|r| r.rel_dev_rho).collect::<Vec<_>>())?;
    let slope_j = loglog_slope(&ms, &rows.iter().map(|r| r.rel_dev_j).collect::<Vec<_>>())?;
    Ok(LimitTable {
        which,
        rows,
        slope_rho,
        slope_j,
    })
}

/// One ladder row of [`limit_deviation`] at mass `m`.
pub fn limit_row(sweep: &LimitSweep, which: Which, m: f64) -> Result<LimitRow> {
    sweep.check_kappa()?;
    let field = sweep.with_energy(PacketEnergy::Positive).packet(m)?;
    let (rho, _) = schrodinger_reference(&field, sweep.t);
    let (c0, _) = current_parts(&field, sweep.t, which);
    let dev_rho = rel(
        l2(c0.iter().zip(&rho).map(|(a, b)| a - b)),
        l2(rho.iter().copied()),
    );
    let field = sweep.with_energy(PacketEnergy::Nonrelativistic).packet(m)?;
    let (_, j) = schrodinger_reference(&field, sweep.t);
    let (_, cs) = current_parts(&field, sweep.t, which);
    let dev_j = rel(
        l2(cs
            .iter()
            .zip(&j)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y))),
        l2(j.iter().flatten().copied()),
    );
    Ok(LimitRow {
        m,
        rel_dev_rho: dev_rho,
        rel_dev_j: dev_j,
    })
}

/// Ladder of `(M, value)` pairs with its fitted log-log slope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ladder {
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
}

fn ladder<F: Fn(f64) -> Result<f64>>(masses: &[f64], f: F) -> Result<Ladder> {
    let points = masses
        .iter()
        .map(|&m| Ok((m, f(m)?)))
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    Ok(Ladder {
        slope: loglog_slope(&xs, &ys)?,
        points,
    })
}

/// `||(D^{-1/2} - (M^-1 + M^-3 grad^2 / 2)) phi|| / ||phi||` for the given samples.
pub fn operator_expansion_ladder(
    lattice: &MomentumLattice,
    phi: &[C64],
    masses: &[f64],
) -> Result<Ladder> {
    lattice.check_len(phi.len())?;
    let modes = lattice.to_modes(phi);
    let norm = l2(modes.iter().map(|c| c.norm()));
    ladder(masses, |m| {
        let dev = l2(modes.iter().enumerate().map(|(f, c)| {
            let k2 = lattice.ksq(f);
            let exact = 1.0 / (k2 + m * m).sqrt();
            let approx = 1.0 / m - 0.5 * k2 / m.powi(3);
            (exact - approx).abs() * c.norm()
        }));
        Ok(dev / norm)
    })
}

fn packet_ladder<F: Fn(&LatticeField) -> f64>(sweep: &LimitSweep, f: F) -> Result<Ladder> {
    sweep.validate()?;
    ladder(&sweep.masses, |m| Ok(f(&sweep.packet(m)?)))
}

fn rel_modes(a: &[C64], b: &[C64], reference: &[C64]) -> f64 {
    l2(a.iter().zip(b).map(|(x, y)| (x - y).norm())) / l2(reference.iter().map(|c| c.norm()))
}

/// `||psi_c - psi|| / ||psi||` at time `t`.
pub fn psi_c_deviation(field: &LatticeField, t: f64) -> f64 {
    let psi = field.psi_modes(t);
    let psic = field.sector_modes(t, C64::new(1.0, 0.0), C64::new(-1.0, 0.0), 0);
    rel_modes(&psic, &psi, &psi)
}

/// `||psi~_a - (1+a) psi|| / ||(1+a) psi||` at time `t`.
pub fn psi_tilde_deviation(field: &LatticeField, t: f64) -> f64 {
    let a = field.params().a();
    let scaled: Vec<C64> = field.psi_modes(t).iter().map(|c| c * (1.0 + a)).collect();
    let tilde = field.sector_modes(t, C64::new(1.0 + a, 0.0), C64::new(a - 1.0, 0.0), 0);
    rel_modes(&tilde, &scaled, &scaled)
}

/// Relative L2 distance between `J_a^0` and the probability density at time `t`.
pub fn mutual_density_deviation(field: &LatticeField, t: f64) -> f64 {
    let j0 = &current_ja(field, t).components[0];
    let r0 = &current_calja(field, t).components[0];
    l2(j0.iter().zip(r0).map(|(a, b)| a.re - b)) / l2(r0.iter().copied())
}

pub fn psi_c_ladder(sweep: &LimitSweep) -> Result<Ladder> {
    packet_ladder(sweep, |f| psi_c_deviation(f, sweep.t))
}

pub fn psi_tilde_ladder(sweep: &LimitSweep) -> Result<Ladder> {
    packet_ladder(sweep, |f| psi_tilde_deviation(f, sweep.t))
}

pub fn mutual_density_ladder(sweep: &LimitSweep) -> Result<Ladder> {
    packet_ladder(sweep, |f| mutual_density_deviation(f, sweep.t))
}

/// `||i chi_dot + grad^2 chi / 2M|| / ||grad^2 chi / 2M||` for `chi = e^{iMt} psi`.
pub fn schrodinger_residual(field: &LatticeField, t: f64) -> f64 {
    let lat = field.lattice();
    let m = field.params().m();
    let phase = C64::from_polar(1.0, m * t);
    let psi = field.psi_modes(t);
    let dot = field.psidot_modes(t);
    let mut res = Vec::with_capacity(lat.len());
    let mut kin = Vec::with_capacity(lat.len());
    for f in 0..lat.len() {
        let chi = phase * psi[f];
        let chi_dot = phase * (C64::new(0.0, m) * psi[f] + dot[f]);
        let lap = -lat.ksq(f) * chi / (2.0 * m);
        res.push(C64::new(0.0, 1.0) * chi_dot + lap);
        kin.push(lap);
    }
    l2(res.iter().map(|c| c.norm())) / l2(kin.iter().map(|c| c.norm()))
}

pub fn schrodinger_residual_ladder(sweep: &LimitSweep) -> Result<Ladder> {
    packet_ladder(sweep, |f| schrodinger_residual(f, sweep.t))
}
