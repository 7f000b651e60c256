//! Builds the configured field in every representation it supports.

use crate::config::{relative_to, FieldSpec, Model};
use crate::error::{config, ConfigError};
use anyhow::{Context, Result};
use kgfield::amplitude::{AmplitudeField, QuadratureSpec};
use kgfield::io::{read_state, StateFile};
use kgfield::localization::{localized_state, localized_state_at_node, LocalizedState};
use kgfield::packets::gaussian_packet;
use kgfield::random::random_field;
use kgfield::{LatticeField, ModelParams, MomentumLattice, PlaneWaveField, Sector, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::path::Path;

#[derive(Debug, Clone, Default)]
pub struct Source {
    pub lattice: Option<LatticeField>,
    pub modes: Option<PlaneWaveField>,
    pub localized: Option<LocalizedState>,
    pub amplitude: Option<AmplitudeField>,
}

/// Lattice realization of plane waves whose wave vectors all sit on lattice modes.
fn on_lattice(lat: &MomentumLattice, pw: &PlaneWaveField, t0: f64) -> Option<LatticeField> {
    let zero = C64::new(0.0, 0.0);
    let mut plus = vec![zero; lat.len()];
    let mut minus = vec![zero; lat.len()];
    for m in pw.modes() {
        if m.k.len() != lat.dim() {
            return None;
        }
        let mut s = [0i64; 3];
        for i in 0..lat.dim() {
            let n = m.k[i] * lat.lengths()[i] / (2.0 * PI);
            if (n - n.round()).abs() > 1e-9 {
                return None;
            }
            s[i] = n.round() as i64;
        }
        let f = lat.flat_from_signed(&s[..lat.dim()])?;
        // Mode phases are referenced to x^0 = 0; lattice coefficients to t0.
        let w = pw.omega(m);
        let phase = C64::from_polar(1.0, -m.epsilon.sign() * w * t0);
        match m.epsilon {
            Sector::Plus => plus[f] += m.coeff * phase,
            Sector::Minus => minus[f] += m.coeff * phase,
        }
    }
    LatticeField::new(lat.clone(), *pw.params(), plus, minus, t0).ok()
}

fn check_matches(model: &Model, lat: &MomentumLattice, p: &ModelParams, t0: f64) -> Result<()> {
    let same = model.d == lat.dim()
        && model.l == lat.lengths()
        && model.n == lat.counts()
        && model.m == p.m()
        && model.kappa == p.kappa()
        && model.a == p.a()
        && model.t0 == t0;
    if same {
        Ok(())
    } else {
        Err(ConfigError::new("field file does not match the model block").into())
    }
}

pub fn build(spec: &FieldSpec, model: &Model, seed: u64, config_path: &Path) -> Result<Source> {
    let lat = model.lattice()?;
    let p = model.params()?;
    let t0 = model.t0;
    let mut src = Source::default();
    match spec {
        FieldSpec::GaussianPacket {
            center,
            width,
            carrier,
            energy,
        } => {
            src.lattice = Some(config(
                gaussian_packet(&lat, &p, center, *width, carrier, *energy, t0),
                "field",
            )?);
        }
        FieldSpec::PlaneWaves { modes } => {
            let pw = config(PlaneWaveField::new(p, modes.clone()), "field")?;
            src.lattice = on_lattice(&lat, &pw, t0);
            src.modes = Some(pw);
        }
        FieldSpec::LocalizedState { epsilon, y } => {
            let s = config(
                localized_state(*epsilon, y, &lat, p, t0),
                "field: localized state needs a lattice node",
            )?;
            src.lattice = Some(s.field().clone());
            src.localized = Some(s);
        }
        FieldSpec::Random { band } => {
            if !(*band > 0.0 && *band <= 1.0) {
                return Err(ConfigError::new(format!(
                    "field: band must lie in (0, 1], got {band}"
                ))
                .into());
            }
            src.lattice = Some(random_field(
                &lat,
                &p,
                *band,
                t0,
                &mut ChaCha8Rng::seed_from_u64(seed),
            ));
        }
        FieldSpec::FromFile { path } => {
            let path = relative_to(config_path, path);
            let file = std::fs::File::open(&path)
                .map_err(|e| ConfigError::new(format!("field: {}: {e}", path.display())))?;
            match read_state(std::io::BufReader::new(file))
                .with_context(|| format!("reading {}", path.display()))?
            {
                StateFile::Lattice { field, localized } => {
                    check_matches(model, field.lattice(), field.params(), field.t0())?;
                    if let Some(tag) = localized {
                        src.localized =
                            Some(localized_state_at_node(tag.epsilon, tag.node, &lat, p, t0)?);
                    }
                    src.lattice = Some(field);
                }
                StateFile::PlaneWave(pw) => {
                    if pw.params() != &p || pw.dim() != model.d {
                        return Err(
                            ConfigError::new("field file does not match the model block").into(),
                        );
                    }
                    src.lattice = on_lattice(&lat, &pw, t0);
                    src.modes = Some(pw);
                }
            }
        }
        FieldSpec::Amplitude {
            plus,
            minus,
            radius,
        } => {
            let q = QuadratureSpec {
                radius: *radius,
                ..QuadratureSpec::default()
            };
            src.amplitude = Some(config(
                AmplitudeField::gaussian(p, plus.clone(), minus.clone(), q),
                "field",
            )?);
        }
    }
    Ok(src)
}

#[cfg(test)]
mod tests {
    use super::*;
    use kgfield::PlaneMode;

    #[test]
    fn lattice_plane_waves_evaluate_like_the_mode_sum() {
        let lat = MomentumLattice::new(vec![4.0, 6.0], vec![8, 8]).unwrap();
        let p = ModelParams::new(1.2, 1.0, 0.3).unwrap();
        let k = vec![2.0 * PI / 4.0, -4.0 * PI / 6.0];
        let pw = PlaneWaveField::new(
            p,
            vec![
                PlaneMode {
                    epsilon: Sector::Plus,
                    k: k.clone(),
                    coeff: C64::new(0.5, 0.2),
                },
                PlaneMode {
                    epsilon: Sector::Minus,
                    k: vec![0.0, 2.0 * PI / 6.0],
                    coeff: C64::new(-0.3, 0.0),
                },
            ],
        )
        .unwrap();
        let f = on_lattice(&lat, &pw, 0.7).unwrap();
        let (psi, _) = f.evaluate(1.9).unwrap();
        for (j, v) in psi.iter().enumerate().step_by(7) {
            let x = lat.node_position(j);
            assert!((v - pw.value(&[1.9, x[0], x[1]])).norm() <= 1e-12);
        }
        let off = PlaneWaveField::new(
            p,
            vec![PlaneMode {
                epsilon: Sector::Plus,
                k: vec![0.1, 0.0],
                coeff: C64::new(1.0, 0.0),
            }],
        )
        .unwrap();
        assert!(on_lattice(&lat, &off, 0.0).is_none());
    }
}
