//! Field-state files.
//!
//! Layout: the line `kgfield-state-v1`, a TOML header, and for lattice states the line `end_header`
//! followed by little-endian `f64` pairs `(re, im)` for `phi_plus` then `phi_minus`. Modes are written
//! row-major in ascending signed index, `n_i = -floor(N_i/2), ...`. Plane-wave states are TOML only.

use crate::error::{KgError, Result};
use crate::field::LatticeField;
use crate::lattice::{MomentumLattice, C64};
use crate::localization::{localized_state_at_node, LocalizedState};
use crate::params::ModelParams;
use crate::planewave::{PlaneMode, PlaneWaveField, Sector};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, Read, Write};

pub const STATE_TAG: &str = "kgfield-state-v1";
const END_HEADER: &str = "end_header";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalizedTag {
    pub epsilon: Sector,
    pub node: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Lattice,
    Planewave,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    kind: StateKind,
    dimension: usize,
    #[serde(rename = "M")]
    m: f64,
    kappa: f64,
    a: f64,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    l: Option<Vec<f64>>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    n: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    localized: Option<LocalizedTag>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    modes: Vec<PlaneMode>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateFile {
    Lattice {
        field: LatticeField,
        localized: Option<LocalizedTag>,
    },
    PlaneWave(PlaneWaveField),
}

impl StateFile {
    pub fn kind(&self) -> StateKind {
        match self {
            StateFile::Lattice { .. } => StateKind::Lattice,
            StateFile::PlaneWave(_) => StateKind::Planewave,
        }
    }
}

/// Flat indices in file order.
pub fn file_order(lattice: &MomentumLattice) -> Vec<usize> {
    let d = lattice.dim();
    let counts = lattice.counts();
    (0..lattice.len())
        .map(|p| {
            let mut rem = p;
            let mut s = [0i64; 3];
            for i in (0..d).rev() {
                let pos = rem % counts[i];
                rem /= counts[i];
                s[i] = pos as i64 - (counts[i] / 2) as i64;
            }
            lattice
                .flat_from_signed(&s[..d])
                .expect("signed index within lattice")
        })
        .collect()
}

fn io_err(e: std::io::Error) -> KgError {
    KgError::StateFormat(e.to_string())
}

fn write_header<W: Write>(w: &mut W, header: &Header) -> Result<()> {
    let text = toml::to_string(header).map_err(|e| KgError::StateFormat(e.to_string()))?;
    writeln!(w, "{STATE_TAG}").map_err(io_err)?;
    w.write_all(text.as_bytes()).map_err(io_err)
}

pub fn write_lattice_state<W: Write>(
    w: &mut W,
    field: &LatticeField,
    localized: Option<LocalizedTag>,
) -> Result<()> {
    let lat = field.lattice();
    let p = field.params();
    let header = Header {
        kind: StateKind::Lattice,
        dimension: lat.dim(),
        m: p.m(),
        kappa: p.kappa(),
        a: p.a(),
        l: Some(lat.lengths().to_vec()),
        n: Some(lat.counts().to_vec()),
        t0: Some(field.t0()),
        localized,
        modes: Vec::new(),
    };
    write_header(w, &header)?;
    writeln!(w, "{END_HEADER}").map_err(io_err)?;
    let order = file_order(lat);
    let mut buf = Vec::with_capacity(32 * lat.len());
    for coeffs in [field.phi_plus(), field.phi_minus()] {
        for &f in &order {
            buf.extend_from_slice(&coeffs[f].re.to_le_bytes());
            buf.extend_from_slice(&coeffs[f].im.to_le_bytes());
        }
    }
    w.write_all(&buf).map_err(io_err)
}

pub fn write_localized_state<W: Write>(w: &mut W, state: &LocalizedState) -> Result<()> {
    write_lattice_state(
        w,
        state.field(),
        Some(LocalizedTag {
            epsilon: state.epsilon(),
            node: state.node(),
        }),
    )
}

pub fn write_planewave_state<W: Write>(w: &mut W, field: &PlaneWaveField) -> Result<()> {
    let p = field.params();
    let header = Header {
        kind: StateKind::Planewave,
        dimension: field.dim(),
        m: p.m(),
        kappa: p.kappa(),
        a: p.a(),
        l: None,
        n: None,
        t0: None,
        localized: None,
        modes: field.modes().to_vec(),
    };
    write_header(w, &header)
}

pub fn read_state<R: Read>(r: R) -> Result<StateFile> {
    let mut reader = BufReader::new(r);
    let mut line = String::new();
    reader.read_line(&mut line).map_err(io_err)?;
    if line.trim_end() != STATE_TAG {
        return Err(KgError::StateFormat(format!(
            "missing version tag, found {:?}",
            line.trim_end()
        )));
    }
    let mut text = String::new();
    let mut ended = false;
    loop {
        line.clear();
        if reader.read_line(&mut line).map_err(io_err)? == 0 {
            break;
        }
        if line.trim_end() == END_HEADER {
            ended = true;
            break;
        }
        text.push_str(&line);
    }
    let header: Header = toml::from_str(&text).map_err(|e| KgError::StateFormat(e.to_string()))?;
    let params = ModelParams::new(header.m, header.kappa, header.a)?;
    match header.kind {
        StateKind::Planewave => {
            if header.modes.iter().any(|m| m.k.len() != header.dimension) {
                return Err(KgError::StateFormat(
                    "mode dimension differs from header".into(),
                ));
            }
            Ok(StateFile::PlaneWave(PlaneWaveField::new(
                params,
                header.modes,
            )?))
        }
        StateKind::Lattice => {
            if !ended {
                return Err(KgError::StateFormat("missing end_header line".into()));
            }
            let (l, n) = match (header.l, header.n) {
                (Some(l), Some(n)) => (l, n),
                _ => return Err(KgError::StateFormat("lattice header needs L and N".into())),
            };
            let lat = MomentumLattice::new(l, n)?;
            if lat.dim() != header.dimension {
                return Err(KgError::StateFormat(
                    "dimension differs from L and N".into(),
                ));
            }
            let mut bytes = Vec::new();
            reader.read_to_end(&mut bytes).map_err(io_err)?;
            if bytes.len() != 32 * lat.len() {
                return Err(KgError::StateFormat(format!(
                    "expected {} payload bytes, found {}",
                    32 * lat.len(),
                    bytes.len()
                )));
            }
            let value =
                |i: usize| f64::from_le_bytes(bytes[8 * i..8 * i + 8].try_into().expect("8 bytes"));
            let order = file_order(&lat);
            let mut plus = vec![C64::new(0.0, 0.0); lat.len()];
            let mut minus = vec![C64::new(0.0, 0.0); lat.len()];
            for (p, &f) in order.iter().enumerate() {
                plus[f] = C64::new(value(2 * p), value(2 * p + 1));
                minus[f] = C64::new(value(2 * (lat.len() + p)), value(2 * (lat.len() + p) + 1));
            }
            let field = LatticeField::new(lat, params, plus, minus, header.t0.unwrap_or(0.0))?;
            if let Some(tag) = header.localized {
                if tag.node >= field.lattice().len() {
                    return Err(KgError::StateFormat(
                        "localized node outside the lattice".into(),
                    ));
                }
            }
            Ok(StateFile::Lattice {
                field,
                localized: header.localized,
            })
        }
    }
}

/// Rebuilds a localized state from a file written by [`write_localized_state`].
pub fn read_localized_state<R: Read>(r: R) -> Result<LocalizedState> {
    match read_state(r)? {
        StateFile::Lattice {
            field,
            localized: Some(tag),
        } => {
            let state = localized_state_at_node(
                tag.epsilon,
                tag.node,
                field.lattice(),
                *field.params(),
                field.t0(),
            )?;
            if state.field().max_coeff_diff(&field) > 1e-12 * state.field().max_coeff() {
                return Err(KgError::StateFormat(
                    "coefficients do not match the tagged localized state".into(),
                ));
            }
            Ok(state)
        }
        _ => Err(KgError::StateFormat("not a localized state".into())),
    }
}
