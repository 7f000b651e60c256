use crate::boost::Boost;
use crate::error::{KgError, Result};
use crate::lattice::C64;
use crate::params::ModelParams;
use serde::{Deserialize, Serialize};

/// Energy sector `eps = +1` (positive) or `-1` (negative).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Sector {
    Plus,
    Minus,
}

impl Sector {
    pub fn sign(self) -> f64 {
        match self {
            Sector::Plus => 1.0,
            Sector::Minus => -1.0,
        }
    }

    pub fn from_sign(s: f64) -> Sector {
        if s >= 0.0 {
            Sector::Plus
        } else {
            Sector::Minus
        }
    }
}

impl TryFrom<i8> for Sector {
    type Error = String;
    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Sector::Plus),
            -1 => Ok(Sector::Minus),
            _ => Err(format!("epsilon must be +1 or -1, got {v}")),
        }
    }
}

impl From<Sector> for i8 {
    fn from(s: Sector) -> i8 {
        match s {
            Sector::Plus => 1,
            Sector::Minus => -1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneMode {
    pub epsilon: Sector,
    pub k: Vec<f64>,
    #[serde(with = "complex_pair")]
    pub coeff: C64,
}

/// Finite superposition of plane waves `coeff e^{-i eps w x^0 + i k x}` with off-lattice wave vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneWaveField {
    params: ModelParams,
    modes: Vec<PlaneMode>,
}

impl PlaneWaveField {
    pub fn new(params: ModelParams, modes: Vec<PlaneMode>) -> Result<Self> {
        let Some(first) = modes.first() else {
            return Err(KgError::InvalidParameter(
                "plane-wave field needs at least one mode".into(),
            ));
        };
        let d = first.k.len();
        if !(1..=3).contains(&d) {
            return Err(KgError::UnsupportedDimension(d));
        }
        for m in &modes {
            if m.k.len() != d {
                return Err(KgError::InvalidParameter(
                    "modes must share one dimension".into(),
                ));
            }
            if m.k.iter().any(|x| !x.is_finite()) || !m.coeff.is_finite() {
                return Err(KgError::NonFinite("plane-wave mode".into()));
            }
        }
        Ok(PlaneWaveField { params, modes })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn modes(&self) -> &[PlaneMode] {
        &self.modes
    }

    pub fn dim(&self) -> usize {
        self.modes[0].k.len()
    }

    pub fn with_params(&self, params: ModelParams) -> Self {
        PlaneWaveField {
            params,
            modes: self.modes.clone(),
        }
    }

    pub fn omega(&self, mode: &PlaneMode) -> f64 {
        self.params.omega(mode.k.iter().map(|k| k * k).sum())
    }

    /// Contravariant four-momentum `(eps w, k)`.
    pub fn four_momentum(&self, mode: &PlaneMode) -> Vec<f64> {
        let mut p = vec![mode.epsilon.sign() * self.omega(mode)];
        p.extend_from_slice(&mode.k);
        p
    }

    /// `e^{i p.x}` at the event `(x^0, x)`.
    pub fn phase(&self, mode: &PlaneMode, event: &[f64]) -> C64 {
        let p = self.four_momentum(mode);
        let arg = -p[0] * event[0]
            + p[1..]
                .iter()
                .zip(&event[1..])
                .map(|(a, b)| a * b)
                .sum::<f64>();
        C64::from_polar(1.0, arg)
    }

    /// `sum_modes weight(mode) coeff e^{i p.x}`.
    pub fn weighted_sum<F: Fn(&PlaneMode) -> C64>(&self, event: &[f64], weight: F) -> C64 {
        self.modes
            .iter()
            .map(|m| weight(m) * m.coeff * self.phase(m, event))
            .sum()
    }

    pub fn value(&self, event: &[f64]) -> C64 {
        self.weighted_sum(event, |_| C64::new(1.0, 0.0))
    }

    /// `psi_c = i D^{-1/2} psi_dot`, which weights each mode by its sector sign.
    pub fn psi_c(&self, event: &[f64]) -> C64 {
        self.weighted_sum(event, |m| C64::new(m.epsilon.sign(), 0.0))
    }

    /// `D^{-1/2} psi_dot`.
    pub fn d_inv_half_psidot(&self, event: &[f64]) -> C64 {
        self.weighted_sum(event, |m| C64::new(0.0, -m.epsilon.sign()))
    }

    /// Boosted field with `psi'(x') = psi(x)`: each mode's four-momentum `(eps w, k)` is mapped by the boost.
    pub fn boost(&self, boost: &Boost) -> Result<PlaneWaveField> {
        if boost.dim() != self.dim() {
            return Err(KgError::InvalidParameter(
                "boost dimension differs from field dimension".into(),
            ));
        }
        let modes = self
            .modes
            .iter()
            .map(|m| {
                let p = boost.apply(&self.four_momentum(m));
                PlaneMode {
                    epsilon: Sector::from_sign(p[0]),
                    k: p[1..].to_vec(),
                    coeff: m.coeff,
                }
            })
            .collect();
        Ok(PlaneWaveField {
            params: self.params,
            modes,
        })
    }
}

pub fn boost_planewave(field: &PlaneWaveField, boost: &Boost) -> Result<PlaneWaveField> {
    field.boost(boost)
}

pub(crate) mod complex_pair {
    use crate::lattice::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(c: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
        [c.re, c.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<C64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(C64::new(re, im))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boost::minkowski_dot;

    fn field() -> PlaneWaveField {
        let p = ModelParams::new(1.0, 1.0, 0.0).unwrap();
        PlaneWaveField::new(
            p,
            vec![
                PlaneMode {
                    epsilon: Sector::Plus,
                    k: vec![0.3, -1.1],
                    coeff: C64::new(1.0, 0.5),
                },
                PlaneMode {
                    epsilon: Sector::Minus,
                    k: vec![-0.7, 0.2],
                    coeff: C64::new(-0.4, 0.9),
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn zero_boost_is_identity() {
        let f = field();
        let b = Boost::exact(vec![0.0, 0.0]).unwrap();
        assert_eq!(f.boost(&b).unwrap(), f);
    }

    #[test]
    fn boosted_modes_on_shell_and_scalar() {
        let f = field();
        let b = Boost::exact(vec![0.5, 0.3]).unwrap();
        let g = f.boost(&b).unwrap();
        for (m, m0) in g.modes().iter().zip(f.modes()) {
            assert_eq!(m.epsilon, m0.epsilon);
            let p = b.apply(&f.four_momentum(m0));
            let w = g.omega(m);
            assert!((p[0].abs() - w).abs() <= 1e-12 * w);
            assert!((-minkowski_dot(&p, &p) - 1.0).abs() < 1e-12);
        }
        let x = [0.4, -1.3, 2.2];
        let xp = b.apply(&x);
        assert!((f.value(&x) - g.value(&xp)).norm() < 1e-12);
        assert!((f.d_inv_half_psidot(&x) - g.d_inv_half_psidot(&xp)).norm() < 1e-12);
    }

    #[test]
    fn empty_rejected() {
        let p = ModelParams::new(1.0, 1.0, 0.0).unwrap();
        assert!(PlaneWaveField::new(p, vec![]).is_err());
    }
}
