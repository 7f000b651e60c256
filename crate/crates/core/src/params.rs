use crate::error::{KgError, Result};
use serde::{Deserialize, Serialize};

/// Mass scale `M`, overall scale `kappa` and inner-product parameter `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ModelParams {
    m: f64,
    kappa: f64,
    a: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    #[serde(rename = "M")]
    m: f64,
    kappa: f64,
    a: f64,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = KgError;
    fn try_from(r: RawParams) -> Result<Self> {
        ModelParams::new(r.m, r.kappa, r.a)
    }
}

impl From<ModelParams> for RawParams {
    fn from(p: ModelParams) -> Self {
        RawParams {
            m: p.m,
            kappa: p.kappa,
            a: p.a,
        }
    }
}

impl ModelParams {
    pub fn new(m: f64, kappa: f64, a: f64) -> Result<Self> {
        if !(m.is_finite() && m > 0.0) {
            return Err(KgError::InvalidParameter(format!(
                "M must be positive, got {m}"
            )));
        }
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(KgError::InvalidParameter(format!(
                "kappa must be positive, got {kappa}"
            )));
        }
        if !(a.is_finite() && a > -1.0 && a < 1.0) {
            return Err(KgError::InvalidParameter(format!(
                "a must lie in (-1, 1), got {a}"
            )));
        }
        Ok(ModelParams { m, kappa, a })
    }

    /// `kappa = 1/(1+a)`, the normalization that yields the Schrodinger limit.
    pub fn schrodinger_normalized(m: f64, a: f64) -> Result<Self> {
        Self::new(m, 1.0 / (1.0 + a), a)
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn with_a(&self, a: f64) -> Result<Self> {
        Self::new(self.m, self.kappa, a)
    }

    pub fn with_kappa(&self, kappa: f64) -> Result<Self> {
        Self::new(self.m, kappa, self.a)
    }

    pub fn with_m(&self, m: f64) -> Result<Self> {
        Self::new(m, self.kappa, self.a)
    }

    pub fn omega(&self, ksq: f64) -> f64 {
        (ksq + self.m * self.m).sqrt()
    }

    /// Default Klein-Gordon normalization `g = 1/(2M)`.
    pub fn g_default(&self) -> f64 {
        0.5 / self.m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range() {
        assert!(ModelParams::new(0.0, 1.0, 0.0).is_err());
        assert!(ModelParams::new(1.0, -1.0, 0.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, -1.0).is_err());
        assert!(ModelParams::new(f64::NAN, 1.0, 0.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, 0.99).is_ok());
    }

    #[test]
    fn serde_validates() {
        let p: ModelParams = toml::from_str("M = 2.0\nkappa = 1.0\na = 0.5").unwrap();
        assert_eq!(p.m(), 2.0);
        assert!(toml::from_str::<ModelParams>("M = 2.0\nkappa = 1.0\na = 1.5").is_err());
    }
}
