use crate::error::{KgError, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoostMode {
    Exact,
    /// First order in `beta`; requires `|beta| <= 1e-3`.
    Infinitesimal,
}

/// Passive boost to a frame moving with velocity `beta`: `x' = Lambda x` on contravariant
/// four-vectors `(x^0, x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Boost {
    beta: Vec<f64>,
    mode: BoostMode,
}

impl Boost {
    pub fn new(beta: Vec<f64>, mode: BoostMode) -> Result<Self> {
        if beta.is_empty() || beta.len() > 3 || beta.iter().any(|b| !b.is_finite()) {
            return Err(KgError::InvalidParameter(
                "beta must be a finite vector of dimension 1..=3".into(),
            ));
        }
        let speed = beta.iter().map(|b| b * b).sum::<f64>().sqrt();
        if speed >= 1.0 {
            return Err(KgError::Superluminal(speed));
        }
        if mode == BoostMode::Infinitesimal && speed > 1e-3 {
            return Err(KgError::InvalidParameter(format!(
                "infinitesimal boost needs |beta| <= 1e-3, got {speed}"
            )));
        }
        Ok(Boost { beta, mode })
    }

    pub fn exact(beta: Vec<f64>) -> Result<Self> {
        Self::new(beta, BoostMode::Exact)
    }

    pub fn infinitesimal(beta: Vec<f64>) -> Result<Self> {
        Self::new(beta, BoostMode::Infinitesimal)
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn mode(&self) -> BoostMode {
        self.mode
    }

    pub fn dim(&self) -> usize {
        self.beta.len()
    }

    pub fn speed(&self) -> f64 {
        self.beta.iter().map(|b| b * b).sum::<f64>().sqrt()
    }

    pub fn gamma(&self) -> f64 {
        match self.mode {
            BoostMode::Exact => 1.0 / (1.0 - self.speed().powi(2)).sqrt(),
            BoostMode::Infinitesimal => 1.0,
        }
    }

    pub fn inverse(&self) -> Boost {
        Boost {
            beta: self.beta.iter().map(|b| -b).collect(),
            mode: self.mode,
        }
    }

    /// The `(d+1) x (d+1)` matrix `Lambda^mu_nu`.
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        let g = self.gamma();
        let b2 = self.speed().powi(2);
        let mut m = vec![vec![0.0; d + 1]; d + 1];
        m[0][0] = g;
        for i in 0..d {
            m[0][i + 1] = -g * self.beta[i];
            m[i + 1][0] = -g * self.beta[i];
            for j in 0..d {
                let delta = if i == j { 1.0 } else { 0.0 };
                let shear = if b2 > 0.0 {
                    (g - 1.0) * self.beta[i] * self.beta[j] / b2
                } else {
                    0.0
                };
                m[i + 1][j + 1] = delta + shear;
            }
        }
        m
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let m = self.matrix();
        m.iter()
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Minkowski product with signature `(-, +, ..., +)`.
pub fn minkowski_dot(a: &[f64], b: &[f64]) -> f64 {
    -a[0] * b[0] + a[1..].iter().zip(&b[1..]).map(|(x, y)| x * y).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(Boost::exact(vec![1.0]).is_err());
        assert!(Boost::exact(vec![0.6, 0.8]).is_err());
        assert!(Boost::infinitesimal(vec![0.01]).is_err());
        assert!(Boost::infinitesimal(vec![1e-4]).is_ok());
    }

    #[test]
    fn rest_mode_example() {
        let b = Boost::exact(vec![0.6]).unwrap();
        let p = b.apply(&[1.0, 0.0]);
        assert!((p[0] - 1.25).abs() < 1e-15 && (p[1] + 0.75).abs() < 1e-15);
    }

    #[test]
    fn preserves_interval_and_inverts() {
        let b = Boost::exact(vec![0.3, -0.5, 0.2]).unwrap();
        let v = [1.7, 0.2, -3.0, 0.5];
        let w = b.apply(&v);
        assert!((minkowski_dot(&v, &v) - minkowski_dot(&w, &w)).abs() < 1e-13);
        let back = b.inverse().apply(&w);
        for i in 0..4 {
            assert!((back[i] - v[i]).abs() < 1e-14);
        }
    }
}
