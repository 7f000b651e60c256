//! Continuum fields `psi(x) = sum_eps int d^dk A_eps(k) e^{-i eps w x^0 + i k x}` with
//! Gaussian-times-polynomial amplitudes, integrated by tensor Gauss-Legendre quadrature.
//!
//! Boost rule: `d^dk / w` is invariant and `w A(k)` is a scalar on the mass shell, so a passive
//! boost maps `A` to `A'(k') = (w / w') A(k)` where `(eps w, k) = Lambda^{-1} (eps w', k')`.

use crate::boost::{Boost, BoostMode};
use crate::error::{KgError, Result};
use crate::lattice::C64;
use crate::params::ModelParams;
use crate::planewave::Sector;
use crate::quadrature::integrate_box;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Monomial {
    #[serde(with = "crate::planewave::complex_pair")]
    pub coeff: C64,
    pub powers: Vec<u32>,
}

/// `coeff * P(k - center) * exp(-|k - center|^2 / (2 width^2))`; an empty polynomial means `P = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianAmplitude {
    pub center: Vec<f64>,
    pub width: f64,
    #[serde(with = "crate::planewave::complex_pair")]
    pub coeff: C64,
    #[serde(default)]
    pub poly: Vec<Monomial>,
}

impl GaussianAmplitude {
    pub fn eval(&self, k: &[f64]) -> C64 {
        let mut r2 = 0.0;
        for (ki, ci) in k.iter().zip(&self.center) {
            r2 += (ki - ci).powi(2);
        }
        let env = (-0.5 * r2 / (self.width * self.width)).exp();
        let p = if self.poly.is_empty() {
            C64::new(1.0, 0.0)
        } else {
            self.poly
                .iter()
                .map(|m| {
                    m.coeff
                        * m.powers
                            .iter()
                            .zip(k.iter().zip(&self.center))
                            .map(|(&e, (ki, ci))| (ki - ci).powi(e as i32))
                            .product::<f64>()
                })
                .sum()
        };
        self.coeff * p * env
    }

    fn degree(&self) -> u32 {
        self.poly
            .iter()
            .map(|m| m.powers.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Amplitude {
    Gaussian(GaussianAmplitude),
    Boosted {
        base: Box<Amplitude>,
        boost: Boost,
        m: f64,
        sector: Sector,
    },
}

impl Amplitude {
    pub fn dim(&self) -> usize {
        match self {
            Amplitude::Gaussian(g) => g.center.len(),
            Amplitude::Boosted { base, .. } => base.dim(),
        }
    }

    pub fn eval(&self, k: &[f64]) -> C64 {
        match self {
            Amplitude::Gaussian(g) => g.eval(k),
            Amplitude::Boosted {
                base,
                boost,
                m,
                sector,
            } => {
                let w_new = (k.iter().map(|x| x * x).sum::<f64>() + m * m).sqrt();
                let mut p = vec![sector.sign() * w_new];
                p.extend_from_slice(k);
                let orig = boost.inverse().apply(&p);
                let w_old = orig[0].abs();
                base.eval(&orig[1..]) * (w_old / w_new)
            }
        }
    }

    /// Box containing the support out to `radius` widths.
    pub fn bounding_box(&self, radius: f64) -> (Vec<f64>, Vec<f64>) {
        match self {
            Amplitude::Gaussian(g) => {
                let r = (radius + g.degree() as f64) * g.width;
                (
                    g.center.iter().map(|c| c - r).collect(),
                    g.center.iter().map(|c| c + r).collect(),
                )
            }
            Amplitude::Boosted {
                base,
                boost,
                m,
                sector,
            } => {
                let (lo, hi) = base.bounding_box(radius);
                let d = lo.len();
                let samples = 17usize;
                let mut out_lo = vec![f64::INFINITY; d];
                let mut out_hi = vec![f64::NEG_INFINITY; d];
                for flat in 0..samples.pow(d as u32) {
                    let mut rem = flat;
                    let mut k = vec![0.0; d];
                    let mut on_face = false;
                    for i in 0..d {
                        let j = rem % samples;
                        rem /= samples;
                        on_face |= j == 0 || j == samples - 1;
                        k[i] = lo[i] + (hi[i] - lo[i]) * j as f64 / (samples - 1) as f64;
                    }
                    if !on_face {
                        continue;
                    }
                    let w = (k.iter().map(|x| x * x).sum::<f64>() + m * m).sqrt();
                    let mut p = vec![sector.sign() * w];
                    p.extend_from_slice(&k);
                    let q = boost.apply(&p);
                    for i in 0..d {
                        out_lo[i] = out_lo[i].min(q[i + 1]);
                        out_hi[i] = out_hi[i].max(q[i + 1]);
                    }
                }
                (out_lo, out_hi)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    pub order: usize,
    /// Truncation radius in Gaussian widths.
    pub radius: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            order: 128,
            radius: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeField {
    params: ModelParams,
    plus: Option<Amplitude>,
    minus: Option<Amplitude>,
    quadrature: QuadratureSpec,
}

fn union_box(a: &(Vec<f64>, Vec<f64>), b: &(Vec<f64>, Vec<f64>)) -> (Vec<f64>, Vec<f64>) {
    (
        a.0.iter().zip(&b.0).map(|(x, y)| x.min(*y)).collect(),
        a.1.iter().zip(&b.1).map(|(x, y)| x.max(*y)).collect(),
    )
}

fn doubled(bx: &(Vec<f64>, Vec<f64>)) -> (Vec<f64>, Vec<f64>) {
    let mid: Vec<f64> = bx.0.iter().zip(&bx.1).map(|(a, b)| 0.5 * (a + b)).collect();
    (
        bx.0.iter()
            .zip(&mid)
            .map(|(a, m)| m - 2.0 * (m - a))
            .collect(),
        bx.1.iter()
            .zip(&mid)
            .map(|(b, m)| m + 2.0 * (b - m))
            .collect(),
    )
}

impl AmplitudeField {
    /// Builds the field and checks that the truncation radius holds `1 - 1e-10` of each amplitude's L2 mass.
    pub fn new(
        params: ModelParams,
        plus: Option<Amplitude>,
        minus: Option<Amplitude>,
        quadrature: QuadratureSpec,
    ) -> Result<Self> {
        let dims: Vec<usize> = plus.iter().chain(&minus).map(|a| a.dim()).collect();
        if dims.is_empty() {
            return Err(KgError::InvalidParameter(
                "amplitude field needs at least one sector".into(),
            ));
        }
        if dims.iter().any(|&d| d != dims[0] || !(1..=3).contains(&d)) {
            return Err(KgError::UnsupportedDimension(dims[0]));
        }
        if quadrature.order < 2 || !(quadrature.radius > 0.0) {
            return Err(KgError::InvalidParameter(
                "quadrature needs order >= 2 and a positive radius".into(),
            ));
        }
        for amp in plus.iter().chain(&minus) {
            if let Amplitude::Gaussian(g) = amp {
                if !(g.width > 0.0) || g.center.iter().any(|c| !c.is_finite()) {
                    return Err(KgError::InvalidParameter(
                        "Gaussian amplitude needs positive width".into(),
                    ));
                }
            }
        }
        let field = AmplitudeField {
            params,
            plus,
            minus,
            quadrature,
        };
        field.truncation_check()?;
        Ok(field)
    }

    pub fn gaussian(
        params: ModelParams,
        plus: Option<GaussianAmplitude>,
        minus: Option<GaussianAmplitude>,
        quadrature: QuadratureSpec,
    ) -> Result<Self> {
        Self::new(
            params,
            plus.map(Amplitude::Gaussian),
            minus.map(Amplitude::Gaussian),
            quadrature,
        )
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn quadrature(&self) -> QuadratureSpec {
        self.quadrature
    }

    pub fn with_quadrature(&self, quadrature: QuadratureSpec) -> Result<Self> {
        Self::new(
            self.params,
            self.plus.clone(),
            self.minus.clone(),
            quadrature,
        )
    }

    pub fn amplitude(&self, sector: Sector) -> Option<&Amplitude> {
        match sector {
            Sector::Plus => self.plus.as_ref(),
            Sector::Minus => self.minus.as_ref(),
        }
    }

    pub fn dim(&self) -> usize {
        self.plus
            .iter()
            .chain(&self.minus)
            .next()
            .map(|a| a.dim())
            .unwrap_or(0)
    }

    fn truncation_check(&self) -> Result<()> {
        for amp in self.plus.iter().chain(&self.minus) {
            let bx = amp.bounding_box(self.quadrature.radius);
            let big = doubled(&bx);
            let mass = integrate_box(
                |k| C64::new(amp.eval(k).norm_sqr(), 0.0),
                &bx.0,
                &bx.1,
                self.quadrature.order,
            )
            .re;
            let mass2 = integrate_box(
                |k| C64::new(amp.eval(k).norm_sqr(), 0.0),
                &big.0,
                &big.1,
                2 * self.quadrature.order,
            )
            .re;
            let rel = if mass2 > 0.0 {
                (mass2 - mass).abs() / mass2
            } else {
                0.0
            };
            if !(rel <= 1e-10) {
                return Err(KgError::QuadratureTruncation(rel));
            }
        }
        Ok(())
    }

    /// Exactly boosted field.
    pub fn boost(&self, boost: &Boost) -> Result<AmplitudeField> {
        if boost.mode() != BoostMode::Exact {
            return Err(KgError::InvalidParameter(
                "amplitude boosts must be exact".into(),
            ));
        }
        if boost.dim() != self.dim() {
            return Err(KgError::InvalidParameter(
                "boost dimension differs from field dimension".into(),
            ));
        }
        let wrap = |a: &Option<Amplitude>, sector| {
            a.as_ref().map(|amp| Amplitude::Boosted {
                base: Box::new(amp.clone()),
                boost: boost.clone(),
                m: self.params.m(),
                sector,
            })
        };
        Ok(AmplitudeField {
            params: self.params,
            plus: wrap(&self.plus, Sector::Plus),
            minus: wrap(&self.minus, Sector::Minus),
            quadrature: self.quadrature,
        })
    }

    /// Field value at the event `(x^0, x)` by quadrature.
    pub fn value(&self, event: &[f64]) -> C64 {
        let m = self.params.m();
        let mut total = C64::new(0.0, 0.0);
        for (amp, eps) in [(self.plus.as_ref(), 1.0), (self.minus.as_ref(), -1.0)] {
            let Some(amp) = amp else { continue };
            let bx = amp.bounding_box(self.quadrature.radius);
            total += integrate_box(
                |k| {
                    let w = (k.iter().map(|x| x * x).sum::<f64>() + m * m).sqrt();
                    let arg = -eps * w * event[0]
                        + k.iter().zip(&event[1..]).map(|(a, b)| a * b).sum::<f64>();
                    amp.eval(k) * C64::from_polar(1.0, arg)
                },
                &bx.0,
                &bx.1,
                self.quadrature.order,
            );
        }
        total
    }
}

/// `(f1, f2)_a = kappa (2 pi)^d / M int d^dk w [(1+a) A1+^* A2+ + (1-a) A1-^* A2-]`.
pub fn continuum_inner_a(f1: &AmplitudeField, f2: &AmplitudeField) -> Result<C64> {
    if f1.params != f2.params {
        return Err(KgError::ParamsMismatch);
    }
    if f1.dim() != f2.dim() {
        return Err(KgError::InvalidParameter("dimension mismatch".into()));
    }
    let p = f1.params;
    let d = f1.dim();
    let order = f1.quadrature.order.max(f2.quadrature.order);
    let radius = f1.quadrature.radius.max(f2.quadrature.radius);
    let mut total = C64::new(0.0, 0.0);
    for (sector, weight) in [(Sector::Plus, 1.0 + p.a()), (Sector::Minus, 1.0 - p.a())] {
        let (Some(a1), Some(a2)) = (f1.amplitude(sector), f2.amplitude(sector)) else {
            continue;
        };
        let bx = union_box(&a1.bounding_box(radius), &a2.bounding_box(radius));
        let m = p.m();
        let integral = integrate_box(
            |k| {
                let w = (k.iter().map(|x| x * x).sum::<f64>() + m * m).sqrt();
                w * a1.eval(k).conj() * a2.eval(k)
            },
            &bx.0,
            &bx.1,
            order,
        );
        total += weight * integral;
    }
    Ok(total * p.kappa() * (2.0 * PI).powi(d as i32) / p.m())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvarianceReport {
    pub before: C64,
    pub after: C64,
    pub rel_dev: f64,
}

/// `(f1, f2)_a` in the original frame and in the exactly boosted frame.
pub fn invariance_check(
    f1: &AmplitudeField,
    f2: &AmplitudeField,
    boost: &Boost,
) -> Result<InvarianceReport> {
    let before = continuum_inner_a(f1, f2)?;
    let after = continuum_inner_a(&f1.boost(boost)?, &f2.boost(boost)?)?;
    let rel_dev = if before.norm() > 0.0 {
        (after - before).norm() / before.norm()
    } else {
        after.norm()
    };
    Ok(InvarianceReport {
        before,
        after,
        rel_dev,
    })
}
