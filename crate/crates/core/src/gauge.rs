//! The one-parameter gauge group generated by `C + a`.

use crate::error::{ensure_finite, KgError, Result};
use crate::field::LatticeField;
use crate::lattice::{max_abs, C64};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// `g_a(theta) = diag(e^{-i(a+1) theta}, e^{-i(a-1) theta})` acting on `(psi_+, psi_-)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeElement {
    pub theta: f64,
    pub a: f64,
}

impl GaugeElement {
    pub fn new(theta: f64, a: f64) -> Result<Self> {
        ensure_finite("theta", theta)?;
        if !(a > -1.0 && a < 1.0) {
            return Err(KgError::InvalidParameter(format!(
                "a must lie in (-1, 1), got {a}"
            )));
        }
        Ok(GaugeElement { theta, a })
    }

    pub fn phases(&self) -> (C64, C64) {
        (
            C64::from_polar(1.0, -(self.a + 1.0) * self.theta),
            C64::from_polar(1.0, -(self.a - 1.0) * self.theta),
        )
    }

    pub fn matrix(&self) -> [[C64; 2]; 2] {
        let (p, m) = self.phases();
        let z = C64::new(0.0, 0.0);
        [[p, z], [z, m]]
    }

    pub fn apply(&self, field: &LatticeField) -> LatticeField {
        let [[p, _], [_, m]] = self.matrix();
        let plus = field.phi_plus().iter().map(|c| c * p).collect();
        let minus = field.phi_minus().iter().map(|c| c * m).collect();
        LatticeField::new(
            field.lattice().clone(),
            *field.params(),
            plus,
            minus,
            field.t0(),
        )
        .expect("phases keep coefficients finite")
    }

    pub fn compose(&self, other: &GaugeElement) -> Result<GaugeElement> {
        if self.a != other.a {
            return Err(KgError::InvalidParameter(
                "composing elements of different groups".into(),
            ));
        }
        GaugeElement::new(self.theta + other.theta, self.a)
    }
}

/// `psi_eps -> e^{-i(a + eps) theta} psi_eps`.
pub fn gauge_transform(field: &LatticeField, theta: f64, a: f64) -> Result<LatticeField> {
    Ok(GaugeElement::new(theta, a)?.apply(field))
}

/// `e^{-i a theta} [cos(theta) - i sin(theta) C] psi`.
pub fn gauge_transform_exponential(
    field: &LatticeField,
    theta: f64,
    a: f64,
) -> Result<LatticeField> {
    GaugeElement::new(theta, a)?;
    let lead = C64::from_polar(1.0, -a * theta);
    let c = field.apply_c();
    field
        .scaled(lead * theta.cos())
        .add(&c.scaled(lead * C64::new(0.0, -theta.sin())))
}

/// `-i (C + a) psi`.
pub fn generator_apply(field: &LatticeField, a: f64) -> LatticeField {
    let i = C64::new(0.0, -1.0);
    let plus = field.phi_plus().iter().map(|c| c * i * (1.0 + a)).collect();
    let minus = field
        .phi_minus()
        .iter()
        .map(|c| c * i * (a - 1.0))
        .collect();
    LatticeField::new(
        field.lattice().clone(),
        *field.params(),
        plus,
        minus,
        field.t0(),
    )
    .expect("scaling keeps coefficients finite")
}

/// Largest coefficient deviation of `[g_a(dtheta) psi - psi] / dtheta` from `-i (C + a) psi`.
pub fn generator_check(field: &LatticeField, a: f64, dtheta: f64) -> Result<f64> {
    if !(dtheta > 0.0 && dtheta <= 1e-4) {
        return Err(KgError::Precondition(format!(
            "dtheta must lie in (0, 1e-4], got {dtheta}"
        )));
    }
    let moved = gauge_transform(field, dtheta, a)?;
    let gen = generator_apply(field, a);
    let fd = |x: &[C64], y: &[C64], g: &[C64]| -> f64 {
        x.iter()
            .zip(y)
            .zip(g)
            .map(|((x, y), g)| ((x - y) / dtheta - g).norm())
            .fold(0.0, f64::max)
    };
    Ok(
        fd(moved.phi_plus(), field.phi_plus(), gen.phi_plus()).max(fd(
            moved.phi_minus(),
            field.phi_minus(),
            gen.phi_minus(),
        )),
    )
}

/// `kappa/2M int {psi^* D^{1/2} psi + 4 lambda^-2 pi D^{-1/2} pi^* + 2i lambda^-1 a [psi^* pi^* - psi pi]}`
/// with canonical momentum `pi = (lambda/2) psi_dot^*` and `lambda = 1/M`.
pub fn charge_phase_space(field: &LatticeField, t: f64) -> Result<f64> {
    let lat = field.lattice();
    let p = field.params();
    let lambda = 1.0 / p.m();
    let (psi, dot) = field.evaluate(t)?;
    let pi: Vec<C64> = dot.iter().map(|d| 0.5 * lambda * d.conj()).collect();
    let pi_conj: Vec<C64> = pi.iter().map(|v| v.conj()).collect();
    let omega = |f: usize| field.omega(f);
    let dh = lat.apply_multiplier(&psi, |f| C64::new(omega(f), 0.0));
    let dmh = lat.apply_multiplier(&pi_conj, |f| C64::new(1.0 / omega(f), 0.0));
    let ia = C64::new(0.0, 2.0 * p.a() / lambda);
    let sum: C64 = (0..psi.len())
        .map(|j| {
            psi[j].conj() * dh[j]
                + 4.0 / (lambda * lambda) * pi[j] * dmh[j]
                + ia * (psi[j].conj() * pi_conj[j] - psi[j] * pi[j])
        })
        .sum();
    let total = p.kappa() / (2.0 * p.m()) * sum * lat.cell_volume();
    let scale = max_abs(&psi).max(1e-300);
    if total.im.abs() > 1e-8 * total.norm().max(scale * scale * lat.volume()) {
        return Err(KgError::OperatorCheck(format!(
            "charge has imaginary part {:e}",
            total.im
        )));
    }
    Ok(total.re)
}

/// Parameter value for the group classification: exact rational or explicitly irrational.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GroupParameter {
    Rational { num: i64, den: i64 },
    Irrational { value: f64, label: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroupKind {
    U1,
    Rplus,
}

/// Numerical evidence behind a classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupWitness {
    /// Entrywise `|g_a(theta + period) - g_a(theta)|` maximized over sample angles.
    pub period_residual: Option<f64>,
    /// Smallest `max |g_a(2 pi j) - I|` over the multiples examined.
    pub min_return_deviation: f64,
    pub multiples_checked: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupClass {
    pub kind: GroupKind,
    pub period: Option<f64>,
    pub witness: GroupWitness,
}

pub const IRRATIONAL_MULTIPLES: u64 = 10_000;

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn identity_deviation(a: f64, theta: f64) -> f64 {
    let g = GaugeElement { theta, a };
    let (p, m) = g.phases();
    (p - 1.0).norm().max((m - 1.0).norm())
}

pub fn group_classify(param: &GroupParameter) -> Result<GroupClass> {
    match param {
        GroupParameter::Rational { num, den } => {
            if *den <= 0 || num.abs() >= *den || gcd(*num, *den) != 1 {
                return Err(KgError::MalformedRational(format!("{num}/{den}")));
            }
            let a = *num as f64 / *den as f64;
            let period = 2.0 * PI * *den as f64;
            let residual = [0.0, 0.37, 1.9, -2.6]
                .iter()
                .map(|&th| {
                    let (g0, g1) = (
                        GaugeElement { theta: th, a },
                        GaugeElement {
                            theta: th + period,
                            a,
                        },
                    );
                    let (a0, b0) = g0.phases();
                    let (a1, b1) = g1.phases();
                    (a0 - a1).norm().max((b0 - b1).norm())
                })
                .fold(0.0, f64::max);
            if residual > 1e-12 {
                return Err(KgError::OperatorCheck(format!(
                    "period check failed with residual {residual:e}"
                )));
            }
            let min_return = (1..*den)
                .map(|j| identity_deviation(a, 2.0 * PI * j as f64))
                .fold(f64::INFINITY, f64::min);
            if min_return <= 1e-12 {
                return Err(KgError::OperatorCheck("a shorter period exists".into()));
            }
            Ok(GroupClass {
                kind: GroupKind::U1,
                period: Some(period),
                witness: GroupWitness {
                    period_residual: Some(residual),
                    min_return_deviation: min_return,
                    multiples_checked: (*den - 1) as u64,
                },
            })
        }
        GroupParameter::Irrational { value, label } => {
            if !(*value > -1.0 && *value < 1.0) {
                return Err(KgError::InvalidParameter(format!(
                    "{label}: a must lie in (-1, 1), got {value}"
                )));
            }
            let min_return = (1..=IRRATIONAL_MULTIPLES)
                .map(|j| identity_deviation(*value, 2.0 * PI * j as f64))
                .fold(f64::INFINITY, f64::min);
            if min_return <= 1e-6 {
                return Err(KgError::OperatorCheck(format!(
                    "{label}: g_a returns to the identity within {min_return:e}"
                )));
            }
            Ok(GroupClass {
                kind: GroupKind::Rplus,
                period: None,
                witness: GroupWitness {
                    period_residual: None,
                    min_return_deviation: min_return,
                    multiples_checked: IRRATIONAL_MULTIPLES,
                },
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::currents::total_probability;
    use crate::inner::inner_a;
    use crate::lattice::MomentumLattice;
    use crate::params::ModelParams;
    use crate::random::random_field;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample() -> LatticeField {
        let lat = MomentumLattice::new(vec![5.0, 4.0], vec![8, 8]).unwrap();
        let p = ModelParams::new(1.1, 0.8, 0.3).unwrap();
        random_field(&lat, &p, 0.8, 0.2, &mut ChaCha8Rng::seed_from_u64(21))
    }

    #[test]
    fn forms_agree_and_preserve_norm() {
        let f = sample();
        let g = gauge_transform(&f, 0.7, 0.3).unwrap();
        let e = gauge_transform_exponential(&f, 0.7, 0.3).unwrap();
        assert!(g.max_coeff_diff(&e) <= 1e-13 * f.max_coeff());
        let n0 = inner_a(&f, &f, 0.5).unwrap().re;
        let n1 = inner_a(&g, &g, 0.5).unwrap().re;
        assert!((n0 - n1).abs() <= 1e-12 * n0.abs());
        let flip = gauge_transform(&f, PI, 0.0).unwrap();
        assert!(flip.max_coeff_diff(&f.scaled(C64::new(-1.0, 0.0))) <= 1e-15 * f.max_coeff());
    }

    #[test]
    fn generator_is_first_order() {
        let f = sample();
        let d1 = generator_check(&f, 0.3, 1e-4).unwrap();
        let d2 = generator_check(&f, 0.3, 5e-5).unwrap();
        assert!(d1 <= 1e-3 * f.max_coeff());
        assert!((0.4..=0.6).contains(&(d2 / d1)));
        assert!(generator_check(&f, 0.3, 1e-3).is_err());
    }

    #[test]
    fn charge_matches_total_probability() {
        let f = sample();
        let q = charge_phase_space(&f, 0.9).unwrap();
        let tp = total_probability(&f, 0.9).unwrap();
        assert!((q - tp).abs() <= 1e-10 * tp.abs());
    }

    #[test]
    fn classification() {
        let half = group_classify(&GroupParameter::Rational { num: 1, den: 2 }).unwrap();
        assert_eq!(half.kind, GroupKind::U1);
        assert!((half.period.unwrap() - 4.0 * PI).abs() < 1e-15);
        let zero = group_classify(&GroupParameter::Rational { num: 0, den: 1 }).unwrap();
        assert!((zero.period.unwrap() - 2.0 * PI).abs() < 1e-15);
        let irr = group_classify(&GroupParameter::Irrational {
            value: 0.5f64.sqrt(),
            label: "sqrt(2)/2".into(),
        })
        .unwrap();
        assert_eq!(irr.kind, GroupKind::Rplus);
        assert!(group_classify(&GroupParameter::Rational { num: 2, den: 4 }).is_err());
        assert!(group_classify(&GroupParameter::Rational { num: 1, den: -2 }).is_err());
    }
}
