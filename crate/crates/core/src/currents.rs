use crate::boost::{minkowski_dot, Boost, BoostMode};
use crate::error::{KgError, Result};
use crate::field::LatticeField;
use crate::lattice::{max_abs, MomentumLattice, C64};
use crate::params::ModelParams;
use crate::planewave::{PlaneMode, PlaneWaveField, Sector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurrentKind {
    TwistedChiral,
    Probability,
    RosensteinHorwitz,
}

impl CurrentKind {
    pub fn tag(self) -> &'static str {
        match self {
            CurrentKind::TwistedChiral => "twisted_chiral",
            CurrentKind::Probability => "probability",
            CurrentKind::RosensteinHorwitz => "rosenstein_horwitz",
        }
    }
}

/// Which current a divergence check targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Which {
    #[serde(rename = "J_a")]
    Ja,
    #[serde(rename = "calJ_a")]
    CalJa,
}

/// Components `(J^0, ..., J^d)` sampled on the 2x padded grid of the field's lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct FourVectorGrid<T> {
    pub kind: CurrentKind,
    pub t: f64,
    pub lattice: MomentumLattice,
    pub components: Vec<Vec<T>>,
}

impl FourVectorGrid<C64> {
    pub fn max_abs(&self) -> f64 {
        self.components
            .iter()
            .map(|c| max_abs(c))
            .fold(0.0, f64::max)
    }
}

impl FourVectorGrid<f64> {
    pub fn max_abs(&self) -> f64 {
        self.components
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

const ONE: C64 = C64::new(1.0, 0.0);

/// Padded-grid samples of `D^alpha d_0^p sum_eps w_eps psi_eps`, optionally differentiated along `axis`.
fn padded(
    field: &LatticeField,
    t: f64,
    w: (C64, C64),
    p: u32,
    alpha: f64,
    axis: Option<usize>,
) -> Vec<C64> {
    let lat = field.lattice();
    let mut modes = field.sector_modes(t, w.0, w.1, p);
    if alpha != 0.0 {
        for (f, c) in modes.iter_mut().enumerate() {
            *c *= field.omega(f).powf(2.0 * alpha);
        }
    }
    if let Some(ax) = axis {
        modes = lat.derivative_modes(&modes, ax);
    }
    lat.to_padded_samples(&modes)
}

/// `d^mu` samples: `mu = 0` gives `-d_0`, `mu = i` gives `d_i`.
fn padded_up(field: &LatticeField, t: f64, w: (C64, C64), alpha: f64, mu: usize) -> Vec<C64> {
    if mu == 0 {
        padded(field, t, w, 1, alpha, None)
            .into_iter()
            .map(|z| -z)
            .collect()
    } else {
        padded(field, t, w, 0, alpha, Some(mu - 1))
    }
}

fn tilde_weights(a: f64) -> (C64, C64) {
    (C64::new(1.0 + a, 0.0), C64::new(a - 1.0, 0.0))
}

fn grade_weights() -> (C64, C64) {
    (ONE, -ONE)
}

/// `J_a^mu = -(i kappa / 2M) [psi^* d^mu psi~ - (d^mu psi^*) psi~]` with `psi~ = psi_c + a psi`.
pub fn current_ja(field: &LatticeField, t: f64) -> FourVectorGrid<C64> {
    let p = field.params();
    let d = field.lattice().dim();
    let wt = tilde_weights(p.a());
    let psi = padded(field, t, (ONE, ONE), 0, 0.0, None);
    let tilde = padded(field, t, wt, 0, 0.0, None);
    let pref = C64::new(0.0, -p.kappa() / (2.0 * p.m()));
    let components = (0..=d)
        .map(|mu| {
            let dpsi = padded_up(field, t, (ONE, ONE), 0.0, mu);
            let dtilde = padded_up(field, t, wt, 0.0, mu);
            (0..psi.len())
                .map(|j| pref * (psi[j].conj() * dtilde[j] - dpsi[j].conj() * tilde[j]))
                .collect()
        })
        .collect();
    FourVectorGrid {
        kind: CurrentKind::TwistedChiral,
        t,
        lattice: field.lattice().padded(),
        components,
    }
}

/// `J_a^0` through `kappa/2M {psi^* D^1/2 psi + psi_dot^* D^-1/2 psi_dot + ia[psi^* psi_dot - psi_dot^* psi]}`.
pub fn ja0_direct(field: &LatticeField, t: f64) -> Vec<C64> {
    let p = field.params();
    let psi = padded(field, t, (ONE, ONE), 0, 0.0, None);
    let dot = padded(field, t, (ONE, ONE), 1, 0.0, None);
    let dh = padded(field, t, (ONE, ONE), 0, 0.5, None);
    let dmh = padded(field, t, (ONE, ONE), 1, -0.5, None);
    let ia = C64::new(0.0, p.a());
    (0..psi.len())
        .map(|j| {
            p.kappa() / (2.0 * p.m())
                * (psi[j].conj() * dh[j]
                    + dot[j].conj() * dmh[j]
                    + ia * (psi[j].conj() * dot[j] - dot[j].conj() * psi[j]))
        })
        .collect()
}

/// The probability current, with `A = D^1/4 psi`, `B = D^1/4 psi_c`, `P = D^-1/4 psi`, `Q = D^-1/4 psi_c`:
/// `kappa/2M Im{A^* d^mu Q - B (d^mu P)^* + a[A^* d^mu P - B (d^mu Q)^*]}`.
pub fn current_calja(field: &LatticeField, t: f64) -> FourVectorGrid<f64> {
    let p = field.params();
    let d = field.lattice().dim();
    let a = p.a();
    let av = padded(field, t, (ONE, ONE), 0, 0.25, None);
    let bv = padded(field, t, grade_weights(), 0, 0.25, None);
    let pref = p.kappa() / (2.0 * p.m());
    let components = (0..=d)
        .map(|mu| {
            let dp = padded_up(field, t, (ONE, ONE), -0.25, mu);
            let dq = padded_up(field, t, grade_weights(), -0.25, mu);
            (0..av.len())
                .map(|j| {
                    let z = av[j].conj() * dq[j] - bv[j] * dp[j].conj()
                        + a * (av[j].conj() * dp[j] - bv[j] * dq[j].conj());
                    pref * z.im
                })
                .collect()
        })
        .collect();
    FourVectorGrid {
        kind: CurrentKind::Probability,
        t,
        lattice: field.lattice().padded(),
        components,
    }
}

/// `-(i kappa/2M) {(D^1/4 psi)^* d^mu D^-1/4 psi - (D^1/4 psi) d^mu (D^-1/4 psi)^*}`.
pub fn current_rosenstein_horwitz(field: &LatticeField, t: f64) -> FourVectorGrid<f64> {
    let p = field.params();
    let d = field.lattice().dim();
    let av = padded(field, t, (ONE, ONE), 0, 0.25, None);
    let pref = C64::new(0.0, -p.kappa() / (2.0 * p.m()));
    let components = (0..=d)
        .map(|mu| {
            let dp = padded_up(field, t, (ONE, ONE), -0.25, mu);
            (0..av.len())
                .map(|j| (pref * (av[j].conj() * dp[j] - av[j] * dp[j].conj())).re)
                .collect()
        })
        .collect();
    FourVectorGrid {
        kind: CurrentKind::RosensteinHorwitz,
        t,
        lattice: field.lattice().padded(),
        components,
    }
}

/// Probability density `kappa/2M {|A|^2 + |B|^2 + a[A^* B + A B^*]}` on the padded grid.
pub fn rho_a(field: &LatticeField, t: f64) -> Result<Vec<f64>> {
    let p = field.params();
    let av = padded(field, t, (ONE, ONE), 0, 0.25, None);
    let bv = padded(field, t, grade_weights(), 0, 0.25, None);
    let pref = p.kappa() / (2.0 * p.m());
    let mut rho: Vec<f64> = av
        .iter()
        .zip(&bv)
        .map(|(x, y)| pref * (x.norm_sqr() + y.norm_sqr() + 2.0 * p.a() * (x.conj() * y).re))
        .collect();
    let peak = rho.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for v in rho.iter_mut() {
        if *v < 0.0 {
            if -*v > 1e-14 * peak {
                return Err(KgError::OperatorCheck(format!(
                    "negative density {v:e} exceeds clipping threshold"
                )));
            }
            *v = 0.0;
        }
    }
    Ok(rho)
}

/// Density through the `D^-1/4 psi_dot` form: `kappa/2M {|A|^2 + |R|^2 + ia[A^* R - A R^*]}`, `R = D^-1/4 psi_dot`.
pub fn rho_a_velocity_form(field: &LatticeField, t: f64) -> Vec<f64> {
    let p = field.params();
    let av = padded(field, t, (ONE, ONE), 0, 0.25, None);
    let rv = padded(field, t, (ONE, ONE), 1, -0.25, None);
    let ia = C64::new(0.0, p.a());
    av.iter()
        .zip(&rv)
        .map(|(x, r)| {
            p.kappa() / (2.0 * p.m())
                * (x.norm_sqr() + r.norm_sqr() + ia * (x.conj() * r - x * r.conj())).re
        })
        .collect()
}

/// Integral of the probability density over the box.
pub fn total_probability(field: &LatticeField, t: f64) -> Result<f64> {
    let rho = rho_a(field, t)?;
    Ok(rho.iter().sum::<f64>() * field.lattice().padded().cell_volume())
}

/// Integral of `J_a^0` over the box.
pub fn total_ja0(field: &LatticeField, t: f64) -> C64 {
    let j = current_ja(field, t);
    j.components[0].iter().sum::<C64>() * j.lattice.cell_volume()
}

fn spectral_divergence(lattice: &MomentumLattice, spatial: &[Vec<C64>]) -> Vec<C64> {
    let mut acc = vec![C64::new(0.0, 0.0); lattice.len()];
    for (i, comp) in spatial.iter().enumerate() {
        let modes = lattice.derivative_modes(&lattice.to_modes(comp), i);
        for (a, m) in acc.iter_mut().zip(modes) {
            *a += m;
        }
    }
    lattice.to_samples(&acc)
}

/// `d_mu J^mu` on the padded grid: analytic time derivative of the zero component plus spectral divergence.
pub fn divergence(field: &LatticeField, t: f64, which: Which) -> Vec<C64> {
    let p = field.params();
    let fine = field.lattice().padded();
    match which {
        Which::Ja => {
            let wt = tilde_weights(p.a());
            let psi = padded(field, t, (ONE, ONE), 0, 0.0, None);
            let psi2 = padded(field, t, (ONE, ONE), 2, 0.0, None);
            let tl = padded(field, t, wt, 0, 0.0, None);
            let tl2 = padded(field, t, wt, 2, 0.0, None);
            let pref = C64::new(0.0, p.kappa() / (2.0 * p.m()));
            let dt0: Vec<C64> = (0..psi.len())
                .map(|j| pref * (psi[j].conj() * tl2[j] - psi2[j].conj() * tl[j]))
                .collect();
            let current = current_ja(field, t);
            let div = spectral_divergence(&fine, &current.components[1..]);
            dt0.iter().zip(div).map(|(a, b)| a + b).collect()
        }
        Which::CalJa => {
            let a = p.a();
            let g = grade_weights();
            let av = padded(field, t, (ONE, ONE), 0, 0.25, None);
            let bv = padded(field, t, g, 0, 0.25, None);
            let ad = padded(field, t, (ONE, ONE), 1, 0.25, None);
            let bd = padded(field, t, g, 1, 0.25, None);
            let pd = padded(field, t, (ONE, ONE), 1, -0.25, None);
            let qd = padded(field, t, g, 1, -0.25, None);
            let pdd = padded(field, t, (ONE, ONE), 2, -0.25, None);
            let qdd = padded(field, t, g, 2, -0.25, None);
            let pref = p.kappa() / (2.0 * p.m());
            let dt0: Vec<f64> = (0..av.len())
                .map(|j| {
                    let z = -ad[j].conj() * qd[j] - av[j].conj() * qdd[j]
                        + bd[j] * pd[j].conj()
                        + bv[j] * pdd[j].conj()
                        + a * (-ad[j].conj() * pd[j] - av[j].conj() * pdd[j]
                            + bd[j] * qd[j].conj()
                            + bv[j] * qdd[j].conj());
                    pref * z.im
                })
                .collect();
            let current = current_calja(field, t);
            let spatial: Vec<Vec<C64>> = current.components[1..]
                .iter()
                .map(|c| c.iter().map(|&v| C64::new(v, 0.0)).collect())
                .collect();
            let div = spectral_divergence(&fine, &spatial);
            dt0.iter().zip(div).map(|(a, b)| a + b).collect()
        }
    }
}

/// Max-norm of the divergence relative to the current's max-norm.
pub fn continuity_residual(field: &LatticeField, t: f64, which: Which) -> f64 {
    let div = divergence(field, t, which);
    let scale = match which {
        Which::Ja => current_ja(field, t).max_abs(),
        Which::CalJa => current_calja(field, t).max_abs(),
    };
    if scale == 0.0 {
        return 0.0;
    }
    max_abs(&div) / scale
}

/// Real and imaginary parts of `J_a^mu` assembled from the energy components.
pub fn split_re_im(field: &LatticeField, t: f64) -> (FourVectorGrid<f64>, FourVectorGrid<f64>) {
    let p = field.params();
    let a = p.a();
    let d = field.lattice().dim();
    let (plus, minus) = ((ONE, C64::new(0.0, 0.0)), (C64::new(0.0, 0.0), ONE));
    let pp = padded(field, t, plus, 0, 0.0, None);
    let pm = padded(field, t, minus, 0, 0.0, None);
    let pref = p.kappa() / (2.0 * p.m());
    let mut re = Vec::with_capacity(d + 1);
    let mut im = Vec::with_capacity(d + 1);
    for mu in 0..=d {
        let dp = padded_up(field, t, plus, 0.0, mu);
        let dm = padded_up(field, t, minus, 0.0, mu);
        let mut r = Vec::with_capacity(pp.len());
        let mut i = Vec::with_capacity(pp.len());
        for j in 0..pp.len() {
            let bpp = pp[j].conj() * dp[j] - dp[j].conj() * pp[j];
            let bmm = pm[j].conj() * dm[j] - dm[j].conj() * pm[j];
            let x = pp[j].conj() * dm[j] - dp[j].conj() * pm[j];
            let inner = (1.0 + a) * bpp - (1.0 - a) * bmm + C64::new(0.0, 2.0 * a * x.im);
            r.push((C64::new(0.0, -pref) * inner).re);
            i.push(2.0 * pref * x.re);
        }
        re.push(r);
        im.push(i);
    }
    let lattice = field.lattice().padded();
    (
        FourVectorGrid {
            kind: CurrentKind::TwistedChiral,
            t,
            lattice: lattice.clone(),
            components: re,
        },
        FourVectorGrid {
            kind: CurrentKind::TwistedChiral,
            t,
            lattice,
            components: im,
        },
    )
}

/// `J_a^mu` of a plane-wave superposition at the event `(x^0, x)`.
pub fn current_ja_at(field: &PlaneWaveField, event: &[f64]) -> Vec<C64> {
    let p = field.params();
    let a = p.a();
    let d = field.dim();
    let psi = field.value(event);
    let tilde = field.weighted_sum(event, |m| C64::new(m.epsilon.sign() + a, 0.0));
    let pref = C64::new(0.0, -p.kappa() / (2.0 * p.m()));
    (0..=d)
        .map(|mu| {
            let up = |m: &PlaneMode| C64::new(0.0, field.four_momentum(m)[mu]);
            let dpsi = field.weighted_sum(event, up);
            let dtilde = field.weighted_sum(event, |m| up(m) * (m.epsilon.sign() + a));
            pref * (psi.conj() * dtilde - dpsi.conj() * tilde)
        })
        .collect()
}

/// Probability current of a plane-wave superposition at an event.
pub fn current_calja_at(field: &PlaneWaveField, event: &[f64]) -> Vec<f64> {
    let p = field.params();
    let a = p.a();
    let d = field.dim();
    let av = field.weighted_sum(event, |m| C64::new(field.omega(m).sqrt(), 0.0));
    let bv = field.weighted_sum(event, |m| {
        C64::new(m.epsilon.sign() * field.omega(m).sqrt(), 0.0)
    });
    (0..=d)
        .map(|mu| {
            let dp = field.weighted_sum(event, |m| {
                C64::new(0.0, field.four_momentum(m)[mu] / field.omega(m).sqrt())
            });
            let dq = field.weighted_sum(event, |m| {
                C64::new(
                    0.0,
                    m.epsilon.sign() * field.four_momentum(m)[mu] / field.omega(m).sqrt(),
                )
            });
            let z = av.conj() * dq - bv * dp.conj() + a * (av.conj() * dp - bv * dq.conj());
            p.kappa() / (2.0 * p.m()) * z.im
        })
        .collect()
}

/// Two positive-energy plane waves `c1 e^{i k1 x} + c2 e^{i k2 x}` with closed-form currents.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeOracle {
    pub k1: Vec<f64>,
    pub k2: Vec<f64>,
    pub c1: C64,
    pub c2: C64,
    pub params: ModelParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeRecord {
    pub cal_j: Vec<f64>,
    pub j: Vec<C64>,
    pub k: Vec<f64>,
    pub ksq: f64,
    pub div_cal_j: f64,
    pub div_j: f64,
}

impl TwoModeOracle {
    pub fn new(k1: Vec<f64>, k2: Vec<f64>, c1: C64, c2: C64, params: ModelParams) -> Result<Self> {
        if k1.len() != k2.len() || !(1..=3).contains(&k1.len()) {
            return Err(KgError::InvalidParameter(
                "wave vectors must share a dimension in 1..=3".into(),
            ));
        }
        if c1 == C64::new(0.0, 0.0) && c2 == C64::new(0.0, 0.0) {
            return Err(KgError::InvalidParameter(
                "both coefficients are zero".into(),
            ));
        }
        Ok(TwoModeOracle {
            k1,
            k2,
            c1,
            c2,
            params,
        })
    }

    pub fn omegas(&self) -> (f64, f64) {
        let sq = |k: &[f64]| k.iter().map(|x| x * x).sum::<f64>();
        (
            self.params.omega(sq(&self.k1)),
            self.params.omega(sq(&self.k2)),
        )
    }

    /// Contravariant `k_l^mu = (w_l, k_l)`.
    pub fn four_vectors(&self) -> (Vec<f64>, Vec<f64>) {
        let (w1, w2) = self.omegas();
        let mut a = vec![w1];
        a.extend_from_slice(&self.k1);
        let mut b = vec![w2];
        b.extend_from_slice(&self.k2);
        (a, b)
    }

    pub fn plane_wave_field(&self, a: f64) -> Result<PlaneWaveField> {
        PlaneWaveField::new(
            self.params.with_a(a)?,
            vec![
                PlaneMode {
                    epsilon: Sector::Plus,
                    k: self.k1.clone(),
                    coeff: self.c1,
                },
                PlaneMode {
                    epsilon: Sector::Plus,
                    k: self.k2.clone(),
                    coeff: self.c2,
                },
            ],
        )
    }

    /// Lattice realization at `t0 = 0`; both wave vectors must be lattice modes.
    pub fn lattice_field(&self, lattice: &MomentumLattice, a: f64) -> Result<LatticeField> {
        let mut plus = vec![C64::new(0.0, 0.0); lattice.len()];
        for (k, c) in [(&self.k1, self.c1), (&self.k2, self.c2)] {
            let s: Vec<i64> = (0..lattice.dim())
                .map(|i| {
                    let n = k[i] * lattice.lengths()[i] / (2.0 * std::f64::consts::PI);
                    if (n - n.round()).abs() > 1e-9 {
                        Err(KgError::OffGrid)
                    } else {
                        Ok(n.round() as i64)
                    }
                })
                .collect::<Result<_>>()?;
            let f = lattice.flat_from_signed(&s).ok_or(KgError::OffGrid)?;
            plus[f] += c;
        }
        let zero = vec![C64::new(0.0, 0.0); lattice.len()];
        LatticeField::new(lattice.clone(), self.params.with_a(a)?, plus, zero, 0.0)
    }

    pub fn ksq(&self) -> f64 {
        let (k1, k2) = self.four_vectors();
        let (w1, w2) = self.omegas();
        let m2 = self.params.m().powi(2);
        2.0 * minkowski_dot(&k1, &k2) - m2 * (w2 / w1 + w1 / w2)
    }

    /// Exactly boosted oracle: each wave vector is the spatial part of the boosted four-momentum.
    pub fn boosted(&self, boost: &Boost) -> Result<TwoModeOracle> {
        if boost.mode() != BoostMode::Exact {
            return Err(KgError::InvalidParameter(
                "oracle boosts must be exact".into(),
            ));
        }
        let (k1, k2) = self.four_vectors();
        let (b1, b2) = (boost.apply(&k1), boost.apply(&k2));
        Ok(TwoModeOracle {
            k1: b1[1..].to_vec(),
            k2: b2[1..].to_vec(),
            ..self.clone()
        })
    }
}

pub fn two_mode_oracle(o: &TwoModeOracle, a: f64, event: &[f64]) -> Result<TwoModeRecord> {
    if !(a > -1.0 && a < 1.0) {
        return Err(KgError::InvalidParameter(format!(
            "a must lie in (-1, 1), got {a}"
        )));
    }
    let p = o.params;
    let m = p.m();
    let (k1, k2) = o.four_vectors();
    let (w1, w2) = o.omegas();
    let q: Vec<f64> = k1.iter().zip(&k2).map(|(x, y)| x - y).collect();
    let z = o.c1 * o.c2.conj() * C64::from_polar(1.0, minkowski_dot(&q, event));
    let kvec: Vec<f64> = k1
        .iter()
        .zip(&k2)
        .map(|(x, y)| (w2 / w1).sqrt() * x + (w1 / w2).sqrt() * y)
        .collect();
    let scale = p.kappa() / m;
    let (n1, n2) = (o.c1.norm_sqr(), o.c2.norm_sqr());
    let cal0: Vec<f64> = (0..k1.len())
        .map(|mu| scale * (n1 * k1[mu] + n2 * k2[mu] + z.re * kvec[mu]))
        .collect();
    let cal_j = cal0.iter().map(|v| (1.0 + a) * v).collect();
    let j = (0..k1.len())
        .map(|mu| {
            C64::new(
                scale * (1.0 + a) * (n1 * k1[mu] + n2 * k2[mu] + z.re * (k1[mu] + k2[mu])),
                0.0,
            )
        })
        .collect();
    let f = -scale * (1.0 + a) * z.im;
    let div_cal_j = (m * m + minkowski_dot(&k1, &k2)) * ((w1 / w2).sqrt() - (w2 / w1).sqrt()) * f;
    // div J is proportional to k1^2 - k2^2, and both momenta sit on the shell k^2 = -M^2.
    let div_j = 0.0;
    Ok(TwoModeRecord {
        cal_j,
        j,
        k: kvec,
        ksq: o.ksq(),
        div_cal_j,
        div_j,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoncovarianceRecord {
    pub ksq_before: f64,
    pub ksq_after: f64,
    pub delta: f64,
    pub k1k2_before: f64,
    pub k1k2_after: f64,
}

pub fn noncovariance_demo(o: &TwoModeOracle, boost: &Boost) -> Result<NoncovarianceRecord> {
    let (w1, w2) = o.omegas();
    if (w1 - w2).abs() <= 1e-9 {
        return Err(KgError::Precondition(
            "equal frequencies: the obstruction vanishes".into(),
        ));
    }
    let b = o.boosted(boost)?;
    let (k1, k2) = o.four_vectors();
    let (b1, b2) = b.four_vectors();
    let (ksq_before, ksq_after) = (o.ksq(), b.ksq());
    Ok(NoncovarianceRecord {
        ksq_before,
        ksq_after,
        delta: (ksq_after - ksq_before).abs(),
        k1k2_before: minkowski_dot(&k1, &k2),
        k1k2_after: minkowski_dot(&b1, &b2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_field;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_mode_current() {
        let lat = MomentumLattice::new(vec![4.0, 6.0], vec![8, 8]).unwrap();
        let p = ModelParams::new(1.1, 0.9, 0.4).unwrap();
        let target = lat.flat_from_signed(&[1, -2]).unwrap();
        let c = C64::new(0.7, 0.2);
        let mut plus = vec![C64::new(0.0, 0.0); lat.len()];
        plus[target] = c;
        let f = LatticeField::new(
            lat.clone(),
            p,
            plus.clone(),
            vec![C64::new(0.0, 0.0); lat.len()],
            0.0,
        )
        .unwrap();
        let j = current_ja(&f, 0.3);
        let k = lat.wavevector(target);
        let kmu = [p.omega(lat.ksq(target)), k[0], k[1]];
        for mu in 0..3 {
            let want = p.kappa() * (1.0 + p.a()) / p.m() * c.norm_sqr() * kmu[mu];
            assert!(j.components[mu].iter().all(|z| (z - want).norm() < 1e-12));
        }
        let neg = LatticeField::new(
            lat.clone(),
            p,
            vec![C64::new(0.0, 0.0); lat.len()],
            plus,
            0.0,
        )
        .unwrap();
        let jn = current_ja(&neg, 0.0);
        assert!(jn.components[0]
            .iter()
            .all(|z| z.im.abs() < 1e-12 && z.re > 0.0));
    }

    #[test]
    fn continuity_and_densities() {
        let lat = MomentumLattice::new(vec![5.0, 7.0], vec![16, 12]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let p = ModelParams::new(0.9, 1.3, -0.3).unwrap();
        let f = random_field(&lat, &p, 0.7, 0.0, &mut rng);
        assert!(continuity_residual(&f, 0.4, Which::Ja) <= 1e-10);
        let cal = current_calja(&f, 0.4);
        let rho = rho_a(&f, 0.4).unwrap();
        let rho2 = rho_a_velocity_form(&f, 0.4);
        let peak = rho.iter().cloned().fold(0.0, f64::max);
        for j in 0..rho.len() {
            assert!((cal.components[0][j] - rho[j]).abs() <= 1e-12 * peak);
            assert!((rho2[j] - rho[j]).abs() <= 1e-12 * peak);
        }
        let j0 = current_ja(&f, 0.4);
        let direct = ja0_direct(&f, 0.4);
        let scale = max_abs(&direct);
        assert!(j0.components[0]
            .iter()
            .zip(&direct)
            .all(|(x, y)| (x - y).norm() <= 1e-12 * scale));
        let (re, im) = split_re_im(&f, 0.4);
        for mu in 0..3 {
            for j in 0..re.components[mu].len() {
                let z = C64::new(re.components[mu][j], im.components[mu][j]);
                assert!((z - j0.components[mu][j]).norm() <= 1e-12 * j0.max_abs());
            }
        }
    }

    #[test]
    fn reference_ksq_and_noncovariance() {
        let p = ModelParams::new(1.0, 1.0, 0.0).unwrap();
        let o = TwoModeOracle::new(
            vec![0.0],
            vec![3f64.sqrt()],
            C64::new(1.0, 0.0),
            C64::new(0.5, 0.5),
            p,
        )
        .unwrap();
        assert!((o.ksq() + 6.5).abs() < 1e-12);
        let r = noncovariance_demo(&o, &Boost::exact(vec![0.5]).unwrap()).unwrap();
        assert!(r.delta > 1e-3);
        assert!((r.k1k2_before - r.k1k2_after).abs() < 1e-12);
        let z = noncovariance_demo(&o, &Boost::exact(vec![0.0]).unwrap()).unwrap();
        assert_eq!(z.delta, 0.0);
        let rec = two_mode_oracle(&o, 0.3, &[0.2, 1.0]).unwrap();
        assert_eq!(rec.div_j, 0.0);
    }
}
