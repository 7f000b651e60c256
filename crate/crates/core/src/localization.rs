//! Maps onto `L^2 (+) L^2`, position and momentum operators, localized states and position wavefunctions.
//!
//! Localized states use Kronecker normalization: the image of `psi^(eps, y)` under `U` is the grid
//! indicator of `y` divided by `sqrt(cell volume)`, so `(psi^(eps,y), psi^(eps',y'))_0` is a Kronecker delta.
//! The continuum (Dirac) normalization is recovered by a further factor `1/sqrt(cell volume)`.

use crate::bessel::besselk_profile;
use crate::error::{KgError, Result};
use crate::field::LatticeField;
use crate::inner::inner_0;
use crate::lattice::{max_abs, MomentumLattice, C64};
use crate::params::ModelParams;
use crate::planewave::Sector;
use std::collections::HashMap;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Image of a field in `L^2 (+) L^2`, stored as samples on the nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoComponent {
    lattice: MomentumLattice,
    xi1: Vec<C64>,
    xi2: Vec<C64>,
}

impl TwoComponent {
    pub fn new(lattice: MomentumLattice, xi1: Vec<C64>, xi2: Vec<C64>) -> Result<Self> {
        lattice.check_len(xi1.len())?;
        lattice.check_len(xi2.len())?;
        Ok(TwoComponent { lattice, xi1, xi2 })
    }

    pub fn lattice(&self) -> &MomentumLattice {
        &self.lattice
    }

    pub fn xi1(&self) -> &[C64] {
        &self.xi1
    }

    pub fn xi2(&self) -> &[C64] {
        &self.xi2
    }

    /// Standard `L^2 (+) L^2` inner product by grid quadrature.
    pub fn inner(&self, other: &TwoComponent) -> Result<C64> {
        if self.lattice != other.lattice {
            return Err(KgError::LatticeMismatch);
        }
        let s: C64 = self
            .xi1
            .iter()
            .zip(&other.xi1)
            .chain(self.xi2.iter().zip(&other.xi2))
            .map(|(x, y)| x.conj() * y)
            .sum();
        Ok(s * self.lattice.cell_volume())
    }

    /// Multiplies both components by the node coordinate along `axis`.
    pub fn times_coordinate(&self, axis: usize) -> TwoComponent {
        let x = |f: usize| self.lattice.node_position(f)[axis];
        TwoComponent {
            lattice: self.lattice.clone(),
            xi1: self.xi1.iter().enumerate().map(|(f, v)| v * x(f)).collect(),
            xi2: self.xi2.iter().enumerate().map(|(f, v)| v * x(f)).collect(),
        }
    }

    /// Applies the spectral momentum `-i d/dx_axis` to both components.
    pub fn times_momentum(&self, axis: usize) -> TwoComponent {
        let k = |f: usize| C64::new(self.lattice.wavevector(f)[axis], 0.0);
        TwoComponent {
            lattice: self.lattice.clone(),
            xi1: self.lattice.apply_multiplier(&self.xi1, k),
            xi2: self.lattice.apply_multiplier(&self.xi2, k),
        }
    }
}

fn check_a(a: f64) -> Result<()> {
    if !(a > -1.0 && a < 1.0) {
        return Err(KgError::InvalidParameter(format!(
            "a must lie in (-1, 1), got {a}"
        )));
    }
    Ok(())
}

fn omega(lattice: &MomentumLattice, params: &ModelParams, f: usize) -> f64 {
    params.omega(lattice.ksq(f))
}

/// `U_a psi = (1/2) sqrt(kappa/M) D^{1/4} (sqrt(1+a)(psi + psi_c), sqrt(1-a)(psi - psi_c))` at the field's `t0`.
pub fn map_ua(field: &LatticeField, a: f64) -> Result<TwoComponent> {
    check_a(a)?;
    let lat = field.lattice();
    let p = field.params();
    let s = (p.kappa() / p.m()).sqrt();
    let (c1, c2) = ((1.0 + a).sqrt() * s, (1.0 - a).sqrt() * s);
    let m1: Vec<C64> = (0..lat.len())
        .map(|f| field.phi_plus()[f] * c1 * omega(lat, p, f).sqrt())
        .collect();
    let m2: Vec<C64> = (0..lat.len())
        .map(|f| field.phi_minus()[f] * c2 * omega(lat, p, f).sqrt())
        .collect();
    TwoComponent::new(lat.clone(), lat.to_samples(&m1), lat.to_samples(&m2))
}

/// `U_a^{-1}`: the field whose image at reference time `t0` is `xi`.
pub fn map_ua_inverse(
    xi: &TwoComponent,
    a: f64,
    t0: f64,
    params: ModelParams,
) -> Result<LatticeField> {
    check_a(a)?;
    let lat = xi.lattice();
    let s = (params.m() / params.kappa()).sqrt();
    let (c1, c2) = (s / (1.0 + a).sqrt(), s / (1.0 - a).sqrt());
    let plus: Vec<C64> = lat
        .to_modes(&xi.xi1)
        .iter()
        .enumerate()
        .map(|(f, v)| v * c1 / omega(lat, &params, f).sqrt())
        .collect();
    let minus: Vec<C64> = lat
        .to_modes(&xi.xi2)
        .iter()
        .enumerate()
        .map(|(f, v)| v * c2 / omega(lat, &params, f).sqrt())
        .collect();
    LatticeField::new(lat.clone(), params, plus, minus, t0)
}

/// `U^{-1}`: `psi(x^0) = sqrt(M/kappa) D^{-1/4} [e^{-i (x^0 - t0) D^{1/2}} xi1 + e^{i (x^0 - t0) D^{1/2}} xi2]`.
pub fn map_u_inverse(xi: &TwoComponent, t0: f64, params: ModelParams) -> Result<LatticeField> {
    map_ua_inverse(xi, 0.0, t0, params)
}

/// `U_a^{-1} U`, carrying a field into the space with parameter `a`.
pub fn cal_ua(field: &LatticeField, a: f64) -> Result<LatticeField> {
    let p = field.params().with_a(a)?;
    let xi = map_ua(field, 0.0)?;
    map_ua_inverse(&xi, a, field.t0(), p)
}

/// `U^{-1} U_a` for a field carrying parameter `a`; the result carries `a = 0`.
pub fn cal_ua_inverse(field: &LatticeField) -> Result<LatticeField> {
    let p = field.params();
    let xi = map_ua(field, p.a())?;
    map_u_inverse(&xi, field.t0(), p.with_a(0.0)?)
}

/// `X_i = U^{-1} (x_i (x) sigma_0) U` by conjugation, one field per axis, without preconditions.
pub fn position_conjugation(field: &LatticeField) -> Result<Vec<LatticeField>> {
    let xi = map_ua(field, 0.0)?;
    (0..field.lattice().dim())
        .map(|i| map_u_inverse(&xi.times_coordinate(i), field.t0(), *field.params()))
        .collect()
}

/// `[x + i p / (2(p^2 + M^2)) - i tau p / (p^2 + M^2) d_0] psi` sampled at time `t`, one grid per axis.
pub fn position_closed_form(field: &LatticeField, t: f64) -> Result<Vec<Vec<C64>>> {
    let lat = field.lattice();
    let p = field.params();
    let (psi, dot) = field.evaluate(t)?;
    let tau = t - field.t0();
    Ok((0..lat.dim())
        .map(|i| {
            let w2 = |f: usize| lat.ksq(f) + p.m().powi(2);
            let half = lat.apply_multiplier(&psi, |f| {
                C64::new(0.0, lat.wavevector(f)[i] / (2.0 * w2(f)))
            });
            let drift =
                lat.apply_multiplier(&dot, |f| C64::new(0.0, -tau * lat.wavevector(f)[i] / w2(f)));
            (0..psi.len())
                .map(|j| lat.node_position(j)[i] * psi[j] + half[j] + drift[j])
                .collect()
        })
        .collect())
}

/// Share of the position probability in the central half of the box.
pub fn interior_mass_fraction(field: &LatticeField) -> f64 {
    let lat = field.lattice();
    let (fp, fm) = wavefunction_f(field);
    let mut inside = 0.0;
    let mut total = 0.0;
    for j in 0..lat.len() {
        let w = fp[j].norm_sqr() + fm[j].norm_sqr();
        total += w;
        let x = lat.node_position(j);
        if (0..lat.dim()).all(|i| x[i].abs() < 0.25 * lat.lengths()[i]) {
            inside += w;
        }
    }
    if total == 0.0 {
        1.0
    } else {
        inside / total
    }
}

fn seam_ratio(lattice: &MomentumLattice, samples: &[C64]) -> f64 {
    let peak = max_abs(samples);
    if peak == 0.0 {
        return 0.0;
    }
    let mut seam: f64 = 0.0;
    for (j, v) in samples.iter().enumerate() {
        let idx = lattice.multi_index(j);
        if (0..lattice.dim()).any(|i| idx[i] == 0 || idx[i] + 1 == lattice.counts()[i]) {
            seam = seam.max(v.norm());
        }
    }
    seam / peak
}

/// Times at which the two position-operator routes are compared.
pub const POSITION_CHECK_OFFSETS: [f64; 2] = [0.0, 1.0];

/// Position operator with preconditions: the field must be interior-localized, and the conjugation and
/// closed-form routes must agree to `1e-9` before the conjugation result is returned.
pub fn position_apply(field: &LatticeField) -> Result<Vec<LatticeField>> {
    let frac = interior_mass_fraction(field);
    if frac <= 0.999 {
        return Err(KgError::Precondition(format!(
            "only {frac:.6} of the probability lies in the central half"
        )));
    }
    let xi = map_ua(field, 0.0)?;
    let wrap = seam_ratio(field.lattice(), xi.xi1()).max(seam_ratio(field.lattice(), xi.xi2()));
    if wrap > 1e-8 {
        return Err(KgError::BoundaryWrap(wrap));
    }
    let out = position_conjugation(field)?;
    for dt in POSITION_CHECK_OFFSETS {
        let t = field.t0() + dt;
        let closed = position_closed_form(field, t)?;
        for (i, c) in closed.iter().enumerate() {
            let (conj, _) = out[i].evaluate(t)?;
            let scale = max_abs(c).max(max_abs(&conj)).max(f64::MIN_POSITIVE);
            let dev = conj
                .iter()
                .zip(c)
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max)
                / scale;
            if dev > 1e-9 {
                return Err(KgError::DualPathMismatch(dev));
            }
        }
    }
    Ok(out)
}

/// Momentum operator as the spectral multiplier `k`, one field per axis.
pub fn momentum_apply(field: &LatticeField) -> Result<Vec<LatticeField>> {
    let lat = field.lattice();
    (0..lat.dim())
        .map(|i| {
            let k = |f: usize| lat.wavevector(f)[i];
            let plus = field
                .phi_plus()
                .iter()
                .enumerate()
                .map(|(f, c)| c * k(f))
                .collect();
            let minus = field
                .phi_minus()
                .iter()
                .enumerate()
                .map(|(f, c)| c * k(f))
                .collect();
            LatticeField::new(lat.clone(), *field.params(), plus, minus, field.t0())
        })
        .collect()
}

/// `P_i = U^{-1} (p_i (x) sigma_0) U`.
pub fn momentum_conjugation(field: &LatticeField) -> Result<Vec<LatticeField>> {
    let xi = map_ua(field, 0.0)?;
    (0..field.lattice().dim())
        .map(|i| map_u_inverse(&xi.times_momentum(i), field.t0(), *field.params()))
        .collect()
}

/// Position eigenstate `psi^(eps, y)` realized on the lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalizedState {
    epsilon: Sector,
    y: Vec<f64>,
    node: usize,
    field: LatticeField,
}

impl LocalizedState {
    pub fn epsilon(&self) -> Sector {
        self.epsilon
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn node(&self) -> usize {
        self.node
    }

    pub fn field(&self) -> &LatticeField {
        &self.field
    }

    pub fn into_field(self) -> LatticeField {
        self.field
    }

    /// The state in continuum normalization, `(psi, psi)_0 = 1 / cell volume`.
    pub fn dirac_scaled(&self) -> LatticeField {
        self.field.scaled(C64::new(
            1.0 / self.field.lattice().cell_volume().sqrt(),
            0.0,
        ))
    }
}

/// `psi^(eps, y)(t) = sqrt(M/kappa) D^{-1/4} e^{-i eps (t - t0) D^{1/2}} |y>` with `|y>` the normalized node indicator.
pub fn localized_state(
    epsilon: Sector,
    y: &[f64],
    lattice: &MomentumLattice,
    params: ModelParams,
    t0: f64,
) -> Result<LocalizedState> {
    let node = lattice.node_of(y)?;
    let mut delta = vec![ZERO; lattice.len()];
    delta[node] = C64::new(1.0 / lattice.cell_volume().sqrt(), 0.0);
    let zero = vec![ZERO; lattice.len()];
    let xi = match epsilon {
        Sector::Plus => TwoComponent::new(lattice.clone(), delta, zero)?,
        Sector::Minus => TwoComponent::new(lattice.clone(), zero, delta)?,
    };
    let field = map_u_inverse(&xi, t0, params)?;
    let snapped = lattice.node_position(node)[..lattice.dim()].to_vec();
    Ok(LocalizedState {
        epsilon,
        y: snapped,
        node,
        field,
    })
}

/// Localized state at a node index.
pub fn localized_state_at_node(
    epsilon: Sector,
    node: usize,
    lattice: &MomentumLattice,
    params: ModelParams,
    t0: f64,
) -> Result<LocalizedState> {
    if node >= lattice.len() {
        return Err(KgError::OffGrid);
    }
    let y = lattice.node_position(node);
    localized_state(epsilon, &y[..lattice.dim()], lattice, params, t0)
}

/// Position wavefunctions `f(eps, x) = sqrt(kappa/M) D^{1/4} psi_eps(t0, x)`, returned as `(f(+), f(-))`.
pub fn wavefunction_f(field: &LatticeField) -> (Vec<C64>, Vec<C64>) {
    let lat = field.lattice();
    let p = field.params();
    let s = (p.kappa() / p.m()).sqrt();
    let scale = |c: &[C64]| -> Vec<C64> {
        let m: Vec<C64> = c
            .iter()
            .enumerate()
            .map(|(f, v)| v * s * omega(lat, p, f).sqrt())
            .collect();
        lat.to_samples(&m)
    };
    (scale(field.phi_plus()), scale(field.phi_minus()))
}

/// Wavefunctions taken with the reference time moved to `t0`.
pub fn wavefunction_f_at(field: &LatticeField, t0: f64) -> Result<(Vec<C64>, Vec<C64>)> {
    Ok(wavefunction_f(&field.reanchored(t0)?))
}

/// Coefficients `(psi^(eps, y), psi)_0` over every node, `(plus, minus)`.
pub fn localized_expansion(field: &LatticeField) -> (Vec<C64>, Vec<C64>) {
    let root = field.lattice().cell_volume().sqrt();
    let (fp, fm) = wavefunction_f(field);
    (
        fp.iter().map(|v| v * root).collect(),
        fm.iter().map(|v| v * root).collect(),
    )
}

/// `sum_eps sum_y c(eps, y) psi^(eps, y)`, built state by state.
pub fn resum_localized(
    plus: &[C64],
    minus: &[C64],
    lattice: &MomentumLattice,
    params: ModelParams,
    t0: f64,
) -> Result<LatticeField> {
    lattice.check_len(plus.len())?;
    lattice.check_len(minus.len())?;
    let mut acc = LatticeField::zero(lattice.clone(), params, t0);
    for (sector, coeffs) in [(Sector::Plus, plus), (Sector::Minus, minus)] {
        for (node, c) in coeffs.iter().enumerate() {
            if *c == ZERO {
                continue;
            }
            let state = localized_state_at_node(sector, node, lattice, params, t0)?;
            acc = acc.add(&state.field.scaled(*c))?;
        }
    }
    Ok(acc)
}

/// Half-open axis-aligned box `[lo, hi)` inside the periodic domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Region {
    pub fn new(lattice: &MomentumLattice, lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != lattice.dim() || hi.len() != lattice.dim() {
            return Err(KgError::InvalidParameter(
                "region dimension differs from the lattice".into(),
            ));
        }
        for i in 0..lo.len() {
            let half = 0.5 * lattice.lengths()[i];
            if !(lo[i] <= hi[i]) || lo[i] < -half || hi[i] > half {
                return Err(KgError::InvalidParameter(format!(
                    "axis {i}: need -{half} <= lo <= hi <= {half}, got [{}, {})",
                    lo[i], hi[i]
                )));
            }
        }
        Ok(Region { lo, hi })
    }

    pub fn whole(lattice: &MomentumLattice) -> Self {
        let hi: Vec<f64> = lattice.lengths().iter().map(|l| 0.5 * l).collect();
        Region {
            lo: hi.iter().map(|h| -h).collect(),
            hi,
        }
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.lo
            .iter()
            .zip(&self.hi)
            .zip(x)
            .all(|((l, h), v)| *l <= *v && *v < *h)
    }
}

/// `P_V = sum_eps sum_{nodes in V} |f(eps, x)|^2 cell`. An input with `(psi, psi)_0` off unity by more
/// than `1e-10` is rescaled when `normalize` is set and rejected otherwise.
pub fn probability_region(field: &LatticeField, region: &Region, normalize: bool) -> Result<f64> {
    let lat = field.lattice();
    if region.lo.len() != lat.dim() {
        return Err(KgError::InvalidParameter(
            "region dimension differs from the lattice".into(),
        ));
    }
    let norm = inner_0(field, field, field.t0())?.re;
    let scale = if (norm - 1.0).abs() <= 1e-10 {
        1.0
    } else if normalize && norm > 0.0 {
        1.0 / norm
    } else {
        return Err(KgError::Precondition(format!(
            "state has (psi, psi)_0 = {norm}, expected 1"
        )));
    };
    let (fp, fm) = wavefunction_f(field);
    let sum: f64 = (0..lat.len())
        .filter(|&j| region.contains(&lat.node_position(j)[..lat.dim()]))
        .map(|j| fp[j].norm_sqr() + fm[j].norm_sqr())
        .sum();
    Ok((sum * lat.cell_volume() * scale).clamp(0.0, 1.0))
}

/// `rho_a` at time `t` through `psi'_a = U_a^{-1} psi`:
/// `psi'_a = alpha_+ psi + i alpha_- D^{-1/2} psi_dot`, `psi'_a_dot = -i alpha_- D^{1/2} psi + alpha_+ psi_dot`,
/// `rho_a = kappa/2M {|D^{1/4} psi'_a|^2 + |D^{-1/4} psi'_a_dot|^2}`, on the padded grid.
pub fn rho_a_prime_route(field: &LatticeField, t: f64) -> Vec<f64> {
    let lat = field.lattice();
    let p = field.params();
    let a = p.a();
    let (ap, am) = (
        0.5 * ((1.0 + a).sqrt() + (1.0 - a).sqrt()),
        0.5 * ((1.0 + a).sqrt() - (1.0 - a).sqrt()),
    );
    let psi = field.psi_modes(t);
    let dot = field.psidot_modes(t);
    let i = C64::new(0.0, 1.0);
    let mut m1 = Vec::with_capacity(lat.len());
    let mut m2 = Vec::with_capacity(lat.len());
    for f in 0..lat.len() {
        let w = field.omega(f);
        let prime = ap * psi[f] + i * am * dot[f] / w;
        let prime_dot = -i * am * w * psi[f] + ap * dot[f];
        m1.push(prime * w.sqrt());
        m2.push(prime_dot / w.sqrt());
    }
    let s1 = lat.to_padded_samples(&m1);
    let s2 = lat.to_padded_samples(&m2);
    s1.iter()
        .zip(&s2)
        .map(|(x, y)| p.kappa() / (2.0 * p.m()) * (x.norm_sqr() + y.norm_sqr()))
        .collect()
}

/// Lattice value of a localized state against the continuum profile at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialSample {
    pub r: f64,
    pub lattice: f64,
    pub continuum: f64,
}

impl RadialSample {
    pub fn rel_err(&self) -> f64 {
        (self.lattice - self.continuum).abs() / self.continuum.abs()
    }
}

/// Minimum-image distance between two points of the periodic box.
pub fn periodic_distance(lattice: &MomentumLattice, a: &[f64], b: &[f64]) -> f64 {
    (0..lattice.dim())
        .map(|i| {
            let l = lattice.lengths()[i];
            let d = (a[i] - b[i]).rem_euclid(l);
            let d = if d >= 0.5 * l { d - l } else { d };
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Dirac-normalized lattice profile of a 3-D localized state at its reference time, against
/// the Bessel-K closed form, over the nodes with `r_min <= M r <= r_max`.
pub fn radial_profile(
    state: &LocalizedState,
    mr_min: f64,
    mr_max: f64,
) -> Result<Vec<RadialSample>> {
    let field = state.dirac_scaled();
    let lat = field.lattice();
    if lat.dim() != 3 {
        return Err(KgError::UnsupportedDimension(lat.dim()));
    }
    let p = *field.params();
    let (psi, _) = field.evaluate(field.t0())?;
    let mut cache: HashMap<u64, f64> = HashMap::new();
    let mut out = Vec::new();
    for (j, v) in psi.iter().enumerate() {
        let r = periodic_distance(lat, &lat.node_position(j), state.y());
        let mr = p.m() * r;
        if mr < mr_min || mr > mr_max || r == 0.0 {
            continue;
        }
        let continuum = match cache.get(&r.to_bits()) {
            Some(c) => *c,
            None => {
                let c = besselk_profile(r, &p, 3)?;
                cache.insert(r.to_bits(), c);
                c
            }
        };
        out.push(RadialSample {
            r,
            lattice: v.re,
            continuum,
        });
    }
    out.sort_by(|a, b| a.r.total_cmp(&b.r));
    Ok(out)
}
