use crate::error::{ensure_finite, KgError, Result};
use crate::lattice::{max_abs, max_abs_diff, MomentumLattice, C64};
use crate::params::ModelParams;

/// Klein-Gordon field on a periodic box stored as positive/negative-frequency mode coefficients:
/// `psi(t, x) = sum_k [phi_plus e^{-i w (t - t0)} + phi_minus e^{+i w (t - t0)}] e^{i k x}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeField {
    lattice: MomentumLattice,
    params: ModelParams,
    phi_plus: Vec<C64>,
    phi_minus: Vec<C64>,
    t0: f64,
    omega_scale: f64,
}

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

impl LatticeField {
    pub fn new(
        lattice: MomentumLattice,
        params: ModelParams,
        phi_plus: Vec<C64>,
        phi_minus: Vec<C64>,
        t0: f64,
    ) -> Result<Self> {
        lattice.check_len(phi_plus.len())?;
        lattice.check_len(phi_minus.len())?;
        ensure_finite("t0", t0)?;
        if phi_plus.iter().chain(&phi_minus).any(|c| !c.is_finite()) {
            return Err(KgError::NonFinite("mode coefficients".into()));
        }
        Ok(LatticeField {
            lattice,
            params,
            phi_plus,
            phi_minus,
            t0,
            omega_scale: 1.0,
        })
    }

    pub fn zero(lattice: MomentumLattice, params: ModelParams, t0: f64) -> Self {
        let n = lattice.len();
        LatticeField {
            lattice,
            params,
            phi_plus: vec![ZERO; n],
            phi_minus: vec![ZERO; n],
            t0,
            omega_scale: 1.0,
        }
    }

    /// Builds the field with data `(psi0, psidot0)` at `t0`: `phi_pm = (c +- i cdot / w) / 2`.
    pub fn from_initial_data(
        psi0: &[C64],
        psidot0: &[C64],
        lattice: MomentumLattice,
        params: ModelParams,
        t0: f64,
    ) -> Result<Self> {
        lattice.check_len(psi0.len())?;
        lattice.check_len(psidot0.len())?;
        if psi0.iter().chain(psidot0).any(|c| !c.is_finite()) {
            return Err(KgError::NonFinite("initial data".into()));
        }
        ensure_finite("t0", t0)?;
        let c = lattice.to_modes(psi0);
        let cdot = lattice.to_modes(psidot0);
        let mut plus = Vec::with_capacity(c.len());
        let mut minus = Vec::with_capacity(c.len());
        for f in 0..c.len() {
            let w = params.omega(lattice.ksq(f));
            let ic = C64::new(0.0, 1.0) * cdot[f] / w;
            plus.push(0.5 * (c[f] + ic));
            minus.push(0.5 * (c[f] - ic));
        }
        Ok(LatticeField {
            lattice,
            params,
            phi_plus: plus,
            phi_minus: minus,
            t0,
            omega_scale: 1.0,
        })
    }

    pub fn lattice(&self) -> &MomentumLattice {
        &self.lattice
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn phi_plus(&self) -> &[C64] {
        &self.phi_plus
    }

    pub fn phi_minus(&self) -> &[C64] {
        &self.phi_minus
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn omega(&self, flat: usize) -> f64 {
        self.omega_scale * self.params.omega(self.lattice.ksq(flat))
    }

    pub fn omegas(&self) -> Vec<f64> {
        (0..self.lattice.len()).map(|f| self.omega(f)).collect()
    }

    /// Same coefficients under different model parameters.
    pub fn with_params(&self, params: ModelParams) -> Self {
        LatticeField {
            params,
            ..self.clone()
        }
    }

    /// Test hook: scales every frequency so the field no longer solves the equation.
    #[doc(hidden)]
    pub fn corrupt_dispersion(mut self, factor: f64) -> Self {
        self.omega_scale = factor;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.phi_plus
            .iter()
            .chain(&self.phi_minus)
            .all(|c| *c == ZERO)
    }

    /// Mode array of `sum_eps w_eps d_t^p psi_eps(t)`.
    pub fn sector_modes(&self, t: f64, w_plus: C64, w_minus: C64, time_derivs: u32) -> Vec<C64> {
        let tau = t - self.t0;
        (0..self.lattice.len())
            .map(|f| {
                let w = self.omega(f);
                let ep = C64::from_polar(1.0, -w * tau);
                let dp = C64::new(0.0, -w).powu(time_derivs);
                let dm = C64::new(0.0, w).powu(time_derivs);
                w_plus * self.phi_plus[f] * ep * dp + w_minus * self.phi_minus[f] * ep.conj() * dm
            })
            .collect()
    }

    pub fn psi_modes(&self, t: f64) -> Vec<C64> {
        self.sector_modes(t, ONE, ONE, 0)
    }

    pub fn psidot_modes(&self, t: f64) -> Vec<C64> {
        self.sector_modes(t, ONE, ONE, 1)
    }

    /// Samples of `psi(t)` and `d_0 psi(t)` at the lattice nodes.
    pub fn evaluate(&self, t: f64) -> Result<(Vec<C64>, Vec<C64>)> {
        ensure_finite("t", t)?;
        Ok((
            self.lattice.to_samples(&self.psi_modes(t)),
            self.lattice.to_samples(&self.psidot_modes(t)),
        ))
    }

    /// Evaluation through `cos(tau D^1/2) psi0 + sin(tau D^1/2) D^-1/2 psidot0`.
    pub fn evaluate_cos_sin(&self, t: f64) -> Result<(Vec<C64>, Vec<C64>)> {
        let (psi0, psidot0) = self.evaluate(self.t0)?;
        let c = self.lattice.to_modes(&psi0);
        let cd = self.lattice.to_modes(&psidot0);
        let tau = t - self.t0;
        let mut p = Vec::with_capacity(c.len());
        let mut pd = Vec::with_capacity(c.len());
        for f in 0..c.len() {
            let w = self.omega(f);
            let (s, co) = (w * tau).sin_cos();
            p.push(co * c[f] + s / w * cd[f]);
            pd.push(-w * s * c[f] + co * cd[f]);
        }
        Ok((self.lattice.to_samples(&p), self.lattice.to_samples(&pd)))
    }

    /// Charge grading `psi_c = i D^{-1/2} psi_dot`.
    pub fn apply_c(&self) -> Self {
        LatticeField {
            phi_minus: self.phi_minus.iter().map(|c| -c).collect(),
            ..self.clone()
        }
    }

    pub fn energy_split(&self) -> (Self, Self) {
        let n = self.lattice.len();
        let plus = LatticeField {
            phi_minus: vec![ZERO; n],
            ..self.clone()
        };
        let minus = LatticeField {
            phi_plus: vec![ZERO; n],
            ..self.clone()
        };
        (plus, minus)
    }

    /// Moves the reference time by `dt` leaving `psi` unchanged as a function of time.
    pub fn evolve(&self, dt: f64) -> Result<Self> {
        ensure_finite("dt", dt)?;
        let mut out = self.clone();
        for f in 0..self.lattice.len() {
            let ph = C64::from_polar(1.0, -self.omega(f) * dt);
            out.phi_plus[f] *= ph;
            out.phi_minus[f] *= ph.conj();
        }
        out.t0 = self.t0 + dt;
        Ok(out)
    }

    pub fn reanchored(&self, t0: f64) -> Result<Self> {
        self.evolve(t0 - self.t0)
    }

    /// Max-norm of `(d_0^2 - lap + M^2) psi` at time `t`, relative to the field max-norm.
    pub fn kg_residual(&self, t: f64) -> f64 {
        let m2 = self.params.m() * self.params.m();
        let second = self.sector_modes(t, ONE, ONE, 2);
        let psi = self.psi_modes(t);
        let res: Vec<C64> = (0..psi.len())
            .map(|f| second[f] + (self.lattice.ksq(f) + m2) * psi[f])
            .collect();
        let scale = max_abs(&self.lattice.to_samples(&psi));
        if scale == 0.0 {
            return 0.0;
        }
        max_abs(&self.lattice.to_samples(&res)) / scale
    }

    /// Residual of `i d_0 psi_eps = eps D^{1/2} psi_eps` for both sectors, relative to the field max-norm.
    pub fn foldy_residual(&self, t: f64) -> f64 {
        let (plus, minus) = self.energy_split();
        let scale = max_abs(&self.evaluate(t).map(|e| e.0).unwrap_or_default());
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for (part, eps) in [(plus, 1.0), (minus, -1.0)] {
            let (psi, psidot) = part.evaluate(t).expect("finite t");
            let rhs = apply_d_power_unchecked(&psi, 0.5, &self.lattice, &self.params);
            let r = psidot
                .iter()
                .zip(&rhs)
                .fold(0.0f64, |m, (pd, r)| m.max((C64::i() * pd - eps * r).norm()));
            worst = worst.max(r);
        }
        worst / scale
    }

    pub fn scaled(&self, s: C64) -> Self {
        LatticeField {
            phi_plus: self.phi_plus.iter().map(|c| c * s).collect(),
            phi_minus: self.phi_minus.iter().map(|c| c * s).collect(),
            ..self.clone()
        }
    }

    /// `self + other`, with `other` re-anchored to this field's reference time.
    pub fn add(&self, other: &LatticeField) -> Result<Self> {
        self.check_compatible(other)?;
        let o = other.reanchored(self.t0)?;
        Ok(LatticeField {
            phi_plus: self
                .phi_plus
                .iter()
                .zip(&o.phi_plus)
                .map(|(a, b)| a + b)
                .collect(),
            phi_minus: self
                .phi_minus
                .iter()
                .zip(&o.phi_minus)
                .map(|(a, b)| a + b)
                .collect(),
            ..self.clone()
        })
    }

    pub fn sub(&self, other: &LatticeField) -> Result<Self> {
        self.add(&other.scaled(C64::new(-1.0, 0.0)))
    }

    pub fn check_compatible(&self, other: &LatticeField) -> Result<()> {
        if self.lattice != other.lattice {
            return Err(KgError::LatticeMismatch);
        }
        if self.params != other.params {
            return Err(KgError::ParamsMismatch);
        }
        Ok(())
    }

    /// Largest coefficient difference against another field anchored at the same time.
    pub fn max_coeff_diff(&self, other: &LatticeField) -> f64 {
        max_abs_diff(&self.phi_plus, &other.phi_plus)
            .max(max_abs_diff(&self.phi_minus, &other.phi_minus))
    }

    pub fn max_coeff(&self) -> f64 {
        max_abs(&self.phi_plus).max(max_abs(&self.phi_minus))
    }

    /// Deviation from real initial data, `max |phi_minus(k) - phi_plus(-k)^*|` relative to the largest coefficient.
    pub fn reality_defect(&self) -> f64 {
        let scale = self.max_coeff();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for f in 0..self.lattice.len() {
            let g = self.lattice.neg_flat(f);
            worst = worst.max((self.phi_minus[f] - self.phi_plus[g].conj()).norm());
        }
        worst / scale
    }
}

/// `D^alpha` applied spectrally to grid samples.
pub fn apply_d_power(
    grid: &[C64],
    alpha: f64,
    lattice: &MomentumLattice,
    params: &ModelParams,
) -> Result<Vec<C64>> {
    ensure_finite("alpha", alpha)?;
    lattice.check_len(grid.len())?;
    Ok(apply_d_power_unchecked(grid, alpha, lattice, params))
}

pub(crate) fn apply_d_power_unchecked(
    grid: &[C64],
    alpha: f64,
    lattice: &MomentumLattice,
    params: &ModelParams,
) -> Vec<C64> {
    let m2 = params.m() * params.m();
    lattice.apply_multiplier(grid, |f| C64::new((lattice.ksq(f) + m2).powf(alpha), 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_field;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (MomentumLattice, ModelParams) {
        (
            MomentumLattice::new(vec![7.0, 5.0], vec![16, 8]).unwrap(),
            ModelParams::new(1.3, 0.7, 0.2).unwrap(),
        )
    }

    fn plane(lat: &MomentumLattice, flat: usize) -> Vec<C64> {
        let k = lat.wavevector(flat);
        (0..lat.len())
            .map(|f| {
                let x = lat.node_position(f);
                C64::from_polar(1.0, (0..lat.dim()).map(|i| k[i] * x[i]).sum())
            })
            .collect()
    }

    #[test]
    fn single_sector_initial_data() {
        let (lat, p) = setup();
        let target = lat.flat_from_signed(&[3, -1]).unwrap();
        let w = p.omega(lat.ksq(target));
        let psi = plane(&lat, target);
        for (sign, pos) in [(-1.0, true), (1.0, false)] {
            let dot: Vec<C64> = psi.iter().map(|z| z * C64::new(0.0, sign * w)).collect();
            let f = LatticeField::from_initial_data(&psi, &dot, lat.clone(), p, 0.0).unwrap();
            let (hit, miss) = if pos {
                (f.phi_plus(), f.phi_minus())
            } else {
                (f.phi_minus(), f.phi_plus())
            };
            for g in 0..lat.len() {
                let want = if g == target { 1.0 } else { 0.0 };
                assert!((hit[g] - want).norm() < 1e-13);
                assert!(miss[g].norm() < 1e-13);
            }
        }
    }

    #[test]
    fn initial_data_round_trip() {
        let (lat, p) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = random_field(&lat, &p, 0.5, 0.3, &mut rng);
        let (psi, dot) = f.evaluate(0.3).unwrap();
        let g = LatticeField::from_initial_data(&psi, &dot, lat.clone(), p, 0.3).unwrap();
        let (psi2, dot2) = g.evaluate(0.3).unwrap();
        assert!(max_abs_diff(&psi, &psi2) <= 1e-12 * max_abs(&psi));
        assert!(max_abs_diff(&dot, &dot2) <= 1e-12 * max_abs(&dot));
        assert!(LatticeField::from_initial_data(&psi[1..], &dot, lat.clone(), p, 0.0).is_err());
        let mut bad = psi.clone();
        bad[0] = C64::new(f64::NAN, 0.0);
        assert!(LatticeField::from_initial_data(&bad, &dot, lat, p, 0.0).is_err());
    }

    #[test]
    fn evaluate_matches_cos_sin_and_phase() {
        let (lat, p) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = random_field(&lat, &p, 0.5, -0.4, &mut rng);
        for t in [-0.4, 0.9, 13.7] {
            let (a, ad) = f.evaluate(t).unwrap();
            let (b, bd) = f.evaluate_cos_sin(t).unwrap();
            assert!(max_abs_diff(&a, &b) <= 1e-12 * max_abs(&a).max(1.0));
            assert!(max_abs_diff(&ad, &bd) <= 1e-12 * max_abs(&ad).max(1.0));
        }
        let target = lat.flat_from_signed(&[1, 2]).unwrap();
        let mut plus = vec![ZERO; lat.len()];
        plus[target] = C64::new(0.3, 0.4);
        let single = LatticeField::new(lat.clone(), p, plus, vec![ZERO; lat.len()], 1.0).unwrap();
        let (s0, _) = single.evaluate(1.0).unwrap();
        let (s1, _) = single.evaluate(1.5).unwrap();
        let ph = C64::from_polar(1.0, -single.omega(target) * 0.5);
        for (a, b) in s0.iter().zip(&s1) {
            assert!((a * ph - b).norm() < 1e-13);
        }
    }

    #[test]
    fn d_power_examples() {
        let lat = MomentumLattice::new(vec![2.0 * std::f64::consts::PI], vec![8]).unwrap();
        let p = ModelParams::new(1.0, 1.0, 0.0).unwrap();
        let constant = vec![C64::new(2.5, -1.0); 8];
        let out = apply_d_power(&constant, -0.5, &lat, &p).unwrap();
        assert!(max_abs_diff(&out, &constant) < 1e-14);
        let lat3 = MomentumLattice::new(vec![2.0 * std::f64::consts::PI; 3], vec![4; 3]).unwrap();
        let target = lat3.flat_from_signed(&[1, 1, -1]).unwrap();
        let wave = plane(&lat3, target);
        let out = apply_d_power(&wave, 0.5, &lat3, &p).unwrap();
        let twice: Vec<C64> = wave.iter().map(|z| 2.0 * z).collect();
        assert!(max_abs_diff(&out, &twice) < 1e-13);
        assert!(apply_d_power(&wave, f64::NAN, &lat3, &p).is_err());
    }

    #[test]
    fn residuals_and_negative_control() {
        let (lat, p) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_field(&lat, &p, 0.5, 0.0, &mut rng);
        assert!(f.kg_residual(2.0) <= 1e-10);
        assert!(f.foldy_residual(2.0) <= 1e-12);
        assert_eq!(
            LatticeField::zero(lat.clone(), p, 0.0).kg_residual(1.0),
            0.0
        );
        assert!(f.corrupt_dispersion(1.01).kg_residual(0.0) > 1e-3);
    }

    #[test]
    fn real_data_symmetry() {
        let (lat, p) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = crate::random::random_real_field(&lat, &p, 0.5, 0.0, &mut rng);
        let (psi, dot) = f.evaluate(0.0).unwrap();
        assert!(psi.iter().chain(&dot).all(|z| z.im.abs() < 1e-12));
        assert!(f.reality_defect() < 1e-13);
        let g = LatticeField::from_initial_data(&psi, &dot, lat, p, 0.0).unwrap();
        assert!(g.reality_defect() < 1e-12);
    }
}
