//! Registry of invariant checks grouped by suite, shared by the command-line `verify` runner.

use crate::amplitude::{invariance_check, AmplitudeField, GaussianAmplitude, QuadratureSpec};
use crate::boost::{minkowski_dot, Boost};
use crate::currents::{
    continuity_residual, current_calja, current_calja_at, current_ja, current_ja_at, divergence,
    ja0_direct, noncovariance_demo, rho_a, rho_a_velocity_form, split_re_im, total_ja0,
    total_probability, two_mode_oracle, TwoModeOracle, Which,
};
use crate::em::{
    build_dq, em_gauge_residual, em_inner_and_evolve, EMBackground, ManufacturedPacket,
    WavePotential, WaveVectorPotential,
};
use crate::error::{KgError, Result};
use crate::field::LatticeField;
use crate::gauge::{
    charge_phase_space, gauge_transform, gauge_transform_exponential, generator_check,
    group_classify, GaugeElement, GroupKind, GroupParameter,
};
use crate::inner::{inner_0, inner_a, inner_a_split, inner_standard, kg_inner, wald_inner};
use crate::lattice::{max_abs, MomentumLattice, C64};
use crate::limits::{
    limit_deviation, mutual_density_ladder, operator_expansion_ladder, psi_c_ladder,
    psi_tilde_ladder, schrodinger_residual_ladder, LimitSweep,
};
use crate::localization::{
    localized_expansion, localized_state_at_node, map_ua, momentum_apply, momentum_conjugation,
    periodic_distance, position_conjugation, resum_localized, rho_a_prime_route, wavefunction_f,
    wavefunction_f_at,
};
use crate::packets::{gaussian_packet, gaussian_samples, PacketEnergy};
use crate::params::ModelParams;
use crate::planewave::{PlaneMode, PlaneWaveField, Sector};
use crate::random::{random_field, random_real_field};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const SUITES: [&str; 7] = [
    "field-core",
    "inner-products",
    "currents",
    "localization",
    "gauge",
    "limits",
    "em",
];

/// How a measured value is compared with its tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bound {
    AtMost,
    AtLeast,
    Above,
}

impl Bound {
    pub fn holds(self, value: f64, tolerance: f64) -> bool {
        match self {
            Bound::AtMost => value <= tolerance,
            Bound::AtLeast => value >= tolerance,
            Bound::Above => value > tolerance,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub value: f64,
    pub tolerance: f64,
    pub bound: Bound,
}

impl Measurement {
    pub fn at_most(value: f64, tolerance: f64) -> Self {
        Measurement {
            value,
            tolerance,
            bound: Bound::AtMost,
        }
    }

    pub fn at_least(value: f64, tolerance: f64) -> Self {
        Measurement {
            value,
            tolerance,
            bound: Bound::AtLeast,
        }
    }

    pub fn above(value: f64, tolerance: f64) -> Self {
        Measurement {
            value,
            tolerance,
            bound: Bound::Above,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub suite: String,
    pub check: String,
    pub value: f64,
    pub tolerance: f64,
    pub bound: Bound,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Seed and optional dispersion corruption used as a negative control.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyContext {
    pub seed: u64,
    pub corrupt_omega: Option<f64>,
}

impl Default for VerifyContext {
    fn default() -> Self {
        VerifyContext {
            seed: 20240601,
            corrupt_omega: None,
        }
    }
}

impl VerifyContext {
    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
    }

    fn solution(&self, field: LatticeField) -> LatticeField {
        match self.corrupt_omega {
            Some(f) => field.corrupt_dispersion(f),
            None => field,
        }
    }
}

#[derive(Clone, Copy)]
pub struct Check {
    pub suite: &'static str,
    pub name: &'static str,
    run: fn(&VerifyContext) -> Result<Measurement>,
}

impl Check {
    pub fn run(&self, ctx: &VerifyContext) -> CheckResult {
        let base = |value, tolerance, bound, passed, error| CheckResult {
            suite: self.suite.to_string(),
            check: self.name.to_string(),
            value,
            tolerance,
            bound,
            passed,
            error,
        };
        match (self.run)(ctx) {
            Ok(m) => base(
                m.value,
                m.tolerance,
                m.bound,
                m.bound.holds(m.value, m.tolerance),
                None,
            ),
            Err(e) => base(
                f64::NAN,
                f64::NAN,
                Bound::AtMost,
                false,
                Some(e.to_string()),
            ),
        }
    }
}

macro_rules! checks {
    ($($suite:literal => [$($name:ident),* $(,)?]),* $(,)?) => {
        vec![$($(Check { suite: $suite, name: stringify!($name), run: $name }),*),*]
    };
}

/// Every registered check in suite order.
pub fn registry() -> Vec<Check> {
    checks! {
        "field-core" => [
            c_squared_identity, evolve_commutes_with_c, energy_split_projection, kg_residual, foldy_residual,
            boosted_on_shell, psi_frame_scalar, d_inv_half_psidot_frame_scalar,
        ],
        "inner-products" => [
            positivity, imaginary_part, conservation, sesquilinearity, c_hermiticity, decomposition,
            real_field_a_independence, real_field_imaginary_part, wald_route, conjugation_symmetry,
            amplitude_invariance, amplitude_order_doubling,
        ],
        "currents" => [
            continuity, ja_covariance, calja_noncovariance, two_mode_pointwise, two_mode_div_j,
            two_mode_div_calj, reference_ksq, boosted_ksq_shift, k1k2_invariant, rho_nonnegative,
            probability_resolution, total_probability_constant, density_peak_moves, ja0_agreement,
            re_im_reassembly,
        ],
        "localization" => [
            ua_unitarity, momentum_diagonal, localized_orthonormality, position_eigenvalue, parseval, completeness,
            reference_time_dependence, rho_prime_route,
        ],
        "gauge" => [
            group_law, norm_preservation, commutes_with_evolve, exponential_form, generator_first_order,
            charge_matches_norm, classify_half, classify_irrational,
        ],
        "limits" => [
            ja_density_slope, ja_current_slope, calja_density_slope, calja_current_slope, psi_c_slope,
            psi_tilde_slope, schrodinger_slope, mutual_density_slope, operator_expansion_slope, kappa_enforced,
        ],
        "em" => [
            free_spectrum, constant_shift, reduces_at_zero_coupling, positive_spectrum, gauge_covariant_spectrum,
            square_root_squares, free_evolution_matches, inner_drift, eigenmode_phase, manufactured_uniform,
            manufactured_varying,
        ],
    }
}

/// Runs the checks of one suite, or of every suite when `suite` is `None`.
pub fn run(suite: Option<&str>, ctx: &VerifyContext) -> Result<Vec<CheckResult>> {
    if let Some(s) = suite {
        if !SUITES.contains(&s) {
            return Err(KgError::InvalidParameter(format!(
                "unknown suite {s}; expected one of {}",
                SUITES.join(", ")
            )));
        }
    }
    Ok(registry()
        .iter()
        .filter(|c| suite.is_none_or(|s| s == c.suite))
        .map(|c| c.run(ctx))
        .collect())
}

fn rel(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

fn worst<I: IntoIterator<Item = Result<f64>>>(it: I) -> Result<f64> {
    it.into_iter().try_fold(0.0f64, |m, v| Ok(m.max(v?)))
}

const A_GRID: [f64; 5] = [-0.99, -0.5, 0.0, 0.5, 0.99];
const A_SMALL: [f64; 3] = [-0.9, 0.0, 0.9];

fn lattice_1d() -> MomentumLattice {
    MomentumLattice::new(vec![10.0], vec![64]).expect("valid lattice")
}

fn lattice_2d() -> MomentumLattice {
    MomentumLattice::new(vec![6.0, 5.0], vec![16, 12]).expect("valid lattice")
}

fn params(a: f64) -> ModelParams {
    ModelParams::new(1.1, 0.8, a).expect("valid parameters")
}

fn sample_fields(
    ctx: &VerifyContext,
    salt: u64,
    lat: &MomentumLattice,
    p: &ModelParams,
    count: usize,
) -> Vec<LatticeField> {
    let mut rng = ctx.rng(salt);
    (0..count)
        .map(|j| random_field(lat, p, 0.6, 0.1 * j as f64, &mut rng))
        .collect()
}

fn field_rel_diff(a: &LatticeField, b: &LatticeField) -> f64 {
    rel(a.max_coeff_diff(b), a.max_coeff().max(b.max_coeff()))
}

// field-core

fn c_squared_identity(ctx: &VerifyContext) -> Result<Measurement> {
    let v = sample_fields(ctx, 1, &lattice_2d(), &params(0.3), 5)
        .iter()
        .map(|f| field_rel_diff(&f.apply_c().apply_c(), f))
        .fold(0.0, f64::max);
    Ok(Measurement::at_most(v, 1e-13))
}

fn evolve_commutes_with_c(ctx: &VerifyContext) -> Result<Measurement> {
    let v = worst(
        sample_fields(ctx, 2, &lattice_2d(), &params(0.3), 5)
            .iter()
            .map(|f| {
                Ok(field_rel_diff(
                    &f.evolve(0.7)?.apply_c(),
                    &f.apply_c().evolve(0.7)?,
                ))
            }),
    )?;
    Ok(Measurement::at_most(v, 1e-13))
}

fn energy_split_projection(ctx: &VerifyContext) -> Result<Measurement> {
    let mut v: f64 = 0.0;
    for f in sample_fields(ctx, 3, &lattice_2d(), &params(0.3), 5) {
        let (p, m) = f.energy_split();
        let (pp, pm) = p.energy_split();
        let (mp, mm) = m.energy_split();
        let scale = f.max_coeff();
        v = v.max(rel(pp.max_coeff_diff(&p).max(pm.max_coeff()), scale));
        v = v.max(rel(mm.max_coeff_diff(&m).max(mp.max_coeff()), scale));
        v = v.max(field_rel_diff(&p.add(&m)?, &f));
    }
    Ok(Measurement::at_most(v, 1e-13))
}

fn kg_residual(ctx: &VerifyContext) -> Result<Measurement> {
    let v = sample_fields(ctx, 4, &lattice_2d(), &params(0.3), 5)
        .into_iter()
        .map(|f| ctx.solution(f).kg_residual(1.3))
        .fold(0.0, f64::max);
    Ok(Measurement::at_most(v, 1e-10))
}

fn foldy_residual(ctx: &VerifyContext) -> Result<Measurement> {
    let v = sample_fields(ctx, 5, &lattice_2d(), &params(0.3), 5)
        .into_iter()
        .map(|f| ctx.solution(f).foldy_residual(0.8))
        .fold(0.0, f64::max);
    Ok(Measurement::at_most(v, 1e-12))
}

fn random_plane_waves<R: Rng>(
    rng: &mut R,
    p: ModelParams,
    d: usize,
    count: usize,
    mixed: bool,
) -> Result<PlaneWaveField> {
    let modes = (0..count)
        .map(|_| PlaneMode {
            epsilon: if mixed && rng.random_bool(0.5) {
                Sector::Minus
            } else {
                Sector::Plus
            },
            k: (0..d).map(|_| rng.random_range(-2.0..2.0)).collect(),
            coeff: C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
        })
        .collect();
    PlaneWaveField::new(p, modes)
}

fn random_events<R: Rng>(rng: &mut R, d: usize, count: usize, span: f64) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| (0..=d).map(|_| rng.random_range(-span..span)).collect())
        .collect()
}

fn boosts() -> Vec<Boost> {
    [vec![0.5, 0.3], vec![-0.8, 0.1], vec![0.0, 0.9]]
        .into_iter()
        .map(|b| Boost::exact(b).expect("subluminal"))
        .collect()
}

fn boosted_on_shell(ctx: &VerifyContext) -> Result<Measurement> {
    let mut rng = ctx.rng(6);
    let p = params(0.0);
    let f = random_plane_waves(&mut rng, p, 2, 8, true)?;
    let mut v: f64 = 0.0;
    for b in boosts() {
        let g = f.boost(&b)?;
        for (m, m0) in g.modes().iter().zip(f.modes()) {
            let q = b.apply(&f.four_momentum(m0));
            let w = g.omega(m);
            let m2 = p.m() * p.m();
            v = v
                .max((q[0].abs() - w).abs() / w)
                .max((-minkowski_dot(&q, &q) - m2).abs() / m2);
        }
    }
    Ok(Measurement::at_most(v, 1e-12))
}

fn frame_scalar(
    ctx: &VerifyContext,
    salt: u64,
    value: fn(&PlaneWaveField, &[f64]) -> C64,
) -> Result<f64> {
    let mut rng = ctx.rng(salt);
    let f = random_plane_waves(&mut rng, params(0.0), 2, 6, true)?;
    let events = random_events(&mut rng, 2, 1000, 3.0);
    let mut v: f64 = 0.0;
    for b in boosts() {
        let g = f.boost(&b)?;
        for x in &events {
            v = v.max((value(&f, x) - value(&g, &b.apply(x))).norm());
        }
    }
    Ok(v)
}

fn psi_frame_scalar(ctx: &VerifyContext) -> Result<Measurement> {
    Ok(Measurement::at_most(
        frame_scalar(ctx, 7, |f, x| f.value(x))?,
        1e-12,
    ))
}

fn d_inv_half_psidot_frame_scalar(ctx: &VerifyContext) -> Result<Measurement> {
    Ok(Measurement::at_most(
        frame_scalar(ctx, 8, |f, x| f.d_inv_half_psidot(x))?,
        1e-10,
    ))
}

// inner-products

fn over_a_grid<F: Fn(&LatticeField, f64) -> Result<f64>>(
    ctx: &VerifyContext,
    salt: u64,
    f: F,
) -> Result<f64> {
    let lat = lattice_1d();
    let mut v: f64 = 0.0;
    for (i, a) in A_GRID.iter().enumerate() {
        for field in sample_fields(ctx, salt + i as u64, &lat, &params(*a), 8) {
            v = v.max(f(&field, *a)?);
        }
    }
    Ok(v)
}

fn positivity(ctx: &VerifyContext) -> Result<Measurement> {
    let lat = lattice_1d();
    let mut v = f64::INFINITY;
    for (i, a) in A_GRID.iter().enumerate() {
        for field in sample_fields(ctx, 10 + i as u64, &lat, &params(*a), 8) {
            v = v.min(inner_a(&field, &field, 0.4)?.re);
        }
    }
    Ok(Measurement::above(v, 0.0))
}

fn imaginary_part(ctx: &VerifyContext) -> Result<Measurement> {
    let v = over_a_grid(ctx, 20, |f, _| {
        let n = inner_a(f, f, 0.4)?;
        Ok(rel(n.im.abs(), n.re))
    })?;
    Ok(Measurement::at_most(v, 1e-12))
}

fn conservation(ctx: &VerifyContext) -> Result<Measurement> {
    let v = over_a_grid(ctx, 30, |f, _| {
        let n0 = inner_a(f, f, f.t0())?;
        worst((1..=10).map(|j| {
            Ok(rel(
                (inner_a(f, f, f.t0() + 0.37 * j as f64)? - n0).norm(),
                n0.norm(),
            ))
        }))
    })?;
    Ok(Measurement::at_most(v, 1e-12))
}

fn triples(ctx: &VerifyContext, salt: u64, a: f64) -> Vec<LatticeField> {
    sample_fields(ctx, salt, &lattice_1d(), &params(a), 3)
}

fn sesquilinearity(ctx: &VerifyContext) -> Result<Measurement> {
    let (al, be) = (C64::new(0.3, -1.2), C64::new(-0.7, 0.4));
    let v = worst(A_SMALL.iter().enumerate().map(|(i, &a)| {
        let f = triples(ctx, 40 + i as u64, a);
        let lhs = inner_a(&f[0].scaled(al).add(&f[1].scaled(be))?, &f[2], 0.2)?;
        let rhs = al.conj() * inner_a(&f[0], &f[2], 0.2)? + be.conj() * inner_a(&f[1], &f[2], 0.2)?;
        Ok(rel((lhs - rhs).norm(), rhs.norm()))
    }))?;
    Ok(Measurement::at_most(v, 1e-12))
}

fn c_hermiticity(ctx: &VerifyContext) -> Result<Measurement> {
    let v = worst(A_SMALL.iter().enumerate().map(|(i, &a)| {
        let f = triples(ctx, 50 + i as u64, a);
        let x = inner_a(&f[0], &f[1].apply_c(), 0.2)?;
        let y = inner_a(&f[0].apply_c(), &f[1], 0.2)?;
        Ok(rel((x - y).norm(), x.norm()))
    }))?;
    Ok(Measurement::at_most(v, 1e-12))
}

fn decomposition(ctx: &VerifyContext) -> Result<Measurement> {
    let v = worst(A_GRID.iter().enumerate().map(|(i, &a)| {
        let f = triples(ctx, 60 + i as u64, a);
        let x = inner_a(&f[0], &f[1], 0.5)?;
        let y = inner_a_split(&f[0], &f[1], 0.5)?;
        Ok(rel((x - y).norm(), x.norm()))
    }))?;
    Ok(Measurement::at_most(v, 1e-12))
}

fn real_pair(ctx: &VerifyContext, salt: u64) -> (LatticeField, LatticeField) {
    let mut rng = ctx.rng(salt);
    let p = params(0.0);
    let lat = lattice_1d();
    (
        random_real_field(&lat, &p, 0.6, 0.0, &mut rng),
        random_real_field(&lat, &p, 0.6, 0.0, &mut rng),
    )
}

fn real_field_a_independence(ctx: &VerifyContext) -> Result<Measurement> {
    let (f1, f2) = real_pair(ctx, 70);
    let base = inner_a(&f1, &f2, 0.3)?;
    let v = worst(A_GRID.iter().map(|&a| {
        let p = f1.params().with_a(a)?;
        let x = inner_a(&f1.with_params(p), &f2.with_params(p), 0.3)?;
        Ok(rel((x.re - base.re).abs(), base.norm()))
    }))?;
    Ok(Measurement::at_most(v, 1e-12))
}

fn real_field_imaginary_part(ctx: &VerifyContext) -> Result<Measurement> {
    let (f1, f2) = real_pair(ctx, 71);
    let v = worst(A_GRID.iter().map(|&a| {
        let p = f1.params().with_a(a)?;
        let (g1, g2) = (f1.with_params(p), f2.with_params(p));
        let x = inner_a(&g1, &g2, 0.3)?;
        let kg = kg_inner(&g1, &g2, p.g_default(), 0.3)?;
        Ok(rel((x.im - a * p.kappa() * kg.im).abs(), x.norm()))
    }))?;
    Ok(Measurement::at_most(v, 1e-12))
}

fn wald_route(ctx: &VerifyContext) -> Result<Measurement> {
    let (f1, f2) = real_pair(ctx, 72);
    let std = inner_standard(&f1, &f2, 0.0)?;
    let w = wald_inner(&f1, &f2, 1.0 / f1.params().m(), 0.0)?;
    Ok(Measurement::at_most(
        rel((w - std.re).abs(), std.norm()),
        1e-12,
    ))
}

fn conjugation_symmetry(ctx: &VerifyContext) -> Result<Measurement> {
    let (f1, _) = real_pair(ctx, 73);
    let (fp, fm) = wavefunction_f(&f1);
    let scale = max_abs(&fp);
    let v = fp
        .iter()
        .zip(&fm)
        .map(|(x, y)| (x.conj() - y).norm())
        .fold(0.0, f64::max);
    Ok(Measurement::at_most(rel(v, scale), 1e-12))
}

/// Deviations below this are round-off and do not count against the doubling ratio.
pub const ROUNDOFF_FLOOR: f64 = 1e-12;

/// Relative frame deviation of the reference Gaussian under a boost of 0.5.
pub fn reference_invariance(order: usize) -> Result<f64> {
    let p = ModelParams::new(1.0, 1.0, 0.3)?;
    let g = GaussianAmplitude {
        center: vec![0.5],
        width: 1.0,
        coeff: C64::new(1.0, 0.0),
        poly: vec![],
    };
    let h = GaussianAmplitude {
        center: vec![-0.3],
        width: 0.7,
        coeff: C64::new(0.2, 0.5),
        poly: vec![],
    };
    let f = AmplitudeField::gaussian(
        p,
        Some(g),
        Some(h),
        QuadratureSpec {
            order,
            radius: 10.0,
        },
    )?;
    Ok(invariance_check(&f, &f, &Boost::exact(vec![0.5])?)?.rel_dev)
}

fn amplitude_invariance(_: &VerifyContext) -> Result<Measurement> {
    Ok(Measurement::at_most(reference_invariance(128)?, 1e-8))
}

fn amplitude_order_doubling(_: &VerifyContext) -> Result<Measurement> {
    let coarse = reference_invariance(64)?;
    let fine = reference_invariance(128)?;
    Ok(Measurement::at_least(
        coarse / fine.max(ROUNDOFF_FLOOR),
        100.0,
    ))
}

// currents

fn continuity(ctx: &VerifyContext) -> Result<Measurement> {
    let lat = lattice_2d();
    let mut v: f64 = 0.0;
    for (i, a) in A_SMALL.iter().enumerate() {
        for f in sample_fields(ctx, 80 + i as u64, &lat, &params(*a), 3) {
            v = v.max(continuity_residual(&ctx.solution(f), 0.6, Which::Ja));
        }
    }
    Ok(Measurement::at_most(v, 1e-10))
}

fn reference_oracle() -> TwoModeOracle {
    let p = ModelParams::new(1.0, 1.0, 0.0).expect("valid parameters");
    TwoModeOracle::new(
        vec![0.0],
        vec![3f64.sqrt()],
        C64::new(1.0, 0.0),
        C64::new(0.5, 0.5),
        p,
    )
    .expect("nonzero")
}

fn transformed_mismatch(b: &Boost, before: &[Vec<f64>], after: &[Vec<f64>]) -> f64 {
    before
        .iter()
        .zip(after)
        .map(|(x, y)| {
            b.apply(x)
                .iter()
                .zip(y)
                .map(|(u, v)| (u - v).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

fn ja_covariance(ctx: &VerifyContext) -> Result<Measurement> {
    let mut rng = ctx.rng(90);
    let mut v: f64 = 0.0;
    for a in A_SMALL {
        let f = random_plane_waves(&mut rng, params(a), 2, 5, true)?;
        let events = random_events(&mut rng, 2, 100, 3.0);
        for b in boosts() {
            let g = f.boost(&b)?;
            let (mut re0, mut im0, mut re1, mut im1) = (vec![], vec![], vec![], vec![]);
            let mut scale: f64 = 0.0;
            for x in &events {
                let j0 = current_ja_at(&f, x);
                let j1 = current_ja_at(&g, &b.apply(x));
                scale = j0.iter().fold(scale, |s, z| s.max(z.norm()));
                re0.push(j0.iter().map(|z| z.re).collect());
                im0.push(j0.iter().map(|z| z.im).collect());
                re1.push(j1.iter().map(|z| z.re).collect());
                im1.push(j1.iter().map(|z| z.im).collect());
            }
            v = v.max(rel(
                transformed_mismatch(&b, &re0, &re1).max(transformed_mismatch(&b, &im0, &im1)),
                scale,
            ));
        }
    }
    Ok(Measurement::at_most(v, 1e-10))
}

fn calja_noncovariance(ctx: &VerifyContext) -> Result<Measurement> {
    let mut rng = ctx.rng(91);
    let f = reference_oracle().plane_wave_field(0.0)?;
    let b = Boost::exact(vec![0.5])?;
    let g = f.boost(&b)?;
    let events = random_events(&mut rng, 1, 100, 3.0);
    let before: Vec<Vec<f64>> = events.iter().map(|x| current_calja_at(&f, x)).collect();
    let after: Vec<Vec<f64>> = events
        .iter()
        .map(|x| current_calja_at(&g, &b.apply(x)))
        .collect();
    let scale = before.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs()));
    Ok(Measurement::above(
        rel(transformed_mismatch(&b, &before, &after), scale),
        1e-3,
    ))
}

fn two_mode_pointwise(ctx: &VerifyContext) -> Result<Measurement> {
    let mut rng = ctx.rng(92);
    let mut v: f64 = 0.0;
    for a in A_SMALL {
        let o = {
            let p = ModelParams::new(1.3, 0.9, a)?;
            let k1 = vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            let k2 = vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            TwoModeOracle::new(k1, k2, C64::new(0.8, -0.3), C64::new(0.4, 0.6), p)?
        };
        let f = o.plane_wave_field(a)?;
        for x in random_events(&mut rng, 2, 1000, 3.0) {
            let rec = two_mode_oracle(&o, a, &x)?;
            let j = current_ja_at(&f, &x);
            let cal = current_calja_at(&f, &x);
            let scale = rec
                .cal_j
                .iter()
                .chain(rec.j.iter().map(|z| &z.re))
                .fold(0.0f64, |s, y| s.max(y.abs()));
            for mu in 0..j.len() {
                v = v
                    .max(rel((j[mu] - rec.j[mu]).norm(), scale))
                    .max(rel((cal[mu] - rec.cal_j[mu]).abs(), scale));
            }
        }
    }
    Ok(Measurement::at_most(v, 1e-12))
}

fn two_mode_div_j(ctx: &VerifyContext) -> Result<Measurement> {
    let mut rng = ctx.rng(93);
    let o = reference_oracle();
    let v = worst(
        random_events(&mut rng, 1, 100, 3.0)
            .iter()
            .map(|x| Ok(two_mode_oracle(&o, 0.4, x)?.div_j.abs())),
    )?;
    Ok(Measurement::at_most(v, 0.0))
}

/// Reference oracle on a 1-D lattice whose modes include both wave vectors.
pub fn oracle_lattice(n: usize) -> MomentumLattice {
    MomentumLattice::new(vec![8.0 * std::f64::consts::PI / 3f64.sqrt()], vec![n])
        .expect("valid lattice")
}

fn two_mode_div_calj(_: &VerifyContext) -> Result<Measurement> {
    let o = reference_oracle();
    let lat = oracle_lattice(16);
    let mut v: f64 = 0.0;
    for a in A_SMALL {
        let f = o.lattice_field(&lat, a)?;
        for t in [0.0, 0.7, 1.9] {
            let div = divergence(&f, t, Which::CalJa);
            let scale = current_calja(&f, t).max_abs();
            let fine = lat.padded();
            for (j, d) in div.iter().enumerate() {
                let rec = two_mode_oracle(&o, a, &[t, fine.node_position(j)[0]])?;
                v = v.max(rel((d - rec.div_cal_j).norm(), scale));
            }
        }
    }
    Ok(Measurement::at_most(v, 1e-10))
}

fn reference_ksq(_: &VerifyContext) -> Result<Measurement> {
    Ok(Measurement::at_most(
        (reference_oracle().ksq() + 6.5).abs(),
        1e-12,
    ))
}

fn boosted_ksq_shift(_: &VerifyContext) -> Result<Measurement> {
    Ok(Measurement::above(
        noncovariance_demo(&reference_oracle(), &Boost::exact(vec![0.5])?)?.delta,
        1e-3,
    ))
}

fn k1k2_invariant(_: &VerifyContext) -> Result<Measurement> {
    let r = noncovariance_demo(&reference_oracle(), &Boost::exact(vec![0.5])?)?;
    Ok(Measurement::at_most(
        (r.k1k2_before - r.k1k2_after).abs(),
        1e-12,
    ))
}

fn rho_nonnegative(ctx: &VerifyContext) -> Result<Measurement> {
    let lat = lattice_2d();
    let mut v = f64::INFINITY;
    for (i, a) in A_SMALL.iter().enumerate() {
        for f in sample_fields(ctx, 100 + i as u64, &lat, &params(*a), 3) {
            let rho = rho_a_velocity_form(&f, 0.5);
            let peak = rho.iter().cloned().fold(0.0, f64::max);
            v = v.min(rho.iter().cloned().fold(f64::INFINITY, f64::min) / peak);
        }
    }
    Ok(Measurement::at_least(v, -1e-14))
}

/// Positive-energy packet travelling along the axis of a 1-D box.
pub fn travelling_packet(a: f64) -> Result<LatticeField> {
    let lat = MomentumLattice::new(vec![40.0], vec![128])?;
    gaussian_packet(
        &lat,
        &params(a),
        &[-8.0],
        2.0,
        &[2.0],
        PacketEnergy::Positive,
        0.0,
    )
}

pub const TRAVEL_TIMES: [f64; 6] = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];

fn probability_resolution(_: &VerifyContext) -> Result<Measurement> {
    let v = worst(A_SMALL.iter().map(|&a| {
        let f = travelling_packet(a)?;
        let n = inner_a(&f, &f, 0.0)?.re;
        worst(TRAVEL_TIMES.iter().map(|&t| {
            let p = total_probability(&f, t)?;
            let j = total_ja0(&f, t);
            Ok(rel((p - n).abs().max((j - n).norm()), n))
        }))
    }))?;
    Ok(Measurement::at_most(v, 1e-12))
}

fn total_probability_constant(_: &VerifyContext) -> Result<Measurement> {
    let f = travelling_packet(0.4)?;
    let p0 = total_probability(&f, 0.0)?;
    let v = worst(
        TRAVEL_TIMES
            .iter()
            .map(|&t| Ok(rel((total_probability(&f, t)? - p0).abs(), p0))),
    )?;
    Ok(Measurement::at_most(v, 1e-12))
}

/// Displacement of the density maximum between the first and last sample times, in lattice cells.
pub fn peak_shift_cells(f: &LatticeField) -> Result<f64> {
    let fine = f.lattice().padded();
    let argmax = |t: f64| -> Result<usize> {
        let rho = rho_a(f, t)?;
        Ok((0..rho.len())
            .max_by(|&i, &j| rho[i].total_cmp(&rho[j]))
            .unwrap_or(0))
    };
    let (i0, i1) = (
        argmax(TRAVEL_TIMES[0])?,
        argmax(TRAVEL_TIMES[TRAVEL_TIMES.len() - 1])?,
    );
    let d = periodic_distance(&fine, &fine.node_position(i0), &fine.node_position(i1));
    Ok(d / f.lattice().spacing(0))
}

fn density_peak_moves(_: &VerifyContext) -> Result<Measurement> {
    Ok(Measurement::above(
        peak_shift_cells(&travelling_packet(0.4)?)?,
        10.0,
    ))
}

fn ja0_agreement(ctx: &VerifyContext) -> Result<Measurement> {
    let lat = lattice_2d();
    let mut v: f64 = 0.0;
    for (i, a) in A_SMALL.iter().enumerate() {
        for f in sample_fields(ctx, 110 + i as u64, &lat, &params(*a), 2) {
            let direct = ja0_direct(&f, 0.3);
            let j = current_ja(&f, 0.3);
            let d = j.components[0]
                .iter()
                .zip(&direct)
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max);
            v = v.max(rel(d, max_abs(&direct)));
        }
    }
    Ok(Measurement::at_most(v, 1e-12))
}

fn re_im_reassembly(ctx: &VerifyContext) -> Result<Measurement> {
    let lat = lattice_2d();
    let mut v: f64 = 0.0;
    for (i, a) in A_SMALL.iter().enumerate() {
        for f in sample_fields(ctx, 120 + i as u64, &lat, &params(*a), 2) {
            let j = current_ja(&f, 0.3);
            let (re, im) = split_re_im(&f, 0.3);
            for mu in 0..j.components.len() {
                for k in 0..j.components[mu].len() {
                    let z = C64::new(re.components[mu][k], im.components[mu][k]);
                    v = v.max(rel((z - j.components[mu][k]).norm(), j.max_abs()));
                }
            }
        }
    }
    Ok(Measurement::at_most(v, 1e-12))
}

// localization

fn ua_unitarity(ctx: &VerifyContext) -> Result<Measurement> {
    let lat = lattice_2d();
    let v = worst(A_SMALL.iter().enumerate().map(|(i, &a)| {
        let f = sample_fields(ctx, 130 + i as u64, &lat, &params(a), 4);
        worst(f.chunks(2).map(|pair| {
            let want = inner_a(&pair[0], &pair[1], pair[0].t0())?;
            let got =
                map_ua(&pair[0], a)?.inner(&map_ua(&pair[1].reanchored(pair[0].t0())?, a)?)?;
            Ok(rel((got - want).norm(), want.norm()))
        }))
    }))?;
    Ok(Measurement::at_most(v, 1e-12))
}

fn momentum_diagonal(ctx: &VerifyContext) -> Result<Measurement> {
    let v = worst(
        sample_fields(ctx, 140, &lattice_2d(), &params(0.3), 3)
            .iter()
            .map(|f| {
                let x = momentum_apply(f)?;
                let y = momentum_conjugation(f)?;
                Ok(x.iter()
                    .zip(&y)
                    .map(|(p, q)| field_rel_diff(p, q))
                    .fold(0.0, f64::max))
            }),
    )?;
    Ok(Measurement::at_most(v, 1e-12))
}

fn localization_lattice() -> (MomentumLattice, ModelParams) {
    (
        MomentumLattice::new(vec![6.0, 5.0], vec![8, 6]).expect("valid lattice"),
        params(0.3),
    )
}

fn nodes<R: Rng>(rng: &mut R, n: usize, count: usize) -> Vec<usize> {
    (0..count).map(|_| rng.random_range(0..n)).collect()
}

fn localized_orthonormality(ctx: &VerifyContext) -> Result<Measurement> {
    let (lat, p) = localization_lattice();
    let mut rng = ctx.rng(150);
    let picks = nodes(&mut rng, lat.len(), 6);
    let mut states = Vec::new();
    for &n in &picks {
        for s in [Sector::Plus, Sector::Minus] {
            states.push((s, n, localized_state_at_node(s, n, &lat, p, 0.0)?));
        }
    }
    let mut v: f64 = 0.0;
    for (s1, n1, a) in &states {
        for (s2, n2, b) in &states {
            let want = if s1 == s2 && n1 == n2 { 1.0 } else { 0.0 };
            v = v.max((inner_0(a.field(), b.field(), 0.0)? - want).norm());
        }
    }
    Ok(Measurement::at_most(v, 1e-12))
}

fn position_eigenvalue(ctx: &VerifyContext) -> Result<Measurement> {
    let (lat, p) = localization_lattice();
    let mut rng = ctx.rng(151);
    let mut v: f64 = 0.0;
    for n in nodes(&mut rng, lat.len(), 20) {
        for s in [Sector::Plus, Sector::Minus] {
            let state = localized_state_at_node(s, n, &lat, p, 0.0)?;
            for (axis, x) in position_conjugation(state.field())?.iter().enumerate() {
                let want = state.field().scaled(C64::new(state.y()[axis], 0.0));
                v = v.max(rel(x.max_coeff_diff(&want), state.field().max_coeff()));
            }
        }
    }
    Ok(Measurement::at_most(v, 1e-12))
}

fn parseval(ctx: &VerifyContext) -> Result<Measurement> {
    let v = worst(
        sample_fields(ctx, 152, &lattice_2d(), &params(0.3), 4)
            .iter()
            .map(|f| {
                let (cp, cm) = localized_expansion(f);
                let sum: f64 = cp.iter().chain(&cm).map(|c| c.norm_sqr()).sum();
                let n = inner_0(f, f, f.t0())?.re;
                Ok(rel((sum - n).abs(), n))
            }),
    )?;
    Ok(Measurement::at_most(v, 1e-12))
}

fn completeness(ctx: &VerifyContext) -> Result<Measurement> {
    let (lat, p) = localization_lattice();
    let v = worst(sample_fields(ctx, 153, &lat, &p, 3).iter().map(|f| {
        let (cp, cm) = localized_expansion(f);
        let back = resum_localized(&cp, &cm, &lat, p, f.t0())?;
        Ok(field_rel_diff(&back, f))
    }))?;
    Ok(Measurement::at_most(v, 1e-10))
}

fn reference_time_dependence(_: &VerifyContext) -> Result<Measurement> {
    let f = travelling_packet(0.0)?;
    let (a, _) = wavefunction_f_at(&f, 0.0)?;
    let (b, _) = wavefunction_f_at(&f, 2.0)?;
    let d = a
        .iter()
        .zip(&b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    Ok(Measurement::above(rel(d, max_abs(&a)), 1e-3))
}

fn rho_prime_route(ctx: &VerifyContext) -> Result<Measurement> {
    let lat = lattice_2d();
    let mut v: f64 = 0.0;
    for (i, a) in A_SMALL.iter().enumerate() {
        for f in sample_fields(ctx, 154 + i as u64, &lat, &params(*a), 2) {
            let direct = rho_a(&f, 0.4)?;
            let route = rho_a_prime_route(&f, 0.4);
            let peak = direct.iter().cloned().fold(0.0, f64::max);
            v = v.max(
                direct
                    .iter()
                    .zip(&route)
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max)
                    / peak,
            );
        }
    }
    Ok(Measurement::at_most(v, 1e-12))
}

// gauge

const THETAS: [f64; 4] = [0.3, -1.7, 2.9, 11.0];

fn group_law(ctx: &VerifyContext) -> Result<Measurement> {
    let fields = sample_fields(ctx, 160, &lattice_2d(), &params(0.0), 2);
    let mut v: f64 = 0.0;
    for a in A_SMALL {
        for f in &fields {
            for (t1, t2) in THETAS.iter().zip(THETAS.iter().rev()) {
                let two = gauge_transform(&gauge_transform(f, *t2, a)?, *t1, a)?;
                let one = gauge_transform(f, t1 + t2, a)?;
                let composed = GaugeElement::new(*t1, a)?
                    .compose(&GaugeElement::new(*t2, a)?)?
                    .apply(f);
                v = v
                    .max(field_rel_diff(&two, &one))
                    .max(field_rel_diff(&composed, &one));
            }
        }
    }
    Ok(Measurement::at_most(v, 1e-13))
}

fn norm_preservation(ctx: &VerifyContext) -> Result<Measurement> {
    let mut v: f64 = 0.0;
    for (i, a) in A_SMALL.iter().enumerate() {
        for f in sample_fields(ctx, 161 + i as u64, &lattice_2d(), &params(*a), 2) {
            let n = inner_a(&f, &f, 0.0)?.re;
            for th in THETAS {
                let g = gauge_transform(&f, th, *a)?;
                v = v.max(rel((inner_a(&g, &g, 0.0)?.re - n).abs(), n));
            }
        }
    }
    Ok(Measurement::at_most(v, 1e-12))
}

fn commutes_with_evolve(ctx: &VerifyContext) -> Result<Measurement> {
    let v = worst(
        sample_fields(ctx, 165, &lattice_2d(), &params(0.5), 3)
            .iter()
            .map(|f| {
                let x = gauge_transform(&f.evolve(0.9)?, 1.3, 0.5)?;
                let y = gauge_transform(f, 1.3, 0.5)?.evolve(0.9)?;
                Ok(field_rel_diff(&x, &y))
            }),
    )?;
    Ok(Measurement::at_most(v, 1e-13))
}

fn exponential_form(ctx: &VerifyContext) -> Result<Measurement> {
    let fields = sample_fields(ctx, 166, &lattice_2d(), &params(0.0), 2);
    let mut v: f64 = 0.0;
    for a in A_SMALL {
        for f in &fields {
            for th in THETAS {
                v = v.max(field_rel_diff(
                    &gauge_transform_exponential(f, th, a)?,
                    &gauge_transform(f, th, a)?,
                ));
            }
        }
    }
    Ok(Measurement::at_most(v, 1e-13))
}

fn generator_first_order(ctx: &VerifyContext) -> Result<Measurement> {
    let fields = sample_fields(ctx, 167, &lattice_2d(), &params(0.0), 2);
    let v = worst(fields.iter().flat_map(|f| {
        A_SMALL
            .iter()
            .map(move |&a| Ok(rel(generator_check(f, a, 1e-7)?, f.max_coeff())))
    }))?;
    Ok(Measurement::at_most(v, 1e-6))
}

fn charge_matches_norm(ctx: &VerifyContext) -> Result<Measurement> {
    let v = worst(A_SMALL.iter().enumerate().map(|(i, &a)| {
        let f = &sample_fields(ctx, 168 + i as u64, &lattice_2d(), &params(a), 1)[0];
        let n = inner_a(f, f, 0.9)?.re;
        Ok(rel((charge_phase_space(f, 0.9)? - n).abs(), n))
    }))?;
    Ok(Measurement::at_most(v, 1e-10))
}

fn classify_half(_: &VerifyContext) -> Result<Measurement> {
    let c = group_classify(&GroupParameter::Rational { num: 1, den: 2 })?;
    let v = match (c.kind, c.period) {
        (GroupKind::U1, Some(p)) => (p - 4.0 * std::f64::consts::PI).abs(),
        _ => f64::INFINITY,
    };
    Ok(Measurement::at_most(v, 1e-12))
}

fn classify_irrational(_: &VerifyContext) -> Result<Measurement> {
    let c = group_classify(&GroupParameter::Irrational {
        value: 1.0 / 2f64.sqrt(),
        label: "1/sqrt(2)".into(),
    })?;
    let v = if c.kind == GroupKind::Rplus && c.period.is_none() {
        c.witness.min_return_deviation
    } else {
        0.0
    };
    Ok(Measurement::above(v, 0.0))
}

// limits

/// One-dimensional ladder used by the quick checks.
pub fn quick_sweep(energy: PacketEnergy) -> LimitSweep {
    let lat = MomentumLattice::new(vec![24.0], vec![64]).expect("valid lattice");
    LimitSweep::doubling(lat, 1.5, vec![1.0], 0.3, 0.02, 6, energy)
}

fn slope_gap(slope: f64, centre: f64) -> Measurement {
    Measurement::at_most((slope - centre).abs(), 0.4)
}

fn ja_density_slope(_: &VerifyContext) -> Result<Measurement> {
    Ok(slope_gap(
        limit_deviation(&quick_sweep(PacketEnergy::Positive), Which::Ja)?.slope_rho,
        -2.0,
    ))
}

fn ja_current_slope(_: &VerifyContext) -> Result<Measurement> {
    Ok(slope_gap(
        limit_deviation(&quick_sweep(PacketEnergy::Nonrelativistic), Which::Ja)?.slope_j,
        -2.0,
    ))
}

fn calja_density_slope(_: &VerifyContext) -> Result<Measurement> {
    Ok(slope_gap(
        limit_deviation(&quick_sweep(PacketEnergy::Positive), Which::CalJa)?.slope_rho,
        -2.0,
    ))
}

fn calja_current_slope(_: &VerifyContext) -> Result<Measurement> {
    Ok(slope_gap(
        limit_deviation(&quick_sweep(PacketEnergy::Nonrelativistic), Which::CalJa)?.slope_j,
        -2.0,
    ))
}

fn psi_c_slope(_: &VerifyContext) -> Result<Measurement> {
    Ok(slope_gap(
        psi_c_ladder(&quick_sweep(PacketEnergy::Nonrelativistic))?.slope,
        -2.0,
    ))
}

fn psi_tilde_slope(_: &VerifyContext) -> Result<Measurement> {
    Ok(slope_gap(
        psi_tilde_ladder(&quick_sweep(PacketEnergy::Nonrelativistic))?.slope,
        -2.0,
    ))
}

fn schrodinger_slope(_: &VerifyContext) -> Result<Measurement> {
    Ok(slope_gap(
        schrodinger_residual_ladder(&quick_sweep(PacketEnergy::Positive))?.slope,
        -2.0,
    ))
}

fn mutual_density_slope(_: &VerifyContext) -> Result<Measurement> {
    Ok(slope_gap(
        mutual_density_ladder(&quick_sweep(PacketEnergy::Positive))?.slope,
        -4.0,
    ))
}

fn operator_expansion_slope(_: &VerifyContext) -> Result<Measurement> {
    let s = quick_sweep(PacketEnergy::Positive);
    let phi = gaussian_samples(&s.lattice, &s.center, s.sigma, &s.carrier)?;
    Ok(slope_gap(
        operator_expansion_ladder(&s.lattice, &phi, &s.masses)?.slope,
        -5.0,
    ))
}

fn kappa_enforced(_: &VerifyContext) -> Result<Measurement> {
    let mut s = quick_sweep(PacketEnergy::Nonrelativistic);
    s.kappa = Some(1.0);
    let rejected = matches!(psi_c_ladder(&s), Err(KgError::Precondition(_)));
    s.kappa = Some(1.0 / (1.0 + s.a));
    let accepted = psi_c_ladder(&s).is_ok();
    Ok(Measurement::at_least(
        if rejected && accepted { 1.0 } else { 0.0 },
        1.0,
    ))
}

// em

/// Square 2-D lattice for dense operators.
pub fn em_lattice(n: usize) -> MomentumLattice {
    MomentumLattice::new(vec![6.0, 6.0], vec![n, n]).expect("valid lattice")
}

fn em_params() -> ModelParams {
    ModelParams::new(0.9, 1.0, 0.4).expect("valid parameters")
}

fn sorted_lattice_spectrum<F: Fn(&[f64; 3]) -> f64>(lat: &MomentumLattice, f: F) -> Vec<f64> {
    let mut v: Vec<f64> = (0..lat.len()).map(|j| f(&lat.wavevector(j))).collect();
    v.sort_by(f64::total_cmp);
    v
}

fn spectrum_gap(got: &[f64], want: &[f64]) -> f64 {
    got.iter()
        .zip(want)
        .map(|(a, b)| (a - b).abs() / b.abs())
        .fold(0.0, f64::max)
}

/// Free-spectrum deviation of `D_q` with `A = 0` on an `n x n` lattice.
pub fn em_free_spectrum_gap(n: usize) -> Result<f64> {
    let lat = em_lattice(n);
    let p = em_params();
    let op = build_dq(&EMBackground::free(lat.clone(), 0.7)?, &p)?;
    let m2 = p.m() * p.m();
    Ok(spectrum_gap(
        op.eigenvalues(),
        &sorted_lattice_spectrum(&lat, |k| k[0] * k[0] + k[1] * k[1] + m2),
    ))
}

/// Deviation of the constant-potential spectrum from the shifted lattice values.
pub fn em_constant_shift_gap(n: usize) -> Result<f64> {
    let lat = em_lattice(n);
    let p = em_params();
    let (q, a0) = (0.7, [0.4, -0.25]);
    let op = build_dq(&EMBackground::constant(lat.clone(), q, a0)?, &p)?;
    let m2 = p.m() * p.m();
    let want = sorted_lattice_spectrum(&lat, |k| {
        (k[0] - q * a0[0]).powi(2) + (k[1] - q * a0[1]).powi(2) + m2
    });
    Ok(spectrum_gap(op.eigenvalues(), &want))
}

/// Smooth periodic vector potential used as a generic magnetic background.
pub fn wave_background(lat: &MomentumLattice, q: f64) -> Result<EMBackground> {
    let (lx, ly) = (lat.lengths()[0], lat.lengths()[1]);
    let tau = 2.0 * std::f64::consts::PI;
    EMBackground::from_fn(lat.clone(), q, |x| {
        [
            0.3 * (tau * x[1] / ly).sin(),
            0.2 * (tau * x[0] / lx).cos() + 0.1,
        ]
    })
}

fn free_spectrum(_: &VerifyContext) -> Result<Measurement> {
    Ok(Measurement::at_most(em_free_spectrum_gap(8)?, 1e-12))
}

fn constant_shift(_: &VerifyContext) -> Result<Measurement> {
    Ok(Measurement::at_most(em_constant_shift_gap(8)?, 1e-10))
}

fn reduces_at_zero_coupling(_: &VerifyContext) -> Result<Measurement> {
    let lat = em_lattice(8);
    let p = em_params();
    let m2 = p.m() * p.m();
    let op = build_dq(&wave_background(&lat, 0.0)?, &p)?;
    Ok(Measurement::at_most(
        spectrum_gap(
            op.eigenvalues(),
            &sorted_lattice_spectrum(&lat, |k| k[0] * k[0] + k[1] * k[1] + m2),
        ),
        1e-12,
    ))
}

fn positive_spectrum(_: &VerifyContext) -> Result<Measurement> {
    let p = em_params();
    let op = build_dq(&wave_background(&em_lattice(8), 1.5)?, &p)?;
    Ok(Measurement::at_least(
        op.eigenvalues()[0] / (p.m() * p.m()),
        1.0 - 1e-9,
    ))
}

/// Lowest eigenvalues compared after `A -> A + grad(lambda)` for a smooth periodic `lambda`.
pub const GAUGE_SPECTRUM_COUNT: usize = 16;

pub fn em_gauge_covariance_gap(n: usize) -> Result<f64> {
    let lat = em_lattice(n);
    let p = em_params();
    let bg = wave_background(&lat, 0.8)?;
    let (lx, ly) = (lat.lengths()[0], lat.lengths()[1]);
    let tau = 2.0 * std::f64::consts::PI;
    let mut grad = vec![Vec::with_capacity(lat.len()), Vec::with_capacity(lat.len())];
    for j in 0..lat.len() {
        let x = lat.node_position(j);
        let (u, v) = (tau * x[0] / lx, tau * x[1] / ly);
        grad[0].push(0.05 * tau / lx * u.cos() * v.cos());
        grad[1].push(-0.05 * tau / ly * u.sin() * v.sin());
    }
    let a = build_dq(&bg, &p)?;
    let b = build_dq(&bg.gauge_shifted(&grad)?, &p)?;
    let k = GAUGE_SPECTRUM_COUNT.min(lat.len());
    Ok(spectrum_gap(&b.eigenvalues()[..k], &a.eigenvalues()[..k]))
}

fn gauge_covariant_spectrum(_: &VerifyContext) -> Result<Measurement> {
    Ok(Measurement::at_most(em_gauge_covariance_gap(16)?, 1e-10))
}

fn square_root_squares(_: &VerifyContext) -> Result<Measurement> {
    let op = build_dq(&wave_background(&em_lattice(8), 1.0)?, &em_params())?;
    let h = op.power_matrix(0.5);
    let diff = &h * &h - op.matrix();
    let norm = |m: &nalgebra::DMatrix<C64>| m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    Ok(Measurement::at_most(norm(&diff) / norm(op.matrix()), 1e-11))
}

fn random_samples<R: Rng>(rng: &mut R, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

/// Largest relative drift of the `a`-inner product over ten evolution times for random data.
pub fn em_inner_drift(n: usize, seed: u64) -> Result<f64> {
    let lat = em_lattice(n);
    let p = em_params();
    let op = build_dq(&wave_background(&lat, 1.0)?, &p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let psi = random_samples(&mut rng, lat.len());
    let dot = random_samples(&mut rng, lat.len());
    let n0 = em_inner_and_evolve(&psi, &dot, &op, &p, 0.0)?.inner;
    worst((1..=10).map(|j| {
        Ok(rel(
            (em_inner_and_evolve(&psi, &dot, &op, &p, 0.45 * j as f64)?.inner - n0).norm(),
            n0.norm(),
        ))
    }))
}

fn free_evolution_matches(ctx: &VerifyContext) -> Result<Measurement> {
    let lat = em_lattice(8);
    let p = em_params();
    let op = build_dq(&EMBackground::free(lat.clone(), 0.5)?, &p)?;
    let f = &sample_fields(ctx, 170, &lat, &p, 1)[0];
    let (psi0, dot0) = f.evaluate(f.t0())?;
    let mut v: f64 = 0.0;
    for t in [0.5, 1.7, 3.2] {
        let e = em_inner_and_evolve(&psi0, &dot0, &op, &p, t)?;
        let (psi, dot) = f.evaluate(f.t0() + t)?;
        let scale = max_abs(&psi).max(max_abs(&dot));
        let d = psi
            .iter()
            .zip(&e.psi)
            .chain(dot.iter().zip(&e.psidot))
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        let n = inner_a(f, f, f.t0() + t)?;
        v = v
            .max(rel(d, scale))
            .max(rel((e.inner - n).norm(), n.norm()));
    }
    Ok(Measurement::at_most(v, 1e-10))
}

fn inner_drift(ctx: &VerifyContext) -> Result<Measurement> {
    Ok(Measurement::at_most(
        em_inner_drift(8, ctx.seed ^ 171)?,
        1e-10,
    ))
}

fn eigenmode_phase(_: &VerifyContext) -> Result<Measurement> {
    let p = em_params();
    let op = build_dq(&wave_background(&em_lattice(8), 1.0)?, &p)?;
    let k = 5;
    let w = op.eigenvalues()[k].sqrt();
    let psi: Vec<C64> = op.eigenvectors().column(k).iter().copied().collect();
    let dot: Vec<C64> = psi.iter().map(|z| z * C64::new(0.0, -w)).collect();
    let n0 = em_inner_and_evolve(&psi, &dot, &op, &p, 0.0)?.inner;
    let mut v: f64 = 0.0;
    for t in [0.3, 1.1, 4.0] {
        let e = em_inner_and_evolve(&psi, &dot, &op, &p, t)?;
        let ph = C64::from_polar(1.0, -w * t);
        let d = e
            .psi
            .iter()
            .zip(&psi)
            .map(|(x, y)| (x - ph * y).norm())
            .fold(0.0, f64::max);
        v = v
            .max(rel(d, max_abs(&psi)))
            .max(rel((e.inner - n0).norm(), n0.norm()));
    }
    Ok(Measurement::at_most(v, 1e-12))
}

fn manufactured_uniform(ctx: &VerifyContext) -> Result<Measurement> {
    let mut rng = ctx.rng(172);
    let phi = WavePotential::uniform(0.3, 2);
    let a = WaveVectorPotential {
        alpha: vec![0.0, 0.0],
        k: vec![0.0, 0.0],
    };
    let psi = ManufacturedPacket {
        omega: 1.7,
        p: vec![0.4, -0.2],
        s: None,
    };
    let events = random_events(&mut rng, 2, 100, 3.0);
    Ok(Measurement::at_most(
        em_gauge_residual(&phi, &a, &psi, 0.8, 1.1, 0.0, &events)?,
        1e-10,
    ))
}

/// Gauge residual for a spatially varying, oscillating scalar potential at `count` random events.
pub fn em_manufactured_residual(seed: u64, count: usize) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi = WavePotential {
        phi0: 0.2,
        amp: 0.5,
        nu: 1.3,
        k: vec![0.7, -0.4],
    };
    let a = WaveVectorPotential {
        alpha: vec![0.3, 0.1],
        k: vec![0.2, 0.9],
    };
    let psi = ManufacturedPacket {
        omega: 1.4,
        p: vec![0.6, 0.3],
        s: Some(1.5),
    };
    let events = random_events(&mut rng, 2, count, 2.5);
    em_gauge_residual(&phi, &a, &psi, 0.9, 1.1, -0.5, &events)
}

fn manufactured_varying(ctx: &VerifyContext) -> Result<Measurement> {
    Ok(Measurement::at_most(
        em_manufactured_residual(ctx.seed ^ 173, 100)?,
        1e-8,
    ))
}
