//! Minimal coupling to a stationary magnetic background through dense operator functions,
//! and the algebraic check that the scalar-potential phase removes `phi` from the field equation.

use crate::error::{KgError, Result};
use crate::lattice::{MomentumLattice, C64};
use crate::params::ModelParams;
use nalgebra::{DMatrix, DVector, SymmetricEigen};

pub const MAX_AXIS: usize = 32;

/// Stationary magnetic background on a 2-D lattice: `phi = 0`, static vector potential.
#[derive(Debug, Clone, PartialEq)]
pub struct EMBackground {
    lattice: MomentumLattice,
    avec: Vec<Vec<f64>>,
    phi: Vec<f64>,
    q: f64,
}

impl EMBackground {
    pub fn new(
        lattice: MomentumLattice,
        avec: Vec<Vec<f64>>,
        phi: Vec<f64>,
        q: f64,
    ) -> Result<Self> {
        if lattice.dim() != 2 {
            return Err(KgError::UnsupportedDimension(lattice.dim()));
        }
        if lattice.counts().iter().any(|&n| n > MAX_AXIS) {
            return Err(KgError::InvalidParameter(format!(
                "dense operators allow at most {MAX_AXIS} nodes per axis"
            )));
        }
        if avec.len() != 2 {
            return Err(KgError::ShapeMismatch {
                expected: 2,
                got: avec.len(),
            });
        }
        for c in &avec {
            lattice.check_len(c.len())?;
        }
        lattice.check_len(phi.len())?;
        if !q.is_finite() || avec.iter().flatten().chain(&phi).any(|v| !v.is_finite()) {
            return Err(KgError::NonFinite("background".into()));
        }
        Ok(EMBackground {
            lattice,
            avec,
            phi,
            q,
        })
    }

    /// Background with `A(x) = f(x)` sampled at the nodes and `phi = 0`.
    pub fn from_fn<F: Fn(&[f64]) -> [f64; 2]>(
        lattice: MomentumLattice,
        q: f64,
        f: F,
    ) -> Result<Self> {
        let mut avec = vec![
            Vec::with_capacity(lattice.len()),
            Vec::with_capacity(lattice.len()),
        ];
        for j in 0..lattice.len() {
            let a = f(&lattice.node_position(j)[..2]);
            avec[0].push(a[0]);
            avec[1].push(a[1]);
        }
        let phi = vec![0.0; lattice.len()];
        EMBackground::new(lattice, avec, phi, q)
    }

    pub fn free(lattice: MomentumLattice, q: f64) -> Result<Self> {
        EMBackground::from_fn(lattice, q, |_| [0.0, 0.0])
    }

    pub fn constant(lattice: MomentumLattice, q: f64, a: [f64; 2]) -> Result<Self> {
        EMBackground::from_fn(lattice, q, |_| a)
    }

    pub fn lattice(&self) -> &MomentumLattice {
        &self.lattice
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn avec(&self) -> &[Vec<f64>] {
        &self.avec
    }

    pub fn is_stationary_magnetic(&self) -> bool {
        self.phi.iter().all(|v| *v == 0.0)
    }

    /// `A -> A + grad(lambda)` with the gradient supplied at the nodes.
    pub fn gauge_shifted(&self, grad_lambda: &[Vec<f64>]) -> Result<EMBackground> {
        if grad_lambda.len() != 2 {
            return Err(KgError::ShapeMismatch {
                expected: 2,
                got: grad_lambda.len(),
            });
        }
        let avec = self
            .avec
            .iter()
            .zip(grad_lambda)
            .map(|(a, g)| a.iter().zip(g).map(|(x, y)| x + y).collect())
            .collect();
        EMBackground::new(self.lattice.clone(), avec, self.phi.clone(), self.q)
    }
}

/// Hermitian matrix with its eigendecomposition.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    lattice: MomentumLattice,
    matrix: DMatrix<C64>,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<C64>,
    symmetrization_residual: f64,
}

impl DenseOperator {
    /// Symmetrizes `matrix`, rejecting a Hermiticity defect above `1e-10` relative, and eigendecomposes.
    pub fn from_matrix(lattice: MomentumLattice, matrix: DMatrix<C64>) -> Result<Self> {
        let n = lattice.len();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(KgError::ShapeMismatch {
                expected: n,
                got: matrix.nrows(),
            });
        }
        let adj = matrix.adjoint();
        let scale = matrix
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let residual = (&matrix - &adj)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
            / scale;
        if residual > 1e-10 {
            return Err(KgError::OperatorCheck(format!(
                "Hermiticity residual {residual:e}"
            )));
        }
        let sym = (&matrix + &adj) * C64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(sym.clone());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let eigenvectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        Ok(DenseOperator {
            lattice,
            matrix: sym,
            eigenvalues,
            eigenvectors,
            symmetrization_residual: residual,
        })
    }

    pub fn lattice(&self) -> &MomentumLattice {
        &self.lattice
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<C64> {
        &self.eigenvectors
    }

    pub fn symmetrization_residual(&self) -> f64 {
        self.symmetrization_residual
    }

    /// Coefficients of grid samples in the eigenbasis.
    pub fn to_eigenbasis(&self, v: &[C64]) -> DVector<C64> {
        self.eigenvectors.adjoint() * DVector::from_column_slice(v)
    }

    pub fn from_eigenbasis(&self, c: &DVector<C64>) -> Vec<C64> {
        (&self.eigenvectors * c).as_slice().to_vec()
    }

    /// `O^alpha v` through the eigendecomposition.
    pub fn apply_power(&self, v: &[C64], alpha: f64) -> Result<Vec<C64>> {
        self.lattice.check_len(v.len())?;
        let mut c = self.to_eigenbasis(v);
        for (ci, l) in c.iter_mut().zip(&self.eigenvalues) {
            *ci *= l.powf(alpha);
        }
        Ok(self.from_eigenbasis(&c))
    }

    pub fn power_matrix(&self, alpha: f64) -> DMatrix<C64> {
        let n = self.eigenvalues.len();
        let scaled = DMatrix::from_fn(n, n, |r, c| {
            self.eigenvectors[(r, c)] * self.eigenvalues[c].powf(alpha)
        });
        scaled * self.eigenvectors.adjoint()
    }
}

/// Samples of `(d_axis - i q A_axis) v`.
fn covariant_derivative(bg: &EMBackground, v: &[C64], axis: usize) -> Vec<C64> {
    let lat = &bg.lattice;
    let d = lat.apply_multiplier(v, |f| C64::new(0.0, lat.wavevector(f)[axis]));
    d.iter()
        .zip(v)
        .zip(&bg.avec[axis])
        .map(|((dv, x), a)| dv - C64::new(0.0, bg.q * a) * x)
        .collect()
}

/// `D_q = -(grad - i q A)^2 + M^2`, assembled column by column.
pub fn build_dq(bg: &EMBackground, params: &ModelParams) -> Result<DenseOperator> {
    if !bg.is_stationary_magnetic() {
        return Err(KgError::Precondition("dense operators need phi = 0".into()));
    }
    let n = bg.lattice.len();
    let m2 = params.m().powi(2);
    let mut mat = DMatrix::<C64>::zeros(n, n);
    let mut e = vec![C64::new(0.0, 0.0); n];
    for j in 0..n {
        e[j] = C64::new(1.0, 0.0);
        let mut col: Vec<C64> = e.iter().map(|v| v * m2).collect();
        for axis in 0..2 {
            let once = covariant_derivative(bg, &e, axis);
            let twice = covariant_derivative(bg, &once, axis);
            for (c, t) in col.iter_mut().zip(twice) {
                *c -= t;
            }
        }
        for (r, v) in col.into_iter().enumerate() {
            mat[(r, j)] = v;
        }
        e[j] = C64::new(0.0, 0.0);
    }
    let op = DenseOperator::from_matrix(bg.lattice.clone(), mat)?;
    let lowest = op.eigenvalues[0];
    if lowest < 0.0 {
        return Err(KgError::OperatorCheck(format!(
            "negative eigenvalue {lowest:e}"
        )));
    }
    if lowest < m2 * (1.0 - 1e-9) {
        return Err(KgError::OperatorCheck(format!(
            "eigenvalue {lowest} below M^2 = {m2}"
        )));
    }
    Ok(op)
}

/// Field state evolved under `D_q` with its `a`-inner product.
#[derive(Debug, Clone, PartialEq)]
pub struct EmEvolution {
    pub psi: Vec<C64>,
    pub psidot: Vec<C64>,
    pub inner: C64,
}

/// `(psi1, psi2)_a` with `D -> D_q`, given samples and time derivatives at a common time.
pub fn em_inner_a(
    op: &DenseOperator,
    params: &ModelParams,
    (psi1, dot1): (&[C64], &[C64]),
    (psi2, dot2): (&[C64], &[C64]),
) -> Result<C64> {
    let cell = op.lattice.cell_volume();
    let dot = |x: &[C64], y: &[C64]| -> C64 {
        x.iter().zip(y).map(|(a, b)| a.conj() * b).sum::<C64>() * cell
    };
    let h = op.apply_power(psi2, 0.5)?;
    let mh = op.apply_power(dot2, -0.5)?;
    let sym = dot(psi1, &h) + dot(dot1, &mh);
    let anti = dot(psi1, dot2) - dot(dot1, psi2);
    Ok(params.kappa() / (2.0 * params.m()) * (sym + C64::new(0.0, params.a()) * anti))
}

/// Evolves `(psi0, psidot0)` by `t` with `cos(t sqrt(lambda))`, `sin(t sqrt(lambda)) / sqrt(lambda)` in the eigenbasis.
pub fn em_inner_and_evolve(
    psi0: &[C64],
    psidot0: &[C64],
    op: &DenseOperator,
    params: &ModelParams,
    t: f64,
) -> Result<EmEvolution> {
    op.lattice.check_len(psi0.len())?;
    op.lattice.check_len(psidot0.len())?;
    if !t.is_finite() {
        return Err(KgError::NonFinite("t".into()));
    }
    let c = op.to_eigenbasis(psi0);
    let cd = op.to_eigenbasis(psidot0);
    let mut p = c.clone();
    let mut pd = cd.clone();
    for (i, l) in op.eigenvalues.iter().enumerate() {
        let w = l.sqrt();
        let (s, co) = (w * t).sin_cos();
        p[i] = c[i] * co + cd[i] * (s / w);
        pd[i] = -c[i] * (w * s) + cd[i] * co;
    }
    let psi = op.from_eigenbasis(&p);
    let psidot = op.from_eigenbasis(&pd);
    let inner = em_inner_a(op, params, (&psi, &psidot), (&psi, &psidot))?;
    Ok(EmEvolution { psi, psidot, inner })
}

/// Scalar potential with its time integral `Phi(t, x) = int_{t0}^t phi(tau, x) d tau` in closed form.
pub trait ScalarPotential {
    fn phi(&self, t: f64, x: &[f64]) -> f64;
    fn phi_dot(&self, t: f64, x: &[f64]) -> f64;
    fn integral(&self, t0: f64, t: f64, x: &[f64]) -> f64;
    fn grad_integral(&self, t0: f64, t: f64, x: &[f64]) -> Vec<f64>;
    fn lap_integral(&self, t0: f64, t: f64, x: &[f64]) -> f64;
}

/// Vector potential with its divergence in closed form.
pub trait VectorPotential {
    fn a(&self, t: f64, x: &[f64]) -> Vec<f64>;
    fn div(&self, t: f64, x: &[f64]) -> f64;
}

/// Closed-form test function with its first two time derivatives, gradient and Laplacian.
pub trait Manufactured {
    fn value(&self, t: f64, x: &[f64]) -> C64;
    fn dt(&self, t: f64, x: &[f64]) -> C64;
    fn dtt(&self, t: f64, x: &[f64]) -> C64;
    fn grad(&self, t: f64, x: &[f64]) -> Vec<C64>;
    fn lap(&self, t: f64, x: &[f64]) -> C64;
}

/// `phi(t, x) = phi0 + amp cos(nu t) sin(k x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WavePotential {
    pub phi0: f64,
    pub amp: f64,
    pub nu: f64,
    pub k: Vec<f64>,
}

impl WavePotential {
    pub fn uniform(phi0: f64, dim: usize) -> Self {
        WavePotential {
            phi0,
            amp: 0.0,
            nu: 0.0,
            k: vec![0.0; dim],
        }
    }

    fn kx(&self, x: &[f64]) -> f64 {
        self.k.iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// `int_{t0}^t cos(nu tau) d tau`.
    fn time_factor(&self, t0: f64, t: f64) -> f64 {
        if self.nu == 0.0 {
            t - t0
        } else {
            ((self.nu * t).sin() - (self.nu * t0).sin()) / self.nu
        }
    }
}

impl ScalarPotential for WavePotential {
    fn phi(&self, t: f64, x: &[f64]) -> f64 {
        self.phi0 + self.amp * (self.nu * t).cos() * self.kx(x).sin()
    }

    fn phi_dot(&self, t: f64, x: &[f64]) -> f64 {
        -self.amp * self.nu * (self.nu * t).sin() * self.kx(x).sin()
    }

    fn integral(&self, t0: f64, t: f64, x: &[f64]) -> f64 {
        self.phi0 * (t - t0) + self.amp * self.time_factor(t0, t) * self.kx(x).sin()
    }

    fn grad_integral(&self, t0: f64, t: f64, x: &[f64]) -> Vec<f64> {
        let c = self.amp * self.time_factor(t0, t) * self.kx(x).cos();
        self.k.iter().map(|k| c * k).collect()
    }

    fn lap_integral(&self, t0: f64, t: f64, x: &[f64]) -> f64 {
        let k2: f64 = self.k.iter().map(|k| k * k).sum();
        -k2 * self.amp * self.time_factor(t0, t) * self.kx(x).sin()
    }
}

/// `A(x) = alpha sin(k x)`, static.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveVectorPotential {
    pub alpha: Vec<f64>,
    pub k: Vec<f64>,
}

impl VectorPotential for WaveVectorPotential {
    fn a(&self, _t: f64, x: &[f64]) -> Vec<f64> {
        let s = self.k.iter().zip(x).map(|(a, b)| a * b).sum::<f64>().sin();
        self.alpha.iter().map(|a| a * s).collect()
    }

    fn div(&self, _t: f64, x: &[f64]) -> f64 {
        let c = self.k.iter().zip(x).map(|(a, b)| a * b).sum::<f64>().cos();
        c * self
            .alpha
            .iter()
            .zip(&self.k)
            .map(|(a, k)| a * k)
            .sum::<f64>()
    }
}

/// `psi = e^{-i Omega t} e^{i p x} exp(-|x|^2 / 2 s^2)`; `s = None` drops the envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct ManufacturedPacket {
    pub omega: f64,
    pub p: Vec<f64>,
    pub s: Option<f64>,
}

impl ManufacturedPacket {
    /// `grad psi / psi = i p - x / s^2`.
    fn log_grad(&self, x: &[f64]) -> Vec<C64> {
        let inv = self.s.map_or(0.0, |s| 1.0 / (s * s));
        self.p
            .iter()
            .zip(x)
            .map(|(p, x)| C64::new(-x * inv, *p))
            .collect()
    }
}

impl Manufactured for ManufacturedPacket {
    fn value(&self, t: f64, x: &[f64]) -> C64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let env = self.s.map_or(1.0, |s| (-0.5 * r2 / (s * s)).exp());
        let phase = self.p.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() - self.omega * t;
        C64::from_polar(env, phase)
    }

    fn dt(&self, t: f64, x: &[f64]) -> C64 {
        C64::new(0.0, -self.omega) * self.value(t, x)
    }

    fn dtt(&self, t: f64, x: &[f64]) -> C64 {
        -self.omega * self.omega * self.value(t, x)
    }

    fn grad(&self, t: f64, x: &[f64]) -> Vec<C64> {
        let v = self.value(t, x);
        self.log_grad(x).into_iter().map(|g| g * v).collect()
    }

    fn lap(&self, t: f64, x: &[f64]) -> C64 {
        let inv = self.s.map_or(0.0, |s| 1.0 / (s * s));
        let g = self.log_grad(x);
        let sq: C64 = g.iter().map(|z| z * z).sum();
        (sq - inv * x.len() as f64) * self.value(t, x)
    }
}

/// Largest relative residual of `chi_tt + D_q chi = u [psi_tt + 2 i q phi psi_t + calD psi]`
/// over the events, with `chi = u psi`, `u = exp(i q Phi)`, `calD = -(grad - i q A)^2 + i q phi_t - q^2 phi^2 + M^2`
/// and `D_q = -(grad - i q (A + grad Phi))^2 + M^2`.
#[allow(clippy::too_many_arguments)]
pub fn em_gauge_residual(
    phi: &dyn ScalarPotential,
    avec: &dyn VectorPotential,
    psi: &dyn Manufactured,
    q: f64,
    m: f64,
    t0: f64,
    events: &[Vec<f64>],
) -> Result<f64> {
    let i = C64::new(0.0, 1.0);
    let mut worst: f64 = 0.0;
    for ev in events {
        let (t, x) = (ev[0], &ev[1..]);
        let (p, pd, pdd, pg, pl) = (
            psi.value(t, x),
            psi.dt(t, x),
            psi.dtt(t, x),
            psi.grad(t, x),
            psi.lap(t, x),
        );
        let ph = phi.phi(t, x);
        let phd = phi.phi_dot(t, x);
        let big = phi.integral(t0, t, x);
        let bg = phi.grad_integral(t0, t, x);
        let bl = phi.lap_integral(t0, t, x);
        let a = avec.a(t, x);
        let da = avec.div(t, x);
        let u = C64::from_polar(1.0, q * big);
        let ud = i * q * ph * u;
        let udd = (i * q * phd - q * q * ph * ph) * u;
        let ug: Vec<C64> = bg.iter().map(|g| i * q * g * u).collect();
        let bg2: f64 = bg.iter().map(|g| g * g).sum();
        let ul = (i * q * bl - q * q * bg2) * u;
        let chi = u * p;
        let chi_dd = udd * p + 2.0 * ud * pd + u * pdd;
        let chi_g: Vec<C64> = ug.iter().zip(&pg).map(|(g, h)| g * p + u * h).collect();
        let chi_l = ul * p + 2.0 * ug.iter().zip(&pg).map(|(g, h)| g * h).sum::<C64>() + u * pl;
        // (grad - i q B)^2 f = lap f - i q (div B) f - 2 i q B.grad f - q^2 B^2 f
        let cov_sq = |f: C64, g: &[C64], l: C64, b: &[f64], divb: f64| -> C64 {
            let b2: f64 = b.iter().map(|v| v * v).sum();
            let bdot: C64 = b.iter().zip(g).map(|(bi, gi)| bi * gi).sum();
            l - i * q * divb * f - 2.0 * i * q * bdot - q * q * b2 * f
        };
        let b: Vec<f64> = a.iter().zip(&bg).map(|(x, y)| x + y).collect();
        let lhs = chi_dd - cov_sq(chi, &chi_g, chi_l, &b, da + bl) + m * m * chi;
        let cal_d = -cov_sq(p, &pg, pl, &a, da) + (i * q * phd - q * q * ph * ph + m * m) * p;
        let rhs = u * (pdd + 2.0 * i * q * ph * pd + cal_d);
        let vals = [lhs, rhs, chi_dd, chi_l, m * m * chi];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(KgError::NonFinite("manufactured values".into()));
        }
        let scale = chi_dd.norm() + chi_l.norm() + (m * m * chi).norm();
        if scale > 0.0 {
            worst = worst.max((lhs - rhs).norm() / scale);
        }
    }
    Ok(worst)
}
