//! Modified Bessel function `K_nu` and the 3-D localized-state profile.

use crate::error::{KgError, Result};
use crate::params::ModelParams;
use crate::quadrature::gauss_legendre;
use std::f64::consts::PI;

/// `Gamma(1/4)` to 20 significant digits.
pub const GAMMA_QUARTER: f64 = 3.625_609_908_221_908_311_9;

const NODES: usize = 32;
const AGREEMENT: f64 = 1e-13;

/// Composite Gauss-Legendre over `[lo, hi]` with `panels` equal panels.
fn composite<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, panels: usize) -> f64 {
    let (x, w) = gauss_legendre(NODES);
    let h = (hi - lo) / panels as f64;
    (0..panels)
        .map(|p| {
            let a = lo + p as f64 * h;
            x.iter()
                .zip(&w)
                .map(|(xi, wi)| wi * f(a + 0.5 * h * (xi + 1.0)))
                .sum::<f64>()
                * 0.5
                * h
        })
        .sum()
}

/// Integrates with `panels` and `2 panels`, rejecting disagreement beyond `1e-13` relative.
fn validated<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, panels: usize) -> Result<f64> {
    let coarse = composite(&f, lo, hi, panels);
    let fine = composite(&f, lo, hi, 2 * panels);
    let rel = (fine - coarse).abs() / fine.abs().max(f64::MIN_POSITIVE);
    if rel > AGREEMENT {
        return Err(KgError::QuadratureTruncation(rel));
    }
    Ok(fine)
}

/// `K_nu(z) = int_0^inf e^{-z cosh t} cosh(nu t) dt`.
pub fn bessel_k(nu: f64, z: f64) -> Result<f64> {
    if !(z > 0.0 && z.is_finite() && nu.is_finite()) {
        return Err(KgError::InvalidParameter(format!(
            "K_nu needs finite z > 0, got {z}"
        )));
    }
    let nu = nu.abs();
    // integrand relative to its value at t = 0 is below e^-80 past `hi`
    let mut hi: f64 = 1.0;
    while z * (hi.cosh() - 1.0) - nu * hi < 80.0 {
        hi *= 1.25;
    }
    let scaled = validated(
        |t| (-z * (t.cosh() - 1.0)).exp() * (nu * t).cosh(),
        0.0,
        hi,
        16,
    )?;
    Ok(scaled * (-z).exp())
}

fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(KgError::InvalidParameter(format!(
            "radius must be positive, got {r}"
        )));
    }
    Ok(())
}

/// Equal-time profile of the 3-D localized state at distance `r`:
/// `sqrt(M/kappa) [2^{3/4} pi^{3/2} Gamma(1/4)]^-1 (M/r)^{5/4} K_{5/4}(M r)`.
pub fn besselk_profile(r: f64, params: &ModelParams, dim: usize) -> Result<f64> {
    if dim != 3 {
        return Err(KgError::UnsupportedDimension(dim));
    }
    check_radius(r)?;
    let m = params.m();
    let pref = (m / params.kappa()).sqrt() / (2f64.powf(0.75) * PI.powf(1.5) * GAMMA_QUARTER);
    Ok(pref * (m / r).powf(1.25) * bessel_k(1.25, m * r)?)
}

/// The same profile from the momentum integral `(2 pi)^-3 int d^3k (k^2 + M^2)^{-1/4} e^{i k r}`,
/// reduced through `w^{-1/2} = Gamma(1/4)^-1 int_0^inf s^{-3/4} e^{-s w^2} ds` to
/// `sqrt(M/kappa) sqrt(pi) / (8 pi^2 Gamma(1/4)) int_0^inf s^{-9/4} e^{-r^2/4s - M^2 s} ds`.
pub fn momentum_integral_profile(r: f64, params: &ModelParams) -> Result<f64> {
    check_radius(r)?;
    let m2 = params.m().powi(2);
    // substitute s = e^u; log-integrand peaks where the exponent balances
    let log_f = |u: f64| -1.25 * u - r * r / (4.0 * u.exp()) - m2 * u.exp();
    let grid: Vec<f64> = (0..=2400).map(|i| -60.0 + 0.05 * i as f64).collect();
    let peak = grid
        .iter()
        .map(|&u| log_f(u))
        .fold(f64::NEG_INFINITY, f64::max);
    let inside: Vec<f64> = grid
        .iter()
        .copied()
        .filter(|&u| log_f(u) > peak - 80.0)
        .collect();
    let (lo, hi) = (inside[0] - 0.05, inside[inside.len() - 1] + 0.05);
    let integral = validated(|u| (log_f(u) - peak).exp(), lo, hi, 16)? * peak.exp();
    let pref = (params.m() / params.kappa()).sqrt() * PI.sqrt() / (8.0 * PI * PI * GAMMA_QUARTER);
    Ok(pref * integral)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_order_closed_form() {
        for z in [0.1, 1.0, 3.7, 20.0] {
            let want = (PI / (2.0 * z)).sqrt() * (-z as f64).exp();
            let got = bessel_k(0.5, z).unwrap();
            assert!((got - want).abs() <= 1e-13 * want, "{z}: {got} vs {want}");
        }
    }

    #[test]
    fn gamma_quarter_reflection() {
        // Gamma(1/4) Gamma(3/4) = pi sqrt 2
        let g34 = PI * 2f64.sqrt() / GAMMA_QUARTER;
        assert!((g34 - 1.225_416_702_465_177_6).abs() < 1e-15);
    }

    #[test]
    fn routes_agree() {
        let p = ModelParams::new(1.3, 0.8, 0.0).unwrap();
        for mr in [0.5, 1.0, 2.0, 3.0] {
            let r = mr / p.m();
            let a = besselk_profile(r, &p, 3).unwrap();
            let b = momentum_integral_profile(r, &p).unwrap();
            assert!((a - b).abs() <= 1e-8 * a.abs());
        }
        assert!(besselk_profile(1.0, &p, 2).is_err());
        assert!(besselk_profile(0.0, &p, 3).is_err());
    }
}
