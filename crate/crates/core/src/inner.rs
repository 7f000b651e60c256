use crate::error::{ensure_finite, KgError, Result};
use crate::field::LatticeField;
use crate::lattice::C64;

/// Inner-product value together with the parameters used to compute it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerProductValue {
    pub value: C64,
    pub a: f64,
    pub kappa: f64,
    pub g: f64,
}

fn check_lattice(f1: &LatticeField, f2: &LatticeField) -> Result<()> {
    if f1.lattice() != f2.lattice() {
        return Err(KgError::LatticeMismatch);
    }
    Ok(())
}

/// `ig [<psi1|psi2_dot> - <psi1_dot|psi2>]` by grid quadrature at time `t`.
pub fn kg_inner(f1: &LatticeField, f2: &LatticeField, g: f64, t: f64) -> Result<C64> {
    check_lattice(f1, f2)?;
    if f1.params().m() != f2.params().m() {
        return Err(KgError::ParamsMismatch);
    }
    if !(g.is_finite() && g > 0.0) {
        return Err(KgError::InvalidParameter(format!(
            "g must be positive, got {g}"
        )));
    }
    let (p1, d1) = f1.evaluate(t)?;
    let (p2, d2) = f2.evaluate(t)?;
    let sum: C64 = (0..p1.len())
        .map(|j| p1[j].conj() * d2[j] - d1[j].conj() * p2[j])
        .sum();
    Ok(C64::new(0.0, g) * sum * f1.lattice().cell_volume())
}

/// Terms `(<psi1|D^1/2 psi2> + <psi1_dot|D^-1/2 psi2_dot>, <psi1|psi2_dot> - <psi1_dot|psi2>)` by mode sums.
fn mode_terms(f1: &LatticeField, f2: &LatticeField, t: f64) -> Result<(C64, C64)> {
    ensure_finite("t", t)?;
    let lat = f1.lattice();
    let (c1, cd1) = (f1.psi_modes(t), f1.psidot_modes(t));
    let (c2, cd2) = (f2.psi_modes(t), f2.psidot_modes(t));
    let mut sym = C64::new(0.0, 0.0);
    let mut anti = C64::new(0.0, 0.0);
    for f in 0..lat.len() {
        let w = f1.params().omega(lat.ksq(f));
        sym += w * c1[f].conj() * c2[f] + cd1[f].conj() * cd2[f] / w;
        anti += c1[f].conj() * cd2[f] - cd1[f].conj() * c2[f];
    }
    let v = lat.volume();
    Ok((sym * v, anti * v))
}

/// `(psi1, psi2)_0`, the member of the family with `a = 0`.
pub fn inner_0(f1: &LatticeField, f2: &LatticeField, t: f64) -> Result<C64> {
    f1.check_compatible(f2)?;
    let p = f1.params();
    let (sym, _) = mode_terms(f1, f2, t)?;
    Ok(p.kappa() / (2.0 * p.m()) * sym)
}

/// `(psi1, psi2)_a = kappa/(2M) {<psi1|D^1/2 psi2> + <psi1_dot|D^-1/2 psi2_dot> + ia[<psi1|psi2_dot> - <psi1_dot|psi2>]}`.
pub fn inner_a(f1: &LatticeField, f2: &LatticeField, t: f64) -> Result<C64> {
    f1.check_compatible(f2)?;
    let p = f1.params();
    let (sym, anti) = mode_terms(f1, f2, t)?;
    Ok(p.kappa() / (2.0 * p.m()) * (sym + C64::new(0.0, p.a()) * anti))
}

pub fn inner_a_record(f1: &LatticeField, f2: &LatticeField, t: f64) -> Result<InnerProductValue> {
    let p = f1.params();
    Ok(InnerProductValue {
        value: inner_a(f1, f2, t)?,
        a: p.a(),
        kappa: p.kappa(),
        g: p.g_default(),
    })
}

/// The `a = 0`, `kappa = 1` member: `1/(2M) [<psi1|D^1/2 psi2> + <psi1_dot|D^-1/2 psi2_dot>]`.
pub fn inner_standard(f1: &LatticeField, f2: &LatticeField, t: f64) -> Result<C64> {
    check_lattice(f1, f2)?;
    if f1.params().m() != f2.params().m() {
        return Err(KgError::ParamsMismatch);
    }
    let (sym, _) = mode_terms(f1, f2, t)?;
    Ok(sym / (2.0 * f1.params().m()))
}

/// `kappa [(1+a) (psi1+, psi2+)_KG - (1-a) (psi1-, psi2-)_KG]` with `g = 1/(2M)`.
pub fn inner_a_split(f1: &LatticeField, f2: &LatticeField, t: f64) -> Result<C64> {
    f1.check_compatible(f2)?;
    let p = f1.params();
    let g = p.g_default();
    let (a1p, a1m) = f1.energy_split();
    let (a2p, a2m) = f2.energy_split();
    let plus = kg_inner(&a1p, &a2p, g, t)?;
    let minus = kg_inner(&a1m, &a2m, g, t)?;
    Ok(p.kappa() * ((1.0 + p.a()) * plus - (1.0 - p.a()) * minus))
}

/// Real inner product `Re (K psi1, K psi2)_KG` with `K psi = psi_+`, for fields with real data.
pub fn wald_inner(f1: &LatticeField, f2: &LatticeField, g: f64, t: f64) -> Result<f64> {
    for f in [f1, f2] {
        let defect = f.reality_defect();
        if defect > 1e-10 {
            return Err(KgError::NotRealField(defect));
        }
    }
    let (k1, _) = f1.energy_split();
    let (k2, _) = f2.energy_split();
    Ok(kg_inner(&k1, &k2, g, t)?.re)
}

/// Inner product rebuilt from four norms (antilinear in the first slot).
pub fn polarization_inner_a(f1: &LatticeField, f2: &LatticeField, t: f64) -> Result<C64> {
    let norm = |f: &LatticeField| inner_a(f, f, t).map(|v| v.re);
    let i = C64::new(0.0, 1.0);
    let sum = f1.add(f2)?;
    let diff = f1.sub(f2)?;
    let plus_i = f1.add(&f2.scaled(i))?;
    let minus_i = f1.sub(&f2.scaled(i))?;
    Ok(0.25 * (C64::new(norm(&sum)? - norm(&diff)?, 0.0) - i * (norm(&plus_i)? - norm(&minus_i)?)))
}

/// Rescales the field to unit `(psi, psi)_a`.
pub fn normalize_a(field: &LatticeField) -> Result<LatticeField> {
    let n = inner_a(field, field, field.t0())?.re;
    if !(n > 0.0) {
        return Err(KgError::Precondition(
            "cannot normalize a zero field".into(),
        ));
    }
    Ok(field.scaled(C64::new(1.0 / n.sqrt(), 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::MomentumLattice;
    use crate::params::ModelParams;
    use crate::random::{random_field, random_real_field};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single(
        lat: &MomentumLattice,
        p: ModelParams,
        s: &[i64],
        c: C64,
        plus: bool,
    ) -> LatticeField {
        let mut a = vec![C64::new(0.0, 0.0); lat.len()];
        a[lat.flat_from_signed(s).unwrap()] = c;
        let z = vec![C64::new(0.0, 0.0); lat.len()];
        if plus {
            LatticeField::new(lat.clone(), p, a, z, 0.0).unwrap()
        } else {
            LatticeField::new(lat.clone(), p, z, a, 0.0).unwrap()
        }
    }

    #[test]
    fn plane_wave_values() {
        let lat = MomentumLattice::new(vec![3.0, 4.0], vec![8, 8]).unwrap();
        let p = ModelParams::new(1.5, 0.8, 0.3).unwrap();
        let c = C64::new(0.6, -0.2);
        let pos = single(&lat, p, &[1, -2], c, true);
        let neg = single(&lat, p, &[1, -2], c, false);
        let w = p.omega(lat.ksq(lat.flat_from_signed(&[1, -2]).unwrap()));
        let v = lat.volume();
        let g = 0.37;
        let kg = kg_inner(&pos, &pos, g, 0.4).unwrap();
        assert!((kg - 2.0 * g * w * v * c.norm_sqr()).norm() < 1e-12);
        assert!(kg_inner(&pos, &neg, g, 0.4).unwrap().norm() < 1e-12);
        let ia = inner_a(&pos, &pos, 1.1).unwrap();
        assert!((ia.re - p.kappa() * (1.0 + p.a()) * w / p.m() * c.norm_sqr() * v).abs() < 1e-12);
        let ib = inner_a(&neg, &neg, 1.1).unwrap();
        assert!((ib.re - p.kappa() * (1.0 - p.a()) * w / p.m() * c.norm_sqr() * v).abs() < 1e-12);
    }

    #[test]
    fn kg_indefinite_for_mixed() {
        let lat = MomentumLattice::new(vec![5.0], vec![16]).unwrap();
        let p = ModelParams::new(1.0, 1.0, 0.0).unwrap();
        let f = single(&lat, p, &[1], C64::new(0.3, 0.0), true)
            .add(&single(&lat, p, &[2], C64::new(1.0, 0.0), false))
            .unwrap();
        let q = kg_inner(&f, &f, 0.5, 0.0).unwrap();
        assert!(q.im.abs() < 1e-12 && q.re < 0.0);
    }

    #[test]
    fn identities_on_random_fields() {
        let lat = MomentumLattice::new(vec![6.0, 4.0], vec![12, 8]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for a in [-0.9, 0.0, 0.9] {
            let p = ModelParams::new(1.2, 0.7, a).unwrap();
            let f1 = random_field(&lat, &p, 0.6, 0.0, &mut rng);
            let f2 = random_field(&lat, &p, 0.6, 0.5, &mut rng);
            let v = inner_a(&f1, &f2, 0.3).unwrap();
            let split = inner_a_split(&f1, &f2, 0.3).unwrap();
            assert!((v - split).norm() <= 1e-12 * v.norm());
            let kg = kg_inner(&f1, &f2, p.g_default(), 0.3).unwrap();
            let std = inner_standard(&f1, &f2, 0.3).unwrap();
            assert!((v - p.kappa() * (std + a * kg)).norm() <= 1e-12 * v.norm());
            let c1 = inner_a(&f1, &f2.apply_c(), 0.3).unwrap();
            let c2 = inner_a(&f1.apply_c(), &f2, 0.3).unwrap();
            assert!((c1 - c2).norm() <= 1e-12 * c1.norm());
            let pol = polarization_inner_a(&f1, &f2, 0.3).unwrap();
            assert!((pol - v).norm() <= 1e-10 * v.norm());
        }
    }

    #[test]
    fn wald_matches_standard() {
        let lat = MomentumLattice::new(vec![6.0], vec![32]).unwrap();
        let p = ModelParams::new(0.8, 1.0, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f1 = random_real_field(&lat, &p, 0.5, 0.0, &mut rng);
        let f2 = random_real_field(&lat, &p, 0.5, 0.0, &mut rng);
        let std = inner_standard(&f1, &f2, 0.0).unwrap();
        let g = 1.0 / p.m();
        let w = wald_inner(&f1, &f2, g, 0.0).unwrap();
        assert!((w - std.re).abs() <= 1e-12 * std.norm());
        assert!(wald_inner(&f1, &f1, g, 0.0).unwrap() > 0.0);
        let complex = random_field(&lat, &p, 0.5, 0.0, &mut rng);
        assert!(wald_inner(&complex, &f1, g, 0.0).is_err());
    }
}
