//! One-parameter sweeps evaluated cell by cell on a worker pool.

use crate::config::{self, Axis, Observable, SweepConfig};
use crate::error::{config as cfg, ConfigError};
use crate::fields::{self, Source};
use crate::report::{num, output_dir, Provenance, Table};
use crate::RunOptions;
use anyhow::Result;
use kgfield::amplitude::invariance_check;
use kgfield::currents::total_probability;
use kgfield::gauge::gauge_transform;
use kgfield::inner::{inner_0, inner_a};
use kgfield::limits::{
    limit_row, loglog_slope, mutual_density_deviation, operator_expansion_ladder, psi_c_deviation,
    psi_tilde_deviation, schrodinger_residual, LimitSweep,
};
use kgfield::packets::gaussian_samples;
use kgfield::{Boost, LatticeField};
use rayon::prelude::*;
use std::path::Path;

fn lattice_field(src: &Source) -> Result<&LatticeField> {
    src.lattice.as_ref().ok_or_else(|| {
        ConfigError::new("this sweep needs a field with a lattice realization").into()
    })
}

fn masses(c: &SweepConfig) -> Result<Vec<f64>> {
    match &c.sweep.ladder {
        Some(l) => Ok(ladder_sweep(c, l.ratio, l.steps)?.masses),
        None => Ok(c.sweep.values.clone()),
    }
}

fn ladder_sweep(c: &SweepConfig, ratio: f64, steps: usize) -> Result<LimitSweep> {
    let config::FieldSpec::GaussianPacket {
        center,
        width,
        carrier,
        energy,
    } = &c.field
    else {
        return Err(ConfigError::new("M sweeps need a gaussian-packet field").into());
    };
    if !(ratio > 0.0 && ratio.is_finite()) {
        return Err(ConfigError::new("ladder ratio must be positive").into());
    }
    let mut s = LimitSweep::doubling(
        c.model.lattice()?,
        *width,
        carrier.clone(),
        c.model.a,
        ratio,
        steps,
        *energy,
    );
    s.center = center.clone();
    s.kappa = Some(c.model.kappa);
    s.t = c.sweep.t;
    Ok(s)
}

fn slope_footer(t: &mut Table, key: &str, ms: &[f64], ys: &[f64]) {
    let v = loglog_slope(ms, ys)
        .map(num)
        .unwrap_or(serde_json::Value::Null);
    t.footer(key, v);
}

fn sweep_a(c: &SweepConfig, src: &Source) -> Result<Table> {
    let f = lattice_field(src)?;
    let t = c.sweep.t;
    let (plus, minus) = f.energy_split();
    let q_plus = inner_0(&plus, &plus, t)?.re;
    let q_minus = inner_0(&minus, &minus, t)?.re;
    let cells: Vec<(f64, f64)> = c
        .sweep
        .values
        .par_iter()
        .map(|&a| {
            let g = f.with_params(f.params().with_a(a)?);
            let v = match c.sweep.observable {
                Observable::InnerProduct => inner_a(&g, &g, t)?.re,
                _ => total_probability(&g, t)?,
            };
            Ok((a, v))
        })
        .collect::<Result<_>>()?;
    let mut table = Table::new(&["a", "value", "expected", "rel_dev"])
        .meta("Q_plus", q_plus)
        .meta("Q_minus", q_minus);
    let mut worst: f64 = 0.0;
    for (a, v) in cells {
        let e = (1.0 + a) * q_plus + (1.0 - a) * q_minus;
        let r = (v - e).abs() / e.abs();
        worst = worst.max(r);
        table.push_nums([a, v, e, r]);
    }
    table.footer("max_rel_dev", num(worst));
    Ok(table)
}

fn sweep_m(c: &SweepConfig) -> Result<Table> {
    let ms = masses(c)?;
    let base = ladder_sweep(c, 1.0, 0)?;
    cfg(base.check_kappa(), "sweep")?;
    let sweep = LimitSweep {
        masses: ms.clone(),
        ..base
    };
    let t = c.sweep.t;
    if c.sweep.observable == Observable::OperatorExpansion {
        let lat = &sweep.lattice;
        let phi = gaussian_samples(lat, &sweep.center, sweep.sigma, &sweep.carrier)?;
        let l = operator_expansion_ladder(lat, &phi, &ms)?;
        let mut table = Table::new(&["M", "value"]).meta("observable", "operator_expansion");
        for (m, v) in &l.points {
            table.push_nums([*m, *v]);
        }
        table.footer("slope", num(l.slope));
        return Ok(table);
    }
    if c.sweep.observable == Observable::LimitDeviation {
        let which = c.sweep.which.expect("validated");
        let rows = ms
            .par_iter()
            .map(|&m| Ok(limit_row(&sweep, which, m)?))
            .collect::<Result<Vec<_>>>()?;
        let mut table = Table::new(&["M", "rel_dev_rho", "rel_dev_j"])
            .meta("which", format!("{which:?}"))
            .meta("kappa_rule", "1/(1+a)");
        for r in &rows {
            table.push_nums([r.m, r.rel_dev_rho, r.rel_dev_j]);
        }
        slope_footer(
            &mut table,
            "slope_rho",
            &ms,
            &rows.iter().map(|r| r.rel_dev_rho).collect::<Vec<_>>(),
        );
        slope_footer(
            &mut table,
            "slope_j",
            &ms,
            &rows.iter().map(|r| r.rel_dev_j).collect::<Vec<_>>(),
        );
        return Ok(table);
    }
    let observable = c.sweep.observable;
    let ys = ms
        .par_iter()
        .map(|&m| {
            let f = sweep.packet(m)?;
            Ok(match observable {
                Observable::PsiC => psi_c_deviation(&f, t),
                Observable::PsiTilde => psi_tilde_deviation(&f, t),
                Observable::MutualDensity => mutual_density_deviation(&f, t),
                _ => schrodinger_residual(&f, t),
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    let name = serde_json::to_value(observable)?;
    let mut table = Table::new(&["M", "value"])
        .meta("observable", name.as_str().unwrap_or_default())
        .meta("kappa_rule", "1/(1+a)");
    for (m, y) in ms.iter().zip(&ys) {
        table.push_nums([*m, *y]);
    }
    slope_footer(&mut table, "slope", &ms, &ys);
    Ok(table)
}

fn sweep_theta(c: &SweepConfig, src: &Source) -> Result<Table> {
    let f = lattice_field(src)?;
    let (a, t) = (f.params().a(), c.sweep.t);
    let n0 = inner_a(f, f, t)?.re;
    let scale = f.max_coeff();
    let cells = c
        .sweep
        .values
        .par_iter()
        .map(|&th| {
            let g = gauge_transform(f, th, a)?;
            let n = inner_a(&g, &g, t)?.re;
            Ok([th, n, (n - n0).abs() / n0, g.max_coeff_diff(f) / scale])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(&["theta", "norm", "norm_rel_dev", "identity_distance"])
        .meta("norm_at_zero", n0);
    let mut worst: f64 = 0.0;
    for row in cells {
        worst = worst.max(row[2]);
        table.push_nums(row);
    }
    table.footer("max_norm_rel_dev", num(worst));
    Ok(table)
}

fn sweep_quadrature(c: &SweepConfig, src: &Source) -> Result<Table> {
    let f = src
        .amplitude
        .as_ref()
        .ok_or_else(|| ConfigError::new("quadrature-order sweeps need an amplitude field"))?;
    let beta = c.sweep.beta.clone().expect("validated");
    let boost = cfg(Boost::exact(beta), "sweep beta")?;
    let specs = c
        .sweep
        .values
        .iter()
        .map(|&o| c.quadrature(o as usize))
        .collect::<Result<Vec<_>>>()?;
    let cells = specs
        .par_iter()
        .map(|q| {
            let g = f.with_quadrature(*q)?;
            let r = invariance_check(&g, &g, &boost)?;
            Ok((q.order, [r.before.re, r.after.re, r.rel_dev]))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(&["order", "before", "after", "rel_dev"]);
    let mut monotone = true;
    for (k, (order, row)) in cells.iter().enumerate() {
        if k > 0 && row[2] > cells[k - 1].1[2] {
            monotone = false;
        }
        table.push(
            std::iter::once(serde_json::json!(order))
                .chain(row.iter().map(|v| num(*v)))
                .collect(),
        );
    }
    table.footer("monotone_decrease", serde_json::Value::Bool(monotone));
    Ok(table)
}

pub fn run(path: &Path, opts: &RunOptions) -> Result<()> {
    let loaded = config::load::<SweepConfig>(path)?;
    let c = &loaded.config;
    c.validate()?;
    let seed = opts.seed.unwrap_or(c.seed);
    let src = fields::build(&c.field, &c.model, seed, &loaded.source)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers.unwrap_or(0))
        .build()?;
    let table = pool.install(|| match c.sweep.axis {
        Axis::A => sweep_a(c, &src),
        Axis::M => sweep_m(c),
        Axis::Theta => sweep_theta(c, &src),
        Axis::QuadratureOrder => sweep_quadrature(c, &src),
    })?;
    let formats = opts
        .format
        .map(|f| vec![f])
        .unwrap_or_else(|| c.output.formats.clone());
    let dir = output_dir(opts.out.as_deref(), c.output.directory.as_deref())?;
    let prov = Provenance {
        config_hash: Some(loaded.hash.clone()),
        seed,
        params: config::header_params(c)?,
    };
    let axis = serde_json::to_value(c.sweep.axis)?;
    let obs = serde_json::to_value(c.sweep.observable)?;
    let stem = format!(
        "sweep-{}-{}",
        axis.as_str().unwrap_or("axis"),
        obs.as_str().unwrap_or("observable")
    );
    let files = table.write(&dir, &stem, &formats, &prov)?;
    for (k, v) in &table.footer {
        println!("{k} = {v}");
    }
    println!(
        "wrote {}",
        files
            .iter()
            .map(|f| dir.join(f).display().to_string())
            .collect::<Vec<_>>()
            .join(", ")
    );
    Ok(())
}
