//! Config-driven scenarios: build one field, run its tasks in order, write artifacts.

use crate::config::{self, Background, FieldSpec, Format, Model, ScenarioConfig, Task};
use crate::error::{config as cfg, ConfigError};
use crate::fields::{self, Source};
use crate::report::{num, write_json, Provenance, Table};
use crate::RunOptions;
use anyhow::{anyhow, Result};
use kgfield::boost::minkowski_dot;
use kgfield::currents::{
    continuity_residual, current_calja, current_ja, noncovariance_demo, rho_a, total_ja0,
    total_probability, two_mode_oracle, TwoModeOracle, Which,
};
use kgfield::em::{build_dq, em_inner_and_evolve, DenseOperator, EMBackground};
use kgfield::gauge::{charge_phase_space, gauge_transform, generator_check, group_classify};
use kgfield::inner::{inner_0, inner_a, inner_a_split};
use kgfield::limits::{limit_deviation, LimitSweep, MIN_LADDER};
use kgfield::localization::{position_apply, probability_region, radial_profile, Region};
use kgfield::{amplitude, verify, Boost, LatticeField, ModelParams, MomentumLattice, Sector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

struct Ctx<'a> {
    dir: PathBuf,
    formats: Vec<Format>,
    prov: Provenance,
    seed: u64,
    model: &'a Model,
    spec: &'a FieldSpec,
}

impl Ctx<'_> {
    fn write(&self, table: &Table, stem: &str) -> Result<Vec<String>> {
        table.write(&self.dir, stem, &self.formats, &self.prov)
    }
}

fn bad(i: usize, task: &Task, msg: &str) -> anyhow::Error {
    ConfigError::new(format!("tasks[{i}] ({}): {msg}", task.name())).into()
}

fn check_times(i: usize, task: &Task, times: &[f64]) -> Result<()> {
    if times.is_empty() || times.iter().any(|t| !t.is_finite()) {
        return Err(bad(
            i,
            task,
            "times must be a non-empty list of finite values",
        ));
    }
    Ok(())
}

fn em_background(
    lat: &MomentumLattice,
    q: f64,
    bg: &Background,
    potential: Option<[f64; 2]>,
) -> Result<EMBackground> {
    let r = match bg {
        Background::Free => EMBackground::free(lat.clone(), q),
        Background::Constant => {
            let a0 = potential
                .ok_or_else(|| ConfigError::new("constant backgrounds need `potential`"))?;
            EMBackground::constant(lat.clone(), q, a0)
        }
        Background::Wave => verify::wave_background(lat, q),
    };
    cfg(r, "em background")
}

fn limit_sweep(model: &Model, spec: &FieldSpec, ratio: f64, steps: usize) -> Result<LimitSweep> {
    let FieldSpec::GaussianPacket {
        center,
        width,
        carrier,
        energy,
    } = spec
    else {
        return Err(ConfigError::new("mass ladders need a gaussian-packet field").into());
    };
    if !(ratio > 0.0 && ratio.is_finite()) {
        return Err(ConfigError::new("ladder ratio must be positive").into());
    }
    let mut sweep = LimitSweep::doubling(
        model.lattice()?,
        *width,
        carrier.clone(),
        model.a,
        ratio,
        steps,
        *energy,
    );
    sweep.center = center.clone();
    sweep.kappa = Some(model.kappa);
    cfg(sweep.check_kappa(), "limits")?;
    Ok(sweep)
}

/// Rejects task/field combinations before any task runs.
fn validate(c: &ScenarioConfig, src: &Source) -> Result<()> {
    let d = c.model.d;
    for (i, task) in c.tasks.iter().enumerate() {
        let needs_lattice = matches!(
            task,
            Task::InnerProduct { .. }
                | Task::TotalProbability { .. }
                | Task::RhoA { .. }
                | Task::Current { .. }
                | Task::ProbabilityRegion { .. }
                | Task::PositionExpectation
                | Task::Gauge { .. }
                | Task::EmEvolve { .. }
        );
        if needs_lattice && src.lattice.is_none() {
            return Err(bad(i, task, "needs a field with a lattice realization"));
        }
        match task {
            Task::InnerProduct { times }
            | Task::TotalProbability { times }
            | Task::RhoA { times }
            | Task::Current { times, .. } => check_times(i, task, times)?,
            Task::ProbabilityRegion { lo, hi, .. } => {
                cfg(
                    Region::new(&c.model.lattice()?, lo.clone(), hi.clone()),
                    "probability_region",
                )?;
            }
            Task::RadialProfile { mr_range } => {
                if src.localized.is_none() || d != 3 {
                    return Err(bad(i, task, "needs a 3-D localized-state field"));
                }
                if !(mr_range.0 > 0.0 && mr_range.0 < mr_range.1) {
                    return Err(bad(i, task, "mr_range must satisfy 0 < min < max"));
                }
            }
            Task::TwoMode {
                beta,
                events,
                extent,
            } => {
                let ok = src.modes.as_ref().is_some_and(|pw| {
                    pw.modes().len() == 2 && pw.modes().iter().all(|m| m.epsilon == Sector::Plus)
                });
                if !ok {
                    return Err(bad(
                        i,
                        task,
                        "needs a plane-waves field with exactly two positive-energy modes",
                    ));
                }
                if beta.len() != d || *events == 0 || !(*extent > 0.0) {
                    return Err(bad(
                        i,
                        task,
                        "beta needs d entries; events and extent must be positive",
                    ));
                }
            }
            Task::Gauge { theta, dtheta } => {
                if !theta.is_finite() || !(*dtheta > 0.0 && *dtheta <= 1e-4) {
                    return Err(bad(i, task, "theta must be finite and 0 < dtheta <= 1e-4"));
                }
            }
            Task::Limits { ratio, steps, .. } => {
                if *steps < MIN_LADDER {
                    return Err(bad(
                        i,
                        task,
                        &format!("steps must be at least {MIN_LADDER}"),
                    ));
                }
                limit_sweep(&c.model, &c.field, *ratio, *steps)?;
            }
            Task::EmSpectrum {
                q,
                background,
                potential,
            } => {
                em_background(&c.model.lattice()?, *q, background, *potential)?;
            }
            Task::EmEvolve {
                q,
                background,
                potential,
                times,
            } => {
                check_times(i, task, times)?;
                em_background(&c.model.lattice()?, *q, background, *potential)?;
            }
            Task::Invariance { beta } => {
                if src.amplitude.is_none() || beta.len() != d {
                    return Err(bad(
                        i,
                        task,
                        "needs an amplitude field and a d-component beta",
                    ));
                }
                cfg(Boost::exact(beta.clone()), "invariance")?;
            }
            Task::Group { .. } | Task::PositionExpectation => {}
        }
    }
    Ok(())
}

fn coord_columns(d: usize) -> Vec<String> {
    (0..d).map(|i| format!("x{i}")).collect()
}

fn positions(lat: &MomentumLattice) -> Vec<Vec<f64>> {
    (0..lat.len())
        .map(|j| lat.node_position(j)[..lat.dim()].to_vec())
        .collect()
}

fn drift(values: &[f64]) -> f64 {
    let r = values[0].abs();
    values
        .iter()
        .map(|v| (v - values[0]).abs())
        .fold(0.0, f64::max)
        / if r > 0.0 { r } else { 1.0 }
}

fn lattice(src: &Source) -> &LatticeField {
    src.lattice.as_ref().expect("validated")
}

fn run_task(i: usize, task: &Task, src: &Source, ctx: &Ctx) -> Result<(Value, Vec<String>)> {
    let stem = |extra: &str| {
        if extra.is_empty() {
            format!("task{i}-{}", task.name())
        } else {
            format!("task{i}-{}-{extra}", task.name())
        }
    };
    match task {
        Task::InnerProduct { times } => {
            let f = lattice(src);
            let mut t = Table::new(&["t", "inner_a_re", "inner_a_im", "split_re", "split_im"]);
            let mut norms = Vec::new();
            let mut split_gap: f64 = 0.0;
            for &s in times {
                let (v, w) = (inner_a(f, f, s)?, inner_a_split(f, f, s)?);
                split_gap = split_gap.max((v - w).norm() / v.norm().max(f64::MIN_POSITIVE));
                norms.push(v.re);
                t.push_nums([s, v.re, v.im, w.re, w.im]);
            }
            let files = ctx.write(&t, &stem(""))?;
            Ok((
                json!({ "norm": num(norms[0]), "time_drift": num(drift(&norms)), "split_deviation": num(split_gap) }),
                files,
            ))
        }
        Task::TotalProbability { times } => {
            let f = lattice(src);
            let mut t = Table::new(&["t", "total_probability", "integral_ja0", "inner_a"]);
            let mut totals = Vec::new();
            for &s in times {
                let p = total_probability(f, s)?;
                totals.push(p);
                t.push_nums([s, p, total_ja0(f, s).re, inner_a(f, f, s)?.re]);
            }
            let files = ctx.write(&t, &stem(""))?;
            Ok((
                json!({ "totals": totals.iter().map(|v| num(*v)).collect::<Vec<_>>(), "time_drift": num(drift(&totals)) }),
                files,
            ))
        }
        Task::RhoA { times } => {
            let f = lattice(src);
            let pad = f.lattice().padded();
            let xs = positions(&pad);
            let mut cols = coord_columns(pad.dim());
            cols.push("rho_a".into());
            let (mut files, mut integrals, mut peaks) = (Vec::new(), Vec::new(), Vec::new());
            for (k, &s) in times.iter().enumerate() {
                let rho = rho_a(f, s)?;
                let mut t = Table::new(&cols).meta("t", s).meta("grid", "padded");
                for (x, r) in xs.iter().zip(&rho) {
                    t.push_nums(x.iter().copied().chain([*r]));
                }
                let peak = rho
                    .iter()
                    .enumerate()
                    .fold(
                        (0, f64::MIN),
                        |m, (j, v)| if *v > m.1 { (j, *v) } else { m },
                    )
                    .0;
                peaks.push(xs[peak].iter().map(|v| num(*v)).collect::<Vec<_>>());
                integrals.push(total_probability(f, s)?);
                files.extend(ctx.write(&t, &stem(&format!("t{k}")))?);
            }
            let ints: Vec<Value> = integrals.iter().map(|v| num(*v)).collect();
            Ok((
                json!({ "integrals": ints, "time_drift": num(drift(&integrals)), "peak_positions": peaks }),
                files,
            ))
        }
        Task::Current { which, times } => {
            let f = lattice(src);
            let pad = f.lattice().padded();
            let xs = positions(&pad);
            let d = pad.dim();
            let mut files = Vec::new();
            let mut residuals = Vec::new();
            for (k, &s) in times.iter().enumerate() {
                let mut cols = coord_columns(d);
                let table = match which {
                    Which::Ja => {
                        let g = current_ja(f, s);
                        for mu in 0..=d {
                            cols.push(format!("J{mu}_re"));
                            cols.push(format!("J{mu}_im"));
                        }
                        let mut t = Table::new(&cols)
                            .meta("kind", g.kind.tag())
                            .meta("t", s)
                            .meta("grid", "padded");
                        for (j, x) in xs.iter().enumerate() {
                            t.push_nums(
                                x.iter()
                                    .copied()
                                    .chain(g.components.iter().flat_map(|c| [c[j].re, c[j].im])),
                            );
                        }
                        t
                    }
                    Which::CalJa => {
                        let g = current_calja(f, s);
                        cols.extend((0..=d).map(|mu| format!("J{mu}")));
                        let mut t = Table::new(&cols)
                            .meta("kind", g.kind.tag())
                            .meta("t", s)
                            .meta("grid", "padded");
                        for (j, x) in xs.iter().enumerate() {
                            t.push_nums(x.iter().copied().chain(g.components.iter().map(|c| c[j])));
                        }
                        t
                    }
                };
                residuals.push(num(continuity_residual(f, s, *which)));
                files.extend(ctx.write(&table, &stem(&format!("t{k}")))?);
            }
            Ok((
                json!({ "which": which, "continuity_residual": residuals }),
                files,
            ))
        }
        Task::ProbabilityRegion { lo, hi, normalize } => {
            let f = lattice(src);
            let region = Region::new(f.lattice(), lo.clone(), hi.clone())?;
            Ok((
                json!({ "probability": num(probability_region(f, &region, *normalize)?) }),
                Vec::new(),
            ))
        }
        Task::PositionExpectation => {
            let f = lattice(src);
            let n = inner_0(f, f, f.t0())?.re;
            let xs = position_apply(f)?;
            let mut re = Vec::new();
            let mut im = Vec::new();
            for x in &xs {
                let v = inner_0(f, x, f.t0())? / n;
                re.push(num(v.re));
                im.push(num(v.im));
            }
            Ok((json!({ "expectation": re, "imaginary": im }), Vec::new()))
        }
        Task::RadialProfile { mr_range } => {
            let s = src.localized.as_ref().expect("validated");
            let samples = radial_profile(s, mr_range.0, mr_range.1)?;
            let mut t =
                Table::new(&["r", "lattice", "bessel", "rel_err"]).meta("normalization", "dirac");
            let mut worst: f64 = 0.0;
            for r in &samples {
                worst = worst.max(r.rel_err());
                t.push_nums([r.r, r.lattice, r.continuum, r.rel_err()]);
            }
            t.footer("max_rel_err", num(worst));
            let files = ctx.write(&t, &stem(""))?;
            Ok((
                json!({ "nodes": samples.len(), "max_rel_err": num(worst) }),
                files,
            ))
        }
        Task::TwoMode {
            beta,
            events,
            extent,
        } => {
            let pw = src.modes.as_ref().expect("validated");
            let (m1, m2) = (&pw.modes()[0], &pw.modes()[1]);
            let p = *pw.params();
            let o = TwoModeOracle::new(m1.k.clone(), m2.k.clone(), m1.coeff, m2.coeff, p)?;
            let d = m1.k.len();
            let mut rng = ChaCha8Rng::seed_from_u64(
                ctx.seed ^ (i as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15),
            );
            let mut cols = vec!["t".to_string()];
            cols.extend(coord_columns(d));
            cols.extend((0..=d).map(|mu| format!("calJ{mu}")));
            for mu in 0..=d {
                cols.push(format!("J{mu}_re"));
                cols.push(format!("J{mu}_im"));
            }
            cols.extend((0..=d).map(|mu| format!("K{mu}")));
            cols.extend(["Ksq", "div_calJ", "div_J"].map(String::from));
            let mut t = Table::new(&cols);
            for _ in 0..*events {
                let ev: Vec<f64> = (0..=d)
                    .map(|_| rng.random_range(-extent..*extent))
                    .collect();
                let r = two_mode_oracle(&o, p.a(), &ev)?;
                let row = ev
                    .iter()
                    .chain(&r.cal_j)
                    .copied()
                    .chain(r.j.iter().flat_map(|z| [z.re, z.im]))
                    .chain(r.k.iter().copied())
                    .chain([r.ksq, r.div_cal_j, r.div_j]);
                t.push_nums(row);
            }
            let mut files = ctx.write(&t, &stem("oracle"))?;
            let demo = noncovariance_demo(&o, &Boost::exact(beta.clone())?)?;
            let mut b =
                Table::new(&["quantity", "before", "after"]).meta("beta", format!("{beta:?}"));
            b.push(vec![
                json!("Ksq"),
                num(demo.ksq_before),
                num(demo.ksq_after),
            ]);
            b.push(vec![
                json!("k1.k2"),
                num(demo.k1k2_before),
                num(demo.k1k2_after),
            ]);
            files.extend(ctx.write(&b, &stem("boost"))?);
            let (k1, k2) = o.four_vectors();
            Ok((
                json!({
                    "omegas": [num(o.omegas().0), num(o.omegas().1)],
                    "ksq": num(o.ksq()),
                    "k1_dot_k2": num(minkowski_dot(&k1, &k2)),
                    "boost": {
                        "beta": beta,
                        "ksq_before": num(demo.ksq_before),
                        "ksq_after": num(demo.ksq_after),
                        "delta": num(demo.delta),
                        "k1k2_before": num(demo.k1k2_before),
                        "k1k2_after": num(demo.k1k2_after),
                    }
                }),
                files,
            ))
        }
        Task::Gauge { theta, dtheta } => {
            let f = lattice(src);
            let (a, t0) = (f.params().a(), f.t0());
            let g = gauge_transform(f, *theta, a)?;
            let (n0, n1) = (inner_a(f, f, t0)?.re, inner_a(&g, &g, t0)?.re);
            let dev = generator_check(f, a, *dtheta)?;
            let half = generator_check(f, a, 0.5 * dtheta)?;
            Ok((
                json!({
                    "theta": num(*theta),
                    "norm_before": num(n0),
                    "norm_after": num(n1),
                    "norm_rel_dev": num((n1 - n0).abs() / n0),
                    "generator_deviation": num(dev),
                    "generator_deviation_half_step": num(half),
                    "halving_ratio": num(half / dev),
                    "charge": num(charge_phase_space(f, t0)?),
                    "total_probability": num(total_probability(f, t0)?),
                }),
                Vec::new(),
            ))
        }
        Task::Group { parameter } => Ok((
            json!({ "parameter": parameter, "class": group_classify(parameter)? }),
            Vec::new(),
        )),
        Task::Limits {
            which,
            ratio,
            steps,
        } => {
            let sweep = limit_sweep(ctx.model, ctx.spec, *ratio, *steps)?;
            let table = limit_deviation(&sweep, *which)?;
            let mut t = Table::new(&["M", "rel_dev_rho", "rel_dev_j"])
                .meta("which", format!("{which:?}"))
                .meta("kappa_rule", "1/(1+a)");
            for r in &table.rows {
                t.push_nums([r.m, r.rel_dev_rho, r.rel_dev_j]);
            }
            t.footer("slope_rho", num(table.slope_rho));
            t.footer("slope_j", num(table.slope_j));
            let files = ctx.write(&t, &stem(""))?;
            Ok((
                json!({ "which": which, "slope_rho": num(table.slope_rho), "slope_j": num(table.slope_j) }),
                files,
            ))
        }
        Task::EmSpectrum {
            q,
            background,
            potential,
        } => {
            let op = em_operator(ctx.model, *q, background, *potential)?;
            let mut t = Table::new(&["index", "eigenvalue"])
                .meta("q", q)
                .meta("background", format!("{background:?}").to_lowercase());
            for (k, l) in op.eigenvalues().iter().enumerate() {
                t.push(vec![json!(k), num(*l)]);
            }
            let files = ctx.write(&t, &stem(""))?;
            Ok((
                json!({
                    "dimension": op.eigenvalues().len(),
                    "lowest": num(op.eigenvalues()[0]),
                    "highest": num(*op.eigenvalues().last().expect("non-empty")),
                    "symmetrization_residual": num(op.symmetrization_residual()),
                }),
                files,
            ))
        }
        Task::EmEvolve {
            q,
            background,
            potential,
            times,
        } => {
            let f = lattice(src);
            let op = em_operator(ctx.model, *q, background, *potential)?;
            let p = *f.params();
            let (psi0, dot0) = f.evaluate(f.t0())?;
            let base = em_inner_and_evolve(&psi0, &dot0, &op, &p, 0.0)?.inner;
            let mut t = Table::new(&["t", "inner_re", "inner_im", "max_abs_psi"]).meta("q", q);
            let mut worst: f64 = 0.0;
            for &s in times {
                let e = em_inner_and_evolve(&psi0, &dot0, &op, &p, s - f.t0())?;
                worst = worst.max((e.inner - base).norm() / base.norm());
                t.push_nums([
                    s,
                    e.inner.re,
                    e.inner.im,
                    e.psi.iter().map(|z| z.norm()).fold(0.0, f64::max),
                ]);
            }
            let files = ctx.write(&t, &stem(""))?;
            Ok((
                json!({ "inner_at_t0": [num(base.re), num(base.im)], "max_rel_drift": num(worst) }),
                files,
            ))
        }
        Task::Invariance { beta } => {
            let f = src.amplitude.as_ref().expect("validated");
            let r = amplitude::invariance_check(f, f, &Boost::exact(beta.clone())?)?;
            Ok((
                json!({
                    "order": f.quadrature().order,
                    "before": [num(r.before.re), num(r.before.im)],
                    "after": [num(r.after.re), num(r.after.im)],
                    "rel_dev": num(r.rel_dev),
                }),
                Vec::new(),
            ))
        }
    }
}

fn em_operator(
    model: &Model,
    q: f64,
    bg: &Background,
    potential: Option<[f64; 2]>,
) -> Result<DenseOperator> {
    let p = ModelParams::new(model.m, model.kappa, model.a)?;
    Ok(build_dq(
        &em_background(&model.lattice()?, q, bg, potential)?,
        &p,
    )?)
}

pub fn run(path: &Path, opts: &RunOptions) -> Result<()> {
    let loaded = config::load::<ScenarioConfig>(path)?;
    let c = &loaded.config;
    let seed = opts.seed.unwrap_or(c.seed);
    let src = fields::build(&c.field, &c.model, seed, &loaded.source)?;
    validate(c, &src)?;
    let formats = opts
        .format
        .map(|f| vec![f])
        .unwrap_or_else(|| c.output.formats.clone());
    let dir = crate::report::output_dir(opts.out.as_deref(), c.output.directory.as_deref())?;
    let ctx = Ctx {
        dir: dir.clone(),
        formats,
        prov: Provenance {
            config_hash: Some(loaded.hash.clone()),
            seed,
            params: config::header_params(c)?,
        },
        seed,
        model: &c.model,
        spec: &c.field,
    };
    let mut results = Vec::new();
    let mut failed = Vec::new();
    for (i, task) in c.tasks.iter().enumerate() {
        match run_task(i, task, &src, &ctx) {
            Ok((result, files)) => {
                println!(
                    "task {i} {}: ok{}",
                    task.name(),
                    if files.is_empty() {
                        String::new()
                    } else {
                        format!(" ({})", files.join(", "))
                    }
                );
                results.push(json!({ "index": i, "task": task.name(), "result": result, "artifacts": files }));
            }
            Err(e) => {
                println!("task {i} {}: FAILED: {e:#}", task.name());
                failed.push(format!("task {i} ({}): {e:#}", task.name()));
                results.push(json!({ "index": i, "task": task.name(), "error": format!("{e:#}") }));
            }
        }
    }
    let summary = json!({ "provenance": ctx.prov.to_json(), "config": c, "tasks": results });
    write_json(&dir.join("summary.json"), &summary)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(anyhow!("{}", failed.join("; ")))
    }
}
