//! Implementations of the four subcommands. Each returns the process
//! exit code: 0 success, 1 numerical violation, 2 configuration error.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use urlab_core::hilbert::{random_mixed, random_pure, Operator, QuantumState};
use urlab_core::matkit::{
    characteristic_coefficient, characteristic_coefficient_exhaustive, characteristic_check,
    lemma_minor_check, lemma_trace_check, random_psd, MinorIndex,
};
use urlab_core::relations::{eval_catalog, UrName};
use urlab_core::search::{FamilyKind, GridAxis, MinimizeOptions, StateFamily};
use urlab_core::transforms::{apply_linear, rotation2};
use urlab_core::verdict::Tols;
use urlab_core::CMat;

use crate::config::{self, cpx, state_snapshot, Resolved, Scenario, SweepKind};
use crate::report::*;

pub struct Overrides {
    pub floor: Option<f64>,
    pub tol_sat: Option<f64>,
    pub seed: Option<u64>,
}

fn load(path: &Path, ov: &Overrides) -> Result<(Resolved, String)> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let scenario: Scenario = config::parse_scenario(&text)?;
    let mut resolved = scenario.resolve(ov.seed)?;
    if let Some(f) = ov.floor {
        resolved.tols.floor = f;
    }
    if let Some(s) = ov.tol_sat {
        resolved.tols.saturation = s;
    }
    Ok((resolved, text))
}

fn eval_relations(r: &Resolved) -> Result<(Vec<VerdictRow>, Vec<Certificate>, bool)> {
    let mut rows = Vec::new();
    let mut certs = Vec::new();
    let mut saturation_missed = false;
    for rc in &r.scenario.relations {
        let name: UrName = rc.name.parse().map_err(|e| anyhow!("{e}"))?;
        let obs: Vec<&Operator<f64>> = rc
            .observables
            .iter()
            .map(|o| r.observables.get(o).expect("validated at resolve"))
            .collect();
        let state = r
            .states
            .get(&rc.state)
            .ok_or_else(|| anyhow!("state '{}' only exists inside a sweep", rc.state))?;
        let v = eval_catalog(&name, &obs, state, &r.tols)?;
        let row = VerdictRow::new(&rc.state, &v, r.tols.floor);
        if !row.holds {
            certs.push(Certificate {
                relation: row.relation.clone(),
                state: rc.state.clone(),
                margin: row.margin,
                lhs: row.lhs,
                rhs: row.rhs,
                state_data: state_snapshot(state),
            });
        }
        if rc.expect_saturated && !row.saturated {
            saturation_missed = true;
        }
        rows.push(row);
    }
    Ok((rows, certs, saturation_missed))
}

fn random_hermitian(dim: usize, rng: &mut impl Rng) -> CMat<f64> {
    let m = CMat::<f64>::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex::new(re, im)
    });
    (&m + m.adjoint()) * Complex::new(0.5, 0.0)
}

struct BatterySample {
    margins: Vec<(String, f64)>,
}

fn battery_sample(
    r: &Resolved,
    relations: &[UrName],
    obs_count: usize,
    mixed_rank: Option<usize>,
    sample_seed: u64,
    mixed: bool,
) -> Result<BatterySample> {
    let mut rng = ChaCha8Rng::seed_from_u64(sample_seed);
    let state = if mixed {
        random_mixed::<f64, _>(&r.basis, mixed_rank.unwrap_or(2), &mut rng)?
    } else {
        random_pure::<f64, _>(&r.basis, &mut rng)
    };
    let dim = r.basis.dim();
    let obs: Vec<Operator<f64>> = (0..obs_count)
        .map(|_| Operator::hermitian(r.basis.clone(), random_hermitian(dim, &mut rng)))
        .collect::<urlab_core::error::Result<_>>()?;
    let refs: Vec<&Operator<f64>> = obs.iter().collect();
    // Random kets occupy top levels by construction; the truncation-tail
    // gate is for physical-family states, so the battery runs ungated.
    let tols = Tols { tail: None, ..r.tols };
    let mut margins = Vec::new();
    for name in relations {
        let v = eval_catalog(name, &refs, &state, &tols)?;
        margins.push((v.name.clone(), v.margin));
    }
    Ok(BatterySample { margins })
}

fn run_battery(r: &Resolved) -> Result<(Vec<BatterySummary>, usize)> {
    let Some(b) = &r.scenario.battery else {
        return Ok((Vec::new(), 0));
    };
    let relations: Vec<UrName> = match &b.relations {
        Some(names) => names
            .iter()
            .map(|n| n.parse().map_err(|e| anyhow!("{e}")))
            .collect::<Result<_>>()?,
        None => vec![UrName::RobertsonN, UrName::HadamardRobertson, UrName::TraceN],
    };
    let jobs: Vec<(u64, bool)> = (0..b.pure_samples)
        .map(|i| (r.seed.wrapping_add(i as u64), false))
        .chain((0..b.mixed_samples).map(|i| (r.seed.wrapping_add(1_000_003 + i as u64), true)))
        .collect();
    let samples: Vec<BatterySample> = jobs
        .par_iter()
        .map(|&(s, mixed)| battery_sample(r, &relations, b.observable_count, b.mixed_rank, s, mixed))
        .collect::<Result<_>>()?;
    let mut summaries: Vec<BatterySummary> = relations
        .iter()
        .map(|n| BatterySummary {
            relation: n.to_string(),
            samples: 0,
            min_margin: f64::INFINITY,
            violations: 0,
        })
        .collect();
    for s in &samples {
        for (i, (_, margin)) in s.margins.iter().enumerate() {
            let sum = &mut summaries[i];
            sum.samples += 1;
            sum.min_margin = sum.min_margin.min(*margin);
            if *margin < -r.tols.floor {
                sum.violations += 1;
            }
        }
    }
    let violations = summaries.iter().map(|s| s.violations).sum();
    Ok((summaries, violations))
}

pub fn run_eval(path: &Path, ov: &Overrides, out: Option<&Path>) -> Result<i32> {
    let (resolved, text) = match load(path, ov) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("config error: {e:#}");
            return Ok(2);
        }
    };
    let (verdicts, certs, saturation_missed) = match eval_relations(&resolved) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("config error: {e:#}");
            return Ok(2);
        }
    };
    let (battery, battery_violations) = match run_battery(&resolved) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("config error: {e:#}");
            return Ok(2);
        }
    };
    let violation_count = certs.len() + battery_violations;
    let report = EvalReport {
        command: "eval".into(),
        seed: resolved.seed,
        floor: resolved.tols.floor,
        saturation_tol: resolved.tols.saturation,
        verdicts,
        battery,
        violation_count,
        config_text: text,
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    write_json(out, "eval_report.json", &report)?;
    for (i, c) in certs.iter().enumerate() {
        write_json(out, &format!("certificate_{i}_{}.json", c.relation), c)?;
    }
    Ok(if violation_count > 0 || saturation_missed {
        1
    } else {
        0
    })
}

pub fn run_sweep(path: &Path, ov: &Overrides, out: Option<&Path>, json: bool) -> Result<i32> {
    let (resolved, text) = match load(path, ov) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("config error: {e:#}");
            return Ok(2);
        }
    };
    let Some(sweep) = resolved.scenario.sweep.clone() else {
        eprintln!("config error: no [sweep] section");
        return Ok(2);
    };
    let rows: Result<Vec<Vec<SweepRow>>> = match &sweep.kind {
        SweepKind::SqueezeR {
            alpha,
            zeta_phase,
            values,
        } => values
            .par_iter()
            .enumerate()
            .map(|(index, &rv)| {
                let zeta = Complex::from_polar(rv, *zeta_phase);
                let levels = match resolved.basis {
                    urlab_core::hilbert::BasisSpec::Fock { levels, modes: 1 } => levels,
                    _ => bail!("squeeze sweep needs a single-mode Fock basis"),
                };
                let tail = resolved.tols.tail.unwrap_or(1.0);
                let state =
                    urlab_core::hilbert::squeezed_state(cpx(*alpha), zeta, levels, tail)?;
                sweep_point(&resolved, index, rv, &state, "swept", None)
            })
            .collect(),
        SweepKind::RotationTheta { values } => values
            .par_iter()
            .enumerate()
            .map(|(index, &theta)| {
                let mut point_rows = Vec::new();
                for rc in &resolved.scenario.relations {
                    let state = resolved
                        .states
                        .get(&rc.state)
                        .ok_or_else(|| anyhow!("rotation sweep needs named states"))?;
                    let obs: Vec<&Operator<f64>> = rc
                        .observables
                        .iter()
                        .map(|o| resolved.observables.get(o).expect("validated"))
                        .collect();
                    if obs.len() != 2 {
                        bail!("rotation sweep needs exactly two observables per relation");
                    }
                    let rotated = apply_linear(&rotation2(theta), &obs)?;
                    let rrefs: Vec<&Operator<f64>> = rotated.iter().collect();
                    let name: UrName = rc.name.parse().map_err(|e| anyhow!("{e}"))?;
                    let v = eval_catalog(&name, &rrefs, state, &resolved.tols)?;
                    point_rows.push(SweepRow {
                        index,
                        parameter: theta,
                        relation: v.name.clone(),
                        state: rc.state.clone(),
                        lhs: v.lhs,
                        rhs: v.rhs,
                        margin: v.margin,
                        saturated: v.saturated,
                    });
                }
                Ok(point_rows)
            })
            .collect(),
    };
    let rows: Vec<SweepRow> = match rows {
        Ok(nested) => nested.into_iter().flatten().collect(),
        Err(e) => {
            eprintln!("config error: {e:#}");
            return Ok(2);
        }
    };
    let violation_count = rows
        .iter()
        .filter(|r| r.margin < -resolved.tols.floor)
        .count();
    if json {
        let report = SweepReport {
            command: "sweep".into(),
            seed: resolved.seed,
            rows,
            violation_count,
            config_text: text,
        };
        println!("{}", serde_json::to_string_pretty(&report)?);
        write_json(out, "sweep_report.json", &report)?;
    } else {
        let csv_text = sweep_csv(&rows)?;
        print!("{csv_text}");
        if let Some(dir) = out {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join("sweep_report.csv"), &csv_text)?;
        }
    }
    Ok(if violation_count > 0 { 1 } else { 0 })
}

fn sweep_point(
    resolved: &Resolved,
    index: usize,
    parameter: f64,
    state: &QuantumState<f64>,
    state_label: &str,
    _unused: Option<()>,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for rc in &resolved.scenario.relations {
        let name: UrName = rc.name.parse().map_err(|e| anyhow!("{e}"))?;
        let obs: Vec<&Operator<f64>> = rc
            .observables
            .iter()
            .map(|o| resolved.observables.get(o).expect("validated"))
            .collect();
        let v = eval_catalog(&name, &obs, state, &resolved.tols)?;
        rows.push(SweepRow {
            index,
            parameter,
            relation: v.name.clone(),
            state: state_label.to_string(),
            lhs: v.lhs,
            rhs: v.rhs,
            margin: v.margin,
            saturated: v.saturated,
        });
    }
    Ok(rows)
}

pub fn run_fuzz(
    dim: usize,
    matrices: usize,
    samples: usize,
    seed: u64,
    out: Option<&Path>,
) -> Result<i32> {
    if dim < 2 || dim > 6 || matrices < 1 || matrices > 3 {
        eprintln!("config error: need 2 <= n <= 6 and 1 <= m <= 3");
        return Ok(2);
    }
    let tols = Tols::<f64>::default();
    let results: Vec<(usize, f64, f64)> = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<(usize, f64, f64)> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let mats: Vec<CMat<f64>> =
                (0..matrices).map(|_| random_psd::<f64, _>(dim, &mut rng)).collect();
            let mut checks = 0usize;
            let mut min_margin = f64::INFINITY;
            let mut push = |m: f64| {
                min_margin = min_margin.min(m);
                checks += 1;
            };
            // Every index-set order on one random subset plus the full set.
            let full = MinorIndex::full(dim);
            let sub_len = 1 + rng.random_range(0..dim);
            let mut picked: Vec<usize> = (1..=dim).collect();
            while picked.len() > sub_len {
                let kill = rng.random_range(0..picked.len());
                picked.remove(kill);
            }
            let sub = MinorIndex::new(picked, dim).map_err(|e| anyhow!("{e}"))?;
            for idx in [&full, &sub] {
                let (v1, v2) = lemma_minor_check(&mats, idx, &tols).map_err(|e| anyhow!("{e}"))?;
                push(v1.margin);
                push(v2.margin);
            }
            for r in 1..=dim {
                let (v1, v2) =
                    characteristic_check(&mats, r, &tols).map_err(|e| anyhow!("{e}"))?;
                push(v1.margin);
                push(v2.margin);
            }
            let mut mismatch = 0.0f64;
            for m in &mats {
                let (t1, t2) = lemma_trace_check(m, &tols).map_err(|e| anyhow!("{e}"))?;
                push(t1.margin);
                if let Some(t2) = t2 {
                    push(t2.margin);
                }
                for r in 1..=dim {
                    let fast = characteristic_coefficient(m, r).map_err(|e| anyhow!("{e}"))?;
                    let slow =
                        characteristic_coefficient_exhaustive(m, r).map_err(|e| anyhow!("{e}"))?;
                    mismatch = mismatch.max((fast - slow).norm());
                }
            }
            Ok((checks, min_margin, mismatch))
        })
        .collect::<Result<_>>()?;
    let checks = results.iter().map(|r| r.0).sum();
    let min_margin = results.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let max_mismatch = results.iter().map(|r| r.2).fold(0.0, f64::max);
    let violation_count = results.iter().filter(|r| r.1 < -tols.floor).count();
    let report = FuzzReport {
        command: "lemma-fuzz".into(),
        dim,
        matrices,
        samples,
        seed,
        checks,
        min_margin,
        violation_count,
        max_characteristic_mismatch: max_mismatch,
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    write_json(out, "fuzz_report.json", &report)?;
    Ok(if violation_count > 0 { 1 } else { 0 })
}

pub fn run_minimize(path: &Path, ov: &Overrides, out: Option<&Path>) -> Result<i32> {
    let (resolved, text) = match load(path, ov) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("config error: {e:#}");
            return Ok(2);
        }
    };
    let Some(mc) = resolved.scenario.minimize.clone() else {
        eprintln!("config error: no [minimize] section");
        return Ok(2);
    };
    let outcome = (|| -> Result<MinimizeReport> {
        let name: UrName = mc.relation.parse().map_err(|e| anyhow!("{e}"))?;
        let obs: Vec<&Operator<f64>> = mc
            .observables
            .iter()
            .map(|o| {
                resolved
                    .observables
                    .get(o)
                    .ok_or_else(|| anyhow!("unknown observable '{o}'"))
            })
            .collect::<Result<_>>()?;
        let unit = GridAxis::new(0.0, 0.0, 1).expect("degenerate axis");
        let kind = match mc.family.as_str() {
            "generic" => FamilyKind::Generic,
            "gaussian" => FamilyKind::Squeezed {
                alpha_re: unit,
                alpha_im: unit,
                zeta_r: unit,
                zeta_phase: unit,
            },
            other => bail!("unknown family '{other}' (use generic|gaussian)"),
        };
        let family = StateFamily {
            basis: resolved.basis.clone(),
            kind,
        };
        let opts = MinimizeOptions {
            budget: mc.budget.unwrap_or(5000),
            restarts: mc.restarts.unwrap_or(3),
            seed: resolved.seed,
            ..MinimizeOptions::default()
        };
        // Arbitrary search states need the tail gate off.
        let tols = Tols { tail: None, ..resolved.tols };
        let res = urlab_core::search::minimize_ur(&name, &obs, &family, &mc.start, &opts, &tols)
            .map_err(|e| anyhow!("{e}"))?;
        Ok(MinimizeReport {
            command: "minimize".into(),
            seed: resolved.seed,
            relation: mc.relation.clone(),
            family: mc.family.clone(),
            start_margin: res.start_margin,
            best_margin: res.best_margin,
            evaluations: res.evaluations,
            best_params: res.best_params,
            config_text: text,
        })
    })();
    match outcome {
        Ok(report) => {
            println!("{}", serde_json::to_string_pretty(&report)?);
            write_json(out, "minimize_report.json", &report)?;
            Ok(0)
        }
        Err(e) => {
            eprintln!("config error: {e:#}");
            Ok(2)
        }
    }
}
