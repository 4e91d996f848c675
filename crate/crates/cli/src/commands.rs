//! Subcommand implementations. Each returns whether its checked properties held.

use std::io::{BufReader, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use detpp::experiments::{
    run_bounds_sweep, run_estimate, run_isometry_sweep, run_risk_curve, run_sampler_check,
    run_two_candidate_check, BoundsSweepConfig, EstimateConfig, IsometrySweepConfig,
    RiskCurveConfig, SamplerCheckConfig, SweepReport, TwoCandidateConfig,
};
use detpp::hellinger::hellinger;
use detpp::io::ParamsFile;
use detpp::sampling::{
    sample_dpp, sample_dpp_oracle, sample_from_table, sample_projection_sequential,
};
use detpp::{normalization_check, Density, DensityTable, GroundSet, SampleSet, SeededRng};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::output::{sibling, write_json, write_meta, write_primary};
use crate::{Cli, Command, SamplerKind};

pub fn run(cli: &Cli) -> Result<bool> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Sample(args) => {
            let params = ParamsFile::read(&args.params)
                .with_context(|| format!("reading {}", args.params.display()))?;
            let mut rng = SeededRng::new(cli.seed.unwrap_or(0));
            let samples = draw(&params, args.n, args.sampler, &mut rng)?;
            write_primary(out, |w| samples.write_csv(w))?;
            Ok(true)
        }
        Command::Density(args) => {
            let params = ParamsFile::read(&args.params)
                .with_context(|| format!("reading {}", args.params.display()))?;
            let table = table_of(&params)?;
            write_primary(out, |w| table.write_csv(w))?;
            Ok((normalization_check(&table) - 1.0).abs() <= 1e-9)
        }
        Command::Hellinger(args) => {
            let a = table_of(
                &ParamsFile::read(&args.params)
                    .with_context(|| format!("reading {}", args.params.display()))?,
            )?;
            let b = table_of(
                &ParamsFile::read(&args.other)
                    .with_context(|| format!("reading {}", args.other.display()))?,
            )?;
            let pair = hellinger(&a, &b)?;
            write_json(
                out,
                &json!({"h2": pair.h2, "affinity": pair.affinity, "distance": pair.distance()}),
            )?;
            Ok(true)
        }
        Command::BoundsSweep(args) => {
            let mut cfg: BoundsSweepConfig = load_config(cli.config.as_deref(), "bounds-sweep")?;
            override_seed(&mut cfg.seed, cli.seed);
            if let Some(i) = args.sweep.instances {
                cfg.instances = i;
            }
            if let Some(p) = args.sweep.p_max {
                cfg.p_max = p;
            }
            cfg.degenerate |= args.degenerate;
            let report = run_bounds_sweep(&cfg)?;
            finish_sweep(out, "bounds-sweep", &cfg, &report)
        }
        Command::IsometrySweep(args) => {
            let mut cfg: IsometrySweepConfig =
                load_config(cli.config.as_deref(), "isometry-sweep")?;
            override_seed(&mut cfg.seed, cli.seed);
            if let Some(i) = args.instances {
                cfg.instances = i;
            }
            if let Some(p) = args.p_max {
                cfg.p_max = p;
            }
            let report = run_isometry_sweep(&cfg)?;
            finish_sweep(out, "isometry-sweep", &cfg, &report)
        }
        Command::SamplerCheck(args) => {
            let mut cfg: SamplerCheckConfig = load_config(cli.config.as_deref(), "sampler-check")?;
            override_seed(&mut cfg.seed, cli.seed);
            if let Some(d) = args.draws {
                cfg.draws = d;
            }
            let report = run_sampler_check(&cfg)?;
            write_primary(out, |w| report.write_csv(w))?;
            let passed = report.passed();
            write_meta(
                out,
                "sampler-check",
                to_value(&cfg)?,
                passed,
                to_value(&report)?,
            )?;
            Ok(passed)
        }
        Command::Estimate => {
            let Some(path) = cli.config.as_deref() else {
                bail!("estimate requires --config");
            };
            let mut cfg: EstimateConfig = read_config(path, "estimate")?;
            override_seed(&mut cfg.seed, cli.seed);
            let samples = match &cfg.samples {
                Some(rel) => {
                    let full = path
                        .parent()
                        .map(|d| d.join(rel))
                        .unwrap_or_else(|| rel.clone());
                    let file = std::fs::File::open(&full)
                        .with_context(|| format!("reading {}", full.display()))?;
                    Some(SampleSet::read_csv(
                        GroundSet::new(cfg.p)?,
                        BufReader::new(file),
                    )?)
                }
                None => None,
            };
            let (output, selection) = run_estimate(&cfg, samples)?;
            write_json(out, &to_value(&output)?)?;
            if let Some(out) = out {
                let path = sibling(out, "test_matrix.csv");
                let file = std::fs::File::create(&path)
                    .with_context(|| format!("cannot create {}", path.display()))?;
                let mut w = std::io::BufWriter::new(file);
                selection.write_matrix_csv(&mut w)?;
                w.flush()?;
            }
            let passed = selection.is_antisymmetric();
            write_meta(
                out,
                "estimate",
                to_value(&cfg)?,
                passed,
                json!({"chosen": output.chosen, "family_size": output.family_size, "truncation": output.truncation}),
            )?;
            Ok(passed)
        }
        Command::RiskCurve(args) => {
            let mut cfg: RiskCurveConfig = load_config(cli.config.as_deref(), "risk-curve")?;
            override_seed(&mut cfg.seed, cli.seed);
            if let Some(r) = args.replications {
                cfg.replications = r;
            }
            if let Some(grid) = &args.n_grid {
                cfg.n_grid = grid.clone();
            }
            let report = run_risk_curve(&cfg)?;
            write_primary(out, |w| report.write_csv(w))?;
            let passed = report.passed();
            write_meta(
                out,
                "risk-curve",
                to_value(&cfg)?,
                passed,
                json!({
                    "slope": report.slope,
                    "normalized_spread": report.normalized_spread,
                    "rows_finite": report.rows_finite(),
                    "spread_ok": report.spread_ok(),
                    "slope_ok": report.slope_ok(),
                    "truncated": report.rows.iter().any(|r| r.truncated),
                }),
            )?;
            Ok(passed)
        }
        Command::TwoCandidate(args) => {
            let mut cfg: TwoCandidateConfig = load_config(cli.config.as_deref(), "two-candidate")?;
            override_seed(&mut cfg.seed, cli.seed);
            if let Some(r) = args.replications {
                cfg.replications = r;
            }
            if let Some(n) = args.n {
                cfg.n = n;
            }
            let report = run_two_candidate_check(&cfg)?;
            write_json(out, &to_value(&report)?)?;
            write_meta(
                out,
                "two-candidate",
                to_value(&cfg)?,
                report.passed,
                Value::Null,
            )?;
            Ok(report.passed)
        }
    }
}

fn override_seed(target: &mut u64, seed: Option<u64>) {
    if let Some(s) = seed {
        *target = s;
    }
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

/// Reads a JSON config; defaults when `path` is absent.
fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>, kind: &str) -> Result<T> {
    match path {
        Some(path) => read_config(path, kind),
        None => Ok(T::default()),
    }
}

/// Reads a JSON config. A `kind` field, if present, must name this subcommand.
fn read_config<T: DeserializeOwned>(path: &Path, kind: &str) -> Result<T> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut value: Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if let Some(obj) = value.as_object_mut() {
        if let Some(found) = obj.remove("kind") {
            if found.as_str() != Some(kind) {
                bail!("config kind {found} does not match subcommand {kind:?}");
            }
        }
    }
    serde_json::from_value(value)
        .with_context(|| format!("invalid {kind} config in {}", path.display()))
}

fn finish_sweep<C: Serialize>(
    out: Option<&Path>,
    command: &str,
    cfg: &C,
    report: &SweepReport,
) -> Result<bool> {
    write_primary(out, |w| report.write_csv(w))?;
    let violations = report.violations();
    write_meta(
        out,
        command,
        to_value(cfg)?,
        violations == 0,
        json!({
            "rows": report.rows.len(),
            "violations": violations,
            "min_slack": report.min_slack(),
            "inequalities": to_value(&report.summaries())?,
        }),
    )?;
    Ok(violations == 0)
}

fn table_of(params: &ParamsFile) -> Result<DensityTable> {
    Ok(match params.projection()? {
        Some(proj) => proj.table()?,
        None => params.dpp()?.table()?,
    })
}

fn draw(
    params: &ParamsFile,
    n: usize,
    sampler: SamplerKind,
    rng: &mut SeededRng,
) -> Result<SampleSet> {
    if n == 0 {
        bail!("--n must be at least 1");
    }
    let samples = match params.projection()? {
        Some(proj) => {
            let mut draws = Vec::with_capacity(n);
            match sampler {
                SamplerKind::TwoStep => {
                    for _ in 0..n {
                        draws.push(sample_projection_sequential(
                            proj.family(),
                            proj.active(),
                            rng,
                        )?);
                    }
                }
                SamplerKind::Oracle => {
                    let table = proj.table()?;
                    draws.extend((0..n).map(|_| sample_from_table(&table, rng)));
                }
            }
            SampleSet::new(proj.ground(), draws)?
        }
        None => {
            let density = params.dpp()?;
            match sampler {
                SamplerKind::TwoStep => sample_dpp(&density, n, rng)?,
                SamplerKind::Oracle => sample_dpp_oracle(&density, n, rng)?,
            }
        }
    };
    Ok(samples)
}
