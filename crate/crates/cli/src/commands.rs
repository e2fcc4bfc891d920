//! Subcommand implementations. Each returns the process exit code it wants;
//! machine-readable reports go to stdout and, when an output directory is
//! given, to disk. Exit codes are a stable contract:
//!
//! - `check`: 0 not excluded, 2 excluded, 3 inconclusive, 1 error
//! - `solve`: 0 converged, 4 no solution / no convergence, 1 error
//! - `verify`: 0 all residuals within tolerance, 4 residual failure, 1 error
//!   (including a model-hash mismatch)
//! - `scan`: 0 completed (per-point failures are recorded, not fatal), 1 error

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;

use kgm_core::nogo::{classify_general, classify_power_law, NoGoVerdict, PhiRange, VerdictStatus};
use kgm_core::potentials::Potential;
use kgm_core::profile::{canonical_hash, model_hash, ProfileRecord};
use kgm_core::virial::{
    closed_form_action, compute_functionals, residual_amplitude, residual_general,
    residual_power_law, scaling_curve, FunctionalSet, ScalingParams,
};
use kgm_core::{
    charge, coulomb_tail_diagnostic, solve_gauged, solve_qball, stationarity_derivative,
    ModelConfig, RadialProfile, SolverError,
};

use crate::config::{patch_model, Config, ScanOp, ScanRequest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_EXCLUDED: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;
pub const EXIT_NO_SOLUTION: i32 = 4;

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("report serialization"));
}

fn write_out(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

// ---------------------------------------------------------------------------
// check
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct CheckReport {
    config_hash: String,
    version: String,
    aggregate: NoGoVerdict,
    per_condition: Vec<kgm_core::nogo::ConditionVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    power_law_case: Option<NoGoVerdict>,
}

pub fn cmd_check(config: &Config, out: Option<&Path>) -> Result<i32> {
    let model = &config.model;
    let range = config.checker.range()?;
    let power_law_case = match model.potential() {
        Potential::PowerLaw { gamma, p } => Some(classify_power_law(
            *gamma,
            *p,
            model.m() * model.m(),
            model.omega() * model.omega(),
        )?),
        _ => None,
    };
    let general = classify_general(model, range, config.checker.samples, config.checker.tol)?;
    let aggregate = match &power_law_case {
        Some(v) if v.is_excluded() => v.clone(),
        _ => general.aggregate.clone(),
    };
    let report = CheckReport {
        config_hash: config.hash(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        aggregate: aggregate.clone(),
        per_condition: general.per_condition,
        power_law_case,
    };
    print_json(&report);
    if let Some(dir) = out {
        write_out(dir, "check.json", &serde_json::to_string_pretty(&report)?)?;
    }
    Ok(match aggregate.status {
        VerdictStatus::NotExcluded => EXIT_OK,
        VerdictStatus::Excluded => EXIT_EXCLUDED,
        VerdictStatus::Inconclusive => EXIT_INCONCLUSIVE,
    })
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct SolveReport {
    config_hash: String,
    version: String,
    converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    phi0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nodes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ode_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    files: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<Vec<kgm_core::solver::ShotRecord>>,
}

fn run_solver(config: &Config) -> Result<RadialProfile, SolverError> {
    let model = &config.model;
    if model.e() == 0.0 {
        let opts = config
            .solver
            .shoot_options(model)
            .map_err(|e| SolverError::InvalidInput(e.to_string()))?;
        solve_qball(model, &opts)
    } else {
        let opts = config
            .solver
            .gauged_options(model)
            .map_err(|e| SolverError::InvalidInput(e.to_string()))?;
        solve_gauged(model, &opts)
    }
}

/// Solver diagnostics stored in the profile JSON record.
fn solve_diagnostics(profile: &RadialProfile) -> BTreeMap<String, f64> {
    let mut diag = BTreeMap::new();
    diag.insert("phi0".to_string(), profile.phi()[0]);
    diag.insert("nodes".to_string(), profile.node_count() as f64);
    if let Ok(q) = charge(profile) {
        diag.insert("charge".to_string(), q);
    }
    if profile.model().e() > 0.0 {
        if let Some((c, variation)) = coulomb_tail_diagnostic(profile) {
            diag.insert("coulomb_tail_constant".to_string(), c);
            diag.insert("coulomb_tail_variation".to_string(), variation);
        }
    }
    diag
}

pub fn cmd_solve(config: &Config, out: &Path) -> Result<i32> {
    match run_solver(config) {
        Ok(profile) => {
            let record = ProfileRecord::from_profile(&profile, solve_diagnostics(&profile));
            let csv_path = write_out(out, "profile.csv", &profile.to_csv())?;
            let json_path = write_out(out, "profile.json", &record.to_json()?)?;
            let report = SolveReport {
                config_hash: config.hash(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                converged: true,
                phi0: Some(profile.phi()[0]),
                nodes: Some(profile.node_count()),
                ode_residual: Some(profile.ode_residual()),
                error: None,
                files: vec![csv_path.display().to_string(), json_path.display().to_string()],
                trace: None,
            };
            print_json(&report);
            Ok(EXIT_OK)
        }
        Err(err) => {
            let trace = match &err {
                SolverError::NoSolution { trace, .. }
                | SolverError::NonMonotoneNodes { trace, .. } => Some(trace.clone()),
                _ => None,
            };
            let code = match &err {
                SolverError::NoSolution { .. }
                | SolverError::NoConvergence { .. }
                | SolverError::ContinuationBreakdown { .. }
                | SolverError::NonMonotoneNodes { .. } => EXIT_NO_SOLUTION,
                _ => EXIT_ERROR,
            };
            let report = SolveReport {
                config_hash: config.hash(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                converged: false,
                phi0: None,
                nodes: None,
                ode_residual: None,
                error: Some(err.to_string()),
                files: vec![],
                trace,
            };
            print_json(&report);
            Ok(code)
        }
    }
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ResidualRow {
    identity: String,
    value: f64,
    tolerance: f64,
    pass: bool,
}

#[derive(Serialize)]
struct VerifyReport {
    config_hash: String,
    version: String,
    model_hash: String,
    functionals: FunctionalSet,
    action: f64,
    rows: Vec<ResidualRow>,
    action_curve: Vec<(f64, f64)>,
    all_pass: bool,
}

/// Loads a profile from `.json` (full record, hash-checked against the
/// config model) or `.csv` (columns only; the config supplies the model).
fn load_profile(path: &Path, model: &ModelConfig) -> Result<RadialProfile> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read profile {}", path.display()))?;
    if path.extension().map(|e| e == "json").unwrap_or(false) {
        let record = ProfileRecord::from_json(&text)?;
        let expected = model_hash(model);
        if record.model_hash != expected {
            bail!(
                "model hash mismatch: profile carries {}, config model hashes to {expected}",
                record.model_hash
            );
        }
        Ok(record.into_profile()?)
    } else {
        Ok(RadialProfile::from_csv(&text, model.clone(), 0.0)?)
    }
}

pub fn cmd_verify(profile_path: &Path, config: &Config, out: Option<&Path>) -> Result<i32> {
    let model = &config.model;
    let profile = load_profile(profile_path, model)?;
    let vcfg = &config.verify;
    let f = compute_functionals(&profile)?;
    let mut rows = Vec::new();
    for &alpha in &vcfg.alphas {
        let value = residual_general(&f, model, alpha);
        rows.push(ResidualRow {
            identity: format!("general alpha={alpha}"),
            value,
            tolerance: vcfg.tol,
            pass: value <= vcfg.tol,
        });
    }
    let value = residual_amplitude(&f, model);
    rows.push(ResidualRow {
        identity: "amplitude".to_string(),
        value,
        tolerance: vcfg.tol,
        pass: value <= vcfg.tol,
    });
    if matches!(model.potential(), Potential::PowerLaw { .. }) {
        for &(alpha, beta) in &vcfg.pairs {
            let value = residual_power_law(&f, model, alpha, beta)?;
            rows.push(ResidualRow {
                identity: format!("power-law alpha={alpha} beta={beta}"),
                value,
                tolerance: vcfg.tol,
                pass: value <= vcfg.tol,
            });
        }
    }
    for &(alpha, beta) in &vcfg.pairs {
        let (deriv, scale) = stationarity_derivative(&profile, alpha, beta, 0.01)?;
        let value = deriv.abs() / scale;
        rows.push(ResidualRow {
            identity: format!("stationarity alpha={alpha} beta={beta}"),
            value,
            tolerance: vcfg.stationarity_tol,
            pass: value <= vcfg.stationarity_tol,
        });
    }
    let (alpha0, beta0) = vcfg.pairs.first().copied().unwrap_or((1.5, 0.0));
    let scalings: Vec<ScalingParams> = vcfg
        .lambdas
        .iter()
        .map(|&l| ScalingParams::new(alpha0, beta0, l))
        .collect::<Result<_, _>>()?;
    let action_curve = scaling_curve(&profile, &scalings)?;
    let all_pass = rows.iter().all(|r| r.pass);
    let report = VerifyReport {
        config_hash: config.hash(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        model_hash: model_hash(model),
        functionals: f,
        action: kgm_core::action_from_functionals(&f, model),
        rows,
        action_curve: action_curve.clone(),
        all_pass,
    };
    print_json(&report);
    if let Some(dir) = out {
        write_out(dir, "verify.json", &serde_json::to_string_pretty(&report)?)?;
        let mut csv = String::from("lambda,action\n");
        for (l, s) in &action_curve {
            let _ = writeln!(csv, "{},{}", fmt17(*l), fmt17(*s));
        }
        write_out(dir, "action_curve.csv", &csv)?;
        if matches!(model.potential(), Potential::PowerLaw { .. }) {
            let mut csv = String::from("lambda,action_direct,action_closed_form\n");
            for (i, (l, s)) in action_curve.iter().enumerate() {
                let cf = closed_form_action(&f, model, scalings[i])?;
                let _ = writeln!(csv, "{},{},{}", fmt17(*l), fmt17(*s), fmt17(cf));
            }
            write_out(dir, "action_curve_closed_form.csv", &csv)?;
        }
    }
    Ok(if all_pass { EXIT_OK } else { EXIT_NO_SOLUTION })
}

// ---------------------------------------------------------------------------
// scan
// ---------------------------------------------------------------------------

#[derive(Clone, Serialize)]
struct ScanRecord {
    index: usize,
    params: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    status: Option<VerdictStatus>,
    #[serde(skip_serializing_if = "Option::is_none")]
    condition: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    solved: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    phi0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ode_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_virial_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct ScanProvenance {
    config_hash: String,
    version: String,
    points: usize,
}

fn scan_point(
    config: &Config,
    scan: &ScanRequest,
    index: usize,
    coords: &[(String, f64)],
) -> ScanRecord {
    let mut record = ScanRecord {
        index,
        params: coords.iter().cloned().collect(),
        status: None,
        condition: None,
        witness: None,
        solved: None,
        phi0: None,
        ode_residual: None,
        max_virial_residual: None,
        error: None,
    };
    let mut point_config = config.clone();
    for (axis, &(_, value)) in scan.axes.iter().zip(coords) {
        match patch_model(&point_config.model, axis.param, value) {
            Ok(m) => point_config.model = m,
            Err(e) => {
                record.error = Some(e.to_string());
                return record;
            }
        }
    }
    let model = point_config.model.clone();

    if scan.ops.contains(&ScanOp::Classify) {
        let range = match point_config.checker.range() {
            Ok(r) => r,
            Err(e) => {
                record.error = Some(e.to_string());
                return record;
            }
        };
        match classify_general(&model, range, point_config.checker.samples, point_config.checker.tol)
        {
            Ok(c) => {
                record.status = Some(c.aggregate.status);
                record.condition = c.aggregate.condition;
                record.witness = c.aggregate.witness;
            }
            Err(e) => {
                record.error = Some(e.to_string());
                return record;
            }
        }
    }

    let wants_solve = scan.ops.contains(&ScanOp::Solve) || scan.ops.contains(&ScanOp::Verify);
    if !wants_solve {
        return record;
    }
    match run_solver(&point_config) {
        Ok(profile) => {
            record.solved = Some(true);
            record.phi0 = Some(profile.phi()[0]);
            record.ode_residual = Some(profile.ode_residual());
            if scan.ops.contains(&ScanOp::Verify) {
                match compute_functionals(&profile) {
                    Ok(f) => {
                        let mut worst = residual_amplitude(&f, &model);
                        for &alpha in &point_config.verify.alphas {
                            worst = worst.max(residual_general(&f, &model, alpha));
                        }
                        record.max_virial_residual = Some(worst);
                    }
                    Err(e) => record.error = Some(e.to_string()),
                }
            }
        }
        Err(err) => {
            record.solved = Some(false);
            record.error = Some(err.to_string());
        }
    }
    record
}

fn scan_csv_header(scan: &ScanRequest) -> String {
    let mut cols = vec!["index".to_string()];
    cols.extend(scan.axes.iter().map(|a| a.param.name().to_string()));
    cols.extend(
        [
            "status",
            "condition",
            "witness",
            "solved",
            "phi0",
            "ode_residual",
            "max_virial_residual",
            "error",
        ]
        .map(String::from),
    );
    cols.join(",")
}

fn scan_csv_row(scan: &ScanRequest, rec: &ScanRecord) -> String {
    let mut cols = vec![rec.index.to_string()];
    for axis in &scan.axes {
        cols.push(fmt17(rec.params[axis.param.name()]));
    }
    cols.push(
        rec.status
            .map(|s| {
                match s {
                    VerdictStatus::Excluded => "excluded",
                    VerdictStatus::NotExcluded => "not_excluded",
                    VerdictStatus::Inconclusive => "inconclusive",
                }
                .to_string()
            })
            .unwrap_or_default(),
    );
    cols.push(rec.condition.clone().unwrap_or_default());
    cols.push(rec.witness.map(fmt17).unwrap_or_default());
    cols.push(rec.solved.map(|s| s.to_string()).unwrap_or_default());
    cols.push(rec.phi0.map(fmt17).unwrap_or_default());
    cols.push(rec.ode_residual.map(fmt17).unwrap_or_default());
    cols.push(rec.max_virial_residual.map(fmt17).unwrap_or_default());
    // Errors may contain commas; strip them for the CSV cell.
    cols.push(rec.error.clone().unwrap_or_default().replace(',', ";"));
    cols.join(",")
}

pub fn cmd_scan(config: &Config, out: &Path, jobs: Option<usize>) -> Result<i32> {
    let scan = config
        .scan
        .as_ref()
        .context("config has no scan section")?;
    let axis_values: Vec<Vec<f64>> = scan.axes.iter().map(|a| a.values()).collect();
    let total: usize = axis_values.iter().map(|v| v.len()).product::<usize>().max(1);

    let coords_of = |index: usize| -> Vec<(String, f64)> {
        match axis_values.len() {
            0 => vec![],
            1 => vec![(scan.axes[0].param.name().to_string(), axis_values[0][index])],
            _ => {
                let inner = axis_values[1].len();
                vec![
                    (scan.axes[0].param.name().to_string(), axis_values[0][index / inner]),
                    (scan.axes[1].param.name().to_string(), axis_values[1][index % inner]),
                ]
            }
        }
    };

    fs::create_dir_all(out)
        .with_context(|| format!("cannot create output directory {}", out.display()))?;
    let csv_path = out.join(format!("{}.csv", scan.output));
    let json_path = out.join(format!("{}.json", scan.output));
    let mut csv = fs::File::create(&csv_path)
        .with_context(|| format!("cannot write {}", csv_path.display()))?;
    use std::io::Write;
    writeln!(csv, "{}", scan_csv_header(scan))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .context("cannot build worker pool")?;
    let chunk = (pool.current_num_threads() * 4).max(1);
    let mut records = Vec::with_capacity(total);
    let mut start = 0usize;
    while start < total {
        let end = (start + chunk).min(total);
        let batch: Vec<ScanRecord> = pool.install(|| {
            use rayon::prelude::*;
            (start..end)
                .into_par_iter()
                .map(|i| scan_point(config, scan, i, &coords_of(i)))
                .collect()
        });
        // Stream rows to disk in grid order so interrupted sweeps keep
        // everything computed so far.
        for rec in &batch {
            writeln!(csv, "{}", scan_csv_row(scan, rec))?;
        }
        csv.flush()?;
        records.extend(batch);
        start = end;
    }

    let provenance =
        ScanProvenance { config_hash: config.hash(), version: env!("CARGO_PKG_VERSION").into(), points: total };
    let doc = serde_json::json!({ "provenance": provenance, "records": records });
    fs::write(&json_path, serde_json::to_string_pretty(&doc)?)?;
    println!(
        "{}",
        serde_json::json!({
            "points": total,
            "csv": csv_path.display().to_string(),
            "json": json_path.display().to_string(),
        })
    );
    Ok(EXIT_OK)
}
