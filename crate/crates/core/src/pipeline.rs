//! Commands behind the CLI: simulate, fit, evaluate and replicate.
//!
//! Each command has an in-memory core ([`fit`], [`evaluate`],
//! [`run_replicate`]) and a file-backed wrapper (`cmd_*`).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Method, RunConfig};
use crate::error::{Error, Result};
use crate::ess::{ess_estimates, ess_run};
use crate::io::{self, Manifest};
use crate::linalg::Matrix;
use crate::metrics::{dag_selection_metrics, relative_errors, selection_metrics};
use crate::model::{mcd_compose, CholeskyPair, OrderedDag, RegressionData, SparseCoefState};
use crate::rng;
use crate::select::ChainRecord;
use crate::simgen::{generate, GroundTruth, SimSpec};
use crate::tes::tes_run;

/// Point estimates shared by both samplers.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimates {
    pub gamma_hat: nalgebra::DMatrix<bool>,
    pub b_hat: SparseCoefState,
    pub dag_hat: OrderedDag,
    pub chol_hat: CholeskyPair,
}

impl Estimates {
    pub fn omega_hat(&self) -> Matrix {
        mcd_compose(&self.chol_hat)
    }

    /// Estimates equal to the truth.
    pub fn from_truth(truth: &GroundTruth) -> Self {
        Estimates {
            gamma_hat: truth.b0.gamma.clone(),
            b_hat: truth.b0.clone(),
            dag_hat: truth.dag0.clone(),
            chol_hat: truth.chol0.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub method: Method,
    pub estimates: Estimates,
    /// `(file stem, chain)` pairs.
    pub chains: Vec<(&'static str, ChainRecord)>,
    pub config: serde_json::Value,
    pub timing: serde_json::Value,
    /// Sampling wall time per iteration in seconds.
    pub secs_per_iteration: f64,
}

/// Runs one sampler on in-memory data with `cfg` supplying hyperparameters.
pub fn fit(data: &RegressionData, method: Method, cfg: &RunConfig) -> Result<FitResult> {
    let (p, q) = (data.p(), data.q());
    match method {
        Method::Ess => {
            let ess_cfg = cfg.ess_config(p, q);
            let out = ess_run(data, &ess_cfg)?;
            let est = ess_estimates(data, &out.chain, &ess_cfg.dag)?;
            Ok(FitResult {
                method,
                estimates: Estimates {
                    gamma_hat: est.gamma_hat,
                    b_hat: est.b_hat,
                    dag_hat: est.dag_hat,
                    chol_hat: est.chol_hat,
                },
                chains: vec![("chain", out.chain)],
                config: ess_cfg.snapshot(),
                timing: serde_json::to_value(&out.timing).unwrap_or_default(),
                secs_per_iteration: out.timing.per_iteration(),
            })
        }
        Method::Tes => {
            let tes_cfg = cfg.tes_config(p, q);
            let out = tes_run(data, &tes_cfg)?;
            Ok(FitResult {
                method,
                estimates: Estimates {
                    gamma_hat: out.b_hat.gamma.clone(),
                    b_hat: out.b_hat,
                    dag_hat: out.dag_hat,
                    chol_hat: out.chol_hat,
                },
                chains: vec![("coef_chain", out.coef_chain), ("dag_chain", out.dag_chain)],
                config: tes_cfg.snapshot(),
                timing: serde_json::to_value(&out.timing).unwrap_or_default(),
                secs_per_iteration: out.timing.per_iteration(),
            })
        }
    }
}

/// One scored quantity. `value = None` marks an undefined ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub scenario: u8,
    pub setting: u8,
    pub method: String,
    pub replicate: usize,
    /// `B` (coefficient support), `L` (DAG) or `Omega` (relative errors).
    pub target: String,
    pub metric: String,
    pub value: Option<f64>,
}

/// Identifies the run a set of records belongs to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLabel {
    pub scenario: u8,
    pub setting: u8,
    pub method: String,
    pub replicate: usize,
}

pub fn evaluate(est: &Estimates, truth: &GroundTruth, label: &RunLabel) -> Result<Vec<MetricRecord>> {
    let record = |target: &str, metric: &str, value: Option<f64>| MetricRecord {
        scenario: label.scenario,
        setting: label.setting,
        method: label.method.clone(),
        replicate: label.replicate,
        target: target.to_string(),
        metric: metric.to_string(),
        value,
    };
    let mut out = Vec::new();
    for (name, v) in selection_metrics(&est.gamma_hat, &truth.b0.gamma)?.named() {
        out.push(record("B", name, v));
    }
    for (name, v) in dag_selection_metrics(&est.dag_hat, &truth.dag0)?.named() {
        out.push(record("L", name, v));
    }
    for (name, v) in relative_errors(&est.omega_hat(), &truth.omega0)?.named() {
        out.push(record("Omega", name, Some(v)));
    }
    Ok(out)
}

/// Replicate-averaged row of the summary table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub scenario: u8,
    pub setting: u8,
    pub method: String,
    pub target: String,
    pub metric: String,
    pub mean: Option<f64>,
    /// Replicates contributing a defined value.
    pub defined: usize,
    pub undefined: usize,
}

/// Averages records over replicates, skipping undefined values.
pub fn summarize(records: &[MetricRecord]) -> Vec<TableRow> {
    type Key = (u8, u8, String, String, String);
    let mut groups: BTreeMap<Key, (f64, usize, usize)> = BTreeMap::new();
    for r in records {
        let key = (
            r.scenario,
            r.setting,
            r.method.clone(),
            r.target.clone(),
            r.metric.clone(),
        );
        let entry = groups.entry(key).or_insert((0.0, 0, 0));
        match r.value {
            Some(v) => {
                entry.0 += v;
                entry.1 += 1;
            }
            None => entry.2 += 1,
        }
    }
    groups
        .into_iter()
        .map(
            |((scenario, setting, method, target, metric), (sum, defined, undefined))| TableRow {
                scenario,
                setting,
                method,
                target,
                metric,
                mean: (defined > 0).then(|| sum / defined as f64),
                defined,
                undefined,
            },
        )
        .collect()
}

pub fn lookup(rows: &[TableRow], method: &str, target: &str, metric: &str) -> Option<f64> {
    rows.iter()
        .find(|r| r.method == method && r.target == target && r.metric == metric)
        .and_then(|r| r.mean)
}

const TABLE_METRICS: [&str; 4] = ["sensitivity", "specificity", "precision", "mcc"];

/// One line per (scenario, setting, method, target) with the four selection
/// scores side by side; undefined cells are written as `NA`.
pub fn write_table_csv(path: &Path, rows: &[TableRow]) -> Result<()> {
    let mut grouped: BTreeMap<(u8, u8, String, String), BTreeMap<String, &TableRow>> = BTreeMap::new();
    for r in rows.iter().filter(|r| TABLE_METRICS.contains(&r.metric.as_str())) {
        grouped
            .entry((r.scenario, r.setting, r.method.clone(), r.target.clone()))
            .or_default()
            .insert(r.metric.clone(), r);
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::parse(path, e))?;
    let csv_err = |e: csv::Error| Error::parse(path, e);
    w.write_record([
        "scenario",
        "setting",
        "method",
        "target",
        "sensitivity",
        "specificity",
        "precision",
        "mcc",
        "replicates",
        "undefined",
    ])
    .map_err(csv_err)?;
    for ((scenario, setting, method, target), cells) in grouped {
        let mut line = vec![scenario.to_string(), setting.to_string(), method, target];
        let mut replicates = 0;
        let mut undefined = 0;
        for m in TABLE_METRICS {
            match cells.get(m) {
                Some(r) => {
                    line.push(r.mean.map_or("NA".into(), |v| format!("{v:.4}")));
                    replicates = replicates.max(r.defined + r.undefined);
                    undefined += r.undefined;
                }
                None => line.push("NA".into()),
            }
        }
        line.push(replicates.to_string());
        line.push(undefined.to_string());
        w.write_record(&line).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        Some(n) if n > 0 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("cannot start {n} workers: {e}")))?;
            Ok(pool.install(f))
        }
        _ => Ok(f()),
    }
}

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

/// Writes data, ground truth, spec and manifest into `dir`.
pub fn write_bundle(dir: &Path, spec: &SimSpec, data: &RegressionData, truth: &GroundTruth) -> Result<()> {
    io::write_matrix_csv(&dir.join("X.csv"), &data.x)?;
    io::write_matrix_csv(&dir.join("Y.csv"), &data.y)?;
    io::write_matrix_csv(&dir.join("B0.csv"), &truth.b0.b)?;
    io::write_indicator_csv(&dir.join("Gamma0.csv"), &truth.b0.gamma)?;
    io::write_matrix_csv(&dir.join("L0.csv"), &truth.chol0.l)?;
    io::write_vector_csv(&dir.join("D0.csv"), &truth.chol0.d)?;
    io::write_json(&dir.join("dag0.json"), &truth.dag0)?;
    io::write_matrix_csv(&dir.join("Sigma0.csv"), &truth.sigma0)?;
    io::write_matrix_csv(&dir.join("Omega0.csv"), &truth.omega0)?;
    io::write_matrix_csv(&dir.join("C0.csv"), &truth.c0)?;
    io::write_json(&dir.join("spec.json"), spec)?;
    let spec_value = serde_json::to_value(spec).map_err(|e| Error::parse(dir, e))?;
    let mut manifest = Manifest::new("simulate", spec.seed, spec_value);
    manifest.record_files(
        dir,
        &names(&[
            "X.csv",
            "Y.csv",
            "B0.csv",
            "Gamma0.csv",
            "L0.csv",
            "D0.csv",
            "dag0.json",
            "Sigma0.csv",
            "Omega0.csv",
            "C0.csv",
            "spec.json",
        ]),
    )?;
    manifest.write(dir)
}

pub fn read_truth(dir: &Path) -> Result<(SimSpec, GroundTruth)> {
    let spec: SimSpec = io::read_json(&dir.join("spec.json"))?;
    let b = io::read_matrix_csv(&dir.join("B0.csv"))?;
    let gamma = io::read_indicator_csv(&dir.join("Gamma0.csv"))?;
    let l = io::read_matrix_csv(&dir.join("L0.csv"))?;
    let d = io::read_vector_csv(&dir.join("D0.csv"))?;
    let truth = GroundTruth {
        b0: SparseCoefState::from_parts(b, gamma)?,
        chol0: CholeskyPair::new(l, d)?,
        dag0: io::read_json(&dir.join("dag0.json"))?,
        sigma0: io::read_matrix_csv(&dir.join("Sigma0.csv"))?,
        omega0: io::read_matrix_csv(&dir.join("Omega0.csv"))?,
        c0: io::read_matrix_csv(&dir.join("C0.csv"))?,
    };
    Ok((spec, truth))
}

pub fn read_data(x: &Path, y: &Path) -> Result<RegressionData> {
    for path in [x, y] {
        if !path.is_file() {
            return Err(Error::Config(format!("input file {} does not exist", path.display())));
        }
    }
    RegressionData::new(io::read_matrix_csv(x)?, io::read_matrix_csv(y)?)
}

pub fn write_estimates(dir: &Path, est: &Estimates) -> Result<Vec<String>> {
    io::write_indicator_csv(&dir.join("Gamma_hat.csv"), &est.gamma_hat)?;
    io::write_matrix_csv(&dir.join("B_hat.csv"), &est.b_hat.b)?;
    io::write_matrix_csv(&dir.join("L_hat.csv"), &est.chol_hat.l)?;
    io::write_vector_csv(&dir.join("D_hat.csv"), &est.chol_hat.d)?;
    io::write_json(&dir.join("dag_hat.json"), &est.dag_hat)?;
    io::write_matrix_csv(&dir.join("Omega_hat.csv"), &est.omega_hat())?;
    Ok(names(&[
        "Gamma_hat.csv",
        "B_hat.csv",
        "L_hat.csv",
        "D_hat.csv",
        "dag_hat.json",
        "Omega_hat.csv",
    ]))
}

pub fn read_estimates(dir: &Path) -> Result<Estimates> {
    let gamma_hat = io::read_indicator_csv(&dir.join("Gamma_hat.csv"))?;
    let b = io::read_matrix_csv(&dir.join("B_hat.csv"))?;
    let l = io::read_matrix_csv(&dir.join("L_hat.csv"))?;
    let d = io::read_vector_csv(&dir.join("D_hat.csv"))?;
    Ok(Estimates {
        b_hat: SparseCoefState::from_parts(b, gamma_hat.clone())?,
        gamma_hat,
        dag_hat: io::read_json(&dir.join("dag_hat.json"))?,
        chol_hat: CholeskyPair::new(l, d)?,
    })
}

/// `simulate`: writes the bundle `{out}/{scenario}_{setting}_{seed}/`.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<PathBuf> {
    let spec = cfg.sim_spec();
    spec.validate()?;
    let (data, truth) = generate(&spec)?;
    let dir = cfg.out_dir().join(spec.bundle_name());
    write_bundle(&dir, &spec, &data, &truth)?;
    Ok(dir)
}

#[derive(Debug, Clone, Serialize)]
pub struct FitSummary {
    pub out: PathBuf,
    pub method: Method,
    pub secs_per_iteration: f64,
    pub draws: usize,
}

/// `fit`: runs a sampler on CSV inputs and writes chains, estimates, timing
/// and a manifest echoing the effective configuration.
pub fn cmd_fit(cfg: &RunConfig) -> Result<FitSummary> {
    let method = cfg.method()?;
    let (x_path, y_path) = cfg.data_paths()?;
    let data = read_data(&x_path, &y_path)?;
    match method {
        Method::Ess => cfg.ess_config(data.p(), data.q()).validate(&data)?,
        Method::Tes => cfg.tes_config(data.p(), data.q()).validate(&data)?,
    }
    let result = with_workers(cfg.workers, || fit(&data, method, cfg))??;

    let out = cfg.out_dir();
    let mut files = write_estimates(&out, &result.estimates)?;
    for (stem, chain) in &result.chains {
        let path = out.join(format!("{stem}.bin"));
        io::write_chain(&path, chain)?;
        files.push(format!("{stem}.bin"));
        files.push(format!("{stem}.json"));
        if cfg.export_csv.unwrap_or(false) {
            io::export_chain_csv(&out.join(format!("{stem}_draws.csv")), chain)?;
            files.push(format!("{stem}_draws.csv"));
        }
    }
    let timing = serde_json::json!({
        "secs_per_iteration": result.secs_per_iteration,
        "detail": result.timing,
    });
    io::write_json(&out.join("timing.json"), &timing)?;
    files.push("timing.json".into());

    let mut effective = result.config.clone();
    effective["x"] = serde_json::json!(x_path);
    effective["y"] = serde_json::json!(y_path);
    effective["x_sha256"] = serde_json::json!(io::file_sha256(&x_path)?);
    effective["y_sha256"] = serde_json::json!(io::file_sha256(&y_path)?);
    let mut manifest = Manifest::new("fit", cfg.seed(), effective);
    manifest.record_files(&out, &files)?;
    manifest.write(&out)?;
    Ok(FitSummary {
        out,
        method,
        secs_per_iteration: result.secs_per_iteration,
        draws: result.chains[0].1.len(),
    })
}

fn write_report(out: &Path, records: &[MetricRecord]) -> Result<Vec<TableRow>> {
    let rows = summarize(records);
    io::write_json(&out.join("metrics.json"), records)?;
    write_table_csv(&out.join("table.csv"), &rows)?;
    Ok(rows)
}

/// `evaluate`: scores an estimate directory against a simulated bundle.
pub fn cmd_evaluate(cfg: &RunConfig) -> Result<Vec<MetricRecord>> {
    let est_dir = cfg
        .estimates
        .clone()
        .ok_or_else(|| Error::Config("evaluate needs --estimates DIR".into()))?;
    let truth_dir = cfg
        .truth
        .clone()
        .or_else(|| cfg.data.clone())
        .ok_or_else(|| Error::Config("evaluate needs --truth DIR".into()))?;
    let (spec, truth) = read_truth(&truth_dir)?;
    let est = read_estimates(&est_dir)?;
    let method = match cfg.method {
        Some(m) => m.to_string(),
        None => io::read_json::<Manifest>(&est_dir.join("manifest.json"))
            .ok()
            .and_then(|m| m.config.get("method").and_then(|v| v.as_str()).map(String::from))
            .unwrap_or_else(|| "unknown".into()),
    };
    let label = RunLabel {
        scenario: spec.scenario,
        setting: spec.setting,
        method,
        replicate: cfg.replicate.unwrap_or(0),
    };
    let records = evaluate(&est, &truth, &label)?;
    let out = cfg.out_dir();
    write_report(&out, &records)?;
    Ok(records)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplicateOutcome {
    pub replicate: usize,
    pub seed: u64,
    pub secs_per_iteration: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplicateReport {
    pub outcomes: Vec<ReplicateOutcome>,
    pub records: Vec<MetricRecord>,
    pub table: Vec<TableRow>,
}

/// Generate, fit and evaluate one replicate. The replicate seed drives both
/// the simulation and the sampler.
pub fn run_replicate(cfg: &RunConfig, method: Method, index: usize) -> (ReplicateOutcome, Vec<MetricRecord>) {
    let seed = rng::replicate_seed(cfg.seed(), index as u64);
    let run = || -> Result<(f64, Vec<MetricRecord>)> {
        let spec = SimSpec { seed, ..cfg.sim_spec() };
        let (data, truth) = generate(&spec)?;
        let rep_cfg = RunConfig {
            seed: Some(seed),
            ..cfg.clone()
        };
        let result = fit(&data, method, &rep_cfg)?;
        let label = RunLabel {
            scenario: spec.scenario,
            setting: spec.setting,
            method: method.to_string(),
            replicate: index,
        };
        Ok((result.secs_per_iteration, evaluate(&result.estimates, &truth, &label)?))
    };
    match run() {
        Ok((secs, records)) => (
            ReplicateOutcome {
                replicate: index,
                seed,
                secs_per_iteration: Some(secs),
                error: None,
            },
            records,
        ),
        Err(e) => (
            ReplicateOutcome {
                replicate: index,
                seed,
                secs_per_iteration: None,
                error: Some(e.to_string()),
            },
            Vec::new(),
        ),
    }
}

/// Runs `count` replicates; failures are recorded without stopping the batch.
pub fn replicate(cfg: &RunConfig, method: Method, count: usize) -> Result<ReplicateReport> {
    cfg.sim_spec().validate()?;
    let results: Vec<_> = with_workers(cfg.workers, || {
        (0..count)
            .into_par_iter()
            .map(|i| run_replicate(cfg, method, i))
            .collect()
    })?;
    let mut outcomes = Vec::with_capacity(count);
    let mut records = Vec::new();
    for (outcome, recs) in results {
        outcomes.push(outcome);
        records.extend(recs);
    }
    let table = summarize(&records);
    Ok(ReplicateReport {
        outcomes,
        records,
        table,
    })
}

/// `replicate`: writes `replicates.json`, `metrics.json` and `table.csv`.
pub fn cmd_replicate(cfg: &RunConfig) -> Result<ReplicateReport> {
    let method = cfg.method()?;
    let report = replicate(cfg, method, cfg.replicates.unwrap_or(10))?;
    let out = cfg.out_dir();
    io::write_json(&out.join("replicates.json"), &report.outcomes)?;
    write_report(&out, &report.records)?;
    Ok(report)
}
