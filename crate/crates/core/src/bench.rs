//! Batch solving and shifted-geometric-mean aggregation.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::kkt::ResidualReport;
use crate::lp_model::{read_problem, MpsFormat};
use crate::pdhg::{solve, SolverParams, Status};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("shifted geometric mean of an empty list")]
    Empty,
    #[error("times and solved flags differ in length ({0} vs {1})")]
    Length(usize, usize),
    #[error("shift must be nonnegative")]
    NegativeShift,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// `(∏(tᵢ + Δ))^{1/n} − Δ`, evaluated in log space. Unsolved entries count
/// as `time_limit`.
pub fn sgm(times: &[f64], delta: f64, time_limit: f64, solved: &[bool]) -> Result<f64, BenchError> {
    if times.is_empty() {
        return Err(BenchError::Empty);
    }
    if times.len() != solved.len() {
        return Err(BenchError::Length(times.len(), solved.len()));
    }
    if delta < 0.0 {
        return Err(BenchError::NegativeShift);
    }
    let log_sum: f64 = times
        .iter()
        .zip(solved)
        .map(|(&t, &ok)| (if ok { t } else { time_limit } + delta).ln())
        .sum();
    Ok((log_sum / times.len() as f64).exp() - delta)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecordStatus {
    Optimal,
    IterLimit,
    TimeLimit,
    Error,
}

impl From<Status> for RecordStatus {
    fn from(s: Status) -> Self {
        match s {
            Status::Optimal => RecordStatus::Optimal,
            Status::IterLimit => RecordStatus::IterLimit,
            Status::TimeLimit => RecordStatus::TimeLimit,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub instance: String,
    pub status: RecordStatus,
    /// Solve loop only; parsing and scaling are excluded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parse_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub setup_time: Option<f64>,
    pub iterations: u64,
    pub restarts: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residuals: Option<ResidualReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl BenchRecord {
    pub fn solved(&self) -> bool {
        self.status == RecordStatus::Optimal
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub tolerance: f64,
    pub delta: f64,
    pub time_limit: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sgm10: Option<f64>,
    pub solved_count: usize,
    pub records: Vec<BenchRecord>,
}

impl SuiteSummary {
    pub fn from_records(records: Vec<BenchRecord>, tolerance: f64, delta: f64, time_limit: f64) -> Self {
        let times: Vec<f64> = records.iter().map(|r| r.wall_time.unwrap_or(time_limit)).collect();
        let solved: Vec<bool> = records.iter().map(BenchRecord::solved).collect();
        SuiteSummary {
            tolerance,
            delta,
            time_limit,
            sgm10: sgm(&times, delta, time_limit, &solved).ok(),
            solved_count: solved.iter().filter(|s| **s).count(),
            records,
        }
    }

    /// Drops every wall-clock field so that repeated runs compare equal.
    pub fn without_timings(&self) -> SuiteSummary {
        let mut s = self.clone();
        s.sgm10 = None;
        for r in &mut s.records {
            r.wall_time = None;
            r.parse_time = None;
            r.setup_time = None;
        }
        s
    }

    pub fn to_json(&self) -> Result<String, BenchError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write_csv(&self, w: impl std::io::Write) -> Result<(), BenchError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "instance",
            "status",
            "wall_time",
            "iterations",
            "restarts",
            "rel_primal",
            "rel_dual",
            "rel_gap",
            "primal_obj",
        ])?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.records {
            let res = r.residuals.as_ref();
            out.write_record([
                r.instance.clone(),
                format!("{:?}", r.status),
                opt(r.wall_time),
                r.iterations.to_string(),
                r.restarts.to_string(),
                opt(res.map(|x| x.rel_primal)),
                opt(res.map(|x| x.rel_dual)),
                opt(res.map(|x| x.rel_gap)),
                opt(res.map(|x| x.primal_obj)),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SuiteOptions {
    pub delta: f64,
    pub workers: usize,
    pub format: MpsFormat,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { delta: 10.0, workers: 1, format: MpsFormat::Free }
    }
}

/// `.mps` and `.mps.gz` files in `dir`, sorted by name.
pub fn list_instances(dir: &Path) -> Result<Vec<PathBuf>, BenchError> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p.file_name().and_then(|s| s.to_str()).unwrap_or("").to_ascii_lowercase();
            p.is_file() && (name.ends_with(".mps") || name.ends_with(".mps.gz"))
        })
        .collect();
    files.sort();
    Ok(files)
}

pub fn run_instance(path: &Path, params: &SolverParams, format: MpsFormat) -> BenchRecord {
    let instance = path.file_name().and_then(|s| s.to_str()).unwrap_or("?").to_string();
    let clock = Instant::now();
    let problem = match read_problem(path, format) {
        Ok(p) => p,
        Err(e) => return error_record(instance, e.to_string()),
    };
    let parse_time = clock.elapsed().as_secs_f64();
    match solve(&problem, params) {
        Ok(r) => {
            log::info!("{instance}: {:?} after {} iterations in {:.3}s", r.status, r.iterations, r.wall_time);
            BenchRecord {
                instance,
                status: r.status.into(),
                wall_time: Some(r.wall_time),
                parse_time: Some(parse_time),
                setup_time: Some(r.setup_time),
                iterations: r.iterations,
                restarts: r.restarts,
                residuals: Some(r.report),
                message: None,
            }
        }
        Err(e) => error_record(instance, e.to_string()),
    }
}

fn error_record(instance: String, message: String) -> BenchRecord {
    log::warn!("{instance}: {message}");
    BenchRecord {
        instance,
        status: RecordStatus::Error,
        wall_time: None,
        parse_time: None,
        setup_time: None,
        iterations: 0,
        restarts: 0,
        residuals: None,
        message: Some(message),
    }
}

/// Solves every instance in `dir`. Failures become `Error` records.
///
/// With more than one worker, instances run concurrently and each solve uses
/// sequential kernels so that timings are not skewed by contention.
pub fn run_suite(dir: &Path, params: &SolverParams, opts: &SuiteOptions) -> Result<SuiteSummary, BenchError> {
    let files = list_instances(dir)?;
    let records = if opts.workers <= 1 {
        files.iter().map(|f| run_instance(f, params, opts.format)).collect()
    } else {
        run_parallel(&files, params, opts)
    };
    Ok(SuiteSummary::from_records(records, params.eps, opts.delta, params.time_limit))
}

#[cfg(feature = "parallel")]
fn run_parallel(files: &[PathBuf], params: &SolverParams, opts: &SuiteOptions) -> Vec<BenchRecord> {
    use rayon::prelude::*;
    let inner = SolverParams { exec: crate::linalg::Exec::Sequential, ..params.clone() };
    match rayon::ThreadPoolBuilder::new().num_threads(opts.workers).build() {
        Ok(pool) => pool.install(|| files.par_iter().map(|f| run_instance(f, &inner, opts.format)).collect()),
        Err(e) => {
            log::warn!("could not build worker pool ({e}); running sequentially");
            files.iter().map(|f| run_instance(f, params, opts.format)).collect()
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn run_parallel(files: &[PathBuf], params: &SolverParams, opts: &SuiteOptions) -> Vec<BenchRecord> {
    files.iter().map(|f| run_instance(f, params, opts.format)).collect()
}
