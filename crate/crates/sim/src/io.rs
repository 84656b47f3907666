//! JSON inputs and CSV outputs.
//!
//! Floats are written with Rust's shortest round-trip formatting, so parsing
//! a CSV back recovers every value exactly. All files are UTF-8 with LF line
//! endings.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rissec_core::ao::AoResult;
use rissec_core::bcd::BcdEvent;
use rissec_core::conic::SolveStatus;
use rissec_core::sca::ScaOutcome;
use rissec_core::{SchemeKind, SystemConfig};
use serde::Deserialize;

use crate::experiment::ExperimentConfig;
use crate::harness::TrialRecord;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("no records")]
    NoRecords,
    #[error("empty trace")]
    EmptyTrace,
    #[error("{path}: {msg}")]
    Invalid { path: PathBuf, msg: String },
}

pub const RECORD_HEADER: [&str; 9] = [
    "seed",
    "scheme",
    "sweep_value",
    "secrecy_rate",
    "user_rate",
    "eve_rate",
    "iterations",
    "converged",
    "warnings",
];

fn writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>, IoError> {
    let file = BufWriter::new(File::create(path)?);
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file))
}

/// Writes the main results table.
pub fn write_records<W: Write>(records: &[TrialRecord], out: W) -> Result<(), IoError> {
    if records.is_empty() {
        return Err(IoError::NoRecords);
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(RECORD_HEADER)?;
    for r in records {
        w.write_record([
            r.seed.to_string(),
            r.scheme.name().to_string(),
            r.sweep_value.to_string(),
            r.secrecy_rate.to_string(),
            r.user_rate.to_string(),
            r.eve_rate.to_string(),
            r.iterations.to_string(),
            r.converged.to_string(),
            r.warnings.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Sidecar path for wall times: `results.csv` → `results.timing.csv`.
pub fn timing_path(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.timing.csv"))
}

/// Writes `path` plus the wall-time sidecar next to it.
pub fn emit_csv(records: &[TrialRecord], path: &Path) -> Result<(), IoError> {
    if records.is_empty() {
        return Err(IoError::NoRecords);
    }
    write_records(records, BufWriter::new(File::create(path)?))?;
    let mut w = writer(&timing_path(path))?;
    w.write_record(["seed", "scheme", "sweep_value", "wall_ms"])?;
    for r in records {
        w.write_record([
            r.seed.to_string(),
            r.scheme.name().to_string(),
            r.sweep_value.to_string(),
            r.wall_ms.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One parsed row of the results table.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct CsvRecord {
    pub seed: u64,
    pub scheme: String,
    pub sweep_value: f64,
    pub secrecy_rate: f64,
    pub user_rate: f64,
    pub eve_rate: f64,
    pub iterations: usize,
    pub converged: bool,
    pub warnings: String,
}

pub fn read_records(path: &Path) -> Result<Vec<CsvRecord>, IoError> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<Vec<CsvRecord>, _>>()?)
}

pub fn scheme_from_name(name: &str) -> Option<SchemeKind> {
    SchemeKind::ALL.into_iter().find(|k| k.name() == name)
}

/// `iteration,secrecy_rate`, iteration 0 being the initial point.
pub fn emit_convergence_trace(result: &AoResult, path: &Path) -> Result<(), IoError> {
    if result.trace.is_empty() {
        return Err(IoError::EmptyTrace);
    }
    let mut w = writer(path)?;
    w.write_record(["iteration", "secrecy_rate"])?;
    for (i, v) in result.trace.iter().enumerate() {
        w.write_record([i.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn status_name(s: SolveStatus) -> &'static str {
    match s {
        SolveStatus::Optimal => "optimal",
        SolveStatus::MaxIterations => "max-iterations",
        SolveStatus::Infeasible => "infeasible",
        SolveStatus::Unbounded => "unbounded",
    }
}

/// `iteration,objective,power,status` of one SCA run.
pub fn emit_sca_trace(out: &ScaOutcome, path: &Path) -> Result<(), IoError> {
    if out.trace.is_empty() {
        return Err(IoError::EmptyTrace);
    }
    let mut w = writer(path)?;
    w.write_record(["iteration", "objective", "power", "status"])?;
    for s in &out.trace {
        w.write_record([
            s.iteration.to_string(),
            s.objective.to_string(),
            s.power.to_string(),
            status_name(s.status).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `sweep,element,phi,secrecy_rate` of one BCD run.
pub fn emit_bcd_trace(trace: &[BcdEvent], path: &Path) -> Result<(), IoError> {
    if trace.is_empty() {
        return Err(IoError::EmptyTrace);
    }
    let mut w = writer(path)?;
    w.write_record(["sweep", "element", "phi", "secrecy_rate"])?;
    for e in trace {
        w.write_record([
            e.sweep.to_string(),
            e.element.to_string(),
            e.phi.to_string(),
            e.secrecy.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, IoError> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|source| IoError::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads and validates a campaign description.
pub fn load_experiment(path: &Path) -> Result<ExperimentConfig, IoError> {
    let exp: ExperimentConfig = read_json(path)?;
    exp.validate().map_err(|e| IoError::Invalid {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })?;
    Ok(exp)
}

/// Reads and validates a system configuration.
pub fn load_system_config(path: &Path) -> Result<SystemConfig, IoError> {
    let cfg: SystemConfig = read_json(path)?;
    rissec_core::config::validate_config(&cfg).map_err(|errs| IoError::Invalid {
        path: path.to_path_buf(),
        msg: errs.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "),
    })?;
    Ok(cfg)
}
