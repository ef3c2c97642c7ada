//! Line-delimited record files.
//!
//! Every artifact this project writes (benchmarks, rankings, scores, event
//! logs) is UTF-8 with one JSON object per line and a trailing newline.
//! Blank lines are ignored on read.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

use crate::model::{validate_instance, ClaimInstance, RawInstance, ValidationErrors};

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {message}")]
    Malformed { path: PathBuf, line: usize, message: String },
    #[error("serialization failed: {0}")]
    Encode(#[from] serde_json::Error),
}

/// Serializes one record without a trailing newline.
pub fn to_line<T: Serialize>(record: &T) -> Result<String, serde_json::Error> {
    serde_json::to_string(record)
}

pub fn read_records<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, RecordError> {
    let text = fs::read_to_string(path).map_err(|source| RecordError::Io { path: path.to_path_buf(), source })?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(line).map_err(|e| RecordError::Malformed {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

/// Reads as many complete records as possible, stopping silently at the
/// first line that does not parse. Used when resuming after an interrupted
/// write, where only the final line can be torn.
pub fn read_records_lenient<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, RecordError> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(source) => return Err(RecordError::Io { path: path.to_path_buf(), source }),
    };
    let mut out = Vec::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(line) {
            Ok(r) => out.push(r),
            Err(_) => break,
        }
    }
    Ok(out)
}

/// Writes records to `path` via a temporary sibling file and a rename, so a
/// reader never observes a half-written file.
pub fn write_records<'a, T, I>(path: &Path, records: I) -> Result<(), RecordError>
where
    T: Serialize + 'a,
    I: IntoIterator<Item = &'a T>,
{
    let io_err = |source| RecordError::Io { path: path.to_path_buf(), source };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err)?;
    }
    let tmp = path.with_extension("tmp~");
    {
        let file = fs::File::create(&tmp).map_err(io_err)?;
        let mut w = BufWriter::new(file);
        for r in records {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n").map_err(io_err)?;
        }
        w.flush().map_err(io_err)?;
    }
    fs::rename(&tmp, path).map_err(io_err)
}

/// Appends records to `path`, creating it if needed.
pub fn append_records<'a, T, I>(path: &Path, records: I) -> Result<(), RecordError>
where
    T: Serialize + 'a,
    I: IntoIterator<Item = &'a T>,
{
    let io_err = |source| RecordError::Io { path: path.to_path_buf(), source };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err)?;
    }
    let file = fs::OpenOptions::new().create(true).append(true).open(path).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n").map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LineProblem {
    Malformed(String),
    Invalid(ValidationErrors),
    DuplicateId(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineError {
    pub line: usize,
    pub problem: LineProblem,
}

impl fmt::Display for LineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.problem {
            LineProblem::Malformed(m) => write!(f, "line {}: malformed record: {m}", self.line),
            LineProblem::Invalid(e) => write!(f, "line {}: invalid instance: {e}", self.line),
            LineProblem::DuplicateId(id) => write!(f, "line {}: duplicate instance id {id:?}", self.line),
        }
    }
}

#[derive(Debug, Error)]
pub enum BenchmarkError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}", render_lines(.0))]
    Lines(Vec<LineError>),
    #[error(transparent)]
    Write(#[from] RecordError),
}

impl BenchmarkError {
    /// Line numbers (1-based) of every rejected line.
    pub fn failed_lines(&self) -> Vec<usize> {
        match self {
            BenchmarkError::Lines(v) => v.iter().map(|e| e.line).collect(),
            _ => Vec::new(),
        }
    }
}

fn render_lines(v: &[LineError]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n")
}

/// Parses benchmark text, validating every line and reporting all problems.
pub fn parse_benchmark(text: &str) -> Result<Vec<ClaimInstance>, BenchmarkError> {
    let mut out = Vec::new();
    let mut errors = Vec::new();
    let mut ids = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawInstance = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(e) => {
                errors.push(LineError { line: line_no, problem: LineProblem::Malformed(e.to_string()) });
                continue;
            }
        };
        match validate_instance(raw) {
            Ok(inst) => {
                if !ids.insert(inst.id().to_string()) {
                    errors.push(LineError { line: line_no, problem: LineProblem::DuplicateId(inst.id().to_string()) });
                } else {
                    out.push(inst);
                }
            }
            Err(e) => errors.push(LineError { line: line_no, problem: LineProblem::Invalid(e) }),
        }
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(BenchmarkError::Lines(errors))
    }
}

pub fn read_benchmark(path: &Path) -> Result<Vec<ClaimInstance>, BenchmarkError> {
    let text = fs::read_to_string(path).map_err(|source| BenchmarkError::Io { path: path.to_path_buf(), source })?;
    parse_benchmark(&text)
}

pub fn write_benchmark(instances: &[ClaimInstance], path: &Path) -> Result<(), BenchmarkError> {
    let raws: Vec<RawInstance> = instances.iter().map(ClaimInstance::to_raw).collect();
    write_records(path, &raws)?;
    Ok(())
}

/// Canonical text of a benchmark, identical to what [`write_benchmark`]
/// puts on disk.
pub fn benchmark_to_string(instances: &[ClaimInstance]) -> String {
    let mut s = String::new();
    for inst in instances {
        s.push_str(&to_line(&inst.to_raw()).expect("raw instances always serialize"));
        s.push('\n');
    }
    s
}
