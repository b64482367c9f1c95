//! CSV ingestion and emission for subject-level trial data.
//!
//! The input schema is a UTF-8 CSV with header
//! `cluster_id,subject_id,arm,door_rank`: `arm` is 0 (control) or 1
//! (treatment) and `door_rank` is a positive integer (1 = most desirable).

use door_core::{validate_trial, KernelError, TrialData};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing column `{0}` (expected header cluster_id,subject_id,arm,door_rank)")]
    MissingColumn(&'static str),
    #[error("line {line}: field `{field}` has invalid value `{value}` ({reason})")]
    BadField {
        line: u64,
        field: &'static str,
        value: String,
        reason: String,
    },
    #[error("line {line}: duplicate subject `{subject}` in cluster `{cluster}`")]
    DuplicateSubject {
        line: u64,
        cluster: String,
        subject: String,
    },
    #[error("invalid trial data: {0}")]
    Validation(#[from] KernelError),
}

/// A parsed trial plus input provenance.
#[derive(Debug)]
pub struct LoadedTrial {
    pub trial: TrialData,
    pub sha256: String,
    pub n_rows: usize,
}

pub fn read_trial_csv(path: &Path, k_override: Option<usize>) -> Result<LoadedTrial, IoError> {
    let bytes = fs::read(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    let sha256 = hex_digest(&bytes);
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(bytes.as_slice());

    let headers = reader.headers()?.clone();
    let col = |name: &'static str| -> Result<usize, IoError> {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or(IoError::MissingColumn(name))
    };
    let c_cluster = col("cluster_id")?;
    let c_subject = col("subject_id")?;
    let c_arm = col("arm")?;
    let c_rank = col("door_rank")?;

    let mut records: Vec<(String, i64, i64)> = Vec::new();
    let mut seen: std::collections::HashSet<(String, String)> = std::collections::HashSet::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let get = |idx: usize, field: &'static str| -> Result<&str, IoError> {
            row.get(idx).ok_or(IoError::BadField {
                line,
                field,
                value: String::new(),
                reason: "missing field".to_string(),
            })
        };
        let cluster = get(c_cluster, "cluster_id")?.to_string();
        let subject = get(c_subject, "subject_id")?.to_string();
        let arm_raw = get(c_arm, "arm")?;
        let arm: i64 = arm_raw.parse().map_err(|_| IoError::BadField {
            line,
            field: "arm",
            value: arm_raw.to_string(),
            reason: "expected 0 or 1".to_string(),
        })?;
        if arm != 0 && arm != 1 {
            return Err(IoError::BadField {
                line,
                field: "arm",
                value: arm_raw.to_string(),
                reason: "expected 0 or 1".to_string(),
            });
        }
        let rank_raw = get(c_rank, "door_rank")?;
        let rank: i64 = rank_raw.parse().map_err(|_| IoError::BadField {
            line,
            field: "door_rank",
            value: rank_raw.to_string(),
            reason: "expected a positive integer".to_string(),
        })?;
        if rank < 1 {
            return Err(IoError::BadField {
                line,
                field: "door_rank",
                value: rank_raw.to_string(),
                reason: "DOOR ranks start at 1".to_string(),
            });
        }
        if !seen.insert((cluster.clone(), subject.clone())) {
            return Err(IoError::DuplicateSubject {
                line,
                cluster,
                subject,
            });
        }
        records.push((cluster, arm, rank));
    }

    let trial = validate_trial(&records, k_override)?;
    Ok(LoadedTrial {
        trial,
        sha256,
        n_rows: records.len(),
    })
}

/// Writes a trial back out in the input schema (treatment subjects first
/// within each cluster, then control), with generated subject ids.
pub fn write_trial_csv(trial: &TrialData, path: &Path) -> Result<(), IoError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["cluster_id", "subject_id", "arm", "door_rank"])
        .map_err(IoError::Csv)?;
    for cluster in trial.clusters() {
        let mut subject = 0usize;
        for r in &cluster.ranks_treatment {
            subject += 1;
            writer
                .write_record([
                    cluster.id.as_str(),
                    &format!("s{subject:04}"),
                    "1",
                    &r.value().to_string(),
                ])
                .map_err(IoError::Csv)?;
        }
        for r in &cluster.ranks_control {
            subject += 1;
            writer
                .write_record([
                    cluster.id.as_str(),
                    &format!("s{subject:04}"),
                    "0",
                    &r.value().to_string(),
                ])
                .map_err(IoError::Csv)?;
        }
    }
    let bytes = writer.into_inner().expect("csv writer over Vec");
    fs::write(path, bytes).map_err(|source| IoError::Write {
        path: path.display().to_string(),
        source,
    })
}

pub fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
