//! File formats: JSON documents, JSON-lines trajectory records, CSV tables.

use crate::error::{LabError, Result};
use crate::lab::TrajectoryDocument;
use serde::{Deserialize, Serialize};
use snls_core::dynamics::{HitTimes, Status};
use snls_core::ground_state::GroundState;
use snls_core::observables::Observables;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let file = File::create(&path).map_err(|e| LabError::io(&path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(|e| LabError::io(&path, e))?;
    w.flush().map_err(|e| LabError::io(&path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: impl AsRef<Path>) -> Result<T> {
    let text = std::fs::read_to_string(&path).map_err(|e| LabError::io(&path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// One line of a trajectory record file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RecordLine {
    Sample(Observables),
    Summary(Box<RecordSummary>),
}

/// Terminal object of a trajectory record file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordSummary {
    pub schema_version: u32,
    pub config_hash: String,
    pub name: String,
    pub index: u64,
    pub seed: u64,
    pub status: Status,
    pub hits: HitTimes,
    pub initial: Observables,
    pub checkpoint_samples: Vec<Option<Observables>>,
    pub mass_contained: Option<bool>,
    pub final_time: f64,
    pub accepted_steps: u64,
    pub rejected_steps: u64,
    pub min_step: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bracket: Option<snls_core::dynamics::BlowupBracket>,
    pub notes: Vec<String>,
}

/// Writes the samples, one per line, followed by the summary object.
pub fn write_trajectory_jsonl(path: impl AsRef<Path>, doc: &TrajectoryDocument) -> Result<()> {
    let file = File::create(&path).map_err(|e| LabError::io(&path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| LabError::io(&path, e);
    for s in &doc.result.samples {
        serde_json::to_writer(&mut w, &RecordLine::Sample(*s))?;
        w.write_all(b"\n").map_err(io)?;
    }
    let r = &doc.result;
    let summary = RecordSummary {
        schema_version: doc.schema_version,
        config_hash: doc.config_hash.clone(),
        name: doc.name.clone(),
        index: doc.index,
        seed: doc.seed,
        status: r.status.clone(),
        hits: r.hits.clone(),
        initial: r.initial,
        checkpoint_samples: r.checkpoint_samples.clone(),
        mass_contained: r.mass_contained,
        final_time: r.final_time,
        accepted_steps: r.accepted_steps,
        rejected_steps: r.rejected_steps,
        min_step: r.min_step,
        bracket: doc.bracket,
        notes: doc.notes.clone(),
    };
    serde_json::to_writer(&mut w, &RecordLine::Summary(Box::new(summary)))?;
    w.write_all(b"\n").map_err(io)?;
    w.flush().map_err(io)
}

pub fn read_trajectory_jsonl(path: impl AsRef<Path>) -> Result<(Vec<Observables>, RecordSummary)> {
    let file = File::open(&path).map_err(|e| LabError::io(&path, e))?;
    let mut samples = Vec::new();
    let mut summary = None;
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| LabError::io(&path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(&line)? {
            RecordLine::Sample(s) => samples.push(s),
            RecordLine::Summary(s) => summary = Some(*s),
        }
    }
    let summary = summary.ok_or_else(|| LabError::Runtime("record file has no summary line".into()))?;
    Ok((samples, summary))
}

pub fn write_samples_csv(path: impl AsRef<Path>, samples: &[Observables]) -> Result<()> {
    let mut w = csv::Writer::from_path(&path)?;
    for s in samples {
        w.serialize(s)?;
    }
    w.flush().map_err(|e| LabError::io(&path, e))
}

#[derive(Serialize)]
struct ProfileRow {
    r: f64,
    q: f64,
}

/// Samples `Q(r)` on `[0, r_max]` with spacing `dr`.
pub fn write_profile_csv(path: impl AsRef<Path>, gs: &GroundState, r_max: f64, dr: f64) -> Result<()> {
    let mut w = csv::Writer::from_path(&path)?;
    let n = (r_max / dr).round() as usize;
    for i in 0..=n {
        let r = i as f64 * dr;
        w.serialize(ProfileRow { r, q: gs.radial_value(r) })?;
    }
    w.flush().map_err(|e| LabError::io(&path, e))
}
