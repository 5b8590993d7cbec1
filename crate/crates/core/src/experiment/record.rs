use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::bridge::PolicyLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Simulated,
    Human,
}

/// One participant's answer to one problem.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChoiceRecord {
    pub problem_id: String,
    pub subject_id: String,
    pub cohort_id: String,
    /// Entry into each of the three phases, ms since the Unix epoch.
    pub phase_timestamps: [u64; 3],
    pub chosen: PolicyLabel,
    /// Time from entering the choice phase to submitting.
    pub latency_ms: u64,
    pub source: Source,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub occupation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub education: Option<String>,
}

impl ChoiceRecord {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let [a, b, c] = self.phase_timestamps;
        if !(a < b && b < c) {
            return Err(ExperimentError::InvalidRecord(format!(
                "phase timestamps of {} are not strictly increasing",
                self.subject_id
            )));
        }
        Ok(())
    }
}

/// Append-only JSON Lines log of choice records.
///
/// Each append writes one complete line with a single `write` call and syncs
/// it to disk before returning. Opening the log drops a trailing partial line
/// left by an interrupted write, so a record is either fully present or absent.
#[derive(Debug)]
pub struct RecordLog {
    path: PathBuf,
    file: File,
}

impl RecordLog {
    pub fn open(path: impl AsRef<Path>) -> Result<Self, ExperimentError> {
        let path = path.as_ref().to_path_buf();
        let mut file = OpenOptions::new().read(true).append(true).create(true).open(&path).map_err(io_err)?;
        let mut contents = Vec::new();
        file.read_to_end(&mut contents).map_err(io_err)?;
        if !contents.is_empty() && contents.last() != Some(&b'\n') {
            let keep = contents.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
            file.set_len(keep as u64).map_err(io_err)?;
            file.sync_all().map_err(io_err)?;
        }
        file.seek(SeekFrom::End(0)).map_err(io_err)?;
        Ok(Self { path, file })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&mut self, record: &ChoiceRecord) -> Result<(), ExperimentError> {
        record.validate()?;
        let mut line = serde_json::to_vec(record).map_err(|e| ExperimentError::InvalidRecord(e.to_string()))?;
        line.push(b'\n');
        self.file.write_all(&line).map_err(io_err)?;
        self.file.sync_data().map_err(io_err)
    }
}

fn io_err(e: std::io::Error) -> ExperimentError {
    ExperimentError::Io(e.to_string())
}

/// Parses a JSON Lines stream. Blank lines are skipped and an unterminated
/// final line (an interrupted append) is ignored.
pub fn parse_records<R: Read>(reader: R) -> Result<Vec<ChoiceRecord>, ExperimentError> {
    let mut reader = BufReader::new(reader);
    let mut out = Vec::new();
    let mut line = String::new();
    let mut number = 0;
    loop {
        line.clear();
        if reader.read_line(&mut line).map_err(io_err)? == 0 {
            break;
        }
        number += 1;
        if !line.ends_with('\n') {
            break;
        }
        if line.trim().is_empty() {
            continue;
        }
        let record: ChoiceRecord = serde_json::from_str(&line)
            .map_err(|e| ExperimentError::MalformedLine { line: number, message: e.to_string() })?;
        record.validate()?;
        out.push(record);
    }
    Ok(out)
}

pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<ChoiceRecord>, ExperimentError> {
    parse_records(File::open(path).map_err(io_err)?)
}

/// Serializes records as JSON Lines.
pub fn to_jsonl(records: &[ChoiceRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}
