//! Append-only event log, one JSON record per line.
//!
//! ```text
//! {"seq":1,"kind":"task_created","payload":{...task...}}
//! {"seq":2,"kind":"submission_added","payload":{...submission...}}
//! {"seq":3,"kind":"task_closed","payload":{"task_id":"task-1","closed_at":1700000000000}}
//! ```
//!
//! Sequence numbers start at 1 and increase by one per record. A final line
//! without a trailing newline is a torn write and is dropped on replay.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CollectError, Result};
use crate::model::{Submission, Task};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum Event {
    TaskCreated(Task),
    SubmissionAdded(Submission),
    TaskClosed { task_id: String, closed_at: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRecord {
    pub seq: u64,
    #[serde(flatten)]
    pub event: Event,
}

pub struct EventLog {
    path: PathBuf,
    file: File,
    next_seq: u64,
}

impl EventLog {
    /// Opens (creating if needed) the log at `path` and returns it with the
    /// records already on disk.
    pub fn open(path: impl AsRef<Path>) -> Result<(Self, Vec<EventRecord>)> {
        let path = path.as_ref().to_path_buf();
        let records = if path.exists() { replay(&path)? } else { Vec::new() };
        if path.exists() {
            truncate_torn_tail(&path)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        let next_seq = records.last().map_or(1, |r| r.seq + 1);
        Ok((Self { path, file, next_seq }, records))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&mut self, event: Event) -> Result<EventRecord> {
        let record = EventRecord {
            seq: self.next_seq,
            event,
        };
        let mut line = serde_json::to_vec(&record).map_err(|e| CollectError::Internal(e.to_string()))?;
        line.push(b'\n');
        self.file.write_all(&line)?;
        self.file.sync_data()?;
        self.next_seq += 1;
        Ok(record)
    }
}

/// Reads every complete record of the log at `path`.
pub fn replay(path: &Path) -> Result<Vec<EventRecord>> {
    let data = std::fs::read(path)?;
    let display = path.display().to_string();
    let mut lines: Vec<&[u8]> = data.split(|&b| b == b'\n').collect();
    // The chunk after the last newline is empty for a clean log and a torn
    // write otherwise.
    if lines.pop().is_some_and(|tail| !tail.is_empty()) {
        log::warn!("{display}: dropping torn final record");
    }
    let mut records: Vec<EventRecord> = Vec::with_capacity(lines.len());
    for (i, line) in lines.into_iter().enumerate() {
        if line.iter().all(u8::is_ascii_whitespace) {
            continue;
        }
        let line_no = i + 1;
        let record: EventRecord = serde_json::from_slice(line).map_err(|e| CollectError::CorruptLog {
            path: display.clone(),
            line: line_no,
            message: e.to_string(),
        })?;
        let expected = records.last().map_or(1, |r| r.seq + 1);
        if record.seq != expected {
            return Err(CollectError::CorruptLog {
                path: display,
                line: line_no,
                message: format!("sequence {} where {expected} was expected", record.seq),
            });
        }
        records.push(record);
    }
    Ok(records)
}

fn truncate_torn_tail(path: &Path) -> Result<()> {
    let data = std::fs::read(path)?;
    if data.is_empty() || data.last() == Some(&b'\n') {
        return Ok(());
    }
    let keep = data.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
    let file = OpenOptions::new().write(true).open(path)?;
    file.set_len(keep as u64)?;
    file.sync_data()?;
    Ok(())
}
