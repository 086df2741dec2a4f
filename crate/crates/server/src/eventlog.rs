//! Append-only event log: one JSON line per committed batch.
//!
//! A batch is acknowledged only after its line has been written and synced,
//! so after a crash the log holds a prefix of the acknowledged batches plus
//! at most one torn line at the end. Opening the log drops that line.

use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use lava_core::model::LearningEvent;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum LogError {
    #[error("event log {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("event log {path} is corrupt at line {line}: {reason}")]
    Corrupt { path: PathBuf, line: usize, reason: String },
}

#[derive(Serialize, Deserialize)]
struct BatchLine {
    seq: u64,
    events: Vec<LearningEvent>,
}

pub struct EventLog {
    path: PathBuf,
    file: File,
    next_seq: u64,
}

impl EventLog {
    /// Opens (or creates) the log and returns it with every stored event in
    /// commit order.
    pub fn open(path: impl Into<PathBuf>) -> Result<(Self, Vec<LearningEvent>), LogError> {
        let path = path.into();
        let io_err = |source| LogError::Io { path: path.clone(), source };
        let mut file = OpenOptions::new()
            .create(true)
            .read(true)
            .append(true)
            .open(&path)
            .map_err(io_err)?;
        let (events, batches, good_len) = read_batches(&path, &file)?;
        let len = file.metadata().map_err(io_err)?.len();
        if good_len < len {
            tracing::warn!(path = %path.display(), dropped = len - good_len, "truncating torn tail of event log");
            file.set_len(good_len).map_err(io_err)?;
            file.sync_all().map_err(io_err)?;
        }
        file.seek(SeekFrom::End(0)).map_err(io_err)?;
        Ok((
            Self {
                path,
                file,
                next_seq: batches + 1,
            },
            events,
        ))
    }

    /// Writes one batch and syncs it to disk.
    pub fn append(&mut self, events: &[LearningEvent]) -> Result<(), LogError> {
        #[derive(Serialize)]
        struct Borrowed<'a> {
            seq: u64,
            events: &'a [LearningEvent],
        }
        let mut line = serde_json::to_vec(&Borrowed { seq: self.next_seq, events })
            .expect("events always serialize");
        line.push(b'\n');
        let io_err = |source| LogError::Io { path: self.path.clone(), source };
        self.file.write_all(&line).map_err(io_err)?;
        self.file.sync_data().map_err(io_err)?;
        self.next_seq += 1;
        Ok(())
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

/// Reads complete batch lines. Returns the events, the number of batches and
/// the byte length of the valid prefix.
fn read_batches(path: &Path, file: &File) -> Result<(Vec<LearningEvent>, u64, u64), LogError> {
    let mut reader = BufReader::new(file);
    let mut events = Vec::new();
    let mut batches = 0u64;
    let mut good_len = 0u64;
    let mut buf = Vec::new();
    let mut line_no = 0;
    loop {
        buf.clear();
        let n = reader
            .read_until(b'\n', &mut buf)
            .map_err(|source| LogError::Io { path: path.into(), source })?;
        if n == 0 {
            break;
        }
        line_no += 1;
        // A line without its newline is a write cut short.
        if buf.last() != Some(&b'\n') {
            break;
        }
        let batch = match serde_json::from_slice::<BatchLine>(&buf) {
            Ok(batch) => batch,
            Err(e) => {
                // Tolerated on the last line only.
                let mut rest = Vec::new();
                reader
                    .read_to_end(&mut rest)
                    .map_err(|source| LogError::Io { path: path.into(), source })?;
                if rest.is_empty() {
                    break;
                }
                return Err(LogError::Corrupt {
                    path: path.into(),
                    line: line_no,
                    reason: e.to_string(),
                });
            }
        };
        if batch.seq != batches + 1 {
            return Err(LogError::Corrupt {
                path: path.into(),
                line: line_no,
                reason: format!("expected batch {}, found {}", batches + 1, batch.seq),
            });
        }
        batches += 1;
        good_len += n as u64;
        events.extend(batch.events);
    }
    Ok((events, batches, good_len))
}
