//! Catalog persistence: a snapshot file plus a journal of accepted commands.
//!
//! Every accepted [`CatalogCommand`] is appended to the journal and synced
//! before the change becomes visible. Every `compact_every` commands the
//! whole catalog is written to a fresh snapshot (temp file, sync, rename) and
//! the journal is cut back. Journal lines carry a sequence number, so a crash
//! between the rename and the cut only leaves lines that replay skips.

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use lava_core::catalog::{Catalog, CatalogCommand, CatalogError};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum JournalError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path} line {line}: {reason}")]
    Corrupt { path: PathBuf, line: usize, reason: String },
    #[error("journal entry {seq} no longer applies: {source}")]
    Replay { seq: u64, source: CatalogError },
}

#[derive(Serialize, Deserialize)]
struct Snapshot {
    seq: u64,
    catalog: Catalog,
}

#[derive(Serialize, Deserialize)]
struct Entry {
    seq: u64,
    command: CatalogCommand,
}

pub struct Journal {
    snapshot_path: PathBuf,
    journal_path: PathBuf,
    file: File,
    seq: u64,
    since_snapshot: u64,
    compact_every: u64,
}

fn io_error(path: &Path) -> impl FnOnce(io::Error) -> JournalError + '_ {
    move |source| JournalError::Io { path: path.into(), source }
}

impl Journal {
    /// Loads the catalog stored in `dir`, or a fresh one.
    pub fn open(dir: &Path, compact_every: u64) -> Result<(Self, Catalog), JournalError> {
        let snapshot_path = dir.join("catalog.json");
        let journal_path = dir.join("catalog.journal");
        let (mut seq, mut catalog) = match fs::read(&snapshot_path) {
            Ok(bytes) => {
                let snap: Snapshot = serde_json::from_slice(&bytes).map_err(|e| JournalError::Corrupt {
                    path: snapshot_path.clone(),
                    line: 1,
                    reason: e.to_string(),
                })?;
                (snap.seq, snap.catalog)
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => (0, Catalog::new()),
            Err(e) => return Err(io_error(&snapshot_path)(e)),
        };

        let mut since_snapshot = 0;
        let mut good_len = 0u64;
        if let Ok(file) = File::open(&journal_path) {
            let mut reader = BufReader::new(file);
            let mut buf = Vec::new();
            let mut line = 0;
            loop {
                buf.clear();
                let n = reader.read_until(b'\n', &mut buf).map_err(io_error(&journal_path))?;
                if n == 0 || buf.last() != Some(&b'\n') {
                    break;
                }
                line += 1;
                let entry: Entry = match serde_json::from_slice(&buf) {
                    Ok(entry) => entry,
                    Err(e) => {
                        if reader.fill_buf().map_err(io_error(&journal_path))?.is_empty() {
                            break;
                        }
                        return Err(JournalError::Corrupt { path: journal_path, line, reason: e.to_string() });
                    }
                };
                good_len += n as u64;
                if entry.seq <= seq {
                    continue;
                }
                if entry.seq != seq + 1 {
                    return Err(JournalError::Corrupt {
                        path: journal_path,
                        line,
                        reason: format!("expected entry {}, found {}", seq + 1, entry.seq),
                    });
                }
                catalog
                    .apply(entry.command)
                    .map_err(|source| JournalError::Replay { seq: entry.seq, source })?;
                seq = entry.seq;
                since_snapshot += 1;
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&journal_path)
            .map_err(io_error(&journal_path))?;
        if file.metadata().map_err(io_error(&journal_path))?.len() > good_len {
            tracing::warn!(path = %journal_path.display(), "truncating torn tail of catalog journal");
            file.set_len(good_len).map_err(io_error(&journal_path))?;
            file.sync_all().map_err(io_error(&journal_path))?;
        }
        Ok((
            Self {
                snapshot_path,
                journal_path,
                file,
                seq,
                since_snapshot,
                compact_every: compact_every.max(1),
            },
            catalog,
        ))
    }

    /// Records an accepted command. `after` is the catalog with the command
    /// applied; it is snapshotted when compaction is due.
    pub fn record(&mut self, command: &CatalogCommand, after: &Catalog) -> Result<(), JournalError> {
        #[derive(Serialize)]
        struct Borrowed<'a> {
            seq: u64,
            command: &'a CatalogCommand,
        }
        let mut line = serde_json::to_vec(&Borrowed { seq: self.seq + 1, command }).expect("commands serialize");
        line.push(b'\n');
        self.file.write_all(&line).map_err(io_error(&self.journal_path))?;
        self.file.sync_data().map_err(io_error(&self.journal_path))?;
        self.seq += 1;
        self.since_snapshot += 1;
        if self.since_snapshot >= self.compact_every {
            self.compact(after)?;
        }
        Ok(())
    }

    /// Writes a snapshot of `catalog` (which must reflect every recorded
    /// command) and empties the journal.
    pub fn compact(&mut self, catalog: &Catalog) -> Result<(), JournalError> {
        let tmp = self.snapshot_path.with_extension("json.tmp");
        let bytes = serde_json::to_vec(&Snapshot { seq: self.seq, catalog: catalog.clone() }).expect("catalog serializes");
        {
            let mut f = File::create(&tmp).map_err(io_error(&tmp))?;
            f.write_all(&bytes).map_err(io_error(&tmp))?;
            f.sync_all().map_err(io_error(&tmp))?;
        }
        fs::rename(&tmp, &self.snapshot_path).map_err(io_error(&self.snapshot_path))?;
        if let Some(dir) = self.snapshot_path.parent() {
            // Make the rename durable.
            if let Ok(d) = File::open(dir) {
                let _ = d.sync_all();
            }
        }
        self.file.set_len(0).map_err(io_error(&self.journal_path))?;
        self.file.sync_all().map_err(io_error(&self.journal_path))?;
        self.since_snapshot = 0;
        Ok(())
    }

    pub fn seq(&self) -> u64 {
        self.seq
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use lava_core::catalog::{Actor, CatalogOp};
    use lava_core::model::Timestamp;

    fn request(name: &str) -> CatalogCommand {
        CatalogCommand {
            actor: Actor::user("t1"),
            at: Timestamp::from_epoch_seconds(1_554_076_800).unwrap(),
            op: CatalogOp::RequestGoal { name: name.into(), description: String::new() },
        }
    }

    fn run(dir: &Path, compact_every: u64, names: &[&str]) -> Catalog {
        let (mut journal, mut catalog) = Journal::open(dir, compact_every).unwrap();
        for name in names {
            let cmd = request(name);
            catalog.apply(cmd.clone()).unwrap();
            journal.record(&cmd, &catalog).unwrap();
        }
        catalog
    }

    #[test]
    fn replay_restores_the_catalog() {
        for compact_every in [1, 2, 100] {
            let dir = tempfile::tempdir().unwrap();
            let first = run(dir.path(), compact_every, &["Reflection", "Awareness", "Mentoring"]);
            let (journal, reopened) = Journal::open(dir.path(), compact_every).unwrap();
            assert_eq!(reopened, first);
            assert_eq!(journal.seq(), 3);
            let more = run(dir.path(), compact_every, &["Feedback"]);
            let (_, again) = Journal::open(dir.path(), compact_every).unwrap();
            assert_eq!(again, more);
            assert_eq!(again.goals().count(), 9);
        }
    }

    #[test]
    fn stale_entries_after_a_snapshot_are_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let catalog = run(dir.path(), 100, &["Reflection", "Awareness"]);
        let journal_copy = fs::read(dir.path().join("catalog.journal")).unwrap();
        let (mut journal, _) = Journal::open(dir.path(), 100).unwrap();
        journal.compact(&catalog).unwrap();
        // As if the process died between writing the snapshot and cutting the journal.
        fs::write(dir.path().join("catalog.journal"), journal_copy).unwrap();
        let (_, reopened) = Journal::open(dir.path(), 100).unwrap();
        assert_eq!(reopened, catalog);
    }

    #[test]
    fn torn_journal_tail_is_dropped() {
        let dir = tempfile::tempdir().unwrap();
        let catalog = run(dir.path(), 100, &["Reflection"]);
        let path = dir.path().join("catalog.journal");
        let mut bytes = fs::read(&path).unwrap();
        bytes.extend_from_slice(br#"{"seq":2,"command":{"act"#);
        fs::write(&path, bytes).unwrap();
        let (_, reopened) = Journal::open(dir.path(), 100).unwrap();
        assert_eq!(reopened, catalog);
        let after = run(dir.path(), 100, &["Awareness"]);
        let (_, again) = Journal::open(dir.path(), 100).unwrap();
        assert_eq!(again, after);
    }
}
