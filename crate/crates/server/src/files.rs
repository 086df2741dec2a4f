//! File adapters: event documents as JSON lines, or as a delimited table.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use lava_core::ingest::RawEvent;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileFormat {
    /// One JSON event document per line; blank lines are ignored.
    Lines,
    /// CSV with a header naming the wire fields; `attributes` holds a JSON
    /// object.
    Table,
}

impl FromStr for FileFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lines" => Ok(FileFormat::Lines),
            "table" => Ok(FileFormat::Table),
            other => Err(format!("unknown format {other:?} (expected lines or table)")),
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("cannot read {path}: {source}")]
pub struct UnreadableFile {
    pub path: PathBuf,
    pub source: io::Error,
}

/// Parses a file into batch items. Undecodable lines or rows become
/// [`RawEvent::Malformed`] so they are counted as rejections.
pub fn read_events(path: &Path, format: FileFormat) -> Result<Vec<RawEvent>, UnreadableFile> {
    let text = fs::read_to_string(path).map_err(|source| UnreadableFile { path: path.into(), source })?;
    Ok(match format {
        FileFormat::Lines => parse_lines(&text),
        FileFormat::Table => parse_table(&text),
    })
}

pub fn parse_lines(text: &str) -> Vec<RawEvent> {
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| match serde_json::from_str::<Value>(line) {
            Ok(doc) => RawEvent::Document(doc),
            Err(e) => RawEvent::Malformed { line: i + 1, reason: e.to_string() },
        })
        .collect()
}

const TABLE_FIELDS: [&str; 7] = ["id", "user", "timestamp", "source", "platform", "action", "category"];

pub fn parse_table(text: &str) -> Vec<RawEvent> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(text.as_bytes());
    let header = match reader.headers() {
        Ok(h) => h.clone(),
        Err(e) => return vec![RawEvent::Malformed { line: 1, reason: e.to_string() }],
    };
    reader
        .records()
        .map(|record| {
            let line = record
                .as_ref()
                .ok()
                .and_then(|r| r.position())
                .map_or(0, |p| p.line() as usize);
            let record = match record {
                Ok(r) => r,
                Err(e) => {
                    let line = e.position().map_or(0, |p| p.line() as usize);
                    return RawEvent::Malformed { line, reason: e.to_string() };
                }
            };
            if record.len() != header.len() {
                return RawEvent::Malformed {
                    line,
                    reason: format!("expected {} fields, found {}", header.len(), record.len()),
                };
            }
            let mut doc = Map::new();
            for (name, cell) in header.iter().zip(record.iter()) {
                if name == "attributes" {
                    if cell.trim().is_empty() {
                        continue;
                    }
                    match serde_json::from_str::<Value>(cell) {
                        Ok(attrs) => {
                            doc.insert(name.into(), attrs);
                        }
                        Err(e) => return RawEvent::Malformed { line, reason: format!("attributes: {e}") },
                    }
                } else if TABLE_FIELDS.contains(&name) && !cell.is_empty() {
                    doc.insert(name.into(), Value::String(cell.into()));
                }
            }
            RawEvent::Document(Value::Object(doc))
        })
        .collect()
}

/// Writes events as JSON lines.
pub fn write_lines(path: &Path, events: &[lava_core::model::LearningEvent]) -> io::Result<()> {
    let mut out = String::new();
    for event in events {
        out.push_str(&serde_json::to_string(event).expect("events serialize"));
        out.push('\n');
    }
    fs::write(path, out)
}
