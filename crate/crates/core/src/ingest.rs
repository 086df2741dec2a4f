//! Adapter-side ingestion: parse, validate, de-duplicate, then commit.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::Serialize;
use serde_json::Value;

use crate::model::{validate_event, EventReport, LearningEvent, SchemaSet};
use crate::store::EventStore;

/// One item of an incoming batch.
#[derive(Debug, Clone, PartialEq)]
pub enum RawEvent {
    /// A parsed wire document (not yet validated).
    Document(Value),
    /// A source line that could not be decoded at all.
    Malformed { line: usize, reason: String },
}

impl From<Value> for RawEvent {
    fn from(value: Value) -> Self {
        RawEvent::Document(value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Rejection {
    Invalid { violations: EventReport },
    Duplicate { event_id: String },
    MalformedLine { line: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ItemRejection {
    pub index: usize,
    pub error: Rejection,
}

/// Outcome of one batch; `accepted + rejected` always equals the batch size.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IngestReport {
    pub accepted: usize,
    pub rejected: usize,
    pub rejections: Vec<ItemRejection>,
}

impl IngestReport {
    fn reject(&mut self, index: usize, error: Rejection) {
        self.rejected += 1;
        self.rejections.push(ItemRejection { index, error });
    }
}

/// A validated batch that has not been committed yet.
#[derive(Debug, Clone)]
pub struct PreparedBatch {
    pub events: Vec<LearningEvent>,
    pub report: IngestReport,
}

/// Parses and validates a batch against `store` without changing it.
///
/// Events whose id is already stored, or repeats an earlier item of the same
/// batch, are rejected as duplicates.
pub fn prepare_batch(
    store: &EventStore,
    schemas: &SchemaSet,
    batch: impl IntoIterator<Item = RawEvent>,
) -> PreparedBatch {
    let mut report = IngestReport::default();
    let mut events = Vec::new();
    let mut seen = BTreeSet::new();
    for (index, raw) in batch.into_iter().enumerate() {
        let doc = match raw {
            RawEvent::Document(doc) => doc,
            RawEvent::Malformed { line, reason } => {
                report.reject(index, Rejection::MalformedLine { line, reason });
                continue;
            }
        };
        let event = match LearningEvent::from_document(&doc)
            .and_then(|event| validate_event(event, schemas))
        {
            Ok(event) => event,
            Err(violations) => {
                report.reject(index, Rejection::Invalid { violations });
                continue;
            }
        };
        if store.contains(&event.event_id) || seen.contains(&event.event_id) {
            report.reject(
                index,
                Rejection::Duplicate {
                    event_id: event.event_id,
                },
            );
            continue;
        }
        seen.insert(event.event_id.clone());
        report.accepted += 1;
        events.push(event);
    }
    PreparedBatch { events, report }
}

/// Validates and appends a batch, returning the per-item report.
pub fn ingest_batch(
    store: &mut EventStore,
    schemas: &SchemaSet,
    batch: impl IntoIterator<Item = RawEvent>,
) -> IngestReport {
    let prepared = prepare_batch(store, schemas, batch);
    store
        .commit(prepared.events)
        .expect("prepared batches contain no duplicates");
    prepared.report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::EventViolation;
    use alloc::format;
    use alloc::vec;
    use serde_json::json;

    fn doc(id: &str, attributes: Value) -> RawEvent {
        RawEvent::Document(json!({
            "id": id,
            "user": "u1",
            "timestamp": "2019-01-01T10:00:00Z",
            "source": "Moodle",
            "platform": "web",
            "action": "submit",
            "category": "Assignments",
            "attributes": attributes,
        }))
    }

    #[test]
    fn two_valid_one_mismatched() {
        let schemas = SchemaSet::lcdm_defaults();
        let mut store = EventStore::new();
        let report = ingest_batch(
            &mut store,
            &schemas,
            vec![
                doc("a", json!({"Total Marks": 10})),
                doc("b", json!({"Total Marks": "ten"})),
                doc("c", json!({})),
            ],
        );
        assert_eq!((report.accepted, report.rejected), (2, 1));
        assert_eq!(report.rejections[0].index, 1);
        assert_eq!(
            report.rejections[0].error,
            Rejection::Invalid {
                violations: EventReport {
                    violations: vec![EventViolation::AttributeTypeMismatch("Total Marks".into())]
                }
            }
        );
        assert_eq!(store.len(), 2);
    }

    #[test]
    fn empty_batch() {
        let mut store = EventStore::new();
        let report = ingest_batch(&mut store, &SchemaSet::lcdm_defaults(), vec![]);
        assert_eq!(report, IngestReport::default());
    }

    #[test]
    fn duplicates_are_rejected_and_ingest_is_idempotent() {
        let schemas = SchemaSet::lcdm_defaults();
        let mut store = EventStore::new();
        let batch: Vec<RawEvent> = (0..5).map(|i| doc(&format!("e{i}"), json!({}))).collect();
        let first = ingest_batch(&mut store, &schemas, batch.clone());
        assert_eq!(first.accepted, 5);
        let snapshot: Vec<LearningEvent> = store.events().to_vec();
        let second = ingest_batch(&mut store, &schemas, batch);
        assert_eq!((second.accepted, second.rejected), (0, 5));
        assert!(matches!(second.rejections[0].error, Rejection::Duplicate { .. }));
        assert_eq!(store.events(), snapshot.as_slice());

        let within = ingest_batch(&mut store, &schemas, vec![doc("x", json!({})), doc("x", json!({}))]);
        assert_eq!((within.accepted, within.rejected), (1, 1));
    }

    #[test]
    fn malformed_lines_count_as_rejections() {
        let mut store = EventStore::new();
        let report = ingest_batch(
            &mut store,
            &SchemaSet::lcdm_defaults(),
            vec![
                doc("a", json!({})),
                RawEvent::Malformed { line: 2, reason: "expected value".into() },
            ],
        );
        assert_eq!((report.accepted, report.rejected), (1, 1));
        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(json["rejections"][0]["error"]["kind"], "malformed_line");
        assert_eq!(json["rejections"][0]["error"]["line"], 2);
    }
}
