//! Append-only in-memory event store with the indexes the query engine uses.
//!
//! The store never mutates or removes an event. Persisting it is the caller's
//! business; on startup the indexes are rebuilt from the event log with
//! [`EventStore::from_events`].

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::LearningEvent;

/// The dataset dimensions offered by the editor's pickers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dimension {
    Source,
    Platform,
    Action,
    Category,
}

impl Dimension {
    pub const ALL: [Dimension; 4] = [
        Dimension::Source,
        Dimension::Platform,
        Dimension::Action,
        Dimension::Category,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Dimension::Source => "source",
            Dimension::Platform => "platform",
            Dimension::Action => "action",
            Dimension::Category => "category",
        }
    }

    pub fn of(self, event: &LearningEvent) -> &str {
        match self {
            Dimension::Source => &event.source,
            Dimension::Platform => &event.platform,
            Dimension::Action => &event.action,
            Dimension::Category => &event.category,
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown dimension {0:?}")]
pub struct UnknownDimension(pub String);

impl FromStr for Dimension {
    type Err = UnknownDimension;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Dimension::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| UnknownDimension(s.into()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("event id {0:?} is already stored")]
pub struct DuplicateEvent(pub String);

#[derive(Debug, Clone, Default)]
pub struct EventStore {
    events: Vec<LearningEvent>,
    by_id: BTreeMap<String, usize>,
    by_category: BTreeMap<String, Vec<usize>>,
    dimension_values: [BTreeSet<String>; 4],
}

impl EventStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Rebuilds a store (and its indexes) from events in ingestion order.
    pub fn from_events(
        events: impl IntoIterator<Item = LearningEvent>,
    ) -> Result<Self, DuplicateEvent> {
        let mut store = Self::new();
        for event in events {
            if store.contains(&event.event_id) {
                return Err(DuplicateEvent(event.event_id));
            }
            store.push(event);
        }
        Ok(store)
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// All events in ingestion order.
    pub fn events(&self) -> &[LearningEvent] {
        &self.events
    }

    pub fn contains(&self, event_id: &str) -> bool {
        self.by_id.contains_key(event_id)
    }

    pub fn get(&self, event_id: &str) -> Option<&LearningEvent> {
        self.by_id.get(event_id).map(|&i| &self.events[i])
    }

    /// Appends a batch atomically: either every event is stored or, when one
    /// of them repeats a stored (or in-batch) id, none is.
    pub fn commit(&mut self, batch: Vec<LearningEvent>) -> Result<(), DuplicateEvent> {
        let mut fresh = BTreeSet::new();
        for event in &batch {
            if self.contains(&event.event_id) || !fresh.insert(event.event_id.as_str()) {
                return Err(DuplicateEvent(event.event_id.clone()));
            }
        }
        for event in batch {
            self.push(event);
        }
        Ok(())
    }

    fn push(&mut self, event: LearningEvent) {
        let index = self.events.len();
        self.by_id.insert(event.event_id.clone(), index);
        self.by_category
            .entry(event.category.clone())
            .or_default()
            .push(index);
        for (slot, dimension) in self.dimension_values.iter_mut().zip(Dimension::ALL) {
            let value = dimension.of(&event);
            if !slot.contains(value) {
                slot.insert(value.into());
            }
        }
        self.events.push(event);
    }

    /// Distinct values of one dimension, lexicographically sorted.
    pub fn dimension_values(&self, dimension: Dimension) -> &BTreeSet<String> {
        &self.dimension_values[dimension as usize]
    }

    /// Events of the given categories, in ingestion order.
    pub fn events_in_categories<'a>(
        &'a self,
        categories: &BTreeSet<String>,
    ) -> impl Iterator<Item = &'a LearningEvent> + 'a {
        let mut indexes: Vec<usize> = categories
            .iter()
            .filter_map(|c| self.by_category.get(c))
            .flatten()
            .copied()
            .collect();
        indexes.sort_unstable();
        indexes.into_iter().map(move |i| &self.events[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Timestamp;
    use alloc::string::ToString;
    use alloc::vec;

    fn event(id: &str, source: &str, category: &str) -> LearningEvent {
        LearningEvent {
            event_id: id.into(),
            user_id: "u1".into(),
            timestamp: Timestamp::from_epoch_seconds(0).unwrap(),
            source: source.into(),
            platform: "web".into(),
            action: "view".into(),
            category: category.into(),
            attributes: BTreeMap::new(),
        }
    }

    fn values(store: &EventStore, d: Dimension) -> Vec<&str> {
        store.dimension_values(d).iter().map(String::as_str).collect()
    }

    #[test]
    fn dimension_values_are_sorted_and_grow_as_sets() {
        let mut store = EventStore::new();
        assert!(store.dimension_values(Dimension::Source).is_empty());
        store
            .commit(vec![event("a", "edX", "Wiki"), event("b", "Moodle", "Wiki")])
            .unwrap();
        assert_eq!(values(&store, Dimension::Source), vec!["Moodle", "edX"]);
        store.commit(vec![event("c", "LMS-X", "Wiki")]).unwrap();
        assert_eq!(values(&store, Dimension::Source), vec!["LMS-X", "Moodle", "edX"]);
        assert_eq!(values(&store, Dimension::Category), vec!["Wiki"]);
    }

    #[test]
    fn commit_is_all_or_nothing() {
        let mut store = EventStore::new();
        store.commit(vec![event("a", "edX", "Wiki")]).unwrap();
        let err = store
            .commit(vec![event("b", "edX", "Wiki"), event("a", "edX", "Wiki")])
            .unwrap_err();
        assert_eq!(err, DuplicateEvent("a".into()));
        assert_eq!(store.len(), 1);
        assert!(store
            .commit(vec![event("c", "edX", "Wiki"), event("c", "edX", "Wiki")])
            .is_err());
        assert_eq!(store.len(), 1);
    }

    #[test]
    fn category_index_preserves_ingestion_order() {
        let store = EventStore::from_events(vec![
            event("1", "s", "A"),
            event("2", "s", "B"),
            event("3", "s", "A"),
            event("4", "s", "C"),
        ])
        .unwrap();
        let cats: BTreeSet<String> = ["A", "C"].iter().map(|s| s.to_string()).collect();
        let ids: Vec<&str> = store
            .events_in_categories(&cats)
            .map(|e| e.event_id.as_str())
            .collect();
        assert_eq!(ids, vec!["1", "3", "4"]);
    }

    #[test]
    fn dimension_names_parse() {
        assert_eq!("platform".parse::<Dimension>().unwrap(), Dimension::Platform);
        assert!("colour".parse::<Dimension>().is_err());
    }
}
