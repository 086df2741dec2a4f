//! Dataset scoping, filtering and the privacy modes behind the editor's
//! Dataset and Filters steps.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use hmac::{Hmac, Mac};
use serde::{Deserialize, Serialize};
use sha2::Sha256;

use crate::model::{dataset_schema, event_row, from_parts_unchecked, DataTable, LearningEvent,
    Scalar, SchemaSet, Timestamp, BASE_COLUMNS};
use crate::store::{Dimension, EventStore};

/// Which events an indicator looks at. Every dimension needs at least one
/// selected value before the scope can be executed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetScope {
    pub sources: BTreeSet<String>,
    pub platforms: BTreeSet<String>,
    pub actions: BTreeSet<String>,
    pub categories: BTreeSet<String>,
}

impl DatasetScope {
    pub fn selection(&self, dimension: Dimension) -> &BTreeSet<String> {
        match dimension {
            Dimension::Source => &self.sources,
            Dimension::Platform => &self.platforms,
            Dimension::Action => &self.actions,
            Dimension::Category => &self.categories,
        }
    }

    pub fn validate(&self) -> Result<(), QueryError> {
        match Dimension::ALL
            .into_iter()
            .find(|&d| self.selection(d).is_empty())
        {
            Some(dimension) => Err(QueryError::EmptyScope(dimension)),
            None => Ok(()),
        }
    }

    /// True when the event falls in every dimension; an empty selection
    /// matches nothing.
    pub fn contains(&self, event: &LearningEvent) -> bool {
        Dimension::ALL
            .into_iter()
            .all(|d| self.selection(d).contains(d.of(event)))
    }
}

/// Whose rows an indicator sees, and whether user ids are pseudonymized.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrivacyMode {
    #[default]
    EveryoneAnonymized,
    OwnDataOnly,
    EveryoneExceptOwnAnonymized,
}

/// Accepts events whose attribute value is any of `values`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeFilter {
    pub attribute: String,
    pub values: BTreeSet<Scalar>,
}

impl AttributeFilter {
    pub fn new(attribute: impl Into<String>, values: impl IntoIterator<Item = Scalar>) -> Self {
        Self {
            attribute: attribute.into(),
            values: values.into_iter().collect(),
        }
    }

    fn accepts(&self, event: &LearningEvent) -> bool {
        event
            .attributes
            .get(&self.attribute)
            .is_some_and(|v| self.values.contains(v))
    }
}

/// Attribute filters are OR-ed within one attribute and AND-ed across
/// attributes; the time window is `[time_start, time_end)`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterSet {
    pub attribute_filters: Vec<AttributeFilter>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_start: Option<Timestamp>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_end: Option<Timestamp>,
    pub privacy_mode: PrivacyMode,
}

impl FilterSet {
    pub fn with_privacy(privacy_mode: PrivacyMode) -> Self {
        Self {
            privacy_mode,
            ..Self::default()
        }
    }

    pub fn validate(&self, scope: &DatasetScope, schemas: &SchemaSet) -> Result<(), QueryError> {
        if let (Some(start), Some(end)) = (self.time_start, self.time_end) {
            if start > end {
                return Err(QueryError::InvalidTimeRange);
            }
        }
        let common = schemas.common_attributes(&scope.categories);
        for filter in &self.attribute_filters {
            if !common.iter().any(|a| a.name == filter.attribute) {
                return Err(QueryError::AttributeNotCommon(filter.attribute.clone()));
            }
        }
        Ok(())
    }

    fn in_window(&self, event: &LearningEvent) -> bool {
        self.time_start.map_or(true, |start| event.timestamp >= start)
            && self.time_end.map_or(true, |end| event.timestamp < end)
    }

    fn accepts(&self, event: &LearningEvent) -> bool {
        self.in_window(event) && self.attribute_filters.iter().all(|f| f.accepts(event))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, thiserror::Error)]
#[serde(tag = "error", content = "detail", rename_all = "snake_case")]
pub enum QueryError {
    #[error("no {0} selected")]
    EmptyScope(Dimension),
    #[error("attribute {0:?} is not common to every selected category")]
    AttributeNotCommon(String),
    #[error("time filter starts after it ends")]
    InvalidTimeRange,
}

type HmacSha256 = Hmac<Sha256>;

/// Stable keyed pseudonyms: HMAC-SHA256 under a per-deployment secret,
/// truncated to 12 hex characters.
#[derive(Clone)]
pub struct Pseudonymizer {
    key: Vec<u8>,
}

impl core::fmt::Debug for Pseudonymizer {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str("Pseudonymizer(..)")
    }
}

impl Pseudonymizer {
    pub const TOKEN_LEN: usize = 12;

    pub fn new(secret: impl Into<Vec<u8>>) -> Self {
        Self { key: secret.into() }
    }

    pub fn token(&self, user_id: &str) -> String {
        let mut mac = HmacSha256::new_from_slice(&self.key).expect("HMAC accepts any key length");
        mac.update(user_id.as_bytes());
        let digest = mac.finalize().into_bytes();
        const HEX: &[u8; 16] = b"0123456789abcdef";
        let mut token = String::with_capacity(Self::TOKEN_LEN);
        for byte in digest.iter().take(Self::TOKEN_LEN / 2) {
            token.push(HEX[(byte >> 4) as usize] as char);
            token.push(HEX[(byte & 0x0f) as usize] as char);
        }
        token
    }
}

pub fn list_dimension_values(store: &EventStore, dimension: Dimension) -> &BTreeSet<String> {
    store.dimension_values(dimension)
}

/// Distinct stored values of `attribute` among events in the scope's
/// categories whose text form starts with `prefix` (case-insensitive).
///
/// Unselected source/platform/action dimensions do not restrict the search.
pub fn list_attribute_values(
    store: &EventStore,
    schemas: &SchemaSet,
    scope: &DatasetScope,
    attribute: &str,
    prefix: &str,
) -> Result<BTreeSet<Scalar>, QueryError> {
    if !schemas.is_common(&scope.categories, attribute) {
        return Err(QueryError::AttributeNotCommon(attribute.into()));
    }
    let prefix = prefix.to_lowercase();
    let restricts = |dimension: Dimension, event: &LearningEvent| {
        let selected = scope.selection(dimension);
        selected.is_empty() || selected.contains(dimension.of(event))
    };
    let mut values = BTreeSet::new();
    for event in store.events_in_categories(&scope.categories) {
        if !(restricts(Dimension::Source, event)
            && restricts(Dimension::Platform, event)
            && restricts(Dimension::Action, event))
        {
            continue;
        }
        let Some(value) = event.attributes.get(attribute) else {
            continue;
        };
        if values.contains(value) {
            continue;
        }
        if alloc::format!("{value}").to_lowercase().starts_with(&prefix) {
            values.insert(value.clone());
        }
    }
    Ok(values)
}

/// Runs a scope and filter set against the store on behalf of `requester`.
///
/// The result has the dataset schema of the scope's categories and keeps
/// ingestion order. Privacy is applied last: `OwnDataOnly` keeps only the
/// requester's rows with the real id, the other two modes pseudonymize the
/// User column, and `EveryoneExceptOwnAnonymized` drops the requester's rows.
pub fn query_dataset(
    store: &EventStore,
    schemas: &SchemaSet,
    pseudonymizer: &Pseudonymizer,
    scope: &DatasetScope,
    filters: &FilterSet,
    requester: &str,
) -> Result<DataTable, QueryError> {
    scope.validate()?;
    filters.validate(scope, schemas)?;
    let columns = dataset_schema(&scope.categories, schemas);
    let attributes: Vec<String> = columns[BASE_COLUMNS.len()..]
        .iter()
        .map(|c| c.name.clone())
        .collect();
    let mut tokens: BTreeMap<&str, String> = BTreeMap::new();
    let mut rows = Vec::new();
    for event in store.events_in_categories(&scope.categories) {
        if !scope.contains(event) || !filters.accepts(event) {
            continue;
        }
        let own = event.user_id == requester;
        let row = match filters.privacy_mode {
            PrivacyMode::OwnDataOnly if own => event_row(event, &attributes, &event.user_id),
            PrivacyMode::OwnDataOnly => continue,
            PrivacyMode::EveryoneExceptOwnAnonymized if own => continue,
            PrivacyMode::EveryoneAnonymized | PrivacyMode::EveryoneExceptOwnAnonymized => {
                let token = tokens
                    .entry(event.user_id.as_str())
                    .or_insert_with(|| pseudonymizer.token(&event.user_id));
                event_row(event, &attributes, token)
            }
        };
        rows.push(row);
    }
    Ok(from_parts_unchecked(columns, rows))
}
