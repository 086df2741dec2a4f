use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{Column, ColumnType};

/// A typed slot that a table column can be bound to: an analytics method
/// input or a chart role.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputSpec {
    pub name: String,
    #[serde(rename = "type")]
    pub column_type: ColumnType,
    pub required: bool,
}

impl InputSpec {
    pub fn required(name: impl Into<String>, column_type: ColumnType) -> Self {
        Self {
            name: name.into(),
            column_type,
            required: true,
        }
    }

    pub fn optional(name: impl Into<String>, column_type: ColumnType) -> Self {
        Self {
            name: name.into(),
            column_type,
            required: false,
        }
    }
}

/// Input (or role) name to table column name. Each input is bound at most once.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MappingSet {
    bindings: BTreeMap<String, String>,
}

impl MappingSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(mut self, input: impl Into<String>, column: impl Into<String>) -> Self {
        self.bindings.insert(input.into(), column.into());
        self
    }

    pub fn insert(&mut self, input: impl Into<String>, column: impl Into<String>) -> Option<String> {
        self.bindings.insert(input.into(), column.into())
    }

    pub fn remove(&mut self, input: &str) -> Option<String> {
        self.bindings.remove(input)
    }

    pub fn get(&self, input: &str) -> Option<&str> {
        self.bindings.get(input).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.bindings.iter().map(|(i, c)| (i.as_str(), c.as_str()))
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }
}

impl<I: Into<String>, C: Into<String>> FromIterator<(I, C)> for MappingSet {
    fn from_iter<T: IntoIterator<Item = (I, C)>>(iter: T) -> Self {
        Self {
            bindings: iter.into_iter().map(|(i, c)| (i.into(), c.into())).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, thiserror::Error)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum MappingViolation {
    #[error("required input {input:?} is not mapped")]
    MissingRequiredInput { input: String },
    #[error("input {input:?} expects {expected} but column {column:?} is {found}")]
    TypeMismatch {
        input: String,
        column: String,
        expected: ColumnType,
        found: ColumnType,
    },
    #[error("input {input:?} is mapped to unknown column {column:?}")]
    UnknownColumn { input: String, column: String },
    #[error("no input named {input:?}")]
    UnknownInput { input: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct MappingReport {
    pub violations: Vec<MappingViolation>,
}

impl fmt::Display for MappingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl core::error::Error for MappingReport {}

/// Ok iff every required input is bound, every bound input exists, and every
/// binding points at an existing column of the input's type.
pub fn validate_mapping(
    inputs: &[InputSpec],
    columns: &[Column],
    mappings: &MappingSet,
) -> Result<(), MappingReport> {
    let mut violations = Vec::new();
    for input in inputs {
        match mappings.get(&input.name) {
            None if input.required => violations.push(MappingViolation::MissingRequiredInput {
                input: input.name.clone(),
            }),
            None => {}
            Some(column_name) => match columns.iter().find(|c| c.name == column_name) {
                None => violations.push(MappingViolation::UnknownColumn {
                    input: input.name.clone(),
                    column: column_name.into(),
                }),
                Some(column) if column.column_type != input.column_type => {
                    violations.push(MappingViolation::TypeMismatch {
                        input: input.name.clone(),
                        column: column.name.clone(),
                        expected: input.column_type,
                        found: column.column_type,
                    })
                }
                Some(_) => {}
            },
        }
    }
    for (input, _) in mappings.iter() {
        if !inputs.iter().any(|i| i.name == input) {
            violations.push(MappingViolation::UnknownInput {
                input: input.into(),
            });
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(MappingReport { violations })
    }
}

/// Deterministic greedy suggestion.
///
/// Required inputs are handled before optional ones. Within each group, an
/// input whose name and type match an unused column is bound to it, then an
/// input is bound when exactly one unused column has its type. Required
/// inputs still unbound after that take the first unused column of their
/// type. So the suggestion passes [`validate_mapping`] whenever the columns
/// can cover the required inputs at all, and optional inputs are only bound
/// when the choice is obvious.
pub fn suggest_mappings(inputs: &[InputSpec], columns: &[Column]) -> MappingSet {
    let mut used: BTreeSet<&str> = BTreeSet::new();
    let mut suggestion = MappingSet::new();
    for required in [true, false] {
        let group = || inputs.iter().filter(move |i| i.required == required);
        for input in group() {
            if let Some(column) = columns.iter().find(|c| {
                c.name == input.name && c.column_type == input.column_type && !used.contains(c.name.as_str())
            }) {
                used.insert(&column.name);
                suggestion.insert(input.name.clone(), column.name.clone());
            }
        }
        for pick_first in [false, true] {
            if pick_first && !required {
                break;
            }
            for input in group() {
                if suggestion.get(&input.name).is_some() {
                    continue;
                }
                let mut candidates = columns
                    .iter()
                    .filter(|c| c.column_type == input.column_type && !used.contains(c.name.as_str()));
                let chosen = match (candidates.next(), candidates.next()) {
                    (Some(only), None) => Some(only),
                    (Some(first), Some(_)) if pick_first => Some(first),
                    _ => None,
                };
                if let Some(column) = chosen {
                    used.insert(&column.name);
                    suggestion.insert(input.name.clone(), column.name.clone());
                }
            }
        }
    }
    suggestion
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use ColumnType::{Numeric, Text};

    fn per_week_inputs() -> Vec<InputSpec> {
        vec![
            InputSpec::required("Items to count", Text),
            InputSpec::optional("User", Text),
            InputSpec::required("Timestamp", Numeric),
        ]
    }

    fn columns(spec: &[(&str, ColumnType)]) -> Vec<Column> {
        spec.iter().map(|(n, t)| Column::new(*n, *t)).collect()
    }

    #[test]
    fn timestamp_and_category_binding_is_valid() {
        let cols = columns(&[("Timestamp", Numeric), ("Category", Text)]);
        let m = MappingSet::new()
            .bind("Timestamp", "Timestamp")
            .bind("Items to count", "Category");
        assert_eq!(validate_mapping(&per_week_inputs(), &cols, &m), Ok(()));
    }

    #[test]
    fn unbound_required_input() {
        let cols = columns(&[("Timestamp", Numeric)]);
        let m = MappingSet::new().bind("Timestamp", "Timestamp");
        let report = validate_mapping(&per_week_inputs(), &cols, &m).unwrap_err();
        assert_eq!(
            report.violations,
            vec![MappingViolation::MissingRequiredInput {
                input: "Items to count".into()
            }]
        );
    }

    #[test]
    fn text_input_on_numeric_column() {
        let cols = columns(&[("Timestamp", Numeric), ("Size (in Bytes)", Numeric)]);
        let m = MappingSet::new()
            .bind("Timestamp", "Timestamp")
            .bind("Items to count", "Size (in Bytes)");
        let report = validate_mapping(&per_week_inputs(), &cols, &m).unwrap_err();
        assert!(matches!(
            report.violations.as_slice(),
            [MappingViolation::TypeMismatch { input, found: Numeric, .. }] if input == "Items to count"
        ));
    }

    #[test]
    fn unknown_column_and_input() {
        let cols = columns(&[("Timestamp", Numeric), ("Category", Text)]);
        let m = MappingSet::new()
            .bind("Timestamp", "Time")
            .bind("Items to count", "Category")
            .bind("Colour", "Category");
        let report = validate_mapping(&per_week_inputs(), &cols, &m).unwrap_err();
        assert_eq!(report.violations.len(), 2);
        assert!(matches!(report.violations[0], MappingViolation::UnknownColumn { .. }));
        assert!(matches!(report.violations[1], MappingViolation::UnknownInput { .. }));
    }

    #[test]
    fn suggestion_binds_obvious_matches_only() {
        let cols = columns(&[("Timestamp", Numeric), ("Name", Text), ("Source", Text), ("Action", Text)]);
        let suggestion = suggest_mappings(&per_week_inputs(), &cols);
        assert_eq!(suggestion.get("Timestamp"), Some("Timestamp"));
        // Required and ambiguous: first Text column. Optional and ambiguous: unbound.
        assert_eq!(suggestion.get("Items to count"), Some("Name"));
        assert_eq!(suggestion.get("User"), None);
        assert_eq!(validate_mapping(&per_week_inputs(), &cols, &suggestion), Ok(()));

        let single = columns(&[("Timestamp", Numeric), ("Name", Text)]);
        let suggestion = suggest_mappings(&per_week_inputs(), &single);
        assert_eq!(suggestion.get("Items to count"), Some("Name"));
        // The only Text column is taken, so the optional User stays unbound.
        assert_eq!(suggestion.get("User"), None);
        assert_eq!(validate_mapping(&per_week_inputs(), &single, &suggestion), Ok(()));
    }
}
