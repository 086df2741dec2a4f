use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::event::LearningEvent;
use super::scalar::{ColumnType, Scalar};
use super::schema::SchemaSet;

pub const EVENT_ID: &str = "Event Id";
pub const USER: &str = "User";
pub const TIMESTAMP: &str = "Timestamp";
pub const SOURCE: &str = "Source";
pub const PLATFORM: &str = "Platform";
pub const ACTION: &str = "Action";
pub const CATEGORY: &str = "Category";

/// Fixed leading columns of every dataset table, in order.
pub const BASE_COLUMNS: [(&str, ColumnType); 7] = [
    (EVENT_ID, ColumnType::Text),
    (USER, ColumnType::Text),
    (TIMESTAMP, ColumnType::Numeric),
    (SOURCE, ColumnType::Text),
    (PLATFORM, ColumnType::Text),
    (ACTION, ColumnType::Text),
    (CATEGORY, ColumnType::Text),
];

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    #[serde(rename = "type")]
    pub column_type: ColumnType,
}

impl Column {
    pub fn new(name: impl Into<String>, column_type: ColumnType) -> Self {
        Self {
            name: name.into(),
            column_type,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TableError {
    #[error("duplicate column {0:?}")]
    DuplicateColumn(String),
    #[error("row {row} has {found} cells, expected {expected}")]
    Arity { row: usize, expected: usize, found: usize },
    #[error("row {row}: cell in column {column:?} does not match its {expected} type")]
    CellType {
        row: usize,
        column: String,
        expected: ColumnType,
    },
}

/// A typed, row-oriented table.
///
/// Column names are unique, every row has one cell per column and every cell
/// either matches its column type or is [`Scalar::Missing`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTable")]
pub struct DataTable {
    columns: Vec<Column>,
    rows: Vec<Vec<Scalar>>,
}

#[derive(Deserialize)]
struct RawTable {
    columns: Vec<Column>,
    #[serde(default)]
    rows: Vec<Vec<Scalar>>,
}

impl TryFrom<RawTable> for DataTable {
    type Error = TableError;

    fn try_from(raw: RawTable) -> Result<Self, Self::Error> {
        let mut table = DataTable::new(raw.columns)?;
        for row in raw.rows {
            table.push_row(row)?;
        }
        Ok(table)
    }
}

impl DataTable {
    pub fn new(columns: Vec<Column>) -> Result<Self, TableError> {
        let mut seen = BTreeSet::new();
        for column in &columns {
            if !seen.insert(column.name.as_str()) {
                return Err(TableError::DuplicateColumn(column.name.clone()));
            }
        }
        Ok(Self {
            columns,
            rows: Vec::new(),
        })
    }

    pub fn push_row(&mut self, row: Vec<Scalar>) -> Result<(), TableError> {
        let index = self.rows.len();
        if row.len() != self.columns.len() {
            return Err(TableError::Arity {
                row: index,
                expected: self.columns.len(),
                found: row.len(),
            });
        }
        for (cell, column) in row.iter().zip(&self.columns) {
            if !cell.fits(column.column_type) {
                return Err(TableError::CellType {
                    row: index,
                    column: column.name.clone(),
                    expected: column.column_type,
                });
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Scalar>] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<Vec<Scalar>> {
        self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    /// Cells of one column, top to bottom.
    pub fn values(&self, index: usize) -> impl Iterator<Item = &Scalar> + '_ {
        self.rows.iter().map(move |row| &row[index])
    }
}

pub fn base_columns() -> Vec<Column> {
    BASE_COLUMNS
        .iter()
        .map(|(name, ty)| Column::new(*name, *ty))
        .collect()
}

/// Columns of the dataset table for a category selection: the base columns
/// followed by the attributes common to every selected category.
pub fn dataset_schema(categories: &BTreeSet<String>, schemas: &SchemaSet) -> Vec<Column> {
    let mut columns = base_columns();
    columns.extend(
        schemas
            .common_attributes(categories)
            .into_iter()
            .map(|a| Column::new(a.name, a.column_type)),
    );
    columns
}

/// Flattens events into a dataset table.
///
/// The schema depends only on `categories`; events lacking a common attribute
/// get [`Scalar::Missing`] in that column. Row order follows input order.
pub fn events_to_table<'a>(
    events: impl IntoIterator<Item = &'a LearningEvent>,
    categories: &BTreeSet<String>,
    schemas: &SchemaSet,
) -> DataTable {
    let columns = dataset_schema(categories, schemas);
    let attribute_names: Vec<String> = columns[BASE_COLUMNS.len()..]
        .iter()
        .map(|c| c.name.clone())
        .collect();
    let rows = events
        .into_iter()
        .map(|event| event_row(event, &attribute_names, &event.user_id))
        .collect();
    DataTable { columns, rows }
}

/// One dataset row; `user` replaces the event's user id (for pseudonymization).
pub(crate) fn event_row(event: &LearningEvent, attributes: &[String], user: &str) -> Vec<Scalar> {
    let mut row = Vec::with_capacity(BASE_COLUMNS.len() + attributes.len());
    row.push(Scalar::Text(event.event_id.clone()));
    row.push(Scalar::Text(user.to_string()));
    row.push(Scalar::Numeric(event.timestamp.epoch_seconds() as f64));
    row.push(Scalar::Text(event.source.clone()));
    row.push(Scalar::Text(event.platform.clone()));
    row.push(Scalar::Text(event.action.clone()));
    row.push(Scalar::Text(event.category.clone()));
    for name in attributes {
        row.push(event.attributes.get(name).cloned().unwrap_or(Scalar::Missing));
    }
    row
}

pub(crate) fn from_parts_unchecked(columns: Vec<Column>, rows: Vec<Vec<Scalar>>) -> DataTable {
    debug_assert!(rows.iter().all(|r| r.len() == columns.len()));
    DataTable { columns, rows }
}
