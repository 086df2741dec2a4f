//! The learning-context event model and the typed tables that flow between
//! the filter, analysis and visualization stages.

mod event;
mod scalar;
mod schema;
mod table;
mod time;

pub use event::{validate_event, EventReport, EventViolation, LearningEvent};
pub use scalar::{ColumnType, Scalar};
pub use schema::{AttributeDef, CategorySchema, SchemaError, SchemaSet};
pub use table::{
    base_columns, dataset_schema, events_to_table, Column, DataTable, TableError, ACTION,
    BASE_COLUMNS, CATEGORY, EVENT_ID, PLATFORM, SOURCE, TIMESTAMP, USER,
};
pub use time::{iso_week_label, next_iso_week, parse_iso_week, Timestamp};

pub(crate) use table::{event_row, from_parts_unchecked};
