//! Learning-analytics indicator engine.
//!
//! The crate is `no_std` (it needs `alloc`) and holds everything that does not
//! touch the outside world:
//!
//! * [`model`]: learning events, category attribute schemas, typed tables.
//! * [`ingest`]: batch validation and the duplicate policy.
//! * [`store`] and [`query`]: the in-memory event store, dataset scoping,
//!   attribute/time filters and the three privacy modes.
//! * [`methods`]: the typed analytics method registry and input mapping.
//! * [`indicator`]: basic, composite and multi-level indicator execution.
//! * [`chart`] and [`irc`]: chart specifications and embed snippets.
//! * [`catalog`]: the goal / question / indicator catalog state machine.
//!
//! Persistence, HTTP and the command line live in the `lava-server` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod catalog;
pub mod chart;
pub mod indicator;
pub mod ingest;
pub mod irc;
pub mod methods;
pub mod model;
pub mod query;
pub mod store;

pub use catalog::{
    Actor, Catalog, CatalogCommand, CatalogError, CatalogOp, CatalogOutcome, Goal, IndicatorRecord,
    Question,
};
pub use irc::{generate_irc, IrcError, IrcTarget};
pub use chart::{ChartChoice, ChartRegistry, ChartSpec, ChartType};
pub use indicator::{
    BasicIndicatorSpec, CompositeIndicatorSpec, Engine, IndicatorError, IndicatorKind,
    IndicatorRun, IndicatorSpec, MultiLevelIndicatorSpec, PartRef,
};
pub use ingest::{ingest_batch, prepare_batch, IngestReport, RawEvent};
pub use methods::{AnalyticsMethodDescriptor, MappingSet, MethodError, MethodRegistry};
pub use model::{
    events_to_table, validate_event, CategorySchema, Column, ColumnType, DataTable,
    LearningEvent, Scalar, SchemaSet, Timestamp,
};
pub use query::{DatasetScope, FilterSet, PrivacyMode, Pseudonymizer, QueryError};
pub use store::{Dimension, EventStore};
