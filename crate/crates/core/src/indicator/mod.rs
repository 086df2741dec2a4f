//! Execution of basic, composite and multi-level indicators.
//!
//! Every error is labeled with the pipeline stage that failed and, for
//! composite and multi-level indicators, the part it came from.

mod merge;
mod spec;

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::Serialize;

use crate::chart::{render_chart, ChartError, ChartRegistry, ChartSpec};
use crate::methods::{AnalyticsMethodDescriptor, MethodError, MethodRegistry};
use crate::model::{dataset_schema, from_parts_unchecked, Column, ColumnType, DataTable, Scalar, SchemaSet};
use crate::query::{query_dataset, Pseudonymizer, QueryError};
use crate::store::EventStore;

pub use merge::{inner_join, joined_columns, merge_key, JoinPart};
pub use spec::{
    check_composable, BasicIndicatorSpec, Composability, CompositeIndicatorSpec, IndicatorKind,
    IndicatorSpec, MultiLevelIndicatorSpec, NoParts, PartRef, PartResolver,
};

/// Name of the tag column composite indicators put in front of the shared
/// method's outputs.
pub const INDICATOR_COLUMN: &str = "Indicator";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Dataset,
    Filters,
    Analysis,
    Composition,
    Merge,
    SecondLevel,
    Visualization,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Dataset => "dataset",
            Stage::Filters => "filters",
            Stage::Analysis => "analysis",
            Stage::Composition => "composition",
            Stage::Merge => "merge",
            Stage::SecondLevel => "second-level",
            Stage::Visualization => "visualization",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, thiserror::Error)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum IndicatorErrorKind {
    #[error(transparent)]
    Query(QueryError),
    #[error(transparent)]
    Method(MethodError),
    #[error(transparent)]
    Chart(ChartError),
    #[error("no saved basic indicator {0:?}")]
    UnknownPart(String),
    #[error("needs at least two parts, got {0}")]
    TooFewParts(usize),
    #[error("parts must share one analytics method: expected {expected:?}, found {found:?}")]
    MethodMismatch { expected: String, found: String },
    #[error("part name {0:?} is used twice")]
    DuplicatePartName(String),
    #[error("no output column carries merge attribute {0:?}")]
    MergeAttributeMissing(String),
    #[error("merge attribute {attribute:?} is {found} here but {expected} in the first part")]
    MergeTypeMismatch {
        attribute: String,
        expected: ColumnType,
        found: ColumnType,
    },
    #[error("column name {0:?} would appear twice")]
    ColumnClash(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndicatorError {
    pub stage: Stage,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub part: Option<String>,
    pub error: IndicatorErrorKind,
}

impl IndicatorError {
    fn new(stage: Stage, part: Option<&str>, error: IndicatorErrorKind) -> Self {
        Self {
            stage,
            part: part.map(String::from),
            error,
        }
    }
}

impl fmt::Display for IndicatorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} stage", self.stage)?;
        if let Some(part) = &self.part {
            write!(f, " of part {part:?}")?;
        }
        write!(f, ": {}", self.error)
    }
}

impl core::error::Error for IndicatorError {}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "warning", rename_all = "snake_case")]
pub enum Warning {
    /// The first-level results share no merge key; the second level was not run.
    JoinEmpty,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageTiming {
    pub stage: Stage,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub part: Option<String>,
    pub micros: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartResult {
    pub name: String,
    pub table: DataTable,
}

/// Outcome of running one indicator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndicatorRun {
    pub analyzed: DataTable,
    pub chart: ChartSpec,
    /// First-level results of composite and multi-level indicators.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub parts: Vec<PartResult>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<Warning>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub timings: Vec<StageTiming>,
}

/// Source of monotonic microseconds for per-stage timings.
pub trait Clock {
    fn now_micros(&self) -> u64;
}

static NO_PARTS: NoParts = NoParts;

/// Executes indicators against one store snapshot.
#[derive(Clone, Copy)]
pub struct Engine<'a> {
    pub store: &'a EventStore,
    pub schemas: &'a SchemaSet,
    pub methods: &'a MethodRegistry,
    pub charts: &'a ChartRegistry,
    pub pseudonymizer: &'a Pseudonymizer,
    pub parts: &'a dyn PartResolver,
    pub clock: Option<&'a dyn Clock>,
}

struct Timer<'e> {
    clock: Option<&'e dyn Clock>,
    timings: Vec<StageTiming>,
}

impl Timer<'_> {
    fn run<T>(&mut self, stage: Stage, part: Option<&str>, f: impl FnOnce() -> T) -> T {
        let Some(clock) = self.clock else {
            return f();
        };
        let start = clock.now_micros();
        let out = f();
        self.timings.push(StageTiming {
            stage,
            part: part.map(String::from),
            micros: clock.now_micros().saturating_sub(start),
        });
        out
    }
}

fn query_stage(error: &QueryError) -> Stage {
    match error {
        QueryError::EmptyScope(_) => Stage::Dataset,
        QueryError::AttributeNotCommon(_) | QueryError::InvalidTimeRange => Stage::Filters,
    }
}

impl<'a> Engine<'a> {
    pub fn new(
        store: &'a EventStore,
        schemas: &'a SchemaSet,
        methods: &'a MethodRegistry,
        charts: &'a ChartRegistry,
        pseudonymizer: &'a Pseudonymizer,
    ) -> Self {
        Self {
            store,
            schemas,
            methods,
            charts,
            pseudonymizer,
            parts: &NO_PARTS,
            clock: None,
        }
    }

    pub fn with_parts(self, parts: &'a dyn PartResolver) -> Self {
        Self { parts, ..self }
    }

    pub fn with_clock(self, clock: &'a dyn Clock) -> Self {
        Self {
            clock: Some(clock),
            ..self
        }
    }

    fn timer(&self) -> Timer<'a> {
        Timer {
            clock: self.clock,
            timings: Vec::new(),
        }
    }

    fn descriptor(&self, method_id: &str, stage: Stage, part: Option<&str>) -> Result<&'a AnalyticsMethodDescriptor, IndicatorError> {
        self.methods.descriptor(method_id).ok_or_else(|| {
            IndicatorError::new(
                stage,
                part,
                IndicatorErrorKind::Method(MethodError::UnknownMethod {
                    method_id: method_id.into(),
                }),
            )
        })
    }

    /// Resolves saved part ids to their specs, keeping inline parts.
    pub fn resolve_parts(&self, parts: &[PartRef]) -> Result<Vec<BasicIndicatorSpec>, IndicatorError> {
        let resolved = parts
            .iter()
            .map(|part| match part {
                PartRef::Inline(spec) => Ok((**spec).clone()),
                PartRef::Saved(id) => self.parts.resolve(id).ok_or_else(|| {
                    IndicatorError::new(
                        Stage::Composition,
                        None,
                        IndicatorErrorKind::UnknownPart(id.clone()),
                    )
                }),
            })
            .collect::<Result<Vec<_>, _>>()?;
        if resolved.len() < 2 {
            return Err(IndicatorError::new(
                Stage::Composition,
                None,
                IndicatorErrorKind::TooFewParts(resolved.len()),
            ));
        }
        Ok(resolved)
    }

    /// Checks a spec without touching the data and returns the schema of the
    /// table it will produce.
    pub fn validate(&self, spec: &IndicatorSpec) -> Result<Vec<Column>, IndicatorError> {
        let columns = match spec {
            IndicatorSpec::Basic(basic) => self.validate_basic(basic, None)?,
            IndicatorSpec::Composite(composite) => {
                let parts = self.resolve_parts(&composite.parts)?;
                self.composite_columns(&parts, true)?
            }
            IndicatorSpec::Multilevel(multi) => {
                let parts = self.resolve_parts(&multi.parts)?;
                for part in &parts {
                    self.validate_basic(part, Some(&part.name))?;
                }
                let (joined, _) = self.merge_plan(multi, &parts)?;
                let second = self.descriptor(&multi.second_method_id, Stage::SecondLevel, None)?;
                second
                    .validate_mapping(&joined, &multi.second_mappings)
                    .map_err(|report| {
                        IndicatorError::new(
                            Stage::SecondLevel,
                            None,
                            IndicatorErrorKind::Method(MethodError::MappingInvalid { report }),
                        )
                    })?;
                second.resolve_parameters(&multi.second_parameters).map_err(|e| {
                    IndicatorError::new(Stage::SecondLevel, None, IndicatorErrorKind::Method(e))
                })?;
                second.output_columns()
            }
        };
        self.charts
            .validate_viz_mapping(spec.chart(), &columns)
            .map_err(|e| IndicatorError::new(Stage::Visualization, None, IndicatorErrorKind::Chart(e)))?;
        Ok(columns)
    }

    fn validate_basic(&self, spec: &BasicIndicatorSpec, part: Option<&str>) -> Result<Vec<Column>, IndicatorError> {
        let query = |e: QueryError| IndicatorError::new(query_stage(&e), part, IndicatorErrorKind::Query(e));
        spec.scope.validate().map_err(query)?;
        spec.filters.validate(&spec.scope, self.schemas).map_err(query)?;
        let descriptor = self.descriptor(&spec.method_id, Stage::Analysis, part)?;
        let analysis = |e: MethodError| IndicatorError::new(Stage::Analysis, part, IndicatorErrorKind::Method(e));
        let dataset = dataset_schema(&spec.scope.categories, self.schemas);
        descriptor
            .validate_mapping(&dataset, &spec.mappings)
            .map_err(|report| analysis(MethodError::MappingInvalid { report }))?;
        descriptor.resolve_parameters(&spec.parameters).map_err(analysis)?;
        let columns = descriptor.output_columns();
        if part.is_none() {
            self.charts
                .validate_viz_mapping(&spec.chart, &columns)
                .map_err(|e| IndicatorError::new(Stage::Visualization, None, IndicatorErrorKind::Chart(e)))?;
        }
        Ok(columns)
    }

    /// Schema of a composite result; with `check_parts`, also validates every part.
    fn composite_columns(&self, parts: &[BasicIndicatorSpec], check_parts: bool) -> Result<Vec<Column>, IndicatorError> {
        let expected = &parts[0].method_id;
        for part in parts {
            if check_parts {
                self.validate_basic(part, Some(&part.name))?;
            }
            if &part.method_id != expected {
                return Err(IndicatorError::new(
                    Stage::Composition,
                    Some(&part.name),
                    IndicatorErrorKind::MethodMismatch {
                        expected: expected.clone(),
                        found: part.method_id.clone(),
                    },
                ));
            }
        }
        let outputs = self.descriptor(expected, Stage::Analysis, Some(&parts[0].name))?.output_columns();
        if outputs.iter().any(|c| c.name == INDICATOR_COLUMN) {
            return Err(IndicatorError::new(
                Stage::Composition,
                None,
                IndicatorErrorKind::ColumnClash(INDICATOR_COLUMN.into()),
            ));
        }
        let mut columns = Vec::with_capacity(outputs.len() + 1);
        columns.push(Column::new(INDICATOR_COLUMN, ColumnType::Text));
        columns.extend(outputs);
        Ok(columns)
    }

    /// Joined schema and per-part key positions of a multi-level indicator.
    fn merge_plan(
        &self,
        spec: &MultiLevelIndicatorSpec,
        parts: &[BasicIndicatorSpec],
    ) -> Result<(Vec<Column>, Vec<usize>), IndicatorError> {
        let mut names = BTreeSet::new();
        let mut keys = Vec::with_capacity(parts.len());
        let mut shapes = Vec::with_capacity(parts.len());
        let mut key_type = None;
        for part in parts {
            let merge_error = |e| IndicatorError::new(Stage::Merge, Some(&part.name), e);
            if !names.insert(part.name.as_str()) {
                return Err(merge_error(IndicatorErrorKind::DuplicatePartName(part.name.clone())));
            }
            let descriptor = self.descriptor(&part.method_id, Stage::Analysis, Some(&part.name))?;
            let key = merge_key(descriptor, &part.mappings, &spec.merge_attribute).ok_or_else(|| {
                merge_error(IndicatorErrorKind::MergeAttributeMissing(spec.merge_attribute.clone()))
            })?;
            let columns = descriptor.output_columns();
            let found = columns[key].column_type;
            match key_type {
                None => key_type = Some(found),
                Some(expected) if expected != found => {
                    return Err(merge_error(IndicatorErrorKind::MergeTypeMismatch {
                        attribute: spec.merge_attribute.clone(),
                        expected,
                        found,
                    }))
                }
                Some(_) => {}
            }
            keys.push(key);
            shapes.push((part.name.as_str(), columns, key));
        }
        let borrowed: Vec<(&str, &[Column], usize)> =
            shapes.iter().map(|(n, c, k)| (*n, c.as_slice(), *k)).collect();
        let joined = joined_columns(&spec.merge_attribute, &borrowed);
        if let Err(crate::model::TableError::DuplicateColumn(name)) = DataTable::new(joined.clone()) {
            return Err(IndicatorError::new(Stage::Merge, None, IndicatorErrorKind::ColumnClash(name)));
        }
        Ok((joined, keys))
    }

    fn analyze(
        &self,
        spec: &BasicIndicatorSpec,
        requester: &str,
        part: Option<&str>,
        timer: &mut Timer<'a>,
    ) -> Result<DataTable, IndicatorError> {
        let dataset = timer
            .run(Stage::Dataset, part, || {
                query_dataset(self.store, self.schemas, self.pseudonymizer, &spec.scope, &spec.filters, requester)
            })
            .map_err(|e| IndicatorError::new(query_stage(&e), part, IndicatorErrorKind::Query(e)))?;
        timer
            .run(Stage::Analysis, part, || {
                self.methods.execute(&spec.method_id, &dataset, &spec.mappings, &spec.parameters)
            })
            .map_err(|e| IndicatorError::new(Stage::Analysis, part, IndicatorErrorKind::Method(e)))
    }

    fn finish(
        &self,
        name: &str,
        chart: &crate::chart::ChartChoice,
        analyzed: DataTable,
        parts: Vec<PartResult>,
        warnings: Vec<Warning>,
        mut timer: Timer<'a>,
    ) -> Result<IndicatorRun, IndicatorError> {
        let chart = timer
            .run(Stage::Visualization, None, || render_chart(self.charts, chart, &analyzed, name))
            .map_err(|e| IndicatorError::new(Stage::Visualization, None, IndicatorErrorKind::Chart(e)))?;
        Ok(IndicatorRun {
            analyzed,
            chart,
            parts,
            warnings,
            timings: timer.timings,
        })
    }

    pub fn execute(&self, spec: &IndicatorSpec, requester: &str) -> Result<IndicatorRun, IndicatorError> {
        match spec {
            IndicatorSpec::Basic(s) => self.execute_basic(s, requester),
            IndicatorSpec::Composite(s) => self.execute_composite(s, requester),
            IndicatorSpec::Multilevel(s) => self.execute_multilevel(s, requester),
        }
    }

    pub fn execute_basic(&self, spec: &BasicIndicatorSpec, requester: &str) -> Result<IndicatorRun, IndicatorError> {
        let mut timer = self.timer();
        let analyzed = self.analyze(spec, requester, None, &mut timer)?;
        self.finish(&spec.name, &spec.chart, analyzed, Vec::new(), Vec::new(), timer)
    }

    /// Runs every part with the requester's identity and concatenates the
    /// results in part order, each row tagged with its part name.
    pub fn execute_composite(
        &self,
        spec: &CompositeIndicatorSpec,
        requester: &str,
    ) -> Result<IndicatorRun, IndicatorError> {
        let parts = self.resolve_parts(&spec.parts)?;
        let columns = self.composite_columns(&parts, false)?;
        let mut timer = self.timer();
        let mut rows = Vec::new();
        let mut results = Vec::with_capacity(parts.len());
        for part in &parts {
            let table = self.analyze(part, requester, Some(&part.name), &mut timer)?;
            for row in table.rows() {
                let mut tagged = Vec::with_capacity(row.len() + 1);
                tagged.push(Scalar::text(part.name.as_str()));
                tagged.extend(row.iter().cloned());
                rows.push(tagged);
            }
            results.push(PartResult {
                name: part.name.clone(),
                table,
            });
        }
        let combined = from_parts_unchecked(columns, rows);
        self.finish(&spec.name, &spec.chart, combined, results, Vec::new(), timer)
    }

    /// Runs the parts, inner-joins them on the merge attribute and analyzes
    /// the joined table with the second method.
    pub fn execute_multilevel(
        &self,
        spec: &MultiLevelIndicatorSpec,
        requester: &str,
    ) -> Result<IndicatorRun, IndicatorError> {
        let parts = self.resolve_parts(&spec.parts)?;
        let (joined_schema, keys) = self.merge_plan(spec, &parts)?;
        let second = self.descriptor(&spec.second_method_id, Stage::SecondLevel, None)?;
        let mut timer = self.timer();
        let mut results = Vec::with_capacity(parts.len());
        for part in &parts {
            let table = self.analyze(part, requester, Some(&part.name), &mut timer)?;
            results.push(PartResult {
                name: part.name.clone(),
                table,
            });
        }
        let join_parts: Vec<JoinPart> = results
            .iter()
            .zip(&keys)
            .map(|(r, &key)| JoinPart {
                name: &r.name,
                table: &r.table,
                key,
            })
            .collect();
        let joined = timer
            .run(Stage::Merge, None, || inner_join(&spec.merge_attribute, &join_parts))
            .map_err(|e| IndicatorError::new(Stage::Merge, None, IndicatorErrorKind::ColumnClash(format!("{e}"))))?;
        debug_assert_eq!(joined.columns(), joined_schema.as_slice());
        let second_error = |e| IndicatorError::new(Stage::SecondLevel, None, IndicatorErrorKind::Method(e));
        let mut warnings = Vec::new();
        let analyzed = if joined.is_empty() {
            second
                .validate_mapping(joined.columns(), &spec.second_mappings)
                .map_err(|report| second_error(MethodError::MappingInvalid { report }))?;
            second.resolve_parameters(&spec.second_parameters).map_err(second_error)?;
            warnings.push(Warning::JoinEmpty);
            from_parts_unchecked(second.output_columns(), Vec::new())
        } else {
            timer
                .run(Stage::SecondLevel, None, || {
                    self.methods.execute(
                        &spec.second_method_id,
                        &joined,
                        &spec.second_mappings,
                        &spec.second_parameters,
                    )
                })
                .map_err(second_error)?
        };
        self.finish(&spec.name, &spec.chart, analyzed, results, warnings, timer)
    }
}
