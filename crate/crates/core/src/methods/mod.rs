//! Pluggable, typed analytics methods.
//!
//! A method declares its inputs (typed, required or optional), outputs and
//! parameters in an [`AnalyticsMethodDescriptor`]. The registry checks a
//! [`MappingSet`] against the input table before running a method, so method
//! bodies only ever see well-typed cells.

mod aggregate;
mod correlation;
mod counting;
mod kmeans;
mod mapping;

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::model::{Column, ColumnType, DataTable, Scalar};

pub use aggregate::{Aggregation, GroupAggregate};
pub use correlation::PearsonCorrelation;
pub use counting::{CountItems, CountItemsPerWeek, CountTopItems};
pub use kmeans::{kmeans, KMeansClustering, KMeansParams};
pub use mapping::{
    suggest_mappings, validate_mapping, InputSpec, MappingReport, MappingSet, MappingViolation,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputSpec {
    pub name: String,
    #[serde(rename = "type")]
    pub column_type: ColumnType,
    /// When set, the column carries the values of this input unchanged
    /// (it is a grouping key derived from that input).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key_of: Option<String>,
}

impl OutputSpec {
    pub fn new(name: impl Into<String>, column_type: ColumnType) -> Self {
        Self {
            name: name.into(),
            column_type,
            key_of: None,
        }
    }

    pub fn key(name: impl Into<String>, column_type: ColumnType, input: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            column_type,
            key_of: Some(input.into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSpec {
    pub name: String,
    #[serde(rename = "type")]
    pub column_type: ColumnType,
    pub default: Scalar,
    #[serde(default)]
    pub description: String,
}

impl ParameterSpec {
    pub fn numeric(name: impl Into<String>, default: f64, description: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            column_type: ColumnType::Numeric,
            default: Scalar::Numeric(default),
            description: description.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DescriptorError {
    #[error("name {0:?} is used twice")]
    DuplicateName(String),
    #[error("a method needs at least one output")]
    NoOutputs,
    #[error("default of parameter {0:?} does not match its type")]
    BadDefault(String),
    #[error("output {output:?} is keyed on unknown input {input:?}")]
    BadKey { output: String, input: String },
}

/// The typed contract of one analytics method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticsMethodDescriptor {
    pub method_id: String,
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub inputs: Vec<InputSpec>,
    pub outputs: Vec<OutputSpec>,
    #[serde(default)]
    pub parameters: Vec<ParameterSpec>,
}

impl AnalyticsMethodDescriptor {
    pub fn new(
        method_id: impl Into<String>,
        name: impl Into<String>,
        description: impl Into<String>,
        inputs: Vec<InputSpec>,
        outputs: Vec<OutputSpec>,
        parameters: Vec<ParameterSpec>,
    ) -> Result<Self, DescriptorError> {
        if outputs.is_empty() {
            return Err(DescriptorError::NoOutputs);
        }
        let mut seen = BTreeSet::new();
        let names = inputs.iter().map(|i| &i.name);
        for group in [
            names.collect::<Vec<_>>(),
            outputs.iter().map(|o| &o.name).collect(),
            parameters.iter().map(|p| &p.name).collect(),
        ] {
            seen.clear();
            for name in group {
                if !seen.insert(name) {
                    return Err(DescriptorError::DuplicateName(name.clone()));
                }
            }
        }
        for p in &parameters {
            if p.default.column_type() != Some(p.column_type) {
                return Err(DescriptorError::BadDefault(p.name.clone()));
            }
        }
        for o in &outputs {
            if let Some(input) = &o.key_of {
                if !inputs.iter().any(|i| &i.name == input) {
                    return Err(DescriptorError::BadKey {
                        output: o.name.clone(),
                        input: input.clone(),
                    });
                }
            }
        }
        Ok(Self {
            method_id: method_id.into(),
            name: name.into(),
            description: description.into(),
            inputs,
            outputs,
            parameters,
        })
    }

    pub fn output_columns(&self) -> Vec<Column> {
        self.outputs
            .iter()
            .map(|o| Column::new(o.name.clone(), o.column_type))
            .collect()
    }

    pub fn validate_mapping(&self, columns: &[Column], mappings: &MappingSet) -> Result<(), MappingReport> {
        validate_mapping(&self.inputs, columns, mappings)
    }

    pub fn suggest_mappings(&self, columns: &[Column]) -> MappingSet {
        suggest_mappings(&self.inputs, columns)
    }

    /// Fills defaults and type-checks supplied parameter values.
    pub fn resolve_parameters(
        &self,
        given: &BTreeMap<String, Scalar>,
    ) -> Result<BTreeMap<String, Scalar>, MethodError> {
        for name in given.keys() {
            if !self.parameters.iter().any(|p| &p.name == name) {
                return Err(MethodError::UnknownParameter(name.clone()));
            }
        }
        self.parameters
            .iter()
            .map(|p| {
                let value = match given.get(&p.name) {
                    None | Some(Scalar::Missing) => p.default.clone(),
                    Some(v) if v.column_type() == Some(p.column_type) => v.clone(),
                    Some(_) => return Err(MethodError::ParameterTypeMismatch(p.name.clone())),
                };
                Ok((p.name.clone(), value))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, thiserror::Error)]
#[serde(tag = "error", rename_all = "snake_case")]
pub enum MethodError {
    #[error("unknown analytics method {method_id:?}")]
    UnknownMethod { method_id: String },
    #[error("invalid input mapping: {report}")]
    MappingInvalid { report: MappingReport },
    #[error("unknown parameter {0:?}")]
    UnknownParameter(String),
    #[error("parameter {0:?} has the wrong type")]
    ParameterTypeMismatch(String),
    #[error("parameter {name:?} out of range: {reason}")]
    ParameterOutOfRange { name: String, reason: String },
    #[error("the method needs at least one complete input row")]
    EmptyInput,
}

static MISSING: Scalar = Scalar::Missing;

/// The bound view of an input table that a method body works against.
pub struct MethodInput<'a> {
    table: &'a DataTable,
    bindings: BTreeMap<&'a str, usize>,
    parameters: BTreeMap<String, Scalar>,
}

impl<'a> MethodInput<'a> {
    pub fn rows(&self) -> &'a [Vec<Scalar>] {
        self.table.rows()
    }

    pub fn is_bound(&self, input: &str) -> bool {
        self.bindings.contains_key(input)
    }

    /// The cell bound to `input`, or `Missing` when the input is unbound.
    pub fn cell<'r>(&self, row: &'r [Scalar], input: &str) -> &'r Scalar {
        match self.bindings.get(input) {
            Some(&i) => &row[i],
            None => &MISSING,
        }
    }

    pub fn text<'r>(&self, row: &'r [Scalar], input: &str) -> Option<&'r str> {
        self.cell(row, input).as_text()
    }

    pub fn number(&self, row: &[Scalar], input: &str) -> Option<f64> {
        self.cell(row, input).as_number()
    }

    pub fn parameter(&self, name: &str) -> &Scalar {
        self.parameters.get(name).unwrap_or(&MISSING)
    }

    /// An integral Numeric parameter within `[min, max]`.
    pub fn integer(&self, name: &str, min: i64, max: i64) -> Result<i64, MethodError> {
        let out_of_range = |reason: &str| MethodError::ParameterOutOfRange {
            name: name.into(),
            reason: reason.into(),
        };
        let value = self
            .parameter(name)
            .as_number()
            .ok_or_else(|| out_of_range("not a number"))?;
        if libm::trunc(value) != value {
            return Err(out_of_range("must be a whole number"));
        }
        if value < min as f64 || value > max as f64 {
            return Err(MethodError::ParameterOutOfRange {
                name: name.into(),
                reason: alloc::format!("must lie in [{min}, {max}]"),
            });
        }
        Ok(value as i64)
    }
}

/// An analytics method implementation.
///
/// Implementations must be deterministic functions of the input rows, the
/// bindings and the parameter values.
pub trait AnalyticsMethod: Send + Sync {
    fn descriptor(&self) -> &AnalyticsMethodDescriptor;

    fn execute(&self, input: &MethodInput<'_>) -> Result<DataTable, MethodError>;
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("method {0:?} is already registered")]
pub struct DuplicateMethod(pub String);

/// The set of methods available to indicators. Immutable once built.
#[derive(Default)]
pub struct MethodRegistry {
    methods: BTreeMap<String, Box<dyn AnalyticsMethod>>,
}

impl core::fmt::Debug for MethodRegistry {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_list().entries(self.methods.keys()).finish()
    }
}

impl MethodRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The registry with every shipped method.
    pub fn with_defaults() -> Self {
        let mut registry = Self::empty();
        let shipped: [Box<dyn AnalyticsMethod>; 7] = [
            Box::new(CountItems::new()),
            Box::new(CountItemsPerWeek::new()),
            Box::new(CountTopItems::new()),
            Box::new(GroupAggregate::new(Aggregation::Sum)),
            Box::new(GroupAggregate::new(Aggregation::Average)),
            Box::new(PearsonCorrelation::new()),
            Box::new(KMeansClustering::new()),
        ];
        for method in shipped {
            registry.register_boxed(method).expect("shipped method ids are distinct");
        }
        registry
    }

    pub fn register(&mut self, method: impl AnalyticsMethod + 'static) -> Result<(), DuplicateMethod> {
        self.register_boxed(Box::new(method))
    }

    fn register_boxed(&mut self, method: Box<dyn AnalyticsMethod>) -> Result<(), DuplicateMethod> {
        let id = method.descriptor().method_id.clone();
        if self.methods.contains_key(&id) {
            return Err(DuplicateMethod(id));
        }
        self.methods.insert(id, method);
        Ok(())
    }

    pub fn list(&self) -> Vec<&AnalyticsMethodDescriptor> {
        self.methods.values().map(|m| m.descriptor()).collect()
    }

    pub fn descriptor(&self, method_id: &str) -> Option<&AnalyticsMethodDescriptor> {
        self.methods.get(method_id).map(|m| m.descriptor())
    }

    /// Validates the mapping and parameters, then runs the method.
    ///
    /// The output schema always equals the descriptor's outputs.
    pub fn execute(
        &self,
        method_id: &str,
        table: &DataTable,
        mappings: &MappingSet,
        parameters: &BTreeMap<String, Scalar>,
    ) -> Result<DataTable, MethodError> {
        let method = self
            .methods
            .get(method_id)
            .ok_or_else(|| MethodError::UnknownMethod {
                method_id: method_id.into(),
            })?;
        let descriptor = method.descriptor();
        descriptor
            .validate_mapping(table.columns(), mappings)
            .map_err(|report| MethodError::MappingInvalid { report })?;
        let parameters = descriptor.resolve_parameters(parameters)?;
        let bindings = mappings
            .iter()
            .map(|(input, column)| {
                let index = table.column_index(column).expect("validated mapping");
                (input, index)
            })
            .collect();
        let input = MethodInput {
            table,
            bindings,
            parameters,
        };
        let output = method.execute(&input)?;
        debug_assert_eq!(output.columns(), descriptor.output_columns().as_slice());
        Ok(output)
    }
}

pub(crate) fn empty_output(descriptor: &AnalyticsMethodDescriptor) -> DataTable {
    DataTable::new(descriptor.output_columns()).expect("descriptor output names are unique")
}
