//! Engine-neutral chart specifications.
//!
//! A [`ChartChoice`] names a chart family (`library_id`), a chart type and
//! the binding of chart roles to analyzed-table columns. Rendering produces a
//! [`ChartSpec`], a self-contained document any client toolkit can draw.

mod boxplot;
mod render;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::methods::{validate_mapping, InputSpec, MappingReport, MappingSet};
use crate::model::{Column, ColumnType};

pub use boxplot::{box_stats, BoxStats};
pub use render::{render_chart, Point, Series, SeriesData, MISSING_LABEL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartType {
    Bar,
    Pie,
    Line,
    BoxPlot,
    Scatter,
    StackedArea,
}

impl ChartType {
    pub const ALL: [ChartType; 6] = [
        ChartType::Bar,
        ChartType::Pie,
        ChartType::Line,
        ChartType::BoxPlot,
        ChartType::Scatter,
        ChartType::StackedArea,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ChartType::Bar => "bar",
            ChartType::Pie => "pie",
            ChartType::Line => "line",
            ChartType::BoxPlot => "box_plot",
            ChartType::Scatter => "scatter",
            ChartType::StackedArea => "stacked_area",
        }
    }

    /// The roles a chart of this type draws from the analyzed table.
    pub fn roles(self) -> Vec<InputSpec> {
        use ColumnType::{Numeric, Text};
        match self {
            ChartType::Bar | ChartType::Line => vec![
                InputSpec::required("x", Text),
                InputSpec::required("y", Numeric),
                InputSpec::optional("series", Text),
            ],
            ChartType::StackedArea => vec![
                InputSpec::required("x", Text),
                InputSpec::required("y", Numeric),
                InputSpec::required("series", Text),
            ],
            ChartType::Pie => vec![
                InputSpec::required("label", Text),
                InputSpec::required("value", Numeric),
            ],
            ChartType::Scatter => vec![
                InputSpec::required("x", Numeric),
                InputSpec::required("y", Numeric),
                InputSpec::optional("series", Text),
                InputSpec::optional("label", Text),
            ],
            ChartType::BoxPlot => vec![
                InputSpec::required("x", Text),
                InputSpec::required("y", Numeric),
            ],
        }
    }
}

impl fmt::Display for ChartType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The visualization part of an indicator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartChoice {
    pub library_id: String,
    pub chart_type: ChartType,
    #[serde(default)]
    pub viz_mappings: MappingSet,
}

impl ChartChoice {
    pub fn new(library_id: impl Into<String>, chart_type: ChartType, viz_mappings: MappingSet) -> Self {
        Self {
            library_id: library_id.into(),
            chart_type,
            viz_mappings,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartTypeDescriptor {
    pub chart_type: ChartType,
    pub roles: Vec<InputSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartFamily {
    pub library_id: String,
    pub name: String,
    pub chart_types: Vec<ChartTypeDescriptor>,
}

impl ChartFamily {
    pub fn new(library_id: impl Into<String>, name: impl Into<String>, types: &[ChartType]) -> Self {
        Self {
            library_id: library_id.into(),
            name: name.into(),
            chart_types: types
                .iter()
                .map(|&chart_type| ChartTypeDescriptor {
                    chart_type,
                    roles: chart_type.roles(),
                })
                .collect(),
        }
    }

    pub fn supports(&self, chart_type: ChartType) -> bool {
        self.chart_types.iter().any(|d| d.chart_type == chart_type)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, thiserror::Error)]
#[serde(tag = "error", rename_all = "snake_case")]
pub enum ChartError {
    #[error("unknown chart library {library_id:?}")]
    UnknownLibrary { library_id: String },
    #[error("library {library_id:?} has no {chart_type} chart")]
    UnsupportedChartType { library_id: String, chart_type: ChartType },
    #[error("invalid chart mapping: {report}")]
    MappingInvalid { report: MappingReport },
    #[error("chart value is not finite")]
    NonFiniteValue,
}

/// The chart families offered to indicator authors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct ChartRegistry {
    families: Vec<ChartFamily>,
}

impl ChartRegistry {
    pub fn empty() -> Self {
        Self { families: Vec::new() }
    }

    pub fn with_defaults() -> Self {
        use ChartType::*;
        Self {
            families: vec![
                ChartFamily::new("c3", "C3", &ChartType::ALL),
                ChartFamily::new("google-charts", "Google Charts", &[Bar, Pie, Line, Scatter]),
            ],
        }
    }

    pub fn register(&mut self, family: ChartFamily) {
        self.families.retain(|f| f.library_id != family.library_id);
        self.families.push(family);
    }

    pub fn families(&self) -> &[ChartFamily] {
        &self.families
    }

    pub fn family(&self, library_id: &str) -> Option<&ChartFamily> {
        self.families.iter().find(|f| f.library_id == library_id)
    }

    /// Chart types of one family; empty for an unknown family.
    pub fn list_chart_types(&self, library_id: &str) -> &[ChartTypeDescriptor] {
        self.family(library_id).map_or(&[], |f| &f.chart_types)
    }

    pub fn validate_viz_mapping(&self, choice: &ChartChoice, columns: &[Column]) -> Result<(), ChartError> {
        let family = self.family(&choice.library_id).ok_or_else(|| ChartError::UnknownLibrary {
            library_id: choice.library_id.clone(),
        })?;
        if !family.supports(choice.chart_type) {
            return Err(ChartError::UnsupportedChartType {
                library_id: choice.library_id.clone(),
                chart_type: choice.chart_type,
            });
        }
        validate_mapping(&choice.chart_type.roles(), columns, &choice.viz_mappings)
            .map_err(|report| ChartError::MappingInvalid { report })
    }
}

/// A rendered chart. `domain` is the ordered categorical axis (or the pie
/// labels); value series are aligned with it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartSpec {
    pub chart_type: ChartType,
    pub library_id: String,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub domain: Vec<String>,
    pub series: Vec<Series>,
}
