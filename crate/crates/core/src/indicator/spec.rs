use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::chart::ChartChoice;
use crate::methods::MappingSet;
use crate::model::Scalar;
use crate::query::{DatasetScope, FilterSet};

/// Dataset, filters, analysis and visualization of one indicator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasicIndicatorSpec {
    pub name: String,
    pub scope: DatasetScope,
    #[serde(default)]
    pub filters: FilterSet,
    pub method_id: String,
    #[serde(default)]
    pub parameters: BTreeMap<String, Scalar>,
    #[serde(default)]
    pub mappings: MappingSet,
    pub chart: ChartChoice,
}

/// A first-level part: the id of a saved basic indicator, or an inline spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PartRef {
    Saved(String),
    Inline(Box<BasicIndicatorSpec>),
}

impl PartRef {
    pub fn saved_id(&self) -> Option<&str> {
        match self {
            PartRef::Saved(id) => Some(id),
            PartRef::Inline(_) => None,
        }
    }
}

impl From<BasicIndicatorSpec> for PartRef {
    fn from(spec: BasicIndicatorSpec) -> Self {
        PartRef::Inline(Box::new(spec))
    }
}

/// Parts sharing one analytics method, concatenated with an `Indicator` tag
/// column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeIndicatorSpec {
    pub name: String,
    pub parts: Vec<PartRef>,
    pub chart: ChartChoice,
}

/// Parts joined on a common column, then analyzed again.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiLevelIndicatorSpec {
    pub name: String,
    pub parts: Vec<PartRef>,
    pub merge_attribute: String,
    pub second_method_id: String,
    #[serde(default)]
    pub second_parameters: BTreeMap<String, Scalar>,
    #[serde(default)]
    pub second_mappings: MappingSet,
    pub chart: ChartChoice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndicatorKind {
    Basic,
    Composite,
    Multilevel,
}

impl IndicatorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            IndicatorKind::Basic => "basic",
            IndicatorKind::Composite => "composite",
            IndicatorKind::Multilevel => "multilevel",
        }
    }
}

impl fmt::Display for IndicatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IndicatorSpec {
    Basic(BasicIndicatorSpec),
    Composite(CompositeIndicatorSpec),
    Multilevel(MultiLevelIndicatorSpec),
}

impl IndicatorSpec {
    pub fn kind(&self) -> IndicatorKind {
        match self {
            IndicatorSpec::Basic(_) => IndicatorKind::Basic,
            IndicatorSpec::Composite(_) => IndicatorKind::Composite,
            IndicatorSpec::Multilevel(_) => IndicatorKind::Multilevel,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            IndicatorSpec::Basic(s) => &s.name,
            IndicatorSpec::Composite(s) => &s.name,
            IndicatorSpec::Multilevel(s) => &s.name,
        }
    }

    pub fn chart(&self) -> &ChartChoice {
        match self {
            IndicatorSpec::Basic(s) => &s.chart,
            IndicatorSpec::Composite(s) => &s.chart,
            IndicatorSpec::Multilevel(s) => &s.chart,
        }
    }

    pub fn parts(&self) -> &[PartRef] {
        match self {
            IndicatorSpec::Basic(_) => &[],
            IndicatorSpec::Composite(s) => &s.parts,
            IndicatorSpec::Multilevel(s) => &s.parts,
        }
    }

    /// Ids of saved indicators this spec depends on, in part order.
    pub fn part_ids(&self) -> impl Iterator<Item = &str> {
        self.parts().iter().filter_map(PartRef::saved_id)
    }
}

/// Looks up saved basic indicators by id.
pub trait PartResolver {
    fn resolve(&self, indicator_id: &str) -> Option<BasicIndicatorSpec>;
}

/// Resolves nothing; for specs whose parts are all inline.
pub struct NoParts;

impl PartResolver for NoParts {
    fn resolve(&self, _: &str) -> Option<BasicIndicatorSpec> {
        None
    }
}

impl PartResolver for BTreeMap<String, BasicIndicatorSpec> {
    fn resolve(&self, indicator_id: &str) -> Option<BasicIndicatorSpec> {
        self.get(indicator_id).cloned()
    }
}

/// Result of [`check_composable`]: positions of the other candidates.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Composability {
    pub compatible: Vec<usize>,
    pub incompatible: Vec<usize>,
}

/// Splits the candidates other than `first` by whether they share its
/// analytics method.
pub fn check_composable(method_ids: &[&str], first: usize) -> Composability {
    let mut out = Composability::default();
    let Some(&wanted) = method_ids.get(first) else {
        return out;
    };
    for (i, &method) in method_ids.iter().enumerate() {
        if i == first {
            continue;
        }
        if method == wanted {
            out.compatible.push(i);
        } else {
            out.incompatible.push(i);
        }
    }
    out
}
