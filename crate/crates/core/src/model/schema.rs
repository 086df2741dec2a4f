use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::scalar::ColumnType;
use super::table::BASE_COLUMNS;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeDef {
    pub name: String,
    #[serde(rename = "type")]
    pub column_type: ColumnType,
}

impl AttributeDef {
    pub fn new(name: impl Into<String>, column_type: ColumnType) -> Self {
        Self {
            name: name.into(),
            column_type,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SchemaError {
    #[error("attribute {attribute:?} declared twice in category {category:?}")]
    DuplicateAttribute { category: String, attribute: String },
    #[error("attribute {attribute:?} of category {category:?} collides with a base column")]
    ReservedAttribute { category: String, attribute: String },
    #[error("category {0:?} declared twice")]
    DuplicateCategory(String),
    #[error("category name must not be empty")]
    EmptyCategory,
}

/// Semantic attributes carried by events of one object category.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawCategorySchema")]
pub struct CategorySchema {
    category: String,
    attributes: Vec<AttributeDef>,
}

#[derive(Deserialize)]
struct RawCategorySchema {
    category: String,
    #[serde(default)]
    attributes: Vec<AttributeDef>,
}

impl TryFrom<RawCategorySchema> for CategorySchema {
    type Error = SchemaError;

    fn try_from(raw: RawCategorySchema) -> Result<Self, Self::Error> {
        CategorySchema::new(raw.category, raw.attributes)
    }
}

impl CategorySchema {
    pub fn new(
        category: impl Into<String>,
        attributes: Vec<AttributeDef>,
    ) -> Result<Self, SchemaError> {
        let category = category.into();
        if category.is_empty() {
            return Err(SchemaError::EmptyCategory);
        }
        let mut seen = BTreeSet::new();
        for attr in &attributes {
            if BASE_COLUMNS.iter().any(|(name, _)| *name == attr.name) {
                return Err(SchemaError::ReservedAttribute {
                    category,
                    attribute: attr.name.clone(),
                });
            }
            if !seen.insert(attr.name.as_str()) {
                return Err(SchemaError::DuplicateAttribute {
                    category: category.clone(),
                    attribute: attr.name.clone(),
                });
            }
        }
        Ok(Self {
            category,
            attributes,
        })
    }

    pub fn category(&self) -> &str {
        &self.category
    }

    pub fn attributes(&self) -> &[AttributeDef] {
        &self.attributes
    }

    pub fn attribute(&self, name: &str) -> Option<&AttributeDef> {
        self.attributes.iter().find(|a| a.name == name)
    }
}

/// All category schemas known to a deployment, keyed by category name.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<CategorySchema>", into = "Vec<CategorySchema>")]
pub struct SchemaSet {
    by_category: BTreeMap<String, CategorySchema>,
}

impl TryFrom<Vec<CategorySchema>> for SchemaSet {
    type Error = SchemaError;

    fn try_from(schemas: Vec<CategorySchema>) -> Result<Self, Self::Error> {
        SchemaSet::new(schemas)
    }
}

impl From<SchemaSet> for Vec<CategorySchema> {
    fn from(set: SchemaSet) -> Self {
        set.by_category.into_values().collect()
    }
}

impl SchemaSet {
    pub fn new(schemas: impl IntoIterator<Item = CategorySchema>) -> Result<Self, SchemaError> {
        let mut by_category = BTreeMap::new();
        for schema in schemas {
            let name = schema.category.clone();
            if by_category.insert(name.clone(), schema).is_some() {
                return Err(SchemaError::DuplicateCategory(name));
            }
        }
        Ok(Self { by_category })
    }

    /// The categories and attributes the synthetic generator and the
    /// default deployment use.
    pub fn lcdm_defaults() -> Self {
        use ColumnType::{Numeric, Text};
        let schema = |category: &str, attrs: &[(&str, ColumnType)]| {
            CategorySchema::new(
                category,
                attrs.iter().map(|(n, t)| AttributeDef::new(*n, *t)).collect(),
            )
            .expect("default schemas are well formed")
        };
        Self::new([
            schema(
                "Learning Materials",
                &[("Name", Text), ("File Extension", Text), ("Size (in Bytes)", Numeric)],
            ),
            schema(
                "Assignments",
                &[("Title", Text), ("Total Marks", Numeric), ("Due Date", Text), ("Points", Numeric)],
            ),
            schema("Discussion Forum", &[("Title", Text), ("Replies", Numeric)]),
            schema("Wiki", &[("Title", Text), ("Words", Numeric)]),
        ])
        .expect("default categories are distinct")
    }

    pub fn get(&self, category: &str) -> Option<&CategorySchema> {
        self.by_category.get(category)
    }

    pub fn categories(&self) -> impl Iterator<Item = &str> {
        self.by_category.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = &CategorySchema> {
        self.by_category.values()
    }

    /// Attributes present, with identical type, in every requested category.
    ///
    /// Order follows the schema of the lexicographically first category. An
    /// unknown category contributes an empty attribute set.
    pub fn common_attributes(&self, categories: &BTreeSet<String>) -> Vec<AttributeDef> {
        let mut names = categories.iter();
        let Some(first) = names.next() else {
            return Vec::new();
        };
        let Some(first) = self.get(first) else {
            return Vec::new();
        };
        let rest: Vec<Option<&CategorySchema>> = names.map(|c| self.get(c)).collect();
        first
            .attributes
            .iter()
            .filter(|attr| {
                rest.iter().all(|schema| {
                    schema
                        .and_then(|s| s.attribute(&attr.name))
                        .is_some_and(|other| other.column_type == attr.column_type)
                })
            })
            .cloned()
            .collect()
    }

    pub fn is_common(&self, categories: &BTreeSet<String>, attribute: &str) -> bool {
        self.common_attributes(categories)
            .iter()
            .any(|a| a.name == attribute)
    }
}

impl core::fmt::Display for AttributeDef {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{} ({})", self.name, self.column_type)
    }
}
