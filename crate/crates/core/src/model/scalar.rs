use alloc::string::{String, ToString};
use core::cmp::Ordering;
use core::fmt;

use serde::{Deserialize, Serialize};

/// The two column types every table column, method input and chart role carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ColumnType {
    Text,
    Numeric,
}

impl fmt::Display for ColumnType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnType::Text => f.write_str("Text"),
            ColumnType::Numeric => f.write_str("Numeric"),
        }
    }
}

/// A single table cell or attribute value.
///
/// `Missing` is the empty marker used when an event carries no value for a
/// column; it is compatible with both column types. Numeric values are always
/// finite.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Text(String),
    Numeric(f64),
    Missing,
}

impl Scalar {
    pub fn text(value: impl Into<String>) -> Self {
        Scalar::Text(value.into())
    }

    /// Builds a numeric scalar, mapping non-finite input to `Missing`.
    pub fn number(value: f64) -> Self {
        if value.is_finite() {
            Scalar::Numeric(value)
        } else {
            Scalar::Missing
        }
    }

    pub fn column_type(&self) -> Option<ColumnType> {
        match self {
            Scalar::Text(_) => Some(ColumnType::Text),
            Scalar::Numeric(_) => Some(ColumnType::Numeric),
            Scalar::Missing => None,
        }
    }

    /// True when the cell may live in a column of type `ty`.
    pub fn fits(&self, ty: ColumnType) -> bool {
        self.column_type().map_or(true, |own| own == ty)
    }

    pub fn is_missing(&self) -> bool {
        matches!(self, Scalar::Missing)
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Scalar::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            Scalar::Numeric(v) => Some(*v),
            _ => None,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Scalar::Missing => 0,
            Scalar::Numeric(_) => 1,
            Scalar::Text(_) => 2,
        }
    }
}

// Total order: Missing < Numeric < Text, numbers by `total_cmp`.
impl Ord for Scalar {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Scalar::Text(a), Scalar::Text(b)) => a.cmp(b),
            (Scalar::Numeric(a), Scalar::Numeric(b)) => a.total_cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scalar {}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Text(s) => f.write_str(s),
            Scalar::Numeric(v) => {
                if libm::trunc(*v) == *v && v.abs() < 1e15 {
                    write!(f, "{}", *v as i64)
                } else {
                    write!(f, "{v}")
                }
            }
            Scalar::Missing => Ok(()),
        }
    }
}

impl From<&str> for Scalar {
    fn from(value: &str) -> Self {
        Scalar::Text(value.to_string())
    }
}

impl From<String> for Scalar {
    fn from(value: String) -> Self {
        Scalar::Text(value)
    }
}

impl From<f64> for Scalar {
    fn from(value: f64) -> Self {
        Scalar::number(value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn wire_shape_is_untagged() {
        let cells = vec![Scalar::text("pdf"), Scalar::Numeric(20480.0), Scalar::Missing];
        let json = serde_json::to_string(&cells).unwrap();
        assert_eq!(json, r#"["pdf",20480.0,null]"#);
        let back: alloc::vec::Vec<Scalar> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cells);
    }

    #[test]
    fn display_prints_integral_numbers_without_fraction() {
        assert_eq!(Scalar::Numeric(20480.0).to_string(), "20480");
        assert_eq!(Scalar::Numeric(2.5).to_string(), "2.5");
        assert_eq!(Scalar::Missing.to_string(), "");
    }

    #[test]
    fn missing_fits_every_type() {
        assert!(Scalar::Missing.fits(ColumnType::Text));
        assert!(Scalar::Missing.fits(ColumnType::Numeric));
        assert!(!Scalar::text("x").fits(ColumnType::Numeric));
        assert!(Scalar::number(f64::NAN).is_missing());
    }
}
