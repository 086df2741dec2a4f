use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::scalar::Scalar;
use super::schema::SchemaSet;
use super::time::Timestamp;

/// One learning activity: who did what, on which object category, where and when.
///
/// Serializes to the event wire document (`id`, `user`, `timestamp`, `source`,
/// `platform`, `action`, `category`, `attributes`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LearningEvent {
    #[serde(rename = "id")]
    pub event_id: String,
    #[serde(rename = "user")]
    pub user_id: String,
    pub timestamp: Timestamp,
    pub source: String,
    pub platform: String,
    pub action: String,
    pub category: String,
    #[serde(default)]
    pub attributes: BTreeMap<String, Scalar>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, thiserror::Error)]
#[serde(tag = "violation", content = "field", rename_all = "snake_case")]
pub enum EventViolation {
    #[error("event document is not an object")]
    NotAnObject,
    #[error("missing required field {0:?}")]
    MissingRequiredField(String),
    #[error("field {0:?} has the wrong JSON type")]
    InvalidField(String),
    #[error("unparseable timestamp {0:?}")]
    BadTimestamp(String),
    #[error("unknown category {0:?}")]
    UnknownCategory(String),
    #[error("attribute {0:?} is not declared for this category")]
    UnknownAttribute(String),
    #[error("attribute {0:?} does not match its declared type")]
    AttributeTypeMismatch(String),
}

/// Every violation found in one event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct EventReport {
    pub violations: Vec<EventViolation>,
}

impl fmt::Display for EventReport {
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

impl core::error::Error for EventReport {}

const REQUIRED_FIELDS: [&str; 7] = [
    "id",
    "user",
    "timestamp",
    "source",
    "platform",
    "action",
    "category",
];

impl LearningEvent {
    /// Parses a raw wire document, collecting every structural problem.
    ///
    /// Attribute values must be JSON strings (Text) or numbers (Numeric);
    /// `null` means "no value". Schema checks are left to [`validate_event`].
    pub fn from_document(doc: &Value) -> Result<Self, EventReport> {
        let Some(object) = doc.as_object() else {
            return Err(EventReport {
                violations: alloc::vec![EventViolation::NotAnObject],
            });
        };
        let mut violations = Vec::new();
        let mut fields: [String; 7] = Default::default();
        for (slot, name) in fields.iter_mut().zip(REQUIRED_FIELDS) {
            match object.get(name) {
                None | Some(Value::Null) => {
                    violations.push(EventViolation::MissingRequiredField(name.to_string()))
                }
                Some(Value::String(s)) if s.is_empty() => {
                    violations.push(EventViolation::MissingRequiredField(name.to_string()))
                }
                Some(Value::String(s)) => *slot = s.clone(),
                Some(_) => violations.push(EventViolation::InvalidField(name.to_string())),
            }
        }
        let timestamp = if fields[2].is_empty() {
            None
        } else {
            let parsed = Timestamp::parse(&fields[2]);
            if parsed.is_none() {
                violations.push(EventViolation::BadTimestamp(fields[2].clone()));
            }
            parsed
        };
        let attributes = match object.get("attributes") {
            None | Some(Value::Null) => BTreeMap::new(),
            Some(Value::Object(map)) => parse_attributes(map, &mut violations),
            Some(_) => {
                violations.push(EventViolation::InvalidField("attributes".to_string()));
                BTreeMap::new()
            }
        };
        match timestamp {
            Some(timestamp) if violations.is_empty() => {
                let [event_id, user_id, _, source, platform, action, category] = fields;
                Ok(LearningEvent {
                    event_id,
                    user_id,
                    timestamp,
                    source,
                    platform,
                    action,
                    category,
                    attributes,
                })
            }
            _ => Err(EventReport { violations }),
        }
    }

    pub fn to_document(&self) -> Value {
        serde_json::to_value(self).expect("events always serialize")
    }
}

fn parse_attributes(
    map: &Map<String, Value>,
    violations: &mut Vec<EventViolation>,
) -> BTreeMap<String, Scalar> {
    let mut attributes = BTreeMap::new();
    for (name, value) in map {
        let scalar = match value {
            Value::Null => continue,
            Value::String(s) => Scalar::Text(s.clone()),
            Value::Number(n) => match n.as_f64().filter(|v| v.is_finite()) {
                Some(v) => Scalar::Numeric(v),
                None => {
                    violations.push(EventViolation::AttributeTypeMismatch(name.clone()));
                    continue;
                }
            },
            _ => {
                violations.push(EventViolation::AttributeTypeMismatch(name.clone()));
                continue;
            }
        };
        attributes.insert(name.clone(), scalar);
    }
    attributes
}

/// Checks an event against the category schemas.
///
/// Returns the event unchanged when every invariant holds, otherwise a report
/// listing each violation. Attributes are optional; an empty map is valid.
pub fn validate_event(
    event: LearningEvent,
    schemas: &SchemaSet,
) -> Result<LearningEvent, EventReport> {
    let mut violations = Vec::new();
    let required = [
        ("id", &event.event_id),
        ("user", &event.user_id),
        ("source", &event.source),
        ("platform", &event.platform),
        ("action", &event.action),
        ("category", &event.category),
    ];
    for (name, value) in required {
        if value.is_empty() {
            violations.push(EventViolation::MissingRequiredField(name.to_string()));
        }
    }
    if Timestamp::from_epoch_seconds(event.timestamp.epoch_seconds()).is_none() {
        violations.push(EventViolation::BadTimestamp(
            event.timestamp.epoch_seconds().to_string(),
        ));
    }
    match schemas.get(&event.category) {
        None if !event.category.is_empty() => {
            violations.push(EventViolation::UnknownCategory(event.category.clone()))
        }
        None => {}
        Some(schema) => {
            for (name, value) in &event.attributes {
                match schema.attribute(name) {
                    None => violations.push(EventViolation::UnknownAttribute(name.clone())),
                    Some(def) if !value.fits(def.column_type) => {
                        violations.push(EventViolation::AttributeTypeMismatch(name.clone()))
                    }
                    Some(_) => {}
                }
            }
        }
    }
    if violations.is_empty() {
        Ok(event)
    } else {
        Err(EventReport { violations })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use serde_json::json;

    fn doc(attributes: Value) -> Value {
        json!({
            "id": "e1",
            "user": "u1",
            "timestamp": "2019-01-01T10:00:00Z",
            "source": "Moodle",
            "platform": "web",
            "action": "view",
            "category": "Learning Materials",
            "attributes": attributes,
        })
    }

    #[test]
    fn matching_material_is_valid() {
        let schemas = SchemaSet::lcdm_defaults();
        let event =
            LearningEvent::from_document(&doc(json!({"Name": "slides01.pdf", "Size (in Bytes)": 20480})))
                .unwrap();
        let valid = validate_event(event.clone(), &schemas).unwrap();
        assert_eq!(valid, event);
    }

    #[test]
    fn empty_attributes_are_valid_for_any_schema() {
        let schemas = SchemaSet::lcdm_defaults();
        for category in ["Learning Materials", "Assignments", "Wiki"] {
            let mut event = LearningEvent::from_document(&doc(json!({}))).unwrap();
            event.category = category.into();
            assert!(validate_event(event, &schemas).is_ok());
        }
    }

    #[test]
    fn text_in_numeric_attribute_is_rejected() {
        let schemas = SchemaSet::lcdm_defaults();
        let mut event = LearningEvent::from_document(&doc(json!({"Total Marks": "ten"}))).unwrap();
        event.category = "Assignments".into();
        let report = validate_event(event, &schemas).unwrap_err();
        assert_eq!(
            report.violations,
            vec![EventViolation::AttributeTypeMismatch("Total Marks".into())]
        );
    }

    #[test]
    fn unknown_category_and_attribute() {
        let schemas = SchemaSet::lcdm_defaults();
        let mut event = LearningEvent::from_document(&doc(json!({}))).unwrap();
        event.category = "Quizzes".into();
        assert_eq!(
            validate_event(event, &schemas).unwrap_err().violations,
            vec![EventViolation::UnknownCategory("Quizzes".into())]
        );
        let event = LearningEvent::from_document(&doc(json!({"Colour": "red"}))).unwrap();
        assert_eq!(
            validate_event(event, &schemas).unwrap_err().violations,
            vec![EventViolation::UnknownAttribute("Colour".into())]
        );
    }

    #[test]
    fn document_parsing_collects_every_problem() {
        let report = LearningEvent::from_document(&json!({
            "id": "e9",
            "user": 7,
            "timestamp": "last tuesday",
            "platform": "web",
            "action": "view",
            "category": "Wiki",
            "attributes": {"Words": true},
        }))
        .unwrap_err();
        assert_eq!(
            report.violations,
            vec![
                EventViolation::InvalidField("user".into()),
                EventViolation::MissingRequiredField("source".into()),
                EventViolation::BadTimestamp("last tuesday".into()),
                EventViolation::AttributeTypeMismatch("Words".into()),
            ]
        );
        assert_eq!(
            LearningEvent::from_document(&json!([1])).unwrap_err().violations,
            vec![EventViolation::NotAnObject]
        );
    }

    #[test]
    fn wire_round_trip() {
        let event = LearningEvent::from_document(&doc(json!({"Name": "a.pdf", "Size (in Bytes)": 12.5})))
            .unwrap();
        let wire = event.to_document();
        assert_eq!(wire["timestamp"], "2019-01-01T10:00:00Z");
        assert_eq!(LearningEvent::from_document(&wire).unwrap(), event);
        let text = serde_json::to_string(&event).unwrap();
        assert_eq!(serde_json::from_str::<LearningEvent>(&text).unwrap(), event);
    }
}
