use alloc::collections::BTreeMap;
use alloc::vec;

use super::{
    AnalyticsMethod, AnalyticsMethodDescriptor, InputSpec, MethodError, MethodInput, OutputSpec,
};
use crate::model::{from_parts_unchecked, ColumnType, DataTable, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregation {
    Sum,
    Average,
}

/// `sum_per_group` and `average_per_group`. Rows missing the group or the
/// value are skipped; groups with no values are left out.
pub struct GroupAggregate {
    aggregation: Aggregation,
    descriptor: AnalyticsMethodDescriptor,
}

impl GroupAggregate {
    pub fn new(aggregation: Aggregation) -> Self {
        let (id, name, description) = match aggregation {
            Aggregation::Sum => ("sum_per_group", "Sum per group", "Sum of Value per Group."),
            Aggregation::Average => (
                "average_per_group",
                "Average per group",
                "Arithmetic mean of Value per Group.",
            ),
        };
        let descriptor = AnalyticsMethodDescriptor::new(
            id,
            name,
            description,
            vec![
                InputSpec::required("Group", ColumnType::Text),
                InputSpec::required("Value", ColumnType::Numeric),
            ],
            vec![
                OutputSpec::key("Group", ColumnType::Text, "Group"),
                OutputSpec::new("Aggregate", ColumnType::Numeric),
            ],
            vec![],
        )
        .expect("valid descriptor");
        Self {
            aggregation,
            descriptor,
        }
    }
}

impl AnalyticsMethod for GroupAggregate {
    fn descriptor(&self) -> &AnalyticsMethodDescriptor {
        &self.descriptor
    }

    fn execute(&self, input: &MethodInput<'_>) -> Result<DataTable, MethodError> {
        let mut groups: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
        for row in input.rows() {
            if let (Some(group), Some(value)) = (input.text(row, "Group"), input.number(row, "Value")) {
                let slot = groups.entry(group).or_insert((0.0, 0));
                slot.0 += value;
                slot.1 += 1;
            }
        }
        let rows = groups
            .into_iter()
            .map(|(group, (sum, n))| {
                let value = match self.aggregation {
                    Aggregation::Sum => sum,
                    Aggregation::Average => sum / n as f64,
                };
                vec![Scalar::text(group), Scalar::number(value)]
            })
            .collect();
        Ok(from_parts_unchecked(self.descriptor.output_columns(), rows))
    }
}
