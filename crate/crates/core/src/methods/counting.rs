use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::{
    empty_output, AnalyticsMethod, AnalyticsMethodDescriptor, InputSpec, MethodError, MethodInput,
    OutputSpec, ParameterSpec,
};
use crate::model::{from_parts_unchecked, iso_week_label, ColumnType, DataTable, Scalar};

use ColumnType::{Numeric, Text};

const ITEMS: &str = "Items";
const ITEMS_TO_COUNT: &str = "Items to count";
const USER: &str = "User";
const TIMESTAMP: &str = "Timestamp";

/// Either a plain row count or the set of distinct users seen.
enum Tally<'a> {
    Rows(usize),
    Users(BTreeSet<&'a str>),
}

impl<'a> Tally<'a> {
    fn new(distinct: bool) -> Self {
        if distinct {
            Tally::Users(BTreeSet::new())
        } else {
            Tally::Rows(0)
        }
    }

    fn add(&mut self, user: Option<&'a str>) {
        match (self, user) {
            (Tally::Rows(n), _) => *n += 1,
            (Tally::Users(set), Some(user)) => {
                set.insert(user);
            }
            (Tally::Users(_), None) => {}
        }
    }

    fn count(&self) -> f64 {
        match self {
            Tally::Rows(n) => *n as f64,
            Tally::Users(set) => set.len() as f64,
        }
    }
}

/// Counts rows (or distinct users) per item. Rows lacking the item, or the
/// user when one is bound, do not count.
fn tally_items<'a>(input: &MethodInput<'a>, items: &str) -> BTreeMap<&'a str, Tally<'a>> {
    let distinct = input.is_bound(USER);
    let mut tallies: BTreeMap<&str, Tally> = BTreeMap::new();
    for row in input.rows() {
        let Some(item) = input.text(row, items) else {
            continue;
        };
        let user = input.text(row, USER);
        if distinct && user.is_none() {
            continue;
        }
        tallies
            .entry(item)
            .or_insert_with(|| Tally::new(distinct))
            .add(user);
    }
    tallies
}

pub struct CountItems {
    descriptor: AnalyticsMethodDescriptor,
}

impl CountItems {
    pub fn new() -> Self {
        let descriptor = AnalyticsMethodDescriptor::new(
            "count_items",
            "Count items",
            "Number of rows per distinct item.",
            vec![InputSpec::required(ITEMS, Text)],
            vec![OutputSpec::key("Item", Text, ITEMS), OutputSpec::new("Count", Numeric)],
            vec![],
        )
        .expect("valid descriptor");
        Self { descriptor }
    }
}

impl Default for CountItems {
    fn default() -> Self {
        Self::new()
    }
}

impl AnalyticsMethod for CountItems {
    fn descriptor(&self) -> &AnalyticsMethodDescriptor {
        &self.descriptor
    }

    fn execute(&self, input: &MethodInput<'_>) -> Result<DataTable, MethodError> {
        let rows = tally_items(input, ITEMS)
            .into_iter()
            .map(|(item, tally)| vec![Scalar::text(item), Scalar::Numeric(tally.count())])
            .collect();
        Ok(from_parts_unchecked(self.descriptor.output_columns(), rows))
    }
}

pub struct CountItemsPerWeek {
    descriptor: AnalyticsMethodDescriptor,
}

impl CountItemsPerWeek {
    pub fn new() -> Self {
        let descriptor = AnalyticsMethodDescriptor::new(
            "count_items_per_week",
            "Count items per week",
            "Occurrences of each item per ISO week; counts distinct users when User is mapped.",
            vec![
                InputSpec::required(ITEMS_TO_COUNT, Text),
                InputSpec::optional(USER, Text),
                InputSpec::required(TIMESTAMP, Numeric),
            ],
            vec![
                OutputSpec::key("Item", Text, ITEMS_TO_COUNT),
                OutputSpec::new("Week", Text),
                OutputSpec::new("Count", Numeric),
            ],
            vec![],
        )
        .expect("valid descriptor");
        Self { descriptor }
    }
}

impl Default for CountItemsPerWeek {
    fn default() -> Self {
        Self::new()
    }
}

impl AnalyticsMethod for CountItemsPerWeek {
    fn descriptor(&self) -> &AnalyticsMethodDescriptor {
        &self.descriptor
    }

    fn execute(&self, input: &MethodInput<'_>) -> Result<DataTable, MethodError> {
        let distinct = input.is_bound(USER);
        // Keyed by (week, item) so the output comes out week-major.
        let mut tallies: BTreeMap<(String, &str), Tally> = BTreeMap::new();
        for row in input.rows() {
            let (Some(item), Some(week)) = (
                input.text(row, ITEMS_TO_COUNT),
                input.number(row, TIMESTAMP).and_then(iso_week_label),
            ) else {
                continue;
            };
            let user = input.text(row, USER);
            if distinct && user.is_none() {
                continue;
            }
            tallies
                .entry((week, item))
                .or_insert_with(|| Tally::new(distinct))
                .add(user);
        }
        let rows = tallies
            .into_iter()
            .map(|((week, item), tally)| {
                vec![Scalar::text(item), Scalar::Text(week), Scalar::Numeric(tally.count())]
            })
            .collect();
        Ok(from_parts_unchecked(self.descriptor.output_columns(), rows))
    }
}

/// `count_n_most_occurring_items`: the N items with the highest counts,
/// ties broken by ascending item.
pub struct CountTopItems {
    descriptor: AnalyticsMethodDescriptor,
}

impl CountTopItems {
    pub fn new() -> Self {
        let descriptor = AnalyticsMethodDescriptor::new(
            "count_n_most_occurring_items",
            "Count N most occurring items",
            "The N most frequent items; counts distinct users when User is mapped.",
            vec![
                InputSpec::required(ITEMS_TO_COUNT, Text),
                InputSpec::optional(USER, Text),
            ],
            vec![
                OutputSpec::key("Item", Text, ITEMS_TO_COUNT),
                OutputSpec::new("Count", Numeric),
            ],
            vec![ParameterSpec::numeric("N", 10.0, "How many items to keep")],
        )
        .expect("valid descriptor");
        Self { descriptor }
    }
}

impl Default for CountTopItems {
    fn default() -> Self {
        Self::new()
    }
}

impl AnalyticsMethod for CountTopItems {
    fn descriptor(&self) -> &AnalyticsMethodDescriptor {
        &self.descriptor
    }

    fn execute(&self, input: &MethodInput<'_>) -> Result<DataTable, MethodError> {
        let n = input.integer("N", 1, i64::from(u32::MAX))? as usize;
        let tallies = tally_items(input, ITEMS_TO_COUNT);
        if tallies.is_empty() {
            return Ok(empty_output(&self.descriptor));
        }
        let mut counted: Vec<(&str, f64)> = tallies
            .into_iter()
            .map(|(item, tally)| (item, tally.count()))
            .collect();
        // Stable sort keeps the ascending item order among equal counts.
        counted.sort_by(|a, b| b.1.total_cmp(&a.1));
        counted.truncate(n);
        let rows = counted
            .into_iter()
            .map(|(item, count)| vec![Scalar::text(item), Scalar::Numeric(count)])
            .collect();
        Ok(from_parts_unchecked(self.descriptor.output_columns(), rows))
    }
}
