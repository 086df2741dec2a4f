use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{box_stats, BoxStats, ChartChoice, ChartError, ChartRegistry, ChartSpec, ChartType};
use crate::model::{next_iso_week, parse_iso_week, ColumnType, DataTable, Scalar};

/// Label used for a Missing category, series or point label.
pub const MISSING_LABEL: &str = "(missing)";

/// Column that composite indicators add to tag rows with their part name.
const INDICATOR_COLUMN: &str = "Indicator";

/// Longest week range that gets zero-filled; wider ranges are only sorted.
const MAX_FILLED_WEEKS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeriesData {
    /// One value per domain entry.
    Values { values: Vec<f64> },
    Points { points: Vec<Point> },
    /// One box (or none, for an empty group) per domain entry.
    Boxes { boxes: Vec<Option<BoxStats>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    #[serde(flatten)]
    pub data: SeriesData,
}

fn label(cell: &Scalar) -> String {
    match cell {
        Scalar::Missing => MISSING_LABEL.into(),
        other => other.to_string(),
    }
}

/// Values in order of first appearance, with their positions.
#[derive(Default)]
struct Interner {
    order: Vec<String>,
    index: BTreeMap<String, usize>,
}

impl Interner {
    fn intern(&mut self, value: String) -> usize {
        if let Some(&i) = self.index.get(&value) {
            return i;
        }
        let i = self.order.len();
        self.index.insert(value.clone(), i);
        self.order.push(value);
        i
    }
}

/// Reorders the domain chronologically when every entry is an ISO week, and
/// fills the gaps between the first and last week.
fn week_domain(domain: &[String]) -> Option<Vec<String>> {
    if domain.is_empty() {
        return None;
    }
    let mut weeks: Vec<((i32, u32), &String)> = domain
        .iter()
        .map(|w| parse_iso_week(w).map(|key| (key, w)))
        .collect::<Option<_>>()?;
    weeks.sort();
    let first = weeks[0].1.clone();
    let last = weeks[weeks.len() - 1].1;
    let mut filled = vec![first];
    while filled.last() != Some(last) {
        if filled.len() > MAX_FILLED_WEEKS {
            return Some(weeks.into_iter().map(|(_, w)| w.clone()).collect());
        }
        filled.push(next_iso_week(filled.last().unwrap())?);
    }
    Some(filled)
}

struct Bound<'a> {
    table: &'a DataTable,
    choice: &'a ChartChoice,
}

impl Bound<'_> {
    fn index(&self, role: &str) -> Option<usize> {
        self.choice
            .viz_mappings
            .get(role)
            .and_then(|column| self.table.column_index(column))
    }

    fn column_name(&self, role: &str) -> String {
        self.choice.viz_mappings.get(role).unwrap_or_default().into()
    }

    /// The explicit series role, else the composite tag column when present.
    fn series_index(&self) -> Option<usize> {
        self.index("series").or_else(|| {
            let i = self.table.column_index(INDICATOR_COLUMN)?;
            (self.table.columns()[i].column_type == ColumnType::Text).then_some(i)
        })
    }
}

/// Category by series grid of summed values.
fn categorical(bound: &Bound, x: usize, y: usize, series: Option<usize>) -> (Vec<String>, Vec<Series>) {
    let mut domain = Interner::default();
    let mut names = Interner::default();
    let mut cells: Vec<(usize, usize, f64)> = Vec::new();
    for row in bound.table.rows() {
        let Some(value) = row[y].as_number() else {
            continue;
        };
        let d = domain.intern(label(&row[x]));
        let s = match series {
            Some(s) => names.intern(label(&row[s])),
            None => names.intern(bound.table.columns()[y].name.clone()),
        };
        cells.push((s, d, value));
    }
    let mut grid = vec![vec![0.0; domain.order.len()]; names.order.len()];
    for &(s, d, v) in &cells {
        grid[s][d] += v;
    }
    let mut order = domain.order;
    if let Some(weeks) = week_domain(&order) {
        let position: BTreeMap<&str, usize> =
            order.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect();
        grid = grid
            .into_iter()
            .map(|values| {
                weeks
                    .iter()
                    .map(|w| position.get(w.as_str()).map_or(0.0, |&i| values[i]))
                    .collect()
            })
            .collect();
        order = weeks;
    }
    let series = names
        .order
        .into_iter()
        .zip(grid)
        .map(|(name, values)| Series {
            name,
            data: SeriesData::Values { values },
        })
        .collect();
    (order, series)
}

fn scatter(bound: &Bound, x: usize, y: usize) -> Vec<Series> {
    let series = bound.series_index();
    let point_label = bound.index("label");
    let mut names = Interner::default();
    let mut groups: Vec<Vec<Point>> = Vec::new();
    for row in bound.table.rows() {
        let (Some(px), Some(py)) = (row[x].as_number(), row[y].as_number()) else {
            continue;
        };
        let s = match series {
            Some(s) => names.intern(label(&row[s])),
            None => names.intern(bound.table.columns()[y].name.clone()),
        };
        if s == groups.len() {
            groups.push(Vec::new());
        }
        groups[s].push(Point {
            x: px,
            y: py,
            label: point_label.map(|l| label(&row[l])),
        });
    }
    names
        .order
        .into_iter()
        .zip(groups)
        .map(|(name, points)| Series {
            name,
            data: SeriesData::Points { points },
        })
        .collect()
}

fn box_plot(bound: &Bound, x: usize, y: usize) -> (Vec<String>, Vec<Series>) {
    let mut domain = Interner::default();
    let mut samples: Vec<Vec<f64>> = Vec::new();
    for row in bound.table.rows() {
        let Some(value) = row[y].as_number() else {
            continue;
        };
        let d = domain.intern(label(&row[x]));
        if d == samples.len() {
            samples.push(Vec::new());
        }
        samples[d].push(value);
    }
    if samples.is_empty() {
        return (Vec::new(), Vec::new());
    }
    let boxes = samples.iter().map(|s| box_stats(s)).collect();
    let series = vec![Series {
        name: bound.table.columns()[y].name.clone(),
        data: SeriesData::Boxes { boxes },
    }];
    (domain.order, series)
}

fn all_finite(series: &[Series]) -> bool {
    series.iter().all(|s| match &s.data {
        SeriesData::Values { values } => values.iter().all(|v| v.is_finite()),
        SeriesData::Points { points } => points.iter().all(|p| p.x.is_finite() && p.y.is_finite()),
        SeriesData::Boxes { boxes } => boxes.iter().flatten().all(|b| {
            [b.low, b.q1, b.median, b.q3, b.high]
                .iter()
                .chain(&b.outliers)
                .all(|v| v.is_finite())
        }),
    })
}

/// Renders an analyzed table. Pure: equal inputs give equal specs.
///
/// Categorical domains keep first-appearance order, except that a domain made
/// only of ISO weeks is sorted chronologically with missing weeks zero-filled.
/// Rows whose plotted value is Missing are left out. Values sharing a
/// category and series are summed.
pub fn render_chart(
    registry: &ChartRegistry,
    choice: &ChartChoice,
    table: &DataTable,
    title: &str,
) -> Result<ChartSpec, ChartError> {
    registry.validate_viz_mapping(choice, table.columns())?;
    let bound = Bound { table, choice };
    let idx = |role: &str| bound.index(role).expect("validated required role");
    let (x_role, y_role) = match choice.chart_type {
        ChartType::Pie => ("label", "value"),
        _ => ("x", "y"),
    };
    let (domain, series) = match choice.chart_type {
        ChartType::Bar | ChartType::Line | ChartType::StackedArea => {
            categorical(&bound, idx("x"), idx("y"), bound.series_index())
        }
        ChartType::Pie => categorical(&bound, idx("label"), idx("value"), None),
        ChartType::Scatter => (Vec::new(), scatter(&bound, idx("x"), idx("y"))),
        ChartType::BoxPlot => box_plot(&bound, idx("x"), idx("y")),
    };
    if !all_finite(&series) {
        return Err(ChartError::NonFiniteValue);
    }
    Ok(ChartSpec {
        chart_type: choice.chart_type,
        library_id: choice.library_id.clone(),
        title: title.into(),
        x_label: bound.column_name(x_role),
        y_label: bound.column_name(y_role),
        domain,
        series,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::methods::MappingSet;
    use crate::model::Column;
    use alloc::format;
    use proptest::prelude::*;

    fn table(columns: &[(&str, ColumnType)], rows: Vec<Vec<Scalar>>) -> DataTable {
        let mut t = DataTable::new(columns.iter().map(|(n, ty)| Column::new(*n, *ty)).collect()).unwrap();
        for row in rows {
            t.push_row(row).unwrap();
        }
        t
    }

    fn weekly(rows: &[(&str, &str, f64)]) -> DataTable {
        table(
            &[("Item", ColumnType::Text), ("Week", ColumnType::Text), ("Count", ColumnType::Numeric)],
            rows.iter()
                .map(|(i, w, c)| vec![Scalar::text(*i), Scalar::text(*w), Scalar::Numeric(*c)])
                .collect(),
        )
    }

    fn stacked() -> ChartChoice {
        ChartChoice::new(
            "c3",
            ChartType::StackedArea,
            MappingSet::new().bind("x", "Week").bind("y", "Count").bind("series", "Item"),
        )
    }

    fn values(s: &Series) -> &[f64] {
        match &s.data {
            SeriesData::Values { values } => values,
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn stacked_area_pivots_and_zero_fills_weeks() {
        // Week 2019-W02 has no rows at all; W03 only for "quiz".
        let t = weekly(&[
            ("slides", "2019-W03", 0.0),
            ("slides", "2019-W01", 4.0),
            ("quiz", "2019-W01", 1.0),
            ("quiz", "2019-W03", 2.0),
            ("slides", "2019-W04", 3.0),
        ]);
        let spec = render_chart(&ChartRegistry::with_defaults(), &stacked(), &t, "Weekly access").unwrap();
        assert_eq!(spec.domain, vec!["2019-W01", "2019-W02", "2019-W03", "2019-W04"]);
        assert_eq!(spec.series.len(), 2);
        assert_eq!(spec.series[0].name, "slides");
        assert_eq!(values(&spec.series[0]), &[4.0, 0.0, 0.0, 3.0]);
        assert_eq!(spec.series[1].name, "quiz");
        assert_eq!(values(&spec.series[1]), &[1.0, 0.0, 2.0, 0.0]);
        assert_eq!((spec.x_label.as_str(), spec.y_label.as_str()), ("Week", "Count"));
        assert_eq!(spec.title, "Weekly access");
    }

    #[test]
    fn weeks_cross_year_boundaries() {
        let t = weekly(&[("a", "2021-W01", 1.0), ("a", "2020-W52", 1.0)]);
        let spec = render_chart(&ChartRegistry::with_defaults(), &stacked(), &t, "").unwrap();
        assert_eq!(spec.domain, vec!["2020-W52", "2020-W53", "2021-W01"]);
    }

    #[test]
    fn empty_table_gives_empty_series() {
        let spec = render_chart(&ChartRegistry::with_defaults(), &stacked(), &weekly(&[]), "").unwrap();
        assert!(spec.domain.is_empty());
        assert!(spec.series.is_empty());
        let json = serde_json::to_value(&spec).unwrap();
        assert_eq!(json["chart_type"], "stacked_area");
        let back: ChartSpec = serde_json::from_value(json).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn composite_indicator_column_names_the_series() {
        let t = table(
            &[("Indicator", ColumnType::Text), ("Item", ColumnType::Text), ("Count", ColumnType::Numeric)],
            vec![
                vec![Scalar::text("Number of students"), Scalar::text("m1"), Scalar::Numeric(3.0)],
                vec![Scalar::text("Number of students"), Scalar::text("m2"), Scalar::Numeric(2.0)],
                vec![Scalar::text("Total Views"), Scalar::text("m2"), Scalar::Numeric(9.0)],
            ],
        );
        let bar = ChartChoice::new("c3", ChartType::Bar, MappingSet::new().bind("x", "Item").bind("y", "Count"));
        let spec = render_chart(&ChartRegistry::with_defaults(), &bar, &t, "").unwrap();
        let names: Vec<&str> = spec.series.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, vec!["Number of students", "Total Views"]);
        assert_eq!(spec.domain, vec!["m1", "m2"]);
        assert_eq!(values(&spec.series[1]), &[0.0, 9.0]);
    }

    #[test]
    fn scatter_and_box_plot() {
        let t = table(
            &[("User", ColumnType::Text), ("Views", ColumnType::Numeric), ("Points", ColumnType::Numeric)],
            vec![
                vec![Scalar::text("u1"), Scalar::Numeric(1.0), Scalar::Numeric(30.0)],
                vec![Scalar::text("u2"), Scalar::Numeric(5.0), Scalar::Missing],
                vec![Scalar::Missing, Scalar::Numeric(9.0), Scalar::Numeric(90.0)],
            ],
        );
        let registry = ChartRegistry::with_defaults();
        let scatter = ChartChoice::new(
            "c3",
            ChartType::Scatter,
            MappingSet::new().bind("x", "Views").bind("y", "Points").bind("label", "User"),
        );
        let spec = render_chart(&registry, &scatter, &t, "").unwrap();
        let SeriesData::Points { points } = &spec.series[0].data else { panic!() };
        assert_eq!(points.len(), 2);
        assert_eq!(points[1].label.as_deref(), Some(MISSING_LABEL));

        let boxes = ChartChoice::new("c3", ChartType::BoxPlot, MappingSet::new().bind("x", "User").bind("y", "Views"));
        let spec = render_chart(&registry, &boxes, &t, "").unwrap();
        assert_eq!(spec.domain, vec!["u1", "u2", MISSING_LABEL]);
        let SeriesData::Boxes { boxes } = &spec.series[0].data else { panic!() };
        assert_eq!(boxes[1].as_ref().unwrap().median, 5.0);
    }

    #[test]
    fn rendering_is_byte_identical() {
        let t = weekly(&[("a", "2019-W01", 1.0), ("b", "2019-W02", 2.5)]);
        let registry = ChartRegistry::with_defaults();
        let a = serde_json::to_string(&render_chart(&registry, &stacked(), &t, "x").unwrap()).unwrap();
        let b = serde_json::to_string(&render_chart(&registry, &stacked(), &t, "x").unwrap()).unwrap();
        assert_eq!(a, b);
    }

    fn plotted_sum(spec: &ChartSpec) -> f64 {
        spec.series.iter().map(|s| values(s).iter().sum::<f64>()).sum()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn plotted_sum_equals_column_sum(
            rows in prop::collection::vec(
                (prop::option::weighted(0.9, 0u8..6), 0u8..3, prop::option::weighted(0.9, -1e3f64..1e3), any::<bool>()),
                0..40,
            ),
            kind in 0usize..3,
        ) {
            let t = table(
                &[("Label", ColumnType::Text), ("Group", ColumnType::Text), ("Value", ColumnType::Numeric)],
                rows.iter()
                    .map(|(l, g, v, week)| {
                        let label = match (l, week) {
                            (None, _) => Scalar::Missing,
                            (Some(l), true) => Scalar::text(format!("2019-W{:02}", l + 1)),
                            (Some(l), false) => Scalar::text(format!("L{l}")),
                        };
                        vec![label, Scalar::text(format!("g{g}")), v.map_or(Scalar::Missing, Scalar::Numeric)]
                    })
                    .collect(),
            );
            let choice = match kind {
                0 => ChartChoice::new("c3", ChartType::Bar, MappingSet::new().bind("x", "Label").bind("y", "Value")),
                1 => ChartChoice::new("c3", ChartType::Pie, MappingSet::new().bind("label", "Label").bind("value", "Value")),
                _ => ChartChoice::new(
                    "c3",
                    ChartType::StackedArea,
                    MappingSet::new().bind("x", "Label").bind("y", "Value").bind("series", "Group"),
                ),
            };
            let spec = render_chart(&ChartRegistry::with_defaults(), &choice, &t, "").unwrap();
            let column: f64 = t.rows().iter().filter_map(|r| r[2].as_number()).sum();
            prop_assert!((plotted_sum(&spec) - column).abs() <= 1e-9);
            for s in &spec.series {
                prop_assert_eq!(values(s).len(), spec.domain.len());
            }
        }
    }
}
