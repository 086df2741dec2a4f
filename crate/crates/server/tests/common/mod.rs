//! Reference indicators and brute-force oracles shared by the integration
//! tests and the acceptance harness.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use lava_core::model::LearningEvent;
use serde_json::{json, Value};

pub const ADMIN_TOKEN: &str = "admin-secret";

/// `tokens.json` for tests: one teacher and two students.
pub fn tokens_json() -> Value {
    json!({
        "tok-teacher": "teacher",
        "tok-teacher2": "teacher2",
        "tok-s0001": "s0001",
        "tok-s0002": "s0002",
    })
}

fn scope(categories: &[&str], actions: &[&str]) -> Value {
    json!({
        "sources": ["Moodle"],
        "platforms": ["web", "mobile"],
        "actions": actions,
        "categories": categories,
    })
}

pub fn weekly_access() -> Value {
    json!({
        "kind": "basic",
        "name": "Students weekly learning resources access",
        "scope": scope(&["Learning Materials"], &["view"]),
        "method_id": "count_items_per_week",
        "mappings": {"Items to count": "Name", "User": "User", "Timestamp": "Timestamp"},
        "chart": {"library_id": "c3", "chart_type": "stacked_area",
                  "viz_mappings": {"x": "Week", "y": "Count", "series": "Item"}},
    })
}

pub fn points_overview() -> Value {
    json!({
        "kind": "basic",
        "name": "Students assignment points overview",
        "scope": scope(&["Assignments"], &["submit"]),
        "method_id": "average_per_group",
        "mappings": {"Group": "Title", "Value": "Points"},
        "chart": {"library_id": "c3", "chart_type": "bar",
                  "viz_mappings": {"x": "Group", "y": "Aggregate"}},
    })
}

pub fn top_part(name: &str, distinct_users: bool) -> Value {
    let mut mappings = json!({"Items to count": "Name"});
    if distinct_users {
        mappings["User"] = json!("User");
    }
    json!({
        "kind": "basic",
        "name": name,
        "scope": scope(&["Learning Materials"], &["view"]),
        "method_id": "count_n_most_occurring_items",
        "parameters": {"N": 10},
        "mappings": mappings,
        "chart": {"library_id": "c3", "chart_type": "bar", "viz_mappings": {"x": "Item", "y": "Count"}},
    })
}

fn inline(mut basic: Value) -> Value {
    basic.as_object_mut().unwrap().remove("kind");
    basic
}

pub fn most_viewed() -> Value {
    json!({
        "kind": "composite",
        "name": "Most viewed learning materials",
        "parts": [inline(top_part("Number of students", true)), inline(top_part("Total Views", false))],
        "chart": {"library_id": "c3", "chart_type": "bar",
                  "viz_mappings": {"x": "Item", "y": "Count", "series": "Indicator"}},
    })
}

pub fn views_part() -> Value {
    json!({
        "kind": "basic",
        "name": "Views",
        "scope": scope(&["Learning Materials"], &["view"]),
        "method_id": "count_items",
        "mappings": {"Items": "User"},
        "chart": {"library_id": "c3", "chart_type": "bar", "viz_mappings": {"x": "Item", "y": "Count"}},
    })
}

pub fn points_part() -> Value {
    json!({
        "kind": "basic",
        "name": "Points",
        "scope": scope(&["Assignments"], &["submit"]),
        "method_id": "average_per_group",
        "mappings": {"Group": "User", "Value": "Points"},
        "chart": {"library_id": "c3", "chart_type": "bar", "viz_mappings": {"x": "Group", "y": "Aggregate"}},
    })
}

pub fn correlation() -> Value {
    json!({
        "kind": "multilevel",
        "name": "Correlation of assignment points and learning resources views",
        "parts": [inline(views_part()), inline(points_part())],
        "merge_attribute": "User",
        "second_method_id": "kmeans_clustering",
        "second_parameters": {"k": 3, "seed": 42},
        "second_mappings": {"Entity": "User", "Feature1": "Views: Count", "Feature2": "Points: Aggregate"},
        "chart": {"library_id": "c3", "chart_type": "scatter",
                  "viz_mappings": {"x": "Feature1", "y": "Feature2", "series": "Cluster"}},
    })
}

pub fn reference_indicators() -> Vec<Value> {
    vec![weekly_access(), points_overview(), most_viewed(), correlation()]
}

/// Column names and rows of a serialized table.
pub fn table(value: &Value) -> (Vec<String>, Vec<Vec<Value>>) {
    let columns = value["columns"]
        .as_array()
        .expect("columns")
        .iter()
        .map(|c| c["name"].as_str().unwrap().to_string())
        .collect();
    let rows = value["rows"]
        .as_array()
        .expect("rows")
        .iter()
        .map(|r| r.as_array().unwrap().clone())
        .collect();
    (columns, rows)
}

/// Rows keyed by the named text columns, valued by a numeric column.
pub fn keyed(value: &Value, keys: &[&str], number: &str) -> BTreeMap<Vec<String>, f64> {
    let (columns, rows) = table(value);
    let pos = |name: &str| columns.iter().position(|c| c == name).unwrap_or_else(|| panic!("no column {name}"));
    let key_pos: Vec<usize> = keys.iter().map(|k| pos(k)).collect();
    let n = pos(number);
    let mut out = BTreeMap::new();
    for row in rows {
        let key = key_pos.iter().map(|&i| row[i].as_str().unwrap().to_string()).collect();
        assert!(out.insert(key, row[n].as_f64().unwrap()).is_none(), "duplicate key");
    }
    out
}

fn in_scope(e: &LearningEvent, category: &str, action: &str) -> bool {
    e.source == "Moodle"
        && (e.platform == "web" || e.platform == "mobile")
        && e.category == category
        && e.action == action
}

fn views(events: &[LearningEvent]) -> impl Iterator<Item = &LearningEvent> {
    events.iter().filter(|e| in_scope(e, "Learning Materials", "view"))
}

fn text_attr<'a>(e: &'a LearningEvent, name: &str) -> Option<&'a str> {
    e.attributes.get(name).and_then(|v| v.as_text())
}

/// Distinct users per (material, ISO week).
pub fn weekly_oracle(events: &[LearningEvent]) -> BTreeMap<Vec<String>, f64> {
    let mut seen: BTreeMap<Vec<String>, BTreeSet<&str>> = BTreeMap::new();
    for e in views(events) {
        if let Some(name) = text_attr(e, "Name") {
            seen.entry(vec![name.to_string(), e.timestamp.iso_week()])
                .or_default()
                .insert(&e.user_id);
        }
    }
    seen.into_iter().map(|(k, users)| (k, users.len() as f64)).collect()
}

/// Mean points per assignment title.
pub fn points_oracle(events: &[LearningEvent]) -> BTreeMap<Vec<String>, f64> {
    let mut sums: BTreeMap<Vec<String>, (f64, usize)> = BTreeMap::new();
    for e in events.iter().filter(|e| in_scope(e, "Assignments", "submit")) {
        if let (Some(title), Some(points)) = (text_attr(e, "Title"), e.attributes.get("Points").and_then(|p| p.as_number())) {
            let slot = sums.entry(vec![title.to_string()]).or_default();
            slot.0 += points;
            slot.1 += 1;
        }
    }
    sums.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect()
}

/// The ten most viewed materials by view count or by distinct viewers,
/// ties by ascending name.
pub fn top_oracle(events: &[LearningEvent], distinct_users: bool) -> Vec<(String, f64)> {
    let mut per: BTreeMap<&str, (usize, BTreeSet<&str>)> = BTreeMap::new();
    for e in views(events) {
        if let Some(name) = text_attr(e, "Name") {
            let slot = per.entry(name).or_default();
            slot.0 += 1;
            slot.1.insert(&e.user_id);
        }
    }
    let mut all: Vec<(String, f64)> = per
        .into_iter()
        .map(|(name, (n, users))| (name.to_string(), if distinct_users { users.len() } else { n } as f64))
        .collect();
    all.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    all.truncate(10);
    all
}

/// Per-user (views, mean points) for users present in both parts.
pub fn features_oracle(events: &[LearningEvent]) -> BTreeMap<String, (f64, f64)> {
    let mut view_counts: BTreeMap<&str, f64> = BTreeMap::new();
    for e in views(events) {
        *view_counts.entry(&e.user_id).or_default() += 1.0;
    }
    let mut points: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for e in events.iter().filter(|e| in_scope(e, "Assignments", "submit")) {
        if let Some(p) = e.attributes.get("Points").and_then(|p| p.as_number()) {
            let slot = points.entry(&e.user_id).or_default();
            slot.0 += p;
            slot.1 += 1;
        }
    }
    view_counts
        .into_iter()
        .filter_map(|(u, v)| points.get(u).map(|(s, n)| (u.to_string(), (v, s / *n as f64))))
        .collect()
}

/// Adjusted Rand index of two labelings of the same items.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let choose2 = |x: f64| x * (x - 1.0) / 2.0;
    let mut joint: HashMap<(usize, usize), f64> = HashMap::new();
    let mut rows: HashMap<usize, f64> = HashMap::new();
    let mut cols: HashMap<usize, f64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_default() += 1.0;
        *rows.entry(x).or_default() += 1.0;
        *cols.entry(y).or_default() += 1.0;
    }
    let index: f64 = joint.values().map(|&v| choose2(v)).sum();
    let sum_a: f64 = rows.values().map(|&v| choose2(v)).sum();
    let sum_b: f64 = cols.values().map(|&v| choose2(v)).sum();
    let expected = sum_a * sum_b / choose2(n);
    let max = (sum_a + sum_b) / 2.0;
    if max == expected {
        return 1.0;
    }
    (index - expected) / (max - expected)
}

pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

pub fn maps_agree(got: &BTreeMap<Vec<String>, f64>, want: &BTreeMap<Vec<String>, f64>) -> Result<(), String> {
    if got.len() != want.len() {
        return Err(format!("{} rows, expected {}", got.len(), want.len()));
    }
    for (key, w) in want {
        match got.get(key) {
            Some(g) if close(*g, *w) => {}
            Some(g) => return Err(format!("{key:?}: got {g}, expected {w}")),
            None => return Err(format!("missing row {key:?}")),
        }
    }
    Ok(())
}

/// Checks an analyzed table of one reference indicator against its oracle.
/// `tokens` maps pseudonyms back to user ids.
pub fn check_reference(index: usize, analyzed: &Value, events: &[LearningEvent], tokens: &HashMap<String, String>) -> Result<(), String> {
    match index {
        0 => maps_agree(&keyed(analyzed, &["Item", "Week"], "Count"), &weekly_oracle(events)),
        1 => maps_agree(&keyed(analyzed, &["Group"], "Aggregate"), &points_oracle(events)),
        2 => {
            let (columns, rows) = table(analyzed);
            if columns != ["Indicator", "Item", "Count"] {
                return Err(format!("columns {columns:?}"));
            }
            let mut expected = Vec::new();
            for (part, distinct) in [("Number of students", true), ("Total Views", false)] {
                for (item, count) in top_oracle(events, distinct) {
                    expected.push(json!([part, item, count]));
                }
            }
            let got: Vec<Value> = rows.into_iter().map(Value::Array).collect();
            if got.len() != expected.len() {
                return Err(format!("{} rows, expected {}", got.len(), expected.len()));
            }
            for (g, w) in got.iter().zip(&expected) {
                if g[0] != w[0] || g[1] != w[1] || !close(g[2].as_f64().unwrap(), w[2].as_f64().unwrap()) {
                    return Err(format!("row {g} expected {w}"));
                }
            }
            Ok(())
        }
        3 => {
            let (columns, rows) = table(analyzed);
            let pos = |n: &str| columns.iter().position(|c| c == n).ok_or(format!("no column {n}"));
            let (e, f1, f2) = (pos("Entity")?, pos("Feature1")?, pos("Feature2")?);
            let want = features_oracle(events);
            if rows.len() != want.len() {
                return Err(format!("{} entities, expected {}", rows.len(), want.len()));
            }
            for row in rows {
                let token = row[e].as_str().unwrap();
                let user = tokens.get(token).ok_or(format!("unknown pseudonym {token}"))?;
                let (v, p) = want[user];
                if !close(row[f1].as_f64().unwrap(), v) || !close(row[f2].as_f64().unwrap(), p) {
                    return Err(format!("{user}: features {} {} expected {v} {p}", row[f1], row[f2]));
                }
            }
            Ok(())
        }
        _ => unreachable!(),
    }
}

/// Cluster label per user, through the pseudonym map.
pub fn clusters(analyzed: &Value, tokens: &HashMap<String, String>) -> BTreeMap<String, String> {
    let (columns, rows) = table(analyzed);
    let e = columns.iter().position(|c| c == "Entity").unwrap();
    let c = columns.iter().position(|c| c == "Cluster").unwrap();
    rows.iter()
        .map(|r| (tokens[r[e].as_str().unwrap()].clone(), r[c].as_str().unwrap().to_string()))
        .collect()
}

/// ARI between found clusters and the planted groups.
pub fn ari_against(found: &BTreeMap<String, String>, planted: &BTreeMap<String, usize>) -> f64 {
    let mut names: Vec<&String> = found.values().collect::<BTreeSet<_>>().into_iter().collect();
    names.sort();
    let label = |n: &String| names.iter().position(|x| *x == n).unwrap();
    let users: Vec<&String> = found.keys().collect();
    let a: Vec<usize> = users.iter().map(|u| label(&found[*u])).collect();
    let b: Vec<usize> = users.iter().map(|u| planted[*u]).collect();
    adjusted_rand_index(&a, &b)
}

/// Sum of every value in bar/line/stacked/pie series.
pub fn chart_total(chart: &Value) -> f64 {
    chart["series"]
        .as_array()
        .unwrap()
        .iter()
        .filter_map(|s| s["values"].as_array())
        .flatten()
        .map(|v| v.as_f64().unwrap_or(0.0))
        .sum()
}
