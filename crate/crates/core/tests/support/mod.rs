//! Generators and reference implementations for randomized checks of the
//! query engine, privacy modes and input mapping.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use lava_core::methods::{suggest_mappings, validate_mapping, InputSpec, MappingSet, MappingViolation};
use lava_core::model::{AttributeDef, CategorySchema, Column, ColumnType, LearningEvent, Scalar, SchemaSet, Timestamp};
use lava_core::query::{query_dataset, AttributeFilter, DatasetScope, FilterSet, PrivacyMode, Pseudonymizer, QueryError};
use lava_core::store::{Dimension, EventStore};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use ColumnType::{Numeric, Text};

pub const SOURCES: [&str; 2] = ["Moodle", "L2P"];
pub const PLATFORMS: [&str; 2] = ["web", "mobile"];
pub const ACTIONS: [&str; 3] = ["view", "submit", "post"];
pub const CATEGORIES: [&str; 4] = ["Assignments", "Forum", "Materials", "Wiki"];
pub const USERS: [&str; 6] = ["u0", "u1", "u2", "u3", "u4", "u5"];

/// Overlapping attribute sets, including one name with clashing types.
pub fn schemas() -> SchemaSet {
    let schema = |name: &str, attrs: &[(&str, ColumnType)]| {
        CategorySchema::new(name, attrs.iter().map(|(n, t)| AttributeDef::new(*n, *t)).collect()).unwrap()
    };
    SchemaSet::new([
        schema("Assignments", &[("Title", Text), ("Points", Numeric), ("Kind", Text)]),
        schema("Forum", &[("Title", Text), ("Replies", Numeric), ("Kind", Text)]),
        schema("Materials", &[("Kind", Text), ("Title", Text), ("Size", Numeric)]),
        schema("Wiki", &[("Title", Text), ("Points", Text)]),
    ])
    .unwrap()
}

/// Reference: attributes of the first selected category that every other
/// selected category declares with the same type.
pub fn common(schemas: &SchemaSet, categories: &BTreeSet<String>) -> Vec<(String, ColumnType)> {
    let Some(first) = categories.iter().next() else { return Vec::new() };
    let Some(first) = schemas.get(first) else { return Vec::new() };
    first
        .attributes()
        .iter()
        .filter(|a| {
            categories.iter().all(|c| {
                schemas
                    .get(c)
                    .is_some_and(|s| s.attributes().iter().any(|b| b.name == a.name && b.column_type == a.column_type))
            })
        })
        .map(|a| (a.name.clone(), a.column_type))
        .collect()
}

pub fn value_for(ty: ColumnType, pick: u8) -> Scalar {
    match ty {
        Text => Scalar::text(["a", "b", "c"][usize::from(pick % 3)]),
        Numeric => Scalar::Numeric(f64::from(pick % 4)),
    }
}

#[derive(Debug, Clone)]
pub struct EventSeed {
    user: usize,
    source: usize,
    platform: usize,
    action: usize,
    category: usize,
    day: i64,
    attrs: Vec<Option<u8>>,
}

pub fn arb_seed() -> impl Strategy<Value = EventSeed> {
    (0..USERS.len(), 0..SOURCES.len(), 0..PLATFORMS.len(), 0..ACTIONS.len(), 0..CATEGORIES.len(), 0i64..60,
        prop::collection::vec(prop::option::weighted(0.8, any::<u8>()), 3))
        .prop_map(|(user, source, platform, action, category, day, attrs)| EventSeed {
            user, source, platform, action, category, day, attrs,
        })
}

pub fn build_events(seeds: &[EventSeed]) -> Vec<LearningEvent> {
    let schemas = schemas();
    seeds
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let category = CATEGORIES[s.category];
            let attributes = schemas
                .get(category)
                .unwrap()
                .attributes()
                .iter()
                .zip(&s.attrs)
                .filter_map(|(def, pick)| pick.map(|p| (def.name.clone(), value_for(def.column_type, p))))
                .collect();
            LearningEvent {
                event_id: format!("e{i}"),
                user_id: USERS[s.user].into(),
                timestamp: Timestamp::from_epoch_seconds(1_546_300_800 + s.day * 86_400 + (i as i64 % 7) * 3600).unwrap(),
                source: SOURCES[s.source].into(),
                platform: PLATFORMS[s.platform].into(),
                action: ACTIONS[s.action].into(),
                category: category.into(),
                attributes,
            }
        })
        .collect()
}

pub fn subset(all: &[&str], mask: u8) -> BTreeSet<String> {
    all.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, s)| s.to_string()).collect()
}

pub fn arb_scope() -> impl Strategy<Value = DatasetScope> {
    // Mostly full selections, so that most cases reach the row filter.
    let mask = |n: u32| prop_oneof![3 => Just(u8::MAX), 6 => 1u8..(1 << n), 1 => Just(0u8)];
    (mask(2), mask(2), mask(3), mask(4)).prop_map(|(s, p, a, c)| DatasetScope {
        sources: subset(&SOURCES, s),
        platforms: subset(&PLATFORMS, p),
        actions: subset(&ACTIONS, a),
        categories: subset(&CATEGORIES, c),
    })
}

pub fn arb_filters() -> impl Strategy<Value = FilterSet> {
    let attribute = prop::sample::select(vec!["Title", "Kind", "Points", "Replies", "Size"]);
    let filter = (attribute, prop::collection::vec(any::<u8>(), 1..3), any::<bool>()).prop_map(|(name, picks, numeric)| {
        let ty = if numeric { Numeric } else { Text };
        AttributeFilter::new(name, picks.into_iter().map(|p| value_for(ty, p)))
    });
    let day = prop::option::of(0i64..60).prop_map(|d| d.map(|d| Timestamp::from_epoch_seconds(1_546_300_800 + d * 86_400).unwrap()));
    let privacy = prop::sample::select(vec![
        PrivacyMode::EveryoneAnonymized,
        PrivacyMode::OwnDataOnly,
        PrivacyMode::EveryoneExceptOwnAnonymized,
    ]);
    (prop::collection::vec(filter, 0..3), day.clone(), day, privacy).prop_map(|(attribute_filters, time_start, time_end, privacy_mode)| FilterSet {
        attribute_filters,
        time_start,
        time_end,
        privacy_mode,
    })
}

/// Reference query: a single pass over every stored event.
pub fn oracle(
    events: &[LearningEvent],
    schemas: &SchemaSet,
    pseudonymizer: &Pseudonymizer,
    scope: &DatasetScope,
    filters: &FilterSet,
    requester: &str,
) -> Result<(Vec<String>, Vec<Vec<Scalar>>), QueryError> {
    for (dimension, selection) in [
        (Dimension::Source, &scope.sources),
        (Dimension::Platform, &scope.platforms),
        (Dimension::Action, &scope.actions),
        (Dimension::Category, &scope.categories),
    ] {
        if selection.is_empty() {
            return Err(QueryError::EmptyScope(dimension));
        }
    }
    if let (Some(s), Some(e)) = (filters.time_start, filters.time_end) {
        if s > e {
            return Err(QueryError::InvalidTimeRange);
        }
    }
    let attributes = common(schemas, &scope.categories);
    for f in &filters.attribute_filters {
        if !attributes.iter().any(|(n, _)| *n == f.attribute) {
            return Err(QueryError::AttributeNotCommon(f.attribute.clone()));
        }
    }
    let mut names: Vec<String> =
        ["Event Id", "User", "Timestamp", "Source", "Platform", "Action", "Category"].map(String::from).to_vec();
    names.extend(attributes.iter().map(|(n, _)| n.clone()));
    let mut rows = Vec::new();
    for e in events {
        let in_scope = scope.sources.contains(&e.source)
            && scope.platforms.contains(&e.platform)
            && scope.actions.contains(&e.action)
            && scope.categories.contains(&e.category);
        let in_time = filters.time_start.is_none_or(|s| e.timestamp >= s) && filters.time_end.is_none_or(|t| e.timestamp < t);
        let attrs_ok = filters
            .attribute_filters
            .iter()
            .all(|f| e.attributes.get(&f.attribute).is_some_and(|v| f.values.contains(v)));
        if !(in_scope && in_time && attrs_ok) {
            continue;
        }
        let own = e.user_id == requester;
        let user = match (filters.privacy_mode, own) {
            (PrivacyMode::OwnDataOnly, true) => e.user_id.clone(),
            (PrivacyMode::OwnDataOnly, false) | (PrivacyMode::EveryoneExceptOwnAnonymized, true) => continue,
            _ => pseudonymizer.token(&e.user_id),
        };
        let mut row = vec![
            Scalar::text(e.event_id.clone()),
            Scalar::text(user),
            Scalar::Numeric(e.timestamp.epoch_seconds() as f64),
            Scalar::text(e.source.clone()),
            Scalar::text(e.platform.clone()),
            Scalar::text(e.action.clone()),
            Scalar::text(e.category.clone()),
        ];
        row.extend(attributes.iter().map(|(n, _)| e.attributes.get(n).cloned().unwrap_or(Scalar::Missing)));
        rows.push(row);
    }
    Ok((names, rows))
}

pub fn store_of(events: &[LearningEvent]) -> EventStore {
    // Several commits, to exercise the category index across batches.
    let mut store = EventStore::new();
    for chunk in events.chunks(37) {
        store.commit(chunk.to_vec()).unwrap();
    }
    store
}

pub fn ids(table: &lava_core::model::DataTable) -> BTreeSet<String> {
    table.values(0).map(|v| v.to_string()).collect()
}

#[derive(Debug, Clone)]
pub struct Fuzz {
    pub inputs: Vec<InputSpec>,
    pub columns: Vec<Column>,
}

pub fn arb_fuzz() -> impl Strategy<Value = Fuzz> {
    let ty = prop::sample::select(vec![Text, Numeric]);
    let input = (0u8..6, ty.clone(), any::<bool>());
    let column = (0u8..8, ty);
    (prop::collection::vec(input, 0..6), prop::collection::vec(column, 0..9)).prop_map(|(inputs, columns)| {
        let mut seen = BTreeSet::new();
        let inputs = inputs
            .into_iter()
            .filter(|(n, _, _)| seen.insert(*n))
            .map(|(n, t, required)| InputSpec { name: format!("c{n}"), column_type: t, required })
            .collect();
        let mut seen = BTreeSet::new();
        let columns = columns
            .into_iter()
            .filter(|(n, _)| seen.insert(*n))
            .map(|(n, t)| Column::new(format!("c{n}"), t))
            .collect();
        Fuzz { inputs, columns }
    })
}

pub fn coverable(f: &Fuzz) -> bool {
    [Text, Numeric].into_iter().all(|t| {
        f.inputs.iter().filter(|i| i.required && i.column_type == t).count()
            <= f.columns.iter().filter(|c| c.column_type == t).count()
    })
}

/// `query_dataset` against [`oracle`] for one case.
pub fn check_query(seeds: &[EventSeed], scope: &DatasetScope, filters: &FilterSet, requester: &str) -> Result<(), TestCaseError> {
    let events = build_events(seeds);
    let store = store_of(&events);
    let schemas = schemas();
    let p = Pseudonymizer::new(*b"deployment secret");
    let got = query_dataset(&store, &schemas, &p, scope, filters, requester);
    let want = oracle(&events, &schemas, &p, scope, filters, requester);
    match (got, want) {
        (Ok(table), Ok((names, rows))) => {
            let got_names: Vec<String> = table.columns().iter().map(|c| c.name.clone()).collect();
            prop_assert_eq!(got_names, names);
            prop_assert_eq!(table.rows(), rows.as_slice());
        }
        (Err(a), Err(b)) => prop_assert_eq!(a, b),
        (got, want) => prop_assert!(false, "got {:?}, want {:?}", got.map(|t| t.len()), want.map(|w| w.1.len())),
    }
    Ok(())
}

/// Own and everyone-but-own split the anonymized dataset; tokens are stable
/// and one-to-one.
pub fn check_privacy(seeds: &[EventSeed], requester: &str, key: &[u8]) -> Result<(), TestCaseError> {
    let events = build_events(seeds);
    let store = store_of(&events);
    let schemas = schemas();
    let p = Pseudonymizer::new(key.to_vec());
    let scope = DatasetScope {
        sources: subset(&SOURCES, u8::MAX),
        platforms: subset(&PLATFORMS, u8::MAX),
        actions: subset(&ACTIONS, u8::MAX),
        categories: subset(&CATEGORIES, u8::MAX),
    };
    let run = |mode| query_dataset(&store, &schemas, &p, &scope, &FilterSet::with_privacy(mode), requester).unwrap();
    let own = run(PrivacyMode::OwnDataOnly);
    let others = run(PrivacyMode::EveryoneExceptOwnAnonymized);
    let everyone = run(PrivacyMode::EveryoneAnonymized);

    let (own_ids, other_ids) = (ids(&own), ids(&others));
    prop_assert!(own_ids.is_disjoint(&other_ids));
    prop_assert_eq!(own_ids.union(&other_ids).cloned().collect::<BTreeSet<_>>(), ids(&everyone));
    prop_assert!(own.values(1).all(|u| u.as_text() == Some(requester)));
    let raw: BTreeSet<&str> = USERS.into_iter().collect();
    prop_assert!(everyone.values(1).all(|u| !raw.contains(u.as_text().unwrap())));
    prop_assert_eq!(&run(PrivacyMode::EveryoneAnonymized), &everyone);

    // One token per user, and distinct users get distinct tokens.
    let mut token_of: BTreeMap<String, String> = BTreeMap::new();
    let mut user_of: BTreeMap<String, String> = BTreeMap::new();
    for row in everyone.rows() {
        let user = &store.get(row[0].as_text().unwrap()).unwrap().user_id;
        let token = row[1].as_text().unwrap().to_string();
        prop_assert_eq!(token_of.entry(user.clone()).or_insert_with(|| token.clone()), &token);
        prop_assert_eq!(user_of.entry(token).or_insert_with(|| user.clone()), user);
    }
    Ok(())
}

/// Suggestions never bind a column twice and validate whenever the inputs
/// can be covered at all.
pub fn check_suggestions(f: &Fuzz) -> Result<(), TestCaseError> {
    let suggestion = suggest_mappings(&f.inputs, &f.columns);
    let bound: Vec<&str> = suggestion.iter().map(|(_, c)| c).collect();
    prop_assert_eq!(bound.iter().collect::<BTreeSet<_>>().len(), bound.len());
    match validate_mapping(&f.inputs, &f.columns, &suggestion) {
        Ok(()) => prop_assert!(coverable(f)),
        Err(report) => {
            prop_assert!(!coverable(f));
            for v in report.violations {
                prop_assert!(matches!(v, MappingViolation::MissingRequiredInput { .. }), "{:?}", v);
            }
        }
    }
    Ok(())
}

/// Binds inputs to arbitrary columns, leaves one out, and expects exactly the
/// type mismatches and unbound required inputs to be reported.
pub fn check_violations(f: &Fuzz, picks: &[prop::sample::Index], skip: &prop::sample::Index) -> Result<(), TestCaseError> {
    if f.inputs.is_empty() || f.columns.is_empty() {
        return Ok(());
    }
    let mut mappings = MappingSet::new();
    for (input, pick) in f.inputs.iter().zip(picks) {
        mappings.insert(input.name.clone(), pick.get(&f.columns).name.clone());
    }
    let dropped = skip.get(&f.inputs).name.clone();
    mappings.remove(&dropped);
    let expected: BTreeSet<String> = f
        .inputs
        .iter()
        .filter(|i| match mappings.get(&i.name) {
            None => i.required,
            Some(c) => f.columns.iter().find(|col| col.name == c).unwrap().column_type != i.column_type,
        })
        .map(|i| i.name.clone())
        .collect();
    let reported: BTreeSet<String> = match validate_mapping(&f.inputs, &f.columns, &mappings) {
        Ok(()) => BTreeSet::new(),
        Err(report) => report
            .violations
            .into_iter()
            .map(|v| match v {
                MappingViolation::MissingRequiredInput { input } | MappingViolation::TypeMismatch { input, .. } => input,
                other => panic!("unexpected {other:?}"),
            })
            .collect(),
    };
    prop_assert_eq!(reported, expected);
    Ok(())
}
