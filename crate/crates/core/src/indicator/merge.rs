//! The first-level merge of multi-level indicators: an inner join on one
//! common column.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::methods::{AnalyticsMethodDescriptor, MappingSet};
use crate::model::{from_parts_unchecked, Column, DataTable, Scalar, TableError};

/// Position of the output column that carries `merge_attribute`.
///
/// That is an output literally named `merge_attribute`, or a key output whose
/// source input is mapped to a dataset column of that name (so counting
/// `Items` bound to `User` yields a per-user `Item` column).
pub fn merge_key(
    descriptor: &AnalyticsMethodDescriptor,
    mappings: &MappingSet,
    merge_attribute: &str,
) -> Option<usize> {
    descriptor.outputs.iter().position(|o| {
        o.name == merge_attribute
            || o
                .key_of
                .as_deref()
                .is_some_and(|input| mappings.get(input) == Some(merge_attribute))
    })
}

/// One first-level result ready for joining.
pub struct JoinPart<'a> {
    pub name: &'a str,
    pub table: &'a DataTable,
    pub key: usize,
}

/// The merge column first, then every part's other columns renamed
/// `"<part>: <column>"`.
pub fn joined_columns(merge_attribute: &str, parts: &[(&str, &[Column], usize)]) -> Vec<Column> {
    let key_type = parts
        .first()
        .map(|(_, columns, key)| columns[*key].column_type)
        .unwrap_or(crate::model::ColumnType::Text);
    let mut columns = Vec::from([Column::new(merge_attribute, key_type)]);
    for (name, part_columns, key) in parts {
        for (i, column) in part_columns.iter().enumerate() {
            if i != *key {
                columns.push(Column::new(format!("{name}: {}", column.name), column.column_type));
            }
        }
    }
    columns
}

/// Inner join of all parts on their key columns.
///
/// Rows come out in the order a nested loop over the parts would produce
/// them: first part's rows outermost. Missing keys never match.
pub fn inner_join(merge_attribute: &str, parts: &[JoinPart<'_>]) -> Result<DataTable, TableError> {
    let shapes: Vec<(&str, &[Column], usize)> = parts
        .iter()
        .map(|p| (p.name, p.table.columns(), p.key))
        .collect();
    let columns = joined_columns(merge_attribute, &shapes);
    DataTable::new(columns.clone())?;
    let Some((first, rest)) = parts.split_first() else {
        return Ok(from_parts_unchecked(columns, Vec::new()));
    };
    let indexes: Vec<BTreeMap<&Scalar, Vec<usize>>> = rest
        .iter()
        .map(|part| {
            let mut index: BTreeMap<&Scalar, Vec<usize>> = BTreeMap::new();
            for (i, row) in part.table.rows().iter().enumerate() {
                if !row[part.key].is_missing() {
                    index.entry(&row[part.key]).or_default().push(i);
                }
            }
            index
        })
        .collect();

    let mut rows = Vec::new();
    for row in first.table.rows() {
        let key = &row[first.key];
        if key.is_missing() {
            continue;
        }
        let mut matches: Vec<&[usize]> = Vec::with_capacity(rest.len());
        for index in &indexes {
            match index.get(key) {
                Some(found) => matches.push(found),
                None => break,
            }
        }
        if matches.len() != rest.len() {
            continue;
        }
        // Odometer over the cartesian product of matching rows.
        let mut cursor = alloc::vec![0usize; rest.len()];
        'product: loop {
            let mut out = Vec::with_capacity(columns.len());
            out.push(key.clone());
            push_non_key(&mut out, row, first.key);
            for (part, (found, &c)) in rest.iter().zip(matches.iter().zip(&cursor)) {
                push_non_key(&mut out, &part.table.rows()[found[c]], part.key);
            }
            rows.push(out);
            let mut level = rest.len();
            loop {
                if level == 0 {
                    break 'product;
                }
                level -= 1;
                cursor[level] += 1;
                if cursor[level] < matches[level].len() {
                    continue 'product;
                }
                cursor[level] = 0;
            }
        }
    }
    Ok(from_parts_unchecked(columns, rows))
}

fn push_non_key(out: &mut Vec<Scalar>, row: &[Scalar], key: usize) {
    out.extend(
        row.iter()
            .enumerate()
            .filter(|(i, _)| *i != key)
            .map(|(_, v)| v.clone()),
    );
}
