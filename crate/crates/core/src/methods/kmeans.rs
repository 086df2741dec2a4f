use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    AnalyticsMethod, AnalyticsMethodDescriptor, InputSpec, MethodError, MethodInput, OutputSpec,
    ParameterSpec,
};
use crate::model::{from_parts_unchecked, ColumnType, DataTable, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KMeansParams {
    pub k: usize,
    pub seed: u64,
    pub max_iters: usize,
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the minimum, first one on ties.
fn argmin(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, v) in values.enumerate() {
        if v < best.1 {
            best = (i, v);
        }
    }
    best.0
}

/// Index of the maximum, first one on ties.
fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

/// Rescales every dimension to zero mean and unit population variance.
/// Constant dimensions collapse to zero.
fn standardize(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = points.len() as f64;
    let dims = points.first().map_or(0, Vec::len);
    let mut out: Vec<Vec<f64>> = points.to_vec();
    for d in 0..dims {
        let mean = points.iter().map(|p| p[d]).sum::<f64>() / n;
        let var = points.iter().map(|p| (p[d] - mean) * (p[d] - mean)).sum::<f64>() / n;
        let std = libm::sqrt(var);
        let scale = if std > 0.0 { std } else { 1.0 };
        for p in &mut out {
            p[d] = (p[d] - mean) / scale;
        }
    }
    out
}

/// Deterministic k-means over standardized features.
///
/// Seeding picks the first centre uniformly with a ChaCha8 generator seeded
/// from `seed`, then repeatedly adds the point farthest from every chosen
/// centre. Labels are renumbered by order of first appearance, so equal
/// partitions always get equal labels.
///
/// Callers guarantee `1 <= k <= points.len()` and equal dimensions.
pub fn kmeans(points: &[Vec<f64>], params: KMeansParams) -> Vec<usize> {
    let n = points.len();
    let k = params.k;
    assert!(k >= 1 && k <= n, "k must lie in [1, n]");
    let data = standardize(points);

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut centres: Vec<Vec<f64>> = vec![data[rng.gen_range(0..n)].clone()];
    while centres.len() < k {
        let far = argmax(data.iter().map(|p| {
            centres
                .iter()
                .map(|c| squared_distance(p, c))
                .fold(f64::INFINITY, f64::min)
        }));
        centres.push(data[far].clone());
    }

    let mut labels: Vec<usize> = vec![usize::MAX; n];
    for _ in 0..params.max_iters.max(1) {
        let next: Vec<usize> = data
            .iter()
            .map(|p| argmin(centres.iter().map(|c| squared_distance(p, c))))
            .collect();
        let changed = next != labels;
        labels = next;
        if !changed {
            break;
        }
        let dims = data[0].len();
        let mut sums = vec![vec![0.0; dims]; k];
        let mut sizes = vec![0usize; k];
        for (p, &l) in data.iter().zip(&labels) {
            sizes[l] += 1;
            for (s, v) in sums[l].iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..k {
            if sizes[c] > 0 {
                centres[c] = sums[c].iter().map(|s| s / sizes[c] as f64).collect();
            }
        }
        for c in 0..k {
            if sizes[c] == 0 {
                // Re-seed from the point worst served by its own centre, unless
                // every point already sits on its centre.
                let gaps: Vec<f64> = data
                    .iter()
                    .zip(&labels)
                    .map(|(p, &l)| squared_distance(p, &centres[l]))
                    .collect();
                let far = argmax(gaps.iter().copied());
                if gaps[far] > 0.0 {
                    centres[c] = data[far].clone();
                    labels[far] = c;
                }
            }
        }
    }

    let mut renumber: BTreeMap<usize, usize> = BTreeMap::new();
    labels
        .into_iter()
        .map(|l| {
            let next = renumber.len();
            *renumber.entry(l).or_insert(next)
        })
        .collect()
}

pub struct KMeansClustering {
    descriptor: AnalyticsMethodDescriptor,
}

impl KMeansClustering {
    pub fn new() -> Self {
        let descriptor = AnalyticsMethodDescriptor::new(
            "kmeans_clustering",
            "k-means clustering",
            "Groups entities into k clusters by one or two standardized features.",
            vec![
                InputSpec::required("Entity", ColumnType::Text),
                InputSpec::required("Feature1", ColumnType::Numeric),
                InputSpec::optional("Feature2", ColumnType::Numeric),
            ],
            vec![
                OutputSpec::key("Entity", ColumnType::Text, "Entity"),
                OutputSpec::new("Cluster", ColumnType::Text),
                OutputSpec::new("Feature1", ColumnType::Numeric),
                OutputSpec::new("Feature2", ColumnType::Numeric),
            ],
            vec![
                ParameterSpec::numeric("k", 3.0, "Number of clusters"),
                ParameterSpec::numeric("seed", 42.0, "Random seed for the first centre"),
                ParameterSpec::numeric("max_iters", 100.0, "Iteration limit"),
            ],
        )
        .expect("valid descriptor");
        Self { descriptor }
    }
}

impl Default for KMeansClustering {
    fn default() -> Self {
        Self::new()
    }
}

impl AnalyticsMethod for KMeansClustering {
    fn descriptor(&self) -> &AnalyticsMethodDescriptor {
        &self.descriptor
    }

    fn execute(&self, input: &MethodInput<'_>) -> Result<DataTable, MethodError> {
        let k = input.integer("k", 1, i64::from(u32::MAX))? as usize;
        // Seeds stay within the exactly representable integer range of f64.
        let seed = input.integer("seed", 0, 1 << 53)? as u64;
        let max_iters = input.integer("max_iters", 1, 1_000_000)? as usize;
        let two_features = input.is_bound("Feature2");

        let mut entities = Vec::new();
        let mut points = Vec::new();
        for row in input.rows() {
            let (Some(entity), Some(f1)) = (input.text(row, "Entity"), input.number(row, "Feature1")) else {
                continue;
            };
            let point = if two_features {
                let Some(f2) = input.number(row, "Feature2") else {
                    continue;
                };
                vec![f1, f2]
            } else {
                vec![f1]
            };
            entities.push(entity);
            points.push(point);
        }
        if points.is_empty() {
            return Err(MethodError::EmptyInput);
        }
        if k > points.len() {
            return Err(MethodError::ParameterOutOfRange {
                name: "k".into(),
                reason: format!("only {} complete rows to cluster", points.len()),
            });
        }
        let labels = kmeans(&points, KMeansParams { k, seed, max_iters });
        let rows = entities
            .into_iter()
            .zip(points)
            .zip(labels)
            .map(|((entity, point), label)| {
                vec![
                    Scalar::text(entity),
                    Scalar::text(format!("C{label}")),
                    Scalar::Numeric(point[0]),
                    point.get(1).copied().map_or(Scalar::Missing, Scalar::Numeric),
                ]
            })
            .collect();
        Ok(from_parts_unchecked(self.descriptor.output_columns(), rows))
    }
}
