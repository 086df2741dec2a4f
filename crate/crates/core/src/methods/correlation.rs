use alloc::vec;
use alloc::vec::Vec;

use super::{
    AnalyticsMethod, AnalyticsMethodDescriptor, InputSpec, MethodError, MethodInput, OutputSpec,
};
use crate::model::{from_parts_unchecked, ColumnType, DataTable, Scalar};

/// Pearson's r over the rows where both X and Y are present.
pub fn pearson(pairs: &[(f64, f64)]) -> Option<f64> {
    let n = pairs.len() as f64;
    let mean_x = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in pairs {
        let (dx, dy) = (x - mean_x, y - mean_y);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    let r = sxy / (libm::sqrt(sxx) * libm::sqrt(syy));
    r.is_finite().then(|| r.clamp(-1.0, 1.0))
}

pub struct PearsonCorrelation {
    descriptor: AnalyticsMethodDescriptor,
}

impl PearsonCorrelation {
    pub fn new() -> Self {
        let descriptor = AnalyticsMethodDescriptor::new(
            "pearson_correlation",
            "Pearson correlation",
            "Linear correlation between X and Y; R is empty when either has no variance.",
            vec![
                InputSpec::required("X", ColumnType::Numeric),
                InputSpec::required("Y", ColumnType::Numeric),
            ],
            vec![
                OutputSpec::new("R", ColumnType::Numeric),
                OutputSpec::new("Count", ColumnType::Numeric),
            ],
            vec![],
        )
        .expect("valid descriptor");
        Self { descriptor }
    }
}

impl Default for PearsonCorrelation {
    fn default() -> Self {
        Self::new()
    }
}

impl AnalyticsMethod for PearsonCorrelation {
    fn descriptor(&self) -> &AnalyticsMethodDescriptor {
        &self.descriptor
    }

    fn execute(&self, input: &MethodInput<'_>) -> Result<DataTable, MethodError> {
        let pairs: Vec<(f64, f64)> = input
            .rows()
            .iter()
            .filter_map(|row| Some((input.number(row, "X")?, input.number(row, "Y")?)))
            .collect();
        if pairs.is_empty() {
            return Err(MethodError::EmptyInput);
        }
        let r = pearson(&pairs).map_or(Scalar::Missing, Scalar::Numeric);
        let row = vec![r, Scalar::Numeric(pairs.len() as f64)];
        Ok(from_parts_unchecked(self.descriptor.output_columns(), vec![row]))
    }
}
