use serde::{Deserialize, Serialize};

use super::Matrix;
use crate::error::{Error, Result};

/// Columns whose population std falls below this are treated as constant.
pub const CONSTANT_STD: f64 = 1e-12;

/// Per-column location and scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Columns that were only centered.
    pub constant: Vec<bool>,
}

impl ColumnStats {
    pub fn of(data: &Matrix) -> ColumnStats {
        let (rows, cols) = data.shape();
        let n = rows as f64;
        let mut mean = vec![0.0; cols];
        for r in 0..rows {
            for (m, v) in mean.iter_mut().zip(data.row(r)) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; cols];
        for r in 0..rows {
            for ((s, v), m) in var.iter_mut().zip(data.row(r)).zip(&mean) {
                let d = v - m;
                *s += d * d;
            }
        }
        let std: Vec<f64> = var.iter().map(|s| (s / n).sqrt()).collect();
        let constant = std.iter().map(|&s| s < CONSTANT_STD).collect();
        ColumnStats { mean, std, constant }
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }
}

/// Column-wise z-scoring (population std). With `stats` supplied, those
/// statistics are applied instead of being estimated from `data`.
pub fn standardize(data: &Matrix, stats: Option<&ColumnStats>) -> Result<(Matrix, ColumnStats)> {
    let stats = match stats {
        Some(s) if s.len() != data.cols() || s.std.len() != s.len() || s.constant.len() != s.len() => {
            return Err(Error::dims(format!("{} column stats", data.cols()), s.len()));
        }
        Some(s) => s.clone(),
        None => ColumnStats::of(data),
    };
    let out = Matrix::from_fn(data.rows(), data.cols(), |r, c| {
        let centered = data.get(r, c) - stats.mean[c];
        if stats.constant[c] {
            centered
        } else {
            centered / stats.std[c]
        }
    })?;
    Ok((out, stats))
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Median of a non-empty slice (average of the middle pair for even lengths).
pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 0 {
        0.5 * (v[mid - 1] + v[mid])
    } else {
        v[mid]
    }
}
