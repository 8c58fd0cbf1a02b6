use serde::{Deserialize, Serialize};

use super::{Matrix, Rng};
use crate::error::{Error, Result};

pub const POWER_TOLERANCE: f64 = 1e-10;
pub const POWER_MAX_ITERATIONS: usize = 1000;

/// First principal component of a data matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaResult {
    /// Unit-norm loading vector over the columns.
    pub loadings: Vec<f64>,
    /// Projection of each centered row onto `loadings`.
    pub scores: Vec<f64>,
    /// Largest eigenvalue of the sample covariance.
    pub explained_variance: f64,
    pub mean: Vec<f64>,
    /// Covariance was (numerically) zero; loadings are uniform.
    pub degenerate: bool,
    pub iterations: usize,
}

impl PcaResult {
    /// Score of an arbitrary row under this component.
    pub fn project(&self, row: &[f64]) -> f64 {
        row.iter()
            .zip(&self.mean)
            .zip(&self.loadings)
            .map(|((x, m), l)| (x - m) * l)
            .sum()
    }
}

/// Dominant eigenvector of the column-centered sample covariance, by power
/// iteration from a random unit start vector.
///
/// The sign is fixed so that the entry of largest magnitude is positive
/// (lowest index wins a tie).
pub fn first_principal_component(data: &Matrix, rng: &mut Rng) -> Result<PcaResult> {
    let (rows, dim) = data.shape();
    if rows < 2 {
        return Err(Error::InvalidArgument(format!(
            "principal component needs at least 2 rows, got {rows}"
        )));
    }
    let mut start: Vec<f64> = (0..dim).map(|_| rng.normal()).collect();

    let mut mean = vec![0.0; dim];
    for r in 0..rows {
        for (m, v) in mean.iter_mut().zip(data.row(r)) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= rows as f64);

    // Columns of the centered data, contiguous, so covariance entries are dots.
    let mut centered = vec![0.0; rows * dim];
    for r in 0..rows {
        for (c, (v, m)) in data.row(r).iter().zip(&mean).enumerate() {
            centered[c * rows + r] = v - m;
        }
    }
    let denom = (rows - 1) as f64;
    let mut cov = vec![0.0; dim * dim];
    for a in 0..dim {
        let ca = &centered[a * rows..(a + 1) * rows];
        for b in a..dim {
            let cb = &centered[b * rows..(b + 1) * rows];
            let s = dot(ca, cb) / denom;
            cov[a * dim + b] = s;
            cov[b * dim + a] = s;
        }
    }

    let trace: f64 = (0..dim).map(|i| cov[i * dim + i]).sum();
    let scale: f64 = 1.0 + mean.iter().map(|m| m * m).sum::<f64>();
    if trace <= 1e-24 * scale {
        let u = 1.0 / (dim as f64).sqrt();
        let loadings = vec![u; dim];
        let scores = (0..rows)
            .map(|r| (0..dim).map(|c| centered[c * rows + r] * u).sum())
            .collect();
        return Ok(PcaResult {
            loadings,
            scores,
            explained_variance: 0.0,
            mean,
            degenerate: true,
            iterations: 0,
        });
    }

    normalize(&mut start);
    let mut v = start;
    let mut next = vec![0.0; dim];
    let mut iterations = 0;
    while iterations < POWER_MAX_ITERATIONS {
        iterations += 1;
        for (i, out) in next.iter_mut().enumerate() {
            *out = dot(&cov[i * dim..(i + 1) * dim], &v);
        }
        if norm(&next) <= f64::MIN_POSITIVE {
            // Start vector landed in the null space; restart on the largest-variance axis.
            let axis = (0..dim)
                .max_by(|&a, &b| cov[a * dim + a].total_cmp(&cov[b * dim + b]).then(b.cmp(&a)))
                .unwrap_or(0);
            v.fill(0.0);
            v[axis] = 1.0;
            continue;
        }
        normalize(&mut next);
        let change = v
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        std::mem::swap(&mut v, &mut next);
        if change <= POWER_TOLERANCE {
            break;
        }
    }

    fix_sign(&mut v);
    let cv: Vec<f64> = (0..dim).map(|i| dot(&cov[i * dim..(i + 1) * dim], &v)).collect();
    let explained_variance = dot(&v, &cv).max(0.0);
    let scores = (0..rows)
        .map(|r| (0..dim).map(|c| centered[c * rows + r] * v[c]).sum())
        .collect();
    Ok(PcaResult {
        loadings: v,
        scores,
        explained_variance,
        mean,
        degenerate: false,
        iterations,
    })
}

fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

fn normalize(v: &mut [f64]) {
    let n = norm(v);
    v.iter_mut().for_each(|x| *x /= n);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_aligned_example() {
        let x = Matrix::from_rows(&[[1.0, 0.0], [-1.0, 0.0], [2.0, 0.0], [-2.0, 0.0]]).unwrap();
        let pca = first_principal_component(&x, &mut Rng::new(1)).unwrap();
        assert!((pca.loadings[0] - 1.0).abs() < 1e-12);
        assert!(pca.loadings[1].abs() < 1e-12);
        // (1 + 1 + 4 + 4) / 3
        assert!((pca.explained_variance - 10.0 / 3.0).abs() < 1e-12);
        assert!(!pca.degenerate);
    }

    #[test]
    fn identical_rows_are_degenerate() {
        let x = Matrix::from_rows(&[[0.1, 0.7, 3.0], [0.1, 0.7, 3.0], [0.1, 0.7, 3.0]]).unwrap();
        let pca = first_principal_component(&x, &mut Rng::new(1)).unwrap();
        assert!(pca.degenerate);
        let u = 1.0 / 3f64.sqrt();
        assert!(pca.loadings.iter().all(|&l| (l - u).abs() < 1e-15));
        assert_eq!(pca.explained_variance, 0.0);
    }

    #[test]
    fn negated_data_has_identical_loadings() {
        let x = Matrix::from_rows(&[[1.0, 2.0, 0.5], [3.0, -1.0, 2.0], [0.0, 0.5, -1.5], [2.0, 2.0, 2.0]]).unwrap();
        let neg = x.map(|v| -v).unwrap();
        let a = first_principal_component(&x, &mut Rng::new(5)).unwrap();
        let b = first_principal_component(&neg, &mut Rng::new(5)).unwrap();
        assert_eq!(a.loadings, b.loadings);
    }

    #[test]
    fn single_row_rejected() {
        let x = Matrix::from_rows(&[[1.0, 2.0]]).unwrap();
        assert!(first_principal_component(&x, &mut Rng::new(0)).is_err());
    }

    #[test]
    fn scores_are_projections() {
        let x = Matrix::from_rows(&[[1.0, 2.0], [2.0, 3.5], [4.0, 1.0], [0.0, 0.0]]).unwrap();
        let pca = first_principal_component(&x, &mut Rng::new(2)).unwrap();
        for r in 0..x.rows() {
            assert!((pca.scores[r] - pca.project(x.row(r))).abs() < 1e-12);
        }
        let n: f64 = pca.loadings.iter().map(|l| l * l).sum::<f64>().sqrt();
        assert!((n - 1.0).abs() < 1e-9);
    }
}
