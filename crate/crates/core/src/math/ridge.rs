use serde::{Deserialize, Serialize};

use super::Matrix;
use crate::error::{Error, Result};

/// Ridge strength used wherever a surrogate is fitted.
pub const DEFAULT_LAMBDA: f64 = 1e-3;

/// Affine model `intercept + coefficients · x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
}

impl LinearFit {
    pub fn predict(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.coefficients.len());
        self.intercept + self.coefficients.iter().zip(x).map(|(b, v)| b * v).sum::<f64>()
    }
}

/// Minimizes `Σ w_m (y_m − x_m·β − b)² + λ‖β‖²` with an unpenalized intercept.
///
/// The intercept is eliminated by weighted centering, leaving the normal
/// equations `(X̃ᵀWX̃ + λI) β = X̃ᵀW ỹ`, solved by Gaussian elimination with
/// partial pivoting.
pub fn weighted_ridge_fit(x: &Matrix, y: &[f64], w: &[f64], lambda: f64) -> Result<LinearFit> {
    let (m, d) = x.shape();
    if y.len() != m {
        return Err(Error::dims(format!("{m} targets"), y.len()));
    }
    if w.len() != m {
        return Err(Error::dims(format!("{m} weights"), w.len()));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("lambda must be >= 0, got {lambda}")));
    }
    if w.iter().any(|&wi| !(wi >= 0.0 && wi.is_finite())) {
        return Err(Error::InvalidArgument("weights must be finite and >= 0".into()));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("targets must be finite".into()));
    }
    let total: f64 = w.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidArgument("at least one weight must be positive".into()));
    }

    let mut x_mean = vec![0.0; d];
    let mut y_mean = 0.0;
    for r in 0..m {
        let wr = w[r];
        for (acc, v) in x_mean.iter_mut().zip(x.row(r)) {
            *acc += wr * v;
        }
        y_mean += wr * y[r];
    }
    x_mean.iter_mut().for_each(|v| *v /= total);
    y_mean /= total;

    // sqrt(w)-scaled centered design, stored column-major.
    let mut cols = vec![0.0; d * m];
    let mut yt = vec![0.0; m];
    for r in 0..m {
        let sw = w[r].sqrt();
        for (c, (v, mu)) in x.row(r).iter().zip(&x_mean).enumerate() {
            cols[c * m + r] = sw * (v - mu);
        }
        yt[r] = sw * (y[r] - y_mean);
    }

    let mut a = vec![0.0; d * d];
    let mut rhs = vec![0.0; d];
    for i in 0..d {
        let ci = &cols[i * m..(i + 1) * m];
        for j in i..d {
            let s = dot(ci, &cols[j * m..(j + 1) * m]);
            a[i * d + j] = s;
            a[j * d + i] = s;
        }
        a[i * d + i] += lambda;
        rhs[i] = dot(ci, &yt);
    }

    let beta = solve_in_place(&mut a, &mut rhs, d)?;
    let intercept = y_mean - dot(&x_mean, &beta);
    Ok(LinearFit {
        coefficients: beta,
        intercept,
    })
}

/// Solves `A x = b` for a dense `n × n` row-major `A`, destroying both inputs.
pub fn solve_in_place(a: &mut [f64], b: &mut [f64], n: usize) -> Result<Vec<f64>> {
    let scale = a.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let tol = 1e-11 * scale.max(f64::MIN_POSITIVE);
    for k in 0..n {
        let mut piv = k;
        for r in k + 1..n {
            if a[r * n + k].abs() > a[piv * n + k].abs() {
                piv = r;
            }
        }
        if a[piv * n + k].abs() <= tol {
            return Err(Error::Singular { pivot: k });
        }
        if piv != k {
            for c in 0..n {
                a.swap(k * n + c, piv * n + c);
            }
            b.swap(k, piv);
        }
        let (upper, lower) = a.split_at_mut((k + 1) * n);
        let pivot_row = &upper[k * n..(k + 1) * n];
        let p = pivot_row[k];
        for r in 0..n - k - 1 {
            let row = &mut lower[r * n..(r + 1) * n];
            let f = row[k] / p;
            if f != 0.0 {
                for c in k..n {
                    row[c] -= f * pivot_row[c];
                }
                b[k + 1 + r] -= f * b[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|c| a[k * n + c] * x[c]).sum();
        x[k] = (b[k] - s) / a[k * n + k];
    }
    Ok(x)
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
