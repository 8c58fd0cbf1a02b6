use serde::{Deserialize, Serialize};

use super::Neighborhood;
use crate::error::Result;
use crate::math::{first_principal_component, weighted_ridge_fit, LinearFit, Matrix, Rng};
use crate::models::RulModel;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExplainMethod {
    /// Surrogate over all J·N cells, feature importance averaged over steps.
    MeanAgg,
    /// Surrogate over one first-principal-component score per feature.
    #[default]
    Ipca,
}

impl std::str::FromStr for ExplainMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "mean_agg" | "mean" => Ok(ExplainMethod::MeanAgg),
            "ipca" => Ok(ExplainMethod::Ipca),
            other => Err(format!("unknown explanation method {other:?} (expected mean_agg or ipca)")),
        }
    }
}

/// A local explanation of one prediction.
///
/// For `ipca`, `ts[j][n]` is the contribution `s[j] · loading[j][n]` of a
/// step to feature j's latent score, not a fitted per-step weight.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Explanation {
    pub method: ExplainMethod,
    pub s: Vec<f64>,
    pub ts: Matrix,
    pub loadings: Option<Vec<Vec<f64>>>,
    pub local_prediction: f64,
    pub degenerate: Vec<bool>,
    #[serde(skip)]
    pub surrogate: LinearFit,
    #[serde(skip)]
    pub pca_means: Option<Vec<Vec<f64>>>,
}

impl Explanation {
    pub fn features(&self) -> usize {
        self.s.len()
    }

    /// The surrogate's prediction for an arbitrary normalized window.
    pub fn surrogate_predict(&self, window: &Matrix) -> f64 {
        match (&self.loadings, &self.pca_means) {
            (Some(loadings), Some(means)) => {
                let reduced: Vec<f64> = (0..window.rows())
                    .map(|j| {
                        window
                            .row(j)
                            .iter()
                            .zip(&means[j])
                            .zip(&loadings[j])
                            .map(|((x, m), l)| (x - m) * l)
                            .sum()
                    })
                    .collect();
                self.surrogate.predict(&reduced)
            }
            _ => self.surrogate.predict(window.as_slice()),
        }
    }
}

/// Black-box predictions for every sample of the neighborhood, center first.
pub fn neighborhood_predictions(pm: &dyn RulModel, nbhd: &Neighborhood) -> Result<Vec<f64>> {
    nbhd.samples().map(|m| pm.predict_rul(m)).collect()
}

pub fn explain_mean(pm: &dyn RulModel, nbhd: &Neighborhood, lambda: f64) -> Result<Explanation> {
    explain_mean_with(nbhd, &neighborhood_predictions(pm, nbhd)?, lambda)
}

/// [`explain_mean`] with the neighborhood predictions already computed.
pub fn explain_mean_with(nbhd: &Neighborhood, predictions: &[f64], lambda: f64) -> Result<Explanation> {
    let (j, n) = nbhd.center.values.shape();
    let rows: Vec<&[f64]> = nbhd.samples().map(Matrix::as_slice).collect();
    let design = Matrix::from_rows(&rows)?;
    let fit = weighted_ridge_fit(&design, predictions, &nbhd.sample_weights(), lambda)?;
    let ts = Matrix::new(j, n, fit.coefficients.clone())?;
    let s = (0..j).map(|f| ts.row(f).iter().sum::<f64>() / n as f64).collect();
    let local_prediction = fit.predict(nbhd.center.values.as_slice());
    Ok(Explanation {
        method: ExplainMethod::MeanAgg,
        s,
        ts,
        loadings: None,
        local_prediction,
        degenerate: vec![false; j],
        surrogate: fit,
        pca_means: None,
    })
}

pub fn explain_ipca(pm: &dyn RulModel, nbhd: &Neighborhood, lambda: f64, rng: &mut Rng) -> Result<Explanation> {
    explain_ipca_with(nbhd, &neighborhood_predictions(pm, nbhd)?, lambda, rng)
}

/// [`explain_ipca`] with the neighborhood predictions already computed.
pub fn explain_ipca_with(
    nbhd: &Neighborhood,
    predictions: &[f64],
    lambda: f64,
    rng: &mut Rng,
) -> Result<Explanation> {
    let (j, n) = nbhd.center.values.shape();
    let samples = nbhd.len() + 1;
    let mut reduced = vec![0.0; samples * j];
    let mut loadings = Vec::with_capacity(j);
    let mut means = Vec::with_capacity(j);
    let mut degenerate = Vec::with_capacity(j);
    for f in 0..j {
        let rows: Vec<&[f64]> = nbhd.samples().map(|m| m.row(f)).collect();
        let pca = first_principal_component(&Matrix::from_rows(&rows)?, rng)?;
        for (m, score) in pca.scores.iter().enumerate() {
            reduced[m * j + f] = *score;
        }
        loadings.push(pca.loadings);
        means.push(pca.mean);
        degenerate.push(pca.degenerate);
    }
    let design = Matrix::new(samples, j, reduced)?;
    let fit = weighted_ridge_fit(&design, predictions, &nbhd.sample_weights(), lambda)?;
    let s = fit.coefficients.clone();
    let ts = Matrix::from_fn(j, n, |f, t| s[f] * loadings[f][t])?;
    let local_prediction = fit.predict(design.row(0));
    Ok(Explanation {
        method: ExplainMethod::Ipca,
        s,
        ts,
        loadings: Some(loadings),
        local_prediction,
        degenerate,
        surrogate: fit,
        pca_means: Some(means),
    })
}
