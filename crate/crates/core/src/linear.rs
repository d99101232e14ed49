//! Linear regression `f(x) = b + w . x`.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{self, LstsqError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub intercept: f64,
    pub weights: Vec<f64>,
    #[serde(rename = "features")]
    pub feature_names: Vec<String>,
}

impl LinearModel {
    pub fn n_features(&self) -> usize {
        self.weights.len()
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        check_point(x, self.weights.len())?;
        Ok(self.intercept + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>())
    }
}

pub(crate) fn check_point(x: &[f64], expected: usize) -> Result<()> {
    if x.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            actual: x.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidData("non-finite input coordinate".into()));
    }
    Ok(())
}

/// Ordinary least squares with an intercept column, solved by QR.
pub fn fit_ols(d: &Dataset) -> Result<LinearModel> {
    let n = d.n_features();
    if d.n_rows() < n + 1 {
        return Err(Error::TooFewRows {
            needed: n + 1,
            actual: d.n_rows(),
        });
    }
    let mut columns = Vec::with_capacity(n + 1);
    columns.push(vec![1.0; d.n_rows()]);
    columns.extend(d.features().iter().cloned());
    let x = linalg::design_from_columns(&columns, d.n_rows());
    let fit = linalg::least_squares(&x, d.target()).map_err(|e| match e {
        LstsqError::RankDeficient(cols) => Error::RankDeficient {
            columns: cols
                .into_iter()
                .map(|c| {
                    if c == 0 {
                        "(intercept)".to_string()
                    } else {
                        d.feature_names()[c - 1].clone()
                    }
                })
                .collect(),
        },
        LstsqError::Underdetermined { rows, cols } => Error::TooFewRows {
            needed: cols,
            actual: rows,
        },
    })?;
    let model = LinearModel {
        intercept: fit.coefficients[0],
        weights: fit.coefficients[1..].to_vec(),
        feature_names: d.feature_names().to_vec(),
    };
    if !model.intercept.is_finite() || model.weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::Numerical("non-finite OLS coefficients".into()));
    }
    Ok(model)
}
