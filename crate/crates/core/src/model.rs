//! Fitted models of every family behind one type, with JSON persistence.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cart::RegressionTree;
use crate::data::write_atomic;
use crate::error::{Error, Result};
use crate::gam::GamModel;
use crate::linear::LinearModel;
use crate::mars::MarsModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    Linear(LinearModel),
    Cart(RegressionTree),
    Mars(MarsModel),
    Gam(GamModel),
}

impl Model {
    pub fn kind(&self) -> &'static str {
        match self {
            Model::Linear(_) => "linear",
            Model::Cart(_) => "cart",
            Model::Mars(_) => "mars",
            Model::Gam(_) => "gam",
        }
    }

    pub fn feature_names(&self) -> &[String] {
        match self {
            Model::Linear(m) => &m.feature_names,
            Model::Cart(m) => &m.feature_names,
            Model::Mars(m) => &m.feature_names,
            Model::Gam(m) => &m.feature_names,
        }
    }

    pub fn n_features(&self) -> usize {
        self.feature_names().len()
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        match self {
            Model::Linear(m) => m.predict(x),
            Model::Cart(m) => m.predict(x),
            Model::Mars(m) => m.predict(x),
            Model::Gam(m) => m.predict(x),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), self.to_json()?.as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Model::from_json(&text)
    }
}
