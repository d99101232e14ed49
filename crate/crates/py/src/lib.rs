//! Python bindings: datasets, the four model families, predictions,
//! profiles, rules and rendered plots.

use pyo3::exceptions::{PyArithmeticError, PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use glassbox::cart::{self, GrowConfig};
use glassbox::data;
use glassbox::gam::{self, ComponentKind, FeatureOverride, GamConfig};
use glassbox::interpret;
use glassbox::linear;
use glassbox::mars::{self, MarsConfig};
use glassbox::render::{self, Format};
use glassbox::{Error, Model};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } | Error::Csv(_) | Error::Parse { .. } | Error::Json(_) => {
            PyIOError::new_err(e.to_string())
        }
        Error::RankDeficient { .. } | Error::GcvUndefined { .. } | Error::Numerical(_) => {
            PyArithmeticError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

#[pyclass(name = "Dataset", module = "glassbox_py", skip_from_py_object)]
#[derive(Clone)]
pub struct PyDataset {
    inner: data::Dataset,
}

#[pymethods]
impl PyDataset {
    /// Build from row-major features and a target.
    #[new]
    #[pyo3(signature = (rows, target, feature_names=None, target_name="y"))]
    fn new(
        rows: Vec<Vec<f64>>,
        target: Vec<f64>,
        feature_names: Option<Vec<String>>,
        target_name: &str,
    ) -> PyResult<Self> {
        let d = data::Dataset::from_rows(&rows, target).map_err(to_py)?;
        let inner = match feature_names {
            None => data::Dataset::new(
                d.feature_names().to_vec(),
                d.features().to_vec(),
                target_name,
                d.target().to_vec(),
            ),
            Some(names) => data::Dataset::new(
                names,
                d.features().to_vec(),
                target_name,
                d.target().to_vec(),
            ),
        }
        .map_err(to_py)?;
        Ok(PyDataset { inner })
    }

    #[staticmethod]
    fn load_csv(path: &str, target: &str) -> PyResult<Self> {
        let inner = data::load_csv(path, target).map_err(to_py)?;
        Ok(PyDataset { inner })
    }

    /// The bundled additive-plus-interaction generator.
    #[staticmethod]
    #[pyo3(signature = (rows=200, seed=42))]
    fn synthetic(rows: usize, seed: u64) -> Self {
        PyDataset {
            inner: data::synthetic_additive_interaction(rows, seed),
        }
    }

    fn save_csv(&self, path: &str) -> PyResult<()> {
        data::write_csv(&self.inner, path).map_err(to_py)
    }

    fn split(&self, train_fraction: f64, seed: u64) -> PyResult<(PyDataset, PyDataset)> {
        let (a, b) = data::split(&self.inner, train_fraction, seed).map_err(to_py)?;
        Ok((PyDataset { inner: a }, PyDataset { inner: b }))
    }

    #[getter]
    fn n_rows(&self) -> usize {
        self.inner.n_rows()
    }

    #[getter]
    fn n_features(&self) -> usize {
        self.inner.n_features()
    }

    #[getter]
    fn feature_names(&self) -> Vec<String> {
        self.inner.feature_names().to_vec()
    }

    #[getter]
    fn target(&self) -> Vec<f64> {
        self.inner.target().to_vec()
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        self.inner.rows().collect()
    }

    fn __len__(&self) -> usize {
        self.inner.n_rows()
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(rows={}, features={:?}, target={:?})",
            self.inner.n_rows(),
            self.inner.feature_names(),
            self.inner.target_name()
        )
    }
}

#[pyclass(name = "Model", module = "glassbox_py", skip_from_py_object)]
#[derive(Clone)]
pub struct PyModel {
    inner: Model,
}

#[pymethods]
impl PyModel {
    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind()
    }

    #[getter]
    fn feature_names(&self) -> Vec<String> {
        self.inner.feature_names().to_vec()
    }

    fn predict_one(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.predict(&x).map_err(to_py)
    }

    fn predict(&self, rows: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
        rows.iter()
            .map(|x| self.inner.predict(x).map_err(to_py))
            .collect()
    }

    /// Interpretability profile as a dict.
    fn profile<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let s =
            serde_json::to_string(&interpret::profile(&self.inner)).map_err(|e| to_py(e.into()))?;
        py.import("json")?.call_method1("loads", (s,))
    }

    /// One text line per leaf; trees only.
    fn rules(&self) -> PyResult<Vec<String>> {
        match &self.inner {
            Model::Cart(t) => Ok(interpret::tree_to_rules(t)
                .rules
                .iter()
                .map(|r| r.to_string())
                .collect()),
            other => Err(PyValueError::new_err(format!(
                "rules are only defined for trees, not {}",
                other.kind()
            ))),
        }
    }

    /// Rendered plots keyed by name.
    #[pyo3(signature = (format="svg", grid=50))]
    fn plots<'py>(
        &self,
        py: Python<'py>,
        format: &str,
        grid: usize,
    ) -> PyResult<Bound<'py, PyDict>> {
        let format: Format = format.parse().map_err(to_py)?;
        let plots = interpret::plots_for(&self.inner, grid).map_err(to_py)?;
        let out = PyDict::new(py);
        for spec in &plots.specs {
            let bytes = render::render(spec, format).map_err(to_py)?;
            out.set_item(&spec.name, String::from_utf8_lossy(&bytes).into_owned())?;
        }
        Ok(out)
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(to_py)
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        Ok(PyModel {
            inner: Model::from_json(s).map_err(to_py)?,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.save(path).map_err(to_py)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyModel {
            inner: Model::load(path).map_err(to_py)?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(kind={:?}, features={:?})",
            self.inner.kind(),
            self.inner.feature_names()
        )
    }
}

fn wrap(inner: Model) -> PyModel {
    PyModel { inner }
}

#[pyfunction]
fn fit_ols(d: &PyDataset) -> PyResult<PyModel> {
    Ok(wrap(Model::Linear(
        linear::fit_ols(&d.inner).map_err(to_py)?,
    )))
}

/// Grow, prune on the training data, then pick the subtree with the lowest
/// validation RSS. Without a validation set the fully grown tree is returned.
#[pyfunction]
#[pyo3(signature = (train, validation=None, max_leaves=32, min_node_size=1))]
fn fit_cart(
    train: &PyDataset,
    validation: Option<&PyDataset>,
    max_leaves: usize,
    min_node_size: usize,
) -> PyResult<PyModel> {
    let cfg = GrowConfig {
        max_leaves,
        min_node_size,
    };
    let tree = cart::grow_tree(&train.inner, &cfg).map_err(to_py)?;
    let tree = match validation {
        None => tree,
        Some(v) => {
            let seq = cart::prune_tree(&tree, &train.inner).map_err(to_py)?;
            cart::select_subtree(&seq, &v.inner).map_err(to_py)?
        }
    };
    Ok(wrap(Model::Cart(tree)))
}

/// Returns the selected model and its GCV score.
#[pyfunction]
#[pyo3(signature = (d, max_terms=21, max_degree=1, gcv_penalty=None))]
fn fit_mars(
    d: &PyDataset,
    max_terms: usize,
    max_degree: usize,
    gcv_penalty: Option<f64>,
) -> PyResult<(PyModel, f64)> {
    let mut cfg = MarsConfig::new(max_terms, max_degree);
    if let Some(p) = gcv_penalty {
        cfg.gcv_penalty = p;
    }
    let fit = mars::fit_mars(&d.inner, &cfg).map_err(to_py)?;
    Ok((wrap(Model::Mars(fit.model)), fit.gcv))
}

#[pyfunction]
#[pyo3(signature = (d, smoother_penalty=1e-3, max_rounds=200, convergence_threshold=1e-6, linear=Vec::new()))]
fn fit_gam(
    d: &PyDataset,
    smoother_penalty: f64,
    max_rounds: usize,
    convergence_threshold: f64,
    linear: Vec<usize>,
) -> PyResult<PyModel> {
    let mut cfg = GamConfig {
        smoother_penalty,
        max_rounds,
        convergence_threshold,
        ..GamConfig::default()
    };
    for j in linear {
        cfg.overrides.insert(
            j,
            FeatureOverride {
                kind: Some(ComponentKind::Linear),
                penalty: None,
            },
        );
    }
    Ok(wrap(Model::Gam(
        gam::backfit(&d.inner, &cfg).map_err(to_py)?,
    )))
}

#[pymodule]
fn glassbox_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDataset>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(fit_ols, m)?)?;
    m.add_function(wrap_pyfunction!(fit_cart, m)?)?;
    m.add_function(wrap_pyfunction!(fit_mars, m)?)?;
    m.add_function(wrap_pyfunction!(fit_gam, m)?)?;
    Ok(())
}
