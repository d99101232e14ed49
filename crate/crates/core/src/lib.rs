//! Interpretable regression: linear models, CART trees, MARS and additive
//! models fit by backfitting, plus structural reports of what each fitted
//! model does.
//!
//! ```
//! use glassbox::data::Dataset;
//! use glassbox::linear::fit_ols;
//!
//! let d = Dataset::from_rows(&[vec![0.0], vec![1.0], vec![2.0]], vec![1.0, 3.0, 5.0]).unwrap();
//! let m = fit_ols(&d).unwrap();
//! assert!((m.weights[0] - 2.0).abs() < 1e-12);
//! ```

pub mod cart;
pub mod cli;
pub mod data;
pub mod error;
pub mod gam;
pub mod interpret;
pub mod linalg;
pub mod linear;
pub mod mars;
pub mod model;
pub mod render;
pub mod spline;

pub use error::{Error, Result};
pub use model::Model;
