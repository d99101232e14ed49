//! Dense least squares by Householder QR, with an SVD rank check.

use nalgebra::{DMatrix, DVector};

/// Singular values below this fraction of the largest are treated as zero.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub coefficients: Vec<f64>,
    pub fitted: Vec<f64>,
    pub rss: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LstsqError {
    /// Fewer rows than columns.
    Underdetermined { rows: usize, cols: usize },
    /// Indices of a set of columns that are linearly dependent.
    RankDeficient(Vec<usize>),
}

/// Builds an `rows x cols` design matrix from column vectors.
pub fn design_from_columns(columns: &[Vec<f64>], rows: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, columns.len(), |i, j| columns[j][i])
}

fn numerical_rank(m: &DMatrix<f64>) -> (usize, Option<DVector<f64>>) {
    let svd = m.clone().svd(false, true);
    let sv = &svd.singular_values;
    let max = sv.iter().cloned().fold(0.0f64, f64::max);
    let rank = sv.iter().filter(|&&s| s > RANK_TOLERANCE * max).count();
    if rank == m.ncols() {
        return (rank, None);
    }
    let (imin, _) = sv
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    let v_t = svd.v_t.expect("requested");
    (rank, Some(v_t.row(imin).transpose()))
}

/// Locates the first column that lies in the span of its predecessors and
/// reports it together with the predecessors it depends on.
fn dependent_columns(x: &DMatrix<f64>) -> Vec<usize> {
    for k in 1..=x.ncols() {
        let prefix = x.columns(0, k).into_owned();
        if let (rank, Some(null)) = numerical_rank(&prefix) {
            if rank < k {
                let peak = null.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                return (0..k).filter(|&i| null[i].abs() > 1e-6 * peak).collect();
            }
        }
    }
    Vec::new()
}

/// Minimizes `||y - X b||^2`.
pub fn least_squares(x: &DMatrix<f64>, y: &[f64]) -> Result<LeastSquares, LstsqError> {
    let (rows, cols) = x.shape();
    assert_eq!(rows, y.len(), "design rows must match response length");
    if rows < cols {
        return Err(LstsqError::Underdetermined { rows, cols });
    }
    if cols == 0 {
        let rss = y.iter().map(|v| v * v).sum();
        return Ok(LeastSquares {
            coefficients: Vec::new(),
            fitted: vec![0.0; rows],
            rss,
        });
    }
    if numerical_rank(x).0 < cols {
        return Err(LstsqError::RankDeficient(dependent_columns(x)));
    }
    let yv = DVector::from_column_slice(y);
    let qr = x.clone().qr();
    let qty = qr.q().transpose() * &yv;
    let beta = qr
        .r()
        .solve_upper_triangular(&qty)
        .ok_or_else(|| LstsqError::RankDeficient(dependent_columns(x)))?;
    let fitted = x * &beta;
    let rss = yv
        .iter()
        .zip(fitted.iter())
        .map(|(a, b)| (a - b).powi(2))
        .sum();
    Ok(LeastSquares {
        coefficients: beta.iter().copied().collect(),
        fitted: fitted.iter().copied().collect(),
        rss,
    })
}

pub fn rss(y: &[f64], fitted: &[f64]) -> f64 {
    y.iter().zip(fitted).map(|(a, b)| (a - b).powi(2)).sum()
}
