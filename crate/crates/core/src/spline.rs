//! Natural cubic splines and the cubic smoothing spline.
//!
//! The smoother minimizes `sum w_i (y_i - g(x_i))^2 + penalty * int g''(x)^2`
//! over distinct abscissae `x_i`. The minimizer is a natural cubic spline with
//! knots at the `x_i`, found in Reinsch form: with the banded matrices `Q`
//! (n x n-2 second differences) and `R` (n-2 x n-2 tridiagonal),
//! `(R + penalty Q' W^-1 Q) gamma = Q' y` and `g = y - penalty W^-1 Q gamma`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symmetric positive definite matrix with two sub-diagonals, factored as
/// `L L'` in place.
#[derive(Debug, Clone)]
struct BandCholesky {
    /// `l[i] = [L(i,i-2), L(i,i-1), L(i,i)]`
    l: Vec<[f64; 3]>,
}

impl BandCholesky {
    /// `diag[i] = A(i,i)`, `off1[i] = A(i,i+1)`, `off2[i] = A(i,i+2)`.
    fn factor(diag: &[f64], off1: &[f64], off2: &[f64]) -> Option<Self> {
        let n = diag.len();
        let mut l = vec![[0.0; 3]; n];
        for i in 0..n {
            let a2 = if i >= 2 { off2[i - 2] } else { 0.0 };
            let a1 = if i >= 1 { off1[i - 1] } else { 0.0 };
            // L(i,i-2)
            let l2 = if i >= 2 { a2 / l[i - 2][2] } else { 0.0 };
            // L(i,i-1) = (A(i,i-1) - L(i,i-2) L(i-1,i-2)) / L(i-1,i-1)
            let l1 = if i >= 1 {
                (a1 - l2 * l[i - 1][1]) / l[i - 1][2]
            } else {
                0.0
            };
            let d = diag[i] - l2 * l2 - l1 * l1;
            if !(d > 0.0) {
                return None;
            }
            l[i] = [l2, l1, d.sqrt()];
        }
        Some(BandCholesky { l })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut z = vec![0.0; n];
        for i in 0..n {
            let mut s = b[i];
            if i >= 1 {
                s -= self.l[i][1] * z[i - 1];
            }
            if i >= 2 {
                s -= self.l[i][0] * z[i - 2];
            }
            z[i] = s / self.l[i][2];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = z[i];
            if i + 1 < n {
                s -= self.l[i + 1][1] * x[i + 1];
            }
            if i + 2 < n {
                s -= self.l[i + 2][0] * x[i + 2];
            }
            x[i] = s / self.l[i][2];
        }
        x
    }
}

/// `Q' v` for the second-difference matrix on knot spacings `h`.
fn qt_times(h: &[f64], v: &[f64]) -> Vec<f64> {
    (1..v.len() - 1)
        .map(|j| (v[j + 1] - v[j]) / h[j] - (v[j] - v[j - 1]) / h[j - 1])
        .collect()
}

/// A one-dimensional linear smoother on fixed abscissae: the fitted values
/// are a linear function of the responses.
pub trait LinearSmoother {
    /// Abscissae the smoother is defined on, strictly increasing.
    fn abscissae(&self) -> &[f64];
    /// Fitted values at [`abscissae`](Self::abscissae) for responses `y`.
    fn smooth(&self, y: &[f64]) -> Vec<f64>;
}

/// Cubic smoothing spline with a prefactored system, so repeated smoothing
/// on the same abscissae (as in backfitting) costs O(n) per call.
#[derive(Debug, Clone)]
pub struct CubicSmoother {
    x: Vec<f64>,
    h: Vec<f64>,
    inv_weights: Vec<f64>,
    penalty: f64,
    chol: Option<BandCholesky>,
}

impl CubicSmoother {
    pub fn new(x: Vec<f64>, weights: &[f64], penalty: f64) -> Result<Self> {
        if !(penalty > 0.0 && penalty.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "smoothing penalty must be positive, got {penalty}"
            )));
        }
        if x.len() < 2 {
            return Err(Error::InvalidData(
                "smoothing needs at least 2 distinct abscissae".into(),
            ));
        }
        if x.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidData(
                "abscissae must be strictly increasing".into(),
            ));
        }
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let inv_weights: Vec<f64> = weights.iter().map(|w| 1.0 / w).collect();
        let m = x.len() - 2;
        let chol = if m == 0 {
            None
        } else {
            // Q columns j = 0..m have entries at rows j, j+1, j+2:
            // 1/h[j], -1/h[j] - 1/h[j+1], 1/h[j+1]
            let qcol = |j: usize| [1.0 / h[j], -1.0 / h[j] - 1.0 / h[j + 1], 1.0 / h[j + 1]];
            let mut diag = vec![0.0; m];
            let mut off1 = vec![0.0; m.saturating_sub(1)];
            let mut off2 = vec![0.0; m.saturating_sub(2)];
            for j in 0..m {
                let a = qcol(j);
                diag[j] = (h[j] + h[j + 1]) / 3.0
                    + penalty
                        * (0..3)
                            .map(|k| a[k] * a[k] * inv_weights[j + k])
                            .sum::<f64>();
                if j + 1 < m {
                    let b = qcol(j + 1);
                    // overlap rows j+1, j+2
                    off1[j] = h[j + 1] / 6.0
                        + penalty
                            * (a[1] * b[0] * inv_weights[j + 1] + a[2] * b[1] * inv_weights[j + 2]);
                }
                if j + 2 < m {
                    let c = qcol(j + 2);
                    off2[j] = penalty * a[2] * c[0] * inv_weights[j + 2];
                }
            }
            Some(BandCholesky::factor(&diag, &off1, &off2).ok_or_else(|| {
                Error::Numerical("smoothing system is not positive definite".into())
            })?)
        };
        Ok(CubicSmoother {
            x,
            h,
            inv_weights,
            penalty,
            chol,
        })
    }
}

impl LinearSmoother for CubicSmoother {
    fn abscissae(&self) -> &[f64] {
        &self.x
    }

    fn smooth(&self, y: &[f64]) -> Vec<f64> {
        let Some(chol) = &self.chol else {
            return y.to_vec();
        };
        let gamma = chol.solve(&qt_times(&self.h, y));
        // (Q gamma)_i gathers gamma[i-2], gamma[i-1], gamma[i]
        let n = y.len();
        (0..n)
            .map(|i| {
                let mut qg = 0.0;
                if i >= 2 {
                    qg += gamma[i - 2] / self.h[i - 1];
                }
                if i >= 1 && i - 1 < gamma.len() {
                    qg += gamma[i - 1] * (-1.0 / self.h[i - 1] - 1.0 / self.h[i]);
                }
                if i < gamma.len() {
                    qg += gamma[i] / self.h[i];
                }
                y[i] - self.penalty * self.inv_weights[i] * qg
            })
            .collect()
    }
}

/// Distinct sorted abscissae, their multiplicities and the averaged
/// responses, plus the position of every input point in that list.
pub fn collapse_ties(points: &[(f64, f64)]) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].0.total_cmp(&points[b].0));
    let mut xs: Vec<f64> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    let mut sums: Vec<f64> = Vec::new();
    let mut index = vec![0; points.len()];
    for i in order {
        let (x, y) = points[i];
        if xs.last() != Some(&x) {
            xs.push(x);
            weights.push(0.0);
            sums.push(0.0);
        }
        let k = xs.len() - 1;
        weights[k] += 1.0;
        sums[k] += y;
        index[i] = k;
    }
    let means = sums.iter().zip(&weights).map(|(s, w)| s / w).collect();
    (xs, weights, means, index)
}

/// Natural cubic spline through `(knots, values)`, extended linearly beyond
/// the outer knots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "CurvePoints", into = "CurvePoints")]
pub struct NaturalSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    /// Second derivatives at the knots; zero at both ends.
    second: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CurvePoints {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl From<CurvePoints> for NaturalSpline {
    fn from(c: CurvePoints) -> Self {
        NaturalSpline::interpolate(c.knots, c.values)
    }
}

impl From<NaturalSpline> for CurvePoints {
    fn from(s: NaturalSpline) -> Self {
        CurvePoints {
            knots: s.knots,
            values: s.values,
        }
    }
}

impl NaturalSpline {
    /// Interpolating natural spline. Knots must be strictly increasing and
    /// match `values` in length.
    pub fn interpolate(knots: Vec<f64>, values: Vec<f64>) -> Self {
        assert_eq!(
            knots.len(),
            values.len(),
            "knots and values differ in length"
        );
        let n = knots.len();
        let mut second = vec![0.0; n];
        if n >= 3 {
            let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
            let rhs: Vec<f64> = qt_times(&h, &values).iter().map(|v| 6.0 * v).collect();
            // tridiagonal: h[j] M[j] + 2 (h[j] + h[j+1]) M[j+1] + h[j+1] M[j+2]
            let m = n - 2;
            let diag: Vec<f64> = (0..m).map(|j| 2.0 * (h[j] + h[j + 1])).collect();
            let off1: Vec<f64> = (0..m.saturating_sub(1)).map(|j| h[j + 1]).collect();
            let off2 = vec![0.0; m.saturating_sub(2)];
            let chol = BandCholesky::factor(&diag, &off1, &off2)
                .expect("interpolation system is diagonally dominant");
            second[1..n - 1].copy_from_slice(&chol.solve(&rhs));
        }
        NaturalSpline {
            knots,
            values,
            second,
        }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn shifted(&self, delta: f64) -> Self {
        NaturalSpline {
            knots: self.knots.clone(),
            values: self.values.iter().map(|v| v + delta).collect(),
            second: self.second.clone(),
        }
    }

    fn end_slopes(&self) -> (f64, f64) {
        let n = self.knots.len();
        if n == 1 {
            return (0.0, 0.0);
        }
        let h0 = self.knots[1] - self.knots[0];
        let left = (self.values[1] - self.values[0]) / h0 - h0 * self.second[1] / 6.0;
        let hn = self.knots[n - 1] - self.knots[n - 2];
        let right = (self.values[n - 1] - self.values[n - 2]) / hn + hn * self.second[n - 2] / 6.0;
        (left, right)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.knots.len();
        let (lo, hi) = (self.knots[0], self.knots[n - 1]);
        if x < lo {
            return self.values[0] + self.end_slopes().0 * (x - lo);
        }
        if x > hi {
            return self.values[n - 1] + self.end_slopes().1 * (x - hi);
        }
        if n == 1 {
            return self.values[0];
        }
        // interval [knots[i], knots[i+1]] containing x
        let i = match self.knots.partition_point(|&k| k <= x) {
            0 => 0,
            p => (p - 1).min(n - 2),
        };
        let h = self.knots[i + 1] - self.knots[i];
        let a = (self.knots[i + 1] - x) / h;
        let b = 1.0 - a;
        a * self.values[i]
            + b * self.values[i + 1]
            + ((a * a * a - a) * self.second[i] + (b * b * b - b) * self.second[i + 1]) * h * h
                / 6.0
    }
}

/// Cubic smoothing spline of the points. Tied abscissae are averaged and
/// weighted by their multiplicity.
pub fn smooth_1d(points: &[(f64, f64)], penalty: f64) -> Result<NaturalSpline> {
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::InvalidData("non-finite point".into()));
    }
    let (xs, weights, means, _) = collapse_ties(points);
    let smoother = CubicSmoother::new(xs, &weights, penalty)?;
    let fitted = smoother.smooth(&means);
    Ok(NaturalSpline::interpolate(smoother.x, fitted))
}
