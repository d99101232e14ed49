//! Additive models `f(x) = alpha + f_1(x_1) + ... + f_n(x_n)` fit by
//! backfitting.
//!
//! Components are either linear (`slope * (x - center)`) or cubic smoothing
//! splines. Every component is centered to mean zero over the training rows,
//! which makes the decomposition unique and puts the target mean in `alpha`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cart::stable_mean;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linear::check_point;
use crate::spline::{collapse_ties, CubicSmoother, LinearSmoother, NaturalSpline};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    Linear,
    Smooth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Linear { slope: f64, center: f64 },
    Smooth(NaturalSpline),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentFunction {
    pub feature: usize,
    #[serde(flatten)]
    pub shape: Shape,
}

impl ComponentFunction {
    pub fn eval(&self, v: f64) -> f64 {
        match &self.shape {
            Shape::Linear { slope, center } => slope * (v - center),
            Shape::Smooth(s) => s.eval(v),
        }
    }

    pub fn kind(&self) -> ComponentKind {
        match self.shape {
            Shape::Linear { .. } => ComponentKind::Linear,
            Shape::Smooth(_) => ComponentKind::Smooth,
        }
    }

    /// True when the component is identically zero.
    pub fn is_null(&self) -> bool {
        match &self.shape {
            Shape::Linear { slope, .. } => *slope == 0.0,
            Shape::Smooth(s) => s.values().iter().all(|&v| v == 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureOverride {
    pub kind: Option<ComponentKind>,
    pub penalty: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GamConfig {
    pub smoother_penalty: f64,
    pub max_rounds: usize,
    pub convergence_threshold: f64,
    /// Per-feature kind or penalty, keyed by feature index.
    #[serde(default)]
    pub overrides: BTreeMap<usize, FeatureOverride>,
}

impl Default for GamConfig {
    fn default() -> Self {
        GamConfig {
            smoother_penalty: 1e-3,
            max_rounds: 200,
            convergence_threshold: 1e-6,
            overrides: BTreeMap::new(),
        }
    }
}

impl GamConfig {
    pub fn all_linear(n_features: usize) -> Self {
        let mut cfg = GamConfig::default();
        for j in 0..n_features {
            cfg.overrides.insert(
                j,
                FeatureOverride {
                    kind: Some(ComponentKind::Linear),
                    penalty: None,
                },
            );
        }
        cfg
    }

    pub fn kind(&self, feature: usize) -> ComponentKind {
        self.overrides
            .get(&feature)
            .and_then(|o| o.kind)
            .unwrap_or(ComponentKind::Smooth)
    }

    pub fn penalty(&self, feature: usize) -> f64 {
        self.overrides
            .get(&feature)
            .and_then(|o| o.penalty)
            .unwrap_or(self.smoother_penalty)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.smoother_penalty)
            || self
                .overrides
                .values()
                .any(|o| o.penalty.is_some_and(|p| !positive(p)))
        {
            return Err(Error::InvalidConfig(
                "smoother penalty must be positive".into(),
            ));
        }
        if !positive(self.convergence_threshold) {
            return Err(Error::InvalidConfig(
                "convergence threshold must be positive".into(),
            ));
        }
        if self.max_rounds == 0 {
            return Err(Error::InvalidConfig("max_rounds must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GamModel {
    pub alpha: f64,
    pub components: Vec<ComponentFunction>,
    #[serde(rename = "features")]
    pub feature_names: Vec<String>,
    /// Training (min, max) of each feature.
    pub ranges: Vec<(f64, f64)>,
    /// Largest fitted-value change of each round.
    pub convergence_history: Vec<f64>,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl GamModel {
    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        check_point(x, self.n_features())?;
        Ok(self.alpha
            + self
                .components
                .iter()
                .map(|c| c.eval(x[c.feature]))
                .sum::<f64>())
    }
}

/// Per-feature update rule with its training-row bookkeeping.
enum Updater {
    Smooth {
        smoother: CubicSmoother,
        weights: Vec<f64>,
        index: Vec<usize>,
    },
    Linear {
        center: f64,
        centered: Vec<f64>,
        sxx: f64,
    },
    Zero {
        value: f64,
    },
}

impl Updater {
    fn new(x: &[f64], kind: ComponentKind, penalty: f64) -> Result<Self> {
        let points: Vec<(f64, f64)> = x.iter().map(|&v| (v, 0.0)).collect();
        let (xs, weights, _, index) = collapse_ties(&points);
        if xs.len() < 2 {
            return Ok(Updater::Zero { value: xs[0] });
        }
        Ok(match kind {
            ComponentKind::Smooth => Updater::Smooth {
                smoother: CubicSmoother::new(xs, &weights, penalty)?,
                weights,
                index,
            },
            ComponentKind::Linear => {
                let center = stable_mean(x.iter().copied());
                let centered: Vec<f64> = x.iter().map(|v| v - center).collect();
                let sxx = centered.iter().map(|c| c * c).sum();
                Updater::Linear {
                    center,
                    centered,
                    sxx,
                }
            }
        })
    }

    /// Centered fit to the partial residuals, as training-row values and as
    /// a component function.
    fn update(&self, residual: &[f64]) -> (Vec<f64>, Shape) {
        match self {
            Updater::Smooth {
                smoother,
                weights,
                index,
            } => {
                let mut sums = vec![0.0; weights.len()];
                for (&k, r) in index.iter().zip(residual) {
                    sums[k] += r;
                }
                let means: Vec<f64> = sums.iter().zip(weights).map(|(s, w)| s / w).collect();
                let fitted = smoother.smooth(&means);
                let total: f64 = weights.iter().sum();
                let shift = fitted.iter().zip(weights).map(|(f, w)| f * w).sum::<f64>() / total;
                let values: Vec<f64> = fitted.iter().map(|f| f - shift).collect();
                let rows = index.iter().map(|&k| values[k]).collect();
                let spline = NaturalSpline::interpolate(smoother.abscissae().to_vec(), values);
                (rows, Shape::Smooth(spline))
            }
            Updater::Linear {
                center,
                centered,
                sxx,
            } => {
                let slope = centered
                    .iter()
                    .zip(residual)
                    .map(|(c, r)| c * r)
                    .sum::<f64>()
                    / sxx;
                let rows = centered.iter().map(|c| slope * c).collect();
                (
                    rows,
                    Shape::Linear {
                        slope,
                        center: *center,
                    },
                )
            }
            Updater::Zero { value } => (
                vec![0.0; residual.len()],
                Shape::Linear {
                    slope: 0.0,
                    center: *value,
                },
            ),
        }
    }
}

struct Backfitter<'a> {
    d: &'a Dataset,
    alpha: f64,
    updaters: Vec<Updater>,
    warnings: Vec<String>,
}

impl<'a> Backfitter<'a> {
    fn new(d: &'a Dataset, cfg: &GamConfig) -> Result<Self> {
        cfg.validate()?;
        let mut warnings = Vec::new();
        let mut updaters = Vec::with_capacity(d.n_features());
        for j in 0..d.n_features() {
            let u = Updater::new(d.feature(j), cfg.kind(j), cfg.penalty(j))?;
            if matches!(u, Updater::Zero { .. }) {
                warnings.push(format!(
                    "feature {:?} has a single distinct value; its component is fixed at zero",
                    d.feature_names()[j]
                ));
            }
            updaters.push(u);
        }
        Ok(Backfitter {
            d,
            alpha: stable_mean(d.target().iter().copied()),
            updaters,
            warnings,
        })
    }

    /// Runs rounds until the largest change falls below the threshold.
    /// `fitted[j]` holds component j at the training rows.
    fn run(
        &self,
        fitted: &mut [Vec<f64>],
        shapes: &mut [Shape],
        max_rounds: usize,
        threshold: f64,
    ) -> (Vec<f64>, bool) {
        let y = self.d.target();
        let n = y.len();
        let mut total: Vec<f64> = (0..n).map(|i| fitted.iter().map(|f| f[i]).sum()).collect();
        let mut history = Vec::new();
        for _ in 0..max_rounds {
            let mut round_change = 0.0f64;
            for (j, updater) in self.updaters.iter().enumerate() {
                let residual: Vec<f64> = (0..n)
                    .map(|i| y[i] - self.alpha - (total[i] - fitted[j][i]))
                    .collect();
                let (rows, shape) = updater.update(&residual);
                for i in 0..n {
                    round_change = round_change.max((rows[i] - fitted[j][i]).abs());
                    total[i] += rows[i] - fitted[j][i];
                }
                fitted[j] = rows;
                shapes[j] = shape;
            }
            // refresh the running sum so rounding does not accumulate
            for (i, t) in total.iter_mut().enumerate() {
                *t = fitted.iter().map(|f| f[i]).sum();
            }
            history.push(round_change);
            if round_change < threshold {
                return (history, true);
            }
        }
        (history, false)
    }

    fn model(&self, shapes: Vec<Shape>, history: Vec<f64>, converged: bool) -> GamModel {
        GamModel {
            alpha: self.alpha,
            components: shapes
                .into_iter()
                .enumerate()
                .map(|(feature, shape)| ComponentFunction { feature, shape })
                .collect(),
            feature_names: self.d.feature_names().to_vec(),
            ranges: self.d.ranges(),
            convergence_history: history,
            converged,
            warnings: self.warnings.clone(),
        }
    }
}

/// Backfitting from zero components. Non-convergence within `max_rounds` is
/// reported through `converged`, not as an error.
pub fn backfit(d: &Dataset, cfg: &GamConfig) -> Result<GamModel> {
    let fitter = Backfitter::new(d, cfg)?;
    let n = d.n_rows();
    let mut fitted = vec![vec![0.0; n]; d.n_features()];
    let mut shapes: Vec<Shape> = (0..d.n_features())
        .map(|_| Shape::Linear {
            slope: 0.0,
            center: 0.0,
        })
        .collect();
    let (history, converged) = fitter.run(
        &mut fitted,
        &mut shapes,
        cfg.max_rounds,
        cfg.convergence_threshold,
    );
    Ok(fitter.model(shapes, history, converged))
}

/// Applies one more backfitting round to a fitted model and returns the
/// refined model together with the largest change it made.
pub fn backfit_round(m: &GamModel, d: &Dataset, cfg: &GamConfig) -> Result<(GamModel, f64)> {
    if m.n_features() != d.n_features() {
        return Err(Error::DimensionMismatch {
            expected: m.n_features(),
            actual: d.n_features(),
        });
    }
    let fitter = Backfitter::new(d, cfg)?;
    let mut fitted: Vec<Vec<f64>> = m
        .components
        .iter()
        .map(|c| d.feature(c.feature).iter().map(|&v| c.eval(v)).collect())
        .collect();
    let mut shapes: Vec<Shape> = m.components.iter().map(|c| c.shape.clone()).collect();
    let (history, _) = fitter.run(&mut fitted, &mut shapes, 1, 0.0);
    let change = history[0];
    Ok((
        fitter.model(shapes, history, change < cfg.convergence_threshold),
        change,
    ))
}
