//! Multivariate adaptive regression splines.
//!
//! The model is `f(x) = b0 + sum_m c_m h_m(x)` where each `h_m` is a product
//! of hinge functions `(x_i - t)+` or `(t - x_i)+` with knots `t` at training
//! values, and no feature appears twice in one product.
//!
//! Fitting runs in three stages:
//!
//! 1. [`forward_pass`] grows the basis greedily. Each step scores every
//!    product of an existing term with a mirrored hinge pair on a new feature
//!    by the exact least-squares RSS of the enlarged model, and keeps the
//!    best pair.
//! 2. [`backward_prune`] removes terms one at a time, always the one whose
//!    removal increases RSS least, refitting after each removal.
//! 3. [`select_by_gcv`] picks the member of that sequence with the lowest
//!    generalized cross-validation score
//!    `(RSS/N) / (1 - M/N)^2`, `M = coefficients + penalty * distinct knots`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::cart::stable_mean;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{self, LstsqError};
use crate::linear::check_point;

/// Squared-norm fraction below which a candidate column counts as lying in
/// the span of the current basis.
const COLUMN_TOLERANCE: f64 = 1e-10;
/// A step must reduce RSS by at least this fraction of the constant-model RSS.
const IMPROVEMENT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Orientation {
    /// `(x - t)+`
    #[serde(rename = "+")]
    Positive,
    /// `(t - x)+`
    #[serde(rename = "-")]
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hinge {
    pub feature: usize,
    pub knot: f64,
    pub orientation: Orientation,
}

impl Hinge {
    pub fn eval(&self, v: f64) -> f64 {
        match self.orientation {
            Orientation::Positive => (v - self.knot).max(0.0),
            Orientation::Negative => (self.knot - v).max(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisTerm {
    #[serde(rename = "coef")]
    pub coefficient: f64,
    pub factors: Vec<Hinge>,
}

impl BasisTerm {
    /// Product of the hinge factors, without the coefficient.
    pub fn basis_value(&self, x: &[f64]) -> f64 {
        self.factors.iter().map(|h| h.eval(x[h.feature])).product()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.coefficient * self.basis_value(x)
    }

    pub fn degree(&self) -> usize {
        self.factors.len()
    }

    /// Sorted feature indices used by the factors.
    pub fn features(&self) -> Vec<usize> {
        let mut f: Vec<usize> = self.factors.iter().map(|h| h.feature).collect();
        f.sort_unstable();
        f
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarsConfig {
    /// Forward-stage budget of hinge-product terms, intercept excluded.
    /// Checked after each pair is added, so the final count can exceed it by one.
    pub max_terms: usize,
    pub max_interaction_degree: usize,
    /// Cost per distinct knot in the GCV effective parameter count.
    pub gcv_penalty: f64,
}

impl MarsConfig {
    /// Penalty 2 for additive models and 3 when interactions are allowed.
    pub fn new(max_terms: usize, max_interaction_degree: usize) -> Self {
        MarsConfig {
            max_terms,
            max_interaction_degree,
            gcv_penalty: default_penalty(max_interaction_degree),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_terms == 0 || self.max_interaction_degree == 0 {
            return Err(Error::InvalidConfig(
                "max_terms and max_interaction_degree must be at least 1".into(),
            ));
        }
        if !(self.gcv_penalty > 0.0 && self.gcv_penalty.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "gcv penalty must be positive, got {}",
                self.gcv_penalty
            )));
        }
        Ok(())
    }
}

impl Default for MarsConfig {
    fn default() -> Self {
        MarsConfig::new(21, 1)
    }
}

pub fn default_penalty(max_interaction_degree: usize) -> f64 {
    if max_interaction_degree > 1 {
        3.0
    } else {
        2.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarsModel {
    pub intercept: f64,
    pub terms: Vec<BasisTerm>,
    #[serde(rename = "features")]
    pub feature_names: Vec<String>,
    pub training_rows: usize,
    pub knot_count: usize,
    pub gcv_penalty: f64,
    /// Training (min, max) of each feature.
    pub ranges: Vec<(f64, f64)>,
}

impl MarsModel {
    fn assemble(intercept: f64, terms: Vec<BasisTerm>, template: &MarsModel) -> MarsModel {
        let knot_count = count_knots(&terms);
        MarsModel {
            intercept,
            terms,
            knot_count,
            ..template.clone_shell()
        }
    }

    fn clone_shell(&self) -> MarsModel {
        MarsModel {
            intercept: 0.0,
            terms: Vec::new(),
            feature_names: self.feature_names.clone(),
            training_rows: self.training_rows,
            knot_count: 0,
            gcv_penalty: self.gcv_penalty,
            ranges: self.ranges.clone(),
        }
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        check_point(x, self.n_features())?;
        Ok(self.intercept + self.terms.iter().map(|t| t.eval(x)).sum::<f64>())
    }

    pub fn rss(&self, d: &Dataset) -> Result<f64> {
        if d.n_features() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                actual: d.n_features(),
            });
        }
        Ok(d.rows()
            .zip(d.target())
            .map(|(x, y)| {
                let f = self.intercept + self.terms.iter().map(|t| t.eval(&x)).sum::<f64>();
                (y - f).powi(2)
            })
            .sum())
    }

    pub fn max_degree(&self) -> usize {
        self.terms.iter().map(BasisTerm::degree).max().unwrap_or(0)
    }

    pub fn used_features(&self) -> BTreeSet<usize> {
        self.terms
            .iter()
            .flat_map(|t| t.factors.iter().map(|h| h.feature))
            .collect()
    }

    /// Intercept plus one coefficient per term.
    pub fn n_coefficients(&self) -> usize {
        self.terms.len() + 1
    }

    pub fn effective_parameters(&self) -> f64 {
        self.n_coefficients() as f64 + self.gcv_penalty * self.knot_count as f64
    }
}

/// Number of distinct (feature, knot) pairs among all hinge factors.
pub fn count_knots(terms: &[BasisTerm]) -> usize {
    terms
        .iter()
        .flat_map(|t| t.factors.iter().map(|h| (h.feature, h.knot.to_bits())))
        .collect::<BTreeSet<_>>()
        .len()
}

fn basis_column(factors: &[Hinge], d: &Dataset) -> Vec<f64> {
    (0..d.n_rows())
        .map(|i| {
            factors
                .iter()
                .map(|h| h.eval(d.feature(h.feature)[i]))
                .product()
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Orthonormal basis of the columns added so far, plus the current residual.
struct Projector {
    q: Vec<Vec<f64>>,
    residual: Vec<f64>,
}

impl Projector {
    /// Gram-Schmidt with one reorthogonalization pass. Returns false and
    /// leaves the basis untouched when `v` is numerically in its span.
    fn push(&mut self, v: &[f64]) -> bool {
        let norm0 = dot(v, v);
        let mut w = v.to_vec();
        for _ in 0..2 {
            for q in &self.q {
                let c = dot(q, &w);
                w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= c * qi);
            }
        }
        let norm = dot(&w, &w);
        if norm0 == 0.0 || norm <= COLUMN_TOLERANCE * norm0 {
            return false;
        }
        let inv = norm.sqrt().recip();
        w.iter_mut().for_each(|wi| *wi *= inv);
        let c = dot(&w, &self.residual);
        self.residual
            .iter_mut()
            .zip(&w)
            .for_each(|(r, wi)| *r -= c * wi);
        self.q.push(w);
        true
    }

    /// Squared norm of the part of `v` orthogonal to the basis, its inner
    /// product with the residual, and its projection coefficients.
    fn project(&self, v: &[f64]) -> (f64, f64, Vec<f64>) {
        let coeffs: Vec<f64> = self.q.iter().map(|q| dot(q, v)).collect();
        let norm = dot(v, v) - coeffs.iter().map(|c| c * c).sum::<f64>();
        (norm, dot(&self.residual, v), coeffs)
    }
}

/// RSS reduction from adding the given columns to the projector's basis.
/// Columns that are numerically dependent are dropped; the returned mask says
/// which survived.
fn score_columns(p: &Projector, cols: &[Option<Vec<f64>>; 2]) -> Option<(f64, [bool; 2])> {
    let mut parts: Vec<(usize, f64, f64, Vec<f64>, f64)> = Vec::new();
    for (k, col) in cols.iter().enumerate() {
        if let Some(c) = col {
            let raw = dot(c, c);
            let (norm, rc, coeffs) = p.project(c);
            if raw > 0.0 && norm > COLUMN_TOLERANCE * raw {
                parts.push((k, norm, rc, coeffs, raw));
            }
        }
    }
    match parts.as_slice() {
        [] => None,
        [(k, norm, rc, _, _)] => {
            let mut mask = [false; 2];
            mask[*k] = true;
            Some((rc * rc / norm, mask))
        }
        [(_, na, ra, ca, _), (_, nb, rb, cb, raw_b)] => {
            let a = cols[0].as_ref().expect("present");
            let b = cols[1].as_ref().expect("present");
            let ab = dot(a, b) - ca.iter().zip(cb).map(|(x, y)| x * y).sum::<f64>();
            let det = na * nb - ab * ab;
            // b's component orthogonal to both the basis and a
            if det <= COLUMN_TOLERANCE * na * raw_b {
                return Some((ra * ra / na, [true, false]));
            }
            let red = (nb * ra * ra - 2.0 * ab * ra * rb + na * rb * rb) / det;
            Some((red, [true, true]))
        }
        _ => unreachable!("at most two columns"),
    }
}

struct Candidate {
    reduction: f64,
    parent: usize,
    feature: usize,
    knot: f64,
    mask: [bool; 2],
}

/// Greedy forward construction of the hinge basis.
pub fn forward_pass(d: &Dataset, cfg: &MarsConfig) -> Result<MarsModel> {
    cfg.validate()?;
    let n = d.n_rows();
    if n < 3 {
        return Err(Error::TooFewRows {
            needed: 3,
            actual: n,
        });
    }
    let y = d.target();
    let ranges = d.ranges();
    let knots: Vec<Vec<f64>> = d
        .features()
        .iter()
        .map(|c| {
            let mut v = c.clone();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        })
        .collect();

    let mut projector = Projector {
        q: Vec::new(),
        residual: y.to_vec(),
    };
    projector.push(&vec![1.0; n]);
    // exact zero residual for constant targets
    let mean = stable_mean(y.iter().copied());
    projector.residual = y.iter().map(|v| v - mean).collect();
    let initial_rss = dot(&projector.residual, &projector.residual);
    let tolerance = IMPROVEMENT_TOLERANCE * initial_rss;

    // factors and training column of every term; index 0 is the constant
    let mut factors: Vec<Vec<Hinge>> = vec![Vec::new()];
    let mut columns: Vec<Vec<f64>> = vec![vec![1.0; n]];

    while factors.len() - 1 < cfg.max_terms && initial_rss > 0.0 {
        let mut best: Option<Candidate> = None;
        for parent in 0..factors.len() {
            if factors[parent].len() >= cfg.max_interaction_degree {
                continue;
            }
            let parent_col = &columns[parent];
            for feature in 0..d.n_features() {
                if factors[parent].iter().any(|h| h.feature == feature) {
                    continue;
                }
                let x = d.feature(feature);
                let (lo, hi) = ranges[feature];
                for &knot in &knots[feature] {
                    let pos = (knot > lo).then(|| {
                        parent_col
                            .iter()
                            .zip(x)
                            .map(|(p, v)| p * (v - knot).max(0.0))
                            .collect()
                    });
                    let neg = (knot < hi).then(|| {
                        parent_col
                            .iter()
                            .zip(x)
                            .map(|(p, v)| p * (knot - v).max(0.0))
                            .collect()
                    });
                    let Some((reduction, mask)) = score_columns(&projector, &[pos, neg]) else {
                        continue;
                    };
                    if best.as_ref().is_none_or(|b| reduction > b.reduction) {
                        best = Some(Candidate {
                            reduction,
                            parent,
                            feature,
                            knot,
                            mask,
                        });
                    }
                }
            }
        }
        let Some(best) = best else { break };
        if !(best.reduction >= tolerance) || best.reduction <= 0.0 {
            break;
        }
        let mut added = 0;
        for (keep, orientation) in best
            .mask
            .iter()
            .zip([Orientation::Positive, Orientation::Negative])
        {
            if !keep {
                continue;
            }
            let mut f = factors[best.parent].clone();
            f.push(Hinge {
                feature: best.feature,
                knot: best.knot,
                orientation,
            });
            let col = basis_column(&f, d);
            if projector.push(&col) {
                factors.push(f);
                columns.push(col);
                added += 1;
            }
        }
        if added == 0 {
            break;
        }
    }

    let shell = MarsModel {
        intercept: 0.0,
        terms: Vec::new(),
        feature_names: d.feature_names().to_vec(),
        training_rows: n,
        knot_count: 0,
        gcv_penalty: cfg.gcv_penalty,
        ranges,
    };
    let factors = factors.split_off(1);
    refit(&shell, factors, d)
}

/// Least-squares coefficients for a fixed set of hinge products.
fn refit(shell: &MarsModel, factors: Vec<Vec<Hinge>>, d: &Dataset) -> Result<MarsModel> {
    let mut cols = vec![vec![1.0; d.n_rows()]];
    cols.extend(factors.iter().map(|f| basis_column(f, d)));
    let x = linalg::design_from_columns(&cols, d.n_rows());
    let fit = linalg::least_squares(&x, d.target()).map_err(|e| match e {
        LstsqError::RankDeficient(c) => {
            Error::Numerical(format!("degenerate MARS basis (columns {c:?})"))
        }
        LstsqError::Underdetermined { rows, cols } => Error::TooFewRows {
            needed: cols,
            actual: rows,
        },
    })?;
    if fit.coefficients.iter().any(|c| !c.is_finite()) {
        return Err(Error::Numerical("non-finite MARS coefficients".into()));
    }
    let terms = factors
        .into_iter()
        .zip(&fit.coefficients[1..])
        .map(|(factors, &coefficient)| BasisTerm {
            coefficient,
            factors,
        })
        .collect();
    Ok(MarsModel::assemble(fit.coefficients[0], terms, shell))
}

/// Backward elimination from `m` down to the intercept-only model. The first
/// element is `m` with its coefficients refit; each later model has exactly
/// one term fewer. Every model is a least-squares fit on its own basis.
pub fn backward_prune(m: &MarsModel, d: &Dataset) -> Result<Vec<MarsModel>> {
    if d.n_features() != m.n_features() {
        return Err(Error::DimensionMismatch {
            expected: m.n_features(),
            actual: d.n_features(),
        });
    }
    let mut current: Vec<Vec<Hinge>> = m.terms.iter().map(|t| t.factors.clone()).collect();
    let mut seq = vec![refit(m, current.clone(), d)?];
    while !current.is_empty() {
        let mut best: Option<(usize, MarsModel, f64)> = None;
        for k in 0..current.len() {
            let mut reduced = current.clone();
            reduced.remove(k);
            let candidate = refit(m, reduced, d)?;
            let rss = candidate.rss(d)?;
            if best.as_ref().is_none_or(|b| rss < b.2) {
                best = Some((k, candidate, rss));
            }
        }
        let (k, model, _) = best.expect("at least one term");
        current.remove(k);
        seq.push(model);
    }
    Ok(seq)
}

/// Generalized cross-validation score from its parts.
pub fn gcv_score(rss: f64, rows: usize, effective_parameters: f64) -> Result<f64> {
    let n = rows as f64;
    if effective_parameters >= n {
        return Err(Error::GcvUndefined {
            effective: effective_parameters,
            rows,
        });
    }
    Ok((rss / n) / (1.0 - effective_parameters / n).powi(2))
}

pub fn gcv(m: &MarsModel, d: &Dataset) -> Result<f64> {
    gcv_score(m.rss(d)?, d.n_rows(), m.effective_parameters())
}

/// Lowest-GCV model of the sequence; ties go to the model with fewer terms.
/// Models too complex for GCV are skipped.
pub fn select_by_gcv(seq: &[MarsModel], d: &Dataset) -> Result<MarsModel> {
    let mut best: Option<(&MarsModel, f64)> = None;
    for m in seq {
        let score = match gcv(m, d) {
            Ok(s) => s,
            Err(Error::GcvUndefined { .. }) => continue,
            Err(e) => return Err(e),
        };
        let better =
            best.is_none_or(|(b, bs)| score < bs || (score == bs && m.terms.len() < b.terms.len()));
        if better {
            best = Some((m, score));
        }
    }
    best.map(|(m, _)| m.clone()).ok_or(Error::GcvUndefined {
        effective: seq
            .iter()
            .map(MarsModel::effective_parameters)
            .fold(f64::INFINITY, f64::min),
        rows: d.n_rows(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarsFit {
    pub model: MarsModel,
    pub gcv: f64,
    pub forward_terms: usize,
}

/// Forward pass, backward pruning and GCV selection.
pub fn fit_mars(d: &Dataset, cfg: &MarsConfig) -> Result<MarsFit> {
    let forward = forward_pass(d, cfg)?;
    let seq = backward_prune(&forward, d)?;
    let model = select_by_gcv(&seq, d)?;
    let score = gcv(&model, d)?;
    Ok(MarsFit {
        forward_terms: forward.terms.len(),
        model,
        gcv: score,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnovaGroup {
    /// Sorted feature indices shared by every term in the group.
    pub features: Vec<usize>,
    pub terms: Vec<BasisTerm>,
}

impl AnovaGroup {
    pub fn degree(&self) -> usize {
        self.features.len()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnovaDecomposition {
    pub intercept: f64,
    /// Ordered by feature set.
    pub groups: Vec<AnovaGroup>,
}

impl AnovaDecomposition {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.intercept + self.groups.iter().map(|g| g.eval(x)).sum::<f64>()
    }
}

/// Groups terms by the exact set of features they use.
pub fn anova_decompose(m: &MarsModel) -> AnovaDecomposition {
    let mut groups: BTreeMap<Vec<usize>, Vec<BasisTerm>> = BTreeMap::new();
    for t in &m.terms {
        groups.entry(t.features()).or_default().push(t.clone());
    }
    AnovaDecomposition {
        intercept: m.intercept,
        groups: groups
            .into_iter()
            .map(|(features, terms)| AnovaGroup { features, terms })
            .collect(),
    }
}
