//! Structural interpretability reports: profiles along four separate
//! dimensions, rule lists for trees, and plot specifications for additive
//! components and low-order interactions.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cart::{extract_partition, Node, RegressionTree};
use crate::error::{Error, Result};
use crate::gam::{ComponentKind, GamModel};
use crate::mars::{anova_decompose, MarsModel};
use crate::model::Model;

/// Most complex one-variable behavior the model can express, ordered from
/// simplest to most flexible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Nonlinearity {
    Constant,
    PiecewiseConstant,
    Linear,
    PiecewiseLinear,
    NonparametricSmooth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteractionStructure {
    None,
    ProductOfHinges,
    AxisAlignedPartition,
}

/// The dimensions are reported side by side; there is deliberately no
/// combined score.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterpretabilityProfile {
    pub model_kind: String,
    /// Features with a nonzero effect on the prediction.
    pub input_dimension: usize,
    /// Nonzero weights, leaves, basis terms or non-null components.
    pub model_size: usize,
    pub univariate_nonlinearity: Nonlinearity,
    pub max_interaction_degree: usize,
    pub interaction_structure: InteractionStructure,
}

pub fn profile(model: &Model) -> InterpretabilityProfile {
    match model {
        Model::Linear(m) => {
            let active = m.weights.iter().filter(|&&w| w != 0.0).count();
            InterpretabilityProfile {
                model_kind: model.kind().into(),
                input_dimension: active,
                model_size: active,
                univariate_nonlinearity: if active > 0 {
                    Nonlinearity::Linear
                } else {
                    Nonlinearity::Constant
                },
                max_interaction_degree: usize::from(active > 0),
                interaction_structure: InteractionStructure::None,
            }
        }
        Model::Cart(t) => {
            let degree = t.max_path_features();
            InterpretabilityProfile {
                model_kind: model.kind().into(),
                input_dimension: t.used_features().len(),
                model_size: t.n_leaves(),
                univariate_nonlinearity: if t.n_leaves() > 1 {
                    Nonlinearity::PiecewiseConstant
                } else {
                    Nonlinearity::Constant
                },
                max_interaction_degree: degree,
                interaction_structure: if degree >= 2 {
                    InteractionStructure::AxisAlignedPartition
                } else {
                    InteractionStructure::None
                },
            }
        }
        Model::Mars(m) => {
            let live: Vec<_> = m.terms.iter().filter(|t| t.coefficient != 0.0).collect();
            let degree = live.iter().map(|t| t.degree()).max().unwrap_or(0);
            let features: std::collections::BTreeSet<usize> = live
                .iter()
                .flat_map(|t| t.factors.iter().map(|h| h.feature))
                .collect();
            InterpretabilityProfile {
                model_kind: model.kind().into(),
                input_dimension: features.len(),
                model_size: live.len(),
                univariate_nonlinearity: if live.is_empty() {
                    Nonlinearity::Constant
                } else {
                    Nonlinearity::PiecewiseLinear
                },
                max_interaction_degree: degree,
                interaction_structure: if degree >= 2 {
                    InteractionStructure::ProductOfHinges
                } else {
                    InteractionStructure::None
                },
            }
        }
        Model::Gam(m) => {
            let live: Vec<_> = m.components.iter().filter(|c| !c.is_null()).collect();
            let nonlinearity = if live.iter().any(|c| c.kind() == ComponentKind::Smooth) {
                Nonlinearity::NonparametricSmooth
            } else if live.is_empty() {
                Nonlinearity::Constant
            } else {
                Nonlinearity::Linear
            };
            InterpretabilityProfile {
                model_kind: model.kind().into(),
                input_dimension: live.len(),
                model_size: live.len(),
                univariate_nonlinearity: nonlinearity,
                max_interaction_degree: usize::from(!live.is_empty()),
                interaction_structure: InteractionStructure::None,
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Condition {
    AtMost {
        feature: usize,
        name: String,
        value: f64,
    },
    Above {
        feature: usize,
        name: String,
        value: f64,
    },
    Between {
        feature: usize,
        name: String,
        lower: f64,
        upper: f64,
    },
}

impl Condition {
    pub fn holds(&self, x: &[f64]) -> bool {
        match self {
            Condition::AtMost { feature, value, .. } => x[*feature] <= *value,
            Condition::Above { feature, value, .. } => x[*feature] > *value,
            Condition::Between {
                feature,
                lower,
                upper,
                ..
            } => *lower < x[*feature] && x[*feature] <= *upper,
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::AtMost { name, value, .. } => write!(f, "{name} <= {value}"),
            Condition::Above { name, value, .. } => write!(f, "{name} > {value}"),
            Condition::Between {
                name, lower, upper, ..
            } => write!(f, "{lower} < {name} <= {upper}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    /// Conjunction; empty means the rule always applies.
    pub conditions: Vec<Condition>,
    pub prediction: f64,
    pub support: usize,
}

impl Rule {
    pub fn matches(&self, x: &[f64]) -> bool {
        self.conditions.iter().all(|c| c.holds(x))
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.conditions.is_empty() {
            write!(f, "always")?;
        } else {
            for (i, c) in self.conditions.iter().enumerate() {
                if i > 0 {
                    write!(f, " and ")?;
                }
                write!(f, "{c}")?;
            }
        }
        write!(f, " -> {} (n={})", self.prediction, self.support)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleList {
    pub rules: Vec<Rule>,
}

impl RuleList {
    /// Prediction of the first matching rule.
    pub fn eval(&self, x: &[f64]) -> Option<f64> {
        self.rules
            .iter()
            .find(|r| r.matches(x))
            .map(|r| r.prediction)
    }
}

impl fmt::Display for RuleList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

/// One rule per leaf, in left-to-right leaf order.
pub fn tree_to_rules(t: &RegressionTree) -> RuleList {
    let rules = extract_partition(t)
        .into_iter()
        .map(|region| Rule {
            conditions: region
                .constraints
                .iter()
                .map(|c| {
                    let name = t.feature_names[c.feature].clone();
                    match (c.lower.is_finite(), c.upper.is_finite()) {
                        (false, true) => Condition::AtMost {
                            feature: c.feature,
                            name,
                            value: c.upper,
                        },
                        (true, false) => Condition::Above {
                            feature: c.feature,
                            name,
                            value: c.lower,
                        },
                        _ => Condition::Between {
                            feature: c.feature,
                            name,
                            lower: c.lower,
                            upper: c.upper,
                        },
                    }
                })
                .collect(),
            prediction: region.prediction,
            support: region.count,
        })
        .collect();
    RuleList { rules }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    Curve,
    Heatmap,
    TreeDiagram,
}

/// Straight piece of a curve outside the training range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutNode {
    pub label: String,
    /// Horizontal slot (leaves occupy 0, 1, 2, ...) and depth.
    pub x: f64,
    pub depth: usize,
    pub leaf: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlotData {
    Curve {
        x: Vec<f64>,
        y: Vec<f64>,
        extrapolation: Vec<Segment>,
    },
    Heatmap {
        x: Vec<f64>,
        y: Vec<f64>,
        /// `z[row][col]` is the value at `(x[col], y[row])`.
        z: Vec<Vec<f64>>,
    },
    TreeDiagram {
        nodes: Vec<LayoutNode>,
        /// (parent, child) node indices.
        edges: Vec<(usize, usize)>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSpec {
    pub name: String,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub data: PlotData,
}

impl PlotSpec {
    pub fn kind(&self) -> PlotKind {
        match self.data {
            PlotData::Curve { .. } => PlotKind::Curve,
            PlotData::Heatmap { .. } => PlotKind::Heatmap,
            PlotData::TreeDiagram { .. } => PlotKind::TreeDiagram,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        let ok = match &self.data {
            PlotData::Curve {
                x,
                y,
                extrapolation,
            } => {
                x.len() == y.len()
                    && x.len() >= 2
                    && finite(x)
                    && finite(y)
                    && extrapolation
                        .iter()
                        .all(|s| finite(&[s.x0, s.y0, s.x1, s.y1]))
            }
            PlotData::Heatmap { x, y, z } => {
                x.len() >= 2
                    && y.len() >= 2
                    && z.len() == y.len()
                    && z.iter().all(|r| r.len() == x.len() && finite(r))
                    && finite(x)
                    && finite(y)
            }
            PlotData::TreeDiagram { nodes, edges } => {
                !nodes.is_empty()
                    && edges
                        .iter()
                        .all(|&(a, b)| a < nodes.len() && b < nodes.len())
                    && nodes.iter().all(|n| n.x.is_finite())
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Render(format!(
                "inconsistent plot spec {:?}",
                self.name
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentPlots {
    pub specs: Vec<PlotSpec>,
    /// Interaction groups of degree three or more, by feature names; these
    /// are listed but never plotted.
    pub unplottable: Vec<String>,
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

const EXTRAPOLATION_MARGIN: f64 = 0.1;

fn curve(
    name: String,
    label: &str,
    lo: f64,
    hi: f64,
    n: usize,
    f: impl Fn(f64) -> f64,
) -> PlotSpec {
    let x = grid(lo, hi, n);
    let y = x.iter().map(|&v| f(v)).collect();
    let margin = EXTRAPOLATION_MARGIN * (hi - lo);
    let extrapolation = if margin > 0.0 {
        vec![
            Segment {
                x0: lo - margin,
                y0: f(lo - margin),
                x1: lo,
                y1: f(lo),
            },
            Segment {
                x0: hi,
                y0: f(hi),
                x1: hi + margin,
                y1: f(hi + margin),
            },
        ]
    } else {
        Vec::new()
    };
    PlotSpec {
        title: format!("f({label})"),
        name,
        x_label: label.to_string(),
        y_label: format!("f({label})"),
        data: PlotData::Curve {
            x,
            y,
            extrapolation,
        },
    }
}

fn check_resolution(grid_resolution: usize) -> Result<()> {
    if grid_resolution < 2 {
        return Err(Error::InvalidConfig(
            "grid resolution must be at least 2".into(),
        ));
    }
    Ok(())
}

/// One curve per GAM component over the training range of its feature.
pub fn gam_component_plots(m: &GamModel, grid_resolution: usize) -> Result<ComponentPlots> {
    check_resolution(grid_resolution)?;
    let specs = m
        .components
        .iter()
        .map(|c| {
            let (lo, hi) = m.ranges[c.feature];
            let name = &m.feature_names[c.feature];
            curve(
                format!("component_{name}"),
                name,
                lo,
                hi,
                grid_resolution,
                |v| c.eval(v),
            )
        })
        .collect();
    Ok(ComponentPlots {
        specs,
        unplottable: Vec::new(),
    })
}

/// Curves for main effects and heatmaps for two-way interactions of the
/// ANOVA decomposition. Higher-order groups are only listed.
pub fn mars_component_plots(m: &MarsModel, grid_resolution: usize) -> Result<ComponentPlots> {
    check_resolution(grid_resolution)?;
    let anova = anova_decompose(m);
    let mut specs = Vec::new();
    let mut unplottable = Vec::new();
    let names = &m.feature_names;
    let mut point = vec![0.0; m.n_features()];
    for group in &anova.groups {
        match group.features.as_slice() {
            &[j] => {
                let (lo, hi) = m.ranges[j];
                specs.push(curve(
                    format!("anova_{}", names[j]),
                    &names[j],
                    lo,
                    hi,
                    grid_resolution,
                    |v| {
                        let mut p = point.clone();
                        p[j] = v;
                        group.eval(&p)
                    },
                ));
            }
            &[a, b] => {
                let x = grid(m.ranges[a].0, m.ranges[a].1, grid_resolution);
                let y = grid(m.ranges[b].0, m.ranges[b].1, grid_resolution);
                let z = y
                    .iter()
                    .map(|&vb| {
                        x.iter()
                            .map(|&va| {
                                point[a] = va;
                                point[b] = vb;
                                group.eval(&point)
                            })
                            .collect()
                    })
                    .collect();
                point[a] = 0.0;
                point[b] = 0.0;
                specs.push(PlotSpec {
                    name: format!("anova_{}_{}", names[a], names[b]),
                    title: format!("f({}, {})", names[a], names[b]),
                    x_label: names[a].clone(),
                    y_label: names[b].clone(),
                    data: PlotData::Heatmap { x, y, z },
                });
            }
            features => {
                let labels: Vec<&str> = features.iter().map(|&j| names[j].as_str()).collect();
                unplottable.push(format!("f({})", labels.join(", ")));
            }
        }
    }
    Ok(ComponentPlots { specs, unplottable })
}

/// Leaves on consecutive horizontal slots, parents centered over children.
pub fn tree_diagram(t: &RegressionTree) -> PlotSpec {
    fn walk(
        n: &Node,
        depth: usize,
        names: &[String],
        next_leaf: &mut f64,
        nodes: &mut Vec<LayoutNode>,
        edges: &mut Vec<(usize, usize)>,
    ) -> usize {
        let idx = nodes.len();
        match n {
            Node::Leaf { leaf } => {
                nodes.push(LayoutNode {
                    label: format!("{} (n={})", leaf.value, leaf.count),
                    x: *next_leaf,
                    depth,
                    leaf: true,
                });
                *next_leaf += 1.0;
            }
            Node::Split { split, left, right } => {
                nodes.push(LayoutNode {
                    label: format!("{} <= {}", names[split.feature], split.threshold),
                    x: 0.0,
                    depth,
                    leaf: false,
                });
                let l = walk(left, depth + 1, names, next_leaf, nodes, edges);
                let r = walk(right, depth + 1, names, next_leaf, nodes, edges);
                nodes[idx].x = 0.5 * (nodes[l].x + nodes[r].x);
                edges.push((idx, l));
                edges.push((idx, r));
            }
        }
        idx
    }
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    walk(
        &t.root,
        0,
        &t.feature_names,
        &mut 0.0,
        &mut nodes,
        &mut edges,
    );
    PlotSpec {
        name: "tree".into(),
        title: format!("regression tree ({} leaves)", t.n_leaves()),
        x_label: String::new(),
        y_label: "depth".into(),
        data: PlotData::TreeDiagram { nodes, edges },
    }
}

/// Plots for any model: component curves and heatmaps for GAM and MARS, a
/// diagram for trees. Linear models have no component plots.
pub fn plots_for(model: &Model, grid_resolution: usize) -> Result<ComponentPlots> {
    match model {
        Model::Gam(m) => gam_component_plots(m, grid_resolution),
        Model::Mars(m) => mars_component_plots(m, grid_resolution),
        Model::Cart(t) => Ok(ComponentPlots {
            specs: vec![tree_diagram(t)],
            unplottable: Vec::new(),
        }),
        Model::Linear(_) => Err(Error::Render(
            "linear models have no component plots; their weights are the report".into(),
        )),
    }
}
