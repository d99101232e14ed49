//! CART regression trees: exhaustive binary splitting on observed values,
//! breadth-first growth under a leaf budget, and weakest-link
//! cost-complexity pruning.
//!
//! Splits send `x[feature] <= threshold` to the left child and
//! `x[feature] > threshold` to the right. Candidate thresholds are the
//! observed feature values themselves, so every threshold is a training value.
//! Ties between equally good splits go to the lowest feature index, then to
//! the smallest threshold.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linear::check_point;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowConfig {
    pub max_leaves: usize,
    pub min_node_size: usize,
}

impl Default for GrowConfig {
    fn default() -> Self {
        GrowConfig {
            max_leaves: 32,
            min_node_size: 1,
        }
    }
}

impl GrowConfig {
    /// Grow until every leaf is pure or unsplittable.
    pub fn unbounded() -> Self {
        GrowConfig {
            max_leaves: usize::MAX,
            min_node_size: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_leaves == 0 || self.min_node_size == 0 {
            return Err(Error::InvalidConfig(
                "max_leaves and min_node_size must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub feature: usize,
    pub threshold: f64,
    /// Residual sum of squares of the two children.
    pub loss: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRule {
    pub feature: usize,
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeafValue {
    pub value: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Node {
    Split {
        split: SplitRule,
        left: Box<Node>,
        right: Box<Node>,
    },
    Leaf {
        leaf: LeafValue,
    },
}

impl Node {
    pub fn leaf(value: f64, count: usize) -> Self {
        Node::Leaf {
            leaf: LeafValue { value, count },
        }
    }

    pub fn split(feature: usize, threshold: f64, left: Node, right: Node) -> Self {
        Node::Split {
            split: SplitRule { feature, threshold },
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Split { left, right, .. } => left.n_leaves() + right.n_leaves(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    fn route(&self, x: &[f64]) -> &LeafValue {
        let mut node = self;
        loop {
            match node {
                Node::Leaf { leaf } => return leaf,
                Node::Split { split, left, right } => {
                    node = if x[split.feature] <= split.threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    /// True when `self` can be obtained from `other` by collapsing internal
    /// nodes into leaves.
    pub fn is_pruning_of(&self, other: &Node) -> bool {
        match (self, other) {
            (Node::Leaf { .. }, _) => true,
            (
                Node::Split {
                    split: a,
                    left: al,
                    right: ar,
                },
                Node::Split {
                    split: b,
                    left: bl,
                    right: br,
                },
            ) => a == b && al.is_pruning_of(bl) && ar.is_pruning_of(br),
            (Node::Split { .. }, Node::Leaf { .. }) => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    #[serde(rename = "features")]
    pub feature_names: Vec<String>,
    pub root: Node,
}

impl RegressionTree {
    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn n_leaves(&self) -> usize {
        self.root.n_leaves()
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        check_point(x, self.n_features())?;
        Ok(self.root.route(x).value)
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
            .map(|(x, y)| (y - self.root.route(&x).value).powi(2))
            .sum())
    }

    /// Features tested by at least one split.
    pub fn used_features(&self) -> BTreeSet<usize> {
        fn walk(n: &Node, out: &mut BTreeSet<usize>) {
            if let Node::Split { split, left, right } = n {
                out.insert(split.feature);
                walk(left, out);
                walk(right, out);
            }
        }
        let mut out = BTreeSet::new();
        walk(&self.root, &mut out);
        out
    }

    /// Largest number of distinct features along any root-to-leaf path.
    pub fn max_path_features(&self) -> usize {
        fn walk(n: &Node, path: &mut Vec<usize>) -> usize {
            match n {
                Node::Leaf { .. } => path.iter().collect::<BTreeSet<_>>().len(),
                Node::Split { split, left, right } => {
                    path.push(split.feature);
                    let m = walk(left, path).max(walk(right, path));
                    path.pop();
                    m
                }
            }
        }
        walk(&self.root, &mut Vec::new())
    }
}

/// Mean that is exact on constant input.
pub(crate) fn stable_mean(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let mut it = values.clone();
    let Some(first) = it.next() else {
        return 0.0;
    };
    if it.all(|v| v == first) {
        return first;
    }
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

fn sse(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = stable_mean(values.clone());
    values.map(|v| (v - m).powi(2)).sum()
}

/// Exhaustive search over every (feature, observed value) pair among `rows`.
/// Returns `None` when the targets are constant or when no threshold leaves
/// at least `min_node_size` rows on both sides.
pub fn best_split(d: &Dataset, rows: &[usize], min_node_size: usize) -> Option<SplitCandidate> {
    let y = d.target();
    let first = *rows.first()?;
    if rows.iter().all(|&i| y[i] == y[first]) {
        return None;
    }
    let min_node_size = min_node_size.max(1);
    let mut best: Option<SplitCandidate> = None;
    for feature in 0..d.n_features() {
        let x = d.feature(feature);
        let mut values: Vec<f64> = rows.iter().map(|&i| x[i]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        // the largest value would leave the right child empty
        values.pop();
        for &threshold in &values {
            let n_left = rows.iter().filter(|&&i| x[i] <= threshold).count();
            if n_left < min_node_size || rows.len() - n_left < min_node_size {
                continue;
            }
            let left = rows.iter().filter(|&&i| x[i] <= threshold).map(|&i| y[i]);
            let right = rows.iter().filter(|&&i| x[i] > threshold).map(|&i| y[i]);
            let loss = sse(left) + sse(right);
            if best.is_none_or(|b| loss < b.loss) {
                best = Some(SplitCandidate {
                    feature,
                    threshold,
                    loss,
                });
            }
        }
    }
    best
}

enum Grown {
    Leaf {
        rows: Vec<usize>,
    },
    Split {
        rule: SplitRule,
        left: usize,
        right: usize,
    },
}

/// Grows breadth-first: the oldest open leaf is split next, until the leaf
/// budget is spent or no leaf admits a split.
pub fn grow_tree(d: &Dataset, cfg: &GrowConfig) -> Result<RegressionTree> {
    cfg.validate()?;
    let mut arena = vec![Grown::Leaf {
        rows: (0..d.n_rows()).collect(),
    }];
    let mut open = VecDeque::from([0usize]);
    let mut leaves = 1usize;
    while leaves < cfg.max_leaves {
        let Some(idx) = open.pop_front() else { break };
        let Grown::Leaf { rows } = &arena[idx] else {
            unreachable!("only leaves are queued")
        };
        let Some(split) = best_split(d, rows, cfg.min_node_size) else {
            continue;
        };
        let x = d.feature(split.feature);
        let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| x[i] <= split.threshold);
        let left = arena.len();
        arena.push(Grown::Leaf { rows: l });
        arena.push(Grown::Leaf { rows: r });
        arena[idx] = Grown::Split {
            rule: SplitRule {
                feature: split.feature,
                threshold: split.threshold,
            },
            left,
            right: left + 1,
        };
        open.push_back(left);
        open.push_back(left + 1);
        leaves += 1;
    }

    fn build(arena: &[Grown], idx: usize, y: &[f64]) -> Node {
        match &arena[idx] {
            Grown::Leaf { rows } => Node::leaf(stable_mean(rows.iter().map(|&i| y[i])), rows.len()),
            Grown::Split { rule, left, right } => Node::Split {
                split: *rule,
                left: Box::new(build(arena, *left, y)),
                right: Box::new(build(arena, *right, y)),
            },
        }
    }
    Ok(RegressionTree {
        feature_names: d.feature_names().to_vec(),
        root: build(&arena, 0, d.target()),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PruneStep {
    pub tree: RegressionTree,
    /// Smallest complexity penalty at which this subtree becomes optimal.
    pub alpha: f64,
}

/// Node statistics on the pruning data, in preorder.
struct Annotated {
    rule: Option<(SplitRule, usize, usize)>,
    value: f64,
    count: usize,
    leaf_rss: f64,
    collapsed: bool,
}

fn annotate(node: &Node, d: &Dataset, rows: Vec<usize>, out: &mut Vec<Annotated>) -> usize {
    let y = d.target();
    let idx = out.len();
    let values = rows.iter().map(|&i| y[i]);
    let value = match node {
        Node::Leaf { leaf } if rows.is_empty() => leaf.value,
        _ => stable_mean(values.clone()),
    };
    out.push(Annotated {
        rule: None,
        value,
        count: rows.len(),
        leaf_rss: values.map(|v| (v - value).powi(2)).sum(),
        collapsed: false,
    });
    if let Node::Split { split, left, right } = node {
        let x = d.feature(split.feature);
        let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| x[i] <= split.threshold);
        let li = annotate(left, d, l, out);
        let ri = annotate(right, d, r, out);
        out[idx].rule = Some((*split, li, ri));
    }
    idx
}

/// (leaf count, RSS) of the current pruned subtree rooted at `idx`.
fn subtree_cost(nodes: &[Annotated], idx: usize) -> (usize, f64) {
    let n = &nodes[idx];
    match n.rule {
        Some((_, l, r)) if !n.collapsed => {
            let (ll, lr) = subtree_cost(nodes, l);
            let (rl, rr) = subtree_cost(nodes, r);
            (ll + rl, lr + rr)
        }
        _ => (1, n.leaf_rss),
    }
}

fn materialize(nodes: &[Annotated], idx: usize, original: &Node) -> Node {
    let n = &nodes[idx];
    match (n.rule, original) {
        (Some((rule, l, r)), Node::Split { left, right, .. }) if !n.collapsed => Node::Split {
            split: rule,
            left: Box::new(materialize(nodes, l, left)),
            right: Box::new(materialize(nodes, r, right)),
        },
        (_, Node::Leaf { leaf }) => Node::Leaf { leaf: *leaf },
        _ => Node::leaf(n.value, n.count),
    }
}

/// Weakest-link pruning. Returns the nested sequence of optimal subtrees,
/// starting with `t` itself (alpha 0) and ending with the root-only tree.
/// All internal nodes sharing the minimal link strength are collapsed
/// together, so leaf counts strictly decrease along the sequence.
pub fn prune_tree(t: &RegressionTree, d: &Dataset) -> Result<Vec<PruneStep>> {
    if d.n_features() != t.n_features() {
        return Err(Error::DimensionMismatch {
            expected: t.n_features(),
            actual: d.n_features(),
        });
    }
    let mut nodes = Vec::new();
    annotate(&t.root, d, (0..d.n_rows()).collect(), &mut nodes);
    let mut seq = vec![PruneStep {
        tree: t.clone(),
        alpha: 0.0,
    }];
    let scale = nodes[0].leaf_rss.max(f64::MIN_POSITIVE);
    loop {
        // link strength of every live internal node
        let mut links = Vec::new();
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            if let Some((_, l, r)) = nodes[i].rule {
                if nodes[i].collapsed {
                    continue;
                }
                let (leaves, rss) = subtree_cost(&nodes, i);
                let g = ((nodes[i].leaf_rss - rss) / (leaves - 1) as f64).max(0.0);
                links.push((i, g));
                stack.push(l);
                stack.push(r);
            }
        }
        let Some(weakest) = links.iter().map(|&(_, g)| g).min_by(f64::total_cmp) else {
            break;
        };
        for &(i, g) in &links {
            if g <= weakest + 1e-12 * scale {
                nodes[i].collapsed = true;
            }
        }
        seq.push(PruneStep {
            tree: RegressionTree {
                feature_names: t.feature_names.clone(),
                root: materialize(&nodes, 0, &t.root),
            },
            alpha: weakest,
        });
    }
    Ok(seq)
}

/// Picks the subtree with the smallest validation RSS; ties go to the
/// smaller tree.
pub fn select_subtree(seq: &[PruneStep], validation: &Dataset) -> Result<RegressionTree> {
    let mut best: Option<(&RegressionTree, f64)> = None;
    for step in seq {
        let rss = step.tree.rss(validation)?;
        let better = match best {
            None => true,
            Some((b, brss)) => rss < brss || (rss == brss && step.tree.n_leaves() < b.n_leaves()),
        };
        if better {
            best = Some((&step.tree, rss));
        }
    }
    best.map(|(t, _)| t.clone())
        .ok_or_else(|| Error::InvalidData("empty pruning sequence".into()))
}

/// Half-open interval `lower < x <= upper` on one feature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub feature: usize,
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn contains(&self, v: f64) -> bool {
        self.lower < v && v <= self.upper
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    /// Sorted by feature, at most one interval per feature.
    pub constraints: Vec<Interval>,
    pub prediction: f64,
    pub count: usize,
}

impl Region {
    pub fn contains(&self, x: &[f64]) -> bool {
        self.constraints.iter().all(|c| c.contains(x[c.feature]))
    }
}

/// One region per leaf, left to right, with path constraints intersected.
pub fn extract_partition(t: &RegressionTree) -> Vec<Region> {
    fn walk(n: &Node, bounds: &mut Vec<Interval>, out: &mut Vec<Region>) {
        match n {
            Node::Leaf { leaf } => {
                let mut constraints = bounds.clone();
                constraints.sort_by_key(|c| c.feature);
                out.push(Region {
                    constraints,
                    prediction: leaf.value,
                    count: leaf.count,
                });
            }
            Node::Split { split, left, right } => {
                let pos = bounds.iter().position(|c| c.feature == split.feature);
                let current = pos.map_or(
                    Interval {
                        feature: split.feature,
                        lower: f64::NEG_INFINITY,
                        upper: f64::INFINITY,
                    },
                    |p| bounds[p],
                );
                for (child, iv) in [
                    (
                        left,
                        Interval {
                            upper: current.upper.min(split.threshold),
                            ..current
                        },
                    ),
                    (
                        right,
                        Interval {
                            lower: current.lower.max(split.threshold),
                            ..current
                        },
                    ),
                ] {
                    match pos {
                        Some(p) => bounds[p] = iv,
                        None => bounds.push(iv),
                    }
                    walk(child, bounds, out);
                    match pos {
                        Some(p) => bounds[p] = current,
                        None => {
                            bounds.pop();
                        }
                    }
                }
            }
        }
    }
    let mut out = Vec::new();
    walk(&t.root, &mut Vec::new(), &mut out);
    out
}
