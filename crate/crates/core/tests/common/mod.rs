#![allow(dead_code)]

use glassbox::cart::{Node, RegressionTree};
use glassbox::data::Dataset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_rows(r: &mut ChaCha8Rng, n: usize, p: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..p).map(|_| r.random::<f64>()).collect())
        .collect()
}

/// Features drawn from a small integer grid so ties are common.
pub fn tied_rows(r: &mut ChaCha8Rng, n: usize, p: usize, levels: u32) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..p).map(|_| r.random_range(0..levels) as f64).collect())
        .collect()
}

pub fn noise(r: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| scale * (r.random::<f64>() - 0.5)).collect()
}

pub fn dataset(rows: &[Vec<f64>], y: Vec<f64>) -> Dataset {
    Dataset::from_rows(rows, y).unwrap()
}

pub fn sse(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let m = values.iter().sum::<f64>() / values.len() as f64;
    values.iter().map(|v| (v - m).powi(2)).sum()
}

/// Every pruning of `t` (subtree sharing its root), with internal nodes
/// turned into leaves predicting the mean of the training rows they hold.
pub fn all_prunings(t: &RegressionTree, d: &Dataset) -> Vec<RegressionTree> {
    fn walk(n: &Node, d: &Dataset, rows: Vec<usize>) -> Vec<Node> {
        let y: Vec<f64> = rows.iter().map(|&i| d.target()[i]).collect();
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        match n {
            Node::Leaf { leaf } => vec![Node::Leaf { leaf: *leaf }],
            Node::Split { split, left, right } => {
                let x = d.feature(split.feature);
                let (l, r): (Vec<usize>, Vec<usize>) =
                    rows.iter().partition(|&&i| x[i] <= split.threshold);
                let mut out = vec![Node::leaf(mean, rows.len())];
                let lefts = walk(left, d, l);
                let rights = walk(right, d, r);
                for a in &lefts {
                    for b in &rights {
                        out.push(Node::split(
                            split.feature,
                            split.threshold,
                            a.clone(),
                            b.clone(),
                        ));
                    }
                }
                out
            }
        }
    }
    walk(&t.root, d, (0..d.n_rows()).collect())
        .into_iter()
        .map(|root| RegressionTree {
            feature_names: t.feature_names.clone(),
            root,
        })
        .collect()
}
