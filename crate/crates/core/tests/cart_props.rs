mod common;

use glassbox::cart::{extract_partition, grow_tree, prune_tree, select_subtree, GrowConfig};
use glassbox::interpret::tree_to_rules;
use rand::Rng;

fn random_tree(seed: u64) -> (glassbox::cart::RegressionTree, glassbox::data::Dataset) {
    let mut r = common::rng(seed);
    let rows = common::tied_rows(&mut r, 60, 3, 8);
    let y = common::noise(&mut r, 60, 4.0);
    let d = common::dataset(&rows, y);
    let cfg = GrowConfig {
        max_leaves: r.random_range(1..20),
        min_node_size: 1,
    };
    (grow_tree(&d, &cfg).unwrap(), d)
}

#[test]
fn prediction_equals_region_sum() {
    for seed in 0..10 {
        let (t, _) = random_tree(seed);
        let regions = extract_partition(&t);
        let mut r = common::rng(100 + seed);
        for _ in 0..1000 {
            // grid points hit thresholds exactly
            let x: Vec<f64> = (0..3).map(|_| r.random_range(-1..9) as f64).collect();
            let hits: Vec<_> = regions.iter().filter(|g| g.contains(&x)).collect();
            assert_eq!(hits.len(), 1, "point {x:?} in {} regions", hits.len());
            let sum: f64 = regions
                .iter()
                .map(|g| if g.contains(&x) { g.prediction } else { 0.0 })
                .sum();
            assert_eq!(sum, t.predict(&x).unwrap());
        }
    }
}

#[test]
fn rules_agree_with_tree() {
    for seed in 0..10 {
        let (t, d) = random_tree(seed);
        let rules = tree_to_rules(&t);
        assert_eq!(rules.rules.len(), t.n_leaves());
        assert_eq!(
            rules.rules.iter().map(|r| r.support).sum::<usize>(),
            d.n_rows()
        );
        let mut r = common::rng(200 + seed);
        for _ in 0..1000 {
            let x: Vec<f64> = (0..3).map(|_| r.random_range(-1.0..9.0)).collect();
            assert_eq!(rules.rules.iter().filter(|r| r.matches(&x)).count(), 1);
            assert_eq!(rules.eval(&x), Some(t.predict(&x).unwrap()));
        }
    }
}

#[test]
fn validation_selection_on_noiseless_data_keeps_full_fit() {
    let x: Vec<Vec<f64>> = (0..16).map(|i| vec![i as f64]).collect();
    let y: Vec<f64> = (0..16).map(|i| (i / 4) as f64).collect();
    let d = common::dataset(&x, y);
    let t = grow_tree(&d, &GrowConfig::unbounded()).unwrap();
    let seq = prune_tree(&t, &d).unwrap();
    let chosen = select_subtree(&seq, &d).unwrap();
    assert_eq!(chosen.n_leaves(), 4);
    assert_eq!(chosen.rss(&d).unwrap(), 0.0);
}

#[test]
fn pruned_four_point_step_passes_through_two_leaves() {
    let x: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64]).collect();
    let d = common::dataset(&x, vec![0.0, 0.1, 5.0, 5.2]);
    let t = grow_tree(&d, &GrowConfig::unbounded()).unwrap();
    let leaves: Vec<usize> = prune_tree(&t, &d)
        .unwrap()
        .iter()
        .map(|s| s.tree.n_leaves())
        .collect();
    assert_eq!(leaves.first(), Some(&4));
    assert!(leaves.ends_with(&[2, 1]), "{leaves:?}");
}
