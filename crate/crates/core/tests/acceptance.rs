//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test -p glassbox --test acceptance`.

mod common;

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use glassbox::cart::{best_split, grow_tree, prune_tree, GrowConfig, Node, RegressionTree};
use glassbox::data::Dataset;
use glassbox::gam::{backfit, ComponentKind, FeatureOverride, GamConfig};
use glassbox::interpret::{profile, InteractionStructure, Nonlinearity};
use glassbox::linear::{fit_ols, LinearModel};
use glassbox::mars::{
    anova_decompose, default_penalty, fit_mars, forward_pass, gcv_score, BasisTerm, Hinge,
    MarsConfig, MarsModel, Orientation,
};
use glassbox::spline::smooth_1d;
use glassbox::Model;
use rand::Rng;

use common::{dataset, noise, rng, sse, tied_rows, uniform_rows};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn ols_recovery() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let mut r = rng(seed);
        let p = 1 + (seed % 5) as usize;
        let rows: Vec<Vec<f64>> = (0..50)
            .map(|_| (0..p).map(|_| r.random_range(-3.0..3.0)).collect())
            .collect();
        let beta: f64 = r.random_range(-5.0..5.0);
        let w: Vec<f64> = (0..p).map(|_| r.random_range(-5.0..5.0)).collect();
        let y = rows
            .iter()
            .map(|x| beta + x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>())
            .collect();
        let m = fit_ols(&dataset(&rows, y)).map_err(|e| e.to_string())?;
        worst = worst.max((m.intercept - beta).abs());
        for (a, b) in m.weights.iter().zip(&w) {
            worst = worst.max((a - b).abs());
        }
    }
    ensure!(worst <= 1e-8, "max parameter error {worst:e}");
    Ok(format!("max parameter error {worst:.1e}"))
}

/// Independent enumeration: every feature, every distinct value but the
/// largest, loss recomputed from scratch; first strict improvement wins.
fn brute_split(d: &Dataset) -> Option<(usize, f64, f64)> {
    let y = d.target();
    if y.iter().all(|v| *v == y[0]) {
        return None;
    }
    let mut best: Option<(usize, f64, f64)> = None;
    for j in 0..d.n_features() {
        let x = d.feature(j);
        let mut ts = x.to_vec();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts.pop();
        for t in ts {
            let left: Vec<f64> = (0..y.len()).filter(|&i| x[i] <= t).map(|i| y[i]).collect();
            let right: Vec<f64> = (0..y.len()).filter(|&i| x[i] > t).map(|i| y[i]).collect();
            let loss = sse(&left) + sse(&right);
            if best.is_none_or(|b| loss < b.2) {
                best = Some((j, t, loss));
            }
        }
    }
    best
}

fn split_oracle() -> Outcome {
    let mut checked = 0;
    for seed in 0..200u64 {
        let mut r = rng(1000 + seed);
        let n = r.random_range(2..=30);
        let p = r.random_range(1..=3);
        let rows = if seed % 2 == 0 {
            uniform_rows(&mut r, n, p)
        } else {
            tied_rows(&mut r, n, p, 5)
        };
        let y = noise(&mut r, n, 10.0);
        let d = dataset(&rows, y);
        let all: Vec<usize> = (0..n).collect();
        let got = best_split(&d, &all, 1).map(|c| (c.feature, c.threshold, c.loss));
        let want = brute_split(&d);
        match (got, want) {
            (None, None) => {}
            (Some(g), Some(w)) => {
                ensure!(
                    g.0 == w.0 && g.1 == w.1 && (g.2 - w.2).abs() <= 1e-12 * (1.0 + w.2),
                    "seed {seed}: got {g:?}, brute force {w:?}"
                );
            }
            (g, w) => return Err(format!("seed {seed}: got {g:?}, brute force {w:?}")),
        }
        checked += 1;
    }
    Ok(format!("{checked} datasets agree"))
}

fn perfect_fit() -> Outcome {
    for seed in 0..50u64 {
        let mut r = rng(2000 + seed);
        let n = r.random_range(1..=50);
        let p = r.random_range(1..=3);
        let mut rows = if seed % 2 == 0 {
            uniform_rows(&mut r, n, p)
        } else {
            tied_rows(&mut r, n, p, 6)
        };
        rows.sort_by(|a, b| a.partial_cmp(b).unwrap());
        rows.dedup();
        let n = rows.len();
        // repeated targets make equal-valued leaves likely
        let y: Vec<f64> = (0..n)
            .map(|_| r.random_range(0..4) as f64 * 0.1 + 0.3)
            .collect();
        let d = dataset(&rows, y);
        let t = grow_tree(&d, &GrowConfig::unbounded()).map_err(|e| e.to_string())?;
        let rss = t.rss(&d).map_err(|e| e.to_string())?;
        ensure!(
            rss == 0.0,
            "seed {seed}: training rss {rss:e} with {n} rows"
        );
    }
    Ok("training rss exactly 0 on 50 datasets".into())
}

fn cost(t: &RegressionTree, d: &Dataset, alpha: f64) -> f64 {
    t.rss(d).unwrap() + alpha * t.n_leaves() as f64
}

fn same_shape(a: &Node, b: &Node) -> bool {
    a.is_pruning_of(b) && b.is_pruning_of(a)
}

fn pruning_nestedness() -> Outcome {
    let mut exhaustive = 0;
    for seed in 0..50u64 {
        let mut r = rng(3000 + seed);
        let max_leaves = if seed % 2 == 0 {
            2 + (seed / 2 % 5) as usize
        } else {
            8 + (seed % 9) as usize
        };
        let rows = uniform_rows(&mut r, 40, 2);
        let y = rows
            .iter()
            .zip(noise(&mut r, 40, 1.0))
            .map(|(x, e)| (4.0 * x[0]).floor() + x[1] + e)
            .collect();
        let d = dataset(&rows, y);
        let t = grow_tree(
            &d,
            &GrowConfig {
                max_leaves,
                min_node_size: 1,
            },
        )
        .map_err(|e| e.to_string())?;
        let seq = prune_tree(&t, &d).map_err(|e| e.to_string())?;
        ensure!(
            seq[0].tree == t && seq[0].alpha == 0.0,
            "seed {seed}: sequence does not start at t"
        );
        ensure!(
            seq.last().unwrap().tree.n_leaves() == 1,
            "seed {seed}: sequence does not end at the root"
        );
        for w in seq.windows(2) {
            let (a, b) = (&w[0].tree, &w[1].tree);
            ensure!(
                b.root.is_pruning_of(&a.root),
                "seed {seed}: sequence not nested"
            );
            ensure!(
                b.n_leaves() < a.n_leaves(),
                "seed {seed}: leaf count not strictly decreasing"
            );
            ensure!(
                b.rss(&d).unwrap() >= a.rss(&d).unwrap(),
                "seed {seed}: training rss decreased along the sequence"
            );
            ensure!(w[1].alpha >= w[0].alpha, "seed {seed}: alpha decreased");
        }
        if t.n_leaves() > 6 {
            continue;
        }
        exhaustive += 1;
        let all = common::all_prunings(&t, &d);
        let scale = 1e-9 * (1.0 + sse(d.target()));
        for (k, step) in seq.iter().enumerate() {
            // optimal at its own alpha
            let best = all
                .iter()
                .map(|s| cost(s, &d, step.alpha))
                .fold(f64::INFINITY, f64::min);
            ensure!(
                cost(&step.tree, &d, step.alpha) <= best + scale,
                "seed {seed}: step {k} not optimal at alpha {}",
                step.alpha
            );
            // and the smallest optimal subtree inside its alpha interval
            let alpha = match seq.get(k + 1) {
                Some(next) => 0.5 * (step.alpha + next.alpha),
                None => 2.0 * step.alpha + 1.0,
            };
            let best = all
                .iter()
                .map(|s| cost(s, &d, alpha))
                .fold(f64::INFINITY, f64::min);
            let smallest = all
                .iter()
                .filter(|s| cost(s, &d, alpha) <= best + scale)
                .min_by_key(|s| s.n_leaves())
                .unwrap();
            ensure!(
                same_shape(&smallest.root, &step.tree.root),
                "seed {seed}: step {k} differs from the enumerated optimum at alpha {alpha}"
            );
        }
    }
    ensure!(
        exhaustive >= 20,
        "only {exhaustive} trees small enough to enumerate"
    );
    Ok(format!(
        "50 sequences nested, {exhaustive} checked exhaustively"
    ))
}

/// RSS of the least-squares fit on an intercept plus the given columns.
fn lstsq_rss(cols: Vec<Vec<f64>>, y: &[f64]) -> f64 {
    let n = y.len();
    let names = (0..cols.len()).map(|j| format!("h{j}")).collect();
    let d = Dataset::new(names, cols, "y", y.to_vec()).unwrap();
    let m = fit_ols(&d).unwrap();
    (0..n)
        .map(|i| (y[i] - m.predict(&d.row(i)).unwrap()).powi(2))
        .sum()
}

fn knot_discovery() -> Outcome {
    for seed in 0..20u64 {
        let mut r = rng(4000 + seed);
        let x: Vec<f64> = (0..20).map(|_| r.random_range(0.0..10.0)).collect();
        let mut sorted = x.clone();
        sorted.sort_by(f64::total_cmp);
        let t_star = sorted[r.random_range(1..19)];
        let y: Vec<f64> = x.iter().map(|v| (v - t_star).max(0.0)).collect();
        let rows: Vec<Vec<f64>> = x.iter().map(|v| vec![*v]).collect();
        let d = dataset(&rows, y.clone());

        let m = forward_pass(&d, &MarsConfig::new(2, 1)).map_err(|e| e.to_string())?;
        let first = m
            .terms
            .first()
            .ok_or(format!("seed {seed}: no terms added"))?;
        let knot = first.factors[0].knot;

        // brute force over every knot, scoring each pair by a fresh fit
        let (lo, hi) = (sorted[0], sorted[19]);
        let mut best = (f64::NAN, f64::INFINITY);
        for &t in &sorted {
            let mut cols = Vec::new();
            if t > lo {
                cols.push(x.iter().map(|v| (v - t).max(0.0)).collect());
            }
            if t < hi {
                cols.push(x.iter().map(|v| (t - v).max(0.0)).collect());
            }
            cols.retain(|c: &Vec<f64>| c.iter().any(|v| *v != 0.0));
            let rss = lstsq_rss(cols, &y);
            if rss < best.1 {
                best = (t, rss);
            }
        }
        ensure!(
            best.0 == t_star,
            "seed {seed}: brute force picked {} for t* = {t_star}",
            best.0
        );
        ensure!(
            knot == t_star,
            "seed {seed}: forward pass picked {knot} for t* = {t_star}"
        );
    }
    Ok("first knot equals t* and the brute-force optimum for 20 placements".into())
}

fn anova_completeness() -> Outcome {
    let mut with_interactions = 0;
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let mut r = rng(5000 + seed);
        let p = 2 + (seed % 3) as usize;
        let rows = uniform_rows(&mut r, 100, p);
        let y = rows
            .iter()
            .zip(noise(&mut r, 100, 0.2))
            .map(|(x, e)| x[0] * x[1] * 4.0 + (3.0 * x[0]).sin() + x[p - 1].powi(2) + e)
            .collect();
        let d = dataset(&rows, y);
        let degree = if seed % 4 == 3 { 3 } else { 2 };
        let fit = fit_mars(&d, &MarsConfig::new(12, degree)).map_err(|e| e.to_string())?;
        let m = &fit.model;
        if m.max_degree() >= 2 {
            with_interactions += 1;
        }
        let a = anova_decompose(m);
        for _ in 0..1000 {
            let x: Vec<f64> = (0..p).map(|_| r.random_range(-0.2..1.2)).collect();
            let diff = (a.eval(&x) - m.predict(&x).unwrap()).abs();
            worst = worst.max(diff);
        }
    }
    ensure!(worst <= 1e-10, "max |anova - predict| = {worst:e}");
    ensure!(
        with_interactions >= 10,
        "only {with_interactions} models had interaction terms"
    );
    Ok(format!(
        "max deviation {worst:.1e}; {with_interactions}/20 models with interactions"
    ))
}

fn gcv_selection() -> Outcome {
    let n = 100;
    for rss in [0.5, 1.0, 37.0] {
        for coefs in 1..20 {
            for knots in 0..20 {
                let c = default_penalty(1);
                let m = |coefs: usize, knots: usize| coefs as f64 + c * knots as f64;
                let Ok(base) = gcv_score(rss, n, m(coefs, knots)) else {
                    continue;
                };
                if let Ok(more) = gcv_score(rss, n, m(coefs, knots + 1)) {
                    ensure!(more > base, "not increasing in knots at {coefs}, {knots}");
                }
                if let Ok(more) = gcv_score(rss, n, m(coefs + 1, knots)) {
                    ensure!(
                        more > base,
                        "not increasing in coefficients at {coefs}, {knots}"
                    );
                }
            }
        }
    }
    // pure noise: nothing to find
    let mut intercept_only = 0;
    for seed in 0..20u64 {
        let mut r = rng(6000 + seed);
        let rows = uniform_rows(&mut r, 100, 2);
        let y = noise(&mut r, 100, 2.0);
        let fit =
            fit_mars(&dataset(&rows, y), &MarsConfig::default()).map_err(|e| e.to_string())?;
        if fit.model.terms.is_empty() {
            intercept_only += 1;
        }
    }
    ensure!(
        intercept_only >= 18,
        "intercept-only in {intercept_only}/20 seeds"
    );
    Ok(format!(
        "strictly monotone; intercept-only in {intercept_only}/20 noise seeds"
    ))
}

fn additive_target(x: &[f64]) -> f64 {
    (2.0 * std::f64::consts::PI * x[0]).sin() + x[1].exp() + 3.0 * x[2]
}

fn gam_additivity() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let mut r = rng(7000 + seed);
        let rows = uniform_rows(&mut r, 100, 3);
        let y = rows
            .iter()
            .zip(noise(&mut r, 100, 0.3))
            .map(|(x, e)| additive_target(x) + x[0] * x[1] + e)
            .collect();
        let mut cfg = GamConfig::default();
        if seed % 2 == 1 {
            cfg.overrides.insert(
                2,
                FeatureOverride {
                    kind: Some(ComponentKind::Linear),
                    penalty: None,
                },
            );
        }
        let m = backfit(&dataset(&rows, y), &cfg).map_err(|e| e.to_string())?;
        for j in 0..3 {
            let v: f64 = r.random_range(-0.1..1.0);
            let delta = 0.1;
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for _ in 0..100 {
                let mut x: Vec<f64> = (0..3).map(|_| r.random_range(-0.1..1.1)).collect();
                x[j] = v;
                let f0 = m.predict(&x).unwrap();
                x[j] = v + delta;
                let diff = m.predict(&x).unwrap() - f0;
                lo = lo.min(diff);
                hi = hi.max(diff);
            }
            worst = worst.max(hi - lo);
        }
    }
    ensure!(worst < 1e-10, "effect of a coordinate varies by {worst:e}");
    Ok(format!("max spread {worst:.1e}"))
}

fn gam_ols_oracle() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let mut r = rng(8000 + seed);
        let p = 1 + (seed % 4) as usize;
        let mut rows = uniform_rows(&mut r, 60, p);
        // correlated inputs make backfitting work for its answer
        for x in rows.iter_mut() {
            for j in 1..p {
                x[j] += 0.5 * x[0];
            }
        }
        let y: Vec<f64> = rows
            .iter()
            .zip(noise(&mut r, 60, 1.0))
            .map(|(x, e)| {
                1.0 + x
                    .iter()
                    .enumerate()
                    .map(|(j, v)| (j as f64 - 1.5) * v)
                    .sum::<f64>()
                    + e
            })
            .collect();
        let d = dataset(&rows, y);
        let ols = fit_ols(&d).map_err(|e| e.to_string())?;
        let mut cfg = GamConfig::all_linear(p);
        cfg.convergence_threshold = 1e-13;
        cfg.max_rounds = 100_000;
        let gam = backfit(&d, &cfg).map_err(|e| e.to_string())?;
        ensure!(gam.converged, "seed {seed}: backfitting did not converge");
        for x in d.rows() {
            worst = worst.max((gam.predict(&x).unwrap() - ols.predict(&x).unwrap()).abs());
        }
    }
    ensure!(worst <= 1e-6, "max prediction gap {worst:e}");
    Ok(format!("max prediction gap {worst:.1e}"))
}

fn centered(values: Vec<f64>) -> Vec<f64> {
    let m = values.iter().sum::<f64>() / values.len() as f64;
    values.into_iter().map(|v| v - m).collect()
}

fn gam_recovery() -> Outcome {
    let mut r = rng(9000);
    let rows = uniform_rows(&mut r, 200, 3);
    let parts: [fn(f64) -> f64; 3] = [
        |v| (2.0 * std::f64::consts::PI * v).sin(),
        f64::exp,
        |v| 3.0 * v,
    ];
    let y = rows.iter().map(|x| additive_target(x)).collect();
    let d = dataset(&rows, y);
    let cfg = GamConfig::default();

    // calibration: the smoother alone on each noiseless marginal
    let mut calibration: f64 = 0.0;
    for (j, f) in parts.iter().enumerate() {
        let pts: Vec<(f64, f64)> = d.feature(j).iter().map(|&v| (v, f(v))).collect();
        let s = smooth_1d(&pts, cfg.penalty(j)).map_err(|e| e.to_string())?;
        for &(v, fv) in &pts {
            calibration = calibration.max((s.eval(v) - fv).abs());
        }
    }

    let m = backfit(&d, &cfg).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for (j, f) in parts.iter().enumerate() {
        let truth = centered(d.feature(j).iter().map(|&v| f(v)).collect());
        let c = &m.components[j];
        for (&v, t) in d.feature(j).iter().zip(truth) {
            worst = worst.max((c.eval(v) - t).abs());
        }
    }
    ensure!(
        worst < 0.05,
        "max component error {worst:.4} (smoother alone {calibration:.4})"
    );
    Ok(format!(
        "max component error {worst:.2e} (smoother alone {calibration:.2e})"
    ))
}

fn profile_fidelity() -> Outcome {
    let names = |n: usize| (1..=n).map(|i| format!("x{i}")).collect::<Vec<_>>();

    let linear = Model::Linear(LinearModel {
        intercept: 1.0,
        weights: vec![2.0, 0.0, -1.0],
        feature_names: names(3),
    });
    let p = profile(&linear);
    ensure!(
        p.input_dimension == 2
            && p.model_size == 2
            && p.univariate_nonlinearity == Nonlinearity::Linear
            && p.max_interaction_degree == 1
            && p.interaction_structure == InteractionStructure::None,
        "linear profile {p:?}"
    );

    let leaf = Model::Cart(RegressionTree {
        feature_names: names(2),
        root: Node::leaf(3.5, 10),
    });
    let p = profile(&leaf);
    ensure!(
        p.input_dimension == 0
            && p.model_size == 1
            && p.univariate_nonlinearity == Nonlinearity::Constant,
        "single-leaf profile {p:?}"
    );

    let hinge = |feature, knot, orientation| Hinge {
        feature,
        knot,
        orientation,
    };
    let terms = vec![
        BasisTerm {
            coefficient: 1.5,
            factors: vec![hinge(0, 0.5, Orientation::Positive)],
        },
        BasisTerm {
            coefficient: -2.0,
            factors: vec![
                hinge(0, 0.5, Orientation::Positive),
                hinge(1, 0.2, Orientation::Negative),
            ],
        },
    ];
    let mars = Model::Mars(MarsModel {
        intercept: 0.1,
        knot_count: glassbox::mars::count_knots(&terms),
        terms,
        feature_names: names(2),
        training_rows: 50,
        gcv_penalty: 3.0,
        ranges: vec![(0.0, 1.0); 2],
    });
    let p = profile(&mars);
    ensure!(
        p.max_interaction_degree == 2
            && p.interaction_structure == InteractionStructure::ProductOfHinges,
        "mars profile {p:?}"
    );
    Ok("linear, single-leaf and 2-factor MARS examples exact".into())
}

fn run_cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_glassbox"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "glassbox {}: {}",
            args.join(" "),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(out.stdout)
}

/// Runs fit/predict/report/plot for every model kind into `dir` and
/// returns the fit summaries.
fn pipeline(data: &Path, dir: &Path) -> Result<Vec<u8>, String> {
    let data = data.to_str().unwrap();
    let mut stdout = Vec::new();
    for kind in ["linear", "cart", "mars", "gam"] {
        let model = dir.join(format!("{kind}.json"));
        let model = model.to_str().unwrap();
        let mut fit = vec![
            "fit", "--model", kind, "--data", data, "--target", "y", "--out", model, "--seed", "7",
        ];
        if kind == "mars" {
            fit.extend(["--max-degree", "2"]);
        }
        stdout.extend(run_cli(&fit)?);
        let pred = dir.join(format!("{kind}_pred.csv"));
        run_cli(&[
            "predict",
            "--model",
            model,
            "--data",
            data,
            "--target",
            "y",
            "--out",
            pred.to_str().unwrap(),
        ])?;
        let report = dir.join(format!("{kind}_report"));
        run_cli(&[
            "report",
            "--model",
            model,
            "--out-dir",
            report.to_str().unwrap(),
        ])?;
        if kind != "linear" {
            for format in ["svg", "text"] {
                let plots = dir.join(format!("{kind}_plots_{format}"));
                run_cli(&[
                    "plot",
                    "--model",
                    model,
                    "--out-dir",
                    plots.to_str().unwrap(),
                    "--format",
                    format,
                ])?;
            }
        }
    }
    Ok(stdout)
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(p) = stack.pop() {
        for entry in fs::read_dir(&p).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path
                    .strip_prefix(dir)
                    .unwrap()
                    .to_string_lossy()
                    .into_owned();
                out.push((rel, fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn cli_determinism() -> Outcome {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/synthetic.csv");
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out_a = pipeline(&data, a.path())?;
    let out_b = pipeline(&data, b.path())?;
    ensure!(out_a == out_b, "fit summaries differ between runs");
    let (sa, sb) = (snapshot(a.path()), snapshot(b.path()));
    ensure!(
        sa.len() == sb.len(),
        "runs wrote {} and {} files",
        sa.len(),
        sb.len()
    );
    for ((na, ba), (nb, bb)) in sa.iter().zip(&sb) {
        ensure!(na == nb && ba == bb, "{na} differs between runs");
    }
    Ok(format!(
        "{} output files byte-identical across two runs",
        sa.len()
    ))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("ols recovery", ols_recovery, Some(Duration::from_secs(1))),
        ("split oracle", split_oracle, Some(Duration::from_secs(5))),
        ("perfect fit", perfect_fit, None),
        ("pruning nestedness", pruning_nestedness, None),
        ("mars knot discovery", knot_discovery, None),
        ("anova completeness", anova_completeness, None),
        ("gcv monotonicity and selection", gcv_selection, None),
        ("gam additivity", gam_additivity, None),
        ("gam-ols oracle", gam_ols_oracle, None),
        ("gam recovery", gam_recovery, None),
        ("profile fidelity", profile_fidelity, None),
        ("end-to-end determinism", cli_determinism, None),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let mut outcome = check();
        let elapsed = t.elapsed();
        if let (Ok(_), Some(limit)) = (&outcome, budget) {
            if elapsed > *limit {
                outcome = Err(format!("took {elapsed:.2?}, budget {limit:?}"));
            }
        }
        if i == criteria.len() - 1 {
            let total = start.elapsed();
            if outcome.is_ok() && total > Duration::from_secs(60) {
                outcome = Err(format!("suite took {total:.1?}, budget 60s"));
            }
        }
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{elapsed:.2?}]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} [{elapsed:.2?}]", i + 1);
            }
        }
    }
    println!(
        "acceptance: {}/{} passed in {:.2?}",
        criteria.len() - failed,
        criteria.len(),
        start.elapsed()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
