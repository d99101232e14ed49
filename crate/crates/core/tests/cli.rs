use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn glassbox(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_glassbox"))
        .args(args)
        .output()
        .unwrap()
}

fn bundled() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/synthetic.csv")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn fit_cart_respects_leaf_budget() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("m.json");
    let out = glassbox(&[
        "fit",
        "--model",
        "cart",
        "--data",
        s(&bundled()),
        "--target",
        "y",
        "--max-leaves",
        "8",
        "--out",
        s(&model),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(model.exists());
    let summary = String::from_utf8(out.stdout).unwrap();
    let leaves: usize = summary
        .lines()
        .find_map(|l| l.strip_prefix("leaves: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((1..=8).contains(&leaves));
}

#[test]
fn predict_dimension_mismatch_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let two = dir.path().join("two.csv");
    fs::write(&two, "a,b,y\n1,2,3\n2,3,5\n4,1,6\n5,5,9\n").unwrap();
    let model = dir.path().join("m.json");
    let fit = glassbox(&[
        "fit",
        "--model",
        "linear",
        "--data",
        s(&two),
        "--target",
        "y",
        "--out",
        s(&model),
    ]);
    assert!(
        fit.status.success(),
        "{}",
        String::from_utf8_lossy(&fit.stderr)
    );
    let pred = dir.path().join("p.csv");
    let out = glassbox(&[
        "predict",
        "--model",
        s(&model),
        "--data",
        s(&bundled()),
        "--target",
        "y",
        "--out",
        s(&pred),
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert!(!out.stderr.is_empty());
    assert!(!pred.exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("m.json");
    assert_eq!(glassbox(&["fit", "--bogus"]).status.code(), Some(2));
    let missing = glassbox(&[
        "fit",
        "--model",
        "gam",
        "--data",
        "/nonexistent.csv",
        "--target",
        "y",
        "--out",
        s(&model),
    ]);
    assert_eq!(missing.status.code(), Some(3));
    let dup = dir.path().join("dup.csv");
    fs::write(&dup, "a,b,y\n1,1,3\n2,2,5\n4,4,6\n5,5,9\n").unwrap();
    let rank = glassbox(&[
        "fit",
        "--model",
        "linear",
        "--data",
        s(&dup),
        "--target",
        "y",
        "--out",
        s(&model),
    ]);
    assert_eq!(rank.status.code(), Some(5));
    assert!(!model.exists());
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("m.json");
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        format!(
            r#"{{"model": "cart", "data": {:?}, "target": "y", "out": {:?}, "max-leaves": 3}}"#,
            s(&bundled()),
            s(&model)
        ),
    )
    .unwrap();
    let out = glassbox(&["fit", "--config", s(&cfg), "--max-leaves", "2"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary = String::from_utf8(out.stdout).unwrap();
    assert!(summary.contains("grown_leaves: 2"), "{summary}");
}

#[test]
fn report_and_plot_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("m.json");
    let fit = glassbox(&[
        "fit",
        "--model",
        "mars",
        "--data",
        s(&bundled()),
        "--target",
        "y",
        "--max-degree",
        "2",
        "--out",
        s(&model),
    ]);
    assert!(fit.status.success());
    let report = dir.path().join("report");
    assert!(
        glassbox(&["report", "--model", s(&model), "--out-dir", s(&report)])
            .status
            .success()
    );
    let profile: serde_json::Value =
        serde_json::from_slice(&fs::read(report.join("profile.json")).unwrap()).unwrap();
    assert_eq!(profile["model_kind"], "mars");
    let plots = dir.path().join("plots");
    assert!(
        glassbox(&["plot", "--model", s(&model), "--out-dir", s(&plots)])
            .status
            .success()
    );
    let svgs = fs::read_dir(&plots)
        .unwrap()
        .filter(|e| {
            e.as_ref()
                .unwrap()
                .path()
                .extension()
                .is_some_and(|x| x == "svg")
        })
        .count();
    assert!(svgs >= 1);
}
