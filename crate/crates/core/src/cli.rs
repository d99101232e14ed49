//! Command-line front end: `fit`, `predict`, `report` and `plot`.
//!
//! Exit codes: 0 success, 2 usage error, 3 I/O error, 4 data/model mismatch,
//! 5 numerical failure. Every output is a file written atomically; stdout
//! carries only the fit summary.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::cart::{self, GrowConfig};
use crate::data::{self, format_value, write_atomic, Dataset};
use crate::error::{Error, Result};
use crate::gam::{self, ComponentKind, FeatureOverride, GamConfig};
use crate::interpret::{plots_for, profile, tree_to_rules};
use crate::linear;
use crate::mars::{self, MarsConfig};
use crate::model::Model;
use crate::render::{render, Format};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;
pub const EXIT_NUMERICAL: i32 = 5;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidConfig(_) | Error::Render(_) => EXIT_USAGE,
        Error::Io { .. } | Error::Csv(_) | Error::Parse { .. } | Error::Json(_) => EXIT_IO,
        Error::InvalidData(_) | Error::DimensionMismatch { .. } | Error::TooFewRows { .. } => {
            EXIT_MISMATCH
        }
        Error::RankDeficient { .. } | Error::GcvUndefined { .. } | Error::Numerical(_) => {
            EXIT_NUMERICAL
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "glassbox",
    version,
    about = "Fit and inspect interpretable regression models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model and write it as JSON
    Fit(FitArgs),
    /// Predict a CSV file with a fitted model
    Predict(PredictArgs),
    /// Write the interpretability profile (and tree rules)
    Report(ReportArgs),
    /// Write one plot file per component, interaction or tree
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Linear,
    Cart,
    Mars,
    Gam,
}

/// Hyperparameters settable by flag or by `--config` JSON (same names).
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FitOptions {
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub target: Option<String>,
    /// Output model path
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fraction of rows used to grow a tree; the rest selects the pruned subtree
    #[arg(long)]
    pub train_fraction: Option<f64>,
    #[arg(long)]
    pub max_leaves: Option<usize>,
    #[arg(long)]
    pub min_node_size: Option<usize>,
    #[arg(long)]
    pub max_terms: Option<usize>,
    #[arg(long)]
    pub max_degree: Option<usize>,
    #[arg(long)]
    pub gcv_penalty: Option<f64>,
    #[arg(long)]
    pub smoother_penalty: Option<f64>,
    #[arg(long)]
    pub max_rounds: Option<usize>,
    #[arg(long)]
    pub convergence_threshold: Option<f64>,
    /// Comma-separated feature names fit as linear GAM components
    #[arg(long, value_delimiter = ',')]
    pub linear_features: Option<Vec<String>>,
}

impl FitOptions {
    /// Fields set in `self` win over `base`.
    fn over(self, base: FitOptions) -> FitOptions {
        FitOptions {
            model: self.model.or(base.model),
            data: self.data.or(base.data),
            target: self.target.or(base.target),
            out: self.out.or(base.out),
            seed: self.seed.or(base.seed),
            train_fraction: self.train_fraction.or(base.train_fraction),
            max_leaves: self.max_leaves.or(base.max_leaves),
            min_node_size: self.min_node_size.or(base.min_node_size),
            max_terms: self.max_terms.or(base.max_terms),
            max_degree: self.max_degree.or(base.max_degree),
            gcv_penalty: self.gcv_penalty.or(base.gcv_penalty),
            smoother_penalty: self.smoother_penalty.or(base.smoother_penalty),
            max_rounds: self.max_rounds.or(base.max_rounds),
            convergence_threshold: self.convergence_threshold.or(base.convergence_threshold),
            linear_features: self.linear_features.or(base.linear_features),
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// JSON file with the same fields as the flags; flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub options: FitOptions,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Column to ignore if present in the input
    #[arg(long)]
    pub target: Option<String>,
    /// Output CSV path
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value = "svg")]
    pub format: String,
    #[arg(long, default_value_t = 50)]
    pub grid: usize,
}

fn required<T>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| Error::InvalidConfig(format!("missing required --{flag}")))
}

fn resolve_options(args: FitArgs) -> Result<FitOptions> {
    let base = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            serde_json::from_str(&text)
                .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?
        }
        None => FitOptions::default(),
    };
    Ok(args.options.over(base))
}

fn fit(args: FitArgs) -> Result<String> {
    let o = resolve_options(args)?;
    let kind = required(o.model, "model")?;
    let data_path = required(o.data.clone(), "data")?;
    let target = required(o.target.clone(), "target")?;
    let out = required(o.out.clone(), "out")?;
    let d = data::load_csv(&data_path, &target)?;
    let seed = o.seed.unwrap_or(0);

    let mut summary = String::new();
    let _ = writeln!(summary, "model: {}", kind_name(kind));
    let _ = writeln!(summary, "rows: {}", d.n_rows());
    let model = match kind {
        ModelKind::Linear => {
            let m = linear::fit_ols(&d)?;
            let model = Model::Linear(m);
            let _ = writeln!(summary, "training_rss: {}", rss(&model, &d)?);
            let _ = writeln!(summary, "size: {}", d.n_features() + 1);
            model
        }
        ModelKind::Cart => {
            let cfg = GrowConfig {
                max_leaves: o.max_leaves.unwrap_or(GrowConfig::default().max_leaves),
                min_node_size: o.min_node_size.unwrap_or(1),
            };
            let fraction = o.train_fraction.unwrap_or(0.8);
            let (train, valid) = data::split(&d, fraction, seed)?;
            let grown = cart::grow_tree(&train, &cfg)?;
            let seq = cart::prune_tree(&grown, &train)?;
            let tree = cart::select_subtree(&seq, &valid)?;
            let _ = writeln!(summary, "grown_leaves: {}", grown.n_leaves());
            let _ = writeln!(summary, "leaves: {}", tree.n_leaves());
            let _ = writeln!(summary, "training_rss: {}", tree.rss(&train)?);
            let _ = writeln!(summary, "validation_rss: {}", tree.rss(&valid)?);
            Model::Cart(tree)
        }
        ModelKind::Mars => {
            let degree = o.max_degree.unwrap_or(1);
            let mut cfg = MarsConfig::new(o.max_terms.unwrap_or(21), degree);
            if let Some(c) = o.gcv_penalty {
                cfg.gcv_penalty = c;
            }
            let fitted = mars::fit_mars(&d, &cfg)?;
            let model = Model::Mars(fitted.model);
            let Model::Mars(m) = &model else {
                unreachable!()
            };
            let _ = writeln!(summary, "forward_terms: {}", fitted.forward_terms);
            let _ = writeln!(summary, "terms: {}", m.terms.len());
            let _ = writeln!(summary, "knots: {}", m.knot_count);
            let _ = writeln!(summary, "training_rss: {}", m.rss(&d)?);
            let _ = writeln!(summary, "gcv: {}", fitted.gcv);
            model
        }
        ModelKind::Gam => {
            let mut cfg = GamConfig::default();
            if let Some(v) = o.smoother_penalty {
                cfg.smoother_penalty = v;
            }
            if let Some(v) = o.max_rounds {
                cfg.max_rounds = v;
            }
            if let Some(v) = o.convergence_threshold {
                cfg.convergence_threshold = v;
            }
            cfg.overrides = linear_overrides(&d, o.linear_features.as_deref().unwrap_or(&[]))?;
            let m = gam::backfit(&d, &cfg)?;
            let _ = writeln!(summary, "rounds: {}", m.convergence_history.len());
            let _ = writeln!(summary, "converged: {}", m.converged);
            let model = Model::Gam(m);
            let _ = writeln!(summary, "training_rss: {}", rss(&model, &d)?);
            model
        }
    };
    model.save(&out)?;
    Ok(summary)
}

fn kind_name(k: ModelKind) -> &'static str {
    match k {
        ModelKind::Linear => "linear",
        ModelKind::Cart => "cart",
        ModelKind::Mars => "mars",
        ModelKind::Gam => "gam",
    }
}

fn linear_overrides(d: &Dataset, names: &[String]) -> Result<BTreeMap<usize, FeatureOverride>> {
    let mut out = BTreeMap::new();
    for name in names {
        let j = d
            .feature_names()
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown feature {name:?}")))?;
        out.insert(
            j,
            FeatureOverride {
                kind: Some(ComponentKind::Linear),
                penalty: None,
            },
        );
    }
    Ok(out)
}

fn rss(model: &Model, d: &Dataset) -> Result<f64> {
    d.rows()
        .zip(d.target())
        .map(|(x, y)| model.predict(&x).map(|f| (y - f).powi(2)))
        .sum()
}

fn predict(args: PredictArgs) -> Result<()> {
    let model = Model::load(&args.model)?;
    let mut table = data::read_table(&args.data)?;
    if let Some(t) = &args.target {
        table.take_column(t);
    }
    if table.header.len() != model.n_features() {
        return Err(Error::DimensionMismatch {
            expected: model.n_features(),
            actual: table.header.len(),
        });
    }
    let mut out = String::from("prediction\n");
    for row in table.rows() {
        out.push_str(&format_value(model.predict(&row)?));
        out.push('\n');
    }
    write_atomic(&args.out, out.as_bytes())
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn report(args: ReportArgs) -> Result<()> {
    let model = Model::load(&args.model)?;
    create_dir(&args.out_dir)?;
    let mut json = serde_json::to_string_pretty(&profile(&model))?;
    json.push('\n');
    write_atomic(&args.out_dir.join("profile.json"), json.as_bytes())?;
    if let Model::Cart(t) = &model {
        write_atomic(
            &args.out_dir.join("rules.txt"),
            tree_to_rules(t).to_string().as_bytes(),
        )?;
    }
    Ok(())
}

fn plot(args: PlotArgs) -> Result<()> {
    let format: Format = args.format.parse()?;
    let model = Model::load(&args.model)?;
    let plots = plots_for(&model, args.grid)?;
    // render everything before touching the output directory
    let files = plots
        .specs
        .iter()
        .map(|spec| {
            Ok((
                format!("{}.{}", spec.name, format.extension()),
                render(spec, format)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    create_dir(&args.out_dir)?;
    for (name, bytes) in files {
        write_atomic(&args.out_dir.join(name), &bytes)?;
    }
    if !plots.unplottable.is_empty() {
        let mut listing = plots.unplottable.join("\n");
        listing.push('\n');
        write_atomic(&args.out_dir.join("unplottable.txt"), listing.as_bytes())?;
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<Option<String>> {
    match cli.command {
        Command::Fit(a) => fit(a).map(Some),
        Command::Predict(a) => predict(a).map(|_| None),
        Command::Report(a) => report(a).map(|_| None),
        Command::Plot(a) => plot(a).map(|_| None),
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli) {
        Ok(summary) => {
            if let Some(s) = summary {
                let _ = stdout.write_all(s.as_bytes());
            }
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}
