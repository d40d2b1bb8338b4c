use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use cann::data::BUILTIN_NAMES;
use cann::discovery::{classify, default_threshold, report, write_json, DiscoveredModel};
use cann::optimizer::DEFAULT_SEED;
use cann::stress::predict_curve;
use cann::{builtin_dataset, load_csv, mlp_forward, mlp_train, train_cann, AdamConfig, CannWeights, Dataset, DeformationMode, Report};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

mod csv_out;

#[derive(Parser)]
#[command(name = "cann", version, about = "Fit invariant-based constitutive neural networks to stress-stretch data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the eight-term network and report the discovered model.
    Fit(FitArgs),
    /// Train the tanh baseline network on single-mode data.
    FitBaseline(BaselineArgs),
    /// Evaluate stored weights over a stretch grid.
    Predict(PredictArgs),
    /// Classify stored weights, optionally against a dataset.
    Report(ReportArgs),
    /// List the built-in datasets.
    ListData,
    /// Write a dataset as CSV.
    ExportData(ExportArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// Built-in dataset name or path to a CSV file.
    #[arg(long)]
    data: String,
    #[arg(long, default_value_t = 10_000)]
    epochs: usize,
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

impl TrainArgs {
    fn config(&self) -> AdamConfig {
        AdamConfig { learning_rate: self.lr, epochs: self.epochs, seed: self.seed, ..AdamConfig::default() }
    }
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    train: TrainArgs,
    /// Activity threshold on term magnitudes; defaults to 1e-3 of the largest.
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Args)]
struct BaselineArgs {
    #[command(flatten)]
    train: TrainArgs,
    #[arg(long, value_delimiter = ',', default_value = "1,8,1")]
    layers: Vec<usize>,
}

#[derive(Args)]
struct PredictArgs {
    /// A report.json from `fit`, or a bare weights object.
    #[arg(long)]
    weights: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "UT,ET,PS")]
    modes: Vec<DeformationMode>,
    #[arg(long, default_value_t = 1.0)]
    lambda_min: f64,
    #[arg(long, default_value_t = 8.0)]
    lambda_max: f64,
    #[arg(long, default_value_t = 101)]
    lambda_steps: usize,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// A report.json from `fit`, or a bare weights object.
    #[arg(long)]
    weights: PathBuf,
    #[arg(long)]
    threshold: Option<f64>,
    /// Dataset to evaluate the weights against.
    #[arg(long)]
    data: Option<String>,
    /// Directory for discovery.json; nothing is written without it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    data: String,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(a) => fit(a),
        Command::FitBaseline(a) => fit_baseline(a),
        Command::Predict(a) => predict(a),
        Command::Report(a) => report_cmd(a),
        Command::ListData => list_data(),
        Command::ExportData(a) => export_data(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn resolve_dataset(selector: &str) -> Result<Dataset> {
    if BUILTIN_NAMES.contains(&selector) {
        return Ok(builtin_dataset(selector)?);
    }
    let path = Path::new(selector);
    if !path.exists() {
        bail!("`{selector}` is neither a built-in dataset ({}) nor an existing file", BUILTIN_NAMES.join(", "));
    }
    load_csv(path).with_context(|| format!("reading {}", path.display()))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_json_file<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = std::io::BufWriter::new(file);
    write_json(value, &mut w)?;
    use std::io::Write;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn modes_label(d: &Dataset) -> String {
    d.modes().iter().map(|m| m.tag()).collect::<Vec<_>>().join(", ")
}

fn print_model(m: &DiscoveredModel) {
    match m.nearest_family {
        Some(f) if m.family.is_none() => println!("model       {} (nearest family: {})", m.model_name, f.name()),
        _ => println!("model       {}", m.model_name),
    }
    let active: Vec<&str> = m.active_terms.iter().map(|t| t.term.name()).collect();
    println!("active      {} of 8: {}", active.len(), active.join(", "));
    for (name, p) in &m.physical_params {
        println!("  {name:<8}  {:.6} {}", p.value, p.unit);
    }
}

fn fit(args: FitArgs) -> Result<()> {
    let data = resolve_dataset(&args.train.data)?;
    let config = args.train.config();
    let record = train_cann(&data, &config)?;
    let rep = report(&record, &data, args.threshold)?;

    println!("dataset     {} ({} samples; {})", args.train.data, data.len(), modes_label(&data));
    println!("training    {} epochs, lr {}, seed {}", config.epochs, config.learning_rate, config.seed);
    let s = &rep.loss_history_summary;
    println!("loss        {:.4e} -> {:.4e} ({:.1} orders, best at epoch {})", s.initial, s.final_loss, s.orders_of_reduction, record.best_epoch);
    print_model(&rep.discovered());

    let out = &args.train.out;
    create_dir(out)?;
    let mut written = Vec::new();
    let path = out.join("report.json");
    write_json_file(&path, &rep)?;
    written.push(path);
    for c in &rep.term_contributions {
        let path = out.join(format!("curve_{}.csv", c.mode.tag()));
        csv_out::write_fit_curve(&path, c)?;
        written.push(path);
    }
    let path = out.join("loss.csv");
    csv_out::write_loss(&path, &record.loss_history)?;
    written.push(path);
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

#[derive(Serialize)]
struct BaselineSummary<'a> {
    dataset: &'a str,
    record: &'a cann::baseline::BaselineRecord,
    saturation_bound: f64,
    max_extrapolated_output: f64,
}

fn fit_baseline(args: BaselineArgs) -> Result<()> {
    let data = resolve_dataset(&args.train.data)?;
    let config = args.train.config();
    let record = mlp_train(&data, &config, &args.layers)?;
    let params = &record.params;

    let lambda_max = data.max_lambda();
    let extrapolation: Vec<f64> = (1..=100).map(|k| lambda_max * (1.0 + k as f64 / 100.0)).collect();
    let mut rows = Vec::with_capacity(data.len() + extrapolation.len());
    for s in &data.samples {
        rows.push((s.lambda, mlp_forward(params, s.lambda)?, Some(s.stress)));
    }
    for &l in &extrapolation {
        rows.push((l, mlp_forward(params, l)?, None));
    }
    let max_extrapolated = rows[data.len()..].iter().map(|r| r.1.abs()).fold(0.0, f64::max);
    let bound = params.saturation_bound();

    println!("dataset     {} ({} samples; {})", args.train.data, data.len(), modes_label(&data));
    println!("network     layers {:?}, {} parameters", params.layer_sizes, params.n_params());
    println!("loss        {:.4e} -> {:.4e}", record.loss_history[0], record.final_loss);
    println!("saturation  |output| <= {bound:.6} MPa; largest on ({lambda_max}, {}] is {max_extrapolated:.6}", 2.0 * lambda_max);

    let out = &args.train.out;
    create_dir(out)?;
    let summary = BaselineSummary {
        dataset: &args.train.data,
        record: &record,
        saturation_bound: bound,
        max_extrapolated_output: max_extrapolated,
    };
    let paths = [out.join("baseline.json"), out.join("baseline_curve.csv"), out.join("loss.csv")];
    write_json_file(&paths[0], &summary)?;
    csv_out::write_baseline_curve(&paths[1], &rows)?;
    csv_out::write_loss(&paths[2], &record.loss_history)?;
    for p in paths {
        println!("wrote {}", p.display());
    }
    Ok(())
}

/// Weights from a fit report or a bare weights object.
fn load_weights(path: &Path) -> Result<CannWeights> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if let Ok(r) = Report::from_json(&text) {
        return Ok(r.weights);
    }
    let w: CannWeights = serde_json::from_str(&text)
        .with_context(|| format!("{} is neither a fit report nor a weights object", path.display()))?;
    if !w.is_feasible() {
        bail!("{}: weights must be finite and non-negative", path.display());
    }
    Ok(w)
}

fn stretch_grid(min: f64, max: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => vec![],
        1 => vec![min],
        n => (0..n).map(|k| min + (max - min) * k as f64 / (n - 1) as f64).collect(),
    }
}

fn predict(args: PredictArgs) -> Result<()> {
    let w = load_weights(&args.weights)?;
    let grid = stretch_grid(args.lambda_min, args.lambda_max, args.lambda_steps);
    let mut curves = Vec::new();
    for &mode in &args.modes {
        let points = predict_curve(&w, mode, &grid).with_context(|| format!("predicting {mode}"))?;
        let terms = grid
            .iter()
            .map(|&l| cann::stress::term_stresses(&w, mode, l))
            .collect::<cann::Result<Vec<_>>>()?;
        curves.push((mode, points, terms));
    }
    create_dir(&args.out)?;
    for (mode, points, terms) in curves {
        let path = args.out.join(format!("predict_{}.csv", mode.tag()));
        csv_out::write_prediction(&path, &grid, &points, &terms)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

#[derive(Serialize)]
struct Discovery {
    weights: CannWeights,
    model: DiscoveredModel,
    mse: Option<f64>,
}

fn report_cmd(args: ReportArgs) -> Result<()> {
    let w = load_weights(&args.weights)?;
    let model = classify(&w, args.threshold.unwrap_or_else(|| default_threshold(&w)))?;
    print_model(&model);
    println!("threshold   {:e}", model.threshold);
    let mse = match &args.data {
        Some(sel) => {
            let data = resolve_dataset(sel)?;
            let mse = cann::optimizer::mse_loss(&w, &data)?;
            println!("mse         {mse:.6e} MPa^2 on {sel} ({} samples)", data.len());
            Some(mse)
        }
        None => None,
    };
    if let Some(out) = &args.out {
        create_dir(out)?;
        let path = out.join("discovery.json");
        write_json_file(&path, &Discovery { weights: w, model, mse })?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn list_data() -> Result<()> {
    for name in BUILTIN_NAMES {
        let d = builtin_dataset(name)?;
        println!("{name:<18} {:>3} samples  {:<10} {}", d.len(), modes_label(&d), d.source);
    }
    Ok(())
}

fn export_data(args: ExportArgs) -> Result<()> {
    let data = resolve_dataset(&args.data)?;
    let stem = Path::new(&args.data).file_stem().and_then(|s| s.to_str()).unwrap_or("dataset");
    create_dir(&args.out)?;
    let path = args.out.join(format!("{stem}.csv"));
    let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    data.write_csv(file)?;
    println!("wrote {}", path.display());
    Ok(())
}
