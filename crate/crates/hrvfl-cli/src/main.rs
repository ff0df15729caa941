//! `hrvfl` — train, evaluate, and benchmark HawkEye-loss RVFL classifiers.
//!
//! Subcommands:
//!   train        fit one model on a CSV and save it
//!   eval         load a saved model and score a CSV
//!   bench        run an experiment spec (TOML) and write result files
//!   noise-sweep  default grid across the standard label-noise rates
//!   loss-curve   emit (x, loss, gradient) samples as CSV
//!
//! `HRVFL_THREADS` limits the worker pool. Exit code is 0 on success;
//! failures print a machine-readable `{"error": ...}` record to stderr and
//! exit nonzero.

use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use hrvfl::bench::{
    configure_threads, run_experiment, summarize, write_outputs, DatasetSpec, ExperimentSpec,
    GridSpec, ModelFamily,
};
use hrvfl::{
    accuracy, fit_dataset, load_csv, normalize, sample_curve, Activation, BatchSize, CsvSchema,
    Dataset64, FeatureMapConfig, HLossParams64, LabelColumn, LossKind, ModelConfig64, NagConfig,
    TrainedModel64, TrainingReport,
};

#[derive(Parser)]
#[command(name = "hrvfl", version, about = "HawkEye-loss RVFL benchmark CLI")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit one model on a CSV dataset and save it.
    Train(TrainArgs),
    /// Load a saved model and score a CSV dataset.
    Eval(EvalArgs),
    /// Run a full experiment from a TOML spec file.
    Bench(BenchArgs),
    /// Default grid swept across the standard noise rates on one dataset.
    NoiseSweep(NoiseSweepArgs),
    /// Sample the HawkEye loss and its gradient over a residual range.
    LossCurve(LossCurveArgs),
}

#[derive(Args)]
struct CsvArgs {
    /// Input CSV path.
    #[arg(long)]
    data: PathBuf,
    /// Label column: a header name or a 0-based index.
    #[arg(long, default_value = "target")]
    label_col: String,
    /// The CSV has no header row.
    #[arg(long)]
    no_header: bool,
    /// Field delimiter.
    #[arg(long, default_value = ",")]
    delimiter: char,
}

impl CsvArgs {
    fn schema(&self) -> CsvSchema {
        CsvSchema {
            label_column: parse_label_column(&self.label_col),
            header: !self.no_header,
            delimiter: self.delimiter,
        }
    }

    fn load(&self) -> anyhow::Result<Dataset64> {
        load_csv::<f64>(&self.data, &self.schema())
            .with_context(|| format!("loading {}", self.data.display()))
    }
}

fn parse_label_column(s: &str) -> LabelColumn {
    match s.parse::<usize>() {
        Ok(i) => LabelColumn::Index(i),
        Err(_) => LabelColumn::Name(s.to_string()),
    }
}

fn parse_batch(s: &str) -> Result<BatchSize, String> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(BatchSize::Full);
    }
    match s.parse::<usize>() {
        Ok(0) | Err(_) => Err(format!("batch must be \"all\" or a positive integer, got {s}")),
        Ok(k) => Ok(BatchSize::Size(k)),
    }
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    csv: CsvArgs,
    /// Model family: hrvfl, rvfl, or rvflwodl.
    #[arg(long, default_value = "hrvfl")]
    model: ModelFamily,
    /// Regularization trade-off C.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// HawkEye bounding parameter.
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// HawkEye shape parameter.
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    /// HawkEye insensitivity half-width.
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// Hidden nodes.
    #[arg(long, default_value_t = 100)]
    hidden: usize,
    #[arg(long, default_value = "sigmoid")]
    activation: Activation,
    #[arg(long, default_value_t = 1.0)]
    weight_scale: f64,
    /// Seed for the frozen random feature map (and the batch sampler).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Min-max scale features to [0, 1] before fitting (stats stored in the
    /// model and re-applied at eval time).
    #[arg(long)]
    normalize: bool,
    /// Start NAG from the closed-form ridge solution.
    #[arg(long)]
    warm_start: bool,
    #[arg(long, default_value_t = 0.9)]
    momentum: f64,
    #[arg(long, default_value_t = 0.01)]
    lr: f64,
    #[arg(long, default_value_t = 1e-4)]
    decay: f64,
    #[arg(long, default_value_t = 1000)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Mini-batch size ("all" for full batch).
    #[arg(long, default_value = "all", value_parser = parse_batch)]
    batch: BatchSize,
    /// Where to write the model record.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// Saved model record.
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    csv: CsvArgs,
    /// Print the result as a JSON record instead of plain text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Experiment spec (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for result files.
    #[arg(long)]
    out: PathBuf,
    /// Also print the summary table to stdout.
    #[arg(long)]
    print_summary: bool,
}

#[derive(Args)]
struct NoiseSweepArgs {
    #[command(flatten)]
    csv: CsvArgs,
    /// Dataset name used in result rows.
    #[arg(long, default_value = "dataset")]
    name: String,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Model families to run (repeatable).
    #[arg(long = "model", default_values = ["hrvfl", "rvfl", "rvflwodl"])]
    models: Vec<ModelFamily>,
    /// Output directory for result files.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct LossCurveArgs {
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    #[arg(long, default_value_t = -50.0, allow_negative_numbers = true)]
    from: f64,
    #[arg(long, default_value_t = 50.0, allow_negative_numbers = true)]
    to: f64,
    #[arg(long, default_value_t = 2001)]
    points: usize,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let threads = std::env::var("HRVFL_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok());
    configure_threads(threads);

    if let Err(err) = run(Cli::parse()) {
        let record = serde_json::json!({ "error": format!("{err:#}") });
        eprintln!("{record}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Train(args) => train(args),
        Command::Eval(args) => eval(args),
        Command::Bench(args) => bench(args),
        Command::NoiseSweep(args) => noise_sweep(args),
        Command::LossCurve(args) => loss_curve(args),
    }
}

fn train(args: TrainArgs) -> anyhow::Result<()> {
    let ds = args.csv.load()?;
    let loss = match args.model {
        ModelFamily::HRvfl => LossKind::HawkEye(HLossParams64 {
            lambda: args.lambda,
            a: args.a,
            epsilon: args.epsilon,
        }),
        ModelFamily::Rvfl | ModelFamily::RvflWoDl => LossKind::Squared,
    };
    let cfg = ModelConfig64 {
        c: args.c,
        loss,
        feature: FeatureMapConfig {
            hidden: args.hidden,
            activation: args.activation,
            weight_scale: args.weight_scale,
            seed: args.seed,
        },
        direct_links: args.model != ModelFamily::RvflWoDl,
        nag: NagConfig {
            momentum: args.momentum,
            initial_lr: args.lr,
            decay: args.decay,
            max_iters: args.max_iters,
            tol: args.tol,
            batch: args.batch,
            seed: args.seed,
        },
        warm_start: args.warm_start,
    };

    let (train_ds, stats) = if args.normalize {
        let (scaled, _, stats) = normalize(&ds, &[])?;
        (scaled, Some(stats))
    } else {
        (ds, None)
    };
    let mut model = fit_dataset(&train_ds, &cfg)?;
    if let Some(stats) = stats {
        model = model.with_norm_stats(stats);
    }
    let predictions = model.predict(&train_ds.x)?;
    let train_acc = accuracy(&predictions, &train_ds.y);
    model.save(&args.out)?;

    match model.report() {
        TrainingReport::ClosedForm => println!("training: closed-form ridge solve"),
        TrainingReport::Nag(report) => println!("training: {}", report.to_json_line()),
    }
    println!(
        "trained {} on {} (n={}, m={}): training accuracy {:.4}",
        args.model,
        train_ds.name,
        train_ds.n(),
        train_ds.dim(),
        train_acc
    );
    println!("model written to {}", args.out.display());
    Ok(())
}

fn eval(args: EvalArgs) -> anyhow::Result<()> {
    let model = TrainedModel64::load(&args.model)
        .with_context(|| format!("loading model {}", args.model.display()))?;
    let ds = args.csv.load()?;
    if ds.label_map != *model.label_map() {
        bail!(
            "label classes {{{}, {}}} do not match the model's {{{}, {}}}",
            ds.label_map.negative,
            ds.label_map.positive,
            model.label_map().negative,
            model.label_map().positive
        );
    }
    let eval_ds = match model.norm_stats() {
        Some(stats) => stats.apply(&ds)?,
        None => ds,
    };
    let predictions = model.predict(&eval_ds.x)?;
    let acc = accuracy(&predictions, &eval_ds.y);
    let correct = (acc * eval_ds.n() as f64).round() as usize;
    if args.json {
        let record = serde_json::json!({
            "dataset": eval_ds.name,
            "n": eval_ds.n(),
            "correct": correct,
            "accuracy": acc,
        });
        println!("{record}");
    } else {
        println!(
            "accuracy {:.4} ({}/{}) on {}",
            acc,
            correct,
            eval_ds.n(),
            eval_ds.name
        );
    }
    Ok(())
}

fn bench(args: BenchArgs) -> anyhow::Result<()> {
    let spec = ExperimentSpec::load(&args.config)
        .with_context(|| format!("reading spec {}", args.config.display()))?;
    let outcome = run_experiment(&spec)?;
    let files = write_outputs(&outcome, &args.out)?;
    if args.print_summary {
        print!("{}", summarize(&outcome.rows).render());
    }
    println!(
        "{} result rows, {} errors; wrote:",
        outcome.rows.len(),
        outcome.errors.len()
    );
    for file in files {
        println!("  {}", file.display());
    }
    if !outcome.errors.is_empty() {
        eprintln!("note: {} unit(s) failed; see errors.jsonl", outcome.errors.len());
    }
    Ok(())
}

fn noise_sweep(args: NoiseSweepArgs) -> anyhow::Result<()> {
    let spec = ExperimentSpec {
        master_seed: args.seed,
        folds: args.folds,
        noise_rates: vec![0.0, 0.05, 0.10, 0.20, 0.30, 0.40],
        normalization: Default::default(),
        models: args.models.clone(),
        datasets: vec![DatasetSpec {
            name: args.name.clone(),
            path: args.csv.data.display().to_string(),
            label_column: parse_label_column(&args.csv.label_col),
            header: !args.csv.no_header,
            delimiter: args.csv.delimiter,
        }],
        grid: GridSpec::default(),
        nag: NagConfig::default(),
        weight_scale: 1.0,
    };
    let outcome = run_experiment(&spec)?;
    let files = write_outputs(&outcome, &args.out)?;
    print!("{}", summarize(&outcome.rows).render());
    println!("{} result rows; wrote:", outcome.rows.len());
    for file in files {
        println!("  {}", file.display());
    }
    Ok(())
}

fn loss_curve(args: LossCurveArgs) -> anyhow::Result<()> {
    let params = HLossParams64::new(args.lambda, args.a, args.epsilon)?;
    let curve = sample_curve(&params, args.from, args.to, args.points)?;
    let mut out: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(std::io::BufWriter::new(std::fs::File::create(path)?)),
        None => Box::new(std::io::stdout().lock()),
    };
    writeln!(out, "x,loss,grad")?;
    for point in &curve {
        writeln!(out, "{},{},{}", point.x, point.value, point.grad)?;
    }
    out.flush()?;
    if let Some(path) = &args.out {
        eprintln!("wrote {} samples to {}", curve.len(), path.display());
    }
    Ok(())
}
