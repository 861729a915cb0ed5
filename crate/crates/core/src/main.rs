//! Command-line front end: `train`, `grid`, and `plot` subcommands.
//!
//! Exit codes: 0 success, 1 configuration error, 2 data error, 3 partial grid
//! failure.

use std::collections::HashMap;
use std::fmt::Display;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use snapens::attack::AttackFamily;
use snapens::data::{load_cifar10, load_mnist, Dataset, SamplingMode};
use snapens::harness::{
    self, plot, AttackTarget, DatasetKind, ExperimentConfig, GridSpec, TrainingMode,
};
use snapens::optim::OptimizerFamily;
use snapens::{Error, Result};

#[derive(Parser)]
#[command(
    name = "snapens",
    version,
    about = "Train CNNs, attack them with FGSM/PGD, and compare single-model \
             vs snapshot-ensemble robust accuracy"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one model and write per-epoch robust accuracies as CSV
    Train(RunArgs),
    /// Run a sweep of training runs (one CSV per cell plus summary.csv)
    Grid(RunArgs),
    /// Render accuracy-vs-epoch SVG charts from a results CSV
    Plot(PlotArgs),
}

/// Flags shared by `train` and `grid`. Swept parameters (`--optimizer`,
/// `--lr`, `--momentum`, `--snapshots`, `--seed`) accept comma-separated
/// lists under `grid` and a single value under `train`.
#[derive(Args, Debug, Default)]
struct RunArgs {
    /// Flat `key = value` config file; CLI flags override file values
    #[arg(long)]
    config: Option<PathBuf>,
    /// mnist or cifar10
    #[arg(long)]
    dataset: Option<String>,
    /// Directory holding the dataset files
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// sgd, hb, or nag
    #[arg(long)]
    optimizer: Option<String>,
    /// Learning rate
    #[arg(long)]
    lr: Option<String>,
    /// Momentum coefficient (ignored by sgd)
    #[arg(long)]
    momentum: Option<String>,
    /// Coupled weight decay coefficient
    #[arg(long)]
    weight_decay: Option<f32>,
    /// Snapshot buffer capacity M
    #[arg(long)]
    snapshots: Option<String>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Comma-separated evaluation budgets, e.g. 0.0,0.01,0.02
    #[arg(long)]
    epsilons: Option<String>,
    /// Comma-separated attack families evaluated per epoch (none, fgsm, pgd)
    #[arg(long)]
    attack: Option<String>,
    /// PGD step size
    #[arg(long)]
    alpha: Option<f32>,
    /// PGD step count
    #[arg(long)]
    steps: Option<usize>,
    /// Start PGD from a random point in the epsilon ball
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    random_start: Option<bool>,
    /// whitebox (attack the ensemble directly) or transfer (gradients from
    /// the single model)
    #[arg(long)]
    attack_target: Option<String>,
    /// regular or adv-fgsm
    #[arg(long)]
    training_mode: Option<String>,
    /// Perturbation bound for adversarial training
    #[arg(long)]
    train_epsilon: Option<f32>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    eval_batch_size: Option<usize>,
    /// shuffle or bootstrap
    #[arg(long)]
    sampling: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Train on only the first n samples
    #[arg(long)]
    train_subset: Option<usize>,
    /// Evaluate on only the first n test samples
    #[arg(long)]
    eval_subset: Option<usize>,
    /// Zero the seconds column so repeated runs are byte-identical
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    no_timing: Option<bool>,
    /// Keep snapshots on disk under this directory instead of in memory
    #[arg(long)]
    spill_dir: Option<PathBuf>,
    /// Write the final parameters to this snapshot file (train only)
    #[arg(long)]
    save_model: Option<PathBuf>,
    /// Dump the final snapshot buffer plus manifest here (train only)
    #[arg(long)]
    dump_snapshots: Option<PathBuf>,
    /// Output CSV path (train) or directory (grid)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PlotArgs {
    /// Results CSV produced by `train` or a grid cell
    input: PathBuf,
    /// Directory the SVG files go to
    #[arg(long, default_value = "plots")]
    out: PathBuf,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Shape(_) => ExitCode::from(1),
                Error::Data(_) | Error::Io(_) => ExitCode::from(2),
            }
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Train(args) => cmd_train(args),
        Command::Grid(args) => cmd_grid(args),
        Command::Plot(args) => {
            let written = plot::plot_csv(&args.input, &args.out)?;
            for path in written {
                println!("wrote {}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn cmd_train(args: RunArgs) -> Result<ExitCode> {
    let resolved = resolve(&args)?;
    resolved.reject_sweeps("train")?;
    let out = resolved.out.clone().unwrap_or_else(|| PathBuf::from("results.csv"));
    let (train_ds, test_ds) = resolved.load_datasets()?;

    let output = harness::train(&resolved.config, &train_ds, &test_ds)?;
    harness::write_csv_file(&output.records, &out)?;
    println!(
        "trained {} epochs ({} steps) on {}; wrote {} records to {}",
        resolved.config.epochs,
        output.train_steps,
        resolved.config.dataset,
        output.records.len(),
        out.display()
    );

    if let Some(path) = &args.save_model {
        output.params.save(path)?;
        println!("saved model to {}", path.display());
    }
    if let Some(dir) = &args.dump_snapshots {
        output.buffer.dump(dir)?;
        println!("dumped {} snapshots to {}", output.buffer.len(), dir.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_grid(args: RunArgs) -> Result<ExitCode> {
    let resolved = resolve(&args)?;
    let out = resolved.out.clone().unwrap_or_else(|| PathBuf::from("grid-results"));
    let (train_ds, test_ds) = resolved.load_datasets()?;

    let spec = GridSpec {
        base: resolved.config.clone(),
        optimizers: resolved.optimizers.clone(),
        learning_rates: resolved.learning_rates.clone(),
        momenta: resolved.momenta.clone(),
        snapshot_counts: resolved.snapshot_counts.clone(),
        seeds: resolved.seeds.clone(),
    };
    let report = harness::run_grid(&spec, &train_ds, &test_ds, &out)?;
    for id in &report.completed {
        println!("completed {id}");
    }
    for id in &report.skipped {
        println!("skipped {id} (already done)");
    }
    for (id, err) in &report.failed {
        eprintln!("failed {id}: {err}");
    }
    println!(
        "grid: {} completed, {} skipped, {} failed; results in {}",
        report.completed.len(),
        report.skipped.len(),
        report.failed.len(),
        out.display()
    );
    if report.all_ok() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(3))
    }
}

/// Fully resolved run parameters: defaults overridden by the config file,
/// overridden by CLI flags.
struct Resolved {
    config: ExperimentConfig,
    data_dir: Option<PathBuf>,
    out: Option<PathBuf>,
    optimizers: Vec<OptimizerFamily>,
    learning_rates: Vec<f32>,
    momenta: Vec<f32>,
    snapshot_counts: Vec<usize>,
    seeds: Vec<u64>,
}

impl Resolved {
    /// `train` takes scalars; a list in a swept flag is a config error there.
    fn reject_sweeps(&self, cmd: &str) -> Result<()> {
        for (name, len) in [
            ("optimizer", self.optimizers.len()),
            ("lr", self.learning_rates.len()),
            ("momentum", self.momenta.len()),
            ("snapshots", self.snapshot_counts.len()),
            ("seed", self.seeds.len()),
        ] {
            if len != 1 {
                return Err(Error::Config(format!(
                    "--{name} accepts a single value under `{cmd}` (use `grid` for sweeps)"
                )));
            }
        }
        Ok(())
    }

    fn load_datasets(&self) -> Result<(Dataset, Dataset)> {
        let default_dir = match self.config.dataset {
            DatasetKind::Mnist => PathBuf::from("data/mnist"),
            DatasetKind::Cifar10 => PathBuf::from("data/cifar-10-batches-bin"),
        };
        let dir = self.data_dir.clone().unwrap_or(default_dir);
        match self.config.dataset {
            DatasetKind::Mnist => load_mnist(&dir),
            DatasetKind::Cifar10 => load_cifar10(&dir),
        }
    }
}

fn load_config_file(path: &PathBuf) -> Result<HashMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!(
                "{}: line {} is not `key = value`",
                path.display(),
                lineno + 1
            ))
        })?;
        map.insert(
            key.trim().replace('_', "-").to_ascii_lowercase(),
            value.trim().to_string(),
        );
    }
    Ok(map)
}

/// CLI value if present, else the parsed config-file value, else `None`.
fn pick<T, E: Display>(
    cli: Option<T>,
    file: &HashMap<String, String>,
    key: &str,
    parse: impl Fn(&str) -> std::result::Result<T, E>,
) -> Result<Option<T>> {
    if cli.is_some() {
        return Ok(cli);
    }
    match file.get(key) {
        None => Ok(None),
        Some(raw) => parse(raw)
            .map(Some)
            .map_err(|e| Error::Config(format!("config key {key}: {e}"))),
    }
}

/// CLI string if present, else config-file string.
fn pick_str(cli: &Option<String>, file: &HashMap<String, String>, key: &str) -> Option<String> {
    cli.clone().or_else(|| file.get(key).cloned())
}

fn parse_list<T: FromStr>(raw: &str, what: &str) -> Result<Vec<T>>
where
    T::Err: Display,
{
    let mut out = Vec::new();
    for part in raw.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        out.push(
            part.parse::<T>()
                .map_err(|e| Error::Config(format!("bad {what} value {part:?}: {e}")))?,
        );
    }
    if out.is_empty() {
        return Err(Error::Config(format!("empty {what} list")));
    }
    Ok(out)
}

fn parse_bool(raw: &str) -> Result<bool> {
    match raw.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        other => Err(Error::Config(format!("expected a boolean, got {other:?}"))),
    }
}

fn resolve(args: &RunArgs) -> Result<Resolved> {
    let file = match &args.config {
        Some(path) => load_config_file(path)?,
        None => HashMap::new(),
    };
    let mut config = ExperimentConfig::default();

    if let Some(raw) = pick_str(&args.dataset, &file, "dataset") {
        config.dataset = raw.parse()?;
    }
    let data_dir = pick(args.data_dir.clone(), &file, "data-dir", |s| {
        Ok::<_, Error>(PathBuf::from(s))
    })?;
    let out = pick(args.out.clone(), &file, "out", |s| {
        Ok::<_, Error>(PathBuf::from(s))
    })?;

    let optimizers = match pick_str(&args.optimizer, &file, "optimizer") {
        Some(raw) => parse_list::<OptimizerFamily>(&raw, "optimizer")?,
        None => vec![config.optimizer.family],
    };
    let learning_rates = match pick_str(&args.lr, &file, "lr") {
        Some(raw) => parse_list::<f32>(&raw, "lr")?,
        None => vec![config.optimizer.learning_rate],
    };
    let momenta = match pick_str(&args.momentum, &file, "momentum") {
        Some(raw) => parse_list::<f32>(&raw, "momentum")?,
        None => vec![config.optimizer.momentum],
    };
    let snapshot_counts = match pick_str(&args.snapshots, &file, "snapshots") {
        Some(raw) => parse_list::<usize>(&raw, "snapshots")?,
        None => vec![config.snapshots],
    };
    let seeds = match pick_str(&args.seed, &file, "seed") {
        Some(raw) => parse_list::<u64>(&raw, "seed")?,
        None => vec![config.seed],
    };

    if let Some(v) = pick(args.weight_decay, &file, "weight-decay", |s| s.parse::<f32>())? {
        config.optimizer.weight_decay = v;
    }
    if let Some(v) = pick(args.epochs, &file, "epochs", |s| s.parse::<usize>())? {
        config.epochs = v;
    }
    if let Some(raw) = pick_str(&args.epsilons, &file, "epsilons") {
        config.epsilons = parse_list::<f32>(&raw, "epsilon")?;
    }
    if let Some(raw) = pick_str(&args.attack, &file, "attack") {
        config.attacks = parse_list::<AttackFamily>(&raw, "attack")?;
    }
    if let Some(v) = pick(args.alpha, &file, "alpha", |s| s.parse::<f32>())? {
        config.alpha = v;
    }
    if let Some(v) = pick(args.steps, &file, "steps", |s| s.parse::<usize>())? {
        config.steps = v;
    }
    if let Some(v) = pick(args.random_start, &file, "random-start", parse_bool)? {
        config.random_start = v;
    }
    if let Some(raw) = pick_str(&args.attack_target, &file, "attack-target") {
        config.attack_target = raw.parse()?;
    }
    if let Some(raw) = pick_str(&args.training_mode, &file, "training-mode") {
        config.training = raw.parse()?;
    }
    if let Some(v) = pick(args.train_epsilon, &file, "train-epsilon", |s| s.parse::<f32>())? {
        config.train_epsilon = v;
    }
    if let Some(v) = pick(args.batch_size, &file, "batch-size", |s| s.parse::<usize>())? {
        config.batch_size = v;
    }
    if let Some(v) = pick(args.eval_batch_size, &file, "eval-batch-size", |s| {
        s.parse::<usize>()
    })? {
        config.eval_batch_size = v;
    }
    if let Some(raw) = pick_str(&args.sampling, &file, "sampling") {
        config.sampling = raw.parse()?;
    }
    if let Some(v) = pick(args.train_subset, &file, "train-subset", |s| s.parse::<usize>())? {
        config.train_subset = Some(v);
    }
    if let Some(v) = pick(args.eval_subset, &file, "eval-subset", |s| s.parse::<usize>())? {
        config.eval_subset = Some(v);
    }
    if let Some(v) = pick(args.no_timing, &file, "no-timing", parse_bool)? {
        config.timing = !v;
    }
    if let Some(v) = pick(args.spill_dir.clone(), &file, "spill-dir", |s| {
        Ok::<_, Error>(PathBuf::from(s))
    })? {
        config.spill_dir = Some(v);
    }

    // Scalars mirrored into the base config (grid cells override per cell).
    config.optimizer.family = optimizers[0];
    config.optimizer.learning_rate = learning_rates[0];
    config.optimizer.momentum = momenta[0];
    config.snapshots = snapshot_counts[0];
    config.seed = seeds[0];

    Ok(Resolved {
        config,
        data_dir,
        out,
        optimizers,
        learning_rates,
        momenta,
        snapshot_counts,
        seeds,
    })
}
