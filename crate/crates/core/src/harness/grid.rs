//! Experiment-grid execution: the cartesian product of optimizer, learning
//! rate, momentum, snapshot count, and seed sweeps, one CSV per cell plus a
//! merged summary.
//!
//! Cells are independent: each derives its own seed from the base seed and
//! the cell parameters, completed cells leave a `.done` marker so interrupted
//! grids resume without recomputation, and a failing cell is isolated rather
//! than aborting the grid.

use std::fs;
use std::path::{Path, PathBuf};

use crate::attack::mix_seed;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::harness::{fmt_sig, train, ExperimentConfig, CSV_HEADER};
use crate::optim::OptimizerFamily;

/// A base configuration plus the parameter lists to sweep.
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub base: ExperimentConfig,
    pub optimizers: Vec<OptimizerFamily>,
    pub learning_rates: Vec<f32>,
    pub momenta: Vec<f32>,
    pub snapshot_counts: Vec<usize>,
    pub seeds: Vec<u64>,
}

impl GridSpec {
    /// Degenerate grid of one cell taken from the base configuration.
    pub fn from_base(base: ExperimentConfig) -> Self {
        GridSpec {
            optimizers: vec![base.optimizer.family],
            learning_rates: vec![base.optimizer.learning_rate],
            momenta: vec![base.optimizer.momentum],
            snapshot_counts: vec![base.snapshots],
            seeds: vec![base.seed],
            base,
        }
    }

    pub fn cells(&self) -> Vec<GridCell> {
        let mut cells = Vec::new();
        for &optimizer in &self.optimizers {
            for &lr in &self.learning_rates {
                for &momentum in &self.momenta {
                    for &snapshots in &self.snapshot_counts {
                        for &seed in &self.seeds {
                            cells.push(GridCell {
                                optimizer,
                                learning_rate: lr,
                                momentum,
                                snapshots,
                                seed,
                            });
                        }
                    }
                }
            }
        }
        cells
    }

    /// The base config specialized to one cell, with a cell-derived seed.
    pub fn cell_config(&self, cell: &GridCell) -> ExperimentConfig {
        let mut cfg = self.base.clone();
        cfg.optimizer.family = cell.optimizer;
        cfg.optimizer.learning_rate = cell.learning_rate;
        cfg.optimizer.momentum = cell.momentum;
        cfg.snapshots = cell.snapshots;
        cfg.seed = cell.derived_seed(self.base.seed, self.base.dataset.to_string().as_str());
        cfg
    }
}

/// One point of the sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCell {
    pub optimizer: OptimizerFamily,
    pub learning_rate: f32,
    pub momentum: f32,
    pub snapshots: usize,
    pub seed: u64,
}

impl GridCell {
    /// Filename-safe cell identifier; also the reproducibility key.
    pub fn id(&self, dataset: &str) -> String {
        format!(
            "{dataset}-{}-lr{}-mu{}-M{}-s{}",
            self.optimizer,
            fmt_sig(self.learning_rate as f64, 6),
            fmt_sig(self.momentum as f64, 6),
            self.snapshots,
            self.seed
        )
    }

    /// Seed for this cell: a stable hash of the base seed and cell parameters,
    /// so cells are independent and reproducible in isolation.
    pub fn derived_seed(&self, base_seed: u64, dataset: &str) -> u64 {
        let id = self.id(dataset);
        let mut h = mix_seed(base_seed, id.len() as u64);
        for b in id.bytes() {
            h = mix_seed(h, b as u64);
        }
        h
    }
}

/// What happened to each cell of a grid run.
#[derive(Debug, Default)]
pub struct GridReport {
    pub completed: Vec<String>,
    /// Cells whose completion marker predated this run.
    pub skipped: Vec<String>,
    pub failed: Vec<(String, String)>,
}

impl GridReport {
    pub fn all_ok(&self) -> bool {
        self.failed.is_empty()
    }
}

fn summary_columns(cell: &GridCell) -> String {
    format!(
        "{},{},{},{},{}",
        cell.optimizer,
        fmt_sig(cell.learning_rate as f64, 6),
        fmt_sig(cell.momentum as f64, 6),
        cell.snapshots,
        cell.seed
    )
}

/// Runs every cell of the grid against pre-loaded datasets, writing one CSV
/// per cell, `.done` completion markers, and a merged `summary.csv`.
pub fn run_grid(
    spec: &GridSpec,
    train_data: &Dataset,
    test_data: &Dataset,
    out_dir: &Path,
) -> Result<GridReport> {
    fs::create_dir_all(out_dir)?;
    let dataset = spec.base.dataset.to_string();
    let mut report = GridReport::default();
    let mut summary_rows: Vec<(GridCell, PathBuf)> = Vec::new();

    for cell in spec.cells() {
        let id = cell.id(&dataset);
        let csv_path = out_dir.join(format!("{id}.csv"));
        let marker_path = out_dir.join(format!("{id}.done"));

        if marker_path.exists() {
            if csv_path.exists() {
                report.skipped.push(id);
                summary_rows.push((cell, csv_path));
            } else {
                report.failed.push((
                    id,
                    "completion marker present but cell CSV is missing".to_string(),
                ));
            }
            continue;
        }

        let cfg = spec.cell_config(&cell);
        match train(&cfg, train_data, test_data) {
            Ok(output) => {
                crate::harness::write_csv_file(&output.records, &csv_path)?;
                fs::write(&marker_path, format!("seed={}\n", cfg.seed))?;
                report.completed.push(id);
                summary_rows.push((cell, csv_path));
            }
            Err(e) => {
                report.failed.push((id, e.to_string()));
            }
        }
    }

    write_summary(&summary_rows, out_dir)?;
    Ok(report)
}

fn write_summary(rows: &[(GridCell, PathBuf)], out_dir: &Path) -> Result<()> {
    let mut summary = String::new();
    summary.push_str("optimizer,lr,momentum,snapshots,seed,");
    summary.push_str(CSV_HEADER);
    summary.push('\n');
    for (cell, csv_path) in rows {
        let text = fs::read_to_string(csv_path)
            .map_err(|e| Error::data(format!("cannot read {}: {e}", csv_path.display())))?;
        for line in text.lines().skip(1) {
            summary.push_str(&summary_columns(cell));
            summary.push(',');
            summary.push_str(line);
            summary.push('\n');
        }
    }
    fs::write(out_dir.join("summary.csv"), summary)?;
    Ok(())
}
