//! Experiment harness: training loops, per-epoch robust evaluation of single
//! vs ensemble predictors, CSV emission, grids, and plotting.

pub mod grid;
pub mod plot;

use std::borrow::Cow;
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use crate::attack::{self, AttackFamily, AttackSpec, SingleModel};
use crate::data::{gather, Batcher, Dataset, SamplingMode};
use crate::ensemble::{EnsemblePredictor, SnapshotBuffer};
use crate::error::{Error, Result};
use crate::nn::{self, Architecture, ParameterSet};
use crate::optim::{Optimizer, OptimizerConfig};

pub use grid::{run_grid, GridReport, GridSpec};

/// Which dataset an experiment trains and evaluates on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetKind {
    Mnist,
    Cifar10,
}

impl DatasetKind {
    pub fn architecture(self) -> Architecture {
        match self {
            DatasetKind::Mnist => Architecture::MnistNet,
            DatasetKind::Cifar10 => Architecture::Cifar10Net,
        }
    }
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DatasetKind::Mnist => "mnist",
            DatasetKind::Cifar10 => "cifar10",
        })
    }
}

impl FromStr for DatasetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mnist" => Ok(DatasetKind::Mnist),
            "cifar10" | "cifar-10" => Ok(DatasetKind::Cifar10),
            other => Err(Error::config(format!(
                "unknown dataset {other:?} (expected mnist or cifar10)"
            ))),
        }
    }
}

/// Whether training minimizes clean or FGSM-perturbed batches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainingMode {
    Regular,
    AdversarialFgsm,
}

impl fmt::Display for TrainingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrainingMode::Regular => "regular",
            TrainingMode::AdversarialFgsm => "adv-fgsm",
        })
    }
}

impl FromStr for TrainingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "regular" => Ok(TrainingMode::Regular),
            "adv-fgsm" | "adversarial-fgsm" | "adversarial_fgsm" => Ok(TrainingMode::AdversarialFgsm),
            other => Err(Error::config(format!(
                "unknown training mode {other:?} (expected regular or adv-fgsm)"
            ))),
        }
    }
}

/// Which predictor a `RunRecord` row evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictorMode {
    Single,
    Ensemble,
}

impl fmt::Display for PredictorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PredictorMode::Single => "single",
            PredictorMode::Ensemble => "ensemble",
        })
    }
}

/// Whose gradients attacks on the ensemble use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackTarget {
    /// Full white-box: gradients flow through every ensemble member.
    EnsembleWhitebox,
    /// Transfer: gradients from the latest single model, evaluation on the ensemble.
    TransferFromSingle,
}

impl fmt::Display for AttackTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AttackTarget::EnsembleWhitebox => "whitebox",
            AttackTarget::TransferFromSingle => "transfer",
        })
    }
}

impl FromStr for AttackTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "whitebox" | "ensemble-whitebox" => Ok(AttackTarget::EnsembleWhitebox),
            "transfer" | "transfer-from-single" => Ok(AttackTarget::TransferFromSingle),
            other => Err(Error::config(format!(
                "unknown attack target {other:?} (expected whitebox or transfer)"
            ))),
        }
    }
}

/// Everything one training run needs.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub dataset: DatasetKind,
    pub optimizer: OptimizerConfig,
    pub training: TrainingMode,
    /// Perturbation bound used by adversarial training.
    pub train_epsilon: f32,
    pub epochs: usize,
    /// Snapshot buffer capacity M.
    pub snapshots: usize,
    /// Evaluation budgets, sorted ascending.
    pub epsilons: Vec<f32>,
    /// Attack families evaluated each epoch.
    pub attacks: Vec<AttackFamily>,
    pub alpha: f32,
    pub steps: usize,
    pub random_start: bool,
    pub attack_target: AttackTarget,
    pub batch_size: usize,
    pub eval_batch_size: usize,
    pub sampling: SamplingMode,
    pub seed: u64,
    /// Train on only the first n samples when set.
    pub train_subset: Option<usize>,
    /// Evaluate on only the first n test samples when set.
    pub eval_subset: Option<usize>,
    /// Record wall-clock epoch seconds; disable for byte-identical reruns.
    pub timing: bool,
    /// Keep snapshots on disk under this directory instead of in memory.
    pub spill_dir: Option<std::path::PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset: DatasetKind::Mnist,
            optimizer: OptimizerConfig::heavy_ball(0.02, 0.9),
            training: TrainingMode::Regular,
            train_epsilon: 0.02,
            epochs: 20,
            snapshots: 10,
            epsilons: vec![0.0, 0.01, 0.02, 0.03, 0.04],
            attacks: vec![AttackFamily::Fgsm, AttackFamily::Pgd],
            alpha: 0.02,
            steps: 2,
            random_start: false,
            attack_target: AttackTarget::EnsembleWhitebox,
            batch_size: 4,
            eval_batch_size: 100,
            sampling: SamplingMode::ShuffleEpoch,
            seed: 0,
            train_subset: None,
            eval_subset: None,
            timing: true,
            spill_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.optimizer.validate()?;
        if self.epochs == 0 {
            return Err(Error::config("epochs must be at least 1".to_string()));
        }
        if self.snapshots == 0 {
            return Err(Error::config("snapshot capacity must be at least 1".to_string()));
        }
        if self.epsilons.is_empty() {
            return Err(Error::config("epsilon list must not be empty".to_string()));
        }
        if self.epsilons.iter().any(|&e| !(e >= 0.0)) {
            return Err(Error::config(format!(
                "epsilons must be non-negative, got {:?}",
                self.epsilons
            )));
        }
        if self.epsilons.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::config(format!(
                "epsilons must be sorted ascending, got {:?}",
                self.epsilons
            )));
        }
        if self.attacks.is_empty() {
            return Err(Error::config("attack list must not be empty".to_string()));
        }
        if self.batch_size == 0 || self.eval_batch_size == 0 {
            return Err(Error::config("batch sizes must be at least 1".to_string()));
        }
        if self.training == TrainingMode::AdversarialFgsm && !(self.train_epsilon >= 0.0) {
            return Err(Error::config(format!(
                "adversarial training epsilon must be non-negative, got {}",
                self.train_epsilon
            )));
        }
        for &family in &self.attacks {
            self.attack_spec(family, self.epsilons[0]).validate()?;
        }
        Ok(())
    }

    fn attack_spec(&self, family: AttackFamily, epsilon: f32) -> AttackSpec {
        AttackSpec {
            family,
            epsilon,
            alpha: self.alpha,
            steps: self.steps,
            random_start: self.random_start,
        }
    }
}

/// One row of experiment output.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub epoch: usize,
    pub attack: AttackFamily,
    pub epsilon: f32,
    pub predictor: PredictorMode,
    pub attack_target: AttackTarget,
    pub accuracy: f32,
    /// Wall-clock seconds of the epoch's training phase (0 when timing is off).
    pub seconds: f64,
}

pub const CSV_HEADER: &str = "epoch,attack,epsilon,predictor,attack_target,accuracy,seconds";

impl RunRecord {
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.epoch,
            self.attack,
            fmt_sig(self.epsilon as f64, 6),
            self.predictor,
            self.attack_target,
            fmt_sig(self.accuracy as f64, 6),
            fmt_sig(self.seconds, 6),
        )
    }
}

/// Formats with at most `sig` significant digits, trailing zeros stripped.
pub(crate) fn fmt_sig(value: f64, sig: usize) -> String {
    if value == 0.0 {
        return "0".to_string();
    }
    if !value.is_finite() {
        return value.to_string();
    }
    let exp = value.abs().log10().floor() as i32;
    let decimals = (sig as i32 - 1 - exp).max(0) as usize;
    let s = format!("{value:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Serializes records with the fixed schema, floats at 6 significant digits.
pub fn write_csv<W: Write>(records: &[RunRecord], w: &mut W) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for record in records {
        writeln!(w, "{}", record.to_csv_row())?;
    }
    Ok(())
}

pub fn write_csv_file(records: &[RunRecord], path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut w = BufWriter::new(File::create(path)?);
    write_csv(records, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Everything a finished training run hands back, including instrumentation
/// counters for the no-extra-gradient-work and attack-cadence checks.
pub struct TrainOutput {
    pub params: ParameterSet,
    pub buffer: SnapshotBuffer,
    pub records: Vec<RunRecord>,
    /// Mean cross-entropy loss of every optimizer step, in step order.
    pub step_losses: Vec<f32>,
    pub train_steps: u64,
    /// FGSM invocations made by the training loop itself (not evaluation).
    pub train_attack_invocations: u64,
    /// Backward passes made by the training loop itself.
    pub train_backward_passes: u64,
}

/// Regular training (clean batches) with per-iteration snapshotting and
/// per-epoch robust evaluation.
pub fn train_regular(cfg: &ExperimentConfig, train: &Dataset, test: &Dataset) -> Result<TrainOutput> {
    if cfg.training != TrainingMode::Regular {
        return Err(Error::config(format!(
            "train_regular called with training mode {}",
            cfg.training
        )));
    }
    train_impl(cfg, train, test)
}

/// Adversarial training: every batch is replaced by its FGSM perturbation
/// (budget `train_epsilon`) before the parameter update.
pub fn train_adversarial_fgsm(
    cfg: &ExperimentConfig,
    train: &Dataset,
    test: &Dataset,
) -> Result<TrainOutput> {
    if cfg.training != TrainingMode::AdversarialFgsm {
        return Err(Error::config(format!(
            "train_adversarial_fgsm called with training mode {}",
            cfg.training
        )));
    }
    train_impl(cfg, train, test)
}

/// Dispatches on `cfg.training`.
pub fn train(cfg: &ExperimentConfig, train: &Dataset, test: &Dataset) -> Result<TrainOutput> {
    train_impl(cfg, train, test)
}

fn subset_view<'a>(dataset: &'a Dataset, n: Option<usize>) -> Result<Cow<'a, Dataset>> {
    match n {
        None => Ok(Cow::Borrowed(dataset)),
        Some(n) => Ok(Cow::Owned(dataset.subset(n)?)),
    }
}

fn train_impl(cfg: &ExperimentConfig, train: &Dataset, test: &Dataset) -> Result<TrainOutput> {
    cfg.validate()?;
    let arch = cfg.dataset.architecture();
    let train_view = subset_view(train, cfg.train_subset)?;
    let eval_view = subset_view(test, cfg.eval_subset)?;
    if train_view.is_empty() {
        return Err(Error::config("training split is empty".to_string()));
    }
    if eval_view.is_empty() {
        return Err(Error::config("evaluation split is empty".to_string()));
    }

    let mut params = nn::init_parameters(arch, cfg.seed);
    let mut optimizer = Optimizer::new(cfg.optimizer)?;
    let mut batcher = Batcher::new(
        cfg.batch_size,
        cfg.sampling,
        attack::mix_seed(cfg.seed, SEED_STREAM_BATCHER),
    )?;
    let mut buffer = match &cfg.spill_dir {
        None => SnapshotBuffer::new(cfg.snapshots)?,
        Some(dir) => SnapshotBuffer::with_spill_dir(cfg.snapshots, dir)?,
    };

    let mut records = Vec::new();
    let mut step_losses = Vec::new();
    let mut attack_invocations = 0u64;
    let mut backward_passes = 0u64;
    let mut t = 0u64;
    let n = train_view.len();

    for epoch in 1..=cfg.epochs {
        let epoch_start = Instant::now();
        for _ in 0..batcher.batches_per_epoch(n) {
            let indices = batcher.next_indices(n)?;
            let (images, labels) = gather(&train_view, &indices)?;
            let update_batch = match cfg.training {
                TrainingMode::Regular => images,
                TrainingMode::AdversarialFgsm => {
                    attack_invocations += 1;
                    let model = SingleModel::new(&params);
                    attack::fgsm(&model, &images, &labels, cfg.train_epsilon)?
                }
            };
            let back = nn::backward(&params, &update_batch, &labels)?;
            backward_passes += 1;
            step_losses.push(back.loss);
            optimizer.step(&mut params, &back.param_grads)?;
            t += 1;
            buffer.record(t, &params)?;
        }
        let seconds = if cfg.timing {
            epoch_start.elapsed().as_secs_f64()
        } else {
            0.0
        };
        records.extend(evaluate_epoch(cfg, &params, &buffer, &eval_view, epoch, seconds)?);
    }

    Ok(TrainOutput {
        params,
        buffer,
        records,
        step_losses,
        train_steps: t,
        train_attack_invocations: attack_invocations,
        train_backward_passes: backward_passes,
    })
}

const SEED_STREAM_BATCHER: u64 = 1;
const SEED_STREAM_EVAL: u64 = 2;

/// Robust accuracy of the single model and the snapshot ensemble for every
/// configured `(attack, epsilon)` pair at one epoch boundary.
pub fn evaluate_epoch(
    cfg: &ExperimentConfig,
    params: &ParameterSet,
    buffer: &SnapshotBuffer,
    eval: &Dataset,
    epoch: usize,
    seconds: f64,
) -> Result<Vec<RunRecord>> {
    let single = SingleModel::new(params);
    let ensemble = EnsemblePredictor::new(buffer)?;
    let mut records = Vec::with_capacity(cfg.attacks.len() * cfg.epsilons.len() * 2);

    for (ai, &family) in cfg.attacks.iter().enumerate() {
        for (ei, &epsilon) in cfg.epsilons.iter().enumerate() {
            let spec = cfg.attack_spec(family, epsilon);
            let eval_seed = attack::mix_seed(
                attack::mix_seed(cfg.seed, SEED_STREAM_EVAL),
                (epoch as u64) << 32 | (ai as u64) << 16 | ei as u64,
            );

            let single_acc = attack::robust_accuracy(
                &single,
                &eval.images,
                &eval.labels,
                &spec,
                cfg.eval_batch_size,
                eval_seed,
            )?;
            records.push(RunRecord {
                epoch,
                attack: family,
                epsilon,
                predictor: PredictorMode::Single,
                attack_target: AttackTarget::EnsembleWhitebox,
                accuracy: single_acc,
                seconds,
            });

            let ensemble_acc = match cfg.attack_target {
                AttackTarget::EnsembleWhitebox => attack::robust_accuracy(
                    &ensemble,
                    &eval.images,
                    &eval.labels,
                    &spec,
                    cfg.eval_batch_size,
                    eval_seed,
                )?,
                AttackTarget::TransferFromSingle => attack::robust_accuracy_transfer(
                    &single,
                    &ensemble,
                    &eval.images,
                    &eval.labels,
                    &spec,
                    cfg.eval_batch_size,
                    eval_seed,
                )?,
            };
            records.push(RunRecord {
                epoch,
                attack: family,
                epsilon,
                predictor: PredictorMode::Ensemble,
                attack_target: cfg.attack_target,
                accuracy: ensemble_acc,
                seconds,
            });
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> ExperimentConfig {
        ExperimentConfig {
            epochs: 1,
            snapshots: 4,
            epsilons: vec![0.0, 0.02],
            attacks: vec![AttackFamily::Fgsm],
            batch_size: 4,
            eval_batch_size: 8,
            timing: false,
            ..ExperimentConfig::default()
        }
    }

    fn tiny_data() -> (Dataset, Dataset) {
        (
            Dataset::random([1, 28, 28], 16, 7),
            Dataset::random([1, 28, 28], 8, 8),
        )
    }

    #[test]
    fn config_validation_rejects_bad_values() {
        let mut cfg = tiny_config();
        cfg.epochs = 0;
        assert!(cfg.validate().is_err());

        let mut cfg = tiny_config();
        cfg.epsilons = vec![];
        assert!(cfg.validate().is_err());

        let mut cfg = tiny_config();
        cfg.epsilons = vec![0.02, 0.01];
        assert!(cfg.validate().is_err());

        let mut cfg = tiny_config();
        cfg.epsilons = vec![-0.01, 0.02];
        assert!(cfg.validate().is_err());

        let mut cfg = tiny_config();
        cfg.attacks = vec![];
        assert!(cfg.validate().is_err());

        let mut cfg = tiny_config();
        cfg.optimizer.learning_rate = 0.0;
        assert!(cfg.validate().is_err());

        assert!(tiny_config().validate().is_ok());
    }

    #[test]
    fn one_epoch_bookkeeping() {
        let cfg = tiny_config();
        let (train_ds, test_ds) = tiny_data();
        let out = train_regular(&cfg, &train_ds, &test_ds).unwrap();

        // 16 samples, batch 4 -> 4 iterations; buffer holds the last 4.
        assert_eq!(out.train_steps, 4);
        assert_eq!(out.buffer.iterations(), vec![1, 2, 3, 4]);
        // |attacks| * |epsilons| * 2 predictor modes.
        assert_eq!(out.records.len(), 1 * 2 * 2);
        assert_eq!(out.train_backward_passes, 4);
        assert_eq!(out.train_attack_invocations, 0);
        assert_eq!(out.step_losses.len(), 4);
    }

    #[test]
    fn same_seed_gives_identical_records() {
        let cfg = tiny_config();
        let (train_ds, test_ds) = tiny_data();
        let a = train_regular(&cfg, &train_ds, &test_ds).unwrap();
        let b = train_regular(&cfg, &train_ds, &test_ds).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.params, b.params);
    }

    #[test]
    fn adversarial_with_zero_epsilon_matches_regular_bitwise() {
        let (train_ds, test_ds) = tiny_data();
        let regular = train_regular(&tiny_config(), &train_ds, &test_ds).unwrap();

        let mut cfg = tiny_config();
        cfg.training = TrainingMode::AdversarialFgsm;
        cfg.train_epsilon = 0.0;
        let adversarial = train_adversarial_fgsm(&cfg, &train_ds, &test_ds).unwrap();

        assert_eq!(regular.params, adversarial.params);
        assert_eq!(regular.records, adversarial.records);
        assert_eq!(adversarial.train_attack_invocations, adversarial.train_steps);
    }

    #[test]
    fn adversarial_training_attacks_every_step() {
        let mut cfg = tiny_config();
        cfg.training = TrainingMode::AdversarialFgsm;
        cfg.train_epsilon = 0.05;
        let (train_ds, test_ds) = tiny_data();
        let out = train_adversarial_fgsm(&cfg, &train_ds, &test_ds).unwrap();
        assert_eq!(out.train_attack_invocations, out.train_steps);
        assert_eq!(out.train_backward_passes, out.train_steps);
    }

    #[test]
    fn mode_mismatch_is_rejected() {
        let (train_ds, test_ds) = tiny_data();
        let mut cfg = tiny_config();
        cfg.training = TrainingMode::AdversarialFgsm;
        assert!(train_regular(&cfg, &train_ds, &test_ds).is_err());
        cfg.training = TrainingMode::Regular;
        assert!(train_adversarial_fgsm(&cfg, &train_ds, &test_ds).is_err());
    }

    #[test]
    fn loss_decreases_on_learnable_synthetic_data() {
        // Class-dependent pixel offsets make the task learnable in one epoch.
        let mut ds = Dataset::random([1, 28, 28], 64, 3);
        let labels = ds.labels.clone();
        for (i, &label) in labels.iter().enumerate() {
            for v in &mut ds.images.data_mut()[i * 784..(i + 1) * 784] {
                *v = (*v * 0.2 + label as f32 * 0.08).clamp(0.0, 1.0);
            }
        }
        let mut cfg = tiny_config();
        cfg.epochs = 1;
        cfg.optimizer = OptimizerConfig::heavy_ball(0.02, 0.9);
        let out = train_regular(&cfg, &ds, &ds).unwrap();
        let first = out.step_losses.first().copied().unwrap();
        let last = out.step_losses.last().copied().unwrap();
        assert!(last < first, "loss did not decrease: {first} -> {last}");
    }

    #[test]
    fn ensemble_of_one_matches_single_at_zero_epsilon() {
        let mut cfg = tiny_config();
        cfg.snapshots = 1;
        cfg.epsilons = vec![0.0];
        let (train_ds, test_ds) = tiny_data();
        let out = train_regular(&cfg, &train_ds, &test_ds).unwrap();
        let single: Vec<&RunRecord> = out
            .records
            .iter()
            .filter(|r| r.predictor == PredictorMode::Single)
            .collect();
        let ensemble: Vec<&RunRecord> = out
            .records
            .iter()
            .filter(|r| r.predictor == PredictorMode::Ensemble)
            .collect();
        assert_eq!(single.len(), ensemble.len());
        for (s, e) in single.iter().zip(&ensemble) {
            assert_eq!(s.accuracy, e.accuracy);
        }
    }

    #[test]
    fn transfer_target_recorded_in_rows() {
        let mut cfg = tiny_config();
        cfg.attack_target = AttackTarget::TransferFromSingle;
        let (train_ds, test_ds) = tiny_data();
        let out = train_regular(&cfg, &train_ds, &test_ds).unwrap();
        for r in &out.records {
            match r.predictor {
                PredictorMode::Single => assert_eq!(r.attack_target, AttackTarget::EnsembleWhitebox),
                PredictorMode::Ensemble => assert_eq!(r.attack_target, AttackTarget::TransferFromSingle),
            }
        }
    }

    #[test]
    fn csv_schema_and_formatting() {
        let records = vec![RunRecord {
            epoch: 3,
            attack: AttackFamily::Fgsm,
            epsilon: 0.01,
            predictor: PredictorMode::Single,
            attack_target: AttackTarget::EnsembleWhitebox,
            accuracy: 0.912345,
            seconds: 0.0,
        }];
        let mut buf = Vec::new();
        write_csv(&records, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "epoch,attack,epsilon,predictor,attack_target,accuracy,seconds"
        );
        assert_eq!(lines.next().unwrap(), "3,fgsm,0.01,single,whitebox,0.912345,0");
    }

    #[test]
    fn fmt_sig_examples() {
        assert_eq!(fmt_sig(0.0, 6), "0");
        assert_eq!(fmt_sig(0.01f32 as f64, 6), "0.01");
        assert_eq!(fmt_sig(0.03f32 as f64, 6), "0.03");
        assert_eq!(fmt_sig(1.0, 6), "1");
        assert_eq!(fmt_sig(0.5, 6), "0.5");
        assert_eq!(fmt_sig(0.123456789, 6), "0.123457");
        assert_eq!(fmt_sig(12.3456789, 6), "12.3457");
        assert_eq!(fmt_sig(2.302585092994046, 6), "2.30259");
    }

    #[test]
    fn timing_disabled_zeroes_seconds() {
        let cfg = tiny_config();
        let (train_ds, test_ds) = tiny_data();
        let out = train_regular(&cfg, &train_ds, &test_ds).unwrap();
        assert!(out.records.iter().all(|r| r.seconds == 0.0));
    }
}
