//! Input-space adversarial example generation (FGSM and PGD-l∞) and robust
//! accuracy evaluation.
//!
//! Attacks operate in raw `[0, 1]` pixel space and clamp their outputs back to
//! valid images; any normalization lives inside the predictor. Everything here
//! is read-only with respect to the predictor, so batches can be attacked
//! concurrently.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::nn::{self, ParameterSet};
use crate::tensor::{Gradient, Tensor};

/// Attack family selector; `None` means clean evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AttackFamily {
    None,
    Fgsm,
    Pgd,
}

impl fmt::Display for AttackFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AttackFamily::None => "none",
            AttackFamily::Fgsm => "fgsm",
            AttackFamily::Pgd => "pgd",
        })
    }
}

impl FromStr for AttackFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" | "clean" => Ok(AttackFamily::None),
            "fgsm" => Ok(AttackFamily::Fgsm),
            "pgd" => Ok(AttackFamily::Pgd),
            other => Err(Error::config(format!(
                "unknown attack {other:?} (expected none, fgsm, or pgd)"
            ))),
        }
    }
}

/// Full description of one attack evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackSpec {
    pub family: AttackFamily,
    /// l∞ budget in raw pixel units on the `[0, 1]` scale.
    pub epsilon: f32,
    /// PGD step size.
    pub alpha: f32,
    /// PGD iteration count.
    pub steps: usize,
    /// Start PGD from a uniform draw in `[-eps, eps]` instead of zero.
    pub random_start: bool,
}

impl AttackSpec {
    pub fn none() -> Self {
        AttackSpec {
            family: AttackFamily::None,
            epsilon: 0.0,
            alpha: 0.02,
            steps: 2,
            random_start: false,
        }
    }

    pub fn fgsm(epsilon: f32) -> Self {
        AttackSpec {
            family: AttackFamily::Fgsm,
            epsilon,
            ..AttackSpec::none()
        }
    }

    /// PGD with the default step size 0.02, 2 steps, no random start.
    pub fn pgd(epsilon: f32) -> Self {
        AttackSpec {
            family: AttackFamily::Pgd,
            epsilon,
            ..AttackSpec::none()
        }
    }

    pub fn with_epsilon(mut self, epsilon: f32) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0) {
            return Err(Error::config(format!(
                "attack epsilon must be non-negative, got {}",
                self.epsilon
            )));
        }
        if self.family == AttackFamily::Pgd {
            if !(self.alpha > 0.0) {
                return Err(Error::config(format!(
                    "pgd alpha must be positive, got {}",
                    self.alpha
                )));
            }
            if self.steps == 0 {
                return Err(Error::config("pgd needs at least one step".to_string()));
            }
        }
        Ok(())
    }
}

/// A classifier that exposes logits and the exact gradient of its scalar
/// cross-entropy loss with respect to the input.
///
/// Implemented by a single model and by the snapshot ensemble; attacks are
/// generic over it.
pub trait Predictor: Sync {
    /// Raw class scores, shape `[N, 10]`.
    fn logits(&self, batch: &Tensor) -> Result<Tensor>;

    /// Mean cross-entropy loss and its gradient with respect to `batch`.
    fn input_gradient(&self, batch: &Tensor, labels: &[u8]) -> Result<(f32, Gradient)>;
}

/// Predictor view over a single parameter set.
pub struct SingleModel<'a> {
    params: &'a ParameterSet,
}

impl<'a> SingleModel<'a> {
    pub fn new(params: &'a ParameterSet) -> Self {
        SingleModel { params }
    }
}

impl Predictor for SingleModel<'_> {
    fn logits(&self, batch: &Tensor) -> Result<Tensor> {
        nn::forward(self.params, batch)
    }

    fn input_gradient(&self, batch: &Tensor, labels: &[u8]) -> Result<(f32, Gradient)> {
        nn::input_gradient(self.params, batch, labels)
    }
}

/// `sign` with `sign(0) = 0`.
#[inline]
fn sign(v: f32) -> f32 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Fast gradient sign method: `clamp01(x + eps * sign(grad_x loss))`.
///
/// The gradient is taken at the clean batch. Pre-clamp perturbation
/// components are exactly `-eps`, `0`, or `+eps`.
pub fn fgsm(
    predictor: &dyn Predictor,
    batch: &Tensor,
    labels: &[u8],
    epsilon: f32,
) -> Result<Tensor> {
    if !(epsilon >= 0.0) {
        return Err(Error::config(format!(
            "fgsm epsilon must be non-negative, got {epsilon}"
        )));
    }
    if epsilon == 0.0 {
        return Ok(batch.clone());
    }
    let (_, grad) = predictor.input_gradient(batch, labels)?;
    let data = batch
        .data()
        .iter()
        .zip(grad.data())
        .map(|(&x, &g)| (x + epsilon * sign(g)).clamp(0.0, 1.0))
        .collect();
    Tensor::new(batch.shape().to_vec(), data)
}

/// Projected gradient descent in the l∞ ball of radius `spec.epsilon`.
///
/// The perturbation starts at zero (or uniform in `[-eps, eps]` with
/// `random_start`), takes `steps` signed gradient steps of size `alpha`, is
/// clipped back to the ball after each step, and the result is clamped to
/// `[0, 1]`. `seed` only matters when `random_start` is set.
pub fn pgd(
    predictor: &dyn Predictor,
    batch: &Tensor,
    labels: &[u8],
    spec: &AttackSpec,
    seed: u64,
) -> Result<Tensor> {
    if spec.family != AttackFamily::Pgd {
        return Err(Error::config(format!(
            "pgd called with a {} spec",
            spec.family
        )));
    }
    spec.validate()?;
    let eps = spec.epsilon;
    if eps == 0.0 {
        return Ok(batch.clone());
    }

    let mut delta = vec![0.0f32; batch.numel()];
    if spec.random_start {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for d in &mut delta {
            *d = rng.random_range(-eps..=eps);
        }
    }

    for _ in 0..spec.steps {
        let perturbed = Tensor::new(
            batch.shape().to_vec(),
            batch
                .data()
                .iter()
                .zip(&delta)
                .map(|(&x, &d)| x + d)
                .collect(),
        )?;
        let (_, grad) = predictor.input_gradient(&perturbed, labels)?;
        for (d, &g) in delta.iter_mut().zip(grad.data()) {
            *d = (*d + spec.alpha * sign(g)).clamp(-eps, eps);
        }
    }

    let data = batch
        .data()
        .iter()
        .zip(&delta)
        .map(|(&x, &d)| (x + d).clamp(0.0, 1.0))
        .collect();
    Tensor::new(batch.shape().to_vec(), data)
}

/// Dispatches on the spec family; `None` and `eps = 0` return the batch unchanged.
pub fn attack_batch(
    predictor: &dyn Predictor,
    batch: &Tensor,
    labels: &[u8],
    spec: &AttackSpec,
    seed: u64,
) -> Result<Tensor> {
    match spec.family {
        AttackFamily::None => Ok(batch.clone()),
        AttackFamily::Fgsm => fgsm(predictor, batch, labels, spec.epsilon),
        AttackFamily::Pgd => pgd(predictor, batch, labels, spec, seed),
    }
}

/// Argmax with ties broken to the lowest class index.
pub fn argmax_class(row: &[f32]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Fraction of samples still classified correctly by `eval_predictor` after
/// each batch is attacked through `attack_predictor`'s gradients.
///
/// Passing the same predictor twice gives the usual white-box evaluation;
/// passing different ones gives transfer evaluation. `family == None` or
/// `eps == 0` skips attack generation entirely, so the result is clean
/// accuracy. Batches are independent and evaluated in parallel.
pub fn robust_accuracy_transfer(
    attack_predictor: &dyn Predictor,
    eval_predictor: &dyn Predictor,
    images: &Tensor,
    labels: &[u8],
    spec: &AttackSpec,
    batch_size: usize,
    seed: u64,
) -> Result<f32> {
    let n = images.shape()[0];
    if labels.len() != n {
        return Err(Error::shape(format!(
            "{} labels for {n} evaluation images",
            labels.len()
        )));
    }
    if n == 0 {
        return Err(Error::config("empty evaluation split".to_string()));
    }
    if batch_size == 0 {
        return Err(Error::config("evaluation batch size must be positive".to_string()));
    }
    spec.validate()?;
    let skip_attack = spec.family == AttackFamily::None || spec.epsilon == 0.0;

    let ranges: Vec<(usize, usize)> = (0..n)
        .step_by(batch_size)
        .map(|start| (start, batch_size.min(n - start)))
        .collect();

    let correct: usize = ranges
        .par_iter()
        .enumerate()
        .map(|(chunk_idx, &(start, len))| -> Result<usize> {
            let batch = images.slice_rows(start, len)?;
            let batch_labels = &labels[start..start + len];
            let evaluated = if skip_attack {
                batch
            } else {
                let batch_seed = mix_seed(seed, chunk_idx as u64);
                attack_batch(attack_predictor, &batch, batch_labels, spec, batch_seed)?
            };
            let logits = eval_predictor.logits(&evaluated)?;
            let mut hits = 0;
            for (i, &label) in batch_labels.iter().enumerate() {
                let row = &logits.data()[i * 10..(i + 1) * 10];
                if argmax_class(row) == label as usize {
                    hits += 1;
                }
            }
            Ok(hits)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;

    Ok(correct as f32 / n as f32)
}

/// White-box robust accuracy: the attacked predictor is the evaluated one.
pub fn robust_accuracy(
    predictor: &dyn Predictor,
    images: &Tensor,
    labels: &[u8],
    spec: &AttackSpec,
    batch_size: usize,
    seed: u64,
) -> Result<f32> {
    robust_accuracy_transfer(predictor, predictor, images, labels, spec, batch_size, seed)
}

/// FNV-1a mix of a base seed and a stream index; stable across platforms.
pub(crate) fn mix_seed(base: u64, stream: u64) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for b in base.to_le_bytes().into_iter().chain(stream.to_le_bytes()) {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{init_parameters, Architecture};
    use crate::tensor::{norm, Norm};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_batch(n: usize, seed: u64) -> Tensor {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..n * 28 * 28).map(|_| rng.random_range(0.0f32..1.0)).collect();
        Tensor::new(vec![n, 1, 28, 28], data).unwrap()
    }

    fn random_labels(n: usize, seed: u64) -> Vec<u8> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random_range(0..10u8)).collect()
    }

    /// Two-class predictor with logits `[w . x, 0]`; against label 1 the loss
    /// is a monotone function of `w . x`, so maximizing loss over the l∞ ball
    /// means picking the corner `eps * sign(w)`.
    struct DotProductPredictor {
        weights: Vec<f32>,
    }

    impl Predictor for DotProductPredictor {
        fn logits(&self, batch: &Tensor) -> Result<Tensor> {
            let n = batch.shape()[0];
            let d = batch.numel() / n;
            let mut out = Vec::with_capacity(n * 2);
            for i in 0..n {
                let row = &batch.data()[i * d..(i + 1) * d];
                let s: f32 = row.iter().zip(&self.weights).map(|(&x, &w)| x * w).sum();
                out.push(s);
                out.push(0.0);
            }
            Tensor::new(vec![n, 2], out)
        }

        fn input_gradient(&self, batch: &Tensor, labels: &[u8]) -> Result<(f32, Gradient)> {
            let logits = self.logits(batch)?;
            let (loss, lgrad) = crate::ops::softmax_cross_entropy(&logits, labels)?;
            let n = batch.shape()[0];
            let d = batch.numel() / n;
            let mut grad = vec![0.0f32; batch.numel()];
            for i in 0..n {
                let coeff = lgrad.data()[i * 2]; // d loss / d (w . x)
                for j in 0..d {
                    grad[i * d + j] = coeff * self.weights[j];
                }
            }
            Ok((loss, Tensor::new(batch.shape().to_vec(), grad)?))
        }
    }

    impl DotProductPredictor {
        fn mean_loss(&self, batch: &Tensor, labels: &[u8]) -> f32 {
            let logits = self.logits(batch).unwrap();
            crate::ops::softmax_cross_entropy(&logits, labels).unwrap().0
        }
    }

    #[test]
    fn fgsm_zero_epsilon_is_identity() {
        let params = init_parameters(Architecture::MnistNet, 1);
        let model = SingleModel::new(&params);
        let batch = random_batch(2, 3);
        let adv = fgsm(&model, &batch, &random_labels(2, 4), 0.0).unwrap();
        assert_eq!(adv, batch);
    }

    #[test]
    fn fgsm_rejects_negative_epsilon() {
        let params = init_parameters(Architecture::MnistNet, 1);
        let model = SingleModel::new(&params);
        let batch = random_batch(1, 3);
        assert!(fgsm(&model, &batch, &[0], -0.01).is_err());
    }

    #[test]
    fn fgsm_sign_definition_on_fixed_gradient() {
        // Gradient componentwise [0.3, -0.2, 0.0] against an interior x.
        struct FixedGrad;
        impl Predictor for FixedGrad {
            fn logits(&self, batch: &Tensor) -> Result<Tensor> {
                Tensor::new(vec![batch.shape()[0], 2], vec![0.0; batch.shape()[0] * 2])
            }
            fn input_gradient(&self, batch: &Tensor, _: &[u8]) -> Result<(f32, Gradient)> {
                Ok((
                    0.0,
                    Tensor::new(batch.shape().to_vec(), vec![0.3, -0.2, 0.0])?,
                ))
            }
        }
        let x = Tensor::new(vec![1, 1, 1, 3], vec![0.5, 0.5, 0.5]).unwrap();
        let adv = fgsm(&FixedGrad, &x, &[0], 0.01).unwrap();
        let delta: Vec<f32> = adv.data().iter().zip(x.data()).map(|(a, b)| a - b).collect();
        assert_eq!(delta, vec![0.01, -0.01, 0.0]);
    }

    #[test]
    fn fgsm_preclamp_components_are_exact() {
        let params = init_parameters(Architecture::MnistNet, 5);
        let model = SingleModel::new(&params);
        let batch = random_batch(2, 6);
        let labels = random_labels(2, 7);
        let eps = 0.03f32;
        let (_, grad) = model.input_gradient(&batch, &labels).unwrap();
        // Reconstruct the pre-clamp perturbation exactly as fgsm computes it.
        for &g in grad.data() {
            let d = eps * sign(g);
            assert!(d == eps || d == -eps || d == 0.0);
        }
        // And the realized perturbation never exceeds the budget.
        let adv = fgsm(&model, &batch, &labels, eps).unwrap();
        let delta = Tensor::new(
            batch.shape().to_vec(),
            adv.data().iter().zip(batch.data()).map(|(a, b)| a - b).collect(),
        )
        .unwrap();
        assert!(norm(&delta, Norm::LInf) <= eps + 1e-7);
        assert!(adv.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn pgd_single_step_with_large_alpha_equals_fgsm_bitwise() {
        let params = init_parameters(Architecture::MnistNet, 9);
        let model = SingleModel::new(&params);
        let batch = random_batch(3, 10);
        let labels = random_labels(3, 11);
        let eps = 0.02f32;
        let spec = AttackSpec {
            family: AttackFamily::Pgd,
            epsilon: eps,
            alpha: 0.05,
            steps: 1,
            random_start: false,
        };
        let via_pgd = pgd(&model, &batch, &labels, &spec, 0).unwrap();
        let via_fgsm = fgsm(&model, &batch, &labels, eps).unwrap();
        assert_eq!(via_pgd, via_fgsm);
    }

    #[test]
    fn pgd_respects_linf_budget() {
        let params = init_parameters(Architecture::MnistNet, 13);
        let model = SingleModel::new(&params);
        let batch = random_batch(4, 14);
        let labels = random_labels(4, 15);
        for random_start in [false, true] {
            let spec = AttackSpec {
                family: AttackFamily::Pgd,
                epsilon: 0.03,
                alpha: 0.02,
                steps: 4,
                random_start,
            };
            let adv = pgd(&model, &batch, &labels, &spec, 99).unwrap();
            let delta = Tensor::new(
                batch.shape().to_vec(),
                adv.data().iter().zip(batch.data()).map(|(a, b)| a - b).collect(),
            )
            .unwrap();
            assert!(norm(&delta, Norm::LInf) <= 0.03 + 1e-7);
            assert!(adv.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }

    #[test]
    fn pgd_rejects_invalid_spec() {
        let params = init_parameters(Architecture::MnistNet, 1);
        let model = SingleModel::new(&params);
        let batch = random_batch(1, 1);
        let mut spec = AttackSpec::pgd(0.02);
        spec.alpha = 0.0;
        assert!(pgd(&model, &batch, &[1], &spec, 0).is_err());
        let mut spec = AttackSpec::pgd(0.02);
        spec.steps = 0;
        assert!(pgd(&model, &batch, &[1], &spec, 0).is_err());
        let fgsm_spec = AttackSpec::fgsm(0.02);
        assert!(pgd(&model, &batch, &[1], &fgsm_spec, 0).is_err());
    }

    #[test]
    fn attacks_are_deterministic_without_random_start() {
        let params = init_parameters(Architecture::MnistNet, 17);
        let model = SingleModel::new(&params);
        let batch = random_batch(2, 18);
        let labels = random_labels(2, 19);
        let spec = AttackSpec::pgd(0.02);
        let a = pgd(&model, &batch, &labels, &spec, 0).unwrap();
        let b = pgd(&model, &batch, &labels, &spec, 12345).unwrap();
        assert_eq!(a, b, "seed must not matter when random_start is off");
        let f1 = fgsm(&model, &batch, &labels, 0.02).unwrap();
        let f2 = fgsm(&model, &batch, &labels, 0.02).unwrap();
        assert_eq!(f1, f2);
    }

    #[test]
    fn fgsm_attains_corner_maximum_on_linear_predictor() {
        // Brute-force enumeration over all 2^8 corner perturbations.
        let d = 8;
        let predictor = DotProductPredictor {
            weights: vec![0.7, -1.3, 0.4, 2.1, -0.6, 0.9, -1.8, 1.1],
        };
        let x = Tensor::new(vec![1, 1, 1, d], vec![0.5; d]).unwrap();
        let labels = [1u8];
        let eps = 0.01f32;

        let adv = fgsm(&predictor, &x, &labels, eps).unwrap();
        let fgsm_loss = predictor.mean_loss(&adv, &labels);

        let mut best = f32::NEG_INFINITY;
        for mask in 0..(1u32 << d) {
            let corner: Vec<f32> = (0..d)
                .map(|j| {
                    let s = if mask & (1 << j) != 0 { 1.0 } else { -1.0 };
                    (0.5 + eps * s).clamp(0.0, 1.0)
                })
                .collect();
            let t = Tensor::new(vec![1, 1, 1, d], corner).unwrap();
            best = best.max(predictor.mean_loss(&t, &labels));
        }
        assert_eq!(fgsm_loss, best, "fgsm must reach the brute-force corner maximum");

        // PGD with steps = 2 and alpha = eps lands on the same corner.
        let spec = AttackSpec {
            family: AttackFamily::Pgd,
            epsilon: eps,
            alpha: eps,
            steps: 2,
            random_start: false,
        };
        let pgd_adv = pgd(&predictor, &x, &labels, &spec, 0).unwrap();
        assert_eq!(pgd_adv, adv);
    }

    #[test]
    fn robust_accuracy_none_equals_fgsm_at_zero_epsilon() {
        let params = init_parameters(Architecture::MnistNet, 23);
        let model = SingleModel::new(&params);
        let images = random_batch(20, 24);
        let labels = random_labels(20, 25);
        let clean = robust_accuracy(&model, &images, &labels, &AttackSpec::none(), 7, 0).unwrap();
        let fg0 = robust_accuracy(&model, &images, &labels, &AttackSpec::fgsm(0.0), 7, 0).unwrap();
        assert_eq!(clean, fg0);
    }

    #[test]
    fn robust_accuracy_constant_correct_double_is_one() {
        // Test double that emits onehot(true label) with zero input
        // dependence: its input gradient vanishes, so any attack leaves the
        // images alone and accuracy stays 1.0. Pixel 0 of sample i encodes
        // i / 1e4 so the double can recover which sample it sees.
        struct Oracle {
            labels: Vec<u8>,
        }
        impl Predictor for Oracle {
            fn logits(&self, batch: &Tensor) -> Result<Tensor> {
                let n = batch.shape()[0];
                let pixels = batch.numel() / n;
                let mut out = vec![0.0f32; n * 10];
                for i in 0..n {
                    let global = (batch.data()[i * pixels] * 1e4).round() as usize;
                    out[i * 10 + self.labels[global] as usize] = 1.0;
                }
                Tensor::new(vec![n, 10], out)
            }
            fn input_gradient(&self, batch: &Tensor, labels: &[u8]) -> Result<(f32, Gradient)> {
                let logits = self.logits(batch)?;
                let (loss, _) = crate::ops::softmax_cross_entropy(&logits, labels)?;
                Ok((loss, Tensor::zeros(batch.shape().to_vec())))
            }
        }

        let n = 12;
        let labels = random_labels(n, 31);
        let mut data = vec![0.25f32; n * 4];
        for i in 0..n {
            data[i * 4] = i as f32 / 1e4;
        }
        let images = Tensor::new(vec![n, 1, 2, 2], data).unwrap();
        let oracle = Oracle { labels: labels.clone() };

        for spec in [AttackSpec::none(), AttackSpec::fgsm(0.02), AttackSpec::pgd(0.02)] {
            let acc = robust_accuracy(&oracle, &images, &labels, &spec, 4, 0).unwrap();
            assert_eq!(acc, 1.0, "spec {spec:?}");
        }
    }

    #[test]
    fn robust_accuracy_rejects_empty_split_and_bad_sizes() {
        let params = init_parameters(Architecture::MnistNet, 1);
        let model = SingleModel::new(&params);
        let images = random_batch(4, 2);
        let labels = random_labels(4, 3);
        assert!(robust_accuracy(&model, &images, &labels[..3], &AttackSpec::none(), 2, 0).is_err());
        assert!(robust_accuracy(&model, &images, &labels, &AttackSpec::none(), 0, 0).is_err());
    }

    #[test]
    fn trained_direction_fgsm_never_decreases_loss() {
        // One descent step on a batch makes the model locally fit it; FGSM at
        // small eps must then not reduce the loss on that batch.
        let mut params = init_parameters(Architecture::MnistNet, 41);
        let batch = random_batch(8, 42);
        let labels = random_labels(8, 43);
        let mut opt = crate::optim::Optimizer::new(crate::optim::OptimizerConfig::sgd(0.05)).unwrap();
        for _ in 0..30 {
            let back = nn::backward(&params, &batch, &labels).unwrap();
            opt.step(&mut params, &back.param_grads).unwrap();
        }
        let model = SingleModel::new(&params);
        let (clean_loss, _) = model.input_gradient(&batch, &labels).unwrap();
        let adv = fgsm(&model, &batch, &labels, 0.02).unwrap();
        let (adv_loss, _) = model.input_gradient(&adv, &labels).unwrap();
        assert!(
            adv_loss >= clean_loss - 1e-6,
            "fgsm decreased loss: {clean_loss} -> {adv_loss}"
        );
    }
}
