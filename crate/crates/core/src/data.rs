//! Dataset loading and batching.
//!
//! MNIST arrives as big-endian IDX files (gzip accepted transparently),
//! CIFAR-10 as binary-version batch files of 3073-byte records (1 label byte
//! plus 3072 channel-major pixel bytes). Pixels are scaled to `[0, 1]` by
//! dividing by 255; any further normalization happens inside the model, so
//! attacks see raw pixel space.

use std::fmt;
use std::fs::File;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use flate2::read::GzDecoder;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Which half of a dataset a `Dataset` value holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

/// Immutable loaded dataset: images in `[0, 1]`, labels in `[0, 10)`.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub images: Tensor,
    pub labels: Vec<u8>,
    pub split: Split,
}

impl Dataset {
    pub fn new(images: Tensor, labels: Vec<u8>, split: Split) -> Result<Self> {
        if images.shape()[0] != labels.len() {
            return Err(Error::data(format!(
                "{} images but {} labels",
                images.shape()[0],
                labels.len()
            )));
        }
        Ok(Dataset { images, labels, split })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// First `n` samples (the whole dataset when `n` is larger). Subsets are
    /// prefix-based so desk-scale runs stay deterministic.
    pub fn subset(&self, n: usize) -> Result<Dataset> {
        let n = n.min(self.len());
        Ok(Dataset {
            images: self.images.slice_rows(0, n)?,
            labels: self.labels[..n].to_vec(),
            split: self.split,
        })
    }

    /// Uniform random pixels and labels; used by smoke tests and fixtures.
    pub fn random(shape: [usize; 3], n: usize, seed: u64) -> Self {
        let [c, h, w] = shape;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..n * c * h * w).map(|_| rng.random_range(0.0f32..1.0)).collect();
        let labels = (0..n).map(|_| rng.random_range(0..10u8)).collect();
        Dataset {
            images: Tensor::new(vec![n, c, h, w], data).expect("valid shape"),
            labels,
            split: Split::Train,
        }
    }
}

/// Copies the samples at `indices` into a fresh batch.
pub fn gather(dataset: &Dataset, indices: &[usize]) -> Result<(Tensor, Vec<u8>)> {
    if indices.is_empty() {
        return Err(Error::config("cannot gather an empty batch".to_string()));
    }
    let n = dataset.len();
    let sample = dataset.images.numel() / n;
    let mut data = Vec::with_capacity(indices.len() * sample);
    let mut labels = Vec::with_capacity(indices.len());
    for &i in indices {
        if i >= n {
            return Err(Error::config(format!("batch index {i} out of range for {n} samples")));
        }
        data.extend_from_slice(&dataset.images.data()[i * sample..(i + 1) * sample]);
        labels.push(dataset.labels[i]);
    }
    let mut shape = dataset.images.shape().to_vec();
    shape[0] = indices.len();
    Ok((Tensor::new(shape, data)?, labels))
}

// --- MNIST (IDX format) ----------------------------------------------------

const IDX_IMAGE_MAGIC: u32 = 0x0000_0803;
const IDX_LABEL_MAGIC: u32 = 0x0000_0801;

/// Opens a file, decompressing transparently when gzip-compressed.
fn open_maybe_gz(path: &Path) -> Result<Box<dyn Read>> {
    let file = File::open(path)
        .map_err(|e| Error::data(format!("cannot open {}: {e}", path.display())))?;
    if path.extension().is_some_and(|ext| ext == "gz") {
        Ok(Box::new(GzDecoder::new(file)))
    } else {
        Ok(Box::new(file))
    }
}

/// Picks `name` or `name.gz`, whichever exists in `dir`.
fn resolve_idx_file(dir: &Path, name: &str) -> Result<std::path::PathBuf> {
    let plain = dir.join(name);
    if plain.exists() {
        return Ok(plain);
    }
    let gz = dir.join(format!("{name}.gz"));
    if gz.exists() {
        return Ok(gz);
    }
    Err(Error::data(format!(
        "missing {name} (or {name}.gz) in {}",
        dir.display()
    )))
}

fn read_be_u32(r: &mut dyn Read, field: &str, path: &Path) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)
        .map_err(|e| Error::data(format!("{}: truncated reading {field}: {e}", path.display())))?;
    Ok(u32::from_be_bytes(b))
}

/// Parses an IDX image file into a `[N, 1, rows, cols]` tensor scaled by 1/255.
pub fn load_idx_images(path: &Path) -> Result<Tensor> {
    let mut r = open_maybe_gz(path)?;
    let magic = read_be_u32(&mut r, "image magic", path)?;
    if magic != IDX_IMAGE_MAGIC {
        return Err(Error::data(format!(
            "{}: image magic is {magic:#010x}, expected {IDX_IMAGE_MAGIC:#010x}",
            path.display()
        )));
    }
    let count = read_be_u32(&mut r, "image count", path)? as usize;
    let rows = read_be_u32(&mut r, "image rows", path)? as usize;
    let cols = read_be_u32(&mut r, "image cols", path)? as usize;
    if count == 0 || rows == 0 || cols == 0 {
        return Err(Error::data(format!(
            "{}: degenerate image dimensions {count}x{rows}x{cols}",
            path.display()
        )));
    }
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let expected = count * rows * cols;
    if bytes.len() != expected {
        return Err(Error::data(format!(
            "{}: image payload holds {} bytes, header implies {expected}",
            path.display(),
            bytes.len()
        )));
    }
    let data = bytes.iter().map(|&b| b as f32 / 255.0).collect();
    Tensor::new(vec![count, 1, rows, cols], data)
}

/// Parses an IDX label file.
pub fn load_idx_labels(path: &Path) -> Result<Vec<u8>> {
    let mut r = open_maybe_gz(path)?;
    let magic = read_be_u32(&mut r, "label magic", path)?;
    if magic != IDX_LABEL_MAGIC {
        return Err(Error::data(format!(
            "{}: label magic is {magic:#010x}, expected {IDX_LABEL_MAGIC:#010x}",
            path.display()
        )));
    }
    let count = read_be_u32(&mut r, "label count", path)? as usize;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != count {
        return Err(Error::data(format!(
            "{}: label payload holds {} bytes, header implies {count}",
            path.display(),
            bytes.len()
        )));
    }
    Ok(bytes)
}

fn idx_split(dir: &Path, images_name: &str, labels_name: &str, split: Split) -> Result<Dataset> {
    let images = load_idx_images(&resolve_idx_file(dir, images_name)?);
    let images = images?;
    let (_, _, rows, cols) = images.dims4()?;
    if rows != 28 || cols != 28 {
        return Err(Error::data(format!(
            "{images_name}: images are {rows}x{cols}, expected 28x28"
        )));
    }
    let labels = load_idx_labels(&resolve_idx_file(dir, labels_name)?)?;
    if labels.len() != images.shape()[0] {
        return Err(Error::data(format!(
            "{images_name} holds {} images but {labels_name} holds {} labels",
            images.shape()[0],
            labels.len()
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l > 9) {
        return Err(Error::data(format!("{labels_name}: label {bad} out of range [0, 10)")));
    }
    Dataset::new(images, labels, split)
}

/// Loads the four standard MNIST IDX files from `dir`.
pub fn load_mnist(dir: &Path) -> Result<(Dataset, Dataset)> {
    let train = idx_split(dir, "train-images-idx3-ubyte", "train-labels-idx1-ubyte", Split::Train)?;
    let test = idx_split(dir, "t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte", Split::Test)?;
    Ok((train, test))
}

// --- CIFAR-10 (binary version) ----------------------------------------------

const CIFAR_RECORD: usize = 3073; // 1 label byte + 3 * 32 * 32 pixel bytes

/// Parses one CIFAR-10 binary batch file.
pub fn load_cifar_bin(path: &Path) -> Result<(Tensor, Vec<u8>)> {
    let mut bytes = Vec::new();
    File::open(path)
        .map_err(|e| Error::data(format!("cannot open {}: {e}", path.display())))?
        .read_to_end(&mut bytes)?;
    if bytes.is_empty() || bytes.len() % CIFAR_RECORD != 0 {
        return Err(Error::data(format!(
            "{}: length {} is not a positive multiple of {CIFAR_RECORD}",
            path.display(),
            bytes.len()
        )));
    }
    let n = bytes.len() / CIFAR_RECORD;
    let mut labels = Vec::with_capacity(n);
    let mut data = Vec::with_capacity(n * 3072);
    for rec in bytes.chunks_exact(CIFAR_RECORD) {
        let label = rec[0];
        if label > 9 {
            return Err(Error::data(format!(
                "{}: label {label} out of range [0, 10)",
                path.display()
            )));
        }
        labels.push(label);
        data.extend(rec[1..].iter().map(|&b| b as f32 / 255.0));
    }
    Ok((Tensor::new(vec![n, 3, 32, 32], data)?, labels))
}

/// Loads the five CIFAR-10 training batch files plus the test batch from `dir`.
pub fn load_cifar10(dir: &Path) -> Result<(Dataset, Dataset)> {
    let mut train_images: Option<Vec<f32>> = None;
    let mut train_labels = Vec::new();
    let mut total = 0;
    for i in 1..=5 {
        let path = dir.join(format!("data_batch_{i}.bin"));
        if !path.exists() {
            return Err(Error::data(format!("missing {}", path.display())));
        }
        let (images, labels) = load_cifar_bin(&path)?;
        total += images.shape()[0];
        train_images
            .get_or_insert_with(Vec::new)
            .extend_from_slice(images.data());
        train_labels.extend(labels);
    }
    let train = Dataset::new(
        Tensor::new(vec![total, 3, 32, 32], train_images.unwrap_or_default())?,
        train_labels,
        Split::Train,
    )?;

    let test_path = dir.join("test_batch.bin");
    if !test_path.exists() {
        return Err(Error::data(format!("missing {}", test_path.display())));
    }
    let (test_images, test_labels) = load_cifar_bin(&test_path)?;
    let test = Dataset::new(test_images, test_labels, Split::Test)?;
    Ok((train, test))
}

// --- Batching ----------------------------------------------------------------

/// Minibatch index sampling strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingMode {
    /// Seeded permutation per epoch, partitioned into batches; every sample
    /// appears exactly once per epoch and the final short batch is kept.
    ShuffleEpoch,
    /// Every batch is drawn with replacement.
    Bootstrap,
}

impl fmt::Display for SamplingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SamplingMode::ShuffleEpoch => "shuffle",
            SamplingMode::Bootstrap => "bootstrap",
        })
    }
}

impl FromStr for SamplingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "shuffle" | "shuffle-epoch" | "shuffle_epoch" => Ok(SamplingMode::ShuffleEpoch),
            "bootstrap" => Ok(SamplingMode::Bootstrap),
            other => Err(Error::config(format!(
                "unknown sampling mode {other:?} (expected shuffle or bootstrap)"
            ))),
        }
    }
}

/// Deterministic minibatch index source. Single-consumer.
pub struct Batcher {
    batch_size: usize,
    mode: SamplingMode,
    rng: ChaCha8Rng,
    perm: Vec<usize>,
    cursor: usize,
}

impl Batcher {
    pub fn new(batch_size: usize, mode: SamplingMode, seed: u64) -> Result<Self> {
        if batch_size == 0 {
            return Err(Error::config("batch size must be at least 1".to_string()));
        }
        Ok(Batcher {
            batch_size,
            mode,
            rng: ChaCha8Rng::seed_from_u64(seed),
            perm: Vec::new(),
            cursor: 0,
        })
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    /// Batches needed to cover `n` samples once: `ceil(n / batch_size)`.
    pub fn batches_per_epoch(&self, n: usize) -> usize {
        n.div_ceil(self.batch_size)
    }

    /// Indices of the next batch over a dataset of `n` samples.
    pub fn next_indices(&mut self, n: usize) -> Result<Vec<usize>> {
        if n == 0 {
            return Err(Error::config("cannot sample from an empty dataset".to_string()));
        }
        match self.mode {
            SamplingMode::Bootstrap => Ok((0..self.batch_size)
                .map(|_| self.rng.random_range(0..n))
                .collect()),
            SamplingMode::ShuffleEpoch => {
                if self.batch_size > n {
                    return Err(Error::config(format!(
                        "batch size {} exceeds dataset size {n} in shuffle-epoch mode",
                        self.batch_size
                    )));
                }
                if self.cursor >= self.perm.len() || self.perm.len() != n {
                    self.perm = (0..n).collect();
                    self.perm.shuffle(&mut self.rng);
                    self.cursor = 0;
                }
                let end = (self.cursor + self.batch_size).min(n);
                let batch = self.perm[self.cursor..end].to_vec();
                self.cursor = end;
                Ok(batch)
            }
        }
    }
}
