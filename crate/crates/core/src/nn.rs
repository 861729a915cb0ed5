//! The two fixed CNN classifiers and their forward/backward passes.
//!
//! Both nets share the LeNet-style layout `conv5 -> relu -> pool2 -> conv5 ->
//! relu -> pool2 -> fc -> relu -> fc -> relu -> fc`; they differ only in the
//! input plane (1x28x28 vs 3x32x32) and the flattened width (256 vs 400).
//! Pixel inputs are expected in `[0, 1]`; the fixed normalization
//! `(x - 0.5) / 0.5` is applied inside the forward pass so attacks operate in
//! raw pixel space.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ops;
use crate::ops::MaxPoolIndices;
use crate::tensor::{Gradient, Tensor};

/// Number of output classes for both datasets.
pub const NUM_CLASSES: usize = 10;

/// Identifier of one of the two supported network architectures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Architecture {
    MnistNet,
    Cifar10Net,
}

/// Shape and initialization metadata for one trainable tensor.
#[derive(Debug, Clone)]
pub struct ParamSpec {
    pub name: &'static str,
    pub shape: Vec<usize>,
    /// Fan-in of the layer the tensor belongs to; bounds the init range.
    pub fan_in: usize,
}

impl Architecture {
    /// Stable on-disk identifier.
    pub fn id(self) -> u8 {
        match self {
            Architecture::MnistNet => 0,
            Architecture::Cifar10Net => 1,
        }
    }

    pub fn from_id(id: u8) -> Result<Self> {
        match id {
            0 => Ok(Architecture::MnistNet),
            1 => Ok(Architecture::Cifar10Net),
            other => Err(Error::data(format!("unknown architecture id {other}"))),
        }
    }

    /// Expected input planes as `[C, H, W]`.
    pub fn input_shape(self) -> [usize; 3] {
        match self {
            Architecture::MnistNet => [1, 28, 28],
            Architecture::Cifar10Net => [3, 32, 32],
        }
    }

    /// Width of the flattened features feeding the first fully connected layer.
    pub fn flatten_dim(self) -> usize {
        match self {
            Architecture::MnistNet => 256,  // 16 * 4 * 4
            Architecture::Cifar10Net => 400, // 16 * 5 * 5
        }
    }

    /// Ordered specification of every trainable tensor.
    pub fn param_specs(self) -> Vec<ParamSpec> {
        let cin = self.input_shape()[0];
        let flat = self.flatten_dim();
        vec![
            ParamSpec { name: "conv1.weight", shape: vec![6, cin, 5, 5], fan_in: cin * 25 },
            ParamSpec { name: "conv1.bias", shape: vec![6], fan_in: cin * 25 },
            ParamSpec { name: "conv2.weight", shape: vec![16, 6, 5, 5], fan_in: 150 },
            ParamSpec { name: "conv2.bias", shape: vec![16], fan_in: 150 },
            ParamSpec { name: "fc1.weight", shape: vec![120, flat], fan_in: flat },
            ParamSpec { name: "fc1.bias", shape: vec![120], fan_in: flat },
            ParamSpec { name: "fc2.weight", shape: vec![84, 120], fan_in: 120 },
            ParamSpec { name: "fc2.bias", shape: vec![84], fan_in: 120 },
            ParamSpec { name: "fc3.weight", shape: vec![10, 84], fan_in: 84 },
            ParamSpec { name: "fc3.bias", shape: vec![10], fan_in: 84 },
        ]
    }

    /// Total number of trainable scalars.
    pub fn param_count(self) -> usize {
        self.param_specs()
            .iter()
            .map(|s| s.shape.iter().product::<usize>())
            .sum()
    }
}

// Indices into the ordered tensor list; fixed per architecture.
const CONV1_W: usize = 0;
const CONV1_B: usize = 1;
const CONV2_W: usize = 2;
const CONV2_B: usize = 3;
const FC1_W: usize = 4;
const FC1_B: usize = 5;
const FC2_W: usize = 6;
const FC2_B: usize = 7;
const FC3_W: usize = 8;
const FC3_B: usize = 9;

/// Ordered collection of named parameter tensors for one network.
///
/// `clone()` is a deep copy; snapshots never alias live training parameters.
/// The same container also carries parameter gradients and optimizer
/// velocities, which are structurally congruent by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSet {
    arch: Architecture,
    tensors: Vec<Tensor>,
}

impl ParameterSet {
    pub fn arch(&self) -> Architecture {
        self.arch
    }

    /// All-zero parameters with this architecture's layout.
    pub fn zeros(arch: Architecture) -> Self {
        let tensors = arch
            .param_specs()
            .into_iter()
            .map(|s| Tensor::zeros(s.shape))
            .collect();
        ParameterSet { arch, tensors }
    }

    pub fn zeros_like(&self) -> Self {
        ParameterSet::zeros(self.arch)
    }

    /// Two sets are congruent when they share the architecture (and therefore
    /// tensor names, order, and shapes).
    pub fn congruent(&self, other: &Self) -> bool {
        self.arch == other.arch
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> &mut [Tensor] {
        &mut self.tensors
    }

    /// Iterates `(name, tensor)` pairs in the fixed architecture order.
    pub fn iter(&self) -> impl Iterator<Item = (&'static str, &Tensor)> + '_ {
        self.arch
            .param_specs()
            .into_iter()
            .map(|s| s.name)
            .zip(self.tensors.iter())
    }

    pub fn param_count(&self) -> usize {
        self.tensors.iter().map(Tensor::numel).sum()
    }

    /// Writes the versioned binary snapshot container.
    ///
    /// Layout: magic `SNAP`, format version `u32`, architecture id `u8`,
    /// tensor count `u32`, then per tensor: name length `u16`, name bytes,
    /// rank `u8`, dims `u32` each, `f32` payload. All multi-byte fields are
    /// little-endian.
    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(SNAP_MAGIC)?;
        w.write_all(&SNAP_VERSION.to_le_bytes())?;
        w.write_all(&[self.arch.id()])?;
        w.write_all(&(self.tensors.len() as u32).to_le_bytes())?;
        for (name, tensor) in self.iter() {
            w.write_all(&(name.len() as u16).to_le_bytes())?;
            w.write_all(name.as_bytes())?;
            w.write_all(&[tensor.shape().len() as u8])?;
            for &d in tensor.shape() {
                w.write_all(&(d as u32).to_le_bytes())?;
            }
            let mut bytes = Vec::with_capacity(tensor.numel() * 4);
            for &v in tensor.data() {
                bytes.extend_from_slice(&v.to_le_bytes());
            }
            w.write_all(&bytes)?;
        }
        Ok(())
    }

    /// Reads and validates a snapshot container produced by [`write_to`].
    ///
    /// [`write_to`]: ParameterSet::write_to
    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)
            .map_err(|e| Error::data(format!("snapshot truncated reading magic: {e}")))?;
        if &magic != SNAP_MAGIC {
            return Err(Error::data(format!(
                "bad snapshot magic {magic:?}, expected {SNAP_MAGIC:?}"
            )));
        }
        let version = read_u32(r)?;
        if version != SNAP_VERSION {
            return Err(Error::data(format!(
                "unsupported snapshot format version {version}"
            )));
        }
        let arch = Architecture::from_id(read_u8(r)?)?;
        let count = read_u32(r)? as usize;
        let specs = arch.param_specs();
        if count != specs.len() {
            return Err(Error::data(format!(
                "snapshot holds {count} tensors, architecture expects {}",
                specs.len()
            )));
        }
        let mut tensors = Vec::with_capacity(count);
        for spec in &specs {
            let name_len = read_u16(r)? as usize;
            let mut name = vec![0u8; name_len];
            r.read_exact(&mut name)
                .map_err(|e| Error::data(format!("snapshot truncated reading name: {e}")))?;
            if name != spec.name.as_bytes() {
                return Err(Error::data(format!(
                    "snapshot tensor {:?} where {:?} was expected",
                    String::from_utf8_lossy(&name),
                    spec.name
                )));
            }
            let rank = read_u8(r)? as usize;
            let mut shape = Vec::with_capacity(rank);
            for _ in 0..rank {
                shape.push(read_u32(r)? as usize);
            }
            if shape != spec.shape {
                return Err(Error::data(format!(
                    "snapshot tensor {} has shape {shape:?}, expected {:?}",
                    spec.name, spec.shape
                )));
            }
            let numel: usize = shape.iter().product();
            let mut bytes = vec![0u8; numel * 4];
            r.read_exact(&mut bytes)
                .map_err(|e| Error::data(format!("snapshot truncated in {}: {e}", spec.name)))?;
            let data = bytes
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect();
            tensors.push(Tensor::new(shape, data)?);
        }
        Ok(ParameterSet { arch, tensors })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let params = Self::read_from(&mut r)?;
        Ok(params)
    }
}

const SNAP_MAGIC: &[u8; 4] = b"SNAP";
const SNAP_VERSION: u32 = 1;

fn read_u8<R: Read>(r: &mut R) -> Result<u8> {
    let mut b = [0u8; 1];
    r.read_exact(&mut b)
        .map_err(|e| Error::data(format!("snapshot truncated: {e}")))?;
    Ok(b[0])
}

fn read_u16<R: Read>(r: &mut R) -> Result<u16> {
    let mut b = [0u8; 2];
    r.read_exact(&mut b)
        .map_err(|e| Error::data(format!("snapshot truncated: {e}")))?;
    Ok(u16::from_le_bytes(b))
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)
        .map_err(|e| Error::data(format!("snapshot truncated: {e}")))?;
    Ok(u32::from_le_bytes(b))
}

/// Deterministic uniform fan-in initialization: every tensor of a layer is
/// drawn from `U(-1/sqrt(fan_in), 1/sqrt(fan_in))` in the fixed spec order.
pub fn init_parameters(arch: Architecture, seed: u64) -> ParameterSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tensors = arch
        .param_specs()
        .into_iter()
        .map(|spec| {
            let bound = 1.0 / (spec.fan_in as f32).sqrt();
            let numel = spec.shape.iter().product();
            let data = (0..numel)
                .map(|_| rng.random_range(-bound..bound))
                .collect();
            Tensor::new(spec.shape, data).expect("spec shapes are valid")
        })
        .collect();
    ParameterSet { arch, tensors }
}

fn validate_batch(arch: Architecture, batch: &Tensor) -> Result<usize> {
    let (n, c, h, w) = batch.dims4()?;
    let [ec, eh, ew] = arch.input_shape();
    if c != ec || h != eh || w != ew {
        return Err(Error::shape(format!(
            "batch shape {:?} does not match {arch:?} input [N, {ec}, {eh}, {ew}]",
            batch.shape()
        )));
    }
    Ok(n)
}

/// Activations retained by a forward pass for backpropagation.
pub(crate) struct ForwardCache {
    normalized: Tensor,
    c1: Tensor,
    idx1: MaxPoolIndices,
    p1: Tensor,
    c2: Tensor,
    idx2: MaxPoolIndices,
    flat: Tensor,
    f1: Tensor,
    r3: Tensor,
    f2: Tensor,
    r4: Tensor,
    pub(crate) logits: Tensor,
}

fn normalize(batch: &Tensor) -> Tensor {
    let data = batch.data().iter().map(|&v| (v - 0.5) / 0.5).collect();
    Tensor::new(batch.shape().to_vec(), data).expect("same shape")
}

pub(crate) fn forward_cached(params: &ParameterSet, batch: &Tensor) -> Result<ForwardCache> {
    let n = validate_batch(params.arch, batch)?;
    let t = &params.tensors;

    let normalized = normalize(batch);
    let c1 = ops::conv2d_forward(&normalized, &t[CONV1_W], &t[CONV1_B])?;
    let r1 = ops::relu_forward(&c1);
    let (p1, idx1) = ops::maxpool2x2_forward(&r1)?;
    let c2 = ops::conv2d_forward(&p1, &t[CONV2_W], &t[CONV2_B])?;
    let r2 = ops::relu_forward(&c2);
    let (p2, idx2) = ops::maxpool2x2_forward(&r2)?;
    let flat = p2.reshape(vec![n, params.arch.flatten_dim()])?;
    let f1 = ops::linear_forward(&flat, &t[FC1_W], &t[FC1_B])?;
    let r3 = ops::relu_forward(&f1);
    let f2 = ops::linear_forward(&r3, &t[FC2_W], &t[FC2_B])?;
    let r4 = ops::relu_forward(&f2);
    let logits = ops::linear_forward(&r4, &t[FC3_W], &t[FC3_B])?;

    Ok(ForwardCache {
        normalized,
        c1,
        idx1,
        p1,
        c2,
        idx2,
        flat,
        f1,
        r3,
        f2,
        r4,
        logits,
    })
}

/// Deterministic logits for a `[N, C, H, W]` pixel batch in `[0, 1]`.
pub fn forward(params: &ParameterSet, batch: &Tensor) -> Result<Tensor> {
    Ok(forward_cached(params, batch)?.logits)
}

/// Backpropagates a gradient with respect to the logits down to the input,
/// optionally collecting parameter gradients along the way.
pub(crate) fn backprop_from_logits_grad(
    params: &ParameterSet,
    cache: &ForwardCache,
    logits_grad: &Gradient,
    want_param_grads: bool,
) -> Result<(Option<ParameterSet>, Gradient)> {
    let t = &params.tensors;
    let mut grads = want_param_grads.then(|| params.zeros_like());

    let g_r4;
    if let Some(g) = grads.as_mut() {
        let lg = ops::linear_backward(&cache.r4, &t[FC3_W], logits_grad)?;
        g.tensors[FC3_W] = lg.weight;
        g.tensors[FC3_B] = lg.bias;
        g_r4 = lg.input;
    } else {
        g_r4 = ops::linear_backward_data(&t[FC3_W], logits_grad)?;
    }
    let g_f2 = ops::relu_backward(&cache.f2, &g_r4)?;

    let g_r3;
    if let Some(g) = grads.as_mut() {
        let lg = ops::linear_backward(&cache.r3, &t[FC2_W], &g_f2)?;
        g.tensors[FC2_W] = lg.weight;
        g.tensors[FC2_B] = lg.bias;
        g_r3 = lg.input;
    } else {
        g_r3 = ops::linear_backward_data(&t[FC2_W], &g_f2)?;
    }
    let g_f1 = ops::relu_backward(&cache.f1, &g_r3)?;

    let g_flat;
    if let Some(g) = grads.as_mut() {
        let lg = ops::linear_backward(&cache.flat, &t[FC1_W], &g_f1)?;
        g.tensors[FC1_W] = lg.weight;
        g.tensors[FC1_B] = lg.bias;
        g_flat = lg.input;
    } else {
        g_flat = ops::linear_backward_data(&t[FC1_W], &g_f1)?;
    }

    let g_p2 = g_flat.reshape(cache.idx2.output_shape().to_vec())?;
    let g_r2 = ops::maxpool2x2_backward(&cache.idx2, &g_p2)?;
    let g_c2 = ops::relu_backward(&cache.c2, &g_r2)?;

    let g_p1;
    if let Some(g) = grads.as_mut() {
        let cg = ops::conv2d_backward(&cache.p1, &t[CONV2_W], &g_c2)?;
        g.tensors[CONV2_W] = cg.kernel;
        g.tensors[CONV2_B] = cg.bias;
        g_p1 = cg.input;
    } else {
        g_p1 = ops::conv2d_backward_data(&t[CONV2_W], &g_c2, cache.p1.shape())?;
    }

    let g_r1 = ops::maxpool2x2_backward(&cache.idx1, &g_p1)?;
    let g_c1 = ops::relu_backward(&cache.c1, &g_r1)?;

    let mut g_z;
    if let Some(g) = grads.as_mut() {
        let cg = ops::conv2d_backward(&cache.normalized, &t[CONV1_W], &g_c1)?;
        g.tensors[CONV1_W] = cg.kernel;
        g.tensors[CONV1_B] = cg.bias;
        g_z = cg.input;
    } else {
        g_z = ops::conv2d_backward_data(&t[CONV1_W], &g_c1, cache.normalized.shape())?;
    }

    // Chain rule through the fixed normalization z = (x - 0.5) / 0.5.
    for v in g_z.data_mut() {
        *v *= 2.0;
    }
    Ok((grads, g_z))
}

/// Loss, parameter gradients, and input gradient from one fused pass.
pub struct BackwardResult {
    pub loss: f32,
    pub param_grads: ParameterSet,
    pub input_grad: Gradient,
}

/// Mean cross-entropy loss plus exact analytic gradients with respect to both
/// every parameter and the input batch.
pub fn backward(params: &ParameterSet, batch: &Tensor, labels: &[u8]) -> Result<BackwardResult> {
    let cache = forward_cached(params, batch)?;
    let (loss, logits_grad) = ops::softmax_cross_entropy(&cache.logits, labels)?;
    let (grads, input_grad) = backprop_from_logits_grad(params, &cache, &logits_grad, true)?;
    Ok(BackwardResult {
        loss,
        param_grads: grads.expect("requested param grads"),
        input_grad,
    })
}

/// Loss and input gradient only; cheaper than [`backward`] when parameter
/// gradients are not needed (attack generation).
pub fn input_gradient(params: &ParameterSet, batch: &Tensor, labels: &[u8]) -> Result<(f32, Gradient)> {
    let cache = forward_cached(params, batch)?;
    let (loss, logits_grad) = ops::softmax_cross_entropy(&cache.logits, labels)?;
    let (_, input_grad) = backprop_from_logits_grad(params, &cache, &logits_grad, false)?;
    Ok((loss, input_grad))
}
