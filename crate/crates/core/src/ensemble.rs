//! Snapshot buffer and summed-logits ensemble predictor.
//!
//! The buffer keeps deep copies of the last `M` per-iteration parameter sets
//! of a single training run. The ensemble predicts by summing member logits;
//! since positive scaling never changes an argmax, this is equivalent to
//! averaging them. `record` is single-writer (the training loop); the
//! predictor takes a read-only view and may run concurrently with other
//! readers between epochs.

use std::borrow::Cow;
use std::collections::VecDeque;
use std::fs;
use std::path::{Path, PathBuf};

use crate::attack::Predictor;
use crate::error::{Error, Result};
use crate::nn::{self, ParameterSet};
use crate::ops;
use crate::tensor::{Gradient, Tensor};

enum Stored {
    Memory(ParameterSet),
    /// Spilled to one snapshot file; loaded on demand.
    Disk(PathBuf),
}

/// Bounded FIFO of the last `M` `(iteration, parameters)` snapshots.
pub struct SnapshotBuffer {
    capacity: usize,
    entries: VecDeque<(u64, Stored)>,
    last_iteration: Option<u64>,
    spill_dir: Option<PathBuf>,
}

impl SnapshotBuffer {
    /// In-memory buffer holding at most `capacity` snapshots.
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::config("snapshot capacity must be at least 1".to_string()));
        }
        Ok(SnapshotBuffer {
            capacity,
            entries: VecDeque::with_capacity(capacity + 1),
            last_iteration: None,
            spill_dir: None,
        })
    }

    /// Buffer that spills members to `dir` instead of holding them in memory.
    /// Evicted members have their files removed.
    pub fn with_spill_dir(capacity: usize, dir: &Path) -> Result<Self> {
        let mut buffer = SnapshotBuffer::new(capacity)?;
        fs::create_dir_all(dir)?;
        buffer.spill_dir = Some(dir.to_path_buf());
        Ok(buffer)
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Iteration indices currently held, oldest first.
    pub fn iterations(&self) -> Vec<u64> {
        self.entries.iter().map(|(t, _)| *t).collect()
    }

    /// Appends a deep copy of `params` recorded at iteration `t`, evicting the
    /// oldest member once more than `capacity` are held. `t` must be strictly
    /// increasing across calls.
    pub fn record(&mut self, t: u64, params: &ParameterSet) -> Result<()> {
        if let Some(last) = self.last_iteration {
            if t <= last {
                return Err(Error::config(format!(
                    "snapshot iteration {t} is not after the previous iteration {last}"
                )));
            }
        }
        let stored = match &self.spill_dir {
            None => Stored::Memory(params.clone()),
            Some(dir) => {
                let path = dir.join(member_file_name(t));
                params.save(&path)?;
                Stored::Disk(path)
            }
        };
        self.entries.push_back((t, stored));
        self.last_iteration = Some(t);
        if self.entries.len() > self.capacity {
            if let Some((_, Stored::Disk(path))) = self.entries.pop_front() {
                let _ = fs::remove_file(path);
            }
        }
        Ok(())
    }

    /// The `i`-th member (oldest first), loading it from disk if spilled.
    pub fn member(&self, i: usize) -> Result<Cow<'_, ParameterSet>> {
        let (_, stored) = self
            .entries
            .get(i)
            .ok_or_else(|| Error::config(format!("snapshot index {i} out of range")))?;
        match stored {
            Stored::Memory(p) => Ok(Cow::Borrowed(p)),
            Stored::Disk(path) => Ok(Cow::Owned(ParameterSet::load(path)?)),
        }
    }

    /// Writes every member plus a manifest of `(iteration, file name)` lines.
    pub fn dump(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut manifest = String::new();
        for (i, (t, _)) in self.entries.iter().enumerate() {
            let name = member_file_name(*t);
            self.member(i)?.save(&dir.join(&name))?;
            manifest.push_str(&format!("{t}\t{name}\n"));
        }
        fs::write(dir.join(MANIFEST_NAME), manifest)?;
        Ok(())
    }

    /// Rebuilds a buffer from a [`dump`](SnapshotBuffer::dump) directory; the
    /// capacity equals the restored member count.
    pub fn restore(dir: &Path) -> Result<Self> {
        let manifest_path = dir.join(MANIFEST_NAME);
        let manifest = fs::read_to_string(&manifest_path)
            .map_err(|e| Error::data(format!("cannot read {}: {e}", manifest_path.display())))?;
        let mut parsed = Vec::new();
        for (lineno, line) in manifest.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (t, name) = line.split_once('\t').ok_or_else(|| {
                Error::data(format!("manifest line {} is not 'iteration<TAB>file'", lineno + 1))
            })?;
            let t: u64 = t
                .parse()
                .map_err(|_| Error::data(format!("bad iteration index {t:?} in manifest")))?;
            parsed.push((t, name.to_string()));
        }
        if parsed.is_empty() {
            return Err(Error::data("snapshot manifest is empty".to_string()));
        }
        let mut buffer = SnapshotBuffer::new(parsed.len())?;
        for (t, name) in parsed {
            let params = ParameterSet::load(&dir.join(&name))?;
            buffer.record(t, &params)?;
        }
        Ok(buffer)
    }
}

const MANIFEST_NAME: &str = "manifest.txt";

fn member_file_name(t: u64) -> String {
    format!("snapshot-{t:08}.snap")
}

/// Read-only summed-logits predictor over the newest `members` snapshots.
pub struct EnsemblePredictor<'a> {
    buffer: &'a SnapshotBuffer,
    members: usize,
}

impl<'a> EnsemblePredictor<'a> {
    /// Ensemble over every snapshot currently in the buffer.
    pub fn new(buffer: &'a SnapshotBuffer) -> Result<Self> {
        Self::last_m(buffer, buffer.len())
    }

    /// Ensemble over the newest `m` snapshots (all of them when fewer are held).
    pub fn last_m(buffer: &'a SnapshotBuffer, m: usize) -> Result<Self> {
        if buffer.is_empty() {
            return Err(Error::config(
                "ensemble prediction requires a non-empty snapshot buffer".to_string(),
            ));
        }
        if m == 0 {
            return Err(Error::config("ensemble needs at least one member".to_string()));
        }
        Ok(EnsemblePredictor {
            buffer,
            members: m.min(buffer.len()),
        })
    }

    pub fn member_count(&self) -> usize {
        self.members
    }

    fn member_indices(&self) -> std::ops::Range<usize> {
        self.buffer.len() - self.members..self.buffer.len()
    }

    /// Elementwise sum of member logits, accumulated oldest member first.
    pub fn summed_logits(&self, batch: &Tensor) -> Result<Tensor> {
        let mut sum: Option<Tensor> = None;
        for i in self.member_indices() {
            let member = self.buffer.member(i)?;
            let logits = nn::forward(&member, batch)?;
            match &mut sum {
                None => sum = Some(logits),
                Some(acc) => {
                    for (a, &b) in acc.data_mut().iter_mut().zip(logits.data()) {
                        *a += b;
                    }
                }
            }
        }
        Ok(sum.expect("at least one member"))
    }
}

impl Predictor for EnsemblePredictor<'_> {
    fn logits(&self, batch: &Tensor) -> Result<Tensor> {
        self.summed_logits(batch)
    }

    /// Gradient of the cross-entropy of the summed logits with respect to the
    /// input: the shared softmax upstream is pushed through every member and
    /// the per-member input gradients are summed in member order.
    fn input_gradient(&self, batch: &Tensor, labels: &[u8]) -> Result<(f32, Gradient)> {
        let summed = self.summed_logits(batch)?;
        let (loss, upstream) = ops::softmax_cross_entropy(&summed, labels)?;
        let mut grad: Option<Gradient> = None;
        for i in self.member_indices() {
            let member = self.buffer.member(i)?;
            let cache = nn::forward_cached(&member, batch)?;
            let (_, g) = nn::backprop_from_logits_grad(&member, &cache, &upstream, false)?;
            match &mut grad {
                None => grad = Some(g),
                Some(acc) => {
                    for (a, &b) in acc.data_mut().iter_mut().zip(g.data()) {
                        *a += b;
                    }
                }
            }
        }
        Ok((loss, grad.expect("at least one member")))
    }
}
