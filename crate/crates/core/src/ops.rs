//! Differentiable layer primitives: valid cross-correlation, 2x2 max pooling,
//! affine maps, ReLU, and stabilized softmax cross-entropy.
//!
//! Forward ops allocate their outputs and backward ops allocate gradients;
//! nothing here mutates its inputs, so tensors can be shared read-only across
//! evaluation workers.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::tensor::{Gradient, Tensor};

/// Accumulate `acc += a * x` over a contiguous row.
#[inline]
fn axpy(acc: &mut [f32], a: f32, x: &[f32]) {
    for (o, &v) in acc.iter_mut().zip(x) {
        *o += a * v;
    }
}

#[inline]
fn dot(a: &[f32], b: &[f32]) -> f32 {
    let mut s = 0.0f32;
    for (&x, &y) in a.iter().zip(b) {
        s += x * y;
    }
    s
}

/// Valid (no padding, stride 1) cross-correlation plus per-channel bias.
///
/// `input` is `[N, Cin, H, W]`, `kernel` `[Cout, Cin, K, K]`, `bias` `[Cout]`;
/// the output is `[N, Cout, H-K+1, W-K+1]`.
pub fn conv2d_forward(input: &Tensor, kernel: &Tensor, bias: &Tensor) -> Result<Tensor> {
    let (n, cin, h, w) = input.dims4()?;
    let (cout, kcin, kh, kw) = kernel.dims4()?;
    if kcin != cin {
        return Err(Error::shape(format!(
            "conv2d input channels disagree: input {:?} vs kernel {:?}",
            input.shape(),
            kernel.shape()
        )));
    }
    if bias.shape() != [cout] {
        return Err(Error::shape(format!(
            "conv2d bias {:?} does not match kernel {:?}",
            bias.shape(),
            kernel.shape()
        )));
    }
    if kh > h || kw > w {
        return Err(Error::shape(format!(
            "conv2d kernel {:?} larger than input {:?}",
            kernel.shape(),
            input.shape()
        )));
    }
    let (oh, ow) = (h - kh + 1, w - kw + 1);
    let mut out = vec![0.0f32; n * cout * oh * ow];
    let x = input.data();
    let k = kernel.data();
    let b = bias.data();

    out.par_chunks_mut(cout * oh * ow)
        .enumerate()
        .for_each(|(ni, sample)| {
            for co in 0..cout {
                let plane = &mut sample[co * oh * ow..(co + 1) * oh * ow];
                plane.fill(b[co]);
                for ci in 0..cin {
                    let xin = &x[(ni * cin + ci) * h * w..(ni * cin + ci + 1) * h * w];
                    for ky in 0..kh {
                        for kx in 0..kw {
                            let wgt = k[((co * cin + ci) * kh + ky) * kw + kx];
                            for oy in 0..oh {
                                let row = &xin[(oy + ky) * w + kx..(oy + ky) * w + kx + ow];
                                axpy(&mut plane[oy * ow..(oy + 1) * ow], wgt, row);
                            }
                        }
                    }
                }
            }
        });

    Tensor::new(vec![n, cout, oh, ow], out)
}

/// Gradients of [`conv2d_forward`] with respect to input, kernel, and bias.
#[derive(Debug)]
pub struct Conv2dGrads {
    pub input: Gradient,
    pub kernel: Gradient,
    pub bias: Gradient,
}

/// Exact analytic gradients of the valid cross-correlation.
pub fn conv2d_backward(input: &Tensor, kernel: &Tensor, upstream: &Gradient) -> Result<Conv2dGrads> {
    let (n, _, h, w) = input.dims4()?;
    let (cout, _, kh, kw) = kernel.dims4()?;
    let (oh, ow) = (h - kh + 1, w - kw + 1);
    if upstream.shape() != [n, cout, oh, ow] {
        return Err(Error::shape(format!(
            "conv2d upstream {:?} does not match forward output [{n}, {cout}, {oh}, {ow}]",
            upstream.shape()
        )));
    }
    let grad_input = conv2d_backward_data(kernel, upstream, input.shape())?;
    let grad_kernel = conv2d_backward_filter(input, kernel.shape(), upstream)?;

    let up = upstream.data();
    let mut grad_bias = vec![0.0f32; cout];
    for ni in 0..n {
        for (co, gb) in grad_bias.iter_mut().enumerate() {
            let plane = &up[(ni * cout + co) * oh * ow..(ni * cout + co + 1) * oh * ow];
            for &v in plane {
                *gb += v;
            }
        }
    }

    Ok(Conv2dGrads {
        input: grad_input,
        kernel: grad_kernel,
        bias: Tensor::new(vec![cout], grad_bias)?,
    })
}

/// Input gradient only; used when parameter gradients are not needed (attacks).
pub(crate) fn conv2d_backward_data(
    kernel: &Tensor,
    upstream: &Gradient,
    input_shape: &[usize],
) -> Result<Gradient> {
    let (cout, cin, kh, kw) = kernel.dims4()?;
    let (n, ucout, oh, ow) = upstream.dims4()?;
    let (h, w) = (input_shape[2], input_shape[3]);
    if ucout != cout || input_shape[1] != cin || oh != h - kh + 1 || ow != w - kw + 1 {
        return Err(Error::shape(format!(
            "conv2d backward-data shapes disagree: kernel {:?}, upstream {:?}, input {input_shape:?}",
            kernel.shape(),
            upstream.shape()
        )));
    }
    let k = kernel.data();
    let up = upstream.data();
    let mut gin = vec![0.0f32; n * cin * h * w];

    gin.par_chunks_mut(cin * h * w).enumerate().for_each(|(ni, sample)| {
        for co in 0..cout {
            let uplane = &up[(ni * cout + co) * oh * ow..(ni * cout + co + 1) * oh * ow];
            for ci in 0..cin {
                let gplane = &mut sample[ci * h * w..(ci + 1) * h * w];
                for ky in 0..kh {
                    for kx in 0..kw {
                        let wgt = k[((co * cin + ci) * kh + ky) * kw + kx];
                        for oy in 0..oh {
                            let dst = &mut gplane[(oy + ky) * w + kx..(oy + ky) * w + kx + ow];
                            axpy(dst, wgt, &uplane[oy * ow..(oy + 1) * ow]);
                        }
                    }
                }
            }
        }
    });

    Tensor::new(input_shape.to_vec(), gin)
}

fn conv2d_backward_filter(
    input: &Tensor,
    kernel_shape: &[usize],
    upstream: &Gradient,
) -> Result<Gradient> {
    let (n, cin, h, w) = input.dims4()?;
    let (_, cout, oh, ow) = upstream.dims4()?;
    let (kh, kw) = (kernel_shape[2], kernel_shape[3]);
    let x = input.data();
    let up = upstream.data();
    let ksize = cout * cin * kh * kw;

    // Per-sample partials reduced in sample order keep the result independent
    // of rayon scheduling.
    let partials: Vec<Vec<f32>> = (0..n)
        .into_par_iter()
        .map(|ni| {
            let mut gk = vec![0.0f32; ksize];
            for co in 0..cout {
                let uplane = &up[(ni * cout + co) * oh * ow..(ni * cout + co + 1) * oh * ow];
                for ci in 0..cin {
                    let xplane = &x[(ni * cin + ci) * h * w..(ni * cin + ci + 1) * h * w];
                    for ky in 0..kh {
                        for kx in 0..kw {
                            let mut acc = 0.0f32;
                            for oy in 0..oh {
                                acc += dot(
                                    &uplane[oy * ow..(oy + 1) * ow],
                                    &xplane[(oy + ky) * w + kx..(oy + ky) * w + kx + ow],
                                );
                            }
                            gk[((co * cin + ci) * kh + ky) * kw + kx] += acc;
                        }
                    }
                }
            }
            gk
        })
        .collect();

    let mut gk = vec![0.0f32; ksize];
    for part in &partials {
        for (g, &p) in gk.iter_mut().zip(part) {
            *g += p;
        }
    }
    Tensor::new(kernel_shape.to_vec(), gk)
}

/// Argmax bookkeeping from a pooling forward pass, consumed by the backward pass.
#[derive(Debug, Clone)]
pub struct MaxPoolIndices {
    input_shape: Vec<usize>,
    output_shape: Vec<usize>,
    /// Flat index into the input tensor of each window winner.
    argmax: Vec<u32>,
}

impl MaxPoolIndices {
    pub fn output_shape(&self) -> &[usize] {
        &self.output_shape
    }
}

/// 2x2 max pooling with stride 2. `H` and `W` must be even.
///
/// Ties break to the first position in row-major scan order.
pub fn maxpool2x2_forward(input: &Tensor) -> Result<(Tensor, MaxPoolIndices)> {
    let (n, c, h, w) = input.dims4()?;
    if h % 2 != 0 || w % 2 != 0 {
        return Err(Error::shape(format!(
            "maxpool2x2 requires even spatial dims, got {:?}",
            input.shape()
        )));
    }
    let (oh, ow) = (h / 2, w / 2);
    let x = input.data();
    let mut out = vec![0.0f32; n * c * oh * ow];
    let mut argmax = vec![0u32; n * c * oh * ow];

    for plane in 0..n * c {
        let base = plane * h * w;
        let obase = plane * oh * ow;
        for oy in 0..oh {
            for ox in 0..ow {
                let i00 = base + (2 * oy) * w + 2 * ox;
                let mut best_idx = i00;
                let mut best = x[i00];
                for (dy, dx) in [(0, 1), (1, 0), (1, 1)] {
                    let idx = base + (2 * oy + dy) * w + 2 * ox + dx;
                    if x[idx] > best {
                        best = x[idx];
                        best_idx = idx;
                    }
                }
                out[obase + oy * ow + ox] = best;
                argmax[obase + oy * ow + ox] = best_idx as u32;
            }
        }
    }

    let output = Tensor::new(vec![n, c, oh, ow], out)?;
    let indices = MaxPoolIndices {
        input_shape: input.shape().to_vec(),
        output_shape: output.shape().to_vec(),
        argmax,
    };
    Ok((output, indices))
}

/// Routes `upstream` back to the recorded argmax positions, zeros elsewhere.
pub fn maxpool2x2_backward(indices: &MaxPoolIndices, upstream: &Gradient) -> Result<Gradient> {
    if upstream.shape() != indices.output_shape {
        return Err(Error::shape(format!(
            "maxpool upstream {:?} does not match pooled output {:?}",
            upstream.shape(),
            indices.output_shape
        )));
    }
    let mut gin = Tensor::zeros(indices.input_shape.clone());
    let g = gin.data_mut();
    for (&idx, &u) in indices.argmax.iter().zip(upstream.data()) {
        g[idx as usize] += u;
    }
    Ok(gin)
}

/// Affine map `input [N, Din] x weight [Dout, Din]^T + bias [Dout]`.
pub fn linear_forward(input: &Tensor, weight: &Tensor, bias: &Tensor) -> Result<Tensor> {
    let (n, din) = input.dims2()?;
    let (dout, wdin) = weight.dims2()?;
    if wdin != din || bias.shape() != [dout] {
        return Err(Error::shape(format!(
            "linear shapes disagree: input {:?}, weight {:?}, bias {:?}",
            input.shape(),
            weight.shape(),
            bias.shape()
        )));
    }
    let x = input.data();
    let wt = weight.data();
    let b = bias.data();
    let mut out = vec![0.0f32; n * dout];
    for ni in 0..n {
        let row = &x[ni * din..(ni + 1) * din];
        let orow = &mut out[ni * dout..(ni + 1) * dout];
        for (o, ov) in orow.iter_mut().enumerate() {
            *ov = b[o] + dot(row, &wt[o * din..(o + 1) * din]);
        }
    }
    Tensor::new(vec![n, dout], out)
}

/// Gradients of [`linear_forward`] with respect to input, weight, and bias.
#[derive(Debug)]
pub struct LinearGrads {
    pub input: Gradient,
    pub weight: Gradient,
    pub bias: Gradient,
}

pub fn linear_backward(input: &Tensor, weight: &Tensor, upstream: &Gradient) -> Result<LinearGrads> {
    let (n, din) = input.dims2()?;
    let (dout, _) = weight.dims2()?;
    if upstream.shape() != [n, dout] {
        return Err(Error::shape(format!(
            "linear upstream {:?} does not match output [{n}, {dout}]",
            upstream.shape()
        )));
    }
    let x = input.data();
    let up = upstream.data();

    let grad_input = linear_backward_data(weight, upstream)?;

    let mut gw = vec![0.0f32; dout * din];
    let mut gb = vec![0.0f32; dout];
    for ni in 0..n {
        let xrow = &x[ni * din..(ni + 1) * din];
        for o in 0..dout {
            let u = up[ni * dout + o];
            axpy(&mut gw[o * din..(o + 1) * din], u, xrow);
            gb[o] += u;
        }
    }

    Ok(LinearGrads {
        input: grad_input,
        weight: Tensor::new(vec![dout, din], gw)?,
        bias: Tensor::new(vec![dout], gb)?,
    })
}

pub(crate) fn linear_backward_data(weight: &Tensor, upstream: &Gradient) -> Result<Gradient> {
    let (dout, din) = weight.dims2()?;
    let (n, udout) = upstream.dims2()?;
    if udout != dout {
        return Err(Error::shape(format!(
            "linear backward-data: upstream {:?} vs weight {:?}",
            upstream.shape(),
            weight.shape()
        )));
    }
    let wt = weight.data();
    let up = upstream.data();
    let mut gin = vec![0.0f32; n * din];
    for ni in 0..n {
        let grow = &mut gin[ni * din..(ni + 1) * din];
        for o in 0..dout {
            axpy(grow, up[ni * dout + o], &wt[o * din..(o + 1) * din]);
        }
    }
    Tensor::new(vec![n, din], gin)
}

/// Elementwise `max(0, x)`.
pub fn relu_forward(input: &Tensor) -> Tensor {
    let data = input.data().iter().map(|&v| v.max(0.0)).collect();
    Tensor::new(input.shape().to_vec(), data).expect("same shape as input")
}

/// Passes `upstream` through where `input > 0`; the derivative at exactly 0 is 0.
pub fn relu_backward(input: &Tensor, upstream: &Gradient) -> Result<Gradient> {
    if input.shape() != upstream.shape() {
        return Err(Error::shape(format!(
            "relu upstream {:?} does not match input {:?}",
            upstream.shape(),
            input.shape()
        )));
    }
    let data = input
        .data()
        .iter()
        .zip(upstream.data())
        .map(|(&x, &u)| if x > 0.0 { u } else { 0.0 })
        .collect();
    Tensor::new(input.shape().to_vec(), data)
}

/// Mean cross-entropy over the batch and its gradient with respect to the logits.
///
/// Uses max-subtraction stabilization; the gradient is `(softmax - onehot) / N`.
pub fn softmax_cross_entropy(logits: &Tensor, labels: &[u8]) -> Result<(f32, Gradient)> {
    let (n, c) = logits.dims2()?;
    if labels.len() != n {
        return Err(Error::shape(format!(
            "got {} labels for a batch of {n} logits rows",
            labels.len()
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&l| (l as usize) >= c) {
        return Err(Error::config(format!(
            "label {bad} out of range [0, {c})"
        )));
    }
    let z = logits.data();
    let mut grad = vec![0.0f32; n * c];
    let mut loss_acc = 0.0f64;
    let inv_n = 1.0f32 / n as f32;

    for ni in 0..n {
        let row = &z[ni * c..(ni + 1) * c];
        let m = row.iter().fold(f32::NEG_INFINITY, |a, &b| a.max(b));
        let mut sum = 0.0f32;
        let grow = &mut grad[ni * c..(ni + 1) * c];
        for (g, &v) in grow.iter_mut().zip(row) {
            let e = (v - m).exp();
            *g = e;
            sum += e;
        }
        let label = labels[ni] as usize;
        // loss_i = logsumexp - z[label]
        loss_acc += (m as f64 + (sum as f64).ln()) - row[label] as f64;
        let inv_sum = 1.0 / sum;
        for g in grow.iter_mut() {
            *g *= inv_sum * inv_n;
        }
        grow[label] -= inv_n;
    }

    let loss = (loss_acc / n as f64) as f32;
    Ok((loss, Tensor::new(vec![n, c], grad)?))
}
