use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::param::{ParamBuilder, ParamRange};
use crate::vqc::check_len;

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn tanh(x: f64) -> f64 {
    x.tanh()
}

pub fn relu(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| v.max(0.0)).collect()
}

/// Max-shifted softmax.
pub fn softmax(x: &[f64]) -> Result<Vec<f64>> {
    let max = x
        .iter()
        .copied()
        .reduce(f64::max)
        .ok_or_else(|| Error::shape("softmax of an empty vector"))?;
    let mut out: Vec<f64> = x.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    for v in &mut out {
        *v /= sum;
    }
    Ok(out)
}

/// Backward of a softmax given its output `s` and the upstream gradient.
pub fn softmax_backward(s: &[f64], upstream: &[f64]) -> Vec<f64> {
    let dot: f64 = s.iter().zip(upstream).map(|(a, b)| a * b).sum();
    s.iter().zip(upstream).map(|(a, g)| a * (g - dot)).collect()
}

/// Non-overlapping max pooling; a trailing partial window is dropped.
/// Returns the pooled values and the index each one came from.
pub fn maxpool1d(x: &[f64], w: usize) -> Result<(Vec<f64>, Vec<usize>)> {
    if w == 0 {
        return Err(Error::config("pool width must be at least 1"));
    }
    if x.len() < w {
        return Err(Error::shape(alloc::format!(
            "cannot pool {} values with width {w}",
            x.len()
        )));
    }
    let mut vals = Vec::with_capacity(x.len() / w);
    let mut idx = Vec::with_capacity(x.len() / w);
    for (c, chunk) in x.chunks_exact(w).enumerate() {
        let mut best = 0;
        for (i, v) in chunk.iter().enumerate() {
            if *v > chunk[best] {
                best = i;
            }
        }
        vals.push(chunk[best]);
        idx.push(c * w + best);
    }
    Ok((vals, idx))
}

pub fn global_avg(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::shape("average of an empty vector"));
    }
    Ok(x.iter().sum::<f64>() / x.len() as f64)
}

/// Dense affine map `y = x·W + b` with `W` stored row-major as `n_in × n_out`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    n_in: usize,
    n_out: usize,
    w: ParamRange,
    b: ParamRange,
}

impl Linear {
    pub fn new(builder: &mut ParamBuilder, name: &str, n_in: usize, n_out: usize) -> Result<Self> {
        if n_in == 0 || n_out == 0 {
            return Err(Error::config("linear layer needs non-zero sizes"));
        }
        let bound = 1.0 / (n_in as f64).sqrt();
        let w = builder.uniform(&alloc::format!("{name}.w"), n_in * n_out, bound);
        let b = builder.uniform(&alloc::format!("{name}.b"), n_out, bound);
        Ok(Linear { n_in, n_out, w, b })
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn w(&self) -> ParamRange {
        self.w
    }

    pub fn b(&self) -> ParamRange {
        self.b
    }

    pub fn n_params(&self) -> usize {
        self.w.len + self.b.len
    }

    pub fn forward(&self, params: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        check_len("linear input", x.len(), self.n_in)?;
        let w = self.w.of(params);
        let mut y = self.b.of(params).to_vec();
        for (i, xi) in x.iter().enumerate() {
            for (yk, wik) in y.iter_mut().zip(&w[i * self.n_out..(i + 1) * self.n_out]) {
                *yk += xi * wik;
            }
        }
        Ok(y)
    }

    /// Accumulates into `grads` and returns the input gradient.
    pub fn backward(&self, params: &[f64], x: &[f64], upstream: &[f64], grads: &mut [f64]) -> Result<Vec<f64>> {
        check_len("linear input", x.len(), self.n_in)?;
        check_len("linear upstream", upstream.len(), self.n_out)?;
        let w = self.w.of(params);
        let mut dx = vec![0.0; self.n_in];
        {
            let gw = self.w.of_mut(grads);
            for (i, xi) in x.iter().enumerate() {
                let row = i * self.n_out..(i + 1) * self.n_out;
                for ((g, u), wik) in gw[row.clone()].iter_mut().zip(upstream).zip(&w[row]) {
                    *g += xi * u;
                    dx[i] += wik * u;
                }
            }
        }
        for (g, u) in self.b.of_mut(grads).iter_mut().zip(upstream) {
            *g += u;
        }
        Ok(dx)
    }
}

/// Number of valid-convolution output positions.
pub fn conv_out_len(len: usize, kernel: usize, stride: usize) -> Result<usize> {
    if kernel == 0 || stride == 0 {
        return Err(Error::config("kernel size and stride must be at least 1"));
    }
    if len < kernel {
        return Err(Error::shape(alloc::format!(
            "input length {len} is shorter than the kernel ({kernel})"
        )));
    }
    Ok((len - kernel) / stride + 1)
}

/// Channel-major flattening of window `t`: index `c·k + j`.
pub(crate) fn window(x: &[f64], channels: usize, len: usize, k: usize, start: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(channels * k);
    for c in 0..channels {
        w.extend_from_slice(&x[c * len + start..c * len + start + k]);
    }
    w
}

pub(crate) fn scatter_window(dx: &mut [f64], dw: &[f64], channels: usize, len: usize, k: usize, start: usize) {
    for c in 0..channels {
        for j in 0..k {
            dx[c * len + start + j] += dw[c * k + j];
        }
    }
}

/// Classical 1D convolution; one shared affine map over each flattened window.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv1d {
    in_channels: usize,
    out_channels: usize,
    kernel: usize,
    stride: usize,
    map: Linear,
}

impl Conv1d {
    pub fn new(
        builder: &mut ParamBuilder,
        name: &str,
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        stride: usize,
    ) -> Result<Self> {
        conv_out_len(kernel, kernel, stride)?;
        let map = Linear::new(builder, name, in_channels * kernel, out_channels)?;
        Ok(Conv1d {
            in_channels,
            out_channels,
            kernel,
            stride,
            map,
        })
    }

    pub fn out_channels(&self) -> usize {
        self.out_channels
    }

    pub fn n_params(&self) -> usize {
        self.map.n_params()
    }

    pub fn out_len(&self, len: usize) -> Result<usize> {
        conv_out_len(len, self.kernel, self.stride)
    }

    fn in_len(&self, x: &[f64]) -> Result<usize> {
        if !x.len().is_multiple_of(self.in_channels) {
            return Err(Error::usage("input is not a whole number of channels"));
        }
        Ok(x.len() / self.in_channels)
    }

    /// `x` is `in_channels × L` channel-major; the result is `out_channels × L_out`.
    pub fn forward(&self, params: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        let len = self.in_len(x)?;
        let l_out = self.out_len(len)?;
        let mut y = vec![0.0; self.out_channels * l_out];
        for t in 0..l_out {
            let col = self
                .map
                .forward(params, &window(x, self.in_channels, len, self.kernel, t * self.stride))?;
            for (o, v) in col.into_iter().enumerate() {
                y[o * l_out + t] = v;
            }
        }
        Ok(y)
    }

    pub fn backward(&self, params: &[f64], x: &[f64], upstream: &[f64], grads: &mut [f64]) -> Result<Vec<f64>> {
        let len = self.in_len(x)?;
        let l_out = self.out_len(len)?;
        check_len("conv upstream", upstream.len(), self.out_channels * l_out)?;
        let mut dx = vec![0.0; x.len()];
        for t in 0..l_out {
            let start = t * self.stride;
            let win = window(x, self.in_channels, len, self.kernel, start);
            let dcol: Vec<f64> = (0..self.out_channels).map(|o| upstream[o * l_out + t]).collect();
            let dw = self.map.backward(params, &win, &dcol, grads)?;
            scatter_window(&mut dx, &dw, self.in_channels, len, self.kernel, start);
        }
        Ok(dx)
    }
}
