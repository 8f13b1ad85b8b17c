use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::{arctan_all, check_len, Kernel, VqcConfig};
use crate::error::{Error, Result};
use crate::gradients::ClipRange;
use crate::param::{fingerprint, ParamBuilder, ParamRange};

/// How the input is squeezed down to one value per qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputMap {
    /// Learnable fully connected map with bias.
    Linear,
    /// Fixed linear-interpolation resampling, no parameters.
    Bilinear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowQubitSpec {
    pub n_in: usize,
    pub n_qubits: usize,
    pub n_out: usize,
    pub depth: usize,
    /// `None` disables the clip on the squeezed values.
    pub clip: Option<ClipRange>,
    pub input_map: InputMap,
}

impl LowQubitSpec {
    pub fn new(n_in: usize, n_qubits: usize, n_out: usize) -> Self {
        LowQubitSpec {
            n_in,
            n_qubits,
            n_out,
            depth: 1,
            clip: Some(ClipRange::DEFAULT),
            input_map: InputMap::Linear,
        }
    }

    pub fn depth(mut self, depth: usize) -> Self {
        self.depth = depth;
        self
    }

    pub fn clip(mut self, clip: Option<ClipRange>) -> Self {
        self.clip = clip;
        self
    }

    pub fn input_map(mut self, map: InputMap) -> Self {
        self.input_map = map;
        self
    }
}

/// Linear squeeze → clip → RY(arctan) encoding → variational blocks →
/// ⟨Z⟩ per qubit → linear expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct LowQubitVqc {
    spec: LowQubitSpec,
    w_in: ParamRange,
    b_in: ParamRange,
    theta: ParamRange,
    w_out: ParamRange,
    b_out: ParamRange,
    kernel: Kernel,
    /// Two interpolation taps per qubit, for [`InputMap::Bilinear`].
    taps: Vec<[(usize, f64); 2]>,
}

/// Intermediates of one forward call, consumed by backward.
#[derive(Debug, Clone, PartialEq)]
pub struct LowQubitTrace {
    pub x: Vec<f64>,
    pub y1_pre: Vec<f64>,
    pub y1: Vec<f64>,
    pub q3: Vec<f64>,
    fingerprint: u64,
}

fn interpolation_taps(n_in: usize, n_out: usize) -> Vec<[(usize, f64); 2]> {
    let scale = n_in as f64 / n_out as f64;
    (0..n_out)
        .map(|j| {
            let src = ((j as f64 + 0.5) * scale - 0.5).clamp(0.0, (n_in - 1) as f64);
            let i0 = src.floor() as usize;
            let i1 = (i0 + 1).min(n_in - 1);
            let t = src - i0 as f64;
            [(i0, 1.0 - t), (i1, t)]
        })
        .collect()
}

impl LowQubitVqc {
    pub fn new(builder: &mut ParamBuilder, name: &str, spec: LowQubitSpec) -> Result<Self> {
        let config = VqcConfig::new(spec.n_qubits, spec.depth)?;
        if spec.n_in == 0 || spec.n_out == 0 {
            return Err(Error::config("low-qubit VQC needs n_in ≥ 1 and n_out ≥ 1"));
        }
        let nq = spec.n_qubits;
        let (w_in, b_in, taps) = match spec.input_map {
            InputMap::Linear => {
                let bound = 1.0 / (spec.n_in as f64).sqrt();
                let w = builder.uniform(&alloc::format!("{name}.w_in"), spec.n_in * nq, bound);
                let b = builder.uniform(&alloc::format!("{name}.b_in"), nq, bound);
                (w, b, Vec::new())
            }
            InputMap::Bilinear => (ParamRange::EMPTY, ParamRange::EMPTY, interpolation_taps(spec.n_in, nq)),
        };
        let theta = builder.uniform(&alloc::format!("{name}.theta"), config.n_rotation_params(), 0.1);
        let bound = 1.0 / (nq as f64).sqrt();
        let w_out = builder.uniform(&alloc::format!("{name}.w_out"), nq * spec.n_out, bound);
        let b_out = builder.uniform(&alloc::format!("{name}.b_out"), spec.n_out, bound);
        Ok(LowQubitVqc {
            spec,
            w_in,
            b_in,
            theta,
            w_out,
            b_out,
            kernel: Kernel::new(nq, spec.depth),
            taps,
        })
    }

    pub fn spec(&self) -> &LowQubitSpec {
        &self.spec
    }

    pub fn n_in(&self) -> usize {
        self.spec.n_in
    }

    pub fn n_out(&self) -> usize {
        self.spec.n_out
    }

    pub fn n_qubits(&self) -> usize {
        self.spec.n_qubits
    }

    pub fn w_in(&self) -> ParamRange {
        self.w_in
    }

    pub fn b_in(&self) -> ParamRange {
        self.b_in
    }

    pub fn theta(&self) -> ParamRange {
        self.theta
    }

    pub fn w_out(&self) -> ParamRange {
        self.w_out
    }

    pub fn b_out(&self) -> ParamRange {
        self.b_out
    }

    pub fn n_params(&self) -> usize {
        [self.w_in, self.b_in, self.theta, self.w_out, self.b_out]
            .iter()
            .map(|r| r.len)
            .sum()
    }

    pub(crate) fn fingerprint(&self, params: &[f64]) -> u64 {
        let mut h = 0u64;
        for r in [self.w_in, self.b_in, self.theta, self.w_out, self.b_out] {
            h = h.rotate_left(7) ^ fingerprint(r.of(params));
        }
        h
    }

    pub fn forward(&self, params: &[f64], x: &[f64]) -> Result<(Vec<f64>, LowQubitTrace)> {
        let (y2, mut trace) = self.forward_unchecked(params, x)?;
        trace.fingerprint = self.fingerprint(params);
        Ok((y2, trace))
    }

    /// Forward pass without recording a parameter fingerprint. Composite
    /// layers fingerprint once per call instead of once per window.
    pub(crate) fn forward_unchecked(&self, params: &[f64], x: &[f64]) -> Result<(Vec<f64>, LowQubitTrace)> {
        check_len("low-qubit VQC input", x.len(), self.spec.n_in)?;
        let nq = self.spec.n_qubits;
        let y1_pre: Vec<f64> = match self.spec.input_map {
            InputMap::Linear => {
                let w = self.w_in.of(params);
                let mut y = self.b_in.of(params).to_vec();
                for (i, xi) in x.iter().enumerate() {
                    if *xi == 0.0 {
                        continue;
                    }
                    for (yj, wij) in y.iter_mut().zip(&w[i * nq..(i + 1) * nq]) {
                        *yj += xi * wij;
                    }
                }
                y
            }
            InputMap::Bilinear => self
                .taps
                .iter()
                .map(|[(i0, a), (i1, b)]| a * x[*i0] + b * x[*i1])
                .collect(),
        };
        let y1: Vec<f64> = match self.spec.clip {
            Some(c) => y1_pre.iter().map(|v| c.apply(*v)).collect(),
            None => y1_pre.clone(),
        };
        let q3 = self.kernel.expectations(&arctan_all(&y1), self.theta.of(params));
        let y2 = self.expand(params, &q3);
        Ok((
            y2,
            LowQubitTrace {
                x: x.to_vec(),
                y1_pre,
                y1,
                q3,
                fingerprint: 0,
            },
        ))
    }

    fn expand(&self, params: &[f64], q3: &[f64]) -> Vec<f64> {
        let n_out = self.spec.n_out;
        let w = self.w_out.of(params);
        let mut y2 = self.b_out.of(params).to_vec();
        for (j, qj) in q3.iter().enumerate() {
            for (yk, wjk) in y2.iter_mut().zip(&w[j * n_out..(j + 1) * n_out]) {
                *yk += qj * wjk;
            }
        }
        y2
    }

    /// Accumulates parameter gradients into `grads` (same layout as
    /// `params`) and returns the gradient with respect to the input.
    pub fn backward(
        &self,
        params: &[f64],
        trace: &LowQubitTrace,
        upstream: &[f64],
        grads: &mut [f64],
    ) -> Result<Vec<f64>> {
        if trace.fingerprint != self.fingerprint(params) {
            return Err(Error::usage(
                "stale trace: parameters changed since the forward pass that produced it",
            ));
        }
        self.backward_unchecked(params, trace, upstream, grads)
    }

    pub(crate) fn backward_unchecked(
        &self,
        params: &[f64],
        trace: &LowQubitTrace,
        upstream: &[f64],
        grads: &mut [f64],
    ) -> Result<Vec<f64>> {
        check_len("upstream gradient", upstream.len(), self.spec.n_out)?;
        if trace.x.len() != self.spec.n_in || trace.q3.len() != self.spec.n_qubits {
            return Err(Error::usage("trace does not belong to this layer"));
        }
        let nq = self.spec.n_qubits;
        let n_out = self.spec.n_out;

        // Output expansion.
        let w_out = self.w_out.of(params);
        let mut dq3 = vec![0.0; nq];
        {
            let gw = self.w_out.of_mut(grads);
            for j in 0..nq {
                for k in 0..n_out {
                    gw[j * n_out + k] += trace.q3[j] * upstream[k];
                    dq3[j] += w_out[j * n_out + k] * upstream[k];
                }
            }
        }
        for (g, u) in self.b_out.of_mut(grads).iter_mut().zip(upstream) {
            *g += u;
        }
        if dq3.iter().all(|v| *v == 0.0) {
            return Ok(vec![0.0; self.spec.n_in]);
        }

        // Circuit, by parameter shift over encoding and rotation angles.
        let kg = self
            .kernel
            .backward(&arctan_all(&trace.y1), self.theta.of(params), &dq3, true);
        for (g, d) in self.theta.of_mut(grads).iter_mut().zip(&kg.theta) {
            *g += d;
        }

        // arctan factor and clamp mask.
        let d_pre: Vec<f64> = (0..nq)
            .map(|j| {
                let pass = self.spec.clip.is_none_or(|c| c.passes(trace.y1_pre[j]));
                if pass {
                    kg.angles[j] / (1.0 + trace.y1[j] * trace.y1[j])
                } else {
                    0.0
                }
            })
            .collect();

        let mut dx = vec![0.0; self.spec.n_in];
        match self.spec.input_map {
            InputMap::Linear => {
                let w_in = self.w_in.of(params);
                {
                    let gw = self.w_in.of_mut(grads);
                    for (i, xi) in trace.x.iter().enumerate() {
                        for j in 0..nq {
                            gw[i * nq + j] += xi * d_pre[j];
                        }
                    }
                }
                for (g, d) in self.b_in.of_mut(grads).iter_mut().zip(&d_pre) {
                    *g += d;
                }
                for (i, dxi) in dx.iter_mut().enumerate() {
                    *dxi = w_in[i * nq..(i + 1) * nq].iter().zip(&d_pre).map(|(w, d)| w * d).sum();
                }
            }
            InputMap::Bilinear => {
                for (taps, d) in self.taps.iter().zip(&d_pre) {
                    for (i, a) in taps {
                        dx[*i] += a * d;
                    }
                }
            }
        }
        Ok(dx)
    }
}
