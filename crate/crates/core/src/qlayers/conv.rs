use alloc::vec;
use alloc::vec::Vec;

use super::classical::{conv_out_len, scatter_window, window};
use crate::error::{Error, Result};
use crate::gradients::ClipRange;
use crate::param::ParamBuilder;
use crate::vqc::{check_len, InputMap, LowQubitSpec, LowQubitTrace, LowQubitVqc, PlainTrace, PlainVqc};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QConvVariant {
    /// Low-qubit VQC with the given qubit count.
    LowQubit(usize),
    /// One qubit per window sample; needs a single input channel and
    /// `out_channels == kernel`.
    Plain,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QConvSpec {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    pub stride: usize,
    pub variant: QConvVariant,
    pub depth: usize,
    pub clip: Option<ClipRange>,
    pub input_map: InputMap,
}

impl QConvSpec {
    pub fn new(in_channels: usize, out_channels: usize, kernel: usize, stride: usize) -> Self {
        QConvSpec {
            in_channels,
            out_channels,
            kernel,
            stride,
            variant: QConvVariant::LowQubit(4),
            depth: 1,
            clip: Some(ClipRange::DEFAULT),
            input_map: InputMap::Linear,
        }
    }

    pub fn variant(mut self, variant: QConvVariant) -> Self {
        self.variant = variant;
        self
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

#[derive(Debug, Clone, PartialEq)]
enum Unit {
    Low(LowQubitVqc),
    Plain(PlainVqc),
}

#[derive(Debug, Clone, PartialEq)]
enum WindowTrace {
    Low(LowQubitTrace),
    Plain(PlainTrace),
}

/// Quantum 1D convolution: every window is fed through one shared VQC.
#[derive(Debug, Clone, PartialEq)]
pub struct QConv1d {
    spec: QConvSpec,
    unit: Unit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QConvTrace {
    len: usize,
    windows: Vec<WindowTrace>,
    fingerprint: u64,
}

impl QConv1d {
    pub fn new(builder: &mut ParamBuilder, name: &str, spec: QConvSpec) -> Result<Self> {
        conv_out_len(spec.kernel, spec.kernel, spec.stride)?;
        if spec.in_channels == 0 || spec.out_channels == 0 {
            return Err(Error::config("QConv1d needs at least one input and one output channel"));
        }
        let unit = match spec.variant {
            QConvVariant::LowQubit(n_qubits) => {
                let vqc = LowQubitSpec::new(spec.in_channels * spec.kernel, n_qubits, spec.out_channels)
                    .depth(spec.depth)
                    .clip(spec.clip)
                    .input_map(spec.input_map);
                Unit::Low(LowQubitVqc::new(builder, name, vqc)?)
            }
            QConvVariant::Plain => {
                if spec.in_channels != 1 {
                    return Err(Error::config(alloc::format!(
                        "plain QConv1d encodes window samples directly and needs 1 input channel, got {}",
                        spec.in_channels
                    )));
                }
                if spec.out_channels != spec.kernel {
                    return Err(Error::config(alloc::format!(
                        "plain QConv1d measures one channel per qubit: out_channels must be {}",
                        spec.kernel
                    )));
                }
                Unit::Plain(PlainVqc::new(builder, name, spec.kernel, spec.depth)?)
            }
        };
        Ok(QConv1d { spec, unit })
    }

    pub fn spec(&self) -> &QConvSpec {
        &self.spec
    }

    pub fn out_channels(&self) -> usize {
        self.spec.out_channels
    }

    pub fn n_params(&self) -> usize {
        match &self.unit {
            Unit::Low(v) => v.n_params(),
            Unit::Plain(v) => v.n_params(),
        }
    }

    /// The shared low-qubit unit, if this is the low-qubit variant.
    pub fn vqc(&self) -> Option<&LowQubitVqc> {
        match &self.unit {
            Unit::Low(v) => Some(v),
            Unit::Plain(_) => None,
        }
    }

    pub fn out_len(&self, len: usize) -> Result<usize> {
        conv_out_len(len, self.spec.kernel, self.spec.stride)
    }

    fn fingerprint(&self, params: &[f64]) -> u64 {
        match &self.unit {
            Unit::Low(v) => v.fingerprint(params),
            Unit::Plain(v) => crate::param::fingerprint(v.theta().of(params)),
        }
    }

    /// `x` is `in_channels × L` channel-major; the result is
    /// `out_channels × L_out` channel-major.
    pub fn forward(&self, params: &[f64], x: &[f64]) -> Result<(Vec<f64>, QConvTrace)> {
        let c_in = self.spec.in_channels;
        if !x.len().is_multiple_of(c_in) {
            return Err(Error::usage("input is not a whole number of channels"));
        }
        let len = x.len() / c_in;
        let l_out = self.out_len(len)?;
        let c_out = self.spec.out_channels;
        let mut y = vec![0.0; c_out * l_out];
        let mut windows = Vec::with_capacity(l_out);
        for t in 0..l_out {
            let win = window(x, c_in, len, self.spec.kernel, t * self.spec.stride);
            let (col, tr) = match &self.unit {
                Unit::Low(v) => {
                    let (c, tr) = v.forward_unchecked(params, &win)?;
                    (c, WindowTrace::Low(tr))
                }
                Unit::Plain(v) => {
                    let (c, tr) = v.forward_unchecked(params, &win)?;
                    (c, WindowTrace::Plain(tr))
                }
            };
            for (o, v) in col.into_iter().enumerate() {
                y[o * l_out + t] = v;
            }
            windows.push(tr);
        }
        Ok((
            y,
            QConvTrace {
                len,
                windows,
                fingerprint: self.fingerprint(params),
            },
        ))
    }

    /// Accumulates parameter gradients and returns the input gradient when
    /// `want_input` is set.
    pub fn backward(
        &self,
        params: &[f64],
        trace: &QConvTrace,
        upstream: &[f64],
        grads: &mut [f64],
        want_input: bool,
    ) -> Result<Option<Vec<f64>>> {
        if trace.fingerprint != self.fingerprint(params) {
            return Err(Error::usage(
                "stale trace: parameters changed since the forward pass that produced it",
            ));
        }
        let l_out = trace.windows.len();
        let c_in = self.spec.in_channels;
        let c_out = self.spec.out_channels;
        check_len("QConv1d upstream", upstream.len(), c_out * l_out)?;
        let mut dx = want_input.then(|| vec![0.0; c_in * trace.len]);
        for (t, wt) in trace.windows.iter().enumerate() {
            let dcol: Vec<f64> = (0..c_out).map(|o| upstream[o * l_out + t]).collect();
            let dw = match (&self.unit, wt) {
                (Unit::Low(v), WindowTrace::Low(tr)) => Some(v.backward_unchecked(params, tr, &dcol, grads)?),
                (Unit::Plain(v), WindowTrace::Plain(tr)) => {
                    v.backward_unchecked(params, tr, &dcol, grads, want_input)?
                }
                _ => return Err(Error::usage("trace does not belong to this layer")),
            };
            if let (Some(dx), Some(dw)) = (dx.as_mut(), dw) {
                scatter_window(dx, &dw, c_in, trace.len, self.spec.kernel, t * self.spec.stride);
            }
        }
        Ok(dx)
    }
}
