//! Small end-to-end classifiers over the hybrid layers.
//!
//! `QM5Mini` is a two-stage quantum convolution front end over raw
//! waveforms: `QConv1d(k=8, s=4) → relu → maxpool(4) → QConv1d(k=4, s=2) →
//! relu → global average → linear`. `M5Mini` is the same stack with
//! classical convolutions. `QTransformerMini` embeds each row of a
//! `seq_len × features` input, adds sinusoidal positions, runs one residual
//! quantum attention block and a residual feed-forward block, then
//! mean-pools into a linear classifier.

mod spec;

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::gradients::ClipRange;
use crate::param::{ParamBuilder, ParamLayout};
use crate::qlayers::{
    maxpool1d, Conv1d, Linear, QAttention, QAttentionSpec, QAttentionTrace, QConv1d, QConvSpec, QConvTrace,
    QConvVariant,
};
use crate::tensor::Tensor;
use crate::vqc::{check_len, InputMap};

pub use spec::{parse_kv, LtVariant, ModelKind, ModelSpec, VqcVariant, CONV1, CONV2, POOL};

#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone, PartialEq)]
enum ConvLayer {
    Classical(Conv1d),
    Quantum(QConv1d),
}

#[derive(Debug, Clone, PartialEq)]
enum ConvTrace {
    Classical(Vec<f64>),
    Quantum(QConvTrace),
}

impl ConvLayer {
    fn n_params(&self) -> usize {
        match self {
            ConvLayer::Classical(c) => c.n_params(),
            ConvLayer::Quantum(q) => q.n_params(),
        }
    }

    fn out_channels(&self) -> usize {
        match self {
            ConvLayer::Classical(c) => c.out_channels(),
            ConvLayer::Quantum(q) => q.out_channels(),
        }
    }

    fn forward(&self, params: &[f64], x: &[f64]) -> Result<(Vec<f64>, ConvTrace)> {
        match self {
            ConvLayer::Classical(c) => Ok((c.forward(params, x)?, ConvTrace::Classical(x.to_vec()))),
            ConvLayer::Quantum(q) => {
                let (y, tr) = q.forward(params, x)?;
                Ok((y, ConvTrace::Quantum(tr)))
            }
        }
    }

    fn backward(
        &self,
        params: &[f64],
        trace: &ConvTrace,
        upstream: &[f64],
        grads: &mut [f64],
        want_input: bool,
    ) -> Result<Option<Vec<f64>>> {
        match (self, trace) {
            (ConvLayer::Classical(c), ConvTrace::Classical(x)) => c.backward(params, x, upstream, grads).map(Some),
            (ConvLayer::Quantum(q), ConvTrace::Quantum(tr)) => q.backward(params, tr, upstream, grads, want_input),
            _ => Err(Error::usage("trace does not belong to this model")),
        }
    }
}

#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone, PartialEq)]
enum Net {
    Conv {
        conv1: ConvLayer,
        conv2: ConvLayer,
        head: Linear,
    },
    Transformer {
        embed: Linear,
        attn: QAttention,
        ff1: Linear,
        ff2: Linear,
        head: Linear,
        positions: Vec<f64>,
    },
}

/// Per-sample intermediates for [`Model::backward`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModelTrace(TraceInner);

#[derive(Debug, Clone, PartialEq)]
enum TraceInner {
    Conv {
        tr1: ConvTrace,
        a1: Vec<f64>,
        argmax: Vec<usize>,
        tr2: ConvTrace,
        a2: Vec<f64>,
        feat: Vec<f64>,
    },
    Transformer {
        x: Vec<f64>,
        attn: QAttentionTrace,
        x1: Vec<f64>,
        hidden: Vec<f64>,
        pooled: Vec<f64>,
    },
}

/// A network plus its flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    spec: ModelSpec,
    layout: ParamLayout,
    params: Vec<f64>,
    net: Net,
}

fn sinusoidal_positions(seq: usize, d: usize) -> Vec<f64> {
    let mut pe = vec![0.0; seq * d];
    for pos in 0..seq {
        for i in 0..d {
            let rate = 10000f64.powf((2 * (i / 2)) as f64 / d as f64);
            let a = pos as f64 / rate;
            pe[pos * d + i] = if i % 2 == 0 { a.sin() } else { a.cos() };
        }
    }
    pe
}

/// Builds the network described by `spec` with parameters drawn from `seed`.
pub fn build_model(spec: ModelSpec, seed: u64) -> Result<Model> {
    spec.validate()?;
    let mut b = ParamBuilder::new(seed);
    let clip = spec.clip_enabled.then_some(ClipRange::DEFAULT);
    let input_map = match spec.lt_variant {
        LtVariant::Fc => InputMap::Linear,
        LtVariant::Bilinear => InputMap::Bilinear,
    };
    let [w1, w2] = spec.widths;
    let net = match spec.kind {
        ModelKind::M5Mini => Net::Conv {
            conv1: ConvLayer::Classical(Conv1d::new(&mut b, "conv1", 1, w1, CONV1.0, CONV1.1)?),
            conv2: ConvLayer::Classical(Conv1d::new(&mut b, "conv2", w1, w2, CONV2.0, CONV2.1)?),
            head: Linear::new(&mut b, "head", w2, spec.n_classes)?,
        },
        ModelKind::QM5Mini => {
            let (v1, q2) = match spec.vqc_variant {
                VqcVariant::LowQubit => (QConvVariant::LowQubit(spec.n_qubits), spec.n_qubits),
                // Every circuit sized to its kernel; the second stage has
                // several input channels and so keeps the low-qubit form.
                VqcVariant::Plain => (QConvVariant::Plain, CONV2.0),
            };
            let c1 = QConvSpec::new(1, w1, CONV1.0, CONV1.1)
                .variant(v1)
                .depth(spec.depth)
                .clip(clip)
                .input_map(input_map);
            let c2 = QConvSpec::new(w1, w2, CONV2.0, CONV2.1)
                .variant(QConvVariant::LowQubit(q2))
                .depth(spec.depth)
                .clip(clip)
                .input_map(input_map);
            Net::Conv {
                conv1: ConvLayer::Quantum(QConv1d::new(&mut b, "conv1", c1)?),
                conv2: ConvLayer::Quantum(QConv1d::new(&mut b, "conv2", c2)?),
                head: Linear::new(&mut b, "head", w2, spec.n_classes)?,
            }
        }
        ModelKind::QTransformerMini => {
            let attn = QAttentionSpec::new(w1, spec.n_heads, spec.n_qubits)
                .depth(spec.depth)
                .clip(clip);
            Net::Transformer {
                embed: Linear::new(&mut b, "embed", spec.features(), w1)?,
                attn: QAttention::new(&mut b, "attn", attn)?,
                ff1: Linear::new(&mut b, "ff1", w1, w2)?,
                ff2: Linear::new(&mut b, "ff2", w2, w1)?,
                head: Linear::new(&mut b, "head", w1, spec.n_classes)?,
                positions: sinusoidal_positions(spec.seq_len, w1),
            }
        }
    };
    let (layout, params) = b.finish();
    Ok(Model {
        spec,
        layout,
        params,
        net,
    })
}

impl Model {
    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn layout(&self) -> &ParamLayout {
        &self.layout
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    /// Replaces all parameters; the length must match the layout.
    pub fn set_params(&mut self, params: Vec<f64>) -> Result<()> {
        check_len("parameter vector", params.len(), self.layout.total())?;
        self.params = params;
        Ok(())
    }

    /// Parameter counts per layer, in declaration order.
    pub fn layer_param_counts(&self) -> Vec<(&'static str, usize)> {
        match &self.net {
            Net::Conv { conv1, conv2, head } => vec![
                ("conv1", conv1.n_params()),
                ("conv2", conv2.n_params()),
                ("head", head.n_params()),
            ],
            Net::Transformer {
                embed,
                attn,
                ff1,
                ff2,
                head,
                ..
            } => vec![
                ("embed", embed.n_params()),
                ("attn", attn.n_params()),
                ("ff1", ff1.n_params()),
                ("ff2", ff2.n_params()),
                ("head", head.n_params()),
            ],
        }
    }

    /// Logits for a batch shaped `[B, input_length]`, `[B, 1, L]` or
    /// `[B, seq_len, features]`.
    pub fn forward(&self, batch: &Tensor) -> Result<Tensor> {
        let shape = batch.shape();
        let per: usize = shape[1..].iter().product();
        if shape.len() < 2 || per != self.spec.input_length {
            return Err(Error::usage(alloc::format!(
                "batch shape {:?} does not carry {} values per sample",
                shape,
                self.spec.input_length
            )));
        }
        let mut out = Vec::with_capacity(shape[0] * self.spec.n_classes);
        for i in 0..shape[0] {
            out.extend(self.logits(batch.row(i))?);
        }
        Tensor::new(&[shape[0], self.spec.n_classes], out)
    }

    pub fn logits(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.trace_with(&self.params, x)?.0)
    }

    /// Logits computed against an arbitrary parameter vector of this layout.
    pub fn logits_with(&self, params: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.trace_with(params, x)?.0)
    }

    pub fn trace(&self, x: &[f64]) -> Result<(Vec<f64>, ModelTrace)> {
        self.trace_with(&self.params, x)
    }

    fn trace_with(&self, params: &[f64], x: &[f64]) -> Result<(Vec<f64>, ModelTrace)> {
        check_len("model input", x.len(), self.spec.input_length)?;
        check_len("parameter vector", params.len(), self.layout.total())?;
        match &self.net {
            Net::Conv { conv1, conv2, head } => {
                let (a1, tr1) = conv1.forward(params, x)?;
                let c1 = conv1.out_channels();
                let l1 = a1.len() / c1;
                let mut pooled = Vec::new();
                let mut argmax = Vec::new();
                for c in 0..c1 {
                    let row: Vec<f64> = a1[c * l1..(c + 1) * l1].iter().map(|v| v.max(0.0)).collect();
                    let (vals, idx) = maxpool1d(&row, POOL)?;
                    pooled.extend(vals);
                    argmax.extend(idx.into_iter().map(|i| c * l1 + i));
                }
                let (a2, tr2) = conv2.forward(params, &pooled)?;
                let c2 = conv2.out_channels();
                let l2 = a2.len() / c2;
                let feat: Vec<f64> = a2
                    .chunks_exact(l2)
                    .map(|row| row.iter().map(|v| v.max(0.0)).sum::<f64>() / l2 as f64)
                    .collect();
                let logits = head.forward(params, &feat)?;
                Ok((
                    logits,
                    ModelTrace(TraceInner::Conv {
                        tr1,
                        a1,
                        argmax,
                        tr2,
                        a2,
                        feat,
                    }),
                ))
            }
            Net::Transformer {
                embed,
                attn,
                ff1,
                ff2,
                head,
                positions,
            } => {
                let d = self.spec.widths[0];
                let seq = self.spec.seq_len;
                let mut e = Vec::with_capacity(seq * d);
                for row in x.chunks_exact(self.spec.features()) {
                    e.extend(embed.forward(params, row)?);
                }
                for (v, p) in e.iter_mut().zip(positions) {
                    *v += p;
                }
                let (a, attn_tr) = attn.forward(params, &e)?;
                let x1: Vec<f64> = e.iter().zip(&a).map(|(u, v)| u + v).collect();
                let mut hidden = Vec::with_capacity(seq * self.spec.widths[1]);
                let mut pooled = vec![0.0; d];
                for row in x1.chunks_exact(d) {
                    let h = ff1.forward(params, row)?;
                    let h_relu: Vec<f64> = h.iter().map(|v| v.max(0.0)).collect();
                    let f = ff2.forward(params, &h_relu)?;
                    for c in 0..d {
                        pooled[c] += (row[c] + f[c]) / seq as f64;
                    }
                    hidden.extend(h);
                }
                let logits = head.forward(params, &pooled)?;
                Ok((
                    logits,
                    ModelTrace(TraceInner::Transformer {
                        x: x.to_vec(),
                        attn: attn_tr,
                        x1,
                        hidden,
                        pooled,
                    }),
                ))
            }
        }
    }

    /// Accumulates `d loss / d params` into `grads` given the gradient on
    /// this sample's logits.
    pub fn backward(&self, trace: &ModelTrace, dlogits: &[f64], grads: &mut [f64]) -> Result<()> {
        self.backward_with(&self.params, trace, dlogits, grads)
    }

    pub fn backward_with(&self, params: &[f64], trace: &ModelTrace, dlogits: &[f64], grads: &mut [f64]) -> Result<()> {
        check_len("logit gradient", dlogits.len(), self.spec.n_classes)?;
        check_len("gradient buffer", grads.len(), self.layout.total())?;
        match (&self.net, &trace.0) {
            (
                Net::Conv { conv1, conv2, head },
                TraceInner::Conv {
                    tr1,
                    a1,
                    argmax,
                    tr2,
                    a2,
                    feat,
                },
            ) => {
                let dfeat = head.backward(params, feat, dlogits, grads)?;
                let l2 = a2.len() / dfeat.len();
                let mut da2 = vec![0.0; a2.len()];
                for (o, g) in dfeat.iter().enumerate() {
                    for t in 0..l2 {
                        if a2[o * l2 + t] > 0.0 {
                            da2[o * l2 + t] = g / l2 as f64;
                        }
                    }
                }
                let dpooled = conv2
                    .backward(params, tr2, &da2, grads, true)?
                    .ok_or_else(|| Error::usage("missing input gradient"))?;
                let mut da1 = vec![0.0; a1.len()];
                for (g, idx) in dpooled.iter().zip(argmax) {
                    if a1[*idx] > 0.0 {
                        da1[*idx] += g;
                    }
                }
                conv1.backward(params, tr1, &da1, grads, false)?;
                Ok(())
            }
            (
                Net::Transformer {
                    embed,
                    attn,
                    ff1,
                    ff2,
                    head,
                    ..
                },
                TraceInner::Transformer {
                    x,
                    attn: attn_tr,
                    x1,
                    hidden,
                    pooled,
                },
            ) => {
                let d = self.spec.widths[0];
                let hw = self.spec.widths[1];
                let seq = self.spec.seq_len;
                let dpool = head.backward(params, pooled, dlogits, grads)?;
                let dx2: Vec<f64> = dpool.iter().map(|g| g / seq as f64).collect();
                let mut dx1 = Vec::with_capacity(seq * d);
                for (row, h) in x1.chunks_exact(d).zip(hidden.chunks_exact(hw)) {
                    let h_relu: Vec<f64> = h.iter().map(|v| v.max(0.0)).collect();
                    let mut dh = ff2.backward(params, &h_relu, &dx2, grads)?;
                    for (g, v) in dh.iter_mut().zip(h) {
                        if *v <= 0.0 {
                            *g = 0.0;
                        }
                    }
                    let dr = ff1.backward(params, row, &dh, grads)?;
                    dx1.extend(dr.iter().zip(&dx2).map(|(a, b)| a + b));
                }
                let da = attn.backward(params, attn_tr, &dx1, grads)?;
                for ((xrow, de_row), da_row) in x
                    .chunks_exact(self.spec.features())
                    .zip(dx1.chunks_exact(d))
                    .zip(da.chunks_exact(d))
                {
                    let de: Vec<f64> = de_row.iter().zip(da_row).map(|(a, b)| a + b).collect();
                    embed.backward(params, xrow, &de, grads)?;
                }
                Ok(())
            }
            _ => Err(Error::usage("trace does not belong to this model")),
        }
    }
}

#[cfg(test)]
mod tests;
