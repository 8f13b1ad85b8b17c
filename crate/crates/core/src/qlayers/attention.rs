use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::classical::{softmax, softmax_backward};
use crate::error::{Error, Result};
use crate::gradients::ClipRange;
use crate::param::ParamBuilder;
use crate::vqc::{check_len, LowQubitSpec, LowQubitTrace, LowQubitVqc};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QAttentionSpec {
    pub model_dim: usize,
    pub n_heads: usize,
    pub n_qubits: usize,
    pub depth: usize,
    pub clip: Option<ClipRange>,
}

impl QAttentionSpec {
    pub fn new(model_dim: usize, n_heads: usize, n_qubits: usize) -> Self {
        QAttentionSpec {
            model_dim,
            n_heads,
            n_qubits,
            depth: 1,
            clip: Some(ClipRange::DEFAULT),
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
}

fn unit(builder: &mut ParamBuilder, name: &str, d: usize, spec: &QAttentionSpec) -> Result<LowQubitVqc> {
    LowQubitVqc::new(
        builder,
        name,
        LowQubitSpec::new(d, spec.n_qubits, d).depth(spec.depth).clip(spec.clip),
    )
}

fn rows_forward(vqc: &LowQubitVqc, params: &[f64], x: &[f64]) -> Result<(Vec<f64>, Vec<LowQubitTrace>)> {
    let mut out = Vec::with_capacity(x.len() / vqc.n_in() * vqc.n_out());
    let mut traces = Vec::with_capacity(x.len() / vqc.n_in());
    for row in x.chunks_exact(vqc.n_in()) {
        let (y, tr) = vqc.forward_unchecked(params, row)?;
        out.extend_from_slice(&y);
        traces.push(tr);
    }
    Ok((out, traces))
}

fn rows_backward(
    vqc: &LowQubitVqc,
    params: &[f64],
    traces: &[LowQubitTrace],
    upstream: &[f64],
    grads: &mut [f64],
) -> Result<Vec<f64>> {
    let mut dx = Vec::with_capacity(traces.len() * vqc.n_in());
    for (tr, d) in traces.iter().zip(upstream.chunks_exact(vqc.n_out())) {
        dx.extend(vqc.backward_unchecked(params, tr, d, grads)?);
    }
    Ok(dx)
}

fn check_matrix(what: &str, m: &[f64], seq: usize, cols: usize) -> Result<()> {
    check_len(what, m.len(), seq * cols)
}

/// Scaled dot-product attention with a VQC on the query path and another on
/// the attended output, applied row by row with shared weights.
#[derive(Debug, Clone, PartialEq)]
pub struct QAttentionHead {
    d_head: usize,
    vqc_in: LowQubitVqc,
    vqc_out: LowQubitVqc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeadTrace {
    pub seq_len: usize,
    pub q_prime: Vec<f64>,
    pub k: Vec<f64>,
    pub v: Vec<f64>,
    /// Attention weights, `seq_len × seq_len`, rows summing to one.
    pub weights: Vec<f64>,
    /// `weights · v`, before the output VQC.
    pub attended: Vec<f64>,
    tr_in: Vec<LowQubitTrace>,
    tr_out: Vec<LowQubitTrace>,
}

impl QAttentionHead {
    pub fn new(builder: &mut ParamBuilder, name: &str, d_head: usize, spec: &QAttentionSpec) -> Result<Self> {
        Ok(QAttentionHead {
            d_head,
            vqc_in: unit(builder, &alloc::format!("{name}.in"), d_head, spec)?,
            vqc_out: unit(builder, &alloc::format!("{name}.out"), d_head, spec)?,
        })
    }

    pub fn units(&self) -> [&LowQubitVqc; 2] {
        [&self.vqc_in, &self.vqc_out]
    }

    pub fn n_params(&self) -> usize {
        self.vqc_in.n_params() + self.vqc_out.n_params()
    }

    /// `q`, `k`, `v` are `seq_len × d_head`, row-major.
    pub fn forward(&self, params: &[f64], q: &[f64], k: &[f64], v: &[f64]) -> Result<(Vec<f64>, HeadTrace)> {
        let dh = self.d_head;
        if q.is_empty() || !q.len().is_multiple_of(dh) {
            return Err(Error::usage(alloc::format!("query rows must have width {dh}")));
        }
        let seq = q.len() / dh;
        check_matrix("keys", k, seq, dh)?;
        check_matrix("values", v, seq, dh)?;
        let (q_prime, tr_in) = rows_forward(&self.vqc_in, params, q)?;
        let scale = 1.0 / (dh as f64).sqrt();
        let mut weights = Vec::with_capacity(seq * seq);
        for i in 0..seq {
            let qi = &q_prime[i * dh..(i + 1) * dh];
            let logits: Vec<f64> = (0..seq)
                .map(|j| qi.iter().zip(&k[j * dh..(j + 1) * dh]).map(|(a, b)| a * b).sum::<f64>() * scale)
                .collect();
            weights.extend(softmax(&logits)?);
        }
        let mut attended = vec![0.0; seq * dh];
        for i in 0..seq {
            for j in 0..seq {
                let a = weights[i * seq + j];
                for c in 0..dh {
                    attended[i * dh + c] += a * v[j * dh + c];
                }
            }
        }
        let (out, tr_out) = rows_forward(&self.vqc_out, params, &attended)?;
        Ok((
            out,
            HeadTrace {
                seq_len: seq,
                q_prime,
                k: k.to_vec(),
                v: v.to_vec(),
                weights,
                attended,
                tr_in,
                tr_out,
            },
        ))
    }

    /// Returns `(dq, dk, dv)`.
    pub(crate) fn backward_unchecked(
        &self,
        params: &[f64],
        trace: &HeadTrace,
        upstream: &[f64],
        grads: &mut [f64],
    ) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let dh = self.d_head;
        let seq = trace.seq_len;
        check_matrix("head upstream", upstream, seq, dh)?;
        let d_att = rows_backward(&self.vqc_out, params, &trace.tr_out, upstream, grads)?;
        let mut dv = vec![0.0; seq * dh];
        let mut dq_prime = vec![0.0; seq * dh];
        let mut dk = vec![0.0; seq * dh];
        let scale = 1.0 / (dh as f64).sqrt();
        for i in 0..seq {
            let a_row = &trace.weights[i * seq..(i + 1) * seq];
            let g_row = &d_att[i * dh..(i + 1) * dh];
            let mut da = vec![0.0; seq];
            for j in 0..seq {
                let vj = &trace.v[j * dh..(j + 1) * dh];
                da[j] = g_row.iter().zip(vj).map(|(g, v)| g * v).sum();
                for c in 0..dh {
                    dv[j * dh + c] += a_row[j] * g_row[c];
                }
            }
            let ds = softmax_backward(a_row, &da);
            for j in 0..seq {
                let s = ds[j] * scale;
                for c in 0..dh {
                    dq_prime[i * dh + c] += s * trace.k[j * dh + c];
                    dk[j * dh + c] += s * trace.q_prime[i * dh + c];
                }
            }
        }
        let dq = rows_backward(&self.vqc_in, params, &trace.tr_in, &dq_prime, grads)?;
        Ok((dq, dk, dv))
    }
}

/// Multi-head attention whose Q, K, V projections, per-head blocks and final
/// projection are all low-qubit VQCs.
#[derive(Debug, Clone, PartialEq)]
pub struct QAttention {
    spec: QAttentionSpec,
    vqc_q: LowQubitVqc,
    vqc_k: LowQubitVqc,
    vqc_v: LowQubitVqc,
    heads: Vec<QAttentionHead>,
    vqc_final: LowQubitVqc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QAttentionTrace {
    pub seq_len: usize,
    pub heads: Vec<HeadTrace>,
    tr_q: Vec<LowQubitTrace>,
    tr_k: Vec<LowQubitTrace>,
    tr_v: Vec<LowQubitTrace>,
    tr_final: Vec<LowQubitTrace>,
    fingerprint: u64,
}

impl QAttention {
    pub fn new(builder: &mut ParamBuilder, name: &str, spec: QAttentionSpec) -> Result<Self> {
        let (d, h) = (spec.model_dim, spec.n_heads);
        if d == 0 || h == 0 || d % h != 0 {
            return Err(Error::config(alloc::format!(
                "model dimension {d} is not divisible into {h} heads"
            )));
        }
        let vqc_q = unit(builder, &alloc::format!("{name}.q"), d, &spec)?;
        let vqc_k = unit(builder, &alloc::format!("{name}.k"), d, &spec)?;
        let vqc_v = unit(builder, &alloc::format!("{name}.v"), d, &spec)?;
        let heads = (0..h)
            .map(|i| QAttentionHead::new(builder, &alloc::format!("{name}.head{i}"), d / h, &spec))
            .collect::<Result<Vec<_>>>()?;
        let vqc_final = unit(builder, &alloc::format!("{name}.final"), d, &spec)?;
        Ok(QAttention {
            spec,
            vqc_q,
            vqc_k,
            vqc_v,
            heads,
            vqc_final,
        })
    }

    pub fn spec(&self) -> &QAttentionSpec {
        &self.spec
    }

    pub fn heads(&self) -> &[QAttentionHead] {
        &self.heads
    }

    /// Projection units in the order Q, K, V, final.
    pub fn projections(&self) -> [&LowQubitVqc; 4] {
        [&self.vqc_q, &self.vqc_k, &self.vqc_v, &self.vqc_final]
    }

    pub fn n_params(&self) -> usize {
        self.projections().iter().map(|u| u.n_params()).sum::<usize>()
            + self.heads.iter().map(|h| h.n_params()).sum::<usize>()
    }

    fn fingerprint(&self, params: &[f64]) -> u64 {
        self.projections()
            .into_iter()
            .chain(self.heads.iter().flat_map(|h| h.units()))
            .fold(0u64, |h, u| h.rotate_left(7) ^ u.fingerprint(params))
    }

    /// `x` is `seq_len × model_dim`, row-major; so is the result.
    pub fn forward(&self, params: &[f64], x: &[f64]) -> Result<(Vec<f64>, QAttentionTrace)> {
        let d = self.spec.model_dim;
        if x.is_empty() || !x.len().is_multiple_of(d) {
            return Err(Error::usage(alloc::format!("attention input rows must have width {d}")));
        }
        let seq = x.len() / d;
        let dh = d / self.spec.n_heads;
        let (q, tr_q) = rows_forward(&self.vqc_q, params, x)?;
        let (k, tr_k) = rows_forward(&self.vqc_k, params, x)?;
        let (v, tr_v) = rows_forward(&self.vqc_v, params, x)?;
        let mut concat = vec![0.0; seq * d];
        let mut head_traces = Vec::with_capacity(self.heads.len());
        for (hi, head) in self.heads.iter().enumerate() {
            let slice = |m: &[f64]| -> Vec<f64> {
                m.chunks_exact(d)
                    .flat_map(|row| row[hi * dh..(hi + 1) * dh].iter().copied())
                    .collect()
            };
            let (out, tr) = head.forward(params, &slice(&q), &slice(&k), &slice(&v))?;
            for (i, row) in out.chunks_exact(dh).enumerate() {
                concat[i * d + hi * dh..i * d + (hi + 1) * dh].copy_from_slice(row);
            }
            head_traces.push(tr);
        }
        let (out, tr_final) = rows_forward(&self.vqc_final, params, &concat)?;
        Ok((
            out,
            QAttentionTrace {
                seq_len: seq,
                heads: head_traces,
                tr_q,
                tr_k,
                tr_v,
                tr_final,
                fingerprint: self.fingerprint(params),
            },
        ))
    }

    /// Accumulates parameter gradients and returns the input gradient.
    pub fn backward(
        &self,
        params: &[f64],
        trace: &QAttentionTrace,
        upstream: &[f64],
        grads: &mut [f64],
    ) -> Result<Vec<f64>> {
        if trace.fingerprint != self.fingerprint(params) {
            return Err(Error::usage(
                "stale trace: parameters changed since the forward pass that produced it",
            ));
        }
        let d = self.spec.model_dim;
        let seq = trace.seq_len;
        let dh = d / self.spec.n_heads;
        check_matrix("attention upstream", upstream, seq, d)?;
        let d_concat = rows_backward(&self.vqc_final, params, &trace.tr_final, upstream, grads)?;
        let mut dq = vec![0.0; seq * d];
        let mut dk = vec![0.0; seq * d];
        let mut dv = vec![0.0; seq * d];
        for (hi, (head, tr)) in self.heads.iter().zip(&trace.heads).enumerate() {
            let up: Vec<f64> = d_concat
                .chunks_exact(d)
                .flat_map(|row| row[hi * dh..(hi + 1) * dh].iter().copied())
                .collect();
            let (gq, gk, gv) = head.backward_unchecked(params, tr, &up, grads)?;
            for i in 0..seq {
                let dst = i * d + hi * dh..i * d + (hi + 1) * dh;
                let src = i * dh..(i + 1) * dh;
                dq[dst.clone()].copy_from_slice(&gq[src.clone()]);
                dk[dst.clone()].copy_from_slice(&gk[src.clone()]);
                dv[dst].copy_from_slice(&gv[src]);
            }
        }
        let mut dx = rows_backward(&self.vqc_q, params, &trace.tr_q, &dq, grads)?;
        for (unit, trs, g) in [(&self.vqc_k, &trace.tr_k, &dk), (&self.vqc_v, &trace.tr_v, &dv)] {
            for (a, b) in dx.iter_mut().zip(rows_backward(unit, params, trs, g, grads)?) {
                *a += b;
            }
        }
        Ok(dx)
    }
}
