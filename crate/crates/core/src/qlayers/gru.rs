use alloc::vec;
use alloc::vec::Vec;

use super::classical::{sigmoid, tanh};
use crate::error::{Error, Result};
use crate::gradients::ClipRange;
use crate::param::ParamBuilder;
use crate::vqc::{check_len, LowQubitSpec, LowQubitTrace, LowQubitVqc};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QGruSpec {
    pub input_size: usize,
    pub hidden_size: usize,
    pub n_qubits: usize,
    pub depth: usize,
    pub clip: Option<ClipRange>,
}

impl QGruSpec {
    pub fn new(input_size: usize, hidden_size: usize, n_qubits: usize) -> Self {
        QGruSpec {
            input_size,
            hidden_size,
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

/// GRU-style cell built from five low-qubit VQCs.
///
/// With `v = [h_prev, x]`:
/// `r = σ(vqc_r(v))`, `z = σ(vqc_z(v))`, `h̃ = tanh(vqc_h(v))`,
/// `h' = (1 − z)⊙h_prev + z⊙(r⊙h̃)`, then `y = vqc_y(h')` and
/// `h = vqc_out_h(h')`.
#[derive(Debug, Clone, PartialEq)]
pub struct QGruCell {
    spec: QGruSpec,
    vqc_r: LowQubitVqc,
    vqc_z: LowQubitVqc,
    vqc_h: LowQubitVqc,
    vqc_y: LowQubitVqc,
    vqc_out_h: LowQubitVqc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QGruStepTrace {
    pub h_prev: Vec<f64>,
    pub r: Vec<f64>,
    pub z: Vec<f64>,
    pub h_cand: Vec<f64>,
    pub h_mix: Vec<f64>,
    tr_r: LowQubitTrace,
    tr_z: LowQubitTrace,
    tr_h: LowQubitTrace,
    tr_y: LowQubitTrace,
    tr_out_h: LowQubitTrace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QGruTrace {
    pub steps: Vec<QGruStepTrace>,
    fingerprint: u64,
}

impl QGruCell {
    pub fn new(builder: &mut ParamBuilder, name: &str, spec: QGruSpec) -> Result<Self> {
        if spec.input_size == 0 || spec.hidden_size == 0 {
            return Err(Error::config("QGRU sizes must be at least 1"));
        }
        let cat = spec.input_size + spec.hidden_size;
        let h = spec.hidden_size;
        let mut unit = |suffix: &str, n_in: usize| {
            LowQubitVqc::new(
                builder,
                &alloc::format!("{name}.{suffix}"),
                LowQubitSpec::new(n_in, spec.n_qubits, h)
                    .depth(spec.depth)
                    .clip(spec.clip),
            )
        };
        Ok(QGruCell {
            spec,
            vqc_r: unit("r", cat)?,
            vqc_z: unit("z", cat)?,
            vqc_h: unit("h", cat)?,
            vqc_y: unit("y", h)?,
            vqc_out_h: unit("out_h", h)?,
        })
    }

    pub fn spec(&self) -> &QGruSpec {
        &self.spec
    }

    pub fn units(&self) -> [&LowQubitVqc; 5] {
        [&self.vqc_r, &self.vqc_z, &self.vqc_h, &self.vqc_y, &self.vqc_out_h]
    }

    pub fn n_params(&self) -> usize {
        self.units().iter().map(|u| u.n_params()).sum()
    }

    fn fingerprint(&self, params: &[f64]) -> u64 {
        self.units()
            .iter()
            .fold(0u64, |h, u| h.rotate_left(7) ^ u.fingerprint(params))
    }

    fn step_inner(&self, params: &[f64], x: &[f64], h_prev: &[f64]) -> Result<(Vec<f64>, Vec<f64>, QGruStepTrace)> {
        check_len("QGRU input", x.len(), self.spec.input_size)?;
        check_len("QGRU hidden state", h_prev.len(), self.spec.hidden_size)?;
        let mut v = h_prev.to_vec();
        v.extend_from_slice(x);
        let (pr, tr_r) = self.vqc_r.forward_unchecked(params, &v)?;
        let (pz, tr_z) = self.vqc_z.forward_unchecked(params, &v)?;
        let (ph, tr_h) = self.vqc_h.forward_unchecked(params, &v)?;
        let r: Vec<f64> = pr.iter().map(|a| sigmoid(*a)).collect();
        let z: Vec<f64> = pz.iter().map(|a| sigmoid(*a)).collect();
        let h_cand: Vec<f64> = ph.iter().map(|a| tanh(*a)).collect();
        let h_mix: Vec<f64> = (0..self.spec.hidden_size)
            .map(|i| (1.0 - z[i]) * h_prev[i] + z[i] * r[i] * h_cand[i])
            .collect();
        let (y, tr_y) = self.vqc_y.forward_unchecked(params, &h_mix)?;
        let (h, tr_out_h) = self.vqc_out_h.forward_unchecked(params, &h_mix)?;
        let trace = QGruStepTrace {
            h_prev: h_prev.to_vec(),
            r,
            z,
            h_cand,
            h_mix,
            tr_r,
            tr_z,
            tr_h,
            tr_y,
            tr_out_h,
        };
        Ok((y, h, trace))
    }

    /// One step: returns `(y_t, h_t)`.
    pub fn step(&self, params: &[f64], x: &[f64], h_prev: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let (y, h, _) = self.step_inner(params, x, h_prev)?;
        Ok((y, h))
    }

    /// Unrolls over `xs`, returning every `y_t`, the final hidden state and
    /// the trace for backpropagation through time.
    pub fn forward_sequence(
        &self,
        params: &[f64],
        xs: &[Vec<f64>],
        h0: &[f64],
    ) -> Result<(Vec<Vec<f64>>, Vec<f64>, QGruTrace)> {
        let mut h = h0.to_vec();
        let mut ys = Vec::with_capacity(xs.len());
        let mut steps = Vec::with_capacity(xs.len());
        for x in xs {
            let (y, h_next, tr) = self.step_inner(params, x, &h)?;
            ys.push(y);
            steps.push(tr);
            h = h_next;
        }
        Ok((
            ys,
            h,
            QGruTrace {
                steps,
                fingerprint: self.fingerprint(params),
            },
        ))
    }

    /// Backpropagation through time. `dys[t]` is the gradient on `y_t` and
    /// `dh_last` the gradient on the final hidden state. Returns the input
    /// gradients per step and the gradient on `h0`.
    pub fn backward_sequence(
        &self,
        params: &[f64],
        trace: &QGruTrace,
        dys: &[Vec<f64>],
        dh_last: &[f64],
        grads: &mut [f64],
    ) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
        if trace.fingerprint != self.fingerprint(params) {
            return Err(Error::usage(
                "stale trace: parameters changed since the forward pass that produced it",
            ));
        }
        check_len("QGRU output gradients", dys.len(), trace.steps.len())?;
        let hs = self.spec.hidden_size;
        check_len("QGRU hidden gradient", dh_last.len(), hs)?;
        let mut dh = dh_last.to_vec();
        let mut dxs = vec![Vec::new(); trace.steps.len()];
        for (t, st) in trace.steps.iter().enumerate().rev() {
            let mut dmix = self.vqc_y.backward_unchecked(params, &st.tr_y, &dys[t], grads)?;
            let d_out = self.vqc_out_h.backward_unchecked(params, &st.tr_out_h, &dh, grads)?;
            for (a, b) in dmix.iter_mut().zip(&d_out) {
                *a += b;
            }
            let mut dpr = vec![0.0; hs];
            let mut dpz = vec![0.0; hs];
            let mut dph = vec![0.0; hs];
            let mut dh_prev = vec![0.0; hs];
            for i in 0..hs {
                let (r, z, hc) = (st.r[i], st.z[i], st.h_cand[i]);
                let g = dmix[i];
                dpz[i] = g * (r * hc - st.h_prev[i]) * z * (1.0 - z);
                dpr[i] = g * z * hc * r * (1.0 - r);
                dph[i] = g * z * r * (1.0 - hc * hc);
                dh_prev[i] = g * (1.0 - z);
            }
            let mut dv = self.vqc_r.backward_unchecked(params, &st.tr_r, &dpr, grads)?;
            for (unit, tr, d) in [(&self.vqc_z, &st.tr_z, &dpz), (&self.vqc_h, &st.tr_h, &dph)] {
                for (a, b) in dv.iter_mut().zip(unit.backward_unchecked(params, tr, d, grads)?) {
                    *a += b;
                }
            }
            for (a, b) in dh_prev.iter_mut().zip(&dv[..hs]) {
                *a += b;
            }
            dxs[t] = dv[hs..].to_vec();
            dh = dh_prev;
        }
        Ok((dxs, dh))
    }
}
