use alloc::vec::Vec;

use super::{arctan_all, check_len, Kernel, VqcConfig, MAX_VQC_QUBITS};
use crate::error::{Error, Result};
use crate::param::{fingerprint, ParamBuilder, ParamRange};

/// VQC with one qubit per input feature and no classical maps around it:
/// `x → RY(arctan x_i) → blocks → ⟨Z_i⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlainVqc {
    config: VqcConfig,
    theta: ParamRange,
    kernel: Kernel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlainTrace {
    pub x: Vec<f64>,
    pub q: Vec<f64>,
    fingerprint: u64,
}

impl PlainVqc {
    pub fn new(builder: &mut ParamBuilder, name: &str, n_in: usize, depth: usize) -> Result<Self> {
        if n_in > MAX_VQC_QUBITS {
            return Err(Error::QubitBudget {
                requested: n_in,
                max: MAX_VQC_QUBITS,
            });
        }
        let config = VqcConfig::new(n_in, depth)?;
        let theta = builder.uniform(&alloc::format!("{name}.theta"), config.n_rotation_params(), 0.1);
        Ok(PlainVqc {
            config,
            theta,
            kernel: Kernel::new(n_in, depth),
        })
    }

    pub fn config(&self) -> VqcConfig {
        self.config
    }

    pub fn n_qubits(&self) -> usize {
        self.config.n_qubits()
    }

    pub fn theta(&self) -> ParamRange {
        self.theta
    }

    pub fn n_params(&self) -> usize {
        self.theta.len
    }

    pub fn forward(&self, params: &[f64], x: &[f64]) -> Result<(Vec<f64>, PlainTrace)> {
        let (q, mut trace) = self.forward_unchecked(params, x)?;
        trace.fingerprint = fingerprint(self.theta.of(params));
        Ok((q, trace))
    }

    pub(crate) fn forward_unchecked(&self, params: &[f64], x: &[f64]) -> Result<(Vec<f64>, PlainTrace)> {
        if x.len() > MAX_VQC_QUBITS {
            return Err(Error::QubitBudget {
                requested: x.len(),
                max: MAX_VQC_QUBITS,
            });
        }
        check_len("plain VQC input", x.len(), self.config.n_qubits())?;
        let q = self.kernel.expectations(&arctan_all(x), self.theta.of(params));
        Ok((
            q.clone(),
            PlainTrace {
                x: x.to_vec(),
                q,
                fingerprint: 0,
            },
        ))
    }

    /// Accumulates rotation-angle gradients into `grads`. Returns the input
    /// gradient when `want_input` is set; skipping it saves the encoding
    /// shifts, which dominate the cost.
    pub fn backward(
        &self,
        params: &[f64],
        trace: &PlainTrace,
        upstream: &[f64],
        grads: &mut [f64],
        want_input: bool,
    ) -> Result<Option<Vec<f64>>> {
        if trace.fingerprint != fingerprint(self.theta.of(params)) {
            return Err(Error::usage(
                "stale trace: parameters changed since the forward pass that produced it",
            ));
        }
        self.backward_unchecked(params, trace, upstream, grads, want_input)
    }

    pub(crate) fn backward_unchecked(
        &self,
        params: &[f64],
        trace: &PlainTrace,
        upstream: &[f64],
        grads: &mut [f64],
        want_input: bool,
    ) -> Result<Option<Vec<f64>>> {
        let n = self.config.n_qubits();
        check_len("upstream gradient", upstream.len(), n)?;
        check_len("trace input", trace.x.len(), n)?;
        let kg = self
            .kernel
            .backward(&arctan_all(&trace.x), self.theta.of(params), upstream, want_input);
        for (g, d) in self.theta.of_mut(grads).iter_mut().zip(&kg.theta) {
            *g += d;
        }
        Ok(want_input.then(|| kg.angles.iter().zip(&trace.x).map(|(d, x)| d / (1.0 + x * x)).collect()))
    }
}
