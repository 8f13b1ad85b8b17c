//! Gradient engine: the parameter-shift rule for circuit angles, the
//! encoder chain factor through `arctan` and the clip, and a central
//! finite-difference oracle for verification.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;
use core::ops::Deref;

use crate::error::{Error, Result};
use crate::qsim::Circuit;

/// One derivative per trainable parameter, all finite.
#[derive(Debug, Clone, PartialEq)]
pub struct GradVector(Vec<f64>);

impl GradVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(alloc::format!("gradient entry {i} is {}", values[i])));
        }
        Ok(GradVector(values))
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for GradVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Shift used by the two-term rule; exact for generators with eigenvalues ±½.
pub const SHIFT: f64 = FRAC_PI_2;

/// `∂⟨Z_observable⟩/∂θ_k = (E(θ_k + π/2) − E(θ_k − π/2)) / 2` for every
/// trainable slot of `circuit`.
pub fn param_shift_grad(circuit: &Circuit, params: &[f64], observable: usize) -> Result<GradVector> {
    if params.len() != circuit.n_params() {
        return Err(Error::usage(alloc::format!(
            "circuit has {} trainable angles, got {} values",
            circuit.n_params(),
            params.len()
        )));
    }
    if observable >= circuit.n_qubits() {
        return Err(Error::usage(alloc::format!(
            "observable qubit {observable} out of range"
        )));
    }
    for (k, slot) in circuit.slots().iter().enumerate() {
        let op = &circuit.ops()[slot.op];
        if !op.is_shiftable(slot.angle) {
            return Err(Error::UnsupportedGate(alloc::format!(
                "parameter {k} sits on {:?}",
                op.kind()
            )));
        }
    }
    let mut shifted = params.to_vec();
    let mut out = Vec::with_capacity(params.len());
    for k in 0..params.len() {
        shifted[k] = params[k] + SHIFT;
        let plus = circuit.run(&shifted)?.expectation_z(observable)?;
        shifted[k] = params[k] - SHIFT;
        let minus = circuit.run(&shifted)?.expectation_z(observable)?;
        shifted[k] = params[k];
        out.push((plus - minus) / 2.0);
    }
    GradVector::new(out)
}

pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// Central differences `(f(p + h e_k) − f(p − h e_k)) / 2h`.
pub fn finite_diff_grad<F>(f: F, params: &[f64], h: f64) -> Result<GradVector>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let mut p = params.to_vec();
    let mut out = Vec::with_capacity(params.len());
    for k in 0..params.len() {
        p[k] = params[k] + h;
        let plus = f(&p)?;
        p[k] = params[k] - h;
        let minus = f(&p)?;
        p[k] = params[k];
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::NonFinite(alloc::format!(
                "objective at parameter {k} ± h evaluated to {plus} / {minus}"
            )));
        }
        out.push((plus - minus) / (2.0 * h));
    }
    GradVector::new(out)
}

/// Inclusive clip interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClipRange {
    pub lo: f64,
    pub hi: f64,
}

impl ClipRange {
    pub const DEFAULT: ClipRange = ClipRange { lo: -3.0, hi: 3.0 };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::config(alloc::format!(
                "clip bounds need lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(ClipRange { lo, hi })
    }

    pub fn apply(&self, v: f64) -> f64 {
        v.max(self.lo).min(self.hi)
    }

    /// Derivative of the clamp: 1 inside the interval, 0 where it saturates.
    pub fn passes(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }
}

/// Derivative of the encoder output with respect to the linear weights
/// feeding one encoding angle.
///
/// With `y = clip(w·x)` and angle `arctan(y)`, each weight receives
/// `circuit_grad · 1/(1 + y²) · x_i`, and nothing when the clamp saturates.
pub fn encoder_chain_grad(
    x: &[f64],
    w_row: &[f64],
    circuit_grad_wrt_angle: f64,
    y_pre: f64,
    clip: Option<ClipRange>,
) -> Result<GradVector> {
    if x.len() != w_row.len() {
        return Err(Error::usage(alloc::format!(
            "input has {} entries, weight row {}",
            x.len(),
            w_row.len()
        )));
    }
    let factor = match clip {
        Some(c) if !c.passes(y_pre) => 0.0,
        _ => {
            let y = clip.map_or(y_pre, |c| c.apply(y_pre));
            circuit_grad_wrt_angle / (1.0 + y * y)
        }
    };
    GradVector::new(x.iter().map(|xi| factor * xi).collect())
}

/// Relative error with a floor on the denominator, so that gradients below
/// the floor are judged on absolute error `tol · floor`.
pub fn relative_error(a: f64, b: f64) -> f64 {
    const FLOOR: f64 = 1e-3;
    (a - b).abs() / a.abs().max(b.abs()).max(FLOOR)
}

/// Largest [`relative_error`] between two gradient vectors.
pub fn max_relative_error(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| relative_error(*x, *y)).fold(0.0, f64::max)
}
