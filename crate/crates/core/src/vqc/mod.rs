//! Circuit layers: the plain VQC, whose qubit count equals its input width,
//! and the low-qubit VQC, which squeezes any input width into a few qubits
//! with a learnable linear map and a clip, and expands the measurements back
//! out with a second linear map.

mod kernel;
mod lowqubit;
mod plain;

pub use lowqubit::{InputMap, LowQubitSpec, LowQubitTrace, LowQubitVqc};
pub use plain::{PlainTrace, PlainVqc};

pub(crate) use kernel::Kernel;

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::gradients::ClipRange;
use crate::qsim::{Circuit, GateOp, StateVector};

/// Most qubits a VQC layer may use.
pub const MAX_VQC_QUBITS: usize = 10;

/// Angles per qubit per variational block (one U3).
pub const ROTATION_PARAMS_PER_QUBIT: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VqcConfig {
    n_qubits: usize,
    depth: usize,
}

impl VqcConfig {
    pub fn new(n_qubits: usize, depth: usize) -> Result<Self> {
        if !(2..=MAX_VQC_QUBITS).contains(&n_qubits) {
            return Err(Error::config(alloc::format!(
                "VQC qubit count must be in 2..={MAX_VQC_QUBITS}, got {n_qubits}"
            )));
        }
        if depth == 0 {
            return Err(Error::config("VQC depth must be at least 1"));
        }
        Ok(VqcConfig { n_qubits, depth })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Rotation angles in the variational part: `depth · n_qubits · 3`.
    pub fn n_rotation_params(&self) -> usize {
        self.depth * self.n_qubits * ROTATION_PARAMS_PER_QUBIT
    }
}

/// `min(hi, max(lo, v))`.
pub fn clip(v: f64, lo: f64, hi: f64) -> Result<f64> {
    Ok(ClipRange::new(lo, hi)?.apply(v))
}

/// `⨂_i RY(arctan(y1_i))|0⟩`.
pub fn encode(y1: &[f64]) -> Result<StateVector> {
    let mut state = StateVector::zero(y1.len())?;
    for (q, y) in y1.iter().enumerate() {
        state.apply(&GateOp::Ry {
            target: q,
            angle: y.atan(),
        })?;
    }
    Ok(state)
}

/// One variational block: CNOT chain `i → i+1`, then `U3(θ_i)` on each qubit.
pub fn variational_block(mut state: StateVector, theta_layer: &[[f64; 3]]) -> Result<StateVector> {
    let n = state.n_qubits();
    if theta_layer.len() != n {
        return Err(Error::usage(alloc::format!(
            "block has {} angle triples for a {n}-qubit state",
            theta_layer.len()
        )));
    }
    for i in 0..n.saturating_sub(1) {
        state.apply(&GateOp::Cnot {
            control: i,
            target: i + 1,
        })?;
    }
    for (q, angles) in theta_layer.iter().enumerate() {
        state.apply(&GateOp::U3 {
            target: q,
            angles: *angles,
        })?;
    }
    Ok(state)
}

/// The VQC as a generic [`Circuit`]: `n_qubits` trainable encoding RY angles
/// followed by `depth` blocks whose U3 angles are trainable. Parameter order
/// is `[encoding angles…, θ(block, qubit, angle)…]`.
pub fn reference_circuit(config: VqcConfig) -> Result<Circuit> {
    let n = config.n_qubits;
    let mut c = Circuit::new(n)?;
    for q in 0..n {
        c.push_trainable(GateOp::Ry { target: q, angle: 0.0 })?;
    }
    for _ in 0..config.depth {
        for i in 0..n - 1 {
            c.push(GateOp::Cnot {
                control: i,
                target: i + 1,
            })?;
        }
        for q in 0..n {
            c.push_trainable(GateOp::U3 {
                target: q,
                angles: [0.0; 3],
            })?;
        }
    }
    Ok(c)
}

pub(crate) fn check_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::usage(alloc::format!("{what} has length {got}, expected {want}")));
    }
    Ok(())
}

fn arctan_all(y: &[f64]) -> Vec<f64> {
    y.iter().map(|v| v.atan()).collect()
}
