//! Exact statevector simulation for registers of up to 12 qubits.

mod circuit;
pub mod dense;
mod gate;
mod state;

pub use circuit::{Circuit, ParamSlot};
pub use gate::{mat2_mul, rx_matrix, ry_matrix, rz_matrix, u3_matrix, GateKind, GateMatrix, GateOp, Mat2};
pub use num_complex::Complex64 as C64;
pub use state::{StateVector, MAX_QUBITS};

#[allow(unused_imports)]
pub(crate) use state::{apply_cnot, apply_single};

use crate::error::Result;

pub fn zero_state(n_qubits: usize) -> Result<StateVector> {
    StateVector::zero(n_qubits)
}

pub fn apply_gate(mut state: StateVector, gate: &GateOp) -> Result<StateVector> {
    state.apply(gate)?;
    Ok(state)
}

pub fn run_circuit(circuit: &Circuit, bound_params: &[f64]) -> Result<StateVector> {
    circuit.run(bound_params)
}

pub fn expectation_z(state: &StateVector, qubit: usize) -> Result<f64> {
    state.expectation_z(qubit)
}
