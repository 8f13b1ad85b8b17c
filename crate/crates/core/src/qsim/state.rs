use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;

use super::gate::{GateMatrix, GateOp, Mat2};
use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 12;

/// Amplitudes of an n-qubit register. Qubit 0 is the least significant bit
/// of the amplitude index.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// `|0…0⟩` on `n_qubits` qubits (1..=12).
    pub fn zero(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::config(alloc::format!(
                "qubit count must be in 1..={MAX_QUBITS}, got {n_qubits}"
            )));
        }
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = C64::new(1.0, 0.0);
        Ok(StateVector { n_qubits, amps })
    }

    /// Wraps raw amplitudes. The length must be a power of two within the
    /// qubit cap; normalization is the caller's responsibility.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let n = amps.len();
        if !n.is_power_of_two() || !(2..=(1 << MAX_QUBITS)).contains(&n) {
            return Err(Error::shape(alloc::format!(
                "amplitude count {n} is not 2^k for k in 1..={MAX_QUBITS}"
            )));
        }
        Ok(StateVector {
            n_qubits: n.trailing_zeros() as usize,
            amps,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(Error::usage(alloc::format!(
                "qubit {q} out of range for a {}-qubit state",
                self.n_qubits
            )));
        }
        Ok(())
    }

    pub fn apply(&mut self, gate: &GateOp) -> Result<()> {
        self.check_qubit(gate.target())?;
        match *gate {
            GateOp::Cnot { control, target } => {
                self.check_qubit(control)?;
                if control == target {
                    return Err(Error::usage("CNOT control and target coincide"));
                }
                apply_cnot(&mut self.amps, control, target);
            }
            _ => match gate.matrix() {
                GateMatrix::One(m) => apply_single(&mut self.amps, gate.target(), &m),
                GateMatrix::Two(_) => unreachable!("only CNOT is a two-qubit gate"),
            },
        }
        Ok(())
    }

    /// `⟨ψ|Z_q|ψ⟩`, computed exactly from the amplitudes.
    pub fn expectation_z(&self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        let bit = 1usize << qubit;
        Ok(self
            .amps
            .iter()
            .enumerate()
            .map(|(k, a)| {
                let p = a.norm_sqr();
                if k & bit == 0 {
                    p
                } else {
                    -p
                }
            })
            .sum())
    }
}

pub(crate) fn apply_single(amps: &mut [C64], q: usize, m: &Mat2) {
    let stride = 1usize << q;
    let mut base = 0;
    while base < amps.len() {
        for i in base..base + stride {
            let a0 = amps[i];
            let a1 = amps[i + stride];
            amps[i] = m[0][0] * a0 + m[0][1] * a1;
            amps[i + stride] = m[1][0] * a0 + m[1][1] * a1;
        }
        base += stride << 1;
    }
}

pub(crate) fn apply_cnot(amps: &mut [C64], control: usize, target: usize) {
    let c = 1usize << control;
    let t = 1usize << target;
    for k in 0..amps.len() {
        if k & c != 0 && k & t == 0 {
            amps.swap(k, k | t);
        }
    }
}
