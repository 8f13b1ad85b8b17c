use alloc::vec::Vec;
use core::ops::Range;

use super::gate::GateOp;
use super::state::{StateVector, MAX_QUBITS};
use crate::error::{Error, Result};

/// Location of a trainable angle: gate `op`, angle `angle` within that gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamSlot {
    pub op: usize,
    pub angle: usize,
}

/// Ordered gate list over a fixed register, with some angles marked trainable.
/// Trainable angles are substituted from a parameter vector at run time; the
/// angles stored in the ops act as their defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    ops: Vec<GateOp>,
    slots: Vec<ParamSlot>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::config(alloc::format!(
                "qubit count must be in 1..={MAX_QUBITS}, got {n_qubits}"
            )));
        }
        Ok(Circuit {
            n_qubits,
            ops: Vec::new(),
            slots: Vec::new(),
        })
    }

    /// Builds a circuit from pre-assembled parts, validating every qubit
    /// index and slot address.
    pub fn from_parts(n_qubits: usize, ops: Vec<GateOp>, slots: Vec<ParamSlot>) -> Result<Self> {
        let mut c = Circuit::new(n_qubits)?;
        for op in ops {
            c.push(op)?;
        }
        for slot in &slots {
            let op = c
                .ops
                .get(slot.op)
                .ok_or_else(|| Error::usage(alloc::format!("slot refers to missing op {}", slot.op)))?;
            if slot.angle >= op.angles().len() {
                return Err(Error::usage(alloc::format!(
                    "op {} has no angle {}",
                    slot.op,
                    slot.angle
                )));
            }
        }
        c.slots = slots;
        Ok(c)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn ops(&self) -> &[GateOp] {
        &self.ops
    }

    pub fn slots(&self) -> &[ParamSlot] {
        &self.slots
    }

    pub fn n_params(&self) -> usize {
        self.slots.len()
    }

    fn check(&self, op: &GateOp) -> Result<()> {
        let bad = |q: usize| q >= self.n_qubits;
        if bad(op.target()) || op.control().is_some_and(bad) {
            return Err(Error::usage(alloc::format!(
                "{op:?} addresses a qubit outside a {}-qubit circuit",
                self.n_qubits
            )));
        }
        if op.control() == Some(op.target()) {
            return Err(Error::usage("CNOT control and target coincide"));
        }
        Ok(())
    }

    /// Appends a gate with fixed angles.
    pub fn push(&mut self, op: GateOp) -> Result<&mut Self> {
        self.check(&op)?;
        self.ops.push(op);
        Ok(self)
    }

    /// Appends a gate and marks all of its angles trainable. Returns the
    /// parameter indices assigned to them.
    pub fn push_trainable(&mut self, op: GateOp) -> Result<Range<usize>> {
        self.check(&op)?;
        let start = self.slots.len();
        let op_index = self.ops.len();
        for angle in 0..op.angles().len() {
            self.slots.push(ParamSlot { op: op_index, angle });
        }
        self.ops.push(op);
        Ok(start..self.slots.len())
    }

    /// The angles currently stored at each trainable slot.
    pub fn default_params(&self) -> Vec<f64> {
        self.slots.iter().map(|s| self.ops[s.op].angles()[s.angle]).collect()
    }

    /// Ops with `params` substituted into the trainable slots.
    pub fn bind(&self, params: &[f64]) -> Result<Vec<GateOp>> {
        if params.len() != self.slots.len() {
            return Err(Error::usage(alloc::format!(
                "circuit has {} trainable angles, got {} values",
                self.slots.len(),
                params.len()
            )));
        }
        let mut ops = self.ops.clone();
        for (slot, &v) in self.slots.iter().zip(params) {
            // Slots are validated on insertion.
            *ops[slot.op].angle_mut(slot.angle).expect("valid slot") = v;
        }
        Ok(ops)
    }

    /// Applies every op, in order, to `|0…0⟩`.
    pub fn run(&self, params: &[f64]) -> Result<StateVector> {
        let ops = self.bind(params)?;
        let mut state = StateVector::zero(self.n_qubits)?;
        for op in &ops {
            state.apply(op)?;
        }
        Ok(state)
    }
}
