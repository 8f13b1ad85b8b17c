//! Randomized oracle suite for the statevector simulator.

use std::f64::consts::PI;

use lowq_core::qsim::dense::{apply_streamed, run_dense};
use lowq_core::qsim::{GateOp, StateVector, MAX_QUBITS};
use lowq_core::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TOLERANCE: f64 = 1e-12;
/// Largest register compared against the materialized dense matrix.
pub const DENSE_MAX_QUBITS: usize = 4;
pub const DENSE_CASES: usize = 500;
pub const MAX_GATES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Scales one entry of every checked gate matrix.
    Unitarity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Property {
    pub name: &'static str,
    pub cases: usize,
    pub worst: f64,
    /// Serialized first failing case.
    pub failure: Option<String>,
}

impl Property {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimcheckReport {
    pub qubits: usize,
    pub properties: Vec<Property>,
}

impl SimcheckReport {
    pub fn passed(&self) -> bool {
        self.properties.iter().all(Property::passed)
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.properties.iter().filter(|p| !p.passed()).map(|p| p.name).collect()
    }
}

pub fn random_gate(rng: &mut ChaCha8Rng, n: usize) -> GateOp {
    let target = rng.random_range(0..n);
    let kinds = if n >= 2 { 5 } else { 4 };
    let kind = rng.random_range(0..kinds);
    let mut angle = || rng.random_range(-2.0 * PI..2.0 * PI);
    match kind {
        0 => GateOp::Rx { target, angle: angle() },
        1 => GateOp::Ry { target, angle: angle() },
        2 => GateOp::Rz { target, angle: angle() },
        3 => GateOp::U3 {
            target,
            angles: [angle(), angle(), angle()],
        },
        _ => GateOp::Cnot {
            control: (target + rng.random_range(1..n)) % n,
            target,
        },
    }
}

/// Random register size in `1..=max_qubits` and up to `max_gates` gates.
pub fn random_circuit(rng: &mut ChaCha8Rng, max_qubits: usize, max_gates: usize) -> (usize, Vec<GateOp>) {
    let n = rng.random_range(1..=max_qubits);
    let len = rng.random_range(0..=max_gates);
    (n, (0..len).map(|_| random_gate(rng, n)).collect())
}

fn simulate(n: usize, ops: &[GateOp]) -> Result<StateVector> {
    let mut s = StateVector::zero(n)?;
    for op in ops {
        s.apply(op)?;
    }
    Ok(s)
}

fn max_amp_diff(a: &StateVector, b: &[lowq_core::qsim::C64]) -> f64 {
    a.amplitudes()
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn serialize(n: usize, ops: &[GateOp]) -> String {
    format!("n_qubits = {n}, ops = {ops:?}")
}

struct Tally {
    name: &'static str,
    cases: usize,
    worst: f64,
    failure: Option<String>,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally {
            name,
            cases: 0,
            worst: 0.0,
            failure: None,
        }
    }

    fn observe(&mut self, err: f64, case: impl FnOnce() -> String) {
        self.cases += 1;
        self.worst = self.worst.max(err);
        if (err.is_nan() || err > TOLERANCE) && self.failure.is_none() {
            self.failure = Some(format!("error {err:e}: {}", case()));
        }
    }

    fn finish(self) -> Property {
        Property {
            name: self.name,
            cases: self.cases,
            worst: self.worst,
            failure: self.failure,
        }
    }
}

fn unitarity(rng: &mut ChaCha8Rng, fault: Option<Fault>) -> Property {
    let mut t = Tally::new("unitarity");
    for _ in 0..200 {
        let op = random_gate(rng, 2);
        let mut m = op.matrix();
        if fault == Some(Fault::Unitarity) {
            m.set(0, 0, m.get(0, 0) * 1.01);
        }
        t.observe(m.unitarity_defect(), || format!("gate = {op:?}"));
    }
    t.finish()
}

fn norm(rng: &mut ChaCha8Rng, max_qubits: usize) -> Result<Property> {
    let mut t = Tally::new("norm");
    for _ in 0..200 {
        let (n, ops) = random_circuit(rng, max_qubits, MAX_GATES);
        let s = simulate(n, &ops)?;
        t.observe((s.norm_sqr() - 1.0).abs(), || serialize(n, &ops));
    }
    Ok(t.finish())
}

fn dense_equivalence(rng: &mut ChaCha8Rng, max_qubits: usize) -> Result<Property> {
    let mut t = Tally::new("dense_equivalence");
    for _ in 0..DENSE_CASES {
        let (n, ops) = random_circuit(rng, max_qubits, MAX_GATES);
        let s = simulate(n, &ops)?;
        t.observe(max_amp_diff(&s, &run_dense(&ops, n)), || serialize(n, &ops));
    }
    Ok(t.finish())
}

/// Full-width register against the entry-by-entry full matrix product.
fn streamed_equivalence(rng: &mut ChaCha8Rng, n: usize) -> Result<Property> {
    let mut t = Tally::new("streamed_equivalence");
    let gates = if n > 10 { 3 } else { 8 };
    let ops: Vec<GateOp> = (0..gates).map(|_| random_gate(rng, n)).collect();
    let s = simulate(n, &ops)?;
    let mut v = StateVector::zero(n)?.amplitudes().to_vec();
    for op in &ops {
        v = apply_streamed(op, n, &v);
    }
    t.observe(max_amp_diff(&s, &v), || serialize(n, &ops));
    t.observe((s.norm_sqr() - 1.0).abs(), || serialize(n, &ops));
    Ok(t.finish())
}

/// `⟨Z⟩ = cos θ` after `RY(θ)` and `RX(θ)` on a grid.
fn rotation_expectation() -> Result<Property> {
    let mut t = Tally::new("rotation_expectation");
    for k in 0..=64 {
        let theta = -PI + 2.0 * PI * k as f64 / 64.0;
        for op in [
            GateOp::Ry {
                target: 0,
                angle: theta,
            },
            GateOp::Rx {
                target: 0,
                angle: theta,
            },
        ] {
            let e = simulate(1, &[op])?.expectation_z(0)?;
            t.observe((e - theta.cos()).abs(), || serialize(1, &[op]));
        }
    }
    Ok(t.finish())
}

pub fn run_simcheck(qubits: usize, seed: u64, fault: Option<Fault>) -> Result<SimcheckReport> {
    if qubits == 0 || qubits > MAX_QUBITS {
        return Err(lowq_core::Error::QubitBudget {
            requested: qubits,
            max: MAX_QUBITS,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let properties = vec![
        unitarity(&mut rng, fault),
        norm(&mut rng, qubits)?,
        dense_equivalence(&mut rng, qubits.min(DENSE_MAX_QUBITS))?,
        streamed_equivalence(&mut rng, qubits)?,
        rotation_expectation()?,
    ];
    Ok(SimcheckReport { qubits, properties })
}
