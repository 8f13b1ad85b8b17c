//! Brute-force reference: every gate expanded to its full `2^n × 2^n`
//! matrix. Rotation matrices are written out here from their closed forms
//! and U3 is expanded into its three factors, so nothing is shared with the
//! in-place kernels beyond the `GateOp` description.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use super::gate::GateOp;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl DenseMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![ZERO; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = C64::new(1.0, 0.0);
        }
        DenseMatrix { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim + j]
    }

    pub fn matmul(&self, rhs: &DenseMatrix) -> DenseMatrix {
        let n = self.dim;
        let mut data = vec![ZERO; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        DenseMatrix { dim: n, data }
    }

    pub fn kron(&self, rhs: &DenseMatrix) -> DenseMatrix {
        let (a, b) = (self.dim, rhs.dim);
        let n = a * b;
        let mut data = vec![ZERO; n * n];
        for i in 0..a {
            for j in 0..a {
                let x = self.data[i * a + j];
                for k in 0..b {
                    for l in 0..b {
                        data[(i * b + k) * n + (j * b + l)] = x * rhs.data[k * b + l];
                    }
                }
            }
        }
        DenseMatrix { dim: n, data }
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim;
        (0..n)
            .map(|i| (0..n).map(|j| self.data[i * n + j] * v[j]).sum())
            .collect()
    }

    /// `max |(M†M − I)_ij|`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut acc = ZERO;
                for k in 0..n {
                    acc += self.get(k, i).conj() * self.get(k, j);
                }
                if i == j {
                    acc -= C64::new(1.0, 0.0);
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }
}

fn small(m: [[C64; 2]; 2]) -> DenseMatrix {
    DenseMatrix {
        dim: 2,
        data: vec![m[0][0], m[0][1], m[1][0], m[1][1]],
    }
}

fn rx(t: f64) -> DenseMatrix {
    let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
    small([
        [C64::new(c, 0.0), C64::new(0.0, -s)],
        [C64::new(0.0, -s), C64::new(c, 0.0)],
    ])
}

fn ry(t: f64) -> DenseMatrix {
    let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
    small([
        [C64::new(c, 0.0), C64::new(-s, 0.0)],
        [C64::new(s, 0.0), C64::new(c, 0.0)],
    ])
}

fn rz(t: f64) -> DenseMatrix {
    small([
        [C64::from_polar(1.0, -t / 2.0), ZERO],
        [ZERO, C64::from_polar(1.0, t / 2.0)],
    ])
}

/// `I ⊗ … ⊗ g ⊗ … ⊗ I` with `g` on `qubit` (qubit 0 least significant, so
/// it is the rightmost factor).
fn embed(g: &DenseMatrix, qubit: usize, n: usize) -> DenseMatrix {
    let above = DenseMatrix::identity(1 << (n - 1 - qubit));
    let below = DenseMatrix::identity(1 << qubit);
    above.kron(g).kron(&below)
}

fn cnot_full(control: usize, target: usize, n: usize) -> DenseMatrix {
    let dim = 1 << n;
    let mut m = DenseMatrix {
        dim,
        data: vec![ZERO; dim * dim],
    };
    for col in 0..dim {
        let c = (col >> control) & 1;
        let row = if c == 1 { col ^ (1 << target) } else { col };
        m.data[row * dim + col] = C64::new(1.0, 0.0);
    }
    m
}

/// Full-register matrix of one gate.
pub fn gate_unitary(op: &GateOp, n: usize) -> DenseMatrix {
    match *op {
        GateOp::Rx { target, angle } => embed(&rx(angle), target, n),
        GateOp::Ry { target, angle } => embed(&ry(angle), target, n),
        GateOp::Rz { target, angle } => embed(&rz(angle), target, n),
        GateOp::U3 { target, angles } => {
            let m = rz(angles[2]).matmul(&ry(angles[1])).matmul(&rz(angles[0]));
            embed(&m, target, n)
        }
        GateOp::Cnot { control, target } => cnot_full(control, target, n),
    }
}

/// Product of all gate matrices, last op leftmost.
pub fn circuit_unitary(ops: &[GateOp], n: usize) -> DenseMatrix {
    ops.iter().fold(DenseMatrix::identity(1 << n), |acc, op| {
        gate_unitary(op, n).matmul(&acc)
    })
}

/// Final amplitudes of `ops` applied to `|0…0⟩`: first column of the circuit
/// unitary.
pub fn run_dense(ops: &[GateOp], n: usize) -> Vec<C64> {
    let u = circuit_unitary(ops, n);
    (0..u.dim()).map(|i| u.get(i, 0)).collect()
}

/// Matrix-vector product with the full gate matrix, generating each entry on
/// the fly. Same reference semantics as [`gate_unitary`] without holding
/// `4^n` entries, for registers too large to materialize.
pub fn apply_streamed(op: &GateOp, n: usize, v: &[C64]) -> Vec<C64> {
    let dim = 1usize << n;
    let entry: &dyn Fn(usize, usize) -> C64 = match *op {
        GateOp::Cnot { control, target } => &move |row, col| {
            let c = (col >> control) & 1;
            let image = if c == 1 { col ^ (1 << target) } else { col };
            if row == image {
                C64::new(1.0, 0.0)
            } else {
                ZERO
            }
        },
        _ => {
            let g = match *op {
                GateOp::Rx { angle, .. } => rx(angle),
                GateOp::Ry { angle, .. } => ry(angle),
                GateOp::Rz { angle, .. } => rz(angle),
                GateOp::U3 { angles, .. } => rz(angles[2]).matmul(&ry(angles[1])).matmul(&rz(angles[0])),
                GateOp::Cnot { .. } => unreachable!(),
            };
            let q = op.target();
            return (0..dim)
                .map(|row| {
                    (0..dim)
                        .map(|col| {
                            if (row ^ col) & !(1 << q) != 0 {
                                ZERO
                            } else {
                                g.get((row >> q) & 1, (col >> q) & 1) * v[col]
                            }
                        })
                        .sum()
                })
                .collect();
        }
    };
    (0..dim)
        .map(|row| (0..dim).map(|col| entry(row, col) * v[col]).sum())
        .collect()
}

/// `⟨Z_q⟩` from the diagonal of the full `Z_q` operator.
pub fn expectation_z_dense(amps: &[C64], qubit: usize) -> f64 {
    amps.iter()
        .enumerate()
        .map(|(k, a)| {
            let sign = if (k >> qubit) & 1 == 0 { 1.0 } else { -1.0 };
            sign * a.norm_sqr()
        })
        .sum()
}
