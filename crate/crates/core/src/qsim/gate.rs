use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

/// One gate of a circuit. Rotations follow `R(θ) = exp(-iθP/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateOp {
    Rx {
        target: usize,
        angle: f64,
    },
    Ry {
        target: usize,
        angle: f64,
    },
    Rz {
        target: usize,
        angle: f64,
    },
    /// `RZ(θ3)·RY(θ2)·RZ(θ1)`: θ1 is applied first.
    U3 {
        target: usize,
        angles: [f64; 3],
    },
    Cnot {
        control: usize,
        target: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    U3,
    Cnot,
}

pub type Mat2 = [[C64; 2]; 2];

/// Unitary of a gate on its own qubits. `Two` is indexed by
/// `2 * control_bit + target_bit`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateMatrix {
    One(Mat2),
    Two([[C64; 4]; 4]),
}

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

pub fn rx_matrix(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [C64::new(c, 0.0), C64::new(0.0, -s)],
        [C64::new(0.0, -s), C64::new(c, 0.0)],
    ]
}

pub fn ry_matrix(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [C64::new(c, 0.0), C64::new(-s, 0.0)],
        [C64::new(s, 0.0), C64::new(c, 0.0)],
    ]
}

pub fn rz_matrix(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [[C64::new(c, -s), ZERO], [ZERO, C64::new(c, s)]]
}

pub fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn u3_matrix(angles: [f64; 3]) -> Mat2 {
    let inner = mat2_mul(&ry_matrix(angles[1]), &rz_matrix(angles[0]));
    mat2_mul(&rz_matrix(angles[2]), &inner)
}

impl GateOp {
    pub fn kind(&self) -> GateKind {
        match self {
            GateOp::Rx { .. } => GateKind::Rx,
            GateOp::Ry { .. } => GateKind::Ry,
            GateOp::Rz { .. } => GateKind::Rz,
            GateOp::U3 { .. } => GateKind::U3,
            GateOp::Cnot { .. } => GateKind::Cnot,
        }
    }

    pub fn target(&self) -> usize {
        match *self {
            GateOp::Rx { target, .. }
            | GateOp::Ry { target, .. }
            | GateOp::Rz { target, .. }
            | GateOp::U3 { target, .. }
            | GateOp::Cnot { target, .. } => target,
        }
    }

    pub fn control(&self) -> Option<usize> {
        match *self {
            GateOp::Cnot { control, .. } => Some(control),
            _ => None,
        }
    }

    pub fn angles(&self) -> &[f64] {
        match self {
            GateOp::Rx { angle, .. } | GateOp::Ry { angle, .. } | GateOp::Rz { angle, .. } => {
                core::slice::from_ref(angle)
            }
            GateOp::U3 { angles, .. } => angles,
            GateOp::Cnot { .. } => &[],
        }
    }

    pub fn angle_mut(&mut self, index: usize) -> Option<&mut f64> {
        match self {
            GateOp::Rx { angle, .. } | GateOp::Ry { angle, .. } | GateOp::Rz { angle, .. } => {
                (index == 0).then_some(angle)
            }
            GateOp::U3 { angles, .. } => angles.get_mut(index),
            GateOp::Cnot { .. } => None,
        }
    }

    /// Whether angle `index` is generated by a single Pauli rotation, which
    /// is what the two-term parameter-shift rule requires.
    pub fn is_shiftable(&self, index: usize) -> bool {
        match self.kind() {
            GateKind::Rx | GateKind::Ry | GateKind::Rz => index == 0,
            GateKind::U3 => index < 3,
            GateKind::Cnot => false,
        }
    }

    pub fn matrix(&self) -> GateMatrix {
        match *self {
            GateOp::Rx { angle, .. } => GateMatrix::One(rx_matrix(angle)),
            GateOp::Ry { angle, .. } => GateMatrix::One(ry_matrix(angle)),
            GateOp::Rz { angle, .. } => GateMatrix::One(rz_matrix(angle)),
            GateOp::U3 { angles, .. } => GateMatrix::One(u3_matrix(angles)),
            GateOp::Cnot { .. } => {
                let mut m = [[ZERO; 4]; 4];
                m[0][0] = ONE;
                m[1][1] = ONE;
                m[2][3] = ONE;
                m[3][2] = ONE;
                GateMatrix::Two(m)
            }
        }
    }
}

impl GateMatrix {
    pub fn dim(&self) -> usize {
        match self {
            GateMatrix::One(_) => 2,
            GateMatrix::Two(_) => 4,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        match self {
            GateMatrix::One(m) => m[i][j],
            GateMatrix::Two(m) => m[i][j],
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        match self {
            GateMatrix::One(m) => m[i][j] = v,
            GateMatrix::Two(m) => m[i][j] = v,
        }
    }

    /// `max |(G†G − I)_ij|`.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let mut acc = ZERO;
                for k in 0..d {
                    acc += self.get(k, i).conj() * self.get(k, j);
                }
                if i == j {
                    acc -= ONE;
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn every_gate_is_unitary() {
        let gates = [
            GateOp::Rx { target: 0, angle: 0.3 },
            GateOp::Ry { target: 0, angle: -2.1 },
            GateOp::Rz { target: 0, angle: 5.0 },
            GateOp::U3 {
                target: 0,
                angles: [0.1, 2.0, -1.3],
            },
            GateOp::Cnot { control: 0, target: 1 },
        ];
        for g in gates {
            assert!(g.matrix().unitarity_defect() < 1e-12, "{g:?}");
        }
    }

    #[test]
    fn u3_of_zero_is_identity() {
        let m = u3_matrix([0.0; 3]);
        assert_eq!(m, [[ONE, ZERO], [ZERO, ONE]]);
    }

    #[test]
    fn ry_pi_flips_zero_to_one() {
        let m = ry_matrix(PI);
        assert!(m[0][0].norm() < 1e-15);
        assert!((m[1][0] - ONE).norm() < 1e-15);
    }

    #[test]
    fn angle_arity() {
        assert_eq!(GateOp::Ry { target: 0, angle: 1.0 }.angles().len(), 1);
        assert_eq!(
            GateOp::U3 {
                target: 0,
                angles: [0.0; 3]
            }
            .angles()
            .len(),
            3
        );
        assert!(GateOp::Cnot { control: 0, target: 1 }.angles().is_empty());
        let mut g = GateOp::Rx { target: 0, angle: 1.0 };
        assert!(g.angle_mut(1).is_none());
        *g.angle_mut(0).unwrap() = 2.0;
        assert_eq!(g.angles(), &[2.0]);
    }
}
