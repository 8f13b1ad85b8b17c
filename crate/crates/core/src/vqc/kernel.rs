//! Specialized evaluator for the fixed circuit shape every VQC in this crate
//! uses: RY encoding of each qubit, then `depth` blocks of (CNOT chain, U3 on
//! every qubit), then ⟨Z⟩ on every qubit.
//!
//! Three facts keep it cheap. The encoded state is a real product state and is
//! built directly. A CNOT chain is a fixed basis permutation. The last block's
//! U3s act on distinct qubits right before measurement, so each ⟨Z_q⟩ only
//! depends on the single-qubit reduced density matrix of q before them, and
//! the parameter shifts of that layer are evaluated on 2×2 matrices.
//!
//! Gradients are still the two-term parameter-shift rule for every angle;
//! only the evaluation of the shifted circuits is specialized.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::gradients::SHIFT;
use crate::qsim::{apply_single, u3_matrix, Mat2};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Single-qubit reduced density matrix: `[[p0, conj(c)], [c, p1]]`.
#[derive(Debug, Clone, Copy)]
struct Rho {
    p0: f64,
    p1: f64,
    c: C64,
}

fn z_after(rho: &Rho, u: &Mat2) -> f64 {
    let m00 = u[0][0].norm_sqr() * rho.p0 + u[0][1].norm_sqr() * rho.p1 + 2.0 * (u[0][1] * rho.c * u[0][0].conj()).re;
    let m11 = u[1][0].norm_sqr() * rho.p0 + u[1][1].norm_sqr() * rho.p1 + 2.0 * (u[1][1] * rho.c * u[1][0].conj()).re;
    m00 - m11
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Kernel {
    n: usize,
    depth: usize,
    chain: Vec<usize>,
}

/// Gradients of a weighted observable `Σ_q w_q ⟨Z_q⟩`.
pub(crate) struct KernelGrads {
    pub angles: Vec<f64>,
    pub theta: Vec<f64>,
}

impl Kernel {
    pub fn new(n: usize, depth: usize) -> Self {
        let chain = (0..1usize << n)
            .map(|k| {
                let mut x = k;
                for i in 0..n.saturating_sub(1) {
                    if (x >> i) & 1 == 1 {
                        x ^= 1 << (i + 1);
                    }
                }
                x
            })
            .collect();
        Kernel { n, depth, chain }
    }

    fn product_state(&self, angles: &[f64], out: &mut [C64]) {
        out.fill(ZERO);
        out[0] = C64::new(1.0, 0.0);
        for (q, a) in angles.iter().enumerate() {
            let (s, c) = (a / 2.0).sin_cos();
            let half = 1usize << q;
            for k in 0..half {
                let v = out[k];
                out[k + half] = v * s;
                out[k] = v * c;
            }
        }
    }

    fn entangle(&self, src: &[C64], dst: &mut [C64]) {
        for (k, v) in src.iter().enumerate() {
            dst[self.chain[k]] = *v;
        }
    }

    fn block_mats(&self, theta: &[f64], block: usize) -> Vec<Mat2> {
        (0..self.n)
            .map(|q| {
                let o = (block * self.n + q) * 3;
                u3_matrix([theta[o], theta[o + 1], theta[o + 2]])
            })
            .collect()
    }

    fn reduced(&self, state: &[C64]) -> Vec<Rho> {
        (0..self.n)
            .map(|q| {
                let bit = 1usize << q;
                let mut rho = Rho {
                    p0: 0.0,
                    p1: 0.0,
                    c: ZERO,
                };
                for k in 0..state.len() {
                    if k & bit == 0 {
                        let a0 = state[k];
                        let a1 = state[k | bit];
                        rho.p0 += a0.norm_sqr();
                        rho.p1 += a1.norm_sqr();
                        rho.c += a1 * a0.conj();
                    }
                }
                rho
            })
            .collect()
    }

    /// Runs blocks `from..depth` on `state`, stopping right before the final
    /// rotation layer. `scratch` must have the state's length.
    fn run_to_final(&self, state: &mut Vec<C64>, scratch: &mut Vec<C64>, mats: &[Vec<Mat2>], from: usize) {
        for (b, block) in mats.iter().enumerate().take(self.depth).skip(from) {
            self.entangle(state, scratch);
            core::mem::swap(state, scratch);
            if b + 1 < self.depth {
                for (q, m) in block.iter().enumerate() {
                    apply_single(state, q, m);
                }
            }
        }
    }

    fn weighted(&self, state: &[C64], last: &[Mat2], weights: &[f64]) -> f64 {
        self.reduced(state)
            .iter()
            .zip(last)
            .zip(weights)
            .map(|((rho, u), w)| w * z_after(rho, u))
            .sum()
    }

    fn all_mats(&self, theta: &[f64]) -> Vec<Vec<Mat2>> {
        (0..self.depth).map(|b| self.block_mats(theta, b)).collect()
    }

    /// `⟨Z_q⟩` for every qubit.
    pub fn expectations(&self, angles: &[f64], theta: &[f64]) -> Vec<f64> {
        let dim = 1usize << self.n;
        let mats = self.all_mats(theta);
        let mut state = vec![ZERO; dim];
        let mut scratch = vec![ZERO; dim];
        self.product_state(angles, &mut state);
        self.run_to_final(&mut state, &mut scratch, &mats, 0);
        let last = &mats[self.depth - 1];
        self.reduced(&state)
            .iter()
            .zip(last)
            .map(|(rho, u)| z_after(rho, u))
            .collect()
    }

    /// Parameter-shift gradients of `Σ_q weights[q]·⟨Z_q⟩` with respect to
    /// the encoding angles (when `want_angles`) and all rotation angles.
    pub fn backward(&self, angles: &[f64], theta: &[f64], weights: &[f64], want_angles: bool) -> KernelGrads {
        let n = self.n;
        let dim = 1usize << n;
        let mats = self.all_mats(theta);
        let mut theta_grad = vec![0.0; theta.len()];
        let mut state = vec![ZERO; dim];
        let mut scratch = vec![ZERO; dim];

        // Encoding angles: each shift rebuilds the product state and reruns
        // the whole circuit.
        let mut angle_grad = Vec::new();
        if want_angles {
            let mut shifted = angles.to_vec();
            for i in 0..n {
                let mut pm = [0.0; 2];
                for (slot, sign) in [1.0, -1.0].into_iter().enumerate() {
                    shifted[i] = angles[i] + sign * SHIFT;
                    self.product_state(&shifted, &mut state);
                    self.run_to_final(&mut state, &mut scratch, &mats, 0);
                    pm[slot] = self.weighted(&state, &mats[self.depth - 1], weights);
                }
                shifted[i] = angles[i];
                angle_grad.push((pm[0] - pm[1]) / 2.0);
            }
        }

        // Inner blocks: cache the state in front of each U3 and replay the
        // remainder with one angle shifted.
        self.product_state(angles, &mut state);
        for b in 0..self.depth - 1 {
            self.entangle(&state, &mut scratch);
            core::mem::swap(&mut state, &mut scratch);
            for q in 0..n {
                for a in 0..3 {
                    let base = (b * n + q) * 3;
                    let mut pm = [0.0; 2];
                    for (slot, sign) in [1.0, -1.0].into_iter().enumerate() {
                        let mut t = [theta[base], theta[base + 1], theta[base + 2]];
                        t[a] += sign * SHIFT;
                        let mut replay = state.clone();
                        apply_single(&mut replay, q, &u3_matrix(t));
                        for (r, m) in mats[b].iter().enumerate().skip(q + 1) {
                            apply_single(&mut replay, r, m);
                        }
                        self.run_to_final(&mut replay, &mut scratch, &mats, b + 1);
                        pm[slot] = self.weighted(&replay, &mats[self.depth - 1], weights);
                    }
                    theta_grad[base + a] = (pm[0] - pm[1]) / 2.0;
                }
                apply_single(&mut state, q, &mats[b][q]);
            }
        }

        // Final layer: shifts act on 2×2 reduced density matrices.
        let b = self.depth - 1;
        self.entangle(&state, &mut scratch);
        let rhos = self.reduced(&scratch);
        for q in 0..n {
            let base = (b * n + q) * 3;
            for a in 0..3 {
                let mut t = [theta[base], theta[base + 1], theta[base + 2]];
                t[a] = theta[base + a] + SHIFT;
                let plus = z_after(&rhos[q], &u3_matrix(t));
                t[a] = theta[base + a] - SHIFT;
                let minus = z_after(&rhos[q], &u3_matrix(t));
                theta_grad[base + a] = weights[q] * (plus - minus) / 2.0;
            }
        }
        KernelGrads {
            angles: angle_grad,
            theta: theta_grad,
        }
    }
}
