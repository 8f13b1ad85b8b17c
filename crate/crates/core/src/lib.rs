//! Exact statevector simulation of few-qubit circuits, parameter-shift
//! gradients, and the hybrid layers built on the low-qubit variational
//! circuit: a linear squeeze into a handful of qubits, an output clip, the
//! circuit itself, and a linear expansion back out.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, wall-clock
//! accounting and the command-line front end live in the `lowq` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod data;
pub mod error;
pub mod gradients;
pub mod models;
pub mod param;
pub mod qlayers;
pub mod qsim;
pub mod tensor;
pub mod train;
pub mod vqc;

pub use error::{Error, Result};
pub use param::{ParamBuilder, ParamLayout, ParamRange};
pub use tensor::Tensor;
