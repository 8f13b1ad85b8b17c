//! Hybrid layers assembled from low-qubit VQCs, plus the classical pieces
//! they are wired together with.
//!
//! Every layer reads its weights from the shared flat parameter vector and
//! accumulates gradients into a buffer of the same layout.

mod attention;
mod classical;
mod conv;
mod gru;

pub use attention::{HeadTrace, QAttention, QAttentionHead, QAttentionSpec, QAttentionTrace};
pub use classical::{
    conv_out_len, global_avg, maxpool1d, relu, sigmoid, softmax, softmax_backward, tanh, Conv1d, Linear,
};
pub use conv::{QConv1d, QConvSpec, QConvTrace, QConvVariant};
pub use gru::{QGruCell, QGruSpec, QGruStepTrace, QGruTrace};

#[cfg(test)]
mod tests;
