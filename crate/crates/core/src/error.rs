use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Invalid construction parameters (qubit counts, clip bounds, model specs).
    Config(String),
    /// A call whose arguments do not fit the callee (indices, lengths, stale traces).
    Usage(String),
    /// Tensor or window shapes that cannot be processed.
    Shape(String),
    /// A plain circuit was asked to encode more features than the qubit cap allows.
    QubitBudget { requested: usize, max: usize },
    /// A trainable slot sits on a gate the parameter-shift rule cannot differentiate.
    UnsupportedGate(String),
    /// A NaN or infinity showed up where a finite number is required.
    NonFinite(String),
    /// A log, checkpoint or other sink reported a failure.
    Io(String),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Config(m) => write!(f, "configuration error: {m}"),
            Error::Usage(m) => write!(f, "usage error: {m}"),
            Error::Shape(m) => write!(f, "shape error: {m}"),
            Error::QubitBudget { requested, max } => write!(
                f,
                "qubit budget exceeded: input needs {requested} qubits, at most {max} are available"
            ),
            Error::UnsupportedGate(m) => write!(f, "unsupported gate: {m}"),
            Error::NonFinite(m) => write!(f, "non-finite value: {m}"),
            Error::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

impl core::error::Error for Error {}
