//! File formats, run orchestration and the command-line front end for
//! `lowq-core`.

pub mod bench;
pub mod cache;
pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod error;
pub mod exec;
pub mod gradcheck;
pub mod run;
pub mod runlog;
pub mod simcheck;
pub mod wav;

pub use error::{AppError, AppResult};
