//! Batch front end for `mfelab`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
mod svg;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Numerics(#[from] mfelab::Error),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    /// 0 success, 1 numerical failure, 2 invalid input.
    pub fn exit_code(&self) -> i32 {
        use mfelab::Error as E;
        match self {
            CliError::Invalid(_) => 2,
            CliError::Numerics(E::InvalidDomain(_) | E::InvalidWeight(_) | E::InvalidArgument(_)) => 2,
            CliError::Numerics(_) | CliError::Io(_) => 1,
        }
    }
}
