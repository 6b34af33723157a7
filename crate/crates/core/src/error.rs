//! Top-level error type for everything a session can report.

use thiserror::Error;

use crate::assembler::AsmError;
use crate::clvm::RuntimeError;
use crate::compiler::CompileError;
use crate::frontend::SyntaxError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CalcError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
    #[error(transparent)]
    Asm(#[from] AsmError),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("{0}")]
    Service(String),
}

impl From<std::io::Error> for CalcError {
    fn from(e: std::io::Error) -> Self {
        CalcError::Io(e.to_string())
    }
}

pub type CalcResult<T> = Result<T, CalcError>;
