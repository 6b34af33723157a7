//! CalcuList: a functional language with opt-in side effects, compiled to
//! bytecode for the CalcuList Virtual Machine (CLVM) and driven by a REPL.

pub mod assembler;
pub mod clvm;
pub mod compiler;
pub mod error;
pub mod frontend;
pub mod session;
pub mod values;

pub use error::{CalcError, CalcResult};
pub use session::Session;
