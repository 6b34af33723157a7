//! The CalcuList virtual machine and its instruction set.

mod isa;
mod machine;

pub use isa::{cost, CompileUnit, FnId, GlobalId, Instr};
pub(crate) use isa::slice_operand;
pub use machine::{literal_value, Linkage, Machine, RuntimeError, DEFAULT_MAX_DEPTH};
