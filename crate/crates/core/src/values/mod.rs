//! Runtime value model shared by the compiler and the virtual machine.
//!
//! Scalars are stored inline in [`Value`]; strings, list cells, jsons and
//! closures live in the [`Heap`] arena and are addressed by typed indices.

mod heap;
mod ops;
mod print;

use std::fmt;

pub use heap::{Cell, CellRef, Closure, ClosureRef, Heap, HeapStats, JsonRef, StrRef};
pub use ops::{
    arith, binary_types_ok, compare, compare_types_ok, equals, unary, unary_types_ok, ArithOp,
    CompareOp, UnaryOp,
};
pub use print::{format_double, quote_char, quote_str, Style};

/// The ten type identifiers a `type` value can hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TypeId {
    Double,
    Int,
    Char,
    Bool,
    Null,
    Type,
    String,
    List,
    Json,
    Function,
}

impl TypeId {
    pub const ALL: [TypeId; 10] = [
        TypeId::Double,
        TypeId::Int,
        TypeId::Char,
        TypeId::Bool,
        TypeId::Null,
        TypeId::Type,
        TypeId::String,
        TypeId::List,
        TypeId::Json,
        TypeId::Function,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TypeId::Double => "double",
            TypeId::Int => "int",
            TypeId::Char => "char",
            TypeId::Bool => "bool",
            TypeId::Null => "null",
            TypeId::Type => "type",
            TypeId::String => "string",
            TypeId::List => "list",
            TypeId::Json => "json",
            TypeId::Function => "function",
        }
    }

    /// Keyword spelling used in source code. `null` is not a type keyword:
    /// the token denotes the null value.
    pub fn from_keyword(word: &str) -> Option<TypeId> {
        TypeId::ALL
            .into_iter()
            .find(|t| *t != TypeId::Null && t.name() == word)
    }

    pub fn is_numeric(self) -> bool {
        matches!(self, TypeId::Double | TypeId::Int | TypeId::Char)
    }

    /// Position in the numeric promotion lattice `char < int < double`.
    pub(crate) fn numeric_rank(self) -> Option<u8> {
        match self {
            TypeId::Char => Some(0),
            TypeId::Int => Some(1),
            TypeId::Double => Some(2),
            _ => None,
        }
    }
}

impl fmt::Display for TypeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A tagged runtime value. Compound payloads are heap references.
#[derive(Debug, Clone, Copy)]
pub enum Value {
    Double(f64),
    Int(i32),
    Char(char),
    Bool(bool),
    Null,
    Type(TypeId),
    Str(StrRef),
    /// `None` is the empty list sentinel.
    List(Option<CellRef>),
    Json(JsonRef),
    Func(ClosureRef),
}

impl Value {
    pub const EMPTY_LIST: Value = Value::List(None);

    pub fn type_id(&self) -> TypeId {
        match self {
            Value::Double(_) => TypeId::Double,
            Value::Int(_) => TypeId::Int,
            Value::Char(_) => TypeId::Char,
            Value::Bool(_) => TypeId::Bool,
            Value::Null => TypeId::Null,
            Value::Type(_) => TypeId::Type,
            Value::Str(_) => TypeId::String,
            Value::List(_) => TypeId::List,
            Value::Json(_) => TypeId::Json,
            Value::Func(_) => TypeId::Function,
        }
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }

    /// Integer view of an `int` or `char` value.
    pub fn as_index(&self) -> Option<i64> {
        match *self {
            Value::Int(i) => Some(i as i64),
            Value::Char(c) => Some(c as i64),
            _ => None,
        }
    }
}

/// Error categories raised by value operations and by the machine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    TypeError,
    EmptyListTail,
    IndexOutOfRange,
    DivisionByZero,
    UserException,
    UnresolvedName,
    ArityMismatch,
    StackOverflow,
    Io,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ErrorKind::TypeError => "type error",
            ErrorKind::EmptyListTail => "empty list",
            ErrorKind::IndexOutOfRange => "index out of range",
            ErrorKind::DivisionByZero => "division by zero",
            ErrorKind::UserException => "exception",
            ErrorKind::UnresolvedName => "unresolved name",
            ErrorKind::ArityMismatch => "arity mismatch",
            ErrorKind::StackOverflow => "stack overflow",
            ErrorKind::Io => "i/o error",
        };
        f.write_str(s)
    }
}

/// Failure of a value-level operation; the machine attaches the function name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueError {
    pub kind: ErrorKind,
    pub message: String,
}

impl ValueError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        ValueError {
            kind,
            message: message.into(),
        }
    }

    pub fn type_error(message: impl Into<String>) -> Self {
        ValueError::new(ErrorKind::TypeError, message)
    }
}

impl fmt::Display for ValueError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

impl std::error::Error for ValueError {}

pub type ValueResult<T> = Result<T, ValueError>;
