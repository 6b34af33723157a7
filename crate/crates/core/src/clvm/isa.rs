use std::fmt;
use std::rc::Rc;

use crate::frontend::ast::Literal;

/// Index into the session-wide function table.
pub type FnId = u32;
/// Index into the session-wide global variable table.
pub type GlobalId = u32;

/// One CLVM instruction. Operands are immediates; constants live in the
/// owning unit's pool. Costs are listed in `docs/isa.md`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Instr {
    /// Push constant `k` of the unit's pool.
    PushC(u32),
    /// Push parameter/capture slot.
    LoadP(u16),
    /// Push local slot.
    LoadL(u16),
    /// Push global (or labeled global) variable.
    LoadG(GlobalId),
    StoreP(u16),
    StoreL(u16),
    StoreG(GlobalId),
    Pop,
    /// Duplicate the two topmost values.
    Dup2,

    Add,
    Sub,
    Mul,
    Div,
    IDiv,
    Mod,
    Neg,
    Not,

    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,

    Jmp(u32),
    /// Pop a bool; jump when false.
    Jz(u32),
    Call(FnId, u8),
    /// Reuse the current frame for a self-call.
    TailCall(FnId, u8),
    /// Call the closure below the `argc` arguments.
    CallInd(u8),
    Ret,
    Halt,

    /// Pop `n` values into a fresh list.
    NewList(u32),
    /// Pop a list, then `n` values, and prepend the values to the list.
    Cons(u32),
    Head,
    Tail,
    /// `L[>i]`
    Suffix,
    Slice {
        lo: bool,
        hi: bool,
    },
    /// List element, string char or json field.
    Index,
    /// Pop container, key, value; write the element/field.
    SetIdx,
    /// Pop `n` key/value pairs into a fresh json.
    NewJson(u32),
    /// Push a function value for a named function.
    MkFunc(FnId),
    /// Pop `ncap` captured values and build a closure over lambda `idx`.
    MkClosure(u32, u16),

    Len,
    TypeOf,
    Exc,
    /// Print the top of stack; the flag forces `null` to be shown.
    Print(bool),
    /// Read a value from the file named by string constant `k`.
    FRead(u32),
}

pub mod cost {
    //! Micro-operation counts. Constant parts come from [`super::Instr::base_cost`];
    //! the machine adds the per-element parts below.

    /// Per list cell walked by INDEX/SETIDX/SUFFIX.
    pub const PER_HOP: u64 = 2;
    /// Per list cell allocated by NEWLIST/CONS/SLICE/list ADD.
    pub const PER_CELL: u64 = 3;
    /// Per character produced by string ADD/SLICE.
    pub const PER_CHAR: u64 = 1;
    /// Per cell counted by LEN.
    pub const PER_COUNT: u64 = 1;
    /// Per value node rendered by PRINT or parsed by FREAD.
    pub const PER_NODE: u64 = 1;
    /// Per argument copied by the call instructions.
    pub const PER_ARG: u64 = 1;
    /// Per captured value stored by MKCLOSURE.
    pub const PER_CAPTURE: u64 = 1;
    /// Per field stored by NEWJSON.
    pub const PER_FIELD: u64 = 3;
}

impl Instr {
    /// Fixed micro-operation count (fetch + decode + execute).
    pub fn base_cost(&self) -> u64 {
        use Instr::*;
        match self {
            Pop | Jmp(_) | Halt => 1,
            PushC(_) | LoadP(_) | LoadL(_) | LoadG(_) | Dup2 | Jz(_) | TypeOf | Exc | Print(_) => 2,
            StoreP(_) | StoreL(_) | StoreG(_) | Neg | Not | Head | Tail | Suffix | Len
            | MkFunc(_) | MkClosure(..) | NewList(_) | Cons(_) | NewJson(_) | Index => 3,
            Add | Sub | Mul | Div | IDiv | Mod | Eq | Ne | Lt | Le | Gt | Ge | Ret | SetIdx
            | Slice { .. } => 4,
            TailCall(..) => 5,
            Call(..) => 6,
            CallInd(_) => 6,
            FRead(_) => 6,
        }
    }

    pub fn mnemonic(&self) -> &'static str {
        use Instr::*;
        match self {
            PushC(_) => "PUSHC",
            LoadP(_) => "LOADP",
            LoadL(_) => "LOADL",
            LoadG(_) => "LOADG",
            StoreP(_) => "STOREP",
            StoreL(_) => "STOREL",
            StoreG(_) => "STOREG",
            Pop => "POP",
            Dup2 => "DUP2",
            Add => "ADD",
            Sub => "SUB",
            Mul => "MUL",
            Div => "DIV",
            IDiv => "IDIV",
            Mod => "MOD",
            Neg => "NEG",
            Not => "NOT",
            Eq => "EQ",
            Ne => "NE",
            Lt => "LT",
            Le => "LE",
            Gt => "GT",
            Ge => "GE",
            Jmp(_) => "JMP",
            Jz(_) => "JZ",
            Call(..) => "CALL",
            TailCall(..) => "TAILCALL",
            CallInd(_) => "CALLIND",
            Ret => "RET",
            Halt => "HALT",
            NewList(_) => "NEWLIST",
            Cons(_) => "CONS",
            Head => "HEAD",
            Tail => "TAIL",
            Suffix => "SUFFIX",
            Slice { .. } => "SLICE",
            Index => "INDEX",
            SetIdx => "SETIDX",
            NewJson(_) => "NEWJSON",
            MkFunc(_) => "MKFUNC",
            MkClosure(..) => "MKCLOSURE",
            Len => "LEN",
            TypeOf => "TYPEOF",
            Exc => "EXC",
            Print(_) => "PRINT",
            FRead(_) => "FREAD",
        }
    }

    pub fn jump_target(&self) -> Option<u32> {
        match *self {
            Instr::Jmp(t) | Instr::Jz(t) => Some(t),
            _ => None,
        }
    }

    /// Writes a global slot or a parameter slot, or mutates a heap object.
    pub fn has_side_effect(&self) -> bool {
        matches!(self, Instr::StoreG(_) | Instr::StoreP(_) | Instr::SetIdx)
    }
}

/// Numeric rendering used by the trace; the assembler prints symbols instead.
impl fmt::Display for Instr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Instr::*;
        let m = self.mnemonic();
        match *self {
            PushC(k) | FRead(k) => write!(f, "{m} c{k}"),
            LoadP(i) | LoadL(i) | StoreP(i) | StoreL(i) => write!(f, "{m} {i}"),
            LoadG(g) | StoreG(g) => write!(f, "{m} #{g}"),
            Jmp(t) | Jz(t) => write!(f, "{m} @{t}"),
            Call(id, n) | TailCall(id, n) => write!(f, "{m} #{id} {n}"),
            MkFunc(id) => write!(f, "{m} #{id}"),
            CallInd(n) => write!(f, "{m} {n}"),
            NewList(n) | Cons(n) | NewJson(n) => write!(f, "{m} {n}"),
            MkClosure(i, n) => write!(f, "{m} {i} {n}"),
            Slice { lo, hi } => write!(f, "{m} {}", slice_operand(lo, hi)),
            Print(show) => write!(f, "{m} {}", u8::from(show)),
            _ => f.write_str(m),
        }
    }
}

pub(crate) fn slice_operand(lo: bool, hi: bool) -> &'static str {
    match (lo, hi) {
        (false, false) => ":",
        (true, false) => "lo:",
        (false, true) => ":hi",
        (true, true) => "lo:hi",
    }
}

/// Compiled code for one function, lambda, query or assignment.
///
/// Frame layout: parameters, then captured values (lambdas only), then locals.
#[derive(Debug, Clone, PartialEq)]
pub struct CompileUnit {
    pub name: String,
    pub star: bool,
    /// Declared arity per parameter (0 = non-function).
    pub params: Vec<u8>,
    pub ret_arity: u8,
    pub captures: u16,
    pub locals: u16,
    pub consts: Vec<Literal>,
    pub code: Vec<Instr>,
    pub lambdas: Vec<Rc<CompileUnit>>,
}

impl CompileUnit {
    pub fn new(name: impl Into<String>) -> Self {
        CompileUnit {
            name: name.into(),
            star: false,
            params: Vec::new(),
            ret_arity: 0,
            captures: 0,
            locals: 0,
            consts: Vec::new(),
            code: Vec::new(),
            lambdas: Vec::new(),
        }
    }

    /// Slots addressed by LOADP/STOREP.
    pub fn param_slots(&self) -> usize {
        self.params.len() + self.captures as usize
    }

    /// Visits this unit and every nested lambda.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a CompileUnit)) {
        f(self);
        for l in &self.lambdas {
            l.walk(f);
        }
    }
}
