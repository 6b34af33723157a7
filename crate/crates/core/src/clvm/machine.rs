use std::fmt;
use std::io::Write;
use std::mem;
use std::rc::Rc;

use indexmap::IndexMap;

use super::isa::{cost, CompileUnit, Instr};
use crate::frontend::ast::Literal;
use crate::values::{
    arith, compare, unary, ArithOp, Closure, CompareOp, ErrorKind, Heap, Style, UnaryOp, Value,
    ValueError,
};

pub const DEFAULT_MAX_DEPTH: usize = 1_000_000;

/// Failure raised while executing bytecode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuntimeError {
    pub kind: ErrorKind,
    pub message: String,
    /// Function (or query) whose code was running.
    pub function: String,
}

impl fmt::Display for RuntimeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} in {}: {}", self.kind, self.function, self.message)
    }
}

impl std::error::Error for RuntimeError {}

/// Session tables the machine reads and writes while running.
pub struct Linkage<'a> {
    /// Executable unit per function id; `None` for names not yet defined.
    pub functions: &'a [Option<Rc<CompileUnit>>],
    pub fn_names: &'a [String],
    pub globals: &'a mut [Value],
}

struct Frame {
    unit: Rc<CompileUnit>,
    pc: usize,
    base: usize,
}

/// The CalcuList virtual machine: STACK (value slots plus saved frames),
/// HEAP, the code of the running units and an OUTPUT buffer.
pub struct Machine {
    pub heap: Heap,
    stack: Vec<Value>,
    frames: Vec<Frame>,
    output: String,
    clops: u64,
    max_depth: usize,
    peak_depth: usize,
    trace: Option<Box<dyn Write>>,
}

impl Default for Machine {
    fn default() -> Self {
        Machine::new()
    }
}

/// Heap value for a constant pool entry.
pub fn literal_value(heap: &mut Heap, lit: &Literal) -> Value {
    match lit {
        Literal::Double(d) => Value::Double(*d),
        Literal::Int(i) => Value::Int(*i),
        Literal::Char(c) => Value::Char(*c),
        Literal::Bool(b) => Value::Bool(*b),
        Literal::Null => Value::Null,
        Literal::Type(t) => Value::Type(*t),
        Literal::Str(s) => heap.alloc_str(s.as_str()),
    }
}

fn int_operand(v: Value, what: &str) -> Result<i64, ValueError> {
    match v {
        Value::Int(i) => Ok(i as i64),
        other => Err(ValueError::type_error(format!(
            "{what} must be an int, not {}",
            other.type_id()
        ))),
    }
}

fn list_operand(v: Value, what: &str) -> Result<Option<crate::values::CellRef>, ValueError> {
    match v {
        Value::List(l) => Ok(l),
        other => Err(ValueError::type_error(format!(
            "{what} expects a list, not {}",
            other.type_id()
        ))),
    }
}

impl Machine {
    pub fn new() -> Self {
        Machine {
            heap: Heap::new(),
            stack: Vec::new(),
            frames: Vec::new(),
            output: String::new(),
            clops: 0,
            max_depth: DEFAULT_MAX_DEPTH,
            peak_depth: 0,
            trace: None,
        }
    }

    pub fn set_max_depth(&mut self, frames: usize) {
        self.max_depth = frames.max(1);
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    /// Sends one line per executed instruction to `sink`; `None` stops tracing.
    pub fn set_trace(&mut self, sink: Option<Box<dyn Write>>) {
        self.trace = sink;
    }

    pub fn tracing(&self) -> bool {
        self.trace.is_some()
    }

    /// Clops of the last execution.
    pub fn clops(&self) -> u64 {
        self.clops
    }

    /// Deepest frame nesting reached by the last execution.
    pub fn peak_depth(&self) -> usize {
        self.peak_depth
    }

    /// Live value slots and frames; both are zero between executions.
    pub fn stack_usage(&self) -> (usize, usize) {
        (self.stack.len(), self.frames.len())
    }

    /// Drains the OUTPUT buffer.
    pub fn take_output(&mut self) -> String {
        mem::take(&mut self.output)
    }

    /// Runs `entry` (a unit without parameters) until HALT or its final RET.
    /// Returns the value left on top of the stack, if any. The stack is
    /// always empty afterwards, on success and on error.
    pub fn execute(
        &mut self,
        entry: &Rc<CompileUnit>,
        link: &mut Linkage<'_>,
    ) -> Result<Option<Value>, RuntimeError> {
        self.clops = 0;
        self.peak_depth = 1;
        self.stack.clear();
        self.frames.clear();
        let mut unit = entry.clone();
        let result = self.run(&mut unit, link);
        self.stack.clear();
        self.frames.clear();
        result.map_err(|e| RuntimeError {
            kind: e.kind,
            message: e.message,
            function: unit.name.clone(),
        })
    }

    fn pop(&mut self) -> Value {
        self.stack.pop().expect("operand stack underflow")
    }

    fn top(&self) -> Value {
        *self.stack.last().expect("operand stack underflow")
    }

    fn run(
        &mut self,
        unit: &mut Rc<CompileUnit>,
        link: &mut Linkage<'_>,
    ) -> Result<Option<Value>, ValueError> {
        let mut pc = 0usize;
        let mut base = 0usize;
        self.stack
            .resize(unit.param_slots() + unit.locals as usize, Value::Null);
        loop {
            let Some(&instr) = unit.code.get(pc) else {
                return Ok(self.stack.pop());
            };
            if let Some(t) = self.trace.as_mut() {
                let _ = writeln!(
                    t,
                    "{:>3} {}@{pc:<4} {:<18} clops={}",
                    self.frames.len() + 1,
                    unit.name,
                    instr.to_string(),
                    self.clops
                );
            }
            pc += 1;
            self.clops += instr.base_cost();
            match instr {
                Instr::PushC(k) => {
                    let v = literal_value(&mut self.heap, &unit.consts[k as usize]);
                    self.stack.push(v);
                }
                Instr::LoadP(i) => self.stack.push(self.stack[base + i as usize]),
                Instr::LoadL(i) => {
                    self.stack.push(self.stack[base + unit.param_slots() + i as usize])
                }
                Instr::LoadG(g) => self.stack.push(link.globals[g as usize]),
                Instr::StoreP(i) => {
                    let v = self.pop();
                    self.stack[base + i as usize] = v;
                }
                Instr::StoreL(i) => {
                    let v = self.pop();
                    let slot = base + unit.param_slots() + i as usize;
                    self.stack[slot] = v;
                }
                Instr::StoreG(g) => link.globals[g as usize] = self.pop(),
                Instr::Pop => {
                    self.pop();
                }
                Instr::Dup2 => {
                    let n = self.stack.len();
                    let (a, b) = (self.stack[n - 2], self.stack[n - 1]);
                    self.stack.push(a);
                    self.stack.push(b);
                }
                Instr::Add | Instr::Sub | Instr::Mul | Instr::Div | Instr::IDiv | Instr::Mod => {
                    let op = match instr {
                        Instr::Add => ArithOp::Add,
                        Instr::Sub => ArithOp::Sub,
                        Instr::Mul => ArithOp::Mul,
                        Instr::Div => ArithOp::Div,
                        Instr::IDiv => ArithOp::IDiv,
                        _ => ArithOp::Mod,
                    };
                    let r = self.pop();
                    let l = self.pop();
                    if op == ArithOp::Add {
                        self.clops += match l {
                            Value::List(cells) => cost::PER_CELL * self.heap.list_len(cells) as u64,
                            Value::Str(s) => cost::PER_CHAR * self.heap.string_len(s) as u64,
                            _ => 0,
                        };
                    }
                    let v = arith(&mut self.heap, op, l, r)?;
                    self.stack.push(v);
                }
                Instr::Neg | Instr::Not => {
                    let op = if instr == Instr::Neg {
                        UnaryOp::Neg
                    } else {
                        UnaryOp::Not
                    };
                    let v = self.pop();
                    self.stack.push(unary(op, v)?);
                }
                Instr::Eq | Instr::Ne | Instr::Lt | Instr::Le | Instr::Gt | Instr::Ge => {
                    let op = match instr {
                        Instr::Eq => CompareOp::Eq,
                        Instr::Ne => CompareOp::Ne,
                        Instr::Lt => CompareOp::Lt,
                        Instr::Le => CompareOp::Le,
                        Instr::Gt => CompareOp::Gt,
                        _ => CompareOp::Ge,
                    };
                    let r = self.pop();
                    let l = self.pop();
                    self.stack.push(Value::Bool(compare(&self.heap, op, l, r)?));
                }
                Instr::Jmp(t) => pc = t as usize,
                Instr::Jz(t) => match self.pop() {
                    Value::Bool(true) => {}
                    Value::Bool(false) => pc = t as usize,
                    other => {
                        return Err(ValueError::type_error(format!(
                            "condition must be a bool, not {}",
                            other.type_id()
                        )))
                    }
                },
                Instr::Call(id, argc) => {
                    self.clops += cost::PER_ARG * argc as u64;
                    let callee = link
                        .functions
                        .get(id as usize)
                        .and_then(|f| f.clone())
                        .ok_or_else(|| {
                            let name = link.fn_names.get(id as usize).map_or("?", |s| s.as_str());
                            ValueError::new(
                                ErrorKind::UnresolvedName,
                                format!("function `{name}` is not defined"),
                            )
                        })?;
                    self.check_arity(&callee, argc)?;
                    self.push_frame(unit, callee, argc, &[], &mut pc, &mut base)?;
                }
                Instr::CallInd(argc) => {
                    self.clops += cost::PER_ARG * argc as u64;
                    let fpos = self.stack.len() - argc as usize - 1;
                    let closure = match self.stack[fpos] {
                        Value::Func(c) => self.heap.closure(c).clone(),
                        other => {
                            return Err(ValueError::type_error(format!(
                                "{} is not a function",
                                other.type_id()
                            )))
                        }
                    };
                    self.check_arity(&closure.unit, argc)?;
                    if closure.unit.star && !unit.star {
                        return Err(ValueError::type_error(format!(
                            "star function `{}` cannot be called by non-star `{}`",
                            closure.unit.name, unit.name
                        )));
                    }
                    self.stack.remove(fpos);
                    self.push_frame(unit, closure.unit, argc, &closure.captures, &mut pc, &mut base)?;
                }
                Instr::TailCall(id, argc) => {
                    self.clops += cost::PER_ARG * argc as u64;
                    let callee = match link.functions.get(id as usize) {
                        Some(Some(u)) => u.clone(),
                        _ => {
                            return Err(ValueError::new(
                                ErrorKind::UnresolvedName,
                                "tail call to an undefined function",
                            ))
                        }
                    };
                    self.check_arity(&callee, argc)?;
                    let src = self.stack.len() - argc as usize;
                    for i in 0..argc as usize {
                        self.stack[base + i] = self.stack[src + i];
                    }
                    self.stack.truncate(base + argc as usize);
                    self.stack.resize(
                        base + callee.param_slots() + callee.locals as usize,
                        Value::Null,
                    );
                    *unit = callee;
                    pc = 0;
                }
                Instr::Ret => {
                    let v = self.pop();
                    self.stack.truncate(base);
                    match self.frames.pop() {
                        Some(f) => {
                            *unit = f.unit;
                            pc = f.pc;
                            base = f.base;
                            self.stack.push(v);
                        }
                        None => return Ok(Some(v)),
                    }
                }
                Instr::Halt => return Ok(self.stack.pop()),
                Instr::NewList(n) => {
                    self.clops += cost::PER_CELL * n as u64;
                    let at = self.stack.len() - n as usize;
                    let v = self.heap.prepend(&self.stack[at..], None);
                    self.stack.truncate(at);
                    self.stack.push(v);
                }
                Instr::Cons(n) => {
                    self.clops += cost::PER_CELL * n as u64;
                    let tail = self.pop();
                    let tail = match tail {
                        Value::List(l) => l,
                        other => {
                            return Err(ValueError::type_error(format!(
                                "the tail after `|` must be a list, not {}",
                                other.type_id()
                            )))
                        }
                    };
                    let at = self.stack.len() - n as usize;
                    let v = self.heap.prepend(&self.stack[at..], tail);
                    self.stack.truncate(at);
                    self.stack.push(v);
                }
                Instr::Head => {
                    let l = list_operand(self.pop(), "[.]")?;
                    self.stack.push(self.heap.list_head(l)?);
                }
                Instr::Tail => {
                    let l = list_operand(self.pop(), "[>]")?;
                    self.stack.push(Value::List(self.heap.list_tail(l)?));
                }
                Instr::Suffix => {
                    let i = int_operand(self.pop(), "suffix index")?;
                    let l = list_operand(self.pop(), "[>i]")?;
                    self.clops += cost::PER_HOP * i.max(0) as u64;
                    self.stack.push(Value::List(self.heap.suffix_after(l, i)?));
                }
                Instr::Slice { lo, hi } => {
                    let hi = if hi {
                        Some(int_operand(self.pop(), "slice bound")?)
                    } else {
                        None
                    };
                    let lo = if lo {
                        Some(int_operand(self.pop(), "slice bound")?)
                    } else {
                        None
                    };
                    let target = self.pop();
                    let v = match target {
                        Value::List(l) => {
                            let len = self.heap.list_len(l) as i64;
                            let taken = (hi.unwrap_or(len) - lo.unwrap_or(0)).max(0) as u64;
                            self.clops +=
                                cost::PER_HOP * lo.unwrap_or(0).max(0) as u64 + cost::PER_CELL * taken;
                            self.heap.slice_list(l, lo, hi)?
                        }
                        Value::Str(s) => {
                            let v = self.heap.slice_str(s, lo, hi)?;
                            if let Value::Str(r) = v {
                                self.clops += cost::PER_CHAR * self.heap.string_len(r) as u64;
                            }
                            v
                        }
                        Value::Json(j) if lo.is_none() && hi.is_none() => {
                            self.clops += cost::PER_FIELD * self.heap.json(j).len() as u64;
                            self.heap.json_clone(j)
                        }
                        other => {
                            return Err(ValueError::type_error(format!(
                                "slicing is not defined on {}",
                                other.type_id()
                            )))
                        }
                    };
                    self.stack.push(v);
                }
                Instr::Index => {
                    let key = self.pop();
                    let target = self.pop();
                    let v = match (target, key) {
                        (Value::List(l), Value::Int(i)) => {
                            self.clops += cost::PER_HOP * i.max(0) as u64;
                            self.heap.list_get(l, i as i64)?
                        }
                        (Value::Str(s), Value::Int(i)) => Value::Char(self.heap.char_at(s, i as i64)?),
                        (Value::Json(j), Value::Str(k)) => {
                            let k = self.heap.str(k).to_string();
                            self.heap.json_get(j, &k)
                        }
                        (t, k) => {
                            return Err(ValueError::type_error(format!(
                                "cannot index {} with {}",
                                t.type_id(),
                                k.type_id()
                            )))
                        }
                    };
                    self.stack.push(v);
                }
                Instr::SetIdx => {
                    let v = self.pop();
                    let key = self.pop();
                    let target = self.pop();
                    match (target, key) {
                        (Value::List(l), Value::Int(i)) => {
                            self.clops += cost::PER_HOP * i.max(0) as u64;
                            self.heap.list_set(l, i as i64, v)?
                        }
                        (Value::Json(j), Value::Str(k)) => {
                            let k = self.heap.str(k).to_string();
                            self.heap.json_set(j, &k, v)
                        }
                        (t, k) => {
                            return Err(ValueError::type_error(format!(
                                "cannot assign an element of {} indexed by {}",
                                t.type_id(),
                                k.type_id()
                            )))
                        }
                    }
                }
                Instr::NewJson(n) => {
                    self.clops += cost::PER_FIELD * n as u64;
                    let at = self.stack.len() - 2 * n as usize;
                    let mut fields = IndexMap::with_capacity(n as usize);
                    for pair in self.stack[at..].chunks(2) {
                        let Value::Str(k) = pair[0] else {
                            return Err(ValueError::type_error("json keys must be strings"));
                        };
                        fields.insert(self.heap.str(k).to_string(), pair[1]);
                    }
                    self.stack.truncate(at);
                    let v = self.heap.alloc_json(fields);
                    self.stack.push(v);
                }
                Instr::MkFunc(id) => {
                    let callee = match link.functions.get(id as usize) {
                        Some(Some(u)) => u.clone(),
                        _ => {
                            let name = link.fn_names.get(id as usize).map_or("?", |s| s.as_str());
                            return Err(ValueError::new(
                                ErrorKind::UnresolvedName,
                                format!("function `{name}` is not defined"),
                            ));
                        }
                    };
                    let v = self.heap.alloc_closure(Closure {
                        unit: callee,
                        captures: Vec::new(),
                    });
                    self.stack.push(v);
                }
                Instr::MkClosure(idx, ncap) => {
                    self.clops += cost::PER_CAPTURE * ncap as u64;
                    let at = self.stack.len() - ncap as usize;
                    let captures = self.stack.split_off(at);
                    let v = self.heap.alloc_closure(Closure {
                        unit: unit.lambdas[idx as usize].clone(),
                        captures,
                    });
                    self.stack.push(v);
                }
                Instr::Len => {
                    let v = self.pop();
                    let n = self.heap.len_of(v)?;
                    if !matches!(v, Value::Json(_)) {
                        self.clops += cost::PER_COUNT * n as u64;
                    }
                    self.stack.push(Value::Int(n as i32));
                }
                Instr::TypeOf => {
                    let v = self.pop();
                    self.stack.push(Value::Type(v.type_id()));
                }
                Instr::Exc => {
                    let msg = match self.pop() {
                        Value::Str(s) => self.heap.str(s).to_string(),
                        other => self.heap.render(other, Style::TOP),
                    };
                    return Err(ValueError::new(ErrorKind::UserException, msg));
                }
                Instr::Print(show_null) => {
                    let v = self.top();
                    let style = if show_null {
                        Style::TOP_SHOW_NULL
                    } else {
                        Style::TOP
                    };
                    let (text, nodes) = self.heap.render_counted(v, style);
                    self.clops += cost::PER_NODE * nodes as u64;
                    if !(v.is_null() && !show_null) {
                        self.output.push_str(&text);
                        self.output.push('\n');
                    }
                    self.pop();
                }
                Instr::FRead(k) => {
                    let Literal::Str(path) = &unit.consts[k as usize] else {
                        return Err(ValueError::type_error("FREAD expects a string constant"));
                    };
                    let v = crate::session::read_value(&mut self.heap, path)?;
                    let (_, nodes) = self.heap.render_counted(v, Style::NESTED);
                    self.clops += cost::PER_NODE * nodes as u64;
                    self.stack.push(v);
                }
            }
        }
    }

    fn check_arity(&self, callee: &CompileUnit, argc: u8) -> Result<(), ValueError> {
        if callee.params.len() != argc as usize {
            return Err(ValueError::new(
                ErrorKind::ArityMismatch,
                format!(
                    "`{}` expects {} argument(s), got {argc}",
                    callee.name,
                    callee.params.len()
                ),
            ));
        }
        Ok(())
    }

    fn push_frame(
        &mut self,
        unit: &mut Rc<CompileUnit>,
        callee: Rc<CompileUnit>,
        argc: u8,
        captures: &[Value],
        pc: &mut usize,
        base: &mut usize,
    ) -> Result<(), ValueError> {
        if self.frames.len() + 1 >= self.max_depth {
            return Err(ValueError::new(
                ErrorKind::StackOverflow,
                format!("more than {} nested calls", self.max_depth),
            ));
        }
        let new_base = self.stack.len() - argc as usize;
        self.stack.extend_from_slice(captures);
        self.stack
            .resize(self.stack.len() + callee.locals as usize, Value::Null);
        let caller = mem::replace(unit, callee);
        self.frames.push(Frame {
            unit: caller,
            pc: *pc,
            base: *base,
        });
        *base = new_base;
        *pc = 0;
        self.peak_depth = self.peak_depth.max(self.frames.len() + 1);
        Ok(())
    }
}
