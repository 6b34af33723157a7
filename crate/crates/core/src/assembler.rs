//! Textual CLVM assembly.
//!
//! ```text
//! .func name [star] params=0,1 ret=0 locals=1 captures=0
//! .const c0 "text"
//! L0:
//!     PUSHC c0        ; constants by pool index or inline literal
//!     CALL other 2    ; functions and globals by name
//!     JZ L0
//! .lambda name$0 params=0 ret=0 locals=0 captures=1
//!     ...
//! .end
//! .end
//! ```

use std::collections::HashMap;
use std::fmt::{self, Write};
use std::rc::Rc;

use crate::clvm::{slice_operand, CompileUnit, Instr};
use crate::compiler::Symbols;
use crate::frontend::ast::Literal;
use crate::frontend::{tokenize, Tok};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AsmError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for AsmError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "assembly error at line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for AsmError {}

// ---- disassembly ----

/// Assembly listing of `unit` and its lambdas. Names come from `syms`.
pub fn disassemble(unit: &CompileUnit, syms: &Symbols) -> String {
    let mut out = String::new();
    write_unit(&mut out, unit, syms, ".func", 0);
    out
}

fn write_unit(out: &mut String, unit: &CompileUnit, syms: &Symbols, directive: &str, depth: usize) {
    let pad = "    ".repeat(depth);
    let params: Vec<String> = unit.params.iter().map(|a| a.to_string()).collect();
    let _ = writeln!(
        out,
        "{pad}{directive} {}{} params={} ret={} locals={} captures={}",
        unit.name,
        if unit.star { " star" } else { "" },
        params.join(","),
        unit.ret_arity,
        unit.locals,
        unit.captures
    );
    for (k, c) in unit.consts.iter().enumerate() {
        let _ = writeln!(out, "{pad}.const c{k} {c}");
    }
    let targets: Vec<u32> = {
        let mut t: Vec<u32> = unit.code.iter().filter_map(|i| i.jump_target()).collect();
        t.sort_unstable();
        t.dedup();
        t
    };
    for (pc, instr) in unit.code.iter().enumerate() {
        if targets.binary_search(&(pc as u32)).is_ok() {
            let _ = writeln!(out, "{pad}L{pc}:");
        }
        let _ = writeln!(out, "{pad}    {}", instr_text(instr, syms));
    }
    if targets.binary_search(&(unit.code.len() as u32)).is_ok() {
        let _ = writeln!(out, "{pad}L{}:", unit.code.len());
    }
    for l in &unit.lambdas {
        write_unit(out, l, syms, ".lambda", depth + 1);
    }
    let _ = writeln!(out, "{pad}.end");
}

fn instr_text(instr: &Instr, syms: &Symbols) -> String {
    let m = instr.mnemonic();
    match *instr {
        Instr::LoadG(g) | Instr::StoreG(g) => format!("{m} {}", syms.global_name(g)),
        Instr::Call(id, n) | Instr::TailCall(id, n) => format!("{m} {} {n}", syms.fn_name(id)),
        Instr::MkFunc(id) => format!("{m} {}", syms.fn_name(id)),
        Instr::Jmp(t) | Instr::Jz(t) => format!("{m} L{t}"),
        _ => instr.to_string(),
    }
}

// ---- assembly ----

struct Line<'a> {
    no: usize,
    text: &'a str,
}

fn strip_comment(line: &str) -> &str {
    let mut quote: Option<char> = None;
    let mut escaped = false;
    for (i, c) in line.char_indices() {
        match quote {
            Some(q) => {
                if escaped {
                    escaped = false;
                } else if c == '\\' {
                    escaped = true;
                } else if c == q {
                    quote = None;
                }
            }
            None => match c {
                '"' | '\'' => quote = Some(c),
                ';' => return &line[..i],
                _ => {}
            },
        }
    }
    line
}

/// Parses a constant written in source literal syntax.
pub fn parse_literal(text: &str) -> Result<Literal, String> {
    let toks = tokenize(text).map_err(|e| e.to_string())?;
    let toks: Vec<Tok> = toks.into_iter().map(|t| t.tok).collect();
    let (neg, rest) = match toks.as_slice() {
        [Tok::Minus, rest @ ..] => (true, rest),
        rest => (false, rest),
    };
    let lit = match rest {
        [t, Tok::Eof] => match t {
            Tok::Int(i) => Literal::Int(if neg { i.wrapping_neg() } else { *i }),
            Tok::Double(d) => Literal::Double(if neg { -d } else { *d }),
            Tok::Ident(s) if s == "Infinity" => {
                Literal::Double(if neg { f64::NEG_INFINITY } else { f64::INFINITY })
            }
            Tok::Ident(s) if s == "NaN" && !neg => Literal::Double(f64::NAN),
            _ if neg => return Err(format!("`{text}` is not a numeric constant")),
            Tok::Char(c) => Literal::Char(*c),
            Tok::Str(s) => Literal::Str(s.clone()),
            Tok::True => Literal::Bool(true),
            Tok::False => Literal::Bool(false),
            Tok::Null => Literal::Null,
            Tok::TypeName(t) => Literal::Type(*t),
            _ => return Err(format!("`{text}` is not a constant")),
        },
        _ => return Err(format!("`{text}` is not a single constant")),
    };
    Ok(lit)
}

struct Header {
    name: String,
    star: bool,
    params: Vec<u8>,
    ret: u8,
    locals: u16,
    captures: u16,
}

fn parse_header(line: &Line<'_>, rest: &str) -> Result<Header, AsmError> {
    let fail = |m: String| AsmError {
        line: line.no,
        message: m,
    };
    let mut words = rest.split_whitespace();
    let name = words
        .next()
        .ok_or_else(|| fail("missing unit name".into()))?
        .to_string();
    let mut h = Header {
        name,
        star: false,
        params: Vec::new(),
        ret: 0,
        locals: 0,
        captures: 0,
    };
    for w in words {
        if w == "star" {
            h.star = true;
            continue;
        }
        let (key, value) = w
            .split_once('=')
            .ok_or_else(|| fail(format!("unexpected `{w}` in header")))?;
        let bad = |_| fail(format!("bad value for `{key}`: `{value}`"));
        match key {
            "params" => {
                h.params = if value.is_empty() {
                    Vec::new()
                } else {
                    value
                        .split(',')
                        .map(|a| a.parse::<u8>())
                        .collect::<Result<_, _>>()
                        .map_err(bad)?
                }
            }
            "ret" => h.ret = value.parse().map_err(bad)?,
            "locals" => h.locals = value.parse().map_err(bad)?,
            "captures" => h.captures = value.parse().map_err(bad)?,
            _ => return Err(fail(format!("unknown header field `{key}`"))),
        }
    }
    Ok(h)
}

struct Pending {
    line: usize,
    at: usize,
    label: String,
}

struct UnitBuilder {
    unit: CompileUnit,
    labels: HashMap<String, u32>,
    fixups: Vec<Pending>,
}

impl UnitBuilder {
    fn new(h: Header) -> Self {
        let mut unit = CompileUnit::new(h.name);
        unit.star = h.star;
        unit.params = h.params;
        unit.ret_arity = h.ret;
        unit.locals = h.locals;
        unit.captures = h.captures;
        UnitBuilder {
            unit,
            labels: HashMap::new(),
            fixups: Vec::new(),
        }
    }

    fn finish(mut self) -> Result<CompileUnit, AsmError> {
        for f in &self.fixups {
            let target = *self.labels.get(&f.label).ok_or_else(|| AsmError {
                line: f.line,
                message: format!("undefined label `{}`", f.label),
            })?;
            self.unit.code[f.at] = match self.unit.code[f.at] {
                Instr::Jmp(_) => Instr::Jmp(target),
                Instr::Jz(_) => Instr::Jz(target),
                other => other,
            };
        }
        if self.unit.code.is_empty() {
            self.unit.code.push(Instr::Halt);
        }
        Ok(self.unit)
    }
}

fn operands<'a>(line: &Line<'a>, args: &[&'a str], n: usize, m: &str) -> Result<(), AsmError> {
    if args.len() != n {
        return Err(AsmError {
            line: line.no,
            message: format!("{m} takes {n} operand(s), got {}", args.len()),
        });
    }
    Ok(())
}

fn number<T: std::str::FromStr>(line: &Line<'_>, s: &str) -> Result<T, AsmError> {
    s.parse().map_err(|_| AsmError {
        line: line.no,
        message: format!("`{s}` is not a valid operand"),
    })
}

fn instruction(
    b: &mut UnitBuilder,
    line: &Line<'_>,
    text: &str,
    syms: &mut Symbols,
) -> Result<(), AsmError> {
    let (m, rest) = match text.split_once(char::is_whitespace) {
        Some((m, r)) => (m, r.trim()),
        None => (text, ""),
    };
    let m = m.to_ascii_uppercase();
    let args: Vec<&str> = rest.split_whitespace().collect();
    let fail = |msg: String| AsmError {
        line: line.no,
        message: msg,
    };
    let simple = |i: Instr| -> Result<Instr, AsmError> {
        operands(line, &args, 0, &m)?;
        Ok(i)
    };
    let instr = match m.as_str() {
        "PUSHC" | "FREAD" => {
            if rest.is_empty() {
                return Err(fail(format!("{m} needs a constant")));
            }
            let k = match rest.strip_prefix('c').and_then(|d| d.parse::<u32>().ok()) {
                Some(k) if (k as usize) < b.unit.consts.len() => k,
                Some(k) => return Err(fail(format!("constant c{k} is not declared"))),
                None => {
                    let lit = parse_literal(rest).map_err(fail)?;
                    match b.unit.consts.iter().position(|c| *c == lit) {
                        Some(k) => k as u32,
                        None => {
                            b.unit.consts.push(lit);
                            (b.unit.consts.len() - 1) as u32
                        }
                    }
                }
            };
            if m == "PUSHC" {
                Instr::PushC(k)
            } else {
                Instr::FRead(k)
            }
        }
        "LOADP" | "LOADL" | "STOREP" | "STOREL" => {
            operands(line, &args, 1, &m)?;
            let i: u16 = number(line, args[0])?;
            match m.as_str() {
                "LOADP" => Instr::LoadP(i),
                "LOADL" => Instr::LoadL(i),
                "STOREP" => Instr::StoreP(i),
                _ => Instr::StoreL(i),
            }
        }
        "LOADG" | "STOREG" => {
            operands(line, &args, 1, &m)?;
            let g = syms.intern_global(args[0]);
            if m == "LOADG" {
                Instr::LoadG(g)
            } else {
                Instr::StoreG(g)
            }
        }
        "CALL" | "TAILCALL" => {
            operands(line, &args, 2, &m)?;
            let id = syms.intern_fn(args[0]);
            let n: u8 = number(line, args[1])?;
            if m == "CALL" {
                Instr::Call(id, n)
            } else {
                Instr::TailCall(id, n)
            }
        }
        "MKFUNC" => {
            operands(line, &args, 1, &m)?;
            Instr::MkFunc(syms.intern_fn(args[0]))
        }
        "JMP" | "JZ" => {
            operands(line, &args, 1, &m)?;
            b.fixups.push(Pending {
                line: line.no,
                at: b.unit.code.len(),
                label: args[0].to_string(),
            });
            if m == "JMP" {
                Instr::Jmp(0)
            } else {
                Instr::Jz(0)
            }
        }
        "CALLIND" => {
            operands(line, &args, 1, &m)?;
            Instr::CallInd(number(line, args[0])?)
        }
        "NEWLIST" | "CONS" | "NEWJSON" => {
            operands(line, &args, 1, &m)?;
            let n: u32 = number(line, args[0])?;
            match m.as_str() {
                "NEWLIST" => Instr::NewList(n),
                "CONS" => Instr::Cons(n),
                _ => Instr::NewJson(n),
            }
        }
        "MKCLOSURE" => {
            operands(line, &args, 2, &m)?;
            Instr::MkClosure(number(line, args[0])?, number(line, args[1])?)
        }
        "SLICE" => {
            operands(line, &args, 1, &m)?;
            let (lo, hi) = match args[0] {
                ":" => (false, false),
                "lo:" => (true, false),
                ":hi" => (false, true),
                "lo:hi" => (true, true),
                other => return Err(fail(format!("bad SLICE operand `{other}`"))),
            };
            debug_assert_eq!(slice_operand(lo, hi), args[0]);
            Instr::Slice { lo, hi }
        }
        "PRINT" => {
            operands(line, &args, 1, &m)?;
            match args[0] {
                "0" => Instr::Print(false),
                "1" => Instr::Print(true),
                other => return Err(fail(format!("bad PRINT operand `{other}`"))),
            }
        }
        "POP" => simple(Instr::Pop)?,
        "DUP2" => simple(Instr::Dup2)?,
        "ADD" => simple(Instr::Add)?,
        "SUB" => simple(Instr::Sub)?,
        "MUL" => simple(Instr::Mul)?,
        "DIV" => simple(Instr::Div)?,
        "IDIV" => simple(Instr::IDiv)?,
        "MOD" => simple(Instr::Mod)?,
        "NEG" => simple(Instr::Neg)?,
        "NOT" => simple(Instr::Not)?,
        "EQ" => simple(Instr::Eq)?,
        "NE" => simple(Instr::Ne)?,
        "LT" => simple(Instr::Lt)?,
        "LE" => simple(Instr::Le)?,
        "GT" => simple(Instr::Gt)?,
        "GE" => simple(Instr::Ge)?,
        "RET" => simple(Instr::Ret)?,
        "HALT" => simple(Instr::Halt)?,
        "HEAD" => simple(Instr::Head)?,
        "TAIL" => simple(Instr::Tail)?,
        "SUFFIX" => simple(Instr::Suffix)?,
        "INDEX" => simple(Instr::Index)?,
        "SETIDX" => simple(Instr::SetIdx)?,
        "LEN" => simple(Instr::Len)?,
        "TYPEOF" => simple(Instr::TypeOf)?,
        "EXC" => simple(Instr::Exc)?,
        _ => return Err(fail(format!("unknown opcode `{m}`"))),
    };
    b.unit.code.push(instr);
    Ok(())
}

/// Assembles every top-level `.func` block. Function and global names are
/// interned in `syms`.
pub fn assemble(text: &str, syms: &mut Symbols) -> Result<Vec<CompileUnit>, AsmError> {
    let mut stack: Vec<UnitBuilder> = Vec::new();
    let mut done = Vec::new();
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = Line {
            no: i + 1,
            text: strip_comment(raw).trim(),
        };
        last_line = line.no;
        if line.text.is_empty() {
            continue;
        }
        let fail = |m: String| AsmError {
            line: line.no,
            message: m,
        };
        if let Some(rest) = line.text.strip_prefix(".func") {
            if !stack.is_empty() {
                return Err(fail("`.func` inside another unit; close it with `.end`".into()));
            }
            stack.push(UnitBuilder::new(parse_header(&line, rest)?));
        } else if let Some(rest) = line.text.strip_prefix(".lambda") {
            if stack.is_empty() {
                return Err(fail("`.lambda` outside a `.func`".into()));
            }
            stack.push(UnitBuilder::new(parse_header(&line, rest)?));
        } else if line.text == ".end" {
            let b = stack.pop().ok_or_else(|| fail("`.end` without an open unit".into()))?;
            let unit = b.finish()?;
            match stack.last_mut() {
                Some(parent) => parent.unit.lambdas.push(Rc::new(unit)),
                None => done.push(unit),
            }
        } else if let Some(rest) = line.text.strip_prefix(".const") {
            let b = stack.last_mut().ok_or_else(|| fail("`.const` outside a unit".into()))?;
            let rest = rest.trim();
            let (name, lit) = rest
                .split_once(char::is_whitespace)
                .ok_or_else(|| fail("`.const` needs a name and a value".into()))?;
            let expected = format!("c{}", b.unit.consts.len());
            if name != expected {
                return Err(fail(format!("constants must be declared in order; expected `{expected}`")));
            }
            b.unit.consts.push(parse_literal(lit.trim()).map_err(fail)?);
        } else if let Some(label) = line
            .text
            .strip_suffix(':')
            .filter(|l| !l.is_empty() && !l.contains(char::is_whitespace))
        {
            let b = stack.last_mut().ok_or_else(|| fail("label outside a unit".into()))?;
            let pc = b.unit.code.len() as u32;
            if b.labels.insert(label.to_string(), pc).is_some() {
                return Err(fail(format!("duplicate label `{label}`")));
            }
        } else {
            let b = stack
                .last_mut()
                .ok_or_else(|| fail("instruction outside a unit".into()))?;
            instruction(b, &line, line.text, syms)?;
        }
    }
    if !stack.is_empty() {
        return Err(AsmError {
            line: last_line,
            message: "missing `.end`".into(),
        });
    }
    Ok(done)
}

/// Operand stack pops and pushes of one instruction; `None` pushes means
/// control does not continue to the next instruction.
fn stack_effect(instr: &Instr) -> (usize, Option<usize>) {
    use Instr::*;
    match *instr {
        PushC(_) | LoadP(_) | LoadL(_) | LoadG(_) | MkFunc(_) | FRead(_) => (0, Some(1)),
        StoreP(_) | StoreL(_) | StoreG(_) | Pop | Jz(_) | Print(_) => (1, Some(0)),
        Dup2 => (2, Some(4)),
        Add | Sub | Mul | Div | IDiv | Mod | Eq | Ne | Lt | Le | Gt | Ge => (2, Some(1)),
        Suffix | Index => (2, Some(1)),
        Neg | Not | Head | Tail | Len | TypeOf => (1, Some(1)),
        Jmp(_) => (0, Some(0)),
        Call(_, n) => (n as usize, Some(1)),
        CallInd(n) => (n as usize + 1, Some(1)),
        NewList(n) => (n as usize, Some(1)),
        Cons(n) => (n as usize + 1, Some(1)),
        NewJson(n) => (2 * n as usize, Some(1)),
        MkClosure(_, n) => (n as usize, Some(1)),
        Slice { lo, hi } => (1 + lo as usize + hi as usize, Some(1)),
        SetIdx => (3, Some(0)),
        TailCall(_, n) => (n as usize, None),
        Ret | Exc => (1, None),
        Halt => (0, None),
    }
}

/// Checks that `unit` (and its lambdas) can run without stack underflow,
/// out-of-range operands or jumps, and with one stack height per address.
pub fn verify(unit: &CompileUnit) -> Result<(), String> {
    let fail = |pc: usize, m: String| Err(format!("{} at {pc}: {m}", unit.name));
    let len = unit.code.len();
    let mut height: Vec<Option<usize>> = vec![None; len + 1];
    let mut work = vec![(0usize, 0usize)];
    while let Some((pc, h)) = work.pop() {
        match height[pc] {
            Some(seen) if seen == h => continue,
            Some(seen) => return fail(pc, format!("stack height {h} differs from {seen}")),
            None => height[pc] = Some(h),
        }
        let Some(instr) = unit.code.get(pc) else {
            continue;
        };
        let bad = match *instr {
            Instr::PushC(k) => (k as usize >= unit.consts.len()).then(|| format!("no constant c{k}")),
            Instr::FRead(k) => match unit.consts.get(k as usize) {
                Some(crate::frontend::ast::Literal::Str(_)) => None,
                _ => Some(format!("c{k} is not a path string")),
            },
            Instr::LoadP(i) | Instr::StoreP(i) => {
                (i as usize >= unit.param_slots()).then(|| format!("no parameter slot {i}"))
            }
            Instr::LoadL(i) | Instr::StoreL(i) => {
                (i >= unit.locals).then(|| format!("no local slot {i}"))
            }
            Instr::MkClosure(idx, n) => match unit.lambdas.get(idx as usize) {
                Some(l) if l.captures == n => None,
                Some(l) => Some(format!("lambda {idx} captures {}, not {n}", l.captures)),
                None => Some(format!("no lambda {idx}")),
            },
            Instr::Jmp(t) | Instr::Jz(t) => (t as usize > len).then(|| format!("jump to {t}")),
            _ => None,
        };
        if let Some(m) = bad {
            return fail(pc, m);
        }
        let (pops, pushes) = stack_effect(instr);
        if h < pops {
            return fail(pc, format!("{} needs {pops} operand(s), stack has {h}", instr.mnemonic()));
        }
        if let Some(pushes) = pushes {
            let next = h - pops + pushes;
            if let Some(t) = instr.jump_target() {
                work.push((t as usize, next));
            }
            if !matches!(instr, Instr::Jmp(_)) {
                work.push((pc + 1, next));
            }
        }
    }
    unit.lambdas.iter().try_for_each(|l| verify(l))
}

/// A standalone assembled program; `main` is the entry unit.
pub struct AsmProgram {
    pub syms: Symbols,
    pub functions: Vec<Option<Rc<CompileUnit>>>,
    pub entry: Rc<CompileUnit>,
}

pub fn load_program(text: &str) -> Result<AsmProgram, AsmError> {
    let mut syms = Symbols::new();
    let units = assemble(text, &mut syms)?;
    let mut functions: Vec<Option<Rc<CompileUnit>>> = Vec::new();
    let mut entry = None;
    for u in units {
        verify(&u).map_err(|message| AsmError { line: 0, message })?;
        let id = syms.intern_fn(&u.name) as usize;
        let u = Rc::new(u);
        if u.name == "main" {
            entry = Some(u.clone());
        }
        if functions.len() <= id {
            functions.resize(id + 1, None);
        }
        functions[id] = Some(u);
    }
    functions.resize(syms.fn_count(), None);
    let entry = entry.ok_or(AsmError {
        line: 0,
        message: "no `main` unit".into(),
    })?;
    if !entry.params.is_empty() {
        return Err(AsmError {
            line: 0,
            message: "`main` must not take parameters".into(),
        });
    }
    Ok(AsmProgram {
        syms,
        functions,
        entry,
    })
}
