use std::collections::HashMap;
use std::rc::Rc;

use super::{labeled_name, CompileError, CompileErrorKind, CompileResult, FnSig, Symbols};
use crate::clvm::{CompileUnit, FnId, GlobalId, Instr};
use crate::frontend::ast::*;
use crate::values::{binary_types_ok, compare_types_ok, unary_types_ok, ArithOp, TypeId, UnaryOp};

/// Where a name lives at run time.
#[derive(Debug, Clone, Copy)]
enum Slot {
    /// Parameter or captured slot. `Some(n)` is a declared parameter arity.
    Param(u16, Option<u8>),
    Local(u16),
    Global(GlobalId),
}

struct Var {
    name: String,
    arity: Option<u8>,
}

struct Ctx {
    unit: CompileUnit,
    /// Parameters followed by captures.
    vars: Vec<Var>,
    locals: Vec<String>,
    /// Unqualified labeled variables visible in a star body.
    labels: HashMap<String, GlobalId>,
    /// Header labels (for `L.x` inside a body).
    header_labels: Vec<String>,
    top_level: bool,
    lambda: bool,
    capture_sources: Vec<Slot>,
    self_fn: Option<(String, FnSig)>,
}

impl Ctx {
    fn new(name: &str, star: bool, top_level: bool) -> Self {
        let mut unit = CompileUnit::new(name);
        unit.star = star;
        Ctx {
            unit,
            vars: Vec::new(),
            locals: Vec::new(),
            labels: HashMap::new(),
            header_labels: Vec::new(),
            top_level,
            lambda: false,
            capture_sources: Vec::new(),
            self_fn: None,
        }
    }
}

struct Gen<'s> {
    syms: &'s mut Symbols,
    ctxs: Vec<Ctx>,
}

fn err(kind: CompileErrorKind, message: impl Into<String>) -> CompileError {
    CompileError::new(kind, message)
}

fn type_err(e: crate::values::ValueError) -> CompileError {
    err(CompileErrorKind::Type, format!("constant operands: {}", e.message))
}

fn u8_count(n: usize, what: &str) -> CompileResult<u8> {
    u8::try_from(n).map_err(|_| err(CompileErrorKind::Arity, format!("too many {what}")))
}

/// Type of an expression whose operands are all constants.
fn const_type(e: &Expr) -> Option<TypeId> {
    match e {
        Expr::Lit(l) => Some(l.type_id()),
        Expr::List { tail: None, .. } => Some(TypeId::List),
        Expr::Json(_) => Some(TypeId::Json),
        Expr::Arith(op, l, r) => binary_types_ok(*op, const_type(l)?, const_type(r)?).ok(),
        Expr::Unary(op, x) => unary_types_ok(*op, const_type(x)?).ok(),
        Expr::Compare(op, l, r) => {
            compare_types_ok(*op, const_type(l)?, const_type(r)?).ok()?;
            Some(TypeId::Bool)
        }
        Expr::TypeOf(_) => Some(TypeId::Type),
        _ => None,
    }
}

fn check_bool(e: &Expr, what: &str) -> CompileResult<()> {
    match const_type(e) {
        Some(t) if t != TypeId::Bool => Err(err(
            CompileErrorKind::Type,
            format!("{what} must be a bool, not the constant type {t}"),
        )),
        _ => Ok(()),
    }
}

impl Gen<'_> {
    fn ctx(&mut self) -> &mut Ctx {
        self.ctxs.last_mut().expect("no compilation context")
    }

    fn here(&mut self) -> u32 {
        self.ctx().unit.code.len() as u32
    }

    fn emit(&mut self, i: Instr) -> usize {
        let code = &mut self.ctx().unit.code;
        code.push(i);
        code.len() - 1
    }

    fn patch(&mut self, at: usize) {
        let target = self.here();
        let code = &mut self.ctx().unit.code;
        code[at] = match code[at] {
            Instr::Jmp(_) => Instr::Jmp(target),
            Instr::Jz(_) => Instr::Jz(target),
            other => unreachable!("patching non-jump {other:?}"),
        };
    }

    fn constant(&mut self, lit: Literal) -> u32 {
        let consts = &mut self.ctx().unit.consts;
        if let Some(k) = consts.iter().position(|c| *c == lit) {
            return k as u32;
        }
        consts.push(lit);
        (consts.len() - 1) as u32
    }

    fn push_const(&mut self, lit: Literal) {
        let k = self.constant(lit);
        self.emit(Instr::PushC(k));
    }

    fn star(&self) -> bool {
        self.ctxs.last().is_some_and(|c| c.unit.star)
    }

    fn context_name(&self) -> String {
        self.ctxs
            .last()
            .map_or_else(String::new, |c| c.unit.name.clone())
    }

    // ---- name resolution ----

    fn resolve(&mut self, level: usize, name: &str) -> Option<Slot> {
        let ctx = &self.ctxs[level];
        if let Some(i) = ctx.vars.iter().position(|v| v.name == name) {
            return Some(Slot::Param(i as u16, ctx.vars[i].arity));
        }
        if let Some(i) = ctx.locals.iter().position(|l| l == name) {
            return Some(Slot::Local(i as u16));
        }
        if let Some(&g) = ctx.labels.get(name) {
            return Some(Slot::Global(g));
        }
        if ctx.top_level && !ctx.lambda {
            return self.syms.defined_global(name).map(Slot::Global);
        }
        if !ctx.lambda || level == 0 {
            return None;
        }
        let source = self.resolve(level - 1, name)?;
        let arity = match source {
            Slot::Param(_, a) => a,
            _ => None,
        };
        let ctx = &mut self.ctxs[level];
        ctx.vars.push(Var {
            name: name.to_string(),
            arity,
        });
        ctx.capture_sources.push(source);
        ctx.unit.captures += 1;
        Some(Slot::Param((ctx.vars.len() - 1) as u16, arity))
    }

    fn load(&mut self, slot: Slot) {
        self.emit(match slot {
            Slot::Param(i, _) => Instr::LoadP(i),
            Slot::Local(i) => Instr::LoadL(i),
            Slot::Global(g) => Instr::LoadG(g),
        });
    }

    /// Function id for a name that is not a variable. At top level the
    /// function must already be defined; inside a body it may come later.
    fn function_ref(&mut self, name: &str) -> CompileResult<FnId> {
        let top = self.ctxs.iter().all(|c| c.top_level);
        if let Some((self_name, _)) = self.self_fn() {
            if self_name == name {
                return Ok(self.syms.intern_fn(name));
            }
        }
        match self.syms.fn_id(name) {
            Some(id) if self.syms.sig(id).is_some() => Ok(id),
            _ if !top => Ok(self.syms.intern_fn(name)),
            _ => Err(err(
                CompileErrorKind::UnknownName,
                format!("`{name}` is neither a variable nor a function"),
            )),
        }
    }

    fn self_fn(&self) -> Option<&(String, FnSig)> {
        self.ctxs.iter().rev().find_map(|c| c.self_fn.as_ref())
    }

    fn sig_of(&self, id: FnId, name: &str) -> Option<FnSig> {
        if let Some((self_name, sig)) = self.self_fn() {
            if self_name == name {
                return Some(sig.clone());
            }
        }
        self.syms.sig(id).cloned()
    }

    fn labeled_slot(&mut self, label: &str, name: &str) -> CompileResult<GlobalId> {
        let level = self.ctxs.len() - 1;
        let in_body = !self.ctxs[level].top_level;
        if in_body && !self.ctxs.iter().any(|c| c.header_labels.iter().any(|l| l == label)) {
            return Err(err(
                CompileErrorKind::UnknownName,
                format!("label `{label}` is not listed in the header of `{}`", self.context_name()),
            ));
        }
        let known = self
            .syms
            .label_vars(label)
            .is_some_and(|v| v.iter().any(|n| n == name));
        if !known {
            return Err(err(
                CompileErrorKind::UnknownName,
                format!("`{label}.{name}` is not a declared labeled variable"),
            ));
        }
        Ok(self.syms.intern_global(&labeled_name(label, name)))
    }

    // ---- expressions ----

    fn expr(&mut self, e: &Expr) -> CompileResult<()> {
        match e {
            Expr::Lit(l) => self.push_const(l.clone()),
            Expr::Name(n) => {
                let level = self.ctxs.len() - 1;
                match self.resolve(level, n) {
                    Some(slot) => self.load(slot),
                    None => {
                        let id = self.function_ref(n)?;
                        self.emit(Instr::MkFunc(id));
                    }
                }
            }
            Expr::Labeled { label, name } => {
                let g = self.labeled_slot(label, name)?;
                self.emit(Instr::LoadG(g));
            }
            Expr::Unary(op, x) => {
                if let Some(t) = const_type(x) {
                    unary_types_ok(*op, t).map_err(type_err)?;
                }
                match op {
                    UnaryOp::Plus => {
                        self.push_const(Literal::Int(0));
                        self.expr(x)?;
                        self.emit(Instr::Add);
                    }
                    UnaryOp::Neg => {
                        self.expr(x)?;
                        self.emit(Instr::Neg);
                    }
                    UnaryOp::Not => {
                        self.expr(x)?;
                        self.emit(Instr::Not);
                    }
                }
            }
            Expr::Arith(op, l, r) => {
                if let (Some(a), Some(b)) = (const_type(l), const_type(r)) {
                    binary_types_ok(*op, a, b).map_err(type_err)?;
                }
                self.expr(l)?;
                self.expr(r)?;
                self.emit(arith_instr(*op));
            }
            Expr::Compare(op, l, r) => {
                if let (Some(a), Some(b)) = (const_type(l), const_type(r)) {
                    compare_types_ok(*op, a, b).map_err(type_err)?;
                }
                self.expr(l)?;
                self.expr(r)?;
                self.emit(match op {
                    crate::values::CompareOp::Eq => Instr::Eq,
                    crate::values::CompareOp::Ne => Instr::Ne,
                    crate::values::CompareOp::Lt => Instr::Lt,
                    crate::values::CompareOp::Le => Instr::Le,
                    crate::values::CompareOp::Gt => Instr::Gt,
                    crate::values::CompareOp::Ge => Instr::Ge,
                });
            }
            Expr::And(l, r) => {
                check_bool(l, "operand of &&")?;
                check_bool(r, "operand of &&")?;
                self.expr(l)?;
                let j1 = self.emit(Instr::Jz(0));
                self.expr(r)?;
                let j2 = self.emit(Instr::Jz(0));
                self.push_const(Literal::Bool(true));
                let end = self.emit(Instr::Jmp(0));
                self.patch(j1);
                self.patch(j2);
                self.push_const(Literal::Bool(false));
                self.patch(end);
            }
            Expr::Or(l, r) => {
                check_bool(l, "operand of ||")?;
                check_bool(r, "operand of ||")?;
                self.expr(l)?;
                let j1 = self.emit(Instr::Jz(0));
                self.push_const(Literal::Bool(true));
                let end1 = self.emit(Instr::Jmp(0));
                self.patch(j1);
                self.expr(r)?;
                let j2 = self.emit(Instr::Jz(0));
                self.push_const(Literal::Bool(true));
                let end2 = self.emit(Instr::Jmp(0));
                self.patch(j2);
                self.push_const(Literal::Bool(false));
                self.patch(end1);
                self.patch(end2);
            }
            Expr::Cond {
                cond,
                then,
                otherwise,
            } => self.cond(cond, then, otherwise, false)?,
            Expr::Call { callee, args } => self.call(callee, args)?,
            Expr::Lambda { params, body } => self.lambda(params, body)?,
            Expr::List { items, tail } => {
                for it in items {
                    self.expr(it)?;
                }
                match tail {
                    Some(t) => {
                        if let Some(ty) = const_type(t).filter(|t| *t != TypeId::List) {
                            return Err(err(
                                CompileErrorKind::Type,
                                format!("the tail after `|` must be a list, not the constant type {ty}"),
                            ));
                        }
                        self.expr(t)?;
                        self.emit(Instr::Cons(items.len() as u32));
                    }
                    None => {
                        self.emit(Instr::NewList(items.len() as u32));
                    }
                }
            }
            Expr::Json(fields) => {
                for (k, v) in fields {
                    self.push_const(Literal::Str(k.clone()));
                    self.expr(v)?;
                }
                self.emit(Instr::NewJson(fields.len() as u32));
            }
            Expr::Index(t, i) => {
                self.expr(t)?;
                self.expr(i)?;
                self.emit(Instr::Index);
            }
            Expr::Head(t) => {
                self.expr(t)?;
                self.emit(Instr::Head);
            }
            Expr::Tail(t) => {
                self.expr(t)?;
                self.emit(Instr::Tail);
            }
            Expr::SuffixAfter(t, i) => {
                self.expr(t)?;
                self.expr(i)?;
                self.emit(Instr::Suffix);
            }
            Expr::Slice { target, lo, hi } => {
                self.expr(target)?;
                if let Some(lo) = lo {
                    self.expr(lo)?;
                }
                if let Some(hi) = hi {
                    self.expr(hi)?;
                }
                self.emit(Instr::Slice {
                    lo: lo.is_some(),
                    hi: hi.is_some(),
                });
            }
            Expr::TypeOf(x) => {
                self.expr(x)?;
                self.emit(Instr::TypeOf);
            }
            Expr::Len(x) => {
                self.expr(x)?;
                self.emit(Instr::Len);
            }
            Expr::Exc(x) => {
                self.expr(x)?;
                self.emit(Instr::Exc);
            }
            Expr::ReadFile(path) => {
                if !self.star() {
                    return Err(err(
                        CompileErrorKind::Placement,
                        format!("`<<` reads a file and requires a star function (in `{}`)", self.context_name()),
                    ));
                }
                let k = self.constant(Literal::Str(path.clone()));
                self.emit(Instr::FRead(k));
            }
        }
        Ok(())
    }

    fn cond(&mut self, cond: &Expr, then: &Body, otherwise: &Body, tail: bool) -> CompileResult<()> {
        check_bool(cond, "a condition")?;
        self.expr(cond)?;
        let jz = self.emit(Instr::Jz(0));
        self.body(then, tail)?;
        let jmp = (!tail).then(|| self.emit(Instr::Jmp(0)));
        self.patch(jz);
        self.body(otherwise, tail)?;
        if let Some(j) = jmp {
            self.patch(j);
        }
        Ok(())
    }

    /// Pre-blocks, the core value, post-blocks; in tail position every path
    /// ends with RET.
    fn body(&mut self, body: &Body, tail: bool) -> CompileResult<()> {
        for b in &body.pre {
            self.block(b)?;
        }
        let core_tail = tail && body.post.is_empty();
        match &body.expr {
            Expr::Cond {
                cond,
                then,
                otherwise,
            } => self.cond(cond, then, otherwise, core_tail)?,
            other => {
                self.expr(other)?;
                if core_tail {
                    self.emit(Instr::Ret);
                }
            }
        }
        for b in &body.post {
            self.block(b)?;
        }
        if tail && !body.post.is_empty() {
            self.emit(Instr::Ret);
        }
        Ok(())
    }

    fn block(&mut self, b: &Block) -> CompileResult<()> {
        match b {
            Block::Print(e) => {
                self.expr(e)?;
                self.emit(Instr::Print(true));
            }
            Block::Set { target, op, value } => {
                let level = self.ctxs.len() - 1;
                let slot = self.resolve(level, &target.name).ok_or_else(|| {
                    err(
                        CompileErrorKind::UnknownName,
                        format!(
                            "`{}` is not a local, parameter or labeled variable of `{}`",
                            target.name,
                            self.context_name()
                        ),
                    )
                })?;
                if target.path.is_empty() {
                    if let Some(a) = op.arith() {
                        self.load(slot);
                        self.expr(value)?;
                        self.emit(arith_instr(a));
                    } else {
                        self.expr(value)?;
                    }
                    self.emit(match slot {
                        Slot::Param(i, _) => Instr::StoreP(i),
                        Slot::Local(i) => Instr::StoreL(i),
                        Slot::Global(g) => Instr::StoreG(g),
                    });
                } else {
                    self.load(slot);
                    let (last, path) = target.path.split_last().expect("nonempty path");
                    for s in path {
                        match s {
                            Subscript::Head => {
                                self.emit(Instr::Head);
                            }
                            Subscript::Index(e) => {
                                self.expr(e)?;
                                self.emit(Instr::Index);
                            }
                        }
                    }
                    match last {
                        Subscript::Head => self.push_const(Literal::Int(0)),
                        Subscript::Index(e) => self.expr(e)?,
                    }
                    if let Some(a) = op.arith() {
                        self.emit(Instr::Dup2);
                        self.emit(Instr::Index);
                        self.expr(value)?;
                        self.emit(arith_instr(a));
                    } else {
                        self.expr(value)?;
                    }
                    self.emit(Instr::SetIdx);
                }
            }
        }
        Ok(())
    }

    fn call(&mut self, callee: &Expr, args: &[Expr]) -> CompileResult<()> {
        let argc = u8_count(args.len(), "arguments")?;
        if let Expr::Name(name) = callee {
            let level = self.ctxs.len() - 1;
            if let Some(slot) = self.resolve(level, name) {
                match slot {
                    Slot::Param(_, Some(0)) => {
                        return Err(err(
                            CompileErrorKind::Arity,
                            format!("parameter `{name}` is not declared as a function (write `{name}/n`)"),
                        ))
                    }
                    Slot::Param(_, Some(n)) if n != argc => {
                        return Err(err(
                            CompileErrorKind::Arity,
                            format!("`{name}` has arity {n} but is called with {argc} argument(s)"),
                        ))
                    }
                    _ => {}
                }
                self.load(slot);
                self.args(args, None)?;
                self.emit(Instr::CallInd(argc));
                return Ok(());
            }
            let id = self.function_ref(name)?;
            if let Some(sig) = self.sig_of(id, name) {
                if sig.params.len() != args.len() {
                    return Err(err(
                        CompileErrorKind::Arity,
                        format!(
                            "`{name}` expects {} argument(s), got {}",
                            sig.params.len(),
                            args.len()
                        ),
                    ));
                }
                if sig.star && !self.star() {
                    return Err(err(
                        CompileErrorKind::StarCall,
                        format!(
                            "star function `{name}` cannot be called by non-star `{}`",
                            self.context_name()
                        ),
                    ));
                }
                self.args(args, Some((name, &sig.params)))?;
            } else {
                self.args(args, None)?;
            }
            self.emit(Instr::Call(id, argc));
            return Ok(());
        }
        if let Expr::Call { callee: inner, .. } = callee {
            if let Expr::Name(g) = inner.as_ref() {
                let level = self.ctxs.len() - 1;
                if self.resolve(level, g).is_none() {
                    if let Some(sig) = self.syms.fn_id(g).and_then(|id| self.sig_of(id, g)) {
                        if sig.ret_arity > 0 && sig.ret_arity != argc {
                            return Err(err(
                                CompileErrorKind::Arity,
                                format!(
                                    "`{g}` returns a function of arity {}, called with {argc} argument(s)",
                                    sig.ret_arity
                                ),
                            ));
                        }
                    }
                }
            }
        }
        self.expr(callee)?;
        self.args(args, None)?;
        self.emit(Instr::CallInd(argc));
        Ok(())
    }

    /// Compiles arguments; with a known callee signature, function-valued
    /// arguments are checked against the declared parameter arities.
    fn args(&mut self, args: &[Expr], sig: Option<(&str, &[u8])>) -> CompileResult<()> {
        for (i, a) in args.iter().enumerate() {
            if let Some((callee, arities)) = sig {
                let want = arities[i];
                if want > 0 {
                    if let Some(got) = self.static_arity(a) {
                        if got != want {
                            return Err(err(
                                CompileErrorKind::Arity,
                                format!(
                                    "argument {} of `{callee}` must be a function of arity {want}, got arity {got}",
                                    i + 1
                                ),
                            ));
                        }
                    }
                }
            }
            self.expr(a)?;
        }
        Ok(())
    }

    /// Arity of a function-valued argument when it is known statically.
    fn static_arity(&mut self, a: &Expr) -> Option<u8> {
        match a {
            Expr::Lambda { params, .. } => u8::try_from(params.len()).ok(),
            Expr::Name(n) => {
                let level = self.ctxs.len() - 1;
                if let Some(slot) = self.resolve(level, n) {
                    return match slot {
                        Slot::Param(_, Some(k)) if k > 0 => Some(k),
                        _ => None,
                    };
                }
                let id = self.syms.fn_id(n)?;
                self.sig_of(id, n).map(|s| s.params.len() as u8)
            }
            _ => None,
        }
    }

    fn lambda(&mut self, params: &[String], body: &Expr) -> CompileResult<()> {
        for (i, p) in params.iter().enumerate() {
            if params[..i].contains(p) {
                return Err(err(
                    CompileErrorKind::Placement,
                    format!("lambda parameter `{p}` is declared twice"),
                ));
            }
        }
        let parent = self.ctxs.last().expect("lambda outside a context");
        let idx = parent.unit.lambdas.len();
        let mut ctx = Ctx::new(
            &format!("{}${idx}", parent.unit.name),
            parent.unit.star,
            parent.top_level,
        );
        ctx.lambda = true;
        ctx.labels = parent.labels.clone();
        ctx.header_labels = parent.header_labels.clone();
        ctx.unit.params = vec![0; params.len()];
        ctx.vars = params
            .iter()
            .map(|p| Var {
                name: p.clone(),
                arity: None,
            })
            .collect();
        self.ctxs.push(ctx);
        let result = match body {
            Expr::Cond {
                cond,
                then,
                otherwise,
            } => self.cond(cond, then, otherwise, true),
            other => self.expr(other).map(|_| {
                self.emit(Instr::Ret);
            }),
        };
        let mut ctx = self.ctxs.pop().expect("lambda context");
        result?;
        ctx.unit.star = ctx.unit.star && self.needs_star(&ctx.unit);
        for src in &ctx.capture_sources {
            self.load(*src);
        }
        let idx = {
            let parent = self.ctx();
            parent.unit.lambdas.push(Rc::new(ctx.unit));
            parent.unit.lambdas.len() - 1
        };
        self.emit(Instr::MkClosure(idx as u32, ctx.capture_sources.len() as u16));
        Ok(())
    }
}

impl Gen<'_> {
    /// A lambda stays star only if its own code touches globals or calls a
    /// star function by name.
    fn needs_star(&self, unit: &CompileUnit) -> bool {
        unit.code.iter().any(|i| match *i {
            Instr::LoadG(_) | Instr::StoreG(_) | Instr::StoreP(_) | Instr::SetIdx | Instr::FRead(_) => true,
            Instr::Call(id, _) | Instr::TailCall(id, _) => self.syms.sig(id).is_some_and(|s| s.star),
            _ => false,
        })
    }
}

fn arith_instr(op: ArithOp) -> Instr {
    match op {
        ArithOp::Add => Instr::Add,
        ArithOp::Sub => Instr::Sub,
        ArithOp::Mul => Instr::Mul,
        ArithOp::Div => Instr::Div,
        ArithOp::IDiv => Instr::IDiv,
        ArithOp::Mod => Instr::Mod,
    }
}

pub(super) fn function(def: &FunctionDef, syms: &mut Symbols) -> CompileResult<CompileUnit> {
    let mut ctx = Ctx::new(&def.name, def.star, false);
    ctx.unit.params = def.params.iter().map(|p| p.arity).collect();
    ctx.unit.ret_arity = def.ret_arity;
    ctx.unit.locals = u16::try_from(def.locals.len())
        .map_err(|_| err(CompileErrorKind::Placement, "too many locals"))?;
    ctx.vars = def
        .params
        .iter()
        .map(|p| Var {
            name: p.name.clone(),
            arity: Some(p.arity),
        })
        .collect();
    ctx.locals = def.locals.clone();
    for label in &def.labels {
        let vars: Vec<String> = syms
            .label_vars(label)
            .ok_or_else(|| {
                err(
                    CompileErrorKind::UnknownName,
                    format!("label `{label}` used by `{}` is not declared", def.name),
                )
            })?
            .to_vec();
        for v in vars {
            if ctx.vars.iter().any(|p| p.name == v) || ctx.locals.contains(&v) {
                continue;
            }
            let g = syms.intern_global(&labeled_name(label, &v));
            ctx.labels.insert(v, g);
        }
    }
    ctx.header_labels = def.labels.clone();
    ctx.self_fn = Some((def.name.clone(), FnSig::of(def)));
    let mut gen = Gen {
        syms,
        ctxs: vec![ctx],
    };
    gen.body(&def.body, true)?;
    Ok(gen.ctxs.pop().expect("function context").unit)
}

fn top_ctx(name: &str) -> Ctx {
    Ctx::new(name, true, true)
}

pub(super) fn query(expr: &Expr, show_null: bool, syms: &mut Symbols) -> CompileResult<CompileUnit> {
    let mut gen = Gen {
        syms,
        ctxs: vec![top_ctx("query")],
    };
    gen.expr(expr)?;
    gen.emit(Instr::Print(show_null));
    gen.emit(Instr::Halt);
    Ok(gen.ctxs.pop().expect("query context").unit)
}

pub(super) fn assignment(
    label: Option<&str>,
    name: &str,
    op: AssignOp,
    value: &Expr,
    syms: &mut Symbols,
) -> CompileResult<(CompileUnit, GlobalId)> {
    let target = match label {
        Some(l) => labeled_name(l, name),
        None => name.to_string(),
    };
    let mut gen = Gen {
        syms,
        ctxs: vec![top_ctx(&target)],
    };
    let g = match label {
        Some(l) => gen.labeled_slot(l, name)?,
        None => gen.syms.intern_global(name),
    };
    if let Some(a) = op.arith() {
        if !gen.syms.is_defined(g) {
            return Err(err(
                CompileErrorKind::UnknownName,
                format!("`{target}` must be defined before `{}`", op.symbol()),
            ));
        }
        gen.emit(Instr::LoadG(g));
        gen.expr(value)?;
        gen.emit(arith_instr(a));
    } else {
        gen.expr(value)?;
    }
    gen.emit(Instr::StoreG(g));
    gen.emit(Instr::Halt);
    Ok((gen.ctxs.pop().expect("assignment context").unit, g))
}
