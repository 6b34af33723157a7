//! Translation of statements into CLVM units, with the static checks that
//! can be decided without running code.

mod codegen;
mod link;

use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

use indexmap::IndexMap;

use crate::clvm::{CompileUnit, FnId, GlobalId};
use crate::frontend::ast::{AssignOp, Expr, FunctionDef};

pub use link::{link_check, tail_call_optimize};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompileErrorKind {
    UnknownName,
    Arity,
    /// A non-star context calls a star function.
    StarCall,
    /// Constant operands of incompatible types.
    Type,
    Placement,
    /// A redefinition changes the star flag.
    Redefinition,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompileError {
    pub kind: CompileErrorKind,
    pub message: String,
}

impl CompileError {
    pub(crate) fn new(kind: CompileErrorKind, message: impl Into<String>) -> Self {
        CompileError {
            kind,
            message: message.into(),
        }
    }
}

impl fmt::Display for CompileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            CompileErrorKind::UnknownName => "unknown name",
            CompileErrorKind::Arity => "arity error",
            CompileErrorKind::StarCall => "star call error",
            CompileErrorKind::Type => "type error",
            CompileErrorKind::Placement => "misplaced construct",
            CompileErrorKind::Redefinition => "redefinition error",
        };
        write!(f, "{what}: {}", self.message)
    }
}

impl std::error::Error for CompileError {}

pub type CompileResult<T> = Result<T, CompileError>;

/// Statically known shape of a defined function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FnSig {
    pub star: bool,
    pub params: Vec<u8>,
    pub ret_arity: u8,
}

impl FnSig {
    pub fn of(def: &FunctionDef) -> Self {
        FnSig {
            star: def.star,
            params: def.params.iter().map(|p| p.arity).collect(),
            ret_arity: def.ret_arity,
        }
    }
}

/// Name tables shared by every compilation in a session. Function and
/// global ids are dense and never reused.
#[derive(Debug, Default, Clone)]
pub struct Symbols {
    fn_names: Vec<String>,
    fn_ids: HashMap<String, FnId>,
    sigs: Vec<Option<FnSig>>,
    global_names: Vec<String>,
    global_ids: HashMap<String, GlobalId>,
    global_defined: Vec<bool>,
    labels: IndexMap<String, Vec<String>>,
}

/// Global-table name of a labeled variable.
pub fn labeled_name(label: &str, var: &str) -> String {
    format!("{label}.{var}")
}

impl Symbols {
    pub fn new() -> Self {
        Symbols::default()
    }

    pub fn fn_id(&self, name: &str) -> Option<FnId> {
        self.fn_ids.get(name).copied()
    }

    pub fn intern_fn(&mut self, name: &str) -> FnId {
        if let Some(id) = self.fn_id(name) {
            return id;
        }
        let id = self.fn_names.len() as FnId;
        self.fn_names.push(name.to_string());
        self.fn_ids.insert(name.to_string(), id);
        self.sigs.push(None);
        id
    }

    pub fn fn_names(&self) -> &[String] {
        &self.fn_names
    }

    pub fn fn_name(&self, id: FnId) -> &str {
        &self.fn_names[id as usize]
    }

    /// Signature of a defined function.
    pub fn sig(&self, id: FnId) -> Option<&FnSig> {
        self.sigs.get(id as usize).and_then(|s| s.as_ref())
    }

    pub fn set_sig(&mut self, id: FnId, sig: FnSig) {
        self.sigs[id as usize] = Some(sig);
    }

    pub fn fn_count(&self) -> usize {
        self.fn_names.len()
    }

    pub fn global_id(&self, name: &str) -> Option<GlobalId> {
        self.global_ids.get(name).copied()
    }

    pub fn intern_global(&mut self, name: &str) -> GlobalId {
        if let Some(id) = self.global_id(name) {
            return id;
        }
        let id = self.global_names.len() as GlobalId;
        self.global_names.push(name.to_string());
        self.global_ids.insert(name.to_string(), id);
        self.global_defined.push(false);
        id
    }

    pub fn global_name(&self, id: GlobalId) -> &str {
        &self.global_names[id as usize]
    }

    pub fn global_count(&self) -> usize {
        self.global_names.len()
    }

    /// A global that holds a value (assigned at least once, or declared by a label).
    pub fn defined_global(&self, name: &str) -> Option<GlobalId> {
        self.global_id(name)
            .filter(|&id| self.global_defined[id as usize])
    }

    pub fn is_defined(&self, id: GlobalId) -> bool {
        self.global_defined[id as usize]
    }

    pub fn mark_defined(&mut self, id: GlobalId) {
        self.global_defined[id as usize] = true;
    }

    /// Declares (or re-declares) a label; returns the ids of its variables.
    /// Names already listed under the label are kept.
    pub fn declare_label(&mut self, label: &str, names: &[String]) -> Vec<GlobalId> {
        let vars = self.labels.entry(label.to_string()).or_default();
        for n in names {
            if !vars.contains(n) {
                vars.push(n.clone());
            }
        }
        names
            .iter()
            .map(|n| {
                let id = self.intern_global(&labeled_name(label, n));
                self.mark_defined(id);
                id
            })
            .collect()
    }

    pub fn label_vars(&self, label: &str) -> Option<&[String]> {
        self.labels.get(label).map(|v| v.as_slice())
    }
}

/// Both code variants of a function; the session runs one of them
/// depending on the optimizer option.
#[derive(Debug, Clone)]
pub struct CompiledFunction {
    pub id: FnId,
    pub plain: Rc<CompileUnit>,
    pub optimized: Rc<CompileUnit>,
}

/// Compiles a definition and records its signature. Calls to functions
/// that are not defined yet are accepted here and checked by [`link_check`].
pub fn compile_function(def: &FunctionDef, syms: &mut Symbols) -> CompileResult<CompiledFunction> {
    let id = syms.intern_fn(&def.name);
    if let Some(old) = syms.sig(id) {
        if old.star != def.star {
            return Err(CompileError::new(
                CompileErrorKind::Redefinition,
                format!(
                    "`{}` was defined as a {} function; the star flag cannot change",
                    def.name,
                    if old.star { "star" } else { "non-star" }
                ),
            ));
        }
    }
    let plain = codegen::function(def, syms)?;
    let optimized = tail_call_optimize(&plain, id);
    syms.set_sig(id, FnSig::of(def));
    Ok(CompiledFunction {
        id,
        plain: Rc::new(plain),
        optimized: Rc::new(optimized),
    })
}

/// `^e;`: evaluates `e` and prints it.
pub fn compile_query(expr: &Expr, show_null: bool, syms: &mut Symbols) -> CompileResult<Rc<CompileUnit>> {
    codegen::query(expr, show_null, syms).map(Rc::new)
}

/// `V op= e;` or `L.V op= e;`. Returns the unit and the target global.
pub fn compile_assignment(
    label: Option<&str>,
    name: &str,
    op: AssignOp,
    value: &Expr,
    syms: &mut Symbols,
) -> CompileResult<(Rc<CompileUnit>, GlobalId)> {
    codegen::assignment(label, name, op, value, syms).map(|(u, g)| (Rc::new(u), g))
}

#[cfg(test)]
mod tests;
