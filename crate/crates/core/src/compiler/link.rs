use std::collections::HashSet;
use std::rc::Rc;

use super::{CompileError, CompileErrorKind, CompileResult, Symbols};
use crate::clvm::{CompileUnit, FnId, Instr};

/// Rewrites self-calls in tail position (a CALL followed by RET, directly or
/// through a JMP to a RET) into frame-reusing TAILCALLs. Nested lambdas are
/// left untouched.
pub fn tail_call_optimize(unit: &CompileUnit, self_id: FnId) -> CompileUnit {
    let mut out = unit.clone();
    let code = &mut out.code;
    for i in 0..code.len().saturating_sub(1) {
        let Instr::Call(id, argc) = code[i] else {
            continue;
        };
        if id != self_id {
            continue;
        }
        let returns = match code[i + 1] {
            Instr::Ret => true,
            Instr::Jmp(t) => code.get(t as usize) == Some(&Instr::Ret),
            _ => false,
        };
        if returns {
            code[i] = Instr::TailCall(id, argc);
        }
    }
    out
}

/// Checks, before running `entry`, that every function reachable from it is
/// defined, is called with its declared parameter count, and that no
/// non-star code calls a star function by name.
pub fn link_check(
    entry: &CompileUnit,
    functions: &[Option<Rc<CompileUnit>>],
    syms: &Symbols,
) -> CompileResult<()> {
    let mut seen: HashSet<FnId> = HashSet::new();
    let mut pending: Vec<&CompileUnit> = vec![entry];
    while let Some(unit) = pending.pop() {
        let mut units = Vec::new();
        unit.walk(&mut |u| units.push(u));
        for u in units {
            for instr in &u.code {
                let (id, argc) = match *instr {
                    Instr::Call(id, n) | Instr::TailCall(id, n) => (id, Some(n)),
                    Instr::MkFunc(id) => (id, None),
                    _ => continue,
                };
                let name = syms.fn_name(id);
                let Some(callee) = functions.get(id as usize).and_then(|f| f.as_deref()) else {
                    return Err(CompileError::new(
                        CompileErrorKind::UnknownName,
                        format!("function `{name}` (used by `{}`) is not defined", u.name),
                    ));
                };
                if let Some(n) = argc {
                    if callee.params.len() != n as usize {
                        return Err(CompileError::new(
                            CompileErrorKind::Arity,
                            format!(
                                "`{}` calls `{name}` with {n} argument(s), but it expects {}",
                                u.name,
                                callee.params.len()
                            ),
                        ));
                    }
                    if callee.star && !u.star {
                        return Err(CompileError::new(
                            CompileErrorKind::StarCall,
                            format!(
                                "star function `{name}` cannot be called by non-star `{}`",
                                u.name
                            ),
                        ));
                    }
                }
                if seen.insert(id) {
                    pending.push(callee);
                }
            }
        }
    }
    Ok(())
}
