//! The REPL shell: session state, statement dispatch, service commands and
//! value file I/O.

mod fileio;

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::Write;
use std::rc::Rc;

pub use fileio::{constant_value, read_value, write_value};

use crate::assembler::disassemble;
use crate::clvm::{CompileUnit, Linkage, Machine};
use crate::compiler::{
    compile_assignment, compile_function, compile_query, link_check, Symbols,
};
use crate::error::{CalcError, CalcResult};
use crate::frontend::ast::{FunctionDef, ServiceCommand, Statement};
use crate::frontend::{parse_statement, script_inputs, split_statements};
use crate::values::{Style, Value};

/// A defined function with both code variants.
#[derive(Debug, Clone)]
pub struct FunctionEntry {
    pub def: FunctionDef,
    pub source: String,
    pub plain: Rc<CompileUnit>,
    pub optimized: Rc<CompileUnit>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Options {
    /// Tail-call optimizer.
    pub opt: bool,
    /// Instruction trace on stderr.
    pub debug: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            opt: true,
            debug: false,
        }
    }
}

/// Result of one statement: console text, and the error if it failed.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub error: Option<CalcError>,
}

pub struct Session {
    machine: Machine,
    syms: Symbols,
    functions: Vec<Option<FunctionEntry>>,
    plain_table: Vec<Option<Rc<CompileUnit>>>,
    opt_table: Vec<Option<Rc<CompileUnit>>>,
    globals: Vec<Value>,
    history: Vec<String>,
    options: Options,
    redirect: Option<(String, File)>,
    last_clops: u64,
}

impl Default for Session {
    fn default() -> Self {
        Session::new()
    }
}

fn service_error(message: impl Into<String>) -> CalcError {
    CalcError::Service(message.into())
}

fn one_line(stmt: &str) -> String {
    stmt.split_whitespace().collect::<Vec<_>>().join(" ")
}

impl Session {
    pub fn new() -> Self {
        Session {
            machine: Machine::new(),
            syms: Symbols::new(),
            functions: Vec::new(),
            plain_table: Vec::new(),
            opt_table: Vec::new(),
            globals: Vec::new(),
            history: Vec::new(),
            options: Options::default(),
            redirect: None,
            last_clops: 0,
        }
    }

    pub fn options(&self) -> Options {
        self.options
    }

    pub fn set_opt(&mut self, on: bool) {
        self.options.opt = on;
    }

    pub fn set_debug(&mut self, on: bool) {
        self.options.debug = on;
        self.machine
            .set_trace(if on { Some(Box::new(std::io::stderr())) } else { None });
    }

    /// Frame limit of the machine.
    pub fn set_max_depth(&mut self, frames: usize) {
        self.machine.set_max_depth(frames);
    }

    pub fn last_clops(&self) -> u64 {
        self.last_clops
    }

    /// Deepest call nesting of the last execution.
    pub fn last_depth(&self) -> usize {
        self.machine.peak_depth()
    }

    pub fn history(&self) -> &[String] {
        &self.history
    }

    pub fn symbols(&self) -> &Symbols {
        &self.syms
    }

    pub fn function(&self, name: &str) -> Option<&FunctionEntry> {
        let id = self.syms.fn_id(name)?;
        self.functions.get(id as usize)?.as_ref()
    }

    pub fn functions(&self) -> impl Iterator<Item = &FunctionEntry> {
        self.functions.iter().flatten()
    }

    /// Current value of a defined global (`"x"` or `"L.x"`), in print form.
    pub fn global_text(&self, name: &str) -> Option<String> {
        let id = self.syms.defined_global(name)?;
        let v = *self.globals.get(id as usize)?;
        Some(self.machine.heap.render(v, Style::TOP_SHOW_NULL))
    }

    pub fn global_value(&self, name: &str) -> Option<Value> {
        let id = self.syms.defined_global(name)?;
        self.globals.get(id as usize).copied()
    }

    pub fn heap(&self) -> &crate::values::Heap {
        &self.machine.heap
    }

    /// Evaluates every statement of `src`; returns what goes to the console,
    /// error messages included.
    pub fn eval_input(&mut self, src: &str) -> String {
        let mut out = String::new();
        for o in self.eval(src) {
            out.push_str(&o.text);
            if let Some(e) = o.error {
                let _ = writeln!(out, "error: {e}");
            }
        }
        out
    }

    /// Evaluates every statement of `src` in order. A failing statement
    /// does not stop the following ones.
    pub fn eval(&mut self, src: &str) -> Vec<Outcome> {
        split_statements(src)
            .into_iter()
            .map(|stmt| {
                let mut text = String::new();
                let error = self.statement(stmt, &mut text).err();
                Outcome { text, error }
            })
            .collect()
    }

    /// Evaluates a script line by line, as if typed at the prompt: a line
    /// that leaves a statement unfinished is joined with the next ones.
    pub fn eval_script(&mut self, text: &str) -> Vec<Outcome> {
        script_inputs(text)
            .iter()
            .flat_map(|input| self.eval(input))
            .collect()
    }

    fn statement(&mut self, src: &str, out: &mut String) -> CalcResult<()> {
        let stmt = parse_statement(src)?;
        let record = !matches!(stmt, Statement::Service(_));
        let result = self.dispatch(stmt, src, out);
        // statements that reached the machine are replayed, errors included
        let reached = !matches!(
            result,
            Err(CalcError::Syntax(_) | CalcError::Compile(_) | CalcError::Io(_))
        );
        if record && reached {
            self.history.push(one_line(src));
        }
        result
    }

    fn dispatch(&mut self, stmt: Statement, src: &str, out: &mut String) -> CalcResult<()> {
        match stmt {
            Statement::Function(def) => {
                crate::frontend::validate_function(&def).map_err(|m| {
                    CalcError::Compile(crate::compiler::CompileError {
                        kind: crate::compiler::CompileErrorKind::Placement,
                        message: m,
                    })
                })?;
                let f = compile_function(&def, &mut self.syms)?;
                let id = f.id as usize;
                self.sync_tables();
                self.plain_table[id] = Some(f.plain.clone());
                self.opt_table[id] = Some(f.optimized.clone());
                self.functions[id] = Some(FunctionEntry {
                    def,
                    source: one_line(src),
                    plain: f.plain,
                    optimized: f.optimized,
                });
                Ok(())
            }
            Statement::LabelDecl { label, names } => {
                let ids = self.syms.declare_label(&label, &names);
                self.sync_tables();
                for id in ids {
                    self.globals[id as usize] = Value::Null;
                }
                Ok(())
            }
            Statement::Assign {
                label,
                name,
                op,
                value,
            } => {
                let (unit, id) =
                    compile_assignment(label.as_deref(), &name, op, &value, &mut self.syms)?;
                self.run(&unit, out)?;
                self.syms.mark_defined(id);
                Ok(())
            }
            Statement::Query { expr, show_null } => {
                let unit = compile_query(&expr, show_null, &mut self.syms)?;
                self.run(&unit, out)
            }
            Statement::Redirect(path) => {
                self.redirect = match path {
                    None => None,
                    Some(p) => {
                        let f = File::create(&p)
                            .map_err(|e| CalcError::Io(format!("cannot open `{p}`: {e}")))?;
                        Some((p, f))
                    }
                };
                Ok(())
            }
            Statement::Service(cmd) => self.service(&cmd, out),
        }
    }

    fn sync_tables(&mut self) {
        let n = self.syms.fn_count();
        self.functions.resize(n, None);
        self.plain_table.resize(n, None);
        self.opt_table.resize(n, None);
        self.globals.resize(self.syms.global_count(), Value::Null);
    }

    fn run(&mut self, unit: &Rc<CompileUnit>, out: &mut String) -> CalcResult<()> {
        self.sync_tables();
        let table = if self.options.opt {
            &self.opt_table
        } else {
            &self.plain_table
        };
        link_check(unit, table, &self.syms)?;
        let mut link = Linkage {
            functions: table,
            fn_names: self.syms.fn_names(),
            globals: &mut self.globals,
        };
        let result = self.machine.execute(unit, &mut link);
        self.last_clops = self.machine.clops();
        let printed = self.machine.take_output();
        match self.redirect.as_mut() {
            Some((path, f)) => {
                f.write_all(printed.as_bytes())
                    .map_err(|e| CalcError::Io(format!("cannot write `{path}`: {e}")))?;
            }
            None => out.push_str(&printed),
        }
        result?;
        Ok(())
    }

    fn service(&mut self, cmd: &ServiceCommand, out: &mut String) -> CalcResult<()> {
        let arg = cmd.arg.as_deref().map(str::trim).filter(|a| !a.is_empty());
        let no_arg = || -> CalcResult<()> {
            match arg {
                Some(a) => Err(service_error(format!("`!{}` takes no argument, got `{a}`", cmd.name))),
                None => Ok(()),
            }
        };
        let switch = || -> CalcResult<bool> {
            match arg {
                Some("on") => Ok(true),
                Some("off") => Ok(false),
                _ => Err(service_error(format!("usage: !{} on|off", cmd.name))),
            }
        };
        let path = || -> CalcResult<String> {
            arg.map(crate::frontend::unquote_path)
                .ok_or_else(|| service_error(format!("usage: !{}(path)", cmd.name)))
        };
        match cmd.name.as_str() {
            "clops" => {
                no_arg()?;
                let _ = writeln!(out, "{}", self.last_clops);
            }
            "vars" => {
                no_arg()?;
                out.push_str(&self.vars_listing());
            }
            "funcs" => {
                no_arg()?;
                for f in self.functions() {
                    let _ = writeln!(out, "{}", f.def.signature());
                }
            }
            "history" => {
                no_arg()?;
                for h in &self.history {
                    let _ = writeln!(out, "{h}");
                }
            }
            "memory" => {
                no_arg()?;
                let (slots, frames) = self.machine.stack_usage();
                let s = self.machine.heap.stats();
                let _ = writeln!(
                    out,
                    "STACK: {slots} slots, {frames} frames (last peak {} frames, limit {})",
                    self.machine.peak_depth(),
                    self.machine.max_depth()
                );
                let _ = writeln!(
                    out,
                    "HEAP: {} strings, {} list cells, {} jsons, {} closures",
                    s.strings, s.cells, s.jsons, s.closures
                );
            }
            "debug" => {
                let on = switch()?;
                self.set_debug(on);
            }
            "opt" => {
                let on = switch()?;
                self.set_opt(on);
            }
            "save" => {
                let p = path()?;
                let mut text = String::new();
                for h in &self.history {
                    text.push_str(h);
                    text.push('\n');
                }
                fs::write(&p, text).map_err(|e| CalcError::Io(format!("cannot write `{p}`: {e}")))?;
            }
            "import" => {
                let p = path()?;
                let text = fs::read_to_string(&p)
                    .map_err(|e| CalcError::Io(format!("cannot read `{p}`: {e}")))?;
                let mut failed = 0;
                for o in self.eval_script(&text) {
                    out.push_str(&o.text);
                    if let Some(e) = o.error {
                        failed += 1;
                        let _ = writeln!(out, "error: {e}");
                    }
                }
                if failed > 0 {
                    return Err(service_error(format!(
                        "{failed} statement(s) of `{p}` failed"
                    )));
                }
            }
            "code" => {
                let name = arg.ok_or_else(|| service_error("usage: !code name"))?;
                let f = self
                    .function(name)
                    .ok_or_else(|| service_error(format!("function `{name}` is not defined")))?;
                let unit = if self.options.opt {
                    &f.optimized
                } else {
                    &f.plain
                };
                out.push_str(&disassemble(unit, &self.syms));
            }
            other => return Err(service_error(format!("unknown command `!{other}`"))),
        }
        Ok(())
    }

    /// `name: type = value` per defined global, labeled ones as `L.name`.
    pub fn vars_listing(&self) -> String {
        let mut out = String::new();
        for id in 0..self.syms.global_count() as u32 {
            if !self.syms.is_defined(id) {
                continue;
            }
            let v = self.globals[id as usize];
            let _ = writeln!(
                out,
                "{}: {} = {}",
                self.syms.global_name(id),
                v.type_id(),
                self.machine.heap.render(v, Style::NESTED)
            );
        }
        out
    }
}
