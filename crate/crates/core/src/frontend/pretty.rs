//! Source rendering of ASTs. Output re-parses to the same tree.

use std::fmt::{self, Display, Formatter, Write};

use super::ast::*;
use crate::values::{format_double, quote_char, quote_str};

impl Display for Literal {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Double(d) => f.write_str(&format_double(*d)),
            Literal::Int(i) => write!(f, "{i}"),
            Literal::Char(c) => f.write_str(&quote_char(*c)),
            Literal::Bool(b) => write!(f, "{b}"),
            Literal::Null => f.write_str("null"),
            Literal::Type(t) => f.write_str(t.name()),
            Literal::Str(s) => f.write_str(&quote_str(s)),
        }
    }
}

fn comma_list<T: Display>(f: &mut Formatter<'_>, items: &[T]) -> fmt::Result {
    for (i, it) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{it}")?;
    }
    Ok(())
}

impl Display for Expr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Lit(l) => write!(f, "{l}"),
            Expr::Name(n) => f.write_str(n),
            Expr::Labeled { label, name } => write!(f, "{label}.{name}"),
            Expr::Unary(op, e) => write!(f, "({}{e})", op.symbol()),
            Expr::Arith(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
            Expr::Compare(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
            Expr::And(l, r) => write!(f, "({l} && {r})"),
            Expr::Or(l, r) => write!(f, "({l} || {r})"),
            Expr::Cond { .. } => {
                f.write_char('(')?;
                write_core(f, self)?;
                f.write_char(')')
            }
            Expr::Call { callee, args } => {
                write!(f, "{callee}(")?;
                comma_list(f, args)?;
                f.write_char(')')
            }
            Expr::Lambda { params, body } => {
                write!(f, "lambda {}: {body}", params.join(", "))
            }
            Expr::List { items, tail } => {
                f.write_char('[')?;
                comma_list(f, items)?;
                if let Some(t) = tail {
                    write!(f, " | {t}")?;
                }
                f.write_char(']')
            }
            Expr::Json(fields) => {
                f.write_char('{')?;
                for (i, (k, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{}: {v}", quote_str(k))?;
                }
                f.write_char('}')
            }
            Expr::Index(t, i) => write!(f, "{t}[{i}]"),
            Expr::Head(t) => write!(f, "{t}[.]"),
            Expr::Tail(t) => write!(f, "{t}[>]"),
            Expr::SuffixAfter(t, i) => write!(f, "{t}[>{i}]"),
            Expr::Slice { target, lo, hi } => {
                write!(f, "{target}[")?;
                if let Some(lo) = lo {
                    write!(f, "{lo}")?;
                }
                f.write_char(':')?;
                if let Some(hi) = hi {
                    write!(f, "{hi}")?;
                }
                f.write_char(']')
            }
            Expr::TypeOf(e) => write!(f, "{e}@type"),
            Expr::Len(e) => write!(f, "_len({e})"),
            Expr::Exc(e) => write!(f, "exc({e})"),
            Expr::ReadFile(p) => write!(f, "<<({p})"),
        }
    }
}

/// A body's core expression: conditionals are written without parentheses
/// so that their branches can carry setting commands.
fn write_core(f: &mut Formatter<'_>, e: &Expr) -> fmt::Result {
    match e {
        Expr::Cond {
            cond,
            then,
            otherwise,
        } => write!(f, "{cond} ? {then} : {otherwise}"),
        other => write!(f, "{other}"),
    }
}

impl Display for Block {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Block::Set { target, op, value } => {
                write!(f, "{{! {}", target.name)?;
                for s in &target.path {
                    match s {
                        Subscript::Head => f.write_str("[.]")?,
                        Subscript::Index(e) => write!(f, "[{e}]")?,
                    }
                }
                write!(f, " {} {value} !}}", op.symbol())
            }
            Block::Print(e) => write!(f, "{{^ {e} ^}}"),
        }
    }
}

impl Display for Body {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        for b in &self.pre {
            write!(f, "{b} ")?;
        }
        write_core(f, &self.expr)?;
        for b in &self.post {
            write!(f, " {b}")?;
        }
        Ok(())
    }
}

impl Display for FunctionDef {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.signature())?;
        if !self.labels.is_empty() || !self.locals.is_empty() {
            let items: Vec<String> = self
                .labels
                .iter()
                .map(|l| format!("{l}*"))
                .chain(self.locals.iter().cloned())
                .collect();
            write!(f, "<{}> ", items.join(", "))?;
        }
        write!(f, "{}", self.body)
    }
}

impl Display for Statement {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Statement::Assign {
                label,
                name,
                op,
                value,
            } => {
                if let Some(l) = label {
                    write!(f, "{l}.")?;
                }
                write!(f, "{name} {} {value};", op.symbol())
            }
            Statement::LabelDecl { label, names } => {
                write!(f, "{label}: {};", names.join(", "))
            }
            Statement::Function(def) => write!(f, "{def};"),
            Statement::Query { expr, show_null } => {
                write!(f, "^{expr}{};", if *show_null { " %" } else { "" })
            }
            Statement::Redirect(p) => write!(f, ">>({});", p.as_deref().unwrap_or("")),
            Statement::Service(cmd) => match &cmd.arg {
                Some(a) => write!(f, "!{}({a})", cmd.name),
                None => write!(f, "!{}", cmd.name),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse_statement;

    #[test]
    fn printed_statements_reparse_identically() {
        let corpus = [
            "fibe1(x,f2,f1,k) :  x==k?  f1: fibe1(x,f1,f1+f2,k+1);",
            "twice(f/1)/1: lambda x: f(f(x));",
            "div*(x,y): <MATH*>  {! zeroD=false !} y==0 ? 0 {! zeroD=true !}:x/y;",
            "^quicksort([3,11,2,8,6,5], lambda x,y: x<=y);",
            "emps = [ { \"name\": \"e1\", \"age\": 30 } ];",
            "^emps[0][\"projects\"] %",
            "MATH1.numErr += -1;",
            "f(L): L[>0][:2] + L[1:][>] + [L[.] | L];",
            "g(x): (x ? 1 : 2) * -x@type == int;",
        ];
        for src in corpus {
            let a = parse_statement(src).unwrap();
            let printed = a.to_string();
            let b = parse_statement(&printed)
                .unwrap_or_else(|e| panic!("reparse of `{printed}` failed: {e}"));
            assert_eq!(a, b, "{printed}");
        }
    }
}
