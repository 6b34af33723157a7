use std::collections::HashSet;

use super::ast::*;
use super::lexer::{tokenize, Pos, Tok, Token};
use super::{SyntaxError, SyntaxErrorKind};
use crate::values::{ArithOp, CompareOp, UnaryOp};

type PResult<T> = Result<T, SyntaxError>;

struct Parser {
    toks: Vec<Token>,
    i: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let j = (self.i + k).min(self.toks.len() - 1);
        &self.toks[j].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].pos
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.i].tok.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.advance();
            true
        } else {
            false
        }
    }

    fn error(&self, message: impl Into<String>) -> SyntaxError {
        SyntaxError {
            kind: SyntaxErrorKind::Syntax,
            pos: self.pos(),
            message: message.into(),
            at_eof: *self.peek() == Tok::Eof,
        }
    }

    fn unexpected(&self, wanted: &str) -> SyntaxError {
        self.error(format!("expected {wanted}, found {}", self.peek()))
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(self.unexpected(&t.to_string()))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.advance();
                Ok(s)
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    fn small_int(&mut self, what: &str) -> PResult<u8> {
        match *self.peek() {
            Tok::Int(n) if (0..=255).contains(&n) => {
                self.advance();
                Ok(n as u8)
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn finish_statement(&mut self) -> PResult<()> {
        self.eat(&Tok::Semi);
        if *self.peek() != Tok::Eof {
            return Err(self.unexpected("`;`"));
        }
        Ok(())
    }

    // ---- statements ----

    fn statement(&mut self) -> PResult<Statement> {
        let stmt = match self.peek().clone() {
            Tok::Caret => {
                self.advance();
                let expr = self.expr()?;
                let show_null = self.eat(&Tok::Percent);
                Statement::Query { expr, show_null }
            }
            Tok::Redirect(p) => {
                self.advance();
                Statement::Redirect(if p.is_empty() { None } else { Some(p) })
            }
            Tok::Ident(name) => match self.peek_at(1).clone() {
                Tok::Colon => {
                    self.advance();
                    self.advance();
                    let mut names = vec![self.ident()?];
                    while self.eat(&Tok::Comma) {
                        names.push(self.ident()?);
                    }
                    Statement::LabelDecl { label: name, names }
                }
                Tok::Dot => {
                    self.advance();
                    self.advance();
                    let var = self.ident()?;
                    let op = self.assign_op()?;
                    let value = self.expr()?;
                    Statement::Assign {
                        label: Some(name),
                        name: var,
                        op,
                        value,
                    }
                }
                Tok::Star | Tok::LParen => Statement::Function(self.function()?),
                _ => {
                    self.advance();
                    let op = self.assign_op()?;
                    let value = self.expr()?;
                    Statement::Assign {
                        label: None,
                        name,
                        op,
                        value,
                    }
                }
            },
            Tok::Eof => return Err(self.error("empty statement")),
            _ => return Err(self.unexpected("a definition, `^` query or `!` command")),
        };
        self.finish_statement()?;
        Ok(stmt)
    }

    fn assign_op(&mut self) -> PResult<AssignOp> {
        let op = match self.peek() {
            Tok::Assign => AssignOp::Set,
            Tok::PlusAssign => AssignOp::Add,
            Tok::MinusAssign => AssignOp::Sub,
            Tok::StarAssign => AssignOp::Mul,
            Tok::SlashAssign => AssignOp::Div,
            _ => return Err(self.unexpected("an assignment operator")),
        };
        self.advance();
        Ok(op)
    }

    fn function(&mut self) -> PResult<FunctionDef> {
        let name = self.ident()?;
        let star = self.eat(&Tok::Star);
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        if !self.eat(&Tok::RParen) {
            loop {
                let pname = self.ident()?;
                let arity = if self.eat(&Tok::Slash) {
                    self.small_int("a parameter arity")?
                } else {
                    0
                };
                params.push(Param { name: pname, arity });
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(Tok::Comma)?;
            }
        }
        let ret_arity = if self.eat(&Tok::Slash) {
            self.small_int("a return arity")?
        } else {
            0
        };
        self.expect(Tok::Colon)?;
        let (mut labels, mut locals) = (Vec::new(), Vec::new());
        if self.eat(&Tok::Lt) {
            loop {
                let item = self.ident()?;
                if self.eat(&Tok::Star) {
                    labels.push(item);
                } else {
                    locals.push(item);
                }
                if self.eat(&Tok::Gt) {
                    break;
                }
                self.expect(Tok::Comma)?;
            }
        }
        let body = self.body(true)?;
        let def = FunctionDef {
            name,
            star,
            params,
            ret_arity,
            labels,
            locals,
            body,
        };
        validate_function(&def).map_err(|m| SyntaxError {
            kind: SyntaxErrorKind::Placement,
            pos: self.pos(),
            message: m,
            at_eof: false,
        })?;
        Ok(def)
    }

    // ---- setting blocks ----

    fn blocks(&mut self, allowed: bool) -> PResult<Vec<Block>> {
        let mut out = Vec::new();
        loop {
            match self.peek() {
                Tok::SetOpen | Tok::PrintOpen if !allowed => {
                    return Err(self.error(
                        "setting and printing commands are only allowed in function bodies",
                    ))
                }
                Tok::SetOpen => {
                    self.advance();
                    let name = self.ident()?;
                    let mut path = Vec::new();
                    while self.eat(&Tok::LBracket) {
                        if self.eat(&Tok::Dot) {
                            path.push(Subscript::Head);
                        } else {
                            path.push(Subscript::Index(self.expr()?));
                        }
                        self.expect(Tok::RBracket)?;
                    }
                    let op = self.assign_op()?;
                    let value = self.expr()?;
                    self.expect(Tok::SetClose)?;
                    out.push(Block::Set {
                        target: Target { name, path },
                        op,
                        value,
                    });
                }
                Tok::PrintOpen => {
                    self.advance();
                    let e = self.expr()?;
                    self.expect(Tok::PrintClose)?;
                    out.push(Block::Print(e));
                }
                _ => return Ok(out),
            }
        }
    }

    /// `blocks* (lambda | cond ? body : body | expr) blocks*`
    fn body(&mut self, blocks_allowed: bool) -> PResult<Body> {
        let pre = self.blocks(blocks_allowed)?;
        let expr = if *self.peek() == Tok::Lambda {
            self.lambda()?
        } else {
            self.ternary_tail(blocks_allowed)?
        };
        let post = self.blocks(blocks_allowed)?;
        Ok(Body { pre, expr, post })
    }

    fn ternary_tail(&mut self, blocks_allowed: bool) -> PResult<Expr> {
        let cond = self.or()?;
        if !self.eat(&Tok::Question) {
            return Ok(cond);
        }
        let then = self.body(blocks_allowed)?;
        self.expect(Tok::Colon)?;
        let otherwise = self.body(blocks_allowed)?;
        Ok(Expr::Cond {
            cond: Box::new(cond),
            then: Box::new(then),
            otherwise: Box::new(otherwise),
        })
    }

    // ---- expressions ----

    fn expr(&mut self) -> PResult<Expr> {
        self.ternary_tail(false)
    }

    fn lambda(&mut self) -> PResult<Expr> {
        self.expect(Tok::Lambda)?;
        let mut params = vec![self.ident()?];
        while self.eat(&Tok::Comma) {
            params.push(self.ident()?);
        }
        self.expect(Tok::Colon)?;
        let body = self.expr()?;
        Ok(Expr::Lambda {
            params,
            body: Box::new(body),
        })
    }

    fn or(&mut self) -> PResult<Expr> {
        let mut lhs = self.and()?;
        while self.eat(&Tok::OrOr) {
            let rhs = self.and()?;
            lhs = Expr::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> PResult<Expr> {
        let mut lhs = self.equality()?;
        while self.eat(&Tok::AndAnd) {
            let rhs = self.equality()?;
            lhs = Expr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn equality(&mut self) -> PResult<Expr> {
        let mut lhs = self.relational()?;
        loop {
            let op = match self.peek() {
                Tok::EqEq => CompareOp::Eq,
                Tok::NotEq => CompareOp::Ne,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.relational()?;
            lhs = Expr::Compare(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn relational(&mut self) -> PResult<Expr> {
        let mut lhs = self.additive()?;
        loop {
            let op = match self.peek() {
                Tok::Lt => CompareOp::Lt,
                Tok::Le => CompareOp::Le,
                Tok::Gt => CompareOp::Gt,
                Tok::Ge => CompareOp::Ge,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.additive()?;
            lhs = Expr::Compare(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn additive(&mut self) -> PResult<Expr> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.multiplicative()?;
            lhs = Expr::Arith(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn multiplicative(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => ArithOp::Mul,
                Tok::Slash => ArithOp::Div,
                Tok::SlashSlash => ArithOp::IDiv,
                // a trailing `%` is the query's null-display flag
                Tok::Percent if matches!(self.peek_at(1), Tok::Semi | Tok::Eof) => return Ok(lhs),
                Tok::Percent => ArithOp::Mod,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.unary()?;
            lhs = Expr::Arith(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        let op = match self.peek() {
            Tok::Minus => UnaryOp::Neg,
            Tok::Plus => UnaryOp::Plus,
            Tok::Bang => UnaryOp::Not,
            _ => return self.postfix(),
        };
        self.advance();
        let e = self.unary()?;
        Ok(Expr::Unary(op, Box::new(e)))
    }

    fn args(&mut self) -> PResult<Vec<Expr>> {
        let mut args = Vec::new();
        if self.eat(&Tok::RParen) {
            return Ok(args);
        }
        loop {
            if *self.peek() == Tok::Lambda {
                args.push(self.lambda()?);
            } else {
                args.push(self.expr()?);
            }
            if self.eat(&Tok::RParen) {
                return Ok(args);
            }
            self.expect(Tok::Comma)?;
        }
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        loop {
            match self.peek() {
                Tok::LParen => {
                    self.advance();
                    let args = self.args()?;
                    e = Expr::Call {
                        callee: Box::new(e),
                        args,
                    };
                }
                Tok::At => {
                    self.advance();
                    match self.advance() {
                        Tok::TypeName(crate::values::TypeId::Type) => {}
                        _ => return Err(self.error("expected `type` after `@`")),
                    }
                    e = Expr::TypeOf(Box::new(e));
                }
                Tok::LBracket => {
                    self.advance();
                    e = self.subscript(e)?;
                }
                _ => return Ok(e),
            }
        }
    }

    fn subscript(&mut self, target: Expr) -> PResult<Expr> {
        let target = Box::new(target);
        if self.eat(&Tok::Dot) {
            self.expect(Tok::RBracket)?;
            return Ok(Expr::Head(target));
        }
        if self.eat(&Tok::Gt) {
            if self.eat(&Tok::RBracket) {
                return Ok(Expr::Tail(target));
            }
            let i = self.expr()?;
            self.expect(Tok::RBracket)?;
            return Ok(Expr::SuffixAfter(target, Box::new(i)));
        }
        let lo = if *self.peek() == Tok::Colon {
            None
        } else {
            Some(Box::new(self.expr()?))
        };
        if self.eat(&Tok::Colon) {
            let hi = if *self.peek() == Tok::RBracket {
                None
            } else {
                Some(Box::new(self.expr()?))
            };
            self.expect(Tok::RBracket)?;
            return Ok(Expr::Slice { target, lo, hi });
        }
        self.expect(Tok::RBracket)?;
        Ok(Expr::Index(target, lo.expect("index expression")))
    }

    fn primary(&mut self) -> PResult<Expr> {
        let tok = self.peek().clone();
        let lit = |l| Ok(Expr::Lit(l));
        match tok {
            Tok::Int(i) => {
                self.advance();
                lit(Literal::Int(i))
            }
            Tok::Double(d) => {
                self.advance();
                lit(Literal::Double(d))
            }
            Tok::Char(c) => {
                self.advance();
                lit(Literal::Char(c))
            }
            Tok::Str(s) => {
                self.advance();
                lit(Literal::Str(s))
            }
            Tok::True => {
                self.advance();
                lit(Literal::Bool(true))
            }
            Tok::False => {
                self.advance();
                lit(Literal::Bool(false))
            }
            Tok::Null => {
                self.advance();
                lit(Literal::Null)
            }
            Tok::TypeName(t) => {
                self.advance();
                lit(Literal::Type(t))
            }
            Tok::ReadFile(p) => {
                self.advance();
                Ok(Expr::ReadFile(p))
            }
            Tok::Ident(name) => {
                self.advance();
                match name.as_str() {
                    "_len" | "exc" => {
                        self.expect(Tok::LParen)?;
                        let arg = Box::new(self.expr()?);
                        self.expect(Tok::RParen)?;
                        return Ok(if name == "_len" {
                            Expr::Len(arg)
                        } else {
                            Expr::Exc(arg)
                        });
                    }
                    _ => {}
                }
                if *self.peek() == Tok::Dot {
                    if let Tok::Ident(var) = self.peek_at(1).clone() {
                        self.advance();
                        self.advance();
                        return Ok(Expr::Labeled { label: name, name: var });
                    }
                }
                Ok(Expr::Name(name))
            }
            Tok::LParen => {
                self.advance();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::LBracket => {
                self.advance();
                let mut items = Vec::new();
                let mut tail = None;
                if !self.eat(&Tok::RBracket) {
                    loop {
                        items.push(self.expr()?);
                        if self.eat(&Tok::Bar) {
                            tail = Some(Box::new(self.expr()?));
                            self.expect(Tok::RBracket)?;
                            break;
                        }
                        if self.eat(&Tok::RBracket) {
                            break;
                        }
                        self.expect(Tok::Comma)?;
                    }
                }
                Ok(Expr::List { items, tail })
            }
            Tok::LBrace => {
                self.advance();
                let mut fields: Vec<(String, Expr)> = Vec::new();
                if !self.eat(&Tok::RBrace) {
                    loop {
                        let key = match self.advance() {
                            Tok::Str(k) => k,
                            _ => return Err(self.error("json keys must be string literals")),
                        };
                        if fields.iter().any(|(k, _)| *k == key) {
                            return Err(self.error(format!("duplicate json key {key:?}")));
                        }
                        self.expect(Tok::Colon)?;
                        fields.push((key, self.expr()?));
                        if self.eat(&Tok::RBrace) {
                            break;
                        }
                        self.expect(Tok::Comma)?;
                    }
                }
                Ok(Expr::Json(fields))
            }
            Tok::Lambda => Err(self.error(
                "a lambda may only appear as a call argument or as a function result",
            )),
            _ => Err(self.unexpected("an expression")),
        }
    }
}

fn for_each_body<'a>(body: &'a Body, f: &mut dyn FnMut(&'a Body)) {
    f(body);
    if let Expr::Cond {
        then, otherwise, ..
    } = &body.expr
    {
        for_each_body(then, f);
        for_each_body(otherwise, f);
    }
}

/// Placement and purity rules checked right after parsing a definition.
pub fn validate_function(def: &FunctionDef) -> Result<(), String> {
    let mut seen = HashSet::new();
    for n in def.params.iter().map(|p| &p.name).chain(&def.locals) {
        if !seen.insert(n) {
            return Err(format!("`{n}` is declared twice in `{}`", def.name));
        }
    }
    if !def.star && !def.labels.is_empty() {
        return Err(format!(
            "`{}` lists labels but is not a star function",
            def.name
        ));
    }
    let mut err = None;
    for_each_body(&def.body, &mut |b| {
        if err.is_some() || def.star {
            return;
        }
        if !b.post.is_empty() {
            err = Some(format!(
                "`{}`: commands after an expression require a star function",
                def.name
            ));
            return;
        }
        for block in &b.pre {
            match block {
                Block::Print(_) => {
                    err = Some(format!(
                        "`{}`: printing commands require a star function",
                        def.name
                    ))
                }
                Block::Set { target, .. } => {
                    if !target.path.is_empty() || !def.locals.contains(&target.name) {
                        err = Some(format!(
                            "`{}`: only local variables can be set in a non-star function (target `{}`)",
                            def.name, target.name
                        ));
                    }
                }
            }
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// Parses one statement (the trailing `;` is optional).
pub fn parse_statement(src: &str) -> Result<Statement, SyntaxError> {
    if let Some(rest) = src.trim_start().strip_prefix('!') {
        return parse_service(rest).map(Statement::Service).ok_or_else(|| SyntaxError {
            kind: SyntaxErrorKind::Syntax,
            pos: Pos::default(),
            message: "expected a command name after `!`".into(),
            at_eof: false,
        });
    }
    let toks = tokenize(src)?;
    Parser { toks, i: 0 }.statement()
}

/// Parses a standalone expression (used for file reading and tests).
pub fn parse_expression(src: &str) -> Result<Expr, SyntaxError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, i: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected("end of input"));
    }
    Ok(e)
}

fn parse_service(rest: &str) -> Option<ServiceCommand> {
    let rest = rest.trim().trim_end_matches(';').trim_end();
    let name_len = rest
        .find(|c: char| !(c.is_alphanumeric() || c == '_'))
        .unwrap_or(rest.len());
    if name_len == 0 {
        return None;
    }
    let name = rest[..name_len].to_string();
    let tail = rest[name_len..].trim();
    let arg = if let Some(inner) = tail.strip_prefix('(').and_then(|t| t.strip_suffix(')')) {
        Some(super::lexer::unquote_path(inner))
    } else if tail.is_empty() {
        None
    } else {
        Some(super::lexer::unquote_path(tail))
    };
    Some(ServiceCommand { name, arg })
}
