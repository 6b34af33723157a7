use std::fmt;

use super::{SyntaxError, SyntaxErrorKind};
use crate::values::TypeId;

/// Line/column (1-based) plus byte offset into the input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
    pub offset: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i32),
    Double(f64),
    Char(char),
    Str(String),
    True,
    False,
    Null,
    Lambda,
    TypeName(TypeId),

    Plus,
    Minus,
    Star,
    Slash,
    SlashSlash,
    Percent,
    EqEq,
    NotEq,
    Lt,
    Le,
    Gt,
    Ge,
    AndAnd,
    OrOr,
    Bang,
    Question,
    Colon,
    Comma,
    Semi,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Dot,
    Bar,
    At,
    Caret,
    Assign,
    PlusAssign,
    MinusAssign,
    StarAssign,
    SlashAssign,
    /// `{!`
    SetOpen,
    /// `!}`
    SetClose,
    /// `{^`
    PrintOpen,
    /// `^}`
    PrintClose,
    /// `>>(path)`; an empty path resets output to the console.
    Redirect(String),
    /// `<<(path)`
    ReadFile(String),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "identifier `{s}`"),
            Tok::Int(i) => return write!(f, "number {i}"),
            Tok::Double(d) => return write!(f, "number {d}"),
            Tok::Char(c) => return write!(f, "char {c:?}"),
            Tok::Str(s) => return write!(f, "string {s:?}"),
            Tok::TypeName(t) => return write!(f, "type `{t}`"),
            Tok::Redirect(p) => return write!(f, ">>({p})"),
            Tok::ReadFile(p) => return write!(f, "<<({p})"),
            Tok::True => "true",
            Tok::False => "false",
            Tok::Null => "null",
            Tok::Lambda => "lambda",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::SlashSlash => "//",
            Tok::Percent => "%",
            Tok::EqEq => "==",
            Tok::NotEq => "!=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::AndAnd => "&&",
            Tok::OrOr => "||",
            Tok::Bang => "!",
            Tok::Question => "?",
            Tok::Colon => ":",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Dot => ".",
            Tok::Bar => "|",
            Tok::At => "@",
            Tok::Caret => "^",
            Tok::Assign => "=",
            Tok::PlusAssign => "+=",
            Tok::MinusAssign => "-=",
            Tok::StarAssign => "*=",
            Tok::SlashAssign => "/=",
            Tok::SetOpen => "{!",
            Tok::SetClose => "!}",
            Tok::PrintOpen => "{^",
            Tok::PrintClose => "^}",
            Tok::Eof => "end of input",
        };
        write!(f, "`{s}`")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

struct Lexer<'a> {
    src: &'a str,
    chars: Vec<(usize, char)>,
    i: usize,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    fn peek(&self, k: usize) -> Option<char> {
        self.chars.get(self.i + k).map(|&(_, c)| c)
    }

    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
            offset: self.chars.get(self.i).map_or(self.src.len(), |&(o, _)| o),
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek(0)?;
        self.i += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn error(&self, pos: Pos, message: impl Into<String>, eof: bool) -> SyntaxError {
        SyntaxError {
            kind: SyntaxErrorKind::Lexical,
            pos,
            message: message.into(),
            at_eof: eof,
        }
    }

    fn skip_trivia(&mut self) -> Result<(), SyntaxError> {
        loop {
            match self.peek(0) {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('/') if self.peek(1) == Some('*') => {
                    let start = self.pos();
                    self.bump();
                    self.bump();
                    loop {
                        match self.peek(0) {
                            None => return Err(self.error(start, "unterminated comment", true)),
                            Some('*') if self.peek(1) == Some('/') => {
                                self.bump();
                                self.bump();
                                break;
                            }
                            Some(_) => {
                                self.bump();
                            }
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn escape(&mut self, start: Pos) -> Result<char, SyntaxError> {
        match self.bump() {
            Some('n') => Ok('\n'),
            Some('t') => Ok('\t'),
            Some('r') => Ok('\r'),
            Some('0') => Ok('\0'),
            Some(c @ ('\\' | '\'' | '"')) => Ok(c),
            Some(c) => Err(self.error(start, format!("unknown escape `\\{c}`"), false)),
            None => Err(self.error(start, "unterminated literal", true)),
        }
    }

    fn string(&mut self, start: Pos) -> Result<Tok, SyntaxError> {
        let mut s = String::new();
        loop {
            match self.bump() {
                None | Some('\n') => return Err(self.error(start, "unterminated string", true)),
                Some('"') => return Ok(Tok::Str(s)),
                Some('\\') => s.push(self.escape(start)?),
                Some(c) => s.push(c),
            }
        }
    }

    fn char_lit(&mut self, start: Pos) -> Result<Tok, SyntaxError> {
        let c = match self.bump() {
            None | Some('\n') => return Err(self.error(start, "unterminated char", true)),
            Some('\\') => self.escape(start)?,
            Some(c) => c,
        };
        match self.bump() {
            Some('\'') => Ok(Tok::Char(c)),
            None => Err(self.error(start, "unterminated char", true)),
            Some(_) => Err(self.error(start, "char literal holds exactly one character", false)),
        }
    }

    fn number(&mut self, start: Pos) -> Result<Tok, SyntaxError> {
        let begin = self.i;
        let mut is_double = false;
        while matches!(self.peek(0), Some(c) if c.is_ascii_digit()) {
            self.bump();
        }
        if self.peek(0) == Some('.') && matches!(self.peek(1), Some(c) if c.is_ascii_digit()) {
            is_double = true;
            self.bump();
            while matches!(self.peek(0), Some(c) if c.is_ascii_digit()) {
                self.bump();
            }
        }
        if matches!(self.peek(0), Some('e' | 'E')) {
            let sign = usize::from(matches!(self.peek(1), Some('+' | '-')));
            if matches!(self.peek(1 + sign), Some(c) if c.is_ascii_digit()) {
                is_double = true;
                for _ in 0..=sign {
                    self.bump();
                }
                while matches!(self.peek(0), Some(c) if c.is_ascii_digit()) {
                    self.bump();
                }
            }
        }
        let text: String = self.chars[begin..self.i].iter().map(|&(_, c)| c).collect();
        if is_double {
            text.parse::<f64>()
                .map(Tok::Double)
                .map_err(|_| self.error(start, format!("bad number `{text}`"), false))
        } else {
            text.parse::<i32>()
                .map(Tok::Int)
                .map_err(|_| self.error(start, format!("integer `{text}` out of range"), false))
        }
    }

    /// Raw text between `(` and `)` for `>>(path)` / `<<(path)`.
    fn raw_path(&mut self, start: Pos) -> Result<String, SyntaxError> {
        let mut s = String::new();
        loop {
            match self.bump() {
                None | Some('\n') => return Err(self.error(start, "unterminated file name", true)),
                Some(')') => break,
                Some(c) => s.push(c),
            }
        }
        Ok(unquote_path(&s))
    }

    fn next_token(&mut self) -> Result<Token, SyntaxError> {
        self.skip_trivia()?;
        let pos = self.pos();
        let Some(c) = self.bump() else {
            return Ok(Token { tok: Tok::Eof, pos });
        };
        let two = |lx: &mut Self, next: char, yes: Tok, no: Tok| {
            if lx.peek(0) == Some(next) {
                lx.bump();
                yes
            } else {
                no
            }
        };
        let tok = match c {
            '"' => self.string(pos)?,
            '\'' => self.char_lit(pos)?,
            c if c.is_ascii_digit() => {
                self.i -= 1;
                self.col -= 1;
                self.number(pos)?
            }
            '.' if matches!(self.peek(0), Some(d) if d.is_ascii_digit()) => {
                self.i -= 1;
                self.col -= 1;
                self.number(pos)?
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut s = String::from(c);
                while let Some(c) = self.peek(0) {
                    if c.is_alphanumeric() || c == '_' {
                        s.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
                keyword(s)
            }
            '+' => two(self, '=', Tok::PlusAssign, Tok::Plus),
            '-' => two(self, '=', Tok::MinusAssign, Tok::Minus),
            '*' => two(self, '=', Tok::StarAssign, Tok::Star),
            '/' => match self.peek(0) {
                Some('/') => {
                    self.bump();
                    Tok::SlashSlash
                }
                Some('=') => {
                    self.bump();
                    Tok::SlashAssign
                }
                _ => Tok::Slash,
            },
            '%' => Tok::Percent,
            '=' => two(self, '=', Tok::EqEq, Tok::Assign),
            '!' => match self.peek(0) {
                Some('=') => {
                    self.bump();
                    Tok::NotEq
                }
                Some('}') => {
                    self.bump();
                    Tok::SetClose
                }
                _ => Tok::Bang,
            },
            '<' => {
                if self.peek(0) == Some('<') && self.peek(1) == Some('(') {
                    self.bump();
                    self.bump();
                    Tok::ReadFile(self.raw_path(pos)?)
                } else {
                    two(self, '=', Tok::Le, Tok::Lt)
                }
            }
            '>' => {
                if self.peek(0) == Some('>') && self.peek(1) == Some('(') {
                    self.bump();
                    self.bump();
                    Tok::Redirect(self.raw_path(pos)?)
                } else {
                    two(self, '=', Tok::Ge, Tok::Gt)
                }
            }
            '&' if self.peek(0) == Some('&') => {
                self.bump();
                Tok::AndAnd
            }
            '|' => two(self, '|', Tok::OrOr, Tok::Bar),
            '?' => Tok::Question,
            ':' => Tok::Colon,
            ',' => Tok::Comma,
            ';' => Tok::Semi,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            '{' => match self.peek(0) {
                Some('!') => {
                    self.bump();
                    Tok::SetOpen
                }
                Some('^') => {
                    self.bump();
                    Tok::PrintOpen
                }
                _ => Tok::LBrace,
            },
            '}' => Tok::RBrace,
            '.' => Tok::Dot,
            '@' => Tok::At,
            '^' => two(self, '}', Tok::PrintClose, Tok::Caret),
            other => {
                return Err(self.error(pos, format!("unexpected character `{other}`"), false))
            }
        };
        Ok(Token { tok, pos })
    }
}

fn keyword(s: String) -> Tok {
    match s.as_str() {
        "true" => Tok::True,
        "false" => Tok::False,
        "null" => Tok::Null,
        "lambda" => Tok::Lambda,
        _ => match TypeId::from_keyword(&s) {
            Some(t) => Tok::TypeName(t),
            None => Tok::Ident(s),
        },
    }
}

/// Strips surrounding whitespace and an optional pair of double quotes.
pub fn unquote_path(raw: &str) -> String {
    let t = raw.trim();
    t.strip_prefix('"')
        .and_then(|s| s.strip_suffix('"'))
        .unwrap_or(t)
        .to_string()
}

/// Splits source text into tokens; the final token is always [`Tok::Eof`].
pub fn tokenize(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut lx = Lexer {
        src,
        chars: src.char_indices().collect(),
        i: 0,
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    loop {
        let t = lx.next_token()?;
        let done = t.tok == Tok::Eof;
        out.push(t);
        if done {
            return Ok(out);
        }
    }
}
