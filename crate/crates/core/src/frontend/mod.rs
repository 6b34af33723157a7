//! Tokenizer, parser and pretty-printer for CalcuList input.

pub mod ast;
mod lexer;
mod parser;
mod pretty;

use std::fmt;

pub use lexer::{tokenize, unquote_path, Pos, Tok, Token};
pub use parser::{parse_expression, parse_statement, validate_function};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntaxErrorKind {
    Lexical,
    Syntax,
    /// A setting/printing command in a position the function does not allow.
    Placement,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxError {
    pub kind: SyntaxErrorKind,
    pub pos: Pos,
    pub message: String,
    /// The input ended before the construct was complete.
    pub at_eof: bool,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            SyntaxErrorKind::Lexical => "lexical error",
            SyntaxErrorKind::Syntax => "syntax error",
            SyntaxErrorKind::Placement => "misplaced command",
        };
        write!(f, "{what} at {}: {}", self.pos, self.message)
    }
}

impl std::error::Error for SyntaxError {}

#[derive(Clone, Copy, PartialEq)]
enum Scan {
    Code,
    Str,
    Char,
    Comment,
}

/// Splits raw input into statement texts. Each piece ends with its `;`
/// except service commands (which end at the newline) and a trailing
/// unterminated piece.
pub fn split_statements(src: &str) -> Vec<&str> {
    let bytes: Vec<(usize, char)> = src.char_indices().collect();
    let mut out = Vec::new();
    let mut start = 0;
    let mut at_start = true;
    let mut state = Scan::Code;
    let mut i = 0;
    while i < bytes.len() {
        let (off, c) = bytes[i];
        let next = bytes.get(i + 1).map(|&(_, c)| c);
        match state {
            Scan::Comment => {
                if c == '*' && next == Some('/') {
                    state = Scan::Code;
                    i += 1;
                }
            }
            Scan::Str | Scan::Char => {
                let delim = if state == Scan::Str { '"' } else { '\'' };
                if c == '\\' {
                    i += 1;
                } else if c == delim || c == '\n' {
                    state = Scan::Code;
                }
            }
            Scan::Code => match c {
                '/' if next == Some('*') => {
                    state = Scan::Comment;
                    i += 1;
                }
                c if c.is_whitespace() => {}
                '!' if at_start && next != Some('=') => {
                    let end = src[off..]
                        .find([';', '\n'])
                        .map_or(src.len(), |k| off + k + 1);
                    out.push(&src[start..end]);
                    start = end;
                    while i + 1 < bytes.len() && bytes[i + 1].0 < end {
                        i += 1;
                    }
                }
                ';' => {
                    out.push(&src[start..off + 1]);
                    start = off + 1;
                    at_start = true;
                }
                '"' => {
                    state = Scan::Str;
                    at_start = false;
                }
                '\'' => {
                    state = Scan::Char;
                    at_start = false;
                }
                _ => at_start = false,
            },
        }
        i += 1;
    }
    if !at_start || state != Scan::Code {
        out.push(&src[start..]);
    }
    out.into_iter()
        .filter(|s| !is_trivia(s))
        .collect()
}

/// True when `s` holds only whitespace and complete comments.
pub fn is_trivia(s: &str) -> bool {
    let mut rest = s.trim_start();
    while let Some(after) = rest.strip_prefix("/*") {
        match after.find("*/") {
            Some(k) => rest = after[k + 2..].trim_start(),
            None => return false,
        }
    }
    rest.is_empty()
}

/// Groups the lines of a script into REPL inputs: a line that leaves a
/// statement unfinished is joined with the following ones.
pub fn script_inputs(text: &str) -> Vec<String> {
    let mut inputs = Vec::new();
    let mut buf = String::new();
    for line in text.lines() {
        buf.push_str(line);
        buf.push('\n');
        if !needs_more_input(&buf) {
            inputs.push(std::mem::take(&mut buf));
        }
    }
    if !is_trivia(&buf) {
        inputs.push(buf);
    }
    inputs
}

/// True when the REPL should read another line before evaluating `src`.
pub fn needs_more_input(src: &str) -> bool {
    let Some(last) = split_statements(src).pop() else {
        return false;
    };
    if last.trim_start().starts_with('!') || last.trim_end().ends_with(';') {
        return false;
    }
    matches!(parse_statement(last), Err(e) if e.at_eof)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_on_semicolons_outside_literals() {
        let parts = split_statements("L1= range(1,1000); L2 = range(1,2000);");
        assert_eq!(parts.len(), 2);
        let parts = split_statements("x = \"a;b\"; c = ';';");
        assert_eq!(parts, vec!["x = \"a;b\";", " c = ';';"]);
    }

    #[test]
    fn service_commands_end_at_newline() {
        let parts = split_statements("!clops\n^x;\n!save(a.clc)\n");
        assert_eq!(parts, vec!["!clops\n", "^x;", "\n!save(a.clc)\n"]);
    }

    #[test]
    fn trailing_piece_without_semicolon() {
        assert_eq!(split_statements("^z"), vec!["^z"]);
        assert_eq!(split_statements("/* checkpoint 1 */"), Vec::<&str>::new());
        assert!(!split_statements("x != y").is_empty());
    }

    #[test]
    fn continuation_detection() {
        assert!(needs_more_input("f(x): x > 1 ?"));
        assert!(needs_more_input("emps = [ { \"name\": \"e1\" },"));
        assert!(!needs_more_input("^z"));
        assert!(!needs_more_input("x = 1 2"));
        assert!(!needs_more_input("!clops"));
    }
}
