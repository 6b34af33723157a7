use std::fmt::Write;

use super::{Heap, Value};

/// Nesting depth after which printing gives up (cyclic structures can be
/// built through star functions).
const MAX_PRINT_DEPTH: usize = 512;

/// How a value is rendered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Style {
    /// Top-level strings and chars print without quotes.
    pub top_level: bool,
    /// Top-level `null` prints as `null` instead of nothing.
    pub show_null: bool,
}

impl Style {
    pub const TOP: Style = Style {
        top_level: true,
        show_null: false,
    };
    pub const TOP_SHOW_NULL: Style = Style {
        top_level: true,
        show_null: true,
    };
    /// Literal syntax: everything quoted, `null` spelled out.
    pub const NESTED: Style = Style {
        top_level: false,
        show_null: true,
    };
}

/// Doubles always carry a decimal point.
pub fn format_double(d: f64) -> String {
    if d.is_nan() {
        return "NaN".into();
    }
    if d.is_infinite() {
        return if d > 0.0 { "Infinity" } else { "-Infinity" }.into();
    }
    let mut s = d.to_string();
    if !s.contains('.') {
        s.push_str(".0");
    }
    s
}

pub fn quote_str(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        push_escaped(&mut out, c, '"');
    }
    out.push('"');
    out
}

pub fn quote_char(c: char) -> String {
    let mut out = String::from("'");
    push_escaped(&mut out, c, '\'');
    out.push('\'');
    out
}

fn push_escaped(out: &mut String, c: char, delim: char) {
    match c {
        '\\' => out.push_str("\\\\"),
        '\n' => out.push_str("\\n"),
        '\t' => out.push_str("\\t"),
        '\r' => out.push_str("\\r"),
        c if c == delim => {
            out.push('\\');
            out.push(c);
        }
        c => out.push(c),
    }
}

impl Heap {
    pub fn render(&self, v: Value, style: Style) -> String {
        self.render_counted(v, style).0
    }

    /// Printed form plus the number of value nodes visited.
    pub fn render_counted(&self, v: Value, style: Style) -> (String, usize) {
        let mut out = String::new();
        let mut nodes = 0;
        if style.top_level {
            match v {
                Value::Null if !style.show_null => return (out, 1),
                Value::Str(s) => return (self.str(s).to_string(), 1),
                Value::Char(c) => return (c.to_string(), 1),
                _ => {}
            }
        }
        self.write_nested(&mut out, v, 0, &mut nodes);
        (out, nodes)
    }

    fn write_nested(&self, out: &mut String, v: Value, depth: usize, nodes: &mut usize) {
        *nodes += 1;
        if depth > MAX_PRINT_DEPTH {
            out.push_str("...");
            return;
        }
        match v {
            Value::Double(d) => out.push_str(&format_double(d)),
            Value::Int(i) => {
                let _ = write!(out, "{i}");
            }
            Value::Char(c) => out.push_str(&quote_char(c)),
            Value::Bool(b) => out.push_str(if b { "true" } else { "false" }),
            Value::Null => out.push_str("null"),
            Value::Type(t) => out.push_str(t.name()),
            Value::Str(s) => out.push_str(&quote_str(self.str(s))),
            Value::List(None) => out.push_str("[]"),
            Value::List(l) => {
                out.push_str("[ ");
                for (i, item) in self.list_iter(l).enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    self.write_nested(out, item, depth + 1, nodes);
                }
                out.push_str(" ]");
            }
            Value::Json(j) => {
                let fields = self.json(j);
                if fields.is_empty() {
                    out.push_str("{}");
                    return;
                }
                out.push_str("{ ");
                for (i, (k, item)) in fields.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    out.push_str(&quote_str(k));
                    out.push_str(": ");
                    self.write_nested(out, *item, depth + 1, nodes);
                }
                out.push_str(" }");
            }
            Value::Func(f) => {
                let unit = &self.closure(f).unit;
                let _ = write!(out, "<function {}/{}>", unit.name, unit.params.len());
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::values::TypeId;

    #[test]
    fn doubles_keep_a_decimal_point() {
        assert_eq!(format_double(4.2), "4.2");
        assert_eq!(format_double(2.0), "2.0");
        assert_eq!(format_double(-1.0), "-1.0");
        assert_eq!(format_double(0.2), "0.2");
        assert_eq!(format_double(1.0 / 0.0), "Infinity");
    }

    #[test]
    fn nested_vs_top_level() {
        let mut h = Heap::new();
        let s = h.alloc_str("p1");
        let l = h.list_from([Value::Double(2.0), Value::Char('*'), s, Value::Null]);
        assert_eq!(h.render(l, Style::TOP), "[ 2.0, '*', \"p1\", null ]");
        assert_eq!(h.render(s, Style::TOP), "p1");
        assert_eq!(h.render(Value::Char('*'), Style::TOP), "*");
        assert_eq!(h.render(Value::Null, Style::TOP), "");
        assert_eq!(h.render(Value::Null, Style::TOP_SHOW_NULL), "null");
        assert_eq!(h.render(Value::EMPTY_LIST, Style::TOP), "[]");
        assert_eq!(h.render(Value::Type(TypeId::Int), Style::TOP), "int");
    }

    #[test]
    fn escapes_round_trip_delimiters() {
        assert_eq!(quote_str("a\"b\\"), r#""a\"b\\""#);
        assert_eq!(quote_char('\''), r"'\''");
    }
}
