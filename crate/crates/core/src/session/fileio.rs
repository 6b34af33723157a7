use std::fs;

use indexmap::IndexMap;

use crate::frontend::ast::{Expr, Literal};
use crate::frontend::parse_expression;
use crate::values::{ErrorKind, Heap, Style, UnaryOp, Value, ValueError};

fn malformed(message: impl Into<String>) -> ValueError {
    ValueError::new(ErrorKind::Io, message)
}

/// Builds the value of a constant expression: scalars, signed numbers,
/// strings, lists and jsons.
pub fn constant_value(heap: &mut Heap, e: &Expr) -> Result<Value, ValueError> {
    Ok(match e {
        Expr::Lit(Literal::Str(s)) => heap.alloc_str(s.as_str()),
        Expr::Lit(lit) => crate::clvm::literal_value(heap, lit),
        Expr::Name(n) if n == "Infinity" => Value::Double(f64::INFINITY),
        Expr::Name(n) if n == "NaN" => Value::Double(f64::NAN),
        Expr::Unary(UnaryOp::Neg, inner) => match constant_value(heap, inner)? {
            Value::Int(i) => Value::Int(i.wrapping_neg()),
            Value::Double(d) => Value::Double(-d),
            _ => return Err(malformed("`-` applies only to numbers")),
        },
        Expr::List { items, tail: None } => {
            let values = items
                .iter()
                .map(|i| constant_value(heap, i))
                .collect::<Result<Vec<_>, _>>()?;
            heap.list_from(values)
        }
        Expr::Json(fields) => {
            let mut map = IndexMap::new();
            for (k, v) in fields {
                let v = constant_value(heap, v)?;
                map.insert(k.clone(), v);
            }
            heap.alloc_json(map)
        }
        _ => return Err(malformed("not a constant value")),
    })
}

/// Reads one value, written in literal syntax, from `path`.
pub fn read_value(heap: &mut Heap, path: &str) -> Result<Value, ValueError> {
    let text = fs::read_to_string(path)
        .map_err(|e| ValueError::new(ErrorKind::Io, format!("cannot read `{path}`: {e}")))?;
    let text = text.trim().trim_end_matches(';');
    let expr = parse_expression(text)
        .map_err(|e| malformed(format!("malformed value in `{path}`: {e}")))?;
    constant_value(heap, &expr).map_err(|e| malformed(format!("malformed value in `{path}`: {}", e.message)))
}

/// Writes `v` in literal syntax so that [`read_value`] gives it back.
pub fn write_value(heap: &Heap, path: &str, v: Value) -> Result<(), ValueError> {
    let mut text = heap.render(v, Style::NESTED);
    text.push('\n');
    fs::write(path, text)
        .map_err(|e| ValueError::new(ErrorKind::Io, format!("cannot write `{path}`: {e}")))
}
