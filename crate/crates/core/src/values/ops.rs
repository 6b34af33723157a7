use super::{ErrorKind, Heap, TypeId, Value, ValueError, ValueResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    IDiv,
    Mod,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
            ArithOp::IDiv => "//",
            ArithOp::Mod => "%",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CompareOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CompareOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CompareOp::Eq => "==",
            CompareOp::Ne => "!=",
            CompareOp::Lt => "<",
            CompareOp::Le => "<=",
            CompareOp::Gt => ">",
            CompareOp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Plus,
    Not,
}

impl UnaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Plus => "+",
            UnaryOp::Not => "!",
        }
    }
}

fn promote(l: TypeId, r: TypeId) -> Option<TypeId> {
    let (a, b) = (l.numeric_rank()?, r.numeric_rank()?);
    Some(match a.max(b) {
        2 => TypeId::Double,
        // char op char yields int
        _ => TypeId::Int,
    })
}

fn mismatch(op: &str, l: TypeId, r: TypeId) -> ValueError {
    ValueError::type_error(format!("operator {op} is not defined on {l} and {r}"))
}

/// Result type of an arithmetic operator, or a type error. Shared by the
/// compiler's constant-operand check and the machine.
pub fn binary_types_ok(op: ArithOp, l: TypeId, r: TypeId) -> ValueResult<TypeId> {
    use TypeId::*;
    let result = match op {
        ArithOp::Add => match (l, r) {
            (String, String) | (String, Char) => Some(String),
            (List, List) => Some(List),
            _ => promote(l, r),
        },
        ArithOp::Sub | ArithOp::Mul => promote(l, r),
        ArithOp::Div => promote(l, r).map(|_| Double),
        ArithOp::IDiv | ArithOp::Mod => match (l, r) {
            (Int | Char, Int | Char) => Some(Int),
            _ => None,
        },
    };
    result.ok_or_else(|| mismatch(op.symbol(), l, r))
}

pub fn unary_types_ok(op: UnaryOp, t: TypeId) -> ValueResult<TypeId> {
    match (op, t) {
        (UnaryOp::Not, TypeId::Bool) => Ok(TypeId::Bool),
        (UnaryOp::Neg | UnaryOp::Plus, TypeId::Double) => Ok(TypeId::Double),
        (UnaryOp::Neg | UnaryOp::Plus, TypeId::Int | TypeId::Char) => Ok(TypeId::Int),
        _ => Err(ValueError::type_error(format!(
            "unary {} is not defined on {t}",
            op.symbol()
        ))),
    }
}

/// Ordering operators accept numeric, bool or string pairs; equality accepts anything.
pub fn compare_types_ok(op: CompareOp, l: TypeId, r: TypeId) -> ValueResult<()> {
    if matches!(op, CompareOp::Eq | CompareOp::Ne) {
        return Ok(());
    }
    let ok = (l.is_numeric() && r.is_numeric())
        || (l == TypeId::Bool && r == TypeId::Bool)
        || (l == TypeId::String && r == TypeId::String);
    if ok {
        Ok(())
    } else {
        Err(mismatch(op.symbol(), l, r))
    }
}

fn as_f64(v: Value) -> f64 {
    match v {
        Value::Double(d) => d,
        Value::Int(i) => i as f64,
        Value::Char(c) => c as u32 as f64,
        _ => unreachable!("non-numeric operand after type check"),
    }
}

fn as_i32(v: Value) -> i32 {
    match v {
        Value::Int(i) => i,
        Value::Char(c) => c as u32 as i32,
        _ => unreachable!("non-integral operand after type check"),
    }
}

fn floor_div(a: i32, b: i32) -> i32 {
    let q = a.wrapping_div(b);
    if a.wrapping_rem(b) != 0 && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

fn floor_mod(a: i32, b: i32) -> i32 {
    let r = a.wrapping_rem(b);
    if r != 0 && ((r < 0) != (b < 0)) {
        r + b
    } else {
        r
    }
}

/// Binary arithmetic with numeric promotion and string/list concatenation.
pub fn arith(heap: &mut Heap, op: ArithOp, lhs: Value, rhs: Value) -> ValueResult<Value> {
    let result_type = binary_types_ok(op, lhs.type_id(), rhs.type_id())?;
    match (result_type, lhs, rhs) {
        (TypeId::String, Value::Str(a), Value::Str(b)) => {
            let s = format!("{}{}", heap.str(a), heap.str(b));
            Ok(heap.alloc_str(s))
        }
        (TypeId::String, Value::Str(a), Value::Char(c)) => {
            let mut s = heap.str(a).to_string();
            s.push(c);
            Ok(heap.alloc_str(s))
        }
        (TypeId::List, Value::List(a), Value::List(b)) => Ok(heap.concat_lists(a, b)),
        (TypeId::Double, _, _) => {
            let (a, b) = (as_f64(lhs), as_f64(rhs));
            Ok(Value::Double(match op {
                ArithOp::Add => a + b,
                ArithOp::Sub => a - b,
                ArithOp::Mul => a * b,
                ArithOp::Div => a / b,
                ArithOp::IDiv | ArithOp::Mod => unreachable!(),
            }))
        }
        (TypeId::Int, _, _) => {
            let (a, b) = (as_i32(lhs), as_i32(rhs));
            let zero = || ValueError::new(ErrorKind::DivisionByZero, format!("{a} {} 0", op.symbol()));
            Ok(Value::Int(match op {
                ArithOp::Add => a.wrapping_add(b),
                ArithOp::Sub => a.wrapping_sub(b),
                ArithOp::Mul => a.wrapping_mul(b),
                ArithOp::IDiv if b == 0 => return Err(zero()),
                ArithOp::IDiv => floor_div(a, b),
                ArithOp::Mod if b == 0 => return Err(zero()),
                ArithOp::Mod => floor_mod(a, b),
                ArithOp::Div => unreachable!(),
            }))
        }
        _ => unreachable!("binary_types_ok returned an unexpected result type"),
    }
}

pub fn unary(op: UnaryOp, v: Value) -> ValueResult<Value> {
    let t = unary_types_ok(op, v.type_id())?;
    Ok(match (op, t) {
        (UnaryOp::Not, _) => match v {
            Value::Bool(b) => Value::Bool(!b),
            _ => unreachable!(),
        },
        (UnaryOp::Neg, TypeId::Double) => Value::Double(-as_f64(v)),
        (UnaryOp::Plus, TypeId::Double) => v,
        (UnaryOp::Neg, _) => Value::Int(as_i32(v).wrapping_neg()),
        (UnaryOp::Plus, _) => Value::Int(as_i32(v)),
    })
}

/// `==` semantics: numbers compare by value after promotion, strings by
/// content, lists/jsons/functions by identity, mixed kinds are unequal.
pub fn equals(heap: &Heap, lhs: Value, rhs: Value) -> bool {
    match (lhs, rhs) {
        (Value::Int(a), Value::Int(b)) => a == b,
        (Value::Char(a), Value::Char(b)) => a == b,
        (a, b) if a.type_id().is_numeric() && b.type_id().is_numeric() => {
            if matches!(a, Value::Double(_)) || matches!(b, Value::Double(_)) {
                as_f64(a) == as_f64(b)
            } else {
                as_i32(a) == as_i32(b)
            }
        }
        (Value::Bool(a), Value::Bool(b)) => a == b,
        (Value::Null, Value::Null) => true,
        (Value::Type(a), Value::Type(b)) => a == b,
        (Value::Str(a), Value::Str(b)) => a == b || heap.str(a) == heap.str(b),
        (Value::List(a), Value::List(b)) => a == b,
        (Value::Json(a), Value::Json(b)) => a == b,
        (Value::Func(a), Value::Func(b)) => a == b,
        _ => false,
    }
}

pub fn compare(heap: &Heap, op: CompareOp, lhs: Value, rhs: Value) -> ValueResult<bool> {
    compare_types_ok(op, lhs.type_id(), rhs.type_id())?;
    let ord = match op {
        CompareOp::Eq => return Ok(equals(heap, lhs, rhs)),
        CompareOp::Ne => return Ok(!equals(heap, lhs, rhs)),
        _ => match (lhs, rhs) {
            (Value::Bool(a), Value::Bool(b)) => a.cmp(&b),
            (Value::Str(a), Value::Str(b)) => heap.str(a).cmp(heap.str(b)),
            (Value::Double(_), _) | (_, Value::Double(_)) => {
                match as_f64(lhs).partial_cmp(&as_f64(rhs)) {
                    Some(o) => o,
                    // NaN: every ordering test is false
                    None => return Ok(false),
                }
            }
            _ => as_i32(lhs).cmp(&as_i32(rhs)),
        },
    };
    Ok(match op {
        CompareOp::Lt => ord.is_lt(),
        CompareOp::Le => ord.is_le(),
        CompareOp::Gt => ord.is_gt(),
        CompareOp::Ge => ord.is_ge(),
        CompareOp::Eq | CompareOp::Ne => unreachable!(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn show(heap: &Heap, v: Value) -> String {
        heap.render(v, crate::values::Style::NESTED)
    }

    #[test]
    fn numeric_promotion() {
        let mut h = Heap::new();
        let x = arith(&mut h, ArithOp::Add, Value::Int(2), Value::Double(0.1)).unwrap();
        let x = arith(&mut h, ArithOp::Mul, x, Value::Int(2)).unwrap();
        assert_eq!(show(&h, x), "4.2");

        let b = arith(&mut h, ArithOp::Add, Value::Char('A'), Value::Int(1)).unwrap();
        assert!(matches!(b, Value::Int(66)));
        assert!(equals(&h, b, Value::Char('B')));

        let cc = arith(&mut h, ArithOp::Add, Value::Char('a'), Value::Char('b')).unwrap();
        assert_eq!(cc.type_id(), TypeId::Int);
    }

    #[test]
    fn division_flavours() {
        let mut h = Heap::new();
        let q = arith(&mut h, ArithOp::IDiv, Value::Int(7), Value::Int(2)).unwrap();
        assert!(matches!(q, Value::Int(3)));
        let d = arith(&mut h, ArithOp::Div, Value::Int(7), Value::Int(2)).unwrap();
        assert!(matches!(d, Value::Double(x) if x == 3.5));
        let m = arith(&mut h, ArithOp::Mod, Value::Int(-4), Value::Int(6)).unwrap();
        assert!(matches!(m, Value::Int(2)));
        let q = arith(&mut h, ArithOp::IDiv, Value::Int(-7), Value::Int(2)).unwrap();
        assert!(matches!(q, Value::Int(-4)));
        let e = arith(&mut h, ArithOp::IDiv, Value::Int(1), Value::Int(0)).unwrap_err();
        assert_eq!(e.kind, ErrorKind::DivisionByZero);
        let e = arith(&mut h, ArithOp::Mod, Value::Int(1), Value::Int(0)).unwrap_err();
        assert_eq!(e.kind, ErrorKind::DivisionByZero);
        let e = arith(&mut h, ArithOp::Mod, Value::Double(1.0), Value::Int(3)).unwrap_err();
        assert_eq!(e.kind, ErrorKind::TypeError);
    }

    #[test]
    fn string_concatenation_is_one_way() {
        let mut h = Heap::new();
        let s = h.alloc_str("Worl");
        let r = arith(&mut h, ArithOp::Add, s, Value::Char('d')).unwrap();
        assert_eq!(show(&h, r), "\"World\"");
        let e = arith(&mut h, ArithOp::Add, Value::Char('d'), s).unwrap_err();
        assert_eq!(e.kind, ErrorKind::TypeError);
        assert!(arith(&mut h, ArithOp::Add, s, Value::Int(1)).is_err());
    }

    #[test]
    fn ordering_and_equality() {
        let mut h = Heap::new();
        let abc = h.alloc_str("abc");
        let abd = h.alloc_str("abd");
        assert!(compare(&h, CompareOp::Lt, abc, abd).unwrap());
        assert!(compare(&h, CompareOp::Lt, Value::Bool(false), Value::Bool(true)).unwrap());
        assert!(compare(&h, CompareOp::Lt, abc, Value::Int(1)).is_err());
        assert!(!compare(&h, CompareOp::Eq, abc, Value::Int(1)).unwrap());
        assert!(compare(&h, CompareOp::Eq, Value::Int(1), Value::Double(1.0)).unwrap());

        let l = h.list_from([Value::Int(1), Value::Int(2)]);
        let Value::List(lr) = l else { panic!() };
        let c = h.slice_list(lr, None, None).unwrap();
        assert!(equals(&h, l, l));
        assert!(!equals(&h, l, c));
        assert_eq!(show(&h, l), show(&h, c));
        assert!(equals(&h, Value::EMPTY_LIST, Value::EMPTY_LIST));

        let (a, b) = (h_str(&mut h, "a"), h_str(&mut h, "b"));
        let ab = arith(&mut h, ArithOp::Add, a, b).unwrap();
        let ab2 = h.alloc_str("ab");
        assert!(equals(&h, ab, ab2));
    }

    fn h_str(h: &mut Heap, s: &str) -> Value {
        h.alloc_str(s)
    }

    #[test]
    fn unary_on_char_yields_int() {
        assert!(matches!(unary(UnaryOp::Neg, Value::Char('A')), Ok(Value::Int(-65))));
        assert!(unary(UnaryOp::Not, Value::Int(1)).is_err());
        assert!(matches!(unary(UnaryOp::Not, Value::Bool(true)), Ok(Value::Bool(false))));
    }
}
