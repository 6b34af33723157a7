mod common;

use calculist::frontend::ast::Statement;
use calculist::frontend::{parse_statement, script_inputs, split_statements};
use calculist::Session;
use common::*;
use proptest::prelude::*;

/// Integer expression with its expected value (`None` on division by zero).
#[derive(Debug, Clone)]
enum IntExpr {
    Lit(i32),
    Bin(Box<IntExpr>, char, Box<IntExpr>),
    Neg(Box<IntExpr>),
}

impl IntExpr {
    fn text(&self) -> String {
        match self {
            IntExpr::Lit(v) if *v < 0 => format!("({v})"),
            IntExpr::Lit(v) => v.to_string(),
            IntExpr::Neg(e) => format!("-({})", e.text()),
            IntExpr::Bin(a, '/', b) => format!("({} // {})", a.text(), b.text()),
            IntExpr::Bin(a, op, b) => format!("({} {op} {})", a.text(), b.text()),
        }
    }

    fn eval(&self) -> Option<i32> {
        Some(match self {
            IntExpr::Lit(v) => *v,
            IntExpr::Neg(e) => e.eval()?.wrapping_neg(),
            IntExpr::Bin(a, op, b) => {
                let (a, b) = (a.eval()?, b.eval()?);
                match op {
                    '+' => a.wrapping_add(b),
                    '-' => a.wrapping_sub(b),
                    '*' => a.wrapping_mul(b),
                    '/' | '%' if b == 0 => return None,
                    '/' => floor_div(a, b),
                    _ => a.wrapping_sub(b.wrapping_mul(floor_div(a, b))),
                }
            }
        })
    }
}

fn int_expr() -> impl Strategy<Value = IntExpr> {
    let leaf = (-50i32..50).prop_map(IntExpr::Lit);
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), prop::sample::select(vec!['+', '-', '*', '/', '%']), inner.clone())
                .prop_map(|(a, op, b)| IntExpr::Bin(Box::new(a), op, Box::new(b))),
            inner.prop_map(|e| IntExpr::Neg(Box::new(e))),
        ]
    })
}

fn floor_div(a: i32, b: i32) -> i32 {
    (a as i64).div_euclid(b as i64) as i32 - if b < 0 && (a as i64).rem_euclid(b as i64) != 0 { 1 } else { 0 }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn shallow_and_deep_operations(
        xs in prop::collection::vec(-1000i64..1000, 1..=50),
        i in any::<usize>(),
        v in -99i64..99,
    ) {
        shallow_deep_check(&xs, i, v).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn integer_arithmetic_matches_floor_semantics(e in int_expr()) {
        let mut s = Session::new();
        let out = s.eval_input(&format!("^{};", e.text()));
        match e.eval() {
            Some(v) => prop_assert_eq!(out, format!("{v}\n")),
            None => prop_assert!(out.starts_with("error: division by zero"), "{}", out),
        }
    }

    #[test]
    fn floor_division_oracle(a in -1000i32..1000, b in -50i32..50) {
        prop_assume!(b != 0);
        let mut s = Session::new();
        let q = floor_div(a, b);
        let r = a - b * q;
        prop_assert_eq!(s.eval_input(&format!("^{a} // ({b});")), format!("{q}\n"));
        prop_assert_eq!(s.eval_input(&format!("^{a} % ({b});")), format!("{r}\n"));
    }

    #[test]
    fn slices_copy_and_index_like_vectors(
        xs in prop::collection::vec(-100i64..100, 0..=30),
        lo in 0usize..31,
        hi in 0usize..31,
    ) {
        let (lo, hi) = (lo.min(xs.len()), hi.min(xs.len()));
        let mut s = Session::new();
        let out = s.eval_input(&format!("^{}[{lo}:{hi}];", int_list(&xs)));
        if lo <= hi {
            prop_assert_eq!(out, format!("{}\n", int_list(&xs[lo..hi])));
        } else {
            prop_assert!(out.starts_with("error: index out of range"), "{}", out);
        }
        if !xs.is_empty() {
            let out = s.eval_input(&format!("^_len({});", int_list(&xs)));
            prop_assert_eq!(out, format!("{}\n", xs.len()));
        }
    }

    #[test]
    fn rev_matches_vector_reverse(xs in prop::collection::vec(-1000i64..1000, 0..=60)) {
        let mut s = Session::new();
        run_ok(&mut s, RANGE_DEFS);
        let want: Vec<i64> = xs.iter().rev().copied().collect();
        prop_assert_eq!(query(&mut s, &format!("^rev({});", int_list(&xs))), int_list(&want));
        prop_assert_eq!(query(&mut s, &format!("^listRev({});", int_list(&xs))), int_list(&want));
    }

    #[test]
    fn rotate_matches_oracle(xs in prop::collection::vec(-100i64..100, 0..=12), k in -30i64..30) {
        let mut s = Session::new();
        run_ok(&mut s, CORPUS[5].lines().next().unwrap());
        let got = query(&mut s, &format!("^rotate({}, {k});", int_list(&xs)));
        prop_assert_eq!(got, int_list(&rotate_oracle(&xs, k)));
    }
}

#[test]
fn printed_corpus_statements_reparse_identically() {
    let mut count = 0;
    for script in CORPUS {
        for stmt in script_inputs(script).iter().flat_map(|i| split_statements(i)) {
            let parsed = parse_statement(stmt).unwrap();
            if matches!(parsed, Statement::Service(_)) {
                continue;
            }
            let printed = parsed.to_string();
            let again = parse_statement(&printed)
                .unwrap_or_else(|e| panic!("{printed} does not reparse: {e}"));
            assert_eq!(parsed, again, "{printed}");
            count += 1;
        }
    }
    assert!(count > 40);
}

#[test]
fn optimizer_is_transparent_at_scale() {
    tco_transparency(100_000).unwrap();
}

#[test]
fn static_check_suite() {
    static_checks().unwrap();
}

#[test]
fn error_recovery_suite() {
    error_recovery().unwrap();
}
