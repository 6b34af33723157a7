use super::*;
use crate::clvm::Instr;
use crate::frontend::ast::Statement;
use crate::frontend::parse_statement;

fn def(src: &str) -> FunctionDef {
    match parse_statement(src).unwrap() {
        Statement::Function(d) => d,
        other => panic!("not a definition: {other:?}"),
    }
}

fn compile(syms: &mut Symbols, src: &str) -> CompileResult<CompiledFunction> {
    compile_function(&def(src), syms)
}

fn kind(r: CompileResult<CompiledFunction>) -> CompileErrorKind {
    r.map(|_| ()).unwrap_err().kind
}

#[test]
fn identity_loads_first_parameter() {
    let mut s = Symbols::new();
    let f = compile(&mut s, "id(x): x;").unwrap();
    assert_eq!(f.plain.code, vec![Instr::LoadP(0), Instr::Ret]);
}

#[test]
fn tail_self_calls_become_tailcalls() {
    let mut s = Symbols::new();
    let f = compile(&mut s, "rev1(L,R): L==[]? R: rev1(L[>],[L[.]|R]);").unwrap();
    assert!(f.plain.code.iter().any(|i| matches!(i, Instr::Call(..))));
    assert!(f.optimized.code.iter().any(|i| matches!(i, Instr::TailCall(..))));
    assert!(!f.optimized.code.iter().any(|i| matches!(i, Instr::Call(..))));

    let g = compile(&mut s, "listRev(L): L==[]? []: listRev(L[>])+[L[.]];").unwrap();
    assert_eq!(g.plain, g.optimized);
}

#[test]
fn post_blocks_keep_calls_out_of_tail_position() {
    let mut s = Symbols::new();
    s.declare_label("M", &["acc".to_string()]);
    let f = compile(&mut s, "f*(n): <M*> n==0? 0: f(n-1) {! acc+=n !};").unwrap();
    assert!(!f.optimized.code.iter().any(|i| matches!(i, Instr::TailCall(..))));
}

#[test]
fn static_checks() {
    let mut s = Symbols::new();
    compile(&mut s, "fibe1(x,f2,f1,k): x==k? f1: fibe1(x,f1,f1+f2,k+1);").unwrap();
    assert_eq!(kind(compile(&mut s, "g(x): fibe1(1,2);")), CompileErrorKind::Arity);
    assert_eq!(kind(compile(&mut s, "f(x): 1+true;")), CompileErrorKind::Type);
    assert_eq!(kind(compile(&mut s, "f(x): x > 1 ? \"a\" - 1 : 0;")), CompileErrorKind::Type);
    s.declare_label("MATH", &["zeroD".to_string()]);
    compile(&mut s, "div*(x,y): <MATH*> {! zeroD=false !} y==0 ? 0 {! zeroD=true !}: x/y;").unwrap();
    assert_eq!(kind(compile(&mut s, "g(x): div(x,2);")), CompileErrorKind::StarCall);
    assert_eq!(kind(compile(&mut s, "div(x,y): x;")), CompileErrorKind::Redefinition);
    assert_eq!(kind(compile(&mut s, "h(f): f(1);")), CompileErrorKind::Arity);
    assert_eq!(kind(compile(&mut s, "h(f/2): f(1);")), CompileErrorKind::Arity);
    compile(&mut s, "map(L,f/1): L==[]? []: [f(L[.]) | map(L[>],f)];").unwrap();
    assert_eq!(
        kind(compile(&mut s, "k(L): map(L, lambda x,y: x);")),
        CompileErrorKind::Arity
    );
    assert_eq!(kind(compile(&mut s, "k(L): map(L, fibe1);")), CompileErrorKind::Arity);
    assert_eq!(kind(compile(&mut s, "k(L): L + M.x;")), CompileErrorKind::UnknownName);
}

#[test]
fn non_star_code_never_writes_globals_or_parameters() {
    let mut s = Symbols::new();
    let f = compile(
        &mut s,
        "rotate(L,k): <n,k1> {! n=_len(L) !} n==0? []: {! k1=k%n !} k1==0? L[:]: L[n-k1:]+L[:n-k1];",
    )
    .unwrap();
    assert!(!f.plain.code.iter().any(|i| i.has_side_effect()));
    assert_eq!(f.plain.locals, 2);
}

#[test]
fn forward_references_are_deferred_to_link_time() {
    let mut s = Symbols::new();
    let rev = compile(&mut s, "rev(L): rev1(L,[]);").unwrap();
    let rev_id = rev.id;
    let mut table = vec![None; s.fn_count()];
    table[rev_id as usize] = Some(rev.plain.clone());
    let q = compile_query(&parse_query("^rev([1]);"), false, &mut s).unwrap();
    assert_eq!(
        link_check(&q, &table, &s).unwrap_err().kind,
        CompileErrorKind::UnknownName
    );
    let rev1 = compile(&mut s, "rev1(L,R): L==[]? R: rev1(L[>],[L[.]|R]);").unwrap();
    table.resize(s.fn_count(), None);
    table[rev1.id as usize] = Some(rev1.plain);
    link_check(&q, &table, &s).unwrap();
}

#[test]
fn lambdas_capture_enclosing_parameters() {
    let mut s = Symbols::new();
    let f = compile(&mut s, "twice(f/1)/1: lambda x: f(f(x));").unwrap();
    assert_eq!(f.plain.lambdas.len(), 1);
    let l = &f.plain.lambdas[0];
    assert_eq!(l.params.len(), 1);
    assert_eq!(l.captures, 1);
    assert!(f.plain.code.contains(&Instr::MkClosure(0, 1)));
}

#[test]
fn compilation_is_deterministic() {
    let src = "merge(O1,O2): O1==[]? O2[:]:O2==[]? O1[:]: O1[.]<O2[.]? [O1[.]|merge(O1[>], O2)]:  [O2[.]|merge(O1,O2[>])];";
    let a = compile(&mut Symbols::new(), src).unwrap();
    let b = compile(&mut Symbols::new(), src).unwrap();
    assert_eq!(a.plain, b.plain);
}

#[test]
fn queries_reject_unknown_names() {
    let mut s = Symbols::new();
    let e = compile_query(&parse_query("^undefinedVar;"), false, &mut s).unwrap_err();
    assert_eq!(e.kind, CompileErrorKind::UnknownName);
    let e = compile_assignment(None, "z", crate::frontend::ast::AssignOp::Add, &Expr::Lit(crate::frontend::ast::Literal::Int(1)), &mut s)
        .unwrap_err();
    assert_eq!(e.kind, CompileErrorKind::UnknownName);
}

fn parse_query(src: &str) -> Expr {
    match parse_statement(src).unwrap() {
        Statement::Query { expr, .. } => expr,
        other => panic!("not a query: {other:?}"),
    }
}
