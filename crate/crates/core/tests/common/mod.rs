#![allow(dead_code)]

use calculist::assembler::{assemble, disassemble, verify};
use calculist::compiler::CompileErrorKind;
use calculist::session::Outcome;
use calculist::{CalcError, Session};

pub const CORPUS: [&str; 8] = [
    include_str!("../corpus/basics.clc"),
    include_str!("../corpus/lists.clc"),
    include_str!("../corpus/employees.clc"),
    include_str!("../corpus/higher_order.clc"),
    include_str!("../corpus/twice.clc"),
    include_str!("../corpus/local_vars.clc"),
    include_str!("../corpus/star_functions.clc"),
    include_str!("../corpus/bonus.clc"),
];

/// Printed lines of every statement; panics on the first error.
pub fn run_ok(s: &mut Session, script: &str) -> Vec<String> {
    let mut lines = Vec::new();
    for Outcome { text, error } in s.eval_script(script) {
        if let Some(e) = error {
            panic!("unexpected error: {e}\nscript:\n{script}");
        }
        lines.extend(text.lines().map(str::to_string));
    }
    lines
}

/// Output of a single query.
pub fn query(s: &mut Session, q: &str) -> String {
    let lines = run_ok(s, q);
    lines.join("\n")
}

/// Session with the whole corpus loaded.
pub fn corpus_session() -> (Session, Vec<String>) {
    let mut s = Session::new();
    let mut out = Vec::new();
    for f in CORPUS {
        out.extend(run_ok(&mut s, f));
    }
    (s, out)
}

/// `[ 1, 2, 3 ]` for a slice of ints.
pub fn int_list(xs: &[i64]) -> String {
    if xs.is_empty() {
        return "[]".into();
    }
    let items: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
    format!("[ {} ]", items.join(", "))
}

/// Parses a printed list of numbers.
pub fn parse_numbers(text: &str) -> Vec<f64> {
    text.trim()
        .trim_start_matches('[')
        .trim_end_matches(']')
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().unwrap_or_else(|_| panic!("not a number: {t}")))
        .collect()
}

pub const RANGE_DEFS: &str = "
listRev(L): L==[]? []: listRev(L[>])+[L[.]];
rev1(L,R): L==[]? R: rev1(L[>],[L[.]|R]);
rev(L): rev1(L,[]);
range(x1,x2): x1>x2? []: [x1|range(x1+1,x2)];
";

/// Clops of `^f(range(1,n));` for each n.
pub fn clops_of(s: &mut Session, f: &str, ns: &[i64]) -> Vec<f64> {
    ns.iter()
        .map(|n| {
            run_ok(s, &format!("Ln = range(1,{n});"));
            run_ok(s, &format!("^{f}(Ln);"));
            s.last_clops() as f64
        })
        .collect()
}

/// R² of the least-squares polynomial fit of the given degree.
pub fn r_squared(xs: &[f64], ys: &[f64], degree: usize) -> f64 {
    use nalgebra::{DMatrix, DVector};
    let a = DMatrix::from_fn(xs.len(), degree + 1, |i, j| xs[i].powi(j as i32));
    let y = DVector::from_column_slice(ys);
    let coef = a
        .clone()
        .svd(true, true)
        .solve(&y, 1e-12)
        .expect("least squares");
    let fit = &a * coef;
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let ss_res: f64 = ys.iter().zip(fit.iter()).map(|(y, f)| (y - f).powi(2)).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - mean).powi(2)).sum();
    1.0 - ss_res / ss_tot
}

/// Right rotation by `k` positions.
pub fn rotate_oracle(xs: &[i64], k: i64) -> Vec<i64> {
    let n = xs.len() as i64;
    if n == 0 {
        return Vec::new();
    }
    let k = k.rem_euclid(n) as usize;
    let mut v = xs.to_vec();
    v.rotate_right(k);
    v
}

/// Solves an upper triangular system by back substitution.
pub fn back_substitution(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

/// Shallow operations share cells with their source, slices do not.
/// Checked against a plain vector model.
pub fn shallow_deep_check(xs: &[i64], i: usize, v: i64) -> Result<(), String> {
    let mut s = Session::new();
    run_ok(&mut s, "set*(L,i,v): true {! L[i]=v !};");
    let n = xs.len();
    let a = int_list(xs);
    let i = i % n;
    let expect = |s: &mut Session, q: &str, want: &[i64]| -> Result<(), String> {
        let got = query(s, q);
        if got == int_list(want) {
            Ok(())
        } else {
            Err(format!("{q} printed {got}, expected {}", int_list(want)))
        }
    };
    let mut changed = xs.to_vec();
    changed[i] = v;

    run_ok(&mut s, &format!("A = {a}; B = A[:]; ^set(B,{i},{v});"));
    expect(&mut s, "^A;", xs)?;
    expect(&mut s, "^B;", &changed)?;

    run_ok(&mut s, &format!("A = {a}; F = A; ^set(F,{i},{v});"));
    expect(&mut s, "^A;", &changed)?;

    run_ok(&mut s, &format!("A = {a}; S = A[{i}:]; ^set(S,0,{v});"));
    expect(&mut s, "^A;", xs)?;

    if n >= 2 {
        let j = i % (n - 1);
        let mut via_tail = xs.to_vec();
        via_tail[j + 1] = v;
        run_ok(&mut s, &format!("A = {a}; C = A[>]; ^set(C,{j},{v});"));
        expect(&mut s, "^A;", &via_tail)?;
    }

    run_ok(&mut s, &format!("A = {a}; E = [100, 200]; D = A + E; ^set(D,{n},{v}); ^set(D,{i},{v});"));
    expect(&mut s, "^A;", xs)?;
    expect(&mut s, "^E;", &[v, 200])?;

    run_ok(&mut s, &format!("A = {a}; P = [0 | A]; ^set(P,{},{v});", i + 1));
    expect(&mut s, "^A;", &changed)?;
    Ok(())
}

pub const TCO_DEFS: &str = "
rev1(L,R): L==[]? R: rev1(L[>],[L[.]|R]);
rev(L): rev1(L,[]);
rangeT(a,b,R): a>b? R: rangeT(a,b-1,[b|R]);
fibe1(x,f2,f1,k) :  x==k?  f1: fibe1(x,f1,f1+f2,k+1);
";

/// The optimizer changes neither outputs nor clops-visible results, only
/// the frame depth.
pub fn tco_transparency(n: i64) -> Result<(), String> {
    let queries = [
        format!("^rev(rangeT(1,{n},[]));"),
        format!("^fibe1({n},0,1,1);"),
    ];
    let mut results = Vec::new();
    for opt in [true, false] {
        let mut s = Session::new();
        s.set_opt(opt);
        run_ok(&mut s, TCO_DEFS);
        let mut outs = Vec::new();
        let mut depths = Vec::new();
        for q in &queries {
            outs.push(query(&mut s, q));
            depths.push(s.last_depth());
        }
        results.push((outs, depths));
    }
    let (on, off) = (&results[0], &results[1]);
    if on.0 != off.0 {
        return Err("outputs differ with and without the optimizer".into());
    }
    if on.1.iter().any(|&d| d > 4) {
        return Err(format!("optimized depths {:?} are not bounded", on.1));
    }
    if off.1.iter().any(|&d| (d as i64) < n) {
        return Err(format!("unoptimized depths {:?} are below {n}", off.1));
    }
    Ok(())
}

fn compile_kind(s: &mut Session, src: &str) -> Option<CompileErrorKind> {
    let outs = s.eval_script(src);
    match outs.last().and_then(|o| o.error.clone()) {
        Some(CalcError::Compile(e)) => Some(e.kind),
        _ => None,
    }
}

/// Star-call violations, arity mismatches and constant type errors are
/// rejected before anything runs.
pub fn static_checks() -> Result<(), String> {
    let mut s = Session::new();
    run_ok(
        &mut s,
        "MATH: zeroD;
         div*(x,y): <MATH*> {! zeroD=false !} y==0 ? 0 {! zeroD=true !}: x/y;
         fibe1(x,f2,f1,k) :  x==k?  f1: fibe1(x,f1,f1+f2,k+1);
         map(L,f/1): L==[]? []: [f(L[.]) | map(L[>],f)];
         C = 0;",
    );
    let cases = [
        ("g(x): div(x,2);", CompileErrorKind::StarCall),
        ("h(L): map(L, lambda x: div(x,2))[0] + div(1,2);", CompileErrorKind::StarCall),
        ("^fibe1(1,2);", CompileErrorKind::Arity),
        ("k(x): fibe1(x);", CompileErrorKind::Arity),
        ("^map([1], lambda x,y: x);", CompileErrorKind::Arity),
        ("^\"a\" - 1;", CompileErrorKind::Type),
        ("f(x): x > 0 ? true + 1 : 0;", CompileErrorKind::Type),
        ("^1 < \"b\";", CompileErrorKind::Type),
        ("^C + (1 ? 2 : 3);", CompileErrorKind::Type),
    ];
    for (src, want) in cases {
        let before = query(&mut s, "^C;");
        match compile_kind(&mut s, src) {
            Some(k) if k == want => {}
            other => return Err(format!("`{src}`: expected {want:?}, got {other:?}")),
        }
        if query(&mut s, "^C;") != before {
            return Err(format!("`{src}` changed the session state"));
        }
    }
    Ok(())
}

/// Every runtime error is reported and leaves a usable, empty machine.
pub fn error_recovery() -> Result<(), String> {
    let mut s = Session::new();
    s.set_max_depth(10_000);
    run_ok(
        &mut s,
        "M: hits; M.hits = 0;
         bump*(x): <M*> {! hits+=1 !} x//0;
         down(n): n==0? 0: 1+down(n-1);
         f(x): x+1;
         head(L): L[.];
         wrap(f/2): [f];",
    );
    let failing = [
        "^1//0;",
        "^5%0;",
        "^[][>];",
        "^head([]);",
        "^[1,2][5];",
        r#"^"abc"[7];"#,
        r#"^exc("boom");"#,
        "^f([1]);",
        "^down(100000);",
        "^bump(3);",
        r#"^{"a":1}[0];"#,
        "^wrap(lambda x,y: x)[0](1);",
        r#"^<<("/nonexistent/value.txt");"#,
    ];
    for q in failing {
        let outs = s.eval(q);
        if !matches!(outs.last().and_then(|o| o.error.as_ref()), Some(CalcError::Runtime(_))) {
            return Err(format!("`{q}` did not raise a runtime error: {outs:?}"));
        }
        let mem = s.eval_input("!memory");
        if !mem.starts_with("STACK: 0 slots, 0 frames") {
            return Err(format!("`{q}` left the machine busy: {mem}"));
        }
        let two = s.eval_input("^1+1;");
        if two != "2\n" {
            return Err(format!("after `{q}` the session printed {two:?}"));
        }
    }
    if query(&mut s, "^M.hits;") != "1" {
        return Err("setting commands before an error were rolled back".into());
    }
    Ok(())
}

pub const FOLLOW_UP: &str = "
!vars
!funcs
^rev(range(1,30));
^emps;
^K;
^MATH1.somma;
^quicksort([9,1,8,2,7,3], lambda x,y: x>=y);
";

/// Saving the corpus session and importing it into a fresh one reproduces
/// the listings and later query outputs.
pub fn save_import_replay() -> Result<(), String> {
    let (mut a, _) = corpus_session();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("session.clc");
    let p = path.display().to_string();
    let saved = a.eval_input(&format!("!save({p})\n"));
    if !saved.is_empty() {
        return Err(format!("save printed {saved}"));
    }
    let mut b = Session::new();
    let imported = b.eval_input(&format!("!import({p})\n"));
    if imported.contains("error") {
        return Err(format!("import failed: {imported}"));
    }
    let (oa, ob) = (a.eval_input(FOLLOW_UP), b.eval_input(FOLLOW_UP));
    if oa != ob {
        return Err(format!("replayed session differs:\n{oa}\n---\n{ob}"));
    }
    if a.history() != b.history() {
        return Err("histories differ".into());
    }
    Ok(())
}

/// Disassembling and reassembling every compiled function gives back the
/// same unit.
pub fn assembler_round_trip(s: &Session) -> Result<usize, String> {
    let mut checked = 0;
    for f in s.functions() {
        for unit in [&f.plain, &f.optimized] {
            verify(unit).map_err(|e| format!("compiled code fails verification: {e}"))?;
            let text = disassemble(unit, s.symbols());
            let mut syms = s.symbols().clone();
            let back = assemble(&text, &mut syms).map_err(|e| format!("{}: {e}\n{text}", f.def.name))?;
            if back.len() != 1 || back[0] != **unit {
                return Err(format!("{} does not round-trip:\n{text}", f.def.name));
            }
            if syms.fn_count() != s.symbols().fn_count() || syms.global_count() != s.symbols().global_count() {
                return Err(format!("{} introduced new names", f.def.name));
            }
            checked += 1;
        }
    }
    Ok(checked)
}
