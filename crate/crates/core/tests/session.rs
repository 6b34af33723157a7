mod common;

use std::fs;
use std::process::Command;

use calculist::values::ErrorKind;
use calculist::{CalcError, Session};
use common::*;

fn runtime_kind(s: &mut Session, src: &str) -> Option<ErrorKind> {
    match s.eval_script(src).pop()?.error? {
        CalcError::Runtime(e) => Some(e.kind),
        _ => None,
    }
}

#[test]
fn deep_recursion_needs_the_optimizer() {
    let mut s = Session::new();
    run_ok(
        &mut s,
        "rev1(L,R): L==[]? R: rev1(L[>],[L[.]|R]);
         rev(L): rev1(L,[]);
         rangeT(a,b,R): a>b? R: rangeT(a,b-1,[b|R]);
         Big = rangeT(1,1000000,[]);",
    );
    run_ok(&mut s, "!opt off");
    assert_eq!(runtime_kind(&mut s, "^_len(rev(Big));"), Some(ErrorKind::StackOverflow));
    assert!(s.eval_input("!memory").starts_with("STACK: 0 slots, 0 frames"));
    run_ok(&mut s, "!opt on");
    assert_eq!(query(&mut s, "^_len(rev(Big));"), "1000000");
    assert_eq!(query(&mut s, "^rev(Big)[0];"), "1000000");
}

#[test]
fn clops_are_positive_and_repeatable() {
    let mut s = Session::new();
    run_ok(&mut s, RANGE_DEFS);
    run_ok(&mut s, "L1 = range(1,1000); ^rev(L1);");
    let first = s.eval_input("!clops");
    run_ok(&mut s, "^rev(L1);");
    assert_eq!(s.eval_input("!clops"), first);
    assert!(first.trim().parse::<u64>().unwrap() > 0);
}

#[test]
fn state_equation_and_retyping() {
    let mut s = Session::new();
    let direct = query(&mut s, "^[1, 'a', \"b\", 2.0, {\"k\": null}];");
    run_ok(&mut s, "V = [1, 'a', \"b\", 2.0, {\"k\": null}];");
    assert_eq!(query(&mut s, "^V;"), direct);
    run_ok(&mut s, "V = 3;");
    assert_eq!(s.eval_input("!vars"), "V: int = 3\n");
    run_ok(&mut s, "V = \"now a string\";");
    assert_eq!(s.eval_input("!vars"), "V: string = \"now a string\"\n");
}

#[test]
fn non_star_functions_ignore_global_changes() {
    let mut s = Session::new();
    run_ok(&mut s, "x = 1; f(y): y + 1;");
    let before = query(&mut s, "^f(10);");
    run_ok(&mut s, "x = 100; y = \"text\";");
    assert_eq!(query(&mut s, "^f(10);"), before);
    run_ok(&mut s, "g(a): a + x;");
    let out = s.eval_input("^g(1);");
    assert!(out.starts_with("error: unknown name: function `x`"), "{out}");
}

#[test]
fn labels_start_null_and_show_with_percent() {
    let mut s = Session::new();
    run_ok(&mut s, "MATH: zeroD;");
    assert_eq!(s.eval_input("^MATH.zeroD;"), "");
    assert_eq!(s.eval_input("^MATH.zeroD %;"), "null\n");
    assert_eq!(s.eval_input("!vars"), "MATH.zeroD: null = null\n");
}

#[test]
fn unknown_service_commands_change_nothing() {
    let mut s = Session::new();
    run_ok(&mut s, "a = 1;");
    let vars = s.eval_input("!vars");
    assert!(s.eval_input("!nonsense").starts_with("error: unknown command"));
    assert!(s.eval_input("!code missing").starts_with("error:"));
    assert_eq!(s.eval_input("!vars"), vars);
    assert_eq!(s.history(), ["a = 1;"]);
}

#[test]
fn save_and_import_replay_the_corpus() {
    save_import_replay().unwrap();
}

#[test]
fn import_of_a_missing_file_is_reported() {
    let mut s = Session::new();
    run_ok(&mut s, "a = 1;");
    let out = s.eval_input("!import(/definitely/not/here.clc)\n");
    assert!(out.starts_with("error: i/o error"), "{out}");
    assert_eq!(s.eval_input("!vars"), "a: int = 1\n");
}

#[test]
fn values_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let list = dir.path().join("list.txt");
    let json = dir.path().join("json.txt");
    let bad = dir.path().join("bad.txt");
    let mut s = Session::new();
    run_ok(&mut s, "W = [1, -2, 3.5, 'c', \"s\", [true, null], {\"a\": [1]}];");
    let w = s.global_value("W").unwrap();
    calculist::session::write_value(s.heap(), list.to_str().unwrap(), w).unwrap();
    fs::write(&json, "{ \"a\": 1 }").unwrap();
    fs::write(&bad, "[1,").unwrap();

    let back = query(&mut s, &format!("^<<({});", list.display()));
    assert_eq!(back, query(&mut s, "^W;"));
    assert_eq!(query(&mut s, &format!("^_len(<<({}));", json.display())), "1");
    run_ok(&mut s, "k = 5;");
    let out = s.eval_input(&format!("k = <<({});", bad.display()));
    assert!(out.starts_with("error:"), "{out}");
    assert_eq!(query(&mut s, "^k;"), "5");
}

#[test]
fn redirection_sends_prints_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.txt");
    let mut s = Session::new();
    let console = s.eval_input(&format!(">>({});\n^1+1;\n^\"x\";\n>>();\n^3;", out.display()));
    assert_eq!(console, "3\n");
    assert_eq!(fs::read_to_string(&out).unwrap(), "2\nx\n");
}

#[test]
fn printing_commands_write_inside_functions() {
    let mut s = Session::new();
    run_ok(&mut s, "show*(L): L==[]? true: {^ L[.] ^} show(L[>]);");
    assert_eq!(s.eval_input("^show([1,2]);"), "1\n2\ntrue\n");
}

#[test]
fn code_listing_reassembles() {
    let (s, _) = corpus_session();
    assert!(assembler_round_trip(&s).unwrap() > 40);
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_calculist"))
}

#[test]
fn batch_runs_report_errors_in_the_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.clc");
    let bad = dir.path().join("bad.clc");
    fs::write(&good, CORPUS[0]).unwrap();
    fs::write(&bad, "^1;\n^[][>];\n^2;\n").unwrap();

    let out = bin().arg("run").arg(&good).output().unwrap();
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "4.2\ntrue\nHello World\nHi World\n55\nint\n"
    );

    let out = bin().arg("run").arg(&bad).output().unwrap();
    assert!(!out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "1\n2\n");
    assert!(String::from_utf8(out.stderr).unwrap().contains("empty list"));
}

#[test]
fn no_opt_flag_disables_the_optimizer() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("deep.clc");
    fs::write(
        &f,
        "down(n): n==0? 0: down(n-1);\n^down(2000000);\n",
    )
    .unwrap();
    assert!(bin().arg("run").arg(&f).output().unwrap().status.success());
    assert!(!bin().args(["--no-opt", "run"]).arg(&f).output().unwrap().status.success());
}

#[test]
fn repl_prompts_and_continues_lines() {
    use std::io::Write;
    use std::process::Stdio;
    let mut child = bin()
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"f(x): x > 1 ?\n x : 0;\n^f(5)\n^nope;\n^f(0);\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with(">> .. >> 5\n>> error: unknown name"), "{text}");
    assert!(text.contains("\n>> 0\n"), "{text}");
}

#[test]
fn asm_command_runs_main() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("p.clvm");
    fs::write(
        &f,
        ".func main params= ret=0 locals=0 captures=0
    PUSHC 6
    CALL sq 1
    PRINT 0
    HALT
.end
.func sq params=0 ret=0 locals=0 captures=0
    LOADP 0
    LOADP 0
    MUL
    RET
.end
",
    )
    .unwrap();
    let out = bin().arg("asm").arg(&f).output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "36\n");

    fs::write(&f, ".func main params= ret=0 locals=0 captures=0\n    BOGUS\n.end\n").unwrap();
    let out = bin().arg("asm").arg(&f).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("unknown opcode"));
}
