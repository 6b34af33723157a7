use std::fs;
use std::io::{self, BufRead, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use calculist::assembler::load_program;
use calculist::clvm::{Linkage, Machine};
use calculist::frontend::needs_more_input;
use calculist::values::Value;
use calculist::Session;

#[derive(Parser)]
#[command(name = "calculist", version, about = "CalcuList REPL, batch runner and CLVM assembler")]
struct Cli {
    /// Disable the tail-call optimizer.
    #[arg(long, global = true)]
    no_opt: bool,
    /// Trace every executed instruction on stderr.
    #[arg(long, global = true)]
    trace: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a session file.
    Run { file: PathBuf },
    /// Assemble a .clvm file and run its `main` unit.
    Asm { file: PathBuf },
}

fn session(cli: &Cli) -> Session {
    let mut s = Session::new();
    s.set_opt(!cli.no_opt);
    s.set_debug(cli.trace);
    s
}

fn repl(mut s: Session) -> ExitCode {
    let stdin = io::stdin();
    let mut buf = String::new();
    let mut stdout = io::stdout();
    loop {
        let _ = write!(stdout, "{}", if buf.is_empty() { ">> " } else { ".. " });
        let _ = stdout.flush();
        let mut line = String::new();
        match stdin.lock().read_line(&mut line) {
            Ok(0) => {
                if !buf.trim().is_empty() {
                    print!("{}", s.eval_input(&buf));
                }
                println!();
                return ExitCode::SUCCESS;
            }
            Ok(_) => {}
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::FAILURE;
            }
        }
        buf.push_str(&line);
        if needs_more_input(&buf) {
            continue;
        }
        print!("{}", s.eval_input(&buf));
        buf.clear();
    }
}

fn run_file(mut s: Session, file: &PathBuf) -> ExitCode {
    let text = match fs::read_to_string(file) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", file.display());
            return ExitCode::FAILURE;
        }
    };
    let mut ok = true;
    for o in s.eval_script(&text) {
        print!("{}", o.text);
        if let Some(e) = o.error {
            eprintln!("error: {e}");
            ok = false;
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn run_asm(cli: &Cli, file: &PathBuf) -> ExitCode {
    let program = fs::read_to_string(file)
        .map_err(|e| format!("cannot read {}: {e}", file.display()))
        .and_then(|t| load_program(&t).map_err(|e| e.to_string()));
    let p = match program {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    let mut m = Machine::new();
    if cli.trace {
        m.set_trace(Some(Box::new(io::stderr())));
    }
    let mut globals = vec![Value::Null; p.syms.global_count()];
    let mut link = Linkage {
        functions: &p.functions,
        fn_names: p.syms.fn_names(),
        globals: &mut globals,
    };
    let result = m.execute(&p.entry, &mut link);
    print!("{}", m.take_output());
    match result {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        None => repl(session(&cli)),
        Some(Command::Run { file }) => run_file(session(&cli), file),
        Some(Command::Asm { file }) => run_asm(&cli, file),
    }
}
