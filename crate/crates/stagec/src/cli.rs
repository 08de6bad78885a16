//! Command-line driver.
//!
//! Exit codes: 0 on success, 1 when the input program is rejected (lex,
//! parse, type, staging, or verification errors), 2 for usage problems
//! (unreadable files, a malformed `STAGEC_FUEL`, bad arguments).
//!
//! Diagnostics go to stderr as `path:line:col: message`; program output
//! goes to stdout or `--out`.

use crate::dump;
use crate::elab;
use crate::fuel::Fuel;
use crate::lex;
use crate::nbe;
use crate::obj;
use crate::parse;
use crate::pretty;
use crate::span::{render, Span};
use crate::stage;
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "stagec",
    version,
    about = "Two-stage language front end: type check, run stage-1 code, emit stage-0 programs"
)]
struct Args {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and type check a program.
    Check {
        file: PathBuf,
    },
    /// Run all stage-1 computation and print the residual object program.
    Stage {
        file: PathBuf,
        /// Print only this declaration's staged body.
        #[arg(long)]
        main: Option<String>,
        /// Re-check the staged output with the object-language checker.
        #[arg(long)]
        verify: bool,
        /// Write the output here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the normal form of one declaration's body.
    Nf {
        file: PathBuf,
        /// The declaration to normalize.
        #[arg(long)]
        main: String,
    },
    /// Print the elaborated core program as s-expressions.
    DumpCore {
        file: PathBuf,
    },
    /// Print the staged object program as s-expressions.
    DumpObj {
        file: PathBuf,
    },
}

/// A failure carrying its process exit code.
struct Failure {
    code: i32,
    msg: String,
}

fn fail(code: i32, msg: impl Into<String>) -> Failure {
    Failure {
        code,
        msg: msg.into(),
    }
}

pub fn run() -> i32 {
    let args = Args::parse();
    let fuel = match fuel_from_env() {
        Ok(f) => f,
        Err(e) => {
            eprintln!("{}", e.msg);
            return e.code;
        }
    };
    let res = match args.cmd {
        Cmd::Check { file } => check(&fuel, &file),
        Cmd::Stage {
            file,
            main,
            verify,
            out,
        } => stage_cmd(&fuel, &file, main.as_deref(), verify, out.as_deref()),
        Cmd::Nf { file, main } => nf(&fuel, &file, &main),
        Cmd::DumpCore { file } => dump_core(&fuel, &file),
        Cmd::DumpObj { file } => dump_obj(&fuel, &file),
    };
    match res {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.msg);
            e.code
        }
    }
}

/// `STAGEC_FUEL` bounds the number of evaluation steps; unset means
/// unlimited.
fn fuel_from_env() -> Result<Fuel, Failure> {
    match std::env::var("STAGEC_FUEL") {
        Ok(raw) => raw
            .trim()
            .parse::<u64>()
            .map(Fuel::limited)
            .map_err(|_| fail(2, format!("STAGEC_FUEL must be a number, got `{raw}`"))),
        Err(_) => Ok(Fuel::unlimited()),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| fail(2, format!("cannot read {}: {e}", path.display())))
}

fn front(fuel: &Fuel, path: &Path) -> Result<(String, crate::core::Program), Failure> {
    let src = read(path)?;
    let p = path.display().to_string();
    let diag = |span: Span, msg: &str| fail(1, render(&p, &src, span, msg));
    let toks = lex::tokenize(&src).map_err(|e| diag(e.span, &e.msg))?;
    let decls = parse::parse_program(toks, src.len()).map_err(|e| diag(e.span, &e.msg))?;
    let prog = elab::elab_program(fuel, &decls)
        .map_err(|e| diag(e.span, &e.kind.to_string()))?;
    Ok((src, prog))
}

fn check(fuel: &Fuel, path: &Path) -> Result<(), Failure> {
    let (_, prog) = front(fuel, path)?;
    println!("checked {} declarations", prog.decls.len());
    Ok(())
}

fn staged(
    fuel: &Fuel,
    path: &Path,
) -> Result<(obj::ObjProgram, Vec<stage::StageSkip>), Failure> {
    let (_, prog) = front(fuel, path)?;
    stage::stage_program(fuel, &prog).map_err(|e| fail(1, format!("{}: {e}", path.display())))
}

fn stage_cmd(
    fuel: &Fuel,
    path: &Path,
    main: Option<&str>,
    verify: bool,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let (obj_prog, skips) = staged(fuel, path)?;
    if !skips.is_empty() {
        let names: Vec<&str> = skips.iter().map(|s| &*s.name).collect();
        eprintln!("note: computed at stage 1 and erased: {}", names.join(", "));
    }
    if verify {
        obj::check_program(fuel, &obj_prog)
            .map_err(|e| fail(1, format!("{}: verification failed: {e}", path.display())))?;
    }
    let text = match main {
        Some(name) => {
            let (idx, d) = obj_prog.decl(name).ok_or_else(|| {
                fail(1, format!("{}: no staged declaration `{name}`", path.display()))
            })?;
            let body = d.body.as_ref().ok_or_else(|| {
                fail(1, format!("{}: `{name}` is an assumption", path.display()))
            })?;
            let names: Vec<crate::core::Name> = obj_prog.decls[..idx]
                .iter()
                .map(|d| d.name.clone())
                .collect();
            let mut s = obj::obj_to_string(&names, body);
            s.push('\n');
            s
        }
        None => obj::obj_program_to_string(&obj_prog),
    };
    write_out(out, &text)
}

fn nf(fuel: &Fuel, path: &Path, main: &str) -> Result<(), Failure> {
    let (_, prog) = front(fuel, path)?;
    let (idx, d) = prog
        .decl(main)
        .ok_or_else(|| fail(1, format!("{}: no declaration `{main}`", path.display())))?;
    let body = d
        .body
        .as_ref()
        .ok_or_else(|| fail(1, format!("{}: `{main}` is an assumption", path.display())))?;
    let mut env = nbe::program_env(fuel, &prog)
        .map_err(|e| fail(1, format!("{}: {e}", path.display())))?;
    env.truncate(idx);
    let term = nbe::nf(fuel, &env, idx, body)
        .map_err(|e| fail(1, format!("{}: {e}", path.display())))?;
    let names: Vec<crate::core::Name> =
        prog.decls[..idx].iter().map(|d| d.name.clone()).collect();
    println!("{}", pretty::term_to_string(&names, &term));
    Ok(())
}

fn dump_core(fuel: &Fuel, path: &Path) -> Result<(), Failure> {
    let (_, prog) = front(fuel, path)?;
    print!("{}", dump::core_program_sexp(&prog));
    Ok(())
}

fn dump_obj(fuel: &Fuel, path: &Path) -> Result<(), Failure> {
    let (obj_prog, _) = staged(fuel, path)?;
    print!("{}", dump::obj_program_sexp(&obj_prog));
    Ok(())
}

fn write_out(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| fail(2, format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
