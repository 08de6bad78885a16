//! Structural dumps of core and object programs as s-expressions.
//!
//! Unlike the pretty printer, these show everything the syntax carries:
//! domain annotations on lambdas, sigma annotations on pairs, literal
//! levels, and de Bruijn indices. Binder names are kept as labels but
//! variables are printed by index, so the output is stable under renaming
//! and usable for diffing two runs. One declaration per line.

use crate::core::{Decl, Ix, Program, Stage, Term};
use crate::obj::{ObjDecl, ObjProgram, ObjTerm};

fn push_core(out: &mut String, t: &Term) {
    use Term::*;
    let s = |st: Stage| st.suffix();
    match t {
        Var(Ix(i)) => {
            out.push_str("(var ");
            out.push_str(&i.to_string());
            out.push(')');
        }
        U(st, l) => {
            out.push_str(&format!("(u{} {})", s(*st), l.0));
        }
        Pi(st, x, a, b) => {
            out.push_str(&format!("(pi{} {x} ", s(*st)));
            push_core(out, a);
            out.push(' ');
            push_core(out, b);
            out.push(')');
        }
        Lam(st, x, a, b) => {
            out.push_str(&format!("(lam{} {x} ", s(*st)));
            push_core(out, a);
            out.push(' ');
            push_core(out, b);
            out.push(')');
        }
        App(st, f, a) => {
            out.push_str(&format!("(app{} ", s(*st)));
            push_core(out, f);
            out.push(' ');
            push_core(out, a);
            out.push(')');
        }
        Sigma(st, x, a, b) => {
            out.push_str(&format!("(sigma{} {x} ", s(*st)));
            push_core(out, a);
            out.push(' ');
            push_core(out, b);
            out.push(')');
        }
        Pair(st, y, a, b) => {
            out.push_str(&format!("(pair{} ", s(*st)));
            push_core(out, y);
            out.push(' ');
            push_core(out, a);
            out.push(' ');
            push_core(out, b);
            out.push(')');
        }
        Fst(st, p) => {
            out.push_str(&format!("(fst{} ", s(*st)));
            push_core(out, p);
            out.push(')');
        }
        Snd(st, p) => {
            out.push_str(&format!("(snd{} ", s(*st)));
            push_core(out, p);
            out.push(')');
        }
        Nat(st, l) => out.push_str(&format!("(nat{} {})", s(*st), l.0)),
        Zero(st, l) => out.push_str(&format!("(zero{} {})", s(*st), l.0)),
        Suc(..) => {
            // Numeral chains are emitted with a loop, not recursion.
            let mut wraps = 0usize;
            let mut cur = t;
            while let Suc(st, inner) = cur {
                out.push_str(&format!("(suc{} ", s(*st)));
                wraps += 1;
                cur = inner;
            }
            push_core(out, cur);
            for _ in 0..wraps {
                out.push(')');
            }
        }
        NatElim(st, m, z, sc, n) => {
            out.push_str(&format!("(natelim{} ", s(*st)));
            push_core(out, m);
            out.push(' ');
            push_core(out, z);
            out.push(' ');
            push_core(out, sc);
            out.push(' ');
            push_core(out, n);
            out.push(')');
        }
        Bool(st, l) => out.push_str(&format!("(bool{} {})", s(*st), l.0)),
        True(st, l) => out.push_str(&format!("(true{} {})", s(*st), l.0)),
        False(st, l) => out.push_str(&format!("(false{} {})", s(*st), l.0)),
        BoolElim(st, m, tc, fc, b) => {
            out.push_str(&format!("(boolelim{} ", s(*st)));
            push_core(out, m);
            out.push(' ');
            push_core(out, tc);
            out.push(' ');
            push_core(out, fc);
            out.push(' ');
            push_core(out, b);
            out.push(')');
        }
        Unit(st, l) => out.push_str(&format!("(top{} {})", s(*st), l.0)),
        Tt(st, l) => out.push_str(&format!("(tt{} {})", s(*st), l.0)),
        Lift(a) => {
            out.push_str("(lift ");
            push_core(out, a);
            out.push(')');
        }
        Quote(u) => {
            out.push_str("(quote ");
            push_core(out, u);
            out.push(')');
        }
        Splice(u) => {
            out.push_str("(splice ");
            push_core(out, u);
            out.push(')');
        }
        Let(st, x, a, v, b) => {
            out.push_str(&format!("(let{} {x} ", s(*st)));
            push_core(out, a);
            out.push(' ');
            push_core(out, v);
            out.push(' ');
            push_core(out, b);
            out.push(')');
        }
    }
}

fn push_obj(out: &mut String, t: &ObjTerm) {
    use ObjTerm::*;
    match t {
        Var(Ix(i)) => {
            out.push_str("(var ");
            out.push_str(&i.to_string());
            out.push(')');
        }
        U(l) => out.push_str(&format!("(u {})", l.0)),
        Pi(x, a, b) => {
            out.push_str(&format!("(pi {x} "));
            push_obj(out, a);
            out.push(' ');
            push_obj(out, b);
            out.push(')');
        }
        Lam(x, a, b) => {
            out.push_str(&format!("(lam {x} "));
            push_obj(out, a);
            out.push(' ');
            push_obj(out, b);
            out.push(')');
        }
        App(f, a) => {
            out.push_str("(app ");
            push_obj(out, f);
            out.push(' ');
            push_obj(out, a);
            out.push(')');
        }
        Sigma(x, a, b) => {
            out.push_str(&format!("(sigma {x} "));
            push_obj(out, a);
            out.push(' ');
            push_obj(out, b);
            out.push(')');
        }
        Pair(y, a, b) => {
            out.push_str("(pair ");
            push_obj(out, y);
            out.push(' ');
            push_obj(out, a);
            out.push(' ');
            push_obj(out, b);
            out.push(')');
        }
        Fst(p) => {
            out.push_str("(fst ");
            push_obj(out, p);
            out.push(')');
        }
        Snd(p) => {
            out.push_str("(snd ");
            push_obj(out, p);
            out.push(')');
        }
        Nat(l) => out.push_str(&format!("(nat {})", l.0)),
        Zero(l) => out.push_str(&format!("(zero {})", l.0)),
        Suc(..) => {
            let mut wraps = 0usize;
            let mut cur = t;
            while let Suc(inner) = cur {
                out.push_str("(suc ");
                wraps += 1;
                cur = inner;
            }
            push_obj(out, cur);
            for _ in 0..wraps {
                out.push(')');
            }
        }
        NatElim(m, z, sc, n) => {
            out.push_str("(natelim ");
            push_obj(out, m);
            out.push(' ');
            push_obj(out, z);
            out.push(' ');
            push_obj(out, sc);
            out.push(' ');
            push_obj(out, n);
            out.push(')');
        }
        Bool(l) => out.push_str(&format!("(bool {})", l.0)),
        True(l) => out.push_str(&format!("(true {})", l.0)),
        False(l) => out.push_str(&format!("(false {})", l.0)),
        BoolElim(m, tc, fc, b) => {
            out.push_str("(boolelim ");
            push_obj(out, m);
            out.push(' ');
            push_obj(out, tc);
            out.push(' ');
            push_obj(out, fc);
            out.push(' ');
            push_obj(out, b);
            out.push(')');
        }
        Unit(l) => out.push_str(&format!("(top {})", l.0)),
        Tt(l) => out.push_str(&format!("(tt {})", l.0)),
        Let(x, a, v, b) => {
            out.push_str(&format!("(let {x} "));
            push_obj(out, a);
            out.push(' ');
            push_obj(out, v);
            out.push(' ');
            push_obj(out, b);
            out.push(')');
        }
    }
}

pub fn core_term_sexp(t: &Term) -> String {
    let mut out = String::new();
    push_core(&mut out, t);
    out
}

pub fn obj_term_sexp(t: &ObjTerm) -> String {
    let mut out = String::new();
    push_obj(&mut out, t);
    out
}

fn core_decl_sexp(d: &Decl) -> String {
    let mut out = String::new();
    match &d.body {
        Some(b) => {
            out.push_str(&format!("(def{} {} {} ", d.stage.suffix(), d.name, d.level.0));
            push_core(&mut out, &d.ty);
            out.push(' ');
            push_core(&mut out, b);
            out.push(')');
        }
        None => {
            out.push_str(&format!(
                "(assume{} {} {} ",
                d.stage.suffix(),
                d.name,
                d.level.0
            ));
            push_core(&mut out, &d.ty);
            out.push(')');
        }
    }
    out
}

fn obj_decl_sexp(d: &ObjDecl) -> String {
    let mut out = String::new();
    match &d.body {
        Some(b) => {
            out.push_str(&format!("(def {} {} ", d.name, d.level.0));
            push_obj(&mut out, &d.ty);
            out.push(' ');
            push_obj(&mut out, b);
            out.push(')');
        }
        None => {
            out.push_str(&format!("(assume {} {} ", d.name, d.level.0));
            push_obj(&mut out, &d.ty);
            out.push(')');
        }
    }
    out
}

/// One line per declaration, in order.
pub fn core_program_sexp(p: &Program) -> String {
    let mut out = String::new();
    for d in &p.decls {
        out.push_str(&core_decl_sexp(d));
        out.push('\n');
    }
    out
}

/// One line per declaration, in order.
pub fn obj_program_sexp(p: &ObjProgram) -> String {
    let mut out = String::new();
    for d in &p.decls {
        out.push_str(&obj_decl_sexp(d));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elab;
    use crate::fuel::Fuel;
    use crate::stage;

    #[test]
    fn core_dump_shows_annotations_and_indices() {
        let fuel = Fuel::unlimited();
        let prog = elab::elab_source(&fuel, "def id : (A : U0) -> A -> A = \\A x. x;").unwrap();
        let line = core_program_sexp(&prog);
        assert_eq!(
            line,
            "(def0 id 1 (pi0 A (u0 0) (pi0 _ (var 0) (var 1))) \
             (lam0 A (u0 0) (lam0 x (var 0) (var 0))))\n"
        );
    }

    #[test]
    fn obj_dump_round_trips_through_staging() {
        let fuel = Fuel::unlimited();
        let prog = elab::elab_source(
            &fuel,
            "def inc : ^Nat0 -> ^Nat0 = \\c. <suc0 ~c>;\n\
             def two : Nat0 = ~(inc <1>);",
        )
        .unwrap();
        let (out, _) = stage::stage_program(&fuel, &prog).unwrap();
        assert_eq!(
            obj_program_sexp(&out),
            "(def two 0 (nat 0) (suc (suc (zero 0))))\n"
        );
    }

    #[test]
    fn deep_numerals_dump_iteratively() {
        use crate::core::{Level, Stage, Term};
        use std::rc::Rc;
        let mut t = Term::Zero(Stage::Obj, Level(0));
        for _ in 0..3_000 {
            t = Term::Suc(Stage::Obj, Rc::new(t));
        }
        let s = core_term_sexp(&t);
        assert!(s.starts_with("(suc0 (suc0 "));
        assert!(s.contains("(zero0 0)"));
        assert!(s.ends_with(")"));
        assert_eq!(s.matches("(suc0 ").count(), 3_000);
    }

    #[test]
    fn quotes_and_splices_are_visible() {
        let fuel = Fuel::unlimited();
        let prog = elab::elab_source(&fuel, "def c : ^Nat0 = <zero0>;").unwrap();
        let line = core_program_sexp(&prog);
        assert_eq!(line, "(def1 c 0 (lift (nat0 0)) (quote (zero0 0)))\n");
    }
}
