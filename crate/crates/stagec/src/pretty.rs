//! Printer for core terms and programs.
//!
//! Output is valid surface syntax: printing an elaborated term and feeding
//! it back through the parser and elaborator yields a `term_eq` result.
//! Numeral rendering: a suc-chain that bottoms out in zero prints as a
//! decimal literal (`suc0 (suc0 zero0)` prints as `2`); any other chain
//! prints as `suc0 (...)` applications.

use crate::core::{occurs, Level, Name, Program, Term};

/// Precedence levels, loosest binding first.
const TERM: u8 = 0; // lambda, let, arrow codomains
const ARROW: u8 = 1;
const SIGMA: u8 = 2;
const APP: u8 = 3;
const ATOM: u8 = 4;

/// Renders `t` with the given names in scope, outermost first.
pub fn term_to_string(names: &[Name], t: &Term) -> String {
    let mut scope: Vec<String> = names.iter().map(|n| n.to_string()).collect();
    let mut out = String::new();
    print_term(&mut scope, t, TERM, &mut out);
    out
}

/// Renders a whole program, one declaration per line.
pub fn program_to_string(prog: &Program) -> String {
    let mut scope: Vec<String> = Vec::new();
    let mut out = String::new();
    for decl in &prog.decls {
        let mut line = String::new();
        match &decl.body {
            Some(body) => {
                line.push_str("def ");
                line.push_str(&decl.name);
                line.push_str(" : ");
                print_term(&mut scope, &decl.ty, TERM, &mut line);
                line.push_str(" = ");
                print_term(&mut scope, body, TERM, &mut line);
            }
            None => {
                line.push_str("assume ");
                line.push_str(&decl.name);
                line.push_str(" : ");
                print_term(&mut scope, &decl.ty, TERM, &mut line);
            }
        }
        line.push(';');
        out.push_str(&line);
        out.push('\n');
        scope.push(decl.name.to_string());
    }
    out
}

/// Picks a name for a binder that collides with nothing in scope.
fn fresh(scope: &[String], hint: &str) -> String {
    let base = if hint.is_empty() || hint == "_" { "x" } else { hint };
    if !scope.iter().any(|n| n == base) {
        return base.to_string();
    }
    let mut candidate = format!("{base}'");
    while scope.iter().any(|n| n == &candidate) {
        candidate.push('\'');
    }
    candidate
}

/// Display name for a binder. A named binder is freshened even when unused,
/// since reusing an in-scope name would capture outer references on
/// re-parse. A `_` binder stays `_` unless the body somehow uses it.
fn binder_name(scope: &[String], hint: &str, used: bool) -> String {
    if hint.is_empty() || hint == "_" {
        if used {
            fresh(scope, "x")
        } else {
            "_".to_string()
        }
    } else {
        fresh(scope, hint)
    }
}

/// A maximal suc-chain ending in zero, if the stages agree along the way.
fn as_numeral(t: &Term) -> Option<u64> {
    let mut n: u64 = 0;
    let mut cur = t;
    loop {
        match cur {
            Term::Suc(s, inner) => {
                n = n.checked_add(1)?;
                match (&**inner, s) {
                    (Term::Suc(s2, _), _) if s2 != s => return None,
                    (Term::Zero(s2, _), _) if s2 != s => return None,
                    _ => cur = inner,
                }
            }
            Term::Zero(..) => return Some(n),
            _ => return None,
        }
    }
}

fn open(out: &mut String, needed: bool) {
    if needed {
        out.push('(');
    }
}

fn close(out: &mut String, needed: bool) {
    if needed {
        out.push(')');
    }
}

fn print_term(scope: &mut Vec<String>, t: &Term, prec: u8, out: &mut String) {
    use Term::*;
    match t {
        Var(ix) => {
            let n = scope.len();
            match n.checked_sub(ix.0 + 1).and_then(|i| scope.get(i)) {
                Some(name) => out.push_str(name),
                // Out-of-scope index: only reachable when printing raw
                // internals in a panic message.
                None => out.push_str(&format!("?{}", ix.0)),
            }
        }
        U(s, Level(0)) => {
            out.push('U');
            out.push_str(s.suffix());
        }
        U(s, l) => {
            let p = prec > APP;
            open(out, p);
            out.push('U');
            out.push_str(s.suffix());
            out.push(' ');
            out.push_str(&l.to_string());
            close(out, p);
        }
        Pi(_, x, a, b) => {
            let p = prec > ARROW;
            open(out, p);
            if occurs(b, 0) {
                let name = fresh(scope, x);
                out.push('(');
                out.push_str(&name);
                out.push_str(" : ");
                print_term(scope, a, TERM, out);
                out.push_str(") -> ");
                scope.push(name);
                print_term(scope, b, TERM, out);
                scope.pop();
            } else {
                print_term(scope, a, SIGMA, out);
                out.push_str(" -> ");
                scope.push("_".to_string());
                print_term(scope, b, TERM, out);
                scope.pop();
            }
            close(out, p);
        }
        Lam(..) => {
            let p = prec > TERM;
            open(out, p);
            out.push('\\');
            let mut body = t;
            let mut pushed = 0;
            while let Lam(_, x, _, b) = body {
                let name = binder_name(scope, x, occurs(b, 0));
                if pushed > 0 {
                    out.push(' ');
                }
                out.push_str(&name);
                scope.push(name);
                pushed += 1;
                body = b;
            }
            out.push_str(". ");
            print_term(scope, body, TERM, out);
            scope.truncate(scope.len() - pushed);
            close(out, p);
        }
        App(_, f, a) => {
            let p = prec > APP;
            open(out, p);
            print_term(scope, f, APP, out);
            out.push(' ');
            print_term(scope, a, ATOM, out);
            close(out, p);
        }
        Sigma(_, x, a, b) => {
            let p = prec > SIGMA;
            open(out, p);
            if occurs(b, 0) {
                let name = fresh(scope, x);
                out.push('(');
                out.push_str(&name);
                out.push_str(" : ");
                print_term(scope, a, TERM, out);
                out.push_str(") * ");
                scope.push(name);
                print_term(scope, b, APP, out);
                scope.pop();
            } else {
                print_term(scope, a, APP, out);
                out.push_str(" * ");
                scope.push("_".to_string());
                print_term(scope, b, APP, out);
                scope.pop();
            }
            close(out, p);
        }
        Pair(_, _, a, b) => {
            out.push('(');
            print_term(scope, a, TERM, out);
            out.push_str(", ");
            print_term(scope, b, TERM, out);
            out.push(')');
        }
        Fst(_, inner) | Snd(_, inner) => {
            let p = prec > APP;
            open(out, p);
            out.push_str(if matches!(t, Fst(..)) { "fst " } else { "snd " });
            print_term(scope, inner, ATOM, out);
            close(out, p);
        }
        Nat(s, l) | Bool(s, l) | Unit(s, l) => {
            let head = match t {
                Nat(..) => "Nat",
                Bool(..) => "Bool",
                _ => "Top",
            };
            if l.0 == 0 {
                out.push_str(head);
                out.push_str(s.suffix());
            } else {
                let p = prec > APP;
                open(out, p);
                out.push_str(head);
                out.push_str(s.suffix());
                out.push(' ');
                out.push_str(&l.to_string());
                close(out, p);
            }
        }
        Zero(..) | Suc(..) => {
            if let Some(n) = as_numeral(t) {
                out.push_str(&n.to_string());
            } else if let Suc(s, inner) = t {
                let p = prec > APP;
                open(out, p);
                out.push_str("suc");
                out.push_str(s.suffix());
                out.push(' ');
                print_term(scope, inner, ATOM, out);
                close(out, p);
            } else {
                unreachable!("bare zero is always a numeral");
            }
        }
        True(s, _) => {
            out.push_str("true");
            out.push_str(s.suffix());
        }
        False(s, _) => {
            out.push_str("false");
            out.push_str(s.suffix());
        }
        Tt(s, _) => {
            out.push_str("tt");
            out.push_str(s.suffix());
        }
        NatElim(s, m, z, sc, n) => {
            let p = prec > APP;
            open(out, p);
            out.push_str("NatElim");
            out.push_str(s.suffix());
            for part in [m, z, sc, n] {
                out.push(' ');
                print_term(scope, part, ATOM, out);
            }
            close(out, p);
        }
        BoolElim(s, m, tc, fc, b) => {
            let p = prec > APP;
            open(out, p);
            out.push_str("BoolElim");
            out.push_str(s.suffix());
            for part in [m, tc, fc, b] {
                out.push(' ');
                print_term(scope, part, ATOM, out);
            }
            close(out, p);
        }
        Lift(a) => {
            out.push('^');
            print_term(scope, a, ATOM + 1, out);
        }
        Quote(inner) => {
            out.push('<');
            print_term(scope, inner, TERM, out);
            out.push('>');
        }
        Splice(inner) => {
            out.push('~');
            print_term(scope, inner, ATOM + 1, out);
        }
        Let(_, x, a, v, b) => {
            let p = prec > TERM;
            open(out, p);
            let name = binder_name(scope, x, occurs(b, 0));
            out.push_str("let ");
            out.push_str(&name);
            out.push_str(" : ");
            print_term(scope, a, TERM, out);
            out.push_str(" = ");
            print_term(scope, v, TERM, out);
            out.push_str(" in ");
            scope.push(name);
            print_term(scope, b, TERM, out);
            scope.pop();
            close(out, p);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::{name, Ix, Level, Stage, Term};
    use std::rc::Rc;

    fn rc(t: Term) -> Rc<Term> {
        Rc::new(t)
    }

    fn num(stage: Stage, n: u64) -> Term {
        let mut t = Term::Zero(stage, Level(0));
        for _ in 0..n {
            t = Term::Suc(stage, rc(t));
        }
        t
    }

    #[test]
    fn numerals_render_decimal() {
        assert_eq!(term_to_string(&[], &num(Stage::Obj, 3)), "3");
        assert_eq!(term_to_string(&[], &num(Stage::Meta, 0)), "0");
    }

    #[test]
    fn broken_chain_renders_suc_applications() {
        let t = Term::Suc(Stage::Obj, rc(Term::Var(Ix(0))));
        assert_eq!(term_to_string(&[name("n")], &t), "suc0 n");
    }

    #[test]
    fn application_groups_like_the_parser() {
        // mul n (mul n 1)
        let mul = || rc(Term::Var(Ix(1)));
        let n = || rc(Term::Var(Ix(0)));
        let app = |f: Rc<Term>, a: Rc<Term>| rc(Term::App(Stage::Obj, f, a));
        let inner = app(app(mul(), n()), rc(num(Stage::Obj, 1)));
        let t = app(app(mul(), n()), inner);
        assert_eq!(
            term_to_string(&[name("mul"), name("n")], &t),
            "mul n (mul n 1)"
        );
    }

    #[test]
    fn nested_sigma_parenthesizes_to_the_right() {
        let nat = || rc(Term::Nat(Stage::Obj, Level(0)));
        let top = rc(Term::Unit(Stage::Obj, Level(0)));
        let sig = |a: Rc<Term>, b: Rc<Term>| rc(Term::Sigma(Stage::Obj, name("_"), a, b));
        let t = sig(nat(), sig(nat(), sig(nat(), top)));
        assert_eq!(
            term_to_string(&[], &t),
            "Nat0 * (Nat0 * (Nat0 * Top0))"
        );
    }

    #[test]
    fn dependent_pi_names_the_binder() {
        // (A : U1) -> A -> A
        let t = Term::Pi(
            Stage::Meta,
            name("A"),
            rc(Term::U(Stage::Meta, Level(0))),
            rc(Term::Pi(
                Stage::Meta,
                name("_"),
                rc(Term::Var(Ix(0))),
                rc(Term::Var(Ix(1))),
            )),
        );
        assert_eq!(term_to_string(&[], &t), "(A : U1) -> A -> A");
    }

    #[test]
    fn shadowed_binders_get_primes() {
        // \x. \x. x  prints the inner binder freshly
        let nat = || rc(Term::Nat(Stage::Meta, Level(0)));
        let t = Term::Lam(
            Stage::Meta,
            name("x"),
            nat(),
            rc(Term::Lam(
                Stage::Meta,
                name("x"),
                nat(),
                rc(Term::Var(Ix(0))),
            )),
        );
        assert_eq!(term_to_string(&[], &t), "\\x x'. x'");
    }

    #[test]
    fn splice_needs_no_parens_in_application_head() {
        let t = Term::App(
            Stage::Obj,
            rc(Term::Splice(rc(Term::Var(Ix(1))))),
            rc(Term::Var(Ix(0))),
        );
        assert_eq!(term_to_string(&[name("f"), name("x")], &t), "~f x");
    }

    #[test]
    fn quote_delimits_itself() {
        let t = Term::Quote(rc(Term::App(
            Stage::Obj,
            rc(Term::Var(Ix(0))),
            rc(num(Stage::Obj, 1)),
        )));
        assert_eq!(term_to_string(&[name("f")], &t), "<f 1>");
    }

    #[test]
    fn unused_pi_binder_prints_as_arrow() {
        let t = Term::Pi(
            Stage::Obj,
            name("x"),
            rc(Term::Nat(Stage::Obj, Level(0))),
            rc(Term::Nat(Stage::Obj, Level(0))),
        );
        assert_eq!(term_to_string(&[], &t), "Nat0 -> Nat0");
    }
}
