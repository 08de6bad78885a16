//! Core syntax of the two-stage theory.
//!
//! Terms are de-Bruijn-indexed and every former carries its stage, so any
//! later pass can dispatch on stage in O(1) without re-deriving types.
//! Universes are Russell-style: a term of `U s l` is itself a type.

use std::fmt;
use std::rc::Rc;

/// Stage of a former. `Obj` is runtime code that survives staging; `Meta`
/// is compile-time code that the stager computes away.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Stage {
    Obj,
    Meta,
}

impl Stage {
    /// Suffix used by the surface keywords: `Nat0`, `zero1`, ...
    pub fn suffix(self) -> &'static str {
        match self {
            Stage::Obj => "0",
            Stage::Meta => "1",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Obj => "stage 0",
            Stage::Meta => "stage 1",
        })
    }
}

/// Universe level. There is no cumulativity: `U s l` and `U s (l+1)` are
/// unrelated types.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Level(pub u32);

impl Level {
    pub fn succ(self) -> Level {
        Level(self.0 + 1)
    }

    pub fn max(self, other: Level) -> Level {
        Level(self.0.max(other.0))
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// de Bruijn index, counted from the innermost binder outwards.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Ix(pub usize);

/// de Bruijn level, counted from the context root inwards. Values use
/// levels so that environment weakening is free.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Lvl(pub usize);

impl Lvl {
    /// Converts a level to an index under `depth` binders.
    pub fn to_ix(self, depth: usize) -> Ix {
        debug_assert!(self.0 < depth, "level {} out of range at depth {}", self.0, depth);
        Ix(depth - self.0 - 1)
    }
}

/// Binder hint. Names never influence equality; they only steer printing.
pub type Name = Rc<str>;

pub fn name(s: &str) -> Name {
    Rc::from(s)
}

pub type TRef = Rc<Term>;

/// Elaborated syntax. Binders and literals carry enough annotation that
/// every term's type can be re-inferred without bidirectional hints: `Lam`
/// records its domain, `Pair` the sigma type it inhabits, and the
/// level-polymorphic literals their universe level. The annotations are
/// what lets staged output be re-checked standalone even when compile-time
/// evaluation has moved code out of the context that typed it.
#[derive(Clone, Debug)]
pub enum Term {
    Var(Ix),
    U(Stage, Level),
    Pi(Stage, Name, TRef, TRef),
    /// Name, domain annotation, body.
    Lam(Stage, Name, TRef, TRef),
    App(Stage, TRef, TRef),
    Sigma(Stage, Name, TRef, TRef),
    /// Sigma type annotation, first component, second component.
    Pair(Stage, TRef, TRef, TRef),
    Fst(Stage, TRef),
    Snd(Stage, TRef),
    Nat(Stage, Level),
    Zero(Stage, Level),
    Suc(Stage, TRef),
    /// Motive, zero case, successor case, scrutinee.
    NatElim(Stage, TRef, TRef, TRef, TRef),
    Bool(Stage, Level),
    True(Stage, Level),
    False(Stage, Level),
    /// Motive, true case, false case, scrutinee.
    BoolElim(Stage, TRef, TRef, TRef, TRef),
    Unit(Stage, Level),
    Tt(Stage, Level),
    /// `^A`: a stage-0 type used at stage 1.
    Lift(TRef),
    /// `<t>`: stage-0 code as a stage-1 value.
    Quote(TRef),
    /// `~t`: runs stage-1 code to produce stage-0 code.
    Splice(TRef),
    /// Name, annotation, bound term, body. The stage tag is the binding's.
    Let(Stage, Name, TRef, TRef, TRef),
}

/// Structural (hence alpha-) equality; binder names are ignored.
pub fn term_eq(a: &Term, b: &Term) -> bool {
    use Term::*;
    match (a, b) {
        (Var(i), Var(j)) => i == j,
        (U(s, l), U(t, m)) => s == t && l == m,
        (Pi(s, _, a1, b1), Pi(t, _, a2, b2)) => s == t && term_eq(a1, a2) && term_eq(b1, b2),
        (Lam(s, _, a1, b1), Lam(t, _, a2, b2)) => s == t && term_eq(a1, a2) && term_eq(b1, b2),
        (App(s, f1, a1), App(t, f2, a2)) => s == t && term_eq(f1, f2) && term_eq(a1, a2),
        (Sigma(s, _, a1, b1), Sigma(t, _, a2, b2)) => s == t && term_eq(a1, a2) && term_eq(b1, b2),
        (Pair(s, y1, a1, b1), Pair(t, y2, a2, b2)) => {
            s == t && term_eq(y1, y2) && term_eq(a1, a2) && term_eq(b1, b2)
        }
        (Fst(s, t1), Fst(t, t2)) | (Snd(s, t1), Snd(t, t2)) => s == t && term_eq(t1, t2),
        (Nat(s, l), Nat(t, m)) | (Bool(s, l), Bool(t, m)) | (Unit(s, l), Unit(t, m)) => {
            s == t && l == m
        }
        (Zero(s, l), Zero(t, m))
        | (True(s, l), True(t, m))
        | (False(s, l), False(t, m))
        | (Tt(s, l), Tt(t, m)) => s == t && l == m,
        (Suc(..), Suc(..)) => {
            // Peel numeral chains iteratively; they can be thousands deep.
            let (mut x, mut y) = (a, b);
            loop {
                match (x, y) {
                    (Suc(s, t1), Suc(t, t2)) => {
                        if s != t {
                            return false;
                        }
                        x = t1;
                        y = t2;
                    }
                    _ => return term_eq(x, y),
                }
            }
        }
        (NatElim(s, m1, z1, s1, n1), NatElim(t, m2, z2, s2, n2)) => {
            s == t && term_eq(m1, m2) && term_eq(z1, z2) && term_eq(s1, s2) && term_eq(n1, n2)
        }
        (BoolElim(s, m1, t1, f1, b1), BoolElim(t, m2, t2, f2, b2)) => {
            s == t && term_eq(m1, m2) && term_eq(t1, t2) && term_eq(f1, f2) && term_eq(b1, b2)
        }
        (Lift(t1), Lift(t2)) | (Quote(t1), Quote(t2)) | (Splice(t1), Splice(t2)) => {
            term_eq(t1, t2)
        }
        (Let(s, _, a1, v1, b1), Let(t, _, a2, v2, b2)) => {
            s == t && term_eq(a1, a2) && term_eq(v1, v2) && term_eq(b1, b2)
        }
        _ => false,
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Term) -> bool {
        term_eq(self, other)
    }
}

impl Eq for Term {}

/// Shifts free variables at or above `cutoff` by `by`. Evaluation never
/// shifts; this exists for the printer's eta checks and test oracles.
pub fn shift_from(t: &Term, cutoff: usize, by: isize) -> Term {
    use Term::*;
    let go = |t: &TRef| -> TRef { Rc::new(shift_from(t, cutoff, by)) };
    let under = |t: &TRef| -> TRef { Rc::new(shift_from(t, cutoff + 1, by)) };
    match t {
        Var(Ix(i)) => {
            if *i >= cutoff {
                let j = *i as isize + by;
                assert!(j >= 0, "shift underflow: index {i} by {by}");
                Var(Ix(j as usize))
            } else {
                Var(Ix(*i))
            }
        }
        U(s, l) => U(*s, *l),
        Pi(s, x, a, b) => Pi(*s, x.clone(), go(a), under(b)),
        Lam(s, x, a, b) => Lam(*s, x.clone(), go(a), under(b)),
        App(s, f, a) => App(*s, go(f), go(a)),
        Sigma(s, x, a, b) => Sigma(*s, x.clone(), go(a), under(b)),
        Pair(s, y, a, b) => Pair(*s, go(y), go(a), go(b)),
        Fst(s, t) => Fst(*s, go(t)),
        Snd(s, t) => Snd(*s, go(t)),
        Nat(s, l) => Nat(*s, *l),
        Zero(s, l) => Zero(*s, *l),
        Suc(s, t) => Suc(*s, go(t)),
        NatElim(s, m, z, sc, n) => NatElim(*s, go(m), go(z), go(sc), go(n)),
        Bool(s, l) => Bool(*s, *l),
        True(s, l) => True(*s, *l),
        False(s, l) => False(*s, *l),
        BoolElim(s, m, tc, fc, b) => BoolElim(*s, go(m), go(tc), go(fc), go(b)),
        Unit(s, l) => Unit(*s, *l),
        Tt(s, l) => Tt(*s, *l),
        Lift(t) => Lift(go(t)),
        Quote(t) => Quote(go(t)),
        Splice(t) => Splice(go(t)),
        Let(s, x, a, v, b) => Let(*s, x.clone(), go(a), go(v), under(b)),
    }
}

pub fn shift(t: &Term, by: isize) -> Term {
    shift_from(t, 0, by)
}

/// Does the free variable `ix` (relative to the term's root) occur?
pub fn occurs(t: &Term, ix: usize) -> bool {
    use Term::*;
    match t {
        Var(Ix(i)) => *i == ix,
        U(..) | Nat(..) | Zero(..) | Bool(..) | True(..) | False(..) | Unit(..) | Tt(..) => false,
        Pi(_, _, a, b) | Sigma(_, _, a, b) | Lam(_, _, a, b) => {
            occurs(a, ix) || occurs(b, ix + 1)
        }
        App(_, f, a) => occurs(f, ix) || occurs(a, ix),
        Pair(_, y, a, b) => occurs(y, ix) || occurs(a, ix) || occurs(b, ix),
        Fst(_, t) | Snd(_, t) | Suc(_, t) | Lift(t) | Quote(t) | Splice(t) => occurs(t, ix),
        NatElim(_, m, z, s, n) => {
            occurs(m, ix) || occurs(z, ix) || occurs(s, ix) || occurs(n, ix)
        }
        BoolElim(_, m, t1, f1, b) => {
            occurs(m, ix) || occurs(t1, ix) || occurs(f1, ix) || occurs(b, ix)
        }
        Let(_, _, a, v, b) => occurs(a, ix) || occurs(v, ix) || occurs(b, ix + 1),
    }
}

/// Checks that the cached stage tags are coherent: children of a former sit
/// at the former's stage, except through `Lift`/`Quote` (body at stage 0,
/// node at stage 1) and `Splice` (body at stage 1, node at stage 0).
/// `binders` holds the stage of each in-scope variable, outermost first.
pub fn check_stages(binders: &mut Vec<Stage>, t: &Term, expected: Stage) -> Result<(), String> {
    use Term::*;
    let stage_of = |s: Stage| -> Result<(), String> {
        if s == expected {
            Ok(())
        } else {
            Err(format!("former tagged {s} where {expected} is required"))
        }
    };
    match t {
        Var(Ix(i)) => {
            let n = binders.len();
            let s = *binders
                .get(n.checked_sub(i + 1).ok_or_else(|| format!("unbound index {i}"))?)
                .ok_or_else(|| format!("unbound index {i}"))?;
            if s == expected {
                Ok(())
            } else {
                Err(format!("variable of {s} used at {expected}"))
            }
        }
        U(s, _) | Nat(s, _) | Bool(s, _) | Unit(s, _) | Zero(s, _) | True(s, _) | False(s, _)
        | Tt(s, _) => stage_of(*s),
        Suc(s, t) => {
            stage_of(*s)?;
            check_stages(binders, t, *s)
        }
        Pi(s, _, a, b) | Sigma(s, _, a, b) | Lam(s, _, a, b) => {
            stage_of(*s)?;
            check_stages(binders, a, *s)?;
            binders.push(*s);
            let r = check_stages(binders, b, *s);
            binders.pop();
            r
        }
        App(s, f, a) => {
            stage_of(*s)?;
            check_stages(binders, f, *s)?;
            check_stages(binders, a, *s)
        }
        Pair(s, y, a, b) => {
            stage_of(*s)?;
            check_stages(binders, y, *s)?;
            check_stages(binders, a, *s)?;
            check_stages(binders, b, *s)
        }
        Fst(s, t) | Snd(s, t) => {
            stage_of(*s)?;
            check_stages(binders, t, *s)
        }
        NatElim(s, m, z, sc, n) => {
            stage_of(*s)?;
            for part in [m, z, sc, n] {
                check_stages(binders, part, *s)?;
            }
            Ok(())
        }
        BoolElim(s, m, tc, fc, b) => {
            stage_of(*s)?;
            for part in [m, tc, fc, b] {
                check_stages(binders, part, *s)?;
            }
            Ok(())
        }
        Lift(a) => {
            stage_of(Stage::Meta)?;
            check_stages(binders, a, Stage::Obj)
        }
        Quote(t) => {
            stage_of(Stage::Meta)?;
            check_stages(binders, t, Stage::Obj)
        }
        Splice(t) => {
            stage_of(Stage::Obj)?;
            check_stages(binders, t, Stage::Meta)
        }
        Let(s, _, a, v, b) => {
            check_stages(binders, a, *s)?;
            check_stages(binders, v, *s)?;
            binders.push(*s);
            // The body may sit at either stage when the binding is meta;
            // an object binding forces an object body.
            let r = if *s == Stage::Obj {
                stage_of(Stage::Obj).and_then(|()| check_stages(binders, b, Stage::Obj))
            } else {
                check_stages(binders, b, expected)
            };
            binders.pop();
            r
        }
    }
}

/// One top-level declaration. `body` is absent for assumptions, which are
/// opaque stage-0 context entries.
#[derive(Clone, Debug)]
pub struct Decl {
    pub name: Name,
    pub ty: TRef,
    pub body: Option<TRef>,
    pub stage: Stage,
    pub level: Level,
}

#[derive(Clone, Debug, Default)]
pub struct Program {
    pub decls: Vec<Decl>,
}

impl Program {
    pub fn decl(&self, name: &str) -> Option<(usize, &Decl)> {
        self.decls
            .iter()
            .enumerate()
            .find(|(_, d)| &*d.name == name)
    }
}

pub fn program_eq(a: &Program, b: &Program) -> bool {
    a.decls.len() == b.decls.len()
        && a.decls.iter().zip(&b.decls).all(|(x, y)| {
            x.name == y.name
                && x.stage == y.stage
                && x.level == y.level
                && term_eq(&x.ty, &y.ty)
                && match (&x.body, &y.body) {
                    (Some(t), Some(u)) => term_eq(t, u),
                    (None, None) => true,
                    _ => false,
                }
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::rc::Rc;

    fn lam(n: &str, b: Term) -> Term {
        let dom = Rc::new(Term::Nat(Stage::Meta, Level(0)));
        Term::Lam(Stage::Meta, name(n), dom, Rc::new(b))
    }

    #[test]
    fn term_eq_ignores_binder_names() {
        let a = lam("x", Term::Var(Ix(0)));
        let b = lam("y", Term::Var(Ix(0)));
        assert!(term_eq(&a, &b));
    }

    #[test]
    fn term_eq_distinguishes_stages() {
        assert!(!term_eq(
            &Term::Zero(Stage::Obj, Level(0)),
            &Term::Zero(Stage::Meta, Level(0))
        ));
        assert!(!term_eq(
            &Term::U(Stage::Obj, Level(0)),
            &Term::U(Stage::Obj, Level(1))
        ));
    }

    #[test]
    fn shift_respects_cutoff() {
        // \. 0 1  --shift 2-->  \. 0 3
        let t = lam("x", Term::App(
            Stage::Meta,
            Rc::new(Term::Var(Ix(0))),
            Rc::new(Term::Var(Ix(1))),
        ));
        let shifted = shift(&t, 2);
        let expect = lam("x", Term::App(
            Stage::Meta,
            Rc::new(Term::Var(Ix(0))),
            Rc::new(Term::Var(Ix(3))),
        ));
        assert!(term_eq(&shifted, &expect));
    }

    #[test]
    fn occurs_sees_through_binders() {
        let t = lam("x", Term::Var(Ix(1)));
        assert!(occurs(&t, 0));
        assert!(!occurs(&t, 1));
    }

    #[test]
    fn stage_scan_accepts_quote_of_object_code() {
        // <zero0> at stage 1
        let t = Term::Quote(Rc::new(Term::Zero(Stage::Obj, Level(0))));
        assert!(check_stages(&mut Vec::new(), &t, Stage::Meta).is_ok());
    }

    #[test]
    fn stage_scan_rejects_meta_code_inside_quote() {
        let t = Term::Quote(Rc::new(Term::Zero(Stage::Meta, Level(0))));
        assert!(check_stages(&mut Vec::new(), &t, Stage::Meta).is_err());
    }
}
