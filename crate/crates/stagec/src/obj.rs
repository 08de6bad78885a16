//! Object language: splice-free runtime code and its standalone checker.
//!
//! `ObjTerm` is the output format of staging. It shares no constructors or
//! machinery with the elaborator: the checker here has its own value
//! domain, evaluator, and conversion test, so a bug in the main pipeline
//! cannot vouch for its own output. Binders and literals are annotated
//! (see [`crate::core::Term`]), which keeps every term inferable; staged
//! code is re-checked by plain type synthesis.
//!
//! `Code` is the stager's working form of the same syntax with de Bruijn
//! levels instead of indices, so splicing under binders needs no shifting.
//! [`emit`] converts finished `Code` to `ObjTerm`.

use crate::core::{Decl, Ix, Level, Lvl, Name, Program, Stage, Term, name};
use crate::fuel::{Fuel, OutOfFuel};
use crate::pretty;
use std::fmt;
use std::rc::Rc;

pub type ORef = Rc<ObjTerm>;

#[derive(Clone, Debug)]
pub enum ObjTerm {
    Var(Ix),
    U(Level),
    Pi(Name, ORef, ORef),
    /// Name, domain annotation, body.
    Lam(Name, ORef, ORef),
    App(ORef, ORef),
    Sigma(Name, ORef, ORef),
    /// Sigma type annotation, first component, second component.
    Pair(ORef, ORef, ORef),
    Fst(ORef),
    Snd(ORef),
    Nat(Level),
    Zero(Level),
    Suc(ORef),
    /// Motive, zero case, successor case, scrutinee.
    NatElim(ORef, ORef, ORef, ORef),
    Bool(Level),
    True(Level),
    False(Level),
    /// Motive, true case, false case, scrutinee.
    BoolElim(ORef, ORef, ORef, ORef),
    Unit(Level),
    Tt(Level),
    /// Name, annotation, bound term, body.
    Let(Name, ORef, ORef, ORef),
}

fn o(t: ObjTerm) -> ORef {
    Rc::new(t)
}

/// Structural (hence alpha-) equality; binder names are ignored.
pub fn obj_eq(a: &ObjTerm, b: &ObjTerm) -> bool {
    use ObjTerm::*;
    match (a, b) {
        (Var(i), Var(j)) => i == j,
        (U(l), U(m)) | (Nat(l), Nat(m)) | (Zero(l), Zero(m)) | (Bool(l), Bool(m))
        | (True(l), True(m)) | (False(l), False(m)) | (Unit(l), Unit(m)) | (Tt(l), Tt(m)) => {
            l == m
        }
        (Pi(_, a1, b1), Pi(_, a2, b2))
        | (Lam(_, a1, b1), Lam(_, a2, b2))
        | (Sigma(_, a1, b1), Sigma(_, a2, b2))
        | (App(a1, b1), App(a2, b2)) => obj_eq(a1, a2) && obj_eq(b1, b2),
        (Pair(y1, a1, b1), Pair(y2, a2, b2)) => {
            obj_eq(y1, y2) && obj_eq(a1, a2) && obj_eq(b1, b2)
        }
        (Fst(t1), Fst(t2)) | (Snd(t1), Snd(t2)) => obj_eq(t1, t2),
        (Suc(n1), Suc(n2)) => {
            // Peel matched chains iteratively so huge numerals cannot
            // exhaust the stack.
            let mut x = n1;
            let mut y = n2;
            loop {
                match (&**x, &**y) {
                    (Suc(i), Suc(j)) => {
                        x = i;
                        y = j;
                    }
                    (i, j) => return obj_eq(i, j),
                }
            }
        }
        (NatElim(m1, z1, s1, n1), NatElim(m2, z2, s2, n2)) => {
            obj_eq(m1, m2) && obj_eq(z1, z2) && obj_eq(s1, s2) && obj_eq(n1, n2)
        }
        (BoolElim(m1, t1, f1, b1), BoolElim(m2, t2, f2, b2)) => {
            obj_eq(m1, m2) && obj_eq(t1, t2) && obj_eq(f1, f2) && obj_eq(b1, b2)
        }
        (Let(_, a1, v1, b1), Let(_, a2, v2, b2)) => {
            obj_eq(a1, a2) && obj_eq(v1, v2) && obj_eq(b1, b2)
        }
        _ => false,
    }
}

impl PartialEq for ObjTerm {
    fn eq(&self, other: &ObjTerm) -> bool {
        obj_eq(self, other)
    }
}

impl Eq for ObjTerm {}

/// One declaration of a staged program. `body` is absent for assumptions.
/// `level` is the universe level of `ty`; the checker re-derives and
/// cross-checks it.
#[derive(Clone, Debug)]
pub struct ObjDecl {
    pub name: Name,
    pub ty: ORef,
    pub body: Option<ORef>,
    pub level: Level,
}

#[derive(Clone, Debug, Default)]
pub struct ObjProgram {
    pub decls: Vec<ObjDecl>,
}

impl ObjProgram {
    pub fn decl(&self, name: &str) -> Option<(usize, &ObjDecl)> {
        self.decls
            .iter()
            .enumerate()
            .find(|(_, d)| &*d.name == name)
    }
}

/// Stager output under construction: object syntax whose variables are de
/// Bruijn levels. A level names a binder absolutely, so code built in one
/// scope can be spliced under extra binders unchanged.
pub type CRef = Rc<Code>;

#[derive(Clone, Debug)]
pub enum Code {
    Var(Lvl),
    U(Level),
    Pi(Name, CRef, CRef),
    Lam(Name, CRef, CRef),
    App(CRef, CRef),
    Sigma(Name, CRef, CRef),
    Pair(CRef, CRef, CRef),
    Fst(CRef),
    Snd(CRef),
    Nat(Level),
    Zero(Level),
    Suc(CRef),
    NatElim(CRef, CRef, CRef, CRef),
    Bool(Level),
    True(Level),
    False(Level),
    BoolElim(CRef, CRef, CRef, CRef),
    Unit(Level),
    Tt(Level),
    Let(Name, CRef, CRef, CRef),
}

/// Converts finished code to index form. `depth` is the number of binders
/// enclosing `c`, so a level `l` occurring here names index `depth - l - 1`.
pub fn emit(depth: usize, c: &Code) -> ObjTerm {
    use ObjTerm as O;
    let go = |t: &CRef| -> ORef { o(emit(depth, t)) };
    let under = |t: &CRef| -> ORef { o(emit(depth + 1, t)) };
    match c {
        Code::Var(l) => O::Var(l.to_ix(depth)),
        Code::U(l) => O::U(*l),
        Code::Pi(x, a, b) => O::Pi(x.clone(), go(a), under(b)),
        Code::Lam(x, a, b) => O::Lam(x.clone(), go(a), under(b)),
        Code::App(f, a) => O::App(go(f), go(a)),
        Code::Sigma(x, a, b) => O::Sigma(x.clone(), go(a), under(b)),
        Code::Pair(y, a, b) => O::Pair(go(y), go(a), go(b)),
        Code::Fst(t) => O::Fst(go(t)),
        Code::Snd(t) => O::Snd(go(t)),
        Code::Nat(l) => O::Nat(*l),
        Code::Zero(l) => O::Zero(*l),
        Code::Suc(_) => {
            // Iterative so megabyte-long numerals cannot exhaust the stack.
            let mut wraps = 0usize;
            let mut cur = c;
            while let Code::Suc(inner) = cur {
                wraps += 1;
                cur = inner;
            }
            let mut out = emit(depth, cur);
            for _ in 0..wraps {
                out = O::Suc(o(out));
            }
            out
        }
        Code::NatElim(m, z, s, n) => O::NatElim(go(m), go(z), go(s), go(n)),
        Code::Bool(l) => O::Bool(*l),
        Code::True(l) => O::True(*l),
        Code::False(l) => O::False(*l),
        Code::BoolElim(m, t, f, b) => O::BoolElim(go(m), go(t), go(f), go(b)),
        Code::Unit(l) => O::Unit(*l),
        Code::Tt(l) => O::Tt(*l),
        Code::Let(x, a, v, b) => O::Let(x.clone(), go(a), go(v), under(b)),
    }
}

/// Injects object syntax into the core, tagging every former stage 0.
pub fn embed(t: &ObjTerm) -> Term {
    use ObjTerm as O;
    use Stage::Obj;
    let go = |t: &ORef| -> Rc<Term> { Rc::new(embed(t)) };
    match t {
        O::Var(i) => Term::Var(*i),
        O::U(l) => Term::U(Obj, *l),
        O::Pi(x, a, b) => Term::Pi(Obj, x.clone(), go(a), go(b)),
        O::Lam(x, a, b) => Term::Lam(Obj, x.clone(), go(a), go(b)),
        O::App(f, a) => Term::App(Obj, go(f), go(a)),
        O::Sigma(x, a, b) => Term::Sigma(Obj, x.clone(), go(a), go(b)),
        O::Pair(y, a, b) => Term::Pair(Obj, go(y), go(a), go(b)),
        O::Fst(p) => Term::Fst(Obj, go(p)),
        O::Snd(p) => Term::Snd(Obj, go(p)),
        O::Nat(l) => Term::Nat(Obj, *l),
        O::Zero(l) => Term::Zero(Obj, *l),
        O::Suc(_) => {
            let mut wraps = 0usize;
            let mut cur = t;
            while let O::Suc(inner) = cur {
                wraps += 1;
                cur = inner;
            }
            let mut out = embed(cur);
            for _ in 0..wraps {
                out = Term::Suc(Obj, Rc::new(out));
            }
            out
        }
        O::NatElim(m, z, s, n) => Term::NatElim(Obj, go(m), go(z), go(s), go(n)),
        O::Bool(l) => Term::Bool(Obj, *l),
        O::True(l) => Term::True(Obj, *l),
        O::False(l) => Term::False(Obj, *l),
        O::BoolElim(m, tc, fc, b) => Term::BoolElim(Obj, go(m), go(tc), go(fc), go(b)),
        O::Unit(l) => Term::Unit(Obj, *l),
        O::Tt(l) => Term::Tt(Obj, *l),
        O::Let(x, a, v, b) => Term::Let(Obj, x.clone(), go(a), go(v), go(b)),
    }
}

/// A core term that is not pure object code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NotObjectLevel(pub String);

impl fmt::Display for NotObjectLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "not object code: contains {}", self.0)
    }
}

impl std::error::Error for NotObjectLevel {}

/// Partial inverse of [`embed`]: succeeds exactly on terms built from
/// stage-0 formers, naming the first offending node otherwise.
pub fn strip(t: &Term) -> Result<ObjTerm, NotObjectLevel> {
    use ObjTerm as O;
    let meta = |what: &str| Err(NotObjectLevel(format!("a stage-1 {what}")));
    let go = |t: &Rc<Term>| -> Result<ORef, NotObjectLevel> { Ok(o(strip(t)?)) };
    match t {
        Term::Var(i) => Ok(O::Var(*i)),
        Term::U(Stage::Obj, l) => Ok(O::U(*l)),
        Term::U(Stage::Meta, _) => meta("universe"),
        Term::Pi(Stage::Obj, x, a, b) => Ok(O::Pi(x.clone(), go(a)?, go(b)?)),
        Term::Pi(Stage::Meta, ..) => meta("function type"),
        Term::Lam(Stage::Obj, x, a, b) => Ok(O::Lam(x.clone(), go(a)?, go(b)?)),
        Term::Lam(Stage::Meta, ..) => meta("function"),
        Term::App(Stage::Obj, f, a) => Ok(O::App(go(f)?, go(a)?)),
        Term::App(Stage::Meta, ..) => meta("application"),
        Term::Sigma(Stage::Obj, x, a, b) => Ok(O::Sigma(x.clone(), go(a)?, go(b)?)),
        Term::Sigma(Stage::Meta, ..) => meta("pair type"),
        Term::Pair(Stage::Obj, y, a, b) => Ok(O::Pair(go(y)?, go(a)?, go(b)?)),
        Term::Pair(Stage::Meta, ..) => meta("pair"),
        Term::Fst(Stage::Obj, p) => Ok(O::Fst(go(p)?)),
        Term::Snd(Stage::Obj, p) => Ok(O::Snd(go(p)?)),
        Term::Fst(Stage::Meta, _) | Term::Snd(Stage::Meta, _) => meta("projection"),
        Term::Nat(Stage::Obj, l) => Ok(O::Nat(*l)),
        Term::Zero(Stage::Obj, l) => Ok(O::Zero(*l)),
        Term::Suc(Stage::Obj, n) => Ok(O::Suc(go(n)?)),
        Term::Nat(Stage::Meta, _) | Term::Zero(Stage::Meta, _) | Term::Suc(Stage::Meta, _) => {
            meta("number")
        }
        Term::NatElim(Stage::Obj, m, z, s, n) => {
            Ok(O::NatElim(go(m)?, go(z)?, go(s)?, go(n)?))
        }
        Term::NatElim(Stage::Meta, ..) => meta("number eliminator"),
        Term::Bool(Stage::Obj, l) => Ok(O::Bool(*l)),
        Term::True(Stage::Obj, l) => Ok(O::True(*l)),
        Term::False(Stage::Obj, l) => Ok(O::False(*l)),
        Term::Bool(Stage::Meta, _) | Term::True(Stage::Meta, _) | Term::False(Stage::Meta, _) => {
            meta("boolean")
        }
        Term::BoolElim(Stage::Obj, m, tc, fc, b) => {
            Ok(O::BoolElim(go(m)?, go(tc)?, go(fc)?, go(b)?))
        }
        Term::BoolElim(Stage::Meta, ..) => meta("boolean eliminator"),
        Term::Unit(Stage::Obj, l) => Ok(O::Unit(*l)),
        Term::Tt(Stage::Obj, l) => Ok(O::Tt(*l)),
        Term::Unit(Stage::Meta, _) | Term::Tt(Stage::Meta, _) => meta("unit"),
        Term::Lift(_) => Err(NotObjectLevel("a lifted type `^`".into())),
        Term::Quote(_) => Err(NotObjectLevel("a quote `<...>`".into())),
        Term::Splice(_) => Err(NotObjectLevel("a splice `~`".into())),
        Term::Let(Stage::Obj, x, a, v, b) => Ok(O::Let(x.clone(), go(a)?, go(v)?, go(b)?)),
        Term::Let(Stage::Meta, ..) => meta("definition"),
    }
}

pub fn embed_program(p: &ObjProgram) -> Program {
    Program {
        decls: p
            .decls
            .iter()
            .map(|d| Decl {
                name: d.name.clone(),
                ty: Rc::new(embed(&d.ty)),
                body: d.body.as_ref().map(|b| Rc::new(embed(b))),
                stage: Stage::Obj,
                level: d.level,
            })
            .collect(),
    }
}

pub fn strip_program(p: &Program) -> Result<ObjProgram, NotObjectLevel> {
    let mut decls = Vec::with_capacity(p.decls.len());
    for d in &p.decls {
        if d.stage != Stage::Obj {
            return Err(NotObjectLevel(format!(
                "a stage-1 declaration `{}`",
                d.name
            )));
        }
        decls.push(ObjDecl {
            name: d.name.clone(),
            ty: o(strip(&d.ty)?),
            body: match &d.body {
                Some(b) => Some(o(strip(b)?)),
                None => None,
            },
            level: d.level,
        });
    }
    Ok(ObjProgram { decls })
}

/// Renders object syntax as surface text.
pub fn obj_to_string(names: &[Name], t: &ObjTerm) -> String {
    pretty::term_to_string(names, &embed(t))
}

pub fn obj_program_to_string(p: &ObjProgram) -> String {
    pretty::program_to_string(&embed_program(p))
}

// ---------------------------------------------------------------------------
// The checker's own semantic domain.

pub type OEnv = Vec<Rc<OVal>>;

#[derive(Clone, Debug)]
pub enum OVal {
    U(Level),
    Pi(Name, Rc<OVal>, OClos),
    /// Name, domain, body closure.
    Lam(Name, Rc<OVal>, OClos),
    Sigma(Name, Rc<OVal>, OClos),
    /// Sigma type, first, second.
    Pair(Rc<OVal>, Rc<OVal>, Rc<OVal>),
    Nat(Level),
    Zero(Level),
    Suc(Rc<OVal>),
    Bool(Level),
    True(Level),
    False(Level),
    Unit(Level),
    Tt(Level),
    Neutral(Lvl, Vec<OElim>),
}

#[derive(Clone, Debug)]
pub enum OElim {
    App(Rc<OVal>),
    Fst,
    Snd,
    NatElim {
        motive: Rc<OVal>,
        zero: Rc<OVal>,
        succ: Rc<OVal>,
    },
    BoolElim {
        motive: Rc<OVal>,
        tru: Rc<OVal>,
        fls: Rc<OVal>,
    },
}

#[derive(Clone, Debug)]
pub struct OClos {
    env: OEnv,
    pub name: Name,
    body: ORef,
}

fn fresh(depth: usize) -> Rc<OVal> {
    Rc::new(OVal::Neutral(Lvl(depth), Vec::new()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObjError {
    OutOfFuel,
    Unbound(usize),
    DuplicateName(String),
    Mismatch { expected: String, found: String },
    NotFunction { found: String },
    NotPair { found: String },
    Universe { found: String },
    Internal(String),
}

impl fmt::Display for ObjError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjError::OutOfFuel => write!(f, "evaluation step budget exhausted"),
            ObjError::Unbound(i) => write!(f, "unbound variable index {i}"),
            ObjError::DuplicateName(n) => write!(f, "duplicate declaration `{n}`"),
            ObjError::Mismatch { expected, found } => {
                write!(f, "type mismatch: expected {expected}, found {found}")
            }
            ObjError::NotFunction { found } => {
                write!(f, "cannot apply a term of type {found}")
            }
            ObjError::NotPair { found } => {
                write!(f, "cannot project from a term of type {found}")
            }
            ObjError::Universe { found } => {
                write!(f, "expected a type, found a term of type {found}")
            }
            ObjError::Internal(msg) => write!(f, "internal invariant broken: {msg}"),
        }
    }
}

impl std::error::Error for ObjError {}

impl From<OutOfFuel> for ObjError {
    fn from(_: OutOfFuel) -> ObjError {
        ObjError::OutOfFuel
    }
}

/// A checking failure located at a declaration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjCheckError {
    pub decl: Name,
    pub error: ObjError,
}

impl fmt::Display for ObjCheckError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "in declaration `{}`: {}", self.decl, self.error)
    }
}

impl std::error::Error for ObjCheckError {}

pub fn oeval(fuel: &Fuel, env: &OEnv, t: &ObjTerm) -> Result<Rc<OVal>, ObjError> {
    use ObjTerm as O;
    fuel.tick()?;
    Ok(match t {
        O::Var(Ix(i)) => env
            .len()
            .checked_sub(i + 1)
            .and_then(|k| env.get(k))
            .cloned()
            .ok_or(ObjError::Unbound(*i))?,
        O::U(l) => Rc::new(OVal::U(*l)),
        O::Pi(x, a, b) => Rc::new(OVal::Pi(
            x.clone(),
            oeval(fuel, env, a)?,
            OClos {
                env: env.clone(),
                name: x.clone(),
                body: b.clone(),
            },
        )),
        O::Lam(x, a, b) => Rc::new(OVal::Lam(
            x.clone(),
            oeval(fuel, env, a)?,
            OClos {
                env: env.clone(),
                name: x.clone(),
                body: b.clone(),
            },
        )),
        O::App(f, a) => {
            let fv = oeval(fuel, env, f)?;
            let av = oeval(fuel, env, a)?;
            oapp(fuel, &fv, av)?
        }
        O::Sigma(x, a, b) => Rc::new(OVal::Sigma(
            x.clone(),
            oeval(fuel, env, a)?,
            OClos {
                env: env.clone(),
                name: x.clone(),
                body: b.clone(),
            },
        )),
        O::Pair(y, a, b) => Rc::new(OVal::Pair(
            oeval(fuel, env, y)?,
            oeval(fuel, env, a)?,
            oeval(fuel, env, b)?,
        )),
        O::Fst(p) => ofst(oeval(fuel, env, p)?)?,
        O::Snd(p) => osnd(oeval(fuel, env, p)?)?,
        O::Nat(l) => Rc::new(OVal::Nat(*l)),
        O::Zero(l) => Rc::new(OVal::Zero(*l)),
        O::Suc(n) => Rc::new(OVal::Suc(oeval(fuel, env, n)?)),
        O::NatElim(m, z, s, n) => {
            let mv = oeval(fuel, env, m)?;
            let zv = oeval(fuel, env, z)?;
            let sv = oeval(fuel, env, s)?;
            let nv = oeval(fuel, env, n)?;
            onat_elim(fuel, &mv, &zv, &sv, nv)?
        }
        O::Bool(l) => Rc::new(OVal::Bool(*l)),
        O::True(l) => Rc::new(OVal::True(*l)),
        O::False(l) => Rc::new(OVal::False(*l)),
        O::BoolElim(m, tc, fc, b) => {
            let mv = oeval(fuel, env, m)?;
            let tv = oeval(fuel, env, tc)?;
            let fv = oeval(fuel, env, fc)?;
            let bv = oeval(fuel, env, b)?;
            obool_elim(&mv, &tv, &fv, bv)?
        }
        O::Unit(l) => Rc::new(OVal::Unit(*l)),
        O::Tt(l) => Rc::new(OVal::Tt(*l)),
        O::Let(_, _, v, b) => {
            let vv = oeval(fuel, env, v)?;
            let mut inner = env.clone();
            inner.push(vv);
            oeval(fuel, &inner, b)?
        }
    })
}

fn oclos_apply(fuel: &Fuel, clos: &OClos, v: Rc<OVal>) -> Result<Rc<OVal>, ObjError> {
    let mut env = clos.env.clone();
    env.push(v);
    oeval(fuel, &env, &clos.body)
}

pub fn oapp(fuel: &Fuel, f: &Rc<OVal>, a: Rc<OVal>) -> Result<Rc<OVal>, ObjError> {
    fuel.tick()?;
    match &**f {
        OVal::Lam(_, _, clos) => oclos_apply(fuel, clos, a),
        OVal::Neutral(l, spine) => {
            let mut spine = spine.clone();
            spine.push(OElim::App(a));
            Ok(Rc::new(OVal::Neutral(*l, spine)))
        }
        _ => Err(ObjError::Internal("application of a non-function value".into())),
    }
}

fn ofst(p: Rc<OVal>) -> Result<Rc<OVal>, ObjError> {
    match &*p {
        OVal::Pair(_, a, _) => Ok(a.clone()),
        OVal::Neutral(l, spine) => {
            let mut spine = spine.clone();
            spine.push(OElim::Fst);
            Ok(Rc::new(OVal::Neutral(*l, spine)))
        }
        _ => Err(ObjError::Internal("projection from a non-pair value".into())),
    }
}

fn osnd(p: Rc<OVal>) -> Result<Rc<OVal>, ObjError> {
    match &*p {
        OVal::Pair(_, _, b) => Ok(b.clone()),
        OVal::Neutral(l, spine) => {
            let mut spine = spine.clone();
            spine.push(OElim::Snd);
            Ok(Rc::new(OVal::Neutral(*l, spine)))
        }
        _ => Err(ObjError::Internal("projection from a non-pair value".into())),
    }
}

/// Number recursion, iteratively: the scrutinee's successor chain is peeled
/// off and folded back up, so the recursion depth is constant in the size
/// of the numeral.
fn onat_elim(
    fuel: &Fuel,
    m: &Rc<OVal>,
    z: &Rc<OVal>,
    s: &Rc<OVal>,
    scrut: Rc<OVal>,
) -> Result<Rc<OVal>, ObjError> {
    let mut wraps = 0usize;
    let mut base = scrut;
    while let OVal::Suc(inner) = &*base {
        let inner = inner.clone();
        base = inner;
        wraps += 1;
    }
    let mut num = base.clone();
    let mut acc = match &*base {
        OVal::Zero(_) => z.clone(),
        OVal::Neutral(l, spine) => {
            let mut spine = spine.clone();
            spine.push(OElim::NatElim {
                motive: m.clone(),
                zero: z.clone(),
                succ: s.clone(),
            });
            Rc::new(OVal::Neutral(*l, spine))
        }
        _ => return Err(ObjError::Internal("number recursion on a non-number".into())),
    };
    for _ in 0..wraps {
        let step = oapp(fuel, s, num.clone())?;
        acc = oapp(fuel, &step, acc)?;
        num = Rc::new(OVal::Suc(num));
    }
    Ok(acc)
}

fn obool_elim(
    m: &Rc<OVal>,
    tc: &Rc<OVal>,
    fc: &Rc<OVal>,
    scrut: Rc<OVal>,
) -> Result<Rc<OVal>, ObjError> {
    match &*scrut {
        OVal::True(_) => Ok(tc.clone()),
        OVal::False(_) => Ok(fc.clone()),
        OVal::Neutral(l, spine) => {
            let mut spine = spine.clone();
            spine.push(OElim::BoolElim {
                motive: m.clone(),
                tru: tc.clone(),
                fls: fc.clone(),
            });
            Ok(Rc::new(OVal::Neutral(*l, spine)))
        }
        _ => Err(ObjError::Internal("boolean case split on a non-boolean".into())),
    }
}

/// Definitional equality of values. Beta is handled by evaluation; eta
/// holds for functions and pairs but not for the unit type.
pub fn oconv(fuel: &Fuel, depth: usize, a: &Rc<OVal>, b: &Rc<OVal>) -> Result<bool, ObjError> {
    use OVal::*;
    fuel.tick()?;
    Ok(match (&**a, &**b) {
        (U(l), U(m)) | (Nat(l), Nat(m)) | (Zero(l), Zero(m)) | (Bool(l), Bool(m))
        | (True(l), True(m)) | (False(l), False(m)) | (Unit(l), Unit(m)) | (Tt(l), Tt(m)) => {
            l == m
        }
        (Pi(_, a1, c1), Pi(_, a2, c2)) | (Sigma(_, a1, c1), Sigma(_, a2, c2)) => {
            oconv(fuel, depth, a1, a2)? && {
                let v = fresh(depth);
                let b1 = oclos_apply(fuel, c1, v.clone())?;
                let b2 = oclos_apply(fuel, c2, v)?;
                oconv(fuel, depth + 1, &b1, &b2)?
            }
        }
        (Lam(_, _, c1), Lam(_, _, c2)) => {
            let v = fresh(depth);
            let b1 = oclos_apply(fuel, c1, v.clone())?;
            let b2 = oclos_apply(fuel, c2, v)?;
            oconv(fuel, depth + 1, &b1, &b2)?
        }
        (Lam(_, _, c), Neutral(..)) => {
            let v = fresh(depth);
            let lhs = oclos_apply(fuel, c, v.clone())?;
            let rhs = oapp(fuel, b, v)?;
            oconv(fuel, depth + 1, &lhs, &rhs)?
        }
        (Neutral(..), Lam(_, _, c)) => {
            let v = fresh(depth);
            let lhs = oapp(fuel, a, v.clone())?;
            let rhs = oclos_apply(fuel, c, v)?;
            oconv(fuel, depth + 1, &lhs, &rhs)?
        }
        (Pair(_, x, y), Pair(_, u, w)) => {
            oconv(fuel, depth, x, u)? && oconv(fuel, depth, y, w)?
        }
        (Pair(_, x, y), Neutral(..)) => {
            oconv(fuel, depth, x, &ofst(b.clone())?)? && oconv(fuel, depth, y, &osnd(b.clone())?)?
        }
        (Neutral(..), Pair(_, x, y)) => {
            oconv(fuel, depth, &ofst(a.clone())?, x)? && oconv(fuel, depth, &osnd(a.clone())?, y)?
        }
        (Suc(_), Suc(_)) => {
            let mut x = a.clone();
            let mut y = b.clone();
            loop {
                let next = match (&*x, &*y) {
                    (Suc(i), Suc(j)) => (i.clone(), j.clone()),
                    _ => return oconv(fuel, depth, &x, &y),
                };
                x = next.0;
                y = next.1;
            }
        }
        (Neutral(l1, sp1), Neutral(l2, sp2)) => {
            l1 == l2 && oconv_spine(fuel, depth, sp1, sp2)?
        }
        _ => false,
    })
}

fn oconv_spine(
    fuel: &Fuel,
    depth: usize,
    a: &[OElim],
    b: &[OElim],
) -> Result<bool, ObjError> {
    if a.len() != b.len() {
        return Ok(false);
    }
    for (x, y) in a.iter().zip(b) {
        let same = match (x, y) {
            (OElim::App(u), OElim::App(v)) => oconv(fuel, depth, u, v)?,
            (OElim::Fst, OElim::Fst) | (OElim::Snd, OElim::Snd) => true,
            (
                OElim::NatElim {
                    motive: m1,
                    zero: z1,
                    succ: s1,
                },
                OElim::NatElim {
                    motive: m2,
                    zero: z2,
                    succ: s2,
                },
            ) => {
                oconv(fuel, depth, m1, m2)?
                    && oconv(fuel, depth, z1, z2)?
                    && oconv(fuel, depth, s1, s2)?
            }
            (
                OElim::BoolElim {
                    motive: m1,
                    tru: t1,
                    fls: f1,
                },
                OElim::BoolElim {
                    motive: m2,
                    tru: t2,
                    fls: f2,
                },
            ) => {
                oconv(fuel, depth, m1, m2)?
                    && oconv(fuel, depth, t1, t2)?
                    && oconv(fuel, depth, f1, f2)?
            }
            _ => false,
        };
        if !same {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Reads a value back to syntax. Used for error display and for the types
/// synthesized for lambdas; performs no eta tidying.
pub fn oreadback(fuel: &Fuel, depth: usize, v: &Rc<OVal>) -> Result<ObjTerm, ObjError> {
    use ObjTerm as O;
    fuel.tick()?;
    Ok(match &**v {
        OVal::U(l) => O::U(*l),
        OVal::Pi(x, a, clos) => {
            let body = oclos_apply(fuel, clos, fresh(depth))?;
            O::Pi(
                x.clone(),
                o(oreadback(fuel, depth, a)?),
                o(oreadback(fuel, depth + 1, &body)?),
            )
        }
        OVal::Lam(x, a, clos) => {
            let body = oclos_apply(fuel, clos, fresh(depth))?;
            O::Lam(
                x.clone(),
                o(oreadback(fuel, depth, a)?),
                o(oreadback(fuel, depth + 1, &body)?),
            )
        }
        OVal::Sigma(x, a, clos) => {
            let body = oclos_apply(fuel, clos, fresh(depth))?;
            O::Sigma(
                x.clone(),
                o(oreadback(fuel, depth, a)?),
                o(oreadback(fuel, depth + 1, &body)?),
            )
        }
        OVal::Pair(y, a, b) => O::Pair(
            o(oreadback(fuel, depth, y)?),
            o(oreadback(fuel, depth, a)?),
            o(oreadback(fuel, depth, b)?),
        ),
        OVal::Nat(l) => O::Nat(*l),
        OVal::Zero(l) => O::Zero(*l),
        OVal::Suc(_) => {
            let mut wraps = 0usize;
            let mut cur = v.clone();
            while let OVal::Suc(inner) = &*cur {
                let inner = inner.clone();
                cur = inner;
                wraps += 1;
            }
            let mut out = oreadback(fuel, depth, &cur)?;
            for _ in 0..wraps {
                out = O::Suc(o(out));
            }
            out
        }
        OVal::Bool(l) => O::Bool(*l),
        OVal::True(l) => O::True(*l),
        OVal::False(l) => O::False(*l),
        OVal::Unit(l) => O::Unit(*l),
        OVal::Tt(l) => O::Tt(*l),
        OVal::Neutral(l, spine) => {
            if l.0 >= depth {
                return Err(ObjError::Internal(format!(
                    "neutral level {} escapes depth {}",
                    l.0, depth
                )));
            }
            let mut acc = O::Var(l.to_ix(depth));
            for e in spine {
                acc = match e {
                    OElim::App(arg) => O::App(o(acc), o(oreadback(fuel, depth, arg)?)),
                    OElim::Fst => O::Fst(o(acc)),
                    OElim::Snd => O::Snd(o(acc)),
                    OElim::NatElim { motive, zero, succ } => O::NatElim(
                        o(oreadback(fuel, depth, motive)?),
                        o(oreadback(fuel, depth, zero)?),
                        o(oreadback(fuel, depth, succ)?),
                        o(acc),
                    ),
                    OElim::BoolElim { motive, tru, fls } => O::BoolElim(
                        o(oreadback(fuel, depth, motive)?),
                        o(oreadback(fuel, depth, tru)?),
                        o(oreadback(fuel, depth, fls)?),
                        o(acc),
                    ),
                };
            }
            acc
        }
    })
}

/// Type checker session. Top-level declarations and local binders share the
/// same telescope: `names`/`tys` describe each entry and `env` holds its
/// value, a neutral for assumptions and binders, the definition's value for
/// defined names.
pub struct ObjChecker<'a> {
    fuel: &'a Fuel,
    names: Vec<Name>,
    tys: Vec<Rc<OVal>>,
    env: OEnv,
}

impl<'a> ObjChecker<'a> {
    pub fn new(fuel: &'a Fuel) -> Self {
        ObjChecker {
            fuel,
            names: Vec::new(),
            tys: Vec::new(),
            env: Vec::new(),
        }
    }

    fn depth(&self) -> usize {
        self.env.len()
    }

    fn bind(&mut self, x: Name, ty: Rc<OVal>) -> Rc<OVal> {
        let v = fresh(self.depth());
        self.names.push(x);
        self.tys.push(ty);
        self.env.push(v.clone());
        v
    }

    fn bind_def(&mut self, x: Name, ty: Rc<OVal>, v: Rc<OVal>) {
        self.names.push(x);
        self.tys.push(ty);
        self.env.push(v);
    }

    fn unbind(&mut self) {
        self.names.pop();
        self.tys.pop();
        self.env.pop();
    }

    fn eval(&self, t: &ObjTerm) -> Result<Rc<OVal>, ObjError> {
        oeval(self.fuel, &self.env, t)
    }

    fn conv(&self, a: &Rc<OVal>, b: &Rc<OVal>) -> Result<bool, ObjError> {
        oconv(self.fuel, self.depth(), a, b)
    }

    fn render(&self, v: &Rc<OVal>) -> String {
        match oreadback(self.fuel, self.depth(), v) {
            Ok(t) => obj_to_string(&self.names, &t),
            Err(_) => "<unprintable>".to_string(),
        }
    }

    /// Checks that `t` is a type and returns its value and universe level.
    pub fn is_type(&mut self, t: &ObjTerm) -> Result<(Rc<OVal>, Level), ObjError> {
        let ty = self.infer(t)?;
        match &*ty {
            OVal::U(l) => Ok((self.eval(t)?, *l)),
            _ => Err(ObjError::Universe {
                found: self.render(&ty),
            }),
        }
    }

    pub fn infer(&mut self, t: &ObjTerm) -> Result<Rc<OVal>, ObjError> {
        use ObjTerm as O;
        self.fuel.tick()?;
        match t {
            O::Var(Ix(i)) => self
                .tys
                .len()
                .checked_sub(i + 1)
                .and_then(|k| self.tys.get(k))
                .cloned()
                .ok_or(ObjError::Unbound(*i)),
            O::U(l) => Ok(Rc::new(OVal::U(l.succ()))),
            O::Pi(x, a, b) | O::Sigma(x, a, b) => {
                let (a_val, i) = self.is_type(a)?;
                self.bind(x.clone(), a_val);
                let res = self.is_type(b).map(|(_, j)| Rc::new(OVal::U(i.max(j))));
                self.unbind();
                res
            }
            O::Lam(x, a, b) => {
                let (a_val, _) = self.is_type(a)?;
                self.bind(x.clone(), a_val.clone());
                let res = (|| {
                    let b_ty = self.infer(b)?;
                    oreadback(self.fuel, self.depth(), &b_ty)
                })();
                self.unbind();
                let body = res?;
                Ok(Rc::new(OVal::Pi(
                    x.clone(),
                    a_val,
                    OClos {
                        env: self.env.clone(),
                        name: x.clone(),
                        body: o(body),
                    },
                )))
            }
            O::App(f, a) => {
                let f_ty = self.infer(f)?;
                match &*f_ty {
                    OVal::Pi(_, dom, cod) => {
                        self.check(a, dom)?;
                        let a_val = self.eval(a)?;
                        oclos_apply(self.fuel, cod, a_val)
                    }
                    _ => Err(ObjError::NotFunction {
                        found: self.render(&f_ty),
                    }),
                }
            }
            O::Pair(y, a, b) => {
                let (y_val, _) = self.is_type(y)?;
                match &*y_val {
                    OVal::Sigma(_, dom, cod) => {
                        self.check(a, dom)?;
                        let a_val = self.eval(a)?;
                        let b_ty = oclos_apply(self.fuel, cod, a_val)?;
                        self.check(b, &b_ty)?;
                        Ok(y_val.clone())
                    }
                    _ => Err(ObjError::Mismatch {
                        expected: "a pair type annotation".to_string(),
                        found: self.render(&y_val),
                    }),
                }
            }
            O::Fst(p) => {
                let p_ty = self.infer(p)?;
                match &*p_ty {
                    OVal::Sigma(_, dom, _) => Ok(dom.clone()),
                    _ => Err(ObjError::NotPair {
                        found: self.render(&p_ty),
                    }),
                }
            }
            O::Snd(p) => {
                let p_ty = self.infer(p)?;
                match &*p_ty {
                    OVal::Sigma(_, _, cod) => {
                        let p_val = self.eval(p)?;
                        oclos_apply(self.fuel, cod, ofst(p_val)?)
                    }
                    _ => Err(ObjError::NotPair {
                        found: self.render(&p_ty),
                    }),
                }
            }
            O::Nat(l) | O::Bool(l) | O::Unit(l) => Ok(Rc::new(OVal::U(*l))),
            O::Zero(l) => Ok(Rc::new(OVal::Nat(*l))),
            O::True(l) | O::False(l) => Ok(Rc::new(OVal::Bool(*l))),
            O::Tt(l) => Ok(Rc::new(OVal::Unit(*l))),
            O::Suc(n) => {
                // Peel numeral chains iteratively; staged outputs can be
                // thousands of constructors deep.
                let mut base = n;
                while let O::Suc(inner) = &**base {
                    self.fuel.tick()?;
                    base = inner;
                }
                let n_ty = self.infer(base)?;
                match &*n_ty {
                    OVal::Nat(_) => Ok(n_ty),
                    _ => Err(ObjError::Mismatch {
                        expected: "a number".to_string(),
                        found: self.render(&n_ty),
                    }),
                }
            }
            O::NatElim(m, z, s, n) => {
                let n_ty = self.infer(n)?;
                let k = match &*n_ty {
                    OVal::Nat(k) => *k,
                    _ => {
                        return Err(ObjError::Mismatch {
                            expected: "a number scrutinee".to_string(),
                            found: self.render(&n_ty),
                        })
                    }
                };
                let m_val = self.motive(m, &Rc::new(OVal::Nat(k)))?;
                let z_ty = oapp(self.fuel, &m_val, Rc::new(OVal::Zero(k)))?;
                self.check(z, &z_ty)?;
                let s_ty = oeval(self.fuel, &vec![m_val.clone()], &nat_step_type(k))?;
                self.check(s, &s_ty)?;
                let n_val = self.eval(n)?;
                oapp(self.fuel, &m_val, n_val)
            }
            O::BoolElim(m, tc, fc, b) => {
                let b_ty = self.infer(b)?;
                let k = match &*b_ty {
                    OVal::Bool(k) => *k,
                    _ => {
                        return Err(ObjError::Mismatch {
                            expected: "a boolean scrutinee".to_string(),
                            found: self.render(&b_ty),
                        })
                    }
                };
                let m_val = self.motive(m, &Rc::new(OVal::Bool(k)))?;
                let t_ty = oapp(self.fuel, &m_val, Rc::new(OVal::True(k)))?;
                self.check(tc, &t_ty)?;
                let f_ty = oapp(self.fuel, &m_val, Rc::new(OVal::False(k)))?;
                self.check(fc, &f_ty)?;
                let b_val = self.eval(b)?;
                oapp(self.fuel, &m_val, b_val)
            }
            O::Let(x, a, v, b) => {
                let (a_val, _) = self.is_type(a)?;
                self.check(v, &a_val)?;
                let v_val = self.eval(v)?;
                self.bind_def(x.clone(), a_val, v_val);
                let res = self.infer(b);
                self.unbind();
                res
            }
        }
    }

    /// Validates an eliminator motive: a function from the scrutinee type
    /// into some universe. Returns its value.
    fn motive(&mut self, m: &ObjTerm, scrut_ty: &Rc<OVal>) -> Result<Rc<OVal>, ObjError> {
        let m_ty = self.infer(m)?;
        match &*m_ty {
            OVal::Pi(_, dom, cod) => {
                if !self.conv(dom, scrut_ty)? {
                    return Err(ObjError::Mismatch {
                        expected: format!("a motive over {}", self.render(scrut_ty)),
                        found: self.render(&m_ty),
                    });
                }
                let out = oclos_apply(self.fuel, cod, fresh(self.depth()))?;
                match &*out {
                    OVal::U(_) => self.eval(m),
                    _ => Err(ObjError::Universe {
                        found: self.render(&m_ty),
                    }),
                }
            }
            _ => Err(ObjError::NotFunction {
                found: self.render(&m_ty),
            }),
        }
    }

    pub fn check(&mut self, t: &ObjTerm, expected: &Rc<OVal>) -> Result<(), ObjError> {
        use ObjTerm as O;
        self.fuel.tick()?;
        match (t, &**expected) {
            (O::Lam(x, a, b), OVal::Pi(_, dom, cod)) => {
                let (a_val, _) = self.is_type(a)?;
                if !self.conv(&a_val, dom)? {
                    return Err(ObjError::Mismatch {
                        expected: self.render(dom),
                        found: self.render(&a_val),
                    });
                }
                let v = self.bind(x.clone(), a_val);
                let res = (|| {
                    let b_ty = oclos_apply(self.fuel, cod, v)?;
                    self.check(b, &b_ty)
                })();
                self.unbind();
                res
            }
            (O::Pair(y, a, b), OVal::Sigma(_, dom, cod)) => {
                let (y_val, _) = self.is_type(y)?;
                if !self.conv(&y_val, expected)? {
                    return Err(ObjError::Mismatch {
                        expected: self.render(expected),
                        found: self.render(&y_val),
                    });
                }
                self.check(a, dom)?;
                let a_val = self.eval(a)?;
                let b_ty = oclos_apply(self.fuel, cod, a_val)?;
                self.check(b, &b_ty)
            }
            (O::Let(x, a, v, b), _) => {
                let (a_val, _) = self.is_type(a)?;
                self.check(v, &a_val)?;
                let v_val = self.eval(v)?;
                self.bind_def(x.clone(), a_val, v_val);
                let res = self.check(b, expected);
                self.unbind();
                res
            }
            _ => {
                let found = self.infer(t)?;
                if self.conv(&found, expected)? {
                    Ok(())
                } else {
                    Err(ObjError::Mismatch {
                        expected: self.render(expected),
                        found: self.render(&found),
                    })
                }
            }
        }
    }
}

/// `(n : Nat k) -> m n -> m (suc n)`, to be evaluated in the environment
/// `[m]`.
fn nat_step_type(k: Level) -> ObjTerm {
    use ObjTerm as O;
    O::Pi(
        name("n"),
        o(O::Nat(k)),
        o(O::Pi(
            name("_"),
            o(O::App(o(O::Var(Ix(1))), o(O::Var(Ix(0))))),
            o(O::App(
                o(O::Var(Ix(2))),
                o(O::Suc(o(O::Var(Ix(1))))),
            )),
        )),
    )
}

/// Checks a whole staged program against an empty signature.
pub fn check_program(fuel: &Fuel, prog: &ObjProgram) -> Result<(), ObjCheckError> {
    let mut cx = ObjChecker::new(fuel);
    for d in &prog.decls {
        let fail = |error: ObjError| ObjCheckError {
            decl: d.name.clone(),
            error,
        };
        if cx.names.iter().any(|n| n == &d.name) {
            return Err(fail(ObjError::DuplicateName(d.name.to_string())));
        }
        let (ty_val, lvl) = cx.is_type(&d.ty).map_err(fail)?;
        if lvl != d.level {
            return Err(fail(ObjError::Internal(format!(
                "declared at level {} but its type lives in U {}",
                d.level, lvl
            ))));
        }
        match &d.body {
            Some(b) => {
                cx.check(b, &ty_val).map_err(fail)?;
                let v = cx.eval(b).map_err(fail)?;
                cx.bind_def(d.name.clone(), ty_val, v);
            }
            None => {
                cx.bind(d.name.clone(), ty_val);
            }
        }
    }
    Ok(())
}

/// Checks one term against a type inside a context of assumptions given as
/// syntax. Intended for tests and generated-term harnesses.
pub fn check_term(
    fuel: &Fuel,
    ctx: &[(Name, ORef)],
    t: &ObjTerm,
    ty: &ObjTerm,
) -> Result<(), ObjError> {
    let mut cx = ObjChecker::new(fuel);
    for (x, a) in ctx {
        let (a_val, _) = cx.is_type(a)?;
        cx.bind(x.clone(), a_val);
    }
    let (ty_val, _) = cx.is_type(ty)?;
    cx.check(t, &ty_val)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn num(n: u64) -> ObjTerm {
        let mut t = ObjTerm::Zero(Level(0));
        for _ in 0..n {
            t = ObjTerm::Suc(o(t));
        }
        t
    }

    fn nat() -> ORef {
        o(ObjTerm::Nat(Level(0)))
    }

    #[test]
    fn emit_converts_levels_to_indices_under_binders() {
        use ObjTerm as O;
        // \x. \y. x  at the top level
        let code = Code::Lam(
            name("x"),
            Rc::new(Code::Nat(Level(0))),
            Rc::new(Code::Lam(
                name("y"),
                Rc::new(Code::Nat(Level(0))),
                Rc::new(Code::Var(Lvl(0))),
            )),
        );
        let want = O::Lam(
            name("x"),
            nat(),
            o(O::Lam(name("y"), nat(), o(O::Var(Ix(1))))),
        );
        assert_eq!(emit(0, &code), want);
    }

    #[test]
    fn emit_handles_deep_numerals() {
        let mut code = Code::Zero(Level(0));
        for _ in 0..5_000 {
            code = Code::Suc(Rc::new(code));
        }
        let t = emit(0, &code);
        let mut count = 0u64;
        let mut cur = &t;
        while let ObjTerm::Suc(inner) = cur {
            count += 1;
            cur = inner;
        }
        assert_eq!(count, 5_000);
    }

    #[test]
    fn strip_inverts_embed() {
        use ObjTerm as O;
        let t = O::NatElim(
            o(O::Lam(name("n"), nat(), o(O::Nat(Level(0))))),
            o(num(1)),
            o(O::Lam(
                name("p"),
                nat(),
                o(O::Lam(name("r"), nat(), o(O::Suc(o(O::Var(Ix(0))))))),
            )),
            o(O::Var(Ix(0))),
        );
        assert_eq!(strip(&embed(&t)).unwrap(), t);
    }

    #[test]
    fn strip_names_the_staged_construct() {
        let quote = Term::Quote(Rc::new(Term::Zero(Stage::Obj, Level(0))));
        assert_eq!(
            strip(&quote).unwrap_err().0,
            "a quote `<...>`".to_string()
        );
        let splice = Term::Splice(Rc::new(Term::Var(Ix(0))));
        assert_eq!(strip(&splice).unwrap_err().0, "a splice `~`".to_string());
        let lift = Term::Lift(Rc::new(Term::Nat(Stage::Obj, Level(0))));
        assert_eq!(strip(&lift).unwrap_err().0, "a lifted type `^`".to_string());
        let meta_app = Term::App(
            Stage::Meta,
            Rc::new(Term::Var(Ix(0))),
            Rc::new(Term::Var(Ix(1))),
        );
        assert_eq!(
            strip(&meta_app).unwrap_err().0,
            "a stage-1 application".to_string()
        );
    }

    fn id_program() -> ObjProgram {
        use ObjTerm as O;
        // def id : (A : U0) -> A -> A = \A x. x;
        // def two : Nat0 = id Nat0 2;
        let id_ty = O::Pi(
            name("A"),
            o(O::U(Level(0))),
            o(O::Pi(name("x"), o(O::Var(Ix(0))), o(O::Var(Ix(1))))),
        );
        let id_body = O::Lam(
            name("A"),
            o(O::U(Level(0))),
            o(O::Lam(name("x"), o(O::Var(Ix(0))), o(O::Var(Ix(0))))),
        );
        let two = O::App(
            o(O::App(o(O::Var(Ix(0))), nat())),
            o(num(2)),
        );
        ObjProgram {
            decls: vec![
                ObjDecl {
                    name: name("id"),
                    ty: o(id_ty),
                    body: Some(o(id_body)),
                    level: Level(1),
                },
                ObjDecl {
                    name: name("two"),
                    ty: nat(),
                    body: Some(o(two)),
                    level: Level(0),
                },
            ],
        }
    }

    #[test]
    fn checker_accepts_polymorphic_identity() {
        let fuel = Fuel::unlimited();
        assert!(check_program(&fuel, &id_program()).is_ok());
    }

    #[test]
    fn checker_reports_wrong_level_annotation() {
        let fuel = Fuel::unlimited();
        let mut prog = id_program();
        prog.decls[0].level = Level(0);
        let err = check_program(&fuel, &prog).unwrap_err();
        assert_eq!(&*err.decl, "id");
        assert!(matches!(err.error, ObjError::Internal(_)));
    }

    #[test]
    fn checker_rejects_boolean_as_number() {
        use ObjTerm as O;
        let fuel = Fuel::unlimited();
        let prog = ObjProgram {
            decls: vec![ObjDecl {
                name: name("bad"),
                ty: nat(),
                body: Some(o(O::True(Level(0)))),
                level: Level(0),
            }],
        };
        let err = check_program(&fuel, &prog).unwrap_err();
        match err.error {
            ObjError::Mismatch { expected, found } => {
                assert_eq!(expected, "Nat0");
                assert_eq!(found, "Bool0");
            }
            other => panic!("wrong error: {other}"),
        }
    }

    #[test]
    fn beta_redex_is_checkable() {
        use ObjTerm as O;
        // (\x. suc0 x) 1 : Nat0, no surrounding annotation.
        let fuel = Fuel::unlimited();
        let redex = O::App(
            o(O::Lam(name("x"), nat(), o(O::Suc(o(O::Var(Ix(0))))))),
            o(num(1)),
        );
        assert_eq!(check_term(&fuel, &[], &redex, &ObjTerm::Nat(Level(0))), Ok(()));
    }

    #[test]
    fn duplicate_declarations_are_rejected() {
        let fuel = Fuel::unlimited();
        let mut prog = id_program();
        let mut dup = prog.decls[1].clone();
        dup.name = name("id");
        prog.decls.push(dup);
        let err = check_program(&fuel, &prog).unwrap_err();
        assert!(matches!(err.error, ObjError::DuplicateName(_)));
    }

    #[test]
    fn number_recursion_computes() {
        use ObjTerm as O;
        // add = \a b. NatElim (\_. Nat0) b (\_ r. suc0 r) a
        let fuel = Fuel::unlimited();
        let add = O::Lam(
            name("a"),
            nat(),
            o(O::Lam(
                name("b"),
                nat(),
                o(O::NatElim(
                    o(O::Lam(name("_"), nat(), o(O::Nat(Level(0))))),
                    o(O::Var(Ix(0))),
                    o(O::Lam(
                        name("_"),
                        nat(),
                        o(O::Lam(name("r"), nat(), o(O::Suc(o(O::Var(Ix(0))))))),
                    )),
                    o(O::Var(Ix(1))),
                )),
            )),
        );
        let call = O::App(o(O::App(o(add), o(num(2)))), o(num(3)));
        let v = oeval(&fuel, &Vec::new(), &call).unwrap();
        let five = oeval(&fuel, &Vec::new(), &num(5)).unwrap();
        assert_eq!(oconv(&fuel, 0, &v, &five), Ok(true));
        assert_eq!(check_term(&fuel, &[], &call, &ObjTerm::Nat(Level(0))), Ok(()));
    }

    #[test]
    fn eta_for_functions_and_pairs_but_not_unit() {
        use ObjTerm as O;
        let fuel = Fuel::unlimited();
        // Context: one neutral f of some function type.
        let f = fresh(0);
        // \x. f x  ~  f
        let expanded = oeval(
            &fuel,
            &vec![f.clone()],
            &O::Lam(name("x"), nat(), o(O::App(o(O::Var(Ix(1))), o(O::Var(Ix(0)))))),
        )
        .unwrap();
        assert_eq!(oconv(&fuel, 1, &expanded, &f), Ok(true));

        // (fst p, snd p)  ~  p
        let p = fresh(0);
        let repaired = oeval(
            &fuel,
            &vec![p.clone()],
            &O::Pair(
                o(O::Sigma(name("_"), nat(), nat())),
                o(O::Fst(o(O::Var(Ix(0))))),
                o(O::Snd(o(O::Var(Ix(0))))),
            ),
        )
        .unwrap();
        assert_eq!(oconv(&fuel, 1, &repaired, &p), Ok(true));

        // tt is not equal to a neutral of the unit type
        let u = fresh(0);
        let tt = Rc::new(OVal::Tt(Level(0)));
        assert_eq!(oconv(&fuel, 1, &tt, &u), Ok(false));
    }

    #[test]
    fn stuck_recursion_compares_by_spine() {
        use ObjTerm as O;
        let fuel = Fuel::unlimited();
        let env: OEnv = vec![fresh(0)];
        let elim = |z: u64| {
            O::NatElim(
                o(O::Lam(name("_"), nat(), o(O::Nat(Level(0))))),
                o(num(z)),
                o(O::Lam(
                    name("_"),
                    nat(),
                    o(O::Lam(name("r"), nat(), o(O::Suc(o(O::Var(Ix(0))))))),
                )),
                o(O::Var(Ix(0))),
            )
        };
        let a = oeval(&fuel, &env, &elim(0)).unwrap();
        let b = oeval(&fuel, &env, &elim(0)).unwrap();
        let c = oeval(&fuel, &env, &elim(1)).unwrap();
        assert_eq!(oconv(&fuel, 1, &a, &b), Ok(true));
        assert_eq!(oconv(&fuel, 1, &a, &c), Ok(false));
    }

    #[test]
    fn fuel_limit_stops_evaluation() {
        use ObjTerm as O;
        let fuel = Fuel::limited(20);
        let call = O::NatElim(
            o(O::Lam(name("_"), nat(), o(O::Nat(Level(0))))),
            o(num(0)),
            o(O::Lam(
                name("_"),
                nat(),
                o(O::Lam(name("r"), nat(), o(O::Suc(o(O::Var(Ix(0))))))),
            )),
            o(num(1000)),
        );
        assert_eq!(
            oeval(&fuel, &Vec::new(), &call).unwrap_err(),
            ObjError::OutOfFuel
        );
    }

    #[test]
    fn lambda_type_synthesis_matches_annotation() {
        use ObjTerm as O;
        let fuel = Fuel::unlimited();
        let mut cx = ObjChecker::new(&fuel);
        let lam = O::Lam(name("x"), nat(), o(O::Suc(o(O::Var(Ix(0))))));
        let got = cx.infer(&lam).unwrap();
        let want = cx
            .eval(&O::Pi(name("x"), nat(), nat()))
            .unwrap();
        assert_eq!(oconv(&fuel, 0, &got, &want), Ok(true));
    }

    #[test]
    fn dependent_pair_projections_check() {
        use ObjTerm as O;
        // p : (A : U0) * A = (Nat0, 3); snd p : fst p
        let fuel = Fuel::unlimited();
        let sig = O::Sigma(name("A"), o(O::U(Level(0))), o(O::Var(Ix(0))));
        let p = O::Pair(o(sig.clone()), nat(), o(num(3)));
        let prog = ObjProgram {
            decls: vec![
                ObjDecl {
                    name: name("p"),
                    ty: o(sig),
                    body: Some(o(p)),
                    level: Level(1),
                },
                ObjDecl {
                    name: name("three"),
                    ty: o(O::Fst(o(O::Var(Ix(0))))),
                    body: Some(o(O::Snd(o(O::Var(Ix(0)))))),
                    level: Level(0),
                },
            ],
        };
        assert_eq!(check_program(&fuel, &prog), Ok(()));
    }
}
