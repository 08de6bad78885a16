//! Bidirectional elaboration from surface syntax into the core theory.
//!
//! Elaboration resolves names to de Bruijn indices, pins down the stage and
//! level of every construct, and fills in the annotations the core syntax
//! carries: lambda domains, pair types, and literal levels all come from
//! the type being checked against. Number literals and stage-suffixed
//! constructors adopt the expected type's level; in inference position a
//! bare literal defaults to a stage-0 number at level 0.
//!
//! Top-level declarations form one growing telescope shared with local
//! binders, so a core variable is an index into that telescope counted
//! from the innermost end. Definitions are transparent: their bodies are
//! evaluated once and unfold during conversion. Assumptions must have
//! stage-0 types, since a stage-1 unknown could never be computed away by
//! the staging pass.

use crate::core::{self, name, Ix, Level, Name, Stage, TRef, Term};
use crate::fuel::Fuel;
use crate::nbe::{self, apply_closure, Elim, Env, NbeError, VRef, Value};
use crate::pretty;
use crate::span::Span;
use crate::surface;
use std::fmt;
use std::rc::Rc;

#[derive(Debug)]
pub struct TypeError {
    pub span: Span,
    pub kind: ErrorKind,
}

#[derive(Debug)]
pub enum ErrorKind {
    Unbound(String),
    Duplicate(String),
    Mismatch { expected: String, found: String },
    NotFunction { found: String },
    NotPair { found: String },
    NotLifted { found: String },
    NotType { found: String },
    Motive { found: String },
    NotInferable { what: &'static str },
    MixedStages { first: Stage, second: Stage },
    QuoteStage { found: String },
    LiftStage { found: String },
    LetStage { found: String },
    AssumeStage { name: String },
    OutOfFuel,
    Internal(String),
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ErrorKind::*;
        match self {
            Unbound(x) => write!(f, "unbound name `{x}`"),
            Duplicate(x) => write!(f, "duplicate top-level name `{x}`"),
            Mismatch { expected, found } => {
                write!(f, "type mismatch: expected `{expected}`, found `{found}`")
            }
            NotFunction { found } => write!(f, "cannot apply a term of type `{found}`"),
            NotPair { found } => write!(f, "cannot project from a term of type `{found}`"),
            NotLifted { found } => write!(f, "cannot splice a term of type `{found}`"),
            NotType { found } => write!(f, "expected a type, found a term of type `{found}`"),
            Motive { found } => write!(
                f,
                "a motive must map the scrutinee's type into a universe, found `{found}`"
            ),
            NotInferable { what } => {
                write!(f, "cannot infer a type for {what}; add an annotation")
            }
            MixedStages { first, second } => write!(
                f,
                "a type former cannot mix stages: {first} next to {second}"
            ),
            QuoteStage { found } => write!(
                f,
                "only stage-0 terms can be quoted; this one has type `{found}`"
            ),
            LiftStage { found } => {
                write!(f, "only stage-0 types can be lifted; `{found}` is not")
            }
            LetStage { found } => write!(
                f,
                "a stage-0 `let` needs a stage-0 body; the body has type `{found}`"
            ),
            AssumeStage { name } => write!(
                f,
                "assumption `{name}` must have a stage-0 type; a stage-1 unknown cannot be staged away"
            ),
            OutOfFuel => write!(f, "evaluation step budget exhausted during type checking"),
            Internal(msg) => write!(f, "internal error: {msg}"),
        }
    }
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.kind.fmt(f)
    }
}

impl std::error::Error for TypeError {}

pub type Result<T> = std::result::Result<T, TypeError>;

struct Entry {
    name: Name,
    ty: VRef,
}

/// Elaboration context: a telescope of entries (top-level declarations at
/// the bottom, local binders on top) and the matching value environment.
pub struct Ctx<'f> {
    fuel: &'f Fuel,
    entries: Vec<Entry>,
    env: Env,
}

fn rc(t: Term) -> TRef {
    Rc::new(t)
}

impl<'f> Ctx<'f> {
    pub fn new(fuel: &'f Fuel) -> Ctx<'f> {
        Ctx {
            fuel,
            entries: Vec::new(),
            env: Vec::new(),
        }
    }

    fn depth(&self) -> usize {
        self.entries.len()
    }

    fn bind(&mut self, n: Name, ty: VRef) {
        self.env.push(nbe::fresh(self.depth()));
        self.entries.push(Entry { name: n, ty });
    }

    fn bind_def(&mut self, n: Name, ty: VRef, val: VRef) {
        self.env.push(val);
        self.entries.push(Entry { name: n, ty });
    }

    fn unbind(&mut self) {
        self.entries.pop();
        self.env.pop();
    }

    /// Innermost-first name resolution. `_` never resolves.
    fn lookup(&self, x: &str) -> Option<(Ix, &Entry)> {
        if x == "_" {
            return None;
        }
        self.entries
            .iter()
            .rev()
            .enumerate()
            .find(|(_, e)| &*e.name == x)
            .map(|(i, e)| (Ix(i), e))
    }

    fn err<T>(&self, span: Span, kind: ErrorKind) -> Result<T> {
        Err(TypeError { span, kind })
    }

    fn lift_nbe(&self, span: Span, e: NbeError) -> TypeError {
        let kind = match e {
            NbeError::OutOfFuel => ErrorKind::OutOfFuel,
            NbeError::Internal(msg) => ErrorKind::Internal(msg),
        };
        TypeError { span, kind }
    }

    fn eval(&self, span: Span, t: &Term) -> Result<VRef> {
        nbe::eval(self.fuel, &self.env, t).map_err(|e| self.lift_nbe(span, e))
    }

    fn readback(&self, span: Span, v: &VRef) -> Result<Term> {
        nbe::readback(self.fuel, self.depth(), v).map_err(|e| self.lift_nbe(span, e))
    }

    fn conv(&self, span: Span, a: &VRef, b: &VRef) -> Result<bool> {
        nbe::conv(self.fuel, self.depth(), a, b).map_err(|e| self.lift_nbe(span, e))
    }

    fn apply(&self, span: Span, stage: Stage, f: &VRef, a: VRef) -> Result<VRef> {
        nbe::apply(self.fuel, stage, f, a).map_err(|e| self.lift_nbe(span, e))
    }

    fn render(&self, v: &VRef) -> String {
        match nbe::readback(self.fuel, self.depth(), v) {
            Ok(t) => {
                let names: Vec<Name> = self.entries.iter().map(|e| e.name.clone()).collect();
                pretty::term_to_string(&names, &t)
            }
            Err(_) => "<unprintable>".to_string(),
        }
    }

    /// The stage a type value lives at. For neutral types this walks the
    /// spine to find the universe of the head's type.
    fn type_stage(&self, span: Span, v: &VRef) -> Result<Stage> {
        match &**v {
            Value::U(s, _)
            | Value::Pi(s, ..)
            | Value::Sigma(s, ..)
            | Value::Nat(s, _)
            | Value::Bool(s, _)
            | Value::Unit(s, _) => Ok(*s),
            Value::Lift(_) => Ok(Stage::Meta),
            Value::Neutral(l, spine) => {
                let ty = self.neutral_type(span, l.0, spine)?;
                match &*ty {
                    Value::U(s, _) => Ok(*s),
                    _ => self.err(
                        span,
                        ErrorKind::Internal("a neutral type's type is not a universe".into()),
                    ),
                }
            }
            _ => self.err(
                span,
                ErrorKind::Internal("stage requested for a non-type value".into()),
            ),
        }
    }

    /// Type of the neutral `lvl` applied to `spine`, rebuilt step by step
    /// from the head entry's type.
    fn neutral_type(&self, span: Span, lvl: usize, spine: &[Elim]) -> Result<VRef> {
        let entry = self.entries.get(lvl).ok_or_else(|| TypeError {
            span,
            kind: ErrorKind::Internal(format!("neutral level {lvl} out of range")),
        })?;
        let mut ty = entry.ty.clone();
        for (i, e) in spine.iter().enumerate() {
            // Value of the prefix consumed so far, for dependent types.
            let prefix = Rc::new(Value::Neutral(core::Lvl(lvl), spine[..i].to_vec()));
            ty = match e {
                Elim::App(_, arg) => match &*ty {
                    Value::Pi(_, _, _, clos) => apply_closure(self.fuel, clos, arg.clone())
                        .map_err(|er| self.lift_nbe(span, er))?,
                    _ => {
                        return self.err(
                            span,
                            ErrorKind::Internal("spine applies a non-function".into()),
                        )
                    }
                },
                Elim::Fst(_) => match &*ty {
                    Value::Sigma(_, _, a, _) => a.clone(),
                    _ => {
                        return self.err(
                            span,
                            ErrorKind::Internal("spine projects a non-pair".into()),
                        )
                    }
                },
                Elim::Snd(s) => match &*ty {
                    Value::Sigma(_, _, _, clos) => {
                        let first = nbe::fst_val(*s, prefix)
                            .map_err(|er| self.lift_nbe(span, er))?;
                        apply_closure(self.fuel, clos, first)
                            .map_err(|er| self.lift_nbe(span, er))?
                    }
                    _ => {
                        return self.err(
                            span,
                            ErrorKind::Internal("spine projects a non-pair".into()),
                        )
                    }
                },
                Elim::NatElim(s, m, _, _) | Elim::BoolElim(s, m, _, _) => {
                    self.apply(span, *s, m, prefix)?
                }
                Elim::Splice => match &*ty {
                    Value::Lift(a) => a.clone(),
                    _ => {
                        return self.err(
                            span,
                            ErrorKind::Internal("spine splices an unlifted value".into()),
                        )
                    }
                },
            };
        }
        Ok(ty)
    }

    /// Elaborates a term that must be a type; returns its core form plus
    /// the stage and level of the universe it lives in.
    fn infer_universe(&mut self, t: &surface::Term) -> Result<(Term, Stage, Level)> {
        let (core, ty) = self.infer(t)?;
        match &*ty {
            Value::U(s, l) => Ok((core, *s, *l)),
            _ => {
                let found = self.render(&ty);
                self.err(t.span, ErrorKind::NotType { found })
            }
        }
    }

    fn numeral(stage: Stage, level: Level, n: u64) -> Term {
        let mut out = Term::Zero(stage, level);
        for _ in 0..n {
            out = Term::Suc(stage, rc(out));
        }
        out
    }

    /// Step-case type of a number recursion at `stage`/`level`, as a core
    /// term with the motive at index 2 from within the innermost body:
    /// `(n : Nat) -> m n -> m (suc n)`, to be evaluated in `[m]`.
    fn nat_step_type(stage: Stage, level: Level) -> Term {
        Term::Pi(
            stage,
            name("n"),
            rc(Term::Nat(stage, level)),
            rc(Term::Pi(
                stage,
                name("_"),
                rc(Term::App(stage, rc(Term::Var(Ix(1))), rc(Term::Var(Ix(0))))),
                rc(Term::App(
                    stage,
                    rc(Term::Var(Ix(2))),
                    rc(Term::Suc(stage, rc(Term::Var(Ix(1))))),
                )),
            )),
        )
    }

    /// Elaborates a motive for recursion over `scrut_ty` (a number or
    /// boolean type value at `stage`). A surface lambda is opened directly
    /// so its result level never needs to be guessed; anything else must
    /// infer to a function from the scrutinee type into a universe.
    fn motive(&mut self, stage: Stage, scrut_ty: &VRef, m: &surface::Term) -> Result<Term> {
        if let surface::TermKind::Lam(x, body) = &m.kind {
            self.bind(name(x), scrut_ty.clone());
            let out = (|| {
                let (body_core, body_ty) = self.infer(body)?;
                match &*body_ty {
                    Value::U(s, _) if *s == stage => {
                        let dom = self.readback(m.span, scrut_ty)?;
                        Ok(Term::Lam(stage, name(x), rc(dom), rc(body_core)))
                    }
                    _ => {
                        let found = self.render(&body_ty);
                        self.err(body.span, ErrorKind::NotType { found })
                    }
                }
            })();
            self.unbind();
            return out;
        }
        let (m_core, m_ty) = self.infer(m)?;
        if let Value::Pi(s, _, dom, clos) = &*m_ty {
            if *s == stage && self.conv(m.span, dom, scrut_ty)? {
                let cod = apply_closure(self.fuel, clos, nbe::fresh(self.depth()))
                    .map_err(|e| self.lift_nbe(m.span, e))?;
                if matches!(&*cod, Value::U(s2, _) if *s2 == stage) {
                    return Ok(m_core);
                }
            }
        }
        let found = self.render(&m_ty);
        self.err(m.span, ErrorKind::Motive { found })
    }

    pub fn infer(&mut self, t: &surface::Term) -> Result<(Term, VRef)> {
        use surface::TermKind as S;
        let span = t.span;
        match &t.kind {
            S::Var(x) => match self.lookup(x) {
                Some((ix, e)) => Ok((Term::Var(ix), e.ty.clone())),
                None => self.err(span, ErrorKind::Unbound(x.clone())),
            },
            S::U(s, l) => Ok((
                Term::U(*s, *l),
                Rc::new(Value::U(*s, l.succ())),
            )),
            S::Pi(x, a, b) | S::Sigma(x, a, b) => {
                let (a_core, s1, l1) = self.infer_universe(a)?;
                let av = self.eval(a.span, &a_core)?;
                self.bind(name(x), av);
                let out = (|| {
                    let (b_core, s2, l2) = self.infer_universe(b)?;
                    if s1 != s2 {
                        return self.err(
                            span,
                            ErrorKind::MixedStages {
                                first: s1,
                                second: s2,
                            },
                        );
                    }
                    let former = match &t.kind {
                        S::Pi(..) => Term::Pi(s1, name(x), rc(a_core), rc(b_core)),
                        _ => Term::Sigma(s1, name(x), rc(a_core), rc(b_core)),
                    };
                    Ok((former, Rc::new(Value::U(s1, l1.max(l2)))))
                })();
                self.unbind();
                out
            }
            S::Lam(..) => self.err(
                span,
                ErrorKind::NotInferable {
                    what: "a function without a type to check it against",
                },
            ),
            S::App(f, a) => {
                let (f_core, f_ty) = self.infer(f)?;
                match &*f_ty {
                    Value::Pi(s, _, dom, clos) => {
                        let a_core = self.check(a, dom)?;
                        let av = self.eval(a.span, &a_core)?;
                        let out_ty = apply_closure(self.fuel, clos, av)
                            .map_err(|e| self.lift_nbe(span, e))?;
                        Ok((Term::App(*s, rc(f_core), rc(a_core)), out_ty))
                    }
                    _ => {
                        let found = self.render(&f_ty);
                        self.err(f.span, ErrorKind::NotFunction { found })
                    }
                }
            }
            S::Pair(..) => self.err(
                span,
                ErrorKind::NotInferable {
                    what: "a pair without a type to check it against",
                },
            ),
            S::Fst(p) => {
                let (p_core, p_ty) = self.infer(p)?;
                match &*p_ty {
                    Value::Sigma(s, _, a, _) => Ok((Term::Fst(*s, rc(p_core)), a.clone())),
                    _ => {
                        let found = self.render(&p_ty);
                        self.err(p.span, ErrorKind::NotPair { found })
                    }
                }
            }
            S::Snd(p) => {
                let (p_core, p_ty) = self.infer(p)?;
                match &*p_ty {
                    Value::Sigma(s, _, _, clos) => {
                        let pv = self.eval(p.span, &p_core)?;
                        let first =
                            nbe::fst_val(*s, pv).map_err(|e| self.lift_nbe(span, e))?;
                        let out_ty = apply_closure(self.fuel, clos, first)
                            .map_err(|e| self.lift_nbe(span, e))?;
                        Ok((Term::Snd(*s, rc(p_core)), out_ty))
                    }
                    _ => {
                        let found = self.render(&p_ty);
                        self.err(p.span, ErrorKind::NotPair { found })
                    }
                }
            }
            S::Nat(s, l) => Ok((Term::Nat(*s, *l), Rc::new(Value::U(*s, *l)))),
            S::Bool(s, l) => Ok((Term::Bool(*s, *l), Rc::new(Value::U(*s, *l)))),
            S::Top(s, l) => Ok((Term::Unit(*s, *l), Rc::new(Value::U(*s, *l)))),
            S::NatLit(n) => Ok((
                Self::numeral(Stage::Obj, Level(0), *n),
                Rc::new(Value::Nat(Stage::Obj, Level(0))),
            )),
            S::Zero(s) => Ok((
                Term::Zero(*s, Level(0)),
                Rc::new(Value::Nat(*s, Level(0))),
            )),
            S::Suc(s, n) => {
                let (n_core, n_ty) = self.infer(n)?;
                match &*n_ty {
                    Value::Nat(s2, _) if s2 == s => {
                        Ok((Term::Suc(*s, rc(n_core)), n_ty.clone()))
                    }
                    _ => {
                        let found = self.render(&n_ty);
                        self.err(
                            n.span,
                            ErrorKind::Mismatch {
                                expected: format!("Nat{}", s.suffix()),
                                found,
                            },
                        )
                    }
                }
            }
            S::True(s) => Ok((
                Term::True(*s, Level(0)),
                Rc::new(Value::Bool(*s, Level(0))),
            )),
            S::False(s) => Ok((
                Term::False(*s, Level(0)),
                Rc::new(Value::Bool(*s, Level(0))),
            )),
            S::Tt(s) => Ok((
                Term::Tt(*s, Level(0)),
                Rc::new(Value::Unit(*s, Level(0))),
            )),
            S::NatElim(s, m, z, sc, n) => {
                // A bare numeral scrutinee adopts the eliminator's stage,
                // the same way any checked position would.
                let (n_core, n_ty) = if matches!(n.kind, S::NatLit(_)) {
                    let want: VRef = Rc::new(Value::Nat(*s, Level(0)));
                    (self.check(n, &want)?, want)
                } else {
                    self.infer(n)?
                };
                let level = match &*n_ty {
                    Value::Nat(s2, l) if s2 == s => *l,
                    _ => {
                        let found = self.render(&n_ty);
                        return self.err(
                            n.span,
                            ErrorKind::Mismatch {
                                expected: format!("Nat{}", s.suffix()),
                                found,
                            },
                        );
                    }
                };
                let scrut_ty: VRef = Rc::new(Value::Nat(*s, level));
                let m_core = self.motive(*s, &scrut_ty, m)?;
                let mv = self.eval(m.span, &m_core)?;
                let z_want =
                    self.apply(z.span, *s, &mv, Rc::new(Value::Zero(*s, level)))?;
                let z_core = self.check(z, &z_want)?;
                let step_ty = Self::nat_step_type(*s, level);
                let s_want = nbe::eval(self.fuel, &vec![mv.clone()], &step_ty)
                    .map_err(|e| self.lift_nbe(sc.span, e))?;
                let sc_core = self.check(sc, &s_want)?;
                let nv = self.eval(n.span, &n_core)?;
                let out_ty = self.apply(span, *s, &mv, nv)?;
                Ok((
                    Term::NatElim(*s, rc(m_core), rc(z_core), rc(sc_core), rc(n_core)),
                    out_ty,
                ))
            }
            S::BoolElim(s, m, tc, fc, b) => {
                let (b_core, b_ty) = self.infer(b)?;
                let level = match &*b_ty {
                    Value::Bool(s2, l) if s2 == s => *l,
                    _ => {
                        let found = self.render(&b_ty);
                        return self.err(
                            b.span,
                            ErrorKind::Mismatch {
                                expected: format!("Bool{}", s.suffix()),
                                found,
                            },
                        );
                    }
                };
                let scrut_ty: VRef = Rc::new(Value::Bool(*s, level));
                let m_core = self.motive(*s, &scrut_ty, m)?;
                let mv = self.eval(m.span, &m_core)?;
                let t_want =
                    self.apply(tc.span, *s, &mv, Rc::new(Value::True(*s, level)))?;
                let t_core = self.check(tc, &t_want)?;
                let f_want =
                    self.apply(fc.span, *s, &mv, Rc::new(Value::False(*s, level)))?;
                let f_core = self.check(fc, &f_want)?;
                let bv = self.eval(b.span, &b_core)?;
                let out_ty = self.apply(span, *s, &mv, bv)?;
                Ok((
                    Term::BoolElim(*s, rc(m_core), rc(t_core), rc(f_core), rc(b_core)),
                    out_ty,
                ))
            }
            S::Lift(a) => {
                let (a_core, s, l) = self.infer_universe(a)?;
                if s != Stage::Obj {
                    let found = pretty::term_to_string(
                        &self
                            .entries
                            .iter()
                            .map(|e| e.name.clone())
                            .collect::<Vec<_>>(),
                        &a_core,
                    );
                    return self.err(a.span, ErrorKind::LiftStage { found });
                }
                Ok((
                    Term::Lift(rc(a_core)),
                    Rc::new(Value::U(Stage::Meta, l)),
                ))
            }
            S::Quote(u) => {
                let (u_core, u_ty) = self.infer(u)?;
                if self.type_stage(u.span, &u_ty)? != Stage::Obj {
                    let found = self.render(&u_ty);
                    return self.err(u.span, ErrorKind::QuoteStage { found });
                }
                Ok((
                    Term::Quote(rc(u_core)),
                    Rc::new(Value::Lift(u_ty)),
                ))
            }
            S::Splice(u) => {
                let (u_core, u_ty) = self.infer(u)?;
                match &*u_ty {
                    Value::Lift(a) => Ok((Term::Splice(rc(u_core)), a.clone())),
                    _ => {
                        let found = self.render(&u_ty);
                        self.err(u.span, ErrorKind::NotLifted { found })
                    }
                }
            }
            S::Let(x, a, v, b) => {
                let (a_core, s_bind, _) = self.infer_universe(a)?;
                let av = self.eval(a.span, &a_core)?;
                let v_core = self.check(v, &av)?;
                let vv = self.eval(v.span, &v_core)?;
                self.bind_def(name(x), av, vv);
                let out = (|| {
                    let (b_core, b_ty) = self.infer(b)?;
                    if s_bind == Stage::Obj
                        && self.type_stage(b.span, &b_ty)? != Stage::Obj
                    {
                        let found = self.render(&b_ty);
                        return self.err(b.span, ErrorKind::LetStage { found });
                    }
                    Ok((
                        Term::Let(s_bind, name(x), rc(a_core), rc(v_core), rc(b_core)),
                        b_ty,
                    ))
                })();
                self.unbind();
                out
            }
            S::Ann(u, a) => {
                let (a_core, _, _) = self.infer_universe(a)?;
                let av = self.eval(a.span, &a_core)?;
                let u_core = self.check(u, &av)?;
                Ok((u_core, av))
            }
        }
    }

    pub fn check(&mut self, t: &surface::Term, want: &VRef) -> Result<Term> {
        use surface::TermKind as S;
        let span = t.span;
        match (&t.kind, &**want) {
            (S::Lam(x, body), Value::Pi(s, _, dom, clos)) => {
                let dom_core = self.readback(span, dom)?;
                self.bind(name(x), dom.clone());
                let out = (|| {
                    let body_want = apply_closure(self.fuel, clos, nbe::fresh(self.depth() - 1))
                        .map_err(|e| self.lift_nbe(span, e))?;
                    let body_core = self.check(body, &body_want)?;
                    Ok(Term::Lam(*s, name(x), rc(dom_core), rc(body_core)))
                })();
                self.unbind();
                out
            }
            (S::Lam(..), _) => {
                let found = "a function";
                let expected = self.render(want);
                self.err(
                    span,
                    ErrorKind::Mismatch {
                        expected,
                        found: found.to_string(),
                    },
                )
            }
            (S::Pair(a, b), Value::Sigma(s, _, dom, clos)) => {
                let ann = self.readback(span, want)?;
                let a_core = self.check(a, dom)?;
                let av = self.eval(a.span, &a_core)?;
                let b_want = apply_closure(self.fuel, clos, av)
                    .map_err(|e| self.lift_nbe(span, e))?;
                let b_core = self.check(b, &b_want)?;
                Ok(Term::Pair(*s, rc(ann), rc(a_core), rc(b_core)))
            }
            (S::Pair(..), _) => {
                let expected = self.render(want);
                self.err(
                    span,
                    ErrorKind::Mismatch {
                        expected,
                        found: "a pair".to_string(),
                    },
                )
            }
            (S::NatLit(n), Value::Nat(s, l)) => Ok(Self::numeral(*s, *l, *n)),
            (S::Zero(s), Value::Nat(s2, l)) if s == s2 => Ok(Term::Zero(*s, *l)),
            (S::Suc(s, n), Value::Nat(s2, _)) if s == s2 => {
                let n_core = self.check(n, want)?;
                Ok(Term::Suc(*s, rc(n_core)))
            }
            (S::True(s), Value::Bool(s2, l)) if s == s2 => Ok(Term::True(*s, *l)),
            (S::False(s), Value::Bool(s2, l)) if s == s2 => Ok(Term::False(*s, *l)),
            (S::Tt(s), Value::Unit(s2, l)) if s == s2 => Ok(Term::Tt(*s, *l)),
            (S::Quote(u), Value::Lift(a)) => {
                let u_core = self.check(u, a)?;
                Ok(Term::Quote(rc(u_core)))
            }
            (S::Splice(u), _) => {
                // `~u : A` exactly when `u : ^A`, provided A is an object
                // type; otherwise inference gives the better mismatch.
                if self.type_stage(span, want)? == Stage::Obj {
                    let lifted: VRef = Rc::new(Value::Lift(want.clone()));
                    let u_core = self.check(u, &lifted)?;
                    Ok(Term::Splice(rc(u_core)))
                } else {
                    self.check_by_inference(t, want)
                }
            }
            (S::Let(x, a, v, b), _) => {
                let (a_core, s_bind, _) = self.infer_universe(a)?;
                let av = self.eval(a.span, &a_core)?;
                let v_core = self.check(v, &av)?;
                let vv = self.eval(v.span, &v_core)?;
                self.bind_def(name(x), av, vv);
                let out = (|| {
                    if s_bind == Stage::Obj && self.type_stage(b.span, want)? != Stage::Obj {
                        let found = self.render(want);
                        return self.err(b.span, ErrorKind::LetStage { found });
                    }
                    let b_core = self.check(b, want)?;
                    Ok(Term::Let(s_bind, name(x), rc(a_core), rc(v_core), rc(b_core)))
                })();
                self.unbind();
                out
            }
            _ => self.check_by_inference(t, want),
        }
    }

    fn check_by_inference(&mut self, t: &surface::Term, want: &VRef) -> Result<Term> {
        let (core, got) = self.infer(t)?;
        if self.conv(t.span, &got, want)? {
            Ok(core)
        } else {
            let expected = self.render(want);
            let found = self.render(&got);
            self.err(t.span, ErrorKind::Mismatch { expected, found })
        }
    }
}

/// Elaborates a whole program into a core telescope.
pub fn elab_program(fuel: &Fuel, decls: &[surface::Decl]) -> Result<core::Program> {
    let mut ctx = Ctx::new(fuel);
    let mut out = core::Program::default();
    for d in decls {
        if out.decl(&d.name).is_some() {
            return Err(TypeError {
                span: d.name_span,
                kind: ErrorKind::Duplicate(d.name.clone()),
            });
        }
        let (ty_core, stage, level) = ctx.infer_universe(&d.ty)?;
        let tyv = ctx.eval(d.ty.span, &ty_core)?;
        let body_core = match &d.body {
            Some(b) => Some(ctx.check(b, &tyv)?),
            None => {
                if stage != Stage::Obj {
                    return Err(TypeError {
                        span: d.name_span,
                        kind: ErrorKind::AssumeStage {
                            name: d.name.clone(),
                        },
                    });
                }
                None
            }
        };
        match &body_core {
            Some(b) => {
                let bv = ctx.eval(d.span, b)?;
                ctx.bind_def(name(&d.name), tyv, bv);
            }
            None => ctx.bind(name(&d.name), tyv),
        }
        out.decls.push(core::Decl {
            name: name(&d.name),
            ty: rc(ty_core),
            body: body_core.map(rc),
            stage,
            level,
        });
    }
    Ok(out)
}

/// Convenience for tests and the CLI: parse and elaborate `src`.
pub fn elab_source(fuel: &Fuel, src: &str) -> std::result::Result<core::Program, String> {
    let toks = crate::lex::tokenize(src).map_err(|e| e.to_string())?;
    let decls = crate::parse::parse_program(toks, src.len()).map_err(|e| e.to_string())?;
    elab_program(fuel, &decls).map_err(|e| e.to_string())
}
