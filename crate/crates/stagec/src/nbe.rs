//! Normalization by evaluation for the core theory.
//!
//! Terms evaluate into a value domain where bound variables of open terms
//! are de Bruijn levels (`Value::Neutral`), so environments never need
//! shifting. Conversion compares values; `readback` turns a value into
//! syntax at a given binder depth.
//!
//! Two identities hold definitionally and are normalized eagerly during
//! evaluation: splicing a quote yields the quoted value, and quoting a
//! spliced neutral yields the neutral itself. `Value::Code` never arises
//! here; it is the staging pass's payload for quoted code under
//! construction and evaluation treats meeting one as an internal fault.

use crate::core::{occurs, shift, term_eq, Ix, Level, Lvl, Name, Stage, TRef, Term};
use crate::fuel::{Fuel, OutOfFuel};
use crate::obj::CRef;
use std::fmt;
use std::rc::Rc;

pub type VRef = Rc<Value>;
pub type Env = Vec<VRef>;

#[derive(Clone, Debug)]
pub enum Value {
    U(Stage, Level),
    Pi(Stage, Name, VRef, Closure),
    /// Stage, name, domain, body.
    Lam(Stage, Name, VRef, Closure),
    Sigma(Stage, Name, VRef, Closure),
    /// Stage, sigma type, first, second.
    Pair(Stage, VRef, VRef, VRef),
    Nat(Stage, Level),
    Zero(Stage, Level),
    Suc(Stage, VRef),
    Bool(Stage, Level),
    True(Stage, Level),
    False(Stage, Level),
    Unit(Stage, Level),
    Tt(Stage, Level),
    Lift(VRef),
    /// A quoted stage-0 value.
    Quote(VRef),
    /// Object code built by the staging pass.
    Code(CRef),
    Neutral(Lvl, Vec<Elim>),
}

#[derive(Clone, Debug)]
pub enum Elim {
    App(Stage, VRef),
    Fst(Stage),
    Snd(Stage),
    /// Motive, zero case, successor case.
    NatElim(Stage, VRef, VRef, VRef),
    /// Motive, true case, false case.
    BoolElim(Stage, VRef, VRef, VRef),
    Splice,
}

#[derive(Clone, Debug)]
pub struct Closure {
    pub(crate) env: Env,
    pub name: Name,
    pub(crate) body: TRef,
}

impl Closure {
    pub fn new(env: Env, name: Name, body: TRef) -> Self {
        Closure { env, name, body }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NbeError {
    OutOfFuel,
    Internal(String),
}

impl fmt::Display for NbeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NbeError::OutOfFuel => write!(f, "evaluation step budget exhausted"),
            NbeError::Internal(msg) => write!(f, "internal invariant broken: {msg}"),
        }
    }
}

impl std::error::Error for NbeError {}

impl From<OutOfFuel> for NbeError {
    fn from(_: OutOfFuel) -> NbeError {
        NbeError::OutOfFuel
    }
}

type Result<T> = std::result::Result<T, NbeError>;

pub fn fresh(depth: usize) -> VRef {
    Rc::new(Value::Neutral(Lvl(depth), Vec::new()))
}

/// An environment of `n` opaque variables, one per context entry.
pub fn generic_env(n: usize) -> Env {
    (0..n).map(fresh).collect()
}

/// The value environment of a whole program: definitions evaluate to their
/// bodies (so they unfold), assumptions become opaque variables at their
/// telescope position.
pub fn program_env(fuel: &Fuel, prog: &crate::core::Program) -> Result<Env> {
    let mut env: Env = Vec::new();
    for d in &prog.decls {
        let v = match &d.body {
            Some(b) => eval(fuel, &env, b)?,
            None => fresh(env.len()),
        };
        env.push(v);
    }
    Ok(env)
}

pub fn eval(fuel: &Fuel, env: &Env, t: &Term) -> Result<VRef> {
    fuel.tick()?;
    Ok(match t {
        Term::Var(Ix(i)) => env
            .len()
            .checked_sub(i + 1)
            .and_then(|k| env.get(k))
            .cloned()
            .ok_or_else(|| NbeError::Internal(format!("unbound index {i}")))?,
        Term::U(s, l) => Rc::new(Value::U(*s, *l)),
        Term::Pi(s, x, a, b) => Rc::new(Value::Pi(
            *s,
            x.clone(),
            eval(fuel, env, a)?,
            Closure::new(env.clone(), x.clone(), b.clone()),
        )),
        Term::Lam(s, x, a, b) => Rc::new(Value::Lam(
            *s,
            x.clone(),
            eval(fuel, env, a)?,
            Closure::new(env.clone(), x.clone(), b.clone()),
        )),
        Term::App(s, f, a) => {
            let fv = eval(fuel, env, f)?;
            let av = eval(fuel, env, a)?;
            apply(fuel, *s, &fv, av)?
        }
        Term::Sigma(s, x, a, b) => Rc::new(Value::Sigma(
            *s,
            x.clone(),
            eval(fuel, env, a)?,
            Closure::new(env.clone(), x.clone(), b.clone()),
        )),
        Term::Pair(s, y, a, b) => Rc::new(Value::Pair(
            *s,
            eval(fuel, env, y)?,
            eval(fuel, env, a)?,
            eval(fuel, env, b)?,
        )),
        Term::Fst(s, p) => fst_val(*s, eval(fuel, env, p)?)?,
        Term::Snd(s, p) => snd_val(*s, eval(fuel, env, p)?)?,
        Term::Nat(s, l) => Rc::new(Value::Nat(*s, *l)),
        Term::Zero(s, l) => Rc::new(Value::Zero(*s, *l)),
        Term::Suc(..) => {
            // Peel numeral chains iteratively; they can be thousands deep.
            let mut wraps: Vec<Stage> = Vec::new();
            let mut cur = t;
            while let Term::Suc(s, inner) = cur {
                wraps.push(*s);
                cur = inner;
            }
            let mut v = eval(fuel, env, cur)?;
            for s in wraps.into_iter().rev() {
                fuel.tick()?;
                v = Rc::new(Value::Suc(s, v));
            }
            v
        }
        Term::NatElim(s, m, z, sc, n) => {
            let mv = eval(fuel, env, m)?;
            let zv = eval(fuel, env, z)?;
            let sv = eval(fuel, env, sc)?;
            let nv = eval(fuel, env, n)?;
            nat_elim_val(fuel, *s, &mv, &zv, &sv, nv)?
        }
        Term::Bool(s, l) => Rc::new(Value::Bool(*s, *l)),
        Term::True(s, l) => Rc::new(Value::True(*s, *l)),
        Term::False(s, l) => Rc::new(Value::False(*s, *l)),
        Term::BoolElim(s, m, tc, fc, b) => {
            let mv = eval(fuel, env, m)?;
            let tv = eval(fuel, env, tc)?;
            let fv = eval(fuel, env, fc)?;
            let bv = eval(fuel, env, b)?;
            bool_elim_val(*s, &mv, &tv, &fv, bv)?
        }
        Term::Unit(s, l) => Rc::new(Value::Unit(*s, *l)),
        Term::Tt(s, l) => Rc::new(Value::Tt(*s, *l)),
        Term::Lift(a) => Rc::new(Value::Lift(eval(fuel, env, a)?)),
        Term::Quote(t) => {
            let v = eval(fuel, env, t)?;
            // <~e> collapses to e.
            if let Value::Neutral(l, spine) = &*v {
                if let Some(Elim::Splice) = spine.last() {
                    let inner = spine[..spine.len() - 1].to_vec();
                    return Ok(Rc::new(Value::Neutral(*l, inner)));
                }
            }
            Rc::new(Value::Quote(v))
        }
        Term::Splice(t) => splice_val(eval(fuel, env, t)?)?,
        Term::Let(_, _, _, v, b) => {
            let vv = eval(fuel, env, v)?;
            let mut inner = env.clone();
            inner.push(vv);
            eval(fuel, &inner, b)?
        }
    })
}

pub fn apply_closure(fuel: &Fuel, clos: &Closure, v: VRef) -> Result<VRef> {
    let mut env = clos.env.clone();
    env.push(v);
    eval(fuel, &env, &clos.body)
}

pub fn apply(fuel: &Fuel, stage: Stage, f: &VRef, a: VRef) -> Result<VRef> {
    fuel.tick()?;
    match &**f {
        Value::Lam(_, _, _, clos) => apply_closure(fuel, clos, a),
        Value::Neutral(l, spine) => {
            let mut spine = spine.clone();
            spine.push(Elim::App(stage, a));
            Ok(Rc::new(Value::Neutral(*l, spine)))
        }
        other => Err(NbeError::Internal(format!(
            "application of a non-function value: {}",
            value_head(other)
        ))),
    }
}

pub fn fst_val(stage: Stage, p: VRef) -> Result<VRef> {
    match &*p {
        Value::Pair(_, _, a, _) => Ok(a.clone()),
        Value::Neutral(l, spine) => {
            let mut spine = spine.clone();
            spine.push(Elim::Fst(stage));
            Ok(Rc::new(Value::Neutral(*l, spine)))
        }
        other => Err(NbeError::Internal(format!(
            "projection from a non-pair value: {}",
            value_head(other)
        ))),
    }
}

pub fn snd_val(stage: Stage, p: VRef) -> Result<VRef> {
    match &*p {
        Value::Pair(_, _, _, b) => Ok(b.clone()),
        Value::Neutral(l, spine) => {
            let mut spine = spine.clone();
            spine.push(Elim::Snd(stage));
            Ok(Rc::new(Value::Neutral(*l, spine)))
        }
        other => Err(NbeError::Internal(format!(
            "projection from a non-pair value: {}",
            value_head(other)
        ))),
    }
}

/// Number recursion, iteratively: the scrutinee's successor chain is peeled
/// off and folded back up, so recursion depth stays constant in the size of
/// the numeral.
pub fn nat_elim_val(
    fuel: &Fuel,
    stage: Stage,
    m: &VRef,
    z: &VRef,
    s: &VRef,
    scrut: VRef,
) -> Result<VRef> {
    let mut wraps = 0usize;
    let mut base = scrut;
    while let Value::Suc(_, inner) = &*base {
        let inner = inner.clone();
        base = inner;
        wraps += 1;
    }
    let mut num = base.clone();
    let mut acc = match &*base {
        Value::Zero(..) => z.clone(),
        Value::Neutral(l, spine) => {
            let mut spine = spine.clone();
            spine.push(Elim::NatElim(stage, m.clone(), z.clone(), s.clone()));
            Rc::new(Value::Neutral(*l, spine))
        }
        other => {
            return Err(NbeError::Internal(format!(
                "number recursion on a non-number: {}",
                value_head(other)
            )))
        }
    };
    for _ in 0..wraps {
        let step = apply(fuel, stage, s, num.clone())?;
        acc = apply(fuel, stage, &step, acc)?;
        num = Rc::new(Value::Suc(stage, num));
    }
    Ok(acc)
}

pub fn bool_elim_val(
    stage: Stage,
    m: &VRef,
    tc: &VRef,
    fc: &VRef,
    scrut: VRef,
) -> Result<VRef> {
    match &*scrut {
        Value::True(..) => Ok(tc.clone()),
        Value::False(..) => Ok(fc.clone()),
        Value::Neutral(l, spine) => {
            let mut spine = spine.clone();
            spine.push(Elim::BoolElim(stage, m.clone(), tc.clone(), fc.clone()));
            Ok(Rc::new(Value::Neutral(*l, spine)))
        }
        other => Err(NbeError::Internal(format!(
            "boolean case split on a non-boolean: {}",
            value_head(other)
        ))),
    }
}

/// `~v`: a quote opens, a neutral goes stuck. Anything else is a stage
/// violation upstream.
pub fn splice_val(v: VRef) -> Result<VRef> {
    match &*v {
        Value::Quote(u) => Ok(u.clone()),
        Value::Neutral(l, spine) => {
            let mut spine = spine.clone();
            spine.push(Elim::Splice);
            Ok(Rc::new(Value::Neutral(*l, spine)))
        }
        other => Err(NbeError::Internal(format!(
            "splice of a non-quote value: {}",
            value_head(other)
        ))),
    }
}

fn value_head(v: &Value) -> &'static str {
    match v {
        Value::U(..) => "a universe",
        Value::Pi(..) => "a function type",
        Value::Lam(..) => "a function",
        Value::Sigma(..) => "a pair type",
        Value::Pair(..) => "a pair",
        Value::Nat(..) => "a number type",
        Value::Zero(..) | Value::Suc(..) => "a number",
        Value::Bool(..) => "a boolean type",
        Value::True(..) | Value::False(..) => "a boolean",
        Value::Unit(..) => "a unit type",
        Value::Tt(..) => "a unit value",
        Value::Lift(..) => "a lifted type",
        Value::Quote(..) => "a quote",
        Value::Code(..) => "object code",
        Value::Neutral(..) => "a neutral",
    }
}

/// Reads a value back into syntax under `depth` binders. Functions and
/// pairs that read back as exact eta expansions are contracted, so normal
/// forms print without `\x. f x` or `(fst p, snd p)` noise.
pub fn readback(fuel: &Fuel, depth: usize, v: &VRef) -> Result<Term> {
    fuel.tick()?;
    let rc = |t: Term| Rc::new(t);
    Ok(match &**v {
        Value::U(s, l) => Term::U(*s, *l),
        Value::Pi(s, x, a, clos) => {
            let body = apply_closure(fuel, clos, fresh(depth))?;
            Term::Pi(
                *s,
                x.clone(),
                rc(readback(fuel, depth, a)?),
                rc(readback(fuel, depth + 1, &body)?),
            )
        }
        Value::Lam(s, x, a, clos) => {
            let body = apply_closure(fuel, clos, fresh(depth))?;
            let body_syn = readback(fuel, depth + 1, &body)?;
            if let Term::App(s2, f, arg) = &body_syn {
                if *s2 == *s && term_eq(arg, &Term::Var(Ix(0))) && !occurs(f, 0) {
                    return Ok(shift(f, -1));
                }
            }
            Term::Lam(*s, x.clone(), rc(readback(fuel, depth, a)?), rc(body_syn))
        }
        Value::Sigma(s, x, a, clos) => {
            let body = apply_closure(fuel, clos, fresh(depth))?;
            Term::Sigma(
                *s,
                x.clone(),
                rc(readback(fuel, depth, a)?),
                rc(readback(fuel, depth + 1, &body)?),
            )
        }
        Value::Pair(s, y, a, b) => {
            let a_syn = readback(fuel, depth, a)?;
            let b_syn = readback(fuel, depth, b)?;
            if let (Term::Fst(s1, p), Term::Snd(s2, q)) = (&a_syn, &b_syn) {
                if *s1 == *s && *s2 == *s && term_eq(p, q) {
                    return Ok((**p).clone());
                }
            }
            Term::Pair(*s, rc(readback(fuel, depth, y)?), rc(a_syn), rc(b_syn))
        }
        Value::Nat(s, l) => Term::Nat(*s, *l),
        Value::Zero(s, l) => Term::Zero(*s, *l),
        Value::Suc(..) => {
            let mut wraps: Vec<Stage> = Vec::new();
            let mut cur = v.clone();
            while let Value::Suc(s, inner) = &*cur {
                wraps.push(*s);
                let inner = inner.clone();
                cur = inner;
            }
            let mut out = readback(fuel, depth, &cur)?;
            for s in wraps.into_iter().rev() {
                out = Term::Suc(s, rc(out));
            }
            out
        }
        Value::Bool(s, l) => Term::Bool(*s, *l),
        Value::True(s, l) => Term::True(*s, *l),
        Value::False(s, l) => Term::False(*s, *l),
        Value::Unit(s, l) => Term::Unit(*s, *l),
        Value::Tt(s, l) => Term::Tt(*s, *l),
        Value::Lift(a) => Term::Lift(rc(readback(fuel, depth, a)?)),
        Value::Quote(u) => Term::Quote(rc(readback(fuel, depth, u)?)),
        Value::Code(_) => {
            return Err(NbeError::Internal(
                "object code value escaped the staging pass".into(),
            ))
        }
        Value::Neutral(l, spine) => {
            if l.0 >= depth {
                return Err(NbeError::Internal(format!(
                    "neutral level {} escapes depth {}",
                    l.0, depth
                )));
            }
            let mut acc = Term::Var(l.to_ix(depth));
            for e in spine {
                acc = match e {
                    Elim::App(s, arg) => {
                        Term::App(*s, rc(acc), rc(readback(fuel, depth, arg)?))
                    }
                    Elim::Fst(s) => Term::Fst(*s, rc(acc)),
                    Elim::Snd(s) => Term::Snd(*s, rc(acc)),
                    Elim::NatElim(s, m, z, sc) => Term::NatElim(
                        *s,
                        rc(readback(fuel, depth, m)?),
                        rc(readback(fuel, depth, z)?),
                        rc(readback(fuel, depth, sc)?),
                        rc(acc),
                    ),
                    Elim::BoolElim(s, m, tc, fc) => Term::BoolElim(
                        *s,
                        rc(readback(fuel, depth, m)?),
                        rc(readback(fuel, depth, tc)?),
                        rc(readback(fuel, depth, fc)?),
                        rc(acc),
                    ),
                    Elim::Splice => Term::Splice(rc(acc)),
                };
            }
            acc
        }
    })
}

/// Normal form of `t` under `depth` binders.
pub fn nf(fuel: &Fuel, env: &Env, depth: usize, t: &Term) -> Result<Term> {
    let v = eval(fuel, env, t)?;
    readback(fuel, depth, &v)
}

/// Definitional equality. Beta rules are handled by evaluation; functions
/// and pairs are compared up to eta; the unit type has no eta rule;
/// universe levels must match exactly.
pub fn conv(fuel: &Fuel, depth: usize, a: &VRef, b: &VRef) -> Result<bool> {
    use Value::*;
    fuel.tick()?;
    Ok(match (&**a, &**b) {
        (U(s1, l1), U(s2, l2))
        | (Nat(s1, l1), Nat(s2, l2))
        | (Zero(s1, l1), Zero(s2, l2))
        | (Bool(s1, l1), Bool(s2, l2))
        | (True(s1, l1), True(s2, l2))
        | (False(s1, l1), False(s2, l2))
        | (Unit(s1, l1), Unit(s2, l2))
        | (Tt(s1, l1), Tt(s2, l2)) => s1 == s2 && l1 == l2,
        (Pi(s1, _, a1, c1), Pi(s2, _, a2, c2)) | (Sigma(s1, _, a1, c1), Sigma(s2, _, a2, c2)) => {
            s1 == s2 && conv(fuel, depth, a1, a2)? && {
                let v = fresh(depth);
                let b1 = apply_closure(fuel, c1, v.clone())?;
                let b2 = apply_closure(fuel, c2, v)?;
                conv(fuel, depth + 1, &b1, &b2)?
            }
        }
        (Lam(s1, _, _, c1), Lam(s2, _, _, c2)) => {
            s1 == s2 && {
                let v = fresh(depth);
                let b1 = apply_closure(fuel, c1, v.clone())?;
                let b2 = apply_closure(fuel, c2, v)?;
                conv(fuel, depth + 1, &b1, &b2)?
            }
        }
        (Lam(s, _, _, c), Neutral(..)) => {
            let v = fresh(depth);
            let lhs = apply_closure(fuel, c, v.clone())?;
            let rhs = apply(fuel, *s, b, v)?;
            conv(fuel, depth + 1, &lhs, &rhs)?
        }
        (Neutral(..), Lam(s, _, _, c)) => {
            let v = fresh(depth);
            let lhs = apply(fuel, *s, a, v.clone())?;
            let rhs = apply_closure(fuel, c, v)?;
            conv(fuel, depth + 1, &lhs, &rhs)?
        }
        (Pair(s1, _, x1, y1), Pair(s2, _, x2, y2)) => {
            s1 == s2 && conv(fuel, depth, x1, x2)? && conv(fuel, depth, y1, y2)?
        }
        (Pair(s, _, x, y), Neutral(..)) => {
            conv(fuel, depth, x, &fst_val(*s, b.clone())?)?
                && conv(fuel, depth, y, &snd_val(*s, b.clone())?)?
        }
        (Neutral(..), Pair(s, _, x, y)) => {
            conv(fuel, depth, &fst_val(*s, a.clone())?, x)?
                && conv(fuel, depth, &snd_val(*s, a.clone())?, y)?
        }
        (Suc(..), Suc(..)) => {
            let mut x = a.clone();
            let mut y = b.clone();
            loop {
                let next = match (&*x, &*y) {
                    (Suc(s1, i), Suc(s2, j)) => {
                        if s1 != s2 {
                            return Ok(false);
                        }
                        (i.clone(), j.clone())
                    }
                    _ => return conv(fuel, depth, &x, &y),
                };
                x = next.0;
                y = next.1;
            }
        }
        (Lift(x), Lift(y)) | (Quote(x), Quote(y)) => conv(fuel, depth, x, y)?,
        (Neutral(l1, sp1), Neutral(l2, sp2)) => {
            l1 == l2 && conv_spine(fuel, depth, sp1, sp2)?
        }
        (Code(_), _) | (_, Code(_)) => {
            return Err(NbeError::Internal(
                "object code value compared for equality".into(),
            ))
        }
        _ => false,
    })
}

fn conv_spine(fuel: &Fuel, depth: usize, a: &[Elim], b: &[Elim]) -> Result<bool> {
    if a.len() != b.len() {
        return Ok(false);
    }
    for (x, y) in a.iter().zip(b) {
        let same = match (x, y) {
            (Elim::App(s1, u), Elim::App(s2, v)) => s1 == s2 && conv(fuel, depth, u, v)?,
            (Elim::Fst(s1), Elim::Fst(s2)) | (Elim::Snd(s1), Elim::Snd(s2)) => s1 == s2,
            (Elim::NatElim(s1, m1, z1, c1), Elim::NatElim(s2, m2, z2, c2)) => {
                s1 == s2
                    && conv(fuel, depth, m1, m2)?
                    && conv(fuel, depth, z1, z2)?
                    && conv(fuel, depth, c1, c2)?
            }
            (Elim::BoolElim(s1, m1, t1, f1), Elim::BoolElim(s2, m2, t2, f2)) => {
                s1 == s2
                    && conv(fuel, depth, m1, m2)?
                    && conv(fuel, depth, t1, t2)?
                    && conv(fuel, depth, f1, f2)?
            }
            (Elim::Splice, Elim::Splice) => true,
            _ => false,
        };
        if !same {
            return Ok(false);
        }
    }
    Ok(true)
}
