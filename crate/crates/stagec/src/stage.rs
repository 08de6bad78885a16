//! The staging pass: runs every stage-1 computation and rebuilds the
//! stage-0 skeleton as object code, so the output contains no quotes,
//! splices, lifts, or stage-1 subterms at all.
//!
//! Two mutually recursive functions share one value environment:
//!
//! * [`stage0`] walks a stage-0 term and copies it node for node into
//!   [`Code`], descending under binders. A splice hands its stage-1
//!   payload to `eval1` and pastes the resulting code fragment in place.
//! * [`eval1`] evaluates a stage-1 term exactly like the core evaluator,
//!   except a quote does not recurse into evaluation: it calls `stage0` on
//!   its body at the current binder depth and wraps the result in
//!   [`Value::Code`].
//!
//! Code values use de Bruijn levels, so a fragment built under `n` binders
//! can be pasted under deeper binders unchanged; closures are applied at
//! the depth of the splice site, not where they were built. Since the
//! elaborator rejects stage-1 assumptions, evaluation here never meets a
//! stage-1 neutral: every meta computation runs to a constructor.
//!
//! A staged program keeps the stage-0 declarations (their types and bodies
//! staged) and consumes the stage-1 ones into the environment, recording a
//! [`StageSkip`] for each so callers can report what was computed away.

use crate::core::{Decl, Ix, Lvl, Name, Program, Stage, Term};
use crate::fuel::{Fuel, OutOfFuel};
use crate::nbe::{Closure, Value, VRef};
use crate::obj::{emit, Code, CRef, ObjDecl, ObjProgram};
use std::fmt;
use std::rc::Rc;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StageError {
    OutOfFuel,
    Internal(String),
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StageError::OutOfFuel => write!(f, "evaluation step budget exhausted while staging"),
            StageError::Internal(msg) => write!(f, "internal staging fault: {msg}"),
        }
    }
}

impl std::error::Error for StageError {}

impl From<OutOfFuel> for StageError {
    fn from(_: OutOfFuel) -> StageError {
        StageError::OutOfFuel
    }
}

type Result<T> = std::result::Result<T, StageError>;

/// A stage-1 declaration that was fully computed during staging and left
/// no trace in the object program.
#[derive(Debug, Clone)]
pub struct StageSkip {
    pub name: Name,
}

fn c(code: Code) -> CRef {
    Rc::new(code)
}

fn internal<T>(msg: impl Into<String>) -> Result<T> {
    Err(StageError::Internal(msg.into()))
}

/// Rebuilds the stage-0 term `t` as object code under `depth` object
/// binders. Stage-1 subterms occur only behind splices.
pub fn stage0(fuel: &Fuel, env: &[VRef], depth: usize, t: &Term) -> Result<CRef> {
    use Stage::{Meta, Obj};
    fuel.tick()?;
    Ok(match t {
        Term::Var(Ix(i)) => {
            let slot = env
                .len()
                .checked_sub(i + 1)
                .and_then(|k| env.get(k))
                .ok_or_else(|| StageError::Internal(format!("unbound index {i}")))?;
            match &**slot {
                Value::Code(code) => code.clone(),
                _ => {
                    return internal(
                        "a stage-0 variable is bound to a stage-1 value",
                    )
                }
            }
        }
        Term::U(Obj, l) => c(Code::U(*l)),
        Term::Pi(Obj, x, a, b) => {
            let a = stage0(fuel, env, depth, a)?;
            let b = under(fuel, env, depth, b)?;
            c(Code::Pi(x.clone(), a, b))
        }
        Term::Lam(Obj, x, a, b) => {
            let a = stage0(fuel, env, depth, a)?;
            let b = under(fuel, env, depth, b)?;
            c(Code::Lam(x.clone(), a, b))
        }
        Term::App(Obj, f, a) => c(Code::App(
            stage0(fuel, env, depth, f)?,
            stage0(fuel, env, depth, a)?,
        )),
        Term::Sigma(Obj, x, a, b) => {
            let a = stage0(fuel, env, depth, a)?;
            let b = under(fuel, env, depth, b)?;
            c(Code::Sigma(x.clone(), a, b))
        }
        Term::Pair(Obj, y, a, b) => c(Code::Pair(
            stage0(fuel, env, depth, y)?,
            stage0(fuel, env, depth, a)?,
            stage0(fuel, env, depth, b)?,
        )),
        Term::Fst(Obj, p) => c(Code::Fst(stage0(fuel, env, depth, p)?)),
        Term::Snd(Obj, p) => c(Code::Snd(stage0(fuel, env, depth, p)?)),
        Term::Nat(Obj, l) => c(Code::Nat(*l)),
        Term::Zero(Obj, l) => c(Code::Zero(*l)),
        Term::Suc(Obj, _) => {
            // Numeral chains are peeled iteratively; they can be thousands
            // deep in generated code.
            let mut wraps = 0usize;
            let mut cur = t;
            while let Term::Suc(Obj, inner) = cur {
                wraps += 1;
                cur = inner;
            }
            let mut out = stage0(fuel, env, depth, cur)?;
            for _ in 0..wraps {
                fuel.tick()?;
                out = c(Code::Suc(out));
            }
            out
        }
        Term::NatElim(Obj, m, z, s, n) => c(Code::NatElim(
            stage0(fuel, env, depth, m)?,
            stage0(fuel, env, depth, z)?,
            stage0(fuel, env, depth, s)?,
            stage0(fuel, env, depth, n)?,
        )),
        Term::Bool(Obj, l) => c(Code::Bool(*l)),
        Term::True(Obj, l) => c(Code::True(*l)),
        Term::False(Obj, l) => c(Code::False(*l)),
        Term::BoolElim(Obj, m, tc, fc, b) => c(Code::BoolElim(
            stage0(fuel, env, depth, m)?,
            stage0(fuel, env, depth, tc)?,
            stage0(fuel, env, depth, fc)?,
            stage0(fuel, env, depth, b)?,
        )),
        Term::Unit(Obj, l) => c(Code::Unit(*l)),
        Term::Tt(Obj, l) => c(Code::Tt(*l)),
        Term::Splice(u) => match &*eval1(fuel, env, depth, u)? {
            Value::Code(code) => code.clone(),
            _ => return internal("a splice evaluated to a non-code value"),
        },
        Term::Let(Obj, x, a, v, b) => {
            let a = stage0(fuel, env, depth, a)?;
            let v = stage0(fuel, env, depth, v)?;
            let b = under(fuel, env, depth, b)?;
            c(Code::Let(x.clone(), a, v, b))
        }
        Term::Let(Meta, _, _, v, b) => {
            // A stage-1 binding over stage-0 code: run it and carry on;
            // the binding leaves no trace in the output.
            let vv = eval1(fuel, env, depth, v)?;
            let mut inner = env.to_vec();
            inner.push(vv);
            stage0(fuel, &inner, depth, b)?
        }
        Term::Quote(_) | Term::Lift(_) => {
            return internal("a stage-1 former in object position")
        }
        _ => return internal("a stage-1 tagged node in object position"),
    })
}

/// `stage0` under one more object binder: the bound variable becomes a
/// code variable at the current depth.
fn under(fuel: &Fuel, env: &[VRef], depth: usize, body: &Term) -> Result<CRef> {
    let mut inner = env.to_vec();
    inner.push(Rc::new(Value::Code(c(Code::Var(Lvl(depth))))));
    stage0(fuel, &inner, depth + 1, body)
}

/// Evaluates the stage-1 term `t` to a value. `depth` is the number of
/// object binders in scope, needed when a quote inside `t` builds code.
pub fn eval1(fuel: &Fuel, env: &[VRef], depth: usize, t: &Term) -> Result<VRef> {
    use Stage::Meta;
    fuel.tick()?;
    Ok(match t {
        Term::Var(Ix(i)) => env
            .len()
            .checked_sub(i + 1)
            .and_then(|k| env.get(k))
            .cloned()
            .ok_or_else(|| StageError::Internal(format!("unbound index {i}")))?,
        Term::U(Meta, l) => Rc::new(Value::U(Meta, *l)),
        Term::Pi(Meta, x, a, b) => Rc::new(Value::Pi(
            Meta,
            x.clone(),
            eval1(fuel, env, depth, a)?,
            Closure::new(env.to_vec(), x.clone(), b.clone()),
        )),
        Term::Lam(Meta, x, a, b) => Rc::new(Value::Lam(
            Meta,
            x.clone(),
            eval1(fuel, env, depth, a)?,
            Closure::new(env.to_vec(), x.clone(), b.clone()),
        )),
        Term::App(Meta, f, a) => {
            let fv = eval1(fuel, env, depth, f)?;
            let av = eval1(fuel, env, depth, a)?;
            apply1(fuel, depth, &fv, av)?
        }
        Term::Sigma(Meta, x, a, b) => Rc::new(Value::Sigma(
            Meta,
            x.clone(),
            eval1(fuel, env, depth, a)?,
            Closure::new(env.to_vec(), x.clone(), b.clone()),
        )),
        Term::Pair(Meta, y, a, b) => Rc::new(Value::Pair(
            Meta,
            eval1(fuel, env, depth, y)?,
            eval1(fuel, env, depth, a)?,
            eval1(fuel, env, depth, b)?,
        )),
        Term::Fst(Meta, p) => match &*eval1(fuel, env, depth, p)? {
            Value::Pair(_, _, a, _) => a.clone(),
            _ => return internal("projection from a non-pair during staging"),
        },
        Term::Snd(Meta, p) => match &*eval1(fuel, env, depth, p)? {
            Value::Pair(_, _, _, b) => b.clone(),
            _ => return internal("projection from a non-pair during staging"),
        },
        Term::Nat(Meta, l) => Rc::new(Value::Nat(Meta, *l)),
        Term::Zero(Meta, l) => Rc::new(Value::Zero(Meta, *l)),
        Term::Suc(Meta, _) => {
            let mut wraps = 0usize;
            let mut cur = t;
            while let Term::Suc(Meta, inner) = cur {
                wraps += 1;
                cur = inner;
            }
            let mut v = eval1(fuel, env, depth, cur)?;
            for _ in 0..wraps {
                fuel.tick()?;
                v = Rc::new(Value::Suc(Meta, v));
            }
            v
        }
        Term::NatElim(Meta, _, z, s, n) => {
            let zv = eval1(fuel, env, depth, z)?;
            let sv = eval1(fuel, env, depth, s)?;
            let nv = eval1(fuel, env, depth, n)?;
            let mut wraps = 0usize;
            let mut base = nv;
            while let Value::Suc(_, inner) = &*base {
                let inner = inner.clone();
                base = inner;
                wraps += 1;
            }
            if !matches!(&*base, Value::Zero(..)) {
                return internal("number recursion stuck during staging");
            }
            let mut acc = zv;
            let mut num = base;
            for _ in 0..wraps {
                let step = apply1(fuel, depth, &sv, num.clone())?;
                acc = apply1(fuel, depth, &step, acc)?;
                num = Rc::new(Value::Suc(Meta, num));
            }
            acc
        }
        Term::Bool(Meta, l) => Rc::new(Value::Bool(Meta, *l)),
        Term::True(Meta, l) => Rc::new(Value::True(Meta, *l)),
        Term::False(Meta, l) => Rc::new(Value::False(Meta, *l)),
        Term::BoolElim(Meta, _, tc, fc, b) => match &*eval1(fuel, env, depth, b)? {
            Value::True(..) => eval1(fuel, env, depth, tc)?,
            Value::False(..) => eval1(fuel, env, depth, fc)?,
            _ => return internal("boolean case split stuck during staging"),
        },
        Term::Unit(Meta, l) => Rc::new(Value::Unit(Meta, *l)),
        Term::Tt(Meta, l) => Rc::new(Value::Tt(Meta, *l)),
        Term::Lift(a) => Rc::new(Value::Lift(Rc::new(Value::Code(stage0(
            fuel, env, depth, a,
        )?)))),
        Term::Quote(u) => Rc::new(Value::Code(stage0(fuel, env, depth, u)?)),
        Term::Let(Meta, _, _, v, b) => {
            let vv = eval1(fuel, env, depth, v)?;
            let mut inner = env.to_vec();
            inner.push(vv);
            eval1(fuel, &inner, depth, b)?
        }
        Term::Splice(_) => return internal("a splice in stage-1 position"),
        _ => return internal("a stage-0 tagged node in stage-1 position"),
    })
}

/// Applies a stage-1 function value at the current object depth, so quotes
/// in its body capture variables bound at the application site.
fn apply1(fuel: &Fuel, depth: usize, f: &VRef, a: VRef) -> Result<VRef> {
    fuel.tick()?;
    match &**f {
        Value::Lam(_, _, _, clos) => {
            let mut env = clos.env.clone();
            env.push(a);
            eval1(fuel, &env, depth, &clos.body)
        }
        _ => internal("application of a non-function during staging"),
    }
}

/// Staged form of a whole program: stage-0 declarations survive with their
/// types and bodies rebuilt as object syntax; stage-1 declarations are
/// evaluated into the environment and reported as skips.
pub fn stage_program(fuel: &Fuel, prog: &Program) -> Result<(ObjProgram, Vec<StageSkip>)> {
    let mut stager = Stager::new(fuel);
    for d in &prog.decls {
        stager.push_decl(d)?;
    }
    Ok((stager.out, stager.skips))
}

/// Stages one stage-0 term in the context of `prog`'s declarations.
pub fn stage_term(fuel: &Fuel, prog: &Program, t: &Term) -> Result<crate::obj::ObjTerm> {
    let mut stager = Stager::new(fuel);
    for d in &prog.decls {
        stager.push_decl(d)?;
    }
    let code = stage0(fuel, &stager.env, stager.obj_count, t)?;
    Ok(emit(stager.obj_count, &code))
}

struct Stager<'f> {
    fuel: &'f Fuel,
    env: Vec<VRef>,
    obj_count: usize,
    out: ObjProgram,
    skips: Vec<StageSkip>,
}

impl<'f> Stager<'f> {
    fn new(fuel: &'f Fuel) -> Stager<'f> {
        Stager {
            fuel,
            env: Vec::new(),
            obj_count: 0,
            out: ObjProgram::default(),
            skips: Vec::new(),
        }
    }

    fn push_decl(&mut self, d: &Decl) -> Result<()> {
        let label = |e: StageError| match e {
            StageError::Internal(msg) => {
                StageError::Internal(format!("in `{}`: {msg}", d.name))
            }
            other => other,
        };
        match d.stage {
            Stage::Obj => {
                let ty_code = stage0(self.fuel, &self.env, self.obj_count, &d.ty)
                    .map_err(label)?;
                let ty = emit(self.obj_count, &ty_code);
                let body = match &d.body {
                    Some(b) => {
                        let code = stage0(self.fuel, &self.env, self.obj_count, b)
                            .map_err(label)?;
                        Some(emit(self.obj_count, &code))
                    }
                    None => None,
                };
                self.out.decls.push(ObjDecl {
                    name: d.name.clone(),
                    ty: Rc::new(ty),
                    body: body.map(Rc::new),
                    level: d.level,
                });
                self.env.push(Rc::new(Value::Code(c(Code::Var(Lvl(
                    self.obj_count,
                ))))));
                self.obj_count += 1;
                Ok(())
            }
            Stage::Meta => {
                let body = match &d.body {
                    Some(b) => b,
                    None => {
                        return internal(format!(
                            "stage-1 assumption `{}` reached the staging pass",
                            d.name
                        ))
                    }
                };
                let v = eval1(self.fuel, &self.env, self.obj_count, body).map_err(label)?;
                self.env.push(v);
                self.skips.push(StageSkip {
                    name: d.name.clone(),
                });
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::Level;
    use crate::elab;
    use crate::obj::{check_program, obj_program_to_string, obj_to_string, ObjTerm};

    fn staged(src: &str) -> (ObjProgram, Vec<StageSkip>) {
        let fuel = Fuel::unlimited();
        let prog = elab::elab_source(&fuel, src).unwrap();
        stage_program(&fuel, &prog).unwrap()
    }

    fn staged_decl(src: &str, name: &str) -> String {
        let (out, _) = staged(src);
        let (idx, d) = out.decl(name).unwrap();
        let names: Vec<Name> = out.decls[..idx].iter().map(|d| d.name.clone()).collect();
        obj_to_string(&names, d.body.as_ref().unwrap())
    }

    #[test]
    fn splice_pastes_computed_code() {
        let body = staged_decl(
            "def twice : ^Nat0 -> ^Nat0 = \\c. <suc0 (suc0 ~c)>;\n\
             def x : Nat0 = ~(twice <zero0>);",
            "x",
        );
        assert_eq!(body, "2");
    }

    #[test]
    fn meta_declarations_are_consumed() {
        let (out, skips) = staged(
            "def one : Nat1 = 1;\n\
             def n : Nat0 = zero0;",
        );
        assert_eq!(out.decls.len(), 1);
        assert_eq!(&*out.decls[0].name, "n");
        assert_eq!(skips.len(), 1);
        assert_eq!(&*skips[0].name, "one");
    }

    #[test]
    fn object_variables_survive_by_position() {
        // The object program has its own numbering: `m` is object decl 0,
        // `x` is object decl 1, even though a meta decl sits between them.
        let (out, _) = staged(
            "assume m : Nat0;\n\
             def inc : ^Nat0 -> ^Nat0 = \\c. <suc0 ~c>;\n\
             def x : Nat0 = ~(inc <m>);",
        );
        assert_eq!(out.decls.len(), 2);
        let x = out.decls[1].body.as_ref().unwrap();
        match &**x {
            ObjTerm::Suc(inner) => assert!(matches!(&**inner, ObjTerm::Var(Ix(0)))),
            other => panic!("staged body: {other:?}"),
        }
    }

    #[test]
    fn kripke_application_respects_binding_depth() {
        // The meta function is built outside the object binder but applied
        // under it: the code it receives mentions the bound variable.
        let body = staged_decl(
            "def apply : (^Nat0 -> ^Nat0) -> ^Nat0 -> ^Nat0 = \\f c. f c;\n\
             def wrap : Nat0 -> Nat0 = \\y. ~(apply (\\c. <suc0 ~c>) <y>);",
            "wrap",
        );
        assert_eq!(body, "\\y. suc0 y");
    }

    #[test]
    fn meta_recursion_unrolls_into_code() {
        let body = staged_decl(
            "def iter : Nat1 -> (^Nat0 -> ^Nat0) -> ^Nat0 -> ^Nat0 =\n\
             \\n f a. NatElim1 (\\_. ^Nat0) a (\\_ r. f r) n;\n\
             def four : Nat0 = ~(iter 4 (\\c. <suc0 ~c>) <zero0>);",
            "four",
        );
        assert_eq!(body, "4");
    }

    #[test]
    fn meta_lets_vanish_and_object_lets_stay() {
        let body = staged_decl(
            "def x : Nat0 = let k : Nat1 = 2 in\n\
             let y : Nat0 = zero0 in suc0 y;",
            "x",
        );
        assert_eq!(body, "let y : Nat0 = 0 in suc0 y");
    }

    #[test]
    fn spliced_types_are_staged() {
        let (out, _) = staged(
            "def pick : Bool1 -> ^U0 = \\b. BoolElim1 (\\_. ^U0) <Nat0> <Bool0> b;\n\
             def x : ~(pick true1) = zero0;",
        );
        let (_, d) = out.decl("x").unwrap();
        assert!(matches!(&*d.ty, ObjTerm::Nat(Level(0))));
    }

    #[test]
    fn staged_output_passes_the_object_checker() {
        let fuel = Fuel::unlimited();
        let (out, _) = staged(
            "assume m : Nat0;\n\
             def dup : ^Nat0 -> ^(Nat0 * Nat0) = \\c. <(~c, ~c)>;\n\
             def p : Nat0 * Nat0 = ~(dup <suc0 m>);",
        );
        check_program(&fuel, &out).unwrap();
        assert_eq!(
            obj_program_to_string(&out).lines().last().unwrap(),
            "def p : Nat0 * Nat0 = (suc0 m, suc0 m);"
        );
    }

    #[test]
    fn quoting_under_object_binders_uses_levels() {
        // A quote built under two object binders must refer to each one
        // correctly after pasting.
        let body = staged_decl(
            "def pair : Nat0 -> Nat0 -> Nat0 * Nat0 = \\a b. ~(<(b, a)>);",
            "pair",
        );
        assert_eq!(body, "\\a b. (b, a)");
    }

    #[test]
    fn fuel_exhaustion_stops_staging() {
        let fuel = Fuel::unlimited();
        let prog = elab::elab_source(
            &fuel,
            "def iter : Nat1 -> (^Nat0 -> ^Nat0) -> ^Nat0 -> ^Nat0 =\n\
             \\n f a. NatElim1 (\\_. ^Nat0) a (\\_ r. f r) n;\n\
             def big : Nat0 = ~(iter 200 (\\c. <suc0 ~c>) <zero0>);",
        )
        .unwrap();
        let tight = Fuel::limited(50);
        assert_eq!(
            stage_program(&tight, &prog).unwrap_err(),
            StageError::OutOfFuel
        );
    }

    #[test]
    fn deep_meta_numerals_stage_without_deep_recursion() {
        let fuel = Fuel::unlimited();
        let prog = elab::elab_source(
            &fuel,
            "def expand : Nat1 -> ^Nat0 =\n\
             \\n. NatElim1 (\\_. ^Nat0) <zero0> (\\_ r. <suc0 ~r>) n;\n\
             def big : Nat0 = ~(expand 2000);",
        )
        .unwrap();
        let (out, _) = stage_program(&fuel, &prog).unwrap();
        let body = out.decls[0].body.as_ref().unwrap();
        let mut n = 0u64;
        let mut cur = &**body;
        while let ObjTerm::Suc(inner) = cur {
            n += 1;
            cur = inner;
        }
        assert_eq!(n, 2000);
        assert!(matches!(cur, ObjTerm::Zero(Level(0))));
    }
}
