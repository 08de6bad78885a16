//! Surface syntax as written by the user, before elaboration.
//!
//! Binder stages are implicit here; the elaborator pins them down. `Ann`
//! exists only at this layer and is erased during elaboration.

use crate::core::{Level, Stage};
use crate::span::Span;

pub type STm = Box<Term>;

#[derive(Clone, Debug)]
pub struct Term {
    pub kind: TermKind,
    pub span: Span,
}

impl Term {
    pub fn new(kind: TermKind, span: Span) -> Term {
        Term { kind, span }
    }

    pub fn boxed(kind: TermKind, span: Span) -> STm {
        Box::new(Term::new(kind, span))
    }
}

#[derive(Clone, Debug)]
pub enum TermKind {
    Var(String),
    U(Stage, Level),
    Pi(String, STm, STm),
    Lam(String, STm),
    App(STm, STm),
    Sigma(String, STm, STm),
    Pair(STm, STm),
    Fst(STm),
    Snd(STm),
    Nat(Stage, Level),
    NatLit(u64),
    Zero(Stage),
    Suc(Stage, STm),
    /// Motive, zero case, successor case, scrutinee.
    NatElim(Stage, STm, STm, STm, STm),
    Bool(Stage, Level),
    True(Stage),
    False(Stage),
    /// Motive, true case, false case, scrutinee.
    BoolElim(Stage, STm, STm, STm, STm),
    Top(Stage, Level),
    Tt(Stage),
    Lift(STm),
    Quote(STm),
    Splice(STm),
    /// Name, annotation, bound term, body.
    Let(String, STm, STm, STm),
    Ann(STm, STm),
}

/// Top-level declaration. `body` is `None` for `assume`.
#[derive(Clone, Debug)]
pub struct Decl {
    pub name: String,
    pub name_span: Span,
    pub ty: Term,
    pub body: Option<Term>,
    pub span: Span,
}
