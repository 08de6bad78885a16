//! Recursive-descent parser.
//!
//! Precedence, loosest to tightest:
//!
//! ```text
//!   \x. t   let x : A = t in u          (extend to the right)
//!   A -> B                              (right-associative)
//!   A * B                               (right-associative)
//!   f a b                               (left-associative application)
//!   ~t  ^t  suc0 t  fst t  <t>  (t)  x  (atoms and prefix forms)
//! ```
//!
//! Splice and lift bind tighter than application, so `~f x` applies the
//! spliced function: `(~f) x`.

use crate::core::Level;
use crate::lex::{Token, TokenKind};
use crate::span::Span;
use crate::surface::{Decl, STm, Term, TermKind};
use std::fmt;

#[derive(Clone, Debug)]
pub struct ParseError {
    pub span: Span,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.msg)
    }
}

type Result<T> = std::result::Result<T, ParseError>;

pub struct Parser {
    toks: Vec<Token>,
    pos: usize,
    /// Source length, for end-of-input spans.
    eof: usize,
}

/// Parses a whole file worth of declarations.
pub fn parse_program(toks: Vec<Token>, eof: usize) -> Result<Vec<Decl>> {
    let mut p = Parser { toks, pos: 0, eof };
    let mut decls = Vec::new();
    while p.peek().is_some() {
        decls.push(p.decl()?);
    }
    Ok(decls)
}

/// Parses a single term covering the entire token stream.
pub fn parse_term(toks: Vec<Token>, eof: usize) -> Result<Term> {
    let mut p = Parser { toks, pos: 0, eof };
    let t = p.term()?;
    if let Some(tok) = p.peek() {
        return Err(ParseError {
            span: tok.span,
            msg: format!("unexpected `{}` after expression", tok.lexeme),
        });
    }
    Ok(t)
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn peek_kind(&self) -> Option<TokenKind> {
        self.peek().map(|t| t.kind)
    }

    fn next(&mut self) -> Option<&Token> {
        let t = self.toks.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eof_span(&self) -> Span {
        Span::point(self.eof)
    }

    fn here(&self) -> Span {
        self.peek().map(|t| t.span).unwrap_or_else(|| self.eof_span())
    }

    fn fail<T>(&self, span: Span, msg: impl Into<String>) -> Result<T> {
        Err(ParseError { span, msg: msg.into() })
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> Result<Span> {
        match self.peek() {
            Some(t) if t.kind == kind => {
                let sp = t.span;
                self.pos += 1;
                Ok(sp)
            }
            Some(t) => {
                let (span, lex) = (t.span, t.lexeme.clone());
                self.fail(span, format!("expected {what}, found `{lex}`"))
            }
            None => self.fail(self.eof_span(), format!("expected {what}, found end of input")),
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Span)> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Ident => {
                let out = (t.lexeme.clone(), t.span);
                self.pos += 1;
                Ok(out)
            }
            Some(t) if t.kind == TokenKind::Underscore => {
                let sp = t.span;
                self.pos += 1;
                Ok(("_".to_string(), sp))
            }
            Some(t) => {
                let (span, lex) = (t.span, t.lexeme.clone());
                self.fail(span, format!("expected {what}, found `{lex}`"))
            }
            None => self.fail(self.eof_span(), format!("expected {what}, found end of input")),
        }
    }

    // ---- declarations ----

    fn decl(&mut self) -> Result<Decl> {
        match self.peek_kind() {
            Some(TokenKind::Def) => {
                let start = self.next().unwrap().span;
                let (name, name_span) = self.ident("a declaration name")?;
                self.expect(TokenKind::Colon, "`:`")?;
                let ty = self.term()?;
                self.expect(TokenKind::Equals, "`=`")?;
                let body = self.term()?;
                let end = self.expect(TokenKind::Semi, "`;`")?;
                Ok(Decl {
                    name,
                    name_span,
                    ty,
                    body: Some(body),
                    span: start.join(end),
                })
            }
            Some(TokenKind::Assume) => {
                let start = self.next().unwrap().span;
                let (name, name_span) = self.ident("an assumption name")?;
                self.expect(TokenKind::Colon, "`:`")?;
                let ty = self.term()?;
                let end = self.expect(TokenKind::Semi, "`;`")?;
                Ok(Decl {
                    name,
                    name_span,
                    ty,
                    body: None,
                    span: start.join(end),
                })
            }
            _ => {
                let span = self.here();
                self.fail(span, "expected `def` or `assume`")
            }
        }
    }

    // ---- terms ----

    fn term(&mut self) -> Result<Term> {
        match self.peek_kind() {
            Some(TokenKind::Backslash) => self.lambda(),
            Some(TokenKind::Let) => self.let_term(),
            _ => self.arrow(),
        }
    }

    fn lambda(&mut self) -> Result<Term> {
        let start = self.expect(TokenKind::Backslash, "`\\`")?;
        let mut binders = vec![self.ident("a binder")?];
        while matches!(
            self.peek_kind(),
            Some(TokenKind::Ident) | Some(TokenKind::Underscore)
        ) {
            binders.push(self.ident("a binder")?);
        }
        self.expect(TokenKind::Dot, "`.`")?;
        let body = self.term()?;
        let span = start.join(body.span);
        let mut out = body;
        for (name, _) in binders.into_iter().rev() {
            out = Term::new(TermKind::Lam(name, Box::new(out)), span);
        }
        Ok(out)
    }

    fn let_term(&mut self) -> Result<Term> {
        let start = self.expect(TokenKind::Let, "`let`")?;
        let (name, _) = self.ident("a binder")?;
        self.expect(TokenKind::Colon, "`:`")?;
        let ann = self.term()?;
        self.expect(TokenKind::Equals, "`=`")?;
        let bound = self.term()?;
        self.expect(TokenKind::In, "`in`")?;
        let body = self.term()?;
        let span = start.join(body.span);
        Ok(Term::new(
            TermKind::Let(name, Box::new(ann), Box::new(bound), Box::new(body)),
            span,
        ))
    }

    fn arrow(&mut self) -> Result<Term> {
        let lhs = self.sigma()?;
        if self.peek_kind() == Some(TokenKind::Arrow) {
            self.pos += 1;
            let rhs = self.term()?;
            let span = lhs.span.join(rhs.span);
            return Ok(Term::new(
                TermKind::Pi("_".into(), Box::new(lhs), Box::new(rhs)),
                span,
            ));
        }
        Ok(lhs)
    }

    fn sigma(&mut self) -> Result<Term> {
        let lhs = self.app()?;
        if self.peek_kind() == Some(TokenKind::Star) {
            self.pos += 1;
            let rhs = self.sigma()?;
            let span = lhs.span.join(rhs.span);
            return Ok(Term::new(
                TermKind::Sigma("_".into(), Box::new(lhs), Box::new(rhs)),
                span,
            ));
        }
        Ok(lhs)
    }

    fn at_atom_start(&self) -> bool {
        use TokenKind::*;
        matches!(
            self.peek_kind(),
            Some(
                Ident
                    | NatLit(_)
                    | U(_)
                    | Nat(_)
                    | Bool(_)
                    | Top(_)
                    | ZeroKw(_)
                    | SucKw(_)
                    | TrueKw(_)
                    | FalseKw(_)
                    | TtKw(_)
                    | NatElimKw(_)
                    | BoolElimKw(_)
                    | FstKw
                    | SndKw
                    | LParen
                    | LAngle
                    | Tilde
                    | Caret
            )
        )
    }

    fn app(&mut self) -> Result<Term> {
        let mut head = self.atom()?;
        while self.at_atom_start() {
            let arg = self.atom()?;
            let span = head.span.join(arg.span);
            head = Term::new(TermKind::App(Box::new(head), Box::new(arg)), span);
        }
        Ok(head)
    }

    fn atom(&mut self) -> Result<Term> {
        use TokenKind::*;
        let tok = match self.peek() {
            Some(t) => t.clone(),
            None => return self.fail(self.eof_span(), "expected a term, found end of input"),
        };
        let span = tok.span;
        match tok.kind {
            Ident => {
                self.pos += 1;
                Ok(Term::new(TermKind::Var(tok.lexeme), span))
            }
            NatLit(n) => {
                self.pos += 1;
                Ok(Term::new(TermKind::NatLit(n), span))
            }
            U(stage) => {
                self.pos += 1;
                // `U0 3` is the universe at level 3; a bare `U0` sits at 0.
                let (lvl, span) = self.opt_level(span)?;
                Ok(Term::new(TermKind::U(stage, lvl), span))
            }
            Nat(stage) => {
                self.pos += 1;
                let (lvl, span) = self.opt_level(span)?;
                Ok(Term::new(TermKind::Nat(stage, lvl), span))
            }
            Bool(stage) => {
                self.pos += 1;
                let (lvl, span) = self.opt_level(span)?;
                Ok(Term::new(TermKind::Bool(stage, lvl), span))
            }
            Top(stage) => {
                self.pos += 1;
                let (lvl, span) = self.opt_level(span)?;
                Ok(Term::new(TermKind::Top(stage, lvl), span))
            }
            ZeroKw(stage) => {
                self.pos += 1;
                Ok(Term::new(TermKind::Zero(stage), span))
            }
            TrueKw(stage) => {
                self.pos += 1;
                Ok(Term::new(TermKind::True(stage), span))
            }
            FalseKw(stage) => {
                self.pos += 1;
                Ok(Term::new(TermKind::False(stage), span))
            }
            TtKw(stage) => {
                self.pos += 1;
                Ok(Term::new(TermKind::Tt(stage), span))
            }
            SucKw(stage) => {
                self.pos += 1;
                let arg = self.prefix_arg("suc")?;
                let span = span.join(arg.span);
                Ok(Term::new(TermKind::Suc(stage, Box::new(arg)), span))
            }
            FstKw => {
                self.pos += 1;
                let arg = self.prefix_arg("fst")?;
                let span = span.join(arg.span);
                Ok(Term::new(TermKind::Fst(Box::new(arg)), span))
            }
            SndKw => {
                self.pos += 1;
                let arg = self.prefix_arg("snd")?;
                let span = span.join(arg.span);
                Ok(Term::new(TermKind::Snd(Box::new(arg)), span))
            }
            NatElimKw(stage) => {
                self.pos += 1;
                let [m, z, s, n] = self.elim_args("NatElim")?;
                let span = span.join(n.span);
                Ok(Term::new(TermKind::NatElim(stage, m, z, s, n), span))
            }
            BoolElimKw(stage) => {
                self.pos += 1;
                let [m, t, f, b] = self.elim_args("BoolElim")?;
                let span = span.join(b.span);
                Ok(Term::new(TermKind::BoolElim(stage, m, t, f, b), span))
            }
            Tilde => {
                self.pos += 1;
                let arg = self.prefix_arg("`~`")?;
                let span = span.join(arg.span);
                Ok(Term::new(TermKind::Splice(Box::new(arg)), span))
            }
            Caret => {
                self.pos += 1;
                let arg = self.prefix_arg("`^`")?;
                let span = span.join(arg.span);
                Ok(Term::new(TermKind::Lift(Box::new(arg)), span))
            }
            LAngle => {
                self.pos += 1;
                let body = self.term()?;
                let end = self.expect(RAngle, "`>`")?;
                Ok(Term::new(TermKind::Quote(Box::new(body)), span.join(end)))
            }
            LParen => {
                self.pos += 1;
                self.parens(span)
            }
            _ => self.fail(span, format!("expected a term, found `{}`", tok.lexeme)),
        }
    }

    /// A base-type or universe keyword may be followed directly by a level
    /// numeral: `U0 3`, `Nat1 2`. The numeral is part of the atom.
    fn opt_level(&mut self, start: Span) -> Result<(Level, Span)> {
        if let Some(Token { kind: TokenKind::NatLit(n), span: lsp, .. }) = self.peek().cloned() {
            let l = u32::try_from(n).map_err(|_| ParseError {
                span: lsp,
                msg: "universe level too large".into(),
            })?;
            self.pos += 1;
            return Ok((Level(l), start.join(lsp)));
        }
        Ok((Level(0), start))
    }

    fn prefix_arg(&mut self, head: &str) -> Result<Term> {
        if !self.at_atom_start() {
            let span = self.here();
            return self.fail(span, format!("{head} needs an argument"));
        }
        self.atom()
    }

    fn elim_args(&mut self, head: &str) -> Result<[STm; 4]> {
        let mut out = Vec::with_capacity(4);
        for what in ["a motive", "a base case", "a step case", "a scrutinee"] {
            if !self.at_atom_start() {
                let span = self.here();
                return self.fail(span, format!("{head} needs {what}"));
            }
            out.push(Box::new(self.atom()?));
        }
        Ok(out.try_into().unwrap())
    }

    /// Everything that can follow `(`: a binder group for Pi/Sigma, an
    /// annotated term, a pair, or plain grouping.
    fn parens(&mut self, open: Span) -> Result<Term> {
        // A run of names followed by `:` is a binder group.
        let save = self.pos;
        let mut names = Vec::new();
        while matches!(
            self.peek_kind(),
            Some(TokenKind::Ident) | Some(TokenKind::Underscore)
        ) {
            names.push(self.ident("a binder")?);
        }
        if !names.is_empty() && self.peek_kind() == Some(TokenKind::Colon) {
            self.pos += 1;
            let dom = self.term()?;
            let close = self.expect(TokenKind::RParen, "`)`")?;
            match self.peek_kind() {
                Some(TokenKind::Arrow) => {
                    self.pos += 1;
                    let cod = self.term()?;
                    let span = open.join(cod.span);
                    let mut out = cod;
                    for (name, _) in names.into_iter().rev() {
                        out = Term::new(
                            TermKind::Pi(name, Box::new(dom.clone()), Box::new(out)),
                            span,
                        );
                    }
                    Ok(out)
                }
                Some(TokenKind::Star) => {
                    self.pos += 1;
                    let rest = self.sigma()?;
                    let span = open.join(rest.span);
                    let mut out = rest;
                    for (name, _) in names.into_iter().rev() {
                        out = Term::new(
                            TermKind::Sigma(name, Box::new(dom.clone()), Box::new(out)),
                            span,
                        );
                    }
                    Ok(out)
                }
                _ => {
                    // `(x : T)` with no arrow is an annotation; rebuild the
                    // name spine as an application.
                    let mut it = names.into_iter();
                    let (first, fsp) = it.next().unwrap();
                    let mut subject = Term::new(TermKind::Var(first), fsp);
                    for (name, nsp) in it {
                        let span = subject.span.join(nsp);
                        subject = Term::new(
                            TermKind::App(
                                Box::new(subject),
                                Term::boxed(TermKind::Var(name), nsp),
                            ),
                            span,
                        );
                    }
                    Ok(Term::new(
                        TermKind::Ann(Box::new(subject), Box::new(dom)),
                        open.join(close),
                    ))
                }
            }
        } else {
            self.pos = save;
            let first = self.term()?;
            match self.peek_kind() {
                Some(TokenKind::Colon) => {
                    self.pos += 1;
                    let ty = self.term()?;
                    let close = self.expect(TokenKind::RParen, "`)`")?;
                    Ok(Term::new(
                        TermKind::Ann(Box::new(first), Box::new(ty)),
                        open.join(close),
                    ))
                }
                Some(TokenKind::Comma) => {
                    let mut elems = vec![first];
                    while self.peek_kind() == Some(TokenKind::Comma) {
                        self.pos += 1;
                        elems.push(self.term()?);
                    }
                    let close = self.expect(TokenKind::RParen, "`)`")?;
                    let span = open.join(close);
                    let mut out = elems.pop().unwrap();
                    while let Some(lhs) = elems.pop() {
                        out = Term::new(TermKind::Pair(Box::new(lhs), Box::new(out)), span);
                    }
                    Ok(out)
                }
                _ => {
                    let close = self.expect(TokenKind::RParen, "`)` or `,`")?;
                    Ok(Term::new(first.kind, open.join(close)))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::Stage;
    use crate::lex::tokenize;
    use crate::surface::TermKind as K;

    fn term(src: &str) -> Term {
        parse_term(tokenize(src).unwrap(), src.len()).unwrap()
    }

    fn program(src: &str) -> Vec<Decl> {
        parse_program(tokenize(src).unwrap(), src.len()).unwrap()
    }

    #[test]
    fn splice_binds_tighter_than_application() {
        // ~f x  ==  (~f) x
        let t = term("~f x");
        match t.kind {
            K::App(f, x) => {
                assert!(matches!(f.kind, K::Splice(_)));
                assert!(matches!(x.kind, K::Var(ref n) if n == "x"));
            }
            k => panic!("expected application, got {k:?}"),
        }
    }

    #[test]
    fn splice_argument_stays_inside() {
        let t = term("f ~x");
        match t.kind {
            K::App(f, x) => {
                assert!(matches!(f.kind, K::Var(_)));
                assert!(matches!(x.kind, K::Splice(_)));
            }
            k => panic!("expected application, got {k:?}"),
        }
    }

    #[test]
    fn arrow_is_right_associative() {
        let t = term("A -> B -> C");
        match t.kind {
            K::Pi(_, _, cod) => assert!(matches!(cod.kind, K::Pi(..))),
            k => panic!("expected Pi, got {k:?}"),
        }
    }

    #[test]
    fn sigma_binds_tighter_than_arrow() {
        let t = term("A * B -> C");
        match t.kind {
            K::Pi(_, dom, _) => assert!(matches!(dom.kind, K::Sigma(..))),
            k => panic!("expected Pi over Sigma, got {k:?}"),
        }
    }

    #[test]
    fn dependent_binders_distribute_over_names() {
        let t = term("(A B : U1) -> A -> B");
        match t.kind {
            K::Pi(ref x, _, ref cod) => {
                assert_eq!(x, "A");
                assert!(matches!(cod.kind, K::Pi(ref y, _, _) if y == "B"));
            }
            k => panic!("expected Pi, got {k:?}"),
        }
    }

    #[test]
    fn multi_binder_lambda_desugars() {
        let t = term("\\A x. x");
        match t.kind {
            K::Lam(ref a, ref body) => {
                assert_eq!(a, "A");
                assert!(matches!(body.kind, K::Lam(ref x, _) if x == "x"));
            }
            k => panic!("expected Lam, got {k:?}"),
        }
    }

    #[test]
    fn universe_levels_attach_to_the_keyword() {
        assert!(matches!(term("U0 3").kind, K::U(Stage::Obj, Level(3))));
        assert!(matches!(term("U1").kind, K::U(Stage::Meta, Level(0))));
        // A parenthesized level is an application instead.
        assert!(matches!(term("U0 (3)").kind, K::App(..)));
    }

    #[test]
    fn quote_brackets_delimit_a_full_term() {
        let t = term("<mul ~y ~m>");
        assert!(matches!(t.kind, K::Quote(_)));
    }

    #[test]
    fn nat_elim_takes_exactly_four_atoms() {
        let t = term("NatElim1 (\\n. P) z (\\k pk. s) t");
        assert!(matches!(t.kind, K::NatElim(Stage::Meta, ..)));
        let err = parse_term(tokenize("NatElim1 m z").unwrap(), 12).unwrap_err();
        assert!(err.msg.contains("step case"));
    }

    #[test]
    fn annotation_forms() {
        assert!(matches!(term("(x : A)").kind, K::Ann(..)));
        let t = term("(f x : T)");
        match t.kind {
            K::Ann(subject, _) => assert!(matches!(subject.kind, K::App(..))),
            k => panic!("expected Ann, got {k:?}"),
        }
        assert!(matches!(term("(suc0 x : Nat0)").kind, K::Ann(..)));
    }

    #[test]
    fn pairs_nest_to_the_right() {
        let t = term("(a, b, c)");
        match t.kind {
            K::Pair(_, snd) => assert!(matches!(snd.kind, K::Pair(..))),
            k => panic!("expected Pair, got {k:?}"),
        }
    }

    #[test]
    fn let_extends_right() {
        let t = term("let x : Nat1 = zero1 in suc1 x");
        match t.kind {
            K::Let(_, _, _, body) => assert!(matches!(body.kind, K::Suc(..))),
            k => panic!("expected Let, got {k:?}"),
        }
    }

    #[test]
    fn lift_in_arrow_chain() {
        let t = term("^Nat0 -> ^Nat0");
        match t.kind {
            K::Pi(_, dom, cod) => {
                assert!(matches!(dom.kind, K::Lift(_)));
                assert!(matches!(cod.kind, K::Lift(_)));
            }
            k => panic!("expected Pi, got {k:?}"),
        }
    }

    #[test]
    fn declarations_parse_both_forms() {
        let ds = program("assume n : Nat0;\ndef one : Nat0 = suc0 n;");
        assert_eq!(ds.len(), 2);
        assert!(ds[0].body.is_none());
        assert!(ds[1].body.is_some());
    }

    #[test]
    fn missing_semicolon_is_reported() {
        let toks = tokenize("def x : Nat0 = zero0").unwrap();
        let err = parse_program(toks, 20).unwrap_err();
        assert!(err.msg.contains("`;`"));
    }

    #[test]
    fn grouping_keeps_inner_kind() {
        assert!(matches!(term("((x))").kind, K::Var(_)));
    }
}
