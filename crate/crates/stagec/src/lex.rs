//! Tokenizer for `.2ltt` sources.
//!
//! Line comments start with `--`, block comments `{- ... -}` nest. Stage
//! suffixes are part of the keyword (`zero0`, `Nat1`), so the lexer never
//! has to split identifiers.

use crate::core::Stage;
use crate::span::Span;
use std::fmt;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TokenKind {
    Ident,
    NatLit(u64),
    // Keywords.
    Def,
    Assume,
    Let,
    In,
    U(Stage),
    Nat(Stage),
    Bool(Stage),
    Top(Stage),
    ZeroKw(Stage),
    SucKw(Stage),
    TrueKw(Stage),
    FalseKw(Stage),
    TtKw(Stage),
    NatElimKw(Stage),
    BoolElimKw(Stage),
    FstKw,
    SndKw,
    // Punctuation.
    LParen,
    RParen,
    LAngle,
    RAngle,
    Tilde,
    Caret,
    Backslash,
    Dot,
    Comma,
    Colon,
    Semi,
    Equals,
    Star,
    Arrow,
    Underscore,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LexError {
    pub span: Span,
    pub msg: String,
}

impl fmt::Display for LexError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.msg)
    }
}

fn keyword(word: &str) -> Option<TokenKind> {
    use Stage::{Meta, Obj};
    use TokenKind::*;
    Some(match word {
        "def" => Def,
        "assume" => Assume,
        "let" => Let,
        "in" => In,
        "U0" => U(Obj),
        "U1" => U(Meta),
        "Nat0" => Nat(Obj),
        "Nat1" => Nat(Meta),
        "Bool0" => Bool(Obj),
        "Bool1" => Bool(Meta),
        "Top0" => Top(Obj),
        "Top1" => Top(Meta),
        "zero0" => ZeroKw(Obj),
        "zero1" => ZeroKw(Meta),
        "suc0" => SucKw(Obj),
        "suc1" => SucKw(Meta),
        "true0" => TrueKw(Obj),
        "true1" => TrueKw(Meta),
        "false0" => FalseKw(Obj),
        "false1" => FalseKw(Meta),
        "tt0" => TtKw(Obj),
        "tt1" => TtKw(Meta),
        "NatElim0" => NatElimKw(Obj),
        "NatElim1" => NatElimKw(Meta),
        "BoolElim0" => BoolElimKw(Obj),
        "BoolElim1" => BoolElimKw(Meta),
        "fst" => FstKw,
        "snd" => SndKw,
        _ => return None,
    })
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, LexError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = src[i..].chars().next().unwrap();
        // Whitespace and comments leave no tokens behind.
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        if src[i..].starts_with("--") {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if src[i..].starts_with("{-") {
            let open = i;
            let mut depth = 1;
            i += 2;
            while depth > 0 {
                if i >= bytes.len() {
                    return Err(LexError {
                        span: Span::new(open, open + 2),
                        msg: "unterminated block comment".into(),
                    });
                }
                if src[i..].starts_with("{-") {
                    depth += 1;
                    i += 2;
                } else if src[i..].starts_with("-}") {
                    depth -= 1;
                    i += 2;
                } else {
                    i += src[i..].chars().next().unwrap().len_utf8();
                }
            }
            continue;
        }

        let start = i;
        let kind = if is_ident_start(c) {
            i += 1;
            while i < bytes.len() && is_ident_char(src[i..].chars().next().unwrap()) {
                i += 1;
            }
            let word = &src[start..i];
            if word == "_" {
                TokenKind::Underscore
            } else {
                keyword(word).unwrap_or(TokenKind::Ident)
            }
        } else if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let text = &src[start..i];
            let n: u64 = text.parse().map_err(|_| LexError {
                span: Span::new(start, i),
                msg: format!("numeral `{text}` does not fit in 64 bits"),
            })?;
            TokenKind::NatLit(n)
        } else {
            i += c.len_utf8();
            match c {
                '(' => TokenKind::LParen,
                ')' => TokenKind::RParen,
                '<' => TokenKind::LAngle,
                '>' => TokenKind::RAngle,
                '~' => TokenKind::Tilde,
                '^' => TokenKind::Caret,
                '\\' => TokenKind::Backslash,
                '.' => TokenKind::Dot,
                ',' => TokenKind::Comma,
                ':' => TokenKind::Colon,
                ';' => TokenKind::Semi,
                '=' => TokenKind::Equals,
                '*' => TokenKind::Star,
                '-' => {
                    if i < bytes.len() && bytes[i] == b'>' {
                        i += 1;
                        TokenKind::Arrow
                    } else {
                        return Err(LexError {
                            span: Span::new(start, i),
                            msg: "stray `-`; expected `->`, `--`, or `-}`".into(),
                        });
                    }
                }
                _ => {
                    return Err(LexError {
                        span: Span::new(start, i),
                        msg: format!("unexpected character `{c}`"),
                    })
                }
            }
        };
        out.push(Token {
            kind,
            lexeme: src[start..i].to_string(),
            span: Span::new(start, i),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn splice_of_quote_is_four_tokens() {
        use TokenKind::*;
        assert_eq!(
            kinds("~<true0>"),
            vec![Tilde, LAngle, TrueKw(Stage::Obj), RAngle]
        );
    }

    #[test]
    fn id1_declaration_is_nineteen_tokens() {
        let toks = tokenize("def id1 : (A : U1) -> A -> A = \\A x. x;").unwrap();
        assert_eq!(toks.len(), 19);
        assert_eq!(toks[0].kind, TokenKind::Def);
        assert_eq!(toks[1].lexeme, "id1");
        assert_eq!(toks[18].kind, TokenKind::Semi);
    }

    #[test]
    fn rejects_unknown_character_with_span() {
        let err = tokenize("@@").unwrap_err();
        assert_eq!(err.span, Span::new(0, 1));
    }

    #[test]
    fn comments_vanish() {
        assert_eq!(kinds("-- nothing\nzero0 {- {- nested -} -} zero1"), vec![
            TokenKind::ZeroKw(Stage::Obj),
            TokenKind::ZeroKw(Stage::Meta),
        ]);
    }

    #[test]
    fn unterminated_block_comment_errors_at_opening() {
        let err = tokenize("zero0 {- oops").unwrap_err();
        assert_eq!(err.span.start, 6);
    }

    #[test]
    fn spans_are_byte_offsets() {
        let toks = tokenize("suc0 x").unwrap();
        assert_eq!(toks[0].span, Span::new(0, 4));
        assert_eq!(toks[1].span, Span::new(5, 6));
    }

    #[test]
    fn primes_stay_in_identifiers() {
        let toks = tokenize("x' x''").unwrap();
        assert_eq!(toks.len(), 2);
        assert_eq!(toks[0].lexeme, "x'");
    }

    #[test]
    fn arrow_requires_both_characters() {
        assert!(tokenize("a - b").is_err());
        assert_eq!(kinds("a -> b").len(), 3);
    }
}
