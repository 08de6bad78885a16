//! Two-stage dependent type theory with compile-time staging.
//!
//! The pipeline: `.2ltt` source is tokenized ([`lex`]), parsed ([`parse`]
//! into [`surface`] trees), elaborated into stage-annotated core terms
//! (into [`core`]), and then staged: every stage-1
//! construct is evaluated away, every stage-0 construct is rebuilt
//! verbatim, and the result is a splice-free object term that an
//! independent checker re-verifies. Normalization-by-evaluation
//! for the full theory backs conversion checking; a test kit generates well-typed
//! input for the property suites.

pub mod cli;
pub mod core;
pub mod dump;
pub mod elab;
pub mod lex;
pub mod nbe;
pub mod fuel;
pub mod obj;
pub mod parse;
pub mod pretty;
pub mod span;
pub mod stage;
pub mod surface;
pub mod testkit;
