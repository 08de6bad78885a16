//! Property-based invariants over the front end and the staging
//! pipeline. Structured inputs come from the type-directed generator in
//! `testkit`; raw fuzz inputs come from proptest's string strategies.

use proptest::prelude::*;
use stagec::core::{shift, term_eq};
use stagec::fuel::Fuel;
use stagec::lex::tokenize;
use stagec::nbe;
use stagec::obj;
use stagec::parse::{parse_program, parse_term};
use stagec::pretty::term_to_string;
use stagec::stage;
use stagec::testkit::{check_soundness, check_stability, gen_object_case, gen_staged_case};

proptest! {
    /// The lexer returns a token list or an error, never panics, on any
    /// input whatsoever.
    #[test]
    fn lexer_total_on_arbitrary_strings(src in "\\PC*") {
        let _ = tokenize(&src);
    }

    /// Lexing plus parsing is total as well, including on inputs built
    /// from the language's own vocabulary.
    #[test]
    fn parser_total_on_keyword_soup(
        words in proptest::collection::vec(
            prop_oneof![
                Just("def"), Just("assume"), Just("let"), Just("in"),
                Just("U0"), Just("U1"), Just("Nat0"), Just("Nat1"),
                Just("zero0"), Just("suc1"), Just("NatElim0"), Just("fst"),
                Just("("), Just(")"), Just("<"), Just(">"), Just("~"),
                Just("^"), Just("*"), Just("->"), Just("\\"), Just("."),
                Just(":"), Just(";"), Just("="), Just(","), Just("x"),
                Just("3"), Just("_"),
            ],
            0..40,
        )
    ) {
        let src = words.join(" ");
        if let Ok(toks) = tokenize(&src) {
            let _ = parse_program(toks.clone(), src.len());
            let _ = parse_term(toks, src.len());
        }
    }

    /// Shifting by zero is the identity, and shifts compose additively.
    #[test]
    fn shift_laws(seed in any::<u64>()) {
        let case = gen_object_case(seed, 25);
        let t = &case.term;
        prop_assert!(term_eq(&shift(t, 0), t));
        let two = shift(&shift(t, 3), 4);
        let once = shift(t, 7);
        prop_assert!(term_eq(&two, &once));
    }

    /// Stripping an embedded object term gives the term back.
    #[test]
    fn strip_undoes_embed(seed in any::<u64>()) {
        let case = gen_object_case(seed, 25);
        let stripped = obj::strip(&case.term).unwrap();
        let back = obj::strip(&obj::embed(&stripped)).unwrap();
        prop_assert!(obj::obj_eq(&back, &stripped));
    }

    /// The pretty printer always emits syntactically valid source.
    #[test]
    fn printed_terms_reparse(seed in any::<u64>()) {
        let case = gen_staged_case(seed, 30);
        let names: Vec<stagec::core::Name> =
            (0..case.ctx.len()).map(|i| stagec::core::name(&format!("g{i}"))).collect();
        let src = term_to_string(&names, &case.term);
        let toks = tokenize(&src).unwrap_or_else(|e| panic!("lex {src}: {e}"));
        parse_term(toks, src.len()).unwrap_or_else(|e| panic!("parse {src}: {e}"));
    }

    /// Evaluation is stable under readback: a normal form evaluates back
    /// to something convertible with the original value.
    #[test]
    fn readback_preserves_meaning(seed in any::<u64>()) {
        let fuel = Fuel::unlimited();
        let case = gen_object_case(seed, 25);
        let prog = case.program();
        let env = nbe::program_env(&fuel, &prog).unwrap();
        let depth = prog.decls.len();
        let v = nbe::eval(&fuel, &env, &case.term).unwrap();
        let nf1 = nbe::readback(&fuel, depth, &v).unwrap();
        let v2 = nbe::eval(&fuel, &env, &nf1).unwrap();
        prop_assert!(nbe::conv(&fuel, depth, &v, &v2).unwrap());
        // And readback is idempotent on its own output.
        let nf2 = nbe::readback(&fuel, depth, &v2).unwrap();
        prop_assert!(term_eq(&nf1, &nf2), "nf1 = {nf1:?}\nnf2 = {nf2:?}");
    }

    /// Staging under a fuel limit either runs out honestly or agrees
    /// with the unlimited run; it never produces different output.
    #[test]
    fn fuel_never_changes_the_answer(seed in any::<u64>(), budget in 1u64..400) {
        let case = gen_staged_case(seed, 30);
        let prog = case.program();
        let unlimited = Fuel::unlimited();
        let full = stage::stage_term(&unlimited, &prog, &case.term).unwrap();
        let limited = Fuel::limited(budget);
        match stage::stage_term(&limited, &prog, &case.term) {
            Ok(out) => prop_assert!(obj::obj_eq(&out, &full)),
            Err(stage::StageError::OutOfFuel) => {}
            Err(e) => prop_assert!(false, "unexpected failure: {e}"),
        }
    }

    /// The two round-trip oracles, driven by proptest's seed exploration
    /// on top of the dedicated windows in the acceptance suite.
    #[test]
    fn stability_oracle(seed in any::<u64>()) {
        let fuel = Fuel::unlimited();
        let case = gen_object_case(seed, 30);
        check_stability(&fuel, &case).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn soundness_oracle(seed in any::<u64>()) {
        let fuel = Fuel::unlimited();
        let case = gen_staged_case(seed, 30);
        check_soundness(&fuel, &case).map_err(TestCaseError::fail)?;
    }
}
