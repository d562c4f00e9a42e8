//! Printer/parser round trips: parse(print(m)) must equal m structurally
//! (spans and whitespace aside) for the corpus and for generated modules.

use qir_sentinel_core::ast::print_module;
use qir_sentinel_core::parser::parse_module;
use qir_sentinel_core::validate_module;
use qir_sentinel_testkit::gen_module;
use rand::prelude::*;

#[test]
fn corpus_fixtures_round_trip() {
    for (name, source) in [
        ("sample.ll", include_str!("../../../corpus/sample.ll")),
        ("deadqubit.ll", include_str!("../../../corpus/deadqubit.ll")),
        ("cloning.ll", include_str!("../../../corpus/cloning.ll")),
        ("loop.ll", include_str!("../../../corpus/loop.ll")),
        (
            "branch_release.ll",
            include_str!("../../../corpus/branch_release.ll"),
        ),
        (
            "static_qubits.ll",
            include_str!("../../../corpus/static_qubits.ll"),
        ),
    ] {
        let (module, _) = parse_module(source, name).expect("fixture parses");
        let printed = print_module(&module);
        let (reparsed, warnings) =
            parse_module(&printed, name).unwrap_or_else(|e| panic!("{name}: {e:?}\n{printed}"));
        assert!(warnings.is_empty(), "{name}: {warnings:?}");
        assert_eq!(module, reparsed, "{name} did not round-trip:\n{printed}");
    }
}

#[test]
fn empty_module_prints_only_the_header() {
    let (module, _) = parse_module("", "empty.ll").unwrap();
    let printed = print_module(&module);
    assert_eq!(printed, "; ModuleID = 'empty.ll'\n");
    let (reparsed, _) = parse_module(&printed, "empty.ll").unwrap();
    assert_eq!(module, reparsed);
}

#[test]
fn generated_modules_round_trip() {
    let mut rng = StdRng::seed_from_u64(0x0d1ce);
    for round in 0..250 {
        let module = gen_module(&mut rng);
        assert!(
            validate_module(&module).is_empty(),
            "generator must produce well-formed modules (round {round}): {:?}",
            validate_module(&module)
        );
        let printed = print_module(&module);
        let (reparsed, _) = parse_module(&printed, "generated.ll")
            .unwrap_or_else(|e| panic!("round {round}: {e:?}\n{printed}"));
        assert_eq!(module, reparsed, "round {round} mismatch:\n{printed}");
    }
}
