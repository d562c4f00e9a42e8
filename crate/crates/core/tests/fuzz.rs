//! Totality: the parser must reject or accept, never crash, whatever bytes
//! it is fed. The driver feeds lossy-decoded text exactly as the CLI does.

use qir_sentinel_core::parser::parse_module;
use rand::prelude::*;

#[test]
fn random_bytes_never_panic_the_parser() {
    let mut rng = StdRng::seed_from_u64(0xf022);
    for _ in 0..20_000 {
        let len = rng.gen_range(0..192);
        let bytes: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
        let text = String::from_utf8_lossy(&bytes);
        let _ = parse_module(&text, "fuzz.ll");
    }
}

#[test]
fn mutated_fixtures_never_panic_the_parser() {
    // Structured noise finds different holes than raw bytes: flip spans of a
    // real fixture into random printable junk.
    let base = include_str!("../../../corpus/sample.ll");
    let mut rng = StdRng::seed_from_u64(0x5eed);
    for _ in 0..4_000 {
        let mut text = base.as_bytes().to_vec();
        for _ in 0..rng.gen_range(1..6) {
            let at = rng.gen_range(0..text.len());
            text[at] = rng.gen_range(0x20..0x7f);
        }
        let text = String::from_utf8_lossy(&text);
        let _ = parse_module(&text, "mutated.ll");
    }
}

#[test]
fn deeply_nested_types_are_rejected_not_overflowed() {
    let mut src = String::from("define void @f(");
    for _ in 0..5000 {
        src.push('[');
        src.push_str("1 x ");
    }
    src.push_str("i8");
    let _ = parse_module(&src, "deep.ll");

    let mut braces = String::from("%T = type ");
    for _ in 0..5000 {
        braces.push('{');
    }
    let _ = parse_module(&braces, "deep.ll");
}
