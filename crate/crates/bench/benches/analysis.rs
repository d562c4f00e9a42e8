//! End-to-end throughput of the pipeline stages on the corpus fixtures and
//! on a larger generated straight-line program.

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use qir_sentinel_core::parser::parse_module;
use qir_sentinel_core::semantics::{analyze_module, AnalysisConfig};
use qir_sentinel_core::{print_module, validate_module};
use qir_sentinel_testkit::{gen_any_trace, render_trace};
use rand::prelude::*;

const SAMPLE: &str = include_str!("../../../corpus/sample.ll");
const DEADQUBIT: &str = include_str!("../../../corpus/deadqubit.ll");
const CLONING: &str = include_str!("../../../corpus/cloning.ll");

fn bench_parse(c: &mut Criterion) {
    c.bench_function("parse sample.ll", |b| {
        b.iter(|| parse_module(black_box(SAMPLE), "sample.ll").unwrap())
    });

    let mut rng = StdRng::seed_from_u64(7);
    let large = render_trace(&gen_any_trace(&mut rng, 400));
    c.bench_function("parse 400-op trace", |b| {
        b.iter(|| parse_module(black_box(&large), "trace.ll").unwrap())
    });
}

fn bench_analyze(c: &mut Criterion) {
    let config = AnalysisConfig::default();
    for (name, source) in [
        ("sample.ll", SAMPLE),
        ("deadqubit.ll", DEADQUBIT),
        ("cloning.ll", CLONING),
    ] {
        let (module, _) = parse_module(source, name).unwrap();
        assert!(validate_module(&module).is_empty());
        c.bench_function(&format!("analyze {name}"), |b| {
            b.iter(|| analyze_module(black_box(&module), None, &config).unwrap())
        });
    }

    let mut rng = StdRng::seed_from_u64(7);
    let large = render_trace(&gen_any_trace(&mut rng, 400));
    let (module, _) = parse_module(&large, "trace.ll").unwrap();
    c.bench_function("analyze 400-op trace", |b| {
        b.iter(|| analyze_module(black_box(&module), None, &config).unwrap())
    });
}

fn bench_print(c: &mut Criterion) {
    let (module, _) = parse_module(SAMPLE, "sample.ll").unwrap();
    c.bench_function("print sample.ll", |b| {
        b.iter(|| print_module(black_box(&module)))
    });
}

criterion_group!(benches, bench_parse, bench_analyze, bench_print);
criterion_main!(benches);
