use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use maurer_bench::{data_state, lean_witness, wide_witness};
use maurer_core::apply::{apply, ApplyResult};
use maurer_core::tpfc::{check_membership_with, induced_transformation, Quantifier, TpfcParams};

fn single_runs(c: &mut Criterion) {
    let (_, w) = lean_witness(2, 2, 1);
    let s = data_state(&w, &[3, 0, 2, 1]);
    c.bench_function("apply/lean k=2 l=2", |b| {
        b.iter(|| {
            apply(
                &w.thread,
                &w.machine.machine,
                ApplyResult::Defined(black_box(s.clone())),
            )
            .unwrap()
        })
    });
}

fn membership(c: &mut Criterion) {
    let (t, w) = lean_witness(1, 1, 2);
    let params = TpfcParams::lean(1, 1, false).unwrap();
    let mut g = c.benchmark_group("membership k=1 l=1");
    g.bench_function("exhaustive", |b| {
        b.iter(|| check_membership_with(&t, &params, &w, Quantifier::Exhaustive).unwrap())
    });
    g.bench_function("case split", |b| {
        b.iter(|| check_membership_with(&t, &params, &w, Quantifier::CaseSplit).unwrap())
    });
    g.finish();

    let (_, w) = wide_witness(2, 1, 3);
    c.bench_function("induced/wide k=2", |b| b.iter(|| induced_transformation(&w).unwrap()));
}

criterion_group!(benches, single_runs, membership);
criterion_main!(benches);
