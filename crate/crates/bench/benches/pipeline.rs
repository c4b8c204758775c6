//! Benchmarks for the three pipeline stages that dominate runtime: trace
//! evaluation (both evaluator routes), CNF encoding, and end-to-end learning.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use ltlearn_bench::{evaluation_batch, response_instance};
use ltlearn_core::encode::{encode, EncodeOptions};
use ltlearn_core::eval::{evaluate, evaluate_fixpoint};
use ltlearn_core::learn::{learn, LearnOptions, LearnOutcome};

fn bench_evaluation(c: &mut Criterion) {
    let (dags, traces) = evaluation_batch(64, 12, 16);
    let mut group = c.benchmark_group("evaluation");
    group.bench_function("unrolled", |b| {
        b.iter(|| {
            let mut trues = 0usize;
            for (dag, trace) in dags.iter().zip(&traces) {
                trues += usize::from(evaluate(black_box(dag), black_box(trace)));
            }
            trues
        })
    });
    group.bench_function("fixpoint", |b| {
        b.iter(|| {
            let mut trues = 0usize;
            for (dag, trace) in dags.iter().zip(&traces) {
                trues += usize::from(evaluate_fixpoint(black_box(dag), black_box(trace)));
            }
            trues
        })
    });
    group.finish();
}

fn bench_encoding(c: &mut Criterion) {
    let (sample, program) = response_instance();
    let options = EncodeOptions { max_nodes: 5, default_size_objective: true };
    c.bench_function("encode/response-instance", |b| {
        b.iter(|| {
            let enc = encode(options, black_box(&sample), black_box(&program))
                .expect("fixture encodes");
            enc.clauses.len()
        })
    });
}

fn bench_learning(c: &mut Criterion) {
    let (sample, program) = response_instance();
    let options = LearnOptions { max_nodes: 5, ..LearnOptions::default() };
    let mut group = c.benchmark_group("learn");
    group.sample_size(10);
    group.bench_function("response-instance", |b| {
        b.iter(|| {
            match learn(black_box(&sample), black_box(&program), &options)
                .expect("fixture instance solves")
            {
                LearnOutcome::Found(found) => found.dag.dag_size(),
                other => panic!("fixture instance must be solvable, got {other:?}"),
            }
        })
    });
    group.finish();
}

criterion_group!(benches, bench_evaluation, bench_encoding, bench_learning);
criterion_main!(benches);
