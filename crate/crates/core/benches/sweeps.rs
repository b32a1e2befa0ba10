//! Sequential vs parallel execution on the main sweeps.

use cdslab::classical::neq_cds;
use cdslab::exec::Exec;
use cdslab::forrelation::{instance_suite, run_suite};
use cdslab::lowerbound::two_prover_lab;
use cdslab::protocol::types::PromiseFunction;
use cdslab::quantum::{lifted_neq, teleport_and_toy};
use cdslab::verifier::cds_verify_with;
use cdslab::verifier::quantum::cdqs_verify_with;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [Exec; 2] = [Exec::Sequential, Exec::Parallel];

fn classical_neq(c: &mut Criterion) {
    let mut g = c.benchmark_group("neq_cds_verify");
    let p = neq_cds(4).unwrap();
    let f = PromiseFunction::neq(4);
    for exec in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &e| {
            b.iter(|| cds_verify_with(&p, &f, e).unwrap())
        });
    }
    g.finish();
}

fn cdqs_lifted_neq(c: &mut Criterion) {
    let mut g = c.benchmark_group("cdqs_verify_lifted_neq");
    g.sample_size(10);
    let p = lifted_neq().unwrap();
    let f = PromiseFunction::neq(2);
    for exec in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &e| {
            b.iter(|| cdqs_verify_with(&p, &f, e).unwrap())
        });
    }
    g.finish();
}

fn forrelation_suite(c: &mut Criterion) {
    let mut g = c.benchmark_group("forrelation_suite");
    g.sample_size(10);
    let inst = instance_suite(&[4, 8, 16], 8, 1, Exec::Parallel).unwrap();
    for exec in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &e| {
            b.iter(|| run_suite(&inst, 15, 7, e).unwrap())
        });
    }
    g.finish();
}

fn two_prover(c: &mut Criterion) {
    let mut g = c.benchmark_group("two_prover_k2");
    g.sample_size(10);
    let p = teleport_and_toy().unwrap();
    let f = PromiseFunction::and();
    for exec in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &e| {
            b.iter(|| two_prover_lab(&p, &f, 2, e).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, classical_neq, cdqs_lifted_neq, forrelation_suite, two_prover);
criterion_main!(benches);
