use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use kiea_bench::{evolved_population, fingerprint, knowledge_base, registry};
use kiea_core::fingerprint::{compute_ccc, detect_clusters};
use kiea_core::ga::GaRun;
use kiea_core::{classify, total_score, ClusterParams, GaParams, Weights};

fn objectives(c: &mut Criterion) {
    let reg = registry();
    let x = vec![0.37; kiea_bench::DIM];
    for id in reg.ids() {
        let f = reg.get(&id).unwrap();
        c.bench_function(&format!("evaluate/{id}"), |b| b.iter(|| f.evaluate(black_box(&x)).unwrap()));
    }
}

fn ga(c: &mut Criterion) {
    let reg = registry();
    let f = reg.get("ackley").unwrap();
    c.bench_function("step_generation/ackley", |b| {
        b.iter_batched(
            || GaRun::new(f, GaParams::default(), 3).unwrap(),
            |mut run| {
                run.step();
                run
            },
            BatchSize::SmallInput,
        )
    });
}

fn clustering(c: &mut Criterion) {
    let reg = registry();
    let cp = ClusterParams::default();
    let domain = reg.domain_of("ackley").unwrap().clone();
    let pop = evolved_population(&reg, "ackley", 30, 5);
    c.bench_function("detect_clusters/ackley", |b| {
        b.iter(|| detect_clusters(black_box(&pop), &domain, &cp).unwrap())
    });
    let clusters = detect_clusters(&pop, &domain, &cp).unwrap();
    c.bench_function("compute_ccc/ackley", |b| b.iter(|| compute_ccc(black_box(&clusters), cp.epsilon())));
}

fn classification(c: &mut Criterion) {
    let reg = registry();
    let u = fingerprint(&reg, "rastrigin", 11);
    let p = fingerprint(&reg, "ackley", 12);
    c.bench_function("total_score", |b| {
        b.iter(|| total_score(black_box(&u), black_box(&p), Weights::PAPER).unwrap())
    });
    let kb = knowledge_base(&reg, 10);
    c.bench_function("classify/2x10", |b| b.iter(|| classify(black_box(&u), &kb, Weights::PAPER).unwrap()));
}

criterion_group!(benches, objectives, ga, clustering, classification);
criterion_main!(benches);
