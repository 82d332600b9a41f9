//! Fixtures shared by the benchmarks.

use kiea_core::ga::GaRun;
use kiea_core::{
    build_pilot, derive_seed, record_fingerprint, ClusterParams, Fingerprint, GaParams, KnowledgeBase, Population,
    Registry, Strategy,
};

pub const DIM: usize = 10;
pub const G_C: usize = 20;

pub fn registry() -> Registry {
    Registry::builtin(DIM).expect("builtin registry")
}

/// Population of the default GA on `function` after `generations` steps.
pub fn evolved_population(reg: &Registry, function: &str, generations: usize, seed: u64) -> Population {
    let mut run = GaRun::new(reg.get(function).unwrap(), GaParams::default(), seed).unwrap();
    for _ in 0..generations {
        run.step();
    }
    run.population().clone()
}

pub fn fingerprint(reg: &Registry, function: &str, seed: u64) -> Fingerprint {
    record_fingerprint(reg.get(function).unwrap(), &GaParams::default(), G_C, &ClusterParams::default(), seed).unwrap()
}

/// Two-pilot knowledge base with `count` fingerprints per pilot.
pub fn knowledge_base(reg: &Registry, count: usize) -> KnowledgeBase {
    let cp = ClusterParams::default();
    let mut kb = KnowledgeBase::new(cp);
    for (k, id) in ["ackley", "gaussian"].into_iter().enumerate() {
        let rec = build_pilot(
            reg.get(id).unwrap(),
            &GaParams::default(),
            Strategy::identity("keep"),
            count,
            G_C,
            &cp,
            derive_seed(7, k as u64),
        )
        .unwrap();
        kb = kb.add_pilot(rec).unwrap();
    }
    kb
}
