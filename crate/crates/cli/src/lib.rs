//! Experiment harness behind the `kiea` binary.
//!
//! Each experiment is a plain function returning an in-memory report; the
//! `write_*` functions in [`output`] turn reports into CSV and JSON files.
//! Repetitions run on the rayon pool and are collected in seed order, so
//! output files do not depend on scheduling.

pub mod experiments;
pub mod output;

use anyhow::{bail, Result};
use kiea_core::{
    build_pilot, derive_seed, ClusterParams, GaParams, KnowledgeBase, ParamOverrides, Registry, RunBudget, Strategy,
    Weights,
};

pub use experiments::{
    classify_matrix, convergence_compare, single_run, strategy_grid, ArmSummary, ClassifyMatrix, ClassifyRow,
    ConvergenceReport, GridCell, GridReport, PairedRow,
};

pub const DEFAULT_DIM: usize = 10;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_G_C: usize = 20;
pub const DEFAULT_FES: u64 = 3_000_000;
pub const DEFAULT_MAX_GENERATIONS: usize = 1_000_000;
pub const DEFAULT_TERMINATION_ERROR: f64 = 1e-6;
pub const DEFAULT_FINGERPRINTS: usize = 50;
pub const DEFAULT_REPS: usize = 25;

/// Everything a run needs besides the function and the knowledge base.
#[derive(Debug, Clone, PartialEq)]
pub struct Setup {
    pub dim: usize,
    pub seed: u64,
    pub s0: GaParams,
    pub budget: RunBudget,
    pub g_c: usize,
    pub weights: Weights,
    pub cluster: ClusterParams,
}

impl Default for Setup {
    fn default() -> Self {
        Self {
            dim: DEFAULT_DIM,
            seed: DEFAULT_SEED,
            s0: GaParams::default(),
            budget: RunBudget {
                max_generations: DEFAULT_MAX_GENERATIONS,
                max_evaluations: DEFAULT_FES,
                termination_error: DEFAULT_TERMINATION_ERROR,
            },
            g_c: DEFAULT_G_C,
            weights: Weights::PAPER,
            cluster: ClusterParams::default(),
        }
    }
}

impl Setup {
    pub fn registry(&self) -> Result<Registry> {
        Ok(Registry::builtin(self.dim)?)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }
}

/// Switches to population `pop` and mutation rate `mutation` as soon as the
/// strategy takes over.
pub fn cell_strategy(pop: usize, mutation: f64) -> Strategy {
    Strategy::single(
        format!("pop{pop}-mut{mutation}"),
        0,
        ParamOverrides {
            population_size: Some(pop),
            mutation_rate: Some(mutation),
            ..ParamOverrides::default()
        },
    )
}

/// Pilot functions of the default knowledge base and their strategies.
///
/// The cells are the winners of `strategy-grid` over {40, 60} x {0.01, 0.1}
/// with default settings.
pub fn default_pilots() -> Vec<(&'static str, Strategy)> {
    vec![
        ("ackley", cell_strategy(60, 0.01)),
        ("gaussian", cell_strategy(40, 0.1)),
    ]
}

/// Builds a knowledge base with `count` fingerprints per pilot. Pilot `k`
/// draws its fingerprint seeds from `derive_seed(setup.seed, k)`.
pub fn build_kb(setup: &Setup, pilots: &[(&str, Strategy)], count: usize) -> Result<KnowledgeBase> {
    if pilots.is_empty() {
        bail!("at least one pilot is required");
    }
    let registry = setup.registry()?;
    let mut kb = KnowledgeBase::new(setup.cluster);
    for (k, (id, strategy)) in pilots.iter().enumerate() {
        let function = registry.get(id)?;
        let record = build_pilot(
            function,
            &setup.s0,
            strategy.clone(),
            count,
            setup.g_c,
            &setup.cluster,
            derive_seed(setup.seed, k as u64),
        )?;
        kb = kb.add_pilot(record)?;
    }
    Ok(kb)
}

pub fn build_default_kb(setup: &Setup, count: usize) -> Result<KnowledgeBase> {
    build_kb(setup, &default_pilots(), count)
}

/// Mean and sample standard deviation; the deviation of a single value is 0.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_std_small_cases() {
        assert_eq!(mean_std(&[3.0]), (3.0, 0.0));
        let (m, s) = mean_std(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert_eq!(m, 5.0);
        assert!((s - (32.0f64 / 7.0).sqrt()).abs() < 1e-12);
        assert!(mean_std(&[]).0.is_nan());
    }

    #[test]
    fn cell_strategy_fires_at_switch() {
        let s = cell_strategy(40, 0.1);
        assert_eq!(s.id, "pop40-mut0.1");
        assert_eq!(s.steps.len(), 1);
        assert_eq!(s.steps[0].trigger_generation, 0);
        assert_eq!(s.steps[0].assignments.population_size, Some(40));
        assert_eq!(s.steps[0].assignments.mutation_rate, Some(0.1));
        s.validate().unwrap();
    }

    #[test]
    fn small_kb_has_both_pilots() {
        let setup = Setup {
            g_c: 3,
            ..Setup::default()
        };
        let kb = build_default_kb(&setup, 2).unwrap();
        assert_eq!(kb.pilot_ids(), vec!["ackley", "gaussian"]);
        assert_eq!(kb.g_c(), Some(3));
        assert!(build_default_kb(&setup, 0).is_err());
        assert!(build_kb(&setup, &[], 2).is_err());
    }
}
