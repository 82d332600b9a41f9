//! Two-stage knowledge-integrated run.
//!
//! Stage 1 runs the GA under the initial parameters for `g_c` generations
//! while recording a fingerprint. The fingerprint is classified against the
//! knowledge base and the winning pilot's strategy, re-based so that its
//! trigger 0 fires at generation `g_c`, drives the rest of the same run.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::classifier::{classify, ClassificationReport, Weights};
use crate::error::{Error, Result};
use crate::fingerprint::Fingerprint;
use crate::ga::{self, GaParams, GaRun, Population, RunBudget, RunResult, Strategy};
use crate::knowledge_base::KnowledgeBase;
use crate::objective::ObjectiveFunction;

/// Marks runs that stopped before classification.
pub const NO_PILOT: &str = "none";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KieaRunConfig {
    pub function_id: String,
    pub s0: GaParams,
    pub budget: RunBudget,
    pub g_c: usize,
    pub weights: Weights,
    pub seed: u64,
}

impl KieaRunConfig {
    pub fn validate(&self) -> Result<()> {
        self.s0.validate()?;
        self.budget.validate()?;
        if self.g_c < 2 {
            return Err(Error::InvalidConfig(format!("G_C = {} must be at least 2", self.g_c)));
        }
        if self.g_c >= self.budget.max_generations {
            return Err(Error::InvalidConfig(format!(
                "G_C = {} must be below max_generations = {}",
                self.g_c, self.budget.max_generations
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KieaRunResult {
    pub run: RunResult,
    pub report: Option<ClassificationReport>,
    pub chosen_pilot: String,
    pub strategy_applied: Option<Strategy>,
    pub stage1_evaluations: u64,
    #[serde(skip)]
    pub fingerprint: Option<Fingerprint>,
    /// Population when stage 1 ended.
    #[serde(skip)]
    pub stage1_population: Option<Population>,
}

/// Runs the full two-stage procedure on `function` with `kb`.
pub fn run_kiea(function: &ObjectiveFunction, cfg: &KieaRunConfig, kb: &KnowledgeBase) -> Result<KieaRunResult> {
    cfg.validate()?;
    if kb.pilots.is_empty() {
        return Err(Error::EmptyKnowledgeBase);
    }
    if kb.g_c() != Some(cfg.g_c) {
        return Err(Error::InvalidConfig(format!(
            "G_C = {} does not match the knowledge base ({:?})",
            cfg.g_c,
            kb.g_c()
        )));
    }
    let started = Instant::now();
    let mut state = GaRun::new(function, cfg.s0, cfg.seed)?;
    let mut fingerprint = Fingerprint::new(function.id.clone(), kb.cluster_params, cfg.s0, cfg.g_c)?;

    let mut early_stop = None;
    while state.generation() < cfg.g_c {
        if let Some(converged) = state.stop_reason(&cfg.budget) {
            early_stop = Some(converged);
            break;
        }
        state.step();
        fingerprint.record_generation(state.population(), &function.domain)?;
    }
    if early_stop.is_none() {
        early_stop = state.stop_reason(&cfg.budget);
    }
    let stage1_evaluations = state.evaluations();
    let stage1_population = Some(state.population().clone());

    let finish = |state: &GaRun, strategy_id: String, converged: bool| RunResult {
        function: function.id.clone(),
        seed: cfg.seed,
        strategy_id,
        evaluations: state.evaluations(),
        generations: state.generation(),
        best_fitness: state.best_fitness(),
        converged,
        wall_ms: started.elapsed().as_secs_f64() * 1e3,
    };

    if let Some(converged) = early_stop {
        return Ok(KieaRunResult {
            run: finish(&state, NO_PILOT.to_string(), converged),
            report: None,
            chosen_pilot: NO_PILOT.to_string(),
            strategy_applied: None,
            stage1_evaluations,
            fingerprint: Some(fingerprint),
            stage1_population,
        });
    }

    let report = classify(&fingerprint, kb, cfg.weights)?;
    let strategy = kb.get_strategy(&report.winner)?.clone();
    let converged = state.run_until(Some(&strategy.rebased(cfg.g_c)), &cfg.budget, |_| {})?;
    Ok(KieaRunResult {
        run: finish(&state, strategy.id.clone(), converged),
        chosen_pilot: report.winner.clone(),
        report: Some(report),
        strategy_applied: Some(strategy),
        stage1_evaluations,
        fingerprint: Some(fingerprint),
        stage1_population,
    })
}

/// Plain GA under `s0` for the whole budget, seeded like [`run_kiea`].
pub fn run_baseline(function: &ObjectiveFunction, cfg: &KieaRunConfig) -> Result<RunResult> {
    run_baseline_with(function, cfg, |_| {})
}

/// [`run_baseline`] with an observer called after every generation.
pub fn run_baseline_with<O>(function: &ObjectiveFunction, cfg: &KieaRunConfig, observer: O) -> Result<RunResult>
where
    O: FnMut(&Population),
{
    cfg.validate()?;
    ga::run(function, &cfg.s0, None, &cfg.budget, cfg.seed, observer)
}
