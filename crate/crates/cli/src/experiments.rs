use std::collections::BTreeMap;

use anyhow::{bail, ensure, Result};
use kiea_core::ga;
use kiea_core::{
    classify, derive_seed, record_fingerprint, run_baseline, run_kiea, ClassificationReport, GaParams, KieaRunConfig,
    KieaRunResult, KnowledgeBase, ObjectiveFunction, RunResult, Weights,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::{mean_std, Setup};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridCell {
    #[serde(rename = "pop")]
    pub population_size: usize,
    #[serde(rename = "mut")]
    pub mutation_rate: f64,
    pub mean_evaluations: f64,
    pub success_rate: f64,
    pub mean_best: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridReport {
    pub function: String,
    pub repetitions: usize,
    pub cells: Vec<GridCell>,
    /// Index of the cell with the lowest mean evaluations among the cells
    /// with the highest success rate.
    pub best: usize,
}

impl GridReport {
    pub fn best_cell(&self) -> &GridCell {
        &self.cells[self.best]
    }

    pub fn cell(&self, pop: usize, mutation: f64) -> Option<&GridCell> {
        self.cells
            .iter()
            .find(|c| c.population_size == pop && c.mutation_rate == mutation)
    }

    /// Whether `(pop, mutation)` is the best cell or matches its success rate
    /// with mean evaluations at most `tolerance` above it.
    pub fn ties_best(&self, pop: usize, mutation: f64, tolerance: f64) -> bool {
        let best = self.best_cell();
        self.cell(pop, mutation).is_some_and(|c| {
            c == best
                || (c.success_rate == best.success_rate
                    && c.mean_evaluations <= best.mean_evaluations * (1.0 + tolerance))
        })
    }
}

/// Runs `reps` plain GA runs per (population size, mutation rate) cell.
/// Repetition `r` uses seed `derive_seed(setup.seed, r)` in every cell.
pub fn strategy_grid(
    function: &ObjectiveFunction,
    setup: &Setup,
    pops: &[usize],
    mutations: &[f64],
    reps: usize,
) -> Result<GridReport> {
    ensure!(reps >= 1, "repetitions must be at least 1");
    ensure!(
        !pops.is_empty() && !mutations.is_empty(),
        "grid axes must not be empty"
    );
    let cells: Vec<GaParams> = pops
        .iter()
        .flat_map(|&p| {
            mutations.iter().map(move |&m| GaParams {
                population_size: p,
                mutation_rate: m,
                ..setup.s0
            })
        })
        .collect();
    for c in &cells {
        c.validate()?;
    }
    setup.budget.validate()?;

    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..reps).map(move |r| (c, r)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(c, r)| ga::run(function, &cells[c], None, &setup.budget, derive_seed(setup.seed, r as u64), |_| {}))
        .collect::<kiea_core::Result<Vec<RunResult>>>()?;

    let cells: Vec<GridCell> = cells
        .iter()
        .zip(results.chunks(reps))
        .map(|(params, runs)| {
            let n = runs.len() as f64;
            GridCell {
                population_size: params.population_size,
                mutation_rate: params.mutation_rate,
                mean_evaluations: runs.iter().map(|r| r.evaluations as f64).sum::<f64>() / n,
                success_rate: runs.iter().filter(|r| r.converged).count() as f64 / n,
                mean_best: runs.iter().map(|r| r.best_fitness).sum::<f64>() / n,
            }
        })
        .collect();
    let top = cells.iter().map(|c| c.success_rate).fold(f64::NEG_INFINITY, f64::max);
    let best = cells
        .iter()
        .enumerate()
        .filter(|(_, c)| c.success_rate == top)
        .min_by(|(_, a), (_, b)| a.mean_evaluations.total_cmp(&b.mean_evaluations))
        .map(|(i, _)| i)
        .expect("grid is not empty");
    Ok(GridReport {
        function: function.id.clone(),
        repetitions: reps,
        cells,
        best,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifyRow {
    pub index: usize,
    pub seed: u64,
    pub report: ClassificationReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifyMatrix {
    pub function: String,
    pub expected: Option<String>,
    pub weights: Weights,
    pub pilots: Vec<String>,
    pub rows: Vec<ClassifyRow>,
}

impl ClassifyMatrix {
    pub fn label_counts(&self) -> BTreeMap<String, usize> {
        let mut counts: BTreeMap<String, usize> = self.pilots.iter().map(|p| (p.clone(), 0)).collect();
        for row in &self.rows {
            *counts.entry(row.report.winner.clone()).or_default() += 1;
        }
        counts
    }

    /// Most frequent winner; ties go to the lexicographically first pilot.
    pub fn majority(&self) -> String {
        let counts = self.label_counts();
        let top = counts.values().copied().max().unwrap_or(0);
        counts
            .into_iter()
            .find(|(_, c)| *c == top)
            .map(|(k, _)| k)
            .unwrap_or_default()
    }

    /// Fraction of rows won by the expected pilot.
    pub fn success_rate(&self) -> Option<f64> {
        let expected = self.expected.as_ref()?;
        let hits = self.rows.iter().filter(|r| &r.report.winner == expected).count();
        Some(hits as f64 / self.rows.len() as f64)
    }

    pub fn reweighted(&self, weights: Weights) -> Self {
        Self {
            weights,
            rows: self
                .rows
                .iter()
                .map(|r| ClassifyRow {
                    report: r.report.reweighted(weights),
                    ..r.clone()
                })
                .collect(),
            ..self.clone()
        }
    }

    /// Success rate with each property's weight set to zero in turn.
    pub fn ablation_success(&self) -> Option<[f64; 6]> {
        self.expected.as_ref()?;
        let mut rates = [0.0; 6];
        for (k, rate) in rates.iter_mut().enumerate() {
            let mut w = self.weights;
            w.0[k] = 0.0;
            *rate = self.reweighted(w).success_rate()?;
        }
        Some(rates)
    }

    /// Standard deviation of [`Self::ablation_success`].
    pub fn ablation_std(&self) -> Option<f64> {
        self.ablation_success().map(|r| mean_std(&r).1)
    }
}

/// Records `reps` fresh fingerprints of `function` (seed `derive_seed(setup.seed, i)`)
/// and classifies each against `kb`.
pub fn classify_matrix(
    function: &ObjectiveFunction,
    kb: &KnowledgeBase,
    setup: &Setup,
    reps: usize,
    expected: Option<&str>,
) -> Result<ClassifyMatrix> {
    ensure!(reps >= 1, "repetitions must be at least 1");
    ensure!(
        kb.pilots.len() >= 2,
        "classification needs at least 2 pilots, the knowledge base has {}",
        kb.pilots.len()
    );
    if let Some(e) = expected {
        kb.pilot(e)?;
    }
    let g_c = kb.g_c().expect("non-empty knowledge base");
    let rows = (0..reps)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(setup.seed, i as u64);
            let fp = record_fingerprint(function, &setup.s0, g_c, &kb.cluster_params, seed)?;
            let report = classify(&fp, kb, setup.weights)?;
            Ok(ClassifyRow { index: i, seed, report })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ClassifyMatrix {
        function: function.id.clone(),
        expected: expected.map(str::to_string),
        weights: setup.weights,
        pilots: kb.pilot_ids().into_iter().map(str::to_string).collect(),
        rows,
    })
}

pub const ARMS: [&str; 2] = ["baseline", "kiea"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairedRow {
    pub rep: usize,
    pub seed: u64,
    pub arm: &'static str,
    pub evaluations: u64,
    pub generations: usize,
    pub converged: bool,
    pub best_fitness: f64,
    pub chosen_pilot: String,
    pub strategy_id: String,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArmSummary {
    pub arm: &'static str,
    /// Evaluation counts at the 1st, 7th, 13th, 19th and 25th of 25 sorted
    /// runs; other run counts use the same quartile positions.
    pub order_stats: [f64; 5],
    pub mean: f64,
    pub std: f64,
    pub success_rate: f64,
    pub wall_order_stats: [f64; 5],
    pub wall_mean: f64,
    pub wall_std: f64,
}

/// Sorted-sample values at positions 0, 1/4, 1/2, 3/4 and 1 of the range.
pub fn order_stats(values: &[f64]) -> [f64; 5] {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let last = v.len().saturating_sub(1);
    std::array::from_fn(|k| v.get(((k * last) as f64 / 4.0).round() as usize).copied().unwrap_or(f64::NAN))
}

impl ArmSummary {
    fn of(arm: &'static str, rows: &[&PairedRow]) -> Self {
        let evals: Vec<f64> = rows.iter().map(|r| r.evaluations as f64).collect();
        let wall: Vec<f64> = rows.iter().map(|r| r.wall_ms).collect();
        let (mean, std) = mean_std(&evals);
        let (wall_mean, wall_std) = mean_std(&wall);
        Self {
            arm,
            order_stats: order_stats(&evals),
            mean,
            std,
            success_rate: rows.iter().filter(|r| r.converged).count() as f64 / rows.len() as f64,
            wall_order_stats: order_stats(&wall),
            wall_mean,
            wall_std,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub function: String,
    pub repetitions: usize,
    /// Sorted by (seed, arm).
    pub rows: Vec<PairedRow>,
    pub baseline: ArmSummary,
    pub kiea: ArmSummary,
}

pub fn kiea_config(function: &ObjectiveFunction, setup: &Setup) -> KieaRunConfig {
    KieaRunConfig {
        function_id: function.id.clone(),
        s0: setup.s0,
        budget: setup.budget,
        g_c: setup.g_c,
        weights: setup.weights,
        seed: setup.seed,
    }
}

/// Paired baseline and two-stage runs; repetition `i` gives both arms seed
/// `derive_seed(setup.seed, i)`.
pub fn convergence_compare(
    function: &ObjectiveFunction,
    kb: &KnowledgeBase,
    setup: &Setup,
    reps: usize,
) -> Result<ConvergenceReport> {
    ensure!(reps >= 1, "repetitions must be at least 1");
    if kb.pilots.is_empty() {
        bail!("the knowledge base has no pilots");
    }
    let pairs = (0..reps)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(setup.seed, i as u64);
            let cfg = kiea_config(function, &setup.with_seed(seed));
            let base = run_baseline(function, &cfg)?;
            let kiea = run_kiea(function, &cfg, kb)?;
            let row = |arm, r: RunResult, pilot: String| PairedRow {
                rep: i,
                seed,
                arm,
                evaluations: r.evaluations,
                generations: r.generations,
                converged: r.converged,
                best_fitness: r.best_fitness,
                chosen_pilot: pilot,
                strategy_id: r.strategy_id,
                wall_ms: r.wall_ms,
            };
            Ok([
                row(ARMS[0], base, String::new()),
                row(ARMS[1], kiea.run, kiea.chosen_pilot),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<PairedRow> = pairs.into_iter().flatten().collect();
    rows.sort_by(|a, b| (a.seed, a.arm).cmp(&(b.seed, b.arm)));
    let arm_rows = |arm| rows.iter().filter(|r| r.arm == arm).collect::<Vec<_>>();
    let baseline = ArmSummary::of(ARMS[0], &arm_rows(ARMS[0]));
    let kiea = ArmSummary::of(ARMS[1], &arm_rows(ARMS[1]));
    Ok(ConvergenceReport {
        function: function.id.clone(),
        repetitions: reps,
        rows,
        baseline,
        kiea,
    })
}

/// One two-stage run with `setup.seed`.
pub fn single_run(function: &ObjectiveFunction, kb: &KnowledgeBase, setup: &Setup) -> Result<KieaRunResult> {
    Ok(run_kiea(function, &kiea_config(function, setup), kb)?)
}
