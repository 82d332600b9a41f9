//! CSV and JSON files written by the harness.
//!
//! Wall-clock columns stay empty (and JSON fields `null`) unless asked for,
//! so that repeated runs with one seed produce identical files.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use kiea_core::KieaRunResult;
use serde::Serialize;
use serde_json::{json, Value};

use crate::experiments::{ClassifyMatrix, ConvergenceReport, GridReport};

pub const GRID_CSV: &str = "grid.csv";
pub const GRID_JSON: &str = "grid.json";
pub const CLASSIFY_CSV: &str = "classify.csv";
pub const CLASSIFY_JSON: &str = "classify.json";
pub const CONVERGENCE_CSV: &str = "convergence.csv";
pub const CONVERGENCE_SUMMARY_CSV: &str = "convergence_summary.csv";
pub const RUN_CSV: &str = "run.csv";
pub const RUN_JSON: &str = "run.json";

const ORDER_LABELS: [&str; 5] = ["1st", "7th", "13th", "19th", "25th"];

fn prepare(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))
}

fn wall(ms: f64, enabled: bool) -> Option<f64> {
    enabled.then_some(ms)
}

/// `grid.csv` with one row per cell and `grid.json` naming the best cell.
pub fn write_grid(dir: &Path, report: &GridReport) -> Result<Vec<PathBuf>> {
    prepare(dir)?;
    let csv_path = dir.join(GRID_CSV);
    let mut w = csv_writer(&csv_path)?;
    for cell in &report.cells {
        w.serialize(cell)?;
    }
    w.flush()?;
    let json_path = dir.join(GRID_JSON);
    write_json(
        &json_path,
        &json!({
            "function": report.function,
            "repetitions": report.repetitions,
            "best": report.best_cell(),
            "cells": report.cells,
        }),
    )?;
    Ok(vec![csv_path, json_path])
}

/// `classify.csv` with the votes and mean totals of every classified
/// fingerprint, and `classify.json` with the summary.
pub fn write_classify(dir: &Path, matrix: &ClassifyMatrix) -> Result<Vec<PathBuf>> {
    prepare(dir)?;
    let csv_path = dir.join(CLASSIFY_CSV);
    let mut w = csv_writer(&csv_path)?;
    let mut header = vec!["index".to_string(), "seed".to_string(), "winner".to_string()];
    header.extend(matrix.pilots.iter().map(|p| format!("votes_{p}")));
    header.extend(matrix.pilots.iter().map(|p| format!("mean_total_{p}")));
    w.write_record(&header)?;
    for row in &matrix.rows {
        let r = &row.report;
        let mut record = vec![row.index.to_string(), row.seed.to_string(), r.winner.clone()];
        record.extend(matrix.pilots.iter().map(|p| r.vote_fractions[p].to_string()));
        record.extend(matrix.pilots.iter().map(|p| r.per_pilot_mean_totals[p].to_string()));
        w.write_record(&record)?;
    }
    w.flush()?;
    let json_path = dir.join(CLASSIFY_JSON);
    write_json(
        &json_path,
        &json!({
            "function": matrix.function,
            "expected": matrix.expected,
            "weights": matrix.weights,
            "repetitions": matrix.rows.len(),
            "label_counts": matrix.label_counts(),
            "majority": matrix.majority(),
            "success_rate": matrix.success_rate(),
            "ablation_success": matrix.ablation_success(),
            "ablation_std": matrix.ablation_std(),
        }),
    )?;
    Ok(vec![csv_path, json_path])
}

#[derive(Serialize)]
struct PairedCsvRow<'a> {
    rep: usize,
    seed: u64,
    arm: &'a str,
    evaluations: u64,
    generations: usize,
    converged: bool,
    best_fitness: f64,
    chosen_pilot: &'a str,
    strategy_id: &'a str,
    wall_ms: Option<f64>,
}

/// `convergence.csv` with one row per run (sorted by seed, then arm) and
/// `convergence_summary.csv` with order statistics, mean and standard
/// deviation per arm.
pub fn write_convergence(dir: &Path, report: &ConvergenceReport, wall_clock: bool) -> Result<Vec<PathBuf>> {
    prepare(dir)?;
    let rows_path = dir.join(CONVERGENCE_CSV);
    let mut w = csv_writer(&rows_path)?;
    for r in &report.rows {
        w.serialize(PairedCsvRow {
            rep: r.rep,
            seed: r.seed,
            arm: r.arm,
            evaluations: r.evaluations,
            generations: r.generations,
            converged: r.converged,
            best_fitness: r.best_fitness,
            chosen_pilot: &r.chosen_pilot,
            strategy_id: &r.strategy_id,
            wall_ms: wall(r.wall_ms, wall_clock),
        })?;
    }
    w.flush()?;

    let summary_path = dir.join(CONVERGENCE_SUMMARY_CSV);
    let mut w = csv_writer(&summary_path)?;
    w.write_record(["stat", "baseline", "kiea"])?;
    let (b, k) = (&report.baseline, &report.kiea);
    let mut stats: Vec<(String, f64, f64)> = ORDER_LABELS
        .iter()
        .enumerate()
        .map(|(i, l)| (l.to_string(), b.order_stats[i], k.order_stats[i]))
        .collect();
    stats.push(("mean".into(), b.mean, k.mean));
    stats.push(("std".into(), b.std, k.std));
    stats.push(("success_rate".into(), b.success_rate, k.success_rate));
    if wall_clock {
        stats.extend(
            ORDER_LABELS
                .iter()
                .enumerate()
                .map(|(i, l)| (format!("wall_ms_{l}"), b.wall_order_stats[i], k.wall_order_stats[i])),
        );
        stats.push(("wall_ms_mean".into(), b.wall_mean, k.wall_mean));
        stats.push(("wall_ms_std".into(), b.wall_std, k.wall_std));
    }
    for (name, base, kiea) in stats {
        w.write_record([name, base.to_string(), kiea.to_string()])?;
    }
    w.flush()?;
    Ok(vec![rows_path, summary_path])
}

#[derive(Serialize)]
struct RunCsvRow<'a> {
    function: &'a str,
    seed: u64,
    strategy_id: &'a str,
    evaluations: u64,
    generations: usize,
    best_fitness: f64,
    converged: bool,
    wall_ms: Option<f64>,
}

/// `run.csv` with the run result and `run.json` with the full result,
/// including the classification report.
pub fn write_run(dir: &Path, result: &KieaRunResult, wall_clock: bool) -> Result<Vec<PathBuf>> {
    prepare(dir)?;
    let run = &result.run;
    let csv_path = dir.join(RUN_CSV);
    let mut w = csv_writer(&csv_path)?;
    w.serialize(RunCsvRow {
        function: &run.function,
        seed: run.seed,
        strategy_id: &run.strategy_id,
        evaluations: run.evaluations,
        generations: run.generations,
        best_fitness: run.best_fitness,
        converged: run.converged,
        wall_ms: wall(run.wall_ms, wall_clock),
    })?;
    w.flush()?;

    let mut value = serde_json::to_value(result)?;
    if !wall_clock {
        value["run"]["wall_ms"] = Value::Null;
    }
    let json_path = dir.join(RUN_JSON);
    write_json(&json_path, &value)?;
    Ok(vec![csv_path, json_path])
}
