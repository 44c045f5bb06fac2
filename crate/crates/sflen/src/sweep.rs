//! Seeded sweeps over context lengths `L = round(T^q)`.

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde_json::json;
use sflen_core::aggregate::{aggregate, Aggregate};
use sflen_core::filterbank::FilterBank;
use sflen_core::lds::{conditioning_check, conditioning_threshold, gen_inputs, make_random_system, sample_region, simulate, Conditioning};
use sflen_core::learner::{context_from_q, run_online, PredictorSpec};
use sflen_core::regret::{asymmetric_regret, solve_comparator, ComparatorResult, RegretReport};
use sflen_core::{LdsSystem, Sequence};

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::formats::{aggregate_csv, fmt_f64, loss_table, write_text};
use crate::{bank_for, stream_seed};

/// Everything derived from one seed before any learner runs.
#[derive(Debug, Clone)]
pub struct SeedData {
    pub seed: u64,
    pub system: LdsSystem,
    pub inputs: Sequence,
    pub outputs: Sequence,
    pub conditioning: Conditioning,
    pub comparator: Option<ComparatorResult>,
}

#[derive(Debug, Clone)]
pub struct CellRun {
    pub losses: Vec<f64>,
    pub prediction_norms: Vec<f64>,
    pub cumulative: Vec<f64>,
    pub max_slot_norm: f64,
    pub regret: Option<RegretReport>,
}

#[derive(Debug, Clone)]
pub struct Cell {
    pub q: f64,
    pub seed: u64,
    pub context: usize,
    pub outcome: std::result::Result<CellRun, String>,
}

#[derive(Debug, Clone)]
pub struct QAggregate {
    pub q: f64,
    pub context: usize,
    /// Seeds whose runs succeeded and enter the mean.
    pub seeds: Vec<u64>,
    pub aggregate: Option<Aggregate>,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub config: ExperimentConfig,
    pub bank: FilterBank,
    pub seeds: Vec<std::result::Result<SeedData, (u64, String)>>,
    /// Sorted by `(q, seed)`.
    pub cells: Vec<Cell>,
    pub aggregates: Vec<QAggregate>,
}

impl SweepResult {
    pub fn all_succeeded(&self) -> bool {
        self.cells.iter().all(|c| c.outcome.is_ok())
    }

    pub fn aggregate_for(&self, q: f64) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.q == q)?.aggregate.as_ref()
    }
}

/// Runs `f` on every item with at most `jobs` threads. Results keep the item order.
pub fn par_map<T: Sync, R: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<R>>> = items.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|s| {
        for _ in 0..jobs.clamp(1, items.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                *slots[i].lock().unwrap() = Some(r);
            });
        }
    });
    slots.into_iter().map(|m| m.into_inner().unwrap().expect("every item processed")).collect()
}

/// System, inputs, outputs, conditioning and comparator for one seed.
pub fn prepare_seed(cfg: &ExperimentConfig, bank: &FilterBank, seed: u64) -> Result<SeedData> {
    let region = cfg.region.resolve(cfg.horizon, cfg.region_q)?;
    let eig = sample_region(&region, cfg.d_hidden, stream_seed(seed, 0))?;
    let system = make_random_system(cfg.d_hidden, cfg.d_in, cfg.d_out, &eig, stream_seed(seed, 1), cfg.d_kind.0)?;
    let inputs = gen_inputs(cfg.inputs.0, cfg.d_in, cfg.horizon, stream_seed(seed, 2))?;
    let conditioning = conditioning_check(&inputs, conditioning_threshold(&system, cfg.horizon))?;
    let outputs = simulate(&system, &inputs, None)?;
    let comparator = if cfg.skip_comparator {
        None
    } else {
        let spec = predictor_spec(cfg, cfg.horizon)?;
        Some(solve_comparator(&spec, bank, &inputs.values, &outputs, cfg.tol_opt)?)
    };
    Ok(SeedData { seed, system, inputs: inputs.values, outputs, conditioning, comparator })
}

pub fn predictor_spec(cfg: &ExperimentConfig, context: usize) -> Result<PredictorSpec> {
    let spec = PredictorSpec::new(cfg.variant.0, cfg.horizon, context, cfg.k, cfg.r)?;
    Ok(match cfg.eta0 {
        Some(e) => spec.with_eta0(e)?,
        None => spec,
    })
}

fn run_cell(cfg: &ExperimentConfig, bank: &FilterBank, data: &SeedData, context: usize) -> Result<CellRun> {
    let spec = predictor_spec(cfg, context)?;
    let run = run_online(&spec, bank, &data.inputs, &data.outputs)?;
    let regret = data.comparator.as_ref().map(|c| asymmetric_regret(&run, c)).transpose()?;
    Ok(CellRun { max_slot_norm: run.max_slot_norm, regret, losses: run.losses, prediction_norms: run.prediction_norms, cumulative: run.cumulative })
}

/// Per-seed preparation, then every `(q, seed)` cell, each stage on a pool of
/// `jobs` threads. Cell failures are recorded and the sweep continues; only an
/// invalid config or a failed filter bank aborts.
pub fn run_sweep(cfg: &ExperimentConfig, jobs: usize) -> Result<SweepResult> {
    cfg.validate()?;
    let bank = bank_for(cfg.variant.0, cfg.horizon, cfg.k)?;
    let seeds = par_map(&cfg.seeds, jobs, |&s| prepare_seed(cfg, &bank, s).map_err(|e| (s, e.to_string())));

    let mut grid: Vec<(f64, u64, usize)> = Vec::new();
    for &q in &cfg.q_grid {
        for (i, _) in cfg.seeds.iter().enumerate() {
            grid.push((q, cfg.seeds[i], i));
        }
    }
    grid.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let cells = par_map(&grid, jobs, |&(q, seed, i)| {
        let context = context_from_q(cfg.horizon, q);
        let outcome = match &seeds[i] {
            Ok(data) => run_cell(cfg, &bank, data, context).map_err(|e| e.to_string()),
            Err((_, e)) => Err(format!("seed preparation failed: {e}")),
        };
        Cell { q, seed, context, outcome }
    });

    let mut qs = cfg.q_grid.clone();
    qs.sort_by(f64::total_cmp);
    let window = cfg.window();
    let aggregates = qs
        .iter()
        .map(|&q| {
            let ok: Vec<&Cell> = cells.iter().filter(|c| c.q == q && c.outcome.is_ok()).collect();
            let curves: Vec<&[f64]> = ok.iter().map(|c| c.outcome.as_ref().unwrap().losses.as_slice()).collect();
            QAggregate {
                q,
                context: context_from_q(cfg.horizon, q),
                seeds: ok.iter().map(|c| c.seed).collect(),
                aggregate: aggregate(&curves, window).ok(),
            }
        })
        .collect();
    Ok(SweepResult { config: cfg.clone(), bank, seeds, cells, aggregates })
}

fn q_label(q: f64) -> String {
    format!("{q}")
}

/// `runs/<q>_<seed>.csv`, `aggregate_<q>.csv`, `regret.csv` and `manifest.json`.
pub fn write_sweep(result: &SweepResult, out: &Path) -> Result<()> {
    let cfg = &result.config;
    let mut regret = String::from("q,seed,learner_loss,comparator_loss,regret\n");
    let mut cells = Vec::new();
    for c in &result.cells {
        let file = format!("runs/{}_{}.csv", q_label(c.q), c.seed);
        let mut entry = json!({"q": c.q, "seed": c.seed, "L": c.context});
        match &c.outcome {
            Ok(run) => {
                write_text(&out.join(&file), &loss_table(&run.losses, &run.cumulative, &run.prediction_norms))?;
                entry["status"] = json!("ok");
                entry["file"] = json!(file);
                entry["total_loss"] = json!(run.cumulative.last().copied().unwrap_or(0.0));
                entry["max_slot_norm"] = json!(run.max_slot_norm);
                if let Some(r) = &run.regret {
                    regret.push_str(&format!("{},{},{},{},{}\n", q_label(c.q), c.seed, fmt_f64(r.learner_loss), fmt_f64(r.comparator_loss), fmt_f64(r.regret)));
                    entry["regret"] = json!(r.regret);
                }
            }
            Err(e) => {
                entry["status"] = json!("failed");
                entry["error"] = json!(e);
            }
        }
        cells.push(entry);
    }
    if !cfg.skip_comparator {
        write_text(&out.join("regret.csv"), &regret)?;
    }
    let mut aggregates = Vec::new();
    for a in &result.aggregates {
        let mut entry = json!({"q": a.q, "L": a.context, "seeds": a.seeds});
        if let Some(agg) = &a.aggregate {
            let file = format!("aggregate_{}.csv", q_label(a.q));
            write_text(&out.join(&file), &aggregate_csv(&agg.mean, &agg.smoothed))?;
            entry["file"] = json!(file);
            entry["final_window_loss"] = json!(agg.final_window);
        }
        aggregates.push(entry);
    }
    let seeds: Vec<_> = result
        .seeds
        .iter()
        .map(|s| match s {
            Ok(d) => {
                let mut e = json!({
                    "seed": d.seed,
                    "status": "ok",
                    "conditioning": {"min_eigenvalue": d.conditioning.min_eigenvalue, "threshold": d.conditioning.threshold, "pass": d.conditioning.pass},
                    "norm_B": d.system.norm_b(),
                    "norm_C": d.system.norm_c(),
                });
                if let Some(c) = &d.comparator {
                    let g = &c.diagnostics;
                    e["comparator"] = json!({
                        "loss": c.total_loss, "converged": g.converged, "iterations": g.iterations,
                        "kkt_residual": g.kkt_residual, "duality_gap": g.duality_gap, "active_slots": g.active,
                    });
                }
                e
            }
            Err((seed, err)) => json!({"seed": seed, "status": "failed", "error": err}),
        })
        .collect();
    // null when the predictor itself is invalid; the cells carry the error
    let spec = predictor_spec(cfg, cfg.horizon).ok();
    let manifest = json!({
        "config": cfg,
        "resolved": {"window": cfg.window(), "eta0": spec.as_ref().map(|s| s.eta0), "slots": spec.as_ref().map(|s| s.slots())},
        "bank": {"kind": result.bank.kind().as_str(), "T": result.bank.horizon(), "k": result.bank.k(), "filters": result.bank.num_filters(),
                 "slot_order": "direct slots first, then filters in order; tensor filters row-major in (i, j)"},
        "seeds": seeds,
        "cells": cells,
        "aggregates": aggregates,
        "all_succeeded": result.all_succeeded(),
    });
    write_text(&out.join("manifest.json"), &(serde_json::to_string_pretty(&manifest).expect("plain JSON values") + "\n"))
}
