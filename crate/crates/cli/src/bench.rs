//! Benchmark harness: one extraction per (instance, strategy), written as
//! CSV rows followed by per-strategy summary rows.

use std::io::{Read, Write};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use anyhow::Result;
use chorex_core::{extract_detailed, ExtractOptions, FailureKind, Stats, Strategy};
use serde::{Deserialize, Serialize};

use crate::suites::Instance;

/// Column names, in order.
pub const HEADER: [&str; 7] = ["name", "strategy", "time_msec", "nodes", "badloops", "extractable", "failure"];

/// Name of the summary rows appended after the per-run rows.
pub const SUMMARY: &str = "#summary";

pub const DEFAULT_TIMEOUT_MS: u64 = 60_000;

/// One extraction run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub name: String,
    pub strategy: String,
    pub time_msec: f64,
    pub nodes: usize,
    pub badloops: usize,
    pub extractable: bool,
    /// Empty when extractable.
    pub failure: String,
}

impl BenchRow {
    pub fn new(name: &str, strategy: Strategy, stats: &Stats) -> Self {
        BenchRow {
            name: name.to_string(),
            strategy: strategy.code().to_string(),
            time_msec: stats.elapsed_millis(),
            nodes: stats.nodes_created,
            badloops: stats.bad_loop_hits,
            extractable: stats.extractable,
            failure: stats.failure.map(|f| f.to_string()).unwrap_or_default(),
        }
    }

    pub fn failure_kind(&self) -> Option<FailureKind> {
        [
            FailureKind::NotWellFormed,
            FailureKind::UnknownService,
            FailureKind::Deadlock,
            FailureKind::BadLoopExhaustion,
            FailureKind::Timeout,
        ]
        .into_iter()
        .find(|k| k.to_string() == self.failure)
    }
}

/// Aggregate over the runs of one strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub strategy: String,
    pub runs: usize,
    pub extractable_pct: f64,
    pub mean_time_msec: f64,
    pub mean_nodes: f64,
    pub mean_badloops: f64,
}

pub fn summarize(rows: &[BenchRow], strategies: &[Strategy]) -> Vec<Summary> {
    strategies
        .iter()
        .map(|s| {
            let mine: Vec<&BenchRow> = rows.iter().filter(|r| r.strategy == s.code()).collect();
            let n = mine.len().max(1) as f64;
            let mean = |f: &dyn Fn(&BenchRow) -> f64| mine.iter().map(|r| f(r)).sum::<f64>() / n;
            Summary {
                strategy: s.code().to_string(),
                runs: mine.len(),
                extractable_pct: 100.0 * mine.iter().filter(|r| r.extractable).count() as f64 / n,
                mean_time_msec: mean(&|r| r.time_msec),
                mean_nodes: mean(&|r| r.nodes as f64),
                mean_badloops: mean(&|r| r.badloops as f64),
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub strategies: Vec<Strategy>,
    pub seed: u64,
    pub jobs: usize,
    pub timeout: Duration,
    pub split: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            strategies: Strategy::ALL.to_vec(),
            seed: 0,
            jobs: 1,
            timeout: Duration::from_millis(DEFAULT_TIMEOUT_MS),
            split: true,
        }
    }
}

/// Extracts every instance under every strategy. Rows come back in
/// (instance, strategy) order whatever the number of jobs.
pub fn run(instances: &[Instance], cfg: &BenchConfig) -> Vec<BenchRow> {
    let tasks: Vec<(&Instance, Strategy)> =
        instances.iter().flat_map(|i| cfg.strategies.iter().map(move |&s| (i, s))).collect();
    let next = AtomicUsize::new(0);
    let results = Mutex::new(vec![None; tasks.len()]);
    std::thread::scope(|scope| {
        for _ in 0..cfg.jobs.clamp(1, tasks.len().max(1)) {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(inst, s)) = tasks.get(k) else { break };
                let opts = ExtractOptions::new(s).seed(cfg.seed).split(cfg.split).timeout(Some(cfg.timeout));
                let ex = extract_detailed(&inst.network, &opts);
                results.lock().expect("no poisoned writer")[k] = Some(BenchRow::new(&inst.name, s, &ex.stats));
            });
        }
    });
    results.into_inner().expect("no poisoned writer").into_iter().map(|r| r.expect("every task ran")).collect()
}

/// Writes the header, the rows and one summary row per strategy. An empty
/// run writes the header only.
pub fn write_csv(out: impl Write, rows: &[BenchRow], strategies: &[Strategy]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    if !rows.is_empty() {
        for s in summarize(rows, strategies) {
            w.write_record([
                SUMMARY.to_string(),
                s.strategy,
                format!("{:.3}", s.mean_time_msec),
                format!("{:.1}", s.mean_nodes),
                format!("{:.2}", s.mean_badloops),
                format!("{:.1}%", s.extractable_pct),
                String::new(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads the per-run rows back, skipping summary rows.
pub fn read_csv(input: impl Read) -> Result<Vec<BenchRow>> {
    let mut r = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if rec.get(0) == Some(SUMMARY) {
            continue;
        }
        rows.push(rec.deserialize(None)?);
    }
    Ok(rows)
}
