use std::path::Path;

use serde::Serialize;
use unopt_core::zne::benchmark::{
    benchmark_circuit, standard_comparisons, summarize, BenchmarkConfig, CircuitBenchmark, Comparison,
};
use unopt_core::Strategy;

use super::guard_inputs;
use crate::config::{ExperimentConfig, Overrides, Workload};
use crate::error::CliResult;
use crate::output::{fmt_f64, CsvSink, OutputDir, Stamp};

pub const RESULTS_FILE: &str = "benchmark.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const RESULT_COLUMNS: [&str; 7] = ["circuit", "strategy", "fit", "mode", "estimate", "ideal", "unmitigated"];

#[derive(Serialize)]
struct CellRow {
    strategy: Strategy,
    fit: unopt_core::zne::FitKind,
    mode: &'static str,
    rmse: f64,
    mean_error: f64,
    mean_estimate: f64,
}

#[derive(Serialize)]
struct Summary<'a> {
    #[serde(flatten)]
    stamp: Stamp,
    workload: &'a Workload,
    circuits: usize,
    mean_ideal: f64,
    unmitigated_rmse: f64,
    cells: Vec<CellRow>,
    comparisons: Vec<Comparison>,
}

fn mode(averaged: bool) -> &'static str {
    if averaged {
        "averaged"
    } else {
        "single"
    }
}

pub fn run(config_path: &Path, overrides: &Overrides) -> CliResult<()> {
    let mut cfg = ExperimentConfig::load(config_path)?;
    cfg.apply(overrides)?;
    let stamp = Stamp { config_sha256: cfg.sha256(), seed: cfg.seed };
    for name in [RESULTS_FILE, SUMMARY_FILE] {
        guard_inputs(&cfg.output_dir.join(name), &[config_path])?;
    }
    let mut dir = OutputDir::create(&cfg.output_dir, "benchmark", stamp)?;
    let result = execute(&cfg, &mut dir);
    if let Err(e) = &result {
        dir.abort(e);
    }
    result
}

/// Circuit `k` comes from substream `("circuit", k)` of the root stream and
/// is benchmarked on substream `("benchmark", k)`.
fn execute(cfg: &ExperimentConfig, dir: &mut OutputDir) -> CliResult<()> {
    let bench = BenchmarkConfig {
        strategies: cfg.benchmark_strategies(),
        fits: cfg.fits.clone(),
        iterations: cfg.iterations,
        variants: cfg.variants,
        noise: cfg.noise,
        shots: cfg.shots,
        method: cfg.method,
        optimizer: cfg.optimizer.clone(),
    };
    let rng = cfg.rng();
    let mut csv = CsvSink::create(&dir.path(RESULTS_FILE), dir.stamp(), &RESULT_COLUMNS)?;
    dir.record(RESULTS_FILE)?;
    let mut results: Vec<CircuitBenchmark> = Vec::with_capacity(cfg.circuits);
    for k in 0..cfg.circuits {
        let (circuit, observable) = cfg.workload.instance(k as u64, &rng)?;
        let r = benchmark_circuit(&circuit, &observable, &bench, &rng.substream("benchmark", k as u64))?;
        for e in &r.estimates {
            csv.row([
                k.to_string(),
                e.cell.strategy.to_string(),
                e.cell.fit.to_string(),
                mode(e.cell.averaged).to_string(),
                fmt_f64(e.estimate),
                fmt_f64(r.ideal),
                fmt_f64(r.unmitigated),
            ])?;
        }
        csv.flush()?;
        results.push(r);
    }

    let summary = summarize(&results)?;
    let mut cells = Vec::new();
    for c in &summary.cells {
        let mean_estimate =
            results.iter().filter_map(|r| r.estimate(c.cell)).sum::<f64>() / results.len() as f64;
        cells.push(CellRow {
            strategy: c.cell.strategy,
            fit: c.cell.fit,
            mode: mode(c.cell.averaged),
            rmse: c.rmse,
            mean_error: c.mean_error,
            mean_estimate,
        });
        println!("{:<32} rmse {}", c.cell.to_string(), fmt_f64(c.rmse));
    }
    println!("{:<32} rmse {}", "unmitigated", fmt_f64(summary.unmitigated_rmse));
    let report = Summary {
        stamp: dir.stamp().clone(),
        workload: &cfg.workload,
        circuits: summary.circuits,
        mean_ideal: results.iter().map(|r| r.ideal).sum::<f64>() / results.len() as f64,
        unmitigated_rmse: summary.unmitigated_rmse,
        cells,
        comparisons: standard_comparisons(&results)?,
    };
    dir.write_json(SUMMARY_FILE, &report)?;
    dir.finish()
}
