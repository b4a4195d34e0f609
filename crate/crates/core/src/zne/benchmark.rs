//! Ensemble benchmark: ZNE estimates per (strategy × fit × averaging) cell
//! against the noiseless value and the unmitigated estimate.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::stats::{ensemble_rmse, sign_test, SignTest};
use super::{average_fits, fit, variant_sweeps, FitKind, Observable, SweepConfig};
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::optimizer::{optimize, OptimizerConfig};
use crate::rng::RngStream;
use crate::simulator::{sample, NoiseModel, SimMethod};
use crate::unoptimizer::Strategy;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub strategies: Vec<Strategy>,
    pub fits: Vec<FitKind>,
    pub iterations: usize,
    /// Chains per strategy; the first one doubles as the single-run cell.
    pub variants: usize,
    pub noise: NoiseModel,
    pub shots: u64,
    pub method: SimMethod,
    pub optimizer: OptimizerConfig,
}

impl BenchmarkConfig {
    fn sweep_config(&self, strategy: Strategy) -> SweepConfig {
        SweepConfig {
            strategy,
            iterations: self.iterations,
            noise: self.noise,
            shots: self.shots,
            method: self.method,
            optimizer: self.optimizer.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub strategy: Strategy,
    pub fit: FitKind,
    /// Mean over all variants rather than the first chain alone.
    pub averaged: bool,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mode = if self.averaged { "averaged" } else { "single" };
        write!(f, "{}/{}/{}", self.strategy, self.fit, mode)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellEstimate {
    pub cell: Cell,
    pub estimate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitBenchmark {
    pub ideal: f64,
    /// Noisy estimate of the optimized input circuit.
    pub unmitigated: f64,
    pub estimates: Vec<CellEstimate>,
}

impl CircuitBenchmark {
    pub fn estimate(&self, cell: Cell) -> Option<f64> {
        self.estimates.iter().find(|e| e.cell == cell).map(|e| e.estimate)
    }
}

/// All cells for one circuit. Strategy `s` runs its variants on substream
/// `(s, 0)` and the unmitigated estimate uses `("unmitigated", 0)`.
pub fn benchmark_circuit(
    c: &Circuit,
    observable: &Observable,
    cfg: &BenchmarkConfig,
    rng: &RngStream,
) -> Result<CircuitBenchmark> {
    let ideal = observable.ideal_value(c)?;
    let base = optimize(c, &cfg.optimizer)?;
    let record = sample(&base, &cfg.noise, cfg.shots, &rng.substream("unmitigated", 0), cfg.method)?;
    let unmitigated = observable.evaluate(&record)?.0;
    let mut estimates = Vec::new();
    for &strategy in &cfg.strategies {
        let datasets = variant_sweeps(c, observable, &cfg.sweep_config(strategy), cfg.variants, &rng.substream(strategy.name(), 0))?;
        for &kind in &cfg.fits {
            let single = fit(&datasets[0], kind)?.zero_noise_value;
            let averaged = average_fits(&datasets, kind)?.mean_zero_noise;
            estimates.push(CellEstimate { cell: Cell { strategy, fit: kind, averaged: false }, estimate: single });
            estimates.push(CellEstimate { cell: Cell { strategy, fit: kind, averaged: true }, estimate: averaged });
        }
    }
    Ok(CircuitBenchmark { ideal, unmitigated, estimates })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub cell: Cell,
    pub rmse: f64,
    pub mean_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSummary {
    pub circuits: usize,
    pub unmitigated_rmse: f64,
    pub cells: Vec<CellSummary>,
}

impl BenchmarkSummary {
    pub fn cell(&self, cell: Cell) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.cell == cell)
    }
}

/// Absolute errors of one cell across the ensemble.
pub fn cell_errors(results: &[CircuitBenchmark], cell: Cell) -> Result<Vec<f64>> {
    results
        .iter()
        .map(|r| {
            r.estimate(cell)
                .map(|e| (e - r.ideal).abs())
                .ok_or_else(|| Error::InvalidArgument(format!("cell {cell} missing")))
        })
        .collect()
}

pub fn summarize(results: &[CircuitBenchmark]) -> Result<BenchmarkSummary> {
    let first = results.first().ok_or_else(|| Error::InvalidArgument("empty ensemble".into()))?;
    let ideal: Vec<f64> = results.iter().map(|r| r.ideal).collect();
    let unmitigated: Vec<f64> = results.iter().map(|r| r.unmitigated).collect();
    let mut cells = Vec::new();
    for e in &first.estimates {
        let est: Vec<f64> = results
            .iter()
            .map(|r| r.estimate(e.cell).ok_or_else(|| Error::InvalidArgument(format!("cell {} missing", e.cell))))
            .collect::<Result<_>>()?;
        let mean_error = est.iter().zip(&ideal).map(|(a, b)| a - b).sum::<f64>() / est.len() as f64;
        cells.push(CellSummary { cell: e.cell, rmse: ensemble_rmse(&ideal, &est)?, mean_error });
    }
    Ok(BenchmarkSummary { circuits: results.len(), unmitigated_rmse: ensemble_rmse(&ideal, &unmitigated)?, cells })
}

/// Paired comparison of two groups of cells across an ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub name: String,
    /// Mean RMSE of the cells expected to do better.
    pub better_rmse: f64,
    pub worse_rmse: f64,
    /// Whether the expected-better cells have the smaller absolute error,
    /// over every (circuit, pair) combination.
    pub sign_test: SignTest,
}

/// Pools the per-circuit absolute errors of each `(better, worse)` pair.
pub fn compare(results: &[CircuitBenchmark], name: &str, pairs: &[(Cell, Cell)]) -> Result<Comparison> {
    if pairs.is_empty() {
        return Err(Error::InvalidArgument(format!("comparison {name} has no cell pairs")));
    }
    let summary = summarize(results)?;
    let rmse = |c: Cell| {
        summary.cell(c).map(|s| s.rmse).ok_or_else(|| Error::InvalidArgument(format!("cell {c} missing")))
    };
    let (mut a, mut b) = (Vec::new(), Vec::new());
    let (mut better_rmse, mut worse_rmse) = (0.0, 0.0);
    for &(better, worse) in pairs {
        a.extend(cell_errors(results, better)?);
        b.extend(cell_errors(results, worse)?);
        better_rmse += rmse(better)? / pairs.len() as f64;
        worse_rmse += rmse(worse)? / pairs.len() as f64;
    }
    Ok(Comparison { name: name.to_string(), better_rmse, worse_rmse, sign_test: sign_test(&a, &b)? })
}

/// The three orderings of interest, each over the cells the benchmark
/// produced: quadratic against linear fits, variant averaging against a
/// single chain, and the random against the concatenated strategy (both
/// averaged). Comparisons whose cells are absent are skipped.
pub fn standard_comparisons(results: &[CircuitBenchmark]) -> Result<Vec<Comparison>> {
    let first = results.first().ok_or_else(|| Error::InvalidArgument("empty ensemble".into()))?;
    let has = |c: &Cell| first.estimate(*c).is_some();
    let cells: Vec<Cell> = first.estimates.iter().map(|e| e.cell).collect();
    let fit_pairs: Vec<(Cell, Cell)> = cells
        .iter()
        .filter(|c| c.fit == FitKind::Quadratic)
        .map(|&c| (c, Cell { fit: FitKind::Linear, ..c }))
        .filter(|(_, w)| has(w))
        .collect();
    let avg_pairs: Vec<(Cell, Cell)> = cells
        .iter()
        .filter(|c| c.averaged)
        .map(|&c| (c, Cell { averaged: false, ..c }))
        .filter(|(_, w)| has(w))
        .collect();
    let strategy_pairs: Vec<(Cell, Cell)> = cells
        .iter()
        .filter(|c| c.averaged && c.strategy == Strategy::Random)
        .map(|&c| (c, Cell { strategy: Strategy::Concatenated, ..c }))
        .filter(|(_, w)| has(w))
        .collect();
    [
        ("quadratic vs linear", fit_pairs),
        ("averaged vs single", avg_pairs),
        ("random vs concatenated (averaged)", strategy_pairs),
    ]
    .into_iter()
    .filter(|(_, pairs)| !pairs.is_empty())
    .map(|(name, pairs)| compare(results, name, &pairs))
    .collect()
}
