use std::path::Path;

use serde::Serialize;
use unopt_core::circuit::qasm::to_qasm_with_comments;
use unopt_core::zne::{average_fits, sweep, DatasetProvenance, FitKind, FitResult, ObservableKind, SweepConfig, ZneDataset};
use unopt_core::Strategy;

use super::guard_inputs;
use crate::config::{ExperimentConfig, Overrides, Workload};
use crate::error::CliResult;
use crate::output::{fmt_f64, CsvSink, OutputDir, Stamp};
use crate::svg::Plot;

pub const CIRCUIT_FILE: &str = "circuit.qasm";
pub const DATASET_FILE: &str = "dataset.csv";
pub const FITS_FILE: &str = "fits.json";
pub const DATASET_COLUMNS: [&str; 5] = ["variant", "iteration", "lambda", "value", "variance"];

pub fn plot_file(kind: FitKind) -> String {
    format!("plot_{kind}.svg")
}

#[derive(Serialize)]
struct VariantFit {
    variant: usize,
    #[serde(flatten)]
    fit: FitResult,
}

#[derive(Serialize)]
struct FitSummary {
    kind: FitKind,
    variants: Vec<VariantFit>,
    /// Mean of the per-variant zero-noise values.
    mean_zero_noise: f64,
    /// One fit through the points of every variant.
    pooled: FitResult,
}

#[derive(Serialize)]
struct FitsReport<'a> {
    #[serde(flatten)]
    stamp: Stamp,
    workload: &'a Workload,
    observable: ObservableKind,
    strategy: Strategy,
    ideal_value: Option<f64>,
    /// Mean over variants of the estimate at λ = 1.
    unmitigated: f64,
    fits: Vec<FitSummary>,
    provenance: Vec<DatasetProvenance>,
}

pub fn run(config_path: &Path, overrides: &Overrides) -> CliResult<()> {
    let mut cfg = ExperimentConfig::load(config_path)?;
    cfg.apply(overrides)?;
    let stamp = Stamp { config_sha256: cfg.sha256(), seed: cfg.seed };
    let mut outputs = vec![CIRCUIT_FILE.to_string(), DATASET_FILE.to_string(), FITS_FILE.to_string()];
    outputs.extend(cfg.fits.iter().map(|&k| plot_file(k)));
    for name in &outputs {
        guard_inputs(&cfg.output_dir.join(name), &[config_path])?;
    }
    let mut dir = OutputDir::create(&cfg.output_dir, "zne", stamp)?;
    let result = execute(&cfg, &mut dir);
    if let Err(e) = &result {
        dir.abort(e);
    }
    result
}

fn execute(cfg: &ExperimentConfig, dir: &mut OutputDir) -> CliResult<()> {
    let rng = cfg.rng();
    let (circuit, observable) = cfg.workload.instance(0, &rng)?;
    let ideal = observable.ideal_value(&circuit).ok();
    dir.write(CIRCUIT_FILE, &to_qasm_with_comments(&circuit, &dir.stamp().comment_lines())?)?;

    let sweep_cfg = SweepConfig {
        strategy: cfg.zne_strategy(),
        iterations: cfg.iterations,
        noise: cfg.noise,
        shots: cfg.shots,
        method: cfg.method,
        optimizer: cfg.optimizer.clone(),
    };
    let mut csv = CsvSink::create(&dir.path(DATASET_FILE), dir.stamp(), &DATASET_COLUMNS)?;
    dir.record(DATASET_FILE)?;
    let zne_rng = rng.substream("zne", 0);
    let mut datasets: Vec<ZneDataset> = Vec::with_capacity(cfg.variants);
    for v in 0..cfg.variants {
        let d = sweep(&circuit, &observable, &sweep_cfg, &zne_rng.substream("variant", v as u64))?;
        for p in &d.points {
            csv.row([v.to_string(), p.iteration.to_string(), fmt_f64(p.lambda), fmt_f64(p.value), fmt_f64(p.variance)])?;
        }
        csv.flush()?;
        datasets.push(d);
    }

    let mut fits = Vec::new();
    for &kind in &cfg.fits {
        let avg = average_fits(&datasets, kind)?;
        fits.push(FitSummary {
            kind,
            variants: avg.per_variant.into_iter().enumerate().map(|(variant, fit)| VariantFit { variant, fit }).collect(),
            mean_zero_noise: avg.mean_zero_noise,
            pooled: avg.pooled,
        });
    }
    let unmitigated = datasets.iter().map(|d| d.points[0].value).sum::<f64>() / datasets.len() as f64;

    let (name, y_label) = match observable.kind() {
        ObservableKind::Hop => ("heavy-output probability", "HOP"),
        ObservableKind::Cut => ("mean cut value", "cut"),
    };
    let points: Vec<(f64, f64)> = datasets.iter().flat_map(|d| d.points.iter().map(|p| (p.lambda, p.value))).collect();
    for f in &fits {
        let curves = f
            .variants
            .iter()
            .map(|v| {
                let fit = v.fit.clone();
                Box::new(move |x| fit.evaluate(x)) as Box<dyn Fn(f64) -> f64>
            })
            .collect();
        let plot = Plot {
            title: format!("{name}, {} strategy, {} fit", sweep_cfg.strategy, f.kind),
            x_label: "noise scale factor λ".into(),
            y_label: y_label.into(),
            points: points.clone(),
            curves,
            estimate: Some(f.mean_zero_noise),
            reference: ideal,
        };
        dir.write(&plot_file(f.kind), &plot.render(&dir.stamp().comment_lines()))?;
        println!("{} zero-noise estimate {}", f.kind, fmt_f64(f.mean_zero_noise));
    }

    let report = FitsReport {
        stamp: dir.stamp().clone(),
        workload: &cfg.workload,
        observable: observable.kind(),
        strategy: sweep_cfg.strategy,
        ideal_value: ideal,
        unmitigated,
        fits,
        provenance: datasets.into_iter().map(|d| d.provenance).collect(),
    };
    dir.write_json(FITS_FILE, &report)?;
    dir.finish()
}
