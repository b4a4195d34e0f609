//! Versioned JSON experiment configuration.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use unopt_core::workloads::qaoa::{DEFAULT_GRAPH_SEED, DEFAULT_P2_ANGLES};
use unopt_core::workloads::{qaoa_circuit, qv_circuit, random_3regular, Graph, QaoaParams};
use unopt_core::zne::{FitKind, Observable};
use unopt_core::{Circuit, NoiseModel, OptimizerConfig, RngStream, SimMethod, Strategy};

use crate::error::{CliError, CliResult};
use crate::output::sha256_hex;

pub const SCHEMA_VERSION: u32 = 1;

/// Largest QV register accepted; ideal probabilities come from a statevector.
pub const MAX_WORKLOAD_QUBITS: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Workload {
    /// Quantum-volume circuits measured by heavy-output probability.
    Qv { n_qubits: usize },
    /// Max-Cut QAOA on a random 3-regular graph, measured by mean cut.
    Qaoa {
        #[serde(default = "default_vertices")]
        n_vertices: usize,
        #[serde(default = "default_graph_seed")]
        graph_seed: u64,
        #[serde(default = "default_gammas")]
        gammas: Vec<f64>,
        #[serde(default = "default_betas")]
        betas: Vec<f64>,
    },
}

fn default_vertices() -> usize {
    12
}

fn default_graph_seed() -> u64 {
    DEFAULT_GRAPH_SEED
}

fn default_gammas() -> Vec<f64> {
    DEFAULT_P2_ANGLES[..2].to_vec()
}

fn default_betas() -> Vec<f64> {
    DEFAULT_P2_ANGLES[2..].to_vec()
}

impl Workload {
    /// Circuit `index` of the workload and the observable measured on it.
    /// QV circuits draw from substream `("circuit", index)` of `rng`.
    pub fn instance(&self, index: u64, rng: &RngStream) -> CliResult<(Circuit, Observable)> {
        match self {
            Workload::Qv { n_qubits } => {
                let c = qv_circuit(*n_qubits, &mut rng.substream("circuit", index))?;
                let obs = Observable::hop_for(&c)?;
                Ok((c, obs))
            }
            Workload::Qaoa { gammas, betas, .. } => {
                let g = self.graph()?.expect("qaoa workload has a graph");
                let c = qaoa_circuit(&g, &QaoaParams::new(gammas.clone(), betas.clone())?)?;
                Ok((c, Observable::Cut(g)))
            }
        }
    }

    pub fn graph(&self) -> CliResult<Option<Graph>> {
        match self {
            Workload::Qv { .. } => Ok(None),
            Workload::Qaoa { n_vertices, graph_seed, .. } => {
                Ok(Some(random_3regular(*n_vertices, &mut RngStream::new(*graph_seed, 0))?))
            }
        }
    }

    fn validate(&self) -> CliResult<()> {
        match self {
            Workload::Qv { n_qubits } => {
                if !(2..=MAX_WORKLOAD_QUBITS).contains(n_qubits) {
                    return Err(CliError::Input(format!(
                        "workload.n_qubits must be in 2..={MAX_WORKLOAD_QUBITS}, got {n_qubits}"
                    )));
                }
            }
            Workload::Qaoa { n_vertices, gammas, betas, .. } => {
                if *n_vertices > MAX_WORKLOAD_QUBITS {
                    return Err(CliError::Input(format!(
                        "workload.n_vertices must be at most {MAX_WORKLOAD_QUBITS}, got {n_vertices}"
                    )));
                }
                QaoaParams::new(gammas.clone(), betas.clone())?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub workload: Workload,
    pub seed: u64,
    /// Strategy for `zne`; `benchmark` runs every strategy when unset.
    #[serde(default)]
    pub strategy: Option<Strategy>,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_variants")]
    pub variants: usize,
    #[serde(default = "default_noise")]
    pub noise: NoiseModel,
    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default = "default_method")]
    pub method: SimMethod,
    #[serde(default = "default_fits")]
    pub fits: Vec<FitKind>,
    /// Ensemble size for `benchmark`.
    #[serde(default = "default_circuits")]
    pub circuits: usize,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_iterations() -> usize {
    10
}

fn default_variants() -> usize {
    1
}

fn default_noise() -> NoiseModel {
    NoiseModel { p1: 0.001, p2: 0.001 }
}

fn default_shots() -> u64 {
    1_000_000
}

fn default_method() -> SimMethod {
    SimMethod::Auto
}

fn default_fits() -> Vec<FitKind> {
    FitKind::ALL.to_vec()
}

fn default_circuits() -> usize {
    1
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub strategy: Option<Strategy>,
    pub iterations: Option<usize>,
    pub variants: Option<usize>,
    pub fits: Option<Vec<FitKind>>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        let version: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CliError::Input(format!("invalid config: {e}")))?;
        match version.get("schema_version").and_then(|v| v.as_u64()) {
            Some(v) if v == SCHEMA_VERSION as u64 => {}
            Some(v) => return Err(CliError::Input(format!("unsupported schema_version {v}, expected {SCHEMA_VERSION}"))),
            None => return Err(CliError::Input("config is missing schema_version".into())),
        }
        let cfg: Self = serde_json::from_value(version).map_err(|e| CliError::Input(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::read(path, e))?;
        Self::from_json(&text)
    }

    pub fn apply(&mut self, o: &Overrides) -> CliResult<()> {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(p) = &o.out {
            self.output_dir = p.clone();
        }
        if let Some(s) = o.strategy {
            self.strategy = Some(s);
        }
        if let Some(i) = o.iterations {
            self.iterations = i;
        }
        if let Some(v) = o.variants {
            self.variants = v;
        }
        if let Some(f) = &o.fits {
            self.fits = f.clone();
        }
        self.validate()
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Input(format!("unsupported schema_version {}", self.schema_version)));
        }
        self.workload.validate()?;
        NoiseModel::new(self.noise.p1, self.noise.p2)?;
        self.optimizer.validate()?;
        let positive = [
            ("iterations", self.iterations),
            ("variants", self.variants),
            ("shots", self.shots as usize),
            ("circuits", self.circuits),
            ("fits", self.fits.len()),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(CliError::Input(format!("{name} must be positive")));
            }
        }
        Ok(())
    }

    /// Hash of the effective configuration, independent of file formatting
    /// and of where results are written.
    pub fn sha256(&self) -> String {
        let mut content = self.clone();
        content.output_dir = PathBuf::new();
        sha256_hex(&serde_json::to_vec(&content).expect("config serializes"))
    }

    pub fn zne_strategy(&self) -> Strategy {
        self.strategy.unwrap_or(Strategy::Random)
    }

    pub fn benchmark_strategies(&self) -> Vec<Strategy> {
        self.strategy.map_or_else(|| Strategy::ALL.to_vec(), |s| vec![s])
    }

    /// Root stream of every random choice in the experiment.
    pub fn rng(&self) -> RngStream {
        RngStream::new(self.seed, 0)
    }
}
