//! Zero-noise extrapolation over unoptimization sweeps.
//!
//! A sweep runs one recursive unoptimization chain `R_0(C), …, R_i(C)`,
//! samples each circuit under the noise model and records
//! `(λ_i, observable_i)`. Polynomial least-squares fits are evaluated at
//! `λ = 0`.

pub mod benchmark;
pub mod stats;

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::optimizer::OptimizerConfig;
use crate::rng::RngStream;
use crate::simulator::{ideal_probabilities, parse_bitstring, sample, NoiseModel, ShotRecord, SimMethod};
use crate::unoptimizer::{unoptimize_chain, Step, Strategy};
use crate::workloads::{expected_cut, heavy_set, hop, Graph, HeavySet};

pub use stats::{ensemble_rmse, sign_test, spearman};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitKind {
    Linear,
    Quadratic,
}

impl FitKind {
    pub const ALL: [FitKind; 2] = [FitKind::Linear, FitKind::Quadratic];

    pub fn degree(self) -> usize {
        match self {
            FitKind::Linear => 1,
            FitKind::Quadratic => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FitKind::Linear => "linear",
            FitKind::Quadratic => "quadratic",
        }
    }
}

impl fmt::Display for FitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FitKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(FitKind::Linear),
            "quadratic" => Ok(FitKind::Quadratic),
            _ => Err(Error::InvalidArgument(format!("unknown fit {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObservableKind {
    Hop,
    Cut,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZnePoint {
    pub iteration: usize,
    pub lambda: f64,
    pub value: f64,
    /// Shot-noise variance of `value`.
    pub variance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetProvenance {
    pub seed: u64,
    pub stream_id: u64,
    pub strategy: Strategy,
    pub steps: Vec<Step>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZneDataset {
    pub observable: ObservableKind,
    pub points: Vec<ZnePoint>,
    pub provenance: DatasetProvenance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub kind: FitKind,
    /// Polynomial coefficients, highest degree first.
    pub coefficients: Vec<f64>,
    pub zero_noise_value: f64,
    /// Sum of squared residuals.
    pub residual_sum: f64,
}

impl FitResult {
    pub fn evaluate(&self, x: f64) -> f64 {
        self.coefficients.iter().fold(0.0, |acc, c| acc * x + c)
    }
}

/// Ordinary least-squares polynomial fit of `(λ, value)` pairs.
pub fn fit_points(points: &[(f64, f64)], kind: FitKind) -> Result<FitResult> {
    let deg = kind.degree();
    let mut distinct: Vec<f64> = points.iter().map(|p| p.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() <= deg {
        return Err(Error::RankDeficient(format!(
            "{kind} fit needs {} distinct noise scales, got {}",
            deg + 1,
            distinct.len()
        )));
    }
    let a = DMatrix::from_fn(points.len(), deg + 1, |r, c| points[r].0.powi((deg - c) as i32));
    let b = DVector::from_iterator(points.len(), points.iter().map(|p| p.1));
    let x = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-12)
        .map_err(|e| Error::Numerical(e.to_string()))?;
    let coefficients: Vec<f64> = x.iter().copied().collect();
    let residual_sum = (&a * &x - &b).norm_squared();
    let zero_noise_value = *coefficients.last().unwrap();
    Ok(FitResult { kind, coefficients, zero_noise_value, residual_sum })
}

pub fn fit(dataset: &ZneDataset, kind: FitKind) -> Result<FitResult> {
    let pts: Vec<(f64, f64)> = dataset.points.iter().map(|p| (p.lambda, p.value)).collect();
    fit_points(&pts, kind)
}

/// What is measured on every shot record.
#[derive(Clone, Debug)]
pub enum Observable {
    /// Heavy-output probability against a fixed heavy set.
    Hop(HeavySet),
    /// Mean cut of the graph.
    Cut(Graph),
}

impl Observable {
    /// HOP against the heavy set of `c`'s own ideal distribution.
    pub fn hop_for(c: &Circuit) -> Result<Self> {
        Ok(Observable::Hop(heavy_set(c)?))
    }

    pub fn kind(&self) -> ObservableKind {
        match self {
            Observable::Hop(_) => ObservableKind::Hop,
            Observable::Cut(_) => ObservableKind::Cut,
        }
    }

    /// Estimate and its shot-noise variance.
    pub fn evaluate(&self, record: &ShotRecord) -> Result<(f64, f64)> {
        let n = record.shots as f64;
        match self {
            Observable::Hop(h) => {
                let v = hop(record, h)?;
                Ok((v, v * (1.0 - v) / n))
            }
            Observable::Cut(g) => {
                let mean = crate::workloads::cut_value(record, g)?;
                let mut second = 0.0;
                for (s, &k) in &record.counts {
                    let x = g.cut_of(parse_bitstring(s)?) as f64;
                    second += x * x * k as f64;
                }
                let var = if record.shots > 1 { (second - n * mean * mean) / (n - 1.0) } else { 0.0 };
                Ok((mean, var.max(0.0) / n))
            }
        }
    }

    /// Exact noiseless value for `c`.
    pub fn ideal_value(&self, c: &Circuit) -> Result<f64> {
        let probs = ideal_probabilities(c)?;
        match self {
            Observable::Hop(h) => Ok(h.probability(&probs)),
            Observable::Cut(g) => expected_cut(&probs, g),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub strategy: Strategy,
    pub iterations: usize,
    pub noise: NoiseModel,
    pub shots: u64,
    pub method: SimMethod,
    pub optimizer: OptimizerConfig,
}

/// One chain `R_0 … R_iterations` with a noisy estimate per circuit. The
/// chain draws from substream `("chain", 0)` and circuit `i` is sampled
/// with substream `("shots", i)`.
pub fn sweep(c: &Circuit, observable: &Observable, cfg: &SweepConfig, rng: &RngStream) -> Result<ZneDataset> {
    if cfg.iterations == 0 {
        return Err(Error::InvalidArgument("a sweep needs at least one iteration".into()));
    }
    let chain_rng = rng.substream("chain", 0);
    let chain = unoptimize_chain(c, cfg.iterations, cfg.strategy, &chain_rng, &cfg.optimizer)?;
    let points = chain
        .par_iter()
        .map(|r| {
            let record = sample(&r.circuit, &cfg.noise, cfg.shots, &rng.substream("shots", r.iterations as u64), cfg.method)?;
            let (value, variance) = observable.evaluate(&record)?;
            Ok(ZnePoint { iteration: r.iterations, lambda: r.lambda, value, variance })
        })
        .collect::<Result<Vec<_>>>()?;
    let last = chain.last().expect("chain holds R_0");
    Ok(ZneDataset {
        observable: observable.kind(),
        points,
        provenance: DatasetProvenance {
            seed: chain_rng.seed(),
            stream_id: chain_rng.stream_id(),
            strategy: cfg.strategy,
            steps: last.provenance.steps.clone(),
        },
    })
}

/// `variants` independent sweeps, variant `v` on substream `("variant", v)`.
pub fn variant_sweeps(
    c: &Circuit,
    observable: &Observable,
    cfg: &SweepConfig,
    variants: usize,
    rng: &RngStream,
) -> Result<Vec<ZneDataset>> {
    if variants == 0 {
        return Err(Error::InvalidArgument("at least one variant is required".into()));
    }
    (0..variants as u64)
        .into_par_iter()
        .map(|v| sweep(c, observable, cfg, &rng.substream("variant", v)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AveragedFit {
    pub kind: FitKind,
    pub per_variant: Vec<FitResult>,
    /// Mean of the per-variant zero-noise values.
    pub mean_zero_noise: f64,
    /// Single fit through the points of all variants.
    pub pooled: FitResult,
}

/// Fits every dataset and averages the extrapolated values.
pub fn average_fits(datasets: &[ZneDataset], kind: FitKind) -> Result<AveragedFit> {
    if datasets.is_empty() {
        return Err(Error::InvalidArgument("no datasets".into()));
    }
    let per_variant = datasets.iter().map(|d| fit(d, kind)).collect::<Result<Vec<_>>>()?;
    let mean_zero_noise = per_variant.iter().map(|f| f.zero_noise_value).sum::<f64>() / per_variant.len() as f64;
    let pooled_points: Vec<(f64, f64)> =
        datasets.iter().flat_map(|d| d.points.iter().map(|p| (p.lambda, p.value))).collect();
    let pooled = fit_points(&pooled_points, kind)?;
    Ok(AveragedFit { kind, per_variant, mean_zero_noise, pooled })
}

/// Variant sweeps followed by [`average_fits`].
pub fn averaged_sweep(
    c: &Circuit,
    observable: &Observable,
    cfg: &SweepConfig,
    variants: usize,
    kind: FitKind,
    rng: &RngStream,
) -> Result<AveragedFit> {
    average_fits(&variant_sweeps(c, observable, cfg, variants, rng)?, kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workloads::{qv_circuit, random_circuit};
    use crate::unoptimizer::Strategy;
    use proptest::prelude::*;
    use rand::Rng;

    fn pts(xs: &[f64], f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
        xs.iter().map(|&x| (x, f(x))).collect()
    }

    #[test]
    fn exact_quadratic_is_recovered() {
        let p = pts(&[1.0, 1.5, 2.0, 3.0, 4.5], |x| 2.0 * x * x + 3.0 * x + 1.0);
        let f = fit_points(&p, FitKind::Quadratic).unwrap();
        for (got, want) in f.coefficients.iter().zip([2.0, 3.0, 1.0]) {
            assert!((got - want).abs() < 1e-10);
        }
        assert!((f.zero_noise_value - 1.0).abs() < 1e-10);
        assert!(f.residual_sum < 1e-10);
        assert!((f.evaluate(0.0) - f.zero_noise_value).abs() < 1e-15);
    }

    #[test]
    fn collinear_points_give_flat_curvature() {
        let p = pts(&[1.0, 2.0, 3.0, 5.0], |x| 0.9 - 0.05 * x);
        let f = fit_points(&p, FitKind::Quadratic).unwrap();
        assert!(f.coefficients[0].abs() < 1e-9);
        assert!((f.zero_noise_value - 0.9).abs() < 1e-9);
    }

    #[test]
    fn noisy_points_match_normal_equations() {
        let mut rng = RngStream::new(81, 0);
        let p: Vec<(f64, f64)> = (0..50)
            .map(|_| {
                let x: f64 = rng.random_range(1.0..6.0);
                (x, 0.8 - 0.03 * x + 0.002 * x * x + rng.random_range(-0.01..0.01))
            })
            .collect();
        for kind in FitKind::ALL {
            let d = kind.degree() + 1;
            // normal equations (AᵀA) x = Aᵀb, solved by Gaussian elimination
            let mut m = vec![vec![0.0; d + 1]; d];
            for &(x, y) in &p {
                let row: Vec<f64> = (0..d).map(|c| x.powi((d - 1 - c) as i32)).collect();
                for i in 0..d {
                    for j in 0..d {
                        m[i][j] += row[i] * row[j];
                    }
                    m[i][d] += row[i] * y;
                }
            }
            for col in 0..d {
                let piv = (col..d).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs())).unwrap();
                m.swap(col, piv);
                for r in 0..d {
                    if r != col {
                        let f = m[r][col] / m[col][col];
                        for k in col..=d {
                            m[r][k] -= f * m[col][k];
                        }
                    }
                }
            }
            let want: Vec<f64> = (0..d).map(|i| m[i][d] / m[i][i]).collect();
            let got = fit_points(&p, kind).unwrap();
            for (a, b) in got.coefficients.iter().zip(&want) {
                assert!((a - b).abs() < 1e-9, "{kind}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn rank_deficient_designs_are_rejected() {
        let p = pts(&[1.0, 1.0, 1.0], |_| 0.5);
        assert!(matches!(fit_points(&p, FitKind::Linear), Err(Error::RankDeficient(_))));
        let p = pts(&[1.0, 2.0, 2.0], |x| x);
        assert!(matches!(fit_points(&p, FitKind::Quadratic), Err(Error::RankDeficient(_))));
        assert!(fit_points(&p, FitKind::Linear).is_ok());
    }

    proptest! {
        #[test]
        fn fit_ignores_point_order(seed in any::<u64>()) {
            let mut rng = RngStream::new(seed, 0);
            let mut p: Vec<(f64, f64)> = (0..8).map(|i| (1.0 + i as f64 * 0.4, rng.random::<f64>())).collect();
            let a = fit_points(&p, FitKind::Quadratic).unwrap();
            p.reverse();
            p.swap(1, 5);
            let b = fit_points(&p, FitKind::Quadratic).unwrap();
            prop_assert!((a.zero_noise_value - b.zero_noise_value).abs() < 1e-9);
        }
    }

    fn small_cfg(strategy: Strategy, noise: NoiseModel) -> SweepConfig {
        SweepConfig {
            strategy,
            iterations: 3,
            noise,
            shots: 20_000,
            method: SimMethod::Density,
            optimizer: OptimizerConfig::default(),
        }
    }

    #[test]
    fn sweep_shape_and_replay() {
        let c = qv_circuit(4, &mut RngStream::new(1, 0)).unwrap();
        let obs = Observable::hop_for(&c).unwrap();
        let cfg = small_cfg(Strategy::Random, NoiseModel::uniform(0.01).unwrap());
        let rng = RngStream::new(7, 0);
        let d = sweep(&c, &obs, &cfg, &rng).unwrap();
        assert_eq!(d.points.len(), 4);
        assert_eq!(d.points[0].lambda, 1.0);
        assert_eq!(d.points.iter().map(|p| p.iteration).collect::<Vec<_>>(), vec![0, 1, 2, 3]);
        assert_eq!(d.provenance.steps.len(), 3);
        assert_eq!(sweep(&c, &obs, &cfg, &rng).unwrap(), d);
    }

    #[test]
    fn noiseless_sweep_is_flat() {
        let c = qv_circuit(4, &mut RngStream::new(2, 0)).unwrap();
        let obs = Observable::hop_for(&c).unwrap();
        let ideal = obs.ideal_value(&c).unwrap();
        let cfg = small_cfg(Strategy::Concatenated, NoiseModel::noiseless());
        let d = sweep(&c, &obs, &cfg, &RngStream::new(8, 0)).unwrap();
        for p in &d.points {
            assert!((p.value - ideal).abs() < 5.0 * p.variance.sqrt().max(1e-3), "{} vs {ideal}", p.value);
        }
    }

    #[test]
    fn averaging_one_variant_is_a_plain_fit() {
        let c = qv_circuit(4, &mut RngStream::new(2, 0)).unwrap();
        let obs = Observable::hop_for(&c).unwrap();
        let cfg = small_cfg(Strategy::Random, NoiseModel::uniform(0.01).unwrap());
        let rng = RngStream::new(9, 0);
        let avg = averaged_sweep(&c, &obs, &cfg, 1, FitKind::Linear, &rng).unwrap();
        let single = fit(&sweep(&c, &obs, &cfg, &rng.substream("variant", 0)).unwrap(), FitKind::Linear).unwrap();
        assert_eq!(avg.mean_zero_noise, single.zero_noise_value);
        assert_eq!(avg.per_variant, vec![single]);
    }

    #[test]
    fn identical_variants_average_to_their_value() {
        let c = qv_circuit(3, &mut RngStream::new(4, 0)).unwrap();
        let obs = Observable::hop_for(&c).unwrap();
        let cfg = small_cfg(Strategy::Concatenated, NoiseModel::uniform(0.01).unwrap());
        let d = sweep(&c, &obs, &cfg, &RngStream::new(10, 0)).unwrap();
        let avg = average_fits(&[d.clone(), d.clone(), d.clone()], FitKind::Quadratic).unwrap();
        let single = fit(&d, FitKind::Quadratic).unwrap();
        assert!((avg.mean_zero_noise - single.zero_noise_value).abs() < 1e-15);
        assert!((avg.pooled.zero_noise_value - single.zero_noise_value).abs() < 1e-9);
    }

    #[test]
    fn cut_observable_variance() {
        let g = Graph::new(3, &[(0, 1), (1, 2)]).unwrap();
        let record = ShotRecord::from_indices(3, [(0, 2), (2, 2)]);
        // cuts: 0, 0, 2, 2 → mean 1, sample variance 4/3
        let (m, v) = Observable::Cut(g).evaluate(&record).unwrap();
        assert_eq!(m, 1.0);
        assert!((v - 4.0 / 3.0 / 4.0).abs() < 1e-15);
    }

    #[test]
    fn ideal_cut_of_a_random_circuit_uses_the_distribution() {
        let c = random_circuit(4, 20, &mut RngStream::new(5, 0));
        let g = Graph::new(4, &[(0, 1), (2, 3)]).unwrap();
        let probs = ideal_probabilities(&c).unwrap();
        let want: f64 = (0..16).map(|i| probs[i] * g.cut_of(i) as f64).sum();
        assert!((Observable::Cut(g).ideal_value(&c).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn fit_kind_names() {
        for k in FitKind::ALL {
            assert_eq!(k.name().parse::<FitKind>().unwrap(), k);
        }
        assert!("cubic".parse::<FitKind>().is_err());
    }
}
