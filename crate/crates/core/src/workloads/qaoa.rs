//! Fixed-angle QAOA for Max-Cut on random 3-regular graphs.

use std::f64::consts::FRAC_PI_2;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::optimizer::{optimize, OptimizerConfig};
use crate::rng::RngStream;
use crate::simulator::{parse_bitstring, ShotRecord};

/// Seed of the bundled 12-vertex instance, [`default_instance`].
pub const DEFAULT_GRAPH_SEED: u64 = 2024;

/// Depth-2 angles `(γ1, γ2, β1, β2)` found by a grid scan followed by
/// Nelder-Mead on [`default_instance`] (noiseless expected cut). They are
/// specific to this implementation and instance.
pub const DEFAULT_P2_ANGLES: [f64; 4] = [0.250345, 0.455712, -0.515647, -0.281666];

/// Simple undirected graph with edges stored as sorted `(u, v)`, `u < v`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    pub n_vertices: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(n_vertices: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut norm: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u == v {
                return Err(Error::InvalidArgument(format!("self-loop on vertex {u}")));
            }
            if u >= n_vertices || v >= n_vertices {
                return Err(Error::InvalidArgument(format!("edge ({u}, {v}) outside {n_vertices} vertices")));
            }
            norm.push((u.min(v), u.max(v)));
        }
        norm.sort_unstable();
        if let Some(w) = norm.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(format!("duplicate edge {:?}", w[0])));
        }
        Ok(Self { n_vertices, edges: norm })
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n_vertices];
        for &(u, v) in &self.edges {
            d[u] += 1;
            d[v] += 1;
        }
        d
    }

    pub fn is_regular(&self, k: usize) -> bool {
        self.degrees().iter().all(|&d| d == k)
    }

    /// Edges cut by the assignment encoded in `idx` (bit `v` is vertex `v`).
    pub fn cut_of(&self, idx: usize) -> usize {
        self.edges.iter().filter(|&&(u, v)| (idx >> u ^ idx >> v) & 1 == 1).count()
    }

    /// Text form: header `n m`, then one `u v` line per edge.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.n_vertices, self.edges.len());
        for (u, v) in &self.edges {
            s.push_str(&format!("{u} {v}\n"));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let pair = |line: usize, l: &str| -> Result<(usize, usize)> {
            let parts: Vec<&str> = l.split_whitespace().collect();
            let num = |s: &str| s.parse::<usize>().map_err(|e| Error::Parse { line, msg: format!("{s:?}: {e}") });
            match parts.as_slice() {
                [a, b] => Ok((num(a)?, num(b)?)),
                _ => Err(Error::Parse { line, msg: format!("expected two integers, got {l:?}") }),
            }
        };
        let (line, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "missing header".into() })?;
        let (n, m) = pair(line, header)?;
        let edges = lines.map(|(i, l)| pair(i, l)).collect::<Result<Vec<_>>>()?;
        if edges.len() != m {
            return Err(Error::Parse { line, msg: format!("header announces {m} edges, found {}", edges.len()) });
        }
        Self::new(n, &edges)
    }
}

/// Uniform simple 3-regular graph by the configuration model: pair up three
/// stubs per vertex at random and start over whenever a self-loop or a
/// repeated edge appears.
pub fn random_3regular(n: usize, rng: &mut RngStream) -> Result<Graph> {
    if n < 4 || n % 2 == 1 {
        return Err(Error::InvalidArgument(format!("3-regular graphs need an even n ≥ 4, got {n}")));
    }
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| [v, v, v]).collect();
    loop {
        stubs.shuffle(rng);
        let edges: Vec<(usize, usize)> = stubs.chunks_exact(2).map(|p| (p[0], p[1])).collect();
        if let Ok(g) = Graph::new(n, &edges) {
            return Ok(g);
        }
    }
}

/// The 12-vertex instance used for default angles and the QAOA experiments.
pub fn default_instance() -> Graph {
    random_3regular(12, &mut RngStream::new(DEFAULT_GRAPH_SEED, 0)).expect("12 is even")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QaoaParams {
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl QaoaParams {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        let p = Self { gammas, betas };
        p.validate()?;
        Ok(p)
    }

    pub fn default_p2() -> Self {
        let [g1, g2, b1, b2] = DEFAULT_P2_ANGLES;
        Self { gammas: vec![g1, g2], betas: vec![b1, b2] }
    }

    pub fn p(&self) -> usize {
        self.gammas.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.gammas.len() != self.betas.len() {
            return Err(Error::InvalidArgument(format!(
                "{} gammas but {} betas",
                self.gammas.len(),
                self.betas.len()
            )));
        }
        if self.gammas.is_empty() {
            return Err(Error::InvalidArgument("QAOA needs at least one layer".into()));
        }
        Ok(())
    }
}

/// QAOA state preparation plus measurement, optimized to U3/CX.
///
/// Layer `k` applies `exp(−iγ_k Z_u Z_v)` per edge as
/// `CX(u,v) · U3(0,0,2γ_k)_v · CX(u,v)` (equal up to global phase) and then
/// `Rx(2β_k) = U3(2β_k, −π/2, π/2)` on every vertex.
pub fn qaoa_circuit(g: &Graph, params: &QaoaParams) -> Result<Circuit> {
    params.validate()?;
    if g.edges.is_empty() {
        return Err(Error::InvalidArgument("graph has no edges".into()));
    }
    let mut c = Circuit::new(g.n_vertices);
    for q in 0..g.n_vertices {
        c.h(q)?;
    }
    for (&gamma, &beta) in params.gammas.iter().zip(&params.betas) {
        for &(u, v) in &g.edges {
            c.cx(u, v)?.u3(0.0, 0.0, 2.0 * gamma, v)?.cx(u, v)?;
        }
        for q in 0..g.n_vertices {
            c.u3(2.0 * beta, -FRAC_PI_2, FRAC_PI_2, q)?;
        }
    }
    c.measured = true;
    optimize(&c, &OptimizerConfig::default())
}

/// Mean number of cut edges over the recorded shots.
pub fn cut_value(record: &ShotRecord, g: &Graph) -> Result<f64> {
    if record.shots == 0 {
        return Err(Error::InvalidArgument("empty shot record".into()));
    }
    let mut total = 0u64;
    for (s, &k) in &record.counts {
        if s.len() != g.n_vertices {
            return Err(Error::DimensionMismatch(format!("outcome {s} vs {} vertices", g.n_vertices)));
        }
        total += g.cut_of(parse_bitstring(s)?) as u64 * k;
    }
    Ok(total as f64 / record.shots as f64)
}

/// `⟨H⟩ = Σ_E z_u z_v` with `z = 1 − 2·bit`, i.e. `|E| − 2·cut`.
pub fn ising_energy(cut: f64, g: &Graph) -> f64 {
    g.edges.len() as f64 - 2.0 * cut
}

/// Expected cut under an outcome distribution.
pub fn expected_cut(probs: &[f64], g: &Graph) -> Result<f64> {
    if probs.len() != 1 << g.n_vertices {
        return Err(Error::DimensionMismatch(format!("{} probabilities for {} vertices", probs.len(), g.n_vertices)));
    }
    Ok(probs.iter().enumerate().map(|(i, p)| p * g.cut_of(i) as f64).sum())
}

/// Largest cut, by enumeration.
pub fn max_cut(g: &Graph) -> usize {
    (0..1usize << g.n_vertices).map(|i| g.cut_of(i)).max().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ComplexMatrix, C64};
    use crate::simulator::{ideal_probabilities, statevector::final_state};
    use rand::Rng;

    fn k3() -> Graph {
        Graph::new(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn graph_validation() {
        assert!(Graph::new(3, &[(0, 0)]).is_err());
        assert!(Graph::new(3, &[(0, 1), (1, 0)]).is_err());
        assert!(Graph::new(3, &[(0, 3)]).is_err());
        assert_eq!(Graph::new(3, &[(2, 1)]).unwrap().edges, vec![(1, 2)]);
    }

    #[test]
    fn four_vertices_give_k4() {
        let g = random_3regular(4, &mut RngStream::new(1, 0)).unwrap();
        assert_eq!(g.edges, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
    }

    #[test]
    fn twelve_vertices_have_eighteen_edges() {
        for seed in 0..100 {
            let g = random_3regular(12, &mut RngStream::new(seed, 0)).unwrap();
            assert_eq!(g.edges.len(), 18);
            assert!(g.is_regular(3));
        }
        assert!(random_3regular(7, &mut RngStream::new(0, 0)).is_err());
        assert!(random_3regular(2, &mut RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn graph_text_round_trip() {
        let g = default_instance();
        assert_eq!(Graph::from_text(&g.to_text()).unwrap(), g);
        assert!(matches!(Graph::from_text("3 2\n0 1\n"), Err(Error::Parse { .. })));
        assert!(matches!(Graph::from_text("3 1\n0 x\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn cut_value_examples() {
        let g = k3();
        let all_zero = ShotRecord::from_indices(3, [(0, 7)]);
        assert_eq!(cut_value(&all_zero, &g).unwrap(), 0.0);
        assert_eq!(ising_energy(0.0, &g), 3.0);
        // "010": vertex 1 set
        let one = ShotRecord { shots: 4, counts: [("010".to_string(), 4)].into() };
        assert_eq!(cut_value(&one, &g).unwrap(), 2.0);
        assert_eq!(ising_energy(2.0, &g), -1.0);
        assert!(cut_value(&ShotRecord::from_indices(4, [(0, 1)]), &g).is_err());
    }

    #[test]
    fn cut_value_matches_per_shot_enumeration() {
        let g = random_3regular(4, &mut RngStream::new(0, 0)).unwrap();
        let mut rng = RngStream::new(9, 0);
        let shots: Vec<usize> = (0..500).map(|_| rng.random_range(0..16)).collect();
        let record = ShotRecord::from_indices(4, shots.iter().map(|&s| (s, 1)));
        let mut total = 0;
        for &s in &shots {
            let bits: Vec<u8> = (0..4).map(|v| (s >> v & 1) as u8).collect();
            for &(u, v) in &g.edges {
                if bits[u] != bits[v] {
                    total += 1;
                }
            }
        }
        assert!((cut_value(&record, &g).unwrap() - total as f64 / 500.0).abs() < 1e-12);
    }

    #[test]
    fn zero_angles_leave_the_hadamard_layer() {
        let g = default_instance();
        let c = qaoa_circuit(&g, &QaoaParams::new(vec![0.0], vec![0.0]).unwrap()).unwrap();
        assert_eq!(c.len(), 12);
        assert!(c.measured);
        let probs = ideal_probabilities(&c).unwrap();
        assert!(probs.iter().all(|p| (p - 1.0 / 4096.0).abs() < 1e-12));
    }

    fn pauli_x_rotation(beta: f64) -> ComplexMatrix {
        // exp(−iβX)
        let (s, c) = beta.sin_cos();
        ComplexMatrix::from_rows([[C64::new(c, 0.0), C64::new(0.0, -s)], [C64::new(0.0, -s), C64::new(c, 0.0)]])
    }

    #[test]
    fn single_edge_matches_two_qubit_oracle() {
        let g = Graph::new(2, &[(0, 1)]).unwrap();
        for &(gamma, beta) in &[(0.3, 0.2), (1.1, -0.4), (-0.7, 0.9)] {
            let c = qaoa_circuit(&g, &QaoaParams::new(vec![gamma], vec![beta]).unwrap()).unwrap();
            let psi = final_state(&c);
            let zz: f64 = psi.iter().enumerate().map(|(i, a)| if (i ^ i >> 1) & 1 == 0 { 1.0 } else { -1.0 } * a.norm_sqr()).sum();
            // |++⟩ → diag(e^{∓iγ}) → exp(−iβX)⊗exp(−iβX)
            let plus = C64::new(0.5, 0.0);
            let mut v: Vec<C64> = (0..4)
                .map(|i| {
                    let z = if (i ^ i >> 1) & 1 == 0 { 1.0 } else { -1.0 };
                    plus * C64::from_polar(1.0, -gamma * z)
                })
                .collect();
            let rx = pauli_x_rotation(beta);
            let m = rx.kron(&rx);
            v = (0..4).map(|r| (0..4).map(|k| m[(r, k)] * v[k]).sum()).collect();
            let oracle: f64 = v.iter().enumerate().map(|(i, a)| if (i ^ i >> 1) & 1 == 0 { 1.0 } else { -1.0 } * a.norm_sqr()).sum();
            assert!((zz - oracle).abs() < 1e-12, "{zz} vs {oracle}");
            assert!((zz - (4.0 * beta).sin() * (2.0 * gamma).sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn default_angles_cut_is_below_the_optimum() {
        let g = default_instance();
        let c = qaoa_circuit(&g, &QaoaParams::default_p2()).unwrap();
        let cut = expected_cut(&ideal_probabilities(&c).unwrap(), &g).unwrap();
        let best = max_cut(&g) as f64;
        assert_eq!(best, 16.0);
        assert!(cut < best);
        // independent dense numpy evaluation of the same angles
        assert!((cut - 13.317925376995476).abs() < 1e-9, "{cut}");
    }

    #[test]
    fn params_validation() {
        assert!(QaoaParams::new(vec![0.1], vec![]).is_err());
        assert!(QaoaParams::new(vec![], vec![]).is_err());
        let g = Graph::new(2, &[]).unwrap();
        assert!(qaoa_circuit(&g, &QaoaParams::default_p2()).is_err());
    }
}
