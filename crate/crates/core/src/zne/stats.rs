//! Ensemble statistics for comparing extrapolation estimates.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};

use crate::error::{Error, Result};

/// Root-mean-square difference between paired lists.
pub fn ensemble_rmse(true_values: &[f64], estimates: &[f64]) -> Result<f64> {
    if true_values.len() != estimates.len() {
        return Err(Error::DimensionMismatch(format!("{} vs {} values", true_values.len(), estimates.len())));
    }
    if true_values.is_empty() {
        return Err(Error::InvalidArgument("empty ensemble".into()));
    }
    let sq: f64 = true_values.iter().zip(estimates).map(|(t, e)| (t - e).powi(2)).sum();
    Ok((sq / true_values.len() as f64).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignTest {
    /// Pairs where the first sample is strictly smaller.
    pub wins: usize,
    /// Pairs that are not ties.
    pub trials: usize,
    /// One-sided p-value `P(Bin(trials, 1/2) ≥ wins)`.
    pub p_value: f64,
}

/// One-sided sign test of "`a` tends to be smaller than `b`" over pairs.
pub fn sign_test(a: &[f64], b: &[f64]) -> Result<SignTest> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!("{} vs {} values", a.len(), b.len())));
    }
    let wins = a.iter().zip(b).filter(|(x, y)| x < y).count();
    let trials = a.iter().zip(b).filter(|(x, y)| x != y).count();
    let p_value = if wins == 0 {
        1.0
    } else {
        let bin = Binomial::new(0.5, trials as u64).map_err(|e| Error::Numerical(e.to_string()))?;
        bin.sf(wins as u64 - 1)
    };
    Ok(SignTest { wins, trials, p_value })
}

/// Ranks starting at 1, ties sharing their average rank.
fn ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut r = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            r[order[k]] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation (Pearson correlation of average ranks).
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidArgument(format!("need two equal-length samples of size ≥ 2, got {} and {}", x.len(), y.len())));
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        return Err(Error::Numerical("constant sample has no rank correlation".into()));
    }
    Ok(cov / (vx * vy).sqrt())
}
