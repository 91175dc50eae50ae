//! Closed-form mixing-time bounds evaluated from spectral data.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::spectral::SpectralSummary;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BoundReport {
    pub epsilon: f64,
    pub n: usize,
    pub edges: usize,
    pub gamma: f64,
    pub delta: f64,
    /// `(1-ε)/(2 ln 2) · n ln n`, leading term only.
    pub universal_lower: f64,
    /// Always true: the `-O(n)` correction has no explicit constant.
    pub universal_lower_asymptotic: bool,
    pub l2_lower: f64,
    pub l2_upper: f64,
    pub l1_lower: f64,
    pub l1_upper: f64,
    pub l21_lower: f64,
    pub l21_upper: f64,
    pub l21_lower_deloc: f64,
    /// Lower bound on the `(1-ε)`-covering time.
    pub cov_lower: f64,
    /// Degree ratio `max d / min d` used in `cov_lower`.
    pub degree_ratio: f64,
}

impl BoundReport {
    /// Lower/upper pairs, for checking ordering.
    pub fn pairs(&self) -> [(f64, f64); 4] {
        [
            (self.l2_lower, self.l2_upper),
            (self.l1_lower, self.l1_upper),
            (self.l21_lower, self.l21_upper),
            (self.l21_lower_deloc, self.l21_upper),
        ]
    }
}

pub fn universal_lower(n: usize, epsilon: f64) -> f64 {
    let n = n as f64;
    (1.0 - epsilon) / (2.0 * LN_2) * n * n.ln()
}

pub fn bounds_from(
    n: usize,
    edges: usize,
    gamma: f64,
    delta: f64,
    degree_ratio: f64,
    epsilon: f64,
) -> Result<BoundReport> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    let nf = n as f64;
    let log_inv = (1.0 / epsilon).ln();
    let sqrt_n = nf.sqrt();
    let lower = (2.0 * gamma - 1.0) * log_inv;
    Ok(BoundReport {
        epsilon,
        n,
        edges,
        gamma,
        delta,
        universal_lower: universal_lower(n, epsilon),
        universal_lower_asymptotic: true,
        l2_lower: lower,
        l2_upper: 4.0 * gamma * log_inv,
        l1_lower: lower,
        l1_upper: 4.0 * gamma * (sqrt_n.ln() + log_inv),
        l21_lower: lower,
        l21_upper: 4.0 * gamma * (sqrt_n / epsilon).ln(),
        l21_lower_deloc: (2.0 * gamma - 1.0) * (delta * sqrt_n / epsilon).ln(),
        cov_lower: nf / (2.0 * degree_ratio) * ((1.0 - epsilon) * nf).ln(),
        degree_ratio,
    })
}

pub fn bound_report(g: &Graph, s: &SpectralSummary, epsilon: f64) -> Result<BoundReport> {
    let ratio = g.max_degree() as f64 / g.min_degree() as f64;
    bounds_from(g.n(), g.edge_count(), s.gamma, s.delta, ratio, epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::make_graph;
    use crate::spectral::spectral_summary;

    #[test]
    fn k4_l2_pair() {
        let g = make_graph(&"complete:4".parse().unwrap()).unwrap();
        let s = spectral_summary(&g).unwrap();
        let b = bound_report(&g, &s, 0.1).unwrap();
        assert!((b.l2_lower - 2.0 * 10f64.ln()).abs() < 1e-9);
        assert!((b.l2_lower - 4.605).abs() < 1e-3);
        assert!((b.l2_upper - 13.816).abs() < 1e-3);
    }

    #[test]
    fn universal_leading_term() {
        let u = universal_lower(100, 0.25);
        assert!((u - 0.75 * 100.0 * 100f64.ln() / (2.0 * LN_2)).abs() < 1e-9);
        assert!((u - 249.1).abs() < 0.05);
    }

    #[test]
    fn lower_never_exceeds_upper() {
        for spec in ["complete:9", "star:20", "cycle:15", "dumbbell:5", "btree:15", "path:12"] {
            let g = make_graph(&spec.parse().unwrap()).unwrap();
            let s = spectral_summary(&g).unwrap();
            for eps in [0.01, 0.1, 0.5, 0.9] {
                let b = bound_report(&g, &s, eps).unwrap();
                for (lo, hi) in b.pairs() {
                    assert!(lo <= hi, "{spec} eps={eps}: {lo} > {hi}");
                }
            }
        }
    }
}
