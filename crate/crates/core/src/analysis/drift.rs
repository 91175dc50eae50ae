//! Exact one-step conditional expectations, by enumerating every edge.

use crate::analysis::functionals::{check_probability, entropy_term};
use crate::error::Result;
use crate::graph::Graph;
use crate::stats::{compensated_sum, Neumaier};

#[derive(Clone, Copy, Debug)]
pub enum DriftFunctional<'a> {
    Entropy,
    AugmentedEntropy(&'a [f64]),
    L2Squared,
}

/// Change of the functional when edge `(i, j)` is averaged.
pub fn edge_change(v: &[f64], i: usize, j: usize, f: DriftFunctional<'_>) -> f64 {
    let (vi, vj) = (v[i], v[j]);
    let a = 0.5 * (vi + vj);
    match f {
        DriftFunctional::L2Squared => -(vi - vj) * (vi - vj) / 2.0,
        DriftFunctional::Entropy => 2.0 * entropy_term(a) - entropy_term(vi) - entropy_term(vj),
        DriftFunctional::AugmentedEntropy(beta) => {
            2.0 * entropy_term(a) - entropy_term(vi) - entropy_term(vj)
                + beta[i] * (a - vi)
                + beta[j] * (a - vj)
        }
    }
}

/// `E[f(v(t+1)) - f(v(t)) | v(t) = v]`. For the L² functional this equals
/// `-(1/2|E|) vᵀ L v`.
pub fn exact_drift(g: &Graph, v: &[f64], f: DriftFunctional<'_>) -> Result<f64> {
    if !matches!(f, DriftFunctional::L2Squared) {
        check_probability(v)?;
    }
    let total = compensated_sum(g.edges().iter().map(|&(i, j)| edge_change(v, i, j, f)));
    Ok(total / g.edge_count() as f64)
}

/// Average of the `|E|` possible next states, each built explicitly.
pub fn one_step_mean(g: &Graph, v: &[f64]) -> Vec<f64> {
    let mut acc = vec![Neumaier::new(); v.len()];
    for &(i, j) in g.edges() {
        let mut next = v.to_vec();
        let a = 0.5 * (v[i] + v[j]);
        next[i] = a;
        next[j] = a;
        for (slot, x) in acc.iter_mut().zip(&next) {
            slot.add(*x);
        }
    }
    let m = g.edge_count() as f64;
    acc.iter().map(|s| s.value() / m).collect()
}
