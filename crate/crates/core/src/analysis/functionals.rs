use std::f64::consts::{E, LN_2};

use crate::error::{Error, Result};
use crate::stats::compensated_sum;

/// Tolerance on the total mass of a probability vector.
pub const MASS_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Distance {
    /// `Σ |v_i - v̄|^q`
    pub power: f64,
    /// `(Σ |v_i - v̄|^q)^(1/q)`
    pub norm: f64,
}

/// `Σ |v_i - mean|^q`, compensated.
pub fn distance_power(v: &[f64], mean: f64, q: f64) -> f64 {
    if q == 1.0 {
        compensated_sum(v.iter().map(|x| (x - mean).abs()))
    } else if q == 2.0 {
        compensated_sum(v.iter().map(|x| (x - mean) * (x - mean)))
    } else {
        compensated_sum(v.iter().map(|x| (x - mean).abs().powf(q)))
    }
}

pub fn distance(v: &[f64], mean: f64, q: f64) -> Distance {
    let power = distance_power(v, mean, q);
    Distance {
        power,
        norm: power.powf(1.0 / q),
    }
}

pub fn lp_norm(v: &[f64], p: f64) -> f64 {
    distance_power(v, 0.0, p).powf(1.0 / p)
}

pub fn check_probability(v: &[f64]) -> Result<()> {
    if let Some(i) = v.iter().position(|&x| x.is_nan() || x < 0.0) {
        return Err(Error::NotProbability(format!("entry {i} is {}", v[i])));
    }
    let mass = compensated_sum(v.iter().copied());
    if (mass - 1.0).abs() > MASS_TOLERANCE {
        return Err(Error::NotProbability(format!("total mass {mass}")));
    }
    Ok(())
}

pub fn is_probability(v: &[f64]) -> bool {
    check_probability(v).is_ok()
}

/// `x ln(1/x)` with `0 ln 0 = 0`.
pub fn entropy_term(x: f64) -> f64 {
    if x > 0.0 {
        -x * x.ln()
    } else {
        0.0
    }
}

/// Entropy in nats, without validating the input.
pub fn entropy_unchecked(v: &[f64]) -> f64 {
    compensated_sum(v.iter().map(|&x| entropy_term(x)))
}

pub fn entropy(v: &[f64]) -> Result<f64> {
    check_probability(v)?;
    Ok(entropy_unchecked(v))
}

/// `S(v) + β·v`.
pub fn augmented_entropy(v: &[f64], beta: &[f64]) -> Result<f64> {
    check_probability(v)?;
    if beta.len() != v.len() {
        return Err(Error::InvalidArgument("beta length differs from state".into()));
    }
    if beta.iter().any(|&b| b < 0.0) {
        return Err(Error::InvalidArgument("beta must be non-negative".into()));
    }
    let linear = compensated_sum(v.iter().zip(beta).map(|(x, b)| x * b));
    Ok(entropy_unchecked(v) + linear)
}

/// Slack `‖v-w‖₁ ln n + 1/(e ln 2) - |S(v) - S(w)|`; non-negative when the
/// inequality holds.
pub fn fannes_check(v: &[f64], w: &[f64]) -> Result<f64> {
    if v.len() != w.len() || v.len() < 2 {
        return Err(Error::InvalidArgument(
            "vectors must share a length of at least 2".into(),
        ));
    }
    let lhs = (entropy(v)? - entropy(w)?).abs();
    let l1 = compensated_sum(v.iter().zip(w).map(|(a, b)| (a - b).abs()));
    let rhs = l1 * (v.len() as f64).ln() + 1.0 / (E * LN_2);
    Ok(rhs - lhs)
}
