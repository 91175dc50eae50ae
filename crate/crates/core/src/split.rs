//! The splitting comparison process on the cycle.
//!
//! A state is a list of non-increasing, non-negative sequences of length `n`.
//! Edge `i < n - 1` joins positions `i` and `i + 1`; edge `n - 1` is the wrap
//! edge joining the last position to the first. Averaging an inner edge keeps
//! a sequence sorted. On the wrap edge, with `a` the average of the first and
//! last entries:
//!
//! - if `a >= v[1]` the sequence becomes `(a, a, v[1], .., v[n-2])`;
//! - otherwise, with `k` the largest index such that `v[k] > a`, it splits
//!   into `(a; k+2 times, v[k+1], .., v[n-2])` and
//!   `(v[1] - a, .., v[k] - a, 0, .., 0)`.
//!
//! Every sequence draws its own edge each step. All-zero sequences are dropped.
//! The sequence count grows roughly like `(1 + 1/n)^t`, so runs are meant for
//! horizons of a few multiples of `n`.

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Upper limit on live sequences before a run is abandoned.
pub const MAX_SEQUENCES: usize = 1 << 20;

#[derive(Clone, Debug, PartialEq)]
pub struct SplitSystem {
    n: usize,
    sequences: Vec<Vec<f64>>,
    step: u64,
}

impl SplitSystem {
    /// Starts from a single non-increasing, non-negative sequence.
    pub fn new(initial: Vec<f64>) -> Result<Self> {
        let n = initial.len();
        if n < 3 {
            return Err(Error::InvalidArgument("cycle length must be at least 3".into()));
        }
        check_sequence(&initial, 0)?;
        let sequences = if initial.iter().all(|&x| x == 0.0) {
            Vec::new()
        } else {
            vec![initial]
        };
        Ok(Self {
            n,
            sequences,
            step: 0,
        })
    }

    /// The corner start `e_1`.
    pub fn corner(n: usize) -> Result<Self> {
        let mut v = vec![0.0; n];
        v[0] = 1.0;
        Self::new(v)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sequences(&self) -> &[Vec<f64>] {
        &self.sequences
    }

    pub fn step(&self) -> u64 {
        self.step
    }
}

fn check_sequence(v: &[f64], index: usize) -> Result<()> {
    for (pos, w) in v.windows(2).enumerate() {
        if w[0].is_nan() || w[1].is_nan() || w[0] < w[1] {
            return Err(Error::MonotonicityViolation {
                index,
                position: pos + 1,
            });
        }
    }
    match v.last() {
        Some(&last) if last.is_nan() || last < 0.0 => Err(Error::MonotonicityViolation {
            index,
            position: v.len() - 1,
        }),
        _ => Ok(()),
    }
}

/// Applies edge `edge` to `v`; a second sequence is returned on a split.
pub fn apply_edge(v: &mut [f64], edge: usize) -> Option<Vec<f64>> {
    let n = v.len();
    if edge + 1 < n {
        let a = 0.5 * (v[edge] + v[edge + 1]);
        v[edge] = a;
        v[edge + 1] = a;
        return None;
    }
    let a = 0.5 * (v[0] + v[n - 1]);
    if a >= v[1] {
        v.copy_within(1..n - 1, 2);
        v[0] = a;
        v[1] = a;
        return None;
    }
    // v[1] > a >= v[n-1], so k lies in 1..=n-2.
    let k = (1..n).rev().find(|&k| v[k] > a).expect("v[1] exceeds the average");
    let second: Vec<f64> = (0..n)
        .map(|p| if p < k { v[p + 1] - a } else { 0.0 })
        .collect();
    v.copy_within(k + 1..n - 1, k + 2);
    v[..k + 2].iter_mut().for_each(|x| *x = a);
    Some(second)
}

/// One step: every live sequence draws an edge and is updated.
pub fn split_step(sys: &mut SplitSystem, r: &mut RngStream) -> Result<()> {
    let n = sys.n;
    let mut next = Vec::with_capacity(sys.sequences.len() + 1);
    for mut seq in std::mem::take(&mut sys.sequences) {
        let edge = r.index(n);
        let extra = apply_edge(&mut seq, edge);
        for s in std::iter::once(seq).chain(extra) {
            check_sequence(&s, next.len())?;
            if s.iter().any(|&x| x != 0.0) {
                next.push(s);
            }
        }
    }
    if next.len() > MAX_SEQUENCES {
        return Err(Error::InvalidArgument(format!(
            "split process exceeded {MAX_SEQUENCES} sequences"
        )));
    }
    sys.sequences = next;
    sys.step += 1;
    Ok(())
}

/// Componentwise sum of the sequences.
pub fn split_aggregate(sys: &SplitSystem) -> Vec<f64> {
    let mut out = vec![0.0; sys.n];
    for s in &sys.sequences {
        for (o, x) in out.iter_mut().zip(s) {
            *o += x;
        }
    }
    out
}

/// `Q(x) = Σ (n + 1 - i) x_i` with 1-based `i`.
pub fn q_value(x: &[f64]) -> f64 {
    let n = x.len();
    x.iter().enumerate().map(|(i, v)| (n - i) as f64 * v).sum()
}

/// Q of the aggregate.
pub fn q_functional(sys: &SplitSystem) -> f64 {
    q_value(&split_aggregate(sys))
}

/// Sum over sequences of the L¹ distance to each sequence's own mean.
pub fn split_distance(sys: &SplitSystem) -> f64 {
    sys.sequences
        .iter()
        .map(|s| {
            let mean = s.iter().sum::<f64>() / s.len() as f64;
            s.iter().map(|x| (x - mean).abs()).sum::<f64>()
        })
        .sum()
}

/// Exact expected one-step decrease of Q, by enumerating every sequence's
/// `n` equally likely edges.
pub fn q_expected_decrease(sys: &SplitSystem) -> f64 {
    let n = sys.n;
    let mut total = 0.0;
    for s in &sys.sequences {
        let before = q_value(s);
        for edge in 0..n {
            let mut v = s.clone();
            let extra = apply_edge(&mut v, edge);
            let after = q_value(&v) + extra.map_or(0.0, |e| q_value(&e));
            total += before - after;
        }
    }
    total / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-15)
    }

    #[test]
    fn inner_edge() {
        let mut v = vec![1.0, 0.0, 0.0, 0.0];
        assert!(apply_edge(&mut v, 0).is_none());
        assert_eq!(v, vec![0.5, 0.5, 0.0, 0.0]);
    }

    #[test]
    fn wrap_split_examples() {
        let mut v = vec![0.6, 0.4, 0.0, 0.0];
        let second = apply_edge(&mut v, 3).unwrap();
        assert!(close(&v, &[0.3, 0.3, 0.3, 0.0]));
        assert!(close(&second, &[0.1, 0.0, 0.0, 0.0]));
        assert!((v.iter().sum::<f64>() + second.iter().sum::<f64>() - 1.0).abs() < 1e-15);

        let mut v = vec![0.5, 0.5, 0.0, 0.0];
        let second = apply_edge(&mut v, 3).unwrap();
        assert_eq!(v, vec![0.25, 0.25, 0.25, 0.0]);
        assert_eq!(second, vec![0.25, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn wrap_without_split() {
        let mut v = vec![1.0, 0.0, 0.0, 0.0];
        assert!(apply_edge(&mut v, 3).is_none());
        assert_eq!(v, vec![0.5, 0.5, 0.0, 0.0]);
        let mut v = vec![0.4, 0.2, 0.2, 0.2];
        assert!(apply_edge(&mut v, 3).is_none());
        assert!(close(&v, &[0.3, 0.3, 0.2, 0.2]));
    }

    #[test]
    fn aggregate_of_single_sequence() {
        let sys = SplitSystem::new(vec![0.5, 0.3, 0.2]).unwrap();
        assert_eq!(split_aggregate(&sys), vec![0.5, 0.3, 0.2]);
    }

    #[test]
    fn rejects_unsorted_start() {
        assert!(SplitSystem::new(vec![0.1, 0.5, 0.4]).is_err());
        assert!(SplitSystem::new(vec![0.5, 0.5, -0.1]).is_err());
    }

    #[test]
    fn q_examples() {
        let mut e1 = vec![0.0; 5];
        e1[0] = 1.0;
        assert_eq!(q_value(&e1), 5.0);
        let n = 7;
        let u = vec![1.0 / n as f64; n];
        assert!((q_value(&u) - (n as f64 + 1.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn run_keeps_mass_and_extremes_monotone() {
        let mut sys = SplitSystem::corner(8).unwrap();
        let mut r = RngStream::new(11, 0);
        let mut prev = split_aggregate(&sys);
        let mut q_prev = q_functional(&sys);
        assert_eq!(q_prev, 8.0);
        for _ in 0..60 {
            split_step(&mut sys, &mut r).unwrap();
            let agg = split_aggregate(&sys);
            assert!((agg.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(agg[0] <= prev[0] + 1e-15);
            assert!(agg[7] >= prev[7] - 1e-15);
            let q = q_functional(&sys);
            assert!(q <= q_prev + 1e-12);
            q_prev = q;
            prev = agg;
        }
    }

    #[test]
    fn expected_q_decrease_bound() {
        let mut sys = SplitSystem::corner(6).unwrap();
        let mut r = RngStream::new(3, 0);
        for _ in 0..60 {
            let agg = split_aggregate(&sys);
            let bound = (agg[0] - agg[5]) / 12.0;
            assert!(q_expected_decrease(&sys) >= bound - 1e-12);
            split_step(&mut sys, &mut r).unwrap();
        }
    }
}
