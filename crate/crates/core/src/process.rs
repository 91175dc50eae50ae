//! The averaging process and the slowed pair process.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::RngStream;
use crate::spectral;
use crate::stats::compensated_sum;

/// Node labeling `v(t)` together with its conserved mean.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    values: Vec<f64>,
    mean: f64,
    step: u64,
}

impl StateVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInit("empty state".into()));
        }
        if let Some(i) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidInit(format!("entry {i} is not finite")));
        }
        let mean = compensated_sum(values.iter().copied()) / values.len() as f64;
        Ok(Self {
            values,
            mean,
            step: 0,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total(&self) -> f64 {
        compensated_sum(self.values.iter().copied())
    }

    /// Replaces both endpoints by their average and advances the clock.
    pub fn average(&mut self, i: usize, j: usize) {
        let a = 0.5 * (self.values[i] + self.values[j]);
        self.values[i] = a;
        self.values[j] = a;
        self.step += 1;
    }

    fn idle(&mut self) {
        self.step += 1;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitSpec {
    Corner(usize),
    Vector(PathBuf),
    /// Unit L² Fiedler vector.
    Fiedler,
    /// Fiedler vector scaled to unit L¹ norm.
    FiedlerL1,
    /// Zeros first, then `+1` and `-1` halves, scaled to unit L² norm.
    SignedSplit,
}

impl fmt::Display for InitSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitSpec::Corner(i) => write!(f, "corner:{i}"),
            InitSpec::Vector(p) => write!(f, "vector:{}", p.display()),
            InitSpec::Fiedler => f.write_str("fiedler"),
            InitSpec::FiedlerL1 => f.write_str("fiedler-l1"),
            InitSpec::SignedSplit => f.write_str("signed-split"),
        }
    }
}

impl FromStr for InitSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fiedler" => return Ok(InitSpec::Fiedler),
            "fiedler-l1" => return Ok(InitSpec::FiedlerL1),
            "signed-split" => return Ok(InitSpec::SignedSplit),
            _ => {}
        }
        match s.split_once(':') {
            Some(("corner", i)) => i
                .parse()
                .map(InitSpec::Corner)
                .map_err(|_| Error::InvalidInit(format!("bad corner index `{i}`"))),
            Some(("vector", p)) if !p.is_empty() => Ok(InitSpec::Vector(PathBuf::from(p))),
            _ => Err(Error::InvalidInit(format!("unknown init spec `{s}`"))),
        }
    }
}

/// Number of zero entries in the signed split start: one when `n` is odd
/// (node 0), two for an even star (center and last leaf), none otherwise.
fn signed_split_zeros(g: &Graph) -> usize {
    if g.n() % 2 == 1 {
        1
    } else if matches!(g.spec(), Some(crate::graph::GraphSpec::Star(n)) if *n > 2) {
        2
    } else {
        0
    }
}

pub fn signed_split(g: &Graph) -> Vec<f64> {
    let n = g.n();
    let z = signed_split_zeros(g);
    let half = (n - z) / 2;
    let scale = 1.0 / ((n - z) as f64).sqrt();
    let mut v = vec![0.0; n];
    // Zero slots: node 0, plus node n-1 when a second one is needed.
    let first = if z >= 1 { 1 } else { 0 };
    for (k, x) in v.iter_mut().skip(first).take(2 * half).enumerate() {
        *x = if k < half { scale } else { -scale };
    }
    v
}

pub fn load_vector(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split(|c: char| c.is_whitespace() || c == ',') {
            if tok.is_empty() {
                continue;
            }
            out.push(tok.parse::<f64>().map_err(|_| {
                Error::InvalidInit(format!("line {}: `{tok}` is not a number", idx + 1))
            })?);
        }
    }
    Ok(out)
}

pub fn init_state(g: &Graph, spec: &InitSpec) -> Result<StateVector> {
    let n = g.n();
    let values = match spec {
        InitSpec::Corner(i) => {
            if *i >= n {
                return Err(Error::InvalidInit(format!(
                    "corner {i} out of range for {n} nodes"
                )));
            }
            let mut v = vec![0.0; n];
            v[*i] = 1.0;
            v
        }
        InitSpec::Vector(path) => {
            let v = load_vector(path)?;
            if v.len() != n {
                return Err(Error::InvalidInit(format!(
                    "vector has {} entries, graph has {n} nodes",
                    v.len()
                )));
            }
            v
        }
        InitSpec::Fiedler => spectral::spectral_summary(g)?.fiedler,
        InitSpec::FiedlerL1 => {
            let mut u = spectral::spectral_summary(g)?.fiedler;
            let l1: f64 = u.iter().map(|x| x.abs()).sum();
            u.iter_mut().for_each(|x| *x /= l1);
            u
        }
        InitSpec::SignedSplit => signed_split(g),
    };
    StateVector::new(values)
}

/// One step of the averaging process: a uniform edge is averaged.
pub fn step_average(s: &mut StateVector, g: &Graph, r: &mut RngStream) -> (usize, usize) {
    let (i, j) = g.sample_edge(r);
    s.average(i, j);
    (i, j)
}

/// Uniform unordered pair of distinct nodes, returned as `(min, max)`.
pub fn sample_pair(n: usize, r: &mut RngStream) -> (usize, usize) {
    let i = r.index(n);
    let mut j = r.index(n - 1);
    if j >= i {
        j += 1;
    }
    (i.min(j), i.max(j))
}

/// One step of the slowed process: a uniform pair is averaged only when it
/// is an edge. Returns the pair and whether it acted.
pub fn step_slowed(s: &mut StateVector, g: &Graph, r: &mut RngStream) -> ((usize, usize), bool) {
    let (i, j) = sample_pair(g.n(), r);
    if g.has_edge(i, j) {
        s.average(i, j);
        ((i, j), true)
    } else {
        s.idle();
        ((i, j), false)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Kernel {
    #[default]
    Average,
    Slowed,
}

impl Kernel {
    pub fn step(self, s: &mut StateVector, g: &Graph, r: &mut RngStream) -> ((usize, usize), bool) {
        match self {
            Kernel::Average => (step_average(s, g, r), true),
            Kernel::Slowed => step_slowed(s, g, r),
        }
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kernel::Average => "average",
            Kernel::Slowed => "slowed",
        })
    }
}

impl FromStr for Kernel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "average" => Ok(Kernel::Average),
            "slowed" => Ok(Kernel::Slowed),
            _ => Err(Error::InvalidArgument(format!("unknown kernel `{s}`"))),
        }
    }
}

/// Step record handed to observers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepEvent {
    pub t: u64,
    pub edge: (usize, usize),
    pub acted: bool,
}

/// Applies `steps` steps of `kernel`, calling `observer` after each one. An
/// observer error stops the run and is returned.
pub fn run<E, F>(
    mut s: StateVector,
    g: &Graph,
    kernel: Kernel,
    steps: u64,
    r: &mut RngStream,
    mut observer: F,
) -> std::result::Result<StateVector, E>
where
    F: FnMut(StepEvent, &StateVector) -> std::result::Result<(), E>,
{
    for _ in 0..steps {
        let (edge, acted) = kernel.step(&mut s, g, r);
        observer(
            StepEvent {
                t: s.step(),
                edge,
                acted,
            },
            &s,
        )?;
    }
    Ok(s)
}

/// [`run`] without an observer.
pub fn run_plain(s: StateVector, g: &Graph, kernel: Kernel, steps: u64, r: &mut RngStream) -> StateVector {
    match run(s, g, kernel, steps, r, |_, _| Ok::<(), std::convert::Infallible>(())) {
        Ok(s) => s,
        Err(never) => match never {},
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::make_graph;

    fn g(spec: &str) -> Graph {
        make_graph(&spec.parse().unwrap()).unwrap()
    }

    #[test]
    fn corner_init() {
        let s = init_state(&g("complete:4"), &InitSpec::Corner(0)).unwrap();
        assert_eq!(s.values(), &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(s.mean(), 0.25);
        assert!(init_state(&g("complete:4"), &InitSpec::Corner(4)).is_err());
    }

    #[test]
    fn fiedler_init_on_c4() {
        let s = init_state(&g("cycle:4"), &InitSpec::Fiedler).unwrap();
        let norm: f64 = s.values().iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
        assert!(s.values().iter().sum::<f64>().abs() < 1e-9);
        let s = init_state(&g("cycle:4"), &InitSpec::FiedlerL1).unwrap();
        assert!((s.values().iter().map(|x| x.abs()).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn signed_split_star5() {
        let s = init_state(&g("star:5"), &InitSpec::SignedSplit).unwrap();
        assert_eq!(s.values(), &[0.0, 0.5, 0.5, -0.5, -0.5]);
        assert_eq!(s.mean(), 0.0);
    }

    #[test]
    fn signed_split_shapes() {
        let v = signed_split(&g("star:6"));
        assert_eq!(v[0], 0.0);
        assert_eq!(v[5], 0.0);
        assert_eq!(v[1..5], [0.5, 0.5, -0.5, -0.5]);
        let v = signed_split(&g("complete:4"));
        assert_eq!(v, vec![0.5, 0.5, -0.5, -0.5]);
        for spec in ["btree:15", "complete:7", "star:10", "cycle:12"] {
            let v = signed_split(&g(spec));
            assert!(v.iter().sum::<f64>().abs() < 1e-12, "{spec}");
            assert!((v.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12, "{spec}");
        }
    }

    #[test]
    fn init_spec_parsing() {
        assert_eq!("corner:3".parse::<InitSpec>().unwrap(), InitSpec::Corner(3));
        assert_eq!("fiedler-l1".parse::<InitSpec>().unwrap(), InitSpec::FiedlerL1);
        assert!("corner:-1".parse::<InitSpec>().is_err());
        assert!("spike".parse::<InitSpec>().is_err());
        for s in ["corner:0", "fiedler", "signed-split", "vector:/tmp/v.txt"] {
            assert_eq!(s.parse::<InitSpec>().unwrap().to_string(), s);
        }
    }

    #[test]
    fn vector_init_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.txt");
        std::fs::write(&path, "# start\n0.5 0.25\n0.25\n").unwrap();
        let s = init_state(&g("path:3"), &InitSpec::Vector(path.clone())).unwrap();
        assert_eq!(s.values(), &[0.5, 0.25, 0.25]);
        assert!(init_state(&g("path:4"), &InitSpec::Vector(path)).is_err());
    }

    #[test]
    fn average_step_examples() {
        let k2 = g("complete:2");
        let mut s = StateVector::new(vec![1.0, 0.0]).unwrap();
        let mut r = RngStream::new(1, 0);
        assert_eq!(step_average(&mut s, &k2, &mut r), (0, 1));
        assert_eq!(s.values(), &[0.5, 0.5]);
        assert_eq!(s.step(), 1);

        let mut s = StateVector::new(vec![1.0, 0.0, 0.0]).unwrap();
        s.average(1, 2);
        assert_eq!(s.values(), &[1.0, 0.0, 0.0]);

        let mut s = StateVector::new(vec![0.3, 0.3, 0.4]).unwrap();
        s.average(0, 1);
        assert_eq!(s.values(), &[0.3, 0.3, 0.4]);
    }

    #[test]
    fn slowed_ignores_non_edges() {
        let star = g("star:4");
        let mut r = RngStream::new(2, 0);
        let mut saw_idle = false;
        for _ in 0..200 {
            let mut s = StateVector::new(vec![0.0, 1.0, 0.0, 0.0]).unwrap();
            let before = s.values().to_vec();
            let ((i, j), acted) = step_slowed(&mut s, &star, &mut r);
            assert_eq!(acted, star.has_edge(i, j));
            if !acted {
                saw_idle = true;
                assert_eq!(s.values(), &before[..]);
                assert_eq!(s.step(), 1);
            }
        }
        assert!(saw_idle);
    }

    #[test]
    fn slowed_acting_fraction() {
        let p = g("path:8");
        let mut r = RngStream::new(3, 0);
        let draws = 100_000;
        let mut s = StateVector::new(vec![0.0; 8]).unwrap();
        let acted = (0..draws).filter(|_| step_slowed(&mut s, &p, &mut r).1).count();
        let q = 7.0 / 28.0;
        let sigma = (draws as f64 * q * (1.0 - q)).sqrt();
        assert!((acted as f64 - draws as f64 * q).abs() <= 3.0 * sigma);
    }

    #[test]
    fn slowed_pairs_are_uniform() {
        let mut r = RngStream::new(4, 0);
        let mut counts = std::collections::HashMap::new();
        let draws = 60_000;
        for _ in 0..draws {
            *counts.entry(sample_pair(4, &mut r)).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 6);
        let q = 1.0 / 6.0;
        let sigma = (draws as f64 * q * (1.0 - q)).sqrt();
        assert!(counts.values().all(|&c| (c as f64 - draws as f64 * q).abs() <= 4.0 * sigma));
    }

    #[test]
    fn run_examples() {
        let k2 = g("complete:2");
        let s0 = init_state(&k2, &InitSpec::Corner(0)).unwrap();
        let mut r = RngStream::new(0, 0);
        assert_eq!(run_plain(s0.clone(), &k2, Kernel::Average, 0, &mut r), s0);
        let s1 = run_plain(s0, &k2, Kernel::Average, 1, &mut r);
        assert_eq!(s1.values(), &[0.5, 0.5]);

        let p = g("path:10");
        let trace = |seed| {
            let mut r = RngStream::new(seed, 5);
            let mut edges = Vec::new();
            let s = init_state(&p, &InitSpec::Corner(0)).unwrap();
            let end = run(s, &p, Kernel::Average, 500, &mut r, |e, _| {
                edges.push(e.edge);
                Ok::<(), ()>(())
            })
            .unwrap();
            (edges, end)
        };
        assert_eq!(trace(9), trace(9));
    }

    #[test]
    fn observer_abort_propagates() {
        let p = g("path:5");
        let s = init_state(&p, &InitSpec::Corner(0)).unwrap();
        let mut r = RngStream::new(0, 0);
        let out = run(s, &p, Kernel::Average, 100, &mut r, |e, _| {
            if e.t == 7 {
                Err(e.t)
            } else {
                Ok(())
            }
        });
        assert_eq!(out.unwrap_err(), 7);
    }
}
