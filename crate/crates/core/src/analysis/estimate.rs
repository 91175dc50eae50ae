//! Monte Carlo estimators. Trial `k` always draws from stream `k` of the
//! master seed, and every reduction runs in trial order.

use serde::{Deserialize, Serialize};

use crate::analysis::functionals::{distance_power, lp_norm};
use crate::error::{Error, Result};
use crate::graph::{Graph, GraphSpec};
use crate::parallel::{map_mut, map_trials};
use crate::process::{sample_pair, Kernel, StateVector};
use crate::rng::RngStream;
use crate::split::{split_distance, split_step, SplitSystem};
use crate::stats::{mean_se, MeanSe};

/// Default geometric growth factor of the recording grid.
pub const DEFAULT_STRIDE: f64 = 1.1;

/// Tolerance for the unit-sphere check on initial states.
pub const SPHERE_TOLERANCE: f64 = 1e-9;

/// Stream offset separating split-process trials from averaging trials.
pub const SPLIT_STREAM_OFFSET: u64 = 1 << 32;

/// `20 γ ln(n/ε)`, rounded up.
pub fn default_t_max(g: &Graph, epsilon: f64) -> Result<u64> {
    let gamma = crate::spectral::gamma(g)?;
    Ok((20.0 * gamma * (g.n() as f64 / epsilon).ln()).ceil().max(1.0) as u64)
}

/// Recording times `0, 1, ..` with `t_{k+1} = max(t_k + 1, round(stride t_k))`,
/// capped by and ending at `t_max`.
pub fn stride_grid(t_max: u64, stride: f64) -> Vec<u64> {
    let mut grid = vec![0];
    let mut t = 0u64;
    while t < t_max {
        let next = ((t as f64 * stride).round() as u64).max(t + 1).min(t_max);
        grid.push(next);
        t = next;
    }
    grid
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MixingParams {
    pub epsilon: f64,
    pub p: f64,
    pub q: f64,
    pub trials: usize,
    pub seed: u64,
    pub t_max: u64,
    pub stride: f64,
    pub kernel: String,
}

impl MixingParams {
    pub fn validate(&self) -> Result<Kernel> {
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(Error::InvalidArgument("epsilon must be positive".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidArgument("at least one trial is required".into()));
        }
        if self.p.is_nan() || self.q.is_nan() || self.p < 1.0 || self.q < 1.0 {
            return Err(Error::InvalidArgument("norm exponents must be at least 1".into()));
        }
        if self.stride.is_nan() || self.stride < 1.0 {
            return Err(Error::InvalidArgument("stride factor must be at least 1".into()));
        }
        self.kernel.parse()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CurvePoint {
    pub t: u64,
    /// Mean of `‖v(t) - v̄‖_q^q` over trials.
    pub mean_power: f64,
    pub stderr_power: f64,
    /// `mean_power^(1/q)`, the statistic compared against ε.
    pub mean: f64,
    /// Delta-method standard error of `mean`.
    pub stderr: f64,
    pub trials: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MixingEstimate {
    pub epsilon: f64,
    pub p: f64,
    pub q: f64,
    pub kernel: String,
    /// First integer step at or after the interpolated crossing.
    pub t_hat: Option<u64>,
    /// Linearly interpolated crossing time.
    pub t_cross: Option<f64>,
    /// Width of the grid bracket holding the crossing.
    pub grid_resolution: Option<u64>,
    pub converged: bool,
    pub trials: usize,
    pub seed: u64,
    pub t_max: u64,
    pub curve: Vec<CurvePoint>,
}

fn curve_point(t: u64, powers: &[f64], q: f64) -> CurvePoint {
    let MeanSe { mean, stderr, count } = mean_se(powers);
    let stat = mean.max(0.0).powf(1.0 / q);
    let stat_se = if q == 1.0 {
        stderr
    } else if mean > 0.0 {
        stderr / (q * mean.powf((q - 1.0) / q))
    } else {
        0.0
    };
    CurvePoint {
        t,
        mean_power: mean,
        stderr_power: stderr,
        mean: stat,
        stderr: stat_se,
        trials: count,
    }
}

/// Estimates the ε-mixing time of the statistic `(E‖v(t) - v̄‖_q^q)^(1/q)`
/// from a fixed start on the unit L^p sphere. Trials advance together along
/// the grid and stop at the first grid time whose mean is at most ε.
pub fn estimate_mixing_time(
    g: &Graph,
    init: &StateVector,
    params: &MixingParams,
) -> Result<MixingEstimate> {
    let kernel = params.validate()?;
    let norm = lp_norm(init.values(), params.p);
    if (norm - 1.0).abs() > SPHERE_TOLERANCE {
        return Err(Error::InvalidInit(format!(
            "start has L^{} norm {norm}, expected 1",
            params.p
        )));
    }
    if init.len() != g.n() {
        return Err(Error::InvalidInit("start length differs from node count".into()));
    }
    let q = params.q;
    let mean = init.mean();
    let mut trials: Vec<(StateVector, RngStream)> = (0..params.trials)
        .map(|k| (init.clone(), RngStream::for_trial(params.seed, k)))
        .collect();

    let grid = stride_grid(params.t_max, params.stride);
    let mut curve: Vec<CurvePoint> = Vec::new();
    let mut crossing = None;
    for &t in &grid {
        let powers = map_mut(&mut trials, |(s, r)| {
            while s.step() < t {
                kernel.step(s, g, r);
            }
            distance_power(s.values(), mean, q)
        });
        let point = curve_point(t, &powers, q);
        let hit = point.mean <= params.epsilon;
        curve.push(point);
        if hit {
            crossing = Some(curve.len() - 1);
            break;
        }
    }

    let (t_hat, t_cross, grid_resolution) = match crossing {
        Some(0) => (Some(0), Some(0.0), Some(0)),
        Some(k) => {
            let (a, b) = (&curve[k - 1], &curve[k]);
            let frac = (a.mean - params.epsilon) / (a.mean - b.mean);
            let cross = a.t as f64 + frac * (b.t - a.t) as f64;
            let hat = (cross.ceil() as u64).clamp(a.t + 1, b.t);
            (Some(hat), Some(cross), Some(b.t - a.t))
        }
        None => (None, None, None),
    };
    Ok(MixingEstimate {
        epsilon: params.epsilon,
        p: params.p,
        q,
        kernel: kernel.to_string(),
        t_hat,
        t_cross,
        grid_resolution,
        converged: crossing.is_some(),
        trials: params.trials,
        seed: params.seed,
        t_max: params.t_max,
        curve,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CoveringEstimate {
    pub corner: usize,
    pub alpha: f64,
    /// Smallest nonzero count satisfying `count >= alpha n`.
    pub target: usize,
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
    /// Trials that hit `t_max` first; they contribute `t_max`.
    pub censored: usize,
    pub seed: u64,
    pub t_max: u64,
}

/// First step at which at least `alpha n` entries are nonzero, from `e_corner`.
pub fn covering_time(g: &Graph, corner: usize, target: usize, t_max: u64, r: &mut RngStream) -> Option<u64> {
    let mut v = vec![0.0; g.n()];
    v[corner] = 1.0;
    let mut nonzero = 1usize;
    let mut t = 0u64;
    while nonzero < target {
        if t == t_max {
            return None;
        }
        let (i, j) = g.sample_edge(r);
        let before = (v[i] != 0.0) as usize + (v[j] != 0.0) as usize;
        let a = 0.5 * (v[i] + v[j]);
        v[i] = a;
        v[j] = a;
        let after = 2 * (a != 0.0) as usize;
        nonzero = nonzero + after - before;
        t += 1;
    }
    Some(t)
}

pub fn estimate_covering_time(
    g: &Graph,
    corner: usize,
    alpha: f64,
    trials: usize,
    seed: u64,
    t_max: u64,
) -> Result<CoveringEstimate> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    if corner >= g.n() {
        return Err(Error::InvalidInit(format!("corner {corner} out of range")));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is required".into()));
    }
    let n = g.n();
    let target = (1..=n).find(|&k| k as f64 >= alpha * n as f64).unwrap_or(n);
    let times = map_trials(trials, |k| {
        covering_time(g, corner, target, t_max, &mut RngStream::for_trial(seed, k))
    });
    let censored = times.iter().filter(|t| t.is_none()).count();
    let values: Vec<f64> = times.iter().map(|t| t.unwrap_or(t_max) as f64).collect();
    let m = mean_se(&values);
    Ok(CoveringEstimate {
        corner,
        alpha,
        target,
        mean: m.mean,
        stderr: m.stderr,
        trials,
        censored,
        seed,
        t_max,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FlowSummary {
    pub steps: u64,
    pub first_flow: f64,
    pub cumulative: f64,
    pub min_flow: f64,
    pub negative_steps: u64,
    /// Steps after which `v` was not non-increasing left to right.
    pub monotone_violations: u64,
}

/// Runs the path from `e_0`, reporting the mass `F(t) = (v_I - v_{I+1}) / 2`
/// moved across the chosen edge `(I, I+1)` at every step.
pub fn flow_run<F: FnMut(u64, f64, &[f64])>(
    g: &Graph,
    steps: u64,
    r: &mut RngStream,
    mut on_step: F,
) -> Result<()> {
    if !matches!(g.spec(), Some(GraphSpec::Path(_))) {
        return Err(Error::InvalidArgument("flow tracking needs a path graph".into()));
    }
    let mut v = vec![0.0; g.n()];
    v[0] = 1.0;
    for t in 1..=steps {
        let (i, j) = g.sample_edge(r);
        let flow = 0.5 * (v[i] - v[j]);
        let a = 0.5 * (v[i] + v[j]);
        v[i] = a;
        v[j] = a;
        on_step(t, flow, &v);
    }
    Ok(())
}

pub fn flow_summary(g: &Graph, steps: u64, seed: u64) -> Result<FlowSummary> {
    let mut r = RngStream::new(seed, 0);
    let mut acc = crate::stats::Neumaier::new();
    let mut first_flow = f64::NAN;
    let mut min_flow = f64::INFINITY;
    let mut negative_steps = 0;
    let mut monotone_violations = 0;
    flow_run(g, steps, &mut r, |t, f, v| {
        if t == 1 {
            first_flow = f;
        }
        acc.add(f);
        min_flow = min_flow.min(f);
        negative_steps += (f < 0.0) as u64;
        monotone_violations += v.windows(2).any(|w| w[0] < w[1]) as u64;
    })?;
    Ok(FlowSummary {
        steps,
        first_flow,
        cumulative: acc.value(),
        min_flow,
        negative_steps,
        monotone_violations,
    })
}

/// Orbit representatives for the families whose symmetry is known.
pub fn corner_representatives(g: &Graph) -> Vec<usize> {
    match *g.spec().unwrap_or(&GraphSpec::File(Default::default())) {
        GraphSpec::Complete(_) | GraphSpec::Cycle(_) => vec![0],
        GraphSpec::Star(n) if n > 2 => vec![0, 1],
        GraphSpec::Star(_) => vec![0],
        GraphSpec::Bipartite(a, _) => vec![0, a],
        GraphSpec::Path(n) => (0..n.div_ceil(2)).collect(),
        GraphSpec::Dumbbell(n) if n > 2 => vec![0, n - 1],
        GraphSpec::Dumbbell(n) => vec![n - 1],
        GraphSpec::BinaryTree(n) => {
            // Leftmost node at each depth: 0, 1, 2, ...
            let depth = (n + 1).trailing_zeros() as usize;
            (0..depth).collect()
        }
        _ => (0..g.n()).collect(),
    }
}

/// Evolves the starts `e_c` for every `c` in `corners` under one shared edge
/// stream. Row `i` of the returned buffer holds node `i` across corners.
fn coupled_corners(g: &Graph, corners: &[usize], t: u64, r: &mut RngStream) -> Vec<f64> {
    let width = corners.len();
    let mut w = vec![0.0; g.n() * width];
    for (col, &c) in corners.iter().enumerate() {
        w[c * width + col] = 1.0;
    }
    for _ in 0..t {
        let (i, j) = g.sample_edge(r);
        for col in 0..width {
            let a = 0.5 * (w[i * width + col] + w[j * width + col]);
            w[i * width + col] = a;
            w[j * width + col] = a;
        }
    }
    w
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CornerStat {
    pub corner: usize,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CornerSweep {
    pub t: u64,
    pub trials: usize,
    pub seed: u64,
    pub symmetry: bool,
    pub corners: Vec<CornerStat>,
    pub worst: usize,
}

/// Mean `‖v(t) - v̄‖₁` from every corner start. All corners share each trial's
/// edge stream. With `symmetry`, only orbit representatives are run.
pub fn corner_sweep(g: &Graph, t: u64, trials: usize, seed: u64, symmetry: bool) -> Result<CornerSweep> {
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is required".into()));
    }
    let corners = if symmetry {
        corner_representatives(g)
    } else {
        (0..g.n()).collect()
    };
    let n = g.n();
    let width = corners.len();
    let mean = 1.0 / n as f64;
    let per_trial = map_trials(trials, |k| {
        let w = coupled_corners(g, &corners, t, &mut RngStream::for_trial(seed, k));
        (0..width)
            .map(|col| distance_power(&(0..n).map(|i| w[i * width + col]).collect::<Vec<_>>(), mean, 1.0))
            .collect::<Vec<f64>>()
    });
    let stats: Vec<CornerStat> = corners
        .iter()
        .enumerate()
        .map(|(col, &c)| {
            let xs: Vec<f64> = per_trial.iter().map(|row| row[col]).collect();
            let m = mean_se(&xs);
            CornerStat {
                corner: c,
                mean: m.mean,
                stderr: m.stderr,
            }
        })
        .collect();
    let worst = stats
        .iter()
        .max_by(|a, b| a.mean.total_cmp(&b.mean).then(b.corner.cmp(&a.corner)))
        .map(|s| s.corner)
        .unwrap_or(0);
    Ok(CornerSweep {
        t,
        trials,
        seed,
        symmetry,
        corners: stats,
        worst,
    })
}

/// One coupled trajectory: returns `‖v(t) - v̄‖₁` for `v = Σ λ_c e_c` and the
/// weighted sum `Σ λ_c ‖e_c(t) - v̄‖₁`, both under the same edge stream.
pub fn convex_coupling(g: &Graph, lambda: &[f64], t: u64, r: &mut RngStream) -> Result<(f64, f64)> {
    let n = g.n();
    if lambda.len() != n || lambda.iter().any(|&l| l.is_nan() || l < 0.0) {
        return Err(Error::InvalidArgument("weights must be non-negative, one per node".into()));
    }
    let total: f64 = lambda.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("weights sum to {total}")));
    }
    let corners: Vec<usize> = (0..n).collect();
    let width = n + 1;
    let mut w = vec![0.0; n * width];
    for (col, &c) in corners.iter().enumerate() {
        w[c * width + col] = 1.0;
    }
    for (i, &l) in lambda.iter().enumerate() {
        w[i * width + n] = l;
    }
    for _ in 0..t {
        let (i, j) = g.sample_edge(r);
        for col in 0..width {
            let a = 0.5 * (w[i * width + col] + w[j * width + col]);
            w[i * width + col] = a;
            w[j * width + col] = a;
        }
    }
    let mean = 1.0 / n as f64;
    let column = |col: usize| (0..n).map(|i| w[i * width + col]).collect::<Vec<f64>>();
    let combined = distance_power(&column(n), mean, 1.0);
    let weighted = crate::stats::compensated_sum(
        (0..n).map(|c| lambda[c] * distance_power(&column(c), mean, 1.0)),
    );
    Ok((combined, weighted))
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SplitComparisonPoint {
    pub t: u64,
    pub mean_average: f64,
    pub stderr_average: f64,
    pub mean_split: f64,
    pub stderr_split: f64,
    /// `sqrt(se_a² + se_s²)`.
    pub combined_stderr: f64,
}

/// L¹ distance of the averaging process on `C_n` from `e_0` against the split
/// process from the same start. The two use independent streams.
pub fn compare_split(n: usize, times: &[u64], trials: usize, seed: u64) -> Result<Vec<SplitComparisonPoint>> {
    if trials == 0 || times.is_empty() {
        return Err(Error::InvalidArgument("need trials and at least one time".into()));
    }
    let cycle = crate::graph::make_graph(&GraphSpec::Cycle(n))?;
    let mut times = times.to_vec();
    times.sort_unstable();
    times.dedup();
    let mean = 1.0 / n as f64;
    let avg_runs = map_trials(trials, |k| {
        let mut r = RngStream::for_trial(seed, k);
        let mut v = vec![0.0; n];
        v[0] = 1.0;
        let mut t = 0;
        times
            .iter()
            .map(|&target| {
                while t < target {
                    let (i, j) = cycle.sample_edge(&mut r);
                    let a = 0.5 * (v[i] + v[j]);
                    v[i] = a;
                    v[j] = a;
                    t += 1;
                }
                distance_power(&v, mean, 1.0)
            })
            .collect::<Vec<f64>>()
    });
    let split_runs = map_trials(trials, |k| -> Result<Vec<f64>> {
        let mut r = RngStream::new(seed, SPLIT_STREAM_OFFSET + k as u64);
        let mut sys = SplitSystem::corner(n)?;
        let mut out = Vec::with_capacity(times.len());
        for &target in &times {
            while sys.step() < target {
                split_step(&mut sys, &mut r)?;
            }
            out.push(split_distance(&sys));
        }
        Ok(out)
    });
    let split_runs: Vec<Vec<f64>> = split_runs.into_iter().collect::<Result<_>>()?;
    Ok(times
        .iter()
        .enumerate()
        .map(|(idx, &t)| {
            let a = mean_se(&avg_runs.iter().map(|r| r[idx]).collect::<Vec<_>>());
            let s = mean_se(&split_runs.iter().map(|r| r[idx]).collect::<Vec<_>>());
            SplitComparisonPoint {
                t,
                mean_average: a.mean,
                stderr_average: a.stderr,
                mean_split: s.mean,
                stderr_split: s.stderr,
                combined_stderr: (a.stderr * a.stderr + s.stderr * s.stderr).sqrt(),
            }
        })
        .collect())
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SlowedPoint {
    pub t: u64,
    pub mean_complete: f64,
    pub stderr_complete: f64,
    pub mean_graph: f64,
    pub stderr_graph: f64,
    /// `sqrt(se_K² + se_G²)`.
    pub combined_stderr: f64,
    /// Standard error of the paired difference `T_K - T_G`.
    pub stderr_difference: f64,
}

/// Slowed process on `K_n` and on `g` from the same start, driven by the same
/// pair draws. Returns `T(t) = ‖v(t) - v̄‖₁` for `t = 0..=t_max`.
pub fn compare_slowed(g: &Graph, init: &StateVector, t_max: u64, trials: usize, seed: u64) -> Result<Vec<SlowedPoint>> {
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is required".into()));
    }
    if init.len() != g.n() {
        return Err(Error::InvalidInit("start length differs from node count".into()));
    }
    let n = g.n();
    let mean = init.mean();
    let runs = map_trials(trials, |k| {
        let mut r = RngStream::for_trial(seed, k);
        let mut vk = init.values().to_vec();
        let mut vg = vk.clone();
        let mut out = Vec::with_capacity(2 * (t_max as usize + 1));
        out.push(distance_power(&vk, mean, 1.0));
        out.push(distance_power(&vg, mean, 1.0));
        for _ in 0..t_max {
            let (i, j) = sample_pair(n, &mut r);
            let a = 0.5 * (vk[i] + vk[j]);
            vk[i] = a;
            vk[j] = a;
            if g.has_edge(i, j) {
                let a = 0.5 * (vg[i] + vg[j]);
                vg[i] = a;
                vg[j] = a;
            }
            out.push(distance_power(&vk, mean, 1.0));
            out.push(distance_power(&vg, mean, 1.0));
        }
        out
    });
    Ok((0..=t_max as usize)
        .map(|t| {
            let ks: Vec<f64> = runs.iter().map(|r| r[2 * t]).collect();
            let gs: Vec<f64> = runs.iter().map(|r| r[2 * t + 1]).collect();
            let diffs: Vec<f64> = ks.iter().zip(&gs).map(|(a, b)| a - b).collect();
            let (mk, mg) = (mean_se(&ks), mean_se(&gs));
            SlowedPoint {
                t: t as u64,
                mean_complete: mk.mean,
                stderr_complete: mk.stderr,
                mean_graph: mg.mean,
                stderr_graph: mg.stderr,
                combined_stderr: (mk.stderr * mk.stderr + mg.stderr * mg.stderr).sqrt(),
                stderr_difference: mean_se(&diffs).stderr,
            }
        })
        .collect())
}
