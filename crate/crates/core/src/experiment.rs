//! Named experiments, their configuration, and CSV/JSON artifacts.
//!
//! ε is always the raw Def-style statistic `(E‖v(t) - v̄‖_q^q)^(1/q)`. For a
//! probability start and `q = 1` that is an L¹ distance in `[0, 2]`, not a
//! total-variation distance.

use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analysis::bounds::{bound_report, BoundReport};
use crate::analysis::estimate::{
    compare_slowed, compare_split, corner_sweep, default_t_max, estimate_covering_time,
    estimate_mixing_time, stride_grid, CurvePoint, MixingEstimate, MixingParams, DEFAULT_STRIDE,
};
use crate::analysis::functionals::{distance_power, entropy_unchecked, is_probability};
use crate::error::{Error, Result};
use crate::graph::{make_graph, Graph, GraphSpec};
use crate::process::{init_state, InitSpec, Kernel};
use crate::rng::RngStream;
use crate::spectral::{self, SpectralReport, SpectralSummary, DENSE_LIMIT};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const CURVE_HEADER: &str = "t,mean,stderr,trials";
pub const TRAJECTORY_HEADER: &str = "t,norm_l1,norm_l2sq,entropy,aug_entropy";

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<u64>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stride: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetry: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve: Option<String>,
}

/// JSON report written by every experiment.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Report {
    pub version: String,
    pub config: ExperimentConfig,
    pub spectral: Option<SpectralReport>,
    pub bounds: Option<BoundReport>,
    pub estimate: Value,
    pub runtime_seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Artifacts {
    pub report: Report,
    /// Tabular companion: curve, trajectory, comparison or table rows.
    pub csv: Option<String>,
}

impl ExperimentConfig {
    fn need_graph(&self) -> Result<GraphSpec> {
        self.graph
            .as_deref()
            .ok_or_else(|| Error::InvalidArgument(format!("{} needs --graph", self.experiment)))?
            .parse()
    }

    fn init_spec(&self) -> Result<InitSpec> {
        self.init.as_deref().unwrap_or("corner:0").parse()
    }

    fn trials(&self, default: usize) -> usize {
        self.trials.unwrap_or(default)
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

/// Spectral summary when the graph is small enough for a dense solve.
fn maybe_spectral(g: &Graph) -> Result<Option<SpectralSummary>> {
    if g.n() > DENSE_LIMIT {
        Ok(None)
    } else {
        spectral::spectral_summary(g).map(Some)
    }
}

fn resolve_t_max(cfg: &mut ExperimentConfig, g: &Graph, eps: f64) -> Result<u64> {
    let t = match cfg.t_max {
        Some(t) => t,
        None => default_t_max(g, eps).map_err(|_| {
            Error::InvalidArgument("no default horizon for this graph; pass --t-max".into())
        })?,
    };
    cfg.t_max = Some(t);
    Ok(t)
}

/// Runs the experiment named in `config`. Defaults are written back into the
/// embedded config, so running the embedded config reproduces the artifacts.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Artifacts> {
    let start = Instant::now();
    let mut cfg = config.clone();
    let (spectral, bounds, estimate, csv) = match cfg.experiment.as_str() {
        "simulate" => simulate(&mut cfg)?,
        "mix" => mix(&mut cfg)?,
        "cover" => cover(&mut cfg)?,
        "bounds" | "spectral" => spectral_and_bounds(&mut cfg)?,
        "corner-sweep" => sweep(&mut cfg)?,
        "cycle-split" => cycle_split(&mut cfg)?,
        "slowed-compare" => slowed(&mut cfg)?,
        "table" => table(&mut cfg)?,
        other => return Err(Error::InvalidArgument(format!("unknown experiment `{other}`"))),
    };
    Ok(Artifacts {
        report: Report {
            version: VERSION.to_string(),
            config: cfg,
            spectral,
            bounds,
            estimate,
            runtime_seconds: start.elapsed().as_secs_f64(),
        },
        csv,
    })
}

type Parts = (Option<SpectralReport>, Option<BoundReport>, Value, Option<String>);

fn simulate(cfg: &mut ExperimentConfig) -> Result<Parts> {
    let g = make_graph(&cfg.need_graph()?)?;
    let init = cfg.init_spec()?;
    cfg.init = Some(init.to_string());
    let steps = cfg.steps.unwrap_or(1000);
    cfg.steps = Some(steps);
    let stride = *cfg.stride.get_or_insert(1.0);
    if stride.is_nan() || stride < 1.0 {
        return Err(Error::InvalidArgument("stride factor must be at least 1".into()));
    }
    let kernel: Kernel = cfg.kernel.get_or_insert_with(|| "average".into()).parse()?;
    let mut state = init_state(&g, &init)?;
    let beta = spectral::solve_beta(&g)?;
    let mean = state.mean();
    let mut rng = RngStream::new(cfg.seed, 0);
    let mut csv = String::from(TRAJECTORY_HEADER);
    csv.push('\n');
    let mut acted = 0u64;
    let row = |csv: &mut String, t: u64, v: &[f64]| {
        let l1 = distance_power(v, mean, 1.0);
        let l2 = distance_power(v, mean, 2.0);
        if is_probability(v) {
            let s = entropy_unchecked(v);
            let f = s + v.iter().zip(&beta).map(|(x, b)| x * b).sum::<f64>();
            let _ = writeln!(csv, "{t},{l1},{l2},{s},{f}");
        } else {
            let _ = writeln!(csv, "{t},{l1},{l2},,");
        }
    };
    for t in stride_grid(steps, stride) {
        while state.step() < t {
            acted += kernel.step(&mut state, &g, &mut rng).1 as u64;
        }
        row(&mut csv, t, state.values());
    }
    let v = state.values();
    let estimate = json!({
        "steps": steps,
        "kernel": kernel.to_string(),
        "acted_steps": acted,
        "final_norm_l1": distance_power(v, mean, 1.0),
        "final_norm_l2sq": distance_power(v, mean, 2.0),
        "final_state": if g.n() <= 64 { Some(v.to_vec()) } else { None },
    });
    Ok((None, None, estimate, Some(csv)))
}

/// Parses `"p,q"`.
pub fn parse_pq(s: &str) -> Result<(f64, f64)> {
    let bad = || Error::InvalidArgument(format!("expected p,q with p, q >= 1, got `{s}`"));
    let (p, q) = s.split_once(',').ok_or_else(bad)?;
    let p: f64 = p.trim().parse().map_err(|_| bad())?;
    let q: f64 = q.trim().parse().map_err(|_| bad())?;
    if p >= 1.0 && q >= 1.0 {
        Ok((p, q))
    } else {
        Err(bad())
    }
}

pub fn emit_curve(points: &[CurvePoint]) -> String {
    let mut out = String::from(CURVE_HEADER);
    out.push('\n');
    for p in points {
        let _ = writeln!(out, "{},{},{},{}", p.t, p.mean, p.stderr, p.trials);
    }
    out
}

fn mix(cfg: &mut ExperimentConfig) -> Result<Parts> {
    let g = make_graph(&cfg.need_graph()?)?;
    let init = cfg.init_spec()?;
    cfg.init = Some(init.to_string());
    let eps = *cfg.epsilon.get_or_insert(0.25);
    let p = *cfg.p.get_or_insert(1.0);
    let q = *cfg.q.get_or_insert(1.0);
    let trials = cfg.trials(100);
    cfg.trials = Some(trials);
    let stride = *cfg.stride.get_or_insert(DEFAULT_STRIDE);
    let kernel = cfg.kernel.get_or_insert_with(|| "average".into()).clone();
    let t_max = resolve_t_max(cfg, &g, eps)?;
    let summary = maybe_spectral(&g)?;
    let state = init_state(&g, &init)?;
    let est = estimate_mixing_time(
        &g,
        &state,
        &MixingParams {
            epsilon: eps,
            p,
            q,
            trials,
            seed: cfg.seed,
            t_max,
            stride,
            kernel,
        },
    )?;
    let csv = emit_curve(&est.curve);
    let (spectral, bounds) = match &summary {
        Some(s) => (Some(s.report(&g)), Some(bound_report(&g, s, eps)?)),
        None => (None, None),
    };
    Ok((spectral, bounds, to_value(&est), Some(csv)))
}

fn cover(cfg: &mut ExperimentConfig) -> Result<Parts> {
    let g = make_graph(&cfg.need_graph()?)?;
    let corner = match cfg.init_spec()? {
        InitSpec::Corner(i) => i,
        other => {
            return Err(Error::InvalidInit(format!(
                "covering times need a corner start, got {other}"
            )))
        }
    };
    cfg.init = Some(InitSpec::Corner(corner).to_string());
    let alpha = *cfg.alpha.get_or_insert(0.75);
    let trials = cfg.trials(100);
    cfg.trials = Some(trials);
    let t_max = *cfg.t_max.get_or_insert(u64::MAX);
    let est = estimate_covering_time(&g, corner, alpha, trials, cfg.seed, t_max)?;
    let summary = maybe_spectral(&g)?;
    let (spectral, bounds) = match &summary {
        Some(s) => (Some(s.report(&g)), Some(bound_report(&g, s, 1.0 - alpha)?)),
        None => (None, None),
    };
    Ok((spectral, bounds, to_value(&est), None))
}

fn spectral_and_bounds(cfg: &mut ExperimentConfig) -> Result<Parts> {
    let g = make_graph(&cfg.need_graph()?)?;
    let s = spectral::spectral_summary(&g)?;
    let bounds = if cfg.experiment == "bounds" {
        let eps = *cfg.epsilon.get_or_insert(0.1);
        Some(bound_report(&g, &s, eps)?)
    } else {
        None
    };
    let estimate = json!({
        "fiedler": s.fiedler,
        "beta": s.beta,
        "closed_form_lambda2": g.spec().and_then(spectral::closed_form_lambda2),
    });
    Ok((Some(s.report(&g)), bounds, estimate, None))
}

fn sweep(cfg: &mut ExperimentConfig) -> Result<Parts> {
    let g = make_graph(&cfg.need_graph()?)?;
    let t = match cfg.t.as_deref() {
        Some([t]) => *t,
        _ => return Err(Error::InvalidArgument("corner-sweep needs a single --t".into())),
    };
    let trials = cfg.trials(200);
    cfg.trials = Some(trials);
    let symmetry = *cfg.symmetry.get_or_insert(false);
    let res = corner_sweep(&g, t, trials, cfg.seed, symmetry)?;
    let mut csv = String::from("corner,mean,stderr,trials\n");
    for c in &res.corners {
        let _ = writeln!(csv, "{},{},{},{}", c.corner, c.mean, c.stderr, trials);
    }
    Ok((None, None, to_value(&res), Some(csv)))
}

fn cycle_split(cfg: &mut ExperimentConfig) -> Result<Parts> {
    let n = match cfg.need_graph()? {
        GraphSpec::Cycle(n) => n,
        other => {
            return Err(Error::InvalidArgument(format!(
                "cycle-split runs on a cycle, got {other}"
            )))
        }
    };
    let times = cfg.t.get_or_insert_with(|| vec![5, 20, 50]).clone();
    let trials = cfg.trials(2000);
    cfg.trials = Some(trials);
    let pts = compare_split(n, &times, trials, cfg.seed)?;
    let mut csv = String::from("t,mean_average,stderr_average,mean_split,stderr_split\n");
    for p in &pts {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            p.t, p.mean_average, p.stderr_average, p.mean_split, p.stderr_split
        );
    }
    Ok((None, None, to_value(&pts), Some(csv)))
}

fn slowed(cfg: &mut ExperimentConfig) -> Result<Parts> {
    let g = make_graph(&cfg.need_graph()?)?;
    let init = cfg.init_spec()?;
    cfg.init = Some(init.to_string());
    let t_max = *cfg.t_max.get_or_insert(200);
    let trials = cfg.trials(5000);
    cfg.trials = Some(trials);
    let state = init_state(&g, &init)?;
    let pts = compare_slowed(&g, &state, t_max, trials, cfg.seed)?;
    let mut csv = String::from("t,mean_complete,stderr_complete,mean_graph,stderr_graph\n");
    for p in &pts {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            p.t, p.mean_complete, p.stderr_complete, p.mean_graph, p.stderr_graph
        );
    }
    Ok((None, None, to_value(&pts), Some(csv)))
}

fn fmt_opt<T: std::fmt::Display>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Largest `2^k - 1` not exceeding `n` (at least 3).
pub fn btree_size(n: usize) -> usize {
    let mut size = 3;
    while 2 * size < n {
        size = 2 * size + 1;
    }
    size
}

struct TableRun {
    spec: GraphSpec,
    graph: Graph,
    estimate: MixingEstimate,
}

fn table_run(
    spec: GraphSpec,
    init: InitSpec,
    eps: f64,
    (p, q): (f64, f64),
    cfg: &ExperimentConfig,
    trials: usize,
) -> Result<TableRun> {
    let graph = make_graph(&spec)?;
    let state = init_state(&graph, &init)?;
    let t_max = match cfg.t_max {
        Some(t) => t,
        None => default_t_max(&graph, eps)?,
    };
    let estimate = estimate_mixing_time(
        &graph,
        &state,
        &MixingParams {
            epsilon: eps,
            p,
            q,
            trials,
            seed: cfg.seed,
            t_max,
            stride: cfg.stride.unwrap_or(DEFAULT_STRIDE),
            kernel: "average".into(),
        },
    )?;
    Ok(TableRun {
        spec,
        graph,
        estimate,
    })
}

fn table(cfg: &mut ExperimentConfig) -> Result<Parts> {
    let which = cfg
        .table
        .ok_or_else(|| Error::InvalidArgument("table needs a number".into()))?;
    let sizes = cfg.sizes.get_or_insert_with(|| vec![16, 32, 64]).clone();
    if sizes.iter().any(|&n| n < 4) {
        return Err(Error::InvalidArgument("table sizes must be at least 4".into()));
    }
    let eps = *cfg.epsilon.get_or_insert(if which == 1 { 0.5 } else { 0.1 });
    let trials = cfg.trials(20);
    cfg.trials = Some(trials);
    cfg.stride.get_or_insert(DEFAULT_STRIDE);
    let cfg = &*cfg;
    let mut rows = Vec::new();
    let mut csv = String::new();
    match which {
        1 => {
            csv.push_str("family,n,edges,t_hat,scale,ratio,trials\n");
            for &n in &sizes {
                let runs = [
                    (GraphSpec::Regular { n, d: 4, seed: cfg.seed }, InitSpec::Corner(0), false),
                    (GraphSpec::Star(n), InitSpec::Corner(1), false),
                    (GraphSpec::Dumbbell(n / 2), InitSpec::Corner(0), true),
                    (GraphSpec::Cycle(n), InitSpec::Corner(0), true),
                ];
                for (spec, init, cubic) in runs {
                    let run = table_run(spec, init, eps, (1.0, 1.0), cfg, trials)?;
                    let nodes = run.graph.n() as f64;
                    let scale = if cubic { nodes.powi(3) } else { nodes * nodes.ln() };
                    let ratio = run.estimate.t_hat.map(|t| t as f64 / scale);
                    let _ = writeln!(
                        csv,
                        "{},{},{},{},{},{},{}",
                        run.spec.family_name(),
                        run.graph.n(),
                        run.graph.edge_count(),
                        fmt_opt(run.estimate.t_hat),
                        scale,
                        fmt_opt(ratio),
                        trials
                    );
                    rows.push(json!({
                        "graph": run.spec.to_string(),
                        "n": run.graph.n(),
                        "edges": run.graph.edge_count(),
                        "t_hat": run.estimate.t_hat,
                        "scale": scale,
                        "ratio": ratio,
                        "estimate": run.estimate,
                    }));
                }
            }
        }
        2 | 3 => {
            let (pq, header) = if which == 2 {
                ((2.0, 2.0), "family,n,edges,gamma,t_hat,l2_lower,l2_upper,within,trials\n")
            } else {
                (
                    (2.0, 1.0),
                    "family,n,edges,gamma,delta,t_hat,l21_lower_deloc,l21_upper,within,trials\n",
                )
            };
            csv.push_str(header);
            for &n in &sizes {
                let families = [
                    GraphSpec::Complete(n),
                    GraphSpec::BinaryTree(btree_size(n)),
                    GraphSpec::Star(n),
                    GraphSpec::Cycle(n),
                ];
                for spec in families {
                    let init = if which == 3 && !matches!(spec, GraphSpec::Cycle(_)) {
                        InitSpec::SignedSplit
                    } else {
                        InitSpec::Fiedler
                    };
                    let run = table_run(spec, init.clone(), eps, pq, cfg, trials)?;
                    let s = spectral::spectral_summary(&run.graph)?;
                    let b = bound_report(&run.graph, &s, eps)?;
                    let (lo, hi) = if which == 2 {
                        (b.l2_lower, b.l2_upper)
                    } else {
                        (b.l21_lower_deloc, b.l21_upper)
                    };
                    let within = run.estimate.t_hat.map(|t| lo <= t as f64 && t as f64 <= hi);
                    let family = run.spec.family_name();
                    let (nn, m) = (run.graph.n(), run.graph.edge_count());
                    let t_hat = fmt_opt(run.estimate.t_hat);
                    let within_s = fmt_opt(within);
                    if which == 2 {
                        let _ = writeln!(
                            csv,
                            "{family},{nn},{m},{},{t_hat},{lo},{hi},{within_s},{trials}",
                            s.gamma
                        );
                    } else {
                        let _ = writeln!(
                            csv,
                            "{family},{nn},{m},{},{},{t_hat},{lo},{hi},{within_s},{trials}",
                            s.gamma, s.delta
                        );
                    }
                    rows.push(json!({
                        "graph": run.spec.to_string(),
                        "init": init.to_string(),
                        "spectral": s.report(&run.graph),
                        "bounds": b,
                        "t_hat": run.estimate.t_hat,
                        "within": within,
                        "estimate": run.estimate,
                    }));
                }
            }
        }
        _ => return Err(Error::InvalidArgument(format!("no table {which}; expected 1, 2 or 3"))),
    }
    Ok((None, None, Value::Array(rows), Some(csv)))
}

/// Report as pretty JSON with a trailing newline.
pub fn render_report(report: &Report) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(experiment: &str, graph: &str) -> ExperimentConfig {
        ExperimentConfig {
            experiment: experiment.into(),
            graph: Some(graph.into()),
            seed: 7,
            ..Default::default()
        }
    }

    #[test]
    fn k2_curve_rows() {
        let mut c = cfg("mix", "complete:2");
        c.epsilon = Some(0.1);
        c.trials = Some(3);
        let art = run_experiment(&c).unwrap();
        assert_eq!(
            art.csv.unwrap(),
            "t,mean,stderr,trials\n0,1,0,3\n1,0,0,3\n"
        );
    }

    #[test]
    fn defaults_are_embedded_and_replay_matches() {
        let mut c = cfg("mix", "cycle:12");
        c.trials = Some(8);
        let a = run_experiment(&c).unwrap();
        let embedded = a.report.config.clone();
        assert_eq!(embedded.epsilon, Some(0.25));
        assert!(embedded.t_max.is_some());
        let b = run_experiment(&embedded).unwrap();
        assert_eq!(a.csv, b.csv);
        assert_eq!(a.report.estimate, b.report.estimate);
        assert_eq!(b.report.config, embedded);
    }

    #[test]
    fn bounds_star64() {
        let mut c = cfg("bounds", "star:64");
        c.epsilon = Some(0.1);
        let art = run_experiment(&c).unwrap();
        let b = art.report.bounds.unwrap();
        assert!((b.gamma - 63.0).abs() < 1e-8);
        assert_eq!(art.report.spectral.unwrap().edges, 63);
    }

    #[test]
    fn pq_parsing() {
        assert_eq!(parse_pq("2,1").unwrap(), (2.0, 1.0));
        assert!(parse_pq("0,1").is_err());
        assert!(parse_pq("2").is_err());
    }

    #[test]
    fn btree_rounding() {
        assert_eq!(btree_size(16), 15);
        assert_eq!(btree_size(15), 15);
        assert_eq!(btree_size(64), 63);
        assert_eq!(btree_size(4), 3);
    }

    #[test]
    fn simulate_trajectory() {
        let mut c = cfg("simulate", "path:4");
        c.steps = Some(5);
        let art = run_experiment(&c).unwrap();
        let csv = art.csv.unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(TRAJECTORY_HEADER));
        assert_eq!(lines.next(), Some("0,1.5,0.75,0,0"));
        assert_eq!(csv.lines().count(), 7);
    }

    #[test]
    fn unknown_experiment() {
        assert!(run_experiment(&cfg("plot", "path:4")).is_err());
    }
}
