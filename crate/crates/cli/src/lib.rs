//! Argument handling for the `avgmix` binary.
//!
//! Exit codes: 0 on success (including unconverged estimates, which are
//! flagged in the report), 1 on usage errors, 2 on runtime errors.

use std::ffi::OsString;
use std::path::PathBuf;

use avgmix::experiment::{parse_pq, render_report, run_experiment, ExperimentConfig};
use avgmix::{Error, GraphSpec};
use clap::{Args, Parser, Subcommand};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "avgmix", version, about = "Repeated-averaging process experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one trajectory and record its functionals.
    Simulate(Common),
    /// Estimate an epsilon-mixing time.
    Mix(Common),
    /// Estimate an alpha-covering time from a corner.
    Cover(Common),
    /// Closed-form bounds from the spectrum.
    Bounds(Common),
    /// Spectral summary: lambda2, gamma, Fiedler vector, delocalization, beta.
    Spectral(Common),
    /// Mean L1 distance at time t from every corner start.
    CornerSweep(Common),
    /// Averaging process against the splitting process on a cycle.
    CycleSplit(Common),
    /// Slowed pair process on the complete graph against the given graph.
    SlowedCompare(Common),
    /// Reproduce one of the scaling tables (1, 2 or 3).
    Table {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
        which: u8,
        #[command(flatten)]
        common: Common,
    },
}

fn parse_graph(s: &str) -> Result<String, String> {
    s.parse::<GraphSpec>().map(|g| g.to_string()).map_err(|e| e.to_string())
}

fn parse_init(s: &str) -> Result<String, String> {
    s.parse::<avgmix::process::InitSpec>()
        .map(|i| i.to_string())
        .map_err(|e| e.to_string())
}

fn parse_pq_arg(s: &str) -> Result<(f64, f64), String> {
    parse_pq(s).map_err(|e| e.to_string())
}

fn parse_kernel(s: &str) -> Result<String, String> {
    s.parse::<avgmix::process::Kernel>()
        .map(|k| k.to_string())
        .map_err(|e| e.to_string())
}

#[derive(Debug, Args)]
struct Common {
    /// Graph spec, e.g. complete:64, regular:256,4,1, file:edges.txt
    #[arg(long, value_parser = parse_graph)]
    graph: Option<String>,
    /// corner:i | vector:PATH | fiedler | fiedler-l1 | signed-split
    #[arg(long, value_parser = parse_init)]
    init: Option<String>,
    /// Threshold on (E||v(t) - mean||_q^q)^(1/q), not a TV distance
    #[arg(long)]
    eps: Option<f64>,
    /// Norm pair p,q: start on the unit L^p sphere, measure in L^q
    #[arg(long, value_parser = parse_pq_arg)]
    pq: Option<(f64, f64)>,
    /// Independent trials per estimate
    #[arg(long)]
    trials: Option<usize>,
    /// Step budget; defaults to a multiple of the relaxation time
    #[arg(long)]
    t_max: Option<u64>,
    /// Master seed; trial k uses stream k
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Geometric growth factor of the recording grid
    #[arg(long)]
    stride: Option<f64>,
    /// JSON report path (tables: CSV path, report goes to PATH.json)
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV path for curves, trajectories and comparisons
    #[arg(long)]
    curve: Option<PathBuf>,
    /// Trajectory length for simulate
    #[arg(long)]
    steps: Option<u64>,
    /// Covering fraction: stop once alpha*n entries are nonzero
    #[arg(long)]
    alpha: Option<f64>,
    /// Time (corner-sweep) or comma-separated times (cycle-split)
    #[arg(long, value_delimiter = ',')]
    t: Option<Vec<u64>>,
    /// Comma-separated sizes for tables
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// average | slowed
    #[arg(long, value_parser = parse_kernel)]
    kernel: Option<String>,
    /// Corner sweep over orbit representatives only
    #[arg(long)]
    symmetry: bool,
}

impl Common {
    fn into_config(self, experiment: &str, table: Option<u8>) -> ExperimentConfig {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        ExperimentConfig {
            experiment: experiment.to_string(),
            table,
            graph: self.graph,
            init: self.init,
            epsilon: self.eps,
            p: self.pq.map(|(p, _)| p),
            q: self.pq.map(|(_, q)| q),
            trials: self.trials,
            t_max: self.t_max,
            seed: self.seed,
            stride: self.stride,
            kernel: self.kernel,
            steps: self.steps,
            alpha: self.alpha,
            t: self.t,
            sizes: self.sizes,
            symmetry: self.symmetry.then_some(true),
            out: path(&self.out),
            curve: path(&self.curve),
        }
    }
}

fn write_or_print(path: Option<&str>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) | Error::InvalidGraphSpec { .. } | Error::InvalidInit(_) => {
            EXIT_USAGE
        }
        _ => EXIT_RUNTIME,
    }
}

fn execute(config: ExperimentConfig) -> Result<(), Error> {
    let art = run_experiment(&config)?;
    let report = render_report(&art.report);
    let out = config.out.as_deref();
    if config.experiment == "table" {
        write_or_print(out, art.csv.as_deref().unwrap_or(""))?;
        if let Some(p) = out {
            std::fs::write(format!("{p}.json"), report)?;
        }
    } else {
        write_or_print(out, &report)?;
        if let (Some(path), Some(csv)) = (config.curve.as_deref(), art.csv.as_deref()) {
            std::fs::write(path, csv)?;
        }
    }
    Ok(())
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let config = match cli.command {
        Command::Simulate(c) => c.into_config("simulate", None),
        Command::Mix(c) => c.into_config("mix", None),
        Command::Cover(c) => c.into_config("cover", None),
        Command::Bounds(c) => c.into_config("bounds", None),
        Command::Spectral(c) => c.into_config("spectral", None),
        Command::CornerSweep(c) => c.into_config("corner-sweep", None),
        Command::CycleSplit(c) => c.into_config("cycle-split", None),
        Command::SlowedCompare(c) => c.into_config("slowed-compare", None),
        Command::Table { which, common } => common.into_config("table", Some(which)),
    };
    match execute(config) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
