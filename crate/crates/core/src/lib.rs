//! Simulation and analysis of the repeated-averaging process on graphs.

pub mod analysis;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod parallel;
pub mod process;
pub mod rng;
pub mod spectral;
pub mod split;
pub mod stats;

pub use error::{Error, Result};
pub use graph::{load_edge_list, make_graph, Graph, GraphSpec};
pub use rng::RngStream;
