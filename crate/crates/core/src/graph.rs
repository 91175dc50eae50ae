//! Graph construction, validation and uniform edge sampling.
//!
//! Labeling conventions for the named families:
//!
//! - `star:n`: center is node 0, leaves are `1..n`.
//! - `dumbbell:n`: cliques on `0..n` and `n..2n`, bridge `(n-1, 2n-1)`.
//! - `btree:n`: root is node 0; nodes are numbered in pre-order, so the left
//!   subtree occupies `1..=(n-1)/2` and the right subtree the rest.
//! - `bipartite:a,b`: sides `0..a` and `a..a+b`.
//!
//! Family edge lists are sorted lexicographically by `(min, max)`; ingested
//! edge lists keep file order.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Attempts allowed to the pairing model before giving up.
pub const REGULAR_RETRY_BUDGET: usize = 1000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GraphSpec {
    Complete(usize),
    Path(usize),
    Cycle(usize),
    Star(usize),
    Dumbbell(usize),
    BinaryTree(usize),
    Bipartite(usize, usize),
    Regular { n: usize, d: usize, seed: u64 },
    File(PathBuf),
}

impl GraphSpec {
    /// Node count implied by the spec, when known without reading a file.
    pub fn node_count(&self) -> Option<usize> {
        match *self {
            GraphSpec::Complete(n)
            | GraphSpec::Path(n)
            | GraphSpec::Cycle(n)
            | GraphSpec::Star(n)
            | GraphSpec::BinaryTree(n)
            | GraphSpec::Regular { n, .. } => Some(n),
            GraphSpec::Dumbbell(n) => Some(2 * n),
            GraphSpec::Bipartite(a, b) => Some(a + b),
            GraphSpec::File(_) => None,
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            GraphSpec::Complete(_) => "complete",
            GraphSpec::Path(_) => "path",
            GraphSpec::Cycle(_) => "cycle",
            GraphSpec::Star(_) => "star",
            GraphSpec::Dumbbell(_) => "dumbbell",
            GraphSpec::BinaryTree(_) => "btree",
            GraphSpec::Bipartite(..) => "bipartite",
            GraphSpec::Regular { .. } => "regular",
            GraphSpec::File(_) => "file",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |reason: &str| {
            Err(Error::InvalidGraphSpec {
                spec: self.to_string(),
                reason: reason.to_string(),
            })
        };
        match *self {
            GraphSpec::Complete(n)
            | GraphSpec::Path(n)
            | GraphSpec::Star(n)
            | GraphSpec::Dumbbell(n)
                if n < 2 =>
            {
                fail("n must be at least 2")
            }
            GraphSpec::Cycle(n) if n < 3 => fail("a cycle needs at least 3 nodes"),
            GraphSpec::BinaryTree(n) if n < 3 || !(n + 1).is_power_of_two() => {
                fail("btree size must be 2^k - 1 with k >= 2")
            }
            GraphSpec::Bipartite(a, b) if a == 0 || b == 0 => fail("both sides must be non-empty"),
            GraphSpec::Regular { n, d, .. } => {
                if n < 2 {
                    fail("n must be at least 2")
                } else if d == 0 || d >= n {
                    fail("degree must satisfy 0 < d < n")
                } else if (n * d) % 2 != 0 {
                    fail("n * d must be even")
                } else if d == 1 && n > 2 {
                    fail("a 1-regular graph on more than 2 nodes is disconnected")
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSpec::Complete(n) => write!(f, "complete:{n}"),
            GraphSpec::Path(n) => write!(f, "path:{n}"),
            GraphSpec::Cycle(n) => write!(f, "cycle:{n}"),
            GraphSpec::Star(n) => write!(f, "star:{n}"),
            GraphSpec::Dumbbell(n) => write!(f, "dumbbell:{n}"),
            GraphSpec::BinaryTree(n) => write!(f, "btree:{n}"),
            GraphSpec::Bipartite(a, b) => write!(f, "bipartite:{a},{b}"),
            GraphSpec::Regular { n, d, seed } => write!(f, "regular:{n},{d},{seed}"),
            GraphSpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl FromStr for GraphSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |reason: &str| Error::InvalidGraphSpec {
            spec: s.to_string(),
            reason: reason.to_string(),
        };
        let (family, params) = s.split_once(':').ok_or_else(|| bad("expected family:params"))?;
        if family == "file" {
            if params.is_empty() {
                return Err(bad("missing path"));
            }
            return Ok(GraphSpec::File(PathBuf::from(params)));
        }
        let nums: Vec<u64> = params
            .split(',')
            .map(|p| p.trim().parse::<u64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad("parameters must be non-negative integers"))?;
        let arity = |k: usize| {
            if nums.len() == k {
                Ok(())
            } else {
                Err(bad(&format!("{family} takes {k} parameter(s)")))
            }
        };
        let spec = match family {
            "complete" => arity(1).map(|_| GraphSpec::Complete(nums[0] as usize)),
            "path" => arity(1).map(|_| GraphSpec::Path(nums[0] as usize)),
            "cycle" => arity(1).map(|_| GraphSpec::Cycle(nums[0] as usize)),
            "star" => arity(1).map(|_| GraphSpec::Star(nums[0] as usize)),
            "dumbbell" => arity(1).map(|_| GraphSpec::Dumbbell(nums[0] as usize)),
            "btree" => arity(1).map(|_| GraphSpec::BinaryTree(nums[0] as usize)),
            "bipartite" => {
                arity(2).map(|_| GraphSpec::Bipartite(nums[0] as usize, nums[1] as usize))
            }
            "regular" => arity(3).map(|_| GraphSpec::Regular {
                n: nums[0] as usize,
                d: nums[1] as usize,
                seed: nums[2],
            }),
            _ => Err(bad("unknown graph family")),
        }?;
        spec.validate()?;
        Ok(spec)
    }
}

/// Undirected, connected, simple graph on nodes `0..n`. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    degrees: Vec<usize>,
    spec: Option<GraphSpec>,
}

impl Graph {
    /// Validates and builds a graph from an edge list. Endpoints are stored as
    /// `(min, max)`; list order is kept.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "a graph needs at least 2 nodes, got {n}"
            )));
        }
        let mut seen = HashSet::with_capacity(edges.len());
        let mut normalized = Vec::with_capacity(edges.len());
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            if a >= n || b >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge ({a}, {b}) out of range for {n} nodes"
                )));
            }
            let e = (a.min(b), a.max(b));
            if !seen.insert(e) {
                return Err(Error::DuplicateEdge(e.0, e.1));
            }
            normalized.push(e);
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        adjacency.iter_mut().for_each(|nb| nb.sort_unstable());
        let degrees = adjacency.iter().map(Vec::len).collect();
        let g = Graph {
            n,
            edges: normalized,
            adjacency,
            degrees,
            spec: None,
        };
        let components = g.component_count();
        if components != 1 {
            return Err(Error::Disconnected { components });
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.degrees[i]
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn average_degree(&self) -> f64 {
        2.0 * self.edges.len() as f64 / self.n as f64
    }

    pub fn max_degree(&self) -> usize {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> usize {
        self.degrees.iter().copied().min().unwrap_or(0)
    }

    /// Family spec this graph was built from; `None` for ingested edge lists.
    pub fn spec(&self) -> Option<&GraphSpec> {
        self.spec.as_ref()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        let (a, b) = if self.adjacency[i].len() <= self.adjacency[j].len() {
            (i, j)
        } else {
            (j, i)
        };
        self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Uniformly random edge.
    pub fn sample_edge(&self, rng: &mut RngStream) -> (usize, usize) {
        self.edges[rng.index(self.edges.len())]
    }

    fn component_count(&self) -> usize {
        let mut seen = vec![false; self.n];
        let mut components = 0;
        let mut queue = VecDeque::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for &w in &self.adjacency[u] {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
        }
        components
    }

    /// Edge list document accepted by [`load_edge_list`].
    pub fn render_edge_list(&self) -> String {
        let mut out = String::with_capacity(self.edges.len() * 8);
        for &(a, b) in &self.edges {
            out.push_str(&format!("{a} {b}\n"));
        }
        out
    }

    /// Depth of each node from node 0 (BFS).
    pub fn depths_from_root(&self) -> Vec<usize> {
        let mut depth = vec![usize::MAX; self.n];
        depth[0] = 0;
        let mut queue = VecDeque::from([0]);
        while let Some(u) = queue.pop_front() {
            for &w in &self.adjacency[u] {
                if depth[w] == usize::MAX {
                    depth[w] = depth[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        depth
    }
}

pub fn make_graph(spec: &GraphSpec) -> Result<Graph> {
    spec.validate()?;
    let mut g = match *spec {
        GraphSpec::Complete(n) => Graph::from_edges(n, &clique_edges(0, n))?,
        GraphSpec::Path(n) => {
            let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
            Graph::from_edges(n, &edges)?
        }
        GraphSpec::Cycle(n) => {
            let mut edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
            edges.push((0, n - 1));
            edges.sort_unstable();
            Graph::from_edges(n, &edges)?
        }
        GraphSpec::Star(n) => {
            let edges: Vec<_> = (1..n).map(|leaf| (0, leaf)).collect();
            Graph::from_edges(n, &edges)?
        }
        GraphSpec::Dumbbell(n) => {
            let mut edges = clique_edges(0, n);
            edges.extend(clique_edges(n, n));
            edges.push((n - 1, 2 * n - 1));
            edges.sort_unstable();
            Graph::from_edges(2 * n, &edges)?
        }
        GraphSpec::BinaryTree(n) => {
            let mut edges = Vec::with_capacity(n - 1);
            let mut next = 0;
            preorder_tree(n, &mut next, &mut edges);
            edges.sort_unstable();
            Graph::from_edges(n, &edges)?
        }
        GraphSpec::Bipartite(a, b) => {
            let edges: Vec<_> = (0..a)
                .flat_map(|i| (a..a + b).map(move |j| (i, j)))
                .collect();
            Graph::from_edges(a + b, &edges)?
        }
        GraphSpec::Regular { n, d, seed } => random_regular(n, d, seed)?,
        GraphSpec::File(ref path) => return load_edge_list_file(path),
    };
    g.spec = Some(spec.clone());
    Ok(g)
}

fn clique_edges(offset: usize, n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (offset + i, offset + j)))
        .collect()
}

fn preorder_tree(size: usize, next: &mut usize, edges: &mut Vec<(usize, usize)>) -> usize {
    let me = *next;
    *next += 1;
    if size > 1 {
        let half = (size - 1) / 2;
        let left = preorder_tree(half, next, edges);
        edges.push((me, left));
        let right = preorder_tree(half, next, edges);
        edges.push((me, right));
    }
    me
}

/// Pairing model with rejection of loops, multi-edges and disconnected draws.
fn random_regular(n: usize, d: usize, seed: u64) -> Result<Graph> {
    let mut rng = RngStream::new(seed, 0);
    let mut points: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    'attempt: for _ in 0..REGULAR_RETRY_BUDGET {
        for i in (1..points.len()).rev() {
            let j = rng.index(i + 1);
            points.swap(i, j);
        }
        let mut seen = HashSet::with_capacity(points.len() / 2);
        let mut edges = Vec::with_capacity(points.len() / 2);
        for pair in points.chunks_exact(2) {
            let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if a == b || !seen.insert((a, b)) {
                continue 'attempt;
            }
            edges.push((a, b));
        }
        edges.sort_unstable();
        match Graph::from_edges(n, &edges) {
            Ok(g) => return Ok(g),
            Err(Error::Disconnected { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::RegularGenerationFailed {
        n,
        d,
        attempts: REGULAR_RETRY_BUDGET,
    })
}

/// Parses an edge list: one `i j` pair per line, 0-based, `#` starts a comment.
pub fn load_edge_list(text: &str) -> Result<Graph> {
    let mut edges = Vec::new();
    let mut max_node = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |reason: String| Error::EdgeListParse {
            line: line_no,
            reason,
        };
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(parse_err(format!("expected 2 tokens, found {}", tokens.len())));
        }
        let mut ends = [0usize; 2];
        for (slot, tok) in ends.iter_mut().zip(&tokens) {
            *slot = tok
                .parse()
                .map_err(|_| parse_err(format!("`{tok}` is not a node index")))?;
        }
        if ends[0] == ends[1] {
            return Err(parse_err(format!("self-loop at node {}", ends[0])));
        }
        max_node = max_node.max(ends[0]).max(ends[1]);
        edges.push((ends[0], ends[1]));
    }
    if edges.is_empty() {
        return Err(Error::EdgeListParse {
            line: 0,
            reason: "no edges".to_string(),
        });
    }
    Graph::from_edges(max_node + 1, &edges)
}

pub fn load_edge_list_file(path: &Path) -> Result<Graph> {
    load_edge_list(&std::fs::read_to_string(path)?)
}
