//! Laplacian spectra, the averaging matrix and the β potential.

mod jacobi;

use std::f64::consts::{LN_2, PI};
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

pub use jacobi::{eigen_symmetric, Eigen, MAX_SWEEPS, OFF_DIAGONAL_TOLERANCE};

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphSpec};

/// Dense eigensolves are refused above this size.
pub const DENSE_LIMIT: usize = 2000;

/// Relative residual target for the conjugate-gradient β solve.
pub const CG_TOLERANCE: f64 = 1e-12;

/// Row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "matrix must be square");
            m.data[i * n..(i + 1) * n].copy_from_slice(row);
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// `L = D - A`.
pub fn laplacian(g: &Graph) -> Matrix {
    let mut l = Matrix::zeros(g.n());
    for i in 0..g.n() {
        l[(i, i)] = g.degree(i) as f64;
    }
    for &(i, j) in g.edges() {
        l[(i, j)] = -1.0;
        l[(j, i)] = -1.0;
    }
    l
}

/// `L x` without forming `L`.
pub fn laplacian_apply(g: &Graph, x: &[f64]) -> Vec<f64> {
    let mut y: Vec<f64> = (0..g.n()).map(|i| g.degree(i) as f64 * x[i]).collect();
    for &(i, j) in g.edges() {
        y[i] -= x[j];
        y[j] -= x[i];
    }
    y
}

/// `M = I - L / (2|E|)`.
pub fn averaging_matrix(g: &Graph) -> Matrix {
    let scale = 1.0 / (2.0 * g.edge_count() as f64);
    let l = laplacian(g);
    let mut m = Matrix::identity(g.n());
    for i in 0..g.n() {
        for j in 0..g.n() {
            m[(i, j)] -= scale * l[(i, j)];
        }
    }
    m
}

/// One application of `M`, edge by edge so that mass moves antisymmetrically.
pub fn averaging_apply(g: &Graph, v: &[f64]) -> Vec<f64> {
    let scale = 1.0 / (2.0 * g.edge_count() as f64);
    let mut y = v.to_vec();
    for &(i, j) in g.edges() {
        let flux = scale * (v[i] - v[j]);
        y[i] -= flux;
        y[j] += flux;
    }
    y
}

/// `M^t v0`.
pub fn expected_state(g: &Graph, v0: &[f64], t: u64) -> Vec<f64> {
    let mut v = v0.to_vec();
    for _ in 0..t {
        v = averaging_apply(g, &v);
    }
    v
}

/// `‖v‖₁ / (√n ‖v‖₂)`.
pub fn delocalization(v: &[f64]) -> Result<f64> {
    let l1: f64 = v.iter().map(|x| x.abs()).sum();
    let l2 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if l2 == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(l1 / ((v.len() as f64).sqrt() * l2))
}

/// Known second Laplacian eigenvalue for families with a closed form.
pub fn closed_form_lambda2(spec: &GraphSpec) -> Option<f64> {
    match *spec {
        GraphSpec::Complete(n) => Some(n as f64),
        GraphSpec::Cycle(n) => Some(2.0 - 2.0 * (2.0 * PI / n as f64).cos()),
        GraphSpec::Path(n) => Some(2.0 - 2.0 * (PI / n as f64).cos()),
        GraphSpec::Star(2) => Some(2.0),
        GraphSpec::Star(_) => Some(1.0),
        GraphSpec::Bipartite(1, 1) => Some(2.0),
        GraphSpec::Bipartite(a, b) => Some(a.min(b) as f64),
        _ => None,
    }
}

/// `|E| / λ₂`, from the closed form when the family has one and from a dense
/// eigensolve otherwise.
pub fn gamma(g: &Graph) -> Result<f64> {
    let lambda2 = match g.spec().and_then(closed_form_lambda2) {
        Some(l) => l,
        None => {
            if g.n() > DENSE_LIMIT {
                return Err(Error::InvalidArgument(format!(
                    "no closed-form spectral gap and {} nodes exceed the dense limit",
                    g.n()
                )));
            }
            eigen_symmetric(&laplacian(g))?.values[1]
        }
    };
    Ok(g.edge_count() as f64 / lambda2)
}

/// Right-hand side `2 ln 2 (d - d̄ 1)` of the β equation.
pub fn beta_rhs(g: &Graph) -> Vec<f64> {
    let dbar = g.average_degree();
    g.degrees()
        .iter()
        .map(|&d| 2.0 * LN_2 * (d as f64 - dbar))
        .collect()
}

fn project_out_mean(x: &mut [f64]) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= mean);
}

fn shift_min_to_zero(x: &mut [f64]) {
    let min = x.iter().copied().fold(f64::INFINITY, f64::min);
    x.iter_mut().for_each(|v| *v -= min);
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `‖L β - rhs‖∞`.
pub fn beta_residual(g: &Graph, beta: &[f64]) -> f64 {
    laplacian_apply(g, beta)
        .iter()
        .zip(beta_rhs(g))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Solves `L β = 2 ln 2 (d - d̄ 1)` by conjugate gradients on the complement of
/// the constant vector, then shifts so that `min β = 0`.
pub fn solve_beta(g: &Graph) -> Result<Vec<f64>> {
    let n = g.n();
    let mut b = beta_rhs(g);
    project_out_mean(&mut b);
    let bnorm = dot(&b, &b).sqrt();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(x);
    }
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let budget = 20 * n + 1000;
    let mut iterations = 0;
    while rr.sqrt() > CG_TOLERANCE * bnorm {
        if iterations == budget {
            return Err(Error::NoConvergence {
                what: "beta conjugate gradient",
                iterations,
                residual: rr.sqrt(),
            });
        }
        iterations += 1;
        let lp = laplacian_apply(g, &p);
        let alpha = rr / dot(&p, &lp);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * lp[i];
        }
        project_out_mean(&mut r);
        let rr_next = dot(&r, &r);
        let ratio = rr_next / rr;
        for i in 0..n {
            p[i] = r[i] + ratio * p[i];
        }
        rr = rr_next;
        // Recompute the true residual now and then to stop drift.
        if iterations % 50 == 0 {
            let lx = laplacian_apply(g, &x);
            r = b.iter().zip(&lx).map(|(bi, li)| bi - li).collect();
            project_out_mean(&mut r);
            rr = dot(&r, &r);
        }
    }
    shift_min_to_zero(&mut x);
    Ok(x)
}

/// β through the eigendecomposition pseudo-inverse. Used as a cross-check.
pub fn beta_pseudo_inverse(g: &Graph) -> Result<Vec<f64>> {
    let eig = eigen_symmetric(&laplacian(g))?;
    let b = beta_rhs(g);
    let mut x = vec![0.0; g.n()];
    for k in 1..g.n() {
        let u = eig.vector(k);
        let coef = dot(&u, &b) / eig.values[k];
        for i in 0..g.n() {
            x[i] += coef * u[i];
        }
    }
    shift_min_to_zero(&mut x);
    Ok(x)
}

#[derive(Clone, Debug)]
pub struct SpectralSummary {
    pub n: usize,
    pub edges: usize,
    pub lambda2: f64,
    pub gamma: f64,
    pub fiedler: Vec<f64>,
    pub delta: f64,
    pub beta: Vec<f64>,
    /// Drift constant paired with `beta`.
    pub c: f64,
}

/// Serialized form of [`SpectralSummary`].
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SpectralReport {
    pub n: usize,
    pub edges: usize,
    pub lambda2: f64,
    pub gamma: f64,
    pub delta: f64,
    pub beta_max: f64,
    pub beta_residual: f64,
}

impl SpectralSummary {
    pub fn report(&self, g: &Graph) -> SpectralReport {
        SpectralReport {
            n: self.n,
            edges: self.edges,
            lambda2: self.lambda2,
            gamma: self.gamma,
            delta: self.delta,
            beta_max: self.beta.iter().copied().fold(0.0, f64::max),
            beta_residual: beta_residual(g, &self.beta),
        }
    }
}

/// Unit vector orthogonal to 1 with its first non-negligible entry positive.
fn normalize_fiedler(mut u: Vec<f64>) -> Vec<f64> {
    project_out_mean(&mut u);
    let norm = dot(&u, &u).sqrt();
    u.iter_mut().for_each(|x| *x /= norm);
    if let Some(first) = u.iter().find(|x| x.abs() > 1e-12) {
        if *first < 0.0 {
            u.iter_mut().for_each(|x| *x = -*x);
        }
    }
    u
}

pub fn spectral_summary(g: &Graph) -> Result<SpectralSummary> {
    if g.n() > DENSE_LIMIT {
        return Err(Error::InvalidArgument(format!(
            "dense spectral analysis is limited to {DENSE_LIMIT} nodes, got {}",
            g.n()
        )));
    }
    let eig = eigen_symmetric(&laplacian(g))?;
    let lambda2 = eig.values[1];
    let fiedler = normalize_fiedler(eig.vector(1));
    let delta = delocalization(&fiedler)?;
    Ok(SpectralSummary {
        n: g.n(),
        edges: g.edge_count(),
        lambda2,
        gamma: g.edge_count() as f64 / lambda2,
        fiedler,
        delta,
        beta: solve_beta(g)?,
        c: LN_2,
    })
}

/// Expected left-subtree level values of a complete binary tree under the
/// signed split start (root 0, left subtree `+1/√(n-1)`, right subtree
/// negated). Entry `s` is depth `s`; the right subtree is the mirror image.
///
/// Each step an internal node at depth `s` moves toward its parent and two
/// children with weight `w = 1/(2(n-1))` per edge, a leaf toward its parent
/// only, and the root stays at zero by antisymmetry.
pub fn btree_levels(n: usize, t: u64) -> Vec<f64> {
    let depth = (n + 1).trailing_zeros() as usize;
    let w = 1.0 / (2.0 * (n as f64 - 1.0));
    let mut l = vec![1.0 / (n as f64 - 1.0).sqrt(); depth];
    l[0] = 0.0;
    for _ in 0..t {
        let mut next = vec![0.0; depth];
        for s in 1..depth {
            next[s] = if s + 1 < depth {
                2.0 * w * l[s + 1] + w * l[s - 1] + (1.0 - 3.0 * w) * l[s]
            } else {
                w * l[s - 1] + (1.0 - w) * l[s]
            };
        }
        l = next;
    }
    l
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::make_graph;

    fn g(spec: &str) -> Graph {
        make_graph(&spec.parse().unwrap()).unwrap()
    }

    #[test]
    fn laplacian_examples() {
        assert_eq!(
            laplacian(&g("path:3")).to_rows(),
            vec![
                vec![1.0, -1.0, 0.0],
                vec![-1.0, 2.0, -1.0],
                vec![0.0, -1.0, 1.0]
            ]
        );
        assert_eq!(
            laplacian(&g("complete:2")).to_rows(),
            vec![vec![1.0, -1.0], vec![-1.0, 1.0]]
        );
        let star = laplacian(&g("star:3"));
        assert_eq!(
            star.to_rows(),
            vec![
                vec![2.0, -1.0, -1.0],
                vec![-1.0, 1.0, 0.0],
                vec![-1.0, 0.0, 1.0]
            ]
        );
        for i in 0..3 {
            assert_eq!(star.row(i).iter().sum::<f64>(), 0.0);
        }
    }

    #[test]
    fn k4_and_c4_spectra() {
        let e = eigen_symmetric(&laplacian(&g("complete:4"))).unwrap();
        for (got, want) in e.values.iter().zip([0.0, 4.0, 4.0, 4.0]) {
            assert!((got - want).abs() < 1e-10);
        }
        let e = eigen_symmetric(&laplacian(&g("cycle:4"))).unwrap();
        for (got, want) in e.values.iter().zip([0.0, 2.0, 2.0, 4.0]) {
            assert!((got - want).abs() < 1e-10);
        }
    }

    #[test]
    fn summary_examples() {
        let s = spectral_summary(&g("complete:4")).unwrap();
        assert!((s.lambda2 - 4.0).abs() < 1e-10);
        assert!((s.gamma - 1.5).abs() < 1e-10);

        let s = spectral_summary(&g("star:4")).unwrap();
        assert!((s.lambda2 - 1.0).abs() < 1e-10);
        assert!((s.gamma - 3.0).abs() < 1e-10);

        let s = spectral_summary(&g("cycle:8")).unwrap();
        let closed = 2.0 - 2.0 * (PI / 4.0).cos();
        assert!((s.lambda2 - closed).abs() < 1e-10);
        assert!((s.lambda2 - 0.58579).abs() < 1e-5);
        assert!((s.gamma - 13.657).abs() < 1e-3);
    }

    #[test]
    fn fiedler_conventions() {
        for spec in ["cycle:9", "path:6", "dumbbell:4", "star:7", "complete:5"] {
            let s = spectral_summary(&g(spec)).unwrap();
            assert!(s.fiedler.iter().sum::<f64>().abs() <= 1e-9, "{spec}");
            let norm = s.fiedler.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() <= 1e-12, "{spec}");
            assert!(s.delta > 0.0 && s.delta <= 1.0);
            let first = s.fiedler.iter().find(|x| x.abs() > 1e-12).unwrap();
            assert!(*first > 0.0);
        }
    }

    #[test]
    fn beta_examples() {
        let beta = solve_beta(&g("cycle:10")).unwrap();
        assert!(beta.iter().all(|&b| b == 0.0));
        let beta = solve_beta(&g("regular:20,3,4")).unwrap();
        assert!(beta.iter().all(|&b| b == 0.0));

        let star = g("star:4");
        let beta = solve_beta(&star).unwrap();
        // Hand solution: a - b = 2 ln 2 (n - 2) / n.
        let want = [LN_2, 0.0, 0.0, 0.0];
        for (b, w) in beta.iter().zip(want) {
            assert!((b - w).abs() <= 1e-8);
        }
        let direct = laplacian(&star).mul_vec(&beta);
        for (lb, r) in direct.iter().zip(beta_rhs(&star)) {
            assert!((lb - r).abs() <= 1e-8);
        }

        let path = g("path:3");
        let beta = solve_beta(&path).unwrap();
        let oracle = beta_pseudo_inverse(&path).unwrap();
        assert_eq!(beta.iter().copied().fold(f64::INFINITY, f64::min), 0.0);
        assert!(beta_residual(&path, &beta) <= 1e-8);
        for (a, b) in beta.iter().zip(&oracle) {
            assert!((a - b).abs() <= 1e-7);
        }
    }

    #[test]
    fn cg_and_pseudo_inverse_agree() {
        for spec in ["dumbbell:6", "btree:31", "path:40", "bipartite:3,7", "star:33"] {
            let gr = g(spec);
            let a = solve_beta(&gr).unwrap();
            let b = beta_pseudo_inverse(&gr).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() <= 1e-7, "{spec}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn averaging_matrix_examples() {
        let m = averaging_matrix(&g("path:3"));
        assert_eq!(
            m.to_rows(),
            vec![
                vec![0.75, 0.25, 0.0],
                vec![0.25, 0.5, 0.25],
                vec![0.0, 0.25, 0.75]
            ]
        );
        assert_eq!(
            averaging_matrix(&g("complete:2")).to_rows(),
            vec![vec![0.5, 0.5], vec![0.5, 0.5]]
        );
        let m = averaging_matrix(&g("dumbbell:5"));
        for i in 0..m.n() {
            assert!((m.row(i).iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            assert!((m.column(i).iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn expected_state_examples() {
        let p3 = g("path:3");
        let v0 = [1.0, 0.0, 0.0];
        assert_eq!(expected_state(&p3, &v0, 0), v0.to_vec());
        assert_eq!(expected_state(&p3, &v0, 1), vec![0.75, 0.25, 0.0]);
        let d = g("dumbbell:4");
        let v0: Vec<f64> = (0..8).map(|i| (i as f64 * 0.37).sin()).collect();
        let total: f64 = v0.iter().sum();
        for t in [1, 10, 100] {
            let s: f64 = expected_state(&d, &v0, t).iter().sum();
            assert!((s - total).abs() <= 1e-12 * total.abs().max(1.0));
        }
    }

    #[test]
    fn delocalization_examples() {
        assert!((delocalization(&[1.0; 9]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(delocalization(&[1.0, 0.0, 0.0, 0.0]).unwrap(), 0.5);
        assert!(matches!(delocalization(&[0.0, 0.0]), Err(Error::ZeroVector)));
        let c32 = spectral_summary(&g("cycle:32")).unwrap();
        assert!(c32.delta >= 0.5);
    }

    #[test]
    fn btree_levels_match_expected_state() {
        for n in [7usize, 15, 31] {
            let tree = g(&format!("btree:{n}"));
            let depth = tree.depths_from_root();
            let half = (n - 1) / 2;
            let scale = 1.0 / ((n - 1) as f64).sqrt();
            let mut v = vec![0.0; n];
            for (i, x) in v.iter_mut().enumerate().skip(1) {
                *x = if i <= half { scale } else { -scale };
            }
            for t in 0..=200u64 {
                let levels = btree_levels(n, t);
                for (i, &x) in v.iter().enumerate() {
                    let want = if i == 0 {
                        0.0
                    } else if i <= half {
                        levels[depth[i]]
                    } else {
                        -levels[depth[i]]
                    };
                    assert!((x - want).abs() <= 1e-10, "n={n} t={t} node {i}");
                }
                v = averaging_apply(&tree, &v);
            }
        }
    }
}
