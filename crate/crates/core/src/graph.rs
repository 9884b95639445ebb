//! ε-neighborhood graphs over point clouds, graph total variation, and the
//! discrete divergence.
//!
//! Edges are stored once per unordered pair `i < j` with weight
//! `w_ij = η_ε(x_i - x_j)`. Sums over ordered pairs are recovered with a
//! factor 2 (for `gtv`) or through the two slots of an [`EdgeField`].

use std::io::Write;
use std::ops::{Deref, DerefMut};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledCloud;
use crate::error::{Error, Result};
use crate::kernels::KernelProfile;
use crate::spatial::UniformGrid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

/// Real values on the nodes of a graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeFunction(Vec<f64>);

impl NodeFunction {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self(vec![c; n])
    }

    pub fn from_labels(labels: &[u8]) -> Self {
        Self(labels.iter().map(|&y| f64::from(y)).collect())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_binary(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    /// Values as labels; non-binary entries are an error.
    pub fn to_labels(&self) -> Result<Vec<u8>> {
        self.0
            .iter()
            .map(|&v| match v {
                v if v == 0.0 => Ok(0),
                v if v == 1.0 => Ok(1),
                other => Err(Error::domain(format!("value {other} is not binary"))),
            })
            .collect()
    }
}

impl Deref for NodeFunction {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for NodeFunction {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for NodeFunction {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// Values `[p_ij, p_ji]` on both orientations of every stored edge `i < j`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeField {
    values: Vec<[f64; 2]>,
}

impl EdgeField {
    pub fn zeros(edges: usize) -> Self {
        Self { values: vec![[0.0; 2]; edges] }
    }

    pub fn new(values: Vec<[f64; 2]>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[[f64; 2]] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [[f64; 2]] {
        &mut self.values
    }

    /// Clamps every slot to `[-1, 1]`.
    pub fn project_unit_box(&mut self) {
        for v in &mut self.values {
            v[0] = v[0].clamp(-1.0, 1.0);
            v[1] = v[1].clamp(-1.0, 1.0);
        }
    }
}

/// Weighted ε-neighborhood graph.
#[derive(Debug, Clone)]
pub struct NeighborGraph {
    n: usize,
    dim: usize,
    eps: f64,
    profile: KernelProfile,
    edges: Vec<Edge>,
    degree_sums: Vec<f64>,
    offsets: Vec<usize>,
    /// `(neighbor, edge index)` for every node, CSR via `offsets`.
    adjacency: Vec<(usize, usize)>,
}

impl NeighborGraph {
    /// Builds the graph on the cloud's points.
    pub fn build(cloud: &LabeledCloud, eps: f64, profile: &KernelProfile) -> Result<Self> {
        Self::from_points(cloud.points(), cloud.dim(), eps, profile)
    }

    /// Builds the graph on row-major points of dimension `dim`.
    ///
    /// Candidate pairs come from a uniform grid with cell side
    /// `support_radius × eps`; a pair becomes an edge when `η(|x_i - x_j| / ε) > 0`.
    pub fn from_points(points: &[f64], dim: usize, eps: f64, profile: &KernelProfile) -> Result<Self> {
        if dim == 0 || !points.len().is_multiple_of(dim) {
            return Err(Error::domain("point array does not match the dimension"));
        }
        let n = points.len() / dim;
        if n == 0 {
            return Err(Error::domain("cannot build a graph on an empty cloud"));
        }
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::domain(format!("eps must be positive, got {eps}")));
        }
        profile.validate()?;
        let radius = profile.support_radius() * eps;
        let scale = eps.powi(dim as i32).recip();
        let grid = UniformGrid::build(points, dim, radius);

        let per_node: Vec<Vec<Edge>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut out = Vec::new();
                grid.for_each_within(grid.point(i), radius, |j, dist| {
                    if j > i {
                        let w = scale * profile.value(dist / eps);
                        if w > 0.0 {
                            out.push(Edge { i, j, weight: w });
                        }
                    }
                });
                out.sort_by_key(|e| e.j);
                out
            })
            .collect();
        let edges: Vec<Edge> = per_node.into_iter().flatten().collect();
        Ok(Self::assemble(n, dim, eps, *profile, edges))
    }

    fn assemble(n: usize, dim: usize, eps: f64, profile: KernelProfile, edges: Vec<Edge>) -> Self {
        let self_weight = profile.value(0.0) / eps.powi(dim as i32);
        let mut degree_sums = vec![self_weight; n];
        let mut counts = vec![0usize; n + 1];
        for e in &edges {
            degree_sums[e.i] += e.weight;
            degree_sums[e.j] += e.weight;
            counts[e.i + 1] += 1;
            counts[e.j + 1] += 1;
        }
        for k in 1..=n {
            counts[k] += counts[k - 1];
        }
        let mut fill = counts.clone();
        let mut adjacency = vec![(0, 0); 2 * edges.len()];
        for (idx, e) in edges.iter().enumerate() {
            adjacency[fill[e.i]] = (e.j, idx);
            fill[e.i] += 1;
            adjacency[fill[e.j]] = (e.i, idx);
            fill[e.j] += 1;
        }
        Self { n, dim, eps, profile, edges, degree_sums, offsets: counts, adjacency }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn profile(&self) -> &KernelProfile {
        &self.profile
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// `Σ_j η_ε(x_i - x_j)` including the diagonal term `η_ε(0)`.
    pub fn degree_sums(&self) -> &[f64] {
        &self.degree_sums
    }

    /// `(neighbor, edge index)` pairs incident to node `i`.
    pub fn neighbors(&self, i: usize) -> &[(usize, usize)] {
        &self.adjacency[self.offsets[i]..self.offsets[i + 1]]
    }

    fn check_len(&self, len: usize, what: &str) -> Result<()> {
        if len == self.n {
            Ok(())
        } else {
            Err(Error::domain(format!("{what} has length {len}, graph has {} nodes", self.n)))
        }
    }

    /// `Σ_{i,j} w_ij |u_i - u_j|` over ordered pairs.
    pub fn weighted_variation(&self, u: &[f64]) -> f64 {
        2.0 * self.edges.iter().map(|e| e.weight * (u[e.i] - u[e.j]).abs()).sum::<f64>()
    }

    /// Graph total variation `(1 / (n² ε)) Σ_{i,j} w_ij |u_i - u_j|`.
    pub fn gtv(&self, u: &[f64]) -> Result<f64> {
        self.check_len(u.len(), "node function")?;
        Ok(self.gtv_unchecked(u))
    }

    pub(crate) fn gtv_unchecked(&self, u: &[f64]) -> f64 {
        self.weighted_variation(u) / (self.n as f64 * self.n as f64 * self.eps)
    }

    /// `div(p)_i = Σ_j w_ij (p_ji - p_ij)`.
    pub fn divergence(&self, p: &EdgeField) -> Result<NodeFunction> {
        if p.len() != self.edges.len() {
            return Err(Error::domain(format!(
                "edge field has {} edges, graph has {}",
                p.len(),
                self.edges.len()
            )));
        }
        let mut div = vec![0.0; self.n];
        for (e, [p_ij, p_ji]) in self.edges.iter().zip(p.values()) {
            let flux = e.weight * (p_ji - p_ij);
            div[e.i] += flux;
            div[e.j] -= flux;
        }
        Ok(NodeFunction(div))
    }

    /// Number of connected components.
    pub fn components(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut count = self.n;
        for e in &self.edges {
            let (a, b) = (find(&mut parent, e.i), find(&mut parent, e.j));
            if a != b {
                parent[a.max(b)] = a.min(b);
                count -= 1;
            }
        }
        count
    }

    /// Writes `i,j,weight` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "i,j,weight")?;
        for e in &self.edges {
            writeln!(w, "{},{},{}", e.i, e.j, e.weight)?;
        }
        Ok(())
    }
}
