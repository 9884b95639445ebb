//! Risks, transport distances, and diagnostics comparing graph solutions with
//! their population counterparts.

use rand::seq::index::sample as sample_indices;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assignment;
use crate::dataset::LabeledCloud;
use crate::error::{Error, Result};
use crate::graph::{NeighborGraph, NodeFunction};
use crate::groundtruth::GroundTruthModel;
use crate::kernels::KernelProfile;
use crate::spatial::UniformGrid;

/// Smallest Monte-Carlo sample accepted by the risk estimators.
pub const MIN_TEST_SAMPLES: usize = 100;

/// Largest instance accepted by [`tl1_exact`].
pub const ASSIGNMENT_MAX_N: usize = 4096;

const Z_95: f64 = 1.96;

/// `(1/n) Σ |u_i - y_i|`.
pub fn empirical_risk(u: &[f64], labels: &[u8]) -> Result<f64> {
    if u.len() != labels.len() {
        return Err(Error::domain(format!("{} values for {} labels", u.len(), labels.len())));
    }
    if labels.is_empty() {
        return Err(Error::domain("empirical risk of an empty sample"));
    }
    Ok(u.iter().zip(labels).map(|(v, &y)| (v - f64::from(y)).abs()).sum::<f64>() / labels.len() as f64)
}

/// A binary decision rule on the domain.
pub trait Classifier: Sync {
    fn classify(&self, x: &[f64]) -> u8;
}

impl<F: Fn(&[f64]) -> u8 + Sync> Classifier for F {
    fn classify(&self, x: &[f64]) -> u8 {
        self(x)
    }
}

/// The Bayes classifier of a model.
#[derive(Debug, Clone, Copy)]
pub struct BayesClassifier<'a>(pub &'a GroundTruthModel);

impl Classifier for BayesClassifier<'_> {
    fn classify(&self, x: &[f64]) -> u8 {
        self.0.bayes_unchecked(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstantClassifier(pub u8);

impl Classifier for ConstantClassifier {
    fn classify(&self, _: &[f64]) -> u8 {
        self.0
    }
}

/// Nearest-neighbor extension of a binary node function.
#[derive(Debug, Clone)]
pub struct VoronoiClassifier {
    values: Vec<u8>,
    grid: UniformGrid,
}

impl VoronoiClassifier {
    /// Index of the nearest reference point and its distance; ties go to the
    /// lowest index.
    pub fn nearest(&self, x: &[f64]) -> (usize, f64) {
        self.grid.nearest(x).expect("classifier has at least one point")
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl Classifier for VoronoiClassifier {
    fn classify(&self, x: &[f64]) -> u8 {
        self.values[self.nearest(x).0]
    }
}

fn nn_grid(points: &[f64], dim: usize) -> UniformGrid {
    let n = points.len() / dim;
    let mut extent: f64 = 0.0;
    for k in 0..dim {
        let (lo, hi) = points
            .iter()
            .skip(k)
            .step_by(dim)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        extent = extent.max(hi - lo);
    }
    let cell = if extent > 0.0 { extent / (n as f64).powf(1.0 / dim as f64) } else { 1.0 };
    UniformGrid::build(points, dim, cell)
}

/// Voronoi (1-NN) extension of a binary `u` on the cloud.
pub fn voronoi_extend(cloud: &LabeledCloud, u: &[f64]) -> Result<VoronoiClassifier> {
    if cloud.is_empty() {
        return Err(Error::domain("cannot extend from an empty cloud"));
    }
    if u.len() != cloud.len() {
        return Err(Error::domain(format!("{} values for {} points", u.len(), cloud.len())));
    }
    let values = NodeFunction::new(u.to_vec()).to_labels()?;
    Ok(VoronoiClassifier { values, grid: nn_grid(cloud.points(), cloud.dim()) })
}

/// Monte-Carlo estimate with a normal-approximation 95% binomial half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub estimate: f64,
    pub ci_halfwidth: f64,
}

fn check_m(m: usize) -> Result<()> {
    if m < MIN_TEST_SAMPLES {
        Err(Error::domain(format!("need at least {MIN_TEST_SAMPLES} test samples, got {m}")))
    } else {
        Ok(())
    }
}

/// `R(u) = 𝔼 |u(x) - y|` estimated from `m` fresh draws.
pub fn test_risk<C: Classifier + ?Sized>(classifier: &C, model: &GroundTruthModel, m: usize, seed: u64) -> Result<RiskEstimate> {
    check_m(m)?;
    let test = model.sample(m, seed)?;
    let errors: usize = (0..m)
        .into_par_iter()
        .filter(|&k| classifier.classify(test.point(k)) != test.labels()[k])
        .count();
    let p = errors as f64 / m as f64;
    Ok(RiskEstimate { estimate: p, ci_halfwidth: Z_95 * (p * (1.0 - p) / m as f64).sqrt() })
}

/// Fraction of `m` fresh draws where `classifier` agrees with the Bayes classifier.
pub fn bayes_agreement<C: Classifier + ?Sized>(classifier: &C, model: &GroundTruthModel, m: usize, seed: u64) -> Result<f64> {
    check_m(m)?;
    let test = model.sample(m, seed)?;
    let agree = (0..m)
        .into_par_iter()
        .filter(|&k| {
            let x = test.point(k);
            classifier.classify(x) == model.bayes_unchecked(x)
        })
        .count();
    Ok(agree as f64 / m as f64)
}

/// An optimal assignment between two equal-size point sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportPlanResult {
    /// `assignment[i]` is the index in the second set matched to point `i`.
    pub assignment: Vec<usize>,
    /// Mean per-pair cost.
    pub cost: f64,
    /// Largest spatial displacement among matched pairs.
    pub sup_displacement: f64,
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Exact `TL¹` distance between `(ν_a, f_a)` and `(ν_b, f_b)` for uniform
/// empirical measures of equal size:
/// `min_σ (1/n) Σ (|x_i - z_σ(i)| + |f_a(x_i) - f_b(z_σ(i))|)`.
pub fn tl1_exact(dim: usize, points_a: &[f64], f_a: &[f64], points_b: &[f64], f_b: &[f64]) -> Result<TransportPlanResult> {
    if dim == 0 || !points_a.len().is_multiple_of(dim) || !points_b.len().is_multiple_of(dim) {
        return Err(Error::domain("point arrays do not match the dimension"));
    }
    let n = points_a.len() / dim;
    if n != f_a.len() || points_b.len() / dim != f_b.len() {
        return Err(Error::domain("each point needs exactly one value"));
    }
    if f_b.len() != n {
        return Err(Error::domain(format!("point sets have different sizes ({n} and {})", f_b.len())));
    }
    if n == 0 {
        return Err(Error::domain("point sets are empty"));
    }
    if n > ASSIGNMENT_MAX_N {
        return Err(Error::Refused(format!("assignment limited to n <= {ASSIGNMENT_MAX_N}, got {n}")));
    }
    let pa = |i: usize| &points_a[i * dim..(i + 1) * dim];
    let pb = |j: usize| &points_b[j * dim..(j + 1) * dim];
    let cost = |i: usize, j: usize| distance(pa(i), pb(j)) + (f_a[i] - f_b[j]).abs();
    let assignment = assignment::solve(n, cost);
    let total: f64 = assignment.iter().enumerate().map(|(i, &j)| cost(i, j)).sum();
    let sup = assignment.iter().enumerate().map(|(i, &j)| distance(pa(i), pb(j))).fold(0.0, f64::max);
    Ok(TransportPlanResult { assignment, cost: total / n as f64, sup_displacement: sup })
}

/// `(1/m) Σ_k (|z_k - T(z_k)| + |u(T(z_k)) - r_k|)` where `T` maps each query
/// to its nearest cloud point and `r_k` is the reference value at `z_k`.
pub fn tl1_proxy_at(points: &[f64], dim: usize, u: &[f64], queries: &[f64], reference: &[f64]) -> Result<f64> {
    if dim == 0 || !points.len().is_multiple_of(dim) || !queries.len().is_multiple_of(dim) {
        return Err(Error::domain("point arrays do not match the dimension"));
    }
    let (n, m) = (points.len() / dim, queries.len() / dim);
    if n == 0 || m == 0 || u.len() != n || reference.len() != m {
        return Err(Error::domain("mismatched or empty inputs to the transport proxy"));
    }
    let grid = nn_grid(points, dim);
    let terms: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|k| {
            let z = &queries[k * dim..(k + 1) * dim];
            let (j, dist) = grid.nearest(z).expect("nonempty cloud");
            dist + (u[j] - reference[k]).abs()
        })
        .collect();
    // summed in index order so the result does not depend on scheduling
    Ok(terms.iter().sum::<f64>() / m as f64)
}

/// Nearest-neighbor transport proxy for `d_TL¹((ν_n, u), (ν, u_ref))` using
/// `m` fresh draws from the model.
pub fn tl1_proxy_1nn<C: Classifier + ?Sized>(
    cloud: &LabeledCloud,
    u: &[f64],
    model: &GroundTruthModel,
    u_ref: &C,
    m: usize,
    seed: u64,
) -> Result<f64> {
    check_m(m)?;
    if cloud.dim() != model.dim() {
        return Err(Error::domain("cloud and model dimensions differ"));
    }
    let test = model.sample(m, seed)?;
    let reference: Vec<f64> = (0..m).map(|k| f64::from(u_ref.classify(test.point(k)))).collect();
    tl1_proxy_at(cloud.points(), cloud.dim(), u, test.points(), &reference)
}

/// `n` points approximating `ν`: each density cell receives a share of
/// points proportional to its mass (largest remainder), placed at the
/// centers of a regular sub-grid of the cell. When the sub-grid has more
/// slots than points a seeded subset of slots is used.
pub fn quadrature_points(model: &GroundTruthModel, n: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::domain("need at least one quadrature point"));
    }
    let cells = model.density_cells();
    let exact: Vec<f64> = cells.iter().map(|c| c.mass * n as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|v| v.floor() as usize).collect();
    let mut order: Vec<usize> = (0..cells.len()).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
    let missing = n - counts.iter().sum::<usize>();
    for &c in order.iter().take(missing) {
        counts[c] += 1;
    }

    let d = model.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n * d);
    for (cell, &k) in cells.iter().zip(&counts) {
        if k == 0 {
            continue;
        }
        let mut side = (k as f64).powf(1.0 / d as f64).round().max(1.0) as usize;
        while side.pow(d as u32) < k {
            side += 1;
        }
        let slots = side.pow(d as u32);
        let mut chosen: Vec<usize> =
            if slots == k { (0..k).collect() } else { sample_indices(&mut rng, slots, k).into_vec() };
        chosen.sort_unstable();
        let r = &cell.region;
        for mut s in chosen {
            let mut coords = vec![0.0; d];
            for axis in (0..d).rev() {
                let idx = s % side;
                s /= side;
                coords[axis] = r.lo[axis] + (idx as f64 + 0.5) / side as f64 * (r.hi[axis] - r.lo[axis]);
            }
            points.extend_from_slice(&coords);
        }
    }
    Ok(points)
}

/// Optimal assignment between the cloud and `grid_res^d` quadrature points
/// of the model with cost `|x - z|`; reports the largest displacement.
pub fn transport_sup_diagnostic(cloud: &LabeledCloud, model: &GroundTruthModel, grid_res: usize, seed: u64) -> Result<TransportPlanResult> {
    let d = model.dim();
    if cloud.dim() != d {
        return Err(Error::domain("cloud and model dimensions differ"));
    }
    let count = grid_res.checked_pow(d as u32).ok_or_else(|| Error::domain("grid resolution overflows"))?;
    if count != cloud.len() {
        return Err(Error::domain(format!("grid_res^d = {count} does not match the cloud size {}", cloud.len())));
    }
    let quad = quadrature_points(model, count, seed)?;
    let zeros = vec![0.0; count];
    tl1_exact(d, cloud.points(), &zeros, &quad, &zeros)
}

/// A family of nonnegative functions `ψ_z` summing to one on the domain.
pub trait PartitionOfUnity: Sync {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Calls `f(z, ψ_z(x))` for every `z` with `ψ_z(x) > 0`.
    fn for_each_at(&self, x: &[f64], f: &mut dyn FnMut(usize, f64));
}

/// The single function `ψ ≡ 1`.
#[derive(Debug, Clone, Copy, Default)]
pub struct TrivialPartition;

impl PartitionOfUnity for TrivialPartition {
    fn len(&self) -> usize {
        1
    }

    fn for_each_at(&self, _: &[f64], f: &mut dyn FnMut(usize, f64)) {
        f(0, 1.0)
    }
}

/// Products of one-dimensional hat functions on a grid of spacing `ε/2`
/// covering the domain, normalized pointwise. Each `ψ_z` is supported in the
/// cube of half-width `ε/2` around `z`, hence inside the ball of radius `ε`
/// for `d ≤ 3`, and its gradient is bounded by a multiple of `1/ε`.
#[derive(Debug, Clone)]
pub struct TentPartition {
    lo: Vec<f64>,
    spacing: f64,
    nodes_per_axis: Vec<usize>,
}

impl TentPartition {
    pub fn new(model: &GroundTruthModel, eps: f64) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::domain(format!("eps must be positive, got {eps}")));
        }
        let domain = model.domain();
        let spacing = eps / 2.0;
        let nodes_per_axis = (0..model.dim())
            .map(|k| ((domain.hi[k] - domain.lo[k]) / spacing).ceil() as usize + 1)
            .collect();
        Ok(Self { lo: domain.lo.clone(), spacing, nodes_per_axis })
    }
}

impl PartitionOfUnity for TentPartition {
    fn len(&self) -> usize {
        self.nodes_per_axis.iter().product()
    }

    fn for_each_at(&self, x: &[f64], f: &mut dyn FnMut(usize, f64)) {
        let d = self.lo.len();
        // two candidate nodes per axis with their hat weights
        let mut base = vec![0usize; d];
        let mut frac = vec![0.0; d];
        for k in 0..d {
            let t = ((x[k] - self.lo[k]) / self.spacing).max(0.0);
            let last = self.nodes_per_axis[k] - 1;
            let b = (t.floor() as usize).min(last.saturating_sub(1));
            base[k] = b;
            frac[k] = (t - b as f64).clamp(0.0, 1.0);
        }
        let mut total = 0.0;
        let mut entries = Vec::with_capacity(1 << d);
        for corner in 0..(1usize << d) {
            let mut weight = 1.0;
            let mut index = 0usize;
            for k in 0..d {
                let up = (corner >> k) & 1 == 1;
                let node = base[k] + usize::from(up);
                if node >= self.nodes_per_axis[k] {
                    weight = 0.0;
                    break;
                }
                weight *= if up { frac[k] } else { 1.0 - frac[k] };
                index = index * self.nodes_per_axis[k] + node;
            }
            if weight > 0.0 {
                total += weight;
                entries.push((index, weight));
            }
        }
        for (index, weight) in entries {
            f(index, weight / total);
        }
    }
}

/// `Σ_z |(1/n) Σ_i (μ(x_i) - y_i) ψ_z(x_i)|` for the given partition.
pub fn concentration_with<P: PartitionOfUnity + ?Sized>(cloud: &LabeledCloud, model: &GroundTruthModel, partition: &P) -> Result<f64> {
    if cloud.dim() != model.dim() {
        return Err(Error::domain("cloud and model dimensions differ"));
    }
    let mut sums = vec![0.0; partition.len()];
    for i in 0..cloud.len() {
        let x = cloud.point(i);
        let residual = model.mu_at(x)? - f64::from(cloud.labels()[i]);
        partition.for_each_at(x, &mut |z, psi| sums[z] += residual * psi);
    }
    Ok(sums.iter().map(|s| s.abs()).sum::<f64>() / cloud.len() as f64)
}

/// [`concentration_with`] using the tent partition at scale `eps`.
pub fn concentration_diagnostic(cloud: &LabeledCloud, model: &GroundTruthModel, eps: f64) -> Result<f64> {
    concentration_with(cloud, model, &TentPartition::new(model, eps)?)
}

/// A flat piece of an interface: `d` vertices spanning a point (`d = 1`),
/// segment (`d = 2`), or triangle (`d = 3`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Facet {
    pub vertices: Vec<Vec<f64>>,
}

impl Facet {
    pub fn new(vertices: Vec<Vec<f64>>) -> Self {
        Self { vertices }
    }

    /// `(d-1)`-dimensional measure.
    pub fn measure(&self) -> f64 {
        match self.vertices.len() {
            1 => 1.0,
            2 => distance(&self.vertices[0], &self.vertices[1]),
            3 => {
                let (a, b, c) = (&self.vertices[0], &self.vertices[1], &self.vertices[2]);
                let u: Vec<f64> = (0..3).map(|k| b[k] - a[k]).collect();
                let v: Vec<f64> = (0..3).map(|k| c[k] - a[k]).collect();
                let cross = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
                0.5 * cross.iter().map(|x| x * x).sum::<f64>().sqrt()
            }
            _ => f64::NAN,
        }
    }
}

/// `∫_Γ ρ² dH^{d-1}` over a polyhedral interface, i.e. the `ρ²`-weighted total
/// variation of the indicator it bounds.
///
/// Each facet must lie in the closure of density cells sharing one value of
/// `ρ`; a facet spanning cells with different densities must be split first.
pub fn continuum_tv_indicator(model: &GroundTruthModel, interface: &[Facet]) -> Result<f64> {
    let d = model.dim();
    if d > 3 {
        return Err(Error::domain("interfaces are supported for d <= 3"));
    }
    let mut total = 0.0;
    for (idx, facet) in interface.iter().enumerate() {
        if facet.vertices.len() != d || facet.vertices.iter().any(|v| v.len() != d) {
            return Err(Error::domain(format!("facet {idx} needs {d} vertices of dimension {d}")));
        }
        if facet.vertices.iter().any(|v| !model.domain().contains_closed(v)) {
            return Err(Error::domain(format!("facet {idx} leaves the domain")));
        }
        let mut rho: Option<f64> = None;
        for (cell, &value) in model.density_cells().iter().zip(model.cell_densities()) {
            if facet.vertices.iter().all(|v| cell.region.contains_closed(v)) {
                match rho {
                    Some(r) if (r - value).abs() > 1e-12 * r.max(value) => {
                        return Err(Error::domain(format!("facet {idx} lies on a density jump; its weight is ambiguous")));
                    }
                    _ => rho = Some(value),
                }
            }
        }
        let rho = rho.ok_or_else(|| Error::domain(format!("facet {idx} crosses density cells and must be split")))?;
        total += facet.measure() * rho * rho;
    }
    Ok(total)
}

/// `ε = c · n^{-a}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerRule {
    pub c: f64,
    pub a: f64,
}

impl PowerRule {
    pub fn new(c: f64, a: f64) -> Self {
        Self { c, a }
    }

    pub fn at(&self, n: usize) -> f64 {
        self.c * (n as f64).powf(-self.a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaRow {
    pub n: usize,
    pub eps: f64,
    pub gtv: f64,
    pub target: f64,
    pub abs_error: f64,
    pub rel_error: f64,
}

/// Compares `GTV_{n,ε_n}(u_B)` on sampled clouds against its continuum limit
/// `σ_η · ∫_Γ ρ²`, where `Γ` is the Bayes interface.
pub fn gamma_check(
    model: &GroundTruthModel,
    interface: &[Facet],
    profile: &KernelProfile,
    n_list: &[usize],
    eps_rule: PowerRule,
    seed: u64,
) -> Result<Vec<GammaRow>> {
    let target = profile.surface_tension(model.dim())? * continuum_tv_indicator(model, interface)?;
    n_list
        .iter()
        .map(|&n| {
            let eps = eps_rule.at(n);
            let cloud = model.sample(n, seed)?;
            let graph = NeighborGraph::build(&cloud, eps, profile)?;
            let u: Vec<f64> = (0..n).map(|i| f64::from(model.bayes_unchecked(cloud.point(i)))).collect();
            let gtv = graph.gtv(&u)?;
            let abs_error = (gtv - target).abs();
            let rel_error = if target > 0.0 { abs_error / target } else { abs_error };
            Ok(GammaRow { n, eps, gtv, target, abs_error, rel_error })
        })
        .collect()
}

/// Per-`n` summary of [`gamma_check`] over several independent clouds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaSummary {
    pub n: usize,
    pub eps: f64,
    pub repeats: usize,
    pub mean_gtv: f64,
    pub target: f64,
    /// Mean of `|GTV - target|` over the clouds.
    pub mean_abs_error: f64,
    pub rel_mean_abs_error: f64,
}

/// Runs [`gamma_check`] once per seed and averages the absolute errors.
///
/// A single cloud fluctuates by several percent around its mean, so trends in
/// `n` are read off the expected error rather than one sample path.
pub fn gamma_check_repeated(
    model: &GroundTruthModel,
    interface: &[Facet],
    profile: &KernelProfile,
    n_list: &[usize],
    eps_rule: PowerRule,
    seeds: &[u64],
) -> Result<Vec<GammaSummary>> {
    if seeds.is_empty() {
        return Err(Error::domain("need at least one seed"));
    }
    let runs: Vec<Vec<GammaRow>> = seeds
        .par_iter()
        .map(|&seed| gamma_check(model, interface, profile, n_list, eps_rule, seed))
        .collect::<Result<_>>()?;
    let k = seeds.len() as f64;
    Ok((0..n_list.len())
        .map(|idx| {
            let first = runs[0][idx];
            let mean_gtv = runs.iter().map(|r| r[idx].gtv).sum::<f64>() / k;
            let mean_abs_error = runs.iter().map(|r| r[idx].abs_error).sum::<f64>() / k;
            let rel = if first.target > 0.0 { mean_abs_error / first.target } else { mean_abs_error };
            GammaSummary {
                n: first.n,
                eps: first.eps,
                repeats: seeds.len(),
                mean_gtv,
                target: first.target,
                mean_abs_error,
                rel_mean_abs_error: rel,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groundtruth::{BoxRegion, DensityCell, ModelSpec, MuCell};

    fn cloud_1d(points: Vec<f64>, labels: Vec<u8>) -> LabeledCloud {
        LabeledCloud::new(1, points, labels).unwrap()
    }

    #[test]
    fn empirical_risk_cases() {
        assert_eq!(empirical_risk(&[1.0, 0.0], &[1, 0]).unwrap(), 0.0);
        assert_eq!(empirical_risk(&[1.0; 4], &[0, 1, 0, 1]).unwrap(), 0.5);
        assert!((empirical_risk(&[1.0, 0.0, 1.0], &[1, 1, 1]).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(empirical_risk(&[1.0], &[1, 0]).is_err());
    }

    #[test]
    fn voronoi_cases() {
        let c = cloud_1d(vec![0.0, 1.0], vec![0, 1]);
        let v = voronoi_extend(&c, &[0.0, 1.0]).unwrap();
        assert_eq!(v.classify(&[0.3]), 0);
        assert_eq!(v.classify(&[0.7]), 1);
        assert_eq!(v.classify(&[0.5]), 0);
        assert_eq!(v.classify(&[1.0]), 1);
        let single = voronoi_extend(&cloud_1d(vec![0.2], vec![1]), &[1.0]).unwrap();
        assert_eq!(single.classify(&[0.9]), 1);
        assert!(voronoi_extend(&c, &[0.5, 1.0]).is_err());
    }

    #[test]
    fn risk_estimates_match_oracles() {
        let m = GroundTruthModel::quadrant();
        let bayes = test_risk(&BayesClassifier(&m), &m, 20_000, 3).unwrap();
        assert!((bayes.estimate - 0.45).abs() <= 3.0 * bayes.ci_halfwidth);
        let one = test_risk(&ConstantClassifier(1), &m, 20_000, 4).unwrap();
        assert!((one.estimate - 0.5).abs() <= 3.0 * one.ci_halfwidth);
        let certain = GroundTruthModel::constant_mu(2, 1.0).unwrap();
        assert_eq!(test_risk(&ConstantClassifier(1), &certain, 100, 1).unwrap().estimate, 0.0);
        assert!(test_risk(&ConstantClassifier(1), &m, 99, 1).is_err());
    }

    #[test]
    fn agreement_complements() {
        let m = GroundTruthModel::quadrant();
        let a = bayes_agreement(&ConstantClassifier(1), &m, 10_000, 8).unwrap();
        let b = bayes_agreement(&ConstantClassifier(0), &m, 10_000, 8).unwrap();
        assert!((a + b - 1.0).abs() < 1e-15);
        assert!((a - 0.5).abs() < 0.03);
        assert_eq!(bayes_agreement(&BayesClassifier(&m), &m, 500, 1).unwrap(), 1.0);
    }

    #[test]
    fn tl1_examples() {
        let r = tl1_exact(1, &[0.0], &[0.0], &[1.0], &[2.0]).unwrap();
        assert_eq!(r.cost, 3.0);
        let r = tl1_exact(1, &[0.0, 1.0], &[0.0, 1.0], &[0.0, 1.0], &[1.0, 0.0]).unwrap();
        assert!((r.cost - 1.0).abs() < 1e-15);
        let pts = [0.1, 0.2, 0.5, 0.7, 0.9, 0.3];
        let r = tl1_exact(2, &pts, &[1.0, 0.0, 1.0], &pts, &[1.0, 0.0, 1.0]).unwrap();
        assert_eq!(r.cost, 0.0);
        assert_eq!(r.assignment, vec![0, 1, 2]);
        assert!(tl1_exact(1, &[0.0, 1.0], &[0.0, 1.0], &[0.0], &[0.0]).is_err());
    }

    #[test]
    fn proxy_with_zero_displacement() {
        let pts = vec![0.1, 0.4, 0.8];
        let got = tl1_proxy_at(&pts, 1, &[1.0, 0.0, 1.0], &pts, &[1.0, 1.0, 1.0]).unwrap();
        assert!((got - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn quadrature_on_uniform_square_is_a_grid() {
        let m = GroundTruthModel::constant_mu(2, 0.9).unwrap();
        let q = quadrature_points(&m, 16, 1).unwrap();
        assert_eq!(q.len(), 32);
        assert_eq!(&q[..4], &[0.125, 0.125, 0.125, 0.375]);
        let cloud = LabeledCloud::new(2, q.clone(), vec![0; 16]).unwrap();
        let r = transport_sup_diagnostic(&cloud, &m, 4, 1).unwrap();
        assert_eq!(r.sup_displacement, 0.0);
        assert!(transport_sup_diagnostic(&cloud, &m, 3, 1).is_err());
    }

    #[test]
    fn quadrature_respects_cell_masses() {
        let m = GroundTruthModel::quadrant_asymmetric();
        let q = quadrature_points(&m, 100, 2).unwrap();
        let in_ul = q.chunks_exact(2).filter(|p| p[0] < 0.5 && p[1] >= 0.5).count();
        assert_eq!(in_ul, 30);
    }

    #[test]
    fn tent_partition_sums_to_one() {
        let m = GroundTruthModel::quadrant();
        let p = TentPartition::new(&m, 0.13).unwrap();
        let cloud = m.sample(500, 5).unwrap();
        for i in 0..cloud.len() {
            let mut s = 0.0;
            p.for_each_at(cloud.point(i), &mut |_, w| s += w);
            assert!((s - 1.0).abs() < 1e-12);
        }
        let mut s = 0.0;
        p.for_each_at(&[1.0, 1.0], &mut |_, w| s += w);
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn concentration_reductions() {
        let m = GroundTruthModel::quadrant();
        let cloud = m.sample(400, 2).unwrap();
        let trivial = concentration_with(&cloud, &m, &TrivialPartition).unwrap();
        let mean = (0..400).map(|i| m.mu_at(cloud.point(i)).unwrap() - f64::from(cloud.labels()[i])).sum::<f64>() / 400.0;
        assert!((trivial - mean.abs()).abs() < 1e-14);

        let certain = GroundTruthModel::constant_mu(2, 1.0).unwrap();
        let c = certain.sample(300, 1).unwrap();
        assert_eq!(concentration_diagnostic(&c, &certain, 0.2).unwrap(), 0.0);
    }

    #[test]
    fn continuum_tv_cases() {
        let uniform = GroundTruthModel::constant_mu(2, 0.9).unwrap();
        let seg = Facet::new(vec![vec![0.5, 0.0], vec![0.5, 1.0]]);
        assert!((continuum_tv_indicator(&uniform, std::slice::from_ref(&seg)).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(continuum_tv_indicator(&uniform, &[]).unwrap(), 0.0);

        // mass 0.8 on a strip of area 1/2 gives ρ = 1.6 there
        let spec = ModelSpec {
            id: None,
            domain: BoxRegion::unit(2),
            density_cells: vec![
                DensityCell { region: BoxRegion::new(vec![0.0, 0.0], vec![0.25, 1.0]), mass: 0.1 },
                DensityCell { region: BoxRegion::new(vec![0.25, 0.0], vec![0.75, 1.0]), mass: 0.8 },
                DensityCell { region: BoxRegion::new(vec![0.75, 0.0], vec![1.0, 1.0]), mass: 0.1 },
            ],
            mu_cells: vec![MuCell { region: BoxRegion::unit(2), mu: 0.9 }],
        };
        let m = GroundTruthModel::from_spec(spec).unwrap();
        let inside = continuum_tv_indicator(&m, &[seg]).unwrap();
        assert!((inside - 1.6 * 1.6).abs() < 1e-12);
        let crossing = Facet::new(vec![vec![0.1, 0.5], vec![0.9, 0.5]]);
        assert!(continuum_tv_indicator(&m, &[crossing]).is_err());
        let on_jump = Facet::new(vec![vec![0.25, 0.0], vec![0.25, 1.0]]);
        assert!(continuum_tv_indicator(&m, &[on_jump]).is_err());
    }

    #[test]
    fn gamma_check_constant_and_amplitude() {
        let m = GroundTruthModel::half_plane(0.2, 0.8).unwrap();
        let seg = Facet::new(vec![vec![0.5, 0.0], vec![0.5, 1.0]]);
        let k = KernelProfile::indicator(1.0).unwrap();
        let rows = gamma_check(&m, std::slice::from_ref(&seg), &k, &[400], PowerRule::new(1.0, 0.25), 3).unwrap();
        assert!((rows[0].target - 4.0 / 3.0).abs() < 1e-12);
        let k2 = k.with_amplitude(2.0).unwrap();
        let rows2 = gamma_check(&m, &[seg], &k2, &[400], PowerRule::new(1.0, 0.25), 3).unwrap();
        assert!((rows2[0].gtv - 2.0 * rows[0].gtv).abs() < 1e-12 * rows[0].gtv);
        assert!((rows2[0].rel_error - rows[0].rel_error).abs() < 1e-12);

        let cloud = m.sample(300, 1).unwrap();
        let g = NeighborGraph::build(&cloud, 0.2, &k).unwrap();
        assert_eq!(g.gtv(&[1.0; 300]).unwrap(), 0.0);
    }
}
