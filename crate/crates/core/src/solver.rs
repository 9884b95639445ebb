//! Minimization of the regularized empirical risk
//! `R_{n,λ}(u) = λ·GTV(u) + (1/n) Σ |u_i - y_i|`.
//!
//! Three routes are provided: a first-order primal–dual iteration on the
//! convex relaxation over `[0, 1]^n` followed by level-set rounding, an exact
//! s–t minimum cut over binary functions, and exhaustive enumeration for tiny
//! instances. Both energy terms decompose over level sets, so the relaxed and
//! binary minima coincide.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeField, NeighborGraph, NodeFunction};
use crate::maxflow::FlowNetwork;

/// Relative tolerance under which two energies count as tied.
pub const ENERGY_TIE_TOL: f64 = 1e-12;

/// Largest instance accepted by [`solve_brute_force`].
pub const BRUTE_FORCE_MAX_N: usize = 20;

const CHECK_EVERY: usize = 50;
const POWER_ITERATIONS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub lambda: f64,
    pub max_iters: usize,
    /// Stopping tolerance on the relative primal–dual gap and on the relative
    /// energy change between checkpoints.
    pub tol: f64,
    /// Ratio `σ / τ` of dual to primal step.
    pub step_ratio: f64,
    /// Extra rounding level tried by [`binarize`].
    pub threshold: f64,
}

impl SolverConfig {
    pub fn new(lambda: f64) -> Self {
        Self { lambda, max_iters: 20_000, tol: 1e-7, step_ratio: 1.0, threshold: 0.5 }
    }

    pub fn validate(&self) -> Result<()> {
        check_lambda(self.lambda)?;
        if !(self.tol > 0.0) {
            return Err(Error::domain(format!("tol must be positive, got {}", self.tol)));
        }
        if !(self.step_ratio > 0.0) || !self.step_ratio.is_finite() {
            return Err(Error::domain(format!("step_ratio must be positive, got {}", self.step_ratio)));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::domain(format!("threshold must lie in (0, 1), got {}", self.threshold)));
        }
        if self.max_iters == 0 {
            return Err(Error::domain("max_iters must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    PrimalDual,
    Mincut,
    BruteForce,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::PrimalDual => "primal_dual",
            Method::Mincut => "mincut",
            Method::BruteForce => "brute_force",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    /// Relaxed minimizer, values in `[0, 1]`.
    pub u: NodeFunction,
    pub u_binary: NodeFunction,
    pub energy_relaxed: f64,
    pub energy_binary: f64,
    pub iters: usize,
    /// Primal–dual gap in energy units (zero for the exact methods).
    pub gap: f64,
    pub converged: bool,
    pub method: Method,
}

/// Result of the overfitting certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub holds: bool,
    pub margin: f64,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda >= 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("lambda must be non-negative and finite, got {lambda}")))
    }
}

fn check_labels(graph: &NeighborGraph, labels: &[u8]) -> Result<()> {
    if labels.len() != graph.len() {
        return Err(Error::domain(format!("{} labels for {} nodes", labels.len(), graph.len())));
    }
    if let Some(bad) = labels.iter().find(|&&y| y > 1) {
        return Err(Error::domain(format!("label {bad} is not binary")));
    }
    Ok(())
}

/// `candidate` beats `best` by more than the tie tolerance.
fn improves(candidate: f64, best: f64) -> bool {
    if best.is_finite() {
        candidate < best - ENERGY_TIE_TOL * best.abs()
    } else {
        candidate < best
    }
}

fn fidelity(labels: &[u8], u: &[f64]) -> f64 {
    labels.iter().zip(u).map(|(&y, &v)| (v - f64::from(y)).abs()).sum::<f64>() / labels.len() as f64
}

/// `λ·GTV(u) + (1/n) Σ |u_i - y_i|`.
pub fn energy(graph: &NeighborGraph, labels: &[u8], lambda: f64, u: &[f64]) -> Result<f64> {
    check_labels(graph, labels)?;
    check_lambda(lambda)?;
    if u.len() != graph.len() {
        return Err(Error::domain(format!("node function has length {}, graph has {} nodes", u.len(), graph.len())));
    }
    Ok(energy_unchecked(graph, labels, lambda, u))
}

fn energy_unchecked(graph: &NeighborGraph, labels: &[u8], lambda: f64, u: &[f64]) -> f64 {
    lambda * graph.gtv_unchecked(u) + fidelity(labels, u)
}

/// Overfitting certificate: with `s_i = (2λ / (ε n)) Σ_j η_ε(x_i - x_j)`,
/// `max_i s_i < 1` forces every minimizer to reproduce the labels.
pub fn certify_overfit(graph: &NeighborGraph, lambda: f64) -> Certificate {
    let factor = 2.0 * lambda / (graph.eps() * graph.len() as f64);
    let worst = graph.degree_sums().iter().cloned().fold(0.0, f64::max) * factor;
    Certificate { holds: worst < 1.0, margin: 1.0 - worst }
}

/// Best level set `1_{u > t}` over `t ∈ {0} ∪ values(u) ∩ [0, 1) ∪ {threshold}`.
///
/// Every level set for `t ∈ [0, 1)` is represented, so by the coarea
/// structure of both terms the result has energy at most `energy(u)`.
/// Among equal energies the lowest threshold wins.
pub fn binarize(graph: &NeighborGraph, labels: &[u8], lambda: f64, u: &[f64], threshold: f64) -> Result<NodeFunction> {
    check_labels(graph, labels)?;
    check_lambda(lambda)?;
    if u.len() != graph.len() {
        return Err(Error::domain("node function length does not match the graph"));
    }
    if u.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::domain("binarize expects values in [0, 1]"));
    }
    let mut levels: Vec<f64> = u.iter().copied().filter(|&v| v < 1.0).collect();
    levels.push(0.0);
    if (0.0..1.0).contains(&threshold) {
        levels.push(threshold);
    }
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let k = levels.len();
    // index of the first level >= v, i.e. the number of levels strictly below v
    let below = |v: f64| levels.partition_point(|&t| t < v);

    // difference arrays over level indices
    let mut diff = vec![0.0; k + 1];
    let n = graph.len() as f64;
    for (&v, &y) in u.iter().zip(labels) {
        // node is in {u > t} exactly for the first `below(v)` levels
        let split = below(v);
        let (inside, outside) = if y == 1 { (0.0, 1.0) } else { (1.0, 0.0) };
        diff[0] += inside / n;
        diff[split] += (outside - inside) / n;
        diff[k] -= outside / n;
    }
    let pair = 2.0 * lambda / (n * n * graph.eps());
    for e in graph.edges() {
        let (a, b) = (u[e.i].min(u[e.j]), u[e.i].max(u[e.j]));
        let (from, to) = (below(a), below(b));
        if from < to {
            diff[from] += pair * e.weight;
            diff[to] -= pair * e.weight;
        }
    }
    let mut best = (f64::INFINITY, 0usize);
    let mut running = 0.0;
    for (idx, d) in diff.iter().take(k).enumerate() {
        running += d;
        if improves(running, best.0) {
            best = (running, idx);
        }
    }
    let t = levels[best.1];
    Ok(NodeFunction::new(u.iter().map(|&v| if v > t { 1.0 } else { 0.0 }).collect()))
}

/// Exhaustive minimum over `{0,1}^n`, `n ≤ 20`; ties go to the
/// lexicographically smallest vector.
pub fn solve_brute_force(graph: &NeighborGraph, labels: &[u8], lambda: f64) -> Result<SolveResult> {
    check_labels(graph, labels)?;
    check_lambda(lambda)?;
    let n = graph.len();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::Refused(format!("brute force limited to n <= {BRUTE_FORCE_MAX_N}, got {n}")));
    }
    let mut u = vec![0.0; n];
    let mut best = (f64::INFINITY, 0u64);
    for mask in 0..(1u64 << n) {
        for (i, v) in u.iter_mut().enumerate() {
            *v = ((mask >> (n - 1 - i)) & 1) as f64;
        }
        let e = energy_unchecked(graph, labels, lambda, &u);
        if improves(e, best.0) {
            best = (e, mask);
        }
    }
    let u_best: Vec<f64> = (0..n).map(|i| ((best.1 >> (n - 1 - i)) & 1) as f64).collect();
    Ok(exact_result(graph, labels, lambda, u_best, 1 << n, Method::BruteForce))
}

fn exact_result(graph: &NeighborGraph, labels: &[u8], lambda: f64, u: Vec<f64>, iters: usize, method: Method) -> SolveResult {
    let e = energy_unchecked(graph, labels, lambda, &u);
    let u = NodeFunction::new(u);
    SolveResult {
        u: u.clone(),
        u_binary: u,
        energy_relaxed: e,
        energy_binary: e,
        iters,
        gap: 0.0,
        converged: true,
        method,
    }
}

/// Exact binary minimizer via an s–t minimum cut.
///
/// With the energy scaled by `n`, node `i` is tied to the terminal of its
/// label with capacity 1 and every edge carries `2λ w_ij / (n ε)` in both
/// directions. The source side of the cut is the set `{u = 1}`.
pub fn solve_mincut(graph: &NeighborGraph, labels: &[u8], lambda: f64) -> Result<SolveResult> {
    check_labels(graph, labels)?;
    check_lambda(lambda)?;
    let n = graph.len();
    let (source, sink) = (n, n + 1);
    let mut net = FlowNetwork::new(n + 2);
    for (i, &y) in labels.iter().enumerate() {
        if y == 1 {
            net.add_edge(source, i, 1.0, 0.0);
        } else {
            net.add_edge(i, sink, 1.0, 0.0);
        }
    }
    let pair = 2.0 * lambda / (n as f64 * graph.eps());
    if pair > 0.0 {
        for e in graph.edges() {
            let c = pair * e.weight;
            net.add_edge(e.i, e.j, c, c);
        }
    }
    let (_, phases) = net.max_flow(source, sink);
    let side = net.source_side(source);
    let u: Vec<f64> = (0..n).map(|i| if side[i] { 1.0 } else { 0.0 }).collect();
    Ok(exact_result(graph, labels, lambda, u, phases, Method::Mincut))
}

/// The scaled operator `K u = c·(w_e (u_j - u_i), w_e (u_i - u_j))` per edge,
/// `c = λ / (n ε)`; its adjoint is `c·div`.
struct Incidence<'a> {
    graph: &'a NeighborGraph,
    c: f64,
}

impl Incidence<'_> {
    fn apply(&self, u: &[f64], out: &mut [[f64; 2]]) {
        for (slot, e) in out.iter_mut().zip(self.graph.edges()) {
            let v = self.c * e.weight * (u[e.j] - u[e.i]);
            *slot = [v, -v];
        }
    }

    fn adjoint(&self, p: &[[f64; 2]], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (e, [a, b]) in self.graph.edges().iter().zip(p) {
            let flux = self.c * e.weight * (b - a);
            out[e.i] += flux;
            out[e.j] -= flux;
        }
    }

    /// Upper estimate of `‖K‖²`: power iteration with a 20% margin, capped by
    /// the Gershgorin bound `4 c² max_i Σ_j w_ij²`.
    fn norm_squared(&self) -> f64 {
        let n = self.graph.len();
        let mut row = vec![0.0; n];
        for e in self.graph.edges() {
            row[e.i] += e.weight * e.weight;
            row[e.j] += e.weight * e.weight;
        }
        let gershgorin = 4.0 * self.c * self.c * row.iter().cloned().fold(0.0, f64::max);
        if gershgorin == 0.0 {
            return 0.0;
        }
        let mut x: Vec<f64> = (0..n).map(|i| ((i as f64 * 0.618_033_988_749_895).fract()) - 0.5).collect();
        let mut p = vec![[0.0; 2]; self.graph.edges().len()];
        let mut estimate = 0.0;
        for _ in 0..POWER_ITERATIONS {
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                break;
            }
            x.iter_mut().for_each(|v| *v /= norm);
            self.apply(&x, &mut p);
            let mut y = vec![0.0; n];
            self.adjoint(&p, &mut y);
            estimate = x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>();
            x = y;
        }
        (1.2 * estimate).min(gershgorin)
    }
}

/// Dual objective (scaled by `n`) at `K^T p = kt_p`.
fn dual_value(labels: &[u8], kt_p: &[f64]) -> f64 {
    labels
        .iter()
        .zip(kt_p)
        .map(|(&y, &g)| {
            let v = -g;
            let conj = if y == 0 { (v - 1.0).max(0.0) } else { v.max(-1.0) };
            -conj
        })
        .sum()
}

/// First-order primal–dual iteration on the relaxation over `[0, 1]^n`,
/// followed by [`binarize`].
///
/// Starts from `u = labels`, `p = 0`. The dual step projects each edge slot
/// onto `[-1, 1]`; the primal step shrinks toward the labels and clips to
/// `[0, 1]`. Every 50 iterations the energy and duality gap are checked and
/// the best iterate so far is kept, so the returned relaxed energy never
/// exceeds the energy of the starting point.
pub fn solve_primal_dual(graph: &NeighborGraph, labels: &[u8], config: &SolverConfig) -> Result<SolveResult> {
    check_labels(graph, labels)?;
    config.validate()?;
    let n = graph.len();
    let lambda = config.lambda;
    let op = Incidence { graph, c: lambda / (n as f64 * graph.eps()) };
    let norm2 = op.norm_squared();
    let (tau, sigma) = if norm2 > 0.0 {
        let l = norm2.sqrt();
        let r = config.step_ratio.sqrt();
        (0.99 / (l * r), 0.99 * r / l)
    } else {
        (1.0, 1.0)
    };

    let y: Vec<f64> = labels.iter().map(|&v| f64::from(v)).collect();
    let mut u = y.clone();
    let mut u_bar = u.clone();
    let mut p = EdgeField::zeros(graph.edges().len());
    let mut kp = vec![0.0; n];
    let mut ku = vec![[0.0; 2]; graph.edges().len()];

    let mut best_u = u.clone();
    let mut best_energy = energy_unchecked(graph, labels, lambda, &u);
    let mut last_energy = best_energy;
    let mut gap = f64::INFINITY;
    let mut converged = false;
    let mut iters = 0;

    while iters < config.max_iters {
        op.apply(&u_bar, &mut ku);
        for (slot, k) in p.values_mut().iter_mut().zip(&ku) {
            slot[0] += sigma * k[0];
            slot[1] += sigma * k[1];
        }
        p.project_unit_box();
        op.adjoint(p.values(), &mut kp);
        for i in 0..n {
            let old = u[i];
            let v = old - tau * kp[i];
            let shrunk = if v > y[i] + tau {
                v - tau
            } else if v < y[i] - tau {
                v + tau
            } else {
                y[i]
            };
            let new = shrunk.clamp(0.0, 1.0);
            u[i] = new;
            u_bar[i] = 2.0 * new - old;
        }
        iters += 1;

        if iters % CHECK_EVERY == 0 || iters == config.max_iters {
            let e = energy_unchecked(graph, labels, lambda, &u);
            if e < best_energy {
                best_energy = e;
                best_u.copy_from_slice(&u);
            }
            op.adjoint(p.values(), &mut kp);
            let dual = dual_value(labels, &kp) / n as f64;
            gap = (best_energy - dual).max(0.0);
            let scale = best_energy.abs().max(1e-300);
            if gap <= config.tol * scale || (last_energy - e).abs() <= config.tol * scale {
                converged = true;
                break;
            }
            last_energy = e;
        }
    }

    let u_binary = binarize(graph, labels, lambda, &best_u, config.threshold)?;
    let energy_binary = energy_unchecked(graph, labels, lambda, &u_binary);
    Ok(SolveResult {
        u: NodeFunction::new(best_u),
        u_binary,
        energy_relaxed: best_energy,
        energy_binary,
        iters,
        gap,
        converged,
        method: Method::PrimalDual,
    })
}
