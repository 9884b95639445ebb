#![allow(dead_code)]

use gtv_core::{KernelProfile, NeighborGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random small instance: points, labels, scale, kernel.
pub struct Instance {
    pub dim: usize,
    pub points: Vec<f64>,
    pub labels: Vec<u8>,
    pub eps: f64,
    pub profile: KernelProfile,
}

impl Instance {
    pub fn random(seed: u64, n: usize, dim: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points: Vec<f64> = (0..n * dim).map(|_| rng.random::<f64>()).collect();
        let labels: Vec<u8> = (0..n).map(|_| u8::from(rng.random_bool(0.5))).collect();
        let eps = 0.15 + 0.6 * rng.random::<f64>();
        let amp = 0.5 + rng.random::<f64>() * 2.0;
        let scale = 0.3 + rng.random::<f64>();
        let profile = match rng.random_range(0..3) {
            0 => KernelProfile::indicator(scale),
            1 => KernelProfile::exponential(scale * 0.3),
            _ => KernelProfile::gaussian(scale * 0.3),
        }
        .unwrap()
        .with_amplitude(amp)
        .unwrap();
        Self { dim, points, labels, eps, profile }
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn graph(&self) -> NeighborGraph {
        NeighborGraph::from_points(&self.points, self.dim, self.eps, &self.profile).unwrap()
    }

    /// Dense `W_ij = ε^{-d} η(|x_i - x_j| / ε)` computed straight from the coordinates.
    pub fn dense_weights(&self) -> Vec<Vec<f64>> {
        let n = self.n();
        let d = self.dim;
        let scale = self.eps.powi(-(d as i32));
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let r = (0..d)
                            .map(|k| (self.points[i * d + k] - self.points[j * d + k]).powi(2))
                            .sum::<f64>()
                            .sqrt();
                        scale * self.profile.value(r / self.eps)
                    })
                    .collect()
            })
            .collect()
    }

    /// `(1/(n² ε)) Σ_{i,j} W_ij |u_i - u_j|` from the dense weights.
    pub fn dense_gtv(&self, u: &[f64]) -> f64 {
        let w = self.dense_weights();
        let n = self.n();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += w[i][j] * (u[i] - u[j]).abs();
            }
        }
        s / (n as f64 * n as f64 * self.eps)
    }

    pub fn dense_energy(&self, lambda: f64, u: &[f64]) -> f64 {
        let fid: f64 = u.iter().zip(&self.labels).map(|(v, &y)| (v - f64::from(y)).abs()).sum::<f64>();
        lambda * self.dense_gtv(u) + fid / self.n() as f64
    }
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300) || (a - b).abs() <= 1e-300
}

/// All permutations of `0..n` (Heap-free recursive construction).
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..=p.len() {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

/// Random points in the unit cube with values in {0, 1, 2}.
pub fn valued_cloud(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> (Vec<f64>, Vec<f64>) {
    let pts = (0..n * dim).map(|_| rng.random::<f64>()).collect();
    let vals = (0..n).map(|_| f64::from(rng.random_range(0..3u8))).collect();
    (pts, vals)
}

/// `TL¹` between equal-size valued clouds by enumerating every matching.
pub fn brute_tl1(dim: usize, a: &(Vec<f64>, Vec<f64>), b: &(Vec<f64>, Vec<f64>)) -> f64 {
    let n = a.1.len();
    permutations(n)
        .iter()
        .map(|p| {
            p.iter()
                .enumerate()
                .map(|(i, &j)| {
                    let dx: f64 = (0..dim).map(|k| (a.0[i * dim + k] - b.0[j * dim + k]).powi(2)).sum::<f64>().sqrt();
                    dx + (a.1[i] - b.1[j]).abs()
                })
                .sum::<f64>()
                / n as f64
        })
        .fold(f64::INFINITY, f64::min)
}
