//! Uniform hash grid over a point set for fixed-radius and nearest-neighbor
//! queries in low dimension.

/// Points bucketed into cubic cells of side `cell`, stored CSR-style.
#[derive(Debug, Clone)]
pub struct UniformGrid {
    dim: usize,
    cell: f64,
    origin: Vec<f64>,
    shape: Vec<i64>,
    starts: Vec<usize>,
    items: Vec<usize>,
    points: Vec<f64>,
}

/// Upper bound on cells per point; the cell side grows when exceeded.
const MAX_CELLS_PER_POINT: f64 = 4.0;

impl UniformGrid {
    /// Buckets `points` (row-major, dimension `dim`) into cells of side at least `cell`.
    pub fn build(points: &[f64], dim: usize, cell: f64) -> Self {
        assert!(dim > 0 && points.len().is_multiple_of(dim));
        assert!(cell > 0.0 && cell.is_finite(), "cell size must be positive");
        let n = points.len() / dim;
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for p in points.chunks_exact(dim) {
            for k in 0..dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        if n == 0 {
            lo = vec![0.0; dim];
            hi = vec![0.0; dim];
        }
        let mut cell = cell;
        let budget = (MAX_CELLS_PER_POINT * n.max(1) as f64).max(64.0);
        let count = |c: f64| -> f64 { (0..dim).map(|k| ((hi[k] - lo[k]) / c).floor() + 1.0).product() };
        while count(cell) > budget {
            cell *= 1.5;
        }
        let shape: Vec<i64> = (0..dim).map(|k| ((hi[k] - lo[k]) / cell).floor() as i64 + 1).collect();
        let total = shape.iter().product::<i64>() as usize;

        let mut grid = Self { dim, cell, origin: lo, shape, starts: Vec::new(), items: Vec::new(), points: points.to_vec() };
        let keys: Vec<usize> = (0..n).map(|i| grid.linear(&grid.coords(grid.point(i)))).collect();
        let mut counts = vec![0usize; total + 1];
        for &k in &keys {
            counts[k + 1] += 1;
        }
        for c in 1..=total {
            counts[c] += counts[c - 1];
        }
        let mut fill = counts.clone();
        let mut items = vec![0usize; n];
        for (i, &k) in keys.iter().enumerate() {
            items[fill[k]] = i;
            fill[k] += 1;
        }
        grid.starts = counts;
        grid.items = items;
        grid
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn cell_size(&self) -> f64 {
        self.cell
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    fn coords(&self, x: &[f64]) -> Vec<i64> {
        (0..self.dim).map(|k| ((x[k] - self.origin[k]) / self.cell).floor() as i64).collect()
    }

    fn linear(&self, c: &[i64]) -> usize {
        let mut idx = 0i64;
        for k in 0..self.dim {
            idx = idx * self.shape[k] + c[k];
        }
        idx as usize
    }

    fn bucket(&self, c: &[i64]) -> &[usize] {
        let l = self.linear(c);
        &self.items[self.starts[l]..self.starts[l + 1]]
    }

    /// Visits every cell in the box `[lo, hi]` (inclusive, clipped to the grid).
    fn visit_box<F: FnMut(&[i64])>(&self, lo: &[i64], hi: &[i64], mut f: F) {
        let lo: Vec<i64> = (0..self.dim).map(|k| lo[k].max(0)).collect();
        let hi: Vec<i64> = (0..self.dim).map(|k| hi[k].min(self.shape[k] - 1)).collect();
        if (0..self.dim).any(|k| lo[k] > hi[k]) {
            return;
        }
        let mut cur = lo.clone();
        loop {
            f(&cur);
            let mut k = self.dim;
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                if cur[k] < hi[k] {
                    cur[k] += 1;
                    break;
                }
                cur[k] = lo[k];
            }
        }
    }

    fn dist2(&self, x: &[f64], j: usize) -> f64 {
        self.point(j).iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    /// Calls `f(j, |x - x_j|)` for every point with `|x - x_j| ≤ radius`.
    pub fn for_each_within<F: FnMut(usize, f64)>(&self, x: &[f64], radius: f64, mut f: F) {
        let reach = (radius / self.cell).ceil() as i64;
        let c = self.coords(x);
        let lo: Vec<i64> = c.iter().map(|v| v - reach).collect();
        let hi: Vec<i64> = c.iter().map(|v| v + reach).collect();
        let r2 = radius * radius;
        self.visit_box(&lo, &hi, |cell| {
            for &j in self.bucket(cell) {
                let d2 = self.dist2(x, j);
                if d2 <= r2 {
                    f(j, d2.sqrt());
                }
            }
        });
    }

    /// Nearest stored point to `x`; ties go to the lowest index.
    pub fn nearest(&self, x: &[f64]) -> Option<(usize, f64)> {
        if self.is_empty() {
            return None;
        }
        let c = self.coords(x);
        let max_ring = (0..self.dim).map(|k| c[k].abs().max((self.shape[k] - 1 - c[k]).abs())).max().unwrap_or(0);
        let mut best: Option<(f64, usize)> = None;
        for ring in 0..=max_ring {
            let lo: Vec<i64> = c.iter().map(|v| v - ring).collect();
            let hi: Vec<i64> = c.iter().map(|v| v + ring).collect();
            self.visit_box(&lo, &hi, |cell| {
                let cheb = (0..self.dim).map(|k| (cell[k] - c[k]).abs()).max().unwrap_or(0);
                if cheb != ring {
                    return;
                }
                for &j in self.bucket(cell) {
                    let cand = (self.dist2(x, j), j);
                    if best.is_none_or(|b| cand < b) {
                        best = Some(cand);
                    }
                }
            });
            if let Some((d2, _)) = best {
                let cleared = ring as f64 * self.cell;
                if d2 < cleared * cleared {
                    break;
                }
            }
        }
        best.map(|(d2, j)| (j, d2.sqrt()))
    }
}
