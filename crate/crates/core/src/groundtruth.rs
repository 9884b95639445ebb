//! Synthetic ground-truth distributions with piecewise-constant density and
//! conditional mean on axis-aligned boxes.
//!
//! Restricting `ρ` and `μ` to rectangular partitions makes every population
//! integral (Bayes risk, risk of a constant, median of the Bayes classifier)
//! an exact finite sum over cell intersections.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledCloud;
use crate::error::{Error, Result};

const MASS_TOL: f64 = 1e-12;
const GEOM_TOL: f64 = 1e-12;

/// Axis-aligned box `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxRegion {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxRegion {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        Self { lo, hi }
    }

    pub fn unit(d: usize) -> Self {
        Self { lo: vec![0.0; d], hi: vec![1.0; d] }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }

    pub fn contains_closed(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(&v, (&l, &h))| v >= l && v <= h)
    }

    /// Half-open membership `lo ≤ x < hi`, closed on faces shared with `outer`'s upper boundary.
    fn contains_half_open(&self, x: &[f64], outer: &BoxRegion) -> bool {
        (0..self.dim()).all(|k| {
            let v = x[k];
            v >= self.lo[k] && (v < self.hi[k] || (v == self.hi[k] && self.hi[k] == outer.hi[k]))
        })
    }

    pub fn intersection_volume(&self, other: &BoxRegion) -> f64 {
        let mut vol = 1.0;
        for k in 0..self.dim() {
            let side = self.hi[k].min(other.hi[k]) - self.lo[k].max(other.lo[k]);
            if side <= 0.0 {
                return 0.0;
            }
            vol *= side;
        }
        vol
    }

    fn validate(&self, what: &str, d: usize) -> Result<()> {
        if self.lo.len() != d || self.hi.len() != d {
            return Err(Error::InvalidModel(format!("{what} has dimension mismatch (expected {d})")));
        }
        for k in 0..d {
            if !(self.lo[k].is_finite() && self.hi[k].is_finite() && self.lo[k] < self.hi[k]) {
                return Err(Error::InvalidModel(format!("{what} has empty or non-finite extent on axis {k}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCell {
    #[serde(flatten)]
    pub region: BoxRegion,
    /// Probability mass `ν(cell)`; the density on the cell is `mass / volume`.
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuCell {
    #[serde(flatten)]
    pub region: BoxRegion,
    pub mu: f64,
}

/// Serialized form of a model, as read from and written to JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    #[serde(default)]
    pub id: Option<String>,
    pub domain: BoxRegion,
    pub density_cells: Vec<DensityCell>,
    pub mu_cells: Vec<MuCell>,
}

/// The joint law of features and labels: `ν = ρ dx` on a box `D` and
/// `P(y = 1 | x) = μ(x)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "ModelSpec", into = "ModelSpec")]
pub struct GroundTruthModel {
    id: String,
    domain: BoxRegion,
    density_cells: Vec<DensityCell>,
    mu_cells: Vec<MuCell>,
    densities: Vec<f64>,
    cumulative_mass: Vec<f64>,
    /// `(mu index, ν(density cell ∩ mu cell))` for every overlapping pair.
    overlaps: Vec<(usize, f64)>,
}

fn check_partition(what: &str, domain: &BoxRegion, regions: &[&BoxRegion]) -> Result<()> {
    let d = domain.dim();
    if regions.is_empty() {
        return Err(Error::InvalidModel(format!("{what} list is empty")));
    }
    for (i, r) in regions.iter().enumerate() {
        r.validate(&format!("{what} {i}"), d)?;
        for k in 0..d {
            if r.lo[k] < domain.lo[k] - GEOM_TOL || r.hi[k] > domain.hi[k] + GEOM_TOL {
                return Err(Error::InvalidModel(format!("{what} {i} extends outside the domain")));
            }
        }
    }
    for i in 0..regions.len() {
        for j in i + 1..regions.len() {
            if regions[i].intersection_volume(regions[j]) > GEOM_TOL * domain.volume() {
                return Err(Error::InvalidModel(format!("{what}s {i} and {j} overlap")));
            }
        }
    }
    let covered: f64 = regions.iter().map(|r| r.volume()).sum();
    if ((covered - domain.volume()) / domain.volume()).abs() > 1e-9 {
        return Err(Error::InvalidModel(format!(
            "{what}s cover volume {covered}, domain volume is {}",
            domain.volume()
        )));
    }
    Ok(())
}

impl TryFrom<ModelSpec> for GroundTruthModel {
    type Error = Error;

    fn try_from(spec: ModelSpec) -> Result<Self> {
        let domain = spec.domain;
        if domain.dim() == 0 {
            return Err(Error::InvalidModel("domain dimension must be at least 1".into()));
        }
        domain.validate("domain", domain.dim())?;
        let dregions: Vec<&BoxRegion> = spec.density_cells.iter().map(|c| &c.region).collect();
        check_partition("density cell", &domain, &dregions)?;
        let mregions: Vec<&BoxRegion> = spec.mu_cells.iter().map(|c| &c.region).collect();
        check_partition("mu cell", &domain, &mregions)?;

        for (i, c) in spec.density_cells.iter().enumerate() {
            if !(c.mass > 0.0 && c.mass.is_finite()) {
                return Err(Error::InvalidModel(format!(
                    "density cell {i} has mass {}; the density must be bounded below by a positive constant",
                    c.mass
                )));
            }
        }
        let total: f64 = spec.density_cells.iter().map(|c| c.mass).sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidModel(format!("density masses sum to {total}, expected 1")));
        }
        for (i, c) in spec.mu_cells.iter().enumerate() {
            if !(0.0..=1.0).contains(&c.mu) {
                return Err(Error::InvalidModel(format!("mu cell {i} has mu = {} outside [0, 1]", c.mu)));
            }
            if c.mu == 0.5 {
                return Err(Error::InvalidModel(format!(
                    "mu cell {i} has mu = 1/2 on a set of positive measure"
                )));
            }
        }

        let densities = spec.density_cells.iter().map(|c| c.mass / c.region.volume()).collect();
        let mut acc = 0.0;
        let cumulative_mass = spec
            .density_cells
            .iter()
            .map(|c| {
                acc += c.mass;
                acc
            })
            .collect();
        let mut overlaps = Vec::new();
        for dc in &spec.density_cells {
            let rho = dc.mass / dc.region.volume();
            for (k, mc) in spec.mu_cells.iter().enumerate() {
                let v = dc.region.intersection_volume(&mc.region);
                if v > 0.0 {
                    overlaps.push((k, rho * v));
                }
            }
        }
        Ok(Self {
            id: spec.id.unwrap_or_else(|| "custom".to_string()),
            domain,
            density_cells: spec.density_cells,
            mu_cells: spec.mu_cells,
            densities,
            cumulative_mass,
            overlaps,
        })
    }
}

impl From<GroundTruthModel> for ModelSpec {
    fn from(m: GroundTruthModel) -> Self {
        ModelSpec { id: Some(m.id), domain: m.domain, density_cells: m.density_cells, mu_cells: m.mu_cells }
    }
}

fn unit_quadrants() -> [BoxRegion; 4] {
    // upper-left, upper-right, lower-left, lower-right
    [
        BoxRegion::new(vec![0.0, 0.5], vec![0.5, 1.0]),
        BoxRegion::new(vec![0.5, 0.5], vec![1.0, 1.0]),
        BoxRegion::new(vec![0.0, 0.0], vec![0.5, 0.5]),
        BoxRegion::new(vec![0.5, 0.0], vec![1.0, 0.5]),
    ]
}

impl GroundTruthModel {
    pub fn from_spec(spec: ModelSpec) -> Result<Self> {
        spec.try_into()
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: ModelSpec = serde_json::from_str(s)?;
        spec.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ModelSpec::from(self.clone())).expect("model serializes")
    }

    fn with_id(mut self, id: &str) -> Self {
        self.id = id.to_string();
        self
    }

    /// Uniform density on the unit cube with constant conditional mean.
    pub fn constant_mu(d: usize, mu: f64) -> Result<Self> {
        let unit = BoxRegion::unit(d);
        Self::from_spec(ModelSpec {
            id: Some(format!("constant-mu-{mu}")),
            domain: unit.clone(),
            density_cells: vec![DensityCell { region: unit.clone(), mass: 1.0 }],
            mu_cells: vec![MuCell { region: unit, mu }],
        })
    }

    /// Unit square, uniform density, `μ = high` on the upper-left and
    /// lower-right quadrants and `μ = low` on the other two.
    pub fn quadrant_with(high: f64, low: f64) -> Result<Self> {
        let q = unit_quadrants();
        let mus = [high, low, low, high];
        Self::from_spec(ModelSpec {
            id: Some(format!("quadrant-{high}-{low}")),
            domain: BoxRegion::unit(2),
            density_cells: vec![DensityCell { region: BoxRegion::unit(2), mass: 1.0 }],
            mu_cells: q.iter().zip(mus).map(|(r, mu)| MuCell { region: r.clone(), mu }).collect(),
        })
    }

    /// The symmetric quadrant model with `μ ∈ {0.45, 0.55}`.
    pub fn quadrant() -> Self {
        Self::quadrant_with(0.55, 0.45).expect("valid preset").with_id("quadrant")
    }

    /// Quadrant model whose `μ = 0.55` quadrants carry 60% of the mass, so
    /// the Bayes classifier has a unique median.
    pub fn quadrant_asymmetric() -> Self {
        let q = unit_quadrants();
        let masses = [0.3, 0.2, 0.2, 0.3];
        let mus = [0.55, 0.45, 0.45, 0.55];
        Self::from_spec(ModelSpec {
            id: Some("quadrant-asymmetric".into()),
            domain: BoxRegion::unit(2),
            density_cells: q.iter().zip(masses).map(|(r, mass)| DensityCell { region: r.clone(), mass }).collect(),
            mu_cells: q.iter().zip(mus).map(|(r, mu)| MuCell { region: r.clone(), mu }).collect(),
        })
        .expect("valid preset")
    }

    /// Unit square, uniform density, `μ = right` for `x₀ > 1/2` and `μ = left` otherwise.
    pub fn half_plane(left: f64, right: f64) -> Result<Self> {
        Self::from_spec(ModelSpec {
            id: Some("half-plane".into()),
            domain: BoxRegion::unit(2),
            density_cells: vec![DensityCell { region: BoxRegion::unit(2), mass: 1.0 }],
            mu_cells: vec![
                MuCell { region: BoxRegion::new(vec![0.0, 0.0], vec![0.5, 1.0]), mu: left },
                MuCell { region: BoxRegion::new(vec![0.5, 0.0], vec![1.0, 1.0]), mu: right },
            ],
        })
    }

    /// Looks up a named preset model.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "quadrant" => Ok(Self::quadrant()),
            "quadrant-asymmetric" | "quadrant-asym" => Ok(Self::quadrant_asymmetric()),
            "half-plane" => Self::half_plane(0.3, 0.7),
            other => Err(Error::domain(format!(
                "unknown preset `{other}` (expected quadrant|quadrant-asymmetric|half-plane)"
            ))),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn domain(&self) -> &BoxRegion {
        &self.domain
    }

    pub fn density_cells(&self) -> &[DensityCell] {
        &self.density_cells
    }

    pub fn mu_cells(&self) -> &[MuCell] {
        &self.mu_cells
    }

    /// Density value on each density cell, in cell order.
    pub fn cell_densities(&self) -> &[f64] {
        &self.densities
    }

    /// `(m, M)` with `m ≤ ρ ≤ M` on `D`.
    pub fn density_bounds(&self) -> (f64, f64) {
        let lo = self.densities.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.densities.iter().cloned().fold(0.0, f64::max);
        (lo, hi)
    }

    fn check_inside(&self, x: &[f64]) -> Result<()> {
        if self.domain.contains_closed(x) {
            Ok(())
        } else {
            Err(Error::domain(format!("point {x:?} lies outside the domain")))
        }
    }

    fn mu_index(&self, x: &[f64]) -> usize {
        self.mu_cells
            .iter()
            .position(|c| c.region.contains_half_open(x, &self.domain))
            .expect("mu cells partition the domain")
    }

    /// `μ(x)`, using half-open cells `[lo, hi)`.
    pub fn mu_at(&self, x: &[f64]) -> Result<f64> {
        self.check_inside(x)?;
        Ok(self.mu_cells[self.mu_index(x)].mu)
    }

    /// `ρ(x)`, using half-open cells `[lo, hi)`.
    pub fn density_at(&self, x: &[f64]) -> Result<f64> {
        self.check_inside(x)?;
        let i = self
            .density_cells
            .iter()
            .position(|c| c.region.contains_half_open(x, &self.domain))
            .expect("density cells partition the domain");
        Ok(self.densities[i])
    }

    /// The Bayes classifier `u_B(x) = 1` iff `μ(x) ≥ 1/2`.
    ///
    /// On a face shared by cells the point is labeled 1 if any adjacent
    /// cell has `μ ≥ 1/2`.
    pub fn bayes_classify(&self, x: &[f64]) -> Result<u8> {
        self.check_inside(x)?;
        Ok(self.bayes_unchecked(x))
    }

    pub(crate) fn bayes_unchecked(&self, x: &[f64]) -> u8 {
        let any_high = self.mu_cells.iter().any(|c| c.mu >= 0.5 && c.region.contains_closed(x));
        u8::from(any_high)
    }

    pub(crate) fn mu_unchecked(&self, x: &[f64]) -> f64 {
        self.mu_cells[self.mu_index(x)].mu
    }

    /// `∫ f(μ) dν`, exact over cell intersections.
    pub fn integrate_mu<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.overlaps.iter().map(|&(k, mass)| f(self.mu_cells[k].mu) * mass).sum()
    }

    /// `∫ min(μ, 1 - μ) dν`.
    pub fn bayes_risk(&self) -> f64 {
        self.integrate_mu(|mu| mu.min(1.0 - mu))
    }

    /// `ν({u_B = 1})`.
    pub fn bayes_one_mass(&self) -> f64 {
        self.integrate_mu(|mu| if mu >= 0.5 { 1.0 } else { 0.0 })
    }

    /// The median `u∞` of the Bayes classifier.
    pub fn median_label(&self) -> Result<u8> {
        let mass = self.bayes_one_mass();
        if (mass - 0.5).abs() <= MASS_TOL {
            return Err(Error::DegenerateMedian(mass));
        }
        Ok(u8::from(mass > 0.5))
    }

    /// `R(c) = ∫ |c - y| d𝛎 = ∫ (|c - 1| μ + |c| (1 - μ)) dν`.
    pub fn risk_of_constant(&self, c: f64) -> f64 {
        self.integrate_mu(|mu| (c - 1.0).abs() * mu + c.abs() * (1.0 - mu))
    }

    /// Draws `n` i.i.d. labeled points.
    ///
    /// Point `i` uses its own ChaCha stream keyed by `(seed, i)`, so output is
    /// independent of thread count and the first `k` points of a larger draw
    /// equal a draw of size `k`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<LabeledCloud> {
        if n == 0 {
            return Err(Error::domain("sample size must be at least 1"));
        }
        let d = self.dim();
        let rows: Vec<(Vec<f64>, u8)> = (0..n).into_par_iter().map(|i| self.sample_one(seed, i as u64)).collect();
        let mut points = Vec::with_capacity(n * d);
        let mut labels = Vec::with_capacity(n);
        for (x, y) in rows {
            points.extend_from_slice(&x);
            labels.push(y);
        }
        LabeledCloud::new(d, points, labels).map(|c| c.with_provenance(Some(seed), self.id.clone()))
    }

    fn sample_one(&self, seed: u64, index: u64) -> (Vec<f64>, u8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let draw: f64 = rng.random();
        let cell = self
            .cumulative_mass
            .partition_point(|&c| c <= draw)
            .min(self.density_cells.len() - 1);
        let region = &self.density_cells[cell].region;
        let x: Vec<f64> = (0..self.dim())
            .map(|k| {
                let t: f64 = rng.random();
                (region.lo[k] + t * (region.hi[k] - region.lo[k])).min(region.hi[k])
            })
            .collect();
        let coin: f64 = rng.random();
        let y = u8::from(coin < self.mu_unchecked(&x));
        (x, y)
    }
}
