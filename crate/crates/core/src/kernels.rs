//! Radial kernel profiles `η`, their length-scale rescalings `η_ε`, and the
//! surface tension `σ_η = ∫ η(|h|) |h₁| dh`.
//!
//! Every profile has a finite support radius. The indicator kernel is
//! compactly supported; the exponential and Gaussian profiles are cut off at
//! a fixed multiple of their scale so that neighbor queries stay finite.
//! All integrals (surface tension, mass) are taken over the truncated
//! profile, which is the profile the graph actually uses.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

/// Gaussian profiles are cut off at this many standard deviations.
pub const GAUSSIAN_TRUNCATION: f64 = 8.0;

/// Exponential profiles are cut off at this many decay lengths
/// (`e^{-16} ≈ 1.1e-7` of the peak).
pub const EXPONENTIAL_TRUNCATION: f64 = 16.0;

const QUAD_ABS_TOL: f64 = 1e-8;

/// Shape of a radial profile together with its length parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum KernelShape {
    /// `1` on `[0, radius]`, `0` beyond.
    Indicator { radius: f64 },
    /// `exp(-r / scale)`.
    Exponential { scale: f64 },
    /// `exp(-r² / (2 sigma²))`.
    Gaussian { sigma: f64 },
}

/// An admissible kernel: non-increasing in `r` with finite `∫ η(r) r^d dr`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelProfile {
    #[serde(flatten)]
    pub shape: KernelShape,
    pub amplitude: f64,
}

fn check_positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::domain(format!("{name} must be positive and finite, got {v}")))
    }
}

impl KernelProfile {
    pub fn indicator(radius: f64) -> Result<Self> {
        let radius = check_positive("indicator radius", radius)?;
        Ok(Self { shape: KernelShape::Indicator { radius }, amplitude: 1.0 })
    }

    pub fn exponential(scale: f64) -> Result<Self> {
        let scale = check_positive("exponential scale", scale)?;
        Ok(Self { shape: KernelShape::Exponential { scale }, amplitude: 1.0 })
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        let sigma = check_positive("gaussian sigma", sigma)?;
        Ok(Self { shape: KernelShape::Gaussian { sigma }, amplitude: 1.0 })
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Result<Self> {
        self.amplitude = check_positive("kernel amplitude", amplitude)?;
        Ok(self)
    }

    /// Rejects profiles whose parameters are not positive and finite.
    pub fn validate(&self) -> Result<()> {
        check_positive("kernel amplitude", self.amplitude)?;
        match self.shape {
            KernelShape::Indicator { radius } => check_positive("indicator radius", radius)?,
            KernelShape::Exponential { scale } => check_positive("exponential scale", scale)?,
            KernelShape::Gaussian { sigma } => check_positive("gaussian sigma", sigma)?,
        };
        Ok(())
    }

    /// Length parameter of the shape (radius, decay length or sigma).
    pub fn scale(&self) -> f64 {
        match self.shape {
            KernelShape::Indicator { radius } => radius,
            KernelShape::Exponential { scale } => scale,
            KernelShape::Gaussian { sigma } => sigma,
        }
    }

    fn with_scale(&self, s: f64) -> Self {
        let shape = match self.shape {
            KernelShape::Indicator { .. } => KernelShape::Indicator { radius: s },
            KernelShape::Exponential { .. } => KernelShape::Exponential { scale: s },
            KernelShape::Gaussian { .. } => KernelShape::Gaussian { sigma: s },
        };
        Self { shape, amplitude: self.amplitude }
    }

    /// Radius beyond which the profile vanishes.
    pub fn support_radius(&self) -> f64 {
        match self.shape {
            KernelShape::Indicator { radius } => radius,
            KernelShape::Exponential { scale } => EXPONENTIAL_TRUNCATION * scale,
            KernelShape::Gaussian { sigma } => GAUSSIAN_TRUNCATION * sigma,
        }
    }

    /// `η(r)` without argument checks. The support is closed: `η(R) > 0`.
    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        if r > self.support_radius() {
            return 0.0;
        }
        let unit = match self.shape {
            KernelShape::Indicator { .. } => 1.0,
            KernelShape::Exponential { scale } => (-r / scale).exp(),
            KernelShape::Gaussian { sigma } => (-0.5 * (r / sigma) * (r / sigma)).exp(),
        };
        self.amplitude * unit
    }

    /// `η(r)` for `r ≥ 0`.
    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::domain(format!("kernel argument must be non-negative, got {r}")));
        }
        Ok(self.value(r))
    }

    /// `η_ε(z) = ε^{-d} η(|z| / ε)` with `d = z.len()`.
    pub fn eval_scaled(&self, z: &[f64], eps: f64) -> Result<f64> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::domain(format!("eps must be positive, got {eps}")));
        }
        if z.is_empty() {
            return Err(Error::domain("dimension must be at least 1"));
        }
        let norm = z.iter().map(|c| c * c).sum::<f64>().sqrt();
        Ok(self.value(norm / eps) / eps.powi(z.len() as i32))
    }

    /// `∫₀^R η(r) r^k dr` by adaptive quadrature.
    pub fn radial_moment(&self, k: u32) -> f64 {
        let support = self.support_radius();
        let f = |r: f64| self.value(r) * r.powi(k as i32);
        let crude = quadrature::integrate(f, 0.0, support, f64::INFINITY);
        let tol = QUAD_ABS_TOL.min(1e-10 * crude.abs()).max(f64::MIN_POSITIVE);
        quadrature::integrate_pieces(f, &[0.0, support], tol)
    }

    /// Surface tension `σ_η` in dimension `d`.
    ///
    /// Closed form for the indicator kernel, radial quadrature otherwise.
    pub fn surface_tension(&self, d: usize) -> Result<f64> {
        check_dim(d)?;
        self.validate()?;
        match self.shape {
            KernelShape::Indicator { radius } => {
                Ok(self.amplitude * abs_first_moment_sphere(d) * radius.powi(d as i32 + 1) / (d as f64 + 1.0))
            }
            _ => Ok(self.surface_tension_quadrature(d)),
        }
    }

    /// Surface tension by radial quadrature for any profile.
    pub fn surface_tension_quadrature(&self, d: usize) -> f64 {
        abs_first_moment_sphere(d) * self.radial_moment(d as u32)
    }

    /// `∫_{ℝ^d} η(|h|) dh`.
    pub fn mass(&self, d: usize) -> Result<f64> {
        check_dim(d)?;
        Ok(sphere_area(d) * self.radial_moment(d as u32 - 1))
    }

    /// Rescales support and amplitude so that `η(r) ≥ 1` on `[0, 2]`.
    ///
    /// The length parameter is set to 2 and the amplitude raised to the
    /// smallest value for which `η(2) ≥ 1`; monotonicity does the rest.
    pub fn normalize_for_theory(&self) -> Self {
        let unit_at_scale = match self.shape {
            KernelShape::Indicator { .. } => 1.0,
            KernelShape::Exponential { .. } => (-1.0f64).exp(),
            KernelShape::Gaussian { .. } => (-0.5f64).exp(),
        };
        let mut out = self.with_scale(2.0);
        out.amplitude = self.amplitude.max(1.0 / unit_at_scale);
        out
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 {
        Err(Error::domain("dimension must be at least 1"))
    } else {
        Ok(())
    }
}

/// `Γ(k / 2)` for positive integer `k`.
fn gamma_half(k: usize) -> f64 {
    let (mut acc, mut x) = if k.is_multiple_of(2) { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    let target = k as f64 / 2.0;
    while x < target {
        acc *= x;
        x += 1.0;
    }
    acc
}

/// Surface area of the unit sphere `S^{d-1}`.
pub fn sphere_area(d: usize) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma_half(d)
}

/// `∫_{S^{d-1}} |θ₁| dθ`.
pub fn abs_first_moment_sphere(d: usize) -> f64 {
    2.0 * PI.powf((d as f64 - 1.0) / 2.0) / gamma_half(d + 1)
}

impl fmt::Display for KernelProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.shape {
            KernelShape::Indicator { .. } => "indicator",
            KernelShape::Exponential { .. } => "exp",
            KernelShape::Gaussian { .. } => "gauss",
        };
        write!(f, "{name}:scale={}", self.scale())?;
        if self.amplitude != 1.0 {
            write!(f, ":amp={}", self.amplitude)?;
        }
        Ok(())
    }
}

/// Parses `indicator|exp|gauss` with optional `:scale=<f>` and `:amp=<f>`.
impl FromStr for KernelProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(':');
        let name = parts.next().unwrap_or_default();
        let mut scale = 1.0;
        let mut amplitude = 1.0;
        for opt in parts {
            let (key, value) = opt
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("kernel option `{opt}` is not key=value")))?;
            let value: f64 = value
                .parse()
                .map_err(|_| Error::Parse(format!("kernel option `{key}` has non-numeric value `{value}`")))?;
            match key {
                "scale" => scale = value,
                "amp" | "amplitude" => amplitude = value,
                other => return Err(Error::Parse(format!("unknown kernel option `{other}`"))),
            }
        }
        let profile = match name {
            "indicator" => KernelProfile::indicator(scale)?,
            "exp" | "exponential" => KernelProfile::exponential(scale)?,
            "gauss" | "gaussian" => KernelProfile::gaussian(scale)?,
            other => return Err(Error::Parse(format!("unknown kernel `{other}` (expected indicator|exp|gauss)"))),
        };
        profile.with_amplitude(amplitude)
    }
}
