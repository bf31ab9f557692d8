//! Bregman distance, the three-point identity, symmetrization and geodesics.
//!
//! ```text
//! D(x, y) = f(x) − f(y) − ⟨∇f(y), x − y⟩      y ∈ U,   +∞ otherwise
//! S(x, y) = D(x, y) + D(y, x) = ⟨∇f(x) − ∇f(y), x − y⟩
//! z_λ     = ∇f*(λ ∇f(y) + (1 − λ) ∇f(x))
//! ```
//!
//! Identity checks return raw residuals; callers decide on tolerances.

use crate::error::{check_dim, Error, Result};
use crate::legendre::LegendreFunction;
use crate::vector::{dot, sub};

/// `D(x, y)`. Returns `+∞` when `y ∉ U` or `x ∉ dom f`; `x` may sit on
/// the boundary of `dom f`.
pub fn distance(f: &LegendreFunction, x: &[f64], y: &[f64]) -> Result<f64> {
    check_dim(f.dimension(), x.len())?;
    check_dim(f.dimension(), y.len())?;
    if !f.in_domain(y) || !f.in_closed_domain(x) {
        return Ok(f64::INFINITY);
    }
    f.divergence_sum(x, y)
}

/// Both sides of `D(c,y) − D(x,y) = f(c) − f(x) − ⟨∇f(y), c − x⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreePoint {
    /// `D(c, y) − D(x, y)`.
    pub lhs: f64,
    /// `f(c) − f(x) − ⟨∇f(y), c − x⟩`.
    pub rhs: f64,
}

impl ThreePoint {
    pub fn value(&self) -> f64 {
        self.lhs
    }

    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }

    /// `|lhs − rhs| ≤ 1e-10 (1 + |lhs|)`.
    pub fn is_consistent(&self) -> bool {
        self.residual() <= 1e-10 * (1.0 + self.lhs.abs())
    }
}

pub fn three_point_gap(
    f: &LegendreFunction,
    c: &[f64],
    x: &[f64],
    y: &[f64],
) -> Result<ThreePoint> {
    check_dim(f.dimension(), c.len())?;
    check_dim(f.dimension(), x.len())?;
    let gy = f.grad_f(y)?;
    if !f.in_closed_domain(c) || !f.in_closed_domain(x) {
        return Err(Error::Domain {
            function: f.name(),
            point: if f.in_closed_domain(c) { x.to_vec() } else { c.to_vec() },
        });
    }
    let lhs = distance(f, c, y)? - distance(f, x, y)?;
    let rhs = f.eval_f(c)? - f.eval_f(x)? - dot(&gy, &sub(c, x));
    Ok(ThreePoint { lhs, rhs })
}

/// `S(x, y) = ⟨∇f(x) − ∇f(y), x − y⟩`.
pub fn symmetrized(f: &LegendreFunction, x: &[f64], y: &[f64]) -> Result<f64> {
    let gx = f.grad_f(x)?;
    let gy = f.grad_f(y)?;
    Ok(dot(&sub(&gx, &gy), &sub(x, y)))
}

/// Endpoints and position on a Bregman geodesic.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicParams {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `λ ≥ 0`; values above 1 extrapolate past `y` in the dual space.
    pub lambda: f64,
}

impl GeodesicParams {
    pub fn new(x: Vec<f64>, y: Vec<f64>, lambda: f64) -> Self {
        GeodesicParams { x, y, lambda }
    }
}

/// `z_λ = ∇f*(λ ∇f(y) + (1 − λ) ∇f(x))`, with `z_0 = x` and `z_1 = y` exactly.
pub fn geodesic_point(f: &LegendreFunction, params: &GeodesicParams) -> Result<Vec<f64>> {
    let GeodesicParams { x, y, lambda } = params;
    if !(lambda.is_finite() && *lambda >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "geodesic parameter must be finite and >= 0, got {lambda}"
        )));
    }
    let gx = f.grad_f(x)?;
    let gy = f.grad_f(y)?;
    if *lambda == 0.0 {
        return Ok(x.clone());
    }
    if *lambda == 1.0 {
        return Ok(y.clone());
    }
    let dual: Vec<f64> = gx
        .iter()
        .zip(&gy)
        .map(|(a, b)| lambda * b + (1.0 - lambda) * a)
        .collect();
    f.grad_conj(&dual)
}

/// Residuals of the two geodesic identities
///
/// ```text
/// (i)  D(x,y) = D(x,z) + D(z,y) + ((1−λ)/λ) S(x,z)
/// (ii) S(x,y) = S(y,z)/(1−λ) + S(z,x)/λ
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicResiduals {
    pub residual_i: f64,
    pub residual_ii: f64,
    /// `1 + |D(x,y)| + |S(x,y)|`, the natural scale for both residuals.
    pub scale: f64,
}

impl GeodesicResiduals {
    pub fn worst_relative(&self) -> f64 {
        self.residual_i.max(self.residual_ii) / self.scale
    }
}

pub fn geodesic_identities(
    f: &LegendreFunction,
    x: &[f64],
    y: &[f64],
    lambda: f64,
) -> Result<GeodesicResiduals> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "geodesic identities need 0 < λ < 1, got {lambda}"
        )));
    }
    let z = geodesic_point(f, &GeodesicParams::new(x.to_vec(), y.to_vec(), lambda))?;
    let dxy = distance(f, x, y)?;
    let sxy = symmetrized(f, x, y)?;
    let lhs_i = distance(f, &z, y)? + distance(f, x, &z)?
        + (1.0 - lambda) / lambda * symmetrized(f, x, &z)?;
    let lhs_ii = symmetrized(f, y, &z)? / (1.0 - lambda) + symmetrized(f, &z, x)? / lambda;
    Ok(GeodesicResiduals {
        residual_i: (dxy - lhs_i).abs(),
        residual_ii: (sxy - lhs_ii).abs(),
        scale: 1.0 + dxy.abs() + sxy.abs(),
    })
}
