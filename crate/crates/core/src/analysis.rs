//! Subdifferential calculus of `g = D̄_C` and the conjugate identities of
//! `f + ι_C`, all checked numerically against closed forms.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bregman::distance;
use crate::error::{check_dim, Error, Result};
use crate::legendre::LegendreFunction;
use crate::projection::{left_project, ProjectionOptions, ProjectionResult};
use crate::sets::{ClosedSet, Shape};
use crate::vector::{add, dist, dot, hausdorff, norm, scale, sub};

/// Finite-difference ladder for the Dini quotient.
pub const DINI_STEPS: [f64; 5] = [1e-3, 1e-4, 1e-5, 1e-6, 1e-7];
/// Offsets around the base point for the Clarke estimate.
pub const CLARKE_RADII: [f64; 2] = [1e-4, 1e-5];
pub const CLARKE_DIRECTIONS: usize = 4;
const STABLE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubderivativeEstimate {
    pub direction: Vec<f64>,
    pub dini: f64,
    pub clarke: f64,
    pub steps_used: Vec<f64>,
}

/// Refuse analysis when `∇²f` is not positive definite at `points`.
pub fn ensure_positive_definite(f: &LegendreFunction, points: &[&[f64]]) -> Result<()> {
    for p in points {
        if !f.hess_f(p)?.is_positive_definite() {
            return Err(Error::NotPositiveDefinite {
                function: f.name(),
                point: p.to_vec(),
            });
        }
    }
    Ok(())
}

fn unit(w: &[f64]) -> Result<Vec<f64>> {
    let n = norm(w);
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::InvalidArgument("direction must be a nonzero finite vector".into()));
    }
    Ok(scale(w, 1.0 / n))
}

fn g(f: &LegendreFunction, set: &ClosedSet, y: &[f64], opts: &ProjectionOptions) -> Result<f64> {
    Ok(left_project(f, set, y, opts)?.value)
}

/// Dini quotient ladder at `y` along `w` with Richardson extrapolation.
/// Returns the estimate and the steps that stayed inside `U`.
fn dini_ladder(
    f: &LegendreFunction,
    set: &ClosedSet,
    y: &[f64],
    w: &[f64],
    steps: &[f64],
    opts: &ProjectionOptions,
) -> Result<(f64, Vec<f64>)> {
    let g0 = g(f, set, y, opts)?;
    let mut used = Vec::new();
    let mut quotients = Vec::new();
    for &t in steps {
        let p = add(y, &scale(w, t));
        if !f.in_domain(&p) {
            continue;
        }
        used.push(t);
        quotients.push((g(f, set, &p, opts)? - g0) / t);
    }
    if quotients.is_empty() {
        return Err(Error::Domain {
            function: f.name(),
            point: add(y, &scale(w, steps[steps.len() - 1])),
        });
    }
    // First-order error in t: eliminate it between consecutive steps.
    let extrapolated: Vec<f64> = (0..quotients.len().saturating_sub(1))
        .map(|k| {
            let r = used[k] / used[k + 1];
            (r * quotients[k + 1] - quotients[k]) / (r - 1.0)
        })
        .collect();
    let stable: Vec<f64> = extrapolated
        .windows(2)
        .filter(|p| (p[0] - p[1]).abs() <= STABLE * (1.0 + p[0].abs()))
        .map(|p| p[1])
        .collect();
    let value = if let Some(v) = stable.iter().cloned().reduce(f64::min) {
        v
    } else if let Some(&v) = extrapolated.last() {
        v
    } else {
        quotients[0]
    };
    Ok((value, used))
}

/// `liminf_{t↓0} [g(y+tw) − g(y)] / t`.
pub fn dini_subderivative(f: &LegendreFunction, set: &ClosedSet, y: &[f64], w: &[f64], opts: &ProjectionOptions) -> Result<f64> {
    check_dim(f.dimension(), y.len())?;
    check_dim(f.dimension(), w.len())?;
    ensure_positive_definite(f, &[y])?;
    Ok(dini_ladder(f, set, y, &unit(w)?, &DINI_STEPS, opts)?.0)
}

fn clarke_offsets(dim: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xc1a2);
    let mut out = Vec::new();
    for _ in 0..CLARKE_DIRECTIONS {
        let d: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let d = scale(&d, 1.0 / norm(&d).max(1e-300));
        out.push(scale(&d, -1.0));
        out.push(d);
    }
    out
}

/// `limsup_{x→y, t↓0} [g(x+tw) − g(x)] / t`, sampled at offsets of radius
/// 1e-4 and 1e-5 with inner steps below the radius.
pub fn clarke_subderivative(f: &LegendreFunction, set: &ClosedSet, y: &[f64], w: &[f64], opts: &ProjectionOptions) -> Result<f64> {
    Ok(subderivatives(f, set, y, w, opts)?.clarke)
}

pub fn subderivatives(f: &LegendreFunction, set: &ClosedSet, y: &[f64], w: &[f64], opts: &ProjectionOptions) -> Result<SubderivativeEstimate> {
    check_dim(f.dimension(), y.len())?;
    check_dim(f.dimension(), w.len())?;
    ensure_positive_definite(f, &[y])?;
    let w = unit(w)?;
    let (dini, steps_used) = dini_ladder(f, set, y, &w, &DINI_STEPS, opts)?;
    let mut clarke = dini;
    for radius in CLARKE_RADII {
        let inner = [radius * 1e-1, radius * 1e-2, radius * 1e-3];
        for d in clarke_offsets(y.len()) {
            let x = add(y, &scale(&d, radius));
            if !f.in_domain(&x) {
                continue;
            }
            if let Ok((q, _)) = dini_ladder(f, set, &x, &w, &inner, opts) {
                clarke = clarke.max(q);
            }
        }
    }
    Ok(SubderivativeEstimate {
        direction: w,
        dini,
        clarke,
        steps_used,
    })
}

/// `⟨∇²f(y)(y − x), w⟩` for every `x ∈ P̄_C(y)`.
fn formula_values(f: &LegendreFunction, projection: &ProjectionResult, y: &[f64], w: &[f64]) -> Result<Vec<f64>> {
    let h = f.hess_f(y)?;
    let w = unit(w)?;
    Ok(projection
        .minimizers
        .iter()
        .map(|x| dot(&h.apply(&sub(y, x)), &w))
        .collect())
}

/// Closed-form Dini subderivative: min over the projections.
pub fn dini_formula(f: &LegendreFunction, set: &ClosedSet, y: &[f64], w: &[f64], opts: &ProjectionOptions) -> Result<f64> {
    let p = left_project(f, set, y, opts)?;
    Ok(formula_values(f, &p, y, w)?.into_iter().fold(f64::INFINITY, f64::min))
}

/// Closed-form Clarke subderivative: max over the projections.
pub fn clarke_formula(f: &LegendreFunction, set: &ClosedSet, y: &[f64], w: &[f64], opts: &ProjectionOptions) -> Result<f64> {
    let p = left_project(f, set, y, opts)?;
    Ok(formula_values(f, &p, y, w)?.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

/// `∂_L g(y) = ∇²f(y)[y − P̄_C(y)]`.
pub fn limiting_subdifferential(f: &LegendreFunction, set: &ClosedSet, y: &[f64], opts: &ProjectionOptions) -> Result<Vec<Vec<f64>>> {
    ensure_positive_definite(f, &[y])?;
    let p = left_project(f, set, y, opts)?;
    let h = f.hess_f(y)?;
    Ok(p.minimizers.iter().map(|x| h.apply(&sub(y, x))).collect())
}

/// Central finite-difference gradient of `g`.
pub fn fd_gradient(f: &LegendreFunction, set: &ClosedSet, y: &[f64], step: f64, opts: &ProjectionOptions) -> Result<Vec<f64>> {
    (0..y.len())
        .map(|j| {
            let mut p = y.to_vec();
            let mut m = y.to_vec();
            p[j] += step;
            m[j] -= step;
            Ok((g(f, set, &p, opts)? - g(f, set, &m, opts)?) / (2.0 * step))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitingCrossCheck {
    pub formula: Vec<Vec<f64>>,
    pub sampled: Vec<Vec<f64>>,
    /// Hausdorff distance between the formula vectors and the sampled gradients.
    pub mismatch: f64,
}

/// Gradients at nearby unique-projection points should cluster on the
/// vectors of the limiting subdifferential.
pub fn limiting_cross_check(f: &LegendreFunction, set: &ClosedSet, y: &[f64], opts: &ProjectionOptions) -> Result<LimitingCrossCheck> {
    let formula = limiting_subdifferential(f, set, y, opts)?;
    let radius = 1e-5;
    let mut sampled = Vec::new();
    let mut dirs = clarke_offsets(y.len());
    dirs.extend(direction_set(y.len(), 16, 0x5eed));
    for d in dirs {
        let x = add(y, &scale(&d, radius));
        if !f.in_domain(&x) || !left_project(f, set, &x, opts)?.is_unique() {
            continue;
        }
        let grad = fd_gradient(f, set, &x, 1e-8, opts)?;
        if grad.iter().all(|v| v.is_finite()) {
            sampled.push(grad);
        }
    }
    let mismatch = if sampled.is_empty() {
        f64::INFINITY
    } else {
        hausdorff(&formula, &sampled)
    };
    Ok(LimitingCrossCheck {
        formula,
        sampled,
        mismatch,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientCheck {
    pub analytic: Vec<f64>,
    pub numeric: Vec<f64>,
    pub residual: f64,
    /// `residual ≤ 1e-4 (1 + ‖analytic‖)`.
    pub passed: bool,
}

/// FD gradient of `D̄_C` (step 1e-6) against `∇²f(y)[y − P̄_C(y)]`; `None`
/// when the projection is not unique.
pub fn gradient_formula_check(f: &LegendreFunction, set: &ClosedSet, y: &[f64], opts: &ProjectionOptions) -> Result<Option<GradientCheck>> {
    ensure_positive_definite(f, &[y])?;
    let p = left_project(f, set, y, opts)?;
    if !p.is_unique() {
        return Ok(None);
    }
    let analytic = f.hess_f(y)?.apply(&sub(y, p.point()));
    let numeric = fd_gradient(f, set, y, 1e-6, opts)?;
    let residual = dist(&analytic, &numeric);
    Ok(Some(GradientCheck {
        passed: residual <= 1e-4 * (1.0 + norm(&analytic)),
        analytic,
        numeric,
        residual,
    }))
}

fn cloud_points(set: &ClosedSet) -> Result<&[Vec<f64>]> {
    match set.shape() {
        Shape::FiniteCloud(points) => Ok(points),
        _ => Err(Error::InvalidSet(
            "conjugate brute force needs a finite cloud".into(),
        )),
    }
}

/// `max_{c∈C} ⟨s, c⟩ − f(c)` and its maximizers within `rel (1 + |max|)`.
fn cloud_conjugate(f: &LegendreFunction, points: &[Vec<f64>], s: &[f64], rel: f64) -> Result<(f64, Vec<Vec<f64>>)> {
    let vals: Vec<f64> = points
        .iter()
        .map(|c| Ok(dot(s, c) - f.eval_f(c)?))
        .collect::<Result<_>>()?;
    let best = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let cut = best - rel * (1.0 + best.abs());
    let mut arg: Vec<Vec<f64>> = Vec::new();
    for (c, v) in points.iter().zip(&vals) {
        if *v >= cut && !arg.contains(c) {
            arg.push(c.clone());
        }
    }
    Ok((best, arg))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConjugateIdentity {
    /// `(f + ι_C)*(s)` by enumeration.
    pub brute_force: f64,
    /// `f*(s) − D̄_C(∇f*(s))`.
    pub formula: f64,
    pub residual: f64,
    pub tolerance: f64,
}

impl ConjugateIdentity {
    pub fn holds(&self) -> bool {
        self.residual <= self.tolerance
    }
}

/// `(f + ι_C)* = f* − D̄_C ∘ ∇f*` on a finite cloud.
pub fn conjugate_identity_check(f: &LegendreFunction, set: &ClosedSet, s: &[f64], opts: &ProjectionOptions) -> Result<ConjugateIdentity> {
    check_dim(f.dimension(), s.len())?;
    let points = cloud_points(set)?;
    let fs = f.eval_conj(s)?;
    let y = f.grad_conj(s)?;
    let (brute_force, _) = cloud_conjugate(f, points, s, 0.0)?;
    let formula = fs - left_project(f, set, &y, opts)?.value;
    Ok(ConjugateIdentity {
        brute_force,
        formula,
        residual: (brute_force - formula).abs(),
        tolerance: 1e-9 * (1.0 + fs.abs()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FenchelCheck {
    /// `min_c f(c) − f(x) − ⟨s, c − x⟩`.
    pub slack: f64,
    /// `s ∈ ∂(f + ι_C)(x)` by the global inequality.
    pub subgradient: bool,
    /// `x ∈ P̄_C(∇f*(s))`.
    pub projects: bool,
}

impl FenchelCheck {
    pub fn agree(&self) -> bool {
        self.subgradient == self.projects
    }
}

pub fn fenchel_subgradient_check(f: &LegendreFunction, set: &ClosedSet, x: &[f64], s: &[f64], opts: &ProjectionOptions) -> Result<FenchelCheck> {
    let points = cloud_points(set)?;
    if !points.iter().any(|c| c.as_slice() == x) {
        return Err(Error::InvalidArgument(format!("{x:?} is not a member of the cloud")));
    }
    let fx = f.eval_f(x)?;
    let slack = points
        .iter()
        .map(|c| Ok(f.eval_f(c)? - fx - dot(s, &sub(c, x))))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let y = f.grad_conj(s)?;
    let best = left_project(f, set, &y, opts)?.value;
    let dx = distance(f, x, &y)?;
    Ok(FenchelCheck {
        slack,
        subgradient: slack >= -1e-9,
        projects: dx - best <= 1e-9 * (1.0 + best.abs()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjugateSubdifferential {
    /// Maximizers of `⟨s, c⟩ − f(c)`: generators of `∂(f + ι_C)*(s)`.
    pub maximizers: Vec<Vec<f64>>,
    /// Generators of `conv P̄_C(∇f*(s))`.
    pub projections: Vec<Vec<f64>>,
    /// Hausdorff distance between the generator sets, an upper bound for the hulls.
    pub hausdorff: f64,
}

pub fn conjugate_subdifferential_check(f: &LegendreFunction, set: &ClosedSet, s: &[f64], opts: &ProjectionOptions) -> Result<ConjugateSubdifferential> {
    let points = cloud_points(set)?;
    let (_, maximizers) = cloud_conjugate(f, points, s, opts.tol_val)?;
    let projections = left_project(f, set, &f.grad_conj(s)?, opts)?.minimizers;
    Ok(ConjugateSubdifferential {
        hausdorff: hausdorff(&maximizers, &projections),
        maximizers,
        projections,
    })
}

/// 16 equispaced unit directions in R², `±1` in R¹, `count` random unit
/// vectors otherwise.
pub fn direction_set(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    match dim {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..16)
            .map(|k| {
                let t = k as f64 * std::f64::consts::PI / 8.0;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count.max(2 * dim))
                .map(|_| {
                    let d: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    scale(&d, 1.0 / norm(&d).max(1e-300))
                })
                .collect()
        }
    }
}

/// Max deviation of `values[k]` from the best linear fit `⟨a, w_k⟩`.
pub fn linearity_residual(directions: &[Vec<f64>], values: &[f64]) -> f64 {
    if directions.is_empty() {
        return 0.0;
    }
    let dim = directions[0].len();
    let a = DMatrix::from_fn(directions.len(), dim, |i, j| directions[i][j]);
    let b = DVector::from_column_slice(values);
    let Ok(coef) = a.clone().svd(true, true).solve(&b, 1e-12) else {
        return f64::INFINITY;
    };
    (a * coef - b).amax()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectionalProfile {
    pub estimates: Vec<SubderivativeEstimate>,
    pub linearity_residual: f64,
}

/// Dini and Clarke estimates over the standard direction set.
pub fn directional_profile(f: &LegendreFunction, set: &ClosedSet, y: &[f64], opts: &ProjectionOptions) -> Result<DirectionalProfile> {
    let dirs = direction_set(y.len(), 16, 0xd1e5);
    let estimates = dirs
        .iter()
        .map(|w| subderivatives(f, set, y, w, opts))
        .collect::<Result<Vec<_>>>()?;
    let dini: Vec<f64> = estimates.iter().map(|e| e.dini).collect();
    Ok(DirectionalProfile {
        linearity_residual: linearity_residual(&dirs, &dini),
        estimates,
    })
}

/// Largest `|g(p) − g(q)| / ‖p − q‖` over axis-adjacent pairs of a
/// `per_axis^J` grid on the cube `center ± radius` (J ≤ 3).
pub fn empirical_lipschitz(
    f: &LegendreFunction,
    set: &ClosedSet,
    center: &[f64],
    radius: f64,
    per_axis: usize,
    opts: &ProjectionOptions,
) -> Result<f64> {
    let dim = center.len();
    if dim > 3 || per_axis < 2 {
        return Err(Error::InvalidArgument("Lipschitz grid needs J <= 3 and at least 2 points per axis".into()));
    }
    let total = per_axis.pow(dim as u32);
    let h = 2.0 * radius / (per_axis - 1) as f64;
    let point = |mut idx: usize| -> Vec<f64> {
        (0..dim)
            .map(|j| {
                let k = idx % per_axis;
                idx /= per_axis;
                center[j] - radius + h * k as f64
            })
            .collect()
    };
    let values = (0..total)
        .map(|i| g(f, set, &point(i), opts))
        .collect::<Result<Vec<f64>>>()?;
    let mut best: f64 = 0.0;
    for i in 0..total {
        let mut stride = 1;
        for _ in 0..dim {
            if (i / stride) % per_axis + 1 < per_axis {
                best = best.max((values[i + stride] - values[i]).abs() / h);
            }
            stride *= per_axis;
        }
    }
    Ok(best)
}
