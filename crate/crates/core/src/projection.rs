//! Left and right Bregman nearest-distance functions and projectors.
//!
//! Left: `D̄_C(y) = inf_{c∈C} D(c, y)`, minimizers `P̄_C(y)`.
//! Right: `D→_C(y) = inf_{c∈C} D(y, c)`, minimizers `P→_C(y)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bregman::{distance, geodesic_point, GeodesicParams};
use crate::error::{check_dim, Error, Result};
use crate::legendre::LegendreFunction;
use crate::search::{convex_argmin, local_minima};
use crate::sets::{ClosedSet, Convexity, Piece, Shape};
use crate::vector::{dist, dot, hausdorff, lex_cmp, sub};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Multiplicity {
    Unique,
    Multiple,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Tolerances shared by all projection solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProjectionOptions {
    /// Relative value gap: candidates within `tol_val (1 + |value|)` of the best are kept.
    pub tol_val: f64,
    /// Scan step as a fraction of the total parameter range of a 1-D set.
    pub h_scan: f64,
    /// Candidates closer than this are the same minimizer.
    pub dedup: f64,
    /// Two minimizers at least this far apart make the projection multi-valued.
    pub separation: f64,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        ProjectionOptions {
            tol_val: 1e-10,
            h_scan: 1e-3,
            dedup: 1e-7,
            separation: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionResult {
    /// Lexicographically ordered.
    pub minimizers: Vec<Vec<f64>>,
    pub value: f64,
    pub multiplicity: Multiplicity,
    pub iterations: usize,
    pub gap_bound: f64,
}

impl ProjectionResult {
    pub fn is_unique(&self) -> bool {
        self.multiplicity == Multiplicity::Unique
    }

    /// The first minimizer in lexicographic order.
    pub fn point(&self) -> &[f64] {
        &self.minimizers[0]
    }

    fn exact(y: &[f64]) -> Self {
        ProjectionResult {
            minimizers: vec![y.to_vec()],
            value: 0.0,
            multiplicity: Multiplicity::Unique,
            iterations: 0,
            gap_bound: 0.0,
        }
    }
}

struct Candidates {
    points: Vec<(Vec<f64>, f64)>,
    evaluations: usize,
    gap: f64,
}

impl Candidates {
    fn new() -> Self {
        Candidates {
            points: Vec::new(),
            evaluations: 0,
            gap: 0.0,
        }
    }

    /// Keep candidates within the value gap of the best, deduplicate, and
    /// merge candidates joined by a near-optimal straight path inside the
    /// set: those belong to one flat basin, not to separate minimizers.
    fn finish<F: Fn(&[f64]) -> f64>(self, opts: &ProjectionOptions, set: &ClosedSet, obj: F) -> Result<ProjectionResult> {
        let best = self
            .points
            .iter()
            .map(|p| p.1)
            .fold(f64::INFINITY, f64::min);
        if !best.is_finite() {
            return Err(Error::InvalidArgument(
                "no member of the set gives a finite distance".into(),
            ));
        }
        let cutoff = best + opts.tol_val * (1.0 + best.abs());
        let mut kept: Vec<(Vec<f64>, f64)> =
            self.points.into_iter().filter(|p| p.1 <= cutoff).collect();
        kept.sort_by(|a, b| a.1.total_cmp(&b.1));
        let mut uniq: Vec<Vec<f64>> = Vec::new();
        let connected = |a: &[f64], b: &[f64]| {
            [0.25, 0.5, 0.75].iter().all(|&t| {
                let m = crate::vector::lerp(a, b, t);
                set.contains(&m, 1e-12 * (1.0 + crate::vector::norm(&m))) && obj(&m) <= cutoff
            })
        };
        for (p, _) in kept {
            if uniq
                .iter()
                .all(|q| dist(q, &p) >= opts.dedup && !connected(q, &p))
            {
                uniq.push(p);
            }
        }
        uniq.sort_by(|a, b| lex_cmp(a, b));
        let mut multiplicity = Multiplicity::Unique;
        for i in 0..uniq.len() {
            for j in i + 1..uniq.len() {
                if dist(&uniq[i], &uniq[j]) >= opts.separation {
                    multiplicity = Multiplicity::Multiple;
                } else if multiplicity == Multiplicity::Unique {
                    multiplicity = Multiplicity::Unknown;
                }
            }
        }
        Ok(ProjectionResult {
            minimizers: uniq,
            value: best.max(0.0),
            multiplicity,
            iterations: self.evaluations,
            gap_bound: self.gap,
        })
    }
}

fn objective(f: &LegendreFunction, side: Side, c: &[f64], y: &[f64]) -> f64 {
    let v = match side {
        Side::Left => distance(f, c, y),
        Side::Right => distance(f, y, c),
    };
    v.unwrap_or(f64::INFINITY)
}

/// Derivative of `s ↦ obj(c(s))` along a piece.
fn piece_derivative(f: &LegendreFunction, side: Side, piece: &Piece, y: &[f64], gy: &[f64], s: f64) -> f64 {
    let Ok((c, v)) = piece.point_and_tangent(s) else {
        return f64::NAN;
    };
    match side {
        Side::Left => match f.grad_f(&c) {
            Ok(gc) => dot(&sub(&gc, gy), &v),
            Err(_) => f64::NAN,
        },
        Side::Right => match f.hess_f(&c) {
            Ok(h) => dot(&h.apply(&sub(&c, y)), &v),
            Err(_) => f64::NAN,
        },
    }
}

fn check_query(f: &LegendreFunction, set: &ClosedSet, side: Side, y: &[f64]) -> Result<()> {
    check_dim(f.dimension(), y.len())?;
    check_dim(f.dimension(), set.dimension())?;
    let ok = match side {
        Side::Left => f.in_domain(y),
        Side::Right => f.in_closed_domain(y),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Domain {
            function: f.name(),
            point: y.to_vec(),
        })
    }
}

/// Projected diagonal-Newton for `min_{c ∈ [lo,hi]} D(c, y)`, stopped on the
/// Frank–Wolfe gap.
fn left_box(f: &LegendreFunction, lo: &[f64], hi: &[f64], y: &[f64], gy: &[f64], out: &mut Candidates) {
    let clamp = |c: Vec<f64>| -> Vec<f64> {
        c.iter()
            .zip(lo.iter().zip(hi))
            .map(|(t, (l, h))| t.clamp(*l, *h))
            .collect()
    };
    let obj = |c: &[f64]| objective(f, Side::Left, c, y);
    let mut c = clamp(y.to_vec());
    let mut value = obj(&c);
    let mut gap = f64::INFINITY;
    for _ in 0..200 {
        let (Ok(gc), Ok(h)) = (f.grad_f(&c), f.hess_f(&c)) else {
            break;
        };
        let g = sub(&gc, gy);
        gap = g
            .iter()
            .zip(&c)
            .zip(lo.iter().zip(hi))
            .map(|((g, t), (l, h))| (g * (t - l)).max(g * (t - h)))
            .sum::<f64>()
            .max(0.0);
        if gap <= 1e-12 {
            break;
        }
        let step: Vec<f64> = g.iter().zip(h.entries()).map(|(g, h)| g / h).collect();
        let mut alpha = 1.0;
        let mut moved = false;
        while alpha > 1e-20 {
            let trial = clamp(c.iter().zip(&step).map(|(t, d)| t - alpha * d).collect());
            let v = obj(&trial);
            out.evaluations += 1;
            if v < value || (v <= value && trial != c) {
                c = trial;
                value = v;
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        if !moved {
            break;
        }
    }
    out.gap = out.gap.max(gap);
    out.points.push((c, value));
}

/// Multi-start projected descent for `min_{c ∈ [lo,hi]} D(y, c)`.
fn right_box(f: &LegendreFunction, lo: &[f64], hi: &[f64], y: &[f64], out: &mut Candidates) {
    let dim = lo.len();
    let per_axis = ((1024f64).powf(1.0 / dim as f64).floor() as usize).clamp(2, 32);
    let starts = per_axis.pow(dim as u32);
    let clamp = |c: Vec<f64>| -> Vec<f64> {
        c.iter()
            .zip(lo.iter().zip(hi))
            .map(|(t, (l, h))| t.clamp(*l, *h))
            .collect()
    };
    let obj = |c: &[f64]| objective(f, Side::Right, c, y);
    for mut idx in 0..starts {
        let mut c: Vec<f64> = (0..dim)
            .map(|j| {
                let k = idx % per_axis;
                idx /= per_axis;
                lo[j] + (hi[j] - lo[j]) * k as f64 / (per_axis - 1) as f64
            })
            .collect();
        let mut value = obj(&c);
        for _ in 0..100 {
            // Diagonal scaling by the inverse Hessian turns the gradient
            // ∇²f(c)(c − y) into c − y.
            let d = sub(&c, y);
            let mut alpha = 1.0;
            let mut moved = false;
            while alpha > 1e-16 {
                let trial = clamp(c.iter().zip(&d).map(|(t, d)| t - alpha * d).collect());
                let v = obj(&trial);
                out.evaluations += 1;
                if v < value {
                    moved = dist(&trial, &c) > 1e-15;
                    c = trial;
                    value = v;
                    break;
                }
                alpha *= 0.5;
            }
            if !moved {
                break;
            }
        }
        out.points.push((c, value));
    }
}

fn pieces_candidates(
    f: &LegendreFunction,
    set: &ClosedSet,
    side: Side,
    y: &[f64],
    opts: &ProjectionOptions,
    out: &mut Candidates,
) -> Result<()> {
    let gy = match side {
        Side::Left => f.grad_f(y)?,
        Side::Right => Vec::new(),
    };
    let pieces = set.pieces();
    let per_piece = ((1.0 / (opts.h_scan * pieces.len() as f64)).ceil() as usize).max(16);
    for piece in &pieces {
        let obj = |s: f64| match piece.point(s) {
            Ok(c) => objective(f, side, &c, y),
            Err(_) => f64::INFINITY,
        };
        let deriv = |s: f64| piece_derivative(f, side, piece, y, &gy, s);
        if side == Side::Left && piece.is_affine() {
            let s = convex_argmin(&deriv, 0.0, 1.0);
            let c = piece.point(s)?;
            let v = objective(f, side, &c, y);
            out.evaluations += 200;
            out.gap = out.gap.max(deriv(s).abs() * 1e-15);
            out.points.push((c, v));
        } else {
            for (s, v) in local_minima(&obj, &deriv, 0.0, 1.0, per_piece) {
                let c = piece.point(s)?;
                out.gap = out.gap.max(deriv(s).abs() * 1e-12);
                out.points.push((c, v));
            }
            out.evaluations += per_piece + 1;
        }
    }
    Ok(())
}

fn project(
    f: &LegendreFunction,
    set: &ClosedSet,
    side: Side,
    y: &[f64],
    opts: &ProjectionOptions,
) -> Result<ProjectionResult> {
    check_query(f, set, side, y)?;
    if set.is_exact_member(y) {
        return Ok(ProjectionResult::exact(y));
    }
    let mut out = Candidates::new();
    match set.shape() {
        Shape::FiniteCloud(points) => {
            for p in points {
                out.points.push((p.clone(), objective(f, side, p, y)));
            }
            out.evaluations = points.len();
        }
        Shape::Box { lo, hi } => match side {
            Side::Left => left_box(f, lo, hi, y, &f.grad_f(y)?, &mut out),
            Side::Right => right_box(f, lo, hi, y, &mut out),
        },
        _ => pieces_candidates(f, set, side, y, opts, &mut out)?,
    }
    out.finish(opts, set, |c| objective(f, side, c, y))
}

pub fn left_project(f: &LegendreFunction, set: &ClosedSet, y: &[f64], opts: &ProjectionOptions) -> Result<ProjectionResult> {
    project(f, set, Side::Left, y, opts)
}

pub fn right_project(f: &LegendreFunction, set: &ClosedSet, y: &[f64], opts: &ProjectionOptions) -> Result<ProjectionResult> {
    project(f, set, Side::Right, y, opts)
}

pub fn left_distance(f: &LegendreFunction, set: &ClosedSet, y: &[f64]) -> Result<f64> {
    Ok(left_project(f, set, y, &ProjectionOptions::default())?.value)
}

pub fn right_distance(f: &LegendreFunction, set: &ClosedSet, y: &[f64]) -> Result<f64> {
    Ok(right_project(f, set, y, &ProjectionOptions::default())?.value)
}

/// `P→^f_C(y) = ∇f*(P̄^{f*}_{∇f(C)}(∇f(y)))` for `f` with full domain.
pub fn right_via_duality(f: &LegendreFunction, set: &ClosedSet, y: &[f64], opts: &ProjectionOptions) -> Result<ProjectionResult> {
    if !f.has_full_domain() {
        return Err(Error::InvalidArgument(format!(
            "{f} does not have full domain; the dual route needs dom f = R^J"
        )));
    }
    check_query(f, set, Side::Right, y)?;
    let dual = f.conjugate();
    let image = set.image_under_gradient(f)?;
    let ystar = f.grad_f(y)?;
    let res = left_project(&dual, &image, &ystar, opts)?;
    let mut minimizers = res
        .minimizers
        .iter()
        .map(|s| f.grad_conj(s))
        .collect::<Result<Vec<_>>>()?;
    minimizers.sort_by(|a, b| lex_cmp(a, b));
    Ok(ProjectionResult { minimizers, ..res })
}

/// Agreement between the direct and dual right projections.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualityAgreement {
    pub value_gap: f64,
    pub hausdorff: f64,
}

pub fn duality_agreement(f: &LegendreFunction, set: &ClosedSet, y: &[f64], opts: &ProjectionOptions) -> Result<DualityAgreement> {
    let direct = right_project(f, set, y, opts)?;
    let dual = right_via_duality(f, set, y, opts)?;
    Ok(DualityAgreement {
        value_gap: (direct.value - dual.value).abs(),
        hausdorff: hausdorff(&direct.minimizers, &dual.minimizers),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NearestCheck {
    /// `max ⟨∇f(y)−∇f(x), c−x⟩ − D(c, x)` over probes and claimed minimizers.
    pub violation: f64,
    /// `max ⟨∇f(y)−∇f(x), c−x⟩`, only for convex sets.
    pub variational: Option<f64>,
}

/// Probes: the extreme points plus `samples` reference points of the set.
fn probes(set: &ClosedSet, samples: usize) -> Vec<Vec<f64>> {
    let mut out = set.extreme_points();
    out.extend(set.reference_points(samples));
    out
}

pub fn verify_nearest_characterization(
    f: &LegendreFunction,
    set: &ClosedSet,
    y: &[f64],
    result: &ProjectionResult,
    samples: usize,
) -> Result<NearestCheck> {
    let gy = f.grad_f(y)?;
    let cs = probes(set, samples);
    let convex = set.convexity() == Convexity::Convex;
    let mut violation = f64::NEG_INFINITY;
    let mut variational = f64::NEG_INFINITY;
    for x in &result.minimizers {
        let g = sub(&gy, &f.grad_f(x)?);
        for c in &cs {
            let lin = dot(&g, &sub(c, x));
            violation = violation.max(lin - distance(f, c, x)?);
            variational = variational.max(lin);
        }
    }
    Ok(NearestCheck {
        violation,
        variational: convex.then_some(variational),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvarianceCheck {
    pub z: Vec<f64>,
    pub result: ProjectionResult,
    /// Hausdorff distance between the projection of `z_λ` and `{x}`.
    pub deviation: f64,
    pub holds: bool,
}

/// Projects `z_λ = ∇f*(λ∇f(y) + (1−λ)∇f(x))`; it should project back to `x` alone.
pub fn geodesic_projection_invariance(
    f: &LegendreFunction,
    set: &ClosedSet,
    y: &[f64],
    x: &[f64],
    lambda: f64,
    opts: &ProjectionOptions,
) -> Result<InvarianceCheck> {
    if !(lambda >= 0.0) || (lambda >= 1.0 && set.convexity() != Convexity::Convex) {
        return Err(Error::InvalidArgument(format!(
            "lambda {lambda} must lie in [0, 1) unless the set is convex"
        )));
    }
    let z = geodesic_point(f, &GeodesicParams::new(x.to_vec(), y.to_vec(), lambda))?;
    let result = left_project(f, set, &z, opts)?;
    let deviation = hausdorff(&result.minimizers, &[x.to_vec()]);
    Ok(InvarianceCheck {
        holds: result.is_unique() && deviation <= 1e-6,
        z,
        result,
        deviation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonotonicityReport {
    /// Most negative `⟨P̄(y)−P̄(x), ∇f(y)−∇f(x)⟩`, 0 when nothing was evaluated.
    pub worst: f64,
    pub evaluated: usize,
    pub skipped: usize,
}

pub fn monotonicity_scan(
    f: &LegendreFunction,
    set: &ClosedSet,
    pairs: &[(Vec<f64>, Vec<f64>)],
    opts: &ProjectionOptions,
) -> Result<MonotonicityReport> {
    let mut report = MonotonicityReport {
        worst: 0.0,
        evaluated: 0,
        skipped: 0,
    };
    for (x, y) in pairs {
        let px = left_project(f, set, x, opts)?;
        let py = left_project(f, set, y, opts)?;
        if !px.is_unique() || !py.is_unique() {
            report.skipped += 1;
            continue;
        }
        let v = dot(&sub(py.point(), px.point()), &sub(&f.grad_f(y)?, &f.grad_f(x)?));
        report.worst = report.worst.min(v);
        report.evaluated += 1;
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProximalNormal {
    /// Smallest `σ ≥ 0` with `σ‖c−x‖² ≥ ⟨∇f(y)−∇f(x), c−x⟩` on the probes.
    pub sigma_min: f64,
    /// Half the largest Hessian entry over the probe hull.
    pub sigma_hessian: f64,
    /// `max ⟨∇f(y)−∇f(x), c−x⟩ − σ_hessian ‖c−x‖²`, clipped at 0.
    pub violation: f64,
    pub probes: usize,
}

pub fn proximal_normal_check(
    f: &LegendreFunction,
    set: &ClosedSet,
    y: &[f64],
    x: &[f64],
    radius: f64,
    samples: usize,
) -> Result<ProximalNormal> {
    let g = sub(&f.grad_f(y)?, &f.grad_f(x)?);
    let mut rng = ChaCha8Rng::seed_from_u64(0x9e37);
    let mut cs = probes(set, samples);
    cs.extend((0..samples).map(|_| set.sample_member(&mut rng)));
    let near: Vec<Vec<f64>> = cs
        .into_iter()
        .filter(|c| {
            let r = dist(c, x);
            r > 0.0 && r <= radius
        })
        .collect();
    let mut lo = x.to_vec();
    let mut hi = x.to_vec();
    for c in &near {
        for j in 0..c.len() {
            lo[j] = lo[j].min(c[j]);
            hi[j] = hi[j].max(c[j]);
        }
    }
    let sigma_hessian = 0.5 * f.hessian_bound(&lo, &hi)?;
    let mut sigma_min: f64 = 0.0;
    let mut violation: f64 = 0.0;
    for c in &near {
        let d = sub(c, x);
        let r2 = dot(&d, &d);
        let lin = dot(&g, &d);
        sigma_min = sigma_min.max(lin / r2);
        violation = violation.max(lin - sigma_hessian * r2);
    }
    Ok(ProximalNormal {
        sigma_min,
        sigma_hessian,
        violation,
        probes: near.len(),
    })
}

/// Brute-force oracle: the best of `n + 1` equispaced points on every piece.
pub fn brute_force_pieces(f: &LegendreFunction, set: &ClosedSet, side: Side, y: &[f64], n: usize) -> f64 {
    let mut best = f64::INFINITY;
    for piece in set.pieces() {
        for i in 0..=n {
            if let Ok(c) = piece.point(i as f64 / n as f64) {
                best = best.min(objective(f, side, &c, y));
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn opts() -> ProjectionOptions {
        ProjectionOptions::default()
    }

    #[test]
    fn left_distance_examples() {
        let energy = LegendreFunction::energy(2).unwrap();
        let c = ClosedSet::cloud(vec![vec![0.0, 0.0], vec![2.0, 0.0]], &energy).unwrap();
        assert!((left_distance(&energy, &c, &[1.0, 1.0]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(left_distance(&energy, &c, &[2.0, 0.0]).unwrap(), 0.0);

        let shannon = LegendreFunction::shannon(2).unwrap();
        let c = ClosedSet::cloud(vec![vec![1.0, 1.0]], &shannon).unwrap();
        let v = left_distance(&shannon, &c, &[E, E]).unwrap();
        assert!((v - 2.0 * (E - 2.0)).abs() < 1e-14);
    }

    #[test]
    fn left_project_multiplicity() {
        let energy = LegendreFunction::energy(1).unwrap();
        let c = ClosedSet::cloud(vec![vec![1.0], vec![-1.0]], &energy).unwrap();
        let r = left_project(&energy, &c, &[0.0], &opts()).unwrap();
        assert_eq!(r.minimizers, vec![vec![-1.0], vec![1.0]]);
        assert_eq!(r.multiplicity, Multiplicity::Multiple);
        assert!((r.value - 0.5).abs() < 1e-15);

        let single = ClosedSet::cloud(vec![vec![3.0]], &energy).unwrap();
        let r = left_project(&energy, &single, &[-7.0], &opts()).unwrap();
        assert_eq!(r.minimizers, vec![vec![3.0]]);
        assert!(r.is_unique());

        let shannon = LegendreFunction::shannon(2).unwrap();
        let seg = ClosedSet::segment(vec![0.1, 0.2], vec![1.0, 2.0], &shannon).unwrap();
        let r = left_project(&shannon, &seg, &[0.5, 0.5], &opts()).unwrap();
        assert!(r.is_unique());
    }

    #[test]
    fn segment_left_matches_brute_force() {
        let shannon = LegendreFunction::shannon(2).unwrap();
        let seg = ClosedSet::segment(vec![0.1, 0.2], vec![1.0, 2.0], &shannon).unwrap();
        for y in [[0.5, 0.5], [2.0, 0.1], [0.05, 3.0]] {
            let r = left_project(&shannon, &seg, &y, &opts()).unwrap();
            let oracle = brute_force_pieces(&shannon, &seg, Side::Left, &y, 1_000_000);
            assert!(r.value <= oracle + 1e-12);
            assert!(oracle - r.value <= 1e-8, "{} vs {}", r.value, oracle);
        }
    }

    #[test]
    fn box_left_projection_is_coordinatewise_clamp_for_energy() {
        let energy = LegendreFunction::energy(2).unwrap();
        let b = ClosedSet::boxed(vec![0.0, 0.0], vec![1.0, 1.0], &energy).unwrap();
        let r = left_project(&energy, &b, &[2.0, 0.5], &opts()).unwrap();
        assert!(dist(r.point(), &[1.0, 0.5]) < 1e-12);
        assert!((r.value - 0.5).abs() < 1e-12);
        assert!(r.gap_bound <= 1e-12);

        let shannon = LegendreFunction::shannon(2).unwrap();
        let b = ClosedSet::boxed(vec![1.0, 1.0], vec![2.0, 2.0], &shannon).unwrap();
        let r = left_project(&shannon, &b, &[0.5, 1.5], &opts()).unwrap();
        assert!(dist(r.point(), &[1.0, 1.5]) < 1e-10);
    }

    #[test]
    fn right_box_projection() {
        let exp = LegendreFunction::exponential(2).unwrap();
        let b = ClosedSet::boxed(vec![0.0, 0.0], vec![1.0, 1.0], &exp).unwrap();
        let r = right_project(&exp, &b, &[-1.0, 0.5], &opts()).unwrap();
        assert!(dist(r.point(), &[0.0, 0.5]) < 1e-9);
        assert!(r.is_unique());
    }

    #[test]
    fn energy_right_equals_left() {
        let energy = LegendreFunction::energy(2).unwrap();
        let poly = ClosedSet::polyline(vec![vec![0.0, 0.0], vec![1.0, 2.0], vec![3.0, 0.0]], &energy).unwrap();
        for y in [[0.4, 1.9], [5.0, 5.0], [-1.0, 0.2]] {
            let l = left_project(&energy, &poly, &y, &opts()).unwrap();
            let r = right_project(&energy, &poly, &y, &opts()).unwrap();
            assert!((l.value - r.value).abs() < 1e-12);
            assert!(hausdorff(&l.minimizers, &r.minimizers) < 1e-6);
        }
    }

    #[test]
    fn exact_members_short_circuit() {
        let exp = LegendreFunction::exponential(2).unwrap();
        let seg = ClosedSet::segment(vec![0.0, 0.0], vec![1.0, 2.0], &exp).unwrap();
        let r = right_project(&exp, &seg, &[0.5, 1.0], &opts()).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.minimizers, vec![vec![0.5, 1.0]]);
        let d = right_via_duality(&exp, &seg, &[0.5, 1.0], &opts()).unwrap();
        assert!(d.value < 1e-12);
        assert!(dist(d.point(), &[0.5, 1.0]) < 1e-6);
    }

    #[test]
    fn domain_errors() {
        let shannon = LegendreFunction::shannon(1).unwrap();
        let c = ClosedSet::cloud(vec![vec![1.0]], &shannon).unwrap();
        assert!(matches!(
            left_project(&shannon, &c, &[0.0], &opts()),
            Err(Error::Domain { .. })
        ));
        // The right slot accepts the closed domain.
        let r = right_project(&shannon, &c, &[0.0], &opts()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-15);
        assert!(right_project(&shannon, &c, &[-1.0], &opts()).is_err());
        assert!(right_via_duality(&shannon, &c, &[0.5], &opts()).is_err());
    }

    #[test]
    fn duality_matches_direct_right_projection() {
        let exp = LegendreFunction::exponential(2).unwrap();
        let seg = ClosedSet::segment(vec![0.0, 0.0], vec![1.0, 2.0], &exp).unwrap();
        let a = duality_agreement(&exp, &seg, &[0.2, 0.3], &opts()).unwrap();
        assert!(a.value_gap <= 1e-6 && a.hausdorff <= 1e-5, "{a:?}");

        let energy = LegendreFunction::energy(2).unwrap();
        let seg = ClosedSet::segment(vec![0.0, 0.0], vec![1.0, 2.0], &energy).unwrap();
        let direct = right_project(&energy, &seg, &[2.0, -1.0], &opts()).unwrap();
        let dual = right_via_duality(&energy, &seg, &[2.0, -1.0], &opts()).unwrap();
        assert!((direct.value - dual.value).abs() < 1e-12);
        assert!(hausdorff(&direct.minimizers, &dual.minimizers) < 1e-9);
    }

    #[test]
    fn nearest_characterization() {
        let energy = LegendreFunction::energy(2).unwrap();
        let c = ClosedSet::cloud(vec![vec![0.0, 0.0], vec![2.0, 0.0]], &energy).unwrap();
        let y = [1.0, 1.0];
        let r = left_project(&energy, &c, &y, &opts()).unwrap();
        assert_eq!(r.minimizers.len(), 2);
        assert!(verify_nearest_characterization(&energy, &c, &y, &r, 0).unwrap().violation <= 1e-12);

        let single = ClosedSet::cloud(vec![vec![0.3, 0.2]], &energy).unwrap();
        let r = left_project(&energy, &single, &y, &opts()).unwrap();
        assert!(verify_nearest_characterization(&energy, &single, &y, &r, 0).unwrap().violation <= 0.0);

        // A second-best point violates by exactly the value gap.
        let shannon = LegendreFunction::shannon(2).unwrap();
        let pts = vec![vec![1.0, 1.0], vec![2.0, 0.5], vec![0.3, 3.0]];
        let c = ClosedSet::cloud(pts.clone(), &shannon).unwrap();
        let y = [1.2, 1.1];
        let mut vals: Vec<(f64, Vec<f64>)> =
            pts.iter().map(|p| (distance(&shannon, p, &y).unwrap(), p.clone())).collect();
        vals.sort_by(|a, b| a.0.total_cmp(&b.0));
        let fake = ProjectionResult {
            minimizers: vec![vals[1].1.clone()],
            ..left_project(&shannon, &c, &y, &opts()).unwrap()
        };
        let v = verify_nearest_characterization(&shannon, &c, &y, &fake, 0).unwrap();
        assert!((v.violation - (vals[1].0 - vals[0].0)).abs() < 1e-12);
    }

    #[test]
    fn variational_inequality_on_convex_sets() {
        let shannon = LegendreFunction::shannon(2).unwrap();
        let seg = ClosedSet::segment(vec![0.1, 0.2], vec![1.0, 2.0], &shannon).unwrap();
        let y = [2.0, 0.3];
        let r = left_project(&shannon, &seg, &y, &opts()).unwrap();
        let v = verify_nearest_characterization(&shannon, &seg, &y, &r, 2000).unwrap();
        assert!(v.violation <= 1e-10);
        assert!(v.variational.unwrap() <= 1e-10);
    }

    #[test]
    fn geodesic_invariance_examples() {
        let energy = LegendreFunction::energy(1).unwrap();
        let c = ClosedSet::cloud(vec![vec![-1.0], vec![1.0]], &energy).unwrap();
        let check = geodesic_projection_invariance(&energy, &c, &[0.0], &[1.0], 0.5, &opts()).unwrap();
        assert_eq!(check.z, vec![0.5]);
        assert!(check.holds);
        let at_zero = geodesic_projection_invariance(&energy, &c, &[0.0], &[1.0], 0.0, &opts()).unwrap();
        assert_eq!(at_zero.result.minimizers, vec![vec![1.0]]);
        assert!(geodesic_projection_invariance(&energy, &c, &[0.0], &[1.0], 1.5, &opts()).is_err());

        let seg = ClosedSet::segment(vec![0.0], vec![1.0], &energy).unwrap();
        let check = geodesic_projection_invariance(&energy, &seg, &[3.0], &[1.0], 4.0, &opts()).unwrap();
        assert!(check.holds);
    }

    #[test]
    fn monotonicity_examples() {
        let energy = LegendreFunction::energy(1).unwrap();
        let c = ClosedSet::cloud(vec![vec![-1.0], vec![1.0]], &energy).unwrap();
        let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..50)
            .map(|k| (vec![-2.0 + 0.08 * k as f64], vec![1.7 - 0.07 * k as f64]))
            .collect();
        let r = monotonicity_scan(&energy, &c, &pairs, &opts()).unwrap();
        assert!(r.worst >= -1e-10);
        assert!(r.evaluated > 0);
        let both = [(vec![0.0], vec![1.0])];
        assert_eq!(monotonicity_scan(&energy, &c, &both, &opts()).unwrap().skipped, 1);
    }

    #[test]
    fn proximal_normal_on_circle() {
        let energy = LegendreFunction::energy(2).unwrap();
        let circle: Vec<Vec<f64>> = (0..720)
            .map(|k| {
                let t = k as f64 * std::f64::consts::PI / 360.0;
                vec![t.cos(), t.sin()]
            })
            .collect();
        let c = ClosedSet::cloud(circle, &energy).unwrap();
        let r = proximal_normal_check(&energy, &c, &[2.0, 0.0], &[1.0, 0.0], 0.5, 0).unwrap();
        assert!(r.sigma_min <= 0.5);
        assert_eq!(r.sigma_hessian, 0.5);
        assert_eq!(r.violation, 0.0);
        assert!(r.probes > 0);
    }
}
