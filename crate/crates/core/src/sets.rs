//! Nonempty closed subsets `C ⊂ U` in the forms the projection solvers use.
//!
//! Every set is a finite union of points, boxes and 1-D pieces. A 1-D piece
//! is a straight segment `[a, b]`, optionally pushed forward through a chain
//! of gradient maps `∇g_k ∘ … ∘ ∇g_1`; that is how `∇f(C)` of a segment or
//! polyline is represented exactly rather than by its samples.

use rand::Rng;

use crate::error::{check_dim, Error, Result};
use crate::legendre::LegendreFunction;
use crate::search::golden_section;
use crate::vector::{dist, dist_inf, lerp, norm, sub};

/// Margin kept between members of a set and the boundary of the domain.
pub const DOMAIN_MARGIN: f64 = 1e-9;

/// Samples per piece when a curve is generated from a parametrization.
pub const CURVE_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convexity {
    Convex,
    Nonconvex,
    Unknown,
}

/// A chain of knots `v_0, …, v_n` with parameters `τ_0 < … < τ_n`, mapped
/// through `maps` in order. With no maps this is the polyline through the knots.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    knots: Vec<Vec<f64>>,
    params: Vec<f64>,
    maps: Vec<LegendreFunction>,
    samples: Vec<(f64, Vec<f64>)>,
    resolution: f64,
}

impl Curve {
    /// A curve given only by dense samples `(t, x)`; consecutive samples
    /// are joined by straight pieces. `resolution` bounds their spacing.
    pub fn from_samples(mut samples: Vec<(f64, Vec<f64>)>, resolution: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidSet("curve needs at least one sample".into()));
        }
        if !(resolution > 0.0) {
            return Err(Error::InvalidSet("curve resolution must be positive".into()));
        }
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in samples.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidSet(format!("duplicate curve parameter {}", w[0].0)));
            }
            let gap = dist(&w[0].1, &w[1].1);
            if gap > resolution {
                return Err(Error::InvalidSet(format!(
                    "curve sample spacing {gap} exceeds declared resolution {resolution}"
                )));
            }
        }
        Ok(Curve {
            knots: samples.iter().map(|s| s.1.clone()).collect(),
            params: samples.iter().map(|s| s.0).collect(),
            maps: Vec::new(),
            samples,
            resolution,
        })
    }

    fn mapped(knots: Vec<Vec<f64>>, params: Vec<f64>, maps: Vec<LegendreFunction>) -> Result<Self> {
        let mut curve = Curve {
            knots,
            params,
            maps,
            samples: Vec::new(),
            resolution: 0.0,
        };
        curve.resample()?;
        Ok(curve)
    }

    fn resample(&mut self) -> Result<()> {
        let mut samples = Vec::new();
        if self.knots.len() == 1 {
            samples.push((self.params[0], self.map_point(&self.knots[0])?));
        }
        for k in 0..self.knots.len().saturating_sub(1) {
            let piece = self.piece(k);
            let start = if k == 0 { 0 } else { 1 };
            for i in start..=CURVE_SAMPLES {
                let s = i as f64 / CURVE_SAMPLES as f64;
                samples.push((piece.param(s), piece.point(s)?));
            }
        }
        self.resolution = samples
            .windows(2)
            .map(|w| dist(&w[0].1, &w[1].1))
            .fold(0.0, f64::max);
        self.samples = samples;
        Ok(())
    }

    fn map_point(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut p = x.to_vec();
        for g in &self.maps {
            p = g.grad_f(&p)?;
        }
        Ok(p)
    }

    pub fn samples(&self) -> &[(f64, Vec<f64>)] {
        &self.samples
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn is_mapped(&self) -> bool {
        !self.maps.is_empty()
    }

    pub fn pieces(&self) -> Vec<Piece<'_>> {
        (0..self.knots.len().saturating_sub(1)).map(|k| self.piece(k)).collect()
    }

    fn piece(&self, k: usize) -> Piece<'_> {
        Piece {
            a: &self.knots[k],
            b: &self.knots[k + 1],
            maps: &self.maps,
            t0: self.params[k],
            t1: self.params[k + 1],
        }
    }

    fn dimension(&self) -> usize {
        self.samples[0].1.len()
    }
}

/// One 1-D piece `s ↦ maps(a + s (b − a))`, `s ∈ [0, 1]`.
#[derive(Debug, Clone, Copy)]
pub struct Piece<'a> {
    pub a: &'a [f64],
    pub b: &'a [f64],
    pub maps: &'a [LegendreFunction],
    t0: f64,
    t1: f64,
}

impl<'a> Piece<'a> {
    pub fn segment(a: &'a [f64], b: &'a [f64]) -> Self {
        Piece {
            a,
            b,
            maps: &[],
            t0: 0.0,
            t1: 1.0,
        }
    }

    pub fn is_affine(&self) -> bool {
        self.maps.is_empty()
    }

    /// Curve parameter for the local coordinate `s`.
    pub fn param(&self, s: f64) -> f64 {
        self.t0 + s * (self.t1 - self.t0)
    }

    pub fn point(&self, s: f64) -> Result<Vec<f64>> {
        let mut p = lerp(self.a, self.b, s);
        for g in self.maps {
            p = g.grad_f(&p)?;
        }
        Ok(p)
    }

    /// Point and derivative with respect to `s` (chain rule through the maps).
    pub fn point_and_tangent(&self, s: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut p = lerp(self.a, self.b, s);
        let mut v = sub(self.b, self.a);
        for g in self.maps {
            v = g.hess_f(&p)?.apply(&v);
            p = g.grad_f(&p)?;
        }
        Ok((p, v))
    }
}

/// The geometric form of a closed set.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    FiniteCloud(Vec<Vec<f64>>),
    Segment { a: Vec<f64>, b: Vec<f64> },
    Polyline(Vec<Vec<f64>>),
    Box { lo: Vec<f64>, hi: Vec<f64> },
    ParamCurve(Curve),
}

/// A validated nonempty closed subset of `U`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedSet {
    shape: Shape,
    convexity: Convexity,
}

fn collinear(points: &[Vec<f64>]) -> bool {
    let Some(first) = points.first() else {
        return true;
    };
    let far = points
        .iter()
        .max_by(|p, q| dist(first, p).total_cmp(&dist(first, q)))
        .unwrap();
    let d = sub(far, first);
    let len = norm(&d);
    if len == 0.0 {
        return true;
    }
    let scale = points.iter().map(|p| norm(p)).fold(1.0, f64::max);
    points.iter().all(|p| {
        let r = sub(p, first);
        let t = crate::vector::dot(&r, &d) / (len * len);
        dist(&r, &crate::vector::scale(&d, t)) <= 1e-12 * scale
    })
}

fn distinct_count(points: &[Vec<f64>]) -> usize {
    let mut uniq: Vec<&Vec<f64>> = Vec::new();
    for p in points {
        if !uniq.iter().any(|q| *q == p) {
            uniq.push(p);
        }
    }
    uniq.len()
}

impl ClosedSet {
    /// Validate `shape` against `f`: nonempty, consistent dimension, every
    /// member at least [`DOMAIN_MARGIN`] inside `U`.
    pub fn new(shape: Shape, f: &LegendreFunction) -> Result<Self> {
        let set = ClosedSet {
            convexity: Self::infer_convexity(&shape),
            shape,
        };
        set.validate(f)?;
        Ok(set)
    }

    pub fn cloud(points: Vec<Vec<f64>>, f: &LegendreFunction) -> Result<Self> {
        Self::new(Shape::FiniteCloud(points), f)
    }

    pub fn segment(a: Vec<f64>, b: Vec<f64>, f: &LegendreFunction) -> Result<Self> {
        Self::new(Shape::Segment { a, b }, f)
    }

    pub fn polyline(vertices: Vec<Vec<f64>>, f: &LegendreFunction) -> Result<Self> {
        Self::new(Shape::Polyline(vertices), f)
    }

    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>, f: &LegendreFunction) -> Result<Self> {
        Self::new(Shape::Box { lo, hi }, f)
    }

    pub fn curve(curve: Curve, f: &LegendreFunction) -> Result<Self> {
        Self::new(Shape::ParamCurve(curve), f)
    }

    fn infer_convexity(shape: &Shape) -> Convexity {
        match shape {
            Shape::FiniteCloud(points) => {
                if distinct_count(points) <= 1 {
                    Convexity::Convex
                } else {
                    Convexity::Nonconvex
                }
            }
            Shape::Segment { .. } | Shape::Box { .. } => Convexity::Convex,
            Shape::Polyline(v) => {
                if collinear(v) {
                    Convexity::Convex
                } else {
                    Convexity::Nonconvex
                }
            }
            Shape::ParamCurve(c) if !c.is_mapped() => {
                if collinear(&c.knots) {
                    Convexity::Convex
                } else {
                    Convexity::Nonconvex
                }
            }
            Shape::ParamCurve(_) => Convexity::Unknown,
        }
    }

    fn validate(&self, f: &LegendreFunction) -> Result<()> {
        let dim = f.dimension();
        let domain = f.domain();
        let check = |p: &[f64]| -> Result<()> {
            check_dim(dim, p.len())?;
            if !domain.contains_with_margin(p, DOMAIN_MARGIN) {
                return Err(Error::InvalidSet(format!(
                    "member {p:?} is not strictly inside the domain of {f}"
                )));
            }
            Ok(())
        };
        match &self.shape {
            Shape::FiniteCloud(points) | Shape::Polyline(points) => {
                if points.is_empty() {
                    return Err(Error::InvalidSet("set must be nonempty".into()));
                }
                points.iter().try_for_each(|p| check(p))
            }
            Shape::Segment { a, b } => {
                check(a)?;
                check(b)
            }
            Shape::Box { lo, hi } => {
                check(lo)?;
                check(hi)?;
                if lo.iter().zip(hi).any(|(l, h)| l > h) {
                    return Err(Error::InvalidSet("box requires lo <= hi".into()));
                }
                Ok(())
            }
            Shape::ParamCurve(c) => c.samples.iter().try_for_each(|(_, p)| check(p)),
        }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn convexity(&self) -> Convexity {
        self.convexity
    }

    /// Record an empirically established convexity verdict.
    pub fn set_convexity(&mut self, convexity: Convexity) {
        self.convexity = convexity;
    }

    pub fn dimension(&self) -> usize {
        match &self.shape {
            Shape::FiniteCloud(p) | Shape::Polyline(p) => p[0].len(),
            Shape::Segment { a, .. } => a.len(),
            Shape::Box { lo, .. } => lo.len(),
            Shape::ParamCurve(c) => c.dimension(),
        }
    }

    /// 1-D pieces of the set; empty for clouds and boxes.
    pub fn pieces(&self) -> Vec<Piece<'_>> {
        match &self.shape {
            Shape::Segment { a, b } => vec![Piece::segment(a, b)],
            Shape::Polyline(v) if v.len() == 1 => vec![Piece::segment(&v[0], &v[0])],
            Shape::Polyline(v) => v.windows(2).map(|w| Piece::segment(&w[0], &w[1])).collect(),
            Shape::ParamCurve(c) => c.pieces(),
            Shape::FiniteCloud(_) | Shape::Box { .. } => Vec::new(),
        }
    }

    /// `dist_∞(x, C)`: exact for clouds and boxes, a 1-D convex search on
    /// straight pieces, nearest sample plus local search on mapped curves.
    pub fn dist_inf(&self, x: &[f64]) -> f64 {
        match &self.shape {
            Shape::FiniteCloud(points) => points
                .iter()
                .map(|p| dist_inf(p, x))
                .fold(f64::INFINITY, f64::min),
            Shape::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .zip(x)
                .map(|((l, h), t)| (l - t).max(t - h).max(0.0))
                .fold(0.0, f64::max),
            Shape::ParamCurve(c) if c.is_mapped() => {
                let (best_i, best) = c
                    .samples
                    .iter()
                    .enumerate()
                    .map(|(i, (_, p))| (i, dist_inf(p, x)))
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .unwrap();
                let mut best = best;
                let per_piece = CURVE_SAMPLES;
                let pieces = c.pieces();
                if pieces.is_empty() {
                    return best;
                }
                for piece_idx in [best_i.saturating_sub(1) / per_piece, best_i / per_piece] {
                    let piece_idx = piece_idx.min(pieces.len() - 1);
                    let piece = pieces[piece_idx];
                    let local = ((best_i - piece_idx * per_piece) as f64 / per_piece as f64).min(1.0);
                    let h = 1.0 / per_piece as f64;
                    let lo = (local - h).max(0.0);
                    let hi = (local + h).min(1.0);
                    let obj = |s: f64| piece.point(s).map(|p| dist_inf(&p, x)).unwrap_or(f64::INFINITY);
                    let (_, v, _) = golden_section(obj, lo, hi, 1e-14, 200);
                    best = best.min(v);
                }
                best
            }
            _ => self
                .pieces()
                .iter()
                .map(|piece| {
                    let obj = |s: f64| dist_inf(&lerp(piece.a, piece.b, s), x);
                    let (_, v, _) = golden_section(obj, 0.0, 1.0, 1e-15, 300);
                    v.min(obj(0.0)).min(obj(1.0))
                })
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// `dist_∞(x, C) ≤ tol`.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dimension() && self.dist_inf(x) <= tol
    }

    /// Whether `x` is bitwise a member (used to short-circuit projections).
    pub fn is_exact_member(&self, x: &[f64]) -> bool {
        match &self.shape {
            Shape::FiniteCloud(points) => points.iter().any(|p| p.as_slice() == x),
            Shape::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .zip(x)
                .all(|((l, h), t)| l <= t && t <= h),
            Shape::ParamCurve(c) if c.is_mapped() => c.samples.iter().any(|(_, p)| p.as_slice() == x),
            _ => self.pieces().iter().any(|piece| {
                let d = sub(piece.b, piece.a);
                let dd = crate::vector::dot(&d, &d);
                if dd == 0.0 {
                    return piece.a == x;
                }
                let t = crate::vector::dot(&sub(x, piece.a), &d) / dd;
                (0.0..=1.0).contains(&t) && lerp(piece.a, piece.b, t).as_slice() == x
            }),
        }
    }

    /// `∇f(C)`, validated against `f*`. Clouds map pointwise, boxes map to
    /// boxes (every catalog gradient is separable and increasing), 1-D sets
    /// become mapped curves.
    pub fn image_under_gradient(&self, f: &LegendreFunction) -> Result<ClosedSet> {
        check_dim(f.dimension(), self.dimension())?;
        let shape = match &self.shape {
            Shape::FiniteCloud(points) => Shape::FiniteCloud(
                points.iter().map(|p| f.grad_f(p)).collect::<Result<_>>()?,
            ),
            Shape::Box { lo, hi } => Shape::Box {
                lo: f.grad_f(lo)?,
                hi: f.grad_f(hi)?,
            },
            Shape::Segment { a, b } => Shape::ParamCurve(Curve::mapped(
                vec![a.clone(), b.clone()],
                vec![0.0, 1.0],
                vec![f.clone()],
            )?),
            Shape::Polyline(v) => Shape::ParamCurve(Curve::mapped(
                v.clone(),
                (0..v.len()).map(|k| k as f64).collect(),
                vec![f.clone()],
            )?),
            Shape::ParamCurve(c) => {
                let mut maps = c.maps.clone();
                if maps.last() == Some(&f.conjugate()) {
                    maps.pop();
                } else {
                    maps.push(f.clone());
                }
                if maps.is_empty() {
                    if c.knots.len() == c.samples.len() {
                        Shape::ParamCurve(Curve::from_samples(
                            c.params.iter().cloned().zip(c.knots.iter().cloned()).collect(),
                            c.resolution.max(f64::MIN_POSITIVE),
                        )?)
                    } else {
                        Shape::Polyline(c.knots.clone())
                    }
                } else {
                    Shape::ParamCurve(Curve::mapped(c.knots.clone(), c.params.clone(), maps)?)
                }
            }
        };
        ClosedSet::new(shape, &f.conjugate())
    }

    /// Deterministic dense members: all cloud points, `n + 1` points per
    /// straight piece, curve samples, or a grid (at most ~`n` points) on a box.
    pub fn reference_points(&self, n: usize) -> Vec<Vec<f64>> {
        match &self.shape {
            Shape::FiniteCloud(points) => points.clone(),
            Shape::ParamCurve(c) if c.is_mapped() => c.samples.iter().map(|s| s.1.clone()).collect(),
            Shape::Box { lo, hi } => {
                let dim = lo.len();
                let per_axis = ((n as f64).powf(1.0 / dim as f64).floor() as usize).max(2);
                let total = per_axis.pow(dim as u32);
                (0..total)
                    .map(|mut idx| {
                        (0..dim)
                            .map(|j| {
                                let k = idx % per_axis;
                                idx /= per_axis;
                                lo[j] + (hi[j] - lo[j]) * k as f64 / (per_axis - 1) as f64
                            })
                            .collect()
                    })
                    .collect()
            }
            _ => {
                let mut out = Vec::new();
                for piece in self.pieces() {
                    for i in 0..=n {
                        out.push(lerp(piece.a, piece.b, i as f64 / n as f64));
                    }
                }
                out
            }
        }
    }

    /// Extreme members used as deterministic probes: endpoints of 1-D sets,
    /// cloud points, box corners.
    pub fn extreme_points(&self) -> Vec<Vec<f64>> {
        match &self.shape {
            Shape::FiniteCloud(points) => points.clone(),
            Shape::Segment { a, b } => vec![a.clone(), b.clone()],
            Shape::Polyline(v) => v.clone(),
            Shape::Box { lo, hi } => {
                let dim = lo.len().min(10);
                (0..(1usize << dim))
                    .map(|mask| {
                        (0..lo.len())
                            .map(|j| if j < dim && mask >> j & 1 == 1 { hi[j] } else { lo[j] })
                            .collect()
                    })
                    .collect()
            }
            Shape::ParamCurve(c) => {
                vec![c.samples[0].1.clone(), c.samples[c.samples.len() - 1].1.clone()]
            }
        }
    }

    /// A random member.
    pub fn sample_member<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match &self.shape {
            Shape::FiniteCloud(points) => points[rng.gen_range(0..points.len())].clone(),
            Shape::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(l, h)| if l == h { *l } else { rng.gen_range(*l..=*h) })
                .collect(),
            _ => {
                let pieces = self.pieces();
                let piece = pieces[rng.gen_range(0..pieces.len())];
                let s = rng.gen_range(0.0..=1.0);
                piece
                    .point(s)
                    .unwrap_or_else(|_| lerp(piece.a, piece.b, s))
            }
        }
    }
}
