//! Empirical Chebyshev scans, convexity probes and the exponential-segment
//! counterexample for the right projection.
//!
//! A scan can only refute the Chebyshev property, so the positive verdict is
//! named [`Verdict::ChebyshevOnGrid`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::legendre::LegendreFunction;
use crate::projection::{
    left_project, right_project, right_via_duality, Multiplicity, ProjectionOptions, ProjectionResult, Side,
};
use crate::sets::ClosedSet;
use crate::vector::{dist, hausdorff, lerp};

/// Grid points are kept this far inside the domain.
pub const GRID_MARGIN: f64 = 1e-3;
/// Adjacent grid points whose projections differ by this much get bisected.
pub const JUMP_FLAG: f64 = 1e-3;
/// Bisection localizes a jump to an edge of this length before hunting the tie.
pub const BISECT_CELL: f64 = 1e-6;
const MAX_BISECTIONS: usize = 80;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// Points per axis.
    pub resolution: usize,
}

impl GridSpec {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, resolution: usize) -> Result<Self> {
        check_dim(lo.len(), hi.len())?;
        if lo.is_empty() || resolution < 2 || lo.iter().zip(&hi).any(|(l, h)| !(l <= h)) {
            return Err(Error::InvalidArgument(
                "grid needs lo <= hi and at least 2 points per axis".into(),
            ));
        }
        Ok(GridSpec { lo, hi, resolution })
    }

    /// Clamp the box into `dom f` (Right) or `int dom f` (Left) with [`GRID_MARGIN`].
    pub fn shrink_into(&self, f: &LegendreFunction) -> GridSpec {
        let iv = f.scalar_interval();
        let (lo, hi) = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| iv.shrink(*a, *b, GRID_MARGIN))
            .unzip();
        GridSpec {
            lo,
            hi,
            resolution: self.resolution,
        }
    }

    pub fn len(&self) -> usize {
        self.resolution.pow(self.lo.len() as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, mut idx: usize) -> Vec<f64> {
        let n = self.resolution;
        (0..self.lo.len())
            .map(|j| {
                let k = idx % n;
                idx /= n;
                self.lo[j] + (self.hi[j] - self.lo[j]) * k as f64 / (n - 1) as f64
            })
            .collect()
    }

    /// Index pairs of axis-adjacent grid points.
    fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.resolution;
        let mut out = Vec::new();
        for i in 0..self.len() {
            let mut stride = 1;
            for _ in 0..self.lo.len() {
                if (i / stride) % n + 1 < n {
                    out.push((i, i + stride));
                }
                stride *= n;
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    ChebyshevOnGrid,
    NotChebyshev,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub point: Vec<f64>,
    pub result: ProjectionResult,
    /// Re-solved with a ten times finer scan.
    pub confirmation: ProjectionResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChebyshevReport {
    pub grid: GridSpec,
    pub side: &'static str,
    pub tested: usize,
    pub skipped: usize,
    pub flagged_edges: usize,
    /// Confirmed witnesses only.
    pub multivalued_points: Vec<Witness>,
    /// Candidates that did not survive the finer re-solve.
    pub rejected: usize,
    pub verdict: Verdict,
}

fn solve(f: &LegendreFunction, set: &ClosedSet, side: Side, y: &[f64], opts: &ProjectionOptions) -> Result<ProjectionResult> {
    match side {
        Side::Left => left_project(f, set, y, opts),
        Side::Right => right_project(f, set, y, opts),
    }
}

fn side_name(side: Side) -> &'static str {
    match side {
        Side::Left => "left",
        Side::Right => "right",
    }
}

/// Bisect the edge `[p, q]` across a jump of the projection. Returns a point
/// whose projection is multi-valued, or `None` when the jump turns out to be
/// continuous variation.
fn bisect_edge(
    f: &LegendreFunction,
    set: &ClosedSet,
    side: Side,
    mut p: Vec<f64>,
    mut q: Vec<f64>,
    mut rp: ProjectionResult,
    mut rq: ProjectionResult,
    opts: &ProjectionOptions,
) -> Option<(Vec<f64>, ProjectionResult)> {
    for _ in 0..MAX_BISECTIONS {
        let m = lerp(&p, &q, 0.5);
        if m == p || m == q {
            return None;
        }
        let rm = solve(f, set, side, &m, opts).ok()?;
        if rm.multiplicity == Multiplicity::Multiple {
            return Some((m, rm));
        }
        let left = hausdorff(&rp.minimizers, &rm.minimizers);
        let right = hausdorff(&rm.minimizers, &rq.minimizers);
        if left >= right {
            q = m;
            rq = rm;
        } else {
            p = m;
            rp = rm;
        }
        let jump = hausdorff(&rp.minimizers, &rq.minimizers);
        if jump < opts.separation {
            return None;
        }
        if dist(&p, &q) <= BISECT_CELL && jump < JUMP_FLAG {
            return None;
        }
    }
    None
}

/// Project every grid point, bisect edges across which the projection jumps,
/// and confirm every multi-valued point with a finer scan.
pub fn scan_chebyshev(
    f: &LegendreFunction,
    set: &ClosedSet,
    grid: &GridSpec,
    side: Side,
    opts: &ProjectionOptions,
) -> Result<ChebyshevReport> {
    check_dim(f.dimension(), grid.lo.len())?;
    let grid = grid.shrink_into(f);
    let results: Vec<Option<ProjectionResult>> = (0..grid.len())
        .into_par_iter()
        .map(|i| solve(f, set, side, &grid.point(i), opts).ok())
        .collect();
    let tested = results.iter().filter(|r| r.is_some()).count();
    let skipped = results.len() - tested;

    let mut candidates: Vec<(Vec<f64>, ProjectionResult)> = results
        .iter()
        .enumerate()
        .filter_map(|(i, r)| match r {
            Some(r) if r.multiplicity == Multiplicity::Multiple => Some((grid.point(i), r.clone())),
            _ => None,
        })
        .collect();

    let flagged: Vec<(usize, usize)> = grid
        .edges()
        .into_iter()
        .filter(|&(i, j)| match (&results[i], &results[j]) {
            (Some(a), Some(b)) => {
                a.multiplicity != Multiplicity::Multiple
                    && b.multiplicity != Multiplicity::Multiple
                    && hausdorff(&a.minimizers, &b.minimizers) >= JUMP_FLAG
            }
            _ => false,
        })
        .collect();
    let found: Vec<Option<(Vec<f64>, ProjectionResult)>> = flagged
        .par_iter()
        .map(|&(i, j)| {
            bisect_edge(
                f,
                set,
                side,
                grid.point(i),
                grid.point(j),
                results[i].clone().unwrap(),
                results[j].clone().unwrap(),
                opts,
            )
        })
        .collect();
    candidates.extend(found.into_iter().flatten());

    let mut unique: Vec<(Vec<f64>, ProjectionResult)> = Vec::new();
    for c in candidates {
        if unique.iter().all(|u| dist(&u.0, &c.0) > BISECT_CELL) {
            unique.push(c);
        }
    }
    let fine = ProjectionOptions {
        h_scan: opts.h_scan / 10.0,
        ..*opts
    };
    let checked: Vec<Option<Witness>> = unique
        .into_par_iter()
        .map(|(point, result)| {
            let confirmation = solve(f, set, side, &point, &fine).ok()?;
            (confirmation.multiplicity == Multiplicity::Multiple).then_some(Witness {
                point,
                result,
                confirmation,
            })
        })
        .collect();
    let rejected = checked.iter().filter(|w| w.is_none()).count();
    let multivalued_points: Vec<Witness> = checked.into_iter().flatten().collect();
    Ok(ChebyshevReport {
        verdict: if multivalued_points.is_empty() {
            Verdict::ChebyshevOnGrid
        } else {
            Verdict::NotChebyshev
        },
        grid,
        side: side_name(side),
        tested,
        skipped,
        flagged_edges: flagged.len(),
        multivalued_points,
        rejected,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityProbe {
    /// Worst `dist_∞(t a + (1−t) b, C)`: the smallest tolerance at which
    /// `contains` accepts the combination.
    pub worst_gap: f64,
    pub pairs: usize,
    /// `(a, b, t, t a + (1−t) b)` attaining the worst gap.
    pub witness: Option<(Vec<f64>, Vec<f64>, f64, Vec<f64>)>,
}

/// Midpoints of the extreme points first, then `samples` random pairs.
pub fn convexity_probe(set: &ClosedSet, samples: usize, seed: u64) -> ConvexityProbe {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let extremes = set.extreme_points();
    let mut trials: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new();
    for i in 0..extremes.len().min(32) {
        for j in i + 1..extremes.len().min(32) {
            trials.push((extremes[i].clone(), extremes[j].clone(), 0.5));
        }
    }
    for _ in 0..samples {
        let a = set.sample_member(&mut rng);
        let b = set.sample_member(&mut rng);
        trials.push((a, b, rng.gen_range(0.0..1.0)));
    }
    let gaps: Vec<f64> = trials
        .par_iter()
        .map(|(a, b, t)| set.dist_inf(&lerp(b, a, *t)))
        .collect();
    let mut probe = ConvexityProbe {
        worst_gap: 0.0,
        pairs: trials.len(),
        witness: None,
    };
    for ((a, b, t), gap) in trials.into_iter().zip(gaps) {
        if gap > probe.worst_gap || probe.witness.is_none() {
            probe.worst_gap = gap;
            let m = lerp(&b, &a, t);
            probe.witness = Some((a, b, t, m));
        }
    }
    probe
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Section7Config {
    /// Box scanned for a multi-valued right projection.
    pub scan_lo: Vec<f64>,
    pub scan_hi: Vec<f64>,
    pub scan_resolution: usize,
    pub probe_samples: usize,
    pub duality_points: usize,
    pub convex_gap_max: f64,
    pub image_gap_min: f64,
    pub duality_tol: f64,
    pub hausdorff_tol: f64,
}

impl Default for Section7Config {
    fn default() -> Self {
        Section7Config {
            scan_lo: vec![-16.0, 2.0],
            scan_hi: vec![-4.0, 8.0],
            scan_resolution: 64,
            probe_samples: 1000,
            duality_points: 200,
            convex_gap_max: 1e-9,
            image_gap_min: 0.5,
            duality_tol: 1e-6,
            hausdorff_tol: 1e-5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stage {
    pub label: &'static str,
    pub claim: &'static str,
    pub metric: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Section7Report {
    pub stages: Vec<Stage>,
    pub set_probe: ConvexityProbe,
    pub image_probe: ConvexityProbe,
    pub scan: ChebyshevReport,
    /// Per duality point: `(y, direct value, dual value, Hausdorff)`.
    pub duality: Vec<(Vec<f64>, f64, f64, f64)>,
    /// Per dual point: `(y*, value gap, Hausdorff in the dual space)`.
    pub left_right: Vec<(Vec<f64>, f64, f64)>,
}

impl Section7Report {
    pub fn passed(&self) -> bool {
        self.stages.iter().all(|s| s.passed)
    }
}

/// `f(x, y) = e^x + e^y`, `C = [(0,0), (1,2)]`: `C` is convex, `∇f(C)` is
/// not, the right projection onto `C` is multi-valued somewhere, and the
/// right projection factors through the left projection of `f*` on `∇f(C)`.
pub fn reproduce_section7(cfg: &Section7Config, opts: &ProjectionOptions, seed: u64) -> Result<Section7Report> {
    let f = LegendreFunction::exponential(2)?;
    let dual = f.conjugate();
    let c = ClosedSet::segment(vec![0.0, 0.0], vec![1.0, 2.0], &f)?;
    let image = c.image_under_gradient(&f)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let set_probe = convexity_probe(&c, cfg.probe_samples, rng.gen());
    let image_probe = convexity_probe(&image, cfg.probe_samples, rng.gen());

    let grid = GridSpec::new(cfg.scan_lo.clone(), cfg.scan_hi.clone(), cfg.scan_resolution)?;
    let scan = scan_chebyshev(&f, &c, &grid, Side::Right, opts)?;

    // Half the points near the origin, half over the scan box.
    let ys: Vec<Vec<f64>> = (0..cfg.duality_points)
        .map(|k| {
            if k % 2 == 0 {
                vec![rng.gen_range(-3.0..4.0), rng.gen_range(-3.0..4.0)]
            } else {
                (0..2).map(|j| rng.gen_range(cfg.scan_lo[j]..=cfg.scan_hi[j])).collect()
            }
        })
        .collect();
    let duality = ys
        .into_par_iter()
        .map(|y| {
            let direct = right_project(&f, &c, &y, opts)?;
            let via = right_via_duality(&f, &c, &y, opts)?;
            let h = hausdorff(&direct.minimizers, &via.minimizers);
            Ok((y, direct.value, via.value, h))
        })
        .collect::<Result<Vec<_>>>()?;

    let ystars: Vec<Vec<f64>> = (0..cfg.duality_points)
        .map(|_| f.sample_conj_point(&mut rng))
        .collect();
    let left_right = ystars
        .into_par_iter()
        .map(|ys| {
            let left = left_project(&dual, &image, &ys, opts)?;
            let right = right_project(&f, &c, &f.grad_conj(&ys)?, opts)?;
            let mapped = right
                .minimizers
                .iter()
                .map(|x| f.grad_f(x))
                .collect::<Result<Vec<_>>>()?;
            let gap = (left.value - right.value).abs();
            Ok((ys, gap, hausdorff(&left.minimizers, &mapped)))
        })
        .collect::<Result<Vec<_>>>()?;

    let worst_value = duality.iter().map(|d| (d.1 - d.2).abs()).fold(0.0, f64::max);
    let worst_h = duality.iter().map(|d| d.3).fold(0.0, f64::max);
    let worst_lr = left_right.iter().map(|d| d.1).fold(0.0, f64::max);
    let worst_lr_h = left_right.iter().map(|d| d.2).fold(0.0, f64::max);
    let witness_gap = scan
        .multivalued_points
        .iter()
        .map(|w| {
            let m = &w.confirmation.minimizers;
            let mut best: f64 = 0.0;
            for i in 0..m.len() {
                for j in i + 1..m.len() {
                    best = best.max(dist(&m[i], &m[j]));
                }
            }
            best
        })
        .fold(0.0, f64::max);

    let stages = vec![
        Stage {
            label: "a",
            claim: "C is convex",
            metric: set_probe.worst_gap,
            threshold: cfg.convex_gap_max,
            passed: set_probe.worst_gap <= cfg.convex_gap_max,
        },
        Stage {
            label: "b",
            claim: "grad f(C) is not convex",
            metric: image_probe.worst_gap,
            threshold: cfg.image_gap_min,
            passed: image_probe.worst_gap >= cfg.image_gap_min,
        },
        Stage {
            label: "c",
            claim: "the right projection onto C is multi-valued somewhere",
            metric: witness_gap,
            threshold: opts.separation,
            passed: scan.verdict == Verdict::NotChebyshev && witness_gap >= opts.separation,
        },
        Stage {
            label: "d",
            claim: "right projection equals grad f* o left projection of f* o grad f",
            metric: worst_value,
            threshold: cfg.duality_tol,
            passed: worst_value <= cfg.duality_tol && worst_h <= cfg.hausdorff_tol,
        },
        Stage {
            label: "e",
            claim: "left projection of f* onto grad f(C) equals grad f o right projection o grad f*",
            metric: worst_lr,
            threshold: cfg.duality_tol,
            passed: worst_lr <= cfg.duality_tol && worst_lr_h <= cfg.hausdorff_tol,
        },
    ];
    Ok(Section7Report {
        stages,
        set_probe,
        image_probe,
        scan,
        duality,
        left_right,
    })
}
