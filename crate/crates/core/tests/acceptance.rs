//! Acceptance suite: one PASS/FAIL line per criterion.

use std::f64::consts::E;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bregman_core::analysis::{
    conjugate_identity_check, conjugate_subdifferential_check, fenchel_subgradient_check, gradient_formula_check,
    subderivatives,
};
use bregman_core::bregman::{distance, geodesic_identities, geodesic_point, symmetrized, three_point_gap, GeodesicParams};
use bregman_core::chebyshev::{reproduce_section7, scan_chebyshev, GridSpec, Section7Config, Verdict};
use bregman_core::cli::{run, ExperimentConfig, Format};
use bregman_core::projection::{
    geodesic_projection_invariance, left_project, monotonicity_scan, verify_nearest_characterization, Multiplicity,
    ProjectionOptions, Side,
};
use bregman_core::vector::{dist, dot, hausdorff, norm, sub};
use bregman_core::{ClosedSet, LegendreFunction};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn opts() -> ProjectionOptions {
    ProjectionOptions::default()
}

fn catalog() -> Vec<LegendreFunction> {
    let mut out = Vec::new();
    for dim in [1, 2, 4] {
        for f in LegendreFunction::catalog(dim) {
            out.push(f.conjugate());
            out.push(f);
        }
    }
    out
}

fn random_cloud(f: &LegendreFunction, n: usize, rng: &mut ChaCha8Rng) -> ClosedSet {
    let pts = (0..n).map(|_| f.sample_point(rng)).collect();
    ClosedSet::cloud(pts, f).unwrap()
}

/// `(function, set)` pairs covering every set shape.
fn projection_configs() -> Vec<(String, LegendreFunction, ClosedSet)> {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let e = LegendreFunction::energy(2).unwrap();
    let s = LegendreFunction::shannon(2).unwrap();
    let x = LegendreFunction::exponential(2).unwrap();
    let fd = LegendreFunction::fermi_dirac(2).unwrap();
    let p3 = LegendreFunction::power(3.0, 2).unwrap();
    vec![
        ("energy/cloud".into(), e.clone(), ClosedSet::cloud(vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![1.0, 1.5]], &e).unwrap()),
        ("energy/polyline".into(), e.clone(), ClosedSet::polyline(vec![vec![-1.0, 0.0], vec![0.0, 1.0], vec![1.0, -0.5]], &e).unwrap()),
        ("energy/box".into(), e.clone(), ClosedSet::boxed(vec![-0.5, -0.5], vec![0.5, 1.0], &e).unwrap()),
        ("shannon/cloud".into(), s.clone(), random_cloud(&s, 5, &mut rng)),
        ("shannon/segment".into(), s.clone(), ClosedSet::segment(vec![0.2, 0.5], vec![1.5, 1.0], &s).unwrap()),
        ("shannon/box".into(), s.clone(), ClosedSet::boxed(vec![0.5, 0.5], vec![1.0, 2.0], &s).unwrap()),
        ("exponential/segment".into(), x.clone(), ClosedSet::segment(vec![0.0, 0.0], vec![1.0, 2.0], &x).unwrap()),
        ("fermi-dirac/box".into(), fd.clone(), ClosedSet::boxed(vec![0.2, 0.3], vec![0.4, 0.7], &fd).unwrap()),
        ("fermi-dirac/cloud".into(), fd.clone(), random_cloud(&fd, 4, &mut rng)),
        ("power:3/polyline".into(), p3.clone(), ClosedSet::polyline(vec![vec![-1.0, 1.0], vec![0.5, 0.5], vec![1.0, 2.0]], &p3).unwrap()),
    ]
}

/// 20 × 10 grid over a box inside the domain of `f`.
fn grid_200(f: &LegendreFunction) -> Vec<Vec<f64>> {
    let iv = f.scalar_interval();
    let (lo, hi) = iv.shrink(-2.0, 3.0, 0.05);
    let mut out = Vec::new();
    for i in 0..20 {
        for j in 0..10 {
            out.push(vec![
                lo + (hi - lo) * i as f64 / 19.0,
                lo + (hi - lo) * j as f64 / 9.0,
            ]);
        }
    }
    out
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for f in catalog() {
        for _ in 0..1000 {
            let x = f.sample_point(&mut rng);
            let back = f.grad_conj(&f.grad_f(&x).unwrap()).unwrap();
            worst = worst.max(dist(&back, &x) / (1.0 + norm(&x)));
            checked += 1;
        }
    }
    outcome(worst <= 1e-9, format!("{checked} points, worst relative error {worst:.3e} (tol 1e-9)"))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut three, mut sym, mut geo): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for f in catalog() {
        for _ in 0..500 {
            let x = f.sample_point(&mut rng);
            let y = f.sample_point(&mut rng);
            let c = f.sample_point(&mut rng);
            let lambda = rng.gen_range(0.01..0.99);
            let tp = three_point_gap(&f, &c, &x, &y).unwrap();
            three = three.max(tp.residual() / (1.0 + tp.lhs.abs() + tp.rhs.abs()));
            let s = symmetrized(&f, &x, &y).unwrap();
            let d = distance(&f, &x, &y).unwrap() + distance(&f, &y, &x).unwrap();
            sym = sym.max((s - d).abs() / (1.0 + s.abs()));
            geo = geo.max(geodesic_identities(&f, &x, &y, lambda).unwrap().worst_relative());
        }
    }
    let worst = three.max(sym).max(geo);
    outcome(
        worst <= 1e-9,
        format!("three-point {three:.2e}, symmetrization {sym:.2e}, geodesic {geo:.2e} (tol 1e-9)"),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let e = LegendreFunction::energy(3).unwrap();
    let s = LegendreFunction::shannon(3).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let lambda = rng.gen_range(0.0..1.0);
        let (x, y) = (e.sample_point(&mut rng), e.sample_point(&mut rng));
        let z = geodesic_point(&e, &GeodesicParams::new(x.clone(), y.clone(), lambda)).unwrap();
        for j in 0..3 {
            worst = worst.max((z[j] - ((1.0 - lambda) * x[j] + lambda * y[j])).abs());
        }
        let (x, y) = (s.sample_point(&mut rng), s.sample_point(&mut rng));
        let z = geodesic_point(&s, &GeodesicParams::new(x.clone(), y.clone(), lambda)).unwrap();
        for j in 0..3 {
            worst = worst.max((z[j] - x[j].powf(1.0 - lambda) * y[j].powf(lambda)).abs());
        }
    }
    let s2 = LegendreFunction::shannon(2).unwrap();
    let z = geodesic_point(&s2, &GeodesicParams::new(vec![1.0, 4.0], vec![4.0, 1.0], 0.5)).unwrap();
    let example = dist(&z, &[2.0, 2.0]);
    outcome(
        worst <= 1e-12 && example <= 1e-12,
        format!("worst mean deviation {worst:.2e}, (1,4)~(4,1) midpoint error {example:.2e} (tol 1e-12)"),
    )
}

fn criterion_4() -> Outcome {
    let mut worst: f64 = f64::NEG_INFINITY;
    let mut empty = 0;
    let mut count = 0;
    for (_, f, set) in projection_configs() {
        for y in grid_200(&f) {
            let r = left_project(&f, &set, &y, &opts()).unwrap();
            if r.minimizers.is_empty() {
                empty += 1;
            }
            let check = verify_nearest_characterization(&f, &set, &y, &r, 400).unwrap();
            worst = worst.max(check.violation);
            if let Some(v) = check.variational {
                worst = worst.max(v);
            }
            count += 1;
        }
    }
    outcome(
        empty == 0 && worst <= 1e-8,
        format!("{count} projections, {empty} empty, worst characterization residual {worst:.2e} (tol 1e-8)"),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let configs: Vec<(LegendreFunction, ClosedSet)> = projection_configs()
        .into_iter()
        .filter(|(name, _, _)| matches!(name.as_str(), "shannon/cloud" | "energy/polyline" | "shannon/segment" | "fermi-dirac/box" | "exponential/segment"))
        .map(|(_, f, s)| (f, s))
        .collect();
    let mut worst: f64 = 0.0;
    let mut non_unique = 0;
    let mut pairs = 0;
    for k in 0..50 {
        let (f, set) = &configs[k % configs.len()];
        let y = f.sample_point(&mut rng);
        let p = left_project(f, set, &y, &opts()).unwrap();
        let x = p.point().to_vec();
        for i in 1..=9 {
            let check = geodesic_projection_invariance(f, set, &y, &x, i as f64 / 10.0, &opts()).unwrap();
            if !check.result.is_unique() {
                non_unique += 1;
            }
            worst = worst.max(check.deviation);
        }
        pairs += 1;
    }
    outcome(
        non_unique == 0 && worst <= 1e-6,
        format!("{pairs} pairs x 9 lambdas, {non_unique} non-unique, worst deviation {worst:.2e} (tol 1e-6)"),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    let mut details = Vec::new();
    let mut ok = true;
    for (name, f, set) in projection_configs() {
        let mut evaluated = 0;
        let mut config_worst: f64 = 0.0;
        let mut batches = 0;
        while evaluated < 500 && batches < 20 {
            let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..500 - evaluated)
                .map(|_| (f.sample_point(&mut rng), f.sample_point(&mut rng)))
                .collect();
            let r = monotonicity_scan(&f, &set, &pairs, &opts()).unwrap();
            evaluated += r.evaluated;
            config_worst = config_worst.min(r.worst);
            batches += 1;
        }
        ok &= evaluated >= 500 && config_worst >= -1e-10;
        worst = worst.min(config_worst);
        details.push(format!("{name}:{evaluated}"));
    }
    outcome(ok, format!("worst product {worst:.2e} (tol -1e-10); pairs {}", details.join(" ")))
}

fn criterion_7() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    let s = LegendreFunction::shannon(2).unwrap();
    let e = LegendreFunction::energy(2).unwrap();
    let x = LegendreFunction::exponential(2).unwrap();
    let fd = LegendreFunction::fermi_dirac(2).unwrap();
    let p3 = LegendreFunction::power(3.0, 2).unwrap();
    let convex: Vec<(&str, LegendreFunction, ClosedSet)> = vec![
        ("shannon/segment", s.clone(), ClosedSet::segment(vec![0.2, 0.5], vec![1.5, 1.0], &s).unwrap()),
        ("shannon/box", s.clone(), ClosedSet::boxed(vec![0.5, 0.5], vec![1.0, 2.0], &s).unwrap()),
        ("energy/box", e.clone(), ClosedSet::boxed(vec![-0.5, -0.5], vec![0.5, 1.0], &e).unwrap()),
        ("energy/point", e.clone(), ClosedSet::cloud(vec![vec![0.3, -0.2]], &e).unwrap()),
        ("exponential/segment", x.clone(), ClosedSet::segment(vec![0.0, 0.0], vec![1.0, 2.0], &x).unwrap()),
        ("fermi-dirac/segment", fd.clone(), ClosedSet::segment(vec![0.2, 0.3], vec![0.6, 0.9], &fd).unwrap()),
        ("power:3/collinear-polyline", p3.clone(), ClosedSet::polyline(vec![vec![-1.0, -1.0], vec![0.0, 0.0], vec![1.0, 1.0]], &p3).unwrap()),
    ];
    for (name, f, set) in &convex {
        let grid = GridSpec::new(vec![-2.0, -2.0], vec![3.0, 3.0], 64).unwrap();
        let r = scan_chebyshev(f, set, &grid, Side::Left, &opts()).unwrap();
        if r.verdict != Verdict::ChebyshevOnGrid {
            ok = false;
            notes.push(format!("{name} not chebyshev"));
        }
    }
    let fine = ProjectionOptions {
        h_scan: opts().h_scan / 10.0,
        ..opts()
    };
    let e1 = LegendreFunction::energy(1).unwrap();
    let pair = ClosedSet::cloud(vec![vec![-1.0], vec![1.0]], &e1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let three = random_cloud(&s, 3, &mut rng);
    let nonconvex: Vec<(&str, LegendreFunction, ClosedSet, GridSpec)> = vec![
        ("energy/{-1,1}", e1, pair, GridSpec::new(vec![-2.0], vec![2.0], 64).unwrap()),
        ("shannon/3-point", s.clone(), three, GridSpec::new(vec![0.0, 0.0], vec![4.0, 4.0], 64).unwrap()),
    ];
    for (name, f, set, grid) in &nonconvex {
        let r = scan_chebyshev(f, set, grid, Side::Left, &opts()).unwrap();
        let survivors = r
            .multivalued_points
            .iter()
            .filter(|w| {
                let again = left_project(f, set, &w.point, &fine).unwrap();
                let m = &again.minimizers;
                again.multiplicity == Multiplicity::Multiple
                    && (0..m.len()).any(|i| (i + 1..m.len()).any(|j| dist(&m[i], &m[j]) >= 1e-4))
            })
            .count();
        if r.verdict != Verdict::NotChebyshev || survivors == 0 || survivors != r.multivalued_points.len() {
            ok = false;
        }
        notes.push(format!("{name}: {} witnesses, {survivors} survive refinement", r.multivalued_points.len()));
    }
    outcome(ok, format!("{} convex sets on-grid Chebyshev; {}", convex.len(), notes.join("; ")))
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let configs = projection_configs();
    let mut worst: f64 = 0.0;
    let mut points = 0;
    let mut attempts = 0;
    while points < 50 && attempts < 1000 {
        let (_, f, set) = &configs[attempts % configs.len()];
        attempts += 1;
        let y = f.sample_point(&mut rng);
        if let Some(check) = gradient_formula_check(f, set, &y, &opts()).unwrap() {
            worst = worst.max(check.residual / (1.0 + norm(&check.analytic)));
            points += 1;
        }
    }
    let e1 = LegendreFunction::energy(1).unwrap();
    let pair = ClosedSet::cloud(vec![vec![-1.0], vec![1.0]], &e1).unwrap();
    let est = subderivatives(&e1, &pair, &[0.0], &[1.0], &opts()).unwrap();
    let ok = points == 50 && worst <= 1e-4 && (est.dini + 1.0).abs() <= 1e-2 && (est.clarke - 1.0).abs() <= 1e-2;
    outcome(
        ok,
        format!(
            "{points} unique points, worst gradient mismatch {worst:.2e} (tol 1e-4); bisector dini {:.6}, clarke {:.6} (tol 1e-2)",
            est.dini, est.clarke
        ),
    )
}

/// Brute-force oracle: is `x` a minimizer of `D(·, y)` over the cloud?
fn oracle_projects(f: &LegendreFunction, cloud: &[Vec<f64>], x: &[f64], y: &[f64]) -> bool {
    let best = cloud.iter().map(|c| distance(f, c, y).unwrap()).fold(f64::INFINITY, f64::min);
    distance(f, x, y).unwrap() - best <= 1e-9 * (1.0 + best.abs())
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let fs = [
        LegendreFunction::energy(2).unwrap(),
        LegendreFunction::shannon(2).unwrap(),
        LegendreFunction::exponential(3).unwrap(),
        LegendreFunction::fermi_dirac(2).unwrap(),
        LegendreFunction::power(1.5, 2).unwrap(),
    ];
    let e = &fs[0];
    let mut clouds: Vec<(LegendreFunction, Vec<Vec<f64>>)> =
        vec![(e.clone(), vec![vec![0.0, 0.0], vec![2.0, 0.0]])];
    for f in &fs {
        let pts: Vec<Vec<f64>> = (0..6).map(|_| f.sample_point(&mut rng)).collect();
        clouds.push((f.clone(), pts));
    }
    let mut worst_asplund: f64 = 0.0;
    let mut asplund_ok = true;
    for (f, pts) in &clouds {
        let set = ClosedSet::cloud(pts.clone(), f).unwrap();
        for _ in 0..200 {
            let s = f.sample_conj_point(&mut rng);
            let r = conjugate_identity_check(f, &set, &s, &opts()).unwrap();
            asplund_ok &= r.holds();
            worst_asplund = worst_asplund.max(r.residual / (1.0 + f.eval_conj(&s).unwrap().abs()));
        }
    }
    let mut fenchel_disagree = 0;
    let mut fenchel_positive = 0;
    let mut subdiff_disagree = 0;
    for k in 0..100 {
        let (f, pts) = &clouds[k % clouds.len()];
        let set = ClosedSet::cloud(pts.clone(), f).unwrap();
        let x = pts[rng.gen_range(0..pts.len())].clone();
        // Every other instance uses s = ∇f(y) for a y that projects onto x.
        let s = if k % 2 == 0 {
            f.grad_f(&x).unwrap()
        } else {
            f.sample_conj_point(&mut rng)
        };
        let check = fenchel_subgradient_check(f, &set, &x, &s, &opts()).unwrap();
        let y = f.grad_conj(&s).unwrap();
        let oracle_ineq = pts
            .iter()
            .all(|c| f.eval_f(c).unwrap() - f.eval_f(&x).unwrap() - dot(&s, &sub(c, &x)) >= -1e-9);
        let oracle_proj = oracle_projects(f, pts, &x, &y);
        if check.subgradient != oracle_ineq || check.projects != oracle_proj || oracle_ineq != oracle_proj {
            fenchel_disagree += 1;
        }
        fenchel_positive += oracle_ineq as usize;

        let s = f.sample_conj_point(&mut rng);
        let r = conjugate_subdifferential_check(f, &set, &s, &opts()).unwrap();
        let vals: Vec<f64> = pts.iter().map(|c| dot(&s, c) - f.eval_f(c).unwrap()).collect();
        let best = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let oracle: Vec<Vec<f64>> = pts
            .iter()
            .zip(&vals)
            .filter(|(_, v)| **v >= best - 1e-10 * (1.0 + best.abs()))
            .map(|(c, _)| c.clone())
            .collect();
        if r.hausdorff > 1e-7 || hausdorff(&oracle, &r.maximizers) > 0.0 {
            subdiff_disagree += 1;
        }
    }
    // The symmetric tie: both generators on each side.
    let e1 = LegendreFunction::energy(1).unwrap();
    let pair = ClosedSet::cloud(vec![vec![-1.0], vec![1.0]], &e1).unwrap();
    let tie = conjugate_subdifferential_check(&e1, &pair, &[0.0], &opts()).unwrap();
    let tie_ok = tie.maximizers.len() == 2 && tie.projections.len() == 2 && tie.hausdorff <= 1e-7;
    outcome(
        asplund_ok && fenchel_disagree == 0 && subdiff_disagree == 0 && tie_ok,
        format!(
            "conjugate identity worst {worst_asplund:.2e} (tol 1e-9); fenchel disagreements {fenchel_disagree}/100 ({fenchel_positive} subgradients); conjugate subdifferential disagreements {subdiff_disagree}/100"
        ),
    )
}

fn criterion_10() -> Outcome {
    let r = reproduce_section7(&Section7Config::default(), &opts(), 10).unwrap();
    let midpoint = [0.5 * (1.0 + E), 0.5 * (1.0 + E * E)];
    let witness_ok = r
        .image_probe
        .witness
        .as_ref()
        .is_some_and(|w| dist(&w.3, &midpoint) <= 1e-12);
    let stages: Vec<String> = r
        .stages
        .iter()
        .map(|s| format!("{}={} ({:.3e} vs {:.0e})", s.label, if s.passed { "ok" } else { "FAIL" }, s.metric, s.threshold))
        .collect();
    outcome(
        r.passed() && witness_ok,
        format!("{}; {} right-projection witnesses", stages.join(", "), r.scan.multivalued_points.len()),
    )
}

fn criterion_11() -> Outcome {
    let configs = [
        r#"{"function":"shannon","dimension":3,"command":"identities","count":200}"#,
        r#"{"function":"fermi-dirac","dimension":2,"command":"project","set":{"type":"box","lo":[0.2,0.3],"hi":[0.4,0.7]},"count":50}"#,
        r#"{"function":"exponential","dimension":2,"command":"duality-check","set":{"type":"segment","a":[0,0],"b":[1,2]},"count":40}"#,
        r#"{"function":"shannon","dimension":2,"command":"chebyshev-scan","set":{"type":"cloud","points":[[1,1],[2,0.5],[0.5,2]]},"grid":{"lo":[0,0],"hi":[3,3],"resolution":32}}"#,
        r#"{"function":"exponential","dimension":2,"command":"section7","section7":{"scan_resolution":32}}"#,
    ];
    let mut identical = 0;
    for text in configs {
        let mut cfg = ExperimentConfig::from_json(text).unwrap();
        cfg.seed = 2024;
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        if a.render(Format::Json).unwrap() == b.render(Format::Json).unwrap()
            && a.render(Format::Csv).unwrap() == b.render(Format::Csv).unwrap()
        {
            identical += 1;
        }
    }
    outcome(identical == configs.len(), format!("{identical}/{} suites byte-identical across runs", configs.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("legendre round-trip", criterion_1),
        ("identity suite", criterion_2),
        ("geodesic examples", criterion_3),
        ("projection existence and characterization", criterion_4),
        ("geodesic projection invariance", criterion_5),
        ("monotonicity", criterion_6),
        ("chebyshev iff convex on grids", criterion_7),
        ("subdifferential formulas", criterion_8),
        ("conjugate identities", criterion_9),
        ("exponential segment reproduction", criterion_10),
        ("determinism", criterion_11),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let r = check();
        let tag = if r.passed { "PASS" } else { "FAIL" };
        println!("{tag} {:>2} {name}: {} [{:.2}s]", i + 1, r.detail, start.elapsed().as_secs_f64());
        if !r.passed {
            failed.push(i + 1);
        }
    }
    println!(
        "{}/{} criteria passed{}",
        criteria.len() - failed.len(),
        criteria.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!("; failed: {failed:?}")
        }
    );
}
