//! One-dimensional solvers shared by the projection routines.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a minimum of `obj` on `[lo, hi]`.
/// Returns `(argmin, min, iterations)`; the endpoints are not evaluated.
pub fn golden_section<F: Fn(f64) -> f64>(
    obj: F,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    max_iter: usize,
) -> (f64, f64, usize) {
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let mut fc = obj(c);
    let mut fd = obj(d);
    let mut iters = 0;
    while hi - lo > tol * (1.0 + lo.abs().max(hi.abs())) && iters < max_iter {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = obj(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = obj(d);
        }
        iters += 1;
    }
    if fc <= fd {
        (c, fc, iters)
    } else {
        (d, fd, iters)
    }
}

/// Bisection for a sign change of `g` on `[lo, hi]` with `g(lo) < 0 < g(hi)`.
pub fn bisect_increasing<G: Fn(f64) -> f64>(g: G, mut lo: f64, mut hi: f64, max_iter: usize) -> f64 {
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = g(mid);
        if v.is_nan() {
            break;
        }
        if v < 0.0 {
            lo = mid;
        } else if v > 0.0 {
            hi = mid;
        } else {
            return mid;
        }
    }
    0.5 * (lo + hi)
}

/// Minimizer of a convex function on `[lo, hi]` known through its derivative.
pub fn convex_argmin<G: Fn(f64) -> f64>(deriv: G, lo: f64, hi: f64) -> f64 {
    if deriv(lo) >= 0.0 {
        return lo;
    }
    if deriv(hi) <= 0.0 {
        return hi;
    }
    bisect_increasing(deriv, lo, hi, 200)
}

/// Refine a bracketed local minimum: derivative bisection when the derivative
/// changes sign across the bracket, golden-section otherwise.
pub fn refine_minimum<F, G>(obj: &F, deriv: &G, lo: f64, hi: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let (dl, dh) = (deriv(lo), deriv(hi));
    let s = if dl < 0.0 && dh > 0.0 {
        bisect_increasing(deriv, lo, hi, 200)
    } else {
        golden_section(obj, lo, hi, 1e-12, 200).0
    };
    let mut best = (s, obj(s));
    for e in [lo, hi] {
        let v = obj(e);
        if v < best.1 {
            best = (e, v);
        }
    }
    best
}

/// All local minima of `obj` on `[lo, hi]`: scan `n + 1` equispaced points,
/// then refine every grid-local minimum (endpoints included).
pub fn local_minima<F, G>(obj: &F, deriv: &G, lo: f64, hi: f64, n: usize) -> Vec<(f64, f64)>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let n = n.max(2);
    let grid: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|&s| obj(s)).collect();
    let mut out = Vec::new();
    for i in 0..=n {
        let left = if i == 0 { f64::INFINITY } else { vals[i - 1] };
        let right = if i == n { f64::INFINITY } else { vals[i + 1] };
        if vals[i] <= left && vals[i] <= right && vals[i].is_finite() {
            let a = grid[i.saturating_sub(1)];
            let b = grid[(i + 1).min(n)];
            out.push(refine_minimum(obj, deriv, a, b));
        }
    }
    out
}
