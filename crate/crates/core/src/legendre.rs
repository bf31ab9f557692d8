//! Catalog of separable Legendre functions.
//!
//! Every entry is of the form `f(x) = Σ_j φ(x_j)` for a scalar Legendre
//! function `φ`, so values, gradients and Hessians are evaluated
//! coordinatewise and Hessians are diagonal. Each entry also knows its
//! Fenchel conjugate in closed form:
//!
//! | name          | φ(t)                         | int dom φ | φ*(s)              | int dom φ* |
//! |---------------|------------------------------|-----------|--------------------|------------|
//! | `energy`      | t²/2                         | ℝ         | s²/2               | ℝ          |
//! | `shannon`     | t ln t − t                   | (0, ∞)    | eˢ                 | ℝ          |
//! | `fermi-dirac` | t ln t + (1−t) ln(1−t)       | (0, 1)    | ln(1 + eˢ)         | ℝ          |
//! | `exponential` | eᵗ                           | ℝ         | s ln s − s         | (0, ∞)     |
//! | `power:<p>`   | \|t\|ᵖ/p                     | ℝ         | \|s\|^q/q, 1/p+1/q=1 | ℝ        |
//!
//! `exponential` is not 1-coercive (its conjugate domain is not the whole
//! space); conjugate-side evaluations are restricted to the open positive
//! orthant for it.
//!
//! Exponentials are only evaluated for arguments in `[-700, 700]`; beyond
//! that a [`Error::Range`] is reported instead of producing `inf` or `0`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{check_dim, Error, Result};
use crate::vector::Diagonal;

/// Largest exponent argument accepted by the exponential-type entries.
pub const EXP_LIMIT: f64 = 700.0;

/// Number of sampled points checked when a user-supplied scalar spec is registered.
pub const SPEC_VALIDATION_POINTS: usize = 100;

/// An open interval with extended-real endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const REAL_LINE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::InvalidArgument(format!(
                "interval requires lo < hi, got ({lo}, {hi})"
            )));
        }
        Ok(Interval { lo, hi })
    }

    pub fn contains(&self, t: f64) -> bool {
        t > self.lo && t < self.hi
    }

    pub fn contains_closed(&self, t: f64) -> bool {
        t >= self.lo && t <= self.hi
    }

    /// Whether `t` lies in the interval at distance at least `margin` from both ends.
    pub fn contains_with_margin(&self, t: f64, margin: f64) -> bool {
        t - margin > self.lo && t + margin < self.hi
    }

    pub fn is_real_line(&self) -> bool {
        self.lo == f64::NEG_INFINITY && self.hi == f64::INFINITY
    }

    /// Clamp `[a, b]` into the interval, keeping `margin` away from finite ends.
    pub fn shrink(&self, a: f64, b: f64, margin: f64) -> (f64, f64) {
        let lo = if self.lo.is_finite() { a.max(self.lo + margin) } else { a };
        let hi = if self.hi.is_finite() { b.min(self.hi - margin) } else { b };
        (lo, hi)
    }

    /// Draw a well-scaled interior point.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match (self.lo.is_finite(), self.hi.is_finite()) {
            (true, true) => self.lo + (self.hi - self.lo) * rng.gen_range(0.01..0.99),
            (true, false) => self.lo + rng.gen_range(-3.0f64..2.0).exp(),
            (false, true) => self.hi - rng.gen_range(-3.0f64..2.0).exp(),
            (false, false) => rng.gen_range(-4.0..4.0),
        }
    }
}

/// `U = int dom f`, described coordinatewise.
#[derive(Debug, Clone, PartialEq)]
pub struct OpenDomain {
    pub bounds: Vec<Interval>,
}

impl OpenDomain {
    pub fn uniform(interval: Interval, dimension: usize) -> Self {
        OpenDomain {
            bounds: vec![interval; dimension],
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.bounds.len() && self.bounds.iter().zip(x).all(|(b, t)| b.contains(*t))
    }

    pub fn contains_with_margin(&self, x: &[f64], margin: f64) -> bool {
        x.len() == self.bounds.len()
            && self
                .bounds
                .iter()
                .zip(x)
                .all(|(b, t)| b.contains_with_margin(*t, margin))
    }

    pub fn is_full_space(&self) -> bool {
        self.bounds.iter().all(Interval::is_real_line)
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied scalar Legendre function `φ` together with its conjugate.
///
/// `φ*''` is not supplied; it is recovered as `1 / φ''(φ*'(s))`.
#[derive(Clone)]
pub struct ScalarSpec {
    pub name: String,
    /// `int dom φ`.
    pub interval: Interval,
    /// `int dom φ*`.
    pub conj_interval: Interval,
    pub phi: ScalarFn,
    pub dphi: ScalarFn,
    pub d2phi: ScalarFn,
    pub conj: ScalarFn,
    pub dconj: ScalarFn,
}

impl ScalarSpec {
    pub fn new(
        name: impl Into<String>,
        interval: Interval,
        conj_interval: Interval,
        phi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dphi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2phi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        conj: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dconj: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        ScalarSpec {
            name: name.into(),
            interval,
            conj_interval,
            phi: Arc::new(phi),
            dphi: Arc::new(dphi),
            d2phi: Arc::new(d2phi),
            conj: Arc::new(conj),
            dconj: Arc::new(dconj),
        }
    }
}

impl fmt::Debug for ScalarSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarSpec")
            .field("name", &self.name)
            .field("interval", &self.interval)
            .field("conj_interval", &self.conj_interval)
            .finish_non_exhaustive()
    }
}

/// Which catalog entry a function is built from.
#[derive(Debug, Clone)]
pub enum Kind {
    Energy,
    Shannon,
    FermiDirac,
    Exponential,
    SeparablePower(f64),
    Separable(Arc<ScalarSpec>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum ScalarError {
    Domain,
    Range(f64),
}

type ScalarResult = std::result::Result<f64, ScalarError>;

fn guarded_exp(t: f64) -> ScalarResult {
    if t.abs() > EXP_LIMIT || t.is_nan() {
        Err(ScalarError::Range(t))
    } else {
        Ok(t.exp())
    }
}

fn xlogx(t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t * t.ln()
    }
}

fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Scalar building block; `Softplus` is the conjugate of Fermi–Dirac and
/// `CustomDual` the conjugate side of a user spec.
#[derive(Debug, Clone)]
enum Scalar {
    Energy,
    Shannon,
    Exp,
    FermiDirac,
    Softplus,
    Power(f64),
    Custom(Arc<ScalarSpec>),
    CustomDual(Arc<ScalarSpec>),
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        use Scalar::*;
        match (self, other) {
            (Energy, Energy) | (Shannon, Shannon) | (Exp, Exp) => true,
            (FermiDirac, FermiDirac) | (Softplus, Softplus) => true,
            (Power(p), Power(q)) => p == q,
            (Custom(a), Custom(b)) | (CustomDual(a), CustomDual(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl Scalar {
    fn interval(&self) -> Interval {
        match self {
            Scalar::Shannon => Interval {
                lo: 0.0,
                hi: f64::INFINITY,
            },
            Scalar::FermiDirac => Interval { lo: 0.0, hi: 1.0 },
            Scalar::Custom(s) => s.interval,
            Scalar::CustomDual(s) => s.conj_interval,
            _ => Interval::REAL_LINE,
        }
    }

    fn conjugate(&self) -> Scalar {
        match self {
            Scalar::Energy => Scalar::Energy,
            Scalar::Shannon => Scalar::Exp,
            Scalar::Exp => Scalar::Shannon,
            Scalar::FermiDirac => Scalar::Softplus,
            Scalar::Softplus => Scalar::FermiDirac,
            Scalar::Power(p) => Scalar::Power(*p / (*p - 1.0)),
            Scalar::Custom(s) => Scalar::CustomDual(s.clone()),
            Scalar::CustomDual(s) => Scalar::Custom(s.clone()),
        }
    }

    /// `φ(t)`, `+∞` outside the closed domain.
    fn value(&self, t: f64) -> ScalarResult {
        let iv = self.interval();
        if !iv.contains_closed(t) {
            return Ok(f64::INFINITY);
        }
        Ok(match self {
            Scalar::Energy => 0.5 * t * t,
            Scalar::Shannon => xlogx(t) - t,
            Scalar::Exp => guarded_exp(t)?,
            Scalar::FermiDirac => xlogx(t) + xlogx(1.0 - t),
            Scalar::Softplus => t.max(0.0) + (-t.abs()).exp().ln_1p(),
            Scalar::Power(p) => t.abs().powf(*p) / p,
            Scalar::Custom(s) => (s.phi)(t),
            Scalar::CustomDual(s) => (s.conj)(t),
        })
    }

    /// `φ'(t)` on the open domain.
    fn deriv(&self, t: f64) -> ScalarResult {
        if !self.interval().contains(t) {
            return Err(ScalarError::Domain);
        }
        Ok(match self {
            Scalar::Energy => t,
            Scalar::Shannon => t.ln(),
            Scalar::Exp => guarded_exp(t)?,
            Scalar::FermiDirac => t.ln() - (-t).ln_1p(),
            Scalar::Softplus => logistic(t),
            Scalar::Power(p) => t.signum() * t.abs().powf(p - 1.0),
            Scalar::Custom(s) => (s.dphi)(t),
            Scalar::CustomDual(s) => (s.dconj)(t),
        })
    }

    /// `φ''(t)` on the open domain.
    fn second(&self, t: f64) -> ScalarResult {
        if !self.interval().contains(t) {
            return Err(ScalarError::Domain);
        }
        Ok(match self {
            Scalar::Energy => 1.0,
            Scalar::Shannon => 1.0 / t,
            Scalar::Exp => guarded_exp(t)?,
            Scalar::FermiDirac => 1.0 / (t * (1.0 - t)),
            Scalar::Softplus => {
                let s = logistic(t);
                s * logistic(-t)
            }
            Scalar::Power(p) => (p - 1.0) * t.abs().powf(p - 2.0),
            Scalar::Custom(s) => (s.d2phi)(t),
            Scalar::CustomDual(s) => 1.0 / (s.d2phi)((s.dconj)(t)),
        })
    }

    /// `φ(x) − φ(y) − φ'(y)(x − y)` for `y` in the open domain.
    fn divergence(&self, x: f64, y: f64) -> ScalarResult {
        let dy = self.deriv(y)?;
        if !self.interval().contains_closed(x) {
            return Ok(f64::INFINITY);
        }
        let d = x - y;
        Ok(match self {
            Scalar::Energy => 0.5 * d * d,
            Scalar::Shannon => {
                if x == 0.0 {
                    y
                } else {
                    let r = d / y;
                    y * ((1.0 + r) * r.ln_1p() - r)
                }
            }
            Scalar::Exp => {
                let ex = self.value(x)?;
                if d > 30.0 {
                    ex - dy - dy * d
                } else {
                    dy * (d.exp_m1() - d)
                }
            }
            Scalar::FermiDirac => {
                let a = if x == 0.0 { 0.0 } else { x * (d / y).ln_1p() };
                let b = if x == 1.0 {
                    0.0
                } else {
                    (1.0 - x) * (-d / (1.0 - y)).ln_1p()
                };
                a + b
            }
            _ => self.value(x)? - self.value(y)? - dy * d,
        })
    }
}

/// A separable Legendre function on `ℝ^J`.
#[derive(Debug, Clone, PartialEq)]
pub struct LegendreFunction {
    scalar: Scalar,
    dimension: usize,
}

impl LegendreFunction {
    fn build(scalar: Scalar, dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        Ok(LegendreFunction { scalar, dimension })
    }

    pub fn energy(dimension: usize) -> Result<Self> {
        Self::build(Scalar::Energy, dimension)
    }

    pub fn shannon(dimension: usize) -> Result<Self> {
        Self::build(Scalar::Shannon, dimension)
    }

    pub fn fermi_dirac(dimension: usize) -> Result<Self> {
        Self::build(Scalar::FermiDirac, dimension)
    }

    pub fn exponential(dimension: usize) -> Result<Self> {
        Self::build(Scalar::Exp, dimension)
    }

    /// `Σ |x_j|^p / p`, `p > 1`.
    pub fn power(p: f64, dimension: usize) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::InvalidSpec(format!("power exponent must be > 1, got {p}")));
        }
        Self::build(Scalar::Power(p), dimension)
    }

    /// Register a user-supplied scalar spec. The round-trip `φ*'(φ'(t)) = t`
    /// is checked on [`SPEC_VALIDATION_POINTS`] seeded interior samples.
    pub fn separable(spec: ScalarSpec, dimension: usize) -> Result<Self> {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed_5eed);
        for _ in 0..SPEC_VALIDATION_POINTS {
            let t = spec.interval.sample(&mut rng);
            let s = (spec.dphi)(t);
            if !s.is_finite() || !spec.conj_interval.contains(s) {
                return Err(Error::InvalidSpec(format!(
                    "{}: φ'({t}) = {s} is outside the conjugate domain",
                    spec.name
                )));
            }
            let back = (spec.dconj)(s);
            if !((back - t).abs() <= 1e-9 * (1.0 + t.abs())) {
                return Err(Error::InvalidSpec(format!(
                    "{}: φ*'(φ'({t})) = {back} does not invert φ'",
                    spec.name
                )));
            }
        }
        Self::build(Scalar::Custom(Arc::new(spec)), dimension)
    }

    /// Parse a catalog name: `energy`, `shannon`, `fermi-dirac`,
    /// `exponential`, `power:<p>`, optionally prefixed by `conj:`.
    pub fn from_name(name: &str, dimension: usize) -> Result<Self> {
        if let Some(rest) = name.strip_prefix("conj:") {
            return Ok(Self::from_name(rest, dimension)?.conjugate());
        }
        match name {
            "energy" => Self::energy(dimension),
            "shannon" => Self::shannon(dimension),
            "fermi-dirac" => Self::fermi_dirac(dimension),
            "exponential" => Self::exponential(dimension),
            _ => match name.strip_prefix("power:") {
                Some(p) => {
                    let p: f64 = p
                        .parse()
                        .map_err(|_| Error::UnknownFunction(name.to_string()))?;
                    Self::power(p, dimension)
                }
                None => Err(Error::UnknownFunction(name.to_string())),
            },
        }
    }

    /// The catalog entries used throughout tests and scans.
    pub fn catalog(dimension: usize) -> Vec<LegendreFunction> {
        vec![
            Self::energy(dimension).unwrap(),
            Self::shannon(dimension).unwrap(),
            Self::fermi_dirac(dimension).unwrap(),
            Self::exponential(dimension).unwrap(),
            Self::power(3.0, dimension).unwrap(),
            Self::power(1.5, dimension).unwrap(),
        ]
    }

    pub fn name(&self) -> String {
        match &self.scalar {
            Scalar::Energy => "energy".into(),
            Scalar::Shannon => "shannon".into(),
            Scalar::Exp => "exponential".into(),
            Scalar::FermiDirac => "fermi-dirac".into(),
            Scalar::Softplus => "conj:fermi-dirac".into(),
            Scalar::Power(p) => format!("power:{p}"),
            Scalar::Custom(s) => s.name.clone(),
            Scalar::CustomDual(s) => format!("conj:{}", s.name),
        }
    }

    pub fn kind(&self) -> Kind {
        match &self.scalar {
            Scalar::Energy => Kind::Energy,
            Scalar::Shannon => Kind::Shannon,
            Scalar::Exp => Kind::Exponential,
            Scalar::FermiDirac | Scalar::Softplus => Kind::FermiDirac,
            Scalar::Power(p) => Kind::SeparablePower(*p),
            Scalar::Custom(s) | Scalar::CustomDual(s) => Kind::Separable(s.clone()),
        }
    }

    /// True when this value is the conjugate side of a catalog entry that is
    /// not itself in the catalog (Fermi–Dirac or a user spec).
    pub fn is_conjugate(&self) -> bool {
        matches!(self.scalar, Scalar::Softplus | Scalar::CustomDual(_))
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn with_dimension(&self, dimension: usize) -> Result<Self> {
        Self::build(self.scalar.clone(), dimension)
    }

    /// The Fenchel conjugate `f*`, itself a Legendre function.
    pub fn conjugate(&self) -> Self {
        LegendreFunction {
            scalar: self.scalar.conjugate(),
            dimension: self.dimension,
        }
    }

    pub fn domain(&self) -> OpenDomain {
        OpenDomain::uniform(self.scalar.interval(), self.dimension)
    }

    pub fn conj_domain(&self) -> OpenDomain {
        OpenDomain::uniform(self.scalar.conjugate().interval(), self.dimension)
    }

    pub fn scalar_interval(&self) -> Interval {
        self.scalar.interval()
    }

    /// `f(x)/‖x‖ → ∞`, equivalently `dom f* = ℝ^J`.
    pub fn is_one_coercive(&self) -> bool {
        self.scalar.conjugate().interval().is_real_line()
    }

    pub fn has_full_domain(&self) -> bool {
        self.scalar.interval().is_real_line()
    }

    pub fn in_domain(&self, x: &[f64]) -> bool {
        x.len() == self.dimension && x.iter().all(|t| self.scalar.interval().contains(*t))
    }

    pub fn in_closed_domain(&self, x: &[f64]) -> bool {
        x.len() == self.dimension
            && x.iter().all(|t| self.scalar.interval().contains_closed(*t))
    }

    fn lift(&self, err: ScalarError, point: &[f64], conj: bool) -> Error {
        match err {
            ScalarError::Range(argument) => Error::Range {
                argument,
                limit: EXP_LIMIT,
            },
            ScalarError::Domain if conj => Error::ConjugateDomain {
                function: self.name(),
                point: point.to_vec(),
            },
            ScalarError::Domain => Error::Domain {
                function: self.name(),
                point: point.to_vec(),
            },
        }
    }

    fn sum_with(&self, scalar: &Scalar, x: &[f64], conj: bool) -> Result<f64> {
        check_dim(self.dimension, x.len())?;
        let mut total = 0.0;
        for t in x {
            total += scalar.value(*t).map_err(|e| self.lift(e, x, conj))?;
        }
        Ok(total)
    }

    fn map_with(
        &self,
        x: &[f64],
        conj: bool,
        op: impl Fn(f64) -> ScalarResult,
    ) -> Result<Vec<f64>> {
        check_dim(self.dimension, x.len())?;
        x.iter()
            .map(|t| op(*t).map_err(|e| self.lift(e, x, conj)))
            .collect()
    }

    /// `f(x)`; `+∞` outside `dom f`, closed-form limits on its boundary.
    pub fn eval_f(&self, x: &[f64]) -> Result<f64> {
        self.sum_with(&self.scalar, x, false)
    }

    pub fn grad_f(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.map_with(x, false, |t| self.scalar.deriv(t))
    }

    pub fn hess_f(&self, x: &[f64]) -> Result<Diagonal> {
        self.map_with(x, false, |t| self.scalar.second(t)).map(Diagonal)
    }

    pub fn eval_conj(&self, s: &[f64]) -> Result<f64> {
        let conj = self.scalar.conjugate();
        check_dim(self.dimension, s.len())?;
        if !s.iter().all(|t| conj.interval().contains(*t)) {
            return Err(self.lift(ScalarError::Domain, s, true));
        }
        self.sum_with(&conj, s, true)
    }

    /// `∇f* = (∇f)^{-1}`.
    pub fn grad_conj(&self, s: &[f64]) -> Result<Vec<f64>> {
        let conj = self.scalar.conjugate();
        self.map_with(s, true, |t| conj.deriv(t))
    }

    pub fn hess_conj(&self, s: &[f64]) -> Result<Diagonal> {
        let conj = self.scalar.conjugate();
        self.map_with(s, true, |t| conj.second(t)).map(Diagonal)
    }

    /// `Σ_j φ(x_j) − φ(y_j) − φ'(y_j)(x_j − y_j)` with per-entry stable forms.
    pub(crate) fn divergence_sum(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_dim(self.dimension, x.len())?;
        check_dim(self.dimension, y.len())?;
        let mut total = 0.0;
        for (a, b) in x.iter().zip(y) {
            total += self.scalar.divergence(*a, *b).map_err(|e| self.lift(e, y, false))?;
        }
        Ok(total)
    }

    /// Largest `φ''` over the coordinate box `[lo_j, hi_j]`, estimated from
    /// the endpoints, the origin when inside, and 16 interior samples.
    pub(crate) fn hessian_bound(&self, lo: &[f64], hi: &[f64]) -> Result<f64> {
        let mut best: f64 = 0.0;
        for (a, b) in lo.iter().zip(hi) {
            let mut probe = |t: f64| -> Result<()> {
                let v = self.scalar.second(t).map_err(|e| self.lift(e, lo, false))?;
                best = best.max(v);
                Ok(())
            };
            probe(*a)?;
            probe(*b)?;
            if *a < 0.0 && *b > 0.0 {
                probe(0.0)?;
            }
            for k in 1..16 {
                probe(a + (b - a) * k as f64 / 16.0)?;
            }
        }
        Ok(best)
    }

    /// A random well-scaled point of `U`.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let iv = self.scalar.interval();
        (0..self.dimension).map(|_| iv.sample(rng)).collect()
    }

    /// A random well-scaled point of `int dom f*`.
    pub fn sample_conj_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let iv = self.scalar.conjugate().interval();
        (0..self.dimension).map(|_| iv.sample(rng)).collect()
    }
}

impl fmt::Display for LegendreFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}
