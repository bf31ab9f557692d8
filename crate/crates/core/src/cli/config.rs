//! Experiment configuration: one self-describing JSON document per run.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::chebyshev::{GridSpec, Section7Config};
use crate::error::{Error, Result};
use crate::legendre::LegendreFunction;
use crate::projection::{ProjectionOptions, Side};
use crate::sets::{ClosedSet, Curve, Shape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Distance,
    Project,
    Geodesic,
    Subdiff,
    ChebyshevScan,
    DualityCheck,
    Identities,
    Section7,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SideName {
    #[default]
    Left,
    Right,
}

impl From<SideName> for Side {
    fn from(s: SideName) -> Side {
        match s {
            SideName::Left => Side::Left,
            SideName::Right => Side::Right,
        }
    }
}

/// A set literal, tagged by `type`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SetLiteral {
    Cloud { points: Vec<Vec<f64>> },
    Segment { a: Vec<f64>, b: Vec<f64> },
    Polyline { vertices: Vec<Vec<f64>> },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Dense samples `(t, x)` joined by straight pieces of length at most `resolution`.
    Curve { samples: Vec<(f64, Vec<f64>)>, resolution: f64 },
}

impl SetLiteral {
    pub fn build(&self, f: &LegendreFunction) -> Result<ClosedSet> {
        let shape = match self.clone() {
            SetLiteral::Cloud { points } => Shape::FiniteCloud(points),
            SetLiteral::Segment { a, b } => Shape::Segment { a, b },
            SetLiteral::Polyline { vertices } => Shape::Polyline(vertices),
            SetLiteral::Box { lo, hi } => Shape::Box { lo, hi },
            SetLiteral::Curve { samples, resolution } => {
                Shape::ParamCurve(Curve::from_samples(samples, resolution)?)
            }
        };
        ClosedSet::new(shape, f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridLiteral {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
}

fn default_resolution() -> usize {
    64
}

impl GridLiteral {
    pub fn spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.lo.clone(), self.hi.clone(), self.resolution)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub tol_val: f64,
    pub h_scan: f64,
    pub dedup: f64,
    pub separation: f64,
    /// Relative residual for the distance and geodesic identities.
    pub identity: f64,
    /// Nearest-point characterization violation.
    pub characterization: f64,
    pub duality_value: f64,
    pub duality_hausdorff: f64,
    /// Relative mismatch between FD and closed-form gradients of the distance.
    pub gradient: f64,
    /// Minimum nonlinearity of the Dini subderivative at multi-valued points.
    pub linearity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let p = ProjectionOptions::default();
        Tolerances {
            tol_val: p.tol_val,
            h_scan: p.h_scan,
            dedup: p.dedup,
            separation: p.separation,
            identity: 1e-9,
            characterization: 1e-8,
            duality_value: 1e-6,
            duality_hausdorff: 1e-5,
            gradient: 1e-4,
            linearity: 1e-2,
        }
    }
}

impl Tolerances {
    pub fn projection(&self) -> ProjectionOptions {
        ProjectionOptions {
            tol_val: self.tol_val,
            h_scan: self.h_scan,
            dedup: self.dedup,
            separation: self.separation,
        }
    }

    fn validate(&self) -> Result<()> {
        let named = [
            ("tol_val", self.tol_val),
            ("h_scan", self.h_scan),
            ("dedup", self.dedup),
            ("separation", self.separation),
            ("identity", self.identity),
            ("characterization", self.characterization),
            ("duality_value", self.duality_value),
            ("duality_hausdorff", self.duality_hausdorff),
            ("gradient", self.gradient),
            ("linearity", self.linearity),
        ];
        for (name, v) in named {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("tolerances.{name} must be positive, got {v}")));
            }
        }
        if self.h_scan > 0.5 {
            return Err(Error::Config("tolerances.h_scan must be at most 0.5".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Catalog name: `energy`, `shannon`, `fermi-dirac`, `exponential`,
    /// `power:<p>`, optionally prefixed by `conj:`.
    pub function: String,
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set: Option<SetLiteral>,
    pub command: Command,
    #[serde(default)]
    pub side: SideName,
    /// Explicit query points; take precedence over `grid` and `count`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<f64>>>,
    /// Explicit `(x, y)` pairs for `geodesic`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<(Vec<f64>, Vec<f64>)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridLiteral>,
    /// Number of random query points when neither `points` nor `grid` is given.
    #[serde(default = "default_count")]
    pub count: usize,
    /// Geodesic parameter for `geodesic`.
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub section7: Section7Config,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default = "default_format")]
    pub format: Format,
}

fn default_count() -> usize {
    100
}

fn default_lambda() -> f64 {
    0.5
}

fn default_format() -> Format {
    Format::Json
}

impl ExperimentConfig {
    /// Parse and validate; errors carry the offending key and location.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.tolerances.validate()?;
        if self.dimension == 0 {
            return Err(Error::Config("dimension must be at least 1".into()));
        }
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(Error::Config(format!("lambda must be finite and >= 0, got {}", self.lambda)));
        }
        let needs_set = !matches!(self.command, Command::Geodesic | Command::Identities | Command::Section7);
        if needs_set && self.set.is_none() {
            return Err(Error::Config(format!("command {:?} needs a `set`", self.command)));
        }
        if self.command == Command::ChebyshevScan && self.grid.is_none() {
            return Err(Error::Config("chebyshev-scan needs a `grid`".into()));
        }
        Ok(())
    }

    pub fn legendre(&self) -> Result<LegendreFunction> {
        LegendreFunction::from_name(&self.function, self.dimension)
    }

    pub fn closed_set(&self, f: &LegendreFunction) -> Result<ClosedSet> {
        self.set
            .as_ref()
            .ok_or_else(|| Error::Config("missing `set`".into()))?
            .build(f)
    }
}
