//! Scenario files: parsing, validation with JSON-pointer locations, and
//! construction of the measures, bodies, laws and functions they name.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use cbmkit_core::geometry::{ConvexBody, ConvexShape, DirectionGrid, FourierStar, StarBody, StarShape};
use cbmkit_core::measures::{AngularWeight, DisintegratedMeasure};
use cbmkit_core::onedim::{LawKind, RadialLaw};
use cbmkit_core::oracle::OracleSettings;
use cbmkit_core::sobolev::{RadialFunction, RadialProfile};
use cbmkit_core::Exponent;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// A configuration problem, located by a JSON pointer into the scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemaError {
    pub pointer: String,
    pub message: String,
}

impl SchemaError {
    pub fn new(pointer: impl Into<String>, message: impl fmt::Display) -> Self {
        SchemaError { pointer: pointer.into(), message: message.to_string() }
    }
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let at = if self.pointer.is_empty() { "/" } else { &self.pointer };
        write!(f, "{at}: {}", self.message)
    }
}

impl std::error::Error for SchemaError {}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => out.push_str(&format!("/{}", key.replace('~', "~0").replace('/', "~1"))),
            Segment::Enum { variant } => out.push_str(&format!("/{variant}")),
            Segment::Unknown => {}
        }
    }
    out
}

/// Deserializes `value` and reports failures under `base`.
pub fn from_value<T: DeserializeOwned>(value: &Value, base: &str) -> Result<T, SchemaError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.inner().to_string();
        SchemaError::new(format!("{base}{}", pointer_of(e.path())), inner)
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Assert,
    Diagnostic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub checker: String,
    /// Label for the report; defaults to `<index>:<checker>`.
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default = "empty_object")]
    pub inputs: Value,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub mode: Mode,
}

fn empty_object() -> Value {
    Value::Object(Default::default())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodySpec {
    Disc { r: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Polygon { vertices: Vec<[f64; 2]> },
    StarFourier {
        a0: f64,
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
        /// Series for `log rho` instead of `rho`.
        #[serde(default)]
        log: bool,
    },
}

impl BodySpec {
    pub fn star_shape(&self, dim: usize) -> cbmkit_core::Result<StarShape> {
        Ok(match self {
            BodySpec::StarFourier { a0, cos, sin, log } => StarShape::Fourier(FourierStar::new(*a0, cos.clone(), sin.clone(), *log)?),
            other => StarShape::Convex(other.convex_shape(dim)?),
        })
    }

    pub fn convex_shape(&self, dim: usize) -> cbmkit_core::Result<ConvexShape> {
        match self {
            BodySpec::Disc { r } => ConvexShape::ball(dim, [0.0; 3], *r),
            BodySpec::Box { lo, hi } => ConvexShape::boxed(lo, hi),
            BodySpec::Polygon { vertices } => ConvexShape::polygon(vertices),
            BodySpec::StarFourier { .. } => Err(cbmkit_core::Error::NonConvex("a Fourier star has no convex descriptor".into())),
        }
    }
}

fn default_w0() -> AngularWeight {
    AngularWeight::constant(1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    /// `w0(x/|x|) |x|^{1/q - n}` with `1/q = 1/p + n`.
    Homogeneous {
        p: f64,
        #[serde(default = "default_w0")]
        w0: AngularWeight,
    },
    /// `w0(x/|x|) dx`.
    Lebesgue {
        #[serde(default = "default_w0")]
        w0: AngularWeight,
    },
    /// Disintegrated along the rays of a body with a radial law.
    Warped {
        body: BodySpec,
        phi: LawKind,
        #[serde(default = "default_w0")]
        w0: AngularWeight,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    /// `g(|x|_K)` with `g` piecewise linear on the knots.
    RadialPl { gauge: String, knots: Vec<f64>, values: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    #[serde(default = "default_window")]
    pub window: f64,
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default = "default_depth")]
    pub refine_depth: u32,
}

fn default_window() -> f64 {
    OracleSettings::default().window
}

fn default_h() -> f64 {
    OracleSettings::default().h
}

fn default_depth() -> u32 {
    OracleSettings::default().refine_depth
}

impl Default for OracleSpec {
    fn default() -> Self {
        OracleSpec { window: default_window(), h: default_h(), refine_depth: default_depth() }
    }
}

pub const DEFAULT_GRID: usize = 4096;

fn default_grid() -> usize {
    DEFAULT_GRID
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub description: Option<String>,
    pub dimension: usize,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default)]
    pub seed: u64,
    pub measure: MeasureSpec,
    #[serde(default)]
    pub bodies: BTreeMap<String, BodySpec>,
    #[serde(default)]
    pub laws: BTreeMap<String, LawKind>,
    #[serde(default)]
    pub functions: BTreeMap<String, FunctionSpec>,
    #[serde(default)]
    pub oracle: OracleSpec,
    pub checks: Vec<CheckSpec>,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, SchemaError> {
        let value: Value = serde_json::from_str(text).map_err(|e| SchemaError::new("", format!("invalid JSON: {e}")))?;
        let s: Scenario = from_value(&value, "")?;
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<(), SchemaError> {
        if !(1..=3).contains(&self.dimension) {
            return Err(SchemaError::new("/dimension", format!("dimension must be 1, 2 or 3, got {}", self.dimension)));
        }
        if self.checks.is_empty() {
            return Err(SchemaError::new("/checks", "at least one check is required"));
        }
        for (i, c) in self.checks.iter().enumerate() {
            if let Some(t) = c.tolerance {
                if !(t > 0.0 && t.is_finite()) {
                    return Err(SchemaError::new(format!("/checks/{i}/tolerance"), format!("tolerance must be positive, got {t}")));
                }
            }
            if !c.inputs.is_object() {
                return Err(SchemaError::new(format!("/checks/{i}/inputs"), "inputs must be an object"));
            }
        }
        for (name, f) in &self.functions {
            let FunctionSpec::RadialPl { gauge, .. } = f;
            if !self.bodies.contains_key(gauge) {
                return Err(SchemaError::new(format!("/functions/{name}/gauge"), format!("unknown body {gauge:?}")));
            }
        }
        let o = &self.oracle;
        if !(o.h > 0.0 && o.window > o.h) {
            return Err(SchemaError::new("/oracle", format!("need 0 < h < window, got h={} window={}", o.h, o.window)));
        }
        Ok(())
    }
}

/// Everything a check can reference, built once per run.
pub struct Context {
    pub dim: usize,
    pub grid: Arc<DirectionGrid>,
    pub measure: DisintegratedMeasure,
    pub bodies: BTreeMap<String, BodySpec>,
    pub laws: BTreeMap<String, RadialLaw>,
    pub functions: BTreeMap<String, RadialFunction>,
    pub oracle: OracleSettings,
}

impl Context {
    pub fn build(s: &Scenario) -> Result<Self, SchemaError> {
        let dim = s.dimension;
        let grid = Arc::new(DirectionGrid::new(dim, s.grid).map_err(|e| SchemaError::new("/grid", e))?);
        let measure = match &s.measure {
            MeasureSpec::Homogeneous { p, w0 } => {
                let e = Exponent::new(*p).map_err(|e| SchemaError::new("/measure/p", e))?;
                cbmkit_core::homogeneous_dual(e, dim).map_err(|e| SchemaError::new("/measure/p", e))?;
                DisintegratedMeasure::homogeneous(w0, e, grid.clone()).map_err(|e| SchemaError::new("/measure/w0", e))?
            }
            MeasureSpec::Lebesgue { w0 } => {
                DisintegratedMeasure::homogeneous(w0, Exponent::PosInf, grid.clone()).map_err(|e| SchemaError::new("/measure/w0", e))?
            }
            MeasureSpec::Warped { body, phi, w0 } => {
                let shape = body.star_shape(dim).map_err(|e| SchemaError::new("/measure/body", e))?;
                let b = StarBody::from_shape(grid.clone(), shape).map_err(|e| SchemaError::new("/measure/body", e))?;
                let law = RadialLaw::new(phi.clone()).map_err(|e| SchemaError::new("/measure/phi", e))?;
                DisintegratedMeasure::warped(w0, &b, law).map_err(|e| SchemaError::new("/measure", e))?
            }
        };
        for (name, b) in &s.bodies {
            b.star_shape(dim).map_err(|e| SchemaError::new(format!("/bodies/{name}"), e))?;
        }
        let mut laws = BTreeMap::new();
        for (name, l) in &s.laws {
            laws.insert(name.clone(), RadialLaw::new(l.clone()).map_err(|e| SchemaError::new(format!("/laws/{name}"), e))?);
        }
        let mut ctx = Context {
            dim,
            grid,
            measure,
            bodies: s.bodies.clone(),
            laws,
            functions: BTreeMap::new(),
            oracle: OracleSettings { window: s.oracle.window, h: s.oracle.h, refine_depth: s.oracle.refine_depth, ..OracleSettings::default() },
        };
        for (name, f) in &s.functions {
            let FunctionSpec::RadialPl { gauge, knots, values } = f;
            let at = format!("/functions/{name}");
            let k = ctx.convex(gauge, &format!("{at}/gauge"))?;
            let p = RadialProfile::new(knots.clone(), values.clone()).map_err(|e| SchemaError::new(&at, e))?;
            ctx.functions.insert(name.clone(), RadialFunction::new(k, p));
        }
        Ok(ctx)
    }

    fn spec(&self, name: &str, at: &str) -> Result<&BodySpec, SchemaError> {
        self.bodies.get(name).ok_or_else(|| SchemaError::new(at, format!("unknown body {name:?}")))
    }

    pub fn star(&self, name: &str, at: &str) -> Result<StarBody, SchemaError> {
        let shape = self.spec(name, at)?.star_shape(self.dim).map_err(|e| SchemaError::new(at, e))?;
        StarBody::from_shape(self.grid.clone(), shape).map_err(|e| SchemaError::new(at, e))
    }

    pub fn convex(&self, name: &str, at: &str) -> Result<ConvexBody, SchemaError> {
        let shape = self.spec(name, at)?.convex_shape(self.dim).map_err(|e| SchemaError::new(at, e))?;
        ConvexBody::from_shape(self.grid.clone(), shape).map_err(|e| SchemaError::new(at, e))
    }

    pub fn law(&self, name: &str, at: &str) -> Result<&RadialLaw, SchemaError> {
        self.laws.get(name).ok_or_else(|| SchemaError::new(at, format!("unknown law {name:?}")))
    }

    pub fn function(&self, name: &str, at: &str) -> Result<&RadialFunction, SchemaError> {
        self.functions.get(name).ok_or_else(|| SchemaError::new(at, format!("unknown function {name:?}")))
    }
}
