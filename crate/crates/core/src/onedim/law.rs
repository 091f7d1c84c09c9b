//! Radial laws `phi` on the half-line with head/tail integrals and inverses.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{bail, Error, Result};
use crate::numeric::bisect;

const SQRT_PI_2: f64 = 0.886_226_925_452_758;

/// Shape of a radial law before scaling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LawKind {
    /// `phi(t) = t^{-a}`
    Power { a: f64 },
    /// `phi(t) = t^{-2} e^{1/t}`, with tail `e^{1/t} - 1`
    PowerExp,
    /// `phi(t) = e^{-t^2}`
    Gaussian,
    /// Right-continuous step function: `phi = phi[k]` on `[t[k], t[k+1])`,
    /// extended by `phi[0]` to the left and by the last value to the right.
    Table { t: Vec<f64>, phi: Vec<f64> },
}

/// Analytic facts about a law.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LawFlags {
    pub nonincreasing: bool,
    pub origin_nonintegrable: bool,
    pub tail_integrable: bool,
    pub log_convex: bool,
    pub strictly_log_convex: bool,
}

#[derive(Clone, Debug, PartialEq, Default)]
struct Steps {
    xs: Vec<f64>,
    vals: Vec<f64>,
    head: Vec<f64>,
}

/// A radial law `scale * phi(t)` on `[0, inf)`.
///
/// `tail(t)` is `Phi(t) = int_t^inf phi` and `head(t)` is `int_0^t phi`; both may be
/// infinite. By convention `phi(inf) = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLaw", into = "RawLaw")]
pub struct RadialLaw {
    kind: LawKind,
    scale: f64,
    steps: Steps,
}

#[derive(Serialize, Deserialize)]
struct RawLaw {
    #[serde(flatten)]
    kind: LawKind,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    scale: f64,
}

fn one() -> f64 {
    1.0
}

fn is_one(v: &f64) -> bool {
    *v == 1.0
}

impl TryFrom<RawLaw> for RadialLaw {
    type Error = Error;
    fn try_from(raw: RawLaw) -> Result<Self> {
        RadialLaw::new(raw.kind)?.with_scale(raw.scale)
    }
}

impl From<RadialLaw> for RawLaw {
    fn from(l: RadialLaw) -> Self {
        RawLaw { kind: l.kind, scale: l.scale }
    }
}

impl RadialLaw {
    pub fn new(kind: LawKind) -> Result<Self> {
        let steps = match &kind {
            LawKind::Power { a } if !a.is_finite() => bail!(InvalidLaw, "power exponent must be finite"),
            LawKind::Table { t, phi } => build_steps(t, phi)?,
            _ => Steps::default(),
        };
        Ok(RadialLaw { kind, scale: 1.0, steps })
    }

    pub fn power(a: f64) -> Result<Self> {
        Self::new(LawKind::Power { a })
    }

    pub fn power_exp() -> Self {
        RadialLaw { kind: LawKind::PowerExp, scale: 1.0, steps: Steps::default() }
    }

    pub fn gaussian() -> Self {
        RadialLaw { kind: LawKind::Gaussian, scale: 1.0, steps: Steps::default() }
    }

    pub fn table(t: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        Self::new(LawKind::Table { t, phi })
    }

    /// Multiplies the law by `c > 0`.
    pub fn with_scale(mut self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            bail!(InvalidLaw, "scale must be positive and finite, got {c}");
        }
        self.scale *= c;
        Ok(self)
    }

    pub fn kind(&self) -> &LawKind {
        &self.kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn flags(&self) -> LawFlags {
        match &self.kind {
            LawKind::Power { a } => LawFlags {
                nonincreasing: *a >= 0.0,
                origin_nonintegrable: *a >= 1.0,
                tail_integrable: *a > 1.0,
                log_convex: *a >= 0.0,
                strictly_log_convex: *a > 0.0,
            },
            LawKind::PowerExp => LawFlags {
                nonincreasing: true,
                origin_nonintegrable: true,
                tail_integrable: true,
                log_convex: true,
                strictly_log_convex: true,
            },
            LawKind::Gaussian => LawFlags {
                nonincreasing: true,
                origin_nonintegrable: false,
                tail_integrable: true,
                log_convex: false,
                strictly_log_convex: false,
            },
            LawKind::Table { .. } => {
                let v = &self.steps.vals;
                LawFlags {
                    nonincreasing: v.windows(2).all(|w| w[1] <= w[0]),
                    origin_nonintegrable: false,
                    tail_integrable: *v.last().unwrap() == 0.0,
                    log_convex: v.iter().all(|&x| x == v[0]) && v[0] > 0.0,
                    strictly_log_convex: false,
                }
            }
        }
    }

    /// `phi(t)` for `t >= 0`, with `phi(inf) = 0`.
    pub fn phi(&self, t: f64) -> f64 {
        if t == f64::INFINITY {
            return 0.0;
        }
        let v = match &self.kind {
            LawKind::Power { a } => t.powf(-a),
            LawKind::PowerExp => {
                if t == 0.0 {
                    f64::INFINITY
                } else {
                    (1.0 / t - 2.0 * t.ln()).exp()
                }
            }
            LawKind::Gaussian => (-t * t).exp(),
            LawKind::Table { .. } => self.steps.vals[self.steps.piece(t)],
        };
        self.scale * v
    }

    /// `log phi(t)`, computed without forming `phi` where that would under- or overflow.
    pub fn log_phi(&self, t: f64) -> f64 {
        let s = self.scale.ln();
        match &self.kind {
            LawKind::Power { a } => s - a * t.ln(),
            LawKind::PowerExp => s + 1.0 / t - 2.0 * t.ln(),
            LawKind::Gaussian => s - t * t,
            LawKind::Table { .. } => self.phi(t).ln(),
        }
    }

    /// `(log phi)'(t)`; zero between the knots of a table.
    pub fn dlog_phi(&self, t: f64) -> f64 {
        match &self.kind {
            LawKind::Power { a } => -a / t,
            LawKind::PowerExp => -2.0 / t - 1.0 / (t * t),
            LawKind::Gaussian => -2.0 * t,
            LawKind::Table { .. } => 0.0,
        }
    }

    /// `int_0^t phi`.
    pub fn head(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        let v = match &self.kind {
            LawKind::Power { a } => {
                if *a < 1.0 {
                    t.powf(1.0 - a) / (1.0 - a)
                } else {
                    f64::INFINITY
                }
            }
            LawKind::PowerExp => f64::INFINITY,
            LawKind::Gaussian => SQRT_PI_2 * libm::erf(t),
            LawKind::Table { .. } => self.steps.head_at(t),
        };
        self.scale * v
    }

    /// `Phi(t) = int_t^inf phi`.
    pub fn tail(&self, t: f64) -> f64 {
        if t == f64::INFINITY {
            return 0.0;
        }
        let v = match &self.kind {
            LawKind::Power { a } => {
                if *a > 1.0 {
                    t.powf(1.0 - a) / (a - 1.0)
                } else {
                    f64::INFINITY
                }
            }
            LawKind::PowerExp => {
                if t == 0.0 {
                    f64::INFINITY
                } else {
                    (1.0 / t).exp_m1()
                }
            }
            LawKind::Gaussian => SQRT_PI_2 * libm::erfc(t),
            LawKind::Table { .. } => {
                let total = self.steps.total();
                if total.is_finite() {
                    (total - self.steps.head_at(t)).max(0.0)
                } else {
                    f64::INFINITY
                }
            }
        };
        self.scale * v
    }

    /// `int_a^b phi` for `0 <= a <= b <= inf`, avoiding `inf - inf`.
    pub fn interval_mass(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        if let LawKind::Power { a: e } = self.kind {
            if e == 1.0 {
                return self.scale * (b / a).ln();
            }
        }
        let ta = self.tail(a);
        if ta.is_finite() {
            return (ta - self.tail(b)).max(0.0);
        }
        let tb = self.tail(b);
        if tb.is_finite() {
            return f64::INFINITY;
        }
        (self.head(b) - self.head(a)).max(0.0)
    }

    /// `Phi(0)`, the total mass.
    pub fn total(&self) -> f64 {
        self.tail(0.0)
    }

    /// Generalised inverse `Phi^{-1}(x) = inf { t : Phi(t) <= x }`.
    ///
    /// `Phi^{-1}(0)` is infinite for laws with unbounded support and the right end
    /// of the support otherwise.
    pub fn tail_inv(&self, x: f64) -> Result<f64> {
        if x.is_nan() || x < 0.0 {
            bail!(InvalidInput, "tail inverse needs x >= 0, got {x}");
        }
        if !self.flags().tail_integrable {
            bail!(InvalidLaw, "law {self} has an infinite tail");
        }
        let total = self.total();
        if x > total * (1.0 + 1e-14) {
            bail!(InvalidInput, "x = {x} exceeds the total mass {total} of {self}");
        }
        if x == f64::INFINITY || x >= total {
            return Ok(0.0);
        }
        let y = x / self.scale;
        Ok(match &self.kind {
            LawKind::Power { a } => ((a - 1.0) * y).powf(1.0 / (1.0 - a)),
            LawKind::PowerExp => {
                if y == 0.0 {
                    f64::INFINITY
                } else {
                    1.0 / y.ln_1p()
                }
            }
            LawKind::Gaussian => {
                if y == 0.0 {
                    f64::INFINITY
                } else {
                    bisect(|t| SQRT_PI_2 * libm::erfc(t) - y, 0.0, 40.0, 1e-16)
                }
            }
            LawKind::Table { .. } => self.steps.head_inv(self.steps.total() - y),
        })
    }

    /// Isoperimetric profile `I = phi o Phi^{-1}`.
    pub fn iso_profile(&self, x: f64) -> Result<f64> {
        Ok(self.phi(self.tail_inv(x)?))
    }

    /// Checks the declared flags against samples on a geometric grid over `[lo, hi]`.
    pub fn validate_samples(&self, lo: f64, hi: f64, points: usize) -> Result<()> {
        let f = self.flags();
        let mut prev = f64::INFINITY;
        for k in 0..points {
            let t = lo * (hi / lo).powf(k as f64 / (points - 1) as f64);
            let v = self.phi(t);
            if v.is_nan() || v < 0.0 {
                bail!(InvalidLaw, "phi({t}) = {v} is not a nonnegative number");
            }
            if f.nonincreasing && v > prev * (1.0 + 1e-12) {
                bail!(InvalidLaw, "phi increases near t = {t}");
            }
            prev = v;
        }
        Ok(())
    }
}

impl fmt::Display for RadialLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: String = match &self.kind {
            LawKind::Power { a } => format!("t^-{a}"),
            LawKind::PowerExp => "t^-2 exp(1/t)".into(),
            LawKind::Gaussian => "exp(-t^2)".into(),
            LawKind::Table { t, .. } => format!("table[{}]", t.len()),
        };
        if self.scale == 1.0 {
            f.write_str(&body)
        } else {
            write!(f, "{} * {}", self.scale, body)
        }
    }
}

fn build_steps(t: &[f64], phi: &[f64]) -> Result<Steps> {
    if t.is_empty() || t.len() != phi.len() {
        bail!(InvalidLaw, "table needs equally many knots and values (got {} and {})", t.len(), phi.len());
    }
    if t.iter().any(|x| !x.is_finite() || *x < 0.0) {
        bail!(InvalidLaw, "table knots must be finite and nonnegative");
    }
    if t.windows(2).any(|w| w[1] <= w[0]) {
        bail!(InvalidLaw, "table knots must increase strictly");
    }
    if phi.iter().any(|v| !v.is_finite() || *v < 0.0) {
        bail!(InvalidLaw, "table values must be finite and nonnegative");
    }
    if phi.iter().all(|v| *v == 0.0) {
        bail!(InvalidLaw, "table law vanishes identically");
    }
    let mut xs = Vec::with_capacity(t.len() + 1);
    let mut vals = Vec::with_capacity(t.len() + 1);
    if t[0] > 0.0 {
        xs.push(0.0);
        vals.push(phi[0]);
    }
    xs.extend_from_slice(t);
    vals.extend_from_slice(phi);
    let mut head = Vec::with_capacity(xs.len());
    head.push(0.0);
    for k in 1..xs.len() {
        head.push(head[k - 1] + vals[k - 1] * (xs[k] - xs[k - 1]));
    }
    Ok(Steps { xs, vals, head })
}

impl Steps {
    fn piece(&self, t: f64) -> usize {
        self.xs.partition_point(|&x| x <= t).saturating_sub(1)
    }

    fn total(&self) -> f64 {
        if *self.vals.last().unwrap() > 0.0 {
            f64::INFINITY
        } else {
            *self.head.last().unwrap()
        }
    }

    fn head_at(&self, t: f64) -> f64 {
        if t == f64::INFINITY {
            return self.total();
        }
        let k = self.piece(t);
        self.head[k] + self.vals[k] * (t - self.xs[k])
    }

    /// Smallest `t` with `head(t) >= y`, for `0 <= y < total`.
    fn head_inv(&self, y: f64) -> f64 {
        let k = self.head.partition_point(|&h| h < y);
        if k == 0 {
            return 0.0;
        }
        // y lies in (head[k-1], head[k]] or beyond the last knot
        let j = k - 1;
        if self.vals[j] == 0.0 {
            return self.xs[k.min(self.xs.len() - 1)];
        }
        self.xs[j] + (y - self.head[j]) / self.vals[j]
    }
}
