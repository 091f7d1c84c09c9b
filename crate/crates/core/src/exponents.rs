//! Concavity exponents, the dimensional duality `1/q = 1/p + n`, and weighted
//! power means on the extended half-line.

use core::ops::{Add, Mul};

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};

/// Finite exponents closer to zero than this are treated as the geometric case.
pub const ZERO_SNAP: f64 = 1e-12;

/// An exponent on the extended line with explicit tags for the degenerate cases.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Exponent {
    NegInf,
    Zero,
    Finite(f64),
    PosInf,
}

impl Exponent {
    /// Tags an `f64`, snapping tiny magnitudes to [`Exponent::Zero`].
    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() {
            bail!(InvalidExponent, "NaN exponent");
        }
        Ok(if p == f64::INFINITY {
            Exponent::PosInf
        } else if p == f64::NEG_INFINITY {
            Exponent::NegInf
        } else if p.abs() < ZERO_SNAP {
            Exponent::Zero
        } else {
            Exponent::Finite(p)
        })
    }

    pub fn value(self) -> f64 {
        match self {
            Exponent::NegInf => f64::NEG_INFINITY,
            Exponent::Zero => 0.0,
            Exponent::Finite(p) => p,
            Exponent::PosInf => f64::INFINITY,
        }
    }

    /// `1/p` with `1/(+-inf) = 0`. The geometric case has no finite reciprocal.
    pub fn recip(self) -> Option<f64> {
        match self {
            Exponent::NegInf | Exponent::PosInf => Some(0.0),
            Exponent::Zero => None,
            Exponent::Finite(p) => Some(1.0 / p),
        }
    }

    pub fn is_negative(self) -> bool {
        matches!(self, Exponent::NegInf) || matches!(self, Exponent::Finite(p) if p < 0.0)
    }

    pub fn is_positive(self) -> bool {
        matches!(self, Exponent::PosInf) || matches!(self, Exponent::Finite(p) if p > 0.0)
    }
}

/// Dual exponent for concavity of densities: a `p`-concave density on `R^n`
/// yields a `q`-concave measure with `1/q = 1/p + n`.
///
/// The geometric case maps to itself and `1/p + n = 0` maps to `NegInf`.
pub fn dual_exponent(p: Exponent, n: usize) -> Exponent {
    let Some(rp) = p.recip() else {
        return Exponent::Zero;
    };
    let s = rp + n as f64;
    if s.abs() < ZERO_SNAP {
        return Exponent::NegInf;
    }
    Exponent::new(1.0 / s).unwrap_or(Exponent::NegInf)
}

/// Dual exponent under homogeneous semantics, where the measure scales like
/// `mu(tA) = t^{1/q} mu(A)`. Only `p` in `(-1/n, 0)` or `(0, inf]` is admissible.
pub fn homogeneous_dual(p: Exponent, n: usize) -> Result<Exponent> {
    if n == 0 {
        bail!(InvalidExponent, "dimension must be positive");
    }
    match p {
        Exponent::Zero => bail!(InvalidExponent, "p = 0 has no homogeneous dual (q would be 0)"),
        Exponent::NegInf => bail!(InvalidExponent, "p = -inf is not homogeneous"),
        Exponent::Finite(v) if v < 0.0 && v * n as f64 <= -1.0 + ZERO_SNAP => {
            bail!(InvalidExponent, "p = {v} must exceed -1/n = {}", -1.0 / n as f64)
        }
        _ => Ok(dual_exponent(p, n)),
    }
}

/// A value in `[0, inf]` with the measure-theoretic convention `0 * inf = 0`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct ExtNonneg(f64);

impl ExtNonneg {
    pub const ZERO: ExtNonneg = ExtNonneg(0.0);
    pub const INFINITY: ExtNonneg = ExtNonneg(f64::INFINITY);

    pub fn new(v: f64) -> Result<Self> {
        if v.is_nan() || v < 0.0 {
            bail!(InvalidInput, "extended nonnegative value required, got {v}");
        }
        Ok(ExtNonneg(v))
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    pub fn power_mean(self, other: ExtNonneg, lambda: f64, p: Exponent) -> ExtNonneg {
        ExtNonneg(power_mean(self.0, other.0, lambda, p))
    }
}

impl Add for ExtNonneg {
    type Output = ExtNonneg;
    fn add(self, rhs: ExtNonneg) -> ExtNonneg {
        ExtNonneg(self.0 + rhs.0)
    }
}

impl Mul for ExtNonneg {
    type Output = ExtNonneg;
    fn mul(self, rhs: ExtNonneg) -> ExtNonneg {
        if self.0 == 0.0 || rhs.0 == 0.0 {
            ExtNonneg(0.0)
        } else {
            ExtNonneg(self.0 * rhs.0)
        }
    }
}

/// Weighted power mean `(lambda a^p + (1 - lambda) b^p)^{1/p}` of `a, b` in
/// `[0, inf]`, extended by max, min and the geometric mean at `p = inf, -inf, 0`.
///
/// For `p <= 0` a zero argument forces the result to zero. Positive finite
/// arguments are combined in log space, and the result is clamped into
/// `[min(a, b), max(a, b)]`.
pub fn power_mean(a: f64, b: f64, lambda: f64, p: Exponent) -> f64 {
    debug_assert!(a >= 0.0 && b >= 0.0, "power_mean needs nonnegative inputs");
    debug_assert!((0.0..=1.0).contains(&lambda));
    if lambda == 1.0 || a == b {
        return a;
    }
    if lambda == 0.0 {
        return b;
    }
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let p = match p {
        Exponent::PosInf => return hi,
        Exponent::NegInf => return lo,
        Exponent::Zero => {
            if lo == 0.0 {
                return 0.0;
            }
            if hi == f64::INFINITY {
                return f64::INFINITY;
            }
            let v = (lambda * a.ln() + (1.0 - lambda) * b.ln()).exp();
            return v.clamp(lo, hi);
        }
        Exponent::Finite(p) => p,
    };
    if p < 0.0 {
        if lo == 0.0 {
            return 0.0;
        }
        // an infinite argument contributes inf^p = 0
        if a == f64::INFINITY {
            return ((1.0 - lambda).powf(1.0 / p) * b).clamp(lo, hi);
        }
        if b == f64::INFINITY {
            return (lambda.powf(1.0 / p) * a).clamp(lo, hi);
        }
    } else {
        if hi == f64::INFINITY {
            return f64::INFINITY;
        }
        if a == 0.0 {
            return ((1.0 - lambda).powf(1.0 / p) * b).clamp(lo, hi);
        }
        if b == 0.0 {
            return (lambda.powf(1.0 / p) * a).clamp(lo, hi);
        }
    }
    // lambda a^p + (1 - lambda) b^p = c^p (1 + w expm1(y)) with y <= 0, which
    // keeps full precision as p -> 0
    let (la, lb) = (a.ln(), b.ln());
    let (lc, ld, w) = if p * (lb - la) <= 0.0 { (la, lb, 1.0 - lambda) } else { (lb, la, lambda) };
    let y = p * (ld - lc);
    (lc + (w * y.exp_m1()).ln_1p() / p).exp().clamp(lo, hi)
}
