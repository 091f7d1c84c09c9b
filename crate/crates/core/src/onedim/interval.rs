//! Finite unions of half-open intervals in `[0, inf)`.

use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use super::RadialLaw;
use crate::error::{bail, Error, Result};

/// Sorted, disjoint, non-touching intervals `[a_i, b_i)` with `0 <= a_i < b_i <= inf`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct IntervalUnion {
    parts: Vec<(f64, f64)>,
}

impl TryFrom<Vec<(f64, f64)>> for IntervalUnion {
    type Error = Error;
    fn try_from(v: Vec<(f64, f64)>) -> Result<Self> {
        IntervalUnion::new(v)
    }
}

impl From<IntervalUnion> for Vec<(f64, f64)> {
    fn from(u: IntervalUnion) -> Self {
        u.parts
    }
}

impl IntervalUnion {
    /// Normalises arbitrary intervals: empty ones are dropped, overlapping or
    /// touching ones are merged.
    pub fn new(mut parts: Vec<(f64, f64)>) -> Result<Self> {
        for &(a, b) in &parts {
            if a.is_nan() || b.is_nan() || a < 0.0 || a == f64::INFINITY || b < a {
                bail!(InvalidInput, "bad interval [{a}, {b})");
            }
        }
        parts.retain(|p| p.1 > p.0);
        parts.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(parts.len());
        for (a, b) in parts {
            match out.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => out.push((a, b)),
            }
        }
        Ok(IntervalUnion { parts: out })
    }

    pub fn empty() -> Self {
        IntervalUnion::default()
    }

    /// `[a, b)`.
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::new(alloc::vec![(a, b)])
    }

    /// `[a, inf)`.
    pub fn halfline(a: f64) -> Result<Self> {
        Self::interval(a, f64::INFINITY)
    }

    pub fn parts(&self) -> &[(f64, f64)] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Empty, or a single component reaching infinity.
    pub fn is_halfline(&self) -> bool {
        match self.parts.as_slice() {
            [] => true,
            [(_, b)] => *b == f64::INFINITY,
            _ => false,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let k = self.parts.partition_point(|p| p.0 <= x);
        k > 0 && x < self.parts[k - 1].1
    }

    /// `[0, inf)` minus the union.
    pub fn complement(&self) -> Self {
        let mut out = Vec::with_capacity(self.parts.len() + 1);
        let mut cursor = 0.0;
        for &(a, b) in &self.parts {
            if a > cursor {
                out.push((cursor, a));
            }
            cursor = b;
        }
        if cursor < f64::INFINITY {
            out.push((cursor, f64::INFINITY));
        }
        IntervalUnion { parts: out }
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut all = self.parts.clone();
        all.extend_from_slice(&other.parts);
        Self::new(all).expect("components of valid unions")
    }

    /// `self + [0, s]`: every component grows by `s` to the right.
    pub fn dilate(&self, s: f64) -> Self {
        debug_assert!(s >= 0.0);
        Self::new(self.parts.iter().map(|&(a, b)| (a, b + s)).collect()).expect("dilation of a valid union")
    }

    /// Minkowski combination `lambda * self + (1 - lambda) * other`.
    pub fn combine(&self, other: &Self, lambda: f64) -> Self {
        let mu = 1.0 - lambda;
        let mut all = Vec::with_capacity(self.len() * other.len());
        for &(a, b) in &self.parts {
            for &(c, d) in &other.parts {
                all.push((lambda * a + mu * c, lambda * b + mu * d));
            }
        }
        Self::new(all).expect("combination of valid unions")
    }

    /// Mass under the law, possibly infinite.
    pub fn mass(&self, law: &RadialLaw) -> f64 {
        self.parts.iter().map(|&(a, b)| law.interval_mass(a, b)).sum()
    }

    /// Lebesgue length, possibly infinite.
    pub fn length(&self) -> f64 {
        self.parts.iter().map(|&(a, b)| b - a).sum()
    }
}

impl fmt::Display for IntervalUnion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return f.write_str("{}");
        }
        for (k, (a, b)) in self.parts.iter().enumerate() {
            if k > 0 {
                f.write_str(" u ")?;
            }
            write!(f, "[{a}, {b})")?;
        }
        Ok(())
    }
}
