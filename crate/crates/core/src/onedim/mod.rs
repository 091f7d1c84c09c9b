//! One-dimensional radial laws, interval unions and the half-line inequalities:
//! the isoperimetric bound `mu^-(C) >= b I(mu(C))` and the one-sided
//! complemented inequality for dilations by `[0, b]`.

mod interval;
mod law;

use alloc::format;
use alloc::string::String;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

pub use interval::IntervalUnion;
pub use law::{LawFlags, LawKind, RadialLaw};

use crate::error::{bail, Result};
use crate::report::{IneqReport, Orientation};

/// Relative tolerance for the exact interval-arithmetic checks.
pub const ONEDIM_TOL: f64 = 1e-10;

/// `Phi(t)`.
pub fn phi_tail(law: &RadialLaw, t: f64) -> f64 {
    law.tail(t)
}

/// `Phi^{-1}(x)`.
pub fn phi_inv(law: &RadialLaw, x: f64) -> Result<f64> {
    law.tail_inv(x)
}

/// `I(x) = phi(Phi^{-1}(x))`.
pub fn iso_profile(law: &RadialLaw, x: f64) -> Result<f64> {
    law.iso_profile(x)
}

/// Inner boundary measure of `C` with respect to `[0, b]`: dilating the
/// complement by `eps * b` eats `[t_i, t_i + eps b)` at each left endpoint `t_i > 0`.
pub fn boundary_1d(law: &RadialLaw, c: &IntervalUnion, b: f64) -> f64 {
    debug_assert!(b > 0.0);
    let s: f64 = c.parts().iter().filter(|p| p.0 > 0.0).map(|p| law.phi(p.0)).sum();
    b * s
}

pub(crate) fn hypothesis_warnings(law: &RadialLaw, mut r: IneqReport) -> IneqReport {
    let f = law.flags();
    if !f.nonincreasing {
        r = r.with_warning(format!("law {law} is not nonincreasing"));
    }
    if !f.log_convex {
        r = r.with_warning(format!("law {law} is not log-convex"));
    }
    if !f.origin_nonintegrable {
        r = r.with_warning(format!("law {law} is integrable at the origin"));
    }
    r
}

/// `mu(R+ \ (A + t[0, b])) <= Phi(Phi^{-1}(mu(R+ \ A)) + t Phi^{-1}(mu(R+ \ [0, b])))`.
///
/// Hypothesis violations of the law are attached as warnings.
pub fn ocbm_1d(law: &RadialLaw, a: &IntervalUnion, b: f64, t: f64) -> Result<IneqReport> {
    if !(b > 0.0) || !(t >= 0.0) || !b.is_finite() || !t.is_finite() {
        bail!(InvalidInput, "need b > 0 and t >= 0, got b = {b}, t = {t}");
    }
    if !law.flags().tail_integrable {
        bail!(Precondition, "law {law} has an infinite tail");
    }
    let m = a.complement().mass(law);
    if !m.is_finite() {
        bail!(Precondition, "complement of {a} has infinite mass");
    }
    let lhs = a.dilate(t * b).complement().mass(law);
    let step = law.tail_inv(law.tail(b))?;
    let rhs = law.tail(law.tail_inv(m)? + t * step);
    let r = IneqReport::new("ocbm_1d", lhs, rhs, Orientation::Le, ONEDIM_TOL)
        .with_witness(format!("law={law} A={a} b={b} t={t}"));
    Ok(hypothesis_warnings(law, r))
}

/// One-dimensional isoperimetric check `mu^-_{[0,b]}(C) >= b I(mu(C))`.
pub fn iso_1d(law: &RadialLaw, c: &IntervalUnion, b: f64) -> Result<IneqReport> {
    let m = c.mass(law);
    if !m.is_finite() {
        bail!(Precondition, "{c} has infinite mass");
    }
    let lhs = boundary_1d(law, c, b);
    let rhs = b * law.iso_profile(m)?;
    let r = IneqReport::new("iso_1d", lhs, rhs, Orientation::Ge, ONEDIM_TOL)
        .with_witness(format!("law={law} C={c} b={b}"));
    Ok(hypothesis_warnings(law, r))
}

/// Geometric sampling grid `lo * (hi/lo)^{k/(points-1)}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeomGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl GeomGrid {
    pub fn new(lo: f64, hi: f64, points: usize) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && hi.is_finite() && points >= 3) {
            bail!(InvalidInput, "geometric grid needs 0 < lo < hi < inf and >= 3 points");
        }
        Ok(GeomGrid { lo, hi, points })
    }

    pub fn at(&self, k: usize) -> f64 {
        if k + 1 == self.points {
            return self.hi;
        }
        self.lo * (self.hi / self.lo).powf(k as f64 / (self.points - 1) as f64)
    }
}

impl Default for GeomGrid {
    fn default() -> Self {
        GeomGrid { lo: 1e-6, hi: 1e6, points: 1000 }
    }
}

/// Outcome of [`check_logconvex`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogConvexReport {
    pub pass: bool,
    pub strict: bool,
    /// Smallest `((L(s) + L(u))/2 - L((s+u)/2)) / max(1, |L|)` over neighbouring triples.
    pub min_defect: f64,
    pub worst_t: f64,
}

/// Midpoint convexity of `log phi` in `t` on a geometric grid: for each pair of
/// grid points two steps apart, compares the chord with the value at the arithmetic midpoint.
pub fn check_logconvex(law: &RadialLaw, grid: &GeomGrid) -> LogConvexReport {
    let mut min_defect = f64::INFINITY;
    let mut worst_t = f64::NAN;
    for k in 1..grid.points - 1 {
        let s = grid.at(k - 1);
        let u = grid.at(k + 1);
        let mid = 0.5 * (s + u);
        let (ls, lu, lm) = (law.log_phi(s), law.log_phi(u), law.log_phi(mid));
        let chord = 0.5 * (ls + lu);
        let d = if lm == f64::NEG_INFINITY {
            0.0
        } else if chord == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            (chord - lm) / 1f64.max(ls.abs()).max(lu.abs())
        };
        if d < min_defect {
            min_defect = d;
            worst_t = mid;
        }
    }
    LogConvexReport { pass: min_defect >= -1e-12, strict: min_defect > 0.0, min_defect, worst_t }
}

/// Outcome of [`check_f_concavity`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FConcavityReport {
    pub pass: bool,
    /// Smallest `(F((x+y)/2) - (F(x)+F(y))/2) / max F` on the grid.
    pub min_concavity_defect: f64,
    /// Largest relative gap between a finite difference of `I` and `-(log phi)' o Phi^{-1}`;
    /// absent for step laws.
    pub max_identity_error: Option<f64>,
}

/// Tolerance for the derivative identity of the profile.
pub const IDENTITY_TOL: f64 = 1e-6;

/// Concavity of `F(x) = Phi(Phi^{-1}(x) + t0)` on a geometric grid of masses `x`,
/// plus the derivative identity `I'(x) = -(log phi)'(Phi^{-1}(x))`.
pub fn check_f_concavity(law: &RadialLaw, t0: f64, xs: &GeomGrid) -> Result<FConcavityReport> {
    if !(t0 > 0.0) {
        bail!(InvalidInput, "t0 must be positive, got {t0}");
    }
    if xs.hi > law.total() {
        bail!(InvalidInput, "mass grid reaches beyond the total mass {}", law.total());
    }
    let f = |x: f64| -> Result<f64> { Ok(law.tail(law.tail_inv(x)? + t0)) };
    let mut fmax: f64 = 0.0;
    let mut defects = alloc::vec::Vec::with_capacity(xs.points);
    for k in 1..xs.points - 1 {
        let (x, y) = (xs.at(k - 1), xs.at(k + 1));
        let (fx, fy, fm) = (f(x)?, f(y)?, f(0.5 * (x + y))?);
        fmax = fmax.max(fx).max(fy);
        defects.push(fm - 0.5 * (fx + fy));
    }
    let scale = fmax.max(f64::MIN_POSITIVE);
    let min_concavity_defect = defects.iter().fold(f64::INFINITY, |m, d| m.min(d / scale));
    let max_identity_error = match law.kind() {
        LawKind::Table { .. } => None,
        _ => {
            let mut worst: f64 = 0.0;
            for k in 0..xs.points {
                let x = xs.at(k);
                let h = 1e-4 * x;
                let fd = (law.iso_profile(x + h)? - law.iso_profile(x - h)?) / (2.0 * h);
                let formula = -law.dlog_phi(law.tail_inv(x)?);
                worst = worst.max((fd - formula).abs() / formula.abs().max(f64::MIN_POSITIVE));
            }
            Some(worst)
        }
    };
    let pass = min_concavity_defect >= -1e-9 && max_identity_error.map_or(true, |e| e <= IDENTITY_TOL);
    Ok(FConcavityReport { pass, min_concavity_defect, max_identity_error })
}

/// Equality-case diagnosis for the half-line isoperimetric bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EqualityShape {
    pub is_halfline: bool,
    /// Mass of `C` outside its unbounded component (all of it if there is none).
    pub offending_mass: f64,
    pub boundary: f64,
    pub profile: f64,
    pub equality: bool,
    /// `equality => is_halfline`.
    pub consistent: bool,
}

/// Whether `C` is a half-line up to mass `1e-9`, and whether `C` attains the
/// isoperimetric bound within `1e-9`.
pub fn equality_shape_1d(law: &RadialLaw, c: &IntervalUnion, b: f64) -> Result<EqualityShape> {
    let mass = c.mass(law);
    if !mass.is_finite() {
        bail!(Precondition, "{c} has infinite mass");
    }
    let boundary = boundary_1d(law, c, b);
    let profile = b * law.iso_profile(mass)?;
    let offending_mass: f64 = match c.parts().last() {
        Some(&(_, e)) if e == f64::INFINITY => {
            c.parts()[..c.len() - 1].iter().map(|&(a, e)| law.interval_mass(a, e)).sum()
        }
        _ => mass,
    };
    let tol = 1e-9;
    let is_halfline = c.is_empty() || (offending_mass <= tol * mass.max(1.0) && c.parts().last().unwrap().1.is_infinite());
    let equality = (boundary - profile).abs() <= tol * boundary.max(profile).max(1e-12);
    Ok(EqualityShape { is_halfline, offending_mass, boundary, profile, equality, consistent: !equality || is_halfline })
}

/// Short human-readable summary of a law's flags.
pub fn describe_flags(law: &RadialLaw) -> String {
    let f = law.flags();
    format!(
        "nonincreasing={} origin_nonintegrable={} tail_integrable={} log_convex={} strict={}",
        f.nonincreasing, f.origin_nonintegrable, f.tail_integrable, f.log_convex, f.strictly_log_convex
    )
}
