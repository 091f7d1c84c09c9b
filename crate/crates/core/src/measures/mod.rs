//! Measures given by polar disintegration, their masses on star bodies and
//! co-stars, and anisotropic boundary measures.

mod angular;
mod disintegrated;

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

pub use angular::AngularWeight;
pub use disintegrated::{eta_from_slab_mass, DisintegratedMeasure};

use crate::error::{bail, Result};
use crate::geometry::{CoStar, ConvexBody, ConvexShape, DirectionGrid, Radial, StarBody, StarShape};
use crate::linalg::Vec3;
use crate::numeric::integrate;
use crate::oracle::{self, OracleSettings};
use crate::report::{IneqReport, Orientation};

/// A Borel measure on `R^n` that can be evaluated on sets described over a direction grid.
pub trait SetMeasure {
    fn grid(&self) -> &Arc<DirectionGrid>;

    fn dim(&self) -> usize {
        self.grid().dim()
    }

    /// `mu(A)` for a star body.
    fn star_mass(&self, a: &StarBody) -> Result<f64>;

    /// `mu(C)` for a co-star `C = R^n \ A`.
    fn costar_mass(&self, c: &CoStar) -> Result<f64>;

    /// `mu(K)` for a convex body, which may touch the origin.
    fn convex_mass(&self, k: &ConvexBody) -> Result<f64>;

    /// `mu(R^n \ K)`.
    fn convex_complement_mass(&self, k: &ConvexBody) -> Result<f64>;

    /// Density with respect to Lebesgue measure.
    fn density(&self, x: &Vec3) -> f64;

    /// `q` with `mu(tA) = t^{1/q} mu(A)`, when the measure is homogeneous.
    fn homogeneity(&self) -> Option<f64>;

    /// `d/dt mu(tK)`, the boundary measure of `tK` with respect to `K`.
    fn boundary_homothet(&self, k: &ConvexBody, t: f64) -> Result<f64>;

    /// Planar boundary integral `int w(rho u) h_K(+-N) d theta` with
    /// `N = rho u - rho' u_perp`; `outward` selects `+N`.
    fn boundary_star(&self, rho: &[f64], drho: &[f64], k: &ConvexBody, outward: bool) -> Result<f64>;

    fn describe(&self) -> String;
}

/// Positive combination of disintegrated measures on one grid.
#[derive(Clone, Debug)]
pub struct MixtureMeasure {
    parts: Vec<(f64, DisintegratedMeasure)>,
}

impl MixtureMeasure {
    pub fn new(parts: Vec<(f64, DisintegratedMeasure)>) -> Result<Self> {
        let Some((_, first)) = parts.first() else {
            bail!(InvalidInput, "empty mixture");
        };
        for (c, m) in &parts {
            if !(*c >= 0.0 && c.is_finite()) {
                bail!(InvalidInput, "mixture weights must be nonnegative");
            }
            m.grid().ensure_same(first.grid())?;
        }
        Ok(MixtureMeasure { parts })
    }

    pub fn parts(&self) -> &[(f64, DisintegratedMeasure)] {
        &self.parts
    }

    fn sum<F: Fn(&DisintegratedMeasure) -> Result<f64>>(&self, f: F) -> Result<f64> {
        let mut s = 0.0;
        for (c, m) in &self.parts {
            if *c > 0.0 {
                s += c * f(m)?;
            }
        }
        Ok(s)
    }
}

impl SetMeasure for MixtureMeasure {
    fn grid(&self) -> &Arc<DirectionGrid> {
        self.parts[0].1.grid()
    }
    fn star_mass(&self, a: &StarBody) -> Result<f64> {
        self.sum(|m| m.star_mass(a))
    }
    fn costar_mass(&self, c: &CoStar) -> Result<f64> {
        self.sum(|m| m.costar_mass(c))
    }
    fn convex_mass(&self, k: &ConvexBody) -> Result<f64> {
        self.sum(|m| m.convex_mass(k))
    }
    fn convex_complement_mass(&self, k: &ConvexBody) -> Result<f64> {
        self.sum(|m| m.convex_complement_mass(k))
    }
    fn density(&self, x: &Vec3) -> f64 {
        self.parts.iter().filter(|p| p.0 > 0.0).map(|(c, m)| c * m.density(x)).sum()
    }
    fn homogeneity(&self) -> Option<f64> {
        let q = self.parts[0].1.homogeneity()?;
        self.parts.iter().all(|p| p.1.homogeneity() == Some(q)).then_some(q)
    }
    fn boundary_homothet(&self, k: &ConvexBody, t: f64) -> Result<f64> {
        self.sum(|m| m.boundary_homothet(k, t))
    }
    fn boundary_star(&self, rho: &[f64], drho: &[f64], k: &ConvexBody, outward: bool) -> Result<f64> {
        self.sum(|m| m.boundary_star(rho, drho, k, outward))
    }
    fn describe(&self) -> String {
        let names: Vec<String> = self.parts.iter().map(|(c, m)| format!("{c}*{}", m.describe())).collect();
        names.join(" + ")
    }
}

/// Pushforward `T_* mu` of a planar disintegrated measure under an invertible linear map.
#[derive(Clone, Debug)]
pub struct LinearImage {
    mapped: DisintegratedMeasure,
    original: DisintegratedMeasure,
    inverse: [[f64; 2]; 2],
    abs_det: f64,
}

impl LinearImage {
    pub(crate) fn new(mapped: DisintegratedMeasure, original: DisintegratedMeasure, inverse: [[f64; 2]; 2], abs_det: f64) -> Self {
        LinearImage { mapped, original, inverse, abs_det }
    }

    /// The image written as a disintegrated measure on the mapped direction grid.
    pub fn disintegrated(&self) -> &DisintegratedMeasure {
        &self.mapped
    }

    pub fn original(&self) -> &DisintegratedMeasure {
        &self.original
    }

    /// `T^{-1} K` on the original grid when `K` is a polygon, so that masses of
    /// polygonal sets are computed exactly through the original measure.
    fn preimage(&self, shape: Option<&ConvexShape>) -> Option<ConvexBody> {
        let p = shape?.linear_image(&self.inverse).ok()?;
        ConvexBody::from_shape(self.original.grid().clone(), p).ok()
    }

    fn preimage_star(&self, shape: Option<&StarShape>) -> Option<ConvexBody> {
        match shape? {
            StarShape::Convex(c) => self.preimage(Some(c)),
            StarShape::Fourier(_) => None,
        }
    }
}

impl SetMeasure for LinearImage {
    fn grid(&self) -> &Arc<DirectionGrid> {
        self.mapped.grid()
    }
    fn star_mass(&self, a: &StarBody) -> Result<f64> {
        match self.preimage_star(a.shape()) {
            Some(k) => self.original.convex_mass(&k),
            None => self.mapped.star_mass(a),
        }
    }
    fn costar_mass(&self, c: &CoStar) -> Result<f64> {
        match self.preimage_star(c.shape()) {
            Some(k) => self.original.convex_complement_mass(&k),
            None => self.mapped.costar_mass(c),
        }
    }
    fn convex_mass(&self, k: &ConvexBody) -> Result<f64> {
        match self.preimage(k.shape()) {
            Some(p) => self.original.convex_mass(&p),
            None => self.mapped.convex_mass(k),
        }
    }
    fn convex_complement_mass(&self, k: &ConvexBody) -> Result<f64> {
        match self.preimage(k.shape()) {
            Some(p) => self.original.convex_complement_mass(&p),
            None => self.mapped.convex_complement_mass(k),
        }
    }
    fn density(&self, x: &Vec3) -> f64 {
        let m = &self.inverse;
        let y = [m[0][0] * x[0] + m[0][1] * x[1], m[1][0] * x[0] + m[1][1] * x[1], 0.0];
        self.original.density(&y) / self.abs_det
    }
    fn homogeneity(&self) -> Option<f64> {
        self.mapped.homogeneity()
    }
    fn boundary_homothet(&self, k: &ConvexBody, t: f64) -> Result<f64> {
        self.mapped.boundary_homothet(k, t)
    }
    fn boundary_star(&self, rho: &[f64], drho: &[f64], k: &ConvexBody, outward: bool) -> Result<f64> {
        self.mapped.boundary_star(rho, drho, k, outward)
    }
    fn describe(&self) -> String {
        self.mapped.describe()
    }
}

/// A set whose boundary measure is requested.
#[derive(Clone, Copy, Debug)]
pub enum Region<'a> {
    Star(&'a StarBody),
    CoStar(&'a CoStar),
    Convex(&'a ConvexBody),
}

impl<'a> Region<'a> {
    fn samples(&self) -> &[f64] {
        match self {
            Region::Star(s) => s.samples(),
            Region::CoStar(c) => c.samples(),
            Region::Convex(k) => k.samples(),
        }
    }

    fn grid(&self) -> &Arc<DirectionGrid> {
        match self {
            Region::Star(s) => s.grid(),
            Region::CoStar(c) => c.grid(),
            Region::Convex(k) => k.grid(),
        }
    }

    /// Vertices of a polygonal bounded part, for polygon mode.
    fn polygon(&self) -> Option<Vec<[f64; 2]>> {
        match self {
            Region::Convex(k) => k.shape()?.polygon_vertices(),
            Region::Star(s) => match s.shape()? {
                StarShape::Convex(c) => c.polygon_vertices(),
                _ => None,
            },
            Region::CoStar(c) => match c.shape()? {
                StarShape::Convex(c) => c.polygon_vertices(),
                _ => None,
            },
        }
    }

    fn is_complement(&self) -> bool {
        matches!(self, Region::CoStar(_))
    }
}

/// Which one-sided boundary measure: `Outer` is `mu^+_K(S)`, `Inner` is
/// `mu^+_K(R^n \ S)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Inner,
    Outer,
}

/// How a boundary measure is evaluated.
#[derive(Clone, Debug, PartialEq)]
pub enum BoundaryMode {
    /// Exact for homothets of `K`, polygon quadrature for planar polygons, the
    /// star-boundary integral otherwise.
    Auto,
    Exact,
    Polygon,
    Star,
    Voxel(OracleSettings),
}

/// A boundary measure and how it was obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryEstimate {
    pub value: f64,
    pub mode: String,
    /// Fit residual of the voxel estimate.
    pub residual: Option<f64>,
    /// Set when the numeric limit did not settle.
    pub flagged: bool,
}

impl BoundaryEstimate {
    fn exact(value: f64, mode: &str) -> Self {
        BoundaryEstimate { value, mode: mode.into(), residual: None, flagged: false }
    }
}

/// Ratio `t` with `rho_S = t rho_K` on every grid direction, if any.
pub fn homothety_ratio(rho: &[f64], k: &ConvexBody, rel: f64) -> Option<f64> {
    let rk = k.rho();
    if rk.iter().any(|r| *r <= 0.0) || rho.iter().any(|r| !r.is_finite()) {
        return None;
    }
    let t = rho[0] / rk[0];
    rho.iter().zip(rk).all(|(a, b)| (a - t * b).abs() <= rel * a.abs()).then_some(t)
}

/// Boundary measure of a region with respect to a convex body `K`.
pub fn boundary_measure<M: SetMeasure + ?Sized>(
    mu: &M,
    region: Region<'_>,
    k: &ConvexBody,
    side: Side,
    mode: BoundaryMode,
) -> Result<BoundaryEstimate> {
    mu.grid().ensure_same(region.grid())?;
    mu.grid().ensure_same(k.grid())?;
    let n = mu.dim();
    // the bounded star part, with the outward side of that part
    let outward = match (region.is_complement(), side) {
        (false, Side::Outer) | (true, Side::Inner) => true,
        _ => false,
    };
    let mode = match mode {
        BoundaryMode::Auto => {
            if homothety_ratio(region.samples(), k, 1e-12).is_some() {
                BoundaryMode::Exact
            } else if n == 2 && region.polygon().is_some() {
                BoundaryMode::Polygon
            } else if n <= 2 {
                BoundaryMode::Star
            } else {
                bail!(Precondition, "boundary of a non-homothet in dimension {n} needs an explicit mode");
            }
        }
        m => m,
    };
    match mode {
        BoundaryMode::Exact => {
            let Some(t) = homothety_ratio(region.samples(), k, 1e-12) else {
                bail!(Precondition, "exact boundary mode needs a homothet of K");
            };
            Ok(BoundaryEstimate::exact(mu.boundary_homothet(k, t)?, "exact"))
        }
        BoundaryMode::Polygon => {
            let Some(v) = region.polygon() else {
                bail!(Precondition, "polygon mode needs a planar polygon");
            };
            Ok(BoundaryEstimate::exact(polygon_boundary(mu, &v, k, outward), "polygon"))
        }
        BoundaryMode::Star => {
            if n > 2 {
                return Err(crate::Error::UnsupportedDimension(n));
            }
            let (rho, drho) = radial_with_derivative(region)?;
            Ok(BoundaryEstimate::exact(mu.boundary_star(&rho, &drho, k, outward)?, "star"))
        }
        BoundaryMode::Voxel(settings) => oracle::region_boundary(mu, region, k, side, &settings),
        BoundaryMode::Auto => unreachable!(),
    }
}

fn radial_with_derivative(region: Region<'_>) -> Result<(Vec<f64>, Vec<f64>)> {
    let star;
    let body = match region {
        Region::Star(s) => s,
        Region::Convex(k) => {
            star = k.as_star()?;
            &star
        }
        Region::CoStar(c) => {
            if c.rho().iter().any(|r| !r.is_finite()) {
                // infinite directions carry no boundary; derivative is irrelevant there
                let d = (0..c.rho().len()).map(|_| 0.0).collect();
                return Ok((c.rho().to_vec(), d));
            }
            star = c.inner()?;
            &star
        }
    };
    let rho = body.rho().to_vec();
    let drho = if body.dim() == 2 { (0..rho.len()).map(|i| body.radial_derivative(i)).collect() } else { alloc::vec![0.0; rho.len()] };
    Ok((rho, drho))
}

/// `int_{dP} w h_K(+-nu) dl` edge by edge with adaptive Gauss-Kronrod.
pub fn polygon_boundary<M: SetMeasure + ?Sized>(mu: &M, v: &[[f64; 2]], k: &ConvexBody, outward: bool) -> f64 {
    let m = v.len();
    let sgn = if outward { 1.0 } else { -1.0 };
    let mut total = 0.0;
    for j in 0..m {
        let a = v[j];
        let b = v[(j + 1) % m];
        let e = [b[0] - a[0], b[1] - a[1]];
        let len = (e[0] * e[0] + e[1] * e[1]).sqrt();
        if len == 0.0 {
            continue;
        }
        let nu = [sgn * e[1] / len, -sgn * e[0] / len, 0.0];
        let h = k.support_at(&nu);
        if h == 0.0 {
            continue;
        }
        let q = integrate(|s| mu.density(&[a[0] + s * e[0], a[1] + s * e[1], 0.0]), 0.0, 1.0, 1e-14, 1e-12);
        total += h * len * q.value;
    }
    total
}

/// Largest relative defect `|mu(lambda A)^q - lambda mu(A)^q| / (lambda mu(A)^q)` over
/// `trials` deterministic probe sets and `lambda` in `{0.5, 2, 3}`.
///
/// Probes are co-stars when complements have finite mass and star bodies otherwise.
pub fn check_homogeneity<M: SetMeasure + ?Sized>(mu: &M, q: f64, trials: usize, tol: f64) -> Result<IneqReport> {
    if q == 0.0 || !q.is_finite() {
        bail!(InvalidExponent, "homogeneity needs a finite nonzero q");
    }
    let grid = mu.grid().clone();
    let mut worst = (0.0, 0.0, 0.0);
    for k in 0..trials.max(1) {
        let probe = probe_star(&grid, k)?;
        let costar = CoStar::from_star(&probe);
        let use_costar = mu.costar_mass(&costar)?.is_finite();
        let mass = |b: &StarBody| -> Result<f64> {
            if use_costar {
                mu.costar_mass(&CoStar::from_star(b))
            } else {
                mu.star_mass(b)
            }
        };
        let base = mass(&probe)?;
        for lambda in [0.5, 2.0, 3.0] {
            let lhs = mass(&probe.scaled(lambda)?)?.powf(q);
            let rhs = lambda * base.powf(q);
            let d = (lhs - rhs).abs() / rhs.abs().max(1e-300);
            if !(d <= worst.0) {
                worst = (d, lhs, rhs);
            }
        }
    }
    Ok(IneqReport::new("homogeneity", worst.1, worst.2, Orientation::Eq, tol)
        .with_witness(format!("mu={} q={q} trials={trials} max_rel_defect={}", mu.describe(), worst.0)))
}

/// Deterministic smooth star bodies `exp(sum c_j cos(j theta + s_j))` with
/// coefficients from a Weyl sequence.
pub fn probe_star(grid: &Arc<DirectionGrid>, k: usize) -> Result<StarBody> {
    let alpha = [0.618_033_988_749_894_8, 0.414_213_562_373_095_1, 0.732_050_807_568_877_2];
    let frac = |x: f64| x - x.floor();
    let c: Vec<f64> = (0..3).map(|j| 0.4 * frac((k + 1) as f64 * alpha[j]) - 0.2).collect();
    let s: Vec<f64> = (0..3).map(|j| 6.0 * frac((k + 7) as f64 * alpha[(j + 1) % 3])).collect();
    let n = grid.dim();
    StarBody::from_fn(grid.clone(), move |u: &Vec3| {
        let e = match n {
            1 => c[0] * u[0],
            2 => {
                let t = crate::linalg::angle_of(u);
                (1..=3).map(|j| c[j - 1] * (j as f64 * t + s[j - 1]).cos()).sum()
            }
            _ => c[0] * u[0] + c[1] * u[1] * u[2] + c[2] * (u[2] * u[2] - 1.0 / 3.0),
        };
        e.exp()
    })
}

/// Boxed measure for heterogeneous collections.
pub type DynMeasure = Box<dyn SetMeasure + Send + Sync>;

#[cfg(test)]
mod tests;
