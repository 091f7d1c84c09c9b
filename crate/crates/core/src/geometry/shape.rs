//! Exact shape descriptors.
//!
//! A [`ConvexShape`] is a core (point, axis box or convex polygon) dilated by a
//! ball of radius `r`. The family is closed under dilations, translations and
//! Minkowski combinations, which is what lets sums of discs, boxes and polygons
//! stay exact.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::linalg::{cross2, dot, from_angle, norm, normalize, scale, sub, Vec3, ORIGIN};
use crate::numeric::bisect;

/// The undilated part of a [`ConvexShape`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Core {
    Point(Vec3),
    Box { lo: Vec3, hi: Vec3 },
    /// Counter-clockwise vertices of a convex polygon in the plane.
    Polygon(Vec<[f64; 2]>),
}

/// `core + radius * B^n`, a compact convex set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexShape {
    dim: usize,
    core: Core,
    radius: f64,
}

fn check_dim(dim: usize) -> Result<()> {
    if !(1..=3).contains(&dim) {
        return Err(crate::Error::UnsupportedDimension(dim));
    }
    Ok(())
}

fn pad(v: &[f64]) -> Vec3 {
    let mut out = ORIGIN;
    out[..v.len()].copy_from_slice(v);
    out
}

/// Drops repeated and collinear vertices of a counter-clockwise chain.
fn simplify(mut v: Vec<[f64; 2]>, scale_hint: f64) -> Vec<[f64; 2]> {
    let tol = 1e-14 * scale_hint.max(1e-300);
    v.dedup_by(|a, b| (a[0] - b[0]).abs() <= tol && (a[1] - b[1]).abs() <= tol);
    while v.len() > 1 {
        let (a, b) = (v[0], v[v.len() - 1]);
        if (a[0] - b[0]).abs() <= tol && (a[1] - b[1]).abs() <= tol {
            v.pop();
        } else {
            break;
        }
    }
    let mut changed = true;
    while changed && v.len() > 2 {
        changed = false;
        let n = v.len();
        for i in 0..n {
            let p = v[(i + n - 1) % n];
            let c = v[i];
            let q = v[(i + 1) % n];
            let e1 = [c[0] - p[0], c[1] - p[1], 0.0];
            let e2 = [q[0] - c[0], q[1] - c[1], 0.0];
            let cr = cross2(&e1, &e2);
            if cr.abs() <= 1e-13 * norm(&e1) * norm(&e2) && dot(&e1, &e2) >= 0.0 {
                v.remove(i);
                changed = true;
                break;
            }
        }
    }
    v
}

pub(crate) fn polygon_area(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    let mut s = 0.0;
    for i in 0..n {
        let a = v[i];
        let b = v[(i + 1) % n];
        s += a[0] * b[1] - a[1] * b[0];
    }
    0.5 * s
}

fn polygon_perimeter(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    (0..n)
        .map(|i| {
            let a = v[i];
            let b = v[(i + 1) % n];
            ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
        })
        .sum()
}

fn bottom_index(v: &[[f64; 2]]) -> usize {
    let mut k = 0;
    for (i, p) in v.iter().enumerate() {
        if p[1] < v[k][1] || (p[1] == v[k][1] && p[0] < v[k][0]) {
            k = i;
        }
    }
    k
}

/// Minkowski sum of two convex counter-clockwise chains by edge merging.
fn merge_polygons(p: &[[f64; 2]], q: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let (n, m) = (p.len(), q.len());
    let (i0, j0) = (bottom_index(p), bottom_index(q));
    let pv = |i: usize| p[(i0 + i) % n];
    let qv = |j: usize| q[(j0 + j) % m];
    let mut out = Vec::with_capacity(n + m);
    let (mut i, mut j) = (0, 0);
    while i < n || j < m {
        let a = pv(i);
        let b = qv(j);
        out.push([a[0] + b[0], a[1] + b[1]]);
        let e1 = { let c = pv(i + 1); [c[0] - a[0], c[1] - a[1], 0.0] };
        let e2 = { let c = qv(j + 1); [c[0] - b[0], c[1] - b[1], 0.0] };
        let c = if i < n && j < m { cross2(&e1, &e2) } else { 0.0 };
        if j == m || (i < n && c > 0.0) {
            i += 1;
        } else if i == n || c < 0.0 {
            j += 1;
        } else {
            i += 1;
            j += 1;
        }
    }
    out
}

impl ConvexShape {
    pub fn ball(dim: usize, center: Vec3, r: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(r > 0.0 && r.is_finite()) {
            bail!(InvalidBody, "ball radius must be positive and finite, got {r}");
        }
        Ok(ConvexShape { dim, core: Core::Point(center), radius: r })
    }

    /// The centred disc of radius `r`.
    pub fn disc(r: f64) -> Result<Self> {
        Self::ball(2, ORIGIN, r)
    }

    /// The axis-parallel box `[lo, hi]`; its dimension is `lo.len()`.
    pub fn boxed(lo: &[f64], hi: &[f64]) -> Result<Self> {
        let dim = lo.len();
        check_dim(dim)?;
        if hi.len() != dim {
            bail!(InvalidBody, "box corners have different dimensions");
        }
        if lo.iter().zip(hi).any(|(a, b)| !(a <= b) || !a.is_finite() || !b.is_finite()) {
            bail!(InvalidBody, "box needs finite corners with lo <= hi");
        }
        Ok(ConvexShape { dim, core: Core::Box { lo: pad(lo), hi: pad(hi) }, radius: 0.0 })
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::boxed(&[lo], &[hi])
    }

    /// A convex polygon. Clockwise input is reversed; collinear vertices are dropped.
    pub fn polygon(vertices: &[[f64; 2]]) -> Result<Self> {
        if vertices.iter().flatten().any(|c| !c.is_finite()) {
            bail!(InvalidBody, "polygon vertices must be finite");
        }
        let mut v = vertices.to_vec();
        if polygon_area(&v) < 0.0 {
            v.reverse();
        }
        let scale_hint = v.iter().flatten().fold(0.0f64, |m, c| m.max(c.abs()));
        let v = simplify(v, scale_hint);
        if v.len() < 3 || polygon_area(&v) <= 0.0 {
            bail!(InvalidBody, "polygon must have three non-collinear vertices");
        }
        let n = v.len();
        for i in 0..n {
            let a = v[i];
            let b = v[(i + 1) % n];
            let c = v[(i + 2) % n];
            let e1 = [b[0] - a[0], b[1] - a[1], 0.0];
            let e2 = [c[0] - b[0], c[1] - b[1], 0.0];
            if cross2(&e1, &e2) < -1e-12 * norm(&e1) * norm(&e2) {
                return Err(crate::Error::NonConvex("polygon has a reflex vertex".into()));
            }
        }
        let mut turn = 0.0;
        for i in 0..n {
            let a = v[i];
            let b = v[(i + 1) % n];
            let c = v[(i + 2) % n];
            let t1 = (b[1] - a[1]).atan2(b[0] - a[0]);
            let t2 = (c[1] - b[1]).atan2(c[0] - b[0]);
            let mut d = t2 - t1;
            while d <= -PI {
                d += 2.0 * PI;
            }
            while d > PI {
                d -= 2.0 * PI;
            }
            turn += d;
        }
        if (turn - 2.0 * PI).abs() > 1e-6 {
            return Err(crate::Error::NonConvex("polygon winds more than once".into()));
        }
        Ok(ConvexShape { dim: 2, core: Core::Polygon(v), radius: 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn core(&self) -> &Core {
        &self.core
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Vertices of a planar polygonal shape (polygon or box without rounding).
    pub fn polygon_vertices(&self) -> Option<Vec<[f64; 2]>> {
        if self.dim != 2 || self.radius != 0.0 {
            return None;
        }
        match &self.core {
            Core::Polygon(v) => Some(v.clone()),
            Core::Box { lo, hi } => Some(alloc::vec![[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]]),
            Core::Point(_) => None,
        }
    }

    fn core_as_polygon(&self) -> Option<Vec<[f64; 2]>> {
        match &self.core {
            Core::Polygon(v) => Some(v.clone()),
            Core::Box { lo, hi } if self.dim == 2 => {
                Some(alloc::vec![[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]])
            }
            _ => None,
        }
    }

    /// Faces of a polytope core as (outward unit normal, offset).
    fn faces(&self) -> Vec<(Vec3, f64)> {
        match &self.core {
            Core::Point(_) => Vec::new(),
            Core::Box { lo, hi } => {
                let mut f = Vec::with_capacity(2 * self.dim);
                for i in 0..self.dim {
                    let mut e = ORIGIN;
                    e[i] = 1.0;
                    f.push((e, hi[i]));
                    e[i] = -1.0;
                    f.push((e, -lo[i]));
                }
                f
            }
            Core::Polygon(v) => {
                let n = v.len();
                (0..n)
                    .map(|i| {
                        let a = v[i];
                        let b = v[(i + 1) % n];
                        let nn = normalize(&[b[1] - a[1], a[0] - b[0], 0.0]).unwrap_or(ORIGIN);
                        (nn, nn[0] * a[0] + nn[1] * a[1])
                    })
                    .collect()
            }
        }
    }

    /// Support function `h(u) = max_{x in K} <x, u>` for any vector `u`.
    pub fn support(&self, u: &Vec3) -> f64 {
        let core = match &self.core {
            Core::Point(c) => dot(c, u),
            Core::Box { lo, hi } => (0..self.dim).map(|i| (lo[i] * u[i]).max(hi[i] * u[i])).sum(),
            Core::Polygon(v) => v.iter().map(|p| p[0] * u[0] + p[1] * u[1]).fold(f64::NEG_INFINITY, f64::max),
        };
        core + self.radius * norm(u)
    }

    fn core_signed_distance(&self, x: &Vec3) -> f64 {
        match &self.core {
            Core::Point(c) => norm(&sub(x, c)),
            Core::Box { lo, hi } => {
                let mut outside = 0.0;
                let mut inside = f64::NEG_INFINITY;
                for i in 0..self.dim {
                    let c = 0.5 * (lo[i] + hi[i]);
                    let h = 0.5 * (hi[i] - lo[i]);
                    let q = (x[i] - c).abs() - h;
                    if q > 0.0 {
                        outside += q * q;
                    }
                    inside = inside.max(q);
                }
                if outside > 0.0 {
                    outside.sqrt()
                } else {
                    inside
                }
            }
            Core::Polygon(v) => {
                let faces = self.faces();
                let m = faces.iter().map(|(nn, b)| dot(nn, x) - b).fold(f64::NEG_INFINITY, f64::max);
                if m <= 0.0 {
                    return m;
                }
                let n = v.len();
                let mut best = f64::INFINITY;
                for i in 0..n {
                    let a = [v[i][0], v[i][1], 0.0];
                    let b = [v[(i + 1) % n][0], v[(i + 1) % n][1], 0.0];
                    let e = sub(&b, &a);
                    let t = (dot(&sub(x, &a), &e) / dot(&e, &e)).clamp(0.0, 1.0);
                    let p = [a[0] + t * e[0], a[1] + t * e[1], 0.0];
                    best = best.min(norm(&sub(x, &p)));
                }
                best
            }
        }
    }

    /// Signed Euclidean distance to the boundary, negative inside.
    pub fn signed_distance(&self, x: &Vec3) -> f64 {
        self.core_signed_distance(x) - self.radius
    }

    /// Membership in the interior.
    pub fn contains(&self, x: &Vec3) -> bool {
        self.signed_distance(x) < 0.0
    }

    /// Distance from the origin to the boundary along the unit direction `u`,
    /// or zero when the origin is not in the closed set.
    pub fn radial(&self, u: &Vec3) -> f64 {
        let tol = 1e-13 * (1.0 + self.support(u).abs());
        if self.signed_distance(&ORIGIN) > tol {
            return 0.0;
        }
        if self.radius == 0.0 {
            return match &self.core {
                Core::Point(_) => 0.0,
                _ => {
                    let mut s = f64::INFINITY;
                    for (nn, b) in self.faces() {
                        let c = dot(&nn, u);
                        if c > 0.0 {
                            s = s.min(b.max(0.0) / c);
                        }
                    }
                    s
                }
            };
        }
        if let Core::Point(c) = &self.core {
            let uc = dot(u, c);
            let disc = uc * uc - dot(c, c) + self.radius * self.radius;
            if disc < 0.0 {
                return 0.0;
            }
            return (uc + disc.sqrt()).max(0.0);
        }
        let hi = self.support(u).max(0.0);
        if hi == 0.0 {
            return 0.0;
        }
        bisect(|s| self.signed_distance(&scale(u, s)), 0.0, hi, 1e-16)
    }

    /// Lebesgue measure in the shape's own dimension.
    pub fn volume(&self) -> f64 {
        let r = self.radius;
        match self.dim {
            1 => match &self.core {
                Core::Box { lo, hi } => hi[0] - lo[0] + 2.0 * r,
                _ => 2.0 * r,
            },
            2 => {
                let (a, p) = match &self.core {
                    Core::Point(_) => (0.0, 0.0),
                    Core::Box { lo, hi } => {
                        let (w, h) = (hi[0] - lo[0], hi[1] - lo[1]);
                        (w * h, 2.0 * (w + h))
                    }
                    Core::Polygon(v) => (polygon_area(v), polygon_perimeter(v)),
                };
                a + p * r + PI * r * r
            }
            _ => match &self.core {
                Core::Box { lo, hi } => {
                    let (a, b, c) = (hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]);
                    a * b * c + 2.0 * (a * b + b * c + c * a) * r + PI * (a + b + c) * r * r + 4.0 / 3.0 * PI * r * r * r
                }
                _ => 4.0 / 3.0 * PI * r * r * r,
            },
        }
    }

    /// Perimeter of a planar shape.
    pub fn perimeter(&self) -> Option<f64> {
        if self.dim != 2 {
            return None;
        }
        let p = match &self.core {
            Core::Point(_) => 0.0,
            Core::Box { lo, hi } => 2.0 * (hi[0] - lo[0] + hi[1] - lo[1]),
            Core::Polygon(v) => polygon_perimeter(v),
        };
        Some(p + 2.0 * PI * self.radius)
    }

    pub fn scaled(&self, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            bail!(InvalidInput, "dilation factor must be positive, got {t}");
        }
        let core = match &self.core {
            Core::Point(c) => Core::Point(scale(c, t)),
            Core::Box { lo, hi } => Core::Box { lo: scale(lo, t), hi: scale(hi, t) },
            Core::Polygon(v) => Core::Polygon(v.iter().map(|p| [p[0] * t, p[1] * t]).collect()),
        };
        Ok(ConvexShape { dim: self.dim, core, radius: self.radius * t })
    }

    pub fn translated(&self, b: &Vec3) -> Self {
        let core = match &self.core {
            Core::Point(c) => Core::Point(crate::linalg::add(c, b)),
            Core::Box { lo, hi } => Core::Box { lo: crate::linalg::add(lo, b), hi: crate::linalg::add(hi, b) },
            Core::Polygon(v) => Core::Polygon(v.iter().map(|p| [p[0] + b[0], p[1] + b[1]]).collect()),
        };
        ConvexShape { dim: self.dim, core, radius: self.radius }
    }

    /// Image under the planar linear map with rows `m`. Rounded shapes other
    /// than points are not closed under general linear maps and are rejected.
    pub fn linear_image(&self, m: &[[f64; 2]; 2]) -> Result<Self> {
        if self.dim != 2 {
            return Err(crate::Error::UnsupportedDimension(self.dim));
        }
        let ap = |p: [f64; 2]| [m[0][0] * p[0] + m[0][1] * p[1], m[1][0] * p[0] + m[1][1] * p[1]];
        if let Core::Point(c) = &self.core {
            if self.radius == 0.0 {
                let q = ap([c[0], c[1]]);
                return Ok(ConvexShape { dim: 2, core: Core::Point([q[0], q[1], 0.0]), radius: 0.0 });
            }
            bail!(InvalidInput, "the image of a disc is an ellipse, which has no exact descriptor");
        }
        if self.radius != 0.0 {
            bail!(InvalidInput, "rounded shapes have no exact linear image");
        }
        let v: Vec<[f64; 2]> = self.core_as_polygon().unwrap().into_iter().map(ap).collect();
        Self::polygon(&v)
    }

    /// The Minkowski combination `a * self + b * other` with `a, b >= 0`.
    pub fn combine(&self, a: f64, other: &ConvexShape, b: f64) -> Result<Self> {
        if self.dim != other.dim {
            bail!(InvalidInput, "cannot add shapes of dimensions {} and {}", self.dim, other.dim);
        }
        if !(a >= 0.0 && b >= 0.0 && a + b > 0.0) {
            bail!(InvalidInput, "combination weights must be nonnegative, got {a} and {b}");
        }
        if b == 0.0 {
            return self.scaled(a);
        }
        if a == 0.0 {
            return other.scaled(b);
        }
        let x = self.scaled(a)?;
        let y = other.scaled(b)?;
        let radius = x.radius + y.radius;
        let core = match (&x.core, &y.core) {
            (Core::Point(c), _) => y.translated(c).core,
            (_, Core::Point(c)) => x.translated(c).core,
            (Core::Box { lo: l1, hi: h1 }, Core::Box { lo: l2, hi: h2 }) => {
                Core::Box { lo: crate::linalg::add(l1, l2), hi: crate::linalg::add(h1, h2) }
            }
            _ => {
                let p = x.core_as_polygon().expect("planar core");
                let q = y.core_as_polygon().expect("planar core");
                let scale_hint = p.iter().chain(q.iter()).flatten().fold(0.0f64, |m, c| m.max(c.abs()));
                Core::Polygon(simplify(merge_polygons(&p, &q), scale_hint))
            }
        };
        Ok(ConvexShape { dim: self.dim, core, radius })
    }

    /// True when the origin lies in the interior.
    pub fn origin_interior(&self) -> bool {
        self.signed_distance(&ORIGIN) < 0.0
    }
}

/// A planar star body `rho(theta) = s(theta)` or `exp(s(theta))` for a
/// trigonometric polynomial `s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierStar {
    pub a0: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
    #[serde(default)]
    pub log: bool,
}

impl FourierStar {
    pub fn new(a0: f64, cos: Vec<f64>, sin: Vec<f64>, log: bool) -> Result<Self> {
        let f = FourierStar { a0, cos, sin, log };
        if f.a0.is_nan() || f.cos.iter().chain(&f.sin).any(|c| !c.is_finite()) {
            bail!(InvalidBody, "Fourier coefficients must be finite");
        }
        if !log {
            let tail: f64 = f.cos.iter().chain(&f.sin).map(|c| c.abs()).sum();
            if f.a0 - tail <= 0.0 {
                let m = (0..4096)
                    .map(|i| f.eval(i as f64 * core::f64::consts::TAU / 4096.0).0)
                    .fold(f64::INFINITY, f64::min);
                if m <= 0.0 {
                    bail!(InvalidBody, "Fourier radial function is not positive (min {m})");
                }
            }
        }
        Ok(f)
    }

    /// `(rho, rho')` at angle `theta`.
    pub fn eval(&self, theta: f64) -> (f64, f64) {
        let mut s = self.a0;
        let mut ds = 0.0;
        let k_max = self.cos.len().max(self.sin.len());
        for k in 1..=k_max {
            let (sn, cs) = (k as f64 * theta).sin_cos();
            let c = self.cos.get(k - 1).copied().unwrap_or(0.0);
            let d = self.sin.get(k - 1).copied().unwrap_or(0.0);
            s += c * cs + d * sn;
            ds += k as f64 * (d * cs - c * sn);
        }
        if self.log {
            let r = s.exp();
            (r, r * ds)
        } else {
            (s, ds)
        }
    }

    pub fn scaled(&self, t: f64) -> Self {
        if self.log {
            FourierStar { a0: self.a0 + t.ln(), ..self.clone() }
        } else {
            FourierStar {
                a0: self.a0 * t,
                cos: self.cos.iter().map(|c| c * t).collect(),
                sin: self.sin.iter().map(|c| c * t).collect(),
                log: false,
            }
        }
    }
}

/// Exact descriptor of a star body with the origin in its interior.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum StarShape {
    Convex(ConvexShape),
    Fourier(FourierStar),
}

impl StarShape {
    pub fn dim(&self) -> usize {
        match self {
            StarShape::Convex(c) => c.dim(),
            StarShape::Fourier(_) => 2,
        }
    }

    pub fn radial(&self, u: &Vec3) -> f64 {
        match self {
            StarShape::Convex(c) => c.radial(u),
            StarShape::Fourier(f) => f.eval(crate::linalg::angle_of(u)).0,
        }
    }

    /// `(rho, d rho / d theta)` for planar shapes.
    pub fn radial_and_derivative(&self, theta: f64) -> (f64, f64) {
        match self {
            StarShape::Fourier(f) => f.eval(theta),
            StarShape::Convex(c) => {
                let d = 1e-6;
                let r = c.radial(&from_angle(theta));
                let rp = c.radial(&from_angle(theta + d));
                let rm = c.radial(&from_angle(theta - d));
                (r, (rp - rm) / (2.0 * d))
            }
        }
    }

    pub fn scaled(&self, t: f64) -> Result<Self> {
        Ok(match self {
            StarShape::Convex(c) => StarShape::Convex(c.scaled(t)?),
            StarShape::Fourier(f) => StarShape::Fourier(f.scaled(t)),
        })
    }

    pub fn contains(&self, x: &Vec3) -> bool {
        match self {
            StarShape::Convex(c) => c.contains(x),
            StarShape::Fourier(f) => {
                let r = norm(x);
                r == 0.0 || r < f.eval(crate::linalg::angle_of(x)).0
            }
        }
    }
}
