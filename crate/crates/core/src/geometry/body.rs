use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::grid::{DirectionGrid, GridKind};
use super::shape::{ConvexShape, StarShape};
use crate::error::{bail, Result};
use crate::linalg::{dot, norm, scale, Vec3};

/// Anything described by a radial function sampled on a direction grid.
pub trait Radial {
    fn grid(&self) -> &Arc<DirectionGrid>;

    /// Radial function at the grid directions.
    fn samples(&self) -> &[f64];

    /// Radial function at an arbitrary unit direction: exact when a shape
    /// descriptor is attached, interpolated otherwise.
    fn radial_at(&self, u: &Vec3) -> f64;

    /// Gauge `|x| / rho(x / |x|)`.
    fn gauge(&self, x: &Vec3) -> f64 {
        let r = norm(x);
        if r == 0.0 {
            return 0.0;
        }
        let rho = self.radial_at(&scale(x, 1.0 / r));
        if rho == 0.0 {
            f64::INFINITY
        } else {
            r / rho
        }
    }
}

/// Gauge of `x` with respect to a body.
pub fn gauge<K: Radial + ?Sized>(k: &K, x: &Vec3) -> f64 {
    k.gauge(x)
}

fn sample_shape(grid: &DirectionGrid, shape: &StarShape) -> Vec<f64> {
    grid.directions().iter().map(|u| shape.radial(u)).collect()
}

/// Derivative of a planar radial function at grid node `i` by periodic central
/// differences. Only meaningful on uniform circle grids.
fn central_difference(rho: &[f64], i: usize) -> f64 {
    let n = rho.len();
    let h = core::f64::consts::TAU / n as f64;
    (rho[(i + 1) % n] - rho[(i + n - 1) % n]) / (2.0 * h)
}

/// A star body: the origin is interior and `rho > 0` is finite everywhere.
#[derive(Clone, Debug)]
pub struct StarBody {
    grid: Arc<DirectionGrid>,
    rho: Vec<f64>,
    shape: Option<StarShape>,
}

impl StarBody {
    pub fn from_samples(grid: Arc<DirectionGrid>, rho: Vec<f64>) -> Result<Self> {
        if rho.len() != grid.len() {
            bail!(GridMismatch, "{} radial samples for a grid of {}", rho.len(), grid.len());
        }
        if let Some(bad) = rho.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            bail!(InvalidBody, "radial function must be positive and finite, found {bad}");
        }
        Ok(StarBody { grid, rho, shape: None })
    }

    pub fn from_shape(grid: Arc<DirectionGrid>, shape: StarShape) -> Result<Self> {
        if shape.dim() != grid.dim() {
            bail!(GridMismatch, "shape of dimension {} on a grid of dimension {}", shape.dim(), grid.dim());
        }
        if let StarShape::Convex(c) = &shape {
            if !c.origin_interior() {
                bail!(InvalidBody, "star bodies need the origin in the interior");
            }
        }
        let rho = sample_shape(&grid, &shape);
        let mut body = Self::from_samples(grid, rho)?;
        body.shape = Some(shape);
        Ok(body)
    }

    pub fn from_convex(grid: Arc<DirectionGrid>, shape: ConvexShape) -> Result<Self> {
        Self::from_shape(grid, StarShape::Convex(shape))
    }

    pub fn from_fn<F: Fn(&Vec3) -> f64>(grid: Arc<DirectionGrid>, f: F) -> Result<Self> {
        let rho = grid.directions().iter().map(f).collect();
        Self::from_samples(grid, rho)
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn shape(&self) -> Option<&StarShape> {
        self.shape.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn scaled(&self, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            bail!(InvalidInput, "dilation factor must be positive, got {t}");
        }
        Ok(StarBody {
            grid: self.grid.clone(),
            rho: self.rho.iter().map(|r| r * t).collect(),
            shape: self.shape.as_ref().map(|s| s.scaled(t)).transpose()?,
        })
    }

    /// The same body on another grid; needs a shape descriptor unless the grids agree.
    pub fn on_grid(&self, grid: &Arc<DirectionGrid>) -> Result<Self> {
        if **grid == *self.grid {
            return Ok(self.clone());
        }
        match &self.shape {
            Some(s) => Self::from_shape(grid.clone(), s.clone()),
            None => Err(crate::Error::GridMismatch("sampled body cannot be moved to another grid".into())),
        }
    }

    pub fn contains(&self, x: &Vec3) -> bool {
        match &self.shape {
            Some(s) => s.contains(x),
            None => self.gauge(x) < 1.0,
        }
    }

    /// `d rho / d theta` at grid node `i` (planar bodies).
    pub fn radial_derivative(&self, i: usize) -> f64 {
        match &self.shape {
            Some(s) => s.radial_and_derivative(self.grid.angle(i)).1,
            None => central_difference(&self.rho, i),
        }
    }

    pub fn max_radius(&self) -> f64 {
        self.rho.iter().copied().fold(0.0, f64::max)
    }

    pub fn min_radius(&self) -> f64 {
        self.rho.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Upper bound on `|x|` over the body, valid off the grid too.
    pub fn extent(&self) -> f64 {
        match &self.shape {
            Some(StarShape::Convex(c)) => {
                let mut m: f64 = 0.0;
                for d in self.grid.directions() {
                    m = m.max(c.support(d));
                }
                m * 1.01
            }
            Some(StarShape::Fourier(f)) => {
                if f.log {
                    let s: f64 = f.cos.iter().chain(&f.sin).map(|c| c.abs()).sum();
                    (f.a0 + s).exp()
                } else {
                    f.a0.abs() + f.cos.iter().chain(&f.sin).map(|c| c.abs()).sum::<f64>()
                }
            }
            None => self.max_radius() * 1.05,
        }
    }
}

impl Radial for StarBody {
    fn grid(&self) -> &Arc<DirectionGrid> {
        &self.grid
    }
    fn samples(&self) -> &[f64] {
        &self.rho
    }
    fn radial_at(&self, u: &Vec3) -> f64 {
        match &self.shape {
            Some(s) => s.radial(u),
            None => self.grid.stencil(u).apply(&self.rho),
        }
    }
}

/// A compact convex set with support and radial functions on a grid. The
/// radial function may vanish when the origin sits on the boundary.
#[derive(Clone, Debug)]
pub struct ConvexBody {
    grid: Arc<DirectionGrid>,
    support: Vec<f64>,
    rho: Vec<f64>,
    shape: Option<ConvexShape>,
}

impl ConvexBody {
    pub fn from_shape(grid: Arc<DirectionGrid>, shape: ConvexShape) -> Result<Self> {
        if shape.dim() != grid.dim() {
            bail!(GridMismatch, "shape of dimension {} on a grid of dimension {}", shape.dim(), grid.dim());
        }
        let support = grid.directions().iter().map(|u| shape.support(u)).collect();
        let rho = grid.directions().iter().map(|u| shape.radial(u)).collect();
        Ok(ConvexBody { grid, support, rho, shape: Some(shape) })
    }

    /// A body known only through its support function. The radial function is
    /// recovered from `rho(u) = min_j h(u_j) / <u, u_j>` over `<u, u_j> > 0`.
    pub fn from_support(grid: Arc<DirectionGrid>, support: Vec<f64>) -> Result<Self> {
        if support.len() != grid.len() {
            bail!(GridMismatch, "{} support samples for a grid of {}", support.len(), grid.len());
        }
        if support.iter().any(|h| !h.is_finite()) {
            bail!(InvalidBody, "support function must be finite");
        }
        let dirs = grid.directions();
        let rho = dirs
            .iter()
            .map(|u| {
                let mut best = f64::INFINITY;
                for (j, v) in dirs.iter().enumerate() {
                    let c = dot(u, v);
                    if c > 1e-12 {
                        best = best.min(support[j].max(0.0) / c);
                    }
                }
                best
            })
            .collect();
        Ok(ConvexBody { grid, support, rho, shape: None })
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn shape(&self) -> Option<&ConvexShape> {
        self.shape.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    /// Support function at any vector.
    pub fn support_at(&self, u: &Vec3) -> f64 {
        match &self.shape {
            Some(s) => s.support(u),
            None => {
                let r = norm(u);
                if r == 0.0 {
                    return 0.0;
                }
                r * self.grid.stencil(&scale(u, 1.0 / r)).apply(&self.support)
            }
        }
    }

    pub fn as_star(&self) -> Result<StarBody> {
        match &self.shape {
            Some(s) => StarBody::from_convex(self.grid.clone(), s.clone()),
            None => StarBody::from_samples(self.grid.clone(), self.rho.clone()),
        }
    }

    pub fn scaled(&self, t: f64) -> Result<Self> {
        match &self.shape {
            Some(s) => Self::from_shape(self.grid.clone(), s.scaled(t)?),
            None => {
                if !(t > 0.0 && t.is_finite()) {
                    bail!(InvalidInput, "dilation factor must be positive, got {t}");
                }
                Ok(ConvexBody {
                    grid: self.grid.clone(),
                    support: self.support.iter().map(|h| h * t).collect(),
                    rho: self.rho.iter().map(|r| r * t).collect(),
                    shape: None,
                })
            }
        }
    }

    pub fn on_grid(&self, grid: &Arc<DirectionGrid>) -> Result<Self> {
        if **grid == *self.grid {
            return Ok(self.clone());
        }
        match &self.shape {
            Some(s) => Self::from_shape(grid.clone(), s.clone()),
            None => Err(crate::Error::GridMismatch("sampled body cannot be moved to another grid".into())),
        }
    }

    pub fn contains(&self, x: &Vec3) -> bool {
        match &self.shape {
            Some(s) => s.contains(x),
            None => self.gauge(x) < 1.0,
        }
    }

    /// Whether `h(u) = h(-u)` up to `tol` relative to the mean width.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        let w: f64 = self.support.iter().map(|h| h.abs()).sum::<f64>() / self.support.len() as f64;
        self.grid.directions().iter().all(|u| {
            let m = scale(u, -1.0);
            (self.support_at(u) - self.support_at(&m)).abs() <= tol * w.max(1e-300)
        })
    }
}

impl Radial for ConvexBody {
    fn grid(&self) -> &Arc<DirectionGrid> {
        &self.grid
    }
    fn samples(&self) -> &[f64] {
        &self.rho
    }
    fn radial_at(&self, u: &Vec3) -> f64 {
        match &self.shape {
            Some(s) => s.radial(u),
            None => self.grid.stencil(u).apply(&self.rho),
        }
    }
}

/// The complement `{ r theta : r >= rho(theta) }` of a star body. Directions
/// with `rho = inf` contribute nothing.
#[derive(Clone, Debug)]
pub struct CoStar {
    grid: Arc<DirectionGrid>,
    rho: Vec<f64>,
    shape: Option<StarShape>,
}

impl CoStar {
    pub fn from_star(inner: &StarBody) -> Self {
        CoStar { grid: inner.grid.clone(), rho: inner.rho.clone(), shape: inner.shape.clone() }
    }

    pub fn from_samples(grid: Arc<DirectionGrid>, rho: Vec<f64>) -> Result<Self> {
        if rho.len() != grid.len() {
            bail!(GridMismatch, "{} radial samples for a grid of {}", rho.len(), grid.len());
        }
        if let Some(bad) = rho.iter().find(|r| !(**r > 0.0)) {
            bail!(InvalidBody, "co-star radial function must be positive, found {bad}");
        }
        Ok(CoStar { grid, rho, shape: None })
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn shape(&self) -> Option<&StarShape> {
        self.shape.as_ref()
    }

    /// The star body whose complement this is, when `rho` is finite.
    pub fn inner(&self) -> Result<StarBody> {
        let mut b = StarBody::from_samples(self.grid.clone(), self.rho.clone())?;
        b.shape = self.shape.clone();
        Ok(b)
    }

    pub fn scaled(&self, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            bail!(InvalidInput, "dilation factor must be positive, got {t}");
        }
        Ok(CoStar {
            grid: self.grid.clone(),
            rho: self.rho.iter().map(|r| r * t).collect(),
            shape: self.shape.as_ref().map(|s| s.scaled(t)).transpose()?,
        })
    }

    pub fn on_grid(&self, grid: &Arc<DirectionGrid>) -> Result<Self> {
        if **grid == *self.grid {
            return Ok(self.clone());
        }
        match &self.shape {
            Some(s) => Ok(CoStar::from_star(&StarBody::from_shape(grid.clone(), s.clone())?)),
            None => Err(crate::Error::GridMismatch("sampled co-star cannot be moved to another grid".into())),
        }
    }

    pub fn contains(&self, x: &Vec3) -> bool {
        let r = norm(x);
        r > 0.0 && r >= self.radial_at(&scale(x, 1.0 / r))
    }
}

impl Radial for CoStar {
    fn grid(&self) -> &Arc<DirectionGrid> {
        &self.grid
    }
    fn samples(&self) -> &[f64] {
        &self.rho
    }
    fn radial_at(&self, u: &Vec3) -> f64 {
        match &self.shape {
            Some(s) => s.radial(u),
            None => self.grid.stencil(u).apply(&self.rho),
        }
    }
}

/// `lambda A + (1 - lambda) B` for convex bodies on a common grid. Support
/// functions add; exact descriptors are combined when both are present.
pub fn minkowski_sum(a: &ConvexBody, b: &ConvexBody, lambda: f64) -> Result<ConvexBody> {
    a.grid.ensure_same(&b.grid)?;
    if !(0.0..=1.0).contains(&lambda) {
        bail!(InvalidInput, "lambda must lie in [0, 1], got {lambda}");
    }
    match (&a.shape, &b.shape) {
        (Some(sa), Some(sb)) => {
            let s = sa.combine(lambda, sb, 1.0 - lambda)?;
            let mut body = ConvexBody::from_shape(a.grid.clone(), s)?;
            // keep the sampled support exactly additive
            for (i, h) in body.support.iter_mut().enumerate() {
                *h = lambda * a.support[i] + (1.0 - lambda) * b.support[i];
            }
            Ok(body)
        }
        _ => {
            let h = a.support.iter().zip(&b.support).map(|(x, y)| lambda * x + (1.0 - lambda) * y).collect();
            ConvexBody::from_support(a.grid.clone(), h)
        }
    }
}

/// Radial sum `rho_A + rho_B`, always contained in the Minkowski sum.
pub fn radial_sum(a: &StarBody, b: &StarBody) -> Result<StarBody> {
    a.grid.ensure_same(&b.grid)?;
    let rho = a.rho.iter().zip(&b.rho).map(|(x, y)| x + y).collect();
    StarBody::from_samples(a.grid.clone(), rho)
}

fn direction_angle(d: [f64; 2]) -> f64 {
    let t = d[1].atan2(d[0]);
    if t < 0.0 {
        t + core::f64::consts::TAU
    } else {
        t
    }
}

/// Pairs `(edge k of p, vertex l of q)` whose edge direction lies in the
/// turning range of `q` at vertex `l`, padded against rounding. Every
/// boundary point of `p + q` lies on one of these segments or on the
/// symmetric ones with the roles swapped.
fn convolution_pairs(p: &[[f64; 2]], q: &[[f64; 2]]) -> Vec<(usize, usize)> {
    use core::f64::consts::{PI, TAU};
    const PAD: f64 = 1e-8;
    let n = p.len();
    let m = q.len();
    let mut edges: Vec<(f64, usize)> = (0..n)
        .map(|k| {
            let (a, b) = (p[k], p[(k + 1) % n]);
            (direction_angle([b[0] - a[0], b[1] - a[1]]), k)
        })
        .collect();
    edges.sort_by(|x, y| x.0.total_cmp(&y.0));
    let q_dir: Vec<f64> = (0..m)
        .map(|l| {
            let (a, b) = (q[l], q[(l + 1) % m]);
            direction_angle([b[0] - a[0], b[1] - a[1]])
        })
        .collect();
    let mut out = Vec::new();
    let push_range = |lo: f64, hi: f64, l: usize, out: &mut Vec<(usize, usize)>| {
        let i0 = edges.partition_point(|e| e.0 < lo);
        let i1 = edges.partition_point(|e| e.0 <= hi);
        out.extend(edges[i0..i1].iter().map(|e| (e.1, l)));
    };
    for l in 0..m {
        let b_in = q_dir[(l + m - 1) % m];
        let b_out = q_dir[l];
        let mut turn = b_out - b_in;
        if turn > PI {
            turn -= TAU;
        } else if turn <= -PI {
            turn += TAU;
        }
        if turn.abs() >= PI - PAD {
            push_range(f64::NEG_INFINITY, f64::INFINITY, l, &mut out);
            continue;
        }
        let (lo, hi) = if turn >= 0.0 { (b_in - PAD, b_in + turn + PAD) } else { (b_in + turn - PAD, b_in + PAD) };
        // the arc may wrap around 0
        let lo = if lo < 0.0 { lo + TAU } else { lo };
        let hi = if hi >= TAU { hi - TAU } else { hi };
        if lo <= hi {
            push_range(lo, hi, l, &mut out);
        } else {
            push_range(lo, TAU, l, &mut out);
            push_range(0.0, hi, l, &mut out);
        }
    }
    out
}

/// `wa A + wb B` for planar star bodies, evaluated at the grid directions.
///
/// Both bodies are replaced by star polygons with vertices on the grid rays.
/// The boundary of a Minkowski sum of polygons lies on the segments
/// `edge + vertex`, all of which belong to the sum, and the sum of star-shaped
/// sets is star-shaped, so its radial function is the farthest hit of each ray
/// with those segments. Only the pairs of the polygon convolution are
/// visited, which already contain the boundary. Vertex sums on a common ray
/// make the result dominate the radial sum exactly.
pub fn star_minkowski(a: &StarBody, b: &StarBody, wa: f64, wb: f64) -> Result<StarBody> {
    a.grid.ensure_same(&b.grid)?;
    let grid = a.grid.clone();
    if grid.dim() != 2 {
        return Err(crate::Error::UnsupportedDimension(grid.dim()));
    }
    if !(wa > 0.0 && wb > 0.0) {
        bail!(InvalidInput, "Minkowski weights must be positive");
    }
    let order = grid.angular_order();
    let n = order.len();
    let ang: Vec<f64> = order.iter().map(|&i| grid.angle(i)).collect();
    let pa: Vec<[f64; 2]> = order
        .iter()
        .map(|&i| {
            let u = grid.direction(i);
            [wa * a.rho[i] * u[0], wa * a.rho[i] * u[1]]
        })
        .collect();
    let pb: Vec<[f64; 2]> = order
        .iter()
        .map(|&i| {
            let u = grid.direction(i);
            [wb * b.rho[i] * u[0], wb * b.rho[i] * u[1]]
        })
        .collect();
    let mut best: Vec<f64> = order.iter().map(|&i| wa * a.rho[i] + wb * b.rho[i]).collect();
    let r_lo = best.iter().copied().fold(f64::INFINITY, f64::min);
    let r2 = r_lo * r_lo;
    let uniform = grid.kind() == GridKind::Circle;
    let step = core::f64::consts::TAU / n as f64;
    let dirs: Vec<[f64; 2]> = order.iter().map(|&i| [grid.direction(i)[0], grid.direction(i)[1]]).collect();

    let hit = |p0: [f64; 2], p1: [f64; 2], best: &mut [f64]| {
        let d = [p1[0] - p0[0], p1[1] - p0[1]];
        let num = p0[0] * d[1] - p0[1] * d[0];
        let orient = p0[0] * p1[1] - p0[1] * p1[0];
        let (s, e) = if orient >= 0.0 { (p0, p1) } else { (p1, p0) };
        let mut t0 = s[1].atan2(s[0]);
        if t0 < 0.0 {
            t0 += core::f64::consts::TAU;
        }
        let mut t1 = e[1].atan2(e[0]);
        if t1 < t0 {
            t1 += core::f64::consts::TAU;
        }
        let first = if uniform {
            (t0 / step - 1e-9).ceil().max(0.0) as usize
        } else {
            ang.partition_point(|x| *x < t0 - 1e-15)
        };
        let mut k = first;
        loop {
            let (idx, theta) = if k < n { (k, ang[k]) } else { (k - n, ang[k - n] + core::f64::consts::TAU) };
            if theta > t1 + 1e-15 || k >= 2 * n {
                break;
            }
            let u = dirs[idx];
            let den = u[0] * d[1] - u[1] * d[0];
            let r = if den.abs() > 1e-300 {
                num / den
            } else {
                (s[0] * u[0] + s[1] * u[1]).max(e[0] * u[0] + e[1] * u[1])
            };
            if r > best[idx] {
                best[idx] = r;
            }
            k += 1;
        }
    };

    for (p, q) in [(&pa, &pb), (&pb, &pa)] {
        for (k, l) in convolution_pairs(p, q) {
            let (e0, e1, v) = (p[k], p[(k + 1) % n], q[l]);
            let p0 = [e0[0] + v[0], e0[1] + v[1]];
            let p1 = [e1[0] + v[0], e1[1] + v[1]];
            if p0[0] * p0[0] + p0[1] * p0[1] > r2 || p1[0] * p1[0] + p1[1] * p1[1] > r2 {
                hit(p0, p1, &mut best);
            }
        }
    }
    let mut rho = vec![0.0; n];
    for (k, &i) in order.iter().enumerate() {
        rho[i] = best[k];
    }
    StarBody::from_samples(grid, rho)
}
