use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{bail, Result};
use crate::linalg::{angle_of, dot, from_angle, normalize, solve, Vec3};

/// How a grid was generated. Generated grids of equal kind and size coincide.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridKind {
    /// The two atoms `+1, -1` of `S^0`.
    Atoms,
    /// Uniform angles `2 pi i / N` on the circle.
    Circle,
    /// Fibonacci points on `S^2` with equal weights.
    Fibonacci,
    /// Arbitrary directions with arbitrary weights.
    Custom,
}

/// Quadrature nodes and weights on the unit sphere `S^{n-1}`, `n` in `1..=3`.
#[derive(Clone, Debug)]
pub struct DirectionGrid {
    dim: usize,
    kind: GridKind,
    dirs: Vec<Vec3>,
    weights: Vec<f64>,
    // planar grids: direction indices sorted by angle, and those angles
    order: Vec<usize>,
    sorted_angles: Vec<f64>,
}

impl PartialEq for DirectionGrid {
    fn eq(&self, other: &Self) -> bool {
        if self.dim != other.dim || self.kind != other.kind || self.dirs.len() != other.dirs.len() {
            return false;
        }
        match self.kind {
            GridKind::Custom => self.dirs == other.dirs && self.weights == other.weights,
            _ => true,
        }
    }
}

/// Up to three grid indices with interpolation weights summing to one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stencil {
    pub idx: [usize; 3],
    pub w: [f64; 3],
    pub len: usize,
}

impl Stencil {
    fn one(i: usize) -> Self {
        Stencil { idx: [i, 0, 0], w: [1.0, 0.0, 0.0], len: 1 }
    }

    /// Interpolates sampled values. Infinite samples dominate when weighted.
    pub fn apply(&self, values: &[f64]) -> f64 {
        let mut s = 0.0;
        for k in 0..self.len {
            if self.w[k] != 0.0 {
                s += self.w[k] * values[self.idx[k]];
            }
        }
        s
    }
}

impl DirectionGrid {
    /// Generates the standard grid: atoms for `n = 1`, `resolution` uniform
    /// angles for `n = 2`, `resolution` Fibonacci points for `n = 3`.
    pub fn new(dim: usize, resolution: usize) -> Result<Self> {
        match dim {
            1 => Ok(Self::build(1, GridKind::Atoms, alloc::vec![[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]], alloc::vec![1.0, 1.0])),
            2 => {
                if resolution < 8 {
                    bail!(InvalidInput, "circle grid needs at least 8 directions, got {resolution}");
                }
                let w = TAU / resolution as f64;
                let dirs = (0..resolution).map(|i| from_angle(i as f64 * w)).collect();
                Ok(Self::build(2, GridKind::Circle, dirs, alloc::vec![w; resolution]))
            }
            3 => {
                if resolution < 16 {
                    bail!(InvalidInput, "sphere grid needs at least 16 directions, got {resolution}");
                }
                let golden = PI * (3.0 - 5f64.sqrt());
                let n = resolution as f64;
                let dirs = (0..resolution)
                    .map(|i| {
                        let z = 1.0 - (2.0 * i as f64 + 1.0) / n;
                        let r = (1.0 - z * z).max(0.0).sqrt();
                        let phi = golden * i as f64;
                        [r * phi.cos(), r * phi.sin(), z]
                    })
                    .collect();
                Ok(Self::build(3, GridKind::Fibonacci, dirs, alloc::vec![4.0 * PI / n; resolution]))
            }
            d => Err(crate::Error::UnsupportedDimension(d)),
        }
    }

    /// A grid with caller-supplied unit directions and nonnegative weights.
    pub fn custom(dim: usize, dirs: Vec<Vec3>, weights: Vec<f64>) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(crate::Error::UnsupportedDimension(dim));
        }
        if dirs.len() != weights.len() || dirs.is_empty() {
            bail!(InvalidInput, "custom grid needs matching nonempty directions and weights");
        }
        let mut unit = Vec::with_capacity(dirs.len());
        for d in &dirs {
            if d[dim..].iter().any(|c| *c != 0.0) {
                bail!(InvalidInput, "direction {d:?} has coordinates beyond dimension {dim}");
            }
            match normalize(d) {
                Some(u) => unit.push(u),
                None => bail!(InvalidInput, "zero direction in custom grid"),
            }
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            bail!(InvalidInput, "custom grid weights must be finite and nonnegative");
        }
        Ok(Self::build(dim, GridKind::Custom, unit, weights))
    }

    fn build(dim: usize, kind: GridKind, dirs: Vec<Vec3>, weights: Vec<f64>) -> Self {
        let (order, sorted_angles) = if dim == 2 {
            let mut order: Vec<usize> = (0..dirs.len()).collect();
            order.sort_by(|&a, &b| angle_of(&dirs[a]).partial_cmp(&angle_of(&dirs[b])).unwrap());
            let ang = order.iter().map(|&i| angle_of(&dirs[i])).collect();
            (order, ang)
        } else {
            (Vec::new(), Vec::new())
        };
        DirectionGrid { dim, kind, dirs, weights, order, sorted_angles }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    pub fn direction(&self, i: usize) -> &Vec3 {
        &self.dirs[i]
    }

    pub fn directions(&self) -> &[Vec3] {
        &self.dirs
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Angle of direction `i` for planar grids.
    pub fn angle(&self, i: usize) -> f64 {
        match self.kind {
            GridKind::Circle => i as f64 * TAU / self.dirs.len() as f64,
            _ => angle_of(&self.dirs[i]),
        }
    }

    /// Planar direction indices ordered by increasing angle.
    pub fn angular_order(&self) -> &[usize] {
        &self.order
    }

    /// Index shift that realises a rotation by `angle` on a uniform circle grid.
    pub fn rotation_steps(&self, angle: f64) -> Result<usize> {
        if self.kind != GridKind::Circle {
            bail!(InvalidInput, "rotations act by index shifts only on uniform circle grids");
        }
        let n = self.dirs.len() as f64;
        let s = angle / TAU * n;
        if (s - s.round()).abs() > 1e-9 {
            bail!(InvalidInput, "rotation by {angle} is not a multiple of the grid spacing");
        }
        Ok((s.round() as i64).rem_euclid(self.dirs.len() as i64) as usize)
    }

    /// Interpolation stencil for an arbitrary unit direction: linear in angle on
    /// the circle, barycentric over the three nearest nodes on the sphere.
    pub fn stencil(&self, u: &Vec3) -> Stencil {
        match self.dim {
            1 => Stencil::one(if u[0] >= 0.0 { 0 } else { 1 }),
            2 => self.stencil_planar(u),
            _ => self.stencil_sphere(u),
        }
    }

    fn stencil_planar(&self, u: &Vec3) -> Stencil {
        let theta = angle_of(u);
        let n = self.dirs.len();
        if self.kind == GridKind::Circle {
            let x = theta / TAU * n as f64;
            let i = (x.floor() as usize).min(n - 1);
            let t = (x - i as f64).clamp(0.0, 1.0);
            return Stencil { idx: [i, (i + 1) % n, 0], w: [1.0 - t, t, 0.0], len: 2 };
        }
        let k = self.sorted_angles.partition_point(|a| *a <= theta);
        let (lo, hi) = if k == 0 || k == n { (n - 1, 0) } else { (k - 1, k) };
        let a0 = self.sorted_angles[lo];
        let mut a1 = self.sorted_angles[hi];
        let mut th = theta;
        if a1 <= a0 {
            a1 += TAU;
            if th < a0 {
                th += TAU;
            }
        }
        let t = if a1 > a0 { ((th - a0) / (a1 - a0)).clamp(0.0, 1.0) } else { 0.0 };
        Stencil { idx: [self.order[lo], self.order[hi], 0], w: [1.0 - t, t, 0.0], len: 2 }
    }

    fn stencil_sphere(&self, u: &Vec3) -> Stencil {
        let mut best = [(usize::MAX, -2.0f64); 3];
        for (i, d) in self.dirs.iter().enumerate() {
            let c = dot(d, u);
            if c > best[2].1 {
                best[2] = (i, c);
                if best[2].1 > best[1].1 {
                    best.swap(1, 2);
                    if best[1].1 > best[0].1 {
                        best.swap(0, 1);
                    }
                }
            }
        }
        if best[0].1 > 1.0 - 1e-15 {
            return Stencil::one(best[0].0);
        }
        let [a, b, c] = [self.dirs[best[0].0], self.dirs[best[1].0], self.dirs[best[2].0]];
        let m = [[a[0], b[0], c[0]], [a[1], b[1], c[1]], [a[2], b[2], c[2]]];
        if let Some(w) = solve(m, *u) {
            if w.iter().all(|x| *x >= -1e-12) {
                let s: f64 = w.iter().sum();
                return Stencil {
                    idx: [best[0].0, best[1].0, best[2].0],
                    w: [w[0] / s, w[1] / s, w[2] / s],
                    len: 3,
                };
            }
        }
        let mut w = [0.0; 3];
        for k in 0..3 {
            let d = (1.0 - best[k].1).max(1e-300);
            w[k] = 1.0 / d;
        }
        let s: f64 = w.iter().sum();
        Stencil { idx: [best[0].0, best[1].0, best[2].0], w: [w[0] / s, w[1] / s, w[2] / s], len: 3 }
    }

    /// Verifies that two grids are interchangeable.
    pub fn ensure_same(&self, other: &DirectionGrid) -> Result<()> {
        if self != other {
            return Err(crate::Error::GridMismatch(format!(
                "{:?}/{} in dimension {} vs {:?}/{} in dimension {}",
                self.kind,
                self.len(),
                self.dim,
                other.kind,
                other.len(),
                other.dim
            )));
        }
        Ok(())
    }
}
