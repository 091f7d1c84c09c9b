//! Voxel brute force in dimensions one and two.
//!
//! Sets are center-sampled on a square lattice and stored as run-length rows.
//! Minkowski sums are exact on the lattice, measures are Riemann sums of the
//! density with the cells around the origin refined, and boundary measures come
//! from dilations by a voxelized `eps K`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::geometry::{ConvexBody, ConvexShape, Radial, StarBody};
use crate::linalg::{angle_of, norm, solve, Vec3, ORIGIN};
use crate::measures::{AngularWeight, BoundaryEstimate, Region, SetMeasure, Side};

/// Lattice parameters for oracle runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleSettings {
    /// Half-width of the square window.
    pub window: f64,
    /// Cell size.
    pub h: f64,
    /// Levels of refinement for cells next to the origin.
    pub refine_depth: u32,
    /// Dilation radii for boundary estimates.
    pub eps: Vec<f64>,
}

impl Default for OracleSettings {
    fn default() -> Self {
        OracleSettings {
            window: 4.0,
            h: 1.0 / 256.0,
            refine_depth: 6,
            eps: (2..=16).map(|k| k as f64 / 128.0).collect(),
        }
    }
}

impl OracleSettings {
    pub fn with_h(mut self, h: f64) -> Self {
        self.h = h;
        self
    }

    pub fn describe(&self) -> String {
        format!("window=[-{w},{w}] h={h}", w = self.window, h = self.h)
    }
}

/// Cell centers `i h` for `|i| <= m` in each coordinate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lattice {
    h: f64,
    m: i32,
    dim: usize,
}

impl Lattice {
    pub fn new(dim: usize, window: f64, h: f64) -> Result<Self> {
        if dim == 0 || dim > 2 {
            return Err(crate::Error::UnsupportedDimension(dim));
        }
        if !(h > 0.0 && h.is_finite() && window > h && window.is_finite()) {
            bail!(InvalidInput, "lattice needs 0 < h < window, got h={h} window={window}");
        }
        let m = (window / h).round();
        if m > 1e5 {
            bail!(InvalidInput, "lattice with {m} cells per half-axis is too large");
        }
        Ok(Lattice { h, m: m as i32, dim })
    }

    pub fn from_settings(dim: usize, s: &OracleSettings) -> Result<Self> {
        Self::new(dim, s.window, s.h)
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Largest cell index.
    pub fn half_cells(&self) -> i32 {
        self.m
    }

    /// Half-width of the box covered by the cells.
    pub fn extent(&self) -> f64 {
        (self.m as f64 + 0.5) * self.h
    }

    pub fn rows(&self) -> usize {
        if self.dim == 1 {
            1
        } else {
            2 * self.m as usize + 1
        }
    }

    fn row_index(&self, r: usize) -> i32 {
        if self.dim == 1 {
            0
        } else {
            r as i32 - self.m
        }
    }

    pub fn center(&self, i: i32, r: usize) -> Vec3 {
        [i as f64 * self.h, self.row_index(r) as f64 * self.h, 0.0]
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }
}

type Runs = Vec<(i32, i32)>;

/// A union of lattice cells. With `outside` set the set also contains
/// everything beyond the window.
#[derive(Clone, Debug, PartialEq)]
pub struct VoxelSet {
    lattice: Lattice,
    rows: Vec<Runs>,
    outside: bool,
}

fn normalize_runs(runs: &mut Runs) {
    runs.sort_unstable();
    let mut out: Runs = Vec::with_capacity(runs.len());
    for &(s, e) in runs.iter() {
        match out.last_mut() {
            Some(last) if s <= last.1 + 1 => last.1 = last.1.max(e),
            _ => out.push((s, e)),
        }
    }
    *runs = out;
}

fn push_run(out: &mut Runs, s: i32, e: i32) {
    match out.last_mut() {
        Some(last) if last.1 + 1 == s => last.1 = e,
        _ => out.push((s, e)),
    }
}

fn inside(runs: &[(i32, i32)], x: i32, k: &mut usize) -> bool {
    while *k < runs.len() && runs[*k].1 < x {
        *k += 1;
    }
    *k < runs.len() && runs[*k].0 <= x
}

/// Cellwise boolean combination of two rows restricted to `[lo, hi]`.
fn combine_rows(a: &[(i32, i32)], b: &[(i32, i32)], lo: i32, hi: i32, op: impl Fn(bool, bool) -> bool) -> Runs {
    let mut pts: Vec<i32> = vec![lo, hi + 1];
    for &(s, e) in a.iter().chain(b) {
        pts.push(s.clamp(lo, hi + 1));
        pts.push((e + 1).clamp(lo, hi + 1));
    }
    pts.sort_unstable();
    pts.dedup();
    let (mut ka, mut kb) = (0, 0);
    let mut out = Vec::new();
    for w in pts.windows(2) {
        let (s, e) = (w[0], w[1] - 1);
        if op(inside(a, s, &mut ka), inside(b, s, &mut kb)) {
            push_run(&mut out, s, e);
        }
    }
    out
}

impl VoxelSet {
    pub fn empty(lattice: Lattice) -> Self {
        VoxelSet { lattice, rows: vec![Vec::new(); lattice.rows()], outside: false }
    }

    /// Cells whose centers satisfy `pred`.
    pub fn from_predicate(lattice: Lattice, outside: bool, pred: impl Fn(&Vec3) -> bool) -> Self {
        let m = lattice.m;
        let rows = (0..lattice.rows())
            .map(|r| {
                let mut runs = Vec::new();
                for i in -m..=m {
                    if pred(&lattice.center(i, r)) {
                        push_run(&mut runs, i, i);
                    }
                }
                runs
            })
            .collect();
        VoxelSet { lattice, rows, outside }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn rows(&self) -> &[Runs] {
        &self.rows
    }

    pub fn is_unbounded(&self) -> bool {
        self.outside
    }

    pub fn cells(&self) -> u64 {
        self.rows.iter().flatten().map(|(s, e)| (e - s + 1) as u64).sum()
    }

    /// Lebesgue measure of the occupied cells, infinite for unbounded sets.
    pub fn volume(&self) -> f64 {
        if self.outside {
            return f64::INFINITY;
        }
        self.cells() as f64 * self.lattice.cell_volume()
    }

    pub fn contains_cell(&self, i: i32, r: usize) -> bool {
        let mut k = 0;
        inside(&self.rows[r], i, &mut k)
    }

    fn same_lattice(&self, other: &VoxelSet) -> Result<()> {
        if self.lattice != other.lattice {
            bail!(InvalidInput, "voxel sets live on different lattices");
        }
        Ok(())
    }

    fn zip(&self, other: &VoxelSet, op: impl Fn(bool, bool) -> bool + Copy) -> Result<VoxelSet> {
        self.same_lattice(other)?;
        let m = self.lattice.m;
        let rows = self.rows.iter().zip(&other.rows).map(|(a, b)| combine_rows(a, b, -m, m, op)).collect();
        Ok(VoxelSet { lattice: self.lattice, rows, outside: op(self.outside, other.outside) })
    }

    pub fn complement(&self) -> VoxelSet {
        let m = self.lattice.m;
        let rows = self.rows.iter().map(|a| combine_rows(a, &[], -m, m, |x, _| !x)).collect();
        VoxelSet { lattice: self.lattice, rows, outside: !self.outside }
    }

    pub fn union(&self, other: &VoxelSet) -> Result<VoxelSet> {
        self.zip(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &VoxelSet) -> Result<VoxelSet> {
        self.zip(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &VoxelSet) -> Result<VoxelSet> {
        self.zip(other, |a, b| a && !b)
    }

    pub fn is_subset(&self, other: &VoxelSet) -> Result<bool> {
        let d = self.difference(other)?;
        Ok(!d.outside && d.cells() == 0)
    }

    /// Keeps the cells for which `keep(center)` holds.
    pub fn filter(&self, keep: impl Fn(&Vec3) -> bool) -> VoxelSet {
        let rows = self
            .rows
            .iter()
            .enumerate()
            .map(|(r, runs)| {
                let mut out = Vec::new();
                for &(s, e) in runs {
                    for i in s..=e {
                        if keep(&self.lattice.center(i, r)) {
                            push_run(&mut out, i, i);
                        }
                    }
                }
                out
            })
            .collect();
        VoxelSet { lattice: self.lattice, rows, outside: self.outside }
    }

    /// Nearest-cell resampling of `t A`.
    pub fn scaled(&self, t: f64) -> Result<VoxelSet> {
        if !(t > 0.0 && t.is_finite()) {
            bail!(InvalidInput, "scale factor must be positive, got {t}");
        }
        if self.outside {
            bail!(InvalidInput, "unbounded voxel sets cannot be rescaled");
        }
        let l = self.lattice;
        let m = l.m;
        let src = |i: i32| (i as f64 / t).round() as i32;
        let mut out = VoxelSet::empty(l);
        for r in 0..l.rows() {
            let j = src(l.row_index(r));
            if j.abs() > m {
                continue;
            }
            let sr = if l.dim == 1 { 0 } else { (j + m) as usize };
            if self.rows[sr].is_empty() {
                continue;
            }
            let mut runs = Vec::new();
            for i in -m..=m {
                let si = src(i);
                if si.abs() <= m && self.contains_cell(si, sr) {
                    push_run(&mut runs, i, i);
                }
            }
            out.rows[r] = runs;
        }
        if self.touches_border() || (t > 1.0 && out.touches_border()) {
            bail!(WindowTooSmall, "scaled set reaches the window border");
        }
        Ok(out)
    }

    /// Whether any border cell is occupied.
    pub fn touches_border(&self) -> bool {
        let m = self.lattice.m;
        let last = self.rows.len() - 1;
        self.rows.iter().enumerate().any(|(r, runs)| {
            if self.lattice.dim == 2 && (r == 0 || r == last) && !runs.is_empty() {
                return true;
            }
            runs.iter().any(|(s, e)| *s == -m || *e == m)
        })
    }

    /// Binary greymap, occupied cells white, first row at the top.
    pub fn to_pgm(&self) -> Vec<u8> {
        let w = 2 * self.lattice.m as usize + 1;
        let rows = self.lattice.rows();
        let mut out = format!("P5\n{w} {rows}\n255\n").into_bytes();
        for r in (0..rows).rev() {
            let mut line = vec![0u8; w];
            for &(s, e) in &self.rows[r] {
                for i in s..=e {
                    line[(i + self.lattice.m) as usize] = 255;
                }
            }
            out.extend_from_slice(&line);
        }
        out
    }
}

fn check_inside(lattice: &Lattice, extent: f64) -> Result<()> {
    if !(extent.is_finite() && extent < lattice.extent() - lattice.h) {
        bail!(WindowTooSmall, "set of extent {extent} does not fit the window of half-width {}", lattice.extent());
    }
    Ok(())
}

fn lift(x: &Vec3, t: f64) -> Vec3 {
    [x[0] / t, x[1] / t, x[2] / t]
}

/// Center-sampled star body.
pub fn voxelize_star(lattice: Lattice, a: &StarBody) -> Result<VoxelSet> {
    check_dim(&lattice, a.dim())?;
    check_inside(&lattice, a.extent())?;
    Ok(VoxelSet::from_predicate(lattice, false, |x| a.contains(x)))
}

/// Center-sampled convex body.
pub fn voxelize_convex(lattice: Lattice, k: &ConvexBody) -> Result<VoxelSet> {
    check_dim(&lattice, k.dim())?;
    check_inside(&lattice, convex_extent(k))?;
    Ok(VoxelSet::from_predicate(lattice, false, |x| k.contains(x)))
}

/// `t K` center-sampled without building a scaled body.
fn voxelize_convex_scaled(lattice: Lattice, k: &ConvexBody, t: f64) -> Result<VoxelSet> {
    check_inside(&lattice, t * convex_extent(k))?;
    Ok(VoxelSet::from_predicate(lattice, false, |x| k.contains(&lift(x, t))))
}

/// The co-star `R^n \ A` as window minus inner, unbounded.
pub fn voxelize_costar(lattice: Lattice, a: &StarBody) -> Result<VoxelSet> {
    Ok(voxelize_star(lattice, a)?.complement())
}

fn check_dim(lattice: &Lattice, dim: usize) -> Result<()> {
    if lattice.dim != dim {
        bail!(InvalidInput, "body of dimension {dim} on a lattice of dimension {}", lattice.dim);
    }
    Ok(())
}

fn convex_extent(k: &ConvexBody) -> f64 {
    match k.shape() {
        Some(s) => k.grid().directions().iter().map(|u| s.support(u).abs()).fold(0.0, f64::max) * 1.01,
        None => k.support().iter().map(|h| h.abs()).fold(0.0, f64::max) * 1.05,
    }
}

/// `A + B` on the lattice: cell `i + j` for occupied `i` in `A`, `j` in `B`.
///
/// Bounded results must stay inside the window. When either set is unbounded
/// the sum is clipped to the window, which is exact as long as the unbounded
/// set covers a band around the border at least as wide as the other set.
pub fn voxel_minkowski(a: &VoxelSet, b: &VoxelSet) -> Result<VoxelSet> {
    a.same_lattice(b)?;
    let l = a.lattice;
    let m = l.m;
    let clip = a.outside || b.outside;
    let mut rows: Vec<Runs> = vec![Vec::new(); l.rows()];
    for (ra, runs_a) in a.rows.iter().enumerate() {
        if runs_a.is_empty() {
            continue;
        }
        for (rb, runs_b) in b.rows.iter().enumerate() {
            if runs_b.is_empty() {
                continue;
            }
            let j = l.row_index(ra) + l.row_index(rb);
            if j.abs() > m {
                if clip {
                    continue;
                }
                bail!(WindowTooSmall, "Minkowski sum escapes the window");
            }
            let r = if l.dim == 1 { 0 } else { (j + m) as usize };
            for &(s1, e1) in runs_a {
                for &(s2, e2) in runs_b {
                    let (s, e) = (s1 + s2, e1 + e2);
                    if s < -m || e > m {
                        if !clip {
                            bail!(WindowTooSmall, "Minkowski sum escapes the window");
                        }
                        if e < -m || s > m {
                            continue;
                        }
                    }
                    rows[r].push((s.max(-m), e.min(m)));
                }
            }
        }
    }
    for r in rows.iter_mut() {
        normalize_runs(r);
    }
    let out = VoxelSet { lattice: l, rows, outside: clip };
    if !clip && out.touches_border() {
        bail!(WindowTooSmall, "Minkowski sum reaches the window border");
    }
    Ok(out)
}

/// `wa A + wb B` after nearest-cell resampling of both masks.
pub fn voxel_minkowski_weighted(a: &VoxelSet, b: &VoxelSet, wa: f64, wb: f64) -> Result<VoxelSet> {
    voxel_minkowski(&a.scaled(wa)?, &b.scaled(wb)?)
}

/// Mass of a voxel set; `singular` marks an unresolved cell at the origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VoxelMass {
    pub value: f64,
    pub singular: bool,
}

/// Per-row prefix sums of cell masses of a measure.
#[derive(Clone, Debug)]
pub struct DensityTable {
    lattice: Lattice,
    prefix: Vec<Vec<f64>>,
    origin_cell: f64,
    tail: f64,
}

fn cell_integral<F: Fn(&Vec3) -> f64>(w: &F, dim: usize, c: Vec3, s: f64, depth: u32) -> f64 {
    let d = norm(&c);
    if depth == 0 || d > 2.0 * s {
        return w(&c) * s.powi(dim as i32);
    }
    let q = s / 4.0;
    let mut total = 0.0;
    let ys: &[f64] = if dim == 1 { &[0.0] } else { &[-1.0, 1.0] };
    for dx in [-1.0, 1.0] {
        for dy in ys {
            total += cell_integral(w, dim, [c[0] + dx * q, c[1] + dy * q, 0.0], s / 2.0, depth - 1);
        }
    }
    total
}

/// Mass of the cell `[-h/2, h/2]^n`: rings of refined subcells and, innermost,
/// the mass of a ball of equal volume.
fn origin_cell_mass<M: SetMeasure + ?Sized, F: Fn(&Vec3) -> f64>(mu: &M, w: &F, l: &Lattice, depth: u32) -> Result<f64> {
    let dim = l.dim;
    let mut a = l.h / 2.0;
    let mut total = 0.0;
    for level in 0..depth {
        let s = a / 2.0;
        let offs: [f64; 4] = [-1.5 * s, -0.5 * s, 0.5 * s, 1.5 * s];
        let ys: &[f64] = if dim == 1 { &[0.0] } else { &offs };
        for &x in &offs {
            for &y in ys {
                let inner = x.abs() < s && (dim == 1 || y.abs() < s);
                if !inner {
                    total += cell_integral(w, dim, [x, y, 0.0], s, depth - level);
                }
            }
        }
        a = s;
    }
    let r = if dim == 1 { a } else { 2.0 * a / core::f64::consts::PI.sqrt() };
    let ball = StarBody::from_convex(mu.grid().clone(), ConvexShape::ball(dim, ORIGIN, r)?)?;
    Ok(total + mu.star_mass(&ball)?)
}

impl DensityTable {
    pub fn new<M: SetMeasure + ?Sized>(mu: &M, lattice: Lattice, depth: u32) -> Result<Self> {
        check_dim(&lattice, mu.dim())?;
        let w = |x: &Vec3| mu.density(x);
        let m = lattice.m;
        let h = lattice.h;
        let dim = lattice.dim;
        let vol = lattice.cell_volume();
        let mut prefix = Vec::with_capacity(lattice.rows());
        for r in 0..lattice.rows() {
            let j = lattice.row_index(r);
            let mut p = Vec::with_capacity(2 * m as usize + 2);
            let mut acc = 0.0;
            p.push(0.0);
            for i in -m..=m {
                let c = lattice.center(i, r);
                let v = if i == 0 && j == 0 {
                    0.0
                } else if i.abs() <= 1 && j.abs() <= 1 {
                    cell_integral(&w, dim, c, h, depth)
                } else {
                    w(&c) * vol
                };
                acc += v;
                p.push(acc);
            }
            prefix.push(p);
        }
        let origin_cell = origin_cell_mass(mu, &w, &lattice, depth)?;
        let e = lattice.extent();
        let window = ConvexShape::boxed(&vec![-e; dim], &vec![e; dim])?;
        let tail = mu.convex_complement_mass(&ConvexBody::from_shape(mu.grid().clone(), window)?)?;
        Ok(DensityTable { lattice, prefix, origin_cell, tail })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    /// Mass outside the window.
    pub fn tail(&self) -> f64 {
        self.tail
    }

    pub fn mass(&self, a: &VoxelSet) -> Result<VoxelMass> {
        if a.lattice != self.lattice {
            bail!(InvalidInput, "voxel set and density table live on different lattices");
        }
        let m = self.lattice.m;
        let mut total = 0.0;
        for (r, runs) in a.rows.iter().enumerate() {
            let p = &self.prefix[r];
            for &(s, e) in runs {
                total += p[(e + m + 1) as usize] - p[(s + m) as usize];
            }
        }
        let origin_row = if self.lattice.dim == 1 { 0 } else { m as usize };
        let mut singular = false;
        if a.contains_cell(0, origin_row) {
            total += self.origin_cell;
            singular = self.origin_cell == f64::INFINITY;
        }
        if a.outside {
            total += self.tail;
        }
        Ok(VoxelMass { value: total, singular })
    }
}

/// Riemann sum of an arbitrary density over the occupied cells.
pub fn voxel_measure_fn(w: impl Fn(&Vec3) -> f64, a: &VoxelSet) -> f64 {
    let l = a.lattice;
    let vol = l.cell_volume();
    let mut total = 0.0;
    for (r, runs) in a.rows.iter().enumerate() {
        for &(s, e) in runs {
            for i in s..=e {
                total += w(&l.center(i, r)) * vol;
            }
        }
    }
    total
}

const MAX_DEGREE: usize = 5;

/// Least-squares polynomial of degree `deg` (at most [`MAX_DEGREE`]) with
/// its rms residual. The abscissae are rescaled to `[-1, 1]`-ish before
/// solving the normal equations.
fn poly_fit(x: &[f64], y: &[f64], deg: usize) -> Option<([f64; MAX_DEGREE + 1], f64)> {
    let n = (deg + 1).min(x.len()).min(MAX_DEGREE + 1);
    let scale = x.iter().fold(0.0, |a: f64, b| a.max(b.abs()));
    if !(scale > 0.0) {
        return None;
    }
    let mut a = [[0.0; MAX_DEGREE + 1]; MAX_DEGREE + 1];
    let mut b = [0.0; MAX_DEGREE + 1];
    for (xi, yi) in x.iter().zip(y) {
        let t = xi / scale;
        let mut v = [1.0; MAX_DEGREE + 1];
        for k in 1..n {
            v[k] = v[k - 1] * t;
        }
        for r in 0..n {
            for c in 0..n {
                a[r][c] += v[r] * v[c];
            }
            b[r] += v[r] * yi;
        }
    }
    for (r, row) in a.iter_mut().enumerate().skip(n) {
        row[r] = 1.0;
    }
    let mut c = solve(a, b)?;
    let mut f = 1.0;
    for ck in c.iter_mut() {
        *ck /= f;
        f *= scale;
    }
    let eval = |t: f64| c.iter().rev().fold(0.0, |acc, ck| acc * t + ck);
    let rss: f64 = x.iter().zip(y).map(|(xi, yi)| (yi - eval(*xi)).powi(2)).sum();
    Some((c, (rss / x.len() as f64).sqrt()))
}

/// Degree between three and [`MAX_DEGREE`] with the smallest leave-one-out
/// prediction error; each extra degree needs three more points than it has
/// coefficients.
fn fit_degree(x: &[f64], y: &[f64]) -> usize {
    let mut best = (3, f64::INFINITY);
    for deg in 3..=MAX_DEGREE {
        if x.len() < deg + 4 {
            break;
        }
        let mut press = 0.0;
        for skip in 0..x.len() {
            let xs: Vec<f64> = x.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, v)| *v).collect();
            let ys: Vec<f64> = y.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, v)| *v).collect();
            let Some((c, _)) = poly_fit(&xs, &ys, deg) else {
                press = f64::INFINITY;
                break;
            };
            let pred = c.iter().rev().fold(0.0, |acc, ck| acc * x[skip] + ck);
            press += (y[skip] - pred).powi(2);
        }
        if press < best.1 {
            best = (deg, press);
        }
    }
    best.0
}

/// Support of a voxel set in direction `u`, over its cell centers.
fn lattice_support(l: &VoxelSet, u: &Vec3) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for (r, runs) in l.rows.iter().enumerate() {
        for &(s, e) in runs {
            for i in [s, e] {
                let c = l.lattice.center(i, r);
                best = best.max(c[0] * u[0] + c[1] * u[1]);
            }
        }
    }
    best
}

/// Outward normals of `X` with the weight of the boundary they carry,
/// binned by angle.
///
/// A cell with an exposed face takes its normal from the principal axes of
/// the exposed cells within a disc around it, oriented towards its exposed
/// faces, and a weight of its mass density times the boundary length those
/// faces stand for.
fn boundary_normals(table: &DensityTable, x: &VoxelSet) -> Vec<(Vec3, f64)> {
    let l = x.lattice;
    let m = l.m;
    let h = l.h;
    let density = |i: i32, r: usize| {
        let p = &table.prefix[r];
        (p[(i + m + 1) as usize] - p[(i + m) as usize]) / l.cell_volume()
    };
    let member = |i: i32, j: i32| {
        if i.abs() > m || j.abs() > m {
            return x.outside;
        }
        x.contains_cell(i, (j + m) as usize)
    };
    if l.dim == 1 {
        let mut out = Vec::new();
        for &(s, e) in &x.rows[0] {
            for (i, dir) in [(s, -1.0), (e, 1.0)] {
                if !member(i + dir as i32, 0) {
                    out.push(([dir, 0.0, 0.0], density(i, 0)));
                }
            }
        }
        return out;
    }
    const RADIUS: i32 = 12;
    const BINS: usize = 1440;
    const FACES: [(i32, i32); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
    let side = (2 * m + 1) as usize;
    let slot = |i: i32, j: i32| (j + m) as usize * side + (i + m) as usize;
    let mut exposed_cells = Vec::new();
    let mut marked = vec![false; side * side];
    for (r, runs) in x.rows.iter().enumerate() {
        let j = r as i32 - m;
        for &(s, e) in runs {
            for i in s..=e {
                let (mut fx, mut fy, mut count) = (0, 0, 0);
                for (a, b) in FACES {
                    if !member(i + a, j + b) {
                        fx += a;
                        fy += b;
                        count += 1;
                    }
                }
                if count > 0 {
                    exposed_cells.push((i, j, fx, fy, count));
                    marked[slot(i, j)] = true;
                }
            }
        }
    }
    let offsets: Vec<(i32, i32)> = (-RADIUS..=RADIUS)
        .flat_map(|a| (-RADIUS..=RADIUS).map(move |b| (a, b)))
        .filter(|(a, b)| a * a + b * b <= RADIUS * RADIUS)
        .collect();
    let mut bins = vec![([0.0; 3], 0.0); BINS];
    for &(i, j, fx, fy, count) in &exposed_cells {
        let (mut n, mut sx, mut sy, mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        for &(a, b) in &offsets {
            let (p, q) = (i + a, j + b);
            if p.abs() <= m && q.abs() <= m && marked[slot(p, q)] {
                let (a, b) = (a as f64, b as f64);
                n += 1.0;
                sx += a;
                sy += b;
                sxx += a * a;
                sxy += a * b;
                syy += b * b;
            }
        }
        let (cxx, cxy, cyy) = (sxx - sx * sx / n, sxy - sx * sy / n, syy - sy * sy / n);
        let tangent = 0.5 * (2.0 * cxy).atan2(cxx - cyy);
        let mut u = [-tangent.sin(), tangent.cos(), 0.0];
        let (fx, fy) = (fx as f64, fy as f64);
        let facing = u[0] * fx + u[1] * fy;
        if facing < 0.0 || (facing == 0.0 && u[0] * sx + u[1] * sy > 0.0) {
            u = [-u[0], -u[1], 0.0];
        }
        let w = density(i, (j + m) as usize) * count as f64 * h / (u[0].abs() + u[1].abs());
        let t = angle_of(&u);
        let k = ((t / core::f64::consts::TAU * BINS as f64) as usize).min(BINS - 1);
        let bin = &mut bins[k];
        bin.0[0] += w * u[0];
        bin.0[1] += w * u[1];
        bin.1 += w;
    }
    bins.into_iter()
        .filter(|(_, w)| *w > 0.0 && w.is_finite())
        .map(|(v, w)| {
            let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
            ([v[0] / n, v[1] / n, 0.0], w)
        })
        .collect()
}

/// Ratio of `h_L` to `h_K` averaged with the weights of the normals of `X`,
/// `L` a voxelized `eps K`; uniform over `K`'s grid when there are none.
fn effective_radius(l: &VoxelSet, k: &ConvexBody, normals: &[(Vec3, f64)]) -> f64 {
    if normals.is_empty() {
        let dirs = k.grid().directions();
        let stride = (dirs.len() / 256).max(1);
        let (mut acc, mut count) = (0.0, 0);
        for u in dirs.iter().step_by(stride) {
            let hk = k.support_at(u);
            if hk > 1e-12 {
                acc += lattice_support(l, u) / hk;
                count += 1;
            }
        }
        return acc / count.max(1) as f64;
    }
    let (mut num, mut den) = (0.0, 0.0);
    for (u, w) in normals {
        num += w * lattice_support(l, u);
        den += w * k.support_at(u);
    }
    num / den
}

/// `lim mu((X + eps K) \ X) / eps` from lattice dilations of `X` over the
/// schedule. Each lattice `eps K` has a support function slightly inside
/// `eps h_K` by an amount that depends on the direction, so the differences
/// are regressed against its radius averaged over the normals of `X` rather
/// than the nominal `eps`. The linear coefficient of a polynomial fit is the
/// estimate and its intercept absorbs the offset of `X` itself; the degree,
/// three to five, is picked by leave-one-out error so that steep densities
/// near the set do not bias a cubic.
pub fn voxel_boundary(table: &DensityTable, x: &VoxelSet, k: &ConvexBody, eps: &[f64]) -> Result<BoundaryEstimate> {
    if eps.len() < 5 {
        bail!(InvalidInput, "boundary estimate needs at least five dilation radii");
    }
    let h = table.lattice.h;
    if eps.iter().any(|e| !(*e >= 2.0 * h)) {
        bail!(Precondition, "dilation radii must be at least two cells (h = {h})");
    }
    let normals = boundary_normals(table, x);
    let mut d = Vec::with_capacity(eps.len());
    let mut radii = Vec::with_capacity(eps.len());
    for &e in eps {
        let ke = voxelize_convex_scaled(table.lattice, k, e)?;
        radii.push(effective_radius(&ke, k, &normals));
        let grown = voxel_minkowski(x, &ke)?;
        let shell = grown.difference(x)?;
        let m = table.mass(&shell)?;
        if m.singular {
            return Ok(BoundaryEstimate { value: f64::INFINITY, mode: "voxel".into(), residual: None, flagged: true });
        }
        d.push(m.value);
    }
    let Some((c, rms)) = poly_fit(&radii, &d, fit_degree(&radii, &d)) else {
        bail!(InvalidInput, "degenerate dilation schedule");
    };
    let mut sorted: Vec<(f64, f64)> = radii.iter().copied().zip(d.iter().copied()).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let scale = d.iter().fold(0.0, |a: f64, b| a.max(b.abs())).max(1e-300);
    let monotone = sorted.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-9 * scale);
    let residual = rms / scale;
    Ok(BoundaryEstimate {
        value: c[1],
        mode: "voxel".into(),
        residual: Some(residual),
        flagged: !monotone || !c[1].is_finite() || residual > 1e-2,
    })
}

/// Voxel boundary measure of a region on the lattice described by `settings`.
pub fn region_boundary<M: SetMeasure + ?Sized>(
    mu: &M,
    region: Region<'_>,
    k: &ConvexBody,
    side: Side,
    settings: &OracleSettings,
) -> Result<BoundaryEstimate> {
    let lattice = Lattice::from_settings(mu.dim(), settings)?;
    let (bounded, complement) = match region {
        Region::Star(s) => (voxelize_star(lattice, s)?, false),
        Region::Convex(c) => (voxelize_convex(lattice, c)?, false),
        Region::CoStar(c) => {
            if c.rho().iter().any(|r| !r.is_finite()) {
                bail!(Precondition, "voxel boundary needs a co-star with bounded complement");
            }
            (voxelize_star(lattice, &c.inner()?)?, true)
        }
    };
    let outward = matches!((complement, side), (false, Side::Outer) | (true, Side::Inner));
    let x = if outward { bounded } else { bounded.complement() };
    let table = DensityTable::new(mu, lattice, settings.refine_depth)?;
    let mut est = voxel_boundary(&table, &x, k, &settings.eps)?;
    est.mode = format!("voxel {}", settings.describe());
    Ok(est)
}

/// Voxel measure of a region, with the tail outside the window for co-stars.
pub fn region_mass<M: SetMeasure + ?Sized>(mu: &M, region: Region<'_>, settings: &OracleSettings) -> Result<VoxelMass> {
    let lattice = Lattice::from_settings(mu.dim(), settings)?;
    let set = match region {
        Region::Star(s) => voxelize_star(lattice, s)?,
        Region::Convex(c) => voxelize_convex(lattice, c)?,
        Region::CoStar(c) => voxelize_costar(lattice, &c.inner()?)?,
    };
    DensityTable::new(mu, lattice, settings.refine_depth)?.mass(&set)
}

/// Outcome of comparing the Minkowski and radial sums inside a cone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub minkowski_area: f64,
    pub radial_area: f64,
    pub gap: f64,
    pub tolerance: f64,
    pub homothetic: bool,
    pub pass: bool,
    pub settings: String,
}

/// Voxel area of `(A + B) ∩ Σ` against the area of the radial sum inside `Σ`.
///
/// Homothetic convex pairs must close the gap to within `4h` times the radius
/// of the sum; any other pair must not produce a negative gap beyond that.
pub fn radial_vs_minkowski_gap(a: &StarBody, b: &StarBody, cone: Option<&AngularWeight>, settings: &OracleSettings) -> Result<GapReport> {
    let grid = a.grid().clone();
    grid.ensure_same(b.grid())?;
    if grid.dim() != 2 {
        return Err(crate::Error::UnsupportedDimension(grid.dim()));
    }
    let lattice = Lattice::from_settings(2, settings)?;
    let sum = voxel_minkowski(&voxelize_star(lattice, a)?, &voxelize_star(lattice, b)?)?;
    let whole = AngularWeight::constant(1.0);
    let cone = cone.unwrap_or(&whole);
    let (w, f) = cone.on_grid(&grid)?;
    let radial_area: f64 = (0..grid.len())
        .filter(|i| w[*i] > 0.0)
        .map(|i| 0.5 * f[i] * grid.weight(i) * (a.rho()[i] + b.rho()[i]).powi(2))
        .sum();
    // cells centred on the cone boundary count half, the origin cell by the cone's angle
    let opening: f64 = (0..grid.len()).filter(|i| w[*i] > 0.0).map(|i| f[i] * grid.weight(i)).sum::<f64>() / grid.total_weight();
    let h = lattice.h;
    let mut cells = 0.0;
    for (r, runs) in sum.rows.iter().enumerate() {
        for &(s, e) in runs {
            for i in s..=e {
                let c = lattice.center(i, r);
                cells += cell_cone_weight(cone, &c, opening)?;
            }
        }
    }
    let minkowski_area = cells * h * h;
    let gap = minkowski_area - radial_area;
    let reach = (0..grid.len()).map(|i| a.rho()[i] + b.rho()[i]).fold(0.0, f64::max);
    let tolerance = 4.0 * h * reach.max(1.0);
    let homothetic = homothetic_convex(a, b);
    let pass = if homothetic { gap.abs() <= tolerance } else { gap >= -tolerance };
    Ok(GapReport { minkowski_area, radial_area, gap, tolerance, homothetic, pass, settings: settings.describe() })
}

fn cell_cone_weight(cone: &AngularWeight, c: &Vec3, opening: f64) -> Result<f64> {
    let r = norm(c);
    if r == 0.0 {
        return Ok(opening);
    }
    let u = [c[0] / r, c[1] / r, 0.0];
    if let AngularWeight::Cone { axis, half_angle, .. } = cone {
        let t = angle_of(&[axis[0], axis[1], 0.0]);
        let mut d = (angle_of(&u) - t).abs() % core::f64::consts::TAU;
        if d > core::f64::consts::PI {
            d = core::f64::consts::TAU - d;
        }
        if (d - half_angle).abs() <= 1e-9 {
            return Ok(0.5);
        }
        return Ok(if d < *half_angle { 1.0 } else { 0.0 });
    }
    Ok(if cone.eval(&u, 2)? > 0.0 { 1.0 } else { 0.0 })
}

fn homothetic_convex(a: &StarBody, b: &StarBody) -> bool {
    use crate::geometry::StarShape;
    let convex = |s: &StarBody| matches!(s.shape(), Some(StarShape::Convex(_)));
    if !(convex(a) && convex(b)) {
        return false;
    }
    let t = b.rho()[0] / a.rho()[0];
    a.rho().iter().zip(b.rho()).all(|(x, y)| (y - t * x).abs() <= 1e-9 * y.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::Exponent;
    use crate::geometry::{CoStar, DirectionGrid};
    use crate::measures::DisintegratedMeasure;
    use alloc::sync::Arc;
    use core::f64::consts::PI;

    fn grid() -> Arc<DirectionGrid> {
        Arc::new(DirectionGrid::new(2, 1024).unwrap())
    }

    fn disc(r: f64) -> StarBody {
        StarBody::from_convex(grid(), ConvexShape::disc(r).unwrap()).unwrap()
    }

    fn square(lo: f64, hi: f64) -> ConvexBody {
        ConvexBody::from_shape(grid(), ConvexShape::boxed(&[lo, lo], &[hi, hi]).unwrap()).unwrap()
    }

    fn lat(window: f64) -> Lattice {
        Lattice::new(2, window, 1.0 / 256.0).unwrap()
    }

    fn inverse_cube() -> DisintegratedMeasure {
        DisintegratedMeasure::homogeneous(&AngularWeight::constant(1.0), Exponent::new(-1.0 / 3.0).unwrap(), grid()).unwrap()
    }

    #[test]
    fn rasterized_areas() {
        let h = 1.0 / 256.0;
        let d = voxelize_star(lat(2.0), &disc(1.0)).unwrap();
        assert!((d.volume() - PI).abs() < 4.0 * h);
        let s = voxelize_convex(lat(2.0), &square(0.0, 1.0)).unwrap();
        assert!((s.volume() - 1.0).abs() <= 4.0 * h + h * h);
        let c = voxelize_costar(lat(4.0), &disc(1.0)).unwrap();
        let inside = c.complement();
        let window = (2.0 * lat(4.0).extent()).powi(2);
        assert!((window - inside.volume() - (window - PI)).abs() < 4.0 * h);
        assert!(c.is_unbounded());
    }

    #[test]
    fn body_outside_window_is_rejected() {
        assert!(matches!(voxelize_star(lat(1.0), &disc(1.0)), Err(crate::Error::WindowTooSmall(_))));
    }

    #[test]
    fn lattice_minkowski_sums() {
        let l = lat(3.0);
        let h = l.h();
        let s = voxelize_convex(l, &square(0.0, 1.0)).unwrap();
        let side = (s.cells() as f64).sqrt();
        let ss = voxel_minkowski(&s, &s).unwrap();
        assert_eq!(ss.cells() as f64, (2.0 * side - 1.0).powi(2));
        assert!((ss.volume() - 4.0).abs() < 4.0 * h * 8.0);
        let origin = VoxelSet::from_predicate(l, false, |x| norm(x) < 1e-12);
        assert_eq!(voxel_minkowski(&s, &origin).unwrap(), s);
        let d = voxelize_star(l, &disc(1.0)).unwrap();
        let q = voxelize_convex(l, &square(-1.0, 1.0)).unwrap();
        let dq = voxel_minkowski(&d, &q).unwrap();
        assert!((dq.volume() - (12.0 + PI)).abs() < 0.01 * (12.0 + PI));
        assert_eq!(dq, voxel_minkowski(&q, &d).unwrap());
    }

    #[test]
    fn escaping_sum_is_rejected() {
        let l = lat(2.0);
        let d = voxelize_star(l, &disc(1.5)).unwrap();
        assert!(matches!(voxel_minkowski(&d, &d), Err(crate::Error::WindowTooSmall(_))));
    }

    #[test]
    fn measures_with_singular_density() {
        let mu = inverse_cube();
        let l = lat(4.0);
        let t = DensityTable::new(&mu, l, 6).unwrap();
        let annulus = voxelize_star(l, &disc(2.0)).unwrap().difference(&voxelize_star(l, &disc(1.0)).unwrap()).unwrap();
        let m = t.mass(&annulus).unwrap();
        assert!((m.value - PI).abs() < 1e-3 * PI, "{}", m.value);
        let m = t.mass(&voxelize_star(l, &disc(1.0)).unwrap()).unwrap();
        assert!(m.singular && m.value == f64::INFINITY);
        let c = t.mass(&voxelize_costar(l, &disc(1.0)).unwrap()).unwrap();
        assert!((c.value - 2.0 * PI).abs() < 4e-3 * 2.0 * PI, "{}", c.value);
    }

    #[test]
    fn lebesgue_disc() {
        let mu = DisintegratedMeasure::lebesgue(grid()).unwrap();
        let l = lat(4.0);
        let t = DensityTable::new(&mu, l, 6).unwrap();
        let m = t.mass(&voxelize_star(l, &disc(2.0)).unwrap()).unwrap();
        assert!((m.value - 4.0 * PI).abs() < 0.01 * 4.0 * PI);
        assert!(!m.singular);
    }

    #[test]
    fn boundary_by_dilation() {
        let s = OracleSettings::default();
        let leb = DisintegratedMeasure::lebesgue(grid()).unwrap();
        let k = ConvexBody::from_shape(grid(), ConvexShape::disc(1.0).unwrap()).unwrap();
        let a = disc(1.0);
        let e = region_boundary(&leb, Region::Star(&a), &k, Side::Outer, &s).unwrap();
        assert!((e.value - 2.0 * PI).abs() < 0.02 * 2.0 * PI, "{e:?}");
        let sq = square(0.0, 1.0);
        let kk = square(-1.0, 1.0);
        let e = region_boundary(&leb, Region::Convex(&sq), &kk, Side::Outer, &s).unwrap();
        assert!((e.value - 4.0).abs() < 0.02 * 4.0, "{e:?}");
        let c = CoStar::from_star(&a);
        let e = region_boundary(&inverse_cube(), Region::CoStar(&c), &k, Side::Inner, &s).unwrap();
        assert!((e.value - 2.0 * PI).abs() < 0.02 * 2.0 * PI, "{e:?}");
    }

    #[test]
    fn gap_examples() {
        let s = OracleSettings::default();
        let h = s.h;
        let r = radial_vs_minkowski_gap(&disc(1.0), &disc(0.5), None, &s).unwrap();
        assert!(r.homothetic && r.pass && r.gap.abs() < 4.0 * h * 1.5, "{r:?}");
        let sq = StarBody::from_convex(grid(), ConvexShape::boxed(&[-1.0, -1.0], &[1.0, 1.0]).unwrap()).unwrap();
        let r = radial_vs_minkowski_gap(&disc(1.0), &sq, None, &s).unwrap();
        let expect = 8.0 - 8.0 * (1.0 + 2f64.sqrt()).ln();
        assert!(!r.homothetic && r.pass && r.gap > 0.0);
        assert!((r.gap - expect).abs() < 0.01 * (12.0 + PI), "{r:?}");
        let q = AngularWeight::quadrant();
        let r = radial_vs_minkowski_gap(&disc(1.0), &disc(2.0), Some(&q), &s).unwrap();
        assert!((r.radial_area - 9.0 * PI / 4.0).abs() < 1e-12);
        assert!(r.pass && r.gap.abs() < 4.0 * h * 3.0, "{r:?}");
    }

    #[test]
    fn pgm_header() {
        let l = Lattice::new(2, 0.05, 0.01).unwrap();
        let v = VoxelSet::from_predicate(l, false, |x| x[0] > 0.0);
        let p = v.to_pgm();
        assert!(p.starts_with(b"P5\n11 11\n255\n"));
        assert_eq!(p.len(), 13 + 121);
    }

    #[test]
    fn one_dimensional_lattice() {
        let l = Lattice::new(1, 4.0, 1.0 / 64.0).unwrap();
        let g = Arc::new(DirectionGrid::new(1, 0).unwrap());
        let a = StarBody::from_convex(g, ConvexShape::interval(-1.0, 2.0).unwrap()).unwrap();
        let v = voxelize_star(l, &a).unwrap();
        assert!((v.volume() - 3.0).abs() <= 1.0 / 64.0);
        let vv = voxel_minkowski(&v, &v).unwrap();
        assert_eq!(vv.cells(), 2 * v.cells() - 1);
        assert!((vv.volume() - 6.0).abs() <= 4.0 * 2.0 / 64.0);
    }
}
