//! Gauge-radial test functions, weak quasi-norms and the functional forms of
//! the complemented inequalities.
//!
//! Functions are `f(x) = g(|x|_K)` with `g` piecewise linear, `g(0) = 0`. Their
//! superlevel sets are unions of shells `{a <= |x|_K <= b}`, so every quantity
//! reduces to masses of dilates of `K` and one-dimensional integrals in the level.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cell::Cell;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::exponents::{power_mean, Exponent};
use crate::geometry::ConvexBody;
use crate::linalg::Vec3;
use crate::measures::{DisintegratedMeasure, SetMeasure};
use crate::numeric::{golden_max, integrate};
use crate::onedim::RadialLaw;
use crate::oracle::{voxel_minkowski_weighted, DensityTable, Lattice, VoxelSet};
use crate::report::{IneqReport, Orientation};
use crate::verifiers::{CLOSED_FORM_TOL, VOXEL_TOL};

/// Knots `0 = r_0 < .. < r_m` and values with `g(0) = 0`; `g` is linear between
/// knots and constant after `r_m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub knots: Vec<f64>,
    pub values: Vec<f64>,
}

impl RadialProfile {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() != values.len() || knots.is_empty() {
            bail!(InvalidInput, "knots and values must be non-empty and of equal length");
        }
        if knots[0] != 0.0 || values[0] != 0.0 {
            bail!(InvalidInput, "profile must start at g(0) = 0");
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) || knots.iter().chain(&values).any(|x| !x.is_finite()) {
            bail!(InvalidInput, "knots must be finite and strictly increasing, values finite");
        }
        Ok(RadialProfile { knots, values })
    }

    /// `clamp(r - a, 0, b - a)`.
    pub fn ramp(a: f64, b: f64) -> Result<Self> {
        if a == 0.0 {
            return Self::new(alloc::vec![0.0, b], alloc::vec![0.0, b]);
        }
        Self::new(alloc::vec![0.0, a, b], alloc::vec![0.0, 0.0, b - a])
    }

    pub fn eval(&self, r: f64) -> f64 {
        let k = &self.knots;
        let v = &self.values;
        if r >= k[k.len() - 1] {
            return v[v.len() - 1];
        }
        let i = k.partition_point(|x| *x <= r) - 1;
        v[i] + (v[i + 1] - v[i]) * (r - k[i]) / (k[i + 1] - k[i])
    }

    fn slope(&self, i: usize) -> f64 {
        (self.values[i + 1] - self.values[i]) / (self.knots[i + 1] - self.knots[i])
    }

    /// `c g`.
    pub fn scaled(&self, c: f64) -> Self {
        RadialProfile { knots: self.knots.clone(), values: self.values.iter().map(|v| c * v).collect() }
    }

    /// Knots of `|g|`: the given ones plus zero crossings.
    fn abs_pieces(&self) -> (Vec<f64>, Vec<f64>) {
        let mut r = alloc::vec![self.knots[0]];
        let mut v = alloc::vec![self.values[0].abs()];
        for i in 0..self.knots.len() - 1 {
            let (a, b) = (self.values[i], self.values[i + 1]);
            if a * b < 0.0 {
                let s = a / (a - b);
                r.push(self.knots[i] + s * (self.knots[i + 1] - self.knots[i]));
                v.push(0.0);
            }
            r.push(self.knots[i + 1]);
            v.push(b.abs());
        }
        (r, v)
    }

    /// Radii `[a, b]` (with `b` possibly infinite) where `|g| >= t`, for `t > 0`.
    pub fn superlevel(&self, t: f64) -> Vec<(f64, f64)> {
        let (r, v) = self.abs_pieces();
        let mut out: Vec<(f64, f64)> = Vec::new();
        let mut push = |a: f64, b: f64| match out.last_mut() {
            Some(last) if last.1 >= a => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        };
        for i in 0..r.len() - 1 {
            let (a, b) = (v[i], v[i + 1]);
            let (ra, rb) = (r[i], r[i + 1]);
            if a >= t && b >= t {
                push(ra, rb);
            } else if a < t && b >= t {
                push(ra + (t - a) / (b - a) * (rb - ra), rb);
            } else if a >= t && b < t {
                push(ra, ra + (a - t) / (a - b) * (rb - ra));
            }
        }
        if v[v.len() - 1] >= t {
            push(r[r.len() - 1], f64::INFINITY);
        }
        out
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Distinct positive values of `|g|` at its knots, ascending.
    fn level_breaks(&self) -> Vec<f64> {
        let (_, mut v) = self.abs_pieces();
        v.retain(|x| *x > 0.0);
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }
}

/// `f(x) = g(|x|_K)`.
#[derive(Clone, Debug)]
pub struct RadialFunction {
    pub gauge: ConvexBody,
    pub profile: RadialProfile,
}

impl RadialFunction {
    pub fn new(gauge: ConvexBody, profile: RadialProfile) -> Self {
        RadialFunction { gauge, profile }
    }

    pub fn eval(&self, x: &Vec3) -> f64 {
        self.profile.eval(crate::geometry::gauge(&self.gauge, x))
    }
}

/// `|grad f|_*` at gauge radius `r` when the norm in the difference quotient is
/// the gauge of `norm`, which must coincide with the gauge of `f`.
pub fn grad_modulus(f: &RadialFunction, r: f64, norm: &ConvexBody) -> Result<f64> {
    let (a, b) = (f.gauge.support(), norm.support());
    if a.len() != b.len() || a.iter().zip(b).any(|(x, y)| (x - y).abs() > 1e-12 * x.abs().max(1.0)) {
        bail!(Precondition, "gradient modulus is certified only in the gauge of f");
    }
    if !(r >= 0.0) {
        bail!(InvalidInput, "radius must be nonnegative, got {r}");
    }
    let p = &f.profile;
    let k = &p.knots;
    let last = k.len() - 1;
    if r > k[last] {
        return Ok(0.0);
    }
    let j = k.partition_point(|x| *x < r);
    if j < k.len() && k[j] == r {
        let left = if j > 0 { p.slope(j - 1).abs() } else { 0.0 };
        let right = if j < last { p.slope(j).abs() } else { 0.0 };
        return Ok(left.max(right));
    }
    Ok(p.slope(j - 1).abs())
}

/// `mu({a <= |x|_K < b})` with `a = 0` and `b = inf` allowed.
fn shell<M: SetMeasure + ?Sized>(mu: &M, k: &ConvexBody, a: f64, b: f64) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let inf = f64::INFINITY;
    let v = match (a == 0.0, b == inf) {
        (true, true) => mu.convex_mass(k)? + mu.convex_complement_mass(k)?,
        (true, false) => mu.convex_mass(&k.scaled(b)?)?,
        (false, true) => mu.convex_complement_mass(&k.scaled(a)?)?,
        (false, false) => {
            let (ca, cb) = (mu.convex_complement_mass(&k.scaled(a)?)?, mu.convex_complement_mass(&k.scaled(b)?)?);
            if ca.is_finite() && cb.is_finite() {
                ca - cb
            } else {
                mu.convex_mass(&k.scaled(b)?)? - mu.convex_mass(&k.scaled(a)?)?
            }
        }
    };
    if v.is_nan() {
        bail!(Precondition, "shell [{a}, {b}] has undefined mass");
    }
    Ok(v.max(0.0))
}

/// `int |grad f|_* dmu`: slopes times shell masses, infinite when a nonzero
/// slope meets a shell of infinite mass.
pub fn total_gradient_mass<M: SetMeasure + ?Sized>(f: &RadialFunction, mu: &M) -> Result<f64> {
    let p = &f.profile;
    let mut total = 0.0;
    for i in 0..p.knots.len() - 1 {
        let s = p.slope(i).abs();
        if s == 0.0 {
            continue;
        }
        total += s * shell(mu, &f.gauge, p.knots[i], p.knots[i + 1])?;
    }
    Ok(total)
}

/// `mu({|f| >= t})` for `t > 0`.
pub fn level_mass<M: SetMeasure + ?Sized>(f: &RadialFunction, mu: &M, t: f64) -> Result<f64> {
    let mut m = 0.0;
    for (a, b) in f.profile.superlevel(t) {
        m += shell(mu, &f.gauge, a, b)?;
    }
    Ok(m)
}

/// The increasing function `I` of the weak quasi-norms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QuasiNormProfile {
    /// `x^{1/alpha}`, the Lorentz case.
    Power { alpha: f64 },
    /// `scale * phi(Phi^{-1}(x))` for a law.
    Law { law: RadialLaw, scale: f64 },
}

impl QuasiNormProfile {
    pub fn eval(&self, x: f64) -> Result<f64> {
        match self {
            QuasiNormProfile::Power { alpha } => Ok(x.powf(1.0 / alpha)),
            QuasiNormProfile::Law { law, scale } => Ok(scale * law.iso_profile(x)?),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakNorms {
    /// `int_0^inf I(mu(|f| >= t)) dt`
    pub l_phi_1: f64,
    /// `sup_t t I(mu(|f| >= t))`
    pub l_phi_inf: f64,
    /// `(int |f|^beta dmu)^{1/beta}` when requested.
    pub l_beta: Option<f64>,
    pub l_1: f64,
    pub l_inf: f64,
}

const QUAD_ABS: f64 = 1e-14;
const QUAD_REL: f64 = 1e-12;

/// Integral over `[0, sup |g|]` of `h(t)`, split at the knot values of `|g|`,
/// with errors from `h` carried out of the quadrature.
fn level_integral(f: &RadialFunction, mut h: impl FnMut(f64) -> Result<f64>) -> Result<f64> {
    let err: Cell<Option<crate::Error>> = Cell::new(None);
    let mut g = |t: f64| match h(t) {
        Ok(v) => v,
        Err(e) => {
            err.set(Some(e));
            f64::NAN
        }
    };
    let mut total = 0.0;
    let mut lo = 0.0;
    for hi in f.profile.level_breaks() {
        total += integrate(&mut g, lo, hi, QUAD_ABS, QUAD_REL).value;
        lo = hi;
    }
    if let Some(e) = err.take() {
        return Err(e);
    }
    if total.is_nan() {
        bail!(Precondition, "level integral is undefined");
    }
    Ok(total)
}

pub fn weak_norms<M: SetMeasure + ?Sized>(f: &RadialFunction, mu: &M, profile: &QuasiNormProfile, beta: Option<f64>) -> Result<WeakNorms> {
    let m = |t: f64| level_mass(f, mu, t);
    let top = f.profile.sup_abs();
    let l_phi_1 = level_integral(f, |t| profile.eval(m(t)?))?;
    let l_1 = level_integral(f, m)?;

    // sup of t I(m(t)): dense samples per level piece, then golden refinement
    let mut best = (0.0, 0.0);
    let mut lo = 0.0;
    for hi in f.profile.level_breaks() {
        let k = 256;
        for j in 1..=k {
            let t = lo + (hi - lo) * j as f64 / k as f64;
            let v = t * profile.eval(m(t)?)?;
            if v > best.1 {
                best = (t, v);
            }
        }
        lo = hi;
    }
    let mut l_phi_inf = best.1;
    if best.1 > 0.0 {
        let w = top / 256.0;
        let (a, b) = ((best.0 - w).max(0.0), (best.0 + w).min(top));
        let (_, v) = golden_max(|t| if t > 0.0 { t * profile.eval(m(t).unwrap_or(f64::NAN)).unwrap_or(0.0) } else { 0.0 }, a, b, 1e-13 * top);
        if v > l_phi_inf {
            l_phi_inf = v;
        }
    }

    let l_beta = match beta {
        None => None,
        Some(b) => {
            if !(b > 0.0 && b.is_finite()) {
                bail!(InvalidExponent, "beta must be positive, got {b}");
            }
            // int |f|^beta = int_0^{T^beta} m(s^{1/beta}) ds
            let err: Cell<Option<crate::Error>> = Cell::new(None);
            let mut g = |s: f64| match m(s.powf(1.0 / b)) {
                Ok(v) => v,
                Err(e) => {
                    err.set(Some(e));
                    f64::NAN
                }
            };
            let mut total = 0.0;
            let mut lo = 0.0;
            for hi in f.profile.level_breaks() {
                let hb = hi.powf(b);
                total += integrate(&mut g, lo, hb, QUAD_ABS, QUAD_REL).value;
                lo = hb;
            }
            if let Some(e) = err.take() {
                return Err(e);
            }
            Some(total.powf(1.0 / b))
        }
    };
    Ok(WeakNorms { l_phi_1, l_phi_inf, l_beta, l_1, l_inf: top })
}

/// `int_0^inf mu^-_K({|f| >= t}) dt`, the middle term of the coarea chain.
/// Inner edges of shells need a symmetric gauge.
pub fn coarea_integral<M: SetMeasure + ?Sized>(f: &RadialFunction, mu: &M) -> Result<f64> {
    let k = &f.gauge;
    let symmetric = k.is_symmetric(1e-12);
    level_integral(f, |t| {
        let mut s = 0.0;
        for (a, b) in f.profile.superlevel(t) {
            if a > 0.0 {
                s += mu.boundary_homothet(k, a)?;
            }
            if b.is_finite() {
                if !symmetric {
                    bail!(Precondition, "bounded superlevel sets need a symmetric gauge");
                }
                s += mu.boundary_homothet(k, b)?;
            }
        }
        Ok(s)
    })
}

/// Which functional inequality to check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum SobolevVariant {
    /// `int |grad f|_* >= C1 |f|_{L^{alpha,1}}`
    WeakL1,
    /// `int |grad f|_* >= C1 ((alpha - beta)/alpha)^{1/beta} |f|_{L^beta}`, diagnostic only.
    LBeta { beta: f64 },
    /// `|f|_1 <= C2 (int |grad f|_*)^alpha |f|_inf^{1 - alpha}`
    Nash,
    /// `int |grad f|_* >= int_0^inf mu^-({|f| >= t}) dt`
    Coarea,
    /// `int |grad f|_* >= |f|_{L^{Phi,1}}` with the profile of the measure's normalized law.
    FunctionalEquiv,
}

/// Constants `(q, alpha, C1, C2)` recomputed from the measure and the gauge.
pub fn sobolev_constants<M: SetMeasure + ?Sized>(mu: &M, k: &ConvexBody) -> Result<(f64, f64, f64, f64)> {
    let Some(q) = mu.homogeneity() else {
        bail!(Precondition, "the Sobolev constants need a homogeneous measure");
    };
    if !(q < 0.0) {
        bail!(Precondition, "the Sobolev constants need q < 0, got {q}");
    }
    let alpha = 1.0 / (1.0 - q);
    let c1 = -(1.0 / q) * mu.convex_complement_mass(k)?.powf(q);
    Ok((q, alpha, c1, c1.powf(-alpha)))
}

pub fn check_sobolev(f: &RadialFunction, mu: &DisintegratedMeasure, variant: SobolevVariant) -> Result<IneqReport> {
    let grad = total_gradient_mass(f, mu)?;
    let desc = format!("mu={} gauge={:?} g={:?}", mu.describe(), f.gauge.shape(), f.profile);
    let report = match variant {
        SobolevVariant::WeakL1 => {
            let (q, alpha, c1, _) = sobolev_constants(mu, &f.gauge)?;
            let n = weak_norms(f, mu, &QuasiNormProfile::Power { alpha }, None)?;
            IneqReport::new("sobolev_weak_l1", grad, c1 * n.l_phi_1, Orientation::Ge, CLOSED_FORM_TOL)
                .with_witness(format!("{desc} q={q} alpha={alpha} C1={c1} L_alpha_1={}", n.l_phi_1))
        }
        SobolevVariant::LBeta { beta } => {
            let (q, alpha, c1, _) = sobolev_constants(mu, &f.gauge)?;
            if !(beta > 0.0 && beta < alpha) {
                bail!(InvalidExponent, "beta must lie in (0, alpha) = (0, {alpha}), got {beta}");
            }
            let n = weak_norms(f, mu, &QuasiNormProfile::Power { alpha }, Some(beta))?;
            let lb = n.l_beta.unwrap();
            let constant = c1 * ((alpha - beta) / alpha).powf(1.0 / beta);
            IneqReport::new("sobolev_l_beta", grad, constant * lb, Orientation::Ge, CLOSED_FORM_TOL)
                .with_witness(format!("{desc} q={q} alpha={alpha} beta={beta} C1={c1} constant={constant} L_beta={lb} L_alpha_1={}", n.l_phi_1))
                .as_diagnostic()
        }
        SobolevVariant::Nash => {
            let (q, alpha, _, c2) = sobolev_constants(mu, &f.gauge)?;
            let n = weak_norms(f, mu, &QuasiNormProfile::Power { alpha }, None)?;
            let rhs = c2 * grad.powf(alpha) * n.l_inf.powf(1.0 - alpha);
            IneqReport::new("sobolev_nash", n.l_1, rhs, Orientation::Le, CLOSED_FORM_TOL)
                .with_witness(format!("{desc} q={q} alpha={alpha} C2={c2} grad={grad} L_inf={}", n.l_inf))
        }
        SobolevVariant::Coarea => {
            let mid = coarea_integral(f, mu)?;
            IneqReport::new("sobolev_coarea", grad, mid, Orientation::Ge, CLOSED_FORM_TOL).with_witness(desc)
        }
        SobolevVariant::FunctionalEquiv => {
            let Some(s) = crate::verifiers::proportional(f.gauge.rho(), mu.rho_b(), 1e-9) else {
                bail!(Precondition, "the gauge must be a dilate of the measure's body");
            };
            let profile = QuasiNormProfile::Law { law: mu.normalized_law()?, scale: s };
            let n = weak_norms(f, mu, &profile, None)?;
            IneqReport::new("sobolev_functional_equiv", grad, n.l_phi_1, Orientation::Ge, CLOSED_FORM_TOL).with_witness(desc)
        }
    };
    Ok(report)
}

/// A function sampled at the cell centers of a lattice, constant beyond the window.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    lattice: Lattice,
    values: Vec<f64>,
    outside: f64,
}

impl GridFunction {
    pub fn from_fn(lattice: Lattice, outside: f64, f: impl Fn(&Vec3) -> f64) -> Result<Self> {
        let m = lattice.half_cells();
        let mut values = Vec::with_capacity(lattice.rows() * (2 * m as usize + 1));
        for r in 0..lattice.rows() {
            for i in -m..=m {
                values.push(f(&lattice.center(i, r)));
            }
        }
        if values.iter().chain(core::iter::once(&outside)).any(|v| !(v.is_finite() && *v >= 0.0)) {
            bail!(InvalidInput, "grid functions must be finite and nonnegative");
        }
        Ok(GridFunction { lattice, values, outside })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    fn levels(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.push(self.outside);
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    fn value_at(&self, x: &Vec3) -> f64 {
        let l = &self.lattice;
        let m = l.half_cells();
        let i = (x[0] / l.h()).round() as i32;
        let r = if l.dim() == 1 { 0 } else { ((x[1] / l.h()).round() as i32 + m) as usize };
        self.values[r * (2 * m as usize + 1) + (i + m) as usize]
    }

    /// `{f <= t}`.
    pub fn sublevel(&self, t: f64) -> VoxelSet {
        VoxelSet::from_predicate(self.lattice, self.outside <= t, |x| self.value_at(x) <= t)
    }

    /// `int f dmu` by the layer-cake sum over the distinct values.
    pub fn integral(&self, table: &DensityTable) -> Result<f64> {
        let lv = self.levels();
        layer_cake(&lv, table, |t| Ok(self.sublevel(t)))
    }
}

/// `t_0 mu(R^n) + sum_k (t_{k+1} - t_k) mu(R^n \ S_k)` for increasing sublevel sets `S_k`.
fn layer_cake(levels: &[f64], table: &DensityTable, sub: impl Fn(f64) -> Result<VoxelSet>) -> Result<f64> {
    let mut total = 0.0;
    if levels[0] > 0.0 {
        total += levels[0] * table.mass(&VoxelSet::empty(*table.lattice()).complement())?.value;
    }
    for w in levels.windows(2) {
        let s = sub(w[0])?;
        total += (w[1] - w[0]) * table.mass(&s.complement())?.value;
    }
    Ok(total)
}

fn is_everything(a: &VoxelSet) -> bool {
    let c = a.complement();
    !c.is_unbounded() && c.cells() == 0
}

fn is_nothing(a: &VoxelSet) -> bool {
    !a.is_unbounded() && a.cells() == 0
}

/// `lambda A + (1 - lambda) B` for sublevel sets; a full set absorbs any nonempty one.
fn sublevel_sum(a: &VoxelSet, b: &VoxelSet, lambda: f64) -> Result<VoxelSet> {
    if is_nothing(a) || is_nothing(b) {
        return Ok(VoxelSet::empty(*a.lattice()));
    }
    if is_everything(a) || is_everything(b) {
        return Ok(VoxelSet::empty(*a.lattice()).complement());
    }
    if a.is_unbounded() || b.is_unbounded() {
        return Err(crate::Error::WindowTooSmall(alloc::string::String::from(
            "a proper sublevel set reaches past the window; enlarge it or make the outside value the maximum",
        )));
    }
    voxel_minkowski_weighted(a, b, lambda, 1.0 - lambda)
}

/// Functional complemented inequality `int h dmu <= M_q(int f dmu, int g dmu; lambda)`
/// for the extremal `h(z) = inf { max(f(x), g(y)) : lambda x + (1 - lambda) y = z }`,
/// built level by level from lattice sums of sublevel sets.
pub fn functional_cbm<M: SetMeasure + ?Sized>(
    f: &GridFunction,
    g: &GridFunction,
    lambda: f64,
    mu: &M,
    q: f64,
    refine_depth: u32,
) -> Result<IneqReport> {
    if !(lambda > 0.0 && lambda < 1.0) {
        bail!(InvalidInput, "lambda must lie in (0, 1), got {lambda}");
    }
    if f.lattice != g.lattice {
        bail!(InvalidInput, "f and g live on different lattices");
    }
    let p = Exponent::new(q)?;
    let mut levels = f.levels();
    levels.extend(g.levels());
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    if levels.len() > 512 {
        bail!(InvalidInput, "{} distinct levels; quantize the functions first", levels.len());
    }
    let table = DensityTable::new(mu, f.lattice, refine_depth)?;
    let ih = layer_cake(&levels, &table, |t| sublevel_sum(&f.sublevel(t), &g.sublevel(t), lambda))?;
    let (i_f, i_g) = (f.integral(&table)?, g.integral(&table)?);
    let l = f.lattice;
    let witness: String = format!("mu={} lambda={lambda} q={q} h={} levels={} int_f={i_f} int_g={i_g}", mu.describe(), l.h(), levels.len());
    Ok(IneqReport::new("functional_cbm", ih, power_mean(i_f, i_g, lambda, p), Orientation::Le, VOXEL_TOL).with_witness(witness))
}
