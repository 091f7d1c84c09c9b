use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::geometry::{polygon_area, ConvexShape, DirectionGrid, Radial, StarBody, StarShape};
use crate::linalg::{dot, solve};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EqualityOptions {
    /// Fit a translation as well when both bodies carry convex descriptors.
    pub translation_search: bool,
    /// Residual below which the pair counts as homothetic.
    pub tolerance: f64,
}

impl Default for EqualityOptions {
    fn default() -> Self {
        EqualityOptions { translation_search: false, tolerance: 1e-9 }
    }
}

/// Least-squares `(m, b)` with `h_A(u) + <b, u> = m h_B(u)`, i.e. `A + b = m B`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranslationFit {
    pub m: f64,
    pub shift: [f64; 3],
    /// Weighted L1 misfit of the support functions over `m` times the mean half-width of `B`.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EqualityReport {
    /// Median of `rho_A / rho_B` over the support.
    pub ratio: f64,
    /// `sum eta |rho_A - m rho_B| / sum eta m rho_B`.
    pub homothety_residual: f64,
    pub homothetic: bool,
    /// Area of the convex hull of `A` minus the area of `A`, star polygons on the grid rays (planar only).
    pub convexity_deficit: Option<f64>,
    /// The deficit relative to the hull area.
    pub convexity_deficit_rel: Option<f64>,
    pub translation: Option<TranslationFit>,
}

/// Homothety and convexity diagnostics for a candidate equality pair on the
/// directions where `eta > 0`.
pub fn equality_diagnostics(a: &StarBody, b: &StarBody, eta: &[f64], options: &EqualityOptions) -> Result<EqualityReport> {
    let grid = a.grid();
    grid.ensure_same(b.grid())?;
    if eta.len() != grid.len() {
        bail!(GridMismatch, "eta has {} entries for a grid of {}", eta.len(), grid.len());
    }
    let support: Vec<usize> = (0..grid.len()).filter(|&i| eta[i] > 0.0).collect();
    if support.is_empty() {
        bail!(InvalidInput, "eta has empty support");
    }
    let (ra, rb) = (a.rho(), b.rho());
    if support.iter().any(|&i| !(ra[i] > 0.0 && rb[i] > 0.0 && ra[i].is_finite() && rb[i].is_finite())) {
        bail!(InvalidBody, "radial functions must be positive and finite on the support");
    }
    let mut ratios: Vec<f64> = support.iter().map(|&i| ra[i] / rb[i]).collect();
    ratios.sort_by(f64::total_cmp);
    let k = ratios.len();
    let m = if k % 2 == 1 { ratios[k / 2] } else { 0.5 * (ratios[k / 2 - 1] + ratios[k / 2]) };
    let num: f64 = support.iter().map(|&i| eta[i] * (ra[i] - m * rb[i]).abs()).sum();
    let den: f64 = support.iter().map(|&i| eta[i] * m * rb[i]).sum();
    let residual = num / den;

    let (deficit, deficit_rel) = if grid.dim() == 2 {
        let pts: Vec<[f64; 2]> = grid
            .angular_order()
            .iter()
            .map(|&i| {
                let u = grid.direction(i);
                [ra[i] * u[0], ra[i] * u[1]]
            })
            .collect();
        let body = polygon_area(&pts);
        let hull = polygon_area(&convex_hull(&pts));
        let d = (hull - body).max(0.0);
        (Some(d), Some(d / hull))
    } else {
        (None, None)
    };

    let translation = match (options.translation_search, a.shape(), b.shape()) {
        (true, Some(StarShape::Convex(x)), Some(StarShape::Convex(y))) => Some(translation_fit(x, y, grid)?),
        _ => None,
    };
    let homothetic = residual <= options.tolerance || translation.as_ref().is_some_and(|t| t.residual <= options.tolerance);
    Ok(EqualityReport {
        ratio: m,
        homothety_residual: residual,
        homothetic,
        convexity_deficit: deficit,
        convexity_deficit_rel: deficit_rel,
        translation,
    })
}

/// Fits `A + b = m B` from the support functions of two convex descriptors
/// sampled on the grid directions.
pub fn translation_fit(a: &ConvexShape, b: &ConvexShape, grid: &DirectionGrid) -> Result<TranslationFit> {
    let n = grid.dim();
    if a.dim() != n || b.dim() != n {
        return Err(crate::Error::UnsupportedDimension(a.dim().max(b.dim())));
    }
    // unknowns x = (m, b_0, .., b_{n-1}); residual m h_B(u) - <b, u> - h_A(u)
    let mut ata = [[0.0; 4]; 4];
    let mut atb = [0.0; 4];
    for (i, u) in grid.directions().iter().enumerate() {
        let w = grid.weight(i);
        let row = [b.support(u), -u[0], -u[1], -u[2]];
        let ha = a.support(u);
        for r in 0..4 {
            for c in 0..4 {
                ata[r][c] += w * row[r] * row[c];
            }
            atb[r] += w * row[r] * ha;
        }
    }
    for (d, row) in ata.iter_mut().enumerate().skip(n + 1) {
        row[d] = 1.0;
    }
    let Some(x) = solve(ata, atb) else {
        bail!(InvalidInput, "translation fit is singular");
    };
    let m = x[0];
    let shift = [x[1], x[2], x[3]];
    let mut misfit = 0.0;
    let mut width = 0.0;
    for (i, u) in grid.directions().iter().enumerate() {
        let w = grid.weight(i);
        misfit += w * (a.support(u) + dot(&shift, u) - m * b.support(u)).abs();
        let neg = [-u[0], -u[1], -u[2]];
        width += w * 0.5 * (b.support(u) + b.support(&neg));
    }
    Ok(TranslationFit { m, shift, residual: misfit / (m.abs() * width).max(1e-300) })
}

/// Monotone chain hull, counter-clockwise.
fn convex_hull(pts: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut p = pts.to_vec();
    p.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut h: Vec<[f64; 2]> = Vec::with_capacity(2 * p.len());
    for pass in 0..2 {
        let start = h.len();
        let iter: &mut dyn Iterator<Item = &[f64; 2]> = if pass == 0 { &mut p.iter() } else { &mut p.iter().rev() };
        for &q in iter {
            while h.len() >= start + 2 && cross(h[h.len() - 2], h[h.len() - 1], q) <= 0.0 {
                h.pop();
            }
            h.push(q);
        }
        h.pop();
    }
    h
}
