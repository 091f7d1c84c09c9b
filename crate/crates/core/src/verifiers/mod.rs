//! Checkers for the Brunn–Minkowski family of inequalities, equality
//! diagnostics and the isoperimetric minimizer search.
//!
//! Every checker returns an [`IneqReport`](crate::IneqReport) whose witness
//! records the inputs and which computational path produced the left side.

mod bm;
mod bonnesen;
mod closure;
mod equality;
mod iso;
mod profile;

use alloc::format;
use alloc::string::String;

use crate::error::{bail, Result};
use crate::geometry::{star_minkowski, CoStar, Radial, StarBody, StarShape};
use crate::measures::SetMeasure;
use crate::oracle::{voxel_minkowski, voxelize_star, DensityTable, Lattice, OracleSettings, VoxelSet};

pub use bm::{check_bm, check_cbm, check_cbm_halfline};
pub use bonnesen::{bonnesen_concavity, BonnesenReport};
pub use closure::{closure_suite, probe_battery, ClosureInput, ProbePair};
pub use equality::{equality_diagnostics, translation_fit, EqualityOptions, EqualityReport, TranslationFit};
pub use iso::{check_iso_warped, check_isoperimetry, check_ocbm_nd};
pub use profile::{profile_search, ProfileOptions, ProfileResult};

/// Tolerance for closed-form and quadrature paths.
pub const CLOSED_FORM_TOL: f64 = 1e-6;
/// Tolerance for results that went through the voxel oracle.
pub const VOXEL_TOL: f64 = 1e-3;

/// How a Minkowski combination is formed.
#[derive(Clone, Debug, PartialEq)]
pub enum SumPath {
    /// Exact for convex descriptors, the planar star-polygon sum otherwise.
    Auto,
    /// Support functions of convex descriptors; fails on anything else.
    Exact,
    /// Planar star-polygon sum on the grid rays.
    Star,
    Voxel(OracleSettings),
}

/// `wa A + wb B` in whichever representation the path produced.
pub(crate) enum Combination {
    Body(StarBody, &'static str),
    Voxel(VoxelSet, OracleSettings),
}

impl Combination {
    pub(crate) fn path(&self) -> String {
        match self {
            Combination::Body(_, p) => String::from(*p),
            Combination::Voxel(_, s) => format!("voxel {}", s.describe()),
        }
    }

    pub(crate) fn tolerance(&self) -> f64 {
        match self {
            Combination::Body(..) => CLOSED_FORM_TOL,
            Combination::Voxel(..) => VOXEL_TOL,
        }
    }

    /// `mu(R^n \ (wa A + wb B))`.
    pub(crate) fn complement_mass<M: SetMeasure + ?Sized>(&self, mu: &M) -> Result<f64> {
        match self {
            Combination::Body(b, _) => mu.costar_mass(&CoStar::from_star(b)),
            Combination::Voxel(v, s) => {
                let table = DensityTable::new(mu, *v.lattice(), s.refine_depth)?;
                Ok(table.mass(&v.complement())?.value)
            }
        }
    }
}

pub(crate) fn is_convex(a: &StarBody) -> bool {
    matches!(a.shape(), Some(StarShape::Convex(_)))
}

/// `wa A + wb B` for nonnegative weights, not both zero.
pub(crate) fn combine(a: &StarBody, b: &StarBody, wa: f64, wb: f64, path: &SumPath) -> Result<Combination> {
    a.grid().ensure_same(b.grid())?;
    if !(wa >= 0.0 && wb >= 0.0 && wa + wb > 0.0 && wa.is_finite() && wb.is_finite()) {
        bail!(InvalidInput, "Minkowski weights must be nonnegative and not both zero");
    }
    let convex = is_convex(a) && is_convex(b);
    let path = match path {
        SumPath::Auto if convex => SumPath::Exact,
        SumPath::Auto if a.dim() == 2 => SumPath::Star,
        SumPath::Auto => bail!(NonConvex, "non-convex sums in dimension {} need the voxel path", a.dim()),
        p => p.clone(),
    };
    if let SumPath::Voxel(s) = path {
        let lattice = Lattice::from_settings(a.dim(), &s)?;
        let part = |x: &StarBody, w: f64| -> Result<Option<VoxelSet>> {
            if w == 0.0 {
                return Ok(None);
            }
            Ok(Some(voxelize_star(lattice, &x.scaled(w)?)?))
        };
        let v = match (part(a, wa)?, part(b, wb)?) {
            (Some(x), Some(y)) => voxel_minkowski(&x, &y)?,
            (Some(x), None) | (None, Some(x)) => x,
            (None, None) => unreachable!(),
        };
        return Ok(Combination::Voxel(v, s));
    }
    if wa == 0.0 {
        return Ok(Combination::Body(b.scaled(wb)?, "exact"));
    }
    if wb == 0.0 {
        return Ok(Combination::Body(a.scaled(wa)?, "exact"));
    }
    match path {
        SumPath::Exact => {
            let (Some(StarShape::Convex(x)), Some(StarShape::Convex(y))) = (a.shape(), b.shape()) else {
                bail!(NonConvex, "exact Minkowski sums need convex descriptors");
            };
            let s = x.combine(wa, y, wb)?;
            Ok(Combination::Body(StarBody::from_convex(a.grid().clone(), s)?, "exact"))
        }
        SumPath::Star => Ok(Combination::Body(star_minkowski(a, b, wa, wb)?, "star-polygon")),
        _ => unreachable!(),
    }
}

/// Short description of a body for witnesses.
pub(crate) fn describe_body(a: &StarBody) -> String {
    match a.shape() {
        Some(s) => format!("{s:?}"),
        None => format!("sampled[{}]", a.rho().len()),
    }
}

/// Whether `rho_a = t rho_b` for a single `t`, relative tolerance `rel`.
pub(crate) fn proportional(a: &[f64], b: &[f64], rel: f64) -> Option<f64> {
    if a.is_empty() || b.iter().any(|x| !(*x > 0.0)) {
        return None;
    }
    let t = a[0] / b[0];
    a.iter().zip(b).all(|(x, y)| (x - t * y).abs() <= rel * x.abs()).then_some(t)
}

#[cfg(test)]
mod tests;
