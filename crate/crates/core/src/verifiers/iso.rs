use alloc::format;
use alloc::string::String;

use super::{combine, describe_body, proportional, SumPath, CLOSED_FORM_TOL, VOXEL_TOL};
use crate::error::{bail, Result};
use crate::geometry::{CoStar, ConvexBody, StarBody};
use crate::measures::{boundary_measure, BoundaryEstimate, BoundaryMode, DisintegratedMeasure, Region, SetMeasure, Side};
use crate::onedim::hypothesis_warnings;
use crate::report::{IneqReport, Orientation};

fn boundary_tolerance(b: &BoundaryEstimate) -> f64 {
    if b.mode.starts_with("voxel") {
        VOXEL_TOL
    } else {
        CLOSED_FORM_TOL
    }
}

fn describe_region(region: Region<'_>) -> String {
    match region {
        Region::Star(s) => describe_body(s),
        Region::Convex(k) => format!("{:?}", k.shape()),
        Region::CoStar(c) => match c.shape() {
            Some(s) => format!("complement of {s:?}"),
            None => format!("complement of sampled[{}]", c.rho().len()),
        },
    }
}

fn region_mass<M: SetMeasure + ?Sized>(mu: &M, region: Region<'_>) -> Result<f64> {
    match region {
        Region::Star(s) => mu.star_mass(s),
        Region::Convex(k) => mu.convex_mass(k),
        Region::CoStar(c) => mu.costar_mass(c),
    }
}

/// Isoperimetric inequality for a `q`-concave (`q > 0`, star region, outer
/// boundary) or `q`-complemented (`q < 0`, co-star region, inner boundary) measure.
pub fn check_isoperimetry<M: SetMeasure + ?Sized>(
    mu: &M,
    k: &ConvexBody,
    region: Region<'_>,
    q: f64,
    mode: BoundaryMode,
) -> Result<IneqReport> {
    if q == 0.0 || !q.is_finite() {
        bail!(InvalidExponent, "isoperimetry needs a finite nonzero q, got {q}");
    }
    let costar = matches!(region, Region::CoStar(_));
    if (q > 0.0) == costar {
        bail!(Precondition, "q = {q} needs a {} region", if q > 0.0 { "bounded star" } else { "co-star" });
    }
    let m = region_mass(mu, region)?;
    if !(m.is_finite() && m > 0.0) {
        bail!(Precondition, "region mass {m} must be finite and positive");
    }
    let (side, mk) = if q > 0.0 {
        (Side::Outer, mu.convex_mass(k)?)
    } else {
        (Side::Inner, mu.convex_complement_mass(k)?)
    };
    if !mk.is_finite() {
        bail!(Precondition, "the mass attached to K is infinite");
    }
    let b = boundary_measure(mu, region, k, side, mode)?;
    let rhs = (1.0 / q).abs() * mk.powf(q) * m.powf(1.0 - q);
    let mut r = IneqReport::new("isoperimetry", b.value, rhs, Orientation::Ge, boundary_tolerance(&b))
        .with_witness(format!("mu={} q={q} K={:?} region={} boundary={}", mu.describe(), k.shape(), describe_region(region), b.mode));
    if b.flagged {
        r = r.with_warning("boundary limit did not settle");
    }
    Ok(r)
}

/// `mu(R^n \ (A + tB)) <= Phi(Phi^{-1}(mu(R^n \ A)) + t Phi^{-1}(mu(R^n \ B)))` with the
/// normalized law of `mu`.
pub fn check_ocbm_nd(mu: &DisintegratedMeasure, a: &StarBody, b: &StarBody, t: f64, path: &SumPath) -> Result<IneqReport> {
    if !(t >= 0.0 && t.is_finite()) {
        bail!(InvalidInput, "t must be finite and nonnegative, got {t}");
    }
    let law = mu.normalized_law()?;
    if !law.flags().tail_integrable {
        bail!(Precondition, "law {law} has an infinite tail");
    }
    let ma = mu.costar_mass(&CoStar::from_star(a))?;
    let mb = mu.costar_mass(&CoStar::from_star(b))?;
    if !(ma.is_finite() && mb.is_finite()) {
        bail!(Precondition, "complement masses must be finite");
    }
    let (lhs, tol, path_name) = if t == 0.0 {
        (ma, CLOSED_FORM_TOL, "exact".into())
    } else {
        let sum = combine(a, b, 1.0, t, path)?;
        (sum.complement_mass(mu)?, sum.tolerance(), sum.path())
    };
    let rhs = law.tail(law.tail_inv(ma)? + t * law.tail_inv(mb)?);
    let mut r = IneqReport::new("ocbm_nd", lhs, rhs, Orientation::Le, tol).with_witness(format!(
        "mu={} t={t} path={path_name} A={} B={}",
        mu.describe(),
        describe_body(a),
        describe_body(b)
    ));
    if proportional(b.rho(), mu.rho_b(), 1e-9).is_none() {
        r = r.with_warning("B is not a dilate of the measure's body");
    }
    Ok(hypothesis_warnings(&law, r))
}

/// `mu^-_K(C) >= s I(mu(C))` where `K = s B` for the measure's body `B` and
/// `I = phi o Phi^{-1}` is the profile of the normalized law.
pub fn check_iso_warped(mu: &DisintegratedMeasure, k: &ConvexBody, c: &CoStar, mode: BoundaryMode) -> Result<IneqReport> {
    let Some(s) = proportional(k.rho(), mu.rho_b(), 1e-9) else {
        bail!(Precondition, "K must be a dilate of the measure's body");
    };
    let law = mu.normalized_law()?;
    let m = mu.costar_mass(c)?;
    if !m.is_finite() {
        bail!(Precondition, "co-star has infinite mass");
    }
    let b = boundary_measure(mu, Region::CoStar(c), k, Side::Inner, mode)?;
    let rhs = s * law.iso_profile(m)?;
    let mut r = IneqReport::new("iso_warped", b.value, rhs, Orientation::Ge, boundary_tolerance(&b))
        .with_witness(format!("mu={} K={:?} C={} boundary={}", mu.describe(), k.shape(), describe_region(Region::CoStar(c)), b.mode));
    if b.flagged {
        r = r.with_warning("boundary limit did not settle");
    }
    Ok(hypothesis_warnings(&law, r))
}
