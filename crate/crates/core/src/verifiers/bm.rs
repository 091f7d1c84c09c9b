use alloc::format;

use super::{combine, describe_body, SumPath, CLOSED_FORM_TOL};
use crate::error::{bail, Result};
use crate::exponents::{power_mean, Exponent};
use crate::geometry::{minkowski_sum, CoStar, ConvexBody, StarBody};
use crate::measures::SetMeasure;
use crate::onedim::RadialLaw;
use crate::report::{IneqReport, Orientation};

fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        bail!(InvalidInput, "lambda must lie in [0, 1], got {lambda}");
    }
    Ok(())
}

fn exponent(q: f64) -> Result<Exponent> {
    if q.is_nan() {
        bail!(InvalidExponent, "q is NaN");
    }
    Exponent::new(q)
}

/// `mu(lambda A + (1 - lambda) B) >= M_q(mu(A), mu(B); lambda)` for convex bodies.
pub fn check_bm<M: SetMeasure + ?Sized>(mu: &M, a: &ConvexBody, b: &ConvexBody, lambda: f64, q: f64) -> Result<IneqReport> {
    check_lambda(lambda)?;
    let p = exponent(q)?;
    let ma = mu.convex_mass(a)?;
    let mb = mu.convex_mass(b)?;
    for (name, m) in [("A", ma), ("B", mb)] {
        if !(m.is_finite() && m > 0.0) {
            bail!(Precondition, "mu({name}) = {m} must be finite and positive");
        }
    }
    let lhs = mu.convex_mass(&minkowski_sum(a, b, lambda)?)?;
    let rhs = power_mean(ma, mb, lambda, p);
    let mut r = IneqReport::new("bm", lhs, rhs, Orientation::Ge, CLOSED_FORM_TOL)
        .with_witness(format!("mu={} lambda={lambda} q={q} A={:?} B={:?}", mu.describe(), a.shape(), b.shape()));
    if q > 1.0 / mu.dim() as f64 {
        r = r.with_warning(format!("q = {q} exceeds 1/n"));
    }
    Ok(r)
}

/// `mu(R^n \ (lambda A + (1 - lambda) B)) <= M_q(mu(R^n \ A), mu(R^n \ B); lambda)`.
pub fn check_cbm<M: SetMeasure + ?Sized>(
    mu: &M,
    a: &StarBody,
    b: &StarBody,
    lambda: f64,
    q: f64,
    path: &SumPath,
) -> Result<IneqReport> {
    check_lambda(lambda)?;
    let p = exponent(q)?;
    let ca = mu.costar_mass(&CoStar::from_star(a))?;
    let cb = mu.costar_mass(&CoStar::from_star(b))?;
    for (name, m) in [("A", ca), ("B", cb)] {
        if !m.is_finite() {
            bail!(Precondition, "mu(R^n \\ {name}) is infinite");
        }
    }
    let sum = combine(a, b, lambda, 1.0 - lambda, path)?;
    let lhs = sum.complement_mass(mu)?;
    let rhs = power_mean(ca, cb, lambda, p);
    Ok(IneqReport::new("cbm", lhs, rhs, Orientation::Le, sum.tolerance()).with_witness(format!(
        "mu={} lambda={lambda} q={q} path={} A={} B={}",
        mu.describe(),
        sum.path(),
        describe_body(a),
        describe_body(b)
    )))
}

/// The complemented inequality for half-lines `A = (a, inf)`, `B = (b, inf)` under
/// the law on `[0, inf)`: the combination is `(lambda a + (1 - lambda) b, inf)`.
pub fn check_cbm_halfline(law: &RadialLaw, a: f64, b: f64, lambda: f64, q: f64) -> Result<IneqReport> {
    check_lambda(lambda)?;
    let p = exponent(q)?;
    if !(a >= 0.0 && b >= 0.0) {
        bail!(InvalidInput, "half-line endpoints must be nonnegative");
    }
    let c = lambda * a + (1.0 - lambda) * b;
    let lhs = law.interval_mass(0.0, c);
    let rhs = power_mean(law.interval_mass(0.0, a), law.interval_mass(0.0, b), lambda, p);
    Ok(IneqReport::new("cbm_halfline", lhs, rhs, Orientation::Le, CLOSED_FORM_TOL)
        .with_witness(format!("law={law} a={a} b={b} lambda={lambda} q={q}")))
}
