use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::geometry::{CoStar, ConvexBody, FourierStar, StarBody, StarShape};
use crate::measures::{boundary_measure, BoundaryMode, Region, SetMeasure, Side};
use crate::numeric::nelder_mead;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProfileOptions {
    /// Highest Fourier mode of `log rho`.
    pub degree: usize,
    pub max_evals: usize,
    /// Size of the deterministic perturbation of the starting shape.
    pub perturbation: f64,
    pub ftol: f64,
    /// Relative tolerance on `gap >= 0`.
    pub tolerance: f64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions { degree: 3, max_evals: 4000, perturbation: 0.05, ftol: 1e-14, tolerance: 1e-6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileResult {
    pub best_boundary: f64,
    /// The minimizing co-star, rescaled to mass `v`.
    pub shape: FourierStar,
    /// Its radial function on the grid.
    pub rho: Vec<f64>,
    /// `-(1/q) mu(R^n \ K)^q v^{1-q}`.
    pub bound: f64,
    pub gap: f64,
    /// Sum of the absolute non-constant coefficients of `log rho`.
    pub fourier_tail: f64,
    pub evaluations: usize,
    /// Set when the optimizer ran out of budget or the bound was violated beyond tolerance.
    pub flagged: bool,
}

fn costar(grid: &alloc::sync::Arc<crate::geometry::DirectionGrid>, f: &FourierStar) -> Result<CoStar> {
    Ok(CoStar::from_star(&StarBody::from_shape(grid.clone(), StarShape::Fourier(f.clone()))?))
}

/// Minimizes the inner boundary measure over co-stars `exp(Fourier series)` of
/// mass `v`, for a `q`-homogeneous measure with `q < 0`.
pub fn profile_search<M: SetMeasure + ?Sized>(mu: &M, k: &ConvexBody, v: f64, options: &ProfileOptions) -> Result<ProfileResult> {
    if mu.dim() != 2 {
        return Err(crate::Error::UnsupportedDimension(mu.dim()));
    }
    let Some(q) = mu.homogeneity() else {
        bail!(Precondition, "profile search needs a homogeneous measure");
    };
    if !(q < 0.0) {
        bail!(Precondition, "profile search needs q < 0, got {q}");
    }
    if !(v > 0.0 && v.is_finite()) {
        bail!(InvalidInput, "target mass must be positive and finite");
    }
    let mk = mu.convex_complement_mass(k)?;
    if !mk.is_finite() {
        bail!(Precondition, "mu(R^n \\ K) is infinite");
    }
    let grid = mu.grid().clone();
    let d = options.degree;

    // shape with zero mean log radius, then the dilation t with mu(t C) = t^{1/q} mu(C) = v
    let normalized = |x: &[f64]| -> Result<FourierStar> {
        let f = FourierStar::new(0.0, x[..d].to_vec(), x[d..].to_vec(), true)?;
        let m = mu.costar_mass(&costar(&grid, &f)?)?;
        if !(m.is_finite() && m > 0.0) {
            bail!(Precondition, "probe co-star has mass {m}");
        }
        Ok(f.scaled((v / m).powf(q)))
    };
    let objective = |x: &[f64]| -> Result<f64> {
        let f = normalized(x)?;
        let c = costar(&grid, &f)?;
        Ok(boundary_measure(mu, Region::CoStar(&c), k, Side::Inner, BoundaryMode::Auto)?.value)
    };

    let start: Vec<f64> = (0..2 * d).map(|j| options.perturbation * if j % 2 == 0 { 1.0 } else { -0.5 } / (1 + j / 2) as f64).collect();
    let min = nelder_mead(|x| objective(x).unwrap_or(f64::INFINITY), &start, 0.1, options.max_evals, options.ftol);

    let shape = normalized(&min.x)?;
    let c = costar(&grid, &shape)?;
    let best = boundary_measure(mu, Region::CoStar(&c), k, Side::Inner, BoundaryMode::Auto)?.value;
    let bound = -(1.0 / q) * mk.powf(q) * v.powf(1.0 - q);
    let gap = best - bound;
    let fourier_tail = min.x.iter().map(|c| c.abs()).sum();
    let flagged = (d > 0 && min.evaluations >= options.max_evals) || gap < -options.tolerance * bound.abs();
    Ok(ProfileResult {
        best_boundary: best,
        rho: c.rho().to_vec(),
        shape,
        bound,
        gap,
        fourier_tail,
        evaluations: min.evaluations,
        flagged,
    })
}
