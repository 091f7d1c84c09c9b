use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::geometry::{minkowski_sum, ConvexBody};
use crate::measures::SetMeasure;

/// Samples of `Psi(t) = mu((1 - t) A + t B)^q` on a uniform grid of `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BonnesenReport {
    pub q: f64,
    pub t: Vec<f64>,
    pub psi: Vec<f64>,
    /// `min_i Psi(t_i) - (Psi(t_{i-1}) + Psi(t_{i+1})) / 2`, relative to `max |Psi|`.
    pub concavity_defect: f64,
    /// `max_i |Psi(t_i) - (1 - t_i) Psi(0) - t_i Psi(1)|`, relative to `max |Psi|`.
    pub affinity_defect: f64,
    pub tolerance: f64,
    pub concave: bool,
    pub affine: bool,
}

pub fn bonnesen_concavity<M: SetMeasure + ?Sized>(
    mu: &M,
    a: &ConvexBody,
    b: &ConvexBody,
    q: f64,
    steps: usize,
    tol: f64,
) -> Result<BonnesenReport> {
    if !(q > 0.0 && q.is_finite()) {
        bail!(InvalidExponent, "Bonnesen test needs q > 0, got {q}");
    }
    if steps < 2 {
        bail!(InvalidInput, "need at least two steps");
    }
    let t: Vec<f64> = (0..=steps).map(|i| i as f64 / steps as f64).collect();
    let mut psi = Vec::with_capacity(t.len());
    for &s in &t {
        // minkowski_sum(a, b, l) is l a + (1 - l) b
        let m = mu.convex_mass(&minkowski_sum(a, b, 1.0 - s)?)?;
        if !m.is_finite() {
            bail!(Precondition, "infinite mass at t = {s}");
        }
        psi.push(m.powf(q));
    }
    let scale = psi.iter().fold(1e-300f64, |m, x| m.max(x.abs()));
    let concavity_defect = psi.windows(3).map(|w| w[1] - 0.5 * (w[0] + w[2])).fold(f64::INFINITY, f64::min) / scale;
    let (p0, p1) = (psi[0], psi[steps]);
    let affinity_defect = t.iter().zip(&psi).map(|(s, p)| (p - (1.0 - s) * p0 - s * p1).abs()).fold(0.0, f64::max) / scale;
    Ok(BonnesenReport {
        q,
        concave: concavity_defect >= -tol,
        affine: affinity_defect <= tol,
        t,
        psi,
        concavity_defect,
        affinity_defect,
        tolerance: tol,
    })
}
