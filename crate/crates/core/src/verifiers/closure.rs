use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{check_bm, check_cbm, SumPath};
use crate::error::{bail, Result};
use crate::geometry::{ConvexBody, ConvexShape, DirectionGrid, StarBody};
use crate::measures::{DisintegratedMeasure, SetMeasure};
use crate::report::IneqReport;

/// A pair of convex probe sets and the weight `lambda` of the first one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbePair {
    pub label: String,
    pub a: ConvexShape,
    pub b: ConvexShape,
    pub lambda: f64,
}

fn regular_polygon(k: usize, r: f64, phase: f64) -> Result<ConvexShape> {
    let v: Vec<[f64; 2]> = (0..k)
        .map(|j| {
            let t = phase + core::f64::consts::TAU * j as f64 / k as f64;
            [r * t.cos(), r * t.sin()]
        })
        .collect();
    ConvexShape::polygon(&v)
}

/// The fixed planar battery: homothets, rotated copies and disc/box/polygon
/// mixes, each at three scales and three values of `lambda`.
pub fn probe_battery() -> Result<Vec<ProbePair>> {
    let mut out = Vec::new();
    for s in [0.5, 1.0, 2.0] {
        let square = ConvexShape::boxed(&[-s, -s], &[s, s])?;
        let pairs = [
            ("disc/3disc", ConvexShape::disc(s)?, ConvexShape::disc(3.0 * s)?),
            ("square/rotated", square.clone(), regular_polygon(4, s * core::f64::consts::SQRT_2, 0.5)?),
            ("disc/square", ConvexShape::disc(s)?, square.clone()),
            ("square/hexagon", square, regular_polygon(6, 1.5 * s, 0.1)?),
            ("triangle/disc", regular_polygon(3, s, 0.3)?, ConvexShape::disc(2.0 * s)?),
        ];
        for (name, a, b) in pairs {
            for lambda in [0.25, 0.5, 0.75] {
                out.push(ProbePair { label: format!("{name} s={s} lambda={lambda}"), a: a.clone(), b: b.clone(), lambda });
            }
        }
    }
    Ok(out)
}

/// Inputs of the closure checks: a weighted family of measures on one grid,
/// an optional invertible planar map and the exponents.
#[derive(Clone, Debug)]
pub struct ClosureInput {
    pub parts: Vec<(f64, DisintegratedMeasure)>,
    pub map: Option<[[f64; 2]; 2]>,
    pub q: f64,
    /// A larger exponent for the monotonicity check.
    pub q_prime: Option<f64>,
}

/// The Brunn–Minkowski check appropriate for the sign of `q`: the complemented
/// inequality for `q < 0`, the direct one for `q > 0`.
fn run_battery<M: SetMeasure + ?Sized>(
    mu: &M,
    grid: &Arc<DirectionGrid>,
    battery: &[ProbePair],
    q: f64,
    path: &SumPath,
    tag: &str,
) -> Result<Vec<IneqReport>> {
    let mut out = Vec::with_capacity(battery.len());
    for p in battery {
        let mut r = if q < 0.0 {
            let a = StarBody::from_convex(grid.clone(), p.a.clone())?;
            let b = StarBody::from_convex(grid.clone(), p.b.clone())?;
            check_cbm(mu, &a, &b, p.lambda, q, path)?
        } else {
            let a = ConvexBody::from_shape(grid.clone(), p.a.clone())?;
            let b = ConvexBody::from_shape(grid.clone(), p.b.clone())?;
            check_bm(mu, &a, &b, p.lambda, q)?
        };
        r.name = format!("{tag}/{}", r.name);
        r.witness = format!("{} [{}]", r.witness, p.label);
        out.push(r);
    }
    Ok(out)
}

/// Runs the battery on every part, on the mixture, on the pushforward of the
/// mixture and at the larger exponent. Reports come back in that order.
pub fn closure_suite(input: &ClosureInput, battery: &[ProbePair], path: &SumPath) -> Result<Vec<IneqReport>> {
    let Some((_, first)) = input.parts.first() else {
        bail!(InvalidInput, "closure suite needs at least one measure");
    };
    if input.q == 0.0 || !input.q.is_finite() {
        bail!(InvalidExponent, "closure suite needs a finite nonzero q");
    }
    if let Some(qp) = input.q_prime {
        if !(qp > input.q) || (input.q < 0.0 && qp >= 0.0) {
            bail!(InvalidExponent, "q' = {qp} must exceed q = {} with the same sign", input.q);
        }
    }
    let grid = first.grid().clone();
    let mut out = Vec::new();
    for (k, (_, m)) in input.parts.iter().enumerate() {
        out.extend(run_battery(m, &grid, battery, input.q, path, &format!("part{k}"))?);
    }
    let refs: Vec<(f64, &DisintegratedMeasure)> = input.parts.iter().map(|(c, m)| (*c, m)).collect();
    let mix = DisintegratedMeasure::mix(&refs)?;
    out.extend(run_battery(&mix, &grid, battery, input.q, path, "mixture")?);
    if let Some(t) = input.map {
        let image = mix.linear_image(t)?;
        let g = image.grid().clone();
        out.extend(run_battery(&image, &g, battery, input.q, path, "pushforward")?);
    }
    if let Some(qp) = input.q_prime {
        out.extend(run_battery(&mix, &grid, battery, qp, path, "monotone")?);
    }
    Ok(out)
}
