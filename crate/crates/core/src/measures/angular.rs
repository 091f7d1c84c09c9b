use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::geometry::DirectionGrid;
use crate::linalg::{angle_of, dot, normalize, Vec3, ORIGIN};

/// Angular density `w0` on the sphere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AngularWeight {
    Constant {
        #[serde(default = "one")]
        value: f64,
    },
    /// `value` on the closed cone of directions within `half_angle` of `axis`, zero elsewhere.
    Cone {
        axis: Vec<f64>,
        half_angle: f64,
        #[serde(default = "one")]
        value: f64,
    },
    /// Planar trigonometric polynomial `a0 + sum cos[k] cos((k+1)t) + sin[k] sin((k+1)t)`.
    Fourier {
        a0: f64,
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
    /// Values at the grid directions.
    Samples { values: Vec<f64> },
}

fn one() -> f64 {
    1.0
}

/// Directions this close to a cone's boundary get half weight.
const CONE_EDGE: f64 = 1e-9;

impl AngularWeight {
    pub fn constant(value: f64) -> Self {
        AngularWeight::Constant { value }
    }

    /// The planar quadrant `x, y >= 0`.
    pub fn quadrant() -> Self {
        AngularWeight::Cone {
            axis: alloc::vec![1.0, 1.0],
            half_angle: core::f64::consts::FRAC_PI_4,
            value: 1.0,
        }
    }

    fn axis(&self, dim: usize) -> Result<Option<Vec3>> {
        let AngularWeight::Cone { axis, .. } = self else { return Ok(None) };
        if axis.len() != dim {
            bail!(InvalidMeasure, "cone axis has {} coordinates in dimension {dim}", axis.len());
        }
        let mut a = ORIGIN;
        a[..dim].copy_from_slice(axis);
        match normalize(&a) {
            Some(u) => Ok(Some(u)),
            None => bail!(InvalidMeasure, "cone axis must be nonzero"),
        }
    }

    /// Pointwise value at a unit direction.
    pub fn eval(&self, u: &Vec3, dim: usize) -> Result<f64> {
        Ok(match self {
            AngularWeight::Constant { value } => *value,
            AngularWeight::Cone { half_angle, value, .. } => {
                let a = self.axis(dim)?.unwrap();
                let ang = dot(u, &a).clamp(-1.0, 1.0).acos();
                if ang <= half_angle + CONE_EDGE {
                    *value
                } else {
                    0.0
                }
            }
            AngularWeight::Fourier { a0, cos, sin } => {
                if dim != 2 {
                    return Err(crate::Error::UnsupportedDimension(dim));
                }
                let t = angle_of(u);
                let mut s = *a0;
                for (k, c) in cos.iter().enumerate() {
                    s += c * ((k + 1) as f64 * t).cos();
                }
                for (k, c) in sin.iter().enumerate() {
                    s += c * ((k + 1) as f64 * t).sin();
                }
                s
            }
            AngularWeight::Samples { .. } => bail!(InvalidMeasure, "sampled weights have no pointwise value"),
        })
    }

    /// Values at the grid directions together with the quadrature factor for
    /// each direction: one, except one half on the edge of a cone.
    pub fn on_grid(&self, grid: &DirectionGrid) -> Result<(Vec<f64>, Vec<f64>)> {
        let dim = grid.dim();
        let (w, f): (Vec<f64>, Vec<f64>) = match self {
            AngularWeight::Samples { values } => {
                if values.len() != grid.len() {
                    bail!(GridMismatch, "{} angular samples for a grid of {}", values.len(), grid.len());
                }
                (values.clone(), alloc::vec![1.0; values.len()])
            }
            AngularWeight::Cone { half_angle, .. } => {
                let a = self.axis(dim)?.unwrap();
                let mut w = Vec::with_capacity(grid.len());
                let mut f = Vec::with_capacity(grid.len());
                for u in grid.directions() {
                    w.push(self.eval(u, dim)?);
                    let ang = dot(u, &a).clamp(-1.0, 1.0).acos();
                    f.push(if (ang - half_angle).abs() <= CONE_EDGE { 0.5 } else { 1.0 });
                }
                (w, f)
            }
            _ => {
                let w = grid.directions().iter().map(|u| self.eval(u, dim)).collect::<Result<Vec<_>>>()?;
                let f = alloc::vec![1.0; w.len()];
                (w, f)
            }
        };
        if let Some(bad) = w.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            bail!(InvalidMeasure, "angular weight must be finite and nonnegative, found {bad}");
        }
        if w.iter().all(|v| *v == 0.0) {
            bail!(InvalidMeasure, "angular weight vanishes on every grid direction");
        }
        Ok((w, f))
    }
}
