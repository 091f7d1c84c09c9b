use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use super::{AngularWeight, SetMeasure};
use crate::error::{bail, Result};
use crate::exponents::{homogeneous_dual, Exponent};
use crate::geometry::{CoStar, ConvexBody, DirectionGrid, GridKind, Radial, StarBody, StarShape};
use crate::linalg::{norm, scale, Vec3};
use crate::onedim::RadialLaw;

/// `mu = int_{S^{n-1}} mu_theta d eta(theta)` with ray laws
/// `phi_theta(r) = phi(r / rho_B(theta)) / rho_B(theta)`.
///
/// The density is `w(r theta) = w0(theta) rho_B^{n-1} phi(r / rho_B) r^{1-n}` and the
/// angular weights are `eta_i = w0_i rho_B(theta_i)^n sigma_i`.
#[derive(Clone, Debug)]
pub struct DisintegratedMeasure {
    grid: Arc<DirectionGrid>,
    w0: Vec<f64>,
    eta: Vec<f64>,
    rho_b: Vec<f64>,
    body: Option<StarBody>,
    law: RadialLaw,
    q: Option<f64>,
    lebesgue: Option<f64>,
    label: String,
}

impl DisintegratedMeasure {
    /// `w(x) = w0(x/|x|) |x|^{1/q - n}` with `1/q = 1/p + n`, a `q`-homogeneous measure.
    pub fn homogeneous(w0: &AngularWeight, p: Exponent, grid: Arc<DirectionGrid>) -> Result<Self> {
        let n = grid.dim();
        let q = homogeneous_dual(p, n)?.value();
        let (w, f) = w0.on_grid(&grid)?;
        let eta = (0..grid.len()).map(|i| w[i] * f[i] * grid.weight(i)).collect();
        let law = RadialLaw::power(1.0 - 1.0 / q)?;
        let lebesgue = match (p, w0) {
            (Exponent::PosInf, AngularWeight::Constant { value }) => Some(*value),
            _ => None,
        };
        let label = match lebesgue {
            Some(c) if c == 1.0 => format!("lebesgue(n={n})"),
            Some(c) => format!("{c} * lebesgue(n={n})"),
            None => format!("homogeneous(p={}, q={q}, n={n})", p.value()),
        };
        let m = grid.len();
        Ok(DisintegratedMeasure {
            grid,
            w0: w,
            eta,
            rho_b: alloc::vec![1.0; m],
            body: None,
            law,
            q: Some(q),
            lebesgue,
            label,
        })
    }

    /// Lebesgue measure on `R^n`.
    pub fn lebesgue(grid: Arc<DirectionGrid>) -> Result<Self> {
        Self::homogeneous(&AngularWeight::constant(1.0), Exponent::PosInf, grid)
    }

    /// `w0(x / |x|_B) |x|_B^{1-n} phi(|x|_B) dx` for a star body `B`.
    pub fn warped(w0: &AngularWeight, body: &StarBody, law: RadialLaw) -> Result<Self> {
        let grid = body.grid().clone();
        let n = grid.dim() as i32;
        let (w, f) = w0.on_grid(&grid)?;
        let rho_b = body.rho().to_vec();
        let eta: Vec<f64> = (0..grid.len()).map(|i| w[i] * f[i] * rho_b[i].powi(n) * grid.weight(i)).collect();
        if eta.iter().any(|e| !e.is_finite()) {
            bail!(InvalidMeasure, "angular mass is infinite");
        }
        let label = format!("warped(phi={law}, n={n})");
        Ok(DisintegratedMeasure {
            grid,
            w0: w,
            eta,
            rho_b,
            body: Some(body.clone()),
            law,
            q: None,
            lebesgue: None,
            label,
        })
    }

    /// Direct construction from angular weights, a law and per-direction radius scales.
    pub fn from_parts(grid: Arc<DirectionGrid>, eta: Vec<f64>, law: RadialLaw, rho_b: Vec<f64>, q: Option<f64>) -> Result<Self> {
        if eta.len() != grid.len() || rho_b.len() != grid.len() {
            bail!(GridMismatch, "angular data does not match a grid of {}", grid.len());
        }
        if eta.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            bail!(InvalidMeasure, "angular weights must be finite and nonnegative");
        }
        if rho_b.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            bail!(InvalidMeasure, "radius scales must be positive and finite");
        }
        let n = grid.dim() as i32;
        let w0 = (0..grid.len())
            .map(|i| {
                let s = grid.weight(i);
                if s > 0.0 {
                    eta[i] / (s * rho_b[i].powi(n))
                } else {
                    0.0
                }
            })
            .collect();
        let label = format!("disintegrated(phi={law}, n={n})");
        Ok(DisintegratedMeasure { grid, w0, eta, rho_b, body: None, law, q, lebesgue: None, label })
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    /// `c_eta = sum eta_i`.
    pub fn eta_total(&self) -> f64 {
        self.eta.iter().sum()
    }

    pub fn law(&self) -> &RadialLaw {
        &self.law
    }

    /// `c_eta * phi`, for which the one-dimensional formulas hold verbatim after
    /// normalising `eta` to a probability.
    pub fn normalized_law(&self) -> Result<RadialLaw> {
        self.law.clone().with_scale(self.eta_total())
    }

    pub fn rho_b(&self) -> &[f64] {
        &self.rho_b
    }

    pub fn body(&self) -> Option<&StarBody> {
        self.body.as_ref()
    }

    pub fn is_lebesgue(&self) -> bool {
        self.lebesgue.is_some()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    fn ray_head(&self, i: usize, r: f64) -> f64 {
        if self.eta[i] == 0.0 || r == 0.0 {
            return 0.0;
        }
        self.eta[i] * self.law.interval_mass(0.0, r / self.rho_b[i])
    }

    fn ray_tail(&self, i: usize, r: f64) -> f64 {
        if self.eta[i] == 0.0 || r == f64::INFINITY {
            return 0.0;
        }
        self.eta[i] * self.law.interval_mass(r / self.rho_b[i], f64::INFINITY)
    }

    fn radial_star_mass(&self, rho: &[f64]) -> f64 {
        (0..rho.len()).map(|i| self.ray_head(i, rho[i])).sum()
    }

    fn radial_costar_mass(&self, rho: &[f64]) -> f64 {
        (0..rho.len()).map(|i| self.ray_tail(i, rho[i])).sum()
    }

    /// Mass of the radial slab `{ r theta : a < r <= b, theta in S }` for a set of directions.
    pub fn slab_mass(&self, mask: &[bool], a: f64, b: f64) -> Result<f64> {
        if mask.len() != self.grid.len() {
            bail!(GridMismatch, "direction mask has {} entries for a grid of {}", mask.len(), self.grid.len());
        }
        Ok((0..mask.len())
            .filter(|&i| mask[i] && self.eta[i] > 0.0)
            .map(|i| self.eta[i] * self.law.interval_mass(a / self.rho_b[i], b / self.rho_b[i]))
            .sum())
    }

    /// `eta(S) = mu((1, 2] S) / (q (2^{1/q} - 1))` for homogeneous measures.
    pub fn eta_from_slab(&self, mask: &[bool]) -> Result<f64> {
        let Some(q) = self.q else {
            bail!(Precondition, "slab recovery needs a homogeneous measure");
        };
        Ok(eta_from_slab_mass(q, self.slab_mass(mask, 1.0, 2.0)?)?)
    }

    /// Rotation by `steps` grid spacings on a uniform circle grid.
    pub fn rotated(&self, steps: usize) -> Result<Self> {
        if self.grid.kind() != GridKind::Circle {
            bail!(InvalidInput, "index rotation needs a uniform circle grid");
        }
        let n = self.grid.len();
        let rot = |v: &[f64]| -> Vec<f64> { (0..n).map(|i| v[(i + n - steps % n) % n]).collect() };
        Ok(DisintegratedMeasure {
            grid: self.grid.clone(),
            w0: rot(&self.w0),
            eta: rot(&self.eta),
            rho_b: rot(&self.rho_b),
            body: None,
            law: self.law.clone(),
            q: self.q,
            lebesgue: self.lebesgue,
            label: format!("rotate({}, {steps})", self.label),
        })
    }

    /// `sum c_k mu_k` for measures sharing grid, law and radius scales.
    pub fn mix(parts: &[(f64, &DisintegratedMeasure)]) -> Result<Self> {
        let Some((_, first)) = parts.first() else {
            bail!(InvalidInput, "empty mixture");
        };
        let mut out = (*first).clone();
        out.eta.iter_mut().for_each(|e| *e = 0.0);
        out.w0.iter_mut().for_each(|e| *e = 0.0);
        let mut leb = Some(0.0);
        for (c, m) in parts {
            if !(*c >= 0.0 && c.is_finite()) {
                bail!(InvalidInput, "mixture weights must be nonnegative");
            }
            m.grid.ensure_same(&first.grid)?;
            if m.law != first.law || m.rho_b != first.rho_b {
                bail!(InvalidMeasure, "mixed measures must share the radial law and radius scales");
            }
            for i in 0..out.eta.len() {
                out.eta[i] += c * m.eta[i];
                out.w0[i] += c * m.w0[i];
            }
            leb = match (leb, m.lebesgue) {
                (Some(a), Some(b)) => Some(a + c * b),
                _ => None,
            };
        }
        out.lebesgue = leb;
        out.label = format!("mixture of {}", parts.len());
        Ok(out)
    }

    /// Pushforward under an invertible planar linear map `T`.
    ///
    /// `T_* mu (A) = mu(T^{-1} A)`, and `T^{-1} A` has radial function
    /// `rho_A(T theta / |T theta|) / |T theta|`, so the image is again disintegrated on
    /// the grid of directions `T theta_i / |T theta_i|` with scales `|T theta_i| rho_B`.
    pub fn linear_image(&self, t: [[f64; 2]; 2]) -> Result<super::LinearImage> {
        if self.grid.dim() != 2 {
            return Err(crate::Error::UnsupportedDimension(self.grid.dim()));
        }
        let det = t[0][0] * t[1][1] - t[0][1] * t[1][0];
        if !(det.abs() > 1e-12) || !det.is_finite() {
            bail!(InvalidInput, "linear map must be invertible");
        }
        let mut dirs = Vec::with_capacity(self.grid.len());
        let mut rho_b = Vec::with_capacity(self.grid.len());
        for (i, u) in self.grid.directions().iter().enumerate() {
            let v = [t[0][0] * u[0] + t[0][1] * u[1], t[1][0] * u[0] + t[1][1] * u[1], 0.0];
            let l = norm(&v);
            dirs.push(scale(&v, 1.0 / l));
            rho_b.push(l * self.rho_b[i]);
        }
        let grid = Arc::new(DirectionGrid::custom(2, dirs, self.grid.weights().to_vec())?);
        let mapped = DisintegratedMeasure::from_parts(grid, self.eta.clone(), self.law.clone(), rho_b, self.q)?
            .with_label(format!("push({}, {t:?})", self.label));
        let inv = [[t[1][1] / det, -t[0][1] / det], [-t[1][0] / det, t[0][0] / det]];
        Ok(super::LinearImage::new(mapped, self.clone(), inv, det.abs()))
    }

    fn angular_at(&self, u: &Vec3) -> (f64, f64) {
        let st = self.grid.stencil(u);
        let w0 = st.apply(&self.w0);
        let rb = match &self.body {
            Some(b) => b.radial_at(u),
            None => st.apply(&self.rho_b),
        };
        (w0, rb)
    }
}

/// `eta(S)` from the mass of the slab `(1, 2] S` of a `q`-homogeneous measure.
pub fn eta_from_slab_mass(q: f64, slab: f64) -> Result<f64> {
    if q == 0.0 || !q.is_finite() {
        bail!(InvalidExponent, "slab recovery needs a finite nonzero q");
    }
    Ok(slab / (q * (2f64.powf(1.0 / q) - 1.0)))
}

fn fourier_area(shape: &StarShape) -> Option<f64> {
    match shape {
        StarShape::Fourier(f) if !f.log => {
            let s: f64 = f.cos.iter().chain(&f.sin).map(|c| c * c).sum();
            Some(PI * f.a0 * f.a0 + 0.5 * PI * s)
        }
        StarShape::Convex(c) => Some(c.volume()),
        _ => None,
    }
}

impl SetMeasure for DisintegratedMeasure {
    fn grid(&self) -> &Arc<DirectionGrid> {
        &self.grid
    }

    fn star_mass(&self, a: &StarBody) -> Result<f64> {
        self.grid.ensure_same(a.grid())?;
        if let (Some(c), Some(s)) = (self.lebesgue, a.shape()) {
            if let Some(v) = fourier_area(s) {
                if s.dim() == self.grid.dim() {
                    return Ok(c * v);
                }
            }
        }
        Ok(self.radial_star_mass(a.rho()))
    }

    fn costar_mass(&self, c: &CoStar) -> Result<f64> {
        self.grid.ensure_same(c.grid())?;
        Ok(self.radial_costar_mass(c.rho()))
    }

    fn convex_mass(&self, k: &ConvexBody) -> Result<f64> {
        self.grid.ensure_same(k.grid())?;
        if let (Some(c), Some(s)) = (self.lebesgue, k.shape()) {
            return Ok(c * s.volume());
        }
        Ok(self.radial_star_mass(k.rho()))
    }

    fn convex_complement_mass(&self, k: &ConvexBody) -> Result<f64> {
        self.grid.ensure_same(k.grid())?;
        Ok(self.radial_costar_mass(k.rho()))
    }

    fn density(&self, x: &Vec3) -> f64 {
        let n = self.grid.dim();
        let r = norm(x);
        if r == 0.0 {
            let w0 = self.w0.iter().sum::<f64>() / self.w0.len() as f64;
            if w0 == 0.0 {
                return 0.0;
            }
            return match self.q {
                Some(q) => {
                    let e = 1.0 / q - n as f64;
                    if e < 0.0 {
                        f64::INFINITY
                    } else if e == 0.0 {
                        w0
                    } else {
                        0.0
                    }
                }
                None if n == 1 => w0 * self.law.phi(0.0),
                None => {
                    if self.law.phi(0.0) > 0.0 {
                        f64::INFINITY
                    } else {
                        0.0
                    }
                }
            };
        }
        let u = scale(x, 1.0 / r);
        let (w0, rb) = self.angular_at(&u);
        if w0 == 0.0 {
            return 0.0;
        }
        if let Some(c) = self.lebesgue {
            return c;
        }
        let nm1 = n as i32 - 1;
        w0 * rb.powi(nm1) * self.law.phi(r / rb) / r.powi(nm1)
    }

    fn homogeneity(&self) -> Option<f64> {
        self.q
    }

    fn boundary_homothet(&self, k: &ConvexBody, t: f64) -> Result<f64> {
        self.grid.ensure_same(k.grid())?;
        if !(t > 0.0 && t.is_finite()) {
            bail!(InvalidInput, "homothety factor must be positive, got {t}");
        }
        if let (Some(c), Some(s)) = (self.lebesgue, k.shape()) {
            let n = self.grid.dim() as i32;
            return Ok(c * n as f64 * t.powi(n - 1) * s.volume());
        }
        let rk = k.rho();
        Ok((0..rk.len())
            .filter(|&i| self.eta[i] > 0.0 && rk[i] > 0.0)
            .map(|i| {
                let s = rk[i] / self.rho_b[i];
                self.eta[i] * self.law.phi(t * s) * s
            })
            .sum())
    }

    fn boundary_star(&self, rho: &[f64], drho: &[f64], k: &ConvexBody, outward: bool) -> Result<f64> {
        self.grid.ensure_same(k.grid())?;
        let n = self.grid.dim();
        if n > 2 {
            return Err(crate::Error::UnsupportedDimension(n));
        }
        let sgn = if outward { 1.0 } else { -1.0 };
        let mut total = 0.0;
        for i in 0..rho.len() {
            let r = rho[i];
            if self.eta[i] == 0.0 || r == f64::INFINITY {
                continue;
            }
            let u = self.grid.direction(i);
            let rb = self.rho_b[i];
            let dens = self.eta[i] * self.law.phi(r / rb) / rb;
            let h = if n == 1 {
                k.support_at(&scale(u, sgn))
            } else {
                let nrm = [r * u[0] + drho[i] * u[1], r * u[1] - drho[i] * u[0], 0.0];
                k.support_at(&scale(&nrm, sgn)) / r
            };
            if dens > 0.0 {
                total += dens * h;
            }
        }
        Ok(total)
    }

    fn describe(&self) -> String {
        self.label.clone()
    }
}
