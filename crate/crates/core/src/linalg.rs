//! Fixed-size vector helpers. Points live in `[f64; 3]`; unused trailing
//! coordinates are zero for `n < 3`.

#[allow(unused_imports)]
use num_traits::Float;

pub type Vec3 = [f64; 3];

pub const ORIGIN: Vec3 = [0.0; 3];

#[inline]
pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn add(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale(a: &Vec3, t: f64) -> Vec3 {
    [a[0] * t, a[1] * t, a[2] * t]
}

#[inline]
pub fn axpy(t: f64, a: &Vec3, b: &Vec3) -> Vec3 {
    [t * a[0] + b[0], t * a[1] + b[1], t * a[2] + b[2]]
}

/// Unit vector in the direction of `a`, or `None` for the origin.
pub fn normalize(a: &Vec3) -> Option<Vec3> {
    let r = norm(a);
    if r > 0.0 && r.is_finite() {
        Some(scale(a, 1.0 / r))
    } else {
        None
    }
}

#[inline]
pub fn cross2(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn from_angle(theta: f64) -> Vec3 {
    [theta.cos(), theta.sin(), 0.0]
}

/// Angle of a planar vector in `[0, 2pi)`.
pub fn angle_of(a: &Vec3) -> f64 {
    let t = a[1].atan2(a[0]);
    if t < 0.0 {
        t + core::f64::consts::TAU
    } else {
        t
    }
}

/// Solves the dense system `m x = rhs` in place by Gaussian elimination with
/// partial pivoting. Returns `None` when the matrix is numerically singular.
pub fn solve<const N: usize>(mut m: [[f64; N]; N], mut rhs: [f64; N]) -> Option<[f64; N]> {
    for col in 0..N {
        let mut piv = col;
        for r in col + 1..N {
            if m[r][col].abs() > m[piv][col].abs() {
                piv = r;
            }
        }
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in col + 1..N {
            let f = m[r][col] / m[col][col];
            for c in col..N {
                m[r][c] -= f * m[col][c];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = [0.0; N];
    for r in (0..N).rev() {
        let mut s = rhs[r];
        for c in r + 1..N {
            s -= m[r][c] * x[c];
        }
        x[r] = s / m[r][r];
    }
    Some(x)
}
