//! Real spherical harmonics, solid harmonics and spherical quadrature.
//!
//! Convention: fully orthonormal real harmonics, `∫_{S²} Y_n^k Y_m^l dS =
//! δ_{nm} δ_{kl}`, with `k > 0` carrying `cos(kφ)` and `k < 0` carrying
//! `sin(|k|φ)`. In this convention the free-space Green's function expands as
//! `-1/(4π|x-y|) = -Σ (2n+1)^{-1} Y_n^k(x̂) Y_n^k(ŷ) |x|^n / |y|^{n+1}`.
//!
//! Coefficient tables over all `(n, k)` with `n <= N` are stored flat at
//! index `n² + n + k`.

mod quadrature;
mod table;

pub use quadrature::{fibonacci_sphere, gauss_legendre, make_quadrature, QuadratureRule, RadialRule};
pub use table::{Derivatives, HarmonicTable};

use crate::error::{Error, Result};
use crate::linalg::{Mat3, Vec3};

/// Degree/order pair of a real spherical harmonic, `|k| <= n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HarmonicIndex {
    n: usize,
    k: i64,
}

impl HarmonicIndex {
    pub fn new(n: usize, k: i64) -> Result<Self> {
        if k.unsigned_abs() as usize > n {
            return Err(Error::InvalidIndex { n, k });
        }
        Ok(HarmonicIndex { n, k })
    }

    pub fn n(self) -> usize {
        self.n
    }

    pub fn k(self) -> i64 {
        self.k
    }

    pub fn flat(self) -> usize {
        flat_index(self.n, self.k)
    }

    pub fn from_flat(i: usize) -> Self {
        let n = isqrt(i);
        HarmonicIndex { n, k: i as i64 - (n * n + n) as i64 }
    }
}

/// Number of `(n, k)` pairs with `n <= max_degree`.
pub const fn table_len(max_degree: usize) -> usize {
    (max_degree + 1) * (max_degree + 1)
}

#[inline]
pub fn flat_index(n: usize, k: i64) -> usize {
    ((n * n + n) as i64 + k) as usize
}

fn isqrt(i: usize) -> usize {
    let mut n = libm::sqrt(i as f64) as usize;
    while n * n > i {
        n -= 1;
    }
    while (n + 1) * (n + 1) <= i {
        n += 1;
    }
    n
}

/// Spherical coordinates `(r, θ, φ)` with `θ ∈ [0, π]`, `φ ∈ [0, 2π)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphericalPoint {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
}

impl SphericalPoint {
    pub fn new(r: f64, theta: f64, phi: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::invalid("spherical radius must be positive and finite"));
        }
        if !(0.0..=core::f64::consts::PI).contains(&theta) {
            return Err(Error::invalid("polar angle must lie in [0, π]"));
        }
        let tau = 2.0 * core::f64::consts::PI;
        let mut phi = phi % tau;
        if phi < 0.0 {
            phi += tau;
        }
        Ok(SphericalPoint { r, theta, phi })
    }

    pub fn from_cartesian(x: Vec3) -> Result<Self> {
        let r = x.norm();
        if r == 0.0 {
            return Err(Error::domain("the origin has no spherical angles"));
        }
        let rho = libm::hypot(x.x, x.y);
        let theta = libm::atan2(rho, x.z);
        let mut phi = libm::atan2(x.y, x.x);
        if phi < 0.0 {
            phi += 2.0 * core::f64::consts::PI;
        }
        Ok(SphericalPoint { r, theta, phi })
    }

    pub fn to_cartesian(self) -> Vec3 {
        let st = libm::sin(self.theta);
        Vec3::new(
            self.r * st * libm::cos(self.phi),
            self.r * st * libm::sin(self.phi),
            self.r * libm::cos(self.theta),
        )
    }

    pub fn direction(self) -> Vec3 {
        SphericalPoint { r: 1.0, ..self }.to_cartesian()
    }
}

/// Regular (`|x|^n Y`) or irregular (`|x|^{-n-1} Y`) solid harmonic.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolidKind {
    Regular,
    Irregular,
}

fn unit_direction(dir: Vec3) -> Result<Vec3> {
    let r = dir.norm();
    if !r.is_finite() || libm::fabs(r - 1.0) > 1e-9 {
        return Err(Error::invalid("direction must be a unit vector"));
    }
    Ok(dir * (1.0 / r))
}

/// `Y_n^k(dir)` for a unit direction.
pub fn eval_harmonic(idx: HarmonicIndex, dir: Vec3) -> Result<f64> {
    let u = unit_direction(dir)?;
    Ok(HarmonicTable::new(u, idx.n, Derivatives::None).value(idx.n, idx.k))
}

fn solid_radius(x: Vec3, kind: SolidKind) -> Result<(f64, Vec3)> {
    if !x.is_finite() {
        return Err(Error::invalid("point must be finite"));
    }
    match x.unit() {
        Some(u) => Ok((x.norm(), u)),
        None if kind == SolidKind::Regular => Ok((0.0, Vec3::E3)),
        None => Err(Error::domain("irregular solid harmonic is singular at the origin")),
    }
}

fn powi(r: f64, e: i32) -> f64 {
    libm::pow(r, e as f64)
}

pub fn eval_solid_harmonic(idx: HarmonicIndex, x: Vec3, kind: SolidKind) -> Result<f64> {
    let (r, u) = solid_radius(x, kind)?;
    let y = HarmonicTable::new(u, idx.n, Derivatives::None).value(idx.n, idx.k);
    let n = idx.n as i32;
    Ok(match kind {
        SolidKind::Regular => powi(r, n) * y,
        SolidKind::Irregular => powi(r, -n - 1) * y,
    })
}

pub fn grad_solid_harmonic(idx: HarmonicIndex, x: Vec3, kind: SolidKind) -> Result<Vec3> {
    let (r, u) = solid_radius(x, kind)?;
    let t = HarmonicTable::new(u, idx.n, Derivatives::Gradient);
    let n = idx.n as i32;
    Ok(match kind {
        SolidKind::Regular if idx.n == 0 => Vec3::ZERO,
        SolidKind::Regular => t.regular_gradient(idx.n, idx.k) * powi(r, n - 1),
        SolidKind::Irregular => t.irregular_gradient(idx.n, idx.k) * powi(r, -n - 2),
    })
}

/// Hessian of a solid harmonic.
pub fn hessian_solid_harmonic(idx: HarmonicIndex, x: Vec3, kind: SolidKind) -> Result<Mat3> {
    let (r, u) = solid_radius(x, kind)?;
    let t = HarmonicTable::new(u, idx.n, Derivatives::Hessian);
    let n = idx.n as i32;
    Ok(match kind {
        SolidKind::Regular if idx.n < 2 => Mat3::ZERO,
        SolidKind::Regular => t.regular_hessian(idx.n, idx.k).scale(powi(r, n - 2)),
        SolidKind::Irregular => t.irregular_hessian(idx.n, idx.k).scale(powi(r, -n - 3)),
    })
}
