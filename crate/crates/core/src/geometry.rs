//! Folded coated-sphere geometry.
//!
//! Physical layout: core `|x| < r_i`, plasmonic shell `r_i < |x| < r_e`,
//! matrix `|x| > r_e`. The folded problem lives on overlapping domains: the
//! shell unfolds from `r_e < |y| < r_0`, the core from `|y| < r_0`, and the
//! matrix is untouched.
//!
//! Boundary convention (half-open): a point with `|x| = r_e` belongs to the
//! shell and one with `|x| = r_i` to the core; the maps are continuous there,
//! but the tensors are not and refuse such points.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{Mat3, Tensor3, Vec3};
use crate::spectral::MaterialParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Region {
    Matrix,
    Shell,
    Core,
}

impl Region {
    pub fn name(self) -> &'static str {
        match self {
            Region::Matrix => "matrix",
            Region::Shell => "shell",
            Region::Core => "core",
        }
    }
}

/// Radii `r_i < r_e < r_0` and the constants derived from them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FoldedGeometry {
    r_i: f64,
    r_e: f64,
    r_0: f64,
    a: f64,
    b: f64,
}

/// Relative distance from an interface sphere below which the tensors refuse
/// to evaluate.
const INTERFACE_TOL: f64 = 1e-12;

impl FoldedGeometry {
    pub fn derive(r_i: f64, r_e: f64, r_0: f64) -> Result<Self> {
        if !(r_i.is_finite() && r_e.is_finite() && r_0.is_finite()) {
            return Err(Error::invalid("radii must be finite"));
        }
        if !(0.0 < r_i && r_i < r_e && r_e < r_0) {
            return Err(Error::invalid(alloc::format!(
                "radii must satisfy 0 < r_i < r_e < r_0 (got r_i = {r_i}, r_e = {r_e}, r_0 = {r_0})"
            )));
        }
        let a = (r_e - r_i) / (r_0 - r_e);
        Ok(FoldedGeometry { r_i, r_e, r_0, a, b: (1.0 + a) * r_e })
    }

    pub fn r_i(&self) -> f64 {
        self.r_i
    }

    pub fn r_e(&self) -> f64 {
        self.r_e
    }

    pub fn r_0(&self) -> f64 {
        self.r_0
    }

    /// Slope of the shell unfolding map, `(r_e - r_i)/(r_0 - r_e)`.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Intercept of the shell unfolding map, `(1 + a) r_e`.
    pub fn b(&self) -> f64 {
        self.b
    }

    /// `r_e / r_0`.
    pub fn rho(&self) -> f64 {
        self.r_e / self.r_0
    }

    /// Critical radius `√(r_e r_0)` for `ε_c = -ε_s = 1`.
    pub fn r_star(&self) -> f64 {
        libm::sqrt(self.r_e * self.r_0)
    }

    /// Critical radius `r_0` for `ε_c ≠ -ε_s = 1`.
    pub fn r_dstar(&self) -> f64 {
        self.r_0
    }

    /// Beyond `r_0²/r_e` the potential stays bounded as the loss vanishes.
    pub fn far_bound(&self) -> f64 {
        self.r_0 * self.r_0 / self.r_e
    }

    /// Physical region of `x` (half-open convention).
    pub fn classify(&self, x: Vec3) -> Region {
        let s = x.norm();
        if s > self.r_e {
            Region::Matrix
        } else if s > self.r_i {
            Region::Shell
        } else {
            Region::Core
        }
    }

    /// True if `x` lies on (or within round-off of) `|x| = r_i` or `|x| = r_e`.
    pub fn on_interface(&self, x: Vec3) -> bool {
        let s = x.norm();
        [self.r_i, self.r_e].iter().any(|&r| libm::fabs(s - r) <= INTERFACE_TOL * r)
    }

    /// Radial profile of the unfolding map on `region`.
    fn unfold_radius(&self, region: Region, r: f64) -> f64 {
        match region {
            Region::Matrix => r,
            Region::Shell => self.b - self.a * r,
            Region::Core => r * self.r_i / self.r_0,
        }
    }

    fn check_folded(&self, region: Region, y: Vec3) -> Result<f64> {
        let r = y.norm();
        let tol = INTERFACE_TOL * self.r_0;
        let ok = match region {
            Region::Matrix => r > self.r_e,
            Region::Shell => r >= self.r_e - tol && r <= self.r_0 + tol,
            Region::Core => r <= self.r_0 + tol,
        };
        if !ok || !y.is_finite() {
            return Err(Error::domain(alloc::format!(
                "|y| = {r} is outside the folded {} region",
                region.name()
            )));
        }
        Ok(r)
    }

    /// `Φ_region(y)`: folded point to physical point.
    pub fn unfold(&self, region: Region, y: Vec3) -> Result<Vec3> {
        let r = self.check_folded(region, y)?;
        Ok(match y.unit() {
            Some(u) => u * self.unfold_radius(region, r),
            None => Vec3::ZERO,
        })
    }

    /// Inverse of [`unfold`](Self::unfold): the region containing `x` and its
    /// folded preimage. In the shell this is `|y| = (b - |x|)/a`.
    pub fn fold(&self, x: Vec3) -> Result<(Region, Vec3)> {
        let s = x.norm();
        if !x.is_finite() {
            return Err(Error::domain("cannot fold a non-finite point"));
        }
        if s == 0.0 {
            return Ok((Region::Core, Vec3::ZERO));
        }
        let u = x * (1.0 / s);
        let region = self.classify(x);
        let r = match region {
            Region::Matrix => return Ok((region, x)),
            Region::Shell => (self.b - s) / self.a,
            Region::Core => s * self.r_0 / self.r_i,
        };
        Ok((region, u * r))
    }

    /// The shell folding branch in the literal Cartesian form `-a x + b x̂`.
    ///
    /// This is the unfolding map again rather than its inverse (it sends
    /// `r_i` to `b - a r_i`, not to `r_0`); it is kept only so tests can show
    /// which branch is consistent with the permittivity tensor.
    pub fn shell_map_as_printed(&self, x: Vec3) -> Result<Vec3> {
        let u = x.unit().ok_or_else(|| Error::domain("zero vector has no direction"))?;
        Ok(x * (-self.a) + u * self.b)
    }

    /// Jacobian `∇Φ_region(y)` of the radial unfolding map: radial factor
    /// `φ'(r)`, tangential factor `φ(r)/r`.
    pub fn unfold_jacobian(&self, region: Region, y: Vec3) -> Result<Mat3> {
        let r = self.check_folded(region, y)?;
        let (tangential, radial) = match region {
            Region::Matrix => (1.0, 1.0),
            Region::Core => (self.r_i / self.r_0, self.r_i / self.r_0),
            Region::Shell => (self.unfold_radius(region, r) / r, -self.a),
        };
        Ok(radial_jacobian(y, tangential, radial))
    }

    /// Jacobian of the folding map at the physical point `x`.
    pub fn fold_jacobian(&self, x: Vec3) -> Result<Mat3> {
        let (region, y) = self.fold(x)?;
        let s = x.norm();
        let r = y.norm();
        let (tangential, radial) = match region {
            Region::Matrix => (1.0, 1.0),
            Region::Core => (self.r_0 / self.r_i, self.r_0 / self.r_i),
            Region::Shell => (r / s, -1.0 / self.a),
        };
        Ok(radial_jacobian(x, tangential, radial))
    }

    fn tensor_point(&self, x: Vec3) -> Result<Region> {
        if x.norm() == 0.0 || !x.is_finite() {
            return Err(Error::domain("permittivity is undefined at the origin"));
        }
        if self.on_interface(x) {
            return Err(Error::domain(alloc::format!(
                "|x| = {} lies on an interface sphere; the permittivity is discontinuous there",
                x.norm()
            )));
        }
        Ok(self.classify(x))
    }

    /// Closed-form anisotropic permittivity of the physical problem.
    ///
    /// Shell: `(ε_s + iδ)/a · (I + b(b - 2s)/s² x̂x̂ᵀ)`, `s = |x|`.
    /// Core: `ε_c (r_0/r_i) I`, the exact push-forward of the folded core.
    pub fn permittivity_tensor(&self, mat: &MaterialParams, x: Vec3) -> Result<Tensor3> {
        let region = self.tensor_point(x)?;
        Ok(match region {
            Region::Matrix => Tensor3::from_real(Mat3::IDENTITY, Complex64::new(1.0, 0.0)),
            Region::Core => Tensor3::from_real(
                Mat3::IDENTITY,
                Complex64::new(mat.eps_c() * self.r_0 / self.r_i, 0.0),
            ),
            Region::Shell => {
                let s = x.norm();
                let u = x * (1.0 / s);
                let m = Mat3::IDENTITY + Mat3::outer(u, u).scale(self.b * (self.b - 2.0 * s) / (s * s));
                Tensor3::from_real(m, Complex64::new(mat.eps_s(), mat.delta()) / self.a)
            }
        })
    }

    /// `κ J Jᵀ / |det J|` with `J = ∇Φ` at `y = Φ⁻¹(x)`; the shell branch
    /// carries an extra minus sign because `κ_s = -(ε_s + iδ)`.
    pub fn pushforward_tensor(&self, mat: &MaterialParams, x: Vec3) -> Result<Tensor3> {
        self.tensor_point(x)?;
        let (region, y) = self.fold(x)?;
        let j = self.unfold_jacobian(region, y)?;
        let m = (j * j.transpose()).scale(1.0 / libm::fabs(j.det()));
        let kappa = match region {
            Region::Matrix => mat.kappa_m(),
            Region::Shell => -mat.kappa_s(),
            Region::Core => mat.kappa_c(),
        };
        Ok(Tensor3::from_real(m, kappa))
    }
}

/// `radial · ûûᵀ + tangential · (I - ûûᵀ)` for the direction of `p`.
fn radial_jacobian(p: Vec3, tangential: f64, radial: f64) -> Mat3 {
    match p.unit() {
        Some(u) => {
            let uu = Mat3::outer(u, u);
            uu.scale(radial) + (Mat3::IDENTITY - uu).scale(tangential)
        }
        None => Mat3::scaled_identity(tangential),
    }
}
