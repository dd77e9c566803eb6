//! Spectral simulator for cloaking by anomalous localized resonance (CALR)
//! in a three-dimensional folded coated-sphere geometry.
//!
//! The crate is `no_std` (with `alloc`) and contains only pure numerics:
//!
//! * [`harmonics`]: real orthonormal spherical harmonics, solid harmonics with
//!   analytic gradients and Hessians, and exact spherical quadrature.
//! * [`geometry`]: the folded geometry, its unfolding/folding maps and the
//!   anisotropic permittivity tensor (closed form and push-forward).
//! * [`sources`]: multipole source models and their Newtonian-potential
//!   coefficients, plus the explicit harmonic polynomials used in the dipole
//!   gap argument.
//! * [`spectral`]: per-mode transmission coefficients, potentials and the
//!   dissipated energy.
//! * [`analysis`]: loss sweeps, blow-up classification, critical-radius
//!   bisection, boundedness probes and gap-condition diagnostics.
//!
//! File formats, the command line and parallel drivers live in the `calr3d`
//! companion crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod error;
pub mod geometry;
pub mod harmonics;
pub mod linalg;
pub mod logspace;
pub mod sources;
pub mod spectral;

pub use error::{Error, Result};
pub use geometry::{FoldedGeometry, Region};
pub use harmonics::{HarmonicIndex, HarmonicTable, QuadratureRule, SolidKind, SphericalPoint};
pub use linalg::{Mat3, Tensor3, Vec3};
pub use sources::{LemmaPolynomial, MultipoleSource, SourceKind};
pub use spectral::{FoldedSolution, MaterialParams, ModeCoefficients, SolveOptions};
