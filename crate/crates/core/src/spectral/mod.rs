//! Transmission problem in the folded geometry.
//!
//! The folded potential is harmonic in each layer with constant coefficients
//! `κ_m = 1`, `κ_s = -(ε_s + iδ)`, `κ_c = ε_c`:
//!
//! ```text
//! u_c = Σ a_n f_n^k |y|^n Y_n^k                         |y| < r_0
//! u_s = Σ (b_n |y|^n + c_n |y|^{-n-1}) f_n^k Y_n^k      r_e < |y| < r_0
//! u_m = F + Σ d_n f_n^k |y|^{-n-1} Y_n^k                |y| > r_e
//! ```
//!
//! and the physical potential is `V = u ∘ Φ⁻¹`. The dissipated energy is
//! `E_δ = δ ∫_{r_e<|y|<r_0} |∇u_s|²`.

mod modes;
mod solution;

pub use modes::{mode_coefficients_closed, mode_coefficients_oracle, ModeCoefficients};
pub use solution::{solve, AngularData, FoldedSolution, PotentialEval};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Core, shell and loss parameters of the physical problem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaterialParams {
    eps_c: f64,
    eps_s: f64,
    delta: f64,
}

impl MaterialParams {
    /// Requires `ε_c > 0`, `ε_s < 0`, `δ ≥ 0`. A zero loss is accepted here;
    /// solves refuse it at any degree whose denominator vanishes.
    pub fn new(eps_c: f64, eps_s: f64, delta: f64) -> Result<Self> {
        if !(eps_c > 0.0 && eps_c.is_finite()) {
            return Err(Error::invalid(alloc::format!("eps_c must be positive and finite (got {eps_c})")));
        }
        if !(eps_s < 0.0 && eps_s.is_finite()) {
            return Err(Error::invalid(alloc::format!("eps_s must be negative and finite (got {eps_s})")));
        }
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::invalid(alloc::format!("delta must be nonnegative and finite (got {delta})")));
        }
        Ok(MaterialParams { eps_c, eps_s, delta })
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        MaterialParams::new(self.eps_c, self.eps_s, delta)
    }

    pub fn eps_c(&self) -> f64 {
        self.eps_c
    }

    pub fn eps_s(&self) -> f64 {
        self.eps_s
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn kappa_m(&self) -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    pub fn kappa_s(&self) -> Complex64 {
        -Complex64::new(self.eps_s, self.delta)
    }

    pub fn kappa_c(&self) -> Complex64 {
        Complex64::new(self.eps_c, 0.0)
    }
}

/// Truncation controls.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    /// Hard cap on the degree.
    pub n_max: usize,
    /// Relative size of the trailing window below which a series is
    /// considered converged.
    pub tail_tolerance: f64,
    /// Number of trailing degrees in the convergence window.
    pub tail_window: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { n_max: 200, tail_tolerance: 1e-16, tail_window: 10 }
    }
}

impl SolveOptions {
    pub fn with_n_max(n_max: usize) -> Self {
        SolveOptions { n_max, ..Default::default() }
    }
}
