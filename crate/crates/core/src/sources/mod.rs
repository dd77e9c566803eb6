//! Source models and the interior multipole coefficients of their Newtonian
//! potential, `F(x) = Σ f_n^k |x|^n Y_n^k(x̂)` for `|x|` below the source
//! radius.
//!
//! Coefficients are stored as a per-degree log scale times an `O(1)`
//! mantissa, `f_n^k = m_n^k · e^{s_n}`, so that products like
//! `r^{2n} |f_n^k|²` can be formed for large `n` without overflow.

mod lemma;

pub use lemma::LemmaPolynomial;

use alloc::vec;
use alloc::vec::Vec;

use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::harmonics::{flat_index, make_quadrature, table_len, Derivatives, HarmonicTable};
use crate::linalg::{Mat3, Vec3};
use crate::logspace;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SourceKind {
    /// Point dipole `f = a·∇δ_y`.
    Dipole { moment: Vec3, position: Vec3 },
    /// Point quadrupole `f = A:∇∇δ_y`.
    Quadrupole { matrix: Mat3, position: Vec3 },
    /// User-supplied coefficient table, harmonic inside `radius`.
    Raw { radius: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultipoleSource {
    kind: SourceKind,
    n_max: usize,
    mantissa: Vec<f64>,
    log_scale: Vec<f64>,
}

impl MultipoleSource {
    /// Coefficients `f_n^k = (2n+1)^{-1} a·∇(|y|^{-n-1} Y_n^k(ŷ))` of a dipole
    /// at `y`; the potential is `a·(x - y) / (4π|x - y|³)`.
    pub fn dipole(moment: Vec3, position: Vec3, n_max: usize) -> Result<Self> {
        let (r, u) = source_position(position)?;
        if !moment.is_finite() {
            return Err(Error::invalid("dipole moment must be finite"));
        }
        let t = HarmonicTable::new(u, n_max, Derivatives::Gradient);
        let mut mantissa = vec![0.0; table_len(n_max)];
        let ln_r = libm::log(r);
        let mut log_scale = vec![0.0; n_max + 1];
        for n in 0..=n_max {
            log_scale[n] = -(n as f64 + 2.0) * ln_r;
            let inv = 1.0 / (2 * n + 1) as f64;
            for k in -(n as i64)..=(n as i64) {
                mantissa[flat_index(n, k)] = moment.dot(t.irregular_gradient(n, k)) * inv;
            }
        }
        Ok(MultipoleSource { kind: SourceKind::Dipole { moment, position }, n_max, mantissa, log_scale })
    }

    /// Coefficients `f_n^k = -(2n+1)^{-1} A:∇∇(|y|^{-n-1} Y_n^k(ŷ))` of a
    /// quadrupole at `y`; the potential is
    /// `(tr A/|d|³ - 3 dᵀA d/|d|⁵)/(4π)` with `d = x - y`.
    pub fn quadrupole(matrix: Mat3, position: Vec3, n_max: usize) -> Result<Self> {
        let (r, u) = source_position(position)?;
        if !matrix.is_finite() {
            return Err(Error::invalid("quadrupole matrix must be finite"));
        }
        let t = HarmonicTable::new(u, n_max, Derivatives::Hessian);
        let mut mantissa = vec![0.0; table_len(n_max)];
        let ln_r = libm::log(r);
        let mut log_scale = vec![0.0; n_max + 1];
        for n in 0..=n_max {
            log_scale[n] = -(n as f64 + 3.0) * ln_r;
            let inv = 1.0 / (2 * n + 1) as f64;
            for k in -(n as i64)..=(n as i64) {
                mantissa[flat_index(n, k)] = -matrix.contract(t.irregular_hessian(n, k)) * inv;
            }
        }
        Ok(MultipoleSource {
            kind: SourceKind::Quadrupole { matrix, position },
            n_max,
            mantissa,
            log_scale,
        })
    }

    /// A raw table in flat order `n² + n + k`; its length fixes `n_max`.
    pub fn from_raw(radius: f64, coeffs: Vec<f64>) -> Result<Self> {
        let log_scale = vec![0.0; degree_of_len(coeffs.len())? + 1];
        Self::from_scaled(radius, coeffs, log_scale)
    }

    /// A raw table given as mantissas and one natural-log scale per degree.
    pub fn from_scaled(radius: f64, mantissa: Vec<f64>, log_scale: Vec<f64>) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::invalid("source radius must be positive"));
        }
        let n_max = degree_of_len(mantissa.len())?;
        if log_scale.len() != n_max + 1 {
            return Err(Error::invalid("need one log scale per degree"));
        }
        if mantissa.iter().chain(&log_scale).any(|v| !v.is_finite()) {
            return Err(Error::invalid("raw coefficients must be finite"));
        }
        Ok(MultipoleSource { kind: SourceKind::Raw { radius }, n_max, mantissa, log_scale })
    }

    /// The zero source.
    pub fn zero(n_max: usize) -> Self {
        MultipoleSource {
            kind: SourceKind::Raw { radius: f64::INFINITY },
            n_max,
            mantissa: vec![0.0; table_len(n_max)],
            log_scale: vec![0.0; n_max + 1],
        }
    }

    pub fn kind(&self) -> &SourceKind {
        &self.kind
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// `|y|`: the potential expansion is valid for `|x| < support_radius`.
    pub fn support_radius(&self) -> f64 {
        match self.kind {
            SourceKind::Dipole { position, .. } | SourceKind::Quadrupole { position, .. } => position.norm(),
            SourceKind::Raw { radius } => radius,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.iter().all(|&m| m == 0.0)
    }

    /// Same source with all coefficients multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.mantissa.iter_mut().for_each(|m| *m *= factor);
        out.kind = match self.kind {
            SourceKind::Dipole { moment, position } => SourceKind::Dipole { moment: moment * factor, position },
            SourceKind::Quadrupole { matrix, position } => {
                SourceKind::Quadrupole { matrix: matrix.scale(factor), position }
            }
            raw => raw,
        };
        out
    }

    /// `f_n^k` (may underflow to zero for large `n`).
    pub fn coeff(&self, n: usize, k: i64) -> f64 {
        self.mantissa[flat_index(n, k)] * libm::exp(self.log_scale[n])
    }

    pub fn mantissa(&self, n: usize, k: i64) -> f64 {
        self.mantissa[flat_index(n, k)]
    }

    /// Mantissas of degree `n`, orders `-n..=n`.
    pub fn mantissas(&self, n: usize) -> &[f64] {
        &self.mantissa[n * n..(n + 1) * (n + 1)]
    }

    pub fn log_scale(&self, n: usize) -> f64 {
        self.log_scale[n]
    }

    /// `ln Σ_k |f_n^k|²`.
    pub fn ln_power(&self, n: usize) -> f64 {
        let p: f64 = self.mantissas(n).iter().map(|m| m * m).sum();
        logspace::ln_abs(p) + 2.0 * self.log_scale[n]
    }

    /// `ln max_k |f_n^k|`.
    pub fn ln_max_abs(&self, n: usize) -> f64 {
        let m = self.mantissas(n).iter().fold(0.0_f64, |a, b| a.max(b.abs()));
        logspace::ln_abs(m) + self.log_scale[n]
    }

    /// `ln S_n(r)` with `S_n(r) = Σ_k n r^{2n} |f_n^k|²`.
    pub fn ln_gap_summand(&self, r: f64, n: usize) -> f64 {
        if n == 0 {
            return f64::NEG_INFINITY;
        }
        libm::log(n as f64) + 2.0 * n as f64 * libm::log(r) + self.ln_power(n)
    }

    /// `S_n(r)`; may overflow to infinity, use [`ln_gap_summand`](Self::ln_gap_summand)
    /// for comparisons.
    pub fn gap_summand(&self, r: f64, n: usize) -> f64 {
        logspace::exp(self.ln_gap_summand(r, n))
    }

    /// Newtonian potential `F(x)`.
    ///
    /// Closed form for point sources; raw tables are summed as a series and
    /// are only defined inside their radius.
    pub fn potential(&self, x: Vec3) -> Result<f64> {
        if self.is_zero() {
            return Ok(0.0);
        }
        match self.kind {
            SourceKind::Dipole { moment, position } => {
                let d = x - position;
                let r = nonzero_distance(d)?;
                Ok(moment.dot(d) / (4.0 * PI * r * r * r))
            }
            SourceKind::Quadrupole { matrix, position } => {
                let d = x - position;
                let r = nonzero_distance(d)?;
                let r2 = r * r;
                let quad = d.dot(matrix.mul_vec(d));
                Ok((matrix.trace() / (r2 * r) - 3.0 * quad / (r2 * r2 * r)) / (4.0 * PI))
            }
            SourceKind::Raw { radius } => {
                let s = x.norm();
                if s >= radius {
                    return Err(Error::domain("raw source potential is only known inside its radius"));
                }
                Ok(self.series_value_and_gradient(x, false).0)
            }
        }
    }

    /// `∇F(x)`.
    pub fn potential_gradient(&self, x: Vec3) -> Result<Vec3> {
        if self.is_zero() {
            return Ok(Vec3::ZERO);
        }
        match self.kind {
            SourceKind::Dipole { moment, position } => {
                let d = x - position;
                let r = nonzero_distance(d)?;
                let r3 = r * r * r;
                Ok((moment * (1.0 / r3) - d * (3.0 * moment.dot(d) / (r3 * r * r))) * (1.0 / (4.0 * PI)))
            }
            SourceKind::Quadrupole { matrix, position } => {
                let d = x - position;
                let r = nonzero_distance(d)?;
                let r2 = r * r;
                let r5 = r2 * r2 * r;
                let ad = matrix.mul_vec(d) + matrix.transpose().mul_vec(d);
                let quad = d.dot(matrix.mul_vec(d));
                let g = d * (-3.0 * matrix.trace() / r5) - ad * (3.0 / r5) + d * (15.0 * quad / (r5 * r2));
                Ok(g * (1.0 / (4.0 * PI)))
            }
            SourceKind::Raw { radius } => {
                if x.norm() >= radius {
                    return Err(Error::domain("raw source potential is only known inside its radius"));
                }
                Ok(self.series_value_and_gradient(x, true).1)
            }
        }
    }

    /// `Σ f_n^k R_n^k(x)` and its gradient, summed over all stored degrees.
    pub fn series_value_and_gradient(&self, x: Vec3, with_gradient: bool) -> (f64, Vec3) {
        let s = x.norm();
        let u = x.unit().unwrap_or(Vec3::E3);
        let d = if with_gradient { Derivatives::Gradient } else { Derivatives::None };
        let t = HarmonicTable::new(u, self.n_max, d);
        let ln_s = logspace::ln_abs(s);
        let (mut v, mut g) = (0.0, Vec3::ZERO);
        for n in 0..=self.n_max {
            let (mut bv, mut bg) = (0.0, Vec3::ZERO);
            for k in -(n as i64)..=(n as i64) {
                let m = self.mantissa[flat_index(n, k)];
                if m == 0.0 {
                    continue;
                }
                bv += m * t.value(n, k);
                if with_gradient && n > 0 {
                    bg += t.regular_gradient(n, k) * m;
                }
            }
            let nf = n as f64;
            v += bv * logspace::exp(self.log_scale[n] + nf * ln_s);
            if with_gradient && n > 0 {
                g += bg * logspace::exp(self.log_scale[n] + (nf - 1.0) * ln_s);
            }
        }
        (v, g)
    }
}

fn degree_of_len(len: usize) -> Result<usize> {
    let n = libm::sqrt(len as f64) as usize;
    for cand in n.saturating_sub(1)..=n + 1 {
        if cand >= 1 && cand * cand == len {
            return Ok(cand - 1);
        }
    }
    Err(Error::invalid(alloc::format!(
        "coefficient table length {len} is not (N+1)² for any degree N"
    )))
}

fn source_position(y: Vec3) -> Result<(f64, Vec3)> {
    if !y.is_finite() {
        return Err(Error::invalid("source position must be finite"));
    }
    match y.unit() {
        Some(u) => Ok((y.norm(), u)),
        None => Err(Error::domain("source position must be nonzero")),
    }
}

fn nonzero_distance(d: Vec3) -> Result<f64> {
    let r = d.norm();
    if r == 0.0 {
        Err(Error::domain("potential is singular at the source position"))
    } else {
        Ok(r)
    }
}

/// Independent coefficient oracle via orthogonality:
/// `f_n^k = r^{-n} ∫_{S²} F(r x̂) Y_n^k(x̂) dS` on the sphere `|x| = r_probe`.
///
/// The quadrature is exact for the degree-`quad_degree` part of `F`; the rest
/// aliases, so `quad_degree` should be large enough for `F`'s content on the
/// probe sphere to have decayed. `r_probe` must lie below `support_radius`,
/// otherwise the expansion does not represent `F` and an error is returned.
pub fn project_coeffs<F: FnMut(Vec3) -> f64>(
    mut potential: F,
    r_probe: f64,
    support_radius: f64,
    n_max: usize,
    quad_degree: usize,
) -> Result<Vec<f64>> {
    if !(r_probe > 0.0 && r_probe < support_radius) {
        return Err(Error::invalid(alloc::format!(
            "probe radius {r_probe} must lie inside the harmonic ball of radius {support_radius}"
        )));
    }
    let rule = make_quadrature(quad_degree.max(2 * n_max));
    let mut out = vec![0.0; table_len(n_max)];
    for (u, w) in rule.iter() {
        let fv = potential(u * r_probe) * w;
        if fv == 0.0 {
            continue;
        }
        let t = HarmonicTable::new(u, n_max, Derivatives::None);
        for (o, y) in out.iter_mut().zip(t.values()) {
            *o += fv * y;
        }
    }
    let ln_r = libm::log(r_probe);
    for n in 0..=n_max {
        let s = libm::exp(-(n as f64) * ln_r);
        for o in &mut out[n * n..(n + 1) * (n + 1)] {
            *o *= s;
        }
    }
    Ok(out)
}
