use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{FoldedGeometry, Region};
use crate::harmonics::{make_quadrature, Derivatives, HarmonicTable, RadialRule};
use crate::linalg::Vec3;
use crate::logspace;
use crate::sources::MultipoleSource;

use super::modes::{mode_coefficients_closed, ModeCoefficients};
use super::{MaterialParams, SolveOptions};

/// Complex gradient.
pub type CVec3 = [Complex64; 3];

const CZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A potential value plus whether its series tail met the tolerance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PotentialEval {
    pub value: Complex64,
    pub converged: bool,
}

/// Solved folded problem for one material set and source.
///
/// Mode coefficients are computed up to `min(options.n_max, source.n_max)`;
/// `n_used` is the smallest degree at which the energy series has converged
/// (and which is past the resonant degree `N_δ = ln δ / ln ρ` by at least the
/// tail window), or the cap if it never does.
#[derive(Clone, Debug)]
pub struct FoldedSolution<'s> {
    geom: FoldedGeometry,
    mat: MaterialParams,
    source: &'s MultipoleSource,
    options: SolveOptions,
    modes: Vec<ModeCoefficients>,
    ln_exact: Vec<f64>,
    n_used: usize,
    converged: bool,
}

/// Solve the folded transmission problem for `source` (supported outside
/// `r_e`).
pub fn solve<'s>(
    geom: &FoldedGeometry,
    mat: &MaterialParams,
    source: &'s MultipoleSource,
    options: SolveOptions,
) -> Result<FoldedSolution<'s>> {
    if !(source.support_radius() > geom.r_e()) {
        return Err(Error::invalid(alloc::format!(
            "source radius {} must exceed the shell radius r_e = {}",
            source.support_radius(),
            geom.r_e()
        )));
    }
    if options.tail_window == 0 || !(options.tail_tolerance > 0.0) {
        return Err(Error::invalid("tail window and tolerance must be positive"));
    }
    let cap = options.n_max.min(source.n_max());
    let modes = (0..=cap)
        .map(|n| mode_coefficients_closed(geom, mat, n))
        .collect::<Result<Vec<_>>>()?;

    let ln_delta = logspace::ln_abs(mat.delta());
    let ln_re = libm::log(geom.r_e());
    let ln_exact: Vec<f64> = modes
        .iter()
        .map(|m| {
            let n = m.n();
            let nf = n as f64;
            let ln_b = libm::log(nf) + 2.0 * libm::log(m.b().norm()) + m.ln_p();
            let ln_c = libm::log(nf + 1.0) + 2.0 * libm::log(m.c().norm());
            let bracket = if n == 0 { f64::NEG_INFINITY } else { logspace::add(ln_b, ln_c) };
            ln_delta + source.ln_power(n) + (2.0 * nf + 1.0) * ln_re + ln_one_minus_exp(m.ln_p()) + bracket
        })
        .collect();

    let w = options.tail_window;
    let n_delta = n_delta(geom, mat);
    let floor = if n_delta.is_finite() {
        cap.min(libm::ceil(n_delta) as usize + w)
    } else {
        cap.min(w)
    };
    let ln_tol = libm::log(options.tail_tolerance);
    let mut n_used = cap;
    let mut converged = false;
    let mut total = f64::NEG_INFINITY;
    for n in 0..=cap {
        total = logspace::add(total, ln_exact[n]);
        if n + 1 < w || n < floor {
            continue;
        }
        let tail = logspace::sum(ln_exact[n + 1 - w..=n].iter().copied());
        if total == f64::NEG_INFINITY || tail <= ln_tol + total {
            n_used = n;
            converged = true;
            break;
        }
    }

    Ok(FoldedSolution {
        geom: *geom,
        mat: *mat,
        source,
        options,
        modes,
        ln_exact,
        n_used,
        converged,
    })
}

/// `N_δ = ln δ / ln ρ`; infinite for `δ = 0`.
pub(crate) fn n_delta(geom: &FoldedGeometry, mat: &MaterialParams) -> f64 {
    if mat.delta() > 0.0 {
        libm::log(mat.delta()) / libm::log(geom.rho())
    } else {
        f64::INFINITY
    }
}

/// `ln(1 - e^x)` for `x < 0`.
fn ln_one_minus_exp(x: f64) -> f64 {
    if x > -core::f64::consts::LN_2 {
        libm::log(-libm::expm1(x))
    } else {
        libm::log1p(-libm::exp(x))
    }
}

/// Per-direction sums `B_n = Σ_k m_n^k Y_n^k(u)` and the matching gradient
/// sums for regular and irregular solid harmonics, reused for every radius
/// along the ray `r u`.
#[derive(Clone, Debug)]
pub struct AngularData {
    dir: Vec3,
    values: Vec<f64>,
    regular: Vec<Vec3>,
    irregular: Vec<Vec3>,
}

impl AngularData {
    pub fn new(source: &MultipoleSource, dir: Vec3, n_top: usize, with_gradient: bool) -> Self {
        let u = dir.unit().expect("direction must be nonzero");
        let n_top = n_top.min(source.n_max());
        let d = if with_gradient { Derivatives::Gradient } else { Derivatives::None };
        let t = HarmonicTable::new(u, n_top, d);
        let mut values = Vec::with_capacity(n_top + 1);
        let mut regular = Vec::new();
        let mut irregular = Vec::new();
        for n in 0..=n_top {
            let (mut b, mut g) = (0.0, Vec3::ZERO);
            for (k, &m) in (-(n as i64)..=(n as i64)).zip(source.mantissas(n)) {
                if m == 0.0 {
                    continue;
                }
                b += m * t.value(n, k);
                if with_gradient {
                    g += t.regular_gradient(n, k) * m;
                }
            }
            values.push(b);
            if with_gradient {
                regular.push(g);
                irregular.push(g - u * ((2 * n + 1) as f64 * b));
            }
        }
        AngularData { dir: u, values, regular, irregular }
    }

    pub fn direction(&self) -> Vec3 {
        self.dir
    }

    pub fn max_degree(&self) -> usize {
        self.values.len() - 1
    }

    fn has_gradient(&self) -> bool {
        !self.regular.is_empty()
    }
}

fn cscale(v: Vec3, s: Complex64) -> CVec3 {
    [s * v.x, s * v.y, s * v.z]
}

fn cadd(a: CVec3, b: CVec3) -> CVec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn cnorm(a: &CVec3) -> f64 {
    libm::sqrt(a.iter().map(|z| z.norm_sqr()).sum())
}

impl<'s> FoldedSolution<'s> {
    pub fn geometry(&self) -> &FoldedGeometry {
        &self.geom
    }

    pub fn materials(&self) -> &MaterialParams {
        &self.mat
    }

    pub fn source(&self) -> &'s MultipoleSource {
        self.source
    }

    pub fn options(&self) -> &SolveOptions {
        &self.options
    }

    pub fn modes(&self) -> &[ModeCoefficients] {
        &self.modes
    }

    pub fn mode(&self, n: usize) -> &ModeCoefficients {
        &self.modes[n]
    }

    /// Highest computed degree.
    pub fn cap(&self) -> usize {
        self.modes.len() - 1
    }

    pub fn n_used(&self) -> usize {
        self.n_used
    }

    /// False if the energy series had not converged by the cap.
    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn n_delta(&self) -> f64 {
        n_delta(&self.geom, &self.mat)
    }

    /// `ln` of the degree-`n` term of the exact energy series.
    pub fn ln_mode_energy(&self, n: usize) -> f64 {
        self.ln_exact[n]
    }

    /// `ln` of the degree-`n` term of the simplified series
    /// `δ n Σ_k |f|² (|b_n|² r_0^{2n+1} + |c_n|² r_e^{-2n-1})`.
    pub fn ln_mode_energy_approx(&self, n: usize) -> f64 {
        if n == 0 {
            return f64::NEG_INFINITY;
        }
        let m = &self.modes[n];
        let nf = n as f64;
        let bracket = logspace::add(2.0 * libm::log(m.b().norm()) + m.ln_p(), 2.0 * libm::log(m.c().norm()));
        logspace::ln_abs(self.mat.delta())
            + libm::log(nf)
            + self.source.ln_power(n)
            + (2.0 * nf + 1.0) * libm::log(self.geom.r_e())
            + bracket
    }

    /// `E_δ = δ Σ_n Σ_k |f_n^k|² [n|b_n|²(r_0^{2n+1} - r_e^{2n+1}) +
    /// (n+1)|c_n|²(r_e^{-2n-1} - r_0^{-2n-1})]` through `n_used`.
    pub fn energy_exact(&self) -> f64 {
        self.energy_exact_upto(self.n_used)
    }

    pub fn energy_exact_upto(&self, n_top: usize) -> f64 {
        logspace::exp(self.ln_energy_exact_upto(n_top))
    }

    pub fn ln_energy_exact(&self) -> f64 {
        self.ln_energy_exact_upto(self.n_used)
    }

    pub fn ln_energy_exact_upto(&self, n_top: usize) -> f64 {
        let top = n_top.min(self.cap());
        logspace::sum(self.ln_exact[..=top].iter().copied())
    }

    pub fn energy_approx(&self) -> f64 {
        self.energy_approx_upto(self.n_used)
    }

    pub fn energy_approx_upto(&self, n_top: usize) -> f64 {
        let top = n_top.min(self.cap());
        logspace::exp(logspace::sum((0..=top).map(|n| self.ln_mode_energy_approx(n))))
    }

    /// Green's identity check: per degree, the boundary fluxes
    /// `∮ ū ∂_r u` on `|y| = r_0` and `|y| = r_e` each contain the cross
    /// terms `n c̄ b - (n+1) b̄ c`; their difference must reproduce the energy
    /// bracket exactly. Returns the largest mismatch relative to the flux
    /// magnitudes.
    pub fn flux_cancellation_error(&self) -> f64 {
        self.modes
            .iter()
            .skip(1)
            .map(|m| {
                let nf = m.n() as f64;
                let p = m.p();
                let (b, c) = (m.b(), m.c());
                let outer = (b + c).conj() * (b * nf - c * (nf + 1.0)) * p;
                let inner = (b * p + c).conj() * (b * (nf * p) - c * (nf + 1.0));
                let bracket = (1.0 - p) * (nf * p * b.norm_sqr() + (nf + 1.0) * c.norm_sqr());
                let size = outer.norm() + inner.norm();
                if size == 0.0 {
                    0.0
                } else {
                    (outer - inner - bracket).norm() / size
                }
            })
            .fold(0.0, f64::max)
    }

    fn check_folded(&self, region: Region, r: f64) -> Result<()> {
        let g = &self.geom;
        let tol = 1e-12 * g.r_0();
        let ok = match region {
            Region::Matrix => r > g.r_e(),
            Region::Shell => r >= g.r_e() - tol && r <= g.r_0() + tol,
            Region::Core => r <= g.r_0() + tol,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(alloc::format!("|y| = {r} is outside the folded {} region", region.name())))
        }
    }

    /// Layer series at `y = r u` through degree `n_top` (the source's own
    /// potential is not included). Returns value, gradient (zero unless the
    /// angular data carries gradients) and tail convergence.
    pub fn series_at(&self, region: Region, r: f64, ang: &AngularData, n_top: usize) -> (Complex64, CVec3, bool) {
        let top = n_top.min(self.cap()).min(ang.max_degree());
        let ln_r = libm::log(r);
        let ln_re = libm::log(self.geom.r_e());
        let grad = ang.has_gradient();
        let mut value = CZERO;
        let mut g = [CZERO; 3];
        let mut mags = Vec::with_capacity(top + 1);
        for n in 0..=top {
            let b_n = ang.values[n];
            let m = &self.modes[n];
            let nf = n as f64;
            let s = self.source.log_scale(n);
            let w1 = || logspace::exp(s + m.ln_p() + nf * ln_r);
            let w2 = || logspace::exp(s + (2.0 * nf + 1.0) * ln_re - (nf + 1.0) * ln_r);
            let (reg, irr) = match region {
                Region::Core => (m.a() * w1(), CZERO),
                Region::Shell => (m.b() * w1(), m.c() * w2()),
                Region::Matrix => (CZERO, m.d() * w2()),
            };
            let term = (reg + irr) * b_n;
            value += term;
            let mut mag = term.norm();
            if grad {
                let t = cadd(cscale(ang.regular[n], reg / r), cscale(ang.irregular[n], irr / r));
                mag += cnorm(&t) * r;
                g = cadd(g, t);
            }
            mags.push(mag);
        }
        let total = value.norm() + if grad { cnorm(&g) * r } else { 0.0 };
        let w = self.options.tail_window.min(mags.len());
        let tail: f64 = mags[mags.len() - w..].iter().sum();
        let converged = total == 0.0 || tail <= self.options.tail_tolerance * total;
        (value, g, converged)
    }

    /// Folded potential `u_region(y)`, including `F` in the matrix layer.
    pub fn eval_folded(&self, region: Region, y: Vec3) -> Result<PotentialEval> {
        let r = y.norm();
        self.check_folded(region, r)?;
        let f = if region == Region::Matrix { self.source.potential(y)? } else { 0.0 };
        let Some(u) = y.unit() else {
            // only the core reaches the origin; just the constant mode survives
            let m = &self.modes[0];
            let y00 = 1.0 / libm::sqrt(4.0 * core::f64::consts::PI);
            let v = m.a() * m.p() * self.source.coeff(0, 0) * y00;
            return Ok(PotentialEval { value: v, converged: true });
        };
        let ang = AngularData::new(self.source, u, self.cap(), false);
        let (v, _, converged) = self.series_at(region, r, &ang, self.cap());
        Ok(PotentialEval { value: v + f, converged })
    }

    /// `∇u_region(y)`.
    pub fn grad_folded(&self, region: Region, y: Vec3) -> Result<CVec3> {
        let r = y.norm();
        self.check_folded(region, r)?;
        let u = y.unit().ok_or_else(|| Error::domain("gradient evaluated at the origin"))?;
        let ang = AngularData::new(self.source, u, self.cap(), true);
        let (_, mut g, _) = self.series_at(region, r, &ang, self.cap());
        if region == Region::Matrix {
            let fg = self.source.potential_gradient(y)?;
            g = cadd(g, cscale(fg, Complex64::new(1.0, 0.0)));
        }
        Ok(g)
    }

    fn physical_point(&self, x: Vec3) -> Result<(Region, Vec3)> {
        if self.geom.on_interface(x) {
            return Err(Error::domain(alloc::format!("|x| = {} lies on an interface sphere", x.norm())));
        }
        self.geom.fold(x)
    }

    /// Physical potential `V_δ(x) = u(Φ⁻¹(x))`.
    pub fn eval_potential(&self, x: Vec3) -> Result<PotentialEval> {
        let (region, y) = self.physical_point(x)?;
        self.eval_folded(region, y)
    }

    pub fn potential(&self, x: Vec3) -> Result<Complex64> {
        self.eval_potential(x).map(|e| e.value)
    }

    /// `∇V_δ(x) = (∇Φ⁻¹)ᵀ ∇u(Φ⁻¹(x))`.
    pub fn gradient_potential(&self, x: Vec3) -> Result<CVec3> {
        let (region, y) = self.physical_point(x)?;
        let g = self.grad_folded(region, y)?;
        let jt = self.geom.fold_jacobian(x)?.transpose().0;
        Ok(core::array::from_fn(|i| jt[i][0] * g[0] + jt[i][1] * g[1] + jt[i][2] * g[2]))
    }

    /// `δ ∫_{r_e<|y|<r_0} |∇u_s|²` by Gauss–Legendre in `r` times an exact
    /// spherical rule, with the series cut at degree `n_cap`.
    pub fn energy_quadrature(&self, n_cap: usize) -> f64 {
        let top = n_cap.min(self.cap());
        let rule = make_quadrature(2 * top + 2);
        let radial = RadialRule::new(self.geom.r_e(), self.geom.r_0(), 8, 24);
        let mut total = 0.0;
        for (u, wu) in rule.iter() {
            let ang = AngularData::new(self.source, u, top, true);
            for (r, wr) in radial.iter() {
                let (_, g, _) = self.series_at(Region::Shell, r, &ang, top);
                total += wu * wr * r * r * g.iter().map(|z| z.norm_sqr()).sum::<f64>();
            }
        }
        self.mat.delta() * total
    }

    /// `Im ∫ ε ∇V·∇V̄` over the physical shell `r_i < |x| < r_e`, with `ε`
    /// the closed-form anisotropic tensor and `V` the unfolded series cut at
    /// degree `n_cap`. Equals [`energy_exact_upto`](Self::energy_exact_upto)
    /// by the change of variables.
    pub fn energy_physical(&self, n_cap: usize) -> Result<f64> {
        let top = n_cap.min(self.cap());
        let g = &self.geom;
        let rule = make_quadrature(2 * top + 2);
        let radial = RadialRule::new(g.r_i(), g.r_e(), 8, 24);
        let mut total = 0.0;
        for (u, wu) in rule.iter() {
            let ang = AngularData::new(self.source, u, top, true);
            for (s, ws) in radial.iter() {
                let x = u * s;
                let (region, y) = g.fold(x)?;
                let (_, gy, _) = self.series_at(region, y.norm(), &ang, top);
                let jt = g.fold_jacobian(x)?.transpose().0;
                let gx: CVec3 = core::array::from_fn(|i| jt[i][0] * gy[0] + jt[i][1] * gy[1] + jt[i][2] * gy[2]);
                let eps = g.permittivity_tensor(&self.mat, x)?;
                let eg = eps.mul_vec(gx);
                let form: Complex64 = (0..3).map(|i| eg[i] * gx[i].conj()).sum();
                total += wu * ws * s * s * form.im;
            }
        }
        Ok(total)
    }
}
