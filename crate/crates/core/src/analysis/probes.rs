use alloc::vec::Vec;

use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{FoldedGeometry, Region};
use crate::harmonics::{fibonacci_sphere, make_quadrature, RadialRule};
use crate::linalg::Vec3;
use crate::logspace;
use crate::sources::{MultipoleSource, SourceKind};
use crate::spectral::{solve, AngularData, FoldedSolution, SolveOptions};

use super::{check_grid, classify, fit_geometric_rate, DetectorConfig, MaterialFamily, Outcome, Regime};

/// Bracket `[lower, upper]` around the radius where the detector verdict
/// switches from blow-up to bounded.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriticalRadius {
    pub lower: f64,
    pub upper: f64,
    pub evaluations: usize,
}

impl CriticalRadius {
    pub fn estimate(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

/// Bisection on the radius of a radial dipole along `direction`, starting
/// from `(1.01 r_e, 0.99 r_0²/r_e)` with [`classify`] as the predicate.
///
/// An inconclusive verdict anywhere (including at the bracket ends) stops
/// the bisection with [`Error::Bisection`] rather than guessing.
pub fn critical_radius_probe(
    geom: &FoldedGeometry,
    eps_c: f64,
    eps_s: f64,
    direction: Vec3,
    tol: f64,
    options: SolveOptions,
    detector: &DetectorConfig,
) -> Result<CriticalRadius> {
    if Regime::critical_radius(geom, eps_c, eps_s).is_none() {
        return Err(Error::NoCriticalRadius(Regime::CaseIII.label()));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("bisection tolerance must be positive"));
    }
    let dir = direction.unit().ok_or_else(|| Error::invalid("dipole direction must be nonzero"))?;
    detector.validate()?;
    let mut evaluations = 0;
    let mut verdict = |r: f64| -> Result<Outcome> {
        evaluations += 1;
        let src = MultipoleSource::dipole(dir, dir * r, options.n_max)?;
        Ok(classify(geom, eps_c, eps_s, &src, options, detector)?.outcome)
    };
    let (mut lo, mut hi) = (1.01 * geom.r_e(), 0.99 * geom.far_bound());
    let at_lo = verdict(lo)?;
    let at_hi = verdict(hi)?;
    if at_lo != Outcome::BlowUp || at_hi != Outcome::Bounded {
        return Err(Error::Bisection(alloc::format!(
            "bracket ends are not blow-up/bounded: {} at {lo}, {} at {hi}",
            at_lo.label(),
            at_hi.label()
        )));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        match verdict(mid)? {
            Outcome::BlowUp => lo = mid,
            Outcome::Bounded => hi = mid,
            Outcome::Inconclusive => {
                return Err(Error::Bisection(alloc::format!("inconclusive verdict at radius {mid}")));
            }
        }
    }
    Ok(CriticalRadius { lower: lo, upper: hi, evaluations })
}

/// `M(R) = Σ_n C r_0^{2n} √(Σ_k |f_n^k|²) √((2n+1)/4π) R^{-n-1}`, a bound on
/// `|u_m - F|` at `|x| = R` whenever `|d_n| ≤ C r_0^{2n}` (Cauchy–Schwarz
/// plus the addition theorem).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Majorant {
    /// Partial sum through the source degree; infinite if the ratio test
    /// says the series diverges.
    pub value: f64,
    /// Fitted geometric ratio of successive terms.
    pub ratio: f64,
    pub converges: bool,
}

pub fn majorant(geom: &FoldedGeometry, source: &MultipoleSource, ln_c: f64, radius: f64) -> Majorant {
    let ln_r0 = libm::log(geom.r_0());
    let ln_r = libm::log(radius);
    let terms: Vec<(usize, f64)> = (0..=source.n_max())
        .map(|n| {
            let nf = n as f64;
            let ln_y = 0.5 * libm::log((2.0 * nf + 1.0) / (4.0 * PI));
            (n, ln_c + 2.0 * nf * ln_r0 + 0.5 * source.ln_power(n) + ln_y - (nf + 1.0) * ln_r)
        })
        .collect();
    let half = terms.len() / 2;
    let ratio = fit_geometric_rate(&terms[half..]);
    // an all-zero tail has no ratio and nothing to diverge
    let converges = ratio.is_nan() || ratio < 1.0;
    let value = if converges { logspace::exp(logspace::sum(terms.iter().map(|t| t.1))) } else { f64::INFINITY };
    Majorant { value, ratio, converges }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundednessReport {
    /// `sup |V_δ|` over the grid and the sample points.
    pub sup_potential: f64,
    /// Per-`δ` sup, in grid order.
    pub sup_per_delta: Vec<f64>,
    /// `sup |F|` over the sample points.
    pub sup_source: f64,
    /// `ln C` with `C = max_{δ,n} |d_n| / r_0^{2n}`.
    pub ln_c: f64,
    pub majorant: Majorant,
    /// Evaluations whose series tail missed the tolerance.
    pub unconverged: usize,
}

impl BoundednessReport {
    pub fn within_majorant(&self) -> bool {
        self.sup_potential <= self.majorant.value + self.sup_source
    }
}

/// `sup |V_δ|` on the sphere `|x| = sample_radius` (quasi-uniform points)
/// over a loss grid, with the matching series majorant. The source must
/// lie inside the sample sphere.
pub fn boundedness_probe(
    geom: &FoldedGeometry,
    family: MaterialFamily,
    source: &MultipoleSource,
    sample_radius: f64,
    grid: &[f64],
    samples: usize,
    options: SolveOptions,
) -> Result<BoundednessReport> {
    if !(sample_radius > geom.far_bound()) {
        return Err(Error::invalid(alloc::format!(
            "sample radius {sample_radius} must exceed r_0²/r_e = {}",
            geom.far_bound()
        )));
    }
    if samples == 0 {
        return Err(Error::invalid("need at least one sample point"));
    }
    if !source.is_zero() && !(source.support_radius() < sample_radius) {
        return Err(Error::invalid("the source must lie inside the sample sphere"));
    }
    check_grid(grid)?;
    let points: Vec<Vec3> = fibonacci_sphere(samples).into_iter().map(|u| u * sample_radius).collect();
    let mut sup_per_delta = Vec::with_capacity(grid.len());
    let mut ln_c = f64::NEG_INFINITY;
    let mut unconverged = 0;
    let ln_re = libm::log(geom.r_e());
    let ln_r0 = libm::log(geom.r_0());
    for &delta in grid {
        let mat = family.at(delta)?;
        let sol = solve(geom, &mat, source, options)?;
        for m in sol.modes() {
            let nf = m.n() as f64;
            let ln_d = logspace::ln_abs(m.d().norm()) + (2.0 * nf + 1.0) * ln_re;
            ln_c = ln_c.max(ln_d - 2.0 * nf * ln_r0);
        }
        let mut sup = 0.0_f64;
        for &x in &points {
            let v = sol.eval_potential(x)?;
            if !v.converged {
                unconverged += 1;
            }
            sup = sup.max(v.value.norm());
        }
        sup_per_delta.push(sup);
    }
    let mut sup_source = 0.0_f64;
    for &x in &points {
        sup_source = sup_source.max(libm::fabs(source.potential(x)?));
    }
    let sup_potential = sup_per_delta.iter().copied().fold(0.0, f64::max);
    Ok(BoundednessReport {
        sup_potential,
        sup_per_delta,
        sup_source,
        ln_c,
        majorant: majorant(geom, source, ln_c, sample_radius),
        unconverged,
    })
}

/// Ball `|x| < radius` or annulus `inner < |x| < outer`, in physical
/// coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RegionSpec {
    Ball { radius: f64 },
    Annulus { inner: f64, outer: f64 },
}

impl RegionSpec {
    fn bounds(&self) -> (f64, f64) {
        match *self {
            RegionSpec::Ball { radius } => (0.0, radius),
            RegionSpec::Annulus { inner, outer } => (inner, outer),
        }
    }
}

/// Tensor-product rule for [`local_energy`]: Gauss–Legendre panels in
/// radius times an exact spherical rule of the given degree. The layer
/// series is cut at half the angular degree, the largest degree whose
/// squares the rule integrates exactly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalQuadrature {
    pub angular_degree: usize,
    pub radial_panels: usize,
    pub radial_points: usize,
}

impl Default for LocalQuadrature {
    fn default() -> Self {
        LocalQuadrature { angular_degree: 64, radial_panels: 4, radial_points: 16 }
    }
}

/// `∫_U |∇V_δ|²` over a ball or annulus `U`.
///
/// Regions that cross the interface spheres `r_i`, `r_e`, or whose closure
/// meets the source support radius, are rejected.
pub fn local_energy(sol: &FoldedSolution<'_>, region: RegionSpec, quad: LocalQuadrature) -> Result<f64> {
    let (inner, outer) = region.bounds();
    if !(inner >= 0.0 && outer > inner && outer.is_finite()) {
        return Err(Error::invalid("region needs 0 <= inner < outer < inf"));
    }
    if quad.angular_degree == 0 || quad.radial_panels == 0 || quad.radial_points == 0 {
        return Err(Error::invalid("quadrature sizes must be positive"));
    }
    let g = sol.geometry();
    for r in [g.r_i(), g.r_e()] {
        if inner < r && r < outer {
            return Err(Error::domain(alloc::format!(
                "region ({inner}, {outer}) crosses the interface |x| = {r}"
            )));
        }
    }
    let source = sol.source();
    let s = source.support_radius();
    let raw = matches!(source.kind(), SourceKind::Raw { .. });
    if (inner <= s && s <= outer) || (raw && outer >= s) {
        return Err(Error::domain(alloc::format!(
            "region ({inner}, {outer}) meets the source support radius {s}"
        )));
    }
    if source.is_zero() {
        return Ok(0.0);
    }
    let n_top = sol.cap().min(quad.angular_degree / 2);
    let rule = make_quadrature(quad.angular_degree);
    let radial = RadialRule::new(inner, outer, quad.radial_panels, quad.radial_points);
    let mut total = 0.0;
    for (u, wu) in rule.iter() {
        let ang = AngularData::new(source, u, n_top, true);
        for (r, wr) in radial.iter() {
            let x = u * r;
            let (reg, y) = g.fold(x)?;
            let (_, mut gy, _) = sol.series_at(reg, y.norm(), &ang, n_top);
            if reg == Region::Matrix {
                let f = source.potential_gradient(y)?;
                for (gi, fi) in gy.iter_mut().zip(f.to_array()) {
                    *gi += Complex64::new(fi, 0.0);
                }
            }
            let jt = g.fold_jacobian(x)?.transpose().0;
            let gx: f64 = (0..3)
                .map(|i| (jt[i][0] * gy[0] + jt[i][1] * gy[1] + jt[i][2] * gy[2]).norm_sqr())
                .sum();
            total += wu * wr * r * r * gx;
        }
    }
    Ok(total)
}
