//! Loss sweeps and what is read off them: blow-up classification,
//! critical-radius bisection, far-field boundedness, gap-condition
//! diagnostics and local field energies.
//!
//! Everything here is sequential. A sweep is a list of independent
//! [`sweep_point`] calls, so drivers that want parallelism can run those
//! themselves and assemble the table with [`SweepResult::from_rows`].

mod detector;
mod gap;
mod probes;

pub use detector::{classify_sweep, DetectorConfig, GrowthRule, Outcome, PlateauRule, WindowStats};
pub use gap::{fit_geometric_rate, gap_check, GapCondition, GapDiagnostics, GapVerdict};
pub use probes::{
    boundedness_probe, critical_radius_probe, local_energy, majorant, BoundednessReport, CriticalRadius,
    LocalQuadrature, Majorant, RegionSpec,
};

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::FoldedGeometry;
use crate::sources::MultipoleSource;
use crate::spectral::{solve, MaterialParams, SolveOptions};

/// Fixed `(ε_c, ε_s)` with the loss left free.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaterialFamily {
    pub eps_c: f64,
    pub eps_s: f64,
}

impl MaterialFamily {
    pub fn new(eps_c: f64, eps_s: f64) -> Result<Self> {
        MaterialParams::new(eps_c, eps_s, 1.0)?;
        Ok(MaterialFamily { eps_c, eps_s })
    }

    pub fn at(&self, delta: f64) -> Result<MaterialParams> {
        MaterialParams::new(self.eps_c, self.eps_s, delta)
    }
}

/// Which CALR regime a configuration falls under.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `ε_c = -ε_s = 1`, source inside `r_* = √(r_e r_0)`.
    CaseI,
    /// `ε_c ≠ -ε_s = 1`, source inside `r_** = r_0`.
    CaseII,
    /// `-ε_s ≠ 1`: no resonance at any radius.
    CaseIII,
    /// `-ε_s = 1` but the source lies outside the critical radius.
    OutsideCritical,
}

const UNIT_TOL: f64 = 1e-12;

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::CaseI => "case-i",
            Regime::CaseII => "case-ii",
            Regime::CaseIII => "case-iii",
            Regime::OutsideCritical => "outside-critical",
        }
    }

    /// Critical radius for the material pair, if one exists.
    pub fn critical_radius(geom: &FoldedGeometry, eps_c: f64, eps_s: f64) -> Option<f64> {
        if libm::fabs(eps_s + 1.0) > UNIT_TOL {
            None
        } else if libm::fabs(eps_c - 1.0) <= UNIT_TOL {
            Some(geom.r_star())
        } else {
            Some(geom.r_dstar())
        }
    }

    pub fn determine(geom: &FoldedGeometry, eps_c: f64, eps_s: f64, source_radius: f64) -> Regime {
        match Regime::critical_radius(geom, eps_c, eps_s) {
            None => Regime::CaseIII,
            Some(r) if source_radius >= r => Regime::OutsideCritical,
            Some(_) if libm::fabs(eps_c - 1.0) <= UNIT_TOL => Regime::CaseI,
            Some(_) => Regime::CaseII,
        }
    }
}

/// Energies at one loss value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    pub e_exact: f64,
    pub e_approx: f64,
    /// `ln E_exact`, kept because deep sweeps under- and overflow.
    pub ln_e_exact: f64,
    pub n_used: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub delta: f64,
    pub n_delta: f64,
    pub outcome: Result<SweepPoint>,
}

/// One row per loss value, in decreasing `δ`.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    rows: Vec<SweepRow>,
}

impl SweepResult {
    /// Assemble rows computed elsewhere; they are reordered by decreasing
    /// `δ` and must have distinct positive `δ`.
    pub fn from_rows(mut rows: Vec<SweepRow>) -> Result<Self> {
        rows.sort_by(|a, b| b.delta.total_cmp(&a.delta));
        check_grid(&rows.iter().map(|r| r.delta).collect::<Vec<_>>())?;
        Ok(SweepResult { rows })
    }

    pub fn rows(&self) -> &[SweepRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn deltas(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.delta).collect()
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.outcome.is_err()).count()
    }

    /// `(δ, point)` for every row that solved.
    pub fn points(&self) -> impl Iterator<Item = (f64, &SweepPoint)> + '_ {
        self.rows.iter().filter_map(|r| r.outcome.as_ref().ok().map(|p| (r.delta, p)))
    }
}

/// Validates a loss grid: nonempty, positive, finite, strictly decreasing.
pub fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("empty delta grid"));
    }
    if let Some(d) = grid.iter().find(|d| !(**d > 0.0 && d.is_finite())) {
        return Err(Error::invalid(alloc::format!("delta values must be positive and finite (got {d})")));
    }
    if grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("delta grid must be strictly decreasing"));
    }
    Ok(())
}

/// `δ_k = ρ^k` for `k = 3..=k_max` with `k_max = min(n_max - 20, ⌊100 / log₁₀(1/ρ)⌋)`.
///
/// The first bound keeps the resonant degree `N_δ = k` well inside the
/// series; the second keeps `1/δ²` representable.
pub fn canonical_grid(geom: &FoldedGeometry, n_max: usize) -> Vec<f64> {
    let rho = geom.rho();
    let by_range = libm::floor(100.0 / -libm::log10(rho)) as usize;
    let k_max = n_max.saturating_sub(20).min(by_range);
    (3..=k_max).map(|k| libm::pow(rho, k as f64)).collect()
}

/// Solve at a single loss value.
pub fn sweep_point(
    geom: &FoldedGeometry,
    family: MaterialFamily,
    source: &MultipoleSource,
    delta: f64,
    options: SolveOptions,
) -> SweepRow {
    let n_delta = libm::log(delta) / libm::log(geom.rho());
    let outcome = family.at(delta).and_then(|mat| {
        let sol = solve(geom, &mat, source, options)?;
        Ok(SweepPoint {
            e_exact: sol.energy_exact(),
            e_approx: sol.energy_approx(),
            ln_e_exact: sol.ln_energy_exact(),
            n_used: sol.n_used(),
            converged: sol.converged(),
        })
    });
    SweepRow { delta, n_delta, outcome }
}

/// Energies over a decreasing loss grid. Solver failures are recorded per
/// row; only an invalid grid or source fails the whole sweep.
pub fn sweep(
    geom: &FoldedGeometry,
    family: MaterialFamily,
    source: &MultipoleSource,
    grid: &[f64],
    options: SolveOptions,
) -> Result<SweepResult> {
    check_grid(grid)?;
    if !(source.support_radius() > geom.r_e()) {
        return Err(Error::invalid("source must be supported outside the shell radius r_e"));
    }
    let rows = grid.iter().map(|&d| sweep_point(geom, family, source, d, options)).collect();
    Ok(SweepResult { rows })
}

/// Verdict of [`classify`].
#[derive(Clone, Debug, PartialEq)]
pub struct CalrVerdict {
    pub outcome: Outcome,
    pub regime: Regime,
    /// Least-squares slope of `ln E` against `ln δ` over the growth window;
    /// negative when the energy grows as the loss vanishes.
    pub growth_exponent: f64,
    pub evidence: WindowStats,
    pub plateau: WindowStats,
    pub points: usize,
    pub failures: usize,
}

impl CalrVerdict {
    pub fn blow_up(&self) -> bool {
        self.outcome == Outcome::BlowUp
    }
}

/// Sweep over the canonical grid and apply the detector. The regime label
/// comes from the material pair and the source radius alone.
pub fn classify(
    geom: &FoldedGeometry,
    eps_c: f64,
    eps_s: f64,
    source: &MultipoleSource,
    options: SolveOptions,
    detector: &DetectorConfig,
) -> Result<CalrVerdict> {
    let family = MaterialFamily::new(eps_c, eps_s)?;
    let grid = canonical_grid(geom, options.n_max.min(source.n_max()));
    if grid.is_empty() {
        return Err(Error::invalid("n_max too small for a canonical delta grid (need n_max >= 23)"));
    }
    let result = sweep(geom, family, source, &grid, options)?;
    let regime = Regime::determine(geom, eps_c, eps_s, source.support_radius());
    Ok(classify_sweep(&result, regime, detector))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Vec3;

    fn g124() -> FoldedGeometry {
        FoldedGeometry::derive(1.0, 2.0, 4.0).unwrap()
    }

    fn radial_dipole(r: f64) -> MultipoleSource {
        MultipoleSource::dipole(Vec3::E3, Vec3::E3 * r, 200).unwrap()
    }

    #[test]
    fn regimes() {
        let g = g124();
        assert_eq!(Regime::determine(&g, 1.0, -1.0, 2.4), Regime::CaseI);
        assert_eq!(Regime::determine(&g, 1.0, -1.0, 3.5), Regime::OutsideCritical);
        assert_eq!(Regime::determine(&g, 2.0, -1.0, 3.5), Regime::CaseII);
        assert_eq!(Regime::determine(&g, 2.0, -1.0, 4.5), Regime::OutsideCritical);
        assert_eq!(Regime::determine(&g, 1.0, -3.0, 2.4), Regime::CaseIII);
        assert_eq!(Regime::CaseIII.label(), "case-iii");
    }

    #[test]
    fn canonical_grid_bounds() {
        let g = g124();
        let grid = canonical_grid(&g, 200);
        assert_eq!(grid.len(), 178);
        assert_eq!(grid[0], 0.125);
        assert!(check_grid(&grid).is_ok());
        assert!(canonical_grid(&g, 22).is_empty());
        let thin = FoldedGeometry::derive(1.0, 1.0 + 1e-3, 10.0).unwrap();
        let k_max = canonical_grid(&thin, 200).len() + 2;
        assert_eq!(k_max, 100);
    }

    #[test]
    fn bad_grids_rejected() {
        assert!(check_grid(&[]).is_err());
        assert!(check_grid(&[0.1, 0.1]).is_err());
        assert!(check_grid(&[0.1, 0.2]).is_err());
        assert!(check_grid(&[0.1, -0.2]).is_err());
        assert!(check_grid(&[0.1, f64::NAN]).is_err());
    }

    #[test]
    fn sweep_rows_ordered_and_resolved_past_resonance() {
        let g = g124();
        let fam = MaterialFamily::new(1.0, -1.0).unwrap();
        let src = radial_dipole(2.4);
        let grid: Vec<f64> = (3..=24).map(|k| libm::pow(0.5, k as f64)).collect();
        let res = sweep(&g, fam, &src, &grid, SolveOptions::default()).unwrap();
        assert_eq!(res.len(), 22);
        assert_eq!(res.failures(), 0);
        for (d, p) in res.points() {
            let nd = libm::log(d) / libm::log(0.5);
            assert!(p.n_used as f64 >= nd);
            assert!(p.e_exact > 0.0 && p.e_approx > 0.0);
        }
        let shuffled = SweepResult::from_rows(res.rows().iter().rev().cloned().collect()).unwrap();
        assert_eq!(shuffled, res);
    }

    #[test]
    fn zero_source_is_bounded() {
        let g = g124();
        let src = MultipoleSource::zero(200);
        let v = classify(&g, 1.0, -1.0, &src, SolveOptions::default(), &DetectorConfig::default()).unwrap();
        assert_eq!(v.outcome, Outcome::Bounded);
    }

    #[test]
    fn regime_cases_with_default_detector() {
        let g = g124();
        let opts = SolveOptions::default();
        let det = DetectorConfig::default();
        let v = classify(&g, 1.0, -1.0, &radial_dipole(2.4), opts, &det).unwrap();
        assert!(v.blow_up(), "{v:?}");
        assert_eq!(v.regime, Regime::CaseI);
        assert!(v.growth_exponent < 0.0);
        let v = classify(&g, 1.0, -1.0, &radial_dipole(3.5), opts, &det).unwrap();
        assert_eq!(v.outcome, Outcome::Bounded, "{v:?}");
        let v = classify(&g, 2.0, -1.0, &radial_dipole(3.5), opts, &det).unwrap();
        assert!(v.blow_up(), "{v:?}");
        assert_eq!(v.regime, Regime::CaseII);
        let v = classify(&g, 2.0, -1.0, &radial_dipole(4.5), opts, &det).unwrap();
        assert_eq!(v.outcome, Outcome::Bounded, "{v:?}");
        let v = classify(&g, 1.0, -3.0, &radial_dipole(2.4), opts, &det).unwrap();
        assert_eq!(v.outcome, Outcome::Bounded, "{v:?}");
        assert_eq!(v.regime, Regime::CaseIII);
    }

    #[test]
    fn verdict_ignores_source_amplitude() {
        let g = g124();
        let src = radial_dipole(2.4);
        let opts = SolveOptions::default();
        let det = DetectorConfig::default();
        let a = classify(&g, 1.0, -1.0, &src, opts, &det).unwrap();
        let b = classify(&g, 1.0, -1.0, &src.scaled(1e6), opts, &det).unwrap();
        assert_eq!(a.outcome, b.outcome);
        assert!((a.growth_exponent - b.growth_exponent).abs() < 1e-9);
    }
}
