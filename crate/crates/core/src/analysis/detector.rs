use alloc::vec::Vec;

use super::{CalrVerdict, Regime, SweepResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    BlowUp,
    Bounded,
    Inconclusive,
}

impl Outcome {
    pub fn label(self) -> &'static str {
        match self {
            Outcome::BlowUp => "blow-up",
            Outcome::Bounded => "bounded",
            Outcome::Inconclusive => "inconclusive",
        }
    }
}

/// Growth required over the blow-up window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GrowthRule {
    /// Strictly increasing across the window with geometric-mean growth of
    /// at least `factor` per decade of `δ`.
    MonotonePerDecade { factor: f64 },
}

/// What counts as "not growing" over the plateau window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PlateauRule {
    /// `max E ≤ (1 + tol) E_start`: the energy never rises noticeably above
    /// its value at the window start (decay counts as bounded).
    OneSided { tolerance: f64 },
    /// `Σ |ΔE| < tol · max E`: the energy is flat in both directions.
    TotalVariation { tolerance: f64 },
}

/// Finite-`δ` blow-up detector.
///
/// The default (`G = 1`, one-sided plateau) separates the regimes at the
/// rates actually observed near the critical radii, where growth per decade
/// approaches 1. [`DetectorConfig::fixed_thresholds`] is the stricter
/// 10×-per-decade / 5%-variation pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectorConfig {
    pub growth: GrowthRule,
    pub growth_decades: f64,
    pub plateau: PlateauRule,
    pub plateau_decades: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            growth: GrowthRule::MonotonePerDecade { factor: 1.0 },
            growth_decades: 3.0,
            plateau: PlateauRule::OneSided { tolerance: 0.05 },
            plateau_decades: 2.0,
        }
    }
}

impl DetectorConfig {
    pub fn fixed_thresholds() -> Self {
        DetectorConfig {
            growth: GrowthRule::MonotonePerDecade { factor: 10.0 },
            growth_decades: 3.0,
            plateau: PlateauRule::TotalVariation { tolerance: 0.05 },
            plateau_decades: 2.0,
        }
    }

    pub fn validate(&self) -> crate::Result<()> {
        let GrowthRule::MonotonePerDecade { factor } = self.growth;
        let tol = match self.plateau {
            PlateauRule::OneSided { tolerance } | PlateauRule::TotalVariation { tolerance } => tolerance,
        };
        if !(factor >= 1.0 && factor.is_finite()) {
            return Err(crate::Error::invalid("growth factor per decade must be >= 1"));
        }
        if !(tol >= 0.0 && tol.is_finite()) {
            return Err(crate::Error::invalid("plateau tolerance must be nonnegative"));
        }
        if !(self.growth_decades > 0.0 && self.plateau_decades > 0.0) {
            return Err(crate::Error::invalid("detector windows must span a positive number of decades"));
        }
        Ok(())
    }
}

/// Summary of the trailing part of a sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowStats {
    /// False if the sweep is shorter than the window or a row in it failed.
    pub complete: bool,
    pub points: usize,
    /// Decades of `δ` actually spanned.
    pub decades: f64,
    pub strictly_increasing: bool,
    /// `(E_last / E_start)^{1/decades}`.
    pub growth_per_decade: f64,
    /// `max E / E_start`.
    pub rise: f64,
    /// `Σ |ΔE| / max E`.
    pub variation: f64,
    pub e_start: f64,
    pub e_end: f64,
}

impl WindowStats {
    const EMPTY: WindowStats = WindowStats {
        complete: false,
        points: 0,
        decades: 0.0,
        strictly_increasing: false,
        growth_per_decade: f64::NAN,
        rise: f64::NAN,
        variation: f64::NAN,
        e_start: f64::NAN,
        e_end: f64::NAN,
    };
}

/// Trailing rows spanning at least `decades` decades, as `(log₁₀ δ, ln E)`.
fn window(result: &SweepResult, decades: f64) -> (bool, Vec<(f64, f64)>) {
    let rows = result.rows();
    let Some(last) = rows.last() else {
        return (false, Vec::new());
    };
    let lo = libm::log10(last.delta);
    let start = rows.iter().rposition(|r| libm::log10(r.delta) >= lo + decades - 1e-9);
    let Some(start) = start else {
        return (false, Vec::new());
    };
    let mut ok = true;
    let mut out = Vec::with_capacity(rows.len() - start);
    for r in &rows[start..] {
        match &r.outcome {
            Ok(p) => out.push((libm::log10(r.delta), p.ln_e_exact)),
            Err(_) => ok = false,
        }
    }
    (ok, out)
}

fn stats(complete: bool, w: &[(f64, f64)]) -> WindowStats {
    if w.len() < 2 {
        return WindowStats { complete: false, points: w.len(), ..WindowStats::EMPTY };
    }
    let (d0, l0) = w[0];
    let (d1, l1) = w[w.len() - 1];
    let decades = d0 - d1;
    let ln_max = w.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let strictly_increasing = w.windows(2).all(|p| p[1].1 > p[0].1);
    let zero = ln_max == f64::NEG_INFINITY;
    let ratio = |a: f64, b: f64| if zero { 1.0 } else { libm::exp(a - b) };
    let growth_per_decade = if zero { 1.0 } else { libm::exp((l1 - l0) / decades) };
    let variation = if zero {
        0.0
    } else {
        w.windows(2).map(|p| libm::fabs(libm::exp(p[1].1 - ln_max) - libm::exp(p[0].1 - ln_max))).sum()
    };
    WindowStats {
        complete,
        points: w.len(),
        decades,
        strictly_increasing,
        growth_per_decade,
        rise: ratio(ln_max, l0),
        variation,
        e_start: libm::exp(l0),
        e_end: libm::exp(l1),
    }
}

/// Least-squares slope of `ln E` against `ln δ`.
fn slope(w: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = w
        .iter()
        .filter(|p| p.1.is_finite())
        .map(|&(d, l)| (d * core::f64::consts::LN_10, l))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Apply a detector to an existing sweep.
pub fn classify_sweep(result: &SweepResult, regime: Regime, detector: &DetectorConfig) -> CalrVerdict {
    let (g_ok, gw) = window(result, detector.growth_decades);
    let (p_ok, pw) = window(result, detector.plateau_decades);
    let evidence = stats(g_ok, &gw);
    let plateau = stats(p_ok, &pw);

    let GrowthRule::MonotonePerDecade { factor } = detector.growth;
    let grows = evidence.complete && evidence.strictly_increasing && evidence.growth_per_decade >= factor;
    let flat = plateau.complete
        && match detector.plateau {
            PlateauRule::OneSided { tolerance } => plateau.rise <= 1.0 + tolerance,
            PlateauRule::TotalVariation { tolerance } => plateau.variation < tolerance,
        };
    let outcome = if grows {
        Outcome::BlowUp
    } else if flat {
        Outcome::Bounded
    } else {
        Outcome::Inconclusive
    };
    CalrVerdict {
        outcome,
        regime,
        growth_exponent: slope(&gw),
        evidence,
        plateau,
        points: result.len(),
        failures: result.failures(),
    }
}

#[cfg(test)]
mod tests {
    use super::super::{SweepPoint, SweepRow};
    use super::*;

    fn synthetic(energies: &[f64]) -> SweepResult {
        let rows = energies
            .iter()
            .enumerate()
            .map(|(k, &e)| SweepRow {
                delta: libm::pow(10.0, -(k as f64)),
                n_delta: k as f64,
                outcome: Ok(SweepPoint { e_exact: e, e_approx: e, ln_e_exact: libm::log(e), n_used: 0, converged: true }),
            })
            .collect();
        SweepResult::from_rows(rows).unwrap()
    }

    #[test]
    fn geometric_growth_is_blow_up_for_both_detectors() {
        let r = synthetic(&[1.0, 20.0, 400.0, 8000.0, 160000.0]);
        for det in [DetectorConfig::default(), DetectorConfig::fixed_thresholds()] {
            let v = classify_sweep(&r, Regime::CaseI, &det);
            assert_eq!(v.outcome, Outcome::BlowUp);
            assert!((v.evidence.growth_per_decade - 20.0).abs() < 1e-9);
            assert!((v.growth_exponent + libm::log(20.0) / libm::log(10.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn slow_growth_only_passes_default() {
        let r = synthetic(&[1.0, 2.0, 4.0, 8.0, 16.0]);
        assert_eq!(classify_sweep(&r, Regime::CaseII, &DetectorConfig::default()).outcome, Outcome::BlowUp);
        let v = classify_sweep(&r, Regime::CaseII, &DetectorConfig::fixed_thresholds());
        assert_eq!(v.outcome, Outcome::Inconclusive);
    }

    #[test]
    fn decay_is_bounded_one_sided_only() {
        let r = synthetic(&[1.0, 0.5, 0.25, 0.125]);
        assert_eq!(classify_sweep(&r, Regime::CaseIII, &DetectorConfig::default()).outcome, Outcome::Bounded);
        let v = classify_sweep(&r, Regime::CaseIII, &DetectorConfig::fixed_thresholds());
        assert_eq!(v.outcome, Outcome::Inconclusive);
        let flat = synthetic(&[1.0, 1.01, 1.02, 1.02]);
        let v = classify_sweep(&flat, Regime::CaseIII, &DetectorConfig::fixed_thresholds());
        assert_eq!(v.outcome, Outcome::Bounded);
    }

    #[test]
    fn short_or_failed_windows_are_inconclusive() {
        let r = synthetic(&[1.0, 10.0]);
        assert_eq!(classify_sweep(&r, Regime::CaseI, &DetectorConfig::default()).outcome, Outcome::Inconclusive);
        let mut rows = synthetic(&[1.0, 10.0, 100.0, 1000.0, 1e4]).rows().to_vec();
        rows[3].outcome = Err(crate::Error::Resonance { n: 3 });
        let r = SweepResult::from_rows(rows).unwrap();
        assert_eq!(classify_sweep(&r, Regime::CaseI, &DetectorConfig::default()).outcome, Outcome::Inconclusive);
    }

    #[test]
    fn config_validation() {
        assert!(DetectorConfig::default().validate().is_ok());
        let mut d = DetectorConfig::default();
        d.growth = GrowthRule::MonotonePerDecade { factor: 0.5 };
        assert!(d.validate().is_err());
    }
}
