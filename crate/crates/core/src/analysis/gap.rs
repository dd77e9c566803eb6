use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::FoldedGeometry;
use crate::sources::MultipoleSource;

/// The two lacunarity conditions: `ρ^{w(n_{j+1}-n_j)} S_{n_j}(r) → ∞` with
/// `S_n(r) = Σ_k n r^{2n} |f_n^k|²`, and `(w, r) = (1, r_*)` or `(2, r_0)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GapCondition {
    Gc1,
    Gc2,
}

impl GapCondition {
    pub fn label(self) -> &'static str {
        match self {
            GapCondition::Gc1 => "GC1",
            GapCondition::Gc2 => "GC2",
        }
    }

    pub fn radius(self, geom: &FoldedGeometry) -> f64 {
        match self {
            GapCondition::Gc1 => geom.r_star(),
            GapCondition::Gc2 => geom.r_0(),
        }
    }

    pub fn gap_weight(self) -> f64 {
        match self {
            GapCondition::Gc1 => 1.0,
            GapCondition::Gc2 => 2.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GapVerdict {
    Diverges,
    DoesNotDiverge,
}

impl GapVerdict {
    pub fn label(self) -> &'static str {
        match self {
            GapVerdict::Diverges => "diverges",
            GapVerdict::DoesNotDiverge => "does-not-diverge",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GapDiagnostics {
    pub condition: GapCondition,
    pub radius: f64,
    /// `ln S_n(r)` for `n = 0..=N`; `S_0 = 0` always.
    pub ln_summands: Vec<f64>,
    pub sequence: Vec<usize>,
    /// `ln(ρ^{w(n_{j+1}-n_j)} S_{n_j})` for every `j` with a successor.
    pub ln_functional: Vec<f64>,
    pub verdict: GapVerdict,
}

impl GapDiagnostics {
    /// Fitted geometric rate of `S_n` over `n ∈ [lo, hi]`; see
    /// [`fit_geometric_rate`].
    pub fn summand_rate(&self, lo: usize, hi: usize) -> f64 {
        let hi = hi.min(self.ln_summands.len() - 1);
        let pts: Vec<(usize, f64)> = (lo.max(1)..=hi).map(|n| (n, self.ln_summands[n])).collect();
        fit_geometric_rate(&pts)
    }
}

/// Rate `q` of a sequence behaving like `C n^β q^n`, from a least-squares
/// fit of `ln s_n = c + β ln n + n ln q`. Nonfinite samples are skipped.
pub fn fit_geometric_rate(samples: &[(usize, f64)]) -> f64 {
    let pts: Vec<[f64; 3]> = samples
        .iter()
        .filter(|s| s.1.is_finite() && s.0 > 0)
        .map(|&(n, l)| [libm::log(n as f64), n as f64, l])
        .collect();
    if pts.len() < 3 {
        return f64::NAN;
    }
    // normal equations for [1, ln n, n]
    let mut a = [[0.0; 3]; 3];
    let mut rhs = [0.0; 3];
    for p in &pts {
        let row = [1.0, p[0], p[1]];
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] += row[i] * row[j];
            }
            rhs[i] += row[i] * p[2];
        }
    }
    match solve3(a, rhs) {
        Some(x) => libm::exp(x[2]),
        None => f64::NAN,
    }
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for c in 0..3 {
        let p = (c..3).max_by(|&i, &j| libm::fabs(a[i][c]).total_cmp(&libm::fabs(a[j][c])))?;
        if a[p][c] == 0.0 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..3 {
            let f = a[r][c] / a[c][c];
            for k in c..3 {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let s: f64 = (r + 1..3).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Evaluate a gap functional along `sequence` (default: consecutive degrees
/// `1..=N`).
///
/// The verdict is "diverges" when the functional keeps growing over the
/// trailing half of the sequence: its least-squares trend there is
/// increasing and its final value exceeds everything in the leading half.
pub fn gap_check(
    source: &MultipoleSource,
    geom: &FoldedGeometry,
    condition: GapCondition,
    sequence: Option<&[usize]>,
) -> Result<GapDiagnostics> {
    let n_max = source.n_max();
    let radius = condition.radius(geom);
    let ln_summands: Vec<f64> = (0..=n_max).map(|n| source.ln_gap_summand(radius, n)).collect();
    let sequence: Vec<usize> = match sequence {
        Some(s) => {
            if s.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::invalid("gap sequence must be strictly increasing"));
            }
            if let Some(&n) = s.iter().find(|&&n| n > n_max) {
                return Err(Error::invalid(alloc::format!(
                    "gap sequence entry {n} exceeds the source degree {n_max}"
                )));
            }
            s.to_vec()
        }
        None => (1..=n_max).collect(),
    };
    let ln_rho = libm::log(geom.rho());
    let w = condition.gap_weight();
    let ln_functional: Vec<f64> = sequence
        .windows(2)
        .map(|p| w * (p[1] - p[0]) as f64 * ln_rho + ln_summands[p[0]])
        .collect();
    let verdict = judge(&ln_functional);
    Ok(GapDiagnostics { condition, radius, ln_summands, sequence, ln_functional, verdict })
}

fn judge(ln_f: &[f64]) -> GapVerdict {
    if ln_f.len() < 6 || ln_f.iter().any(|v| !v.is_finite()) {
        return GapVerdict::DoesNotDiverge;
    }
    let half = ln_f.len() / 2;
    let (head, tail) = ln_f.split_at(half);
    let head_max = head.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let n = tail.len() as f64;
    let mx = (n - 1.0) / 2.0;
    let my = tail.iter().sum::<f64>() / n;
    let sxy: f64 = tail.iter().enumerate().map(|(i, y)| (i as f64 - mx) * (y - my)).sum();
    if sxy > 0.0 && tail[tail.len() - 1] > head_max {
        GapVerdict::Diverges
    } else {
        GapVerdict::DoesNotDiverge
    }
}
