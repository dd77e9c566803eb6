use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::FoldedGeometry;

use super::MaterialParams;

/// Transmission coefficients of one degree `n` for a unit incident mode
/// (`e_n = 1`), in scaled form.
///
/// With `p = ρ^{2n+1}` the physical coefficients are
///
/// ```text
/// a_n = p ã,   b_n = p b̃,   c_n = r_e^{2n+1} ĉ,   d_n = r_e^{2n+1} d̂
/// ```
///
/// so that the four interface conditions become a system whose entries are
/// all `O(1)` or `O(p)`:
///
/// ```text
/// ã - b̃ - ĉ                       = 0      (u continuous at r_0)
/// κ_c n ã - κ_s n b̃ + κ_s (n+1) ĉ = 0      (flux continuous at r_0)
/// p b̃ + ĉ - d̂                     = 1      (u continuous at r_e)
/// κ_s n p b̃ - κ_s (n+1) ĉ + κ_m (n+1) d̂ = κ_m n
/// ```
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeCoefficients {
    n: usize,
    ln_p: f64,
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
    denominator: Complex64,
}

fn ln_p(geom: &FoldedGeometry, n: usize) -> f64 {
    (2 * n + 1) as f64 * libm::log(geom.rho())
}

fn system(n: usize, p: f64, mat: &MaterialParams) -> ([[Complex64; 4]; 4], [Complex64; 4]) {
    let (km, ks, kc) = (mat.kappa_m(), mat.kappa_s(), mat.kappa_c());
    let nf = n as f64;
    let n1 = nf + 1.0;
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    (
        [
            [one, -one, -one, z],
            [kc * nf, -ks * nf, ks * n1, z],
            [z, one * p, one, -one],
            [z, ks * (nf * p), -ks * n1, km * n1],
        ],
        [z, z, one, km * nf],
    )
}

/// Closed-form solution of the scaled interface system.
pub fn mode_coefficients_closed(geom: &FoldedGeometry, mat: &MaterialParams, n: usize) -> Result<ModeCoefficients> {
    let lp = ln_p(geom, n);
    let p = libm::exp(lp);
    let (km, ks, kc) = (mat.kappa_m(), mat.kappa_s(), mat.kappa_c());
    let nf = n as f64;
    let n1 = nf + 1.0;
    let m = 2.0 * nf + 1.0;
    let outer = (ks * n1 + kc * nf) * (km * n1 + ks * nf);
    let first = (ks - kc) * (ks - km) * (nf * nf + nf);
    let den = first - outer * p;
    let scale = first.norm() + (outer * p).norm();
    if !(den.norm() > 1e-14 * scale) {
        return Err(Error::Resonance { n });
    }
    if n == 0 {
        let one = Complex64::new(1.0, 0.0);
        let z = Complex64::new(0.0, 0.0);
        return Ok(ModeCoefficients { n, ln_p: lp, a: one / p, b: one / p, c: z, d: z, denominator: den });
    }
    let a = -(km * ks) * (m * m) / den;
    let b = -km * m * (ks * n1 + kc * nf) / den;
    let c = -km * (nf * m) * (ks - kc) / den;
    let d = -((km - ks) * (ks * n1 + kc * nf) * p + (ks - kc) * (km * nf + ks * n1)) * nf / den;
    Ok(ModeCoefficients { n, ln_p: lp, a, b, c, d, denominator: den })
}

/// Brute-force solution of the scaled interface system: Gaussian elimination
/// with partial pivoting followed by iterative refinement, with the residual
/// and the iterate both carried in double-double arithmetic. Shares no
/// algebra with the closed form.
///
/// Refinement matters because `ĉ = ã - b̃` is a small difference of large
/// numbers when `ρ^{2n+1}` is small; plain elimination loses those digits.
pub fn mode_coefficients_oracle(geom: &FoldedGeometry, mat: &MaterialParams, n: usize) -> Result<ModeCoefficients> {
    let lp = ln_p(geom, n);
    let p = libm::exp(lp);
    let (m, rhs) = system(n, p, mat);
    let lu = Lu::factor(m).ok_or(Error::Resonance { n })?;
    // the iterate is kept as an unevaluated sum `hi + lo`: near-resonant
    // systems fix the small real parts through digits below the last bit of
    // the large imaginary parts
    let mut hi = lu.solve(rhs);
    let mut lo = [Complex64::new(0.0, 0.0); 4];
    for _ in 0..16 {
        let r = residual(&m, &rhs, &hi, &lo);
        if residual_size(&r) == 0.0 {
            break;
        }
        let dx = lu.solve(r);
        for i in 0..4 {
            let (re, re_lo) = two_sum(hi[i].re, lo[i].re + dx[i].re);
            let (im, im_lo) = two_sum(hi[i].im, lo[i].im + dx[i].im);
            hi[i] = Complex64::new(re, im);
            lo[i] = Complex64::new(re_lo, im_lo);
        }
    }
    let x: [Complex64; 4] = core::array::from_fn(|i| hi[i] + lo[i]);
    if x.iter().any(|z| !z.is_finite()) {
        return Err(Error::Resonance { n });
    }
    Ok(ModeCoefficients { n, ln_p: lp, a: x[0], b: x[1], c: x[2], d: x[3], denominator: lu.det() })
}

struct Lu {
    m: [[Complex64; 4]; 4],
    perm: [usize; 4],
}

impl Lu {
    fn factor(mut m: [[Complex64; 4]; 4]) -> Option<Lu> {
        let mut perm = [0, 1, 2, 3];
        for col in 0..4 {
            let piv = (col..4).max_by(|&i, &j| m[i][col].norm().total_cmp(&m[j][col].norm()))?;
            if m[piv][col].norm() == 0.0 {
                return None;
            }
            m.swap(col, piv);
            perm.swap(col, piv);
            for row in col + 1..4 {
                let f = m[row][col] / m[col][col];
                m[row][col] = f;
                for k in col + 1..4 {
                    let v = m[col][k];
                    m[row][k] -= f * v;
                }
            }
        }
        Some(Lu { m, perm })
    }

    fn solve(&self, rhs: [Complex64; 4]) -> [Complex64; 4] {
        let mut y: [Complex64; 4] = core::array::from_fn(|i| rhs[self.perm[i]]);
        for i in 0..4 {
            for k in 0..i {
                let v = self.m[i][k] * y[k];
                y[i] -= v;
            }
        }
        for i in (0..4).rev() {
            for k in i + 1..4 {
                let v = self.m[i][k] * y[k];
                y[i] -= v;
            }
            y[i] /= self.m[i][i];
        }
        y
    }

    fn det(&self) -> Complex64 {
        let mut d = self.m[0][0] * self.m[1][1] * self.m[2][2] * self.m[3][3];
        // parity of the row permutation
        let mut seen = self.perm;
        for i in 0..4 {
            while seen[i] != i {
                let j = seen[i];
                seen.swap(i, j);
                d = -d;
            }
        }
        d
    }
}

/// `rhs - m (hi + lo)`, each component accumulated exactly enough
/// (double-double) that cancellation between large terms does not pollute it.
fn residual(m: &[[Complex64; 4]; 4], rhs: &[Complex64; 4], hi: &[Complex64; 4], lo: &[Complex64; 4]) -> [Complex64; 4] {
    core::array::from_fn(|i| {
        let mut re = Dd::from(rhs[i].re);
        let mut im = Dd::from(rhs[i].im);
        for j in 0..4 {
            let a = m[i][j];
            for z in [hi[j], lo[j]] {
                re = re.sub_prod(a.re, z.re).add_prod(a.im, z.im);
                im = im.sub_prod(a.re, z.im).sub_prod(a.im, z.re);
            }
        }
        Complex64::new(re.value(), im.value())
    })
}

fn residual_size(r: &[Complex64; 4]) -> f64 {
    r.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Unevaluated sum `hi + lo` of two doubles.
#[derive(Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl From<f64> for Dd {
    fn from(v: f64) -> Self {
        Dd { hi: v, lo: 0.0 }
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

impl Dd {
    fn add_prod(self, a: f64, b: f64) -> Dd {
        let p = a * b;
        let e = libm::fma(a, b, -p);
        let (s, t) = two_sum(self.hi, p);
        let (hi, lo) = two_sum(s, t + self.lo + e);
        Dd { hi, lo }
    }

    fn sub_prod(self, a: f64, b: f64) -> Dd {
        self.add_prod(-a, b)
    }

    fn value(self) -> f64 {
        self.hi + self.lo
    }
}

impl ModeCoefficients {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `ln ρ^{2n+1}`.
    pub fn ln_p(&self) -> f64 {
        self.ln_p
    }

    pub fn p(&self) -> f64 {
        libm::exp(self.ln_p)
    }

    /// Scaled `ã = a_n / p`.
    pub fn a(&self) -> Complex64 {
        self.a
    }

    /// Scaled `b̃ = b_n / p`.
    pub fn b(&self) -> Complex64 {
        self.b
    }

    /// Scaled `ĉ = c_n / r_e^{2n+1}`.
    pub fn c(&self) -> Complex64 {
        self.c
    }

    /// Scaled `d̂ = d_n / r_e^{2n+1}`.
    pub fn d(&self) -> Complex64 {
        self.d
    }

    /// Closed-form denominator (oracle: product of pivots).
    pub fn denominator(&self) -> Complex64 {
        self.denominator
    }

    /// Physical `(a_n, b_n, c_n, d_n)`; overflows for large `n` when `r_e > 1`.
    pub fn unscaled(&self, geom: &FoldedGeometry) -> [Complex64; 4] {
        let p = self.p();
        let q = libm::pow(geom.r_e(), (2 * self.n + 1) as f64);
        [self.a * p, self.b * p, self.c * q, self.d * q]
    }

    /// `ln |b_n|` and `ln |c_n|`, safe for any degree.
    pub fn ln_abs_b_c(&self, geom: &FoldedGeometry) -> (f64, f64) {
        let lq = (2 * self.n + 1) as f64 * libm::log(geom.r_e());
        (libm::log(self.b.norm()) + self.ln_p, libm::log(self.c.norm()) + lq)
    }

    /// Relative residuals of the four interface conditions, each normalized
    /// by the sum of the magnitudes of its terms.
    pub fn interface_residuals(&self, mat: &MaterialParams) -> [f64; 4] {
        let (m, rhs) = system(self.n, self.p(), mat);
        let x = [self.a, self.b, self.c, self.d];
        core::array::from_fn(|i| {
            let mut r = -rhs[i];
            let mut size = rhs[i].norm();
            for j in 0..4 {
                r += m[i][j] * x[j];
                size += (m[i][j] * x[j]).norm();
            }
            if size == 0.0 {
                0.0
            } else {
                r.norm() / size
            }
        })
    }

    /// Largest componentwise relative difference of the scaled coefficients.
    pub fn max_rel_diff(&self, other: &ModeCoefficients) -> f64 {
        [(self.a, other.a), (self.b, other.b), (self.c, other.c), (self.d, other.d)]
            .iter()
            .map(|(x, y)| {
                let size = x.norm().max(y.norm());
                if size == 0.0 {
                    0.0
                } else {
                    (x - y).norm() / size
                }
            })
            .fold(0.0, f64::max)
    }
}
