use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::linalg::{Mat3, Vec3};

use super::{flat_index, table_len};

/// How many derivatives of the regular solid harmonics to tabulate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Derivatives {
    None,
    Gradient,
    Hessian,
}

type CVec = [Complex64; 3];
/// Symmetric complex 3×3 stored as `[xx, yy, zz, xy, xz, yz]`.
type CSym = [Complex64; 6];

const CZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Real orthonormal spherical harmonics at one unit direction, for every
/// degree `0..=max_degree`, with optional derivatives of the regular solid
/// harmonics `R_n^k(x) = |x|^n Y_n^k(x̂)` evaluated at that direction.
///
/// The table is built from the complex solid harmonics
/// `S_n^m(x) = |x|^n P̄_n^m(cos θ) e^{imφ}` (no Condon–Shortley phase), using
/// the normalized Legendre recurrences written as polynomial recurrences in
/// Cartesian coordinates:
///
/// ```text
/// S_0^0     = 1/√(4π)
/// S_m^m     = √((2m+1)/(2m)) (x + i y) S_{m-1}^{m-1}
/// S_{m+1}^m = √(2m+3) z S_m^m
/// S_n^m     = A_n^m (z S_{n-1}^m - B_n^m |x|² S_{n-2}^m)
/// ```
///
/// Because every step is a polynomial identity, derivatives follow by
/// differentiating the recurrences and there is no singularity at the poles.
/// Real harmonics are `Y_n^0 = S_n^0`, `Y_n^m = √2 Re S_n^m` and
/// `Y_n^{-m} = √2 Im S_n^m` for `m > 0`.
#[derive(Clone, Debug)]
pub struct HarmonicTable {
    max_degree: usize,
    dir: Vec3,
    values: Vec<f64>,
    gradients: Vec<Vec3>,
    hessians: Vec<Mat3>,
}

impl HarmonicTable {
    /// `dir` is normalized internally; it must be nonzero and finite.
    pub fn new(dir: Vec3, max_degree: usize, derivs: Derivatives) -> Self {
        let u = dir.unit().expect("harmonic table needs a nonzero direction");
        let tri = (max_degree + 1) * (max_degree + 2) / 2;
        let t = |n: usize, m: usize| n * (n + 1) / 2 + m;

        let want_grad = derivs >= Derivatives::Gradient;
        let want_hess = derivs >= Derivatives::Hessian;

        let mut s = vec![CZERO; tri];
        let mut g = vec![[CZERO; 3]; if want_grad { tri } else { 0 }];
        let mut h = vec![[CZERO; 6]; if want_hess { tri } else { 0 }];

        let (x, y, z) = (u.x, u.y, u.z);
        let r2 = u.norm_sq();
        let w = Complex64::new(x, y);
        let dw: CVec = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), CZERO];
        let ez: CVec = [CZERO, CZERO, Complex64::new(1.0, 0.0)];
        let uc: CVec = [x, y, z].map(|c| Complex64::new(c, 0.0));

        s[0] = Complex64::new(1.0 / libm::sqrt(4.0 * core::f64::consts::PI), 0.0);

        // sectoral seeds
        for m in 1..=max_degree {
            let c = libm::sqrt((2 * m + 1) as f64 / (2 * m) as f64);
            let (i, p) = (t(m, m), t(m - 1, m - 1));
            s[i] = w * s[p] * c;
            if want_grad {
                g[i] = vadd(vscale(dw, s[p]), vscale(g[p], w)).map(|e| e * c);
            }
            if want_hess {
                h[i] = sadd(sym_outer2(dw, g[p]), sscale(h[p], w)).map(|e| e * c);
            }
        }

        for m in 0..max_degree {
            // first step off the diagonal
            let n = m + 1;
            let c = libm::sqrt((2 * m + 3) as f64);
            let (i, p) = (t(n, m), t(m, m));
            s[i] = s[p] * z * c;
            if want_grad {
                g[i] = vadd(vscale(ez, s[p]), vscale_r(g[p], z)).map(|e| e * c);
            }
            if want_hess {
                h[i] = sadd(sym_outer2(ez, g[p]), sscale_r(h[p], z)).map(|e| e * c);
            }

            for n in (m + 2)..=max_degree {
                let (nf, mf) = (n as f64, m as f64);
                let a = libm::sqrt((4.0 * nf * nf - 1.0) / (nf * nf - mf * mf));
                let n1 = nf - 1.0;
                let b = libm::sqrt((n1 * n1 - mf * mf) / (4.0 * n1 * n1 - 1.0));
                let (i, p1, p2) = (t(n, m), t(n - 1, m), t(n - 2, m));
                s[i] = (s[p1] * z - s[p2] * (b * r2)) * a;
                if want_grad {
                    let first = vadd(vscale(ez, s[p1]), vscale_r(g[p1], z));
                    // ∇(|x|² S) = 2x S + |x|² ∇S
                    let second = vadd(vscale(uc, s[p2] * 2.0), vscale_r(g[p2], r2));
                    g[i] = vsub(first, vscale_r(second, b)).map(|e| e * a);
                }
                if want_hess {
                    let first = sadd(sym_outer2(ez, g[p1]), sscale_r(h[p1], z));
                    // H(|x|² S) = 2 I S + 2 (x ⊗ ∇S + ∇S ⊗ x) + |x|² H S
                    let mut second = sadd(
                        sscale(sym_outer2(uc, g[p2]), Complex64::new(2.0, 0.0)),
                        sscale_r(h[p2], r2),
                    );
                    for d in second.iter_mut().take(3) {
                        *d += s[p2] * 2.0;
                    }
                    h[i] = ssub(first, sscale_r(second, b)).map(|e| e * a);
                }
            }
        }

        let len = table_len(max_degree);
        let mut values = vec![0.0; len];
        let mut gradients = vec![Vec3::ZERO; if want_grad { len } else { 0 }];
        let mut hessians = vec![Mat3::ZERO; if want_hess { len } else { 0 }];
        let sqrt2 = core::f64::consts::SQRT_2;
        for n in 0..=max_degree {
            for m in 0..=n {
                let ti = t(n, m);
                let pos = flat_index(n, m as i64);
                let neg = flat_index(n, -(m as i64));
                if m == 0 {
                    values[pos] = s[ti].re;
                    if want_grad {
                        gradients[pos] = re_vec(g[ti], 1.0);
                    }
                    if want_hess {
                        hessians[pos] = re_sym(h[ti], 1.0);
                    }
                } else {
                    values[pos] = sqrt2 * s[ti].re;
                    values[neg] = sqrt2 * s[ti].im;
                    if want_grad {
                        gradients[pos] = re_vec(g[ti], sqrt2);
                        gradients[neg] = im_vec(g[ti], sqrt2);
                    }
                    if want_hess {
                        hessians[pos] = re_sym(h[ti], sqrt2);
                        hessians[neg] = im_sym(h[ti], sqrt2);
                    }
                }
            }
        }

        HarmonicTable { max_degree, dir: u, values, gradients, hessians }
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// The unit direction the table was evaluated at.
    pub fn direction(&self) -> Vec3 {
        self.dir
    }

    /// `Y_n^k(x̂)`. Panics if `(n, k)` is outside the table.
    pub fn value(&self, n: usize, k: i64) -> f64 {
        self.values[flat_index(n, k)]
    }

    /// All values in flat order `n² + n + k`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `∇R_n^k` at the unit direction; a polynomial of degree `n - 1`, so the
    /// gradient at `r x̂` is `r^{n-1}` times this.
    pub fn regular_gradient(&self, n: usize, k: i64) -> Vec3 {
        self.gradients[flat_index(n, k)]
    }

    pub fn regular_gradients(&self) -> &[Vec3] {
        &self.gradients
    }

    /// Hessian of `R_n^k` at the unit direction (scales as `r^{n-2}`).
    pub fn regular_hessian(&self, n: usize, k: i64) -> Mat3 {
        self.hessians[flat_index(n, k)]
    }

    /// Gradient of the irregular solid harmonic `|x|^{-n-1} Y_n^k(x̂)` at the
    /// unit direction, i.e. `∇R - (2n+1) Y x̂`; scales as `r^{-n-2}`.
    pub fn irregular_gradient(&self, n: usize, k: i64) -> Vec3 {
        let i = flat_index(n, k);
        self.gradients[i] - self.dir * ((2 * n + 1) as f64 * self.values[i])
    }

    /// Hessian of the irregular solid harmonic at the unit direction; scales
    /// as `r^{-n-3}`.
    pub fn irregular_hessian(&self, n: usize, k: i64) -> Mat3 {
        let i = flat_index(n, k);
        let (y, g, hr) = (self.values[i], self.gradients[i], self.hessians[i]);
        let u = self.dir;
        let m = (2 * n + 1) as f64;
        let cross = Mat3::outer(g, u) + Mat3::outer(u, g);
        hr - cross.scale(m)
            + (Mat3::outer(u, u).scale(m * (m + 2.0)) - Mat3::scaled_identity(m)).scale(y)
    }
}

fn vscale(v: CVec, s: Complex64) -> CVec {
    v.map(|e| e * s)
}

fn vscale_r(v: CVec, s: f64) -> CVec {
    v.map(|e| e * s)
}

fn vadd(a: CVec, b: CVec) -> CVec {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn vsub(a: CVec, b: CVec) -> CVec {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// `a ⊗ b + b ⊗ a` in packed symmetric storage.
fn sym_outer2(a: CVec, b: CVec) -> CSym {
    [
        a[0] * b[0] * 2.0,
        a[1] * b[1] * 2.0,
        a[2] * b[2] * 2.0,
        a[0] * b[1] + a[1] * b[0],
        a[0] * b[2] + a[2] * b[0],
        a[1] * b[2] + a[2] * b[1],
    ]
}

fn sscale(v: CSym, s: Complex64) -> CSym {
    v.map(|e| e * s)
}

fn sscale_r(v: CSym, s: f64) -> CSym {
    v.map(|e| e * s)
}

fn sadd(a: CSym, b: CSym) -> CSym {
    core::array::from_fn(|i| a[i] + b[i])
}

fn ssub(a: CSym, b: CSym) -> CSym {
    core::array::from_fn(|i| a[i] - b[i])
}

fn re_vec(v: CVec, s: f64) -> Vec3 {
    Vec3::new(v[0].re * s, v[1].re * s, v[2].re * s)
}

fn im_vec(v: CVec, s: f64) -> Vec3 {
    Vec3::new(v[0].im * s, v[1].im * s, v[2].im * s)
}

fn unpack(h: [f64; 6]) -> Mat3 {
    Mat3([[h[0], h[3], h[4]], [h[3], h[1], h[5]], [h[4], h[5], h[2]]])
}

fn re_sym(h: CSym, s: f64) -> Mat3 {
    unpack(h.map(|e| e.re * s))
}

fn im_sym(h: CSym, s: f64) -> Mat3 {
    unpack(h.map(|e| e.im * s))
}
