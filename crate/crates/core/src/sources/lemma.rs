use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::harmonics::{fibonacci_sphere, make_quadrature, table_len, Derivatives, HarmonicTable};
use crate::linalg::{Mat3, Vec3};

/// Degree-`n` harmonic polynomial `h` with `â·∇h(ŷ) = 1` and
/// `max_{|x|=1} |h| ≤ √3/n`.
///
/// In a frame where `ŷ = e₁` it is `a₁h₁ + a₂h₂ + a₃h₃` with
///
/// ```text
/// h₁ = Re (x₁ + i x₂)ⁿ / n,   h₂ = Im (x₁ + i x₂)ⁿ / n,   h₃ = Im (x₁ + i x₃)ⁿ / n
/// ```
///
/// whose gradients at `e₁` are `e₁, e₂, e₃`, and `(a₁, a₂, a₃) = R â`.
#[derive(Clone, Debug, PartialEq)]
pub struct LemmaPolynomial {
    degree: usize,
    rotation: Mat3,
    weights: Vec3,
}

impl LemmaPolynomial {
    pub fn new(n: usize, y_hat: Vec3, a_hat: Vec3) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("lemma polynomial needs degree n >= 1"));
        }
        let y = unit(y_hat, "ŷ")?;
        let a = unit(a_hat, "â")?;
        let rotation = rotation_to_e1(y);
        Ok(LemmaPolynomial { degree: n, rotation, weights: rotation.mul_vec(a) })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Rotation `R` with `R ŷ = e₁`.
    pub fn rotation(&self) -> Mat3 {
        self.rotation
    }

    pub fn weights(&self) -> Vec3 {
        self.weights
    }

    fn parts(&self, x: Vec3) -> (Vec3, Complex64, Complex64, Complex64, Complex64) {
        let z = self.rotation.mul_vec(x);
        let n = self.degree as i32;
        let p = Complex64::new(z.x, z.y);
        let q = Complex64::new(z.x, z.z);
        (z, p.powi(n), q.powi(n), p.powi(n - 1), q.powi(n - 1))
    }

    pub fn eval(&self, x: Vec3) -> f64 {
        let (_, pn, qn, _, _) = self.parts(x);
        let w = self.weights;
        (w.x * pn.re + w.y * pn.im + w.z * qn.im) / self.degree as f64
    }

    pub fn gradient(&self, x: Vec3) -> Vec3 {
        let (_, _, _, p1, q1) = self.parts(x);
        let w = self.weights;
        // ∂/∂z₁ (z₁ + i z₂)ⁿ / n = (z₁ + i z₂)^{n-1}, ∂/∂z₂ gives i times that
        let g1 = Vec3::new(p1.re, -p1.im, 0.0);
        let g2 = Vec3::new(p1.im, p1.re, 0.0);
        let g3 = Vec3::new(q1.im, 0.0, q1.re);
        let gz = g1 * w.x + g2 * w.y + g3 * w.z;
        self.rotation.transpose().mul_vec(gz)
    }

    /// `â·∇h(ŷ)` for the stored frame; equals 1 up to round-off.
    pub fn directional_derivative(&self, y_hat: Vec3, a_hat: Vec3) -> f64 {
        a_hat.dot(self.gradient(y_hat))
    }

    /// `max |h|` over `samples` Fibonacci points of the unit sphere; a lower
    /// bound of the true maximum.
    pub fn sampled_sup(&self, samples: usize) -> f64 {
        fibonacci_sphere(samples)
            .into_iter()
            .map(|u| libm::fabs(self.eval(u)))
            .fold(0.0, f64::max)
    }

    /// Expansion of `h` in `Y_n^k`, orders `-n..=n`.
    pub fn harmonic_coefficients(&self) -> Vec<f64> {
        let n = self.degree;
        let rule = make_quadrature(2 * n);
        let mut out = alloc::vec![0.0; 2 * n + 1];
        let base = table_len(n) - (2 * n + 1);
        for (u, w) in rule.iter() {
            let h = self.eval(u) * w;
            let t = HarmonicTable::new(u, n, Derivatives::None);
            for (o, y) in out.iter_mut().zip(&t.values()[base..]) {
                *o += h * y;
            }
        }
        out
    }
}

fn unit(v: Vec3, name: &str) -> Result<Vec3> {
    if !v.is_finite() || libm::fabs(v.norm() - 1.0) > 1e-9 {
        return Err(Error::invalid(alloc::format!("{name} must be a unit vector")));
    }
    Ok(v * (1.0 / v.norm()))
}

/// Proper rotation taking `y` (unit) to `e₁` (Rodrigues form).
fn rotation_to_e1(y: Vec3) -> Mat3 {
    let e1 = Vec3::E1;
    let c = y.dot(e1);
    let v = y.cross(e1);
    if c < -1.0 + 1e-12 {
        // half-turn about e₃
        return Mat3([[-1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]]);
    }
    let k = Mat3([[0.0, -v.z, v.y], [v.z, 0.0, -v.x], [-v.y, v.x, 0.0]]);
    Mat3::IDENTITY + k + (k * k).scale(1.0 / (1.0 + c))
}
