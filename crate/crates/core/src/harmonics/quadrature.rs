use alloc::vec::Vec;

use core::f64::consts::PI;

use crate::linalg::Vec3;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
///
/// Newton iteration on the three-term Legendre recurrence from the usual
/// Chebyshev-like initial guesses.
pub fn gauss_legendre(npts: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = alloc::vec![0.0; npts];
    let mut weights = alloc::vec![0.0; npts];
    let n = npts as f64;
    for i in 0..npts.div_ceil(2) {
        let mut x = libm::cos(PI * (i as f64 + 0.75) / (n + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(npts, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if libm::fabs(dx) < 1e-16 {
                let (_, d) = legendre_with_derivative(npts, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[npts - 1 - i] = x;
        weights[i] = w;
        weights[npts - 1 - i] = w;
    }
    if npts % 2 == 1 {
        nodes[npts / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Product rule on the unit sphere: Gauss–Legendre in `cos θ` times the
/// uniform trapezoid rule in `φ`. Exact for spherical polynomials of total
/// degree `<= degree`.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    degree: usize,
    nodes: Vec<Vec3>,
    weights: Vec<f64>,
}

/// Smallest product rule exact through `max_degree`.
pub fn make_quadrature(max_degree: usize) -> QuadratureRule {
    let n_theta = max_degree / 2 + 1;
    let n_phi = max_degree + 1;
    let (t, w) = gauss_legendre(n_theta);
    let dphi = 2.0 * PI / n_phi as f64;
    let mut nodes = Vec::with_capacity(n_theta * n_phi);
    let mut weights = Vec::with_capacity(n_theta * n_phi);
    for (&ct, &wt) in t.iter().zip(&w) {
        let st = libm::sqrt((1.0 - ct * ct).max(0.0));
        for j in 0..n_phi {
            let phi = j as f64 * dphi;
            nodes.push(Vec3::new(st * libm::cos(phi), st * libm::sin(phi), ct));
            weights.push(wt * dphi);
        }
    }
    QuadratureRule { degree: max_degree, nodes, weights }
}

impl QuadratureRule {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Vec3] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (Vec3, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn integrate<F: FnMut(Vec3) -> f64>(&self, mut f: F) -> f64 {
        self.iter().map(|(u, w)| w * f(u)).sum()
    }
}

/// Composite Gauss–Legendre rule on a radial interval `[a, b]`.
#[derive(Clone, Debug)]
pub struct RadialRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl RadialRule {
    pub fn new(a: f64, b: f64, panels: usize, points: usize) -> Self {
        let (t, w) = gauss_legendre(points);
        let h = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * points);
        let mut weights = Vec::with_capacity(panels * points);
        for p in 0..panels {
            let lo = a + p as f64 * h;
            for (&ti, &wi) in t.iter().zip(&w) {
                nodes.push(lo + 0.5 * h * (ti + 1.0));
                weights.push(0.5 * h * wi);
            }
        }
        RadialRule { nodes, weights }
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }
}

/// `count` quasi-uniform points on the unit sphere (Fibonacci lattice).
pub fn fibonacci_sphere(count: usize) -> Vec<Vec3> {
    let golden = PI * (3.0 - libm::sqrt(5.0));
    (0..count)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
            let r = libm::sqrt((1.0 - z * z).max(0.0));
            let phi = golden * i as f64;
            Vec3::new(r * libm::cos(phi), r * libm::sin(phi), z)
        })
        .collect()
}
