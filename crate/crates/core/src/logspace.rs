//! Helpers for quantities kept as natural logarithms of magnitudes.
//!
//! Series such as `Σ n r^{2n} |f_n|²` over- and underflow double precision
//! long before they stop converging, so they are accumulated here as logs.

/// `ln(e^a + e^b)`, with `-inf` acting as the additive identity.
pub fn add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + libm::log1p(libm::exp(lo - hi))
}

/// `ln Σ e^{x_i}` for an iterator of logs.
pub fn sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    terms.into_iter().fold(f64::NEG_INFINITY, add)
}

/// `ln |x|`, `-inf` for zero.
pub fn ln_abs(x: f64) -> f64 {
    if x == 0.0 {
        f64::NEG_INFINITY
    } else {
        libm::log(libm::fabs(x))
    }
}

/// `e^x` that maps `-inf` to an exact zero.
pub fn exp(x: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        0.0
    } else {
        libm::exp(x)
    }
}
