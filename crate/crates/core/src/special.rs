//! Special functions: modified Bessel functions `I0`, `I1`, the principal
//! Lambert W branch and the standard normal CDF.

use core::f64::consts::PI;
#[allow(unused_imports)] // inherent once std is linked
use num_traits::Float;

/// Above this argument the asymptotic expansion is used.
const ASYMPTOTIC_THRESHOLD: f64 = 30.0;

/// Power series for `I_nu(x)`, `nu ∈ {0, 1}`, `x ≥ 0`. All terms are positive,
/// so relative accuracy stays near machine precision.
fn series(nu: u32, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = if nu == 0 { 1.0 } else { 0.5 * x };
    let mut sum = term;
    let mut k = 1.0;
    loop {
        term *= q / (k * (k + nu as f64));
        sum += term;
        if term <= sum * 1e-17 {
            return sum;
        }
        k += 1.0;
    }
}

/// `e^{-x} I_nu(x)` for large `x` from the Hankel asymptotic expansion.
fn asymptotic_scaled(nu: u32, x: f64) -> f64 {
    let mu = 4.0 * (nu as f64) * (nu as f64);
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        let odd = 2.0 * k - 1.0;
        let next = -term * (mu - odd * odd) / (k * 8.0 * x);
        if next.abs() >= term.abs() || next.abs() <= 1e-17 * sum.abs() {
            if next.abs() < term.abs() {
                sum += next;
            }
            break;
        }
        sum += next;
        term = next;
        k += 1.0;
    }
    sum / (2.0 * PI * x).sqrt()
}

/// Modified Bessel function of the first kind, order zero.
pub fn bessel_i0(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= ASYMPTOTIC_THRESHOLD {
        series(0, ax)
    } else {
        asymptotic_scaled(0, ax) * ax.exp()
    }
}

/// Modified Bessel function of the first kind, order one.
pub fn bessel_i1(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax <= ASYMPTOTIC_THRESHOLD {
        series(1, ax)
    } else {
        asymptotic_scaled(1, ax) * ax.exp()
    };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

/// `I1(x) / I0(x)`, finite for every finite `x`.
pub fn bessel_ratio_i1_i0(x: f64) -> f64 {
    let ax = x.abs();
    let r = if ax <= ASYMPTOTIC_THRESHOLD {
        series(1, ax) / series(0, ax)
    } else {
        asymptotic_scaled(1, ax) / asymptotic_scaled(0, ax)
    };
    if x < 0.0 {
        -r
    } else {
        r
    }
}

/// Principal branch `W0(x)` of the Lambert function for `x ≥ 0`, solving
/// `w e^w = x` by Newton iteration.
pub fn lambert_w0(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let mut w = if x < 1.0 {
        x
    } else {
        x.ln() - x.ln().ln().max(0.0)
    };
    if w <= 0.0 && x > 0.0 {
        w = 0.5;
    }
    for _ in 0..100 {
        let ew = w.exp();
        let f = w * ew - x;
        let step = f / (ew * (w + 1.0));
        w -= step;
        if step.abs() <= 1e-16 * w.abs().max(1e-300) {
            break;
        }
    }
    w
}

/// Standard normal cumulative distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / core::f64::consts::SQRT_2)
}
