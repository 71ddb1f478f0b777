//! Cubic splines on uniform knots, natural or periodic.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent once std is linked
use num_traits::Float;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct CubicSpline {
    lo: f64,
    h: f64,
    y: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
    periodic: bool,
}

impl CubicSpline {
    /// Natural spline through `(lo + i h, y_i)`; linear beyond the end knots.
    pub fn natural(lo: f64, h: f64, y: Vec<f64>) -> Result<Self> {
        check(lo, h, &y, 3)?;
        let n = y.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            let k = n - 2;
            let rhs: Vec<f64> = (1..n - 1)
                .map(|i| 6.0 * (y[i + 1] - 2.0 * y[i] + y[i - 1]) / (h * h))
                .collect();
            let inner = solve_tridiagonal(&vec![1.0; k], &vec![4.0; k], &vec![1.0; k], &rhs);
            m[1..n - 1].copy_from_slice(&inner);
        }
        Ok(CubicSpline {
            lo,
            h,
            y,
            m,
            periodic: false,
        })
    }

    /// Periodic spline with knots `lo + i h`, `i < n`, and period `n h`.
    pub fn periodic(lo: f64, h: f64, y: Vec<f64>) -> Result<Self> {
        check(lo, h, &y, 4)?;
        let n = y.len();
        let rhs: Vec<f64> = (0..n)
            .map(|i| {
                let prev = y[(i + n - 1) % n];
                let next = y[(i + 1) % n];
                6.0 * (next - 2.0 * y[i] + prev) / (h * h)
            })
            .collect();
        let m = solve_cyclic(1.0, 4.0, 1.0, &rhs);
        Ok(CubicSpline {
            lo,
            h,
            y,
            m,
            periodic: true,
        })
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn period(&self) -> f64 {
        self.h * self.y.len() as f64
    }

    /// Segment index and local coordinate `t ∈ [0, 1]`, or the side on which
    /// `x` leaves a natural spline's range.
    #[inline]
    fn locate(&self, x: f64) -> Locate {
        let n = self.y.len();
        let mut s = (x - self.lo) / self.h;
        if self.periodic {
            s -= (s / n as f64).floor() * n as f64;
            let i = (s.floor() as usize).min(n - 1);
            return Locate::Inside(i, (i + 1) % n, s - i as f64);
        }
        if s < 0.0 {
            Locate::Left(s * self.h)
        } else if s > (n - 1) as f64 {
            Locate::Right((s - (n - 1) as f64) * self.h)
        } else {
            let i = (s.floor() as usize).min(n - 2);
            Locate::Inside(i, i + 1, s - i as f64)
        }
    }

    #[inline]
    fn seg_value(&self, i: usize, j: usize, t: f64) -> f64 {
        let u = 1.0 - t;
        u * self.y[i]
            + t * self.y[j]
            + self.h * self.h / 6.0 * ((u * u * u - u) * self.m[i] + (t * t * t - t) * self.m[j])
    }

    #[inline]
    fn seg_deriv(&self, i: usize, j: usize, t: f64) -> f64 {
        let u = 1.0 - t;
        (self.y[j] - self.y[i]) / self.h
            + self.h / 6.0 * (-(3.0 * u * u - 1.0) * self.m[i] + (3.0 * t * t - 1.0) * self.m[j])
    }

    pub fn value(&self, x: f64) -> f64 {
        let n = self.y.len();
        match self.locate(x) {
            Locate::Inside(i, j, t) => self.seg_value(i, j, t),
            Locate::Left(d) => self.y[0] + d * self.seg_deriv(0, 1, 0.0),
            Locate::Right(d) => self.y[n - 1] + d * self.seg_deriv(n - 2, n - 1, 1.0),
        }
    }

    pub fn deriv(&self, x: f64) -> f64 {
        let n = self.y.len();
        match self.locate(x) {
            Locate::Inside(i, j, t) => self.seg_deriv(i, j, t),
            Locate::Left(_) => self.seg_deriv(0, 1, 0.0),
            Locate::Right(_) => self.seg_deriv(n - 2, n - 1, 1.0),
        }
    }

    pub fn deriv2(&self, x: f64) -> f64 {
        match self.locate(x) {
            Locate::Inside(i, j, t) => (1.0 - t) * self.m[i] + t * self.m[j],
            Locate::Left(_) | Locate::Right(_) => 0.0,
        }
    }
}

enum Locate {
    Inside(usize, usize, f64),
    Left(f64),
    Right(f64),
}

fn check(lo: f64, h: f64, y: &[f64], min_len: usize) -> Result<()> {
    if !(lo.is_finite() && h.is_finite() && h > 0.0) {
        return Err(Error::domain(
            "spline knots need a finite origin and positive spacing",
        ));
    }
    if y.len() < min_len {
        return Err(Error::domain(alloc::format!(
            "spline needs at least {min_len} knots"
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("spline values must be finite"));
    }
    Ok(())
}

/// Thomas algorithm for `a_i x_{i-1} + b_i x_i + c_i x_{i+1} = r_i`.
pub(crate) fn solve_tridiagonal(a: &[f64], b: &[f64], c: &[f64], r: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut cp = vec![0.0; n];
    let mut x = vec![0.0; n];
    cp[0] = c[0] / b[0];
    x[0] = r[0] / b[0];
    for i in 1..n {
        let denom = b[i] - a[i] * cp[i - 1];
        cp[i] = c[i] / denom;
        x[i] = (r[i] - a[i] * x[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        x[i] -= cp[i] * x[i + 1];
    }
    x
}

/// Constant-coefficient cyclic tridiagonal solve via Sherman–Morrison.
fn solve_cyclic(sub: f64, diag: f64, sup: f64, r: &[f64]) -> Vec<f64> {
    let n = r.len();
    let gamma = -diag;
    // corners: A[0][n-1] = sub, A[n-1][0] = sup
    let (alpha, beta) = (sup, sub);
    let mut b = vec![diag; n];
    b[0] = diag - gamma;
    b[n - 1] = diag - alpha * beta / gamma;
    let a = vec![sub; n];
    let c = vec![sup; n];
    let x = solve_tridiagonal(&a, &b, &c, r);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let z = solve_tridiagonal(&a, &b, &c, &u);
    let fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect()
}
