//! One-dimensional cell-centred grids and normalized densities on them.
//!
//! Torus grids cover `[0, 1)` with nodes `x_j = (j + 1/2)/n`. Line grids cover
//! the truncated interval `[-L, L]` with nodes `x_i = -L + (i + 1/2)h`,
//! `h = 2L/n`. Integrals are midpoint sums `Σ f_i h` in both cases, which is
//! the trapezoidal rule on the torus.

use alloc::vec::Vec;
#[allow(unused_imports)] // inherent once std is linked
use num_traits::Float;

use crate::error::{Error, Result};

/// Tolerance on `|∫f − 1|` for a stored density.
pub const NORMALIZATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// The real line, truncated to `[-L, L]` for numerics.
    Line,
    /// The unit-period circle `ℝ/ℤ`.
    Torus,
}

impl Domain {
    pub fn name(self) -> &'static str {
        match self {
            Domain::Line => "line",
            Domain::Torus => "torus",
        }
    }

    /// Reduces `x` to the fundamental cell on the torus; identity on the line.
    #[inline]
    pub fn reduce(self, x: f64) -> f64 {
        match self {
            Domain::Line => x,
            Domain::Torus => wrap_unit(x),
        }
    }
}

/// `x mod 1` in `[0, 1)`.
#[inline]
pub fn wrap_unit(x: f64) -> f64 {
    let r = x - x.floor();
    // x slightly below an integer can round up to exactly 1.0
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    domain: Domain,
    n: usize,
    lo: f64,
    h: f64,
}

impl GridSpec {
    pub fn torus(n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::domain("torus grid needs at least 4 points"));
        }
        Ok(GridSpec {
            domain: Domain::Torus,
            n,
            lo: 0.0,
            h: 1.0 / n as f64,
        })
    }

    pub fn line(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::domain("line half-width must be positive and finite"));
        }
        if n < 4 {
            return Err(Error::domain("line grid needs at least 4 points"));
        }
        Ok(GridSpec {
            domain: Domain::Line,
            n,
            lo: -half_width,
            h: 2.0 * half_width / n as f64,
        })
    }

    #[inline]
    pub fn domain(&self) -> Domain {
        self.domain
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Left edge of the covered interval (`0` on the torus, `-L` on the line).
    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.lo + self.n as f64 * self.h
    }

    /// Half-width `L` of a line grid; `1/2` on the torus.
    pub fn half_width(&self) -> f64 {
        0.5 * (self.hi() - self.lo)
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.h
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    pub fn same_as(&self, other: &GridSpec) -> bool {
        self.domain == other.domain
            && self.n == other.n
            && (self.lo - other.lo).abs() <= 1e-12 * (1.0 + self.lo.abs())
            && (self.h - other.h).abs() <= 1e-12 * self.h
    }

    /// Midpoint-rule integral of grid values.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().sum::<f64>() * self.h
    }
}

/// A probability density tabulated on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    grid: GridSpec,
    values: Vec<f64>,
}

impl DensityGrid {
    /// Wraps already-normalized values, checking nonnegativity and mass.
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        check_shape(&grid, &values)?;
        let mass = grid.integrate(&values);
        if (mass - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::invariant(alloc::format!(
                "density has mass {mass}, expected 1"
            )));
        }
        Ok(DensityGrid { grid, values })
    }

    /// Normalizes nonnegative values with positive mass.
    pub fn from_unnormalized(grid: GridSpec, mut values: Vec<f64>) -> Result<Self> {
        check_shape(&grid, &values)?;
        let mass = grid.integrate(&values);
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::invariant(
                "cannot normalize a density with zero or infinite mass",
            ));
        }
        for v in &mut values {
            *v /= mass;
        }
        Ok(DensityGrid { grid, values })
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(grid.x(i))).collect();
        Self::from_unnormalized(grid, values)
    }

    pub fn uniform(grid: GridSpec) -> Self {
        let v = 1.0 / (grid.len() as f64 * grid.h());
        DensityGrid {
            grid,
            values: alloc::vec![v; grid.len()],
        }
    }

    /// Gaussian `N(mean, var)` tabulated and renormalized on the grid. On the
    /// torus the Gaussian is wrapped.
    pub fn gaussian(grid: GridSpec, mean: f64, var: f64) -> Result<Self> {
        if !(var > 0.0) {
            return Err(Error::domain("Gaussian variance must be positive"));
        }
        match grid.domain() {
            Domain::Line => Self::from_fn(grid, |x| (-(x - mean).powi(2) / (2.0 * var)).exp()),
            Domain::Torus => {
                let reach = (8.0 * var.sqrt()).ceil() as i64 + 1;
                Self::from_fn(grid, |x| {
                    (-reach..=reach)
                        .map(|k| (-(x + k as f64 - mean).powi(2) / (2.0 * var)).exp())
                        .sum()
                })
            }
        }
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.grid.h()
    }

    pub fn mass(&self) -> f64 {
        self.grid.integrate(&self.values)
    }

    /// `∫ g(x) f(x) dx` by the grid quadrature.
    pub fn expectation(&self, g: impl Fn(f64) -> f64) -> f64 {
        let h = self.grid.h();
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| g(self.grid.x(i)) * v)
            .sum::<f64>()
            * h
    }

    pub fn mean(&self) -> f64 {
        self.expectation(|x| x)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.expectation(|x| (x - m) * (x - m))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Linear interpolation between nodes (periodic on the torus, zero
    /// outside the line interval).
    pub fn interpolate(&self, x: f64) -> f64 {
        let n = self.grid.len();
        let s = (self.grid.domain().reduce(x) - self.grid.lo()) / self.grid.h() - 0.5;
        match self.grid.domain() {
            Domain::Torus => {
                let i0 = s.floor();
                let t = s - i0;
                let i = (i0 as i64).rem_euclid(n as i64) as usize;
                let j = (i + 1) % n;
                (1.0 - t) * self.values[i] + t * self.values[j]
            }
            Domain::Line => {
                if s < -0.5 || s > n as f64 - 0.5 {
                    return 0.0;
                }
                let s = s.clamp(0.0, (n - 1) as f64);
                let i = (s.floor() as usize).min(n - 2);
                let t = s - i as f64;
                (1.0 - t) * self.values[i] + t * self.values[i + 1]
            }
        }
    }

    /// Cumulative distribution at the right edge of each cell.
    pub fn cdf(&self) -> Vec<f64> {
        let h = self.grid.h();
        let mut acc = 0.0;
        self.values
            .iter()
            .map(|&v| {
                acc += v * h;
                acc
            })
            .collect()
    }

    /// Fails unless `|∫f − 1| ≤ tol`.
    pub fn check_normalized(&self, tol: f64) -> Result<()> {
        let mass = self.mass();
        if (mass - 1.0).abs() > tol {
            return Err(Error::invariant(alloc::format!(
                "density has mass {mass}, expected 1"
            )));
        }
        Ok(())
    }

    pub(crate) fn from_parts_unchecked(grid: GridSpec, values: Vec<f64>) -> Self {
        DensityGrid { grid, values }
    }
}

fn check_shape(grid: &GridSpec, values: &[f64]) -> Result<()> {
    if values.len() != grid.len() {
        return Err(Error::domain(alloc::format!(
            "{} values for a grid of {} points",
            values.len(),
            grid.len()
        )));
    }
    if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::invariant(alloc::format!(
            "density value {v} is negative or not finite"
        )));
    }
    Ok(())
}

pub(crate) fn check_same_grid(a: &GridSpec, b: &GridSpec) -> Result<()> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(Error::domain("densities live on different grids"))
    }
}
