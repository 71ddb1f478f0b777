//! Confining and interaction potentials, their derivatives, and mean-field
//! convolutions against grid densities and empirical measures.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // inherent once std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::grid::{DensityGrid, Domain, GridSpec};
use crate::spline::CubicSpline;

const TWO_PI: f64 = 2.0 * PI;

/// Tolerance on `∫f − 1` accepted by the convolution routines.
pub const CONV_MASS_TOL: f64 = 1e-6;

/// A potential tabulated on uniform knots and interpolated by a cubic spline.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    spline: CubicSpline,
}

impl Tabulated {
    /// Natural spline through `(lo + i h, values[i])`, extended linearly.
    pub fn line(lo: f64, h: f64, values: Vec<f64>) -> Result<Self> {
        Ok(Tabulated {
            spline: CubicSpline::natural(lo, h, values)?,
        })
    }

    /// Period-1 spline through `(i/n, values[i])`.
    pub fn periodic(values: Vec<f64>) -> Result<Self> {
        let h = 1.0 / values.len() as f64;
        Ok(Tabulated {
            spline: CubicSpline::periodic(0.0, h, values)?,
        })
    }

    /// Samples `f` at `n` knots spanning `[lo, hi]`.
    pub fn sample_line(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if n < 3 || !(hi > lo) {
            return Err(Error::domain("need hi > lo and at least 3 knots"));
        }
        let h = (hi - lo) / (n - 1) as f64;
        Self::line(lo, h, (0..n).map(|i| f(lo + i as f64 * h)).collect())
    }

    /// Samples a period-1 function at `n` knots `i/n`.
    pub fn sample_periodic(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::periodic((0..n).map(|i| f(i as f64 / n as f64)).collect())
    }

    pub fn is_periodic(&self) -> bool {
        self.spline.is_periodic()
    }

    pub fn period(&self) -> Option<f64> {
        self.spline.is_periodic().then(|| self.spline.period())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind {
    /// `a x²/2`
    Quadratic(f64),
    /// `a (x⁴/4 − x²/2)`
    Bistable(f64),
    /// `−a cos(2πx)`
    Cosine(f64),
    Zero,
    Tabulated(Tabulated),
}

impl PotentialKind {
    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        match self {
            PotentialKind::Quadratic(a) => 0.5 * a * x * x,
            PotentialKind::Bistable(a) => {
                let x2 = x * x;
                a * (0.25 * x2 * x2 - 0.5 * x2)
            }
            PotentialKind::Cosine(a) => -a * (TWO_PI * x).cos(),
            PotentialKind::Zero => 0.0,
            PotentialKind::Tabulated(t) => t.spline.value(x),
        }
    }

    #[inline]
    pub fn grad(&self, x: f64) -> f64 {
        match self {
            PotentialKind::Quadratic(a) => a * x,
            PotentialKind::Bistable(a) => a * (x * x * x - x),
            PotentialKind::Cosine(a) => TWO_PI * a * (TWO_PI * x).sin(),
            PotentialKind::Zero => 0.0,
            PotentialKind::Tabulated(t) => t.spline.deriv(x),
        }
    }

    #[inline]
    pub fn laplacian(&self, x: f64) -> f64 {
        match self {
            PotentialKind::Quadratic(a) => *a,
            PotentialKind::Bistable(a) => a * (3.0 * x * x - 1.0),
            PotentialKind::Cosine(a) => TWO_PI * TWO_PI * a * (TWO_PI * x).cos(),
            PotentialKind::Zero => 0.0,
            PotentialKind::Tabulated(t) => t.spline.deriv2(x),
        }
    }

    /// The scalar coefficient of a parametric kind.
    pub fn parameter(&self) -> Option<f64> {
        match self {
            PotentialKind::Quadratic(a) | PotentialKind::Bistable(a) | PotentialKind::Cosine(a) => {
                Some(*a)
            }
            PotentialKind::Zero | PotentialKind::Tabulated(_) => None,
        }
    }

    /// Same kind with the coefficient replaced by `theta`.
    pub fn with_parameter(&self, theta: f64) -> Result<Self> {
        match self {
            PotentialKind::Quadratic(_) => Ok(PotentialKind::Quadratic(theta)),
            PotentialKind::Bistable(_) => Ok(PotentialKind::Bistable(theta)),
            PotentialKind::Cosine(_) => Ok(PotentialKind::Cosine(theta)),
            PotentialKind::Zero | PotentialKind::Tabulated(_) => {
                Err(Error::config("potential has no scalar parameter"))
            }
        }
    }

    /// Uniform convexity constant when it is known in closed form.
    pub fn convexity_constant(&self) -> Option<f64> {
        match self {
            PotentialKind::Quadratic(a) => Some(*a),
            PotentialKind::Zero => Some(0.0),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            PotentialKind::Zero => true,
            PotentialKind::Quadratic(a) | PotentialKind::Bistable(a) | PotentialKind::Cosine(a) => {
                *a == 0.0
            }
            PotentialKind::Tabulated(_) => false,
        }
    }

    fn is_unit_periodic(&self) -> bool {
        match self {
            PotentialKind::Cosine(_) | PotentialKind::Zero => true,
            PotentialKind::Quadratic(a) | PotentialKind::Bistable(a) => *a == 0.0,
            PotentialKind::Tabulated(t) => t.period().is_some_and(|p| (p - 1.0).abs() < 1e-12),
        }
    }

    fn check_finite_parameter(&self) -> Result<()> {
        match self.parameter() {
            Some(a) if !a.is_finite() => Err(Error::config("potential coefficient is not finite")),
            _ => Ok(()),
        }
    }

    /// `(‖U‖∞, ‖∇U‖∞, ‖ΔU‖∞)` sampled on `n` points of the unit cell.
    pub fn sup_norms_torus(&self, n: usize) -> SupNorms {
        let mut s = SupNorms::default();
        for i in 0..n {
            let x = i as f64 / n as f64;
            s.value = s.value.max(self.value(x).abs());
            s.grad = s.grad.max(self.grad(x).abs());
            s.laplacian = s.laplacian.max(self.laplacian(x).abs());
        }
        s
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SupNorms {
    pub value: f64,
    pub grad: f64,
    pub laplacian: f64,
}

/// Evaluates `∇U(x)` with the domain reduction and finiteness check.
pub fn grad_potential(kind: &PotentialKind, domain: Domain, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!("cannot evaluate a potential at {x}")));
    }
    Ok(kind.grad(domain.reduce(x)))
}

/// Potentials, inverse temperature and domain of one model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    domain: Domain,
    beta: f64,
    confining: PotentialKind,
    interaction: PotentialKind,
}

impl ModelSpec {
    pub fn new(
        domain: Domain,
        beta: f64,
        confining: PotentialKind,
        interaction: PotentialKind,
    ) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::config(format!("beta must be positive, got {beta}")));
        }
        confining.check_finite_parameter()?;
        interaction.check_finite_parameter()?;
        if domain == Domain::Torus {
            if !confining.is_unit_periodic() {
                return Err(Error::config(
                    "confining potential is not 1-periodic on the torus",
                ));
            }
            if !interaction.is_unit_periodic() {
                return Err(Error::config(
                    "interaction potential is not 1-periodic on the torus",
                ));
            }
        }
        check_even(&interaction, domain)?;
        Ok(ModelSpec {
            domain,
            beta,
            confining,
            interaction,
        })
    }

    #[inline]
    pub fn domain(&self) -> Domain {
        self.domain
    }

    #[inline]
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn confining(&self) -> &PotentialKind {
        &self.confining
    }

    pub fn interaction(&self) -> &PotentialKind {
        &self.interaction
    }

    pub fn with_confining(&self, v: PotentialKind) -> Result<Self> {
        Self::new(self.domain, self.beta, v, self.interaction.clone())
    }

    pub fn with_interaction(&self, w: PotentialKind) -> Result<Self> {
        Self::new(self.domain, self.beta, self.confining.clone(), w)
    }

    #[inline]
    pub fn grad_v(&self, x: f64) -> f64 {
        self.confining.grad(self.domain.reduce(x))
    }

    #[inline]
    pub fn grad_w(&self, z: f64) -> f64 {
        self.interaction.grad(self.domain.reduce(z))
    }

    #[inline]
    pub fn v(&self, x: f64) -> f64 {
        self.confining.value(self.domain.reduce(x))
    }

    #[inline]
    pub fn w(&self, z: f64) -> f64 {
        self.interaction.value(self.domain.reduce(z))
    }

    /// Default truncation `L = 6/√(β α_min)` for line grids, with `α_min`
    /// the smallest positive quadratic coefficient (1 when there is none).
    pub fn default_half_width(&self) -> f64 {
        let alpha = [&self.confining, &self.interaction]
            .iter()
            .filter_map(|k| match k {
                PotentialKind::Quadratic(a) if *a > 0.0 => Some(*a),
                _ => None,
            })
            .fold(f64::INFINITY, f64::min);
        let alpha = if alpha.is_finite() { alpha } else { 1.0 };
        6.0 / (self.beta * alpha).sqrt()
    }

    /// Default equilibrium grid: 512 points on the torus, 2048 on the line.
    pub fn default_grid(&self) -> GridSpec {
        match self.domain {
            Domain::Torus => GridSpec::torus(512).expect("valid size"),
            Domain::Line => GridSpec::line(self.default_half_width(), 2048).expect("valid size"),
        }
    }
}

fn check_even(w: &PotentialKind, domain: Domain) -> Result<()> {
    let reach = match domain {
        Domain::Torus => 1.0,
        Domain::Line => 4.0,
    };
    for k in 1..=64 {
        let x = reach * k as f64 / 64.0 - 0.003;
        let (a, b) = (w.value(domain.reduce(x)), w.value(domain.reduce(-x)));
        if (a - b).abs() > 1e-9 * (1.0 + a.abs()) {
            return Err(Error::config(format!(
                "interaction potential is not even: W({x}) = {a}, W(-{x}) = {b}"
            )));
        }
    }
    Ok(())
}

/// `(∇W ∗ f)(x)` by midpoint quadrature on the grid of `f`.
pub fn conv_grad_density(spec: &ModelSpec, f: &DensityGrid, x: f64) -> Result<f64> {
    check_density_for(spec, f)?;
    if !x.is_finite() {
        return Err(Error::domain("convolution evaluated at a non-finite point"));
    }
    let g = f.grid();
    let sum: f64 = f
        .values()
        .iter()
        .enumerate()
        .map(|(j, &fj)| spec.grad_w(x - g.x(j)) * fj)
        .sum();
    Ok(sum * g.h())
}

/// `(1/N) Σ ∇W(x − X_i)` evaluated directly.
pub fn conv_grad_empirical(spec: &ModelSpec, positions: &[f64], x: f64) -> Result<f64> {
    if positions.is_empty() {
        return Err(Error::domain("empty ensemble"));
    }
    let sum: f64 = positions.iter().map(|&y| spec.grad_w(x - y)).sum();
    Ok(sum / positions.len() as f64)
}

fn check_density_for(spec: &ModelSpec, f: &DensityGrid) -> Result<()> {
    if f.grid().domain() != spec.domain() {
        return Err(Error::domain("density and model live on different domains"));
    }
    f.check_normalized(CONV_MASS_TOL)
}

/// `U ∗ f` at every node of the grid of `f`, by direct quadrature.
pub fn convolve_on_grid(kind: &PotentialKind, f: &DensityGrid) -> Vec<f64> {
    let g = *f.grid();
    let n = g.len();
    let h = g.h();
    let vals = f.values();
    match g.domain() {
        Domain::Torus => {
            let table: Vec<f64> = (0..n).map(|k| kind.value(k as f64 * h)).collect();
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| table[(i + n - j) % n] * vals[j])
                        .sum::<f64>()
                        * h
                })
                .collect()
        }
        Domain::Line => {
            let table: Vec<f64> = (0..2 * n - 1)
                .map(|k| kind.value((k as f64 - (n - 1) as f64) * h))
                .collect();
            (0..n)
                .map(|i| (0..n).map(|j| table[i + n - 1 - j] * vals[j]).sum::<f64>() * h)
                .collect()
        }
    }
}

/// The mean-field potential `W ∗ ρ` and force `∇W ∗ ρ` for a fixed measure
/// `ρ`, ready for repeated evaluation.
///
/// For the polynomial and cosine kernels the convolution factors through a
/// few moments of `ρ`, so building costs `O(N)` and each evaluation `O(1)`.
/// Tabulated kernels fall back to the direct sum (empirical `ρ`) or to a
/// spline of the grid convolution (grid `ρ`).
#[derive(Debug, Clone)]
pub struct MeanField {
    repr: Repr,
}

#[derive(Debug, Clone)]
enum Repr {
    Zero,
    Quadratic { a: f64, m1: f64, m2: f64 },
    Bistable { a: f64, m: [f64; 5] },
    Cosine { a: f64, c: f64, s: f64 },
    Direct { spec: ModelSpec, points: Vec<f64> },
    Sampled { pot: CubicSpline, grad: CubicSpline },
}

impl MeanField {
    /// Mean field of the empirical measure `(1/N) Σ δ_{X_i}`.
    pub fn from_empirical(spec: &ModelSpec, positions: &[f64]) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::domain("empty ensemble"));
        }
        let w = 1.0 / positions.len() as f64;
        let repr = match moment_repr(spec.interaction(), positions.iter().map(|&x| (x, w))) {
            Some(r) => r,
            None => Repr::Direct {
                spec: spec.clone(),
                points: positions.to_vec(),
            },
        };
        Ok(MeanField { repr })
    }

    /// Mean field of a grid density; the quadrature matches
    /// [`conv_grad_density`].
    pub fn from_density(spec: &ModelSpec, f: &DensityGrid) -> Result<Self> {
        check_density_for(spec, f)?;
        let g = *f.grid();
        let h = g.h();
        let weighted = f.values().iter().enumerate().map(|(j, &v)| (g.x(j), v * h));
        let repr = match moment_repr(spec.interaction(), weighted) {
            Some(r) => r,
            None => {
                let pot = convolve_on_grid(spec.interaction(), f);
                let grad: Vec<f64> = (0..g.len())
                    .map(|i| conv_grad_density(spec, f, g.x(i)))
                    .collect::<Result<_>>()?;
                let lo = g.x(0);
                let (pot, grad) = match g.domain() {
                    Domain::Torus => (
                        CubicSpline::periodic(lo, h, pot)?,
                        CubicSpline::periodic(lo, h, grad)?,
                    ),
                    Domain::Line => (
                        CubicSpline::natural(lo, h, pot)?,
                        CubicSpline::natural(lo, h, grad)?,
                    ),
                };
                Repr::Sampled { pot, grad }
            }
        };
        Ok(MeanField { repr })
    }

    /// `(∇W ∗ ρ)(x)`.
    #[inline]
    pub fn grad(&self, x: f64) -> f64 {
        match &self.repr {
            Repr::Zero => 0.0,
            Repr::Quadratic { a, m1, .. } => a * (x - m1),
            Repr::Bistable { a, m } => {
                let x2 = x * x;
                let cube = x2 * x - 3.0 * x2 * m[1] + 3.0 * x * m[2] - m[3];
                a * (cube - (x - m[1]))
            }
            Repr::Cosine { a, c, s } => {
                let (sn, cs) = (TWO_PI * x).sin_cos();
                TWO_PI * a * (sn * c - cs * s)
            }
            Repr::Direct { spec, points } => {
                points.iter().map(|&y| spec.grad_w(x - y)).sum::<f64>() / points.len() as f64
            }
            Repr::Sampled { grad, .. } => grad.value(x),
        }
    }

    /// `(W ∗ ρ)(x)`.
    pub fn potential(&self, x: f64) -> f64 {
        match &self.repr {
            Repr::Zero => 0.0,
            Repr::Quadratic { a, m1, m2 } => 0.5 * a * (x * x - 2.0 * x * m1 + m2),
            Repr::Bistable { a, m } => {
                let x2 = x * x;
                let sq = x2 - 2.0 * x * m[1] + m[2];
                let quart = x2 * x2 - 4.0 * x2 * x * m[1] + 6.0 * x2 * m[2] - 4.0 * x * m[3] + m[4];
                a * (0.25 * quart - 0.5 * sq)
            }
            Repr::Cosine { a, c, s } => {
                let (sn, cs) = (TWO_PI * x).sin_cos();
                -a * (cs * c + sn * s)
            }
            Repr::Direct { spec, points } => {
                points.iter().map(|&y| spec.w(x - y)).sum::<f64>() / points.len() as f64
            }
            Repr::Sampled { pot, .. } => pot.value(x),
        }
    }
}

fn moment_repr(w: &PotentialKind, weighted: impl Iterator<Item = (f64, f64)>) -> Option<Repr> {
    match *w {
        PotentialKind::Zero => Some(Repr::Zero),
        PotentialKind::Quadratic(a) => {
            let (mut m1, mut m2) = (0.0, 0.0);
            for (x, p) in weighted {
                m1 += p * x;
                m2 += p * x * x;
            }
            Some(Repr::Quadratic { a, m1, m2 })
        }
        PotentialKind::Bistable(a) => {
            let mut m = [0.0; 5];
            for (x, p) in weighted {
                let mut xp = p;
                for mk in &mut m {
                    *mk += xp;
                    xp *= x;
                }
            }
            Some(Repr::Bistable { a, m })
        }
        PotentialKind::Cosine(a) => {
            let (mut c, mut s) = (0.0, 0.0);
            for (x, p) in weighted {
                let (sn, cs) = (TWO_PI * x).sin_cos();
                c += p * cs;
                s += p * sn;
            }
            Some(Repr::Cosine { a, c, s })
        }
        PotentialKind::Tabulated(_) => None,
    }
}
