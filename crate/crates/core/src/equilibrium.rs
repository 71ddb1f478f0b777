//! Invariant densities: Kirkwood–Monroe fixed points, the torus free energy,
//! and the scalar self-consistency equation of the cosine model.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // inherent once std is linked
use num_traits::Float;

use crate::diagnostics::Warning;
use crate::error::{Error, Result};
use crate::grid::{DensityGrid, Domain, GridSpec};
use crate::potentials::{convolve_on_grid, MeanField, ModelSpec, PotentialKind};
use crate::special::bessel_ratio_i1_i0;

pub const DEFAULT_DAMPING: f64 = 0.5;

/// Result of [`solve_kirkwood_monroe`].
#[derive(Debug, Clone)]
pub struct KmSolution {
    pub density: DensityGrid,
    pub iterations: usize,
    /// `‖f − T(f)‖∞` at the returned density.
    pub residual: f64,
    pub warnings: Vec<Warning>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KmOptions {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for KmOptions {
    fn default() -> Self {
        KmOptions {
            damping: DEFAULT_DAMPING,
            tol: 1e-12,
            max_iter: 10_000,
        }
    }
}

/// `W ∗ f` at the nodes of the grid of `f`.
pub fn mean_field_potential(spec: &ModelSpec, f: &DensityGrid) -> Result<Vec<f64>> {
    match spec.interaction() {
        PotentialKind::Tabulated(_) => Ok(convolve_on_grid(spec.interaction(), f)),
        _ => {
            let field = MeanField::from_density(spec, f)?;
            let g = f.grid();
            Ok((0..g.len()).map(|i| field.potential(g.x(i))).collect())
        }
    }
}

fn check_grid_domain(spec: &ModelSpec, grid: &GridSpec) -> Result<()> {
    if spec.domain() != grid.domain() {
        return Err(Error::domain(format!(
            "model lives on the {} but the grid on the {}",
            spec.domain().name(),
            grid.domain().name()
        )));
    }
    Ok(())
}

/// `e^{−β(V + U)}/Z` on `grid`, for a precomputed mean-field potential `U`.
fn gibbs(spec: &ModelSpec, grid: &GridSpec, mean_field: Option<&[f64]>) -> Result<DensityGrid> {
    let beta = spec.beta();
    let energy: Vec<f64> = (0..grid.len())
        .map(|i| spec.v(grid.x(i)) + mean_field.map_or(0.0, |u| u[i]))
        .collect();
    let e_min = energy.iter().copied().fold(f64::INFINITY, f64::min);
    if !e_min.is_finite() {
        return Err(Error::domain("potential is not finite on the grid"));
    }
    let values = energy.iter().map(|e| (-beta * (e - e_min)).exp()).collect();
    DensityGrid::from_unnormalized(*grid, values)
}

/// One application of `f ↦ e^{−β(V + W∗f)}/Z`.
pub fn gibbs_from_profile(spec: &ModelSpec, f: &DensityGrid) -> Result<DensityGrid> {
    check_grid_domain(spec, f.grid())?;
    let u = mean_field_potential(spec, f)?;
    gibbs(spec, f.grid(), Some(&u))
}

/// Damped fixed-point iteration `f ← (1−d) f + d T(f)` started from the
/// Gibbs density of `V` alone.
pub fn solve_kirkwood_monroe(
    spec: &ModelSpec,
    grid: &GridSpec,
    opts: &KmOptions,
) -> Result<KmSolution> {
    check_grid_domain(spec, grid)?;
    if !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(Error::config("damping must lie in (0, 1]"));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::config("tolerance must be positive"));
    }
    let mut warnings = Vec::new();
    if spec.domain() == Domain::Torus {
        if let Some(w) = h_stability_warning(spec, grid.len()) {
            warnings.push(w);
        }
    }
    let monitor_energy = spec.domain() == Domain::Torus;
    let mut f = gibbs(spec, grid, None)?;
    let mut energy = if monitor_energy {
        free_energy(spec, &f)?
    } else {
        0.0
    };
    let mut residual = f64::INFINITY;
    for it in 0..=opts.max_iter {
        let t = gibbs_from_profile(spec, &f)?;
        residual = sup_diff(f.values(), t.values());
        if residual <= opts.tol {
            return Ok(KmSolution {
                density: f,
                iterations: it,
                residual,
                warnings,
            });
        }
        if it == opts.max_iter {
            break;
        }
        let d = opts.damping;
        let next: Vec<f64> = f
            .values()
            .iter()
            .zip(t.values())
            .map(|(a, b)| (1.0 - d) * a + d * b)
            .collect();
        f = DensityGrid::from_unnormalized(*grid, next)?;
        if monitor_energy {
            let e = free_energy(spec, &f)?;
            let increase = e - energy;
            if increase > 1e-12 * (1.0 + energy.abs()) {
                warnings.push(Warning::FreeEnergyIncrease {
                    iteration: it + 1,
                    increase,
                });
            }
            energy = e;
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        residual,
    })
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// `E(f) = ∫Vf + ½∬W(x−y)f(x)f(y) + β⁻¹∫f log f` on the torus, with
/// `0 log 0 = 0`.
pub fn free_energy(spec: &ModelSpec, f: &DensityGrid) -> Result<f64> {
    if spec.domain() != Domain::Torus || f.grid().domain() != Domain::Torus {
        return Err(Error::UnsupportedDomain("line"));
    }
    let g = f.grid();
    let h = g.h();
    let u = mean_field_potential(spec, f)?;
    let mut e = 0.0;
    for (i, &fi) in f.values().iter().enumerate() {
        let ent = if fi > 0.0 { fi * fi.ln() } else { 0.0 };
        e += (spec.v(g.x(i)) + 0.5 * u[i]) * fi + ent / spec.beta();
    }
    Ok(e * h)
}

/// Smallest real Fourier coefficient `∫W(x) cos(2πkx) dx` over `0 ≤ k < n/2`,
/// by direct summation on `n` points.
pub fn min_fourier_mode(w: &PotentialKind, n: usize) -> f64 {
    let h = 1.0 / n as f64;
    let samples: Vec<f64> = (0..n).map(|j| w.value(j as f64 * h)).collect();
    (0..n / 2)
        .map(|k| {
            samples
                .iter()
                .enumerate()
                .map(|(j, &v)| v * (2.0 * PI * (k * j % n) as f64 * h).cos())
                .sum::<f64>()
                * h
        })
        .fold(f64::INFINITY, f64::min)
}

/// Warns when `W` is neither H-stable nor small (`‖W‖∞ < 1/β`).
pub fn h_stability_warning(spec: &ModelSpec, n: usize) -> Option<Warning> {
    let w = spec.interaction();
    let min_mode = min_fourier_mode(w, n);
    let w_sup = w.sup_norms_torus(n).value;
    let h_stable = min_mode >= -1e-12;
    if !h_stable && !(w_sup < 1.0 / spec.beta()) {
        Some(Warning::UniquenessNotGuaranteed {
            min_fourier_mode: min_mode,
            w_sup,
        })
    } else {
        None
    }
}

/// Discrete stationary residual `∂x((V' + W'∗f) f) + β⁻¹ ∂xx f` in the grid
/// L² norm, by centred differences. Line grids skip the two boundary cells.
pub fn stationary_residual(spec: &ModelSpec, f: &DensityGrid) -> Result<f64> {
    let g = *f.grid();
    let n = g.len();
    let h = g.h();
    let field = MeanField::from_density(spec, f)?;
    let fv = f.values();
    let flux: Vec<f64> = (0..n)
        .map(|i| (spec.grad_v(g.x(i)) + field.grad(g.x(i))) * fv[i])
        .collect();
    let beta_inv = 1.0 / spec.beta();
    let at = |i: usize, j: isize| -> usize { ((i as isize + j).rem_euclid(n as isize)) as usize };
    let range = match g.domain() {
        Domain::Torus => 0..n,
        Domain::Line => 1..n - 1,
    };
    let mut acc = 0.0;
    for i in range {
        let (l, r) = (at(i, -1), at(i, 1));
        let res =
            (flux[r] - flux[l]) / (2.0 * h) + beta_inv * (fv[r] - 2.0 * fv[i] + fv[l]) / (h * h);
        acc += res * res;
    }
    Ok((acc * h).sqrt())
}

/// Root of `A = β(ξ + I1(A)/I0(A))` for the cosine model
/// `V = −ξ cos 2πx`, `W = −cos 2πx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselSolution {
    pub a: f64,
    pub xi: f64,
    pub beta: f64,
    /// `A − β(ξ + I1(A)/I0(A))`.
    pub residual: f64,
}

impl BesselSolution {
    /// Effective diffusion `I0(A)^{-2}` of the associated homogenized process.
    pub fn effective_diffusion(&self) -> f64 {
        let i0 = crate::special::bessel_i0(self.a);
        1.0 / (i0 * i0)
    }

    /// The density `e^{A cos 2πx}/Z` tabulated on a torus grid.
    pub fn density(&self, grid: &GridSpec) -> Result<DensityGrid> {
        cosine_equilibrium(self.a, grid)
    }
}

fn bessel_map(a: f64, xi: f64, beta: f64) -> f64 {
    a - beta * (xi + bessel_ratio_i1_i0(a))
}

/// Solves for `A ≥ 0` by bisection on `[0, β(ξ+1)]`, where the map changes
/// sign whenever `ξ > 0`. `ξ = 0` returns the trivial root.
pub fn solve_bessel_selfconsistency(xi: f64, beta: f64, tol: f64) -> Result<BesselSolution> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::domain("beta must be positive"));
    }
    if !xi.is_finite() {
        return Err(Error::domain("xi must be finite"));
    }
    if xi == 0.0 {
        return Ok(BesselSolution {
            a: 0.0,
            xi,
            beta,
            residual: 0.0,
        });
    }
    let (mut lo, mut hi) = (0.0, beta * (xi + 1.0) + 1.0);
    let (f_lo, f_hi) = (bessel_map(lo, xi, beta), bessel_map(hi, xi, beta));
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Bracket { lo, hi, f_lo, f_hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if bessel_map(mid, xi, beta) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 0.25 * tol {
            break;
        }
    }
    let (r_lo, r_hi) = (bessel_map(lo, xi, beta), bessel_map(hi, xi, beta));
    let (a, residual) = if r_lo.abs() <= r_hi.abs() {
        (lo, r_lo)
    } else {
        (hi, r_hi)
    };
    Ok(BesselSolution {
        a,
        xi,
        beta,
        residual,
    })
}

/// `e^{A cos 2πx}/Z` on a torus grid.
pub fn cosine_equilibrium(a: f64, grid: &GridSpec) -> Result<DensityGrid> {
    if grid.domain() != Domain::Torus {
        return Err(Error::UnsupportedDomain("line"));
    }
    DensityGrid::from_fn(*grid, |x| (a * ((2.0 * PI * x).cos() - 1.0)).exp())
}

/// Closed-form invariant density when one is available: the Gibbs density
/// of `V` for `W = 0`, and the centred Gaussian with variance `1/(β(a+b))`
/// for `V = a x²/2`, `W = b x²/2` on the line.
pub fn closed_form_equilibrium(spec: &ModelSpec, grid: &GridSpec) -> Option<Result<DensityGrid>> {
    check_grid_domain(spec, grid).ok()?;
    match (spec.domain(), spec.confining(), spec.interaction()) {
        (_, _, w) if w.is_zero() => Some(gibbs(spec, grid, None)),
        (Domain::Line, PotentialKind::Quadratic(a), PotentialKind::Quadratic(b)) if a + b > 0.0 => {
            Some(DensityGrid::gaussian(
                *grid,
                0.0,
                1.0 / (spec.beta() * (a + b)),
            ))
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn torus_cosine(xi: f64, beta: f64) -> ModelSpec {
        ModelSpec::new(
            Domain::Torus,
            beta,
            PotentialKind::Cosine(xi),
            PotentialKind::Cosine(1.0),
        )
        .unwrap()
    }

    #[test]
    fn bessel_root_for_half() {
        let s = solve_bessel_selfconsistency(0.5, 1.0, 1e-15).unwrap();
        assert!(s.residual.abs() <= 1e-12);
        // independent high-precision root
        assert!((s.a - 0.915_737_400_733_483_6).abs() < 1e-12);
        assert!((s.effective_diffusion() - 0.670_882_450_211_174_3).abs() < 1e-12);
    }

    #[test]
    fn bessel_trivial_and_bad_brackets() {
        assert_eq!(
            solve_bessel_selfconsistency(0.0, 0.5, 1e-14).unwrap().a,
            0.0
        );
        assert!(matches!(
            solve_bessel_selfconsistency(-0.5, 1.0, 1e-14),
            Err(Error::Bracket { .. })
        ));
    }

    #[test]
    fn zero_interaction_converges_immediately() {
        let spec = ModelSpec::new(
            Domain::Torus,
            2.0,
            PotentialKind::Cosine(0.3),
            PotentialKind::Zero,
        )
        .unwrap();
        let grid = GridSpec::torus(128).unwrap();
        let sol = solve_kirkwood_monroe(&spec, &grid, &KmOptions::default()).unwrap();
        assert_eq!(sol.iterations, 0);
        let exact = closed_form_equilibrium(&spec, &grid).unwrap().unwrap();
        assert!(sup_diff(sol.density.values(), exact.values()) < 1e-14);
    }

    #[test]
    fn free_energy_trivial_cases() {
        let grid = GridSpec::torus(64).unwrap();
        let u = DensityGrid::uniform(grid);
        let free =
            ModelSpec::new(Domain::Torus, 1.0, PotentialKind::Zero, PotentialKind::Zero).unwrap();
        assert!(free_energy(&free, &u).unwrap().abs() < 1e-14);
        let cos = ModelSpec::new(
            Domain::Torus,
            1.0,
            PotentialKind::Cosine(0.5),
            PotentialKind::Zero,
        )
        .unwrap();
        assert!(free_energy(&cos, &u).unwrap().abs() < 1e-14);
        let line =
            ModelSpec::new(Domain::Line, 1.0, PotentialKind::Zero, PotentialKind::Zero).unwrap();
        let lg = DensityGrid::gaussian(GridSpec::line(5.0, 64).unwrap(), 0.0, 1.0).unwrap();
        assert!(matches!(
            free_energy(&line, &lg),
            Err(Error::UnsupportedDomain(_))
        ));
    }

    #[test]
    fn uniform_profile_gives_gibbs_of_v() {
        let spec = torus_cosine(0.5, 1.0);
        let grid = GridSpec::torus(64).unwrap();
        let out = gibbs_from_profile(&spec, &DensityGrid::uniform(grid)).unwrap();
        let expect = DensityGrid::from_fn(grid, |x| (0.5 * (2.0 * PI * x).cos()).exp()).unwrap();
        assert!(sup_diff(out.values(), expect.values()) < 1e-13);
    }

    #[test]
    fn fixed_point_is_idempotent() {
        let spec = torus_cosine(0.5, 1.0);
        let grid = GridSpec::torus(128).unwrap();
        let sol = solve_kirkwood_monroe(&spec, &grid, &KmOptions::default()).unwrap();
        let again = gibbs_from_profile(&spec, &sol.density).unwrap();
        assert!(sup_diff(again.values(), sol.density.values()) <= 1e-12);
    }

    #[test]
    fn cosine_interaction_triggers_uniqueness_warning_at_beta_one() {
        let spec = torus_cosine(0.5, 1.0);
        assert!(h_stability_warning(&spec, 256).is_some());
        let weak = torus_cosine(0.5, 0.5);
        assert!(h_stability_warning(&weak, 256).is_none());
    }
}
