//! Explicit finite-volume solver for the nonlinear (McKean–Vlasov) and the
//! linearized Fokker–Planck equations in one dimension.
//!
//! The equation `∂t f = ∂x((∂xΨ) f + β⁻¹ ∂x f)` with `Ψ = V + W ∗ ρ` is
//! discretized with Scharfetter–Gummel fluxes
//!
//! `J_{i+½} = (β⁻¹/h) [B(δ) f_i − B(−δ) f_{i+1}]`, `δ = β(Ψ_{i+1} − Ψ_i)`,
//! `B(z) = z/(e^z − 1)`,
//!
//! which vanish exactly on the discrete Gibbs state `f ∝ e^{−βΨ}`. Here
//! `ρ = f` (nonlinear) or `ρ = f_inf` (linearized). Line grids have
//! zero-flux ends; torus grids are periodic.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent once std is linked
use num_traits::Float;

use crate::diagnostics::Warning;
use crate::equilibrium::mean_field_potential;
use crate::error::{Error, Result};
use crate::grid::{check_same_grid, DensityGrid, Domain, GridSpec};
use crate::metrics;
use crate::potentials::ModelSpec;

/// Safety factor applied to the explicit stability limits.
pub const CFL_SAFETY: f64 = 0.9;
/// Values in `[−CLIP_TOL, 0)` are clipped to zero; lower values are errors.
pub const CLIP_TOL: f64 = 1e-12;
/// Cumulative mass drift tolerated before failing.
pub const MASS_TOL: f64 = 1e-8;

#[inline]
fn bernoulli(z: f64) -> f64 {
    if z.abs() < 1e-10 {
        1.0 - 0.5 * z
    } else {
        z / z.exp_m1()
    }
}

#[derive(Debug, Clone)]
pub enum DriftMode {
    Nonlinear,
    /// Mean field frozen at the given equilibrium density.
    Linearized(DensityGrid),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdeState {
    pub density: DensityGrid,
    pub time: f64,
}

/// Stepper for one model, grid and drift mode.
#[derive(Debug, Clone)]
pub struct FpSolver {
    spec: ModelSpec,
    grid: GridSpec,
    v: Vec<f64>,
    /// `V + W ∗ f_inf` in linearized mode.
    frozen: Option<Vec<f64>>,
}

impl FpSolver {
    pub fn new(spec: &ModelSpec, grid: &GridSpec, mode: &DriftMode) -> Result<Self> {
        if spec.domain() != grid.domain() {
            return Err(Error::domain("model and grid live on different domains"));
        }
        let v: Vec<f64> = (0..grid.len()).map(|i| spec.v(grid.x(i))).collect();
        let frozen = match mode {
            DriftMode::Nonlinear => None,
            DriftMode::Linearized(f_inf) => {
                check_same_grid(grid, f_inf.grid())?;
                let u = mean_field_potential(spec, f_inf)?;
                Some(v.iter().zip(&u).map(|(a, b)| a + b).collect())
            }
        };
        Ok(FpSolver {
            spec: spec.clone(),
            grid: *grid,
            v,
            frozen,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    fn potential(&self, f: &DensityGrid) -> Result<Vec<f64>> {
        match &self.frozen {
            Some(p) => Ok(p.clone()),
            None => {
                let u = mean_field_potential(&self.spec, f)?;
                Ok(self.v.iter().zip(&u).map(|(a, b)| a + b).collect())
            }
        }
    }

    /// Interface drift numbers `δ_{i+½}`; the last entry is the periodic
    /// wrap-around on the torus and unused on the line.
    fn deltas(&self, psi: &[f64]) -> Vec<f64> {
        let n = psi.len();
        let beta = self.spec.beta();
        (0..n).map(|i| beta * (psi[(i + 1) % n] - psi[i])).collect()
    }

    fn limit_from_deltas(&self, deltas: &[f64]) -> f64 {
        let n = deltas.len();
        let h = self.grid.h();
        let beta = self.spec.beta();
        let periodic = self.grid.domain() == Domain::Torus;
        let mut worst: f64 = 2.0;
        for i in 0..n {
            let right = if periodic || i + 1 < n {
                bernoulli(deltas[i])
            } else {
                0.0
            };
            let left = if periodic {
                bernoulli(-deltas[(i + n - 1) % n])
            } else if i > 0 {
                bernoulli(-deltas[i - 1])
            } else {
                0.0
            };
            worst = worst.max(right + left);
        }
        CFL_SAFETY * h * h * beta / worst
    }

    /// Largest time step keeping the explicit update positive (and below the
    /// pure-diffusion limit `0.9 h² β / 2`) at the current state.
    pub fn stable_dt(&self, f: &DensityGrid) -> Result<f64> {
        let psi = self.potential(f)?;
        Ok(self.limit_from_deltas(&self.deltas(&psi)))
    }

    /// One explicit step. Returns the new state and the number of clipped
    /// values.
    pub fn step(&self, state: &PdeState, dt: f64) -> Result<(PdeState, usize)> {
        check_same_grid(&self.grid, state.density.grid())?;
        if !(dt > 0.0) {
            return Err(Error::config("dt must be positive"));
        }
        let f = state.density.values();
        let n = f.len();
        let h = self.grid.h();
        let psi = self.potential(&state.density)?;
        let deltas = self.deltas(&psi);
        let limit = self.limit_from_deltas(&deltas);
        if dt > limit {
            return Err(Error::Cfl { dt, limit });
        }
        let d = 1.0 / (self.spec.beta() * h);
        let periodic = self.grid.domain() == Domain::Torus;
        let flux: Vec<f64> = (0..n)
            .map(|i| {
                if !periodic && i + 1 == n {
                    return 0.0;
                }
                let j = (i + 1) % n;
                d * (bernoulli(deltas[i]) * f[i] - bernoulli(-deltas[i]) * f[j])
            })
            .collect();
        let ratio = dt / h;
        let mut next = vec![0.0; n];
        for i in 0..n {
            let left = if periodic {
                flux[(i + n - 1) % n]
            } else if i > 0 {
                flux[i - 1]
            } else {
                0.0
            };
            next[i] = f[i] - ratio * (flux[i] - left);
        }
        let time = state.time + dt;
        let mut clipped = 0;
        for v in &mut next {
            if *v < 0.0 {
                if *v < -CLIP_TOL {
                    return Err(Error::NegativeMass { min: *v, time });
                }
                *v = 0.0;
                clipped += 1;
            }
        }
        let mass = self.grid.integrate(&next);
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::invariant(alloc::format!(
                "PDE mass drifted to {mass}"
            )));
        }
        if clipped > 0 {
            for v in &mut next {
                *v /= mass;
            }
        }
        let density = DensityGrid::from_parts_unchecked(self.grid, next);
        Ok((PdeState { density, time }, clipped))
    }
}

/// One step of the Fokker–Planck equation in the given mode.
pub fn step_fp(spec: &ModelSpec, state: &PdeState, mode: &DriftMode, dt: f64) -> Result<PdeState> {
    let solver = FpSolver::new(spec, state.density.grid(), mode)?;
    Ok(solver.step(state, dt)?.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackOptions {
    pub t_final: f64,
    /// Time step; `None` picks half the smaller stability limit at `t = 0`.
    pub dt: Option<f64>,
    /// Record every this many steps (step 0 is always recorded).
    pub record_every: usize,
}

/// Observables along a synchronized nonlinear/linearized evolution.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PairTrack {
    pub times: Vec<f64>,
    /// `H(f_t | g_t)`.
    pub h_fg: Vec<f64>,
    /// `I(f_t | g_t)`.
    pub i_fg: Vec<f64>,
    /// `H(f_t | f_inf)`.
    pub h_finf: Vec<f64>,
    /// `‖f_t − f_inf‖_{L¹}`.
    pub l1: Vec<f64>,
    /// `‖f_t − f_inf‖_{L²}`.
    pub l2: Vec<f64>,
    /// `∬|∇W(x−z)|² (f_t(z) + f_inf(z)) f_t(x) dz dx`.
    pub moment: Vec<f64>,
    /// `max(sup f0, 1/inf f0, sup g0, 1/inf g0)`.
    pub kappa: f64,
    pub dt: f64,
    pub warnings: Vec<Warning>,
}

/// `∬|∇W(x−z)|² (f(z) + g(z)) f(x) dz dx` by direct quadrature.
pub fn interaction_moment(spec: &ModelSpec, f: &DensityGrid, g: &DensityGrid) -> Result<f64> {
    check_same_grid(f.grid(), g.grid())?;
    let grid = f.grid();
    let n = grid.len();
    let h = grid.h();
    let sq = |k: isize| {
        let d = spec.grad_w(k as f64 * h);
        d * d
    };
    let table: Vec<f64> = (-(n as isize) + 1..n as isize).map(sq).collect();
    let (fv, gv) = (f.values(), g.values());
    let mut acc = 0.0;
    for i in 0..n {
        if fv[i] == 0.0 {
            continue;
        }
        let mut inner = 0.0;
        for j in 0..n {
            let k = match grid.domain() {
                Domain::Line => i as isize - j as isize,
                Domain::Torus => (i as isize - j as isize).rem_euclid(n as isize),
            };
            inner += table[(k + n as isize - 1) as usize] * (fv[j] + gv[j]);
        }
        acc += inner * fv[i];
    }
    Ok(acc * h * h)
}

/// Sandwich constant of a strictly positive density.
pub fn sandwich_constant(f: &DensityGrid) -> f64 {
    f.max_value().max(1.0 / f.min_value())
}

/// Evolves `f` by the nonlinear and `g` by the linearized equation on a
/// shared time axis and records divergences.
pub fn evolve_pair_and_track(
    spec: &ModelSpec,
    f0: &DensityGrid,
    g0: &DensityGrid,
    f_inf: &DensityGrid,
    opts: &TrackOptions,
) -> Result<PairTrack> {
    check_same_grid(f0.grid(), g0.grid())?;
    check_same_grid(f0.grid(), f_inf.grid())?;
    if f0.min_value() <= 0.0 || g0.min_value() <= 0.0 {
        return Err(Error::domain(
            "initial densities must be strictly positive on the grid",
        ));
    }
    if !(opts.t_final > 0.0) || opts.record_every == 0 {
        return Err(Error::config(
            "t_final must be positive and record_every at least 1",
        ));
    }
    let grid = *f0.grid();
    let nonlinear = FpSolver::new(spec, &grid, &DriftMode::Nonlinear)?;
    let linearized = FpSolver::new(spec, &grid, &DriftMode::Linearized(f_inf.clone()))?;
    let dt = match opts.dt {
        Some(dt) => dt,
        None => 0.5 * nonlinear.stable_dt(f0)?.min(linearized.stable_dt(g0)?),
    };
    let n_steps = (opts.t_final / dt - 1e-9).ceil() as usize;
    let mut track = PairTrack {
        kappa: sandwich_constant(f0).max(sandwich_constant(g0)),
        dt,
        ..PairTrack::default()
    };
    let mut f = PdeState {
        density: f0.clone(),
        time: 0.0,
    };
    let mut g = PdeState {
        density: g0.clone(),
        time: 0.0,
    };
    let mut clipped = 0;
    record(spec, &mut track, &f, &g, f_inf)?;
    for k in 1..=n_steps {
        let (nf, cf) = nonlinear.step(&f, dt)?;
        let (ng, cg) = linearized.step(&g, dt)?;
        f = nf;
        g = ng;
        f.time = k as f64 * dt;
        g.time = f.time;
        clipped += cf + cg;
        if k % opts.record_every == 0 || k == n_steps {
            record(spec, &mut track, &f, &g, f_inf)?;
        }
    }
    if clipped > 0 {
        track.warnings.push(Warning::Clipped { count: clipped });
    }
    Ok(track)
}

fn record(
    spec: &ModelSpec,
    track: &mut PairTrack,
    f: &PdeState,
    g: &PdeState,
    f_inf: &DensityGrid,
) -> Result<()> {
    track.times.push(f.time);
    track
        .h_fg
        .push(metrics::relative_entropy(&f.density, &g.density)?);
    track
        .i_fg
        .push(metrics::relative_fisher(&f.density, &g.density)?);
    track
        .h_finf
        .push(metrics::relative_entropy(&f.density, f_inf)?);
    track.l1.push(metrics::l1_distance(&f.density, f_inf)?);
    track.l2.push(metrics::l2_distance(&f.density, f_inf)?);
    track
        .moment
        .push(interaction_moment(spec, &f.density, f_inf)?);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::PotentialKind;

    #[test]
    fn bernoulli_identity() {
        for z in [-3.0, -1e-12, 0.0, 1e-11, 0.5, 20.0] {
            // B(-z) = z + B(z)
            assert!((bernoulli(-z) - (z + bernoulli(z))).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_stays_uniform_for_free_diffusion() {
        let spec =
            ModelSpec::new(Domain::Torus, 1.0, PotentialKind::Zero, PotentialKind::Zero).unwrap();
        let grid = GridSpec::torus(32).unwrap();
        let solver = FpSolver::new(&spec, &grid, &DriftMode::Nonlinear).unwrap();
        let mut s = PdeState {
            density: DensityGrid::uniform(grid),
            time: 0.0,
        };
        let dt = solver.stable_dt(&s.density).unwrap();
        for _ in 0..100 {
            s = solver.step(&s, dt).unwrap().0;
        }
        assert!(s.density.values().iter().all(|v| (v - 1.0).abs() < 1e-13));
    }

    #[test]
    fn cfl_violation_is_reported() {
        let spec =
            ModelSpec::new(Domain::Torus, 1.0, PotentialKind::Zero, PotentialKind::Zero).unwrap();
        let grid = GridSpec::torus(32).unwrap();
        let s = PdeState {
            density: DensityGrid::uniform(grid),
            time: 0.0,
        };
        assert!(matches!(
            step_fp(&spec, &s, &DriftMode::Nonlinear, 1.0),
            Err(Error::Cfl { .. })
        ));
    }

    #[test]
    fn line_ends_conserve_mass() {
        let spec = ModelSpec::new(
            Domain::Line,
            1.0,
            PotentialKind::Quadratic(1.0),
            PotentialKind::Quadratic(0.5),
        )
        .unwrap();
        let grid = GridSpec::line(5.0, 200).unwrap();
        let solver = FpSolver::new(&spec, &grid, &DriftMode::Nonlinear).unwrap();
        let mut s = PdeState {
            density: DensityGrid::gaussian(grid, 1.0, 0.3).unwrap(),
            time: 0.0,
        };
        let dt = 0.5 * solver.stable_dt(&s.density).unwrap();
        for _ in 0..500 {
            let prev = s.density.mass();
            s = solver.step(&s, dt).unwrap().0;
            assert!((s.density.mass() - prev).abs() < 1e-12);
        }
    }
}
