//! Euler–Maruyama integration of the interacting particle system, of the
//! linearized SDE, and of synchronously coupled pairs.
//!
//! Particle `i` of realization `r` always draws its Brownian increments from
//! stream `(r, i)` of [`NoiseStreams`]. The linearized process of realization
//! `r` uses stream `(r, 0)`, so it shares its noise with the tagged particle.

use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent once std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::grid::{wrap_unit, DensityGrid, Domain};
use crate::potentials::{conv_grad_empirical, MeanField, ModelSpec};
use crate::rng::{NoiseStream, NoiseStreams, MAX_REALIZATIONS};

/// `|x|` beyond which a line trajectory is declared blown up.
pub const BLOW_UP_THRESHOLD: f64 = 1e8;

/// Index of the particle whose path is recorded.
pub const TAGGED: usize = 0;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub t_final: f64,
    pub n_particles: usize,
    pub n_realizations: usize,
    pub seed: u64,
    pub record_stride: usize,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::config(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(Error::config(format!(
                "t_final must be positive, got {}",
                self.t_final
            )));
        }
        if self.dt > self.t_final {
            return Err(Error::config("dt exceeds t_final"));
        }
        if self.n_particles == 0 || self.n_particles as u64 >= 1 << 32 {
            return Err(Error::config("n_particles must be in [1, 2^32)"));
        }
        if self.n_realizations == 0 || self.n_realizations as u64 > MAX_REALIZATIONS {
            return Err(Error::config("n_realizations must be in [1, 2^32]"));
        }
        if self.record_stride == 0 {
            return Err(Error::config("record_stride must be at least 1"));
        }
        Ok(())
    }

    /// Number of Euler steps covering `[0, t_final]`.
    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt - 1e-9).ceil() as usize
    }
}

/// Law of the initial positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialLaw {
    Point(f64),
    Gaussian {
        mean: f64,
        var: f64,
    },
    /// Uniform on the unit cell (torus only).
    Uniform,
}

impl InitialLaw {
    fn validate(&self, domain: Domain) -> Result<()> {
        match *self {
            InitialLaw::Point(x) if !x.is_finite() => {
                Err(Error::config("initial point not finite"))
            }
            InitialLaw::Gaussian { mean, var } if !(mean.is_finite() && var > 0.0) => Err(
                Error::config("Gaussian initial law needs finite mean and positive variance"),
            ),
            InitialLaw::Uniform if domain == Domain::Line => Err(Error::config(
                "uniform initial law is only defined on the torus",
            )),
            _ => Ok(()),
        }
    }

    fn sample(&self, stream: &mut NoiseStream) -> f64 {
        match *self {
            InitialLaw::Point(x) => x,
            InitialLaw::Gaussian { mean, var } => mean + var.sqrt() * stream.normal(),
            InitialLaw::Uniform => stream.uniform(),
        }
    }
}

/// Positions of the `N` particles of one realization at one time. On the
/// torus the stored positions are unwrapped; [`ParticleEnsemble::wrapped`]
/// reduces them to the unit cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleEnsemble {
    domain: Domain,
    positions: Vec<f64>,
    time: f64,
    realization: u64,
}

impl ParticleEnsemble {
    pub fn new(domain: Domain, positions: Vec<f64>, time: f64, realization: u64) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::domain("ensemble needs at least one particle"));
        }
        if let Some(i) = positions.iter().position(|x| !x.is_finite()) {
            return Err(Error::domain(format!(
                "particle {i} has a non-finite position"
            )));
        }
        if !(time >= 0.0) {
            return Err(Error::domain("ensemble time must be nonnegative"));
        }
        Ok(ParticleEnsemble {
            domain,
            positions,
            time,
            realization,
        })
    }

    /// Draws `n` initial positions from `law` using the initial-position
    /// streams of `realization`.
    pub fn sample(
        domain: Domain,
        law: &InitialLaw,
        n: usize,
        streams: &NoiseStreams,
        realization: u64,
    ) -> Result<Self> {
        law.validate(domain)?;
        let positions = (0..n)
            .map(|i| law.sample(&mut streams.initial(realization, i as u64)))
            .collect();
        Self::new(domain, positions, 0.0, realization)
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// Unwrapped positions.
    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn wrapped(&self) -> Vec<f64> {
        match self.domain {
            Domain::Line => self.positions.clone(),
            Domain::Torus => self.positions.iter().map(|&x| wrap_unit(x)).collect(),
        }
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Realization index, which selects the noise streams.
    pub fn realization(&self) -> u64 {
        self.realization
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.positions.iter().sum::<f64>() / self.positions.len() as f64
    }
}

/// A recorded scalar path. `increments[k]` is the Brownian increment
/// accumulated between `times[k]` and `times[k + 1]`; it is empty for paths
/// that were not produced by the simulator.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub states: Vec<f64>,
    pub increments: Vec<f64>,
}

impl TrajectoryRecord {
    /// An observed path without noise information.
    pub fn from_path(times: Vec<f64>, states: Vec<f64>) -> Result<Self> {
        let r = TrajectoryRecord {
            times,
            states,
            increments: Vec::new(),
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if self.times.len() != self.states.len() {
            return Err(Error::domain("times and states differ in length"));
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("record times must be strictly increasing"));
        }
        if !self.increments.is_empty() && self.increments.len() + 1 != self.times.len() {
            return Err(Error::domain(
                "increments must have one entry per recorded interval",
            ));
        }
        if self.states.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("record contains non-finite states"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t_final(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    pub fn last_state(&self) -> Option<f64> {
        self.states.last().copied()
    }
}

/// How the pairwise interaction drift of the particle system is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairwiseDrift {
    /// Factor the empirical convolution through moments when the kernel
    /// allows it (`O(N)` per step), otherwise the direct sum.
    #[default]
    Moments,
    /// Direct `O(N²)` double loop.
    Direct,
}

/// Drift `−∇V − ∇W ∗ f_inf` of the linearized SDE.
#[derive(Debug, Clone)]
pub struct LinearizedDrift {
    spec: ModelSpec,
    field: MeanField,
}

impl LinearizedDrift {
    pub fn new(spec: &ModelSpec, f_inf: &DensityGrid) -> Result<Self> {
        Ok(LinearizedDrift {
            spec: spec.clone(),
            field: MeanField::from_density(spec, f_inf)?,
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    #[inline]
    pub fn drift(&self, x: f64) -> f64 {
        -self.spec.grad_v(x) - self.field.grad(x)
    }

    /// `∇W ∗ f_inf` at `x`.
    pub fn mean_field_force(&self, x: f64) -> f64 {
        self.field.grad(x)
    }
}

/// Explicit Euler–Maruyama stepping for one model.
#[derive(Debug, Clone)]
pub struct EulerMaruyama<'a> {
    spec: &'a ModelSpec,
    noise_scale: f64,
    pairwise: PairwiseDrift,
}

impl<'a> EulerMaruyama<'a> {
    pub fn new(spec: &'a ModelSpec) -> Self {
        EulerMaruyama {
            spec,
            noise_scale: 1.0,
            pairwise: PairwiseDrift::Moments,
        }
    }

    /// Multiplies the diffusion coefficient `√(2/β)`; `0` gives the
    /// deterministic gradient flow.
    pub fn with_noise_scale(mut self, scale: f64) -> Self {
        self.noise_scale = scale;
        self
    }

    pub fn with_pairwise(mut self, pairwise: PairwiseDrift) -> Self {
        self.pairwise = pairwise;
        self
    }

    #[inline]
    fn sigma(&self) -> f64 {
        self.noise_scale * (2.0 / self.spec.beta()).sqrt()
    }

    /// Advances every particle by one step, particle `i` drawing from
    /// `noise[i]`. Returns the Brownian increment used by the tagged particle.
    pub fn step_particle_system(
        &self,
        ens: &mut ParticleEnsemble,
        dt: f64,
        noise: &mut [NoiseStream],
    ) -> Result<f64> {
        if !(dt > 0.0) {
            return Err(Error::config("dt must be positive"));
        }
        if noise.len() != ens.len() {
            return Err(Error::config("one noise stream per particle is required"));
        }
        let sigma = self.sigma();
        let sqrt_dt = dt.sqrt();
        let t_new = ens.time + dt;
        let forces: Vec<f64> = match self.pairwise {
            PairwiseDrift::Moments => {
                let field = MeanField::from_empirical(self.spec, &ens.positions)?;
                ens.positions.iter().map(|&x| field.grad(x)).collect()
            }
            PairwiseDrift::Direct => ens
                .positions
                .iter()
                .map(|&x| conv_grad_empirical(self.spec, &ens.positions, x))
                .collect::<Result<_>>()?,
        };
        let mut tagged_dw = 0.0;
        for (i, ((x, f), stream)) in ens
            .positions
            .iter_mut()
            .zip(&forces)
            .zip(noise.iter_mut())
            .enumerate()
        {
            let dw = sqrt_dt * stream.normal();
            if i == TAGGED {
                tagged_dw = dw;
            }
            *x += (-self.spec.grad_v(*x) - f) * dt + sigma * dw;
            check_position(self.spec.domain(), i, t_new, *x)?;
        }
        ens.time = t_new;
        Ok(tagged_dw)
    }

    /// One step of the linearized SDE. Returns the new state and the
    /// Brownian increment.
    pub fn step_linearized(
        &self,
        drift: &LinearizedDrift,
        y: f64,
        t: f64,
        dt: f64,
        stream: &mut NoiseStream,
    ) -> Result<(f64, f64)> {
        let dw = dt.sqrt() * stream.normal();
        let y_new = y + drift.drift(y) * dt + self.sigma() * dw;
        check_position(self.spec.domain(), TAGGED, t + dt, y_new)?;
        Ok((y_new, dw))
    }
}

fn check_position(domain: Domain, particle: usize, time: f64, x: f64) -> Result<()> {
    let bad = match domain {
        Domain::Line => !(x.abs() <= BLOW_UP_THRESHOLD),
        Domain::Torus => !x.is_finite(),
    };
    if bad {
        Err(Error::BlowUp {
            particle,
            time,
            value: x.abs(),
        })
    } else {
        Ok(())
    }
}

/// One Euler–Maruyama step of the particle system, leaving the input intact.
pub fn step_particle_system(
    spec: &ModelSpec,
    ens: &ParticleEnsemble,
    dt: f64,
    noise: &mut [NoiseStream],
) -> Result<ParticleEnsemble> {
    let mut next = ens.clone();
    EulerMaruyama::new(spec).step_particle_system(&mut next, dt, noise)?;
    Ok(next)
}

/// One Euler–Maruyama step of the linearized SDE. Builds the drift from
/// `f_inf` on every call; use [`LinearizedDrift`] for repeated steps.
pub fn step_linearized(
    spec: &ModelSpec,
    f_inf: &DensityGrid,
    y: f64,
    dt: f64,
    stream: &mut NoiseStream,
) -> Result<f64> {
    let drift = LinearizedDrift::new(spec, f_inf)?;
    Ok(EulerMaruyama::new(spec)
        .step_linearized(&drift, y, 0.0, dt, stream)?
        .0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    ParticleSystem,
    Linearized,
}

/// Everything recorded for one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizationOutput {
    pub realization: u64,
    /// Path of the tagged particle (or of the linearized process).
    pub tagged: TrajectoryRecord,
    /// Ensemble mean at each recorded time.
    pub mean_series: Vec<f64>,
    /// Full ensembles at the recorded times, if requested.
    pub snapshots: Vec<ParticleEnsemble>,
    pub terminal: ParticleEnsemble,
}

/// What to drive: the interacting system, or independent copies of the
/// linearized SDE.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)] // built once per run
pub enum Dynamics {
    ParticleSystem,
    Linearized(LinearizedDrift),
}

impl Dynamics {
    pub fn new(spec: &ModelSpec, mode: Mode, f_inf: Option<&DensityGrid>) -> Result<Self> {
        match (mode, f_inf) {
            (Mode::ParticleSystem, _) => Ok(Dynamics::ParticleSystem),
            (Mode::Linearized, Some(f)) => Ok(Dynamics::Linearized(LinearizedDrift::new(spec, f)?)),
            (Mode::Linearized, None) => Err(Error::config(
                "linearized mode requires an equilibrium density",
            )),
        }
    }
}

/// Simulates realization `realization` of `config`.
pub fn run_realization(
    spec: &ModelSpec,
    config: &SimConfig,
    dynamics: &Dynamics,
    initial: &InitialLaw,
    realization: u64,
    record_snapshots: bool,
) -> Result<RealizationOutput> {
    config.validate()?;
    let streams = NoiseStreams::new(config.seed);
    let n = config.n_particles;
    let mut ens = ParticleEnsemble::sample(spec.domain(), initial, n, &streams, realization)?;
    let mut noise: Vec<NoiseStream> = (0..n)
        .map(|i| streams.particle(realization, i as u64))
        .collect();
    let em = EulerMaruyama::new(spec);
    let n_steps = config.n_steps();
    let n_records = n_steps / config.record_stride + 1;

    let mut tagged = TrajectoryRecord {
        times: Vec::with_capacity(n_records),
        states: Vec::with_capacity(n_records),
        increments: Vec::with_capacity(n_records),
    };
    let mut mean_series = Vec::with_capacity(n_records);
    let mut snapshots = Vec::new();
    let mut record = |ens: &ParticleEnsemble, k: usize, tagged: &mut TrajectoryRecord| {
        tagged.times.push(k as f64 * config.dt);
        tagged.states.push(ens.positions[TAGGED]);
        mean_series.push(ens.mean());
        if record_snapshots {
            snapshots.push(ens.clone());
        }
    };
    record(&ens, 0, &mut tagged);

    let mut acc_dw = 0.0;
    for k in 1..=n_steps {
        match dynamics {
            Dynamics::ParticleSystem => {
                acc_dw += em.step_particle_system(&mut ens, config.dt, &mut noise)?;
            }
            Dynamics::Linearized(drift) => {
                let t = ens.time;
                for (i, (x, stream)) in ens.positions.iter_mut().zip(noise.iter_mut()).enumerate() {
                    let (y, dw) = em
                        .step_linearized(drift, *x, t, config.dt, stream)
                        .map_err(|e| match e {
                            Error::BlowUp { time, value, .. } => Error::BlowUp {
                                particle: i,
                                time,
                                value,
                            },
                            other => other,
                        })?;
                    *x = y;
                    if i == TAGGED {
                        acc_dw += dw;
                    }
                }
                ens.time = t + config.dt;
            }
        }
        // keep the clock free of accumulated rounding
        ens.time = k as f64 * config.dt;
        if k % config.record_stride == 0 {
            tagged.increments.push(acc_dw);
            acc_dw = 0.0;
            record(&ens, k, &mut tagged);
        }
    }
    Ok(RealizationOutput {
        realization,
        tagged,
        mean_series,
        snapshots,
        terminal: ens,
    })
}

/// Runs every realization of `config` in order.
pub fn run_ensemble(
    spec: &ModelSpec,
    config: &SimConfig,
    mode: Mode,
    f_inf: Option<&DensityGrid>,
    initial: &InitialLaw,
    record_snapshots: bool,
) -> Result<Vec<RealizationOutput>> {
    config.validate()?;
    let dynamics = Dynamics::new(spec, mode, f_inf)?;
    (0..config.n_realizations as u64)
        .map(|r| run_realization(spec, config, &dynamics, initial, r, record_snapshots))
        .collect()
}

/// Tagged particle `X` of an `N`-particle system started at `δ_{x0}` and the
/// linearized process `Y` started at `y0`, driven by the same Brownian path.
pub fn simulate_coupled_pair(
    spec: &ModelSpec,
    drift: &LinearizedDrift,
    x0: f64,
    y0: f64,
    config: &SimConfig,
    realization: u64,
) -> Result<(TrajectoryRecord, TrajectoryRecord)> {
    config.validate()?;
    let streams = NoiseStreams::new(config.seed);
    let n = config.n_particles;
    let mut ens = ParticleEnsemble::new(spec.domain(), alloc::vec![x0; n], 0.0, realization)?;
    let mut noise: Vec<NoiseStream> = (0..n)
        .map(|i| streams.particle(realization, i as u64))
        .collect();
    let em = EulerMaruyama::new(spec);
    let sigma = em.sigma();
    let mut y = y0;
    let mut rx = TrajectoryRecord::default();
    let mut ry = TrajectoryRecord::default();
    rx.times.push(0.0);
    rx.states.push(x0);
    ry.times.push(0.0);
    ry.states.push(y0);
    let mut acc_dw = 0.0;
    for k in 1..=config.n_steps() {
        let y_drift = drift.drift(y);
        let dw = em.step_particle_system(&mut ens, config.dt, &mut noise)?;
        y += y_drift * config.dt + sigma * dw;
        check_position(spec.domain(), TAGGED, k as f64 * config.dt, y)?;
        acc_dw += dw;
        if k % config.record_stride == 0 {
            let t = k as f64 * config.dt;
            rx.times.push(t);
            rx.states.push(ens.positions[TAGGED]);
            rx.increments.push(acc_dw);
            ry.times.push(t);
            ry.states.push(y);
            ry.increments.push(acc_dw);
            acc_dw = 0.0;
        }
    }
    Ok((rx, ry))
}
