//! Experiment configuration files.
//!
//! A config is a JSON document with a `schema_version`, an optional seed
//! and output directory, and an `experiment` object with a single key
//! naming the experiment, e.g. `{"mle_ou": {"theta0": 1.0}}`. Every
//! experiment field is optional; unset fields take the desk defaults, or
//! the published settings under `--paper-scale`.

use std::path::PathBuf;

use mflin_core::inference::{ModelTag, ThetaDomain};
use mflin_core::{Domain, ModelSpec, PotentialKind};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Desk,
    Paper,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    pub experiment: Experiment,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    MleOu(MleParams),
    MleBistable(MleParams),
    MleInteraction(MleParams),
    CltTorus(CltParams),
    EntropyDecayLine(LineDecayParams),
    EntropyDecayTorus(TorusDecayParams),
    BoundsReport(BoundsReportParams),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::MleOu(_) => "mle_ou",
            Experiment::MleBistable(_) => "mle_bistable",
            Experiment::MleInteraction(_) => "mle_interaction",
            Experiment::CltTorus(_) => "clt_torus",
            Experiment::EntropyDecayLine(_) => "entropy_decay_line",
            Experiment::EntropyDecayTorus(_) => "entropy_decay_torus",
            Experiment::BoundsReport(_) => "bounds_report",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfiningFamily {
    Quadratic,
    Bistable,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MleParams {
    pub beta: Option<f64>,
    pub theta0: Option<f64>,
    /// `[lo, hi]`.
    pub theta_domain: Option<[f64; 2]>,
    pub n_particles: Option<usize>,
    pub dt: Option<f64>,
    pub t_final: Option<f64>,
    pub x0: Option<f64>,
    pub n_horizons: Option<usize>,
    pub replicates: Option<usize>,
    /// `mle_interaction` only.
    pub confining: Option<ConfiningFamily>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CltParams {
    pub xi: Option<f64>,
    pub beta: Option<f64>,
    pub n_particles: Option<usize>,
    pub n_realizations: Option<usize>,
    pub t_final: Option<f64>,
    pub dt: Option<f64>,
    pub grid_points: Option<usize>,
    pub bins: Option<usize>,
    /// Record ensemble snapshots of realization 0 every this many steps.
    pub snapshot_stride: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineDecayParams {
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    pub beta: Option<f64>,
    pub half_width: Option<f64>,
    pub grid_points: Option<usize>,
    pub f0_mean: Option<f64>,
    pub f0_var: Option<f64>,
    pub g0_mean: Option<f64>,
    pub g0_var: Option<f64>,
    pub t_final: Option<f64>,
    pub record_every: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusDecayParams {
    pub xi: Option<f64>,
    pub w: Option<f64>,
    pub beta: Option<f64>,
    pub grid_points: Option<usize>,
    pub f0_amplitude: Option<f64>,
    pub g0_amplitude: Option<f64>,
    pub t_final: Option<f64>,
    pub record_every: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainConfig {
    Line,
    Torus,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialConfig {
    Quadratic(f64),
    Bistable(f64),
    Cosine(f64),
    Zero,
}

impl PotentialConfig {
    pub fn kind(self) -> PotentialKind {
        match self {
            PotentialConfig::Quadratic(a) => PotentialKind::Quadratic(a),
            PotentialConfig::Bistable(a) => PotentialKind::Bistable(a),
            PotentialConfig::Cosine(a) => PotentialKind::Cosine(a),
            PotentialConfig::Zero => PotentialKind::Zero,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsReportParams {
    pub domain: DomainConfig,
    pub beta: f64,
    pub confining: PotentialConfig,
    pub interaction: PotentialConfig,
    /// Variance of the Gaussian initial laws (line).
    pub initial_var: Option<f64>,
    /// `f0 = 1 + a cos 2πx` (torus).
    pub initial_amplitude: Option<f64>,
    pub grid_points: Option<usize>,
}

// ---------------------------------------------------------------- resolved

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MleSettings {
    #[serde(serialize_with = "ser_tag")]
    pub tag: ModelTag,
    pub beta: f64,
    pub theta0: f64,
    pub theta_domain: [f64; 2],
    pub n_particles: usize,
    pub dt: f64,
    pub t_final: f64,
    pub x0: f64,
    pub n_horizons: usize,
    pub replicates: usize,
}

fn ser_tag<S: serde::Serializer>(tag: &ModelTag, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(tag.name())
}

impl MleSettings {
    pub fn domain(&self) -> ThetaDomain {
        ThetaDomain::new(self.theta_domain[0], self.theta_domain[1])
            .expect("validated when resolved")
    }

    pub fn spec(&self) -> mflin_core::Result<ModelSpec> {
        self.tag.model(self.beta, self.theta0)
    }

    /// Horizons `T_k = k T / n`, `k = 1..=n`.
    pub fn horizons(&self) -> Vec<f64> {
        let n = self.n_horizons;
        (1..=n)
            .map(|k| self.t_final * k as f64 / n as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltSettings {
    pub xi: f64,
    pub beta: f64,
    pub n_particles: usize,
    pub n_realizations: usize,
    pub t_final: f64,
    pub dt: f64,
    pub grid_points: usize,
    pub bins: usize,
    pub snapshot_stride: Option<usize>,
}

impl CltSettings {
    pub fn spec(&self) -> mflin_core::Result<ModelSpec> {
        ModelSpec::new(
            Domain::Torus,
            self.beta,
            PotentialKind::Cosine(self.xi),
            PotentialKind::Cosine(1.0),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineDecaySettings {
    pub alpha: f64,
    pub gamma: f64,
    pub beta: f64,
    pub half_width: f64,
    pub grid_points: usize,
    pub f0_mean: f64,
    pub f0_var: f64,
    pub g0_mean: f64,
    pub g0_var: f64,
    pub t_final: f64,
    pub record_every: usize,
}

impl LineDecaySettings {
    pub fn spec(&self) -> mflin_core::Result<ModelSpec> {
        ModelSpec::new(
            Domain::Line,
            self.beta,
            PotentialKind::Quadratic(self.alpha),
            PotentialKind::Quadratic(self.gamma),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TorusDecaySettings {
    pub xi: f64,
    pub w: f64,
    pub beta: f64,
    pub grid_points: usize,
    pub f0_amplitude: f64,
    pub g0_amplitude: f64,
    pub t_final: f64,
    pub record_every: usize,
}

impl TorusDecaySettings {
    pub fn spec(&self) -> mflin_core::Result<ModelSpec> {
        ModelSpec::new(
            Domain::Torus,
            self.beta,
            PotentialKind::Cosine(self.xi),
            PotentialKind::Cosine(self.w),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReportSettings {
    pub domain: DomainConfig,
    pub beta: f64,
    pub confining: PotentialConfig,
    pub interaction: PotentialConfig,
    pub initial_var: f64,
    pub initial_amplitude: f64,
    pub grid_points: usize,
}

impl BoundsReportSettings {
    pub fn spec(&self) -> mflin_core::Result<ModelSpec> {
        let domain = match self.domain {
            DomainConfig::Line => Domain::Line,
            DomainConfig::Torus => Domain::Torus,
        };
        ModelSpec::new(
            domain,
            self.beta,
            self.confining.kind(),
            self.interaction.kind(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Settings {
    MleOu(MleSettings),
    MleBistable(MleSettings),
    MleInteraction(MleSettings),
    CltTorus(CltSettings),
    EntropyDecayLine(LineDecaySettings),
    EntropyDecayTorus(TorusDecaySettings),
    BoundsReport(BoundsReportSettings),
}

impl Settings {
    pub fn name(&self) -> &'static str {
        match self {
            Settings::MleOu(_) => "mle_ou",
            Settings::MleBistable(_) => "mle_bistable",
            Settings::MleInteraction(_) => "mle_interaction",
            Settings::CltTorus(_) => "clt_torus",
            Settings::EntropyDecayLine(_) => "entropy_decay_line",
            Settings::EntropyDecayTorus(_) => "entropy_decay_torus",
            Settings::BoundsReport(_) => "bounds_report",
        }
    }
}

/// A validated config with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedConfig {
    pub schema_version: u32,
    pub seed: u64,
    pub scale: Scale,
    #[serde(skip)]
    pub output_dir: PathBuf,
    pub experiment: Settings,
}

pub fn parse(text: &str) -> Result<ExperimentConfig, CliError> {
    if text.trim().is_empty() {
        return Err(CliError::Config("line 1: config file is empty".into()));
    }
    serde_json::from_str(text)
        .map_err(|e| CliError::Config(format!("line {}, column {}: {e}", e.line(), e.column())))
}

struct Check<'a> {
    section: &'a str,
}

impl Check<'_> {
    fn fail(&self, field: &str, msg: &str) -> CliError {
        CliError::Config(format!("experiment.{field} ({}): {msg}", self.section))
    }

    fn positive(&self, field: &str, v: f64) -> Result<f64, CliError> {
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(self.fail(field, &format!("must be positive and finite, got {v}")))
        }
    }

    fn finite(&self, field: &str, v: f64) -> Result<f64, CliError> {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(self.fail(field, "must be finite"))
        }
    }

    fn at_least(&self, field: &str, v: usize, min: usize) -> Result<usize, CliError> {
        if v >= min {
            Ok(v)
        } else {
            Err(self.fail(field, &format!("must be at least {min}, got {v}")))
        }
    }
}

fn pick<T: Copy>(set: Option<T>, scale: Scale, desk: T, paper: T) -> T {
    set.unwrap_or(match scale {
        Scale::Desk => desk,
        Scale::Paper => paper,
    })
}

fn resolve_mle(
    p: &MleParams,
    tag: ModelTag,
    scale: Scale,
    c: &Check,
) -> Result<MleSettings, CliError> {
    let theta_domain = p.theta_domain.unwrap_or([0.05, 5.0]);
    if !(theta_domain[0].is_finite()
        && theta_domain[0] < theta_domain[1]
        && theta_domain[1].is_finite())
    {
        return Err(c.fail("theta_domain", "needs finite lo < hi"));
    }
    let s = MleSettings {
        tag,
        beta: c.positive("beta", p.beta.unwrap_or(1.0))?,
        theta0: c.positive("theta0", p.theta0.unwrap_or(1.0))?,
        theta_domain,
        n_particles: c.at_least("n_particles", pick(p.n_particles, scale, 250, 500), 1)?,
        dt: c.positive("dt", p.dt.unwrap_or(1e-3))?,
        t_final: c.positive("t_final", pick(p.t_final, scale, 500.0, 1000.0))?,
        x0: c.finite("x0", p.x0.unwrap_or(1.0))?,
        n_horizons: c.at_least("n_horizons", p.n_horizons.unwrap_or(100), 1)?,
        replicates: c.at_least("replicates", pick(p.replicates, scale, 5, 1), 1)?,
    };
    if !(s.theta_domain[0] <= s.theta0 && s.theta0 <= s.theta_domain[1]) {
        return Err(c.fail("theta0", "must lie inside theta_domain"));
    }
    if s.dt > s.t_final / s.n_horizons as f64 {
        return Err(c.fail("n_horizons", "horizons are finer than dt"));
    }
    Ok(s)
}

impl ExperimentConfig {
    /// Applies overrides and defaults and validates every value.
    pub fn resolve(
        &self,
        scale: Scale,
        seed: Option<u64>,
        out: Option<PathBuf>,
    ) -> Result<ResolvedConfig, CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "schema_version: expected {SCHEMA_VERSION}, got {}",
                self.schema_version
            )));
        }
        let c = Check {
            section: self.experiment.name(),
        };
        let experiment = match &self.experiment {
            Experiment::MleOu(p) | Experiment::MleBistable(p) if p.confining.is_some() => {
                return Err(c.fail("confining", "only mle_interaction takes a confining family"));
            }
            Experiment::MleOu(p) => {
                Settings::MleOu(resolve_mle(p, ModelTag::OuThetaInV, scale, &c)?)
            }
            Experiment::MleBistable(p) => {
                Settings::MleBistable(resolve_mle(p, ModelTag::BistableThetaInV, scale, &c)?)
            }
            Experiment::MleInteraction(p) => {
                let tag = match p.confining.unwrap_or(ConfiningFamily::Quadratic) {
                    ConfiningFamily::Quadratic => ModelTag::OuThetaInW,
                    ConfiningFamily::Bistable => ModelTag::BistableThetaInW,
                };
                Settings::MleInteraction(resolve_mle(p, tag, scale, &c)?)
            }
            Experiment::CltTorus(p) => {
                let s = CltSettings {
                    xi: c.finite("xi", p.xi.unwrap_or(0.5))?,
                    beta: c.positive("beta", p.beta.unwrap_or(1.0))?,
                    n_particles: c.at_least(
                        "n_particles",
                        pick(p.n_particles, scale, 125, 250),
                        1,
                    )?,
                    n_realizations: c.at_least(
                        "n_realizations",
                        pick(p.n_realizations, scale, 250, 500),
                        50,
                    )?,
                    t_final: c.positive("t_final", pick(p.t_final, scale, 500.0, 1000.0))?,
                    dt: c.positive("dt", p.dt.unwrap_or(1e-2))?,
                    grid_points: c.at_least("grid_points", p.grid_points.unwrap_or(512), 16)?,
                    bins: c.at_least("bins", p.bins.unwrap_or(40), 1)?,
                    snapshot_stride: match p.snapshot_stride {
                        Some(k) => Some(c.at_least("snapshot_stride", k, 1)?),
                        None => None,
                    },
                };
                if s.dt > s.t_final {
                    return Err(c.fail("dt", "exceeds t_final"));
                }
                Settings::CltTorus(s)
            }
            Experiment::EntropyDecayLine(p) => Settings::EntropyDecayLine(LineDecaySettings {
                alpha: c.positive("alpha", p.alpha.unwrap_or(1.0))?,
                gamma: {
                    let g = c.finite("gamma", p.gamma.unwrap_or(0.5))?;
                    if g < 0.0 {
                        return Err(c.fail("gamma", "must be nonnegative"));
                    }
                    g
                },
                beta: c.positive("beta", p.beta.unwrap_or(1.0))?,
                half_width: c.positive("half_width", p.half_width.unwrap_or(8.0))?,
                grid_points: c.at_least("grid_points", p.grid_points.unwrap_or(400), 16)?,
                f0_mean: c.finite("f0_mean", p.f0_mean.unwrap_or(1.0))?,
                f0_var: c.positive("f0_var", p.f0_var.unwrap_or(1.0))?,
                g0_mean: c.finite("g0_mean", p.g0_mean.unwrap_or(1.0))?,
                g0_var: c.positive("g0_var", p.g0_var.unwrap_or(1.0))?,
                t_final: c.positive("t_final", p.t_final.unwrap_or(10.0))?,
                record_every: c.at_least("record_every", p.record_every.unwrap_or(100), 1)?,
            }),
            Experiment::EntropyDecayTorus(p) => {
                let amp = |field: &str, v: f64| -> Result<f64, CliError> {
                    if v.is_finite() && v.abs() < 1.0 {
                        Ok(v)
                    } else {
                        Err(c.fail(field, "must lie in (-1, 1) to keep the density positive"))
                    }
                };
                Settings::EntropyDecayTorus(TorusDecaySettings {
                    xi: c.finite("xi", p.xi.unwrap_or(0.5))?,
                    w: c.finite("w", p.w.unwrap_or(1.0))?,
                    beta: c.positive("beta", p.beta.unwrap_or(0.05))?,
                    grid_points: c.at_least("grid_points", p.grid_points.unwrap_or(64), 16)?,
                    f0_amplitude: amp("f0_amplitude", p.f0_amplitude.unwrap_or(0.6))?,
                    g0_amplitude: amp("g0_amplitude", p.g0_amplitude.unwrap_or(0.4))?,
                    t_final: c.positive("t_final", p.t_final.unwrap_or(0.02))?,
                    record_every: c.at_least("record_every", p.record_every.unwrap_or(50), 1)?,
                })
            }
            Experiment::BoundsReport(p) => {
                let amp = p.initial_amplitude.unwrap_or(0.0);
                if !(amp.is_finite() && amp.abs() < 1.0) {
                    return Err(c.fail("initial_amplitude", "must lie in (-1, 1)"));
                }
                let s = BoundsReportSettings {
                    domain: p.domain,
                    beta: c.positive("beta", p.beta)?,
                    confining: p.confining,
                    interaction: p.interaction,
                    initial_var: c.positive("initial_var", p.initial_var.unwrap_or(1.0))?,
                    initial_amplitude: amp,
                    grid_points: c.at_least("grid_points", p.grid_points.unwrap_or(256), 16)?,
                };
                s.spec()
                    .map_err(|e| c.fail("confining/interaction", &e.to_string()))?;
                Settings::BoundsReport(s)
            }
        };
        let name = experiment.name();
        Ok(ResolvedConfig {
            schema_version: self.schema_version,
            seed: seed.unwrap_or(self.seed),
            scale,
            output_dir: out
                .or_else(|| self.output_dir.clone())
                .unwrap_or_else(|| PathBuf::from("out").join(name)),
            experiment,
        })
    }
}
