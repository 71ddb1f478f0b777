//! Maximum likelihood estimation of a scalar drift parameter from one
//! observed path, with the exact mean-field law or with the law frozen at
//! the equilibrium.
//!
//! Stochastic integrals are left-point (Itô) sums over the recorded grid:
//! `∫ h(X) dX ≈ Σ h(X_k)(X_{k+1} − X_k)`, `∫ h(X) dt ≈ Σ h(X_k)(t_{k+1} − t_k)`.
//! The closed-form estimators below are the exact maximizers of these
//! discretized log-likelihoods, not of their continuous-time limits.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent once std is linked
use num_traits::Float;

use crate::equilibrium::{solve_kirkwood_monroe, KmOptions};
use crate::error::{Error, Result};
use crate::grid::{DensityGrid, GridSpec};
use crate::potentials::{MeanField, ModelSpec, PotentialKind};
use crate::simulate::TrajectoryRecord;

/// Name of the discretization convention, stated in every output.
pub const CONVENTION: &str = "ito-left-point";
/// Spacing of the memoized equilibrium solves in θ.
pub const THETA_CACHE_STEP: f64 = 0.01;
/// `e^{−x}` is treated as zero beyond this exponent.
pub const EXP_CUTOFF: f64 = 60.0;

/// Which potential carries the unknown coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    Confining,
    Interaction,
}

/// How the law `f_t` enters the nonlinear drift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriftMode {
    /// `E X_t = m0 e^{−a t}`, valid for quadratic `V(x) = a x²/2` and
    /// quadratic or zero `W`.
    NonlinearExactMean { initial_mean: f64 },
    /// Recorded ensemble means; needs quadratic or zero `W`.
    NonlinearEmpiricalMean,
    /// Law frozen at `f_inf(·; θ)`.
    Linearized,
}

/// Closed interval of admissible parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaDomain {
    pub lo: f64,
    pub hi: f64,
}

impl ThetaDomain {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::config(format!(
                "Θ = [{lo}, {hi}] is not a compact interval"
            )));
        }
        Ok(ThetaDomain { lo, hi })
    }

    pub fn contains(&self, theta: f64) -> bool {
        theta >= self.lo && theta <= self.hi
    }

    pub fn clamp(&self, theta: f64) -> f64 {
        theta.clamp(self.lo, self.hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodConfig {
    /// Model at an arbitrary θ; the coefficient of the `placement` potential
    /// is replaced per evaluation.
    pub model: ModelSpec,
    pub placement: Placement,
    pub theta_domain: ThetaDomain,
    pub drift_mode: DriftMode,
    pub observation: TrajectoryRecord,
    /// Ensemble mean at the recorded times.
    pub mean_series: Option<Vec<f64>>,
}

impl LikelihoodConfig {
    pub fn new(
        model: ModelSpec,
        placement: Placement,
        theta_domain: ThetaDomain,
        drift_mode: DriftMode,
        observation: TrajectoryRecord,
        mean_series: Option<Vec<f64>>,
    ) -> Result<Self> {
        observation.validate()?;
        let slot = slot(&model, placement);
        if slot.parameter().is_none() {
            return Err(Error::config(
                "the unknown potential has no scalar coefficient",
            ));
        }
        if let Some(m) = &mean_series {
            if m.len() != observation.len() {
                return Err(Error::config(
                    "mean series and observation differ in length",
                ));
            }
        }
        Ok(LikelihoodConfig {
            model,
            placement,
            theta_domain,
            drift_mode,
            observation,
            mean_series,
        })
    }

    /// The model with the unknown coefficient set to `theta`.
    pub fn model_at(&self, theta: f64) -> Result<ModelSpec> {
        if !self.theta_domain.contains(theta) {
            return Err(Error::domain(format!(
                "θ = {theta} outside Θ = [{}, {}]",
                self.theta_domain.lo, self.theta_domain.hi
            )));
        }
        let m = &self.model;
        match self.placement {
            Placement::Confining => m.with_confining(m.confining().with_parameter(theta)?),
            Placement::Interaction => m.with_interaction(m.interaction().with_parameter(theta)?),
        }
    }
}

fn slot(model: &ModelSpec, placement: Placement) -> &PotentialKind {
    match placement {
        Placement::Confining => model.confining(),
        Placement::Interaction => model.interaction(),
    }
}

/// `−(β/2) Σ g_k ΔX_k − (β/4) Σ g_k² Δt_k` for the drift gradient `g`.
fn girsanov_sum(
    beta: f64,
    obs: &TrajectoryRecord,
    mut grad: impl FnMut(usize, f64, f64) -> f64,
) -> f64 {
    let (t, x) = (&obs.times, &obs.states);
    let mut lin = 0.0;
    let mut quad = 0.0;
    for k in 0..x.len().saturating_sub(1) {
        let g = grad(k, t[k], x[k]);
        lin += g * (x[k + 1] - x[k]);
        quad += g * g * (t[k + 1] - t[k]);
    }
    -0.5 * beta * lin - 0.25 * beta * quad
}

/// Discretized log-likelihood of the McKean SDE.
pub fn loglik_nonlinear(config: &LikelihoodConfig, theta: f64) -> Result<f64> {
    let spec = config.model_at(theta)?;
    let b = match spec.interaction() {
        PotentialKind::Zero => 0.0,
        PotentialKind::Quadratic(b) => *b,
        _ => {
            return Err(Error::config(
                "the nonlinear likelihood needs the full law unless W is quadratic",
            ))
        }
    };
    let obs = &config.observation;
    match config.drift_mode {
        DriftMode::NonlinearExactMean { initial_mean } => {
            let a = match spec.confining() {
                PotentialKind::Quadratic(a) => *a,
                _ => return Err(Error::config("the exact mean needs a quadratic V")),
            };
            Ok(girsanov_sum(spec.beta(), obs, |_, t, x| {
                spec.grad_v(x) + b * (x - initial_mean * decay(a * t))
            }))
        }
        DriftMode::NonlinearEmpiricalMean => {
            let means = config.mean_series.as_ref().ok_or_else(|| {
                Error::config("no recorded ensemble means for the nonlinear drift")
            })?;
            Ok(girsanov_sum(spec.beta(), obs, |k, _, x| {
                spec.grad_v(x) + b * (x - means[k])
            }))
        }
        DriftMode::Linearized => Err(Error::config(
            "use loglik_linearized for the linearized drift",
        )),
    }
}

#[inline]
fn decay(x: f64) -> f64 {
    if x > EXP_CUTOFF {
        0.0
    } else {
        (-x).exp()
    }
}

/// Equilibria `f_inf(·; θ)` solved on a θ grid of step [`THETA_CACHE_STEP`]
/// and linearly interpolated in between.
#[derive(Debug, Clone)]
pub struct EquilibriumCache {
    grid: GridSpec,
    options: KmOptions,
    solved: BTreeMap<i64, DensityGrid>,
}

impl EquilibriumCache {
    pub fn new(grid: GridSpec) -> Self {
        EquilibriumCache {
            grid,
            options: KmOptions::default(),
            solved: BTreeMap::new(),
        }
    }

    pub fn with_options(mut self, options: KmOptions) -> Self {
        self.options = options;
        self
    }

    pub fn len(&self) -> usize {
        self.solved.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solved.is_empty()
    }

    fn node(&mut self, config: &LikelihoodConfig, j: i64) -> Result<DensityGrid> {
        if let Some(f) = self.solved.get(&j) {
            return Ok(f.clone());
        }
        let dom = config.theta_domain;
        let theta = dom.clamp(j as f64 * THETA_CACHE_STEP);
        let spec = config.model_at(theta)?;
        let sol = solve_kirkwood_monroe(&spec, &self.grid, &self.options).map_err(|e| {
            Error::Equilibrium {
                theta,
                source: alloc::boxed::Box::new(e),
            }
        })?;
        self.solved.insert(j, sol.density.clone());
        Ok(sol.density)
    }

    /// `f_inf(·; θ)`.
    pub fn density(&mut self, config: &LikelihoodConfig, theta: f64) -> Result<DensityGrid> {
        config.model_at(theta)?;
        let s = theta / THETA_CACHE_STEP;
        let j = s.floor() as i64;
        let w = s - j as f64;
        let left = self.node(config, j)?;
        if w < 1e-12 {
            return Ok(left);
        }
        let right = self.node(config, j + 1)?;
        let values = left
            .values()
            .iter()
            .zip(right.values())
            .map(|(a, b)| (1.0 - w) * a + w * b)
            .collect();
        DensityGrid::from_unnormalized(self.grid, values)
    }
}

/// Discretized log-likelihood of the linearized SDE at `θ`.
pub fn loglik_linearized(
    config: &LikelihoodConfig,
    theta: f64,
    cache: &mut EquilibriumCache,
) -> Result<f64> {
    let spec = config.model_at(theta)?;
    let f_inf = cache.density(config, theta)?;
    let field = MeanField::from_density(&spec, &f_inf)?;
    Ok(girsanov_sum(spec.beta(), &config.observation, |_, _, x| {
        spec.grad_v(x) + field.grad(x)
    }))
}

/// Maximizer of a scalar objective on `[lo, hi]` by golden-section search.
pub fn golden_section_max(
    mut f: impl FnMut(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    // endpoints are admissible maximizers of a monotone objective
    let mut best = (x, f(x)?);
    for e in [lo, hi] {
        let fe = f(e)?;
        if fe > best.1 {
            best = (e, fe);
        }
    }
    Ok(best)
}

/// Argmax of an objective with its second difference at the optimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximizer {
    pub theta: f64,
    pub value: f64,
    pub curvature: f64,
}

fn maximize(
    mut f: impl FnMut(f64) -> Result<f64>,
    dom: ThetaDomain,
    tol: f64,
) -> Result<Maximizer> {
    let (theta, value) = golden_section_max(&mut f, dom.lo, dom.hi, tol)?;
    let h = 1e-3 * (dom.hi - dom.lo).max(1e-6);
    let (l, r) = (dom.clamp(theta - h), dom.clamp(theta + h));
    let curvature = if r - theta > 0.0 && theta - l > 0.0 {
        ((f(r)? - value) / (r - theta) - (value - f(l)?) / (theta - l)) / (0.5 * (r - l))
    } else {
        f64::NAN
    };
    Ok(Maximizer {
        theta,
        value,
        curvature,
    })
}

/// `θ̂_T` by golden-section search on Θ.
pub fn mle_nonlinear(config: &LikelihoodConfig, tol: f64) -> Result<Maximizer> {
    maximize(|th| loglik_nonlinear(config, th), config.theta_domain, tol)
}

/// `θ̃_T` by golden-section search on Θ.
pub fn mle_linearized(
    config: &LikelihoodConfig,
    cache: &mut EquilibriumCache,
    tol: f64,
) -> Result<Maximizer> {
    maximize(
        |th| loglik_linearized(config, th, cache),
        config.theta_domain,
        tol,
    )
}

/// The four examples with closed-form (or one-dimensional root) estimators.
/// In all of them `W(x) = x²/2` up to the unknown factor and `β` is known.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelTag {
    /// `V = θx²/2`, `W = x²/2`.
    OuThetaInV,
    /// `V = x²/2`, `W = θx²/2`.
    OuThetaInW,
    /// `V = θ(x⁴/4 − x²/2)`, `W = x²/2`.
    BistableThetaInV,
    /// `V = x⁴/4 − x²/2`, `W = θx²/2`.
    BistableThetaInW,
}

impl ModelTag {
    pub fn name(self) -> &'static str {
        match self {
            ModelTag::OuThetaInV => "ou_theta_in_V",
            ModelTag::OuThetaInW => "ou_theta_in_W",
            ModelTag::BistableThetaInV => "bistable_theta_in_V",
            ModelTag::BistableThetaInW => "bistable_theta_in_W",
        }
    }

    pub fn placement(self) -> Placement {
        match self {
            ModelTag::OuThetaInV | ModelTag::BistableThetaInV => Placement::Confining,
            ModelTag::OuThetaInW | ModelTag::BistableThetaInW => Placement::Interaction,
        }
    }

    /// Line model at parameter `theta`.
    pub fn model(self, beta: f64, theta: f64) -> Result<ModelSpec> {
        use crate::grid::Domain::Line;
        use PotentialKind::{Bistable, Quadratic};
        let (v, w) = match self {
            ModelTag::OuThetaInV => (Quadratic(theta), Quadratic(1.0)),
            ModelTag::OuThetaInW => (Quadratic(1.0), Quadratic(theta)),
            ModelTag::BistableThetaInV => (Bistable(theta), Quadratic(1.0)),
            ModelTag::BistableThetaInW => (Bistable(1.0), Quadratic(theta)),
        };
        ModelSpec::new(Line, beta, v, w)
    }

    /// Whether `θ̂` needs the ensemble mean rather than `E X_0` alone.
    pub fn needs_mean_curve(self) -> bool {
        matches!(
            self,
            ModelTag::BistableThetaInV | ModelTag::BistableThetaInW
        )
    }
}

/// Where the nonlinear estimator gets `E X_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeanSource<'a> {
    /// `E X_0`; the OU mean is then known in closed form.
    Initial(f64),
    /// Recorded ensemble means at the observation times.
    Series(&'a [f64]),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateTrace {
    pub tag: ModelTag,
    pub horizons: Vec<f64>,
    /// Nonlinear MLE `θ̂_T`.
    pub theta_hat: Vec<f64>,
    /// Linearized MLE `θ̃_T`.
    pub theta_tilde: Vec<f64>,
    /// Second derivative of the discretized log-likelihood at `θ̂_T`.
    pub curvature_hat: Vec<f64>,
    pub curvature_tilde: Vec<f64>,
    pub convention: &'static str,
}

/// Running left-point sums for the ratio estimators.
#[derive(Debug, Clone, Copy, Default)]
struct Sums {
    // linearized
    num_tilde: f64,
    den_tilde: f64,
    // nonlinear (ratio forms only)
    num_hat: f64,
    den_hat: f64,
    // OU θ in V: θ-free pieces of the score
    x_dx: f64,
    x2_dt: f64,
}

fn ratio(num: f64, den: f64, what: &str) -> Result<f64> {
    if !(den.abs() > 1e-300) || !num.is_finite() || !den.is_finite() {
        return Err(Error::Estimation {
            message: format!("degenerate path: vanishing denominator in {what}"),
            trace: Vec::new(),
        });
    }
    Ok(-num / den)
}

/// Score of the OU model with `θ` in `V` (proportional to `∂θ 𝔏_T`) over the
/// first `n` intervals, with `m_t = m0 e^{−θt}`:
/// `S(θ) = −∫XdX − (θ+1)∫X²dt − m0∫te^{−θt}dX − (θ+1)m0∫tXe^{−θt}dt
///         + m0∫Xe^{−θt}dt + m0²∫te^{−2θt}dt`.
fn ou_v_score(obs: &TrajectoryRecord, n: usize, m0: f64, s: &Sums, theta: f64) -> f64 {
    let (t, x) = (&obs.times, &obs.states);
    let mut acc = -s.x_dx - (theta + 1.0) * s.x2_dt;
    if m0 != 0.0 {
        for k in 0..n {
            let tk = t[k];
            if theta * tk > EXP_CUTOFF {
                break;
            }
            let e = (-theta * tk).exp();
            let dt = t[k + 1] - tk;
            let dx = x[k + 1] - x[k];
            acc += -m0 * tk * e * dx - (theta + 1.0) * m0 * tk * x[k] * e * dt
                + m0 * x[k] * e * dt
                + m0 * m0 * tk * e * e * dt;
        }
    }
    acc
}

fn ou_v_root(
    obs: &TrajectoryRecord,
    n: usize,
    m0: f64,
    s: &Sums,
    dom: ThetaDomain,
) -> Result<(f64, f64)> {
    let score = |th: f64| ou_v_score(obs, n, m0, s, th);
    let (mut a, mut b) = (dom.lo, dom.hi);
    let (fa, fb) = (score(a), score(b));
    if !(fa.is_finite() && fb.is_finite()) || fa * fb > 0.0 {
        let trace = (0..=20)
            .map(|i| {
                let th = dom.lo + (dom.hi - dom.lo) * i as f64 / 20.0;
                (th, score(th))
            })
            .collect();
        return Err(Error::Estimation {
            message: format!("score does not change sign on [{}, {}]", dom.lo, dom.hi),
            trace,
        });
    }
    let mut fa = fa;
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let fm = score(mid);
        if fm == 0.0 || b - a < 1e-13 * (1.0 + mid.abs()) {
            a = mid;
            b = mid;
            break;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    let root = 0.5 * (a + b);
    let h = 1e-5 * (1.0 + root.abs());
    let slope = (score(root + h) - score(root - h)) / (2.0 * h);
    Ok((root, slope))
}

/// Both estimators at every horizon, reusing the running sums.
pub fn estimate_over_horizons(
    tag: ModelTag,
    beta: f64,
    obs: &TrajectoryRecord,
    mean: MeanSource<'_>,
    horizons: &[f64],
    dom: ThetaDomain,
) -> Result<EstimateTrace> {
    obs.validate()?;
    if obs.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: obs.len(),
        });
    }
    if horizons.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain("horizons must be strictly increasing"));
    }
    let t_end = obs.t_final();
    let t0 = obs.times[0];
    if horizons
        .iter()
        .any(|h| !(*h > t0 && *h <= t_end * (1.0 + 1e-12)))
    {
        return Err(Error::domain(format!(
            "horizons must lie in ({t0}, {t_end}]"
        )));
    }
    if let MeanSource::Series(m) = mean {
        if m.len() != obs.len() {
            return Err(Error::config(
                "mean series and observation differ in length",
            ));
        }
    }
    let mean_at = |k: usize, t: f64| -> Result<f64> {
        match (mean, tag) {
            (MeanSource::Series(m), _) => Ok(m[k]),
            (MeanSource::Initial(m0), ModelTag::OuThetaInW) => Ok(m0 * decay(t)),
            (MeanSource::Initial(_), ModelTag::OuThetaInV) => Ok(0.0),
            (MeanSource::Initial(_), _) => Err(Error::config(format!(
                "{} needs the recorded ensemble mean",
                tag.name()
            ))),
        }
    };
    let m0 = match mean {
        MeanSource::Initial(m0) => m0,
        MeanSource::Series(m) => m[0],
    };

    let (t, x) = (&obs.times, &obs.states);
    let mut trace = EstimateTrace {
        tag,
        horizons: horizons.to_vec(),
        theta_hat: Vec::with_capacity(horizons.len()),
        theta_tilde: Vec::with_capacity(horizons.len()),
        curvature_hat: Vec::with_capacity(horizons.len()),
        curvature_tilde: Vec::with_capacity(horizons.len()),
        convention: CONVENTION,
    };
    let mut s = Sums::default();
    let mut k = 0;
    for &horizon in horizons {
        while k + 1 < x.len() && t[k + 1] <= horizon * (1.0 + 1e-12) {
            let (xk, dx, dt) = (x[k], x[k + 1] - x[k], t[k + 1] - t[k]);
            let g = xk * xk * xk - xk;
            let mk = mean_at(k, t[k])?;
            s.x_dx += xk * dx;
            s.x2_dt += xk * xk * dt;
            match tag {
                ModelTag::OuThetaInV => {}
                ModelTag::OuThetaInW => {
                    let c = xk - mk;
                    s.num_hat += c * dx + xk * c * dt;
                    s.den_hat += c * c * dt;
                }
                ModelTag::BistableThetaInV => {
                    s.num_tilde += g * dx + xk * g * dt;
                    s.den_tilde += g * g * dt;
                    s.num_hat += g * dx + (xk - mk) * g * dt;
                    s.den_hat += g * g * dt;
                }
                ModelTag::BistableThetaInW => {
                    let c = xk - mk;
                    s.num_tilde += xk * dx + xk * g * dt;
                    s.den_tilde += xk * xk * dt;
                    s.num_hat += c * dx + c * g * dt;
                    s.den_hat += c * c * dt;
                }
            }
            k += 1;
        }
        let (tilde, curv_tilde) = match tag {
            ModelTag::OuThetaInV | ModelTag::OuThetaInW => {
                (ratio(s.x_dx, s.x2_dt, "θ̃")? - 1.0, -0.5 * beta * s.x2_dt)
            }
            _ => (
                ratio(s.num_tilde, s.den_tilde, "θ̃")?,
                -0.5 * beta * s.den_tilde,
            ),
        };
        let (hat, curv_hat) = match tag {
            ModelTag::OuThetaInV => {
                let (root, slope) = ou_v_root(obs, k, m0, &s, dom)?;
                (root, 0.5 * beta * slope)
            }
            _ => (ratio(s.num_hat, s.den_hat, "θ̂")?, -0.5 * beta * s.den_hat),
        };
        // the objectives are concave in θ, so clamping is the argmax on Θ
        trace.theta_tilde.push(dom.clamp(tilde));
        trace.theta_hat.push(dom.clamp(hat));
        trace.curvature_tilde.push(curv_tilde);
        trace.curvature_hat.push(curv_hat);
    }
    Ok(trace)
}

/// `(θ̂_T, θ̃_T)` at the end of the path.
pub fn closed_form_estimators(
    tag: ModelTag,
    beta: f64,
    obs: &TrajectoryRecord,
    mean: MeanSource<'_>,
    dom: ThetaDomain,
) -> Result<(f64, f64)> {
    let tr = estimate_over_horizons(tag, beta, obs, mean, &[obs.t_final()], dom)?;
    Ok((tr.theta_hat[0], tr.theta_tilde[0]))
}

/// `θ ↦ ∫|b̃_θ − b̃_{θ0}|² f_inf(·; θ0)` on `n` equispaced points of Θ.
pub fn identifiability_scan(
    config: &LikelihoodConfig,
    theta0: f64,
    n: usize,
    cache: &mut EquilibriumCache,
) -> Result<Vec<(f64, f64)>> {
    if n < 2 {
        return Err(Error::config(
            "identifiability scan needs at least two points",
        ));
    }
    let spec0 = config.model_at(theta0)?;
    let f0 = cache.density(config, theta0)?;
    let field0 = MeanField::from_density(&spec0, &f0)?;
    let g = *f0.grid();
    let drift0: Vec<f64> = (0..g.len())
        .map(|i| spec0.grad_v(g.x(i)) + field0.grad(g.x(i)))
        .collect();
    let dom = config.theta_domain;
    (0..n)
        .map(|j| {
            let th = dom.lo + (dom.hi - dom.lo) * j as f64 / (n - 1) as f64;
            let spec = config.model_at(th)?;
            let f = cache.density(config, th)?;
            let field = MeanField::from_density(&spec, &f)?;
            let v: f64 = (0..g.len())
                .map(|i| {
                    let x = g.x(i);
                    let d = spec.grad_v(x) + field.grad(x) - drift0[i];
                    d * d * f0.values()[i]
                })
                .sum::<f64>()
                * g.h();
            Ok((th, v))
        })
        .collect()
}
