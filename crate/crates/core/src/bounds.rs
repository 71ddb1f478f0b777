//! Closed-form constants and decay envelopes for the distance between the
//! nonlinear and the linearized dynamics.
//!
//! LSI constants follow the convention `H(μ|ν) ≤ (λ/4) I(μ|ν)`, under which
//! `N(m, s²)` has constant `2 s²` and the uniform law on the unit torus has
//! `1/(2π²)`.
//!
//! Both entropy envelopes come from the same Grönwall estimate
//! `H_t ≤ H_0 e^{−bt} + (βP/2) ∫_0^t e^{−b(t−s)} e^{−as} ds`, with
//! `(a, b, P) = (α/2, 2/(βΛ), MK)` on the line and
//! `(a_i, 2/(βΞ), c_i‖∇W‖²)` on the torus. [`rho_lambda`] and [`sigma_xi`]
//! return the three-case simplified forms; the `_sharp` variants return the
//! unsimplified integral, which is continuous across the case boundary.

use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // inherent once std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::grid::Domain;
use crate::potentials::{ModelSpec, SupNorms};
use crate::special::lambert_w0;

/// Grid used to measure sup-norms of torus potentials.
pub const SUP_NORM_POINTS: usize = 4096;
/// Safety factor applied to the measured moment bound.
pub const M_SAFETY: f64 = 1.2;

/// Which branch of a three-case envelope is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Entropy dissipation faster than the forcing decays (`b > a`).
    Case1,
    /// `b = a` exactly.
    Case2,
    Case3,
}

impl Regime {
    pub fn tag(self) -> &'static str {
        match self {
            Regime::Case1 => "case1",
            Regime::Case2 => "case2",
            Regime::Case3 => "case3",
        }
    }
}

/// Sup-norms of the torus potentials.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TorusNorms {
    pub v: SupNorms,
    pub w: SupNorms,
}

impl TorusNorms {
    pub fn measure(spec: &ModelSpec) -> Self {
        TorusNorms {
            v: spec.confining().sup_norms_torus(SUP_NORM_POINTS),
            w: spec.interaction().sup_norms_torus(SUP_NORM_POINTS),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    /// Convexity of `V`.
    pub alpha: f64,
    /// Convexity of `W`.
    pub gamma: f64,
    /// LSI constant of both initial laws.
    pub lambda0: f64,
    /// Moment bound on `∬|∇W(x−z)|²(f_t(z)+f_inf(z))f_t(x)`.
    pub m: f64,
    /// Prefactor of `‖f_t − f_inf‖_{L¹} ≤ K e^{−αt/2}`.
    pub k: f64,
    /// `H(μ_0 | ν_0)`.
    pub h0: f64,
    /// Sandwich `1/κ ≤ f_0, g_0 ≤ κ` (torus).
    pub kappa: f64,
    /// `‖f_0 − f_inf‖_{L²}` (torus).
    pub l2_to_equilibrium: f64,
    /// `H(f_0 | f_inf)` (torus).
    pub entropy_to_equilibrium: f64,
    /// Measured from the model when `None`.
    pub norms: Option<TorusNorms>,
}

impl BoundParams {
    pub fn line(alpha: f64, gamma: f64, lambda0: f64, m: f64, k: f64, h0: f64) -> Self {
        BoundParams {
            alpha,
            gamma,
            lambda0,
            m,
            k,
            h0,
            kappa: 1.0,
            l2_to_equilibrium: 0.0,
            entropy_to_equilibrium: 0.0,
            norms: None,
        }
    }

    pub fn torus(kappa: f64, h0: f64, l2_to_equilibrium: f64, entropy_to_equilibrium: f64) -> Self {
        BoundParams {
            alpha: 0.0,
            gamma: 0.0,
            lambda0: 0.0,
            m: 0.0,
            k: 0.0,
            h0,
            kappa,
            l2_to_equilibrium,
            entropy_to_equilibrium,
            norms: None,
        }
    }

    fn check_line(&self, beta: f64) -> Result<()> {
        check_beta(beta)?;
        if !(self.alpha > 0.0 && self.gamma >= 0.0 && self.lambda0 > 0.0) {
            return Err(Error::domain("line bounds need α > 0, γ ≥ 0 and λ0 > 0"));
        }
        check_nonneg(&[("M", self.m), ("K", self.k), ("H0", self.h0)])
    }

    fn check_torus(&self) -> Result<()> {
        // κ = 1 only for uniform initial data; the sandwich still holds.
        if !(self.kappa >= 1.0) || !self.kappa.is_finite() {
            return Err(Error::domain("κ must be at least 1"));
        }
        check_nonneg(&[
            ("H0", self.h0),
            ("‖f0 − f_inf‖", self.l2_to_equilibrium),
            ("H(f0|f_inf)", self.entropy_to_equilibrium),
        ])
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::domain("β must be positive"));
    }
    Ok(())
}

fn check_nonneg(values: &[(&str, f64)]) -> Result<()> {
    for (name, v) in values {
        if !(*v >= 0.0 && v.is_finite()) {
            return Err(Error::domain(alloc::format!(
                "{name} must be finite and nonnegative"
            )));
        }
    }
    Ok(())
}

/// LSI constant `λ_t` shared by `μ_t` and `ν_t` on the line.
pub fn lsi_constant_whole(p: &BoundParams, beta: f64, t: f64) -> Result<f64> {
    check_beta(beta)?;
    let s = p.alpha + p.gamma;
    if !(s > 0.0) {
        return Err(Error::domain("α + γ must be positive"));
    }
    if !(t >= 0.0) {
        return Err(Error::domain("t must be nonnegative"));
    }
    let e = (-2.0 * s * t).exp();
    Ok(p.lambda0 * e + (1.0 - e) / (2.0 * beta * s))
}

/// Time-uniform constant `Λ = max(λ0, 1/(2β(α+γ)))`.
pub fn uniform_lsi_constant_whole(p: &BoundParams, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let s = p.alpha + p.gamma;
    if !(s > 0.0) {
        return Err(Error::domain("α + γ must be positive"));
    }
    Ok(p.lambda0.max(1.0 / (2.0 * beta * s)))
}

/// LSI constant of `N(m, var)` in the `λ/4` convention.
pub fn gaussian_lsi_constant(var: f64) -> f64 {
    2.0 * var
}

/// Grönwall envelope `H0 e^{−bt} + (βP/2)∫_0^t e^{−b(t−s)}e^{−as}ds`
/// in simplified or sharp form.
#[derive(Debug, Clone, Copy)]
struct Envelope {
    h0: f64,
    /// `βP/2`.
    forcing: f64,
    a: f64,
    b: f64,
    regime: Regime,
}

impl Envelope {
    fn displayed(&self, t: f64) -> f64 {
        match self.regime {
            Regime::Case1 => (self.h0 + self.forcing / (self.b - self.a)) * (-self.a * t).exp(),
            Regime::Case2 => (self.h0 + self.forcing * t) * (-self.b * t).exp(),
            Regime::Case3 => (self.h0 + self.forcing / (self.a - self.b)) * (-self.b * t).exp(),
        }
    }

    fn sharp(&self, t: f64) -> f64 {
        // ∫_0^t e^{(b−a)s} ds = t · expm1(x)/x with x = (b−a)t
        let x = (self.b - self.a) * t;
        let integral = if x.abs() < 1e-12 {
            t
        } else {
            x.exp_m1() / (self.b - self.a)
        };
        (self.h0 + self.forcing * integral) * (-self.b * t).exp()
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::domain("t must be finite and nonnegative"));
    }
    Ok(())
}

fn line_envelope(p: &BoundParams, beta: f64) -> Result<Envelope> {
    p.check_line(beta)?;
    let lambda = uniform_lsi_constant_whole(p, beta)?;
    let threshold = 4.0 / (p.alpha * beta);
    let regime = if lambda < threshold {
        Regime::Case1
    } else if lambda == threshold {
        Regime::Case2
    } else {
        Regime::Case3
    };
    Ok(Envelope {
        h0: p.h0,
        forcing: 0.5 * beta * p.m * p.k,
        a: 0.5 * p.alpha,
        b: 2.0 / (beta * lambda),
        regime,
    })
}

/// Active branch of [`rho_lambda`].
pub fn rho_lambda_regime(p: &BoundParams, beta: f64) -> Result<Regime> {
    Ok(line_envelope(p, beta)?.regime)
}

/// Entropy envelope `ρ_Λ(t)` for `H(μ_t | ν_t)` on the line.
pub fn rho_lambda(p: &BoundParams, beta: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(line_envelope(p, beta)?.displayed(t))
}

/// Unsimplified form of `ρ_Λ(t)`; never larger than [`rho_lambda`].
pub fn rho_lambda_sharp(p: &BoundParams, beta: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(line_envelope(p, beta)?.sharp(t))
}

/// `Ξ̃_i`, available only under the hypotheses `a_i > 0`, `C_i/a_i < 𝕎(1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum XiTilde {
    Value(f64),
    NotApplicable { a: f64, ratio: f64 },
}

impl XiTilde {
    pub fn value(&self) -> Option<f64> {
        match self {
            XiTilde::Value(v) => Some(*v),
            XiTilde::NotApplicable { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusConstants {
    pub beta: f64,
    pub norms: TorusNorms,
    /// `Γ = e^{2β(‖V‖∞ + ‖W‖∞)}`.
    pub big_gamma: f64,
    /// LSI constant `Γ/(2π²)` of the invariant measure.
    pub lsi_invariant: f64,
    /// L² decay rate.
    pub zeta: f64,
    /// Entropy decay rate.
    pub eta: f64,
    /// L¹ prefactors `(‖f0 − f_inf‖_{L²}, 2√(2H(f0|f_inf)))`.
    pub c: [f64; 2],
    /// L¹ rates `(ζ, η/2)`.
    pub a: [f64; 2],
    pub big_c: [f64; 2],
    pub kappa: f64,
    /// `Ξ = κΓ²/(2π²)`.
    pub xi: f64,
    pub xi_tilde: [XiTilde; 2],
}

/// `𝕎(1)`, the omega constant.
pub fn omega_constant() -> f64 {
    lambert_w0(1.0)
}

/// Every torus constant, with sup-norms measured on [`SUP_NORM_POINTS`]
/// points unless supplied.
pub fn torus_constants(spec: &ModelSpec, p: &BoundParams) -> Result<TorusConstants> {
    if spec.domain() != Domain::Torus {
        return Err(Error::UnsupportedDomain(
            "torus constants need a torus model",
        ));
    }
    p.check_torus()?;
    let beta = spec.beta();
    let norms = p.norms.unwrap_or_else(|| TorusNorms::measure(spec));
    let (v, w) = (norms.v, norms.w);
    let big_gamma = (2.0 * beta * (v.value + w.value)).exp();
    let pi2 = PI * PI;
    let zeta = pi2 / (4.0 * beta) - beta * (v.grad + (1.0 + big_gamma) * w.grad).powi(2);
    let coupling = beta * w.grad * (v.grad + w.grad);
    let eta = 8.0 * (pi2 / (beta * big_gamma) - w.laplacian - coupling);
    let c = [
        p.l2_to_equilibrium,
        2.0 * (2.0 * p.entropy_to_equilibrium).sqrt(),
    ];
    let a = [zeta, 0.5 * eta];
    let big_c = [
        c[0] * (w.laplacian + coupling),
        c[1] * (w.laplacian + coupling),
    ];
    let xi = p.kappa * big_gamma * big_gamma / (2.0 * pi2);
    let omega = omega_constant();
    let tilde = |i: usize| {
        let ratio = big_c[i] / a[i];
        if a[i] > 0.0 && ratio < omega {
            XiTilde::Value(xi / (1.0 - ratio * ratio.exp()))
        } else {
            XiTilde::NotApplicable { a: a[i], ratio }
        }
    };
    Ok(TorusConstants {
        beta,
        norms,
        big_gamma,
        lsi_invariant: big_gamma / (2.0 * pi2),
        zeta,
        eta,
        c,
        a,
        big_c,
        kappa: p.kappa,
        xi,
        xi_tilde: [tilde(0), tilde(1)],
    })
}

impl TorusConstants {
    /// Whether the hypotheses behind `σ_Ξ` hold for index `i ∈ {1, 2}`.
    pub fn applicable(&self, i: usize) -> bool {
        matches!(
            self.xi_tilde.get(i.wrapping_sub(1)),
            Some(XiTilde::Value(_))
        )
    }
}

fn torus_envelope(k: &TorusConstants, beta: f64, h0: f64, i: usize) -> Result<Envelope> {
    check_beta(beta)?;
    check_nonneg(&[("H0", h0)])?;
    if !(1..=2).contains(&i) {
        return Err(Error::domain("σ_Ξ index must be 1 or 2"));
    }
    let (a, c) = (k.a[i - 1], k.c[i - 1]);
    if !(a > 0.0) {
        return Err(Error::domain(alloc::format!(
            "rate a_{i} = {a} is not positive"
        )));
    }
    if !k.xi.is_finite() {
        return Err(Error::domain("Ξ is not finite"));
    }
    let threshold = 2.0 / (a * beta);
    let regime = if k.xi < threshold {
        Regime::Case1
    } else if k.xi == threshold {
        Regime::Case2
    } else {
        Regime::Case3
    };
    let gw = k.norms.w.grad;
    Ok(Envelope {
        h0,
        forcing: 0.5 * beta * c * gw * gw,
        a,
        b: 2.0 / (beta * k.xi),
        regime,
    })
}

pub fn sigma_xi_regime(k: &TorusConstants, beta: f64, i: usize) -> Result<Regime> {
    Ok(torus_envelope(k, beta, 0.0, i)?.regime)
}

/// Entropy envelope `σ_Ξ(t)` for `H(μ_t | ν_t)` on the torus, index `i`.
pub fn sigma_xi(k: &TorusConstants, beta: f64, h0: f64, i: usize, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(torus_envelope(k, beta, h0, i)?.displayed(t))
}

pub fn sigma_xi_sharp(k: &TorusConstants, beta: f64, h0: f64, i: usize, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(torus_envelope(k, beta, h0, i)?.sharp(t))
}

/// Path coupling envelope `(E0 + 8MK/(3α+4γ)²) e^{−αt/2}` for `E|X_t − Y_t|²`.
pub fn coupling_envelope(p: &BoundParams, e0: f64, t: f64) -> Result<f64> {
    check_nonneg(&[("E0", e0), ("M", p.m), ("K", p.k)])?;
    check_time(t)?;
    let s = 3.0 * p.alpha + 4.0 * p.gamma;
    if !(p.alpha > 0.0 && s > 0.0) {
        return Err(Error::domain("coupling envelope needs α > 0"));
    }
    Ok((e0 + 8.0 * p.m * p.k / (s * s)) * (-0.5 * p.alpha * t).exp())
}

/// Talagrand envelope `√(λ · H-bound)` for `W2(μ_t, ν_t)`.
pub fn wasserstein_envelope(lsi_constant: f64, entropy_bound: f64) -> Result<f64> {
    if !(lsi_constant >= 0.0) || !(entropy_bound >= 0.0) {
        return Err(Error::domain(
            "Wasserstein envelope needs nonnegative inputs",
        ));
    }
    Ok((lsi_constant * entropy_bound).sqrt())
}

/// An envelope evaluated on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCurve {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub regime_tag: Regime,
}

impl BoundCurve {
    fn build(times: &[f64], env: Envelope, sharp: bool) -> Result<Self> {
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("curve times must be strictly increasing"));
        }
        let mut values = Vec::with_capacity(times.len());
        for &t in times {
            check_time(t)?;
            values.push(if sharp {
                env.sharp(t)
            } else {
                env.displayed(t)
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invariant("bound curve produced a non-finite value"));
        }
        Ok(BoundCurve {
            times: times.to_vec(),
            values,
            regime_tag: env.regime,
        })
    }

    pub fn rho_lambda(p: &BoundParams, beta: f64, times: &[f64]) -> Result<Self> {
        Self::build(times, line_envelope(p, beta)?, false)
    }

    pub fn sigma_xi(
        k: &TorusConstants,
        beta: f64,
        h0: f64,
        i: usize,
        times: &[f64],
    ) -> Result<Self> {
        Self::build(times, torus_envelope(k, beta, h0, i)?, false)
    }
}

/// `M` from recorded values of the moment functional: `1.2 · sup`.
pub fn estimate_m(moments: &[f64]) -> Result<f64> {
    if moments.is_empty() || moments.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
        return Err(Error::domain(
            "moment series must be nonempty, finite and nonnegative",
        ));
    }
    Ok(M_SAFETY * moments.iter().copied().fold(0.0, f64::max))
}

/// Monte Carlo value of `∬|∇W(x−z)|²(f(z) + f_inf(z))f(x)` with `f` the
/// empirical law of `xs` and `f_inf` a grid density.
pub fn interaction_moment_empirical(
    spec: &ModelSpec,
    xs: &[f64],
    f_inf: &crate::grid::DensityGrid,
) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let n = xs.len() as f64;
    let g = f_inf.grid();
    let mut acc = 0.0;
    for &x in xs {
        let mut pair = 0.0;
        for &z in xs {
            let d = spec.grad_w(x - z);
            pair += d * d;
        }
        let mut eq = 0.0;
        for (j, fz) in f_inf.values().iter().enumerate() {
            let d = spec.grad_w(x - g.x(j));
            eq += d * d * fz;
        }
        acc += pair / n + eq * g.h();
    }
    Ok(acc / n)
}

/// Smallest `K` with `l1(t) ≤ K e^{−rate·t}` at every recorded time.
pub fn estimate_k(times: &[f64], l1: &[f64], rate: f64) -> Result<f64> {
    if times.len() != l1.len() || times.is_empty() {
        return Err(Error::domain(
            "times and L¹ series must have equal nonzero length",
        ));
    }
    Ok(times
        .iter()
        .zip(l1)
        .map(|(t, d)| d * (rate * t).exp())
        .fold(0.0, f64::max))
}

/// Least-squares rate `r` in `y ≈ C e^{−rt}` over the samples with `y > floor`.
pub fn fit_decay_rate(times: &[f64], values: &[f64], floor: f64) -> Result<f64> {
    let (ts, logs): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(values)
        .filter(|(_, v)| **v > floor)
        .map(|(t, v)| (*t, v.ln()))
        .unzip();
    if ts.len() < 3 {
        return Err(Error::InsufficientSamples {
            needed: 3,
            got: ts.len(),
        });
    }
    let (slope, _) = crate::stats::linear_fit(&ts, &logs);
    Ok(-slope)
}
