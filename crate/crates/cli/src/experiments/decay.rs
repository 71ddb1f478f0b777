//! Entropy decay of a nonlinear/linearized Fokker–Planck pair against the
//! line and torus envelopes.

use mflin_core::bounds::{
    estimate_k, estimate_m, fit_decay_rate, gaussian_lsi_constant, rho_lambda_regime,
    sigma_xi_regime, torus_constants, uniform_lsi_constant_whole, BoundCurve, BoundParams,
    TorusConstants, XiTilde,
};
use mflin_core::equilibrium::{solve_kirkwood_monroe, KmOptions};
use mflin_core::fokker_planck::{evolve_pair_and_track, PairTrack, TrackOptions};
use mflin_core::metrics::{l2_distance, relative_entropy};
use mflin_core::{DensityGrid, GridSpec, Result};
use serde_json::json;

use super::density_csv;
use crate::artifacts::{Artifacts, Csv};
use crate::config::{LineDecaySettings, TorusDecaySettings};

/// Floor below which `L¹` samples are left out of the rate fit.
pub const RATE_FIT_FLOOR: f64 = 1e-10;

fn track_csv(tr: &PairTrack) -> Csv {
    let mut csv = Csv::new(&["t", "H_fg", "I_fg", "H_finf", "L1", "L2"]);
    for k in 0..tr.times.len() {
        csv.row(&[
            &tr.times[k],
            &tr.h_fg[k],
            &tr.i_fg[k],
            &tr.h_finf[k],
            &tr.l1[k],
            &tr.l2[k],
        ]);
    }
    csv
}

fn curve_csv(c: &BoundCurve) -> Csv {
    let mut csv = Csv::new(&["t", "value", "regime_tag"]);
    for (t, v) in c.times.iter().zip(&c.values) {
        csv.row(&[t, v, &c.regime_tag.tag()]);
    }
    csv
}

/// Largest `H/bound` over the recorded times; `≤ 1` means domination.
fn worst_ratio(h: &[f64], bound: &[f64]) -> f64 {
    h.iter().zip(bound).map(|(h, b)| h / b).fold(0.0, f64::max)
}

#[derive(Debug, Clone)]
pub struct LineDecayOutcome {
    pub settings: LineDecaySettings,
    pub f_inf: DensityGrid,
    pub track: PairTrack,
    pub params: BoundParams,
    pub lambda_uniform: f64,
    pub curve: BoundCurve,
    pub worst_ratio: f64,
}

impl LineDecayOutcome {
    pub fn dominated(&self) -> bool {
        self.worst_ratio <= 1.0
    }
}

/// Evolves the pair from Gaussian data on the convex line model. `M` and
/// `K` are measured on the run; `λ0` covers both the initial laws and the
/// Gaussian equilibrium.
pub fn run_line_decay(s: &LineDecaySettings) -> Result<LineDecayOutcome> {
    let spec = s.spec()?;
    let grid = GridSpec::line(s.half_width, s.grid_points)?;
    let f_inf = solve_kirkwood_monroe(&spec, &grid, &KmOptions::default())?.density;
    let f0 = DensityGrid::gaussian(grid, s.f0_mean, s.f0_var)?;
    let g0 = DensityGrid::gaussian(grid, s.g0_mean, s.g0_var)?;
    let opts = TrackOptions {
        t_final: s.t_final,
        dt: None,
        record_every: s.record_every,
    };
    let track = evolve_pair_and_track(&spec, &f0, &g0, &f_inf, &opts)?;
    let m = estimate_m(&track.moment)?;
    let k = estimate_k(&track.times, &track.l1, 0.5 * s.alpha)?;
    let lambda0 =
        gaussian_lsi_constant(s.f0_var.max(s.g0_var)).max(2.0 / (s.beta * (s.alpha + s.gamma)));
    let params = BoundParams::line(s.alpha, s.gamma, lambda0, m, k, track.h_fg[0]);
    let lambda_uniform = uniform_lsi_constant_whole(&params, s.beta)?;
    let curve = BoundCurve::rho_lambda(&params, s.beta, &track.times)?;
    let worst_ratio = worst_ratio(&track.h_fg, &curve.values);
    Ok(LineDecayOutcome {
        settings: s.clone(),
        f_inf,
        track,
        params,
        lambda_uniform,
        curve,
        worst_ratio,
    })
}

impl LineDecayOutcome {
    pub fn artifacts(&self) -> Result<Artifacts> {
        let mut a = Artifacts::new();
        a.add_csv("fp_series.csv", track_csv(&self.track));
        a.add_csv("f_inf.csv", density_csv(&self.f_inf));
        a.add_csv("bound_curve.csv", curve_csv(&self.curve));
        let p = &self.params;
        a.add_json(
            "summary.json",
            &json!({
                "alpha": p.alpha,
                "gamma": p.gamma,
                "lambda0": p.lambda0,
                "Lambda": self.lambda_uniform,
                "M": p.m,
                "K": p.k,
                "H0": p.h0,
                "regime": rho_lambda_regime(p, self.settings.beta)?.tag(),
                "worst_ratio": self.worst_ratio,
                "dominated": self.dominated(),
                "dt": self.track.dt,
                "warnings": self.track.warnings.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
            }),
        );
        Ok(a)
    }
}

#[derive(Debug, Clone)]
pub struct TorusDecayOutcome {
    pub settings: TorusDecaySettings,
    pub f_inf: DensityGrid,
    pub track: PairTrack,
    pub constants: TorusConstants,
    /// `σ_Ξ` curves for the applicable indices `i ∈ {1, 2}`.
    pub curves: Vec<(usize, BoundCurve, f64)>,
    pub l1_rate: f64,
}

impl TorusDecayOutcome {
    pub fn dominated(&self) -> bool {
        self.curves.iter().all(|(_, _, r)| *r <= 1.0)
    }

    /// `min(ζ, η/2)` when both are positive.
    pub fn predicted_rate(&self) -> Option<f64> {
        let k = &self.constants;
        (k.zeta > 0.0 && k.eta > 0.0).then(|| k.zeta.min(0.5 * k.eta))
    }

    pub fn rate_ok(&self) -> Option<bool> {
        self.predicted_rate().map(|r| self.l1_rate >= r)
    }
}

pub fn run_torus_decay(s: &TorusDecaySettings) -> Result<TorusDecayOutcome> {
    let spec = s.spec()?;
    let grid = GridSpec::torus(s.grid_points)?;
    let f_inf = solve_kirkwood_monroe(&spec, &grid, &KmOptions::default())?.density;
    let two_pi = 2.0 * std::f64::consts::PI;
    let f0 = DensityGrid::from_fn(grid, |x| 1.0 + s.f0_amplitude * (two_pi * x).cos())?;
    let g0 = DensityGrid::from_fn(grid, |x| 1.0 + s.g0_amplitude * (two_pi * x).sin())?;
    let opts = TrackOptions {
        t_final: s.t_final,
        dt: None,
        record_every: s.record_every,
    };
    let track = evolve_pair_and_track(&spec, &f0, &g0, &f_inf, &opts)?;
    let h0 = track.h_fg[0];
    let params = BoundParams::torus(
        track.kappa,
        h0,
        l2_distance(&f0, &f_inf)?,
        relative_entropy(&f0, &f_inf)?,
    );
    let constants = torus_constants(&spec, &params)?;
    let mut curves = Vec::new();
    for i in 1..=2 {
        if constants.applicable(i) {
            let c = BoundCurve::sigma_xi(&constants, s.beta, h0, i, &track.times)?;
            let r = worst_ratio(&track.h_fg, &c.values);
            curves.push((i, c, r));
        }
    }
    let l1_rate = fit_decay_rate(&track.times, &track.l1, RATE_FIT_FLOOR)?;
    Ok(TorusDecayOutcome {
        settings: s.clone(),
        f_inf,
        track,
        constants,
        curves,
        l1_rate,
    })
}

pub(crate) fn xi_tilde_json(x: &XiTilde) -> serde_json::Value {
    match x {
        XiTilde::Value(v) => json!({ "applicable": true, "value": v }),
        XiTilde::NotApplicable { a, ratio } => {
            json!({ "applicable": false, "value": null, "a": a, "C_over_a": ratio })
        }
    }
}

pub(crate) fn torus_constants_json(k: &TorusConstants) -> serde_json::Value {
    json!({
        "Gamma": k.big_gamma,
        "lsi_invariant": k.lsi_invariant,
        "zeta": k.zeta,
        "eta": k.eta,
        "c": k.c,
        "a": k.a,
        "C": k.big_c,
        "kappa": k.kappa,
        "Xi": k.xi,
        "Xi_tilde": [xi_tilde_json(&k.xi_tilde[0]), xi_tilde_json(&k.xi_tilde[1])],
        "sup_norms": {
            "V": [k.norms.v.value, k.norms.v.grad, k.norms.v.laplacian],
            "W": [k.norms.w.value, k.norms.w.grad, k.norms.w.laplacian],
        },
    })
}

impl TorusDecayOutcome {
    pub fn artifacts(&self) -> Result<Artifacts> {
        let mut a = Artifacts::new();
        a.add_csv("fp_series.csv", track_csv(&self.track));
        a.add_csv("f_inf.csv", density_csv(&self.f_inf));
        let mut curves = Vec::new();
        for (i, c, r) in &self.curves {
            a.add_csv(&format!("bound_curve_{i}.csv"), curve_csv(c));
            curves.push(json!({
                "i": i,
                "regime": sigma_xi_regime(&self.constants, self.settings.beta, *i)?.tag(),
                "worst_ratio": r,
            }));
        }
        a.add_json(
            "summary.json",
            &json!({
                "constants": torus_constants_json(&self.constants),
                "curves": curves,
                "dominated": self.dominated(),
                "l1_rate": self.l1_rate,
                "predicted_rate": self.predicted_rate(),
                "rate_ok": self.rate_ok(),
                "dt": self.track.dt,
                "warnings": self.track.warnings.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
            }),
        );
        Ok(a)
    }
}
