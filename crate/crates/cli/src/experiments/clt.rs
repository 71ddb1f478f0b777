//! Central limit diagnostics for the cosine model on the torus, for the
//! particle system and for the linearized process.

use mflin_core::equilibrium::{solve_bessel_selfconsistency, solve_kirkwood_monroe, KmOptions};
use mflin_core::homogenization::{
    clt_diagnostic, histogram, solve_cell_problem, variances_agree, CltReport, HistogramBin,
};
use mflin_core::simulate::{
    run_realization, Dynamics, InitialLaw, Mode, ParticleEnsemble, SimConfig, TAGGED,
};
use mflin_core::{GridSpec, Result};
use rayon::prelude::*;
use serde_json::json;

use crate::artifacts::{Artifacts, Csv, FrameFile};
use crate::config::CltSettings;

/// Combined standard errors allowed between the two variance estimates.
pub const AGREEMENT_SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct CltOutcome {
    pub settings: CltSettings,
    pub a: f64,
    pub bessel_residual: f64,
    /// `sup |f_KM − e^{A cos}/Z|`.
    pub km_sup_error: f64,
    pub d_cell: f64,
    pub d_harmonic: f64,
    /// `I₀(A)⁻²`.
    pub d_bessel: f64,
    /// `X_t/√t` of the tagged particle, per realization.
    pub x_scaled: Vec<f64>,
    /// `Y_t/√t`, per realization.
    pub y_scaled: Vec<f64>,
    pub report_x: CltReport,
    pub report_y: CltReport,
    pub agree: bool,
    pub snapshots: Vec<ParticleEnsemble>,
}

/// Runs both processes from `δ_0`. The linearized process of realization
/// `r` uses the Brownian stream of the tagged particle of realization `r`,
/// so each `(X, Y)` pair is synchronously coupled.
pub fn run_clt(s: &CltSettings, seed: u64) -> Result<CltOutcome> {
    let spec = s.spec()?;
    let bessel = solve_bessel_selfconsistency(s.xi, s.beta, 1e-15)?;
    let grid = GridSpec::torus(s.grid_points)?;
    let f_inf = solve_kirkwood_monroe(&spec, &grid, &KmOptions::default())?.density;
    let exact = bessel.density(&grid)?;
    let km_sup_error = f_inf
        .values()
        .iter()
        .zip(exact.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let cell = solve_cell_problem(&f_inf)?;
    let d_bessel = bessel.effective_diffusion();

    let n_steps = SimConfig {
        dt: s.dt,
        t_final: s.t_final,
        n_particles: 1,
        n_realizations: 1,
        seed,
        record_stride: 1,
    }
    .n_steps();
    let stride = s.snapshot_stride.unwrap_or(n_steps).min(n_steps);
    let cfg_x = SimConfig {
        dt: s.dt,
        t_final: s.t_final,
        n_particles: s.n_particles,
        n_realizations: s.n_realizations,
        seed,
        record_stride: stride,
    };
    let cfg_y = SimConfig {
        n_particles: 1,
        record_stride: n_steps,
        ..cfg_x.clone()
    };
    let linearized = Dynamics::new(&spec, Mode::Linearized, Some(&f_inf))?;
    let start = InitialLaw::Point(0.0);
    let t = cfg_x.n_steps() as f64 * s.dt;
    let scale = 1.0 / t.sqrt();
    let runs = (0..s.n_realizations as u64)
        .into_par_iter()
        .map(|r| {
            let want = s.snapshot_stride.is_some() && r == 0;
            let x = run_realization(&spec, &cfg_x, &Dynamics::ParticleSystem, &start, r, want)?;
            let y = run_realization(&spec, &cfg_y, &linearized, &start, r, false)?;
            Ok((
                x.terminal.positions()[TAGGED] * scale,
                y.terminal.positions()[TAGGED] * scale,
                x.snapshots,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut snapshots = Vec::new();
    let (mut x_scaled, mut y_scaled) = (Vec::new(), Vec::new());
    for (x, y, snaps) in runs {
        x_scaled.push(x);
        y_scaled.push(y);
        if !snaps.is_empty() {
            snapshots = snaps;
        }
    }
    // the diagnostic rescales by 1/√t itself
    let unscaled = |v: &[f64]| v.iter().map(|z| z / scale).collect::<Vec<_>>();
    let report_x = clt_diagnostic(&unscaled(&x_scaled), t, d_bessel, s.beta)?;
    let report_y = clt_diagnostic(&unscaled(&y_scaled), t, d_bessel, s.beta)?;
    let agree = variances_agree(&report_x, &report_y, AGREEMENT_SIGMAS);
    Ok(CltOutcome {
        settings: s.clone(),
        a: bessel.a,
        bessel_residual: bessel.residual,
        km_sup_error,
        d_cell: cell.d,
        d_harmonic: cell.d_harmonic,
        d_bessel,
        x_scaled,
        y_scaled,
        report_x,
        report_y,
        agree,
        snapshots,
    })
}

fn report_json(r: &CltReport) -> serde_json::Value {
    json!({
        "n": r.n,
        "sample_var": r.sample_var,
        "sample_var_std_error": r.sample_var_std_error,
        "target_var": r.target_var,
        "var_ratio": r.var_ratio,
        "ks_stat": r.ks_stat,
        "ks_scaled": r.ks_scaled,
        "pass": r.pass,
        "warnings": r.warnings.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
    })
}

fn histogram_csv(bins: &[HistogramBin]) -> Csv {
    let mut csv = Csv::new(&["bin_left", "bin_right", "count", "normal_pdf_at_center"]);
    for b in bins {
        csv.row(&[&b.left, &b.right, &b.count, &b.normal_pdf]);
    }
    csv
}

impl CltOutcome {
    pub fn target_var(&self) -> f64 {
        2.0 * self.d_bessel / self.settings.beta
    }

    pub fn artifacts(&self) -> Result<Artifacts> {
        let mut a = Artifacts::new();
        let var = self.target_var();
        let half = 5.0 * var.sqrt();
        let bins = self.settings.bins;
        a.add_csv(
            "histogram.csv",
            histogram_csv(&histogram(&self.x_scaled, -half, half, bins, var)?),
        );
        a.add_csv(
            "histogram_linearized.csv",
            histogram_csv(&histogram(&self.y_scaled, -half, half, bins, var)?),
        );
        let mut csv = Csv::new(&["realization", "x_scaled", "y_scaled"]);
        for (r, (x, y)) in self.x_scaled.iter().zip(&self.y_scaled).enumerate() {
            csv.row(&[&r, x, y]);
        }
        a.add_csv("terminal.csv", csv);
        a.add_json(
            "D_value.json",
            &json!({
                "xi": self.settings.xi,
                "beta": self.settings.beta,
                "A": self.a,
                "bessel_residual": self.bessel_residual,
                "km_sup_error": self.km_sup_error,
                "D": self.d_cell,
                "D_harmonic": self.d_harmonic,
                "D_bessel": self.d_bessel,
                "target_var": var,
            }),
        );
        a.add_json(
            "clt_summary.json",
            &json!({
                "nonlinear": report_json(&self.report_x),
                "linearized": report_json(&self.report_y),
                "variances_agree": self.agree,
                "agreement_sigmas": AGREEMENT_SIGMAS,
            }),
        );
        if !self.snapshots.is_empty() {
            let mut csv = Csv::new(&["realization", "time", "particle_index", "position"]);
            for snap in &self.snapshots {
                for (i, x) in snap.positions().iter().enumerate() {
                    csv.row(&[&snap.realization(), &snap.time(), &i, x]);
                }
            }
            a.add_csv("snapshots.csv", csv);
            let frames = FrameFile {
                n: self.settings.n_particles as u32,
                dt: self.settings.dt,
                frames: self
                    .snapshots
                    .iter()
                    .map(|s| (s.time(), s.positions().to_vec()))
                    .collect(),
            };
            a.add("snapshots.mflf", frames.encode());
        }
        Ok(a)
    }
}
