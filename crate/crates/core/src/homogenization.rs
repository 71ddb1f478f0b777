//! Diffusive limit on the torus: the cell problem, the effective diffusion
//! coefficient, and CLT diagnostics for unwrapped paths.
//!
//! With `Y` driven by `−∇Ψ` and invariant density `φ ∝ e^{−βΨ}`, the
//! corrector solves `∇·(φ∇Φ) = −∇φ`, so that `Y + Φ(Y)` is a martingale, and
//! `D = ∫(1 + Φ′)² φ`. In one dimension `Φ′ = −1 + c/φ` with
//! `c = 1/∫φ⁻¹`, giving `D = 1/(∫φ ∫φ⁻¹)`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // inherent once std is linked
use num_traits::Float;

use crate::diagnostics::Warning;
use crate::error::{Error, Result};
use crate::grid::{DensityGrid, Domain, GridSpec};
use crate::simulate::TrajectoryRecord;
use crate::stats;

/// Variance-ratio acceptance band of [`clt_diagnostic`].
pub const VARIANCE_BAND: (f64, f64) = (0.85, 1.15);
/// Asymptotic 5% Kolmogorov–Smirnov threshold for `D_n √n`.
pub const KS_THRESHOLD: f64 = 1.36;
pub const MIN_PATHS: usize = 50;
/// Wrapped mass (proxy) above which a warning is attached.
pub const WRAP_LOSS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct CellSolution {
    pub grid: GridSpec,
    /// Corrector `Φ`, centred so that `∫Φ φ = 0`.
    pub phi: Vec<f64>,
    pub grad_phi: Vec<f64>,
    /// `∫(1 + Φ′)² φ`.
    pub d: f64,
    /// `1/(∫φ ∫φ⁻¹)`.
    pub d_harmonic: f64,
}

/// Solves the one-dimensional cell problem for a positive torus density.
pub fn solve_cell_problem(phi_inf: &DensityGrid) -> Result<CellSolution> {
    let grid = *phi_inf.grid();
    if grid.domain() != Domain::Torus {
        return Err(Error::UnsupportedDomain(
            "the cell problem is posed on the torus",
        ));
    }
    let f = phi_inf.values();
    if let Some(v) = f.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::domain(alloc::format!(
            "invariant density must be positive, found {v}"
        )));
    }
    let n = f.len();
    let h = grid.h();
    let inv_mass: f64 = f.iter().map(|v| 1.0 / v).sum::<f64>() * h;
    let c = 1.0 / inv_mass;
    let grad_phi: Vec<f64> = f.iter().map(|v| -1.0 + c / v).collect();
    let mut phi = vec![0.0; n];
    for i in 1..n {
        phi[i] = phi[i - 1] + 0.5 * h * (grad_phi[i - 1] + grad_phi[i]);
    }
    let mean: f64 = phi.iter().zip(f).map(|(p, v)| p * v).sum::<f64>() * h;
    for p in &mut phi {
        *p -= mean;
    }
    let d = grad_phi
        .iter()
        .zip(f)
        .map(|(g, v)| (1.0 + g) * (1.0 + g) * v)
        .sum::<f64>()
        * h;
    let d_harmonic = 1.0 / (phi_inf.mass() * inv_mass);
    Ok(CellSolution {
        grid,
        phi,
        grad_phi,
        d,
        d_harmonic,
    })
}

/// Grid L² norm of `(φΦ′)′ + φ′` by centred differences, with `φ` averaged
/// onto the cell faces.
pub fn cell_residual(phi_inf: &DensityGrid, sol: &CellSolution) -> Result<f64> {
    if !phi_inf.grid().same_as(&sol.grid) {
        return Err(Error::domain("cell solution lives on a different grid"));
    }
    let f = phi_inf.values();
    let p = &sol.phi;
    let n = f.len();
    let h = sol.grid.h();
    let mut acc = 0.0;
    for i in 0..n {
        let (l, r) = ((i + n - 1) % n, (i + 1) % n);
        let flux_r = 0.5 * (f[i] + f[r]) * (p[r] - p[i]) / h;
        let flux_l = 0.5 * (f[l] + f[i]) * (p[i] - p[l]) / h;
        let res = (flux_r - flux_l) / h + (f[r] - f[l]) / (2.0 * h);
        acc += res * res;
    }
    Ok((acc * h).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CltReport {
    pub n: usize,
    /// Unbiased variance of `X_t/√t`.
    pub sample_var: f64,
    pub sample_var_std_error: f64,
    /// `2β⁻¹D`.
    pub target_var: f64,
    pub var_ratio: f64,
    /// Kolmogorov–Smirnov distance to `N(0, target_var)`.
    pub ks_stat: f64,
    /// `D_n √n`.
    pub ks_scaled: f64,
    pub pass: bool,
    pub warnings: Vec<Warning>,
}

/// Compares `X_t/√t` over independent paths with `N(0, 2β⁻¹D)`.
pub fn clt_diagnostic(terminal: &[f64], t: f64, d: f64, beta: f64) -> Result<CltReport> {
    if terminal.len() < MIN_PATHS {
        return Err(Error::InsufficientSamples {
            needed: MIN_PATHS,
            got: terminal.len(),
        });
    }
    if !(t > 0.0 && d > 0.0 && beta > 0.0) {
        return Err(Error::domain("t, D and β must be positive"));
    }
    let scale = 1.0 / t.sqrt();
    let xs: Vec<f64> = terminal.iter().map(|x| x * scale).collect();
    let n = xs.len();
    let target_var = 2.0 * d / beta;
    let sample_var = stats::variance(&xs);
    let ks_stat = stats::ks_normal(&xs, target_var);
    let ks_scaled = ks_stat * (n as f64).sqrt();
    let var_ratio = sample_var / target_var;
    let mut warnings = Vec::new();
    // slowest Fourier mode of the homogenized diffusion on the unit cell
    if t * 4.0 * PI * PI * d / beta < 10.0 {
        warnings.push(Warning::ShortHorizon { t });
    }
    let pass =
        var_ratio >= VARIANCE_BAND.0 && var_ratio <= VARIANCE_BAND.1 && ks_scaled <= KS_THRESHOLD;
    Ok(CltReport {
        n,
        sample_var,
        sample_var_std_error: stats::variance_std_error(&xs),
        target_var,
        var_ratio,
        ks_stat,
        ks_scaled,
        pass,
        warnings,
    })
}

/// Whether two CLT variance estimates differ by at most `k` combined
/// standard errors.
pub fn variances_agree(a: &CltReport, b: &CltReport, k: f64) -> bool {
    let se = (a.sample_var_std_error.powi(2) + b.sample_var_std_error.powi(2)).sqrt();
    (a.sample_var - b.sample_var).abs() <= k * se
}

/// Diffusively rescaled path `s ↦ ε X_{s/ε²}` at the requested times, by
/// linear interpolation of the record.
pub fn rescaled_path(
    record: &TrajectoryRecord,
    epsilon: f64,
    times: &[f64],
) -> Result<TrajectoryRecord> {
    record.validate()?;
    if record.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: record.len(),
        });
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::domain("ε must be positive"));
    }
    let (t0, t1) = (record.times[0], record.t_final());
    let inv = 1.0 / (epsilon * epsilon);
    let mut states = Vec::with_capacity(times.len());
    let mut k = 0;
    for &s in times {
        let u = s * inv;
        if !(u >= t0 - 1e-12 * t1.abs().max(1.0) && u <= t1 * (1.0 + 1e-12)) {
            return Err(Error::domain(alloc::format!(
                "rescaled time {s} maps to {u}, outside the record [{t0}, {t1}]"
            )));
        }
        if k > 0 && u < record.times[k] {
            k = 0;
        }
        while k + 2 < record.len() && record.times[k + 1] <= u {
            k += 1;
        }
        let (ta, tb) = (record.times[k], record.times[k + 1]);
        let w = ((u - ta) / (tb - ta)).clamp(0.0, 1.0);
        states.push(epsilon * ((1.0 - w) * record.states[k] + w * record.states[k + 1]));
    }
    TrajectoryRecord::from_path(times.to_vec(), states)
}

/// Realized variance `Σ(ΔX)² / (t_end − t_0)`.
pub fn realized_variance(record: &TrajectoryRecord) -> Result<f64> {
    if record.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: record.len(),
        });
    }
    let qv: f64 = record
        .states
        .windows(2)
        .map(|w| (w[1] - w[0]) * (w[1] - w[0]))
        .sum();
    Ok(qv / (record.t_final() - record.times[0]))
}

/// Periodizes a line density onto the `n`-point torus grid,
/// `φ(x) = Σ_k f(x + k)`, by exact cell-overlap remapping. The warning
/// reports the mass in the two boundary cells of the line grid, a proxy for
/// mass beyond the truncated interval.
pub fn wrap_density(f_line: &DensityGrid, n: usize) -> Result<(DensityGrid, Option<Warning>)> {
    let g = *f_line.grid();
    if g.domain() != Domain::Line {
        return Err(Error::domain("wrap_density expects a line density"));
    }
    let torus = GridSpec::torus(n)?;
    let ht = torus.h();
    let h = g.h();
    let mut mass = vec![0.0; n];
    for (j, v) in f_line.values().iter().enumerate() {
        if *v == 0.0 {
            continue;
        }
        let density = *v;
        let mut a = g.x(j) - 0.5 * h;
        let b = a + h;
        let mut cell = (a / ht).floor();
        if (cell + 1.0) * ht <= a {
            cell += 1.0;
        }
        // walk torus cells overlapped by [a, b)
        while a < b {
            let edge = ((cell + 1.0) * ht).min(b);
            let idx = (cell as i64).rem_euclid(n as i64) as usize;
            mass[idx] += density * (edge - a);
            a = edge;
            cell += 1.0;
        }
    }
    let values: Vec<f64> = mass.iter().map(|m| m / ht).collect();
    let vals = f_line.values();
    let lost = (vals[0] + vals[vals.len() - 1]) * h;
    let warning = (lost > WRAP_LOSS_TOL).then_some(Warning::TruncationMassLoss { lost });
    let total: f64 = mass.iter().sum();
    if (total - f_line.mass()).abs() > 1e-10 {
        return Err(Error::invariant(alloc::format!(
            "wrapping changed the mass to {total}"
        )));
    }
    Ok((DensityGrid::from_parts_unchecked(torus, values), warning))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramBin {
    pub left: f64,
    pub right: f64,
    pub count: usize,
    /// `N(0, var)` density at the bin centre.
    pub normal_pdf: f64,
}

/// Histogram of `xs` on `bins` equal bins over `[lo, hi]`; values outside
/// are dropped.
pub fn histogram(xs: &[f64], lo: f64, hi: f64, bins: usize, var: f64) -> Result<Vec<HistogramBin>> {
    if !(hi > lo) || bins == 0 || !(var > 0.0) {
        return Err(Error::domain(
            "histogram needs lo < hi, at least one bin and positive variance",
        ));
    }
    let w = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in xs {
        if x >= lo && x < hi {
            counts[(((x - lo) / w) as usize).min(bins - 1)] += 1;
        } else if x == hi {
            counts[bins - 1] += 1;
        }
    }
    Ok(counts
        .iter()
        .enumerate()
        .map(|(i, &count)| {
            let left = lo + i as f64 * w;
            let c = left + 0.5 * w;
            HistogramBin {
                left,
                right: left + w,
                count,
                normal_pdf: (-0.5 * c * c / var).exp() / (2.0 * PI * var).sqrt(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_density_has_unit_diffusion() {
        let f = DensityGrid::uniform(GridSpec::torus(64).unwrap());
        let s = solve_cell_problem(&f).unwrap();
        assert!(s.phi.iter().all(|p| p.abs() < 1e-15));
        assert!((s.d - 1.0).abs() < 1e-14 && (s.d_harmonic - 1.0).abs() < 1e-14);
    }

    #[test]
    fn line_density_is_rejected() {
        let f = DensityGrid::gaussian(GridSpec::line(4.0, 64).unwrap(), 0.0, 1.0).unwrap();
        assert!(solve_cell_problem(&f).is_err());
    }

    #[test]
    fn histogram_counts_everything_inside() {
        let xs = [-1.0, -0.5, 0.0, 0.5, 1.0, 3.0];
        let h = histogram(&xs, -1.0, 1.0, 4, 1.0).unwrap();
        assert_eq!(h.iter().map(|b| b.count).sum::<usize>(), 5);
        assert_eq!(h[3].count, 2);
    }
}
