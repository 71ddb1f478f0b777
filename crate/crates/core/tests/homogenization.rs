use mflin_core::equilibrium::{cosine_equilibrium, solve_bessel_selfconsistency};
use mflin_core::homogenization::*;
use mflin_core::simulate::{run_ensemble, InitialLaw, Mode, SimConfig};
use mflin_core::special::bessel_i0;
use mflin_core::{DensityGrid, Domain, GridSpec, ModelSpec, PotentialKind, Warning};

const XI: f64 = 0.5;

fn cosine_spec(beta: f64) -> ModelSpec {
    ModelSpec::new(
        Domain::Torus,
        beta,
        PotentialKind::Cosine(XI),
        PotentialKind::Cosine(1.0),
    )
    .unwrap()
}

#[test]
fn bessel_density_gives_inverse_square_i0() {
    let sol = solve_bessel_selfconsistency(XI, 1.0, 1e-14).unwrap();
    let grid = GridSpec::torus(512).unwrap();
    let cell = solve_cell_problem(&sol.density(&grid).unwrap()).unwrap();
    assert!(
        (cell.d - sol.effective_diffusion()).abs() < 1e-8,
        "D = {}",
        cell.d
    );
    assert!((cell.d - 0.6708824502111743).abs() < 1e-8);
    assert!((cell.d - cell.d_harmonic).abs() < 1e-10);
}

#[test]
fn corrector_is_centred() {
    let grid = GridSpec::torus(128).unwrap();
    let f = cosine_equilibrium(1.3, &grid).unwrap();
    let cell = solve_cell_problem(&f).unwrap();
    let m: f64 = cell
        .phi
        .iter()
        .zip(f.values())
        .map(|(p, v)| p * v)
        .sum::<f64>()
        * grid.h();
    assert!(m.abs() <= 1e-10);
    assert!(cell.d > 0.0);
}

#[test]
fn cell_residual_is_second_order() {
    let res = |n| {
        let f = cosine_equilibrium(1.0, &GridSpec::torus(n).unwrap()).unwrap();
        let cell = solve_cell_problem(&f).unwrap();
        cell_residual(&f, &cell).unwrap()
    };
    let (r64, r128) = (res(64), res(128));
    let ratio = r64 / r128;
    assert!((3.5..4.5).contains(&ratio), "ratio {ratio} ({r64}, {r128})");
}

#[test]
fn diffusion_decreases_with_amplitude() {
    let grid = GridSpec::torus(256).unwrap();
    let mut prev = f64::INFINITY;
    for k in 0..12 {
        let a = 0.25 * k as f64;
        let d = solve_cell_problem(&cosine_equilibrium(a, &grid).unwrap())
            .unwrap()
            .d;
        let i0 = bessel_i0(a);
        assert!((d - 1.0 / (i0 * i0)).abs() < 1e-10);
        assert!(d < prev);
        prev = d;
    }
}

#[test]
fn nonpositive_density_is_rejected() {
    let grid = GridSpec::torus(16).unwrap();
    let mut v = vec![16.0 / 15.0; 16];
    v[3] = 0.0;
    let f = DensityGrid::new(grid, v).unwrap();
    assert!(solve_cell_problem(&f).is_err());
}

fn free_terminal(n: usize, t: f64) -> Vec<f64> {
    let spec =
        ModelSpec::new(Domain::Torus, 1.0, PotentialKind::Zero, PotentialKind::Zero).unwrap();
    let cfg = SimConfig {
        dt: 1e-2,
        t_final: t,
        n_particles: n,
        n_realizations: 1,
        seed: 11,
        record_stride: 100,
    };
    let out = run_ensemble(
        &spec,
        &cfg,
        Mode::ParticleSystem,
        None,
        &InitialLaw::Point(0.0),
        false,
    )
    .unwrap();
    out[0].terminal.positions().to_vec()
}

#[test]
fn free_brownian_motion_passes_clt() {
    let xs = free_terminal(400, 10.0);
    let rep = clt_diagnostic(&xs, 10.0, 1.0, 1.0).unwrap();
    assert!(rep.pass, "{rep:?}");
    assert!(rep.warnings.is_empty());
    assert_eq!(rep.target_var, 2.0);
}

#[test]
fn clt_needs_fifty_paths_and_flags_short_horizons() {
    assert!(clt_diagnostic(&[0.1; 49], 10.0, 1.0, 1.0).is_err());
    let xs = free_terminal(60, 0.2);
    let rep = clt_diagnostic(&xs, 0.2, 1.0, 1.0).unwrap();
    assert!(matches!(rep.warnings[..], [Warning::ShortHorizon { .. }]));
}

#[test]
fn clt_is_invariant_under_path_order() {
    let xs = free_terminal(200, 10.0);
    let mut ys = xs.clone();
    ys.reverse();
    ys.rotate_left(37);
    let (a, b) = (
        clt_diagnostic(&xs, 10.0, 1.0, 1.0).unwrap(),
        clt_diagnostic(&ys, 10.0, 1.0, 1.0).unwrap(),
    );
    assert_eq!(a.ks_stat, b.ks_stat);
    assert!((a.sample_var - b.sample_var).abs() < 1e-12);
    assert_eq!(a.pass, b.pass);
}

/// Displacements of every particle over `[0, t]` for the cosine model.
fn cosine_displacements(mode: Mode, n: usize, reps: usize, t: f64) -> Vec<f64> {
    let spec = cosine_spec(1.0);
    let sol = solve_bessel_selfconsistency(XI, 1.0, 1e-14).unwrap();
    let f_inf = sol.density(&GridSpec::torus(256).unwrap()).unwrap();
    let cfg = SimConfig {
        dt: 1e-2,
        t_final: t,
        n_particles: n,
        n_realizations: reps,
        seed: 3,
        record_stride: (t / 1e-2).round() as usize,
    };
    let out = run_ensemble(&spec, &cfg, mode, Some(&f_inf), &InitialLaw::Uniform, true).unwrap();
    out.iter()
        .flat_map(|r| {
            let (a, b) = (&r.snapshots[0], r.snapshots.last().unwrap());
            a.positions()
                .iter()
                .zip(b.positions())
                .map(|(x0, x1)| x1 - x0)
                .collect::<Vec<_>>()
        })
        .collect()
}

#[test]
fn nonlinear_and_linearized_limits_agree() {
    let d = solve_bessel_selfconsistency(XI, 1.0, 1e-14)
        .unwrap()
        .effective_diffusion();
    let t = 100.0;
    let lin = clt_diagnostic(
        &cosine_displacements(Mode::Linearized, 400, 1, t),
        t,
        d,
        1.0,
    )
    .unwrap();
    let nl = clt_diagnostic(
        &cosine_displacements(Mode::ParticleSystem, 100, 4, t),
        t,
        d,
        1.0,
    )
    .unwrap();
    eprintln!("linearized ratio {} ks {}", lin.var_ratio, lin.ks_scaled);
    eprintln!("nonlinear ratio {} ks {}", nl.var_ratio, nl.ks_scaled);
    assert!(variances_agree(&lin, &nl, 3.0));
    assert!(lin.pass && nl.pass);
}

#[test]
fn rescaled_quadratic_variation_recovers_diffusion() {
    let beta = 1.0;
    let sol = solve_bessel_selfconsistency(XI, beta, 1e-14).unwrap();
    let d = sol.effective_diffusion();
    let f_inf = sol.density(&GridSpec::torus(256).unwrap()).unwrap();
    let eps: f64 = 0.05;
    let cfg = SimConfig {
        dt: 1e-2,
        t_final: 1.0 / (eps * eps),
        n_particles: 1,
        n_realizations: 10,
        seed: 5,
        record_stride: 10,
    };
    let out = run_ensemble(
        &cosine_spec(beta),
        &cfg,
        Mode::Linearized,
        Some(&f_inf),
        &InitialLaw::Uniform,
        false,
    )
    .unwrap();
    let times: Vec<f64> = (0..=200).map(|k| k as f64 / 200.0).collect();
    let qv: f64 = out
        .iter()
        .map(|r| realized_variance(&rescaled_path(&r.tagged, eps, &times).unwrap()).unwrap())
        .sum::<f64>()
        / out.len() as f64;
    let target = 2.0 * d / beta;
    assert!((qv / target - 1.0).abs() < 0.2, "qv {qv} vs {target}");
}

#[test]
fn rescaling_identities() {
    let times: Vec<f64> = (0..=100).map(|k| 0.1 * k as f64).collect();
    let states: Vec<f64> = times.iter().map(|t| (3.0 * t).sin() + t).collect();
    let rec = mflin_core::simulate::TrajectoryRecord::from_path(times.clone(), states).unwrap();
    let same = rescaled_path(&rec, 1.0, &times).unwrap();
    for (a, b) in same.states.iter().zip(&rec.states) {
        assert!((a - b).abs() < 1e-12);
    }
    let t = 10.0_f64;
    let at_one = rescaled_path(&rec, 1.0 / t.sqrt(), &[1.0]).unwrap();
    assert!((at_one.states[0] - rec.last_state().unwrap() / t.sqrt()).abs() < 1e-12);
    assert!(rescaled_path(&rec, 0.5, &[3.0]).is_err());
}

#[test]
fn wrap_of_one_period_is_identity() {
    let line = GridSpec::line(2.0, 4 * 32).unwrap();
    let f = DensityGrid::from_fn(line, |x| {
        if (0.0..1.0).contains(&x) {
            2.0 + (6.0 * x).sin()
        } else {
            0.0
        }
    })
    .unwrap();
    let (w, warn) = wrap_density(&f, 32).unwrap();
    assert!(warn.is_none());
    let offset = 2 * 32;
    for (i, v) in w.values().iter().enumerate() {
        assert!((v - f.values()[offset + i]).abs() < 1e-12);
    }
}

#[test]
fn wide_gaussian_wraps_to_uniform() {
    let sigma: f64 = 5.0;
    let line = GridSpec::line(40.0, 80 * 64).unwrap();
    let f = DensityGrid::gaussian(line, 0.0, sigma * sigma).unwrap();
    let (w, _) = wrap_density(&f, 64).unwrap();
    // direct summation over shifts
    let oracle = |x: f64| -> f64 {
        (-60..=60)
            .map(|k| {
                let z = x + k as f64;
                (-0.5 * z * z / (sigma * sigma)).exp()
                    / (sigma * (2.0 * std::f64::consts::PI).sqrt())
            })
            .sum()
    };
    let grid = *w.grid();
    for (i, v) in w.values().iter().enumerate() {
        assert!((v - 1.0).abs() <= 1e-3);
        assert!((v - oracle(grid.x(i))).abs() <= 1e-3);
    }
    assert!((w.mass() - f.mass()).abs() < 1e-10);
}

#[test]
fn misaligned_wrap_preserves_mass_and_warns_on_truncation() {
    let line = GridSpec::line(1.3, 97).unwrap();
    let f = DensityGrid::gaussian(line, 0.2, 0.5).unwrap();
    let (w, warn) = wrap_density(&f, 40).unwrap();
    assert!((w.mass() - f.mass()).abs() < 1e-10);
    assert!(matches!(warn, Some(Warning::TruncationMassLoss { .. })));
}

#[test]
fn histogram_tracks_normal_density() {
    let xs = free_terminal(400, 10.0);
    let scaled: Vec<f64> = xs.iter().map(|x| x / 10f64.sqrt()).collect();
    let bins = histogram(&scaled, -5.0, 5.0, 20, 2.0).unwrap();
    let n: usize = bins.iter().map(|b| b.count).sum();
    assert!(n >= 398);
    let peak = bins
        .iter()
        .max_by(|a, b| a.normal_pdf.total_cmp(&b.normal_pdf))
        .unwrap();
    assert!(peak.left < 0.5 && peak.right > -0.5);
}
