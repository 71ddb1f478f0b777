use mflin_core::equilibrium::{solve_kirkwood_monroe, stationary_residual, KmOptions};
use mflin_core::fokker_planck::{
    evolve_pair_and_track, step_fp, DriftMode, FpSolver, PdeState, TrackOptions,
};
use mflin_core::metrics::relative_entropy;
use mflin_core::stats::linear_fit;
use mflin_core::{DensityGrid, Domain, GridSpec, ModelSpec, PotentialKind};

fn ou(beta: f64) -> ModelSpec {
    ModelSpec::new(
        Domain::Line,
        beta,
        PotentialKind::Quadratic(1.0),
        PotentialKind::Zero,
    )
    .unwrap()
}

fn cosine_torus(beta: f64, a: f64, b: f64) -> ModelSpec {
    ModelSpec::new(
        Domain::Torus,
        beta,
        PotentialKind::Cosine(a),
        PotentialKind::Cosine(b),
    )
    .unwrap()
}

fn run(solver: &FpSolver, mut s: PdeState, t_final: f64, dt: f64) -> PdeState {
    let n = (t_final / dt).round() as usize;
    for _ in 0..n {
        s = solver.step(&s, dt).unwrap().0;
    }
    s
}

#[test]
fn ou_variance_relaxes_exactly() {
    let spec = ou(1.0);
    let grid = GridSpec::line(8.0, 800).unwrap();
    let solver = FpSolver::new(&spec, &grid, &DriftMode::Nonlinear).unwrap();
    for sigma0 in [0.25, 2.5] {
        let mut s = PdeState {
            density: DensityGrid::gaussian(grid, 0.0, sigma0).unwrap(),
            time: 0.0,
        };
        let dt = 0.5 * solver.stable_dt(&s.density).unwrap();
        let mut t = 0.0;
        for checkpoint in [0.25, 0.5, 1.0] {
            s = run(&solver, s, checkpoint - t, dt);
            t = checkpoint;
            let exact = 1.0 + (sigma0 - 1.0) * (-2.0 * s.time).exp();
            let got = s.density.variance();
            assert!(
                (got - exact).abs() < 1e-3,
                "σ0²={sigma0} t={}: {got} vs {exact}",
                s.time
            );
        }
    }
}

#[test]
fn interacting_gaussian_relaxes_at_combined_rate() {
    // V = x²/2, W = b x²/2: the mean is frozen and the variance relaxes at
    // rate 2(1+b) to 1/(β(1+b)).
    let b = 0.5;
    let spec = ModelSpec::new(
        Domain::Line,
        1.0,
        PotentialKind::Quadratic(1.0),
        PotentialKind::Quadratic(b),
    )
    .unwrap();
    let grid = GridSpec::line(8.0, 800).unwrap();
    let solver = FpSolver::new(&spec, &grid, &DriftMode::Nonlinear).unwrap();
    let s0 = PdeState {
        density: DensityGrid::gaussian(grid, 0.0, 2.0).unwrap(),
        time: 0.0,
    };
    let dt = 0.5 * solver.stable_dt(&s0.density).unwrap();
    let s = run(&solver, s0, 0.5, dt);
    let inf = 1.0 / (1.0 + b);
    let exact = inf + (2.0 - inf) * (-2.0 * (1.0 + b) * s.time).exp();
    assert!((s.density.variance() - exact).abs() < 1e-3);
    assert!(s.density.mean().abs() < 1e-10);
}

#[test]
fn equilibrium_is_stationary_in_both_modes() {
    for spec in [
        cosine_torus(1.0, 0.5, 0.3),
        ModelSpec::new(
            Domain::Line,
            1.0,
            PotentialKind::Bistable(1.0),
            PotentialKind::Quadratic(0.5),
        )
        .unwrap(),
    ] {
        let grid = match spec.domain() {
            Domain::Torus => GridSpec::torus(64).unwrap(),
            Domain::Line => GridSpec::line(4.0, 160).unwrap(),
        };
        let f_inf = solve_kirkwood_monroe(&spec, &grid, &KmOptions::default())
            .unwrap()
            .density;
        for mode in [DriftMode::Nonlinear, DriftMode::Linearized(f_inf.clone())] {
            let solver = FpSolver::new(&spec, &grid, &mode).unwrap();
            let s0 = PdeState {
                density: f_inf.clone(),
                time: 0.0,
            };
            let dt = 0.5 * solver.stable_dt(&f_inf).unwrap();
            let s = run(&solver, s0, 1.0, dt);
            let err = s
                .density
                .values()
                .iter()
                .zip(f_inf.values())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(err <= 1e-6, "{err}");
        }
    }
}

#[test]
fn step_fp_matches_solver_step() {
    let spec = cosine_torus(2.0, 0.5, 1.0);
    let grid = GridSpec::torus(40).unwrap();
    let f =
        DensityGrid::from_fn(grid, |x| 1.0 + 0.3 * (2.0 * std::f64::consts::PI * x).sin()).unwrap();
    let s = PdeState {
        density: f,
        time: 0.0,
    };
    let solver = FpSolver::new(&spec, &grid, &DriftMode::Nonlinear).unwrap();
    let dt = 0.5 * solver.stable_dt(&s.density).unwrap();
    let a = step_fp(&spec, &s, &DriftMode::Nonlinear, dt).unwrap();
    let b = solver.step(&s, dt).unwrap().0;
    assert_eq!(a, b);
}

#[test]
fn entropy_decreases_without_interaction() {
    let spec = ModelSpec::new(
        Domain::Torus,
        1.0,
        PotentialKind::Cosine(0.7),
        PotentialKind::Zero,
    )
    .unwrap();
    let grid = GridSpec::torus(64).unwrap();
    let f_inf = solve_kirkwood_monroe(&spec, &grid, &KmOptions::default())
        .unwrap()
        .density;
    let solver = FpSolver::new(&spec, &grid, &DriftMode::Nonlinear).unwrap();
    let mut s = PdeState {
        density: DensityGrid::gaussian(grid, 0.3, 0.01).unwrap(),
        time: 0.0,
    };
    let dt = 0.5 * solver.stable_dt(&s.density).unwrap();
    let mut prev = relative_entropy(&s.density, &f_inf).unwrap();
    for _ in 0..2000 {
        s = solver.step(&s, dt).unwrap().0;
        let h = relative_entropy(&s.density, &f_inf).unwrap();
        assert!(h <= prev + 1e-14);
        prev = h;
    }
}

#[test]
fn stationary_residual_shrinks_quadratically() {
    let spec = cosine_torus(1.0, 0.5, 0.5);
    let relaxed = |n: usize| {
        let grid = GridSpec::torus(n).unwrap();
        let solver = FpSolver::new(&spec, &grid, &DriftMode::Nonlinear).unwrap();
        let s0 = PdeState {
            density: DensityGrid::uniform(grid),
            time: 0.0,
        };
        let dt = 0.5 * solver.stable_dt(&s0.density).unwrap();
        let s = run(&solver, s0, 4.0, dt);
        stationary_residual(&spec, &s.density).unwrap()
    };
    let (r1, r2) = (relaxed(32), relaxed(64));
    let ratio = r1 / r2;
    assert!((3.0..5.0).contains(&ratio), "ratio {ratio} ({r1} → {r2})");
}

#[test]
fn pair_of_equilibria_has_no_divergence() {
    let spec = cosine_torus(1.0, 0.5, 0.3);
    let grid = GridSpec::torus(48).unwrap();
    let f_inf = solve_kirkwood_monroe(&spec, &grid, &KmOptions::default())
        .unwrap()
        .density;
    let opts = TrackOptions {
        t_final: 0.5,
        dt: None,
        record_every: 50,
    };
    let tr = evolve_pair_and_track(&spec, &f_inf, &f_inf, &f_inf, &opts).unwrap();
    for series in [&tr.h_fg, &tr.i_fg, &tr.h_finf, &tr.l1, &tr.l2] {
        assert!(series.iter().all(|v| v.abs() <= 1e-10), "{series:?}");
    }
    assert_eq!(tr.times.len(), tr.h_fg.len());
    assert!(tr.kappa >= 1.0);
}

#[test]
fn cosine_model_entropy_decays_exponentially() {
    let spec = cosine_torus(1.0, 0.5, 0.3);
    let grid = GridSpec::torus(48).unwrap();
    let f_inf = solve_kirkwood_monroe(&spec, &grid, &KmOptions::default())
        .unwrap()
        .density;
    let f0 =
        DensityGrid::from_fn(grid, |x| 1.0 + 0.5 * (2.0 * std::f64::consts::PI * x).cos()).unwrap();
    let opts = TrackOptions {
        t_final: 0.25,
        dt: None,
        record_every: 20,
    };
    let tr = evolve_pair_and_track(&spec, &f0, &f0, &f_inf, &opts).unwrap();
    let tail = tr.times.len() / 2;
    let logs: Vec<f64> = tr.h_finf[tail..].iter().map(|h| h.ln()).collect();
    let (slope, _) = linear_fit(&tr.times[tail..], &logs);
    assert!(slope < 0.0, "slope {slope}");
    assert!(tr.h_fg.iter().all(|h| *h >= 0.0));
}

#[test]
fn nonpositive_initial_density_is_rejected() {
    let spec = cosine_torus(1.0, 0.5, 0.3);
    let grid = GridSpec::torus(16).unwrap();
    let mut v = vec![1.0; 16];
    v[3] = 0.0;
    let f0 = DensityGrid::from_unnormalized(grid, v).unwrap();
    let u = DensityGrid::uniform(grid);
    let opts = TrackOptions {
        t_final: 0.1,
        dt: None,
        record_every: 1,
    };
    assert!(evolve_pair_and_track(&spec, &f0, &u, &u, &opts).is_err());
}

proptest::proptest! {
    #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]

    #[test]
    fn each_step_conserves_mass(
        a in 0.0..0.9f64,
        phase in 0.0..1.0f64,
        xi in 0.0..1.5f64,
        torus in proptest::bool::ANY,
    ) {
        let (spec, grid) = if torus {
            let s = ModelSpec::new(
                Domain::Torus,
                1.0,
                PotentialKind::Cosine(xi),
                PotentialKind::Cosine(1.0),
            )
            .unwrap();
            (s, GridSpec::torus(64).unwrap())
        } else {
            let s = ModelSpec::new(
                Domain::Line,
                1.0,
                PotentialKind::Bistable(xi + 0.1),
                PotentialKind::Quadratic(0.5),
            )
            .unwrap();
            (s, GridSpec::line(4.0, 128).unwrap())
        };
        let two_pi = 2.0 * std::f64::consts::PI;
        let f = DensityGrid::from_fn(grid, |x| {
            let bump = (-x * x).exp();
            bump * (1.0 + a * (two_pi * (x - phase)).cos())
        })
        .unwrap();
        let solver = FpSolver::new(&spec, &grid, &DriftMode::Nonlinear).unwrap();
        let dt = 0.5 * solver.stable_dt(&f).unwrap();
        let mut state = PdeState { density: f, time: 0.0 };
        for _ in 0..20 {
            let before = state.density.mass();
            state = solver.step(&state, dt).unwrap().0;
            proptest::prop_assert!((state.density.mass() - before).abs() <= 1e-12);
        }
    }
}
