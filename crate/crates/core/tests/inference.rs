use mflin_core::inference::*;
use mflin_core::simulate::{
    run_realization, Dynamics, InitialLaw, LinearizedDrift, Mode, RealizationOutput, SimConfig,
    TrajectoryRecord,
};
use mflin_core::stats::median;
use mflin_core::{DensityGrid, GridSpec};

fn simulate(tag: ModelTag, n: usize, t_final: f64, dt: f64, seed: u64) -> RealizationOutput {
    let spec = tag.model(1.0, 1.0).unwrap();
    let cfg = SimConfig {
        dt,
        t_final,
        n_particles: n,
        n_realizations: 1,
        seed,
        record_stride: 1,
    };
    run_realization(
        &spec,
        &cfg,
        &Dynamics::ParticleSystem,
        &InitialLaw::Point(1.0),
        0,
        false,
    )
    .unwrap()
}

fn config(tag: ModelTag, out: &RealizationOutput, mode: DriftMode) -> LikelihoodConfig {
    LikelihoodConfig::new(
        tag.model(1.0, 1.0).unwrap(),
        tag.placement(),
        ThetaDomain::new(0.2, 2.5).unwrap(),
        mode,
        out.tagged.clone(),
        Some(out.mean_series.clone()),
    )
    .unwrap()
}

fn line_grid() -> GridSpec {
    GridSpec::line(6.0, 600).unwrap()
}

#[test]
fn linearized_argmax_matches_closed_form() {
    for tag in [
        ModelTag::OuThetaInV,
        ModelTag::OuThetaInW,
        ModelTag::BistableThetaInV,
        ModelTag::BistableThetaInW,
    ] {
        let out = simulate(tag, 20, 20.0, 1e-3, 11);
        let cfg = config(tag, &out, DriftMode::Linearized);
        let mut cache = EquilibriumCache::new(line_grid());
        let num = mle_linearized(&cfg, &mut cache, 1e-10).unwrap();
        let mean = MeanSource::Series(&out.mean_series);
        let (_, tilde) =
            closed_form_estimators(tag, 1.0, &out.tagged, mean, cfg.theta_domain).unwrap();
        assert!(
            (num.theta - tilde).abs() < 1e-6,
            "{}: {} vs {}",
            tag.name(),
            num.theta,
            tilde
        );
        assert!(num.curvature < 0.0);
    }
}

#[test]
fn nonlinear_argmax_matches_closed_form() {
    for (tag, mode) in [
        (
            ModelTag::OuThetaInV,
            DriftMode::NonlinearExactMean { initial_mean: 1.0 },
        ),
        (
            ModelTag::OuThetaInW,
            DriftMode::NonlinearExactMean { initial_mean: 1.0 },
        ),
        (
            ModelTag::BistableThetaInV,
            DriftMode::NonlinearEmpiricalMean,
        ),
        (
            ModelTag::BistableThetaInW,
            DriftMode::NonlinearEmpiricalMean,
        ),
    ] {
        let out = simulate(tag, 20, 20.0, 1e-3, 5);
        let cfg = config(tag, &out, mode);
        let num = mle_nonlinear(&cfg, 1e-10).unwrap();
        let mean = match mode {
            DriftMode::NonlinearExactMean { initial_mean } => MeanSource::Initial(initial_mean),
            _ => MeanSource::Series(&out.mean_series),
        };
        let (hat, _) =
            closed_form_estimators(tag, 1.0, &out.tagged, mean, cfg.theta_domain).unwrap();
        assert!(
            (num.theta - hat).abs() < 1e-6,
            "{}: {} vs {}",
            tag.name(),
            num.theta,
            hat
        );
    }
}

#[test]
fn ou_linearized_objective_is_exactly_quadratic() {
    let out = simulate(ModelTag::OuThetaInV, 10, 5.0, 1e-3, 3);
    let cfg = config(ModelTag::OuThetaInV, &out, DriftMode::Linearized);
    let mut cache = EquilibriumCache::new(line_grid());
    let l = |th: f64, c: &mut EquilibriumCache| loglik_linearized(&cfg, th, c).unwrap();
    let h = 0.1;
    let d2 = |th: f64, c: &mut EquilibriumCache| l(th + h, c) - 2.0 * l(th, c) + l(th - h, c);
    let a = d2(0.6, &mut cache);
    let b = d2(1.3, &mut cache);
    let c = d2(2.0, &mut cache);
    let scale = a.abs();
    assert!(
        (a - b).abs() < 1e-9 * scale && (b - c).abs() < 1e-9 * scale,
        "{a} {b} {c}"
    );
}

#[test]
fn trivial_paths() {
    let spec = ModelTag::OuThetaInV.model(1.0, 1.0).unwrap();
    let dom = ThetaDomain::new(0.2, 2.5).unwrap();
    let single = TrajectoryRecord::from_path(vec![0.0], vec![0.7]).unwrap();
    let cfg = LikelihoodConfig::new(
        spec.clone(),
        Placement::Confining,
        dom,
        DriftMode::Linearized,
        single,
        None,
    )
    .unwrap();
    let mut cache = EquilibriumCache::new(line_grid());
    for th in [0.3, 1.0, 2.2] {
        assert_eq!(loglik_linearized(&cfg, th, &mut cache).unwrap(), 0.0);
    }

    // constant path: only the quadratic term survives
    let n = 101;
    let times: Vec<f64> = (0..n).map(|k| k as f64 * 0.01).collect();
    let flat = TrajectoryRecord::from_path(times, vec![0.5; n]).unwrap();
    let cfg = LikelihoodConfig::new(
        spec,
        Placement::Confining,
        dom,
        DriftMode::Linearized,
        flat,
        None,
    )
    .unwrap();
    for th in [0.3, 1.0, 2.2] {
        let b = (th + 1.0) * 0.5;
        let got = loglik_linearized(&cfg, th, &mut cache).unwrap();
        assert!((got + 0.25 * 1.0 * b * b).abs() < 1e-12, "{got}");
    }
    let best = mle_linearized(&cfg, &mut cache, 1e-10).unwrap();
    assert!((best.theta - 0.2).abs() < 1e-9);
}

#[test]
fn horizon_reuse_matches_direct_evaluation() {
    let out = simulate(ModelTag::BistableThetaInW, 20, 30.0, 1e-3, 8);
    let dom = ThetaDomain::new(0.2, 2.5).unwrap();
    let mean = MeanSource::Series(&out.mean_series);
    let horizons = [5.0, 12.5, 30.0];
    let tr = estimate_over_horizons(
        ModelTag::BistableThetaInW,
        1.0,
        &out.tagged,
        mean,
        &horizons,
        dom,
    )
    .unwrap();
    assert_eq!(tr.convention, "ito-left-point");
    for (i, h) in horizons.iter().enumerate() {
        let n = (h / 1e-3).round() as usize + 1;
        let cut = TrajectoryRecord::from_path(
            out.tagged.times[..n].to_vec(),
            out.tagged.states[..n].to_vec(),
        )
        .unwrap();
        let m = MeanSource::Series(&out.mean_series[..n]);
        let (hat, tilde) =
            closed_form_estimators(ModelTag::BistableThetaInW, 1.0, &cut, m, dom).unwrap();
        assert!((hat - tr.theta_hat[i]).abs() < 1e-12);
        assert!((tilde - tr.theta_tilde[i]).abs() < 1e-12);
    }
    // OU θ in V goes through the root solve on every horizon
    let out = simulate(ModelTag::OuThetaInV, 20, 10.0, 1e-3, 8);
    let one = estimate_over_horizons(
        ModelTag::OuThetaInV,
        1.0,
        &out.tagged,
        MeanSource::Initial(1.0),
        &[10.0],
        dom,
    )
    .unwrap();
    let (hat, _) = closed_form_estimators(
        ModelTag::OuThetaInV,
        1.0,
        &out.tagged,
        MeanSource::Initial(1.0),
        dom,
    )
    .unwrap();
    assert_eq!(one.theta_hat[0], hat);
}

fn linearized_ou_path(t_final: f64, dt: f64, seed: u64) -> TrajectoryRecord {
    let spec = ModelTag::OuThetaInV.model(1.0, 1.0).unwrap();
    let f_inf = DensityGrid::gaussian(line_grid(), 0.0, 0.5).unwrap();
    let dynamics = Dynamics::new(&spec, Mode::Linearized, Some(&f_inf)).unwrap();
    let cfg = SimConfig {
        dt,
        t_final,
        n_particles: 1,
        n_realizations: 1,
        seed,
        record_stride: 1,
    };
    run_realization(&spec, &cfg, &dynamics, &InitialLaw::Point(1.0), 0, false)
        .unwrap()
        .tagged
}

#[test]
fn linearized_estimator_error_shrinks_with_horizon() {
    let dom = ThetaDomain::new(0.0, 5.0).unwrap();
    let horizons = [100.0, 500.0, 1000.0];
    let mut errs = vec![Vec::new(); 3];
    for seed in 0..20 {
        let path = linearized_ou_path(1000.0, 1e-2, 100 + seed);
        let tr = estimate_over_horizons(
            ModelTag::OuThetaInV,
            1.0,
            &path,
            MeanSource::Initial(1.0),
            &horizons,
            dom,
        )
        .unwrap();
        for (e, th) in errs.iter_mut().zip(&tr.theta_tilde) {
            e.push((th - 1.0).abs());
        }
    }
    let med: Vec<f64> = errs.iter().map(|e| median(e)).collect();
    assert!(med[0] > med[1] && med[1] > med[2], "{med:?}");
}

#[test]
fn coarser_sampling_shifts_estimate_by_order_dt() {
    let dom = ThetaDomain::new(0.0, 5.0).unwrap();
    let dt = 1e-3;
    let mut shifts = Vec::new();
    for seed in 0..5 {
        let path = linearized_ou_path(200.0, dt, 40 + seed);
        let coarse = TrajectoryRecord::from_path(
            path.times.iter().step_by(2).copied().collect(),
            path.states.iter().step_by(2).copied().collect(),
        )
        .unwrap();
        let (_, fine) = closed_form_estimators(
            ModelTag::OuThetaInV,
            1.0,
            &path,
            MeanSource::Initial(1.0),
            dom,
        )
        .unwrap();
        let (_, crude) = closed_form_estimators(
            ModelTag::OuThetaInV,
            1.0,
            &coarse,
            MeanSource::Initial(1.0),
            dom,
        )
        .unwrap();
        shifts.push(crude - fine);
    }
    // left-point sums bias θ̃ by about −(θ+1)²Δt/2 per unit of Δt
    let mean_shift = shifts.iter().sum::<f64>() / shifts.len() as f64;
    assert!(mean_shift.abs() < 10.0 * dt, "{shifts:?}");
}

#[test]
fn identifiability_has_a_single_zero() {
    for tag in [
        ModelTag::OuThetaInV,
        ModelTag::BistableThetaInV,
        ModelTag::BistableThetaInW,
    ] {
        let single = TrajectoryRecord::from_path(vec![0.0], vec![0.0]).unwrap();
        let cfg = LikelihoodConfig::new(
            tag.model(1.0, 1.0).unwrap(),
            tag.placement(),
            ThetaDomain::new(0.5, 1.5).unwrap(),
            DriftMode::Linearized,
            single,
            None,
        )
        .unwrap();
        let mut cache = EquilibriumCache::new(GridSpec::line(6.0, 300).unwrap());
        let scan = identifiability_scan(&cfg, 1.0, 201, &mut cache).unwrap();
        let zeros: Vec<f64> = scan
            .iter()
            .filter(|(_, v)| *v < 1e-12)
            .map(|(t, _)| *t)
            .collect();
        assert_eq!(zeros.len(), 1, "{}: {zeros:?}", tag.name());
        assert!((zeros[0] - 1.0).abs() < 1e-12);
    }
}

#[test]
fn linearized_drift_uses_equilibrium_mean() {
    let spec = ModelTag::OuThetaInW.model(1.0, 1.0).unwrap();
    let f = DensityGrid::gaussian(line_grid(), 0.0, 0.5).unwrap();
    let d = LinearizedDrift::new(&spec, &f).unwrap();
    assert!((d.drift(0.7) + 1.4).abs() < 1e-9);
}
