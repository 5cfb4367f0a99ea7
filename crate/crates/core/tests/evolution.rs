use confsemi::background::*;
use confsemi::conformal::ContractionConvention;
use confsemi::constraints::desitter_constraint_solve;
use confsemi::evolution::*;
use confsemi::numeric::{DoubleDouble, Scalar};
use proptest::prelude::*;
use confsemi::quantum_state::{tail_limits, HadamardTail, Params, StateId};
use confsemi::tensor::*;
use confsemi::Error;

fn vacuum_ctx(params: Params) -> SourceContext {
    SourceContext::new(
        BackgroundGeometry::minkowski(),
        params,
        HadamardTail::default(),
        ContractionConvention::Folacci,
    )
    .unwrap()
}

fn desitter_radius(params: &Params) -> f64 {
    desitter_constraint_solve(params).unwrap().alpha_numeric
}

/// `d^k/d eta^k ln(a / eta)` for `k = 0..=4`.
fn log_jet(a: f64, eta: f64) -> [f64; 5] {
    [
        (a / eta).ln(),
        -1.0 / eta,
        1.0 / eta.powi(2),
        -2.0 / eta.powi(3),
        6.0 / eta.powi(4),
    ]
}

fn max_abs(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

#[test]
fn zero_theta_data_gives_background_metric_and_flat_curvature() {
    let ctx = vacuum_ctx(Params {
        cosmological_constant: 0.0,
        ..Params::default()
    });
    let n = 8;
    let zeros = vec![0.0; n];
    let data = build_theta_initial_data(
        [&zeros, &zeros, &zeros, &zeros],
        SliceGrid {
            reduction: Reduction::PlaneSymmetric,
            spacing: 0.5,
            origin: 0.0,
            time: 0.0,
        },
        &ctx,
    )
    .unwrap();
    let eta = minkowski::<f64>();
    for i in 0..n {
        assert_eq!(data.metric_jet(0, i, &eta), eta);
        for k in 1..4 {
            assert_eq!(data.metric_jet(k, i, &eta), zero44());
        }
        let p = &data.state.points[i];
        assert_eq!(p.q, Fields::zero());
        assert_eq!(p.qdot, Fields::zero());
    }
}

#[test]
fn desitter_metric_jet_and_curvature_initialisation() {
    let params = Params::default();
    let ctx = vacuum_ctx(params.clone());
    let a = desitter_radius(&params);
    let eta0 = 1.0;
    let data = desitter_initial_data(a, eta0, &ctx).unwrap();
    let e2 = (a / eta0).powi(2);
    let j = log_jet(a, eta0);
    // successive derivatives of e^(2 theta) = a^2 / eta^2
    let expected = [e2, -2.0 * e2 / eta0, 6.0 * e2 / eta0.powi(2), -24.0 * e2 / eta0.powi(3)];
    let eta = minkowski::<f64>();
    for k in 0..4 {
        let g = data.metric_jet(k, 0, &eta);
        assert!((g[1][1] - expected[k]).abs() < 1e-12 * expected[k].abs(), "k = {k}");
        assert!((g[0][0] + expected[k]).abs() < 1e-12 * expected[k].abs());
    }
    // the second jet written via the slice functions
    let g2 = 2.0 * (2.0 * j[1] * j[1] + j[2]) * e2;
    assert!((g2 - 6.0 / eta0.powi(2) * e2).abs() < 1e-12);
    let p = &data.state.points[0];
    assert!((p.q.r - 12.0 / (a * a)).abs() < 1e-12);
    assert!(max_abs_mat(&p.q.rt) < 1e-12);
    assert!(p.qdot.r.abs() < 1e-12);
    assert!(max_abs(&p.q.vr) < 1e-12);
    assert!(max_abs(&p.qdot.vr) < 1e-10, "{:?}", p.qdot.vr);
}

#[test]
fn minkowski_rhs_vanishes() {
    let ctx = vacuum_ctx(Params {
        cosmological_constant: 0.0,
        ..Params::default()
    });
    let state = EvolutionState {
        time: 0.0,
        spacing: 0.1,
        origin: 0.0,
        reduction: Reduction::PlaneSymmetric,
        points: vec![PointState::zero(); 16],
    };
    for d in rhs_extended(&state, &ctx).unwrap() {
        assert_eq!(d, PointState::zero());
    }
}

#[test]
fn desitter_rhs_matches_exact_trajectory() {
    let params = Params::default();
    let ctx = vacuum_ctx(params.clone());
    let a = desitter_radius(&params);
    for eta in [1.0, 0.95, 0.9, 0.5] {
        let j = log_jet(a, eta);
        let mut state = desitter_initial_data(a, 1.0, &ctx).unwrap().state;
        // overwrite with the exact state at eta
        let p = &mut state.points[0];
        p.q.theta = j[0];
        p.q.v[0] = j[1];
        p.q.w[0][0] = j[2];
        p.qdot.theta = j[1];
        p.qdot.v[0] = j[2];
        p.qdot.w[0][0] = j[3];
        state.time = eta;
        let d = &rhs_extended(&state, &ctx).unwrap()[0];
        assert_eq!(d.q, state.points[0].qdot);
        let mut expected = Fields::zero();
        expected.theta = j[2];
        expected.v[0] = j[3];
        expected.w[0][0] = j[4];
        let got = d.qdot.to_flat();
        let want = expected.to_flat();
        for k in 0..FIELD_COUNT {
            assert!((got[k] - want[k]).abs() < 1e-10, "eta {eta} slot {k}: {} vs {}", got[k], want[k]);
        }
    }
}

fn desitter_cfg(dt: f64) -> EvolutionConfig {
    EvolutionConfig {
        t_end: 0.9,
        dt,
        output_stride: 250,
        ceilings: MonitorCeilings {
            harmonic: None,
            ..MonitorCeilings::default()
        },
        ..EvolutionConfig::default()
    }
}

/// Sup over the run of `|theta - ln(a / eta)|` for a homogeneous de Sitter run.
fn desitter_run<S: Scalar>(dt: f64, ctx: &SourceContext, a: S) -> (f64, EvolutionRun<S>) {
    let data = desitter_initial_data(a, 1.0, ctx).unwrap();
    let mut worst = 0.0f64;
    let run = evolve(data.state, ctx, &desitter_cfg(dt), |s| {
        let exact = (a / s.time).ln();
        worst = worst.max((s.points[0].q.theta - exact).to_f64().abs());
    })
    .unwrap();
    (worst, run)
}

#[test]
fn desitter_run_converges_at_fourth_order() {
    let params = Params::default();
    let ctx = vacuum_ctx(params.clone());
    let a: DoubleDouble = polish_desitter_radius(desitter_radius(&params), &ctx).unwrap();
    let (e1, r1) = desitter_run(1e-3, &ctx, a);
    let (e2, r2) = desitter_run(5e-4, &ctx, a);
    assert_eq!(r1.steps, 100);
    assert!((r1.final_state.time.to_f64() - 0.9).abs() < 1e-15);
    assert!(e1 < 1e-12, "{e1:e}");
    let ratio = e1 / e2;
    assert!((ratio - 16.0).abs() < 3.0, "ratio {ratio}");
    // the auxiliary mismatch converges at the same order
    let d1 = r1.records.iter().map(|r| r.monitor.delta_norm).fold(0.0, f64::max);
    let d2 = r2.records.iter().map(|r| r.monitor.delta_norm).fold(0.0, f64::max);
    assert!((d1 / d2 - 16.0).abs() < 3.0, "{d1:e} {d2:e}");
    assert!(r1.max_trace_drift < 1e-25);
}

#[test]
fn desitter_run_keeps_constraints_at_truncation_level() {
    let params = Params::default();
    let ctx = vacuum_ctx(params.clone());
    let a = desitter_radius(&params);
    let (err, run) = desitter_run(1e-3, &ctx, a);
    assert!(err < 1e-12);
    let first = run.records[0].monitor;
    assert!(first.constraint_norm < 1e-12, "{:e}", first.constraint_norm);
    for r in &run.records {
        let m = r.monitor;
        assert!(m.constraint_norm < 1e-9, "{m:?}");
        assert!(m.trace_residual_norm < 1e-9, "{m:?}");
        assert!(m.box_theta_norm < 1e-9, "{m:?}");
        assert!(m.delta_div_norm < 1e-9, "{m:?}");
        // the conformal chart is not harmonic: F^0 = 2 eta / a^2
        assert!((m.f_norm - 2.0 * m.time / (a * a)).abs() < 1e-10, "{m:?}");
    }
}

#[test]
fn exact_desitter_state_has_vanishing_mismatch() {
    let params = Params::default();
    let ctx = vacuum_ctx(params.clone());
    let a = desitter_radius(&params);
    let state = desitter_initial_data(a, 1.0, &ctx).unwrap().state;
    let m = gauge_constraint_monitor(&state, &ctx).unwrap();
    assert!(m.delta_norm < 1e-10);
    assert!(m.delta_div_norm < 1e-10);
    assert!(m.box_theta_norm < 1e-10);
    assert!(m.constraint_norm < 1e-8 * 9.0);
}

#[test]
fn corrupted_auxiliary_ricci_shows_in_mismatch_exactly() {
    let params = Params::default();
    let ctx = vacuum_ctx(params.clone());
    let a = desitter_radius(&params);
    for delta in [1e-3, -2.5e-6, 0.125] {
        let mut state = desitter_initial_data(a, 1.0, &ctx).unwrap().state;
        state.points[0].q.rt[1][2] += delta;
        state.points[0].q.rt[2][1] += delta;
        let m = gauge_constraint_monitor(&state, &ctx).unwrap();
        assert!((m.delta_norm - delta.abs()).abs() < 1e-15 * (1.0 + delta.abs()), "{delta}: {}", m.delta_norm);
    }
}

#[test]
fn flat_cartesian_chart_is_harmonic() {
    let ctx = vacuum_ctx(Params {
        cosmological_constant: 0.0,
        ..Params::default()
    });
    let state = EvolutionState {
        time: 0.0,
        spacing: 0.3,
        origin: 0.0,
        reduction: Reduction::PlaneSymmetric,
        points: vec![PointState::zero(); 8],
    };
    let m = gauge_constraint_monitor(&state, &ctx).unwrap();
    assert_eq!(m.f_norm, 0.0);
    assert_eq!(m.delta_norm, 0.0);
    assert_eq!(m.constraint_norm, 0.0);
}

#[test]
fn minkowski_is_a_fixed_point_for_ten_thousand_steps() {
    let ctx = vacuum_ctx(Params {
        cosmological_constant: 0.0,
        ..Params::default()
    });
    let initial = EvolutionState {
        time: 0.0,
        spacing: 1.0,
        origin: 0.0,
        reduction: Reduction::Homogeneous,
        points: vec![PointState::zero()],
    };
    let cfg = EvolutionConfig {
        t_end: 1.0,
        dt: 1e-4,
        output_stride: 5000,
        ..EvolutionConfig::default()
    };
    let run = evolve(initial.clone(), &ctx, &cfg, |_| {}).unwrap();
    assert_eq!(run.steps, 10_000);
    for (x, y) in run.final_state.points[0].q.to_flat().iter().zip(initial.points[0].q.to_flat()) {
        assert!((x - y).abs() < 1e-12);
    }
    assert_eq!(run.final_state.points, initial.points);
}

/// de Sitter slice data with `theta_0` perturbed by `eps cos(x)` on `n` points
/// of the periodic interval `[0, 2 pi)`.
fn perturbed_desitter(eps: f64, n: usize, a: f64, ctx: &SourceContext) -> EvolutionState {
    let h = std::f64::consts::TAU / n as f64;
    let j = log_jet(a, 1.0);
    let t0: Vec<f64> = (0..n).map(|i| j[0] + eps * (i as f64 * h).cos()).collect();
    let rest: Vec<Vec<f64>> = (1..4).map(|k| vec![j[k]; n]).collect();
    build_theta_initial_data(
        [&t0, &rest[0], &rest[1], &rest[2]],
        SliceGrid {
            reduction: Reduction::PlaneSymmetric,
            spacing: h,
            origin: 0.0,
            time: 1.0,
        },
        ctx,
    )
    .unwrap()
    .state
}

fn rhs_flat(state: &EvolutionState, ctx: &SourceContext) -> Vec<f64> {
    rhs_extended(state, ctx)
        .unwrap()
        .iter()
        .flat_map(|p| p.q.to_flat().into_iter().chain(p.qdot.to_flat()))
        .collect()
}

#[test]
fn rhs_is_linear_in_small_plane_wave_perturbations() {
    let params = Params::default();
    let ctx = vacuum_ctx(params.clone());
    let a = desitter_radius(&params);
    let n = 16;
    let base = rhs_flat(&perturbed_desitter(0.0, n, a, &ctx), &ctx);
    let nonlinearity = |eps: f64| {
        let d1: Vec<f64> = rhs_flat(&perturbed_desitter(eps, n, a, &ctx), &ctx)
            .iter()
            .zip(&base)
            .map(|(x, y)| x - y)
            .collect();
        let d2: Vec<f64> = rhs_flat(&perturbed_desitter(2.0 * eps, n, a, &ctx), &ctx)
            .iter()
            .zip(&base)
            .map(|(x, y)| x - y)
            .collect();
        let defect: Vec<f64> = d2.iter().zip(&d1).map(|(x, y)| x - 2.0 * y).collect();
        (max_abs(&d1), max_abs(&defect))
    };
    let (lin3, non3) = nonlinearity(1e-3);
    let (_, non4) = nonlinearity(1e-4);
    assert!(lin3 > 1e-4, "perturbation invisible: {lin3:e}");
    let order = (non3 / non4).log10();
    assert!((order - 2.0).abs() < 0.1, "nonlinearity scales as eps^{order}");
    let (lin8, non8) = nonlinearity(1e-8);
    assert!(non8 < 1e-5 * lin8, "{non8:e} vs {lin8:e}");
}

#[test]
fn plane_symmetric_perturbation_evolves_with_small_mismatch() {
    let params = Params::default();
    let ctx = vacuum_ctx(params.clone());
    let a = desitter_radius(&params);
    let state = perturbed_desitter(1e-6, 32, a, &ctx);
    let cfg = EvolutionConfig {
        t_end: 0.95,
        cfl: 0.05,
        output_stride: 10,
        ceilings: MonitorCeilings {
            harmonic: None,
            ..MonitorCeilings::default()
        },
        ..EvolutionConfig::default()
    };
    let run = evolve(state, &ctx, &cfg, |_| {}).unwrap();
    let (dt, steps) = (run.dt, run.steps);
    assert!(dt < 0.0 && dt.abs() <= 0.05 * std::f64::consts::TAU / 32.0);
    assert!((dt * steps as f64 + 0.05).abs() < 1e-14);
    assert_eq!(run.records.len(), 1 + steps.div_ceil(10));
    for r in &run.records {
        assert!(r.monitor.delta_norm < 1e-7, "{:?}", r.monitor);
    }
    // the perturbation survives and stays linear-sized
    let thetas: Vec<f64> = run.final_state.points.iter().map(|p| p.q.theta).collect();
    let spread = thetas.iter().cloned().fold(f64::MIN, f64::max) - thetas.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread > 1e-7 && spread < 1e-5, "{spread:e}");
}

fn theta2_response(eps: f64, ctx: &SourceContext, a: f64) -> Vec<f64> {
    let j = log_jet(a, 1.0);
    let data = build_theta_initial_data(
        [&[j[0]], &[j[1]], &[j[2] + eps], &[j[3]]],
        SliceGrid {
            reduction: Reduction::Homogeneous,
            spacing: 1.0,
            origin: 0.0,
            time: 1.0,
        },
        ctx,
    )
    .unwrap();
    let mut out = Vec::new();
    let mut cfg = desitter_cfg(1e-3);
    cfg.ceilings.delta = None;
    evolve(data.state, ctx, &cfg, |s| out.push(s.points[0].q.theta)).unwrap();
    out
}

#[test]
fn theta2_perturbations_respond_linearly() {
    let params = Params::default();
    let ctx = vacuum_ctx(params.clone());
    let a = desitter_radius(&params);
    let base = theta2_response(0.0, &ctx, a);
    let ks: Vec<f64> = [1e-6, 1e-7, 1e-8]
        .iter()
        .map(|&eps| {
            let dev = theta2_response(eps, &ctx, a)
                .iter()
                .zip(&base)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            dev / eps
        })
        .collect();
    let (lo, hi) = (ks.iter().cloned().fold(f64::MAX, f64::min), ks.iter().cloned().fold(0.0, f64::max));
    assert!(lo > 0.0 && lo.is_finite());
    assert!(hi / lo - 1.0 < 0.05, "{ks:?}");
}

#[test]
fn trace_projection_removes_and_reports_drift() {
    let params = Params::default();
    let ctx = vacuum_ctx(params.clone());
    let a = desitter_radius(&params);
    let mut state = desitter_initial_data(a, 1.0, &ctx).unwrap().state;
    let clean = state.clone();
    let eta = minkowski::<f64>();
    let shift = 3e-4;
    for x in 0..4 {
        state.points[0].q.rt[x][x] += shift * eta[x][x];
        state.points[0].qdot.rt[x][x] -= shift * eta[x][x];
    }
    let e2 = (2.0 * state.points[0].q.theta).exp();
    let drift = project_trace(&mut state);
    assert!((drift - 4.0 * shift / e2).abs() < 1e-14, "{drift:e} {:e}", 4.0 * shift / e2);
    assert!(contract2(&eta, &state.points[0].q.rt).abs() < 1e-18);
    assert!(contract2(&eta, &state.points[0].qdot.rt).abs() < 1e-18);
    assert!(max_abs_mat(&sub_mat(&state.points[0].q.rt, &clean.points[0].q.rt)) < 1e-14);
}

#[test]
fn thermal_tail_sources_only_the_traceless_equation() {
    let params = Params {
        cosmological_constant: 0.0,
        ..Params::default()
    };
    let bg = BackgroundGeometry::minkowski();
    let temp = 0.7;
    let point = ChartPoint::new([0.0; 4]).unwrap();
    let tail = tail_limits(&StateId::Thermal { temperature: temp }, &point, &bg).unwrap();
    let ctx = SourceContext::new(bg, params.clone(), tail, ContractionConvention::Folacci).unwrap();
    let f = Fields::<f64>::zero();
    let raw = [Fields::zero(); 4];
    assert!(scalar_curvature_source(&f, &ctx, &point).unwrap().abs() < 1e-15);
    let b = traceless_source(&f, &raw, &ctx, &point).unwrap();
    let rho = std::f64::consts::PI.powi(2) * temp.powi(4) / 30.0;
    let k = 8.0 * std::f64::consts::PI * params.newton_constant / params.alpha;
    assert!((b[0][0] - k * rho).abs() < 1e-12, "{}", b[0][0]);
    for i in 1..4 {
        assert!((b[i][i] - k * rho / 3.0).abs() < 1e-12);
    }
}

#[test]
fn checkpoint_round_trip_and_format() {
    let params = Params::default();
    let ctx = vacuum_ctx(params.clone());
    let a = desitter_radius(&params);
    let state = perturbed_desitter(1e-3, 8, a, &ctx);
    let mut bytes = Vec::new();
    write_checkpoint(&mut bytes, &state).unwrap();
    assert_eq!(&bytes[..8], CHECKPOINT_MAGIC);
    assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), CHECKPOINT_VERSION);
    assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 8);
    assert_eq!(u32::from_le_bytes(bytes[16..20].try_into().unwrap()), 60);
    assert_eq!(bytes.len(), 48 + 8 * 8 * 60);
    // field-major: the first data block is theta at every point
    let first = f64::from_le_bytes(bytes[48..56].try_into().unwrap());
    let second = f64::from_le_bytes(bytes[56..64].try_into().unwrap());
    assert_eq!(first, state.points[0].q.theta);
    assert_eq!(second, state.points[1].q.theta);
    let back = read_checkpoint(&mut bytes.as_slice()).unwrap();
    assert_eq!(back, state);
    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert!(read_checkpoint(&mut bad.as_slice()).is_err());
    assert!(read_checkpoint(&mut &bytes[..100]).is_err());
}

#[test]
fn trajectory_csv_has_header_and_one_row_per_record() {
    let params = Params::default();
    let ctx = vacuum_ctx(params.clone());
    let a = desitter_radius(&params);
    let mut cfg = desitter_cfg(1e-2);
    cfg.output_stride = 3;
    let run = evolve(desitter_initial_data(a, 1.0, &ctx).unwrap().state, &ctx, &cfg, |_| {}).unwrap();
    let csv = trajectory_csv(&run.records);
    let lines: Vec<&str> = csv.lines().collect();
    let header = trajectory_header();
    assert_eq!(lines[0], header.join(","));
    assert_eq!(lines.len(), 1 + run.records.len());
    assert_eq!(run.records.len(), 1 + 4);
    for l in &lines[1..] {
        assert_eq!(l.split(',').count(), header.len());
        assert!(l.split(',').all(|c| c.parse::<f64>().is_ok()));
    }
}

#[test]
fn invalid_setups_are_rejected() {
    let params = Params::default();
    let bg = build_background(&BackgroundDescriptor::parse("sphere(radius=2)").unwrap()).unwrap();
    let tail = HadamardTail::default();
    let conv = ContractionConvention::Folacci;
    assert!(matches!(SourceContext::new(bg, params.clone(), tail, conv), Err(Error::Unsupported(_))));
    let mink = BackgroundGeometry::minkowski;
    for bad in [
        Params { mass_sq: 0.5, ..params.clone() },
        Params { coupling: 0.0, ..params.clone() },
        Params { alpha: 0.0, ..params.clone() },
        Params { ambiguities: [0.0, 1.0, 0.0, 0.0], ..params.clone() },
    ] {
        assert!(matches!(SourceContext::new(mink(), bad, tail, conv), Err(Error::InvalidParameter { .. })));
    }
    let ctx = vacuum_ctx(params.clone());
    let a = desitter_radius(&params);
    let state = perturbed_desitter(0.0, 8, a, &ctx);
    let cfg = EvolutionConfig { cfl: 0.6, ..EvolutionConfig::default() };
    assert!(matches!(evolve(state.clone(), &ctx, &cfg, |_| {}), Err(Error::InvalidParameter { .. })));
    let cfg = EvolutionConfig { t_end: 1.0, ..EvolutionConfig::default() };
    assert!(evolve(state.clone(), &ctx, &cfg, |_| {}).is_err());
    // the default harmonic ceiling trips immediately in the conformal chart
    let run = evolve(state.clone(), &ctx, &EvolutionConfig::default(), |_| {});
    assert!(matches!(run, Err(Error::Halted { .. })));
    let mut corrupted = state;
    corrupted.points[3].q.rt[1][1] += 0.1;
    let cfg = EvolutionConfig {
        ceilings: MonitorCeilings { harmonic: None, ..MonitorCeilings::default() },
        ..EvolutionConfig::default()
    };
    match evolve(corrupted, &ctx, &cfg, |_| {}) {
        Err(Error::Halted { msg, .. }) => assert!(msg.contains("delta_norm")),
        other => panic!("expected a halt, got {other:?}"),
    }
}

#[test]
fn homogeneous_data_must_have_one_point() {
    let ctx = vacuum_ctx(Params::default());
    let two = vec![0.0, 0.0];
    let r = build_theta_initial_data(
        [&two, &two, &two, &two],
        SliceGrid {
            reduction: Reduction::Homogeneous,
            spacing: 1.0,
            origin: 0.0,
            time: 0.0,
        },
        &ctx,
    );
    assert!(r.is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_storage_round_trips(xs in proptest::collection::vec(-1e3f64..1e3, FIELD_COUNT)) {
        let f = Fields::from_flat(&xs);
        prop_assert_eq!(f.to_flat().to_vec(), xs);
        prop_assert_eq!(f.w, symmetrize(&f.w));
        prop_assert_eq!(f.rt, symmetrize(&f.rt));
    }

    #[test]
    fn axpy_is_componentwise(xs in proptest::collection::vec(-10f64..10.0, 2 * FIELD_COUNT), k in -3f64..3.0) {
        let p = PointState { q: Fields::from_flat(&xs[..FIELD_COUNT]), qdot: Fields::zero() };
        let d = PointState { q: Fields::from_flat(&xs[FIELD_COUNT..]), qdot: Fields::from_flat(&xs[..FIELD_COUNT]) };
        let r = p.axpy(k, &d);
        for i in 0..FIELD_COUNT {
            prop_assert_eq!(r.q.to_flat()[i], xs[i] + k * xs[FIELD_COUNT + i]);
            prop_assert_eq!(r.qdot.to_flat()[i], k * xs[i]);
        }
    }

    #[test]
    fn checkpoints_round_trip_bitwise(xs in proptest::collection::vec(-1e6f64..1e6, 2 * FIELD_COUNT * 3), t in -5f64..5.0) {
        let points = xs
            .chunks(2 * FIELD_COUNT)
            .map(|c| PointState { q: Fields::from_flat(&c[..FIELD_COUNT]), qdot: Fields::from_flat(&c[FIELD_COUNT..]) })
            .collect();
        let state = EvolutionState { time: t, spacing: 0.25, origin: -1.0, reduction: Reduction::PlaneSymmetric, points };
        let mut bytes = Vec::new();
        write_checkpoint(&mut bytes, &state).unwrap();
        prop_assert_eq!(read_checkpoint(&mut bytes.as_slice()).unwrap(), state);
    }
}
