use super::monitors::{gauge_constraint_monitor, MonitorRecord};
use super::sources::{point_acceleration, SourceContext};
use super::state::{spatial_derivatives, EvolutionState, PointState, Reduction};
use crate::error::{Error, Result};
use crate::numeric::Scalar;
use crate::tensor::*;
use rayon::prelude::*;

/// Time derivative of the whole state: `(qdot, qddot)` at every grid point.
pub fn rhs_extended<S: Scalar>(state: &EvolutionState<S>, ctx: &SourceContext) -> Result<Vec<PointState<S>>> {
    let spatial = spatial_derivatives(&state.points, state.spacing, state.reduction);
    let t = state.time.to_f64();
    state
        .points
        .par_iter()
        .zip(spatial.par_iter())
        .enumerate()
        .map(|(i, (p, (dx, dxx)))| {
            let point = ctx.point(t, state.coordinate(i));
            let accel = point_acceleration(p, dx, dxx, ctx, &point)?;
            Ok(PointState { q: p.qdot, qdot: accel })
        })
        .collect()
}

/// Ceilings that halt a run; `None` disables a monitor's ceiling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonitorCeilings {
    pub delta: Option<f64>,
    pub harmonic: Option<f64>,
}

impl Default for MonitorCeilings {
    fn default() -> Self {
        Self {
            delta: Some(1e-3),
            harmonic: Some(1e-3),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolutionConfig {
    pub t_end: f64,
    /// Step size of the homogeneous reduction.
    pub dt: f64,
    /// `dt = cfl * spacing` for the plane-symmetric reduction.
    pub cfl: f64,
    /// Emit monitors every `output_stride` steps (and at both ends).
    pub output_stride: usize,
    pub ceilings: MonitorCeilings,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            t_end: 0.9,
            dt: 1e-4,
            cfl: 0.25,
            output_stride: 100,
            ceilings: MonitorCeilings::default(),
        }
    }
}

/// One trajectory row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub monitor: MonitorRecord,
    /// Sup-norms of the field groups, undotted then dotted.
    pub field_norms: [f64; 12],
    /// Largest pre-projection trace of the auxiliary traceless Ricci since the
    /// previous row.
    pub trace_drift: f64,
}

#[derive(Clone, Debug)]
pub struct EvolutionRun<S = f64> {
    pub records: Vec<TrajectoryRecord>,
    pub final_state: EvolutionState<S>,
    pub steps: usize,
    pub dt: f64,
    pub max_trace_drift: f64,
}

/// Signed step and step count for a run.
pub fn step_plan<S: Scalar>(state: &EvolutionState<S>, cfg: &EvolutionConfig) -> Result<(f64, usize)> {
    let span = cfg.t_end - state.time.to_f64();
    let nominal = match state.reduction {
        Reduction::Homogeneous => cfg.dt,
        Reduction::PlaneSymmetric => {
            if !(cfg.cfl > 0.0 && cfg.cfl <= 0.5) {
                return Err(Error::InvalidParameter {
                    key: "cfl".into(),
                    msg: format!("{} outside (0, 0.5]", cfg.cfl),
                });
            }
            cfg.cfl * state.spacing
        }
    };
    if !(nominal > 0.0 && nominal.is_finite()) {
        return Err(Error::InvalidParameter {
            key: "dt".into(),
            msg: "step size must be positive".into(),
        });
    }
    if !span.is_finite() || span == 0.0 {
        return Err(Error::InvalidParameter {
            key: "t_end".into(),
            msg: "empty time span".into(),
        });
    }
    let steps = (span.abs() / nominal - 1e-9).ceil().max(1.0) as usize;
    Ok((span / steps as f64, steps))
}

/// Remove the `g`-trace of the auxiliary traceless Ricci and its time
/// derivative; returns the largest trace removed.
pub fn project_trace<S: Scalar>(state: &mut EvolutionState<S>) -> f64 {
    let eta = minkowski::<S>();
    let quarter = S::frac(1.0, 4.0);
    let mut drift = 0.0f64;
    for p in &mut state.points {
        let tr = contract2(&eta, &p.q.rt);
        let tr_dot = contract2(&eta, &p.qdot.rt);
        let e2 = (p.q.theta + p.q.theta).exp();
        drift = drift.max((tr / e2).to_f64().abs());
        p.q.rt = sub_mat(&p.q.rt, &scale_mat(&eta, tr * quarter));
        p.qdot.rt = sub_mat(&p.qdot.rt, &scale_mat(&eta, tr_dot * quarter));
    }
    drift
}

fn combine<S: Scalar>(base: &[PointState<S>], k: S, inc: &[PointState<S>]) -> Vec<PointState<S>> {
    base.iter().zip(inc).map(|(b, d)| b.axpy(k, d)).collect()
}

/// One classical fourth-order Runge-Kutta step.
pub fn rk4_step<S: Scalar>(state: &EvolutionState<S>, dt: f64, ctx: &SourceContext) -> Result<EvolutionState<S>> {
    let h = S::from_f64(dt);
    let half = h * S::frac(1.0, 2.0);
    let stage = |points: Vec<PointState<S>>, time: S| EvolutionState {
        time,
        points,
        ..state.clone()
    };
    let k1 = rhs_extended(state, ctx)?;
    let s2 = stage(combine(&state.points, half, &k1), state.time + half);
    let k2 = rhs_extended(&s2, ctx)?;
    let s3 = stage(combine(&state.points, half, &k2), state.time + half);
    let k3 = rhs_extended(&s3, ctx)?;
    let s4 = stage(combine(&state.points, h, &k3), state.time + h);
    let k4 = rhs_extended(&s4, ctx)?;
    let sixth = h * S::frac(1.0, 6.0);
    let two = S::from_f64(2.0);
    let points = (0..state.len())
        .map(|i| {
            let sum = k1[i].axpy(two, &k2[i]).axpy(two, &k3[i]).axpy(S::one(), &k4[i]);
            state.points[i].axpy(sixth, &sum)
        })
        .collect();
    Ok(stage(points, state.time + h))
}

fn check_ceilings(rec: &MonitorRecord, ceilings: &MonitorCeilings) -> Result<()> {
    for (name, value, ceiling) in [
        ("delta_norm", rec.delta_norm, ceilings.delta),
        ("f_norm", rec.f_norm, ceilings.harmonic),
    ] {
        if let Some(c) = ceiling {
            if !(value <= c) {
                return Err(Error::Halted {
                    time: rec.time,
                    msg: format!("{name} = {value:e} exceeds ceiling {c:e}"),
                });
            }
        }
    }
    Ok(())
}

/// Method-of-lines evolution with trace projection after every step.
/// `observer` sees the state after each completed step.
pub fn evolve<S: Scalar>(
    initial: EvolutionState<S>,
    ctx: &SourceContext,
    cfg: &EvolutionConfig,
    mut observer: impl FnMut(&EvolutionState<S>),
) -> Result<EvolutionRun<S>> {
    let (dt, steps) = step_plan(&initial, cfg)?;
    let stride = cfg.output_stride.max(1);
    let mut state = initial;
    let mut records = Vec::new();
    let mut drift_since = project_trace(&mut state);
    let mut max_drift = drift_since;
    let emit = |state: &EvolutionState<S>, drift: f64, records: &mut Vec<TrajectoryRecord>| -> Result<()> {
        let monitor = gauge_constraint_monitor(state, ctx)?;
        records.push(TrajectoryRecord {
            monitor,
            field_norms: state.group_norms(),
            trace_drift: drift,
        });
        check_ceilings(&monitor, &cfg.ceilings)
    };
    emit(&state, drift_since, &mut records)?;
    drift_since = 0.0;
    for step in 1..=steps {
        state = rk4_step(&state, dt, ctx)?;
        let drift = project_trace(&mut state);
        drift_since = drift_since.max(drift);
        max_drift = max_drift.max(drift);
        if !state.is_finite() {
            return Err(Error::Halted {
                time: state.time.to_f64(),
                msg: "non-finite state".into(),
            });
        }
        observer(&state);
        if step % stride == 0 || step == steps {
            emit(&state, drift_since, &mut records)?;
            drift_since = 0.0;
        }
    }
    Ok(EvolutionRun {
        records,
        final_state: state,
        steps,
        dt,
        max_trace_drift: max_drift,
    })
}
