use super::sources::{directional, jet_of, point_acceleration, seeded, SourceContext};
use super::state::{spatial_derivatives, EvolutionState, Fields, PointState};
use crate::background::ChartPoint;
use crate::conformal::{box_theta_residual, christoffel_difference_with, conformal_riemann};
use crate::constraints::{constraint_residuals, ConstraintResiduals, ThetaJet4};
use crate::error::Result;
use crate::numeric::Scalar;
use crate::tensor::*;

/// Gauge and auxiliary-constraint diagnostics; all entries are grid sup-norms.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct MonitorRecord {
    pub time: f64,
    /// Harmonic potential `F^mu` of the physical metric.
    pub f_norm: f64,
    /// Mismatch `Delta_ab` between auxiliary and true curvature.
    pub delta_norm: f64,
    /// Physical divergence `Delta_a^b_;b`.
    pub delta_div_norm: f64,
    pub box_theta_norm: f64,
    /// Normal projections of the field equations.
    pub constraint_norm: f64,
    pub trace_residual_norm: f64,
}

impl MonitorRecord {
    pub const COLUMNS: [&'static str; 7] = [
        "time",
        "f_norm",
        "delta_norm",
        "delta_div_norm",
        "box_theta_norm",
        "constraint_norm",
        "trace_residual_norm",
    ];

    pub fn values(&self) -> [f64; 7] {
        [
            self.time,
            self.f_norm,
            self.delta_norm,
            self.delta_div_norm,
            self.box_theta_norm,
            self.constraint_norm,
            self.trace_residual_norm,
        ]
    }
}

/// `F^mu = -(1/2) e^(-4 theta) g^ab g^mu c (d_a g_bc + d_b g_ac - d_c g_ab)` for
/// `g = e^(2 theta) g_bg` with constant background components.
pub fn harmonic_potential<S: Scalar>(f: &Fields<S>, inv_bg: &Mat4<S>, g_bg: &Mat4<S>) -> Vec4<S> {
    let e2 = (f.theta + f.theta).exp();
    let dg = |a: usize, b: usize, c: usize| (e2 * f.v[a] * g_bg[b][c]).scale(2.0);
    let mut out = zero4::<S>();
    for mu in 0..4 {
        let mut acc = S::zero();
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    acc += inv_bg[a][b] * inv_bg[mu][c] * (dg(a, b, c) + dg(b, a, c) - dg(c, a, b));
                }
            }
        }
        out[mu] = -acc * S::frac(1.0, 2.0) / (e2 * e2);
    }
    out
}

/// `R_ab - R g_ab / 2 - rt_ab + r g_ab / 4` from the true curvature of the jet.
pub fn auxiliary_mismatch<S: Scalar>(f: &Fields<S>, ctx: &SourceContext, point: &ChartPoint) -> Result<Mat4<S>> {
    let c = conformal_riemann(&jet_of(f), &ctx.bg, point, ctx.convention)?;
    let half = S::frac(1.0, 2.0);
    let quarter = S::frac(1.0, 4.0);
    Ok(std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            c.ricci[a][b] - half * c.scalar * c.metric[a][b] - f.rt[a][b] + quarter * c.metric[a][b] * f.r
        })
    }))
}

fn mismatch_divergence(p: &PointState<f64>, dx: &PointState<f64>, ctx: &SourceContext, point: &ChartPoint) -> Result<Vec4<f64>> {
    let f = &p.q;
    let delta = auxiliary_mismatch(f, ctx, point)?;
    let mut d_delta = zero444::<f64>();
    for c in 0..4 {
        let raw = directional(p, dx, c);
        let lifted = seeded(f, &raw, c);
        let m = auxiliary_mismatch(&lifted, ctx, point)?;
        d_delta[c] = map_mat(&m, |x| x.du);
    }
    let g_bg = ctx.bg.metric(point);
    let inv_bg = ctx.bg.inverse_metric(point);
    let cdiff = christoffel_difference_with(&f.v, &g_bg, &inv_bg);
    let inv = scale_mat(&inv_bg, (-2.0 * f.theta).exp());
    Ok(std::array::from_fn(|a| {
        let mut acc = 0.0;
        for b in 0..4 {
            for c in 0..4 {
                let mut cov = d_delta[c][a][b];
                for e in 0..4 {
                    cov -= cdiff[e][c][a] * delta[e][b] + cdiff[e][c][b] * delta[a][e];
                }
                acc += inv[b][c] * cov;
            }
        }
        acc
    }))
}

/// Fourth-order `theta` jet at a grid point of a flat-background state, with
/// `d_t^4 theta` taken from the evolution equations.
pub fn theta_jet_from_state(p: &PointState<f64>, dx: &PointState<f64>, dxx: &PointState<f64>, accel: &Fields<f64>) -> ThetaJet4 {
    let count = |idx: &[usize]| idx.iter().filter(|&&i| i == 1).count();
    let spatial_only = |idx: &[usize]| idx.iter().all(|&i| i < 2);
    let w = |m: &Mat4<f64>, ones: usize| match ones {
        0 => m[0][0],
        1 => m[0][1],
        _ => m[1][1],
    };
    let mut d3 = zero444();
    let mut d4 = zero4444();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                let idx = [a, b, c];
                if spatial_only(&idx) {
                    d3[a][b][c] = match count(&idx) {
                        0 => p.qdot.w[0][0],
                        k => w(&dx.q.w, k - 1),
                    };
                }
                for d in 0..4 {
                    let idx = [a, b, c, d];
                    if spatial_only(&idx) {
                        d4[a][b][c][d] = match count(&idx) {
                            0 => accel.w[0][0],
                            1 => dx.qdot.w[0][0],
                            k => w(&dxx.q.w, k - 2),
                        };
                    }
                }
            }
        }
    }
    ThetaJet4 {
        value: p.q.theta,
        d1: p.q.v,
        d2: p.q.w,
        d3,
        d4,
    }
}

/// Evaluate every monitor on the current state.
pub fn gauge_constraint_monitor<S: Scalar>(state: &EvolutionState<S>, ctx: &SourceContext) -> Result<MonitorRecord> {
    let st = state.to_f64();
    let spatial = spatial_derivatives(&st.points, st.spacing, st.reduction);
    let mut rec = MonitorRecord {
        time: st.time,
        ..Default::default()
    };
    for (i, p) in st.points.iter().enumerate() {
        let point = ctx.point(st.time, st.coordinate(i));
        let (dx, dxx) = &spatial[i];
        let g_bg = ctx.bg.metric(&point);
        let inv_bg = ctx.bg.inverse_metric(&point);
        // the algebraic monitors are evaluated in the working precision
        let exact = &state.points[i].q;
        let f = harmonic_potential(exact, &lift_mat(&inv_bg), &lift_mat(&g_bg));
        rec.f_norm = rec.f_norm.max(f.iter().fold(0.0f64, |m, x| m.max(x.to_f64().abs())));
        let delta = to_f64_mat(&auxiliary_mismatch(exact, ctx, &point)?);
        rec.delta_norm = rec.delta_norm.max(max_abs_mat(&delta));
        let div = mismatch_divergence(p, dx, ctx, &point)?;
        rec.delta_div_norm = rec.delta_div_norm.max(div.iter().fold(0.0f64, |m, x| m.max(x.abs())));
        rec.box_theta_norm = rec
            .box_theta_norm
            .max(box_theta_residual(&jet_of(&p.q), p.q.r, &ctx.bg, &point).abs());
        let accel = point_acceleration(p, dx, dxx, ctx, &point)?;
        let jet = theta_jet_from_state(p, dx, dxx, &accel);
        let res = constraint_residuals(&jet, &ctx.tail, &ctx.params, &ctx.bg, &point, ctx.convention)?;
        rec.constraint_norm = rec.constraint_norm.max(res.constraint_norm());
        rec.trace_residual_norm = rec.trace_residual_norm.max(res.trace_residual.abs());
    }
    Ok(rec)
}

/// Constraint and field-equation residuals at every grid point.
pub fn slice_constraint_residuals(state: &EvolutionState<f64>, ctx: &SourceContext) -> Result<Vec<ConstraintResiduals>> {
    let spatial = spatial_derivatives(&state.points, state.spacing, state.reduction);
    state
        .points
        .iter()
        .zip(&spatial)
        .enumerate()
        .map(|(i, (p, (dx, dxx)))| {
            let point = ctx.point(state.time, state.coordinate(i));
            let accel = point_acceleration(p, dx, dxx, ctx, &point)?;
            let jet = theta_jet_from_state(p, dx, dxx, &accel);
            constraint_residuals(&jet, &ctx.tail, &ctx.params, &ctx.bg, &point, ctx.convention)
        })
        .collect()
}
