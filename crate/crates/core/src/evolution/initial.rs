use super::sources::{point_acceleration, SourceContext};
use super::state::{spatial_derivatives, EvolutionState, Fields, PointState, Reduction};
use crate::conformal::{conformal_riemann, ConformalJet};
use crate::error::{Error, Result};
use crate::numeric::fd::periodic_derivatives;
use crate::numeric::{Dual, Scalar};
use crate::tensor::*;

/// Initial state plus the metric time-derivative data `g^(k) = factor_k g_bg`
/// on the initial slice, `k = 0..=3`.
#[derive(Clone, Debug)]
pub struct InitialData<S = f64> {
    pub state: EvolutionState<S>,
    pub metric_factors: [Vec<S>; 4],
}

impl<S: Scalar> InitialData<S> {
    /// `d_t^k g_ab` at grid point `i`.
    pub fn metric_jet(&self, k: usize, i: usize, g_bg: &Mat4<f64>) -> Mat4<S> {
        scale_mat(&lift_mat(g_bg), self.metric_factors[k][i])
    }
}

/// Grid description for [`build_theta_initial_data`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SliceGrid {
    pub reduction: Reduction,
    pub spacing: f64,
    pub origin: f64,
    pub time: f64,
}

/// Build the extended-variable state from `theta` and its first three time
/// derivatives sampled on the slice. The auxiliary curvature variables are set
/// to the curvature of `e^(2 theta) g_bg`, their time derivatives by forward AD
/// along `t`, and `d_t` of the scalar-curvature gradient by the trace equation.
pub fn build_theta_initial_data<S: Scalar>(
    theta: [&[S]; 4],
    grid: SliceGrid,
    ctx: &SourceContext,
) -> Result<InitialData<S>> {
    let n = theta[0].len();
    if n == 0 || theta.iter().any(|f| f.len() != n) {
        return Err(Error::InvalidParameter {
            key: "theta data".into(),
            msg: "all four slice fields need the same nonzero length".into(),
        });
    }
    if grid.reduction == Reduction::Homogeneous && n != 1 {
        return Err(Error::InvalidParameter {
            key: "theta data".into(),
            msg: "the homogeneous reduction has one grid point".into(),
        });
    }
    let derivs = |f: &[S]| -> (Vec<S>, Vec<S>) {
        match grid.reduction {
            Reduction::Homogeneous => (vec![S::zero(); n], vec![S::zero(); n]),
            Reduction::PlaneSymmetric => periodic_derivatives(f, grid.spacing),
        }
    };
    let d: Vec<(Vec<S>, Vec<S>)> = theta.iter().map(|f| derivs(f)).collect();

    let mut points = Vec::with_capacity(n);
    for i in 0..n {
        let point = ctx.point(grid.time, grid.origin + i as f64 * grid.spacing);
        let [t0, t1, t2, t3] = theta.map(|f| f[i]);
        let mut q = Fields::zero();
        let mut qdot = Fields::zero();
        q.theta = t0;
        qdot.theta = t1;
        q.v[0] = t1;
        q.v[1] = d[0].0[i];
        qdot.v[0] = t2;
        qdot.v[1] = d[1].0[i];
        let set = |m: &mut Mat4<S>, a: usize, b: usize, x: S| {
            m[a][b] = x;
            m[b][a] = x;
        };
        set(&mut q.w, 0, 0, t2);
        set(&mut q.w, 0, 1, d[1].0[i]);
        set(&mut q.w, 1, 1, d[0].1[i]);
        set(&mut qdot.w, 0, 0, t3);
        set(&mut qdot.w, 0, 1, d[2].0[i]);
        set(&mut qdot.w, 1, 1, d[1].1[i]);

        let jet = ConformalJet {
            theta: Dual::new(q.theta, qdot.theta),
            v: std::array::from_fn(|a| Dual::new(q.v[a], qdot.v[a])),
            w: std::array::from_fn(|a| std::array::from_fn(|b| Dual::new(q.w[a][b], qdot.w[a][b]))),
        };
        let curv = conformal_riemann(&jet, &ctx.bg, &point, ctx.convention)?;
        q.r = curv.scalar.re;
        qdot.r = curv.scalar.du;
        q.rt = map_mat(&curv.traceless, |x| x.re);
        qdot.rt = map_mat(&curv.traceless, |x| x.du);
        points.push(PointState { q, qdot });
    }

    let r_now: Vec<S> = points.iter().map(|p| p.q.r).collect();
    let r_rate: Vec<S> = points.iter().map(|p| p.qdot.r).collect();
    let (dr, _) = derivs(&r_now);
    let (dr_rate, _) = derivs(&r_rate);
    for (i, p) in points.iter_mut().enumerate() {
        p.q.vr[0] = p.qdot.r;
        p.q.vr[1] = dr[i];
        p.qdot.vr[1] = dr_rate[i];
    }
    // d_t vr_0 = d_t^2 r from the scalar-curvature wave equation
    let spatial = spatial_derivatives(&points, grid.spacing, grid.reduction);
    for i in 0..n {
        let point = ctx.point(grid.time, grid.origin + i as f64 * grid.spacing);
        let acc = point_acceleration(&points[i], &spatial[i].0, &spatial[i].1, ctx, &point)?;
        points[i].qdot.vr[0] = acc.r;
    }

    let two = S::from_f64(2.0);
    let metric_factors = [0usize, 1, 2, 3].map(|k| {
        (0..n)
            .map(|i| {
                let [t0, t1, t2, t3] = theta.map(|f| f[i]);
                let e2 = (t0 + t0).exp();
                let poly = match k {
                    0 => S::one(),
                    1 => two * t1,
                    2 => two * (two * t1 * t1 + t2),
                    _ => two * (S::from_f64(4.0) * t1 * t1 * t1 + S::from_f64(6.0) * t1 * t2 + t3),
                };
                poly * e2
            })
            .collect()
    });

    Ok(InitialData {
        state: EvolutionState {
            time: S::from_f64(grid.time),
            spacing: grid.spacing,
            origin: grid.origin,
            reduction: grid.reduction,
            points,
        },
        metric_factors,
    })
}
