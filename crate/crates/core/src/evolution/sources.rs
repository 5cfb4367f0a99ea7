//! Source terms of the extended system on a flat background in Cartesian
//! coordinates. Every field obeys `Box_bg f + source = 0`, so the second time
//! derivative is `d_x^2 f + source` (scaled by 1/6 for the `theta` family).

use super::state::{Fields, PointState};
use crate::background::{BackgroundGeometry, ChartPoint};
use crate::conformal::{
    christoffel_difference_with, conformal_riemann, ricci_riemann_contraction, tensor_box_correction,
    ConformalCurvature, ConformalJet, ContractionConvention,
};
use crate::constraints::algebraic_part;
use crate::error::{Error, Result};
use crate::numeric::{Dual, Scalar};
use crate::quantum_state::{HadamardTail, Params};
use crate::stress::tail_stress_with;
use crate::tensor::*;

/// Everything the sources need besides the state.
#[derive(Clone, Debug)]
pub struct SourceContext {
    pub bg: BackgroundGeometry,
    pub params: Params,
    pub tail: HadamardTail,
    pub convention: ContractionConvention,
}

impl SourceContext {
    pub fn new(bg: BackgroundGeometry, params: Params, tail: HadamardTail, convention: ContractionConvention) -> Result<Self> {
        params.validate_for_evolution()?;
        if params.ambiguities.iter().any(|&x| x != 0.0) {
            return Err(Error::InvalidParameter {
                key: "ambiguities".into(),
                msg: "absorb the ambiguity terms into G, Lambda, alpha and beta for evolution".into(),
            });
        }
        if !bg.is_flat() {
            return Err(Error::Unsupported(format!(
                "evolution on {}; only the flat background is reduced",
                bg.descriptor.label()
            )));
        }
        tail.validate()?;
        Ok(Self {
            bg,
            params,
            tail,
            convention,
        })
    }

    pub(crate) fn point(&self, t: f64, x: f64) -> ChartPoint {
        ChartPoint { coords: [t, x, 0.0, 0.0] }
    }
}

pub(crate) fn jet_of<S: Scalar>(f: &Fields<S>) -> ConformalJet<S> {
    ConformalJet {
        theta: f.theta,
        v: f.v,
        w: f.w,
    }
}

/// Derivative of the stored fields along coordinate `dir`: the time derivative
/// for `dir = 0`, the `x^1` stencil derivative for `dir = 1`, zero otherwise.
pub(crate) fn directional<S: Scalar>(p: &PointState<S>, dx: &PointState<S>, dir: usize) -> Fields<S> {
    match dir {
        0 => p.qdot,
        1 => dx.q,
        _ => Fields::zero(),
    }
}

/// Lift the fields to dual numbers whose derivative part is `D_dir` of each
/// field. Derivatives of `theta`, `v` and the scalar curvature are replaced by
/// the extended variables `v`, `w` and `vr`; the rest come from `raw`.
pub(crate) fn seeded<S: Scalar>(f: &Fields<S>, raw: &Fields<S>, dir: usize) -> Fields<Dual<S>> {
    let d = |re: S, du: S| Dual::new(re, du);
    Fields {
        theta: d(f.theta, f.v[dir]),
        v: std::array::from_fn(|c| d(f.v[c], f.w[dir][c])),
        w: std::array::from_fn(|a| std::array::from_fn(|b| d(f.w[a][b], raw.w[a][b]))),
        r: d(f.r, f.vr[dir]),
        vr: std::array::from_fn(|c| d(f.vr[c], raw.vr[c])),
        rt: std::array::from_fn(|a| std::array::from_fn(|b| d(f.rt[a][b], raw.rt[a][b]))),
    }
}

/// Curvature of `e^(2 theta) g_bg` with the Ricci part replaced by the
/// auxiliary variables: `R_ab -> rt_ab + r g_ab / 4`, `R -> r`.
pub fn auxiliary_curvature<S: Scalar>(
    f: &Fields<S>,
    ctx: &SourceContext,
    point: &ChartPoint,
) -> Result<ConformalCurvature<S>> {
    let mut c = conformal_riemann(&jet_of(f), &ctx.bg, point, ctx.convention)?;
    let quarter = S::frac(1.0, 4.0);
    let ricci = add_mat(&f.rt, &scale_mat(&c.metric, f.r * quarter));
    c.ricci_sq = contract2(&raise2(&c.inverse, &ricci), &ricci);
    c.ricci_riemann = ricci_riemann_contraction(&ricci, &c.riemann, &c.inverse, ctx.convention);
    c.ricci = ricci;
    c.scalar = f.r;
    c.traceless = f.rt;
    Ok(c)
}

struct Pieces<S> {
    curv: ConformalCurvature<S>,
    algebraic: Mat4<S>,
    tail: Mat4<S>,
}

fn pieces<S: Scalar>(f: &Fields<S>, ctx: &SourceContext, point: &ChartPoint) -> Result<Pieces<S>> {
    let curv = auxiliary_curvature(f, ctx, point)?;
    let algebraic = algebraic_part(&curv, &ctx.params);
    let g_bg: Mat4<S> = lift_mat(&ctx.bg.metric(point));
    let inv_bg: Mat4<S> = lift_mat(&ctx.bg.inverse_metric(point));
    let tail = tail_stress_with(&jet_of(f), &ctx.tail, &curv, &g_bg, &inv_bg)?;
    Ok(Pieces { curv, algebraic, tail })
}

fn kappa<S: Scalar>(params: &Params) -> S {
    S::from_f64(8.0 * params.newton_constant) * S::pi()
}

/// `Box_g` of the scalar curvature demanded by the trace equation.
pub fn trace_box_scalar<S: Scalar>(f: &Fields<S>, ctx: &SourceContext, point: &ChartPoint) -> Result<S> {
    let p = pieces(f, ctx, point)?;
    let inv = &p.curv.inverse;
    let num = contract2(inv, &p.algebraic) - kappa::<S>(&ctx.params) * contract2(inv, &p.tail);
    let den = S::from_f64(2.0 * ctx.params.alpha - 6.0 * ctx.params.beta)
        + S::from_f64(ctx.params.newton_constant) / (S::from_f64(90.0) * S::pi());
    Ok(num / den)
}

/// Source of the scalar-curvature equation.
pub fn scalar_curvature_source<S: Scalar>(f: &Fields<S>, ctx: &SourceContext, point: &ChartPoint) -> Result<S> {
    let inv_bg: Mat4<S> = lift_mat(&ctx.bg.inverse_metric(point));
    let v_up = mat_vec(&inv_bg, &f.v);
    let transport = (0..4).fold(S::zero(), |acc, c| acc + v_up[c] * f.vr[c]).scale(2.0);
    let e2 = (f.theta + f.theta).exp();
    Ok(transport - e2 * trace_box_scalar(f, ctx, point)?)
}

/// Source of the `theta` equation, `6 |v|^2 + e^(2 theta) r - R_bg`.
pub fn theta_source<S: Scalar>(f: &Fields<S>, ctx: &SourceContext, point: &ChartPoint) -> S {
    let inv_bg: Mat4<S> = lift_mat(&ctx.bg.inverse_metric(point));
    let v_up = mat_vec(&inv_bg, &f.v);
    let v_sq = (0..4).fold(S::zero(), |acc, c| acc + v_up[c] * f.v[c]);
    let e2 = (f.theta + f.theta).exp();
    v_sq.scale(6.0) + e2 * f.r - S::from_f64(ctx.bg.curvature(point).scalar)
}

/// Source of the `v_a` equation on a flat background.
pub fn gradient_source<S: Scalar>(f: &Fields<S>, ctx: &SourceContext, point: &ChartPoint) -> Vec4<S> {
    let inv_bg: Mat4<S> = lift_mat(&ctx.bg.inverse_metric(point));
    let v_up = mat_vec(&inv_bg, &f.v);
    let e2 = (f.theta + f.theta).exp();
    std::array::from_fn(|a| {
        let vw = (0..4).fold(S::zero(), |acc, b| acc + v_up[b] * f.w[a][b]);
        vw.scale(12.0) + (e2 * f.v[a] * f.r).scale(2.0) + e2 * f.vr[a]
    })
}

fn traceless<S: Scalar>(m: &Mat4<S>, g: &Mat4<S>, inv: &Mat4<S>) -> Mat4<S> {
    sub_mat(m, &scale_mat(g, contract2(inv, m) * S::frac(1.0, 4.0)))
}

/// Source of the traceless auxiliary Ricci equation. `raw[c]` holds the
/// directional derivatives of the stored fields.
pub fn traceless_source<S: Scalar>(
    f: &Fields<S>,
    raw: &[Fields<S>; 4],
    ctx: &SourceContext,
    point: &ChartPoint,
) -> Result<Mat4<S>> {
    let g_bg: Mat4<S> = lift_mat(&ctx.bg.metric(point));
    let inv_bg: Mat4<S> = lift_mat(&ctx.bg.inverse_metric(point));
    let jet = jet_of(f);
    let d_rt: Rank3<S> = std::array::from_fn(|c| raw[c].rt);
    let correction = tensor_box_correction(&jet, &g_bg, &inv_bg, &f.rt, &d_rt);
    let cdiff = christoffel_difference_with(&f.v, &g_bg, &inv_bg);
    let hess: Mat4<S> = std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            let sym = (raw[a].vr[b] + raw[b].vr[a]) * S::frac(1.0, 2.0);
            sym - (0..4).fold(S::zero(), |acc, c| acc + cdiff[c][a][b] * f.vr[c])
        })
    });
    let p = pieces(f, ctx, point)?;
    let (g, inv) = (&p.curv.metric, &p.curv.inverse);
    let alpha = ctx.params.alpha;
    let k = kappa::<S>(&ctx.params);
    let hess_tl = traceless(&hess, g, inv);
    let alg_tl = traceless(&p.algebraic, g, inv);
    let tail_tl = traceless(&p.tail, g, inv);
    let e2 = (f.theta + f.theta).exp();
    let scale = e2 / S::from_f64(alpha);
    let c1 = S::from_f64(alpha - 2.0 * ctx.params.beta);
    Ok(std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            let rhs = c1 * hess_tl[a][b] + alg_tl[a][b] - k * tail_tl[a][b];
            correction[a][b] - scale * rhs
        })
    }))
}

/// Second time derivatives of every stored field at one point, given the
/// first and second `x^1` derivatives.
pub fn point_acceleration<S: Scalar>(
    p: &PointState<S>,
    dx: &PointState<S>,
    dxx: &PointState<S>,
    ctx: &SourceContext,
    point: &ChartPoint,
) -> Result<Fields<S>> {
    let f = &p.q;
    let raw: [Fields<S>; 4] = std::array::from_fn(|dir| directional(p, dx, dir));
    let sixth = S::frac(1.0, 6.0);

    let c_scalar = theta_source(f, ctx, point);
    let c_vec = gradient_source(f, ctx, point);
    let mut c_mat = zero44::<S>();
    let mut a_vec = zero4::<S>();
    for b in 0..4 {
        let lifted = seeded(f, &raw[b], b);
        let grad = gradient_source(&lifted, ctx, point);
        for a in 0..4 {
            c_mat[a][b] = grad[a].du;
        }
        a_vec[b] = scalar_curvature_source(&lifted, ctx, point)?.du;
    }
    let c_mat = symmetrize(&c_mat);
    let a_scalar = scalar_curvature_source(f, ctx, point)?;
    let b_mat = traceless_source(f, &raw, ctx, point)?;

    let lap = &dxx.q;
    let out = Fields {
        theta: lap.theta + sixth * c_scalar,
        v: std::array::from_fn(|a| lap.v[a] + sixth * c_vec[a]),
        w: std::array::from_fn(|a| std::array::from_fn(|b| lap.w[a][b] + sixth * c_mat[a][b])),
        r: lap.r + a_scalar,
        vr: std::array::from_fn(|a| lap.vr[a] + a_vec[a]),
        rt: std::array::from_fn(|a| std::array::from_fn(|b| lap.rt[a][b] + b_mat[a][b])),
    };
    if out.to_flat().iter().any(|x| !x.to_f64().is_finite()) {
        return Err(Error::NonFinite("evolution source"));
    }
    Ok(out)
}
