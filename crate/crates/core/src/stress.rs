//! Renormalised stress tensor of the conformal scalar in the physical frame,
//! assembled from background tail data and the conformal-factor jet.

use crate::background::{BackgroundGeometry, ChartPoint};
use crate::conformal::{christoffel_difference_with, geometric_ij, ConformalCurvature, ConformalJet, CurvatureDerivatives};
use crate::error::{Error, Result};
use crate::numeric::fd::{D1_WEIGHTS, D2_WEIGHTS};
use crate::numeric::Scalar;
use crate::quantum_state::{extrapolate_split, v1_limit, HadamardTail, Params};
use crate::tensor::*;

/// `components = (tail_part + anomaly_part) + ambiguity_part`, entrywise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StressTensor<S = f64> {
    pub components: Mat4<S>,
    pub tail_part: Mat4<S>,
    pub anomaly_part: Mat4<S>,
    pub ambiguity_part: Mat4<S>,
}

impl<S: Scalar> StressTensor<S> {
    pub fn from_parts(tail_part: Mat4<S>, anomaly_part: Mat4<S>, ambiguity_part: Mat4<S>) -> Self {
        let components = std::array::from_fn(|a| {
            std::array::from_fn(|b| (tail_part[a][b] + anomaly_part[a][b]) + ambiguity_part[a][b])
        });
        Self {
            components,
            tail_part,
            anomaly_part,
            ambiguity_part,
        }
    }
}

struct LiftedTail<S> {
    w0: S,
    wa: Vec4<S>,
    breve: Mat4<S>,
    grad: Vec4<S>,
    hess: Mat4<S>,
}

fn lift_tail<S: Scalar>(tail: &HadamardTail) -> Result<LiftedTail<S>> {
    tail.validate()?;
    Ok(LiftedTail {
        w0: S::from_f64(tail.w0),
        wa: tail.wa.map(S::from_f64),
        breve: lift_mat(&tail.wab_breve),
        grad: tail.grad_w0.map(S::from_f64),
        hess: lift_mat(&tail.hess_w0),
    })
}

fn contract_c<S: Scalar>(c: &Rank3<S>, a: usize, b: usize, x: &Vec4<S>) -> S {
    (0..4).fold(S::zero(), |acc, e| acc + c[e][a][b] * x[e])
}

/// Tail contribution `[T_ab w]` in the physical frame, written with background
/// covariant derivatives and the Christoffel difference tensor.
pub fn tail_stress_conformal<S: Scalar>(
    jet: &ConformalJet<S>,
    tail: &HadamardTail,
    curv: &ConformalCurvature<S>,
    bg: &BackgroundGeometry,
    point: &ChartPoint,
) -> Result<Mat4<S>> {
    let g_bg: Mat4<S> = lift_mat(&bg.metric(point));
    let inv_bg: Mat4<S> = lift_mat(&bg.inverse_metric(point));
    tail_stress_with(jet, tail, curv, &g_bg, &inv_bg)
}

pub fn tail_stress_with<S: Scalar>(
    jet: &ConformalJet<S>,
    tail: &HadamardTail,
    curv: &ConformalCurvature<S>,
    g_bg: &Mat4<S>,
    inv_bg: &Mat4<S>,
) -> Result<Mat4<S>> {
    let t = lift_tail::<S>(tail)?;
    let c = christoffel_difference_with(&jet.v, g_bg, inv_bg);
    let v = &jet.v;
    let third = S::frac(1.0, 3.0);
    let two = S::from_f64(2.0);
    let e2 = (jet.theta + jet.theta).exp();

    // trace bracket, contracted with the background inverse
    let mut tr = S::zero();
    for cc in 0..4 {
        for d in 0..4 {
            let hess_g = t.hess[cc][d] - contract_c(&c, cc, d, &t.grad);
            let term = (third * v[cc] * v[d] - S::frac(2.0, 3.0) * (jet.w[cc][d] - contract_c(&c, cc, d, v))) * t.w0
                - v[cc] * t.wa[d]
                - v[d] * t.wa[cc]
                + t.breve[cc][d]
                - contract_c(&c, cc, d, &t.wa)
                - S::frac(1.0, 6.0) * (-two * v[cc] * t.grad[d] - two * v[d] * t.grad[cc] + hess_g);
            tr += inv_bg[cc][d] * term;
        }
    }
    let mut out = zero44();
    for a in 0..4 {
        for b in a..4 {
            let hess_g = t.hess[a][b] - contract_c(&c, a, b, &t.grad);
            let x = third * (v[a] * v[b] + jet.w[a][b] - contract_c(&c, a, b, v)) * t.w0
                + v[a] * t.wa[b]
                + v[b] * t.wa[a]
                - t.breve[a][b]
                + contract_c(&c, a, b, &t.wa)
                + third * (-two * v[a] * t.grad[b] - two * v[b] * t.grad[a] + hess_g)
                + S::frac(1.0, 2.0) * g_bg[a][b] * tr
                + S::frac(1.0, 6.0) * (curv.traceless[a][b] - S::frac(1.0, 4.0) * e2 * g_bg[a][b] * curv.scalar) * t.w0;
            out[a][b] = x / e2;
            out[b][a] = out[a][b];
        }
    }
    Ok(out)
}

/// Independent evaluation of the tail stress: physical-frame covariant
/// coincidence limits of `w = e^(-theta) e^(-theta') w_bg` built from the full
/// Christoffel symbols, inserted in the standard point-split expression.
pub fn tail_stress_physical(
    jet: &ConformalJet<f64>,
    tail: &HadamardTail,
    curv: &ConformalCurvature<f64>,
    bg: &BackgroundGeometry,
    point: &ChartPoint,
) -> Result<Mat4<f64>> {
    tail.validate()?;
    let gamma_bg = bg.christoffels(point);
    let g_bg = bg.metric(point);
    let inv_bg = bg.inverse_metric(point);
    let c = christoffel_difference_with(&jet.v, &g_bg, &inv_bg);
    let d1 = &jet.v;
    // partial second derivatives from background-covariant ones
    let partial = |cov: &Mat4<f64>, grad: &Vec4<f64>| -> Mat4<f64> {
        std::array::from_fn(|a| std::array::from_fn(|b| cov[a][b] + (0..4).map(|e| gamma_bg[e][a][b] * grad[e]).sum::<f64>()))
    };
    let covariant = |par: &Mat4<f64>, grad: &Vec4<f64>| -> Mat4<f64> {
        std::array::from_fn(|a| {
            std::array::from_fn(|b| par[a][b] - (0..4).map(|e| (gamma_bg[e][a][b] + c[e][a][b]) * grad[e]).sum::<f64>())
        })
    };
    let theta_hess = covariant(&partial(&jet.w, d1), d1);
    let sw_ab = covariant(&partial(&tail.wab_breve, &tail.wa), &tail.wa);
    let sw_hess = covariant(&partial(&tail.hess_w0, &tail.grad_w0), &tail.grad_w0);
    let k = (-2.0 * jet.theta).exp();
    let w = tail.w0;
    let gw = &tail.grad_w0;
    let wa = &tail.wa;
    let w_ab: Mat4<f64> = std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            k * ((d1[a] * d1[b] - theta_hess[a][b]) * w - d1[a] * wa[b] - d1[b] * wa[a] + sw_ab[a][b])
        })
    });
    let w_hess: Mat4<f64> = std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            k * ((4.0 * d1[a] * d1[b] - 2.0 * theta_hess[a][b]) * w - 2.0 * d1[a] * gw[b] - 2.0 * d1[b] * gw[a]
                + sw_hess[a][b])
        })
    });
    let g = &curv.metric;
    let inv = &curv.inverse;
    let box_w = contract2(inv, &w_ab);
    let box_of_w = contract2(inv, &w_hess);
    Ok(std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            let einstein = curv.ricci[a][b] - 0.5 * g[a][b] * curv.scalar;
            let x = -w_ab[a][b] + 0.5 * g[a][b] * box_w + w_hess[a][b] / 3.0 - g[a][b] * box_of_w / 12.0
                + einstein * k * w / 6.0;
            let y = -w_ab[b][a] + 0.5 * g[b][a] * box_w + w_hess[b][a] / 3.0 - g[b][a] * box_of_w / 12.0
                + (curv.ricci[b][a] - 0.5 * g[b][a] * curv.scalar) * k * w / 6.0;
            0.5 * (x + y)
        })
    }))
}

/// Full renormalised stress tensor. Curvature derivatives feed `v1` and the
/// `I, J` ambiguity terms; without them `Box R` is taken to vanish and the
/// `I, J` coefficients must be zero.
pub fn assemble_stress_tensor<S: Scalar>(
    jet: &ConformalJet<S>,
    tail: &HadamardTail,
    curv: &ConformalCurvature<S>,
    params: &Params,
    bg: &BackgroundGeometry,
    point: &ChartPoint,
    derivs: Option<&CurvatureDerivatives<S>>,
) -> Result<StressTensor<S>> {
    let tail_part = tail_stress_conformal(jet, tail, curv, bg, point)?;
    let box_r = derivs.map(|d| d.box_scalar).unwrap_or_else(S::zero);
    let v1 = v1_limit(curv, box_r, params.mass_sq, params.coupling);
    let four_pi2 = S::from_f64(4.0) * S::pi() * S::pi();
    let anomaly_part = scale_mat(&curv.metric, v1 / four_pi2);
    let [a1, a2, a3, a4] = params.ambiguities.map(S::from_f64);
    let half = S::frac(1.0, 2.0);
    let (i, j) = if params.ambiguities[2] != 0.0 || params.ambiguities[3] != 0.0 {
        geometric_ij(curv, derivs)?
    } else {
        (zero44(), zero44())
    };
    let g = &curv.metric;
    let ambiguity_part = std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            let einstein = curv.ricci[a][b] - half * g[a][b] * curv.scalar;
            a1 * g[a][b] + a2 * einstein + a3 * i[a][b] + a4 * j[a][b]
        })
    });
    Ok(StressTensor::from_parts(tail_part, anomaly_part, ambiguity_part))
}

#[derive(Clone, Copy, Debug)]
pub struct NumericStress {
    pub tensor: Mat4<f64>,
    pub error_estimate: f64,
}

/// Derivatives of a bi-function at separated points: the value, the mixed
/// `d_a d_b'`, the second-point `d_a' d_b'` and the first-point Laplacian.
fn split_operator<F>(w: &F, x: &ChartPoint, xp: &ChartPoint, h: f64, params: &Params) -> Vec<f64>
where
    F: Fn(&ChartPoint, &ChartPoint) -> f64 + ?Sized,
{
    let eta = minkowski::<f64>();
    let offs = || (-2i32..=2).enumerate().filter(|(k, _)| D1_WEIGHTS[*k] != 0.0);
    let mut mixed = zero44();
    let mut second = zero44();
    for a in 0..4 {
        for b in 0..4 {
            let mut acc = 0.0;
            for (i, oi) in offs() {
                for (j, oj) in offs() {
                    acc += D1_WEIGHTS[i] * D1_WEIGHTS[j] * w(&x.shifted(a, oi as f64 * h), &xp.shifted(b, oj as f64 * h));
                }
            }
            mixed[a][b] = acc / (h * h);
        }
        for k in 0..5 {
            second[a][a] += D2_WEIGHTS[k] * w(x, &xp.shifted(a, (k as f64 - 2.0) * h)) / (h * h);
        }
        for b in (a + 1)..4 {
            let mut acc = 0.0;
            for (i, oi) in offs() {
                for (j, oj) in offs() {
                    acc += D1_WEIGHTS[i] * D1_WEIGHTS[j] * w(x, &xp.shifted(a, oi as f64 * h).shifted(b, oj as f64 * h));
                }
            }
            second[a][b] = acc / (h * h);
            second[b][a] = second[a][b];
        }
    }
    let mut first_box = 0.0;
    for a in 0..4 {
        let mut d2 = 0.0;
        for k in 0..5 {
            d2 += D2_WEIGHTS[k] * w(&x.shifted(a, (k as f64 - 2.0) * h), xp);
        }
        first_box += eta[a][a] * d2 / (h * h);
    }
    let xi = params.coupling;
    let value = w(x, xp);
    let mixed_tr: f64 = (0..4).map(|c| eta[c][c] * mixed[c][c]).sum();
    let mut out = Vec::with_capacity(16);
    for a in 0..4 {
        for b in 0..4 {
            let t = (1.0 - 2.0 * xi) * mixed[a][b] + (2.0 * xi - 0.5) * eta[a][b] * mixed_tr
                - 0.5 * eta[a][b] * params.mass_sq * value
                + 2.0 * xi * (-second[a][b] + eta[a][b] * first_box);
            out.push(t);
        }
    }
    out
}

/// Point-split stress tensor of a smooth bi-function on Minkowski space, with
/// the coincidence limit taken by Richardson extrapolation in the separation.
pub fn pointsplit_stress_flat<F>(w: &F, point: &ChartPoint, params: &Params, sep: f64, tol: f64) -> Result<NumericStress>
where
    F: Fn(&ChartPoint, &ChartPoint) -> f64 + ?Sized,
{
    let h = 0.1 * sep;
    let (flat, mut error) = extrapolate_split(point, sep, |xp| split_operator(w, point, xp, h, params));
    let raw: Mat4<f64> = std::array::from_fn(|a| std::array::from_fn(|b| flat[4 * a + b]));
    error = error.max(max_abs_mat(&sub_mat(&raw, &symmetrize(&raw))));
    if !(error <= tol) {
        return Err(Error::Extrapolation { estimate: error, tol });
    }
    Ok(NumericStress {
        tensor: symmetrize(&raw),
        error_estimate: error,
    })
}
