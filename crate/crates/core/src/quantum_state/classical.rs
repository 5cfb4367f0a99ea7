use super::ScalarField;
use crate::background::ChartPoint;
use crate::numeric::fd::{D1_WEIGHTS, D2_WEIGHTS};

/// Samples `values[it * nx + ix]` of a field on a uniform `(t, x)` grid.
#[derive(Clone, Debug)]
pub struct GridSolution {
    pub t0: f64,
    pub dt: f64,
    pub nt: usize,
    pub x0: f64,
    pub dx: f64,
    pub nx: usize,
    pub values: Vec<f64>,
}

impl GridSolution {
    pub fn sample(t0: f64, dt: f64, nt: usize, x0: f64, dx: f64, nx: usize, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(nt * nx);
        for it in 0..nt {
            for ix in 0..nx {
                values.push(f(t0 + it as f64 * dt, x0 + ix as f64 * dx));
            }
        }
        Self {
            t0,
            dt,
            nt,
            x0,
            dx,
            nx,
            values,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransportReport {
    /// Max of `|(Box_bg - R_bg / 6) psi|` on interior points.
    pub input_residual: f64,
    /// Max of `|(Box_g - R / 6) phi|` for `phi = e^(-theta) psi`.
    pub transported_residual: f64,
}

/// Residual-level check that `phi = e^(-theta) psi` solves the conformal wave
/// equation of `e^(2 theta) eta` when `psi` solves the flat one. Derivatives are
/// fourth-order stencils in `t` and `x`.
pub fn transport_classical_solution(psi: &GridSolution, theta: &ScalarField) -> TransportReport {
    let pt = |it: usize, ix: usize| ChartPoint {
        coords: [psi.t0 + it as f64 * psi.dt, psi.x0 + ix as f64 * psi.dx, 0.0, 0.0],
    };
    let th: Vec<f64> = (0..psi.nt)
        .flat_map(|it| (0..psi.nx).map(move |ix| (it, ix)))
        .map(|(it, ix)| theta(&pt(it, ix)))
        .collect();
    let phi: Vec<f64> = psi.values.iter().zip(&th).map(|(p, t)| (-t).exp() * p).collect();
    let derivs = |f: &[f64], it: usize, ix: usize| {
        let g = |a: usize, b: usize| f[a * psi.nx + b];
        let (mut ft, mut ftt, mut fx, mut fxx) = (0.0, 0.0, 0.0, 0.0);
        for k in 0..5 {
            let (ti, xi) = (it + k - 2, ix + k - 2);
            ft += D1_WEIGHTS[k] * g(ti, ix);
            ftt += D2_WEIGHTS[k] * g(ti, ix);
            fx += D1_WEIGHTS[k] * g(it, xi);
            fxx += D2_WEIGHTS[k] * g(it, xi);
        }
        (
            ft / psi.dt,
            ftt / (psi.dt * psi.dt),
            fx / psi.dx,
            fxx / (psi.dx * psi.dx),
        )
    };
    let mut report = TransportReport {
        input_residual: 0.0,
        transported_residual: 0.0,
    };
    for it in 2..psi.nt.saturating_sub(2) {
        for ix in 2..psi.nx.saturating_sub(2) {
            let (_, ptt, _, pxx) = derivs(&psi.values, it, ix);
            report.input_residual = report.input_residual.max((-ptt + pxx).abs());
            let (ft, ftt, fx, fxx) = derivs(&phi, it, ix);
            let (tt, ttt, tx, txx) = derivs(&th, it, ix);
            let theta_here = th[it * psi.nx + ix];
            let f = phi[it * psi.nx + ix];
            // Box_g f = e^(-2 theta)(Box f + 2 v.df), R / 6 = -e^(-2 theta)(Box theta + v.v)
            let box_theta = -ttt + txx;
            let v_sq = -tt * tt + tx * tx;
            let res = (-2.0 * theta_here).exp()
                * (-ftt + fxx + 2.0 * (-tt * ft + tx * fx) + (box_theta + v_sq) * f);
            report.transported_residual = report.transported_residual.max(res.abs());
        }
    }
    report
}
