use super::StateId;
use crate::background::{BackgroundGeometry, ChartPoint};
use crate::error::{Error, Result};
use crate::numeric::fd::{D1_WEIGHTS, D2_WEIGHTS};
use crate::tensor::*;
use std::f64::consts::PI;

/// Coincidence limits of the smooth part `w = G^+ - H` of a background state.
/// Derivatives act on the first point; `wab_breve` uses background-covariant
/// derivatives (equal to `wab` on flat backgrounds).
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct HadamardTail {
    pub w0: f64,
    pub wa: Vec4<f64>,
    pub wab: Mat4<f64>,
    pub wab_breve: Mat4<f64>,
    pub grad_w0: Vec4<f64>,
    pub hess_w0: Mat4<f64>,
}

impl HadamardTail {
    pub fn validate(&self) -> Result<()> {
        let finite = self.w0.is_finite()
            && self.wa.iter().chain(self.grad_w0.iter()).all(|x| x.is_finite())
            && [self.wab, self.wab_breve, self.hess_w0]
                .iter()
                .all(|m| m.iter().flatten().all(|x| x.is_finite()));
        if !finite {
            return Err(Error::InconsistentTail("non-finite entry".into()));
        }
        for (name, m) in [("wab", &self.wab), ("wab_breve", &self.wab_breve), ("hess_w0", &self.hess_w0)] {
            let asym = max_abs_mat(&sub_mat(m, &symmetrize(m)));
            if asym > 1e-14 * max_abs_mat(m).max(1.0) {
                return Err(Error::InconsistentTail(format!("{name} asymmetric by {asym:e}")));
            }
        }
        Ok(())
    }

    /// Linear combination `a self + b other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        let lin = |x: f64, y: f64| a * x + b * y;
        let mat = |x: &Mat4<f64>, y: &Mat4<f64>| add_mat(&scale_mat(x, a), &scale_mat(y, b));
        Self {
            w0: lin(self.w0, other.w0),
            wa: std::array::from_fn(|i| lin(self.wa[i], other.wa[i])),
            wab: mat(&self.wab, &other.wab),
            wab_breve: mat(&self.wab_breve, &other.wab_breve),
            grad_w0: std::array::from_fn(|i| lin(self.grad_w0[i], other.grad_w0[i])),
            hess_w0: mat(&self.hess_w0, &other.hess_w0),
        }
    }
}

/// Closed-form tails of the catalog states.
pub fn tail_limits(state: &StateId, _point: &ChartPoint, bg: &BackgroundGeometry) -> Result<HadamardTail> {
    if !bg.is_flat() {
        return Err(Error::Unsupported(format!(
            "tail of {} on {}",
            state.label(),
            bg.descriptor.label()
        )));
    }
    Ok(match state {
        StateId::Vacuum => HadamardTail::default(),
        StateId::Thermal { temperature } => {
            let t2 = temperature * temperature;
            let mut wab = zero44();
            wab[0][0] = -PI * PI * t2 * t2 / 30.0;
            for i in 1..4 {
                wab[i][i] = -PI * PI * t2 * t2 / 90.0;
            }
            HadamardTail {
                w0: t2 / 12.0,
                wa: [0.0; 4],
                wab,
                wab_breve: wab,
                grad_w0: [0.0; 4],
                hess_w0: zero44(),
            }
        }
    })
}

#[derive(Clone, Copy, Debug)]
pub struct NumericTail {
    pub tail: HadamardTail,
    pub error_estimate: f64,
}

/// Spacelike split directions spanning the tangent space.
const SPLIT_DIRECTIONS: [[f64; 4]; 4] = [
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
    [0.3, 0.6, 0.6, 0.6],
];

struct Limit {
    value: f64,
    grad: Vec4<f64>,
    hess: Mat4<f64>,
    error: f64,
}

/// Coincidence limit of a vector-valued quantity `f(x')` as `x' -> x`: even
/// symmetrisation over `x +- s u`, two-level Richardson in `s`, and averaging
/// over the split directions. Returns the limit and an error estimate covering
/// both the extrapolation and the direction spread.
pub(crate) fn extrapolate_split<F>(x: &ChartPoint, sep: f64, f: F) -> (Vec<f64>, f64)
where
    F: Fn(&ChartPoint) -> Vec<f64>,
{
    let mut error = 0.0f64;
    let mut per_dir = Vec::new();
    for u in SPLIT_DIRECTIONS {
        let even = |s: f64| {
            let at = |sign: f64| {
                let mut c = x.coords;
                (0..4).for_each(|i| c[i] += sign * s * u[i]);
                f(&ChartPoint { coords: c })
            };
            let (p, m) = (at(1.0), at(-1.0));
            p.iter().zip(&m).map(|(a, b)| 0.5 * (a + b)).collect::<Vec<f64>>()
        };
        let (a, b, c) = (even(sep), even(0.5 * sep), even(0.25 * sep));
        let mut out = vec![0.0; a.len()];
        for k in 0..a.len() {
            let r1 = (4.0 * b[k] - a[k]) / 3.0;
            let r2 = (4.0 * c[k] - b[k]) / 3.0;
            out[k] = (16.0 * r2 - r1) / 15.0;
            error = error.max((out[k] - r2).abs());
        }
        per_dir.push(out);
    }
    let n = per_dir.len() as f64;
    let len = per_dir[0].len();
    let mean: Vec<f64> = (0..len).map(|k| per_dir.iter().map(|d| d[k]).sum::<f64>() / n).collect();
    for d in &per_dir {
        for k in 0..len {
            error = error.max((d[k] - mean[k]).abs());
        }
    }
    (mean, error)
}

/// Coincidence limit of `w` and of its first-point derivatives at `x`,
/// approaching along the split directions with even-symmetrised two-level
/// Richardson extrapolation in the separation.
fn split_limit<F>(w: &F, x: &ChartPoint, sep: f64, h: f64) -> Limit
where
    F: Fn(&ChartPoint, &ChartPoint) -> f64 + ?Sized,
{
    let at = |x: &ChartPoint, xp: &ChartPoint| -> (f64, Vec4<f64>, Mat4<f64>) {
        let mut grad = [0.0; 4];
        let mut hess = zero44();
        for a in 0..4 {
            for (k, off) in (-2i32..=2).enumerate() {
                let f = w(&x.shifted(a, off as f64 * h), xp);
                grad[a] += D1_WEIGHTS[k] * f / h;
                hess[a][a] += D2_WEIGHTS[k] * f / (h * h);
            }
            for b in (a + 1)..4 {
                let mut acc = 0.0;
                for (i, oi) in (-2i32..=2).enumerate() {
                    for (j, oj) in (-2i32..=2).enumerate() {
                        let wt = D1_WEIGHTS[i] * D1_WEIGHTS[j];
                        if wt != 0.0 {
                            acc += wt * w(&x.shifted(a, oi as f64 * h).shifted(b, oj as f64 * h), xp);
                        }
                    }
                }
                hess[a][b] = acc / (h * h);
                hess[b][a] = hess[a][b];
            }
        }
        (w(x, xp), grad, hess)
    };
    let (d, error) = extrapolate_split(x, sep, |xp| {
        let (v, g, hh) = at(x, xp);
        let mut flat = vec![v];
        flat.extend_from_slice(&g);
        flat.extend(hh.iter().flatten());
        flat
    });
    let value = d[0];
    let grad: Vec4<f64> = std::array::from_fn(|a| d[1 + a]);
    let hess: Mat4<f64> = std::array::from_fn(|a| std::array::from_fn(|b| d[5 + 4 * a + b]));
    Limit {
        value,
        grad,
        hess: symmetrize(&hess),
        error,
    }
}

/// Point-split coincidence limits of a smooth bi-function on a flat
/// background. Fails if the extrapolation error estimate exceeds `tol`.
pub fn tail_limits_numeric<F>(w: &F, point: &ChartPoint, sep: f64, tol: f64) -> Result<NumericTail>
where
    F: Fn(&ChartPoint, &ChartPoint) -> f64 + ?Sized,
{
    let h = 0.1 * sep;
    let base = split_limit(w, point, sep, h);
    let mut error = base.error;
    let limit_at = |p: &ChartPoint| split_limit(w, p, sep, h);
    let mut grad_w0 = [0.0; 4];
    let mut hess_w0 = zero44();
    let hd = sep;
    for a in 0..4 {
        let samples: Vec<f64> = (-2i32..=2)
            .map(|o| {
                if o == 0 {
                    base.value
                } else {
                    let l = limit_at(&point.shifted(a, o as f64 * hd));
                    error = error.max(l.error);
                    l.value
                }
            })
            .collect();
        for k in 0..5 {
            grad_w0[a] += D1_WEIGHTS[k] * samples[k] / hd;
            hess_w0[a][a] += D2_WEIGHTS[k] * samples[k] / (hd * hd);
        }
        for b in (a + 1)..4 {
            let mut acc = 0.0;
            for (i, oi) in (-2i32..=2).enumerate() {
                for (j, oj) in (-2i32..=2).enumerate() {
                    let wt = D1_WEIGHTS[i] * D1_WEIGHTS[j];
                    if wt != 0.0 {
                        let p = point.shifted(a, oi as f64 * hd).shifted(b, oj as f64 * hd);
                        acc += wt * limit_at(&p).value;
                    }
                }
            }
            hess_w0[a][b] = acc / (hd * hd);
            hess_w0[b][a] = hess_w0[a][b];
        }
    }
    if !(error <= tol) {
        return Err(Error::Extrapolation { estimate: error, tol });
    }
    Ok(NumericTail {
        tail: HadamardTail {
            w0: base.value,
            wa: base.grad,
            wab: base.hess,
            wab_breve: base.hess,
            grad_w0,
            hess_w0,
        },
        error_estimate: error,
    })
}
