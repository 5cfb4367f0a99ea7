//! Static backgrounds on a single adapted chart, their analytic curvature, and
//! a finite-difference curvature oracle used to test everything else.

use crate::error::{Error, Result};
use crate::numeric::fd::{D1_WEIGHTS, D2_WEIGHTS};
use crate::numeric::Scalar;
use crate::tensor::*;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChartPoint {
    pub coords: [f64; 4],
}

impl ChartPoint {
    pub fn new(coords: [f64; 4]) -> Result<Self> {
        if coords.iter().all(|c| c.is_finite()) {
            Ok(Self { coords })
        } else {
            Err(Error::NonFinite("chart point"))
        }
    }

    pub fn t(&self) -> f64 {
        self.coords[0]
    }

    pub fn shifted(&self, dir: usize, by: f64) -> Self {
        let mut c = self.coords;
        c[dir] += by;
        Self { coords: c }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum BackgroundDescriptor {
    Minkowski,
    /// `-dt^2 + a^2 (dchi^2 + sin^2 chi dOmega^2)` in chart `(t, chi, vartheta, phi)`.
    UltrastaticSphere { radius: f64 },
}

impl BackgroundDescriptor {
    /// Accepts `minkowski` or `sphere(radius=<a>)`.
    pub fn parse(text: &str) -> Result<Self> {
        let s = text.trim();
        if s == "minkowski" {
            return Ok(Self::Minkowski);
        }
        if let Some(inner) = s.strip_prefix("sphere(").and_then(|r| r.strip_suffix(')')) {
            if let Some(v) = inner.trim().strip_prefix("radius=") {
                let radius: f64 = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::UnknownDescriptor(text.to_string()))?;
                return Ok(Self::UltrastaticSphere { radius });
            }
        }
        Err(Error::UnknownDescriptor(text.to_string()))
    }

    pub fn label(&self) -> String {
        match self {
            Self::Minkowski => "minkowski".into(),
            Self::UltrastaticSphere { radius } => format!("sphere(radius={radius})"),
        }
    }
}

/// Riemann, Ricci, scalar and the two quadratic invariants at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvatureBundle<S = f64> {
    pub riemann: Rank4<S>,
    pub ricci: Mat4<S>,
    pub scalar: S,
    pub ricci_sq: S,
    pub riemann_sq: S,
}

impl<S: Scalar> CurvatureBundle<S> {
    pub fn zero() -> Self {
        Self {
            riemann: zero4444(),
            ricci: zero44(),
            scalar: S::zero(),
            ricci_sq: S::zero(),
            riemann_sq: S::zero(),
        }
    }

    /// Contractions and invariants from a covariant Riemann tensor.
    pub fn from_riemann(riemann: Rank4<S>, inv: &Mat4<S>) -> Self {
        let mut ricci = zero44();
        for b in 0..4 {
            for d in 0..4 {
                let mut acc = S::zero();
                for a in 0..4 {
                    for c in 0..4 {
                        acc += inv[a][c] * riemann[a][b][c][d];
                    }
                }
                ricci[b][d] = acc;
            }
        }
        let scalar = contract2(inv, &ricci);
        let ricci_sq = contract2(&raise2(inv, &ricci), &ricci);
        let up = raise_all(&riemann, inv);
        let mut riemann_sq = S::zero();
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        riemann_sq += up[a][b][c][d] * riemann[a][b][c][d];
                    }
                }
            }
        }
        Self {
            riemann,
            ricci,
            scalar,
            ricci_sq,
            riemann_sq,
        }
    }

    pub fn to_f64(&self) -> CurvatureBundle<f64> {
        let mut riemann = zero4444();
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        riemann[a][b][c][d] = self.riemann[a][b][c][d].to_f64();
                    }
                }
            }
        }
        CurvatureBundle {
            riemann,
            ricci: to_f64_mat(&self.ricci),
            scalar: self.scalar.to_f64(),
            ricci_sq: self.ricci_sq.to_f64(),
            riemann_sq: self.riemann_sq.to_f64(),
        }
    }
}

/// Raise every slot of a rank-4 covariant tensor.
pub fn raise_all<S: Scalar>(t: &Rank4<S>, inv: &Mat4<S>) -> Rank4<S> {
    let mut cur = *t;
    for slot in 0..4 {
        let mut next = zero4444();
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        let mut acc = S::zero();
                        for m in 0..4 {
                            let (src, g) = match slot {
                                0 => (cur[m][j][k][l], inv[i][m]),
                                1 => (cur[i][m][k][l], inv[j][m]),
                                2 => (cur[i][j][m][l], inv[k][m]),
                                _ => (cur[i][j][k][m], inv[l][m]),
                            };
                            acc += g * src;
                        }
                        next[i][j][k][l] = acc;
                    }
                }
            }
        }
        cur = next;
    }
    cur
}

/// Metric with its first and second coordinate derivatives at a point:
/// `d[c][a][b] = d_c g_ab`, `dd[c][d][a][b] = d_c d_d g_ab`.
#[derive(Clone, Copy, Debug)]
pub struct MetricJet<S = f64> {
    pub g: Mat4<S>,
    pub d: Rank3<S>,
    pub dd: Rank4<S>,
}

/// Christoffel symbols `gamma[a][b][c] = Gamma^a_bc` and their derivatives
/// `dgamma[e][a][b][c] = d_e Gamma^a_bc` from a metric jet.
pub fn christoffels_from_jet<S: Scalar>(
    jet: &MetricJet<S>,
    inv: &Mat4<S>,
) -> (Rank3<S>, [Rank3<S>; 4]) {
    let half = S::frac(1.0, 2.0);
    let mut lower = zero444::<S>(); // Gamma_dbc
    let mut dlower = [zero444::<S>(); 4];
    for d in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                lower[d][b][c] = half * (jet.d[b][d][c] + jet.d[c][d][b] - jet.d[d][b][c]);
                for e in 0..4 {
                    dlower[e][d][b][c] =
                        half * (jet.dd[e][b][d][c] + jet.dd[e][c][d][b] - jet.dd[e][d][b][c]);
                }
            }
        }
    }
    // d_e g^{ad} = -g^{ap} d_e g_pq g^{qd}
    let mut dinv = [zero44::<S>(); 4];
    for (e, di) in dinv.iter_mut().enumerate() {
        let r = raise2(inv, &jet.d[e]);
        *di = map_mat(&r, |x| -x);
    }
    let mut gamma = zero444();
    let mut dgamma = [zero444(); 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                let mut acc = S::zero();
                for d in 0..4 {
                    acc += inv[a][d] * lower[d][b][c];
                }
                gamma[a][b][c] = acc;
                for e in 0..4 {
                    let mut acc = S::zero();
                    for d in 0..4 {
                        acc += dinv[e][a][d] * lower[d][b][c] + inv[a][d] * dlower[e][d][b][c];
                    }
                    dgamma[e][a][b][c] = acc;
                }
            }
        }
    }
    (gamma, dgamma)
}

/// Covariant Riemann `R_abcd = g_ae R^e_bcd` from Christoffels and their derivatives.
pub fn riemann_from_christoffels<S: Scalar>(
    g: &Mat4<S>,
    gamma: &Rank3<S>,
    dgamma: &[Rank3<S>; 4],
) -> Rank4<S> {
    let mut mixed = zero4444::<S>();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let mut acc = dgamma[c][a][d][b] - dgamma[d][a][c][b];
                    for e in 0..4 {
                        acc += gamma[a][c][e] * gamma[e][d][b] - gamma[a][d][e] * gamma[e][c][b];
                    }
                    mixed[a][b][c][d] = acc;
                }
            }
        }
    }
    let mut out = zero4444();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let mut acc = S::zero();
                    for e in 0..4 {
                        acc += g[a][e] * mixed[e][b][c][d];
                    }
                    out[a][b][c][d] = acc;
                }
            }
        }
    }
    out
}

pub fn curvature_from_jet<S: Scalar>(jet: &MetricJet<S>) -> Option<CurvatureBundle<S>> {
    let inv = invert(&jet.g)?;
    let (gamma, dgamma) = christoffels_from_jet(jet, &inv);
    let riemann = riemann_from_christoffels(&jet.g, &gamma, &dgamma);
    Some(CurvatureBundle::from_riemann(riemann, &inv))
}

/// Metric jet by fourth-order central differences with one Richardson level.
pub fn fd_metric_jet<F>(metric_fn: &F, point: &ChartPoint, step: f64) -> Result<MetricJet<f64>>
where
    F: Fn(&ChartPoint) -> Mat4<f64> + ?Sized,
{
    if !(step > 0.0) {
        return Err(Error::InvalidParameter {
            key: "step".into(),
            msg: "must be positive".into(),
        });
    }
    let sample = |p: &ChartPoint| -> Result<Mat4<f64>> {
        let g = metric_fn(p);
        if g.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("metric sample"));
        }
        invert(&g).ok_or(Error::SingularMetric(p.coords))?;
        Ok(g)
    };
    // samples enter relative to the centre value so constant metrics give exact zeros
    let g0 = sample(point)?;
    let rel = |p: &ChartPoint| -> Result<Mat4<f64>> { Ok(sub_mat(&sample(p)?, &g0)) };
    let single = |h: f64| -> Result<(Rank3<f64>, Rank4<f64>)> {
        let mut d = zero444::<f64>();
        let mut dd = zero4444::<f64>();
        for c in 0..4 {
            for (k, off) in (-2i32..=2).enumerate() {
                let g = rel(&point.shifted(c, off as f64 * h))?;
                for a in 0..4 {
                    for b in 0..4 {
                        d[c][a][b] += D1_WEIGHTS[k] * g[a][b] / h;
                        dd[c][c][a][b] += D2_WEIGHTS[k] * g[a][b] / (h * h);
                    }
                }
            }
            for e in (c + 1)..4 {
                for (i, oi) in (-2i32..=2).enumerate() {
                    if D1_WEIGHTS[i] == 0.0 {
                        continue;
                    }
                    for (j, oj) in (-2i32..=2).enumerate() {
                        if D1_WEIGHTS[j] == 0.0 {
                            continue;
                        }
                        let p = point.shifted(c, oi as f64 * h).shifted(e, oj as f64 * h);
                        let g = rel(&p)?;
                        let wgt = D1_WEIGHTS[i] * D1_WEIGHTS[j] / (h * h);
                        for a in 0..4 {
                            for b in 0..4 {
                                dd[c][e][a][b] += wgt * g[a][b];
                            }
                        }
                    }
                }
                dd[e][c] = dd[c][e];
            }
        }
        Ok((d, dd))
    };
    let (d1, dd1) = single(step)?;
    let (d2, dd2) = single(0.5 * step)?;
    let mut jet = MetricJet {
        g: g0,
        d: zero444(),
        dd: zero4444(),
    };
    for c in 0..4 {
        for a in 0..4 {
            for b in 0..4 {
                jet.d[c][a][b] = (16.0 * d2[c][a][b] - d1[c][a][b]) / 15.0;
                for e in 0..4 {
                    jet.dd[c][e][a][b] = (16.0 * dd2[c][e][a][b] - dd1[c][e][a][b]) / 15.0;
                }
            }
        }
    }
    Ok(jet)
}

/// Independent curvature oracle: finite-difference metric jet, then the generic
/// Christoffel/Riemann contraction. Truncation error is O(step^4) before the
/// Richardson step and O(step^6) after it for smooth metrics.
pub fn fd_curvature_oracle<F>(metric_fn: &F, point: &ChartPoint, step: f64) -> Result<CurvatureBundle>
where
    F: Fn(&ChartPoint) -> Mat4<f64> + ?Sized,
{
    let jet = fd_metric_jet(metric_fn, point, step)?;
    curvature_from_jet(&jet).ok_or(Error::SingularMetric(point.coords))
}

/// Christoffel symbols of `metric_fn` by finite differences.
pub fn fd_christoffels<F>(metric_fn: &F, point: &ChartPoint, step: f64) -> Result<Rank3<f64>>
where
    F: Fn(&ChartPoint) -> Mat4<f64> + ?Sized,
{
    let jet = fd_metric_jet(metric_fn, point, step)?;
    let inv = invert(&jet.g).ok_or(Error::SingularMetric(point.coords))?;
    Ok(christoffels_from_jet(&jet, &inv).0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BackgroundGeometry {
    pub descriptor: BackgroundDescriptor,
}

pub fn build_background(spec: &BackgroundDescriptor) -> Result<BackgroundGeometry> {
    if let BackgroundDescriptor::UltrastaticSphere { radius } = spec {
        if !(radius.is_finite() && *radius > 0.0) {
            return Err(Error::NotPositiveDefinite(format!(
                "sphere radius {radius} gives a degenerate spatial metric"
            )));
        }
    }
    Ok(BackgroundGeometry {
        descriptor: spec.clone(),
    })
}

impl BackgroundGeometry {
    pub fn minkowski() -> Self {
        Self {
            descriptor: BackgroundDescriptor::Minkowski,
        }
    }

    pub fn is_flat(&self) -> bool {
        matches!(self.descriptor, BackgroundDescriptor::Minkowski)
    }

    pub fn killing_vector(&self) -> Vec4<f64> {
        [1.0, 0.0, 0.0, 0.0]
    }

    pub fn metric(&self, p: &ChartPoint) -> Mat4<f64> {
        match self.descriptor {
            BackgroundDescriptor::Minkowski => minkowski(),
            BackgroundDescriptor::UltrastaticSphere { radius } => {
                let [_, chi, th, _] = p.coords;
                let a2 = radius * radius;
                let s2 = chi.sin().powi(2);
                let mut g = zero44();
                g[0][0] = -1.0;
                g[1][1] = a2;
                g[2][2] = a2 * s2;
                g[3][3] = a2 * s2 * th.sin().powi(2);
                g
            }
        }
    }

    pub fn inverse_metric(&self, p: &ChartPoint) -> Mat4<f64> {
        let g = self.metric(p);
        let mut inv = zero44();
        for a in 0..4 {
            inv[a][a] = 1.0 / g[a][a];
        }
        inv
    }

    pub fn christoffels(&self, p: &ChartPoint) -> Rank3<f64> {
        let mut gamma = zero444();
        if let BackgroundDescriptor::UltrastaticSphere { .. } = self.descriptor {
            let [_, chi, th, _] = p.coords;
            let (sc, cc) = chi.sin_cos();
            let (st, ct) = th.sin_cos();
            gamma[1][2][2] = -sc * cc;
            gamma[1][3][3] = -sc * cc * st * st;
            gamma[2][1][2] = cc / sc;
            gamma[2][2][1] = cc / sc;
            gamma[2][3][3] = -st * ct;
            gamma[3][1][3] = cc / sc;
            gamma[3][3][1] = cc / sc;
            gamma[3][2][3] = ct / st;
            gamma[3][3][2] = ct / st;
        }
        gamma
    }

    pub fn curvature(&self, p: &ChartPoint) -> CurvatureBundle {
        match self.descriptor {
            BackgroundDescriptor::Minkowski => CurvatureBundle::zero(),
            BackgroundDescriptor::UltrastaticSphere { radius } => {
                let g = self.metric(p);
                let k = 1.0 / (radius * radius);
                let mut r = zero4444();
                for a in 1..4 {
                    for b in 1..4 {
                        for c in 1..4 {
                            for d in 1..4 {
                                r[a][b][c][d] = k * (g[a][c] * g[b][d] - g[a][d] * g[b][c]);
                            }
                        }
                    }
                }
                CurvatureBundle::from_riemann(r, &self.inverse_metric(p))
            }
        }
    }

    /// The metric as a position function, for the oracle.
    pub fn metric_fn(&self) -> impl Fn(&ChartPoint) -> Mat4<f64> + '_ {
        move |p| self.metric(p)
    }
}

/// Maximum violation of pair antisymmetry, pair symmetry and the first Bianchi
/// identity of a covariant Riemann tensor.
pub fn riemann_symmetry_defect(r: &Rank4<f64>) -> f64 {
    let mut worst = 0.0f64;
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let x = r[a][b][c][d];
                    worst = worst
                        .max((x + r[b][a][c][d]).abs())
                        .max((x + r[a][b][d][c]).abs())
                        .max((x - r[c][d][a][b]).abs())
                        .max((x + r[a][c][d][b] + r[a][d][b][c]).abs());
                }
            }
        }
    }
    worst
}
