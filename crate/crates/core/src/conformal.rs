//! Curvature of `g = e^(2 theta) g_bg` from the jet `(theta, v, w)` of the
//! conformal factor, and the operators relating wave operators of the two
//! metrics.

use crate::background::{BackgroundGeometry, ChartPoint, CurvatureBundle};
use crate::error::{Error, Result};
use crate::numeric::Scalar;
use crate::tensor::*;

/// Default lower bound on `e^(2 theta)`.
pub const CONFORMAL_FACTOR_FLOOR: f64 = 1e-30;

/// `theta`, `v_a = D_a theta`, `w_ab = D_a D_b theta` with `D` the background
/// connection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConformalJet<S = f64> {
    pub theta: S,
    pub v: Vec4<S>,
    pub w: Mat4<S>,
}

impl<S: Scalar> ConformalJet<S> {
    pub fn zero() -> Self {
        Self {
            theta: S::zero(),
            v: zero4(),
            w: zero44(),
        }
    }

    /// de Sitter in the conformally flat chart: `theta = ln(radius / eta)`.
    pub fn de_sitter(radius: S, eta: S) -> Self {
        let mut jet = Self::zero();
        jet.theta = (radius / eta).ln();
        jet.v[0] = -S::one() / eta;
        jet.w[0][0] = S::one() / (eta * eta);
        jet
    }

    pub fn lift<T: Scalar>(&self, f: impl Fn(S) -> T) -> ConformalJet<T> {
        ConformalJet {
            theta: f(self.theta),
            v: self.v.map(&f),
            w: map_mat(&self.w, &f),
        }
    }
}

/// Index order of the `Ricci x Riemann` contraction in the fourth-order terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ContractionConvention {
    /// `R^cd R_cadb`.
    #[default]
    Folacci,
    /// `R^cd R_cdab`, which vanishes identically.
    Literal,
}

impl ContractionConvention {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "folacci" => Some(Self::Folacci),
            "literal" => Some(Self::Literal),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Folacci => "folacci",
            Self::Literal => "literal",
        }
    }
}

/// `R^cd R_{c.d.}` per convention.
pub fn ricci_riemann_contraction<S: Scalar>(
    ricci: &Mat4<S>,
    riemann: &Rank4<S>,
    inv: &Mat4<S>,
    convention: ContractionConvention,
) -> Mat4<S> {
    let up = raise2(inv, ricci);
    let mut out = zero44();
    for a in 0..4 {
        for b in 0..4 {
            let mut acc = S::zero();
            for c in 0..4 {
                for d in 0..4 {
                    let r = match convention {
                        ContractionConvention::Folacci => riemann[c][a][d][b],
                        ContractionConvention::Literal => riemann[c][d][a][b],
                    };
                    acc += up[c][d] * r;
                }
            }
            out[a][b] = acc;
        }
    }
    out
}

#[derive(Clone, Copy, Debug)]
pub struct ConformalCurvature<S = f64> {
    pub metric: Mat4<S>,
    pub inverse: Mat4<S>,
    /// `R_abcd`.
    pub riemann: Rank4<S>,
    /// `R_abc^d`.
    pub riemann_mixed: Rank4<S>,
    pub ricci: Mat4<S>,
    pub scalar: S,
    /// `R_ab - R g_ab / 4`.
    pub traceless: Mat4<S>,
    pub ricci_riemann: Mat4<S>,
    pub ricci_sq: S,
    pub riemann_sq: S,
    pub convention: ContractionConvention,
}

impl<S: Scalar> ConformalCurvature<S> {
    pub fn bundle(&self) -> CurvatureBundle<f64> {
        CurvatureBundle {
            riemann: self.riemann,
            ricci: self.ricci,
            scalar: self.scalar,
            ricci_sq: self.ricci_sq,
            riemann_sq: self.riemann_sq,
        }
        .to_f64()
    }
}

/// `C^c_ab = 2 delta^c_(a v_b) - g_ab g^cd v_d`, stored as `c[c][a][b]`.
pub fn christoffel_difference<S: Scalar>(
    jet: &ConformalJet<S>,
    bg: &BackgroundGeometry,
    point: &ChartPoint,
) -> Rank3<S> {
    let g: Mat4<S> = lift_mat(&bg.metric(point));
    let inv: Mat4<S> = lift_mat(&bg.inverse_metric(point));
    christoffel_difference_with(&jet.v, &g, &inv)
}

pub fn christoffel_difference_with<S: Scalar>(v: &Vec4<S>, g: &Mat4<S>, inv: &Mat4<S>) -> Rank3<S> {
    let v_up = mat_vec(inv, v);
    let mut out = zero444();
    for c in 0..4 {
        for a in 0..4 {
            for b in 0..4 {
                out[c][a][b] = delta::<S>(c, a) * v[b] + delta::<S>(c, b) * v[a] - g[a][b] * v_up[c];
            }
        }
    }
    out
}

fn check_factor<S: Scalar>(theta: S, floor: f64) -> Result<S> {
    let factor = (theta + theta).exp();
    let f = factor.to_f64();
    if !f.is_finite() {
        return Err(Error::NonFinite("conformal factor"));
    }
    if f < floor {
        return Err(Error::DegenerateConformalFactor { factor: f, floor });
    }
    Ok(factor)
}

pub fn conformal_riemann<S: Scalar>(
    jet: &ConformalJet<S>,
    bg: &BackgroundGeometry,
    point: &ChartPoint,
    convention: ContractionConvention,
) -> Result<ConformalCurvature<S>> {
    conformal_riemann_with_floor(jet, bg, point, convention, CONFORMAL_FACTOR_FLOOR)
}

pub fn conformal_riemann_with_floor<S: Scalar>(
    jet: &ConformalJet<S>,
    bg: &BackgroundGeometry,
    point: &ChartPoint,
    convention: ContractionConvention,
    floor: f64,
) -> Result<ConformalCurvature<S>> {
    let factor = check_factor(jet.theta, floor)?;
    let gb: Mat4<S> = lift_mat(&bg.metric(point));
    let ib: Mat4<S> = lift_mat(&bg.inverse_metric(point));
    let rb = bg.curvature(point).riemann;
    let v = &jet.v;
    let w = &jet.w;
    let v_up = mat_vec(&ib, v);
    let v_sq = (0..4).fold(S::zero(), |acc, a| acc + v[a] * v_up[a]);
    // w^d_b = g^de w_eb
    let w_up = {
        let mut m = zero44::<S>();
        for d in 0..4 {
            for b in 0..4 {
                for e in 0..4 {
                    m[d][b] += ib[d][e] * w[e][b];
                }
            }
        }
        m
    };
    let mut mixed = zero4444::<S>();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let mut bg_term = S::zero();
                    for e in 0..4 {
                        bg_term += S::from_f64(rb[a][b][c][e]) * ib[e][d];
                    }
                    let dl = |i: usize| delta::<S>(d, i);
                    mixed[a][b][c][d] = bg_term + dl(a) * w[c][b] - dl(b) * w[c][a]
                        - (gb[c][a] * w_up[d][b] - gb[c][b] * w_up[d][a])
                        + (v[a] * dl(b) - v[b] * dl(a)) * v[c]
                        - (v[a] * gb[b][c] - v[b] * gb[a][c]) * v_up[d]
                        - (gb[c][a] * dl(b) - gb[c][b] * dl(a)) * v_sq;
                }
            }
        }
    }
    let g = scale_mat(&gb, factor);
    let inv = scale_mat(&ib, S::one() / factor);
    let mut riemann = zero4444::<S>();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let mut acc = S::zero();
                    for e in 0..4 {
                        acc += mixed[a][b][c][e] * g[e][d];
                    }
                    riemann[a][b][c][d] = acc;
                }
            }
        }
    }
    let b = CurvatureBundle::from_riemann(riemann, &inv);
    let quarter = S::frac(1.0, 4.0);
    let traceless = sub_mat(&b.ricci, &scale_mat(&g, b.scalar * quarter));
    let ricci_riemann = ricci_riemann_contraction(&b.ricci, &riemann, &inv, convention);
    Ok(ConformalCurvature {
        metric: g,
        inverse: inv,
        riemann,
        riemann_mixed: mixed,
        ricci: b.ricci,
        scalar: b.scalar,
        traceless,
        ricci_riemann,
        ricci_sq: b.ricci_sq,
        riemann_sq: b.riemann_sq,
        convention,
    })
}

/// Second derivatives of curvature needed by the fourth-order tensors.
#[derive(Clone, Copy, Debug)]
pub struct CurvatureDerivatives<S = f64> {
    /// `R_;ab`.
    pub scalar_hessian: Mat4<S>,
    /// `Box R`.
    pub box_scalar: S,
    /// `Box R_ab`.
    pub box_ricci: Mat4<S>,
}

impl<S: Scalar> CurvatureDerivatives<S> {
    pub fn zero() -> Self {
        Self {
            scalar_hessian: zero44(),
            box_scalar: S::zero(),
            box_ricci: zero44(),
        }
    }
}

/// The two conserved fourth-order tensors `(I_ab, J_ab)`. Derivative data is
/// mandatory; pass [`CurvatureDerivatives::zero`] only for covariantly constant
/// curvature.
pub fn geometric_ij<S: Scalar>(
    curv: &ConformalCurvature<S>,
    derivs: Option<&CurvatureDerivatives<S>>,
) -> Result<(Mat4<S>, Mat4<S>)> {
    let d = derivs.ok_or_else(|| Error::InvalidParameter {
        key: "curvature derivatives".into(),
        msg: "required for I_ab and J_ab".into(),
    })?;
    let half = S::frac(1.0, 2.0);
    let two = S::from_f64(2.0);
    let g = &curv.metric;
    let mut i = zero44();
    let mut j = zero44();
    for a in 0..4 {
        for b in 0..4 {
            i[a][b] = d.scalar_hessian[a][b] - half * g[a][b] * d.box_scalar - d.box_ricci[a][b]
                + half * g[a][b] * curv.ricci_sq
                - two * curv.ricci_riemann[a][b];
            j[a][b] = two * d.scalar_hessian[a][b] - two * g[a][b] * d.box_scalar
                + half * g[a][b] * curv.scalar * curv.scalar
                - two * curv.scalar * curv.ricci[a][b];
        }
    }
    Ok((i, j))
}

/// `6 Box_bg theta + 6 |v|^2_bg + e^(2 theta) R_aux - R_bg`.
pub fn box_theta_residual<S: Scalar>(
    jet: &ConformalJet<S>,
    aux_scalar: S,
    bg: &BackgroundGeometry,
    point: &ChartPoint,
) -> S {
    let ib: Mat4<S> = lift_mat(&bg.inverse_metric(point));
    let box_theta = contract2(&ib, &jet.w);
    let v_up = mat_vec(&ib, &jet.v);
    let v_sq = (0..4).fold(S::zero(), |acc, a| acc + jet.v[a] * v_up[a]);
    let six = S::from_f64(6.0);
    six * box_theta + six * v_sq + (jet.theta + jet.theta).exp() * aux_scalar
        - S::from_f64(bg.curvature(point).scalar)
}

/// `2 v^c d_c f`: the scalar wave operators satisfy
/// `Box_g f = e^(-2 theta) (Box_bg f + 2 v^c d_c f)`.
pub fn scalar_box_correction<S: Scalar>(v: &Vec4<S>, inv_bg: &Mat4<S>, df: &Vec4<S>) -> S {
    let v_up = mat_vec(inv_bg, v);
    (0..4).fold(S::zero(), |acc, c| acc + v_up[c] * df[c]).scale(2.0)
}

/// Correction `D_ab` in `e^(2 theta) Box_g T_ab = Box_bg T_ab + D_ab` for a
/// covariant 2-tensor, given `dt[c][a][b] = D_c T_ab` (background covariant).
pub fn tensor_box_correction<S: Scalar>(
    jet: &ConformalJet<S>,
    g_bg: &Mat4<S>,
    inv_bg: &Mat4<S>,
    t: &Mat4<S>,
    dt: &Rank3<S>,
) -> Mat4<S> {
    let c = christoffel_difference_with(&jet.v, g_bg, inv_bg);
    // D_d C^e_ca = delta^e_c w_ad + delta^e_a w_cd - g_ca g^ef w_fd
    let w_up = {
        let mut m = zero44::<S>();
        for e in 0..4 {
            for d in 0..4 {
                for f in 0..4 {
                    m[e][d] += inv_bg[e][f] * jet.w[f][d];
                }
            }
        }
        m
    };
    let dc = |d: usize, e: usize, cc: usize, a: usize| -> S {
        delta::<S>(e, cc) * jet.w[a][d] + delta::<S>(e, a) * jet.w[cc][d] - g_bg[cc][a] * w_up[e][d]
    };
    // S_cab = D_c T_ab - C^e_ca T_eb - C^e_cb T_ae
    let mut s = zero444::<S>();
    for cc in 0..4 {
        for a in 0..4 {
            for b in 0..4 {
                let mut acc = dt[cc][a][b];
                for e in 0..4 {
                    acc -= c[e][cc][a] * t[e][b] + c[e][cc][b] * t[a][e];
                }
                s[cc][a][b] = acc;
            }
        }
    }
    let mut out = zero44();
    for a in 0..4 {
        for b in 0..4 {
            let mut acc = S::zero();
            for cc in 0..4 {
                for d in 0..4 {
                    let gi = inv_bg[cc][d];
                    if gi.to_f64() == 0.0 {
                        continue;
                    }
                    let mut inner = S::zero();
                    for e in 0..4 {
                        inner -= dc(d, e, cc, a) * t[e][b]
                            + c[e][cc][a] * dt[d][e][b]
                            + dc(d, e, cc, b) * t[a][e]
                            + c[e][cc][b] * dt[d][a][e]
                            + c[e][d][cc] * s[e][a][b]
                            + c[e][d][a] * s[cc][e][b]
                            + c[e][d][b] * s[cc][a][e];
                    }
                    acc += gi * inner;
                }
            }
            out[a][b] = acc;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::background::{build_background, BackgroundDescriptor};

    fn origin() -> ChartPoint {
        ChartPoint::new([1.0, 0.2, -0.4, 0.7]).unwrap()
    }

    #[test]
    fn identity_factor_reproduces_background() {
        let bg = build_background(&BackgroundDescriptor::UltrastaticSphere { radius: 2.0 }).unwrap();
        let p = ChartPoint::new([0.0, 0.8, 1.2, 0.3]).unwrap();
        let curv = conformal_riemann(&ConformalJet::<f64>::zero(), &bg, &p, Default::default()).unwrap();
        let exact = bg.curvature(&p);
        assert!((curv.scalar - 1.5).abs() < 1e-14);
        assert!(max_abs_rank4(&{
            let mut d = curv.riemann;
            for a in 0..4 {
                for b in 0..4 {
                    for c in 0..4 {
                        for e in 0..4 {
                            d[a][b][c][e] -= exact.riemann[a][b][c][e];
                        }
                    }
                }
            }
            d
        }) < 1e-14);
    }

    #[test]
    fn de_sitter_invariants() {
        let bg = BackgroundGeometry::minkowski();
        let alpha = 1.3;
        let curv = conformal_riemann(&ConformalJet::de_sitter(alpha, 0.7), &bg, &origin(), Default::default())
            .unwrap();
        let k = 1.0 / (alpha * alpha);
        assert!((curv.scalar - 12.0 * k).abs() < 1e-12);
        assert!((curv.ricci_sq - 36.0 * k * k).abs() < 1e-11);
        assert!((curv.riemann_sq - 24.0 * k * k).abs() < 1e-11);
        let (i, j) = geometric_ij(&curv, Some(&CurvatureDerivatives::zero())).unwrap();
        assert!(max_abs_mat(&i) < 1e-11);
        assert!(max_abs_mat(&j) < 1e-11);
    }

    #[test]
    fn literal_contraction_vanishes() {
        let bg = BackgroundGeometry::minkowski();
        let mut jet = ConformalJet::de_sitter(1.0, 0.5);
        jet.v[2] = 0.3;
        jet.w[1][3] = 0.7;
        jet.w[3][1] = 0.7;
        let curv = conformal_riemann(&jet, &bg, &origin(), ContractionConvention::Literal).unwrap();
        assert!(max_abs_mat(&curv.ricci_riemann) < 1e-13);
        assert!(contract2(&curv.inverse, &curv.traceless).abs() < 1e-12);
    }

    #[test]
    fn missing_derivatives_is_error() {
        let bg = BackgroundGeometry::minkowski();
        let curv = conformal_riemann(&ConformalJet::<f64>::zero(), &bg, &origin(), Default::default()).unwrap();
        assert!(geometric_ij(&curv, None).is_err());
    }

    #[test]
    fn degenerate_factor_rejected() {
        let bg = BackgroundGeometry::minkowski();
        let mut jet = ConformalJet::<f64>::zero();
        jet.theta = -40.0;
        let r = conformal_riemann(&jet, &bg, &origin(), Default::default());
        assert!(matches!(r, Err(Error::DegenerateConformalFactor { .. })));
    }

    #[test]
    fn box_theta_de_sitter_and_slope() {
        let bg = BackgroundGeometry::minkowski();
        let alpha = 0.9;
        let jet = ConformalJet::de_sitter(alpha, 0.6);
        let r0 = 12.0 / (alpha * alpha);
        assert!(box_theta_residual(&jet, r0, &bg, &origin()).abs() < 1e-12);
        let delta = 1e-3;
        let r1 = box_theta_residual(&jet, r0 + delta, &bg, &origin());
        let factor = (2.0 * jet.theta).exp();
        assert!((r1 - factor * delta).abs() < 1e-12);
    }
}
