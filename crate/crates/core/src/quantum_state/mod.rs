//! Hadamard states of the conformally coupled massless scalar on a flat static
//! background and their transport to the conformally related spacetime.

mod classical;
mod slice;
mod tail;

pub use classical::{transport_classical_solution, GridSolution, TransportReport};
pub use slice::{
    build_hadamard_initial_data, ccr_positivity_check, gaussian_bank, slice_from_bulk, BulkTwoPoint,
    CcrReport, PatchQuadrature, SliceKernel, SliceStateData, SliceTestFunction, ThetaSlice,
    VacuumBulk,
};
pub use tail::{tail_limits, tail_limits_numeric, HadamardTail, NumericTail};
pub(crate) use tail::extrapolate_split;

use crate::background::{BackgroundGeometry, ChartPoint};
use crate::conformal::ConformalCurvature;
use crate::error::{Error, Result};
use crate::numeric::Scalar;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::Arc;

/// Couplings of the semiclassical field equations.
#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    pub newton_constant: f64,
    pub cosmological_constant: f64,
    /// Coefficient of the `I_ab` term in the field equations.
    pub alpha: f64,
    /// Coefficient of the `J_ab` term in the field equations.
    pub beta: f64,
    /// Renormalisation ambiguities multiplying `g, G, I, J`.
    pub ambiguities: [f64; 4],
    pub length_scale: f64,
    pub mass_sq: f64,
    pub coupling: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            newton_constant: 1.0,
            cosmological_constant: 3.0,
            alpha: 1.0,
            beta: 0.0,
            ambiguities: [0.0; 4],
            length_scale: 1.0,
            mass_sq: 0.0,
            coupling: 1.0 / 6.0,
        }
    }
}

impl Params {
    /// `2 alpha - 6 beta + G / (90 pi)`, the coefficient of `Box R` in the trace.
    pub fn trace_denominator(&self) -> f64 {
        2.0 * self.alpha - 6.0 * self.beta + self.newton_constant / (90.0 * PI)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, msg: &str| {
            Err(Error::InvalidParameter {
                key: key.into(),
                msg: msg.into(),
            })
        };
        let all = [
            self.newton_constant,
            self.cosmological_constant,
            self.alpha,
            self.beta,
            self.length_scale,
            self.mass_sq,
            self.coupling,
        ];
        if all.iter().chain(self.ambiguities.iter()).any(|x| !x.is_finite()) {
            return bad("params", "all values must be finite");
        }
        if !(self.newton_constant > 0.0) {
            return bad("newton_constant", "must be > 0");
        }
        if !(self.length_scale > 0.0) {
            return bad("length_scale", "must be > 0");
        }
        if self.mass_sq < 0.0 {
            return bad("mass_sq", "must be >= 0");
        }
        if self.trace_denominator().abs() < 1e-12 {
            return bad("alpha", "2 alpha - 6 beta + G/(90 pi) vanishes");
        }
        Ok(())
    }

    /// Evolution additionally requires the conformal field and `alpha != 0`.
    pub fn validate_for_evolution(&self) -> Result<()> {
        self.validate()?;
        if self.mass_sq != 0.0 {
            return Err(Error::InvalidParameter {
                key: "mass_sq".into(),
                msg: "evolution requires a massless field".into(),
            });
        }
        if (self.coupling - 1.0 / 6.0).abs() > 1e-15 {
            return Err(Error::InvalidParameter {
                key: "coupling".into(),
                msg: "evolution requires conformal coupling 1/6".into(),
            });
        }
        if self.alpha.abs() < 1e-14 {
            return Err(Error::InvalidParameter {
                key: "alpha".into(),
                msg: "the traceless evolution equation divides by alpha".into(),
            });
        }
        Ok(())
    }
}

/// A pair of points with the regulator of the `i epsilon` prescription.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BiPoint {
    pub x: ChartPoint,
    pub xp: ChartPoint,
    pub epsilon: f64,
}

impl BiPoint {
    pub fn new(x: ChartPoint, xp: ChartPoint, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidParameter {
                key: "epsilon".into(),
                msg: "regulator must be > 0".into(),
            });
        }
        Ok(Self { x, xp, epsilon })
    }

    pub fn time_separation(&self) -> f64 {
        self.x.coords[0] - self.xp.coords[0]
    }

    pub fn spatial_distance(&self) -> f64 {
        (1..4)
            .map(|i| (self.x.coords[i] - self.xp.coords[i]).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Half the squared flat interval.
    pub fn sigma(&self) -> f64 {
        let dt = self.time_separation();
        let r = self.spatial_distance();
        0.5 * (r * r - dt * dt)
    }

    pub fn sigma_eps(&self) -> Complex64 {
        Complex64::new(self.sigma(), self.epsilon * self.time_separation())
    }
}

/// Flat massless conformal parametrix `1 / (8 pi^2 sigma_eps)`. The logarithmic
/// part vanishes for this field, so `length_scale` does not enter.
pub fn flat_parametrix(bp: &BiPoint, _length_scale: f64) -> Result<Complex64> {
    let s = bp.sigma_eps();
    if s.norm() == 0.0 {
        return Err(Error::InvalidParameter {
            key: "bipoint".into(),
            msg: "sigma_eps vanishes".into(),
        });
    }
    Ok(1.0 / (8.0 * PI * PI * s))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StateId {
    Vacuum,
    Thermal { temperature: f64 },
}

impl StateId {
    /// Accepts `vacuum` or `thermal(T=<value>)`.
    pub fn parse(text: &str) -> Result<Self> {
        let s = text.trim();
        if s == "vacuum" {
            return Ok(Self::Vacuum);
        }
        if let Some(v) = s
            .strip_prefix("thermal(")
            .and_then(|r| r.strip_suffix(')'))
            .and_then(|r| r.trim().strip_prefix("T="))
        {
            if let Ok(t) = v.trim().parse::<f64>() {
                if t > 0.0 && t.is_finite() {
                    return Ok(Self::Thermal { temperature: t });
                }
            }
        }
        Err(Error::Unsupported(format!("state `{text}`")))
    }

    pub fn label(&self) -> String {
        match self {
            Self::Vacuum => "vacuum".into(),
            Self::Thermal { temperature } => format!("thermal(T={temperature})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WightmanValue {
    pub value: Complex64,
    /// Bound on the truncation error of the image sum (zero for the vacuum).
    pub tail_bound: f64,
}

/// Hurwitz zeta `sum_{k>=0} (q + k)^(-s)` for integer `s >= 2` and `q >= 1`,
/// by direct summation plus Euler-Maclaurin.
pub fn hurwitz_zeta(s: u32, q: f64) -> f64 {
    let m = 12;
    let mut acc = 0.0;
    for k in 0..m {
        acc += (q + k as f64).powi(-(s as i32));
    }
    let x = q + m as f64;
    let sf = s as f64;
    acc += x.powf(1.0 - sf) / (sf - 1.0) + 0.5 * x.powf(-sf);
    // Bernoulli corrections B_2k / (2k)! * s (s+1) ... (s+2k-2) x^(-s-2k+1)
    let bern = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0];
    let mut rising = sf;
    let mut fact = 2.0;
    for (k, b) in bern.iter().enumerate() {
        let j = 2 * (k + 1);
        acc += b / fact * rising * x.powf(-sf - j as f64 + 1.0);
        rising *= (sf + j as f64 - 1.0) * (sf + j as f64);
        fact *= ((j + 1) * (j + 2)) as f64;
    }
    acc
}

/// Thermal image sum `sum_n 1 / (4 pi^2 (r^2 - (z + i n beta)^2))` for complex
/// time separation `z`, truncated at `|n| <= n_images` with an asymptotic
/// remainder. Returns the value and a bound on the neglected terms.
pub fn thermal_image_sum(z: Complex64, r: f64, temperature: f64, n_images: usize) -> (Complex64, f64) {
    let a = Complex64::new(r * r, 0.0) - z * z;
    let (smooth, bound) = thermal_smooth_part(z, r, temperature, n_images);
    (smooth + 1.0 / (4.0 * PI * PI * a), bound)
}

/// The image sum without the `n = 0` term: the smooth remainder `w` of the
/// thermal state relative to the vacuum parametrix. Regular at coincidence.
pub fn thermal_smooth_part(z: Complex64, r: f64, temperature: f64, n_images: usize) -> (Complex64, f64) {
    let beta = 1.0 / temperature;
    let a = Complex64::new(r * r, 0.0) - z * z;
    let mut acc = Complex64::new(0.0, 0.0);
    for n in 1..=n_images {
        let nb2 = (n as f64 * beta).powi(2);
        let big_a = a + nb2;
        let big_b = 2.0 * n as f64 * beta * z;
        acc += 2.0 * big_a / (big_a * big_a + big_b * big_b);
    }
    let q = n_images as f64 + 1.0;
    let c4 = a + 4.0 * z * z;
    acc += 2.0 / (beta * beta) * hurwitz_zeta(2, q) - 2.0 * c4 / beta.powi(4) * hurwitz_zeta(4, q);
    let bound = 4.0 * (c4.norm().powi(2) + 4.0 * (a * z * z).norm()) / beta.powi(6) * hurwitz_zeta(6, q);
    let norm = 1.0 / (4.0 * PI * PI);
    (acc * norm, bound * norm)
}

/// Closed form of the thermal image sum for `r > 0`.
pub fn thermal_closed_form(z: Complex64, r: f64, temperature: f64) -> Complex64 {
    let coth = |u: Complex64| 1.0 / u.tanh();
    let k = PI * temperature;
    temperature / (8.0 * PI * r) * (coth(k * (r - z)) + coth(k * (r + z)))
}

pub const DEFAULT_IMAGES: usize = 64;

pub fn background_wightman(
    state: &StateId,
    bp: &BiPoint,
    bg: &BackgroundGeometry,
    n_images: usize,
) -> Result<WightmanValue> {
    if !bg.is_flat() {
        return Err(Error::Unsupported(format!(
            "state {} on background {}",
            state.label(),
            bg.descriptor.label()
        )));
    }
    let z = Complex64::new(bp.time_separation(), -bp.epsilon);
    let r = bp.spatial_distance();
    match state {
        StateId::Vacuum => Ok(WightmanValue {
            value: flat_parametrix(bp, 1.0)?,
            tail_bound: 0.0,
        }),
        StateId::Thermal { temperature } => {
            let (value, tail_bound) = thermal_image_sum(z, r, *temperature, n_images);
            Ok(WightmanValue { value, tail_bound })
        }
    }
}

pub type BiFunction = Arc<dyn Fn(&ChartPoint, &ChartPoint) -> Complex64 + Send + Sync>;
pub type ScalarField = Arc<dyn Fn(&ChartPoint) -> f64 + Send + Sync>;

/// `(x, x') -> e^(-theta(x)) G(x, x') e^(-theta(x'))`.
pub fn conformal_transport_state(g_bg: BiFunction, theta: ScalarField) -> BiFunction {
    Arc::new(move |x, xp| g_bg(x, xp) * ((-theta(x)).exp() * (-theta(xp)).exp()))
}

/// The coincidence limit `[v_1]` for mass `m^2` and coupling `xi`.
pub fn v1_limit<S: Scalar>(curv: &ConformalCurvature<S>, box_scalar: S, mass_sq: f64, coupling: f64) -> S {
    v1_from_invariants(curv.scalar, curv.ricci_sq, curv.riemann_sq, box_scalar, mass_sq, coupling)
}

pub fn v1_from_invariants<S: Scalar>(
    scalar: S,
    ricci_sq: S,
    riemann_sq: S,
    box_scalar: S,
    mass_sq: f64,
    coupling: f64,
) -> S {
    let m2 = S::from_f64(mass_sq);
    let dxi = S::from_f64(coupling) - S::frac(1.0, 6.0);
    let dxi5 = S::from_f64(coupling) - S::frac(1.0, 5.0);
    S::frac(1.0, 8.0) * m2 * m2 + S::frac(1.0, 4.0) * dxi * m2 * scalar
        - S::frac(1.0, 24.0) * dxi5 * box_scalar
        + S::frac(1.0, 8.0) * dxi * dxi * scalar * scalar
        - S::frac(1.0, 720.0) * ricci_sq
        + S::frac(1.0, 720.0) * riemann_sq
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(c: [f64; 4]) -> ChartPoint {
        ChartPoint::new(c).unwrap()
    }

    #[test]
    fn parametrix_spatial() {
        let bp = BiPoint::new(pt([0.0; 4]), pt([0.0, 0.7, 0.0, 0.0]), 1e-12).unwrap();
        let g = flat_parametrix(&bp, 1.0).unwrap();
        assert!((g.re - 1.0 / (4.0 * PI * PI * 0.49)).abs() < 1e-14);
        assert_eq!(g, flat_parametrix(&bp, 17.0).unwrap());
    }

    #[test]
    fn parametrix_null_coincident_rejected() {
        assert!(BiPoint::new(pt([0.0; 4]), pt([0.0; 4]), 0.0).is_err());
        let bp = BiPoint::new(pt([0.0; 4]), pt([0.0; 4]), 1e-3).unwrap();
        assert!(flat_parametrix(&bp, 1.0).is_err());
    }

    #[test]
    fn hurwitz_matches_riemann_zeta() {
        assert!((hurwitz_zeta(2, 1.0) - PI * PI / 6.0).abs() < 1e-14);
        assert!((hurwitz_zeta(4, 1.0) - PI.powi(4) / 90.0).abs() < 1e-14);
        let direct: f64 = (0..200000).map(|k| (3.5 + k as f64).powi(-4)).sum();
        assert!((hurwitz_zeta(4, 3.5) - direct).abs() < 1e-13);
    }

    #[test]
    fn image_sum_matches_closed_form() {
        for &(t, r, temp) in &[(0.1, 0.5, 1.0), (-0.3, 1.2, 0.4), (0.0, 0.2, 2.0)] {
            let z = Complex64::new(t, -1e-3);
            let (s, bound) = thermal_image_sum(z, r, temp, DEFAULT_IMAGES);
            let c = thermal_closed_form(z, r, temp);
            assert!((s - c).norm() <= bound.max(1e-13 * c.norm()) * 2.0, "{s} {c} {bound}");
        }
    }

    #[test]
    fn state_parse() {
        assert_eq!(StateId::parse("vacuum").unwrap(), StateId::Vacuum);
        assert_eq!(
            StateId::parse("thermal(T=0.25)").unwrap(),
            StateId::Thermal { temperature: 0.25 }
        );
        assert!(StateId::parse("thermal(T=-1)").is_err());
        assert!(StateId::parse("squeezed").is_err());
    }

    #[test]
    fn params_validation() {
        assert!(Params::default().validate().is_ok());
        let p = Params {
            newton_constant: -1.0,
            ..Params::default()
        };
        match p.validate() {
            Err(Error::InvalidParameter { key, .. }) => assert_eq!(key, "newton_constant"),
            other => panic!("{other:?}"),
        }
        let p = Params {
            alpha: 0.0,
            ..Params::default()
        };
        assert!(p.validate().is_ok());
        assert!(p.validate_for_evolution().is_err());
    }
}
