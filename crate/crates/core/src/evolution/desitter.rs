use super::initial::{build_theta_initial_data, InitialData, SliceGrid};
use super::sources::{trace_box_scalar, SourceContext};
use super::state::{Fields, Reduction};
use crate::background::ChartPoint;
use crate::error::{Error, Result};
use crate::numeric::Scalar;

/// Extended-variable fields of exact de Sitter of radius `radius` at
/// conformal time `eta`.
pub fn desitter_fields<S: Scalar>(radius: S, eta: S) -> Fields<S> {
    let mut f = Fields::zero();
    f.theta = (radius / eta).ln();
    f.v[0] = -S::one() / eta;
    f.w[0][0] = S::one() / (eta * eta);
    f.r = S::from_f64(12.0) / (radius * radius);
    f
}

/// `d/d eta` of [`desitter_fields`].
pub fn desitter_rates<S: Scalar>(eta: S) -> Fields<S> {
    let mut f = Fields::zero();
    f.theta = -S::one() / eta;
    f.v[0] = S::one() / (eta * eta);
    f.w[0][0] = S::from_f64(-2.0) / (eta * eta * eta);
    f
}

/// Refine a de Sitter radius in the working precision by secant iteration on
/// the trace equation of the exact solution.
pub fn polish_desitter_radius<S: Scalar>(start: f64, ctx: &SourceContext) -> Result<S> {
    let point = ChartPoint::new([1.0, 0.0, 0.0, 0.0])?;
    let residual = |a: S| trace_box_scalar(&desitter_fields(a, S::one()), ctx, &point);
    let mut x0 = S::from_f64(start);
    let mut x1 = S::from_f64(start * (1.0 + 1e-7));
    let mut f0 = residual(x0)?;
    for _ in 0..60 {
        let f1 = residual(x1)?;
        let df = f1 - f0;
        if df.to_f64() == 0.0 {
            break;
        }
        let step = f1 * (x1 - x0) / df;
        x0 = x1;
        f0 = f1;
        x1 -= step;
        if step.to_f64().abs() <= 1e-33 * x1.to_f64().abs() {
            break;
        }
    }
    if !x1.to_f64().is_finite() || (x1.to_f64() - start).abs() > 1e-6 * start.abs() {
        return Err(Error::Root(crate::numeric::RootError::NonFinite(x1.to_f64())));
    }
    Ok(x1)
}

/// Homogeneous de Sitter initial data at conformal time `eta0` built from the
/// exact `theta` jet.
pub fn desitter_initial_data<S: Scalar>(radius: S, eta0: f64, ctx: &SourceContext) -> Result<InitialData<S>> {
    let eta = S::from_f64(eta0);
    let theta = [
        vec![(radius / eta).ln()],
        vec![-S::one() / eta],
        vec![S::one() / (eta * eta)],
        vec![S::from_f64(-2.0) / (eta * eta * eta)],
    ];
    build_theta_initial_data(
        [&theta[0], &theta[1], &theta[2], &theta[3]],
        SliceGrid {
            reduction: Reduction::Homogeneous,
            spacing: 1.0,
            origin: 0.0,
            time: eta0,
        },
        ctx,
    )
}
