use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RootError {
    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo:e}, f(hi) = {f_hi:e}")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("non-finite function value at {0}")]
    NonFinite(f64),
}

/// Bracketed root by bisection accelerated with the Illinois false-position
/// step. Terminates when the bracket is below `tol` relative.
pub fn bisect_root<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Result<f64, RootError> {
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    if !f_lo.is_finite() {
        return Err(RootError::NonFinite(lo));
    }
    if !f_hi.is_finite() {
        return Err(RootError::NonFinite(hi));
    }
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(RootError::NoSignChange { lo, hi, f_lo, f_hi });
    }
    let mut side = 0i8;
    for _ in 0..400 {
        let x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        let x = if x > lo && x < hi { x } else { 0.5 * (lo + hi) };
        let fx = f(x);
        if !fx.is_finite() {
            return Err(RootError::NonFinite(x));
        }
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == f_lo.signum() {
            lo = x;
            f_lo = fx;
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            f_hi = fx;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        }
        if (hi - lo).abs() <= tol * hi.abs().max(lo.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok(if f_lo.abs() < f_hi.abs() { lo } else { hi })
}
