use super::ScalarField;
use crate::background::ChartPoint;
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::sync::Arc;

pub type SliceKernel = Arc<dyn Fn(&[f64; 3], &[f64; 3]) -> Complex64 + Send + Sync>;
pub type SliceField = Arc<dyn Fn(&[f64; 3]) -> f64 + Send + Sync>;

/// Field and momentum correlations on a constant-time slice.
#[derive(Clone)]
pub struct SliceStateData {
    pub time: f64,
    pub phi_phi: SliceKernel,
    pub pi_phi: SliceKernel,
    pub phi_pi: SliceKernel,
    pub pi_pi: SliceKernel,
}

fn dist2(x: &[f64; 3], y: &[f64; 3]) -> f64 {
    (0..3).map(|i| (x[i] - y[i]).powi(2)).sum()
}

impl SliceStateData {
    /// Minkowski vacuum data with the regulator `t - t' -> t - t' - i epsilon`.
    pub fn minkowski_vacuum(time: f64, epsilon: f64) -> Self {
        let e2 = epsilon * epsilon;
        let norm = 1.0 / (4.0 * PI * PI);
        Self {
            time,
            phi_phi: Arc::new(move |x, y| Complex64::new(norm / (dist2(x, y) + e2), 0.0)),
            pi_phi: Arc::new(move |x, y| {
                let d = dist2(x, y) + e2;
                Complex64::new(0.0, -2.0 * epsilon * norm / (d * d))
            }),
            phi_pi: Arc::new(move |x, y| {
                let d = dist2(x, y) + e2;
                Complex64::new(0.0, 2.0 * epsilon * norm / (d * d))
            }),
            pi_pi: Arc::new(move |x, y| {
                let d = dist2(x, y) + e2;
                Complex64::new(-norm * (2.0 / (d * d) - 8.0 * e2 / (d * d * d)), 0.0)
            }),
        }
    }

    /// The same data with the momentum-momentum kernel negated (not a state).
    pub fn with_negated_pi_pi(&self) -> Self {
        let k = self.pi_pi.clone();
        Self {
            pi_pi: Arc::new(move |x, y| -k(x, y)),
            ..self.clone()
        }
    }
}

/// Conformal factor and its time derivative restricted to the slice.
#[derive(Clone)]
pub struct ThetaSlice {
    pub theta0: SliceField,
    pub theta1: SliceField,
}

impl ThetaSlice {
    pub fn constant(theta0: f64, theta1: f64) -> Self {
        Self {
            theta0: Arc::new(move |_| theta0),
            theta1: Arc::new(move |_| theta1),
        }
    }
}

/// Hadamard data for `e^(2 theta) g_bg` from background data, with momenta
/// taken along `n = e^(-theta) d_t`.
pub fn build_hadamard_initial_data(bg_data: &SliceStateData, theta: &ThetaSlice) -> SliceStateData {
    // e^(-theta), e^(-2 theta), and n[e^(-theta)] = -theta1 e^(-2 theta)
    let factors = {
        let theta = theta.clone();
        move |x: &[f64; 3]| {
            let t0 = (theta.theta0)(x);
            let t1 = (theta.theta1)(x);
            let e1 = (-t0).exp();
            let e2 = e1 * e1;
            (e1, e2, -t1 * e2)
        }
    };
    let f = Arc::new(factors);
    let (pp, xp, px, xx) = (
        bg_data.phi_phi.clone(),
        bg_data.pi_phi.clone(),
        bg_data.phi_pi.clone(),
        bg_data.pi_pi.clone(),
    );
    let phi_phi: SliceKernel = {
        let (f, pp) = (f.clone(), pp.clone());
        Arc::new(move |x, y| {
            let (a, _, _) = f(x);
            let (b, _, _) = f(y);
            pp(x, y) * (a * b)
        })
    };
    let pi_phi: SliceKernel = {
        let (f, pp, xp) = (f.clone(), pp.clone(), xp.clone());
        Arc::new(move |x, y| {
            let (_, a2, na) = f(x);
            let (b, _, _) = f(y);
            xp(x, y) * (a2 * b) + pp(x, y) * (na * b)
        })
    };
    let phi_pi: SliceKernel = {
        let (f, pp, px) = (f.clone(), pp.clone(), px.clone());
        Arc::new(move |x, y| {
            let (a, _, _) = f(x);
            let (_, b2, nb) = f(y);
            px(x, y) * (a * b2) + pp(x, y) * (a * nb)
        })
    };
    let pi_pi: SliceKernel = Arc::new(move |x, y| {
        let (_, a2, na) = f(x);
        let (_, b2, nb) = f(y);
        xx(x, y) * (a2 * b2) + px(x, y) * (na * b2) + xp(x, y) * (a2 * nb) + pp(x, y) * (na * nb)
    });
    SliceStateData {
        time: bg_data.time,
        phi_phi,
        pi_phi,
        phi_pi,
        pi_pi,
    }
}

/// A bulk two-point function with its time derivatives in either argument.
pub trait BulkTwoPoint: Send + Sync {
    fn value(&self, x: &ChartPoint, xp: &ChartPoint) -> Complex64;
    fn d_t(&self, x: &ChartPoint, xp: &ChartPoint) -> Complex64;
    fn d_tp(&self, x: &ChartPoint, xp: &ChartPoint) -> Complex64;
    fn d_t_tp(&self, x: &ChartPoint, xp: &ChartPoint) -> Complex64;
}

/// Minkowski vacuum `1 / (4 pi^2 (r^2 - (t - t' - i epsilon)^2))`.
#[derive(Clone, Copy, Debug)]
pub struct VacuumBulk {
    pub epsilon: f64,
}

impl VacuumBulk {
    fn parts(&self, x: &ChartPoint, xp: &ChartPoint) -> (Complex64, Complex64) {
        let z = Complex64::new(x.coords[0] - xp.coords[0], -self.epsilon);
        let r2: f64 = (1..4).map(|i| (x.coords[i] - xp.coords[i]).powi(2)).sum();
        (z, r2 - z * z)
    }
}

impl BulkTwoPoint for VacuumBulk {
    fn value(&self, x: &ChartPoint, xp: &ChartPoint) -> Complex64 {
        let (_, d) = self.parts(x, xp);
        1.0 / (4.0 * PI * PI * d)
    }
    fn d_t(&self, x: &ChartPoint, xp: &ChartPoint) -> Complex64 {
        let (z, d) = self.parts(x, xp);
        2.0 * z / (4.0 * PI * PI * d * d)
    }
    fn d_tp(&self, x: &ChartPoint, xp: &ChartPoint) -> Complex64 {
        -self.d_t(x, xp)
    }
    fn d_t_tp(&self, x: &ChartPoint, xp: &ChartPoint) -> Complex64 {
        let (z, d) = self.parts(x, xp);
        -(2.0 / (d * d) + 8.0 * z * z / (d * d * d)) / (4.0 * PI * PI)
    }
}

/// Slice data of the bulk kernel `e^(-theta(x)) G(x, x') e^(-theta(x'))`,
/// computed from bulk derivatives by the product rule.
pub fn slice_from_bulk(
    bulk: Arc<dyn BulkTwoPoint>,
    theta: ScalarField,
    theta_dt: ScalarField,
    time: f64,
) -> SliceStateData {
    let lift = move |x: &[f64; 3]| ChartPoint {
        coords: [time, x[0], x[1], x[2]],
    };
    // (e^-theta, d_t e^-theta, e^-theta again as the normal rescaling)
    let ex = {
        let (theta, theta_dt) = (theta.clone(), theta_dt.clone());
        Arc::new(move |p: &ChartPoint| {
            let e = (-theta(p)).exp();
            (e, -theta_dt(p) * e)
        })
    };
    let mk = |which: u8| -> SliceKernel {
        let (bulk, ex) = (bulk.clone(), ex.clone());
        Arc::new(move |x, y| {
            let (p, q) = (lift(x), lift(y));
            let (e, de) = ex(&p);
            let (f, df) = ex(&q);
            match which {
                0 => bulk.value(&p, &q) * (e * f),
                1 => e * (bulk.value(&p, &q) * (de * f) + bulk.d_t(&p, &q) * (e * f)),
                2 => f * (bulk.value(&p, &q) * (e * df) + bulk.d_tp(&p, &q) * (e * f)),
                _ => {
                    (e * f)
                        * (bulk.value(&p, &q) * (de * df)
                            + bulk.d_tp(&p, &q) * (de * f)
                            + bulk.d_t(&p, &q) * (e * df)
                            + bulk.d_t_tp(&p, &q) * (e * f))
                }
            }
        })
    };
    SliceStateData {
        time,
        phi_phi: mk(0),
        pi_phi: mk(1),
        phi_pi: mk(2),
        pi_pi: mk(3),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SliceTestFunction {
    Gaussian { center: [f64; 3], width: f64, amplitude: f64 },
}

impl SliceTestFunction {
    pub fn eval(&self, x: &[f64; 3]) -> f64 {
        match self {
            Self::Gaussian {
                center,
                width,
                amplitude,
            } => amplitude * (-dist2(x, center) / (2.0 * width * width)).exp(),
        }
    }
}

/// `n` unit-amplitude Gaussians of the given width with centres on a
/// deterministic quasi-random pattern inside `[-spread, spread]^3`.
pub fn gaussian_bank(n: usize, spread: f64, width: f64) -> Vec<SliceTestFunction> {
    let golden = [0.754_877_666_246_693, 0.569_840_290_998_053, 0.430_159_709_001_947];
    (0..n)
        .map(|k| {
            let center = std::array::from_fn(|i| {
                let u = (0.5 + golden[i] * k as f64).fract();
                spread * (2.0 * u - 1.0)
            });
            SliceTestFunction::Gaussian {
                center,
                width,
                amplitude: 1.0,
            }
        })
        .collect()
}

/// Composite Gauss-Legendre tensor rule on the cube `[-half_width, half_width]^3`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PatchQuadrature {
    pub half_width: f64,
    pub panels: usize,
    pub order: usize,
    /// Also evaluate with two more nodes per panel and report the change.
    pub convergence_check: bool,
}

impl Default for PatchQuadrature {
    fn default() -> Self {
        Self {
            half_width: 2.5,
            panels: 4,
            order: 4,
            convergence_check: false,
        }
    }
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * p - pm) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

impl PatchQuadrature {
    pub fn nodes(&self) -> Vec<([f64; 3], f64)> {
        let (gx, gw) = gauss_legendre(self.order);
        let h = 2.0 * self.half_width / self.panels as f64;
        let mut line = Vec::new();
        for p in 0..self.panels {
            let a = -self.half_width + p as f64 * h;
            for k in 0..self.order {
                line.push((a + 0.5 * h * (gx[k] + 1.0), 0.5 * h * gw[k]));
            }
        }
        let mut out = Vec::with_capacity(line.len().pow(3));
        for &(x, wx) in &line {
            for &(y, wy) in &line {
                for &(z, wz) in &line {
                    out.push(([x, y, z], wx * wy * wz));
                }
            }
        }
        out
    }

    fn refined(&self) -> Self {
        Self {
            order: self.order + 2,
            convergence_check: false,
            ..*self
        }
    }
}

#[derive(Clone, Debug)]
pub struct CcrReport {
    /// `max |<f, (G_pi_phi - G_phi_pi) g> + i <f, g>|` over bank pairs.
    pub ccr_residual: f64,
    pub min_eigenvalue: f64,
    pub gram_norm: f64,
    pub passed: bool,
    /// Max change of the smeared kernels when the rule is refined.
    pub quadrature_change: Option<f64>,
}

/// `M[k][l] = int int K(x, x') f_k(x) f_l(x')` for each of the four kernels,
/// plus the plain overlaps `<f_k, f_l>`.
fn smeared(data: &SliceStateData, bank: &[SliceTestFunction], quad: &PatchQuadrature) -> ([DMatrix<Complex64>; 4], DMatrix<f64>) {
    let nodes = quad.nodes();
    let m = bank.len();
    let vals: Vec<Vec<f64>> = nodes.iter().map(|(x, _)| bank.iter().map(|f| f.eval(x)).collect()).collect();
    let kernels = [&data.phi_phi, &data.pi_phi, &data.phi_pi, &data.pi_pi];
    // Each row i contributes w_i f_k(x_i) sum_j K(x_i, x_j) w_j f_l(x_j); rows
    // are computed independently and reduced in index order.
    let rows: Vec<[Vec<Complex64>; 4]> = nodes
        .par_iter()
        .enumerate()
        .map(|(i, (xi, wi))| {
            let mut acc: [Vec<Complex64>; 4] = std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); m * m]);
            let mut inner: [Vec<Complex64>; 4] = std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); m]);
            for (j, (xj, wj)) in nodes.iter().enumerate() {
                for (kk, kern) in kernels.iter().enumerate() {
                    let kv = kern(xi, xj) * *wj;
                    for l in 0..m {
                        inner[kk][l] += kv * vals[j][l];
                    }
                }
            }
            for kk in 0..4 {
                for k in 0..m {
                    let fk = wi * vals[i][k];
                    for l in 0..m {
                        acc[kk][k * m + l] = inner[kk][l] * fk;
                    }
                }
            }
            acc
        })
        .collect();
    let mut mats: [DMatrix<Complex64>; 4] = std::array::from_fn(|_| DMatrix::zeros(m, m));
    for row in &rows {
        for kk in 0..4 {
            for k in 0..m {
                for l in 0..m {
                    mats[kk][(k, l)] += row[kk][k * m + l];
                }
            }
        }
    }
    let mut overlap = DMatrix::zeros(m, m);
    for (i, (_, w)) in nodes.iter().enumerate() {
        for k in 0..m {
            for l in 0..m {
                overlap[(k, l)] += w * vals[i][k] * vals[i][l];
            }
        }
    }
    (mats, overlap)
}

/// Smeared CCR residual and the smallest eigenvalue of the positivity Gram
/// matrix over `(u, v)` pairs drawn from the bank. Passes when the minimum
/// eigenvalue is at least `-tol_rel * ||Gram||`.
pub fn ccr_positivity_check(
    data: &SliceStateData,
    bank: &[SliceTestFunction],
    quad: &PatchQuadrature,
    tol_rel: f64,
) -> Result<CcrReport> {
    if bank.is_empty() {
        return Err(Error::InvalidParameter {
            key: "test_bank".into(),
            msg: "must be nonempty".into(),
        });
    }
    let m = bank.len();
    let ([pp, xp, px, xx], overlap) = smeared(data, bank, quad);
    let mut ccr_residual = 0.0f64;
    for k in 0..m {
        for l in 0..m {
            let r = xp[(k, l)] - px[(k, l)] + Complex64::new(0.0, overlap[(k, l)]);
            ccr_residual = ccr_residual.max(r.norm());
        }
    }
    // Block order (u, v): [[G_pipi, -G_piphi], [-G_phipi, G_phiphi]].
    let mut gram = DMatrix::<Complex64>::zeros(2 * m, 2 * m);
    for k in 0..m {
        for l in 0..m {
            gram[(k, l)] = xx[(k, l)];
            gram[(k, m + l)] = -xp[(k, l)];
            gram[(m + k, l)] = -px[(k, l)];
            gram[(m + k, m + l)] = pp[(k, l)];
        }
    }
    let herm = (&gram + gram.adjoint()) * Complex64::new(0.5, 0.0);
    let gram_norm = herm.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let eig = herm.symmetric_eigenvalues();
    let min_eigenvalue = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    let quadrature_change = if quad.convergence_check {
        let (fine, _) = smeared(data, bank, &quad.refined());
        let coarse = [&pp, &xp, &px, &xx];
        let mut change = 0.0f64;
        for kk in 0..4 {
            change = change.max((&fine[kk] - coarse[kk]).iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
        Some(change)
    } else {
        None
    };
    Ok(CcrReport {
        ccr_residual,
        min_eigenvalue,
        gram_norm,
        passed: min_eigenvalue >= -tol_rel * gram_norm,
        quadrature_change,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(5);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert!((s - 2.0 / 9.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn identity_transport_is_identity() {
        let data = SliceStateData::minkowski_vacuum(0.0, 0.1);
        let out = build_hadamard_initial_data(&data, &ThetaSlice::constant(0.0, 0.0));
        let (x, y) = ([0.1, 0.2, 0.3], [-0.4, 0.0, 0.5]);
        assert_eq!((out.phi_phi)(&x, &y), (data.phi_phi)(&x, &y));
        assert_eq!((out.pi_phi)(&x, &y), (data.pi_phi)(&x, &y));
        assert_eq!((out.phi_pi)(&x, &y), (data.phi_pi)(&x, &y));
        assert_eq!((out.pi_pi)(&x, &y), (data.pi_pi)(&x, &y));
    }

    #[test]
    fn constant_factor_scalings() {
        let c = 0.37;
        let data = SliceStateData::minkowski_vacuum(0.0, 0.1);
        let out = build_hadamard_initial_data(&data, &ThetaSlice::constant(c, 0.0));
        let (x, y) = ([0.1, 0.2, 0.3], [-0.4, 0.0, 0.5]);
        let r = |a: Complex64, b: Complex64| (a / b).re;
        assert!((r((out.phi_phi)(&x, &y), (data.phi_phi)(&x, &y)) - (-2.0 * c).exp()).abs() < 1e-14);
        assert!((r((out.pi_phi)(&x, &y), (data.pi_phi)(&x, &y)) - (-3.0 * c).exp()).abs() < 1e-14);
        assert!((r((out.phi_pi)(&x, &y), (data.phi_pi)(&x, &y)) - (-3.0 * c).exp()).abs() < 1e-14);
        assert!((r((out.pi_pi)(&x, &y), (data.pi_pi)(&x, &y)) - (-4.0 * c).exp()).abs() < 1e-14);
    }

    #[test]
    fn vacuum_kernels_hermitian() {
        let d = SliceStateData::minkowski_vacuum(0.0, 0.2);
        let (x, y) = ([0.1, 0.2, 0.3], [-0.4, 0.0, 0.5]);
        assert_eq!((d.phi_phi)(&x, &y), (d.phi_phi)(&y, &x).conj());
        assert_eq!((d.pi_pi)(&x, &y), (d.pi_pi)(&y, &x).conj());
        assert_eq!((d.pi_phi)(&x, &y), (d.phi_pi)(&y, &x).conj());
    }

    #[test]
    fn empty_bank_rejected() {
        let d = SliceStateData::minkowski_vacuum(0.0, 0.2);
        assert!(ccr_positivity_check(&d, &[], &PatchQuadrature::default(), 1e-10).is_err());
    }
}
