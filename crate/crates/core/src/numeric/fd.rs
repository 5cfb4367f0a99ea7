//! Fourth-order central finite-difference stencils.

/// d/dx with a five-point stencil, O(h^4).
pub fn d1<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

/// d²/dx² with a five-point stencil, O(h^4).
pub fn d2<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (-f(x - 2.0 * h) + 16.0 * f(x - h) - 30.0 * f(x) + 16.0 * f(x + h) - f(x + 2.0 * h))
        / (12.0 * h * h)
}

/// One Richardson level on top of an O(h^4) estimate: `(16 D(h/2) - D(h)) / 15`.
pub fn richardson4<F: Fn(f64) -> f64>(estimate: F, h: f64) -> f64 {
    (16.0 * estimate(0.5 * h) - estimate(h)) / 15.0
}

/// Weights of the five-point first-derivative stencil at offsets -2..=2.
pub const D1_WEIGHTS: [f64; 5] = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
/// Weights of the five-point second-derivative stencil at offsets -2..=2.
pub const D2_WEIGHTS: [f64; 5] = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];

/// Periodic first and second derivatives of a sampled field with spacing `h`.
pub fn periodic_derivatives<S: super::Scalar>(values: &[S], h: f64) -> (Vec<S>, Vec<S>) {
    let n = values.len();
    let inv_h = S::one() / S::from_f64(h);
    let inv_h2 = inv_h * inv_h;
    let mut first = Vec::with_capacity(n);
    let mut second = Vec::with_capacity(n);
    for i in 0..n {
        let at = |k: isize| values[((i as isize + k).rem_euclid(n as isize)) as usize];
        let (m2, m1, c, p1, p2) = (at(-2), at(-1), at(0), at(1), at(2));
        first.push(((m2 - p2) + (p1 - m1).scale(8.0)) / S::from_f64(12.0) * inv_h);
        second.push(
            ((-m2 - p2) + (m1 + p1).scale(16.0) - c.scale(30.0)) / S::from_f64(12.0) * inv_h2,
        );
    }
    (first, second)
}
