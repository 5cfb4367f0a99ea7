//! Component arrays for chart-based tensors in four dimensions.
//!
//! Index order follows the slot order of the tensor; all Riemann arrays are
//! fully covariant `R_abcd` unless a name says otherwise.

use crate::numeric::Scalar;

pub type Vec4<S> = [S; 4];
pub type Mat4<S> = [[S; 4]; 4];
pub type Rank3<S> = [[[S; 4]; 4]; 4];
pub type Rank4<S> = [[[[S; 4]; 4]; 4]; 4];

/// Independent components of a symmetric 4×4 tensor, row-major upper triangle.
pub const SYM_PAIRS: [(usize, usize); 10] = [
    (0, 0),
    (0, 1),
    (0, 2),
    (0, 3),
    (1, 1),
    (1, 2),
    (1, 3),
    (2, 2),
    (2, 3),
    (3, 3),
];

pub fn sym_index(a: usize, b: usize) -> usize {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    SYM_PAIRS.iter().position(|&p| p == (a, b)).unwrap()
}

pub fn zero4<S: Scalar>() -> Vec4<S> {
    [S::zero(); 4]
}
pub fn zero44<S: Scalar>() -> Mat4<S> {
    [[S::zero(); 4]; 4]
}
pub fn zero444<S: Scalar>() -> Rank3<S> {
    [[[S::zero(); 4]; 4]; 4]
}
pub fn zero4444<S: Scalar>() -> Rank4<S> {
    [[[[S::zero(); 4]; 4]; 4]; 4]
}

pub fn identity<S: Scalar>() -> Mat4<S> {
    let mut m = zero44();
    for (a, row) in m.iter_mut().enumerate() {
        row[a] = S::one();
    }
    m
}

pub fn minkowski<S: Scalar>() -> Mat4<S> {
    let mut m = identity();
    m[0][0] = -S::one();
    m
}

pub fn delta<S: Scalar>(a: usize, b: usize) -> S {
    if a == b {
        S::one()
    } else {
        S::zero()
    }
}

pub fn map_mat<S: Scalar, T: Scalar>(m: &Mat4<S>, f: impl Fn(S) -> T) -> Mat4<T> {
    let mut out = zero44();
    for a in 0..4 {
        for b in 0..4 {
            out[a][b] = f(m[a][b]);
        }
    }
    out
}

pub fn lift_mat<T: Scalar>(m: &Mat4<f64>) -> Mat4<T> {
    map_mat(m, T::from_f64)
}

pub fn scale_mat<S: Scalar>(m: &Mat4<S>, k: S) -> Mat4<S> {
    map_mat(m, |x| x * k)
}

pub fn add_mat<S: Scalar>(x: &Mat4<S>, y: &Mat4<S>) -> Mat4<S> {
    let mut out = *x;
    for a in 0..4 {
        for b in 0..4 {
            out[a][b] += y[a][b];
        }
    }
    out
}

pub fn sub_mat<S: Scalar>(x: &Mat4<S>, y: &Mat4<S>) -> Mat4<S> {
    let mut out = *x;
    for a in 0..4 {
        for b in 0..4 {
            out[a][b] -= y[a][b];
        }
    }
    out
}

pub fn symmetrize<S: Scalar>(m: &Mat4<S>) -> Mat4<S> {
    let mut out = zero44();
    let half = S::frac(1.0, 2.0);
    for a in 0..4 {
        for b in 0..4 {
            out[a][b] = (m[a][b] + m[b][a]) * half;
        }
    }
    out
}

/// `A^{ab} B_ab`.
pub fn contract2<S: Scalar>(up: &Mat4<S>, down: &Mat4<S>) -> S {
    let mut acc = S::zero();
    for a in 0..4 {
        for b in 0..4 {
            acc += up[a][b] * down[a][b];
        }
    }
    acc
}

/// `g^{ac} g^{bd} T_cd`.
pub fn raise2<S: Scalar>(inv: &Mat4<S>, t: &Mat4<S>) -> Mat4<S> {
    let mut half = zero44();
    for a in 0..4 {
        for d in 0..4 {
            let mut acc = S::zero();
            for c in 0..4 {
                acc += inv[a][c] * t[c][d];
            }
            half[a][d] = acc;
        }
    }
    let mut out = zero44();
    for a in 0..4 {
        for b in 0..4 {
            let mut acc = S::zero();
            for d in 0..4 {
                acc += half[a][d] * inv[b][d];
            }
            out[a][b] = acc;
        }
    }
    out
}

pub fn mat_vec<S: Scalar>(m: &Mat4<S>, v: &Vec4<S>) -> Vec4<S> {
    let mut out = zero4();
    for a in 0..4 {
        for b in 0..4 {
            out[a] += m[a][b] * v[b];
        }
    }
    out
}

/// Inverse by Gauss–Jordan with partial pivoting chosen on the leading value.
/// Returns `None` for a numerically singular matrix.
pub fn invert<S: Scalar>(m: &Mat4<S>) -> Option<Mat4<S>> {
    let mut a = *m;
    let mut inv = identity::<S>();
    let scale = m
        .iter()
        .flatten()
        .map(|x| x.to_f64().abs())
        .fold(0.0, f64::max);
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&i, &j| {
                a[i][col]
                    .to_f64()
                    .abs()
                    .partial_cmp(&a[j][col].to_f64().abs())
                    .unwrap()
            })
            .unwrap();
        if !(a[pivot][col].to_f64().abs() > 1e-14 * scale) {
            return None;
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = S::one() / a[col][col];
        for k in 0..4 {
            a[col][k] *= p;
            inv[col][k] *= p;
        }
        for row in 0..4 {
            if row != col {
                let f = a[row][col];
                for k in 0..4 {
                    let (ak, ik) = (a[col][k], inv[col][k]);
                    a[row][k] -= f * ak;
                    inv[row][k] -= f * ik;
                }
            }
        }
    }
    Some(inv)
}

pub fn max_abs_mat(m: &Mat4<f64>) -> f64 {
    m.iter().flatten().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub fn max_abs_rank4(r: &Rank4<f64>) -> f64 {
    r.iter().flatten().flatten().flatten().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub fn to_f64_mat<S: Scalar>(m: &Mat4<S>) -> Mat4<f64> {
    map_mat(m, |x| x.to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invert_minkowski_like() {
        let mut m: Mat4<f64> = minkowski();
        m[1][2] = 0.3;
        m[2][1] = 0.3;
        m[3][3] = 2.0;
        let inv = invert(&m).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let mut s = 0.0;
                for c in 0..4 {
                    s += m[a][c] * inv[c][b];
                }
                assert!((s - delta::<f64>(a, b)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn singular_is_none() {
        let m: Mat4<f64> = [[0.0; 4]; 4];
        assert!(invert(&m).is_none());
    }

    #[test]
    fn sym_index_round_trip() {
        for (k, &(a, b)) in SYM_PAIRS.iter().enumerate() {
            assert_eq!(sym_index(a, b), k);
            assert_eq!(sym_index(b, a), k);
        }
    }
}
