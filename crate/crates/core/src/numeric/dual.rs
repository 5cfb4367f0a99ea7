use super::Scalar;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// First-order forward-mode number: `re + eps * du`, `eps^2 = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<S> {
    pub re: S,
    pub du: S,
}

impl<S: Scalar> Dual<S> {
    pub fn new(re: S, du: S) -> Self {
        Self { re, du }
    }
    pub fn constant(re: S) -> Self {
        Self { re, du: S::zero() }
    }
}

impl<S: Scalar> Add for Dual<S> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.re + o.re, self.du + o.du)
    }
}
impl<S: Scalar> Sub for Dual<S> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.re - o.re, self.du - o.du)
    }
}
impl<S: Scalar> Mul for Dual<S> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Self::new(self.re * o.re, self.du * o.re + self.re * o.du)
    }
}
impl<S: Scalar> Div for Dual<S> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let inv = S::one() / o.re;
        let q = self.re * inv;
        Self::new(q, (self.du - q * o.du) * inv)
    }
}
impl<S: Scalar> Neg for Dual<S> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.re, -self.du)
    }
}
impl<S: Scalar> AddAssign for Dual<S> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}
impl<S: Scalar> SubAssign for Dual<S> {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}
impl<S: Scalar> MulAssign for Dual<S> {
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}

impl<S: Scalar> Scalar for Dual<S> {
    fn from_f64(x: f64) -> Self {
        Self::constant(S::from_f64(x))
    }
    fn to_f64(self) -> f64 {
        self.re.to_f64()
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        Self::new(e, e * self.du)
    }
    fn ln(self) -> Self {
        Self::new(self.re.ln(), self.du / self.re)
    }
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        Self::new(s, self.du / (s + s))
    }
    fn pi() -> Self {
        Self::constant(S::pi())
    }
    fn frac(num: f64, den: f64) -> Self {
        Self::constant(S::frac(num, den))
    }
}

/// Second-order forward-mode number in four variables: value, gradient and
/// Hessian with respect to the chart coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2<S> {
    pub val: S,
    pub grad: [S; 4],
    pub hess: [[S; 4]; 4],
}

impl<S: Scalar> Jet2<S> {
    pub fn constant(val: S) -> Self {
        Self {
            val,
            grad: [S::zero(); 4],
            hess: [[S::zero(); 4]; 4],
        }
    }

    pub fn new(val: S, grad: [S; 4], hess: [[S; 4]; 4]) -> Self {
        Self { val, grad, hess }
    }

    /// Chain rule for a unary function with derivatives `d1`, `d2` at `val`.
    fn compose(self, f: S, d1: S, d2: S) -> Self {
        let mut out = Self::constant(f);
        for a in 0..4 {
            out.grad[a] = d1 * self.grad[a];
            for b in 0..4 {
                out.hess[a][b] = d1 * self.hess[a][b] + d2 * self.grad[a] * self.grad[b];
            }
        }
        out
    }
}

impl<S: Scalar> Add for Jet2<S> {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        self.val += o.val;
        for a in 0..4 {
            self.grad[a] += o.grad[a];
            for b in 0..4 {
                self.hess[a][b] += o.hess[a][b];
            }
        }
        self
    }
}
impl<S: Scalar> Neg for Jet2<S> {
    type Output = Self;
    fn neg(mut self) -> Self {
        self.val = -self.val;
        for a in 0..4 {
            self.grad[a] = -self.grad[a];
            for b in 0..4 {
                self.hess[a][b] = -self.hess[a][b];
            }
        }
        self
    }
}
impl<S: Scalar> Sub for Jet2<S> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}
impl<S: Scalar> Mul for Jet2<S> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut out = Self::constant(self.val * o.val);
        for a in 0..4 {
            out.grad[a] = self.grad[a] * o.val + self.val * o.grad[a];
            for b in 0..4 {
                out.hess[a][b] = self.hess[a][b] * o.val
                    + self.val * o.hess[a][b]
                    + self.grad[a] * o.grad[b]
                    + self.grad[b] * o.grad[a];
            }
        }
        out
    }
}
impl<S: Scalar> Div for Jet2<S> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let inv = S::one() / o.val;
        let recip = o.compose(inv, -inv * inv, (inv * inv * inv).scale(2.0));
        self * recip
    }
}
impl<S: Scalar> AddAssign for Jet2<S> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}
impl<S: Scalar> SubAssign for Jet2<S> {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}
impl<S: Scalar> MulAssign for Jet2<S> {
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}

impl<S: Scalar> Scalar for Jet2<S> {
    fn from_f64(x: f64) -> Self {
        Self::constant(S::from_f64(x))
    }
    fn to_f64(self) -> f64 {
        self.val.to_f64()
    }
    fn exp(self) -> Self {
        let e = self.val.exp();
        self.compose(e, e, e)
    }
    fn ln(self) -> Self {
        let inv = S::one() / self.val;
        self.compose(self.val.ln(), inv, -inv * inv)
    }
    fn sqrt(self) -> Self {
        let s = self.val.sqrt();
        let d1 = S::one() / (s + s);
        let d2 = -d1 / (self.val + self.val);
        self.compose(s, d1, d2)
    }
    fn pi() -> Self {
        Self::constant(S::pi())
    }
    fn frac(num: f64, den: f64) -> Self {
        Self::constant(S::frac(num, den))
    }
}
