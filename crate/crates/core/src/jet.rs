//! Truncated bivariate Taylor arithmetic.
//!
//! A [`Jet`] stores the Taylor coefficients of a function of `(x, y)` about a
//! base point up to total degree [`MAX_ORDER`]. Arithmetic on jets propagates
//! exact derivatives through any composition of ring operations and the
//! supported elementary functions, so evaluating an expression tree on seeded
//! jets yields its partial derivatives without symbolic differentiation.
//!
//! Coefficients are stored in graded order: index `d(d+1)/2 + j` holds the
//! coefficient of `hx^i hy^j` with `d = i + j`.

use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use crate::scalar::{Real, Scalar};

pub const MAX_ORDER: usize = 4;
pub const JET_LEN: usize = 15;

const MUL_LEN: usize = 70;
/// Number of product terms needed for each truncation order.
const MUL_PREFIX: [usize; MAX_ORDER + 1] = [1, 5, 15, 35, 70];
const MUL_TABLE: [(u8, u8, u8); MUL_LEN] = build_mul_table();

/// Graded index of the monomial `hx^i hy^j`.
#[inline]
pub const fn index(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

/// Number of coefficients carried by a jet of the given order.
#[inline]
pub const fn len_for_order(order: usize) -> usize {
    (order + 1) * (order + 2) / 2
}

const fn build_mul_table() -> [(u8, u8, u8); MUL_LEN] {
    let mut table = [(0u8, 0u8, 0u8); MUL_LEN];
    let mut n = 0;
    let mut d = 0;
    while d <= MAX_ORDER {
        let mut da = 0;
        while da <= d {
            let db = d - da;
            let mut ja = 0;
            while ja <= da {
                let ia = da - ja;
                let mut jb = 0;
                while jb <= db {
                    let ib = db - jb;
                    table[n] = (
                        index(ia, ja) as u8,
                        index(ib, jb) as u8,
                        index(ia + ib, ja + jb) as u8,
                    );
                    n += 1;
                    jb += 1;
                }
                ja += 1;
            }
            da += 1;
        }
        d += 1;
    }
    table
}

const FACTORIAL: [f64; MAX_ORDER + 1] = [1.0, 1.0, 2.0, 6.0, 24.0];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<T> {
    coeffs: [T; JET_LEN],
    order: u8,
}

impl<T: Real> Jet<T> {
    /// A constant, exact at every order.
    pub fn constant(v: T) -> Self {
        let mut coeffs = [T::zero(); JET_LEN];
        coeffs[0] = v;
        Self {
            coeffs,
            order: MAX_ORDER as u8,
        }
    }

    /// The coordinate function `x` expanded about `x0`.
    pub fn variable_x(x0: T, order: usize) -> Self {
        let mut j = Self::constant(x0).truncated(order);
        if order >= 1 {
            j.coeffs[index(1, 0)] = T::one();
        }
        j
    }

    /// The coordinate function `y` expanded about `y0`.
    pub fn variable_y(y0: T, order: usize) -> Self {
        let mut j = Self::constant(y0).truncated(order);
        if order >= 1 {
            j.coeffs[index(0, 1)] = T::one();
        }
        j
    }

    /// Builds a jet from partial derivatives listed in graded order.
    pub fn from_derivatives(derivs: &[T]) -> Self {
        let mut order = 0;
        while len_for_order(order) < derivs.len() {
            order += 1;
        }
        assert!(
            order <= MAX_ORDER && len_for_order(order) == derivs.len(),
            "derivative count {} does not match a full jet",
            derivs.len()
        );
        let mut coeffs = [T::zero(); JET_LEN];
        for d in 0..=order {
            for j in 0..=d {
                let i = d - j;
                let k = index(i, j);
                coeffs[k] = derivs[k] / T::from_f64(FACTORIAL[i] * FACTORIAL[j]);
            }
        }
        Self {
            coeffs,
            order: order as u8,
        }
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order as usize
    }

    #[inline]
    pub fn value(&self) -> T {
        self.coeffs[0]
    }

    /// Taylor coefficient of `hx^i hy^j`; zero above the truncation order.
    pub fn coeff(&self, i: usize, j: usize) -> T {
        if i + j > self.order() {
            T::zero()
        } else {
            self.coeffs[index(i, j)]
        }
    }

    /// The partial derivative `∂^(i+j) / ∂x^i ∂y^j` at the base point.
    pub fn derivative(&self, i: usize, j: usize) -> T {
        self.coeff(i, j) * T::from_f64(FACTORIAL[i] * FACTORIAL[j])
    }

    /// `(∂/∂x, ∂/∂y)` at the base point.
    pub fn gradient(&self) -> [T; 2] {
        [self.derivative(1, 0), self.derivative(0, 1)]
    }

    pub fn truncated(mut self, order: usize) -> Self {
        let order = order.min(self.order());
        for k in len_for_order(order)..JET_LEN {
            self.coeffs[k] = T::zero();
        }
        self.order = order as u8;
        self
    }

    /// Jet of `∂f/∂x`, one order lower.
    pub fn dx(&self) -> Self {
        self.partial(0)
    }

    /// Jet of `∂f/∂y`, one order lower.
    pub fn dy(&self) -> Self {
        self.partial(1)
    }

    fn partial(&self, axis: usize) -> Self {
        let n = self.order();
        let mut coeffs = [T::zero(); JET_LEN];
        if n == 0 {
            return Self { coeffs, order: 0 };
        }
        for d in 0..n {
            for j in 0..=d {
                let i = d - j;
                let (src, k) = if axis == 0 {
                    (index(i + 1, j), i + 1)
                } else {
                    (index(i, j + 1), j + 1)
                };
                coeffs[index(i, j)] = self.coeffs[src] * T::from_f64(k as f64);
            }
        }
        Self {
            coeffs,
            order: (n - 1) as u8,
        }
    }

    /// Evaluates `Σ derivs[k] (f - f0)^k`, i.e. composes an analytic
    /// function with this jet given its scaled derivatives at the value.
    fn compose(self, scaled: &[T]) -> Self {
        let n = self.order();
        let mut delta = self;
        delta.coeffs[0] = T::zero();
        let mut acc = Self::constant(scaled[n]).truncated(n);
        for k in (0..n).rev() {
            acc = acc * delta;
            acc.coeffs[0] = acc.coeffs[0] + scaled[k];
        }
        acc
    }

    fn scaled_derivatives(&self, mut f: impl FnMut(usize) -> T) -> [T; MAX_ORDER + 1] {
        let mut out = [T::zero(); MAX_ORDER + 1];
        for (k, slot) in out.iter_mut().enumerate().take(self.order() + 1) {
            *slot = f(k) / T::from_f64(FACTORIAL[k]);
        }
        out
    }
}

impl<T: Real> Add for Jet<T> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        let order = self.order.min(rhs.order);
        let mut coeffs = [T::zero(); JET_LEN];
        for (k, c) in coeffs.iter_mut().enumerate().take(len_for_order(order as usize)) {
            *c = self.coeffs[k] + rhs.coeffs[k];
        }
        Self { coeffs, order }
    }
}

impl<T: Real> Sub for Jet<T> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        let order = self.order.min(rhs.order);
        let mut coeffs = [T::zero(); JET_LEN];
        for (k, c) in coeffs.iter_mut().enumerate().take(len_for_order(order as usize)) {
            *c = self.coeffs[k] - rhs.coeffs[k];
        }
        Self { coeffs, order }
    }
}

impl<T: Real> Mul for Jet<T> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let order = self.order.min(rhs.order);
        let mut coeffs = [T::zero(); JET_LEN];
        for &(a, b, c) in &MUL_TABLE[..MUL_PREFIX[order as usize]] {
            coeffs[c as usize] = coeffs[c as usize] + self.coeffs[a as usize] * rhs.coeffs[b as usize];
        }
        Self { coeffs, order }
    }
}

impl<T: Real> Div for Jet<T> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        self * Scalar::recip(rhs)
    }
}

impl<T: Real> Neg for Jet<T> {
    type Output = Self;
    #[inline]
    fn neg(mut self) -> Self {
        for c in self.coeffs.iter_mut() {
            *c = -*c;
        }
        self
    }
}

impl<T: Real> AddAssign for Jet<T> {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<T: Real> SubAssign for Jet<T> {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl<T: Real> MulAssign for Jet<T> {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl<T: Real> Scalar for Jet<T> {
    type Real = T;

    fn from_real(r: T) -> Self {
        Self::constant(r)
    }

    fn re(&self) -> T {
        self.coeffs[0]
    }

    fn sqrt(self) -> Self {
        let a = self.value();
        // d^k/da^k a^(1/2) = (1/2)(1/2 - 1)...(1/2 - k + 1) a^(1/2 - k)
        let root = a.sqrt();
        let d = self.scaled_derivatives(|k| {
            let mut falling = T::one();
            for m in 0..k {
                falling = falling * (T::from_f64(0.5) - T::from_f64(m as f64));
            }
            falling * root / a.powi(k as i32)
        });
        self.compose(&d)
    }

    fn sin(self) -> Self {
        let (s, c) = self.value().sin_cos();
        let d = self.scaled_derivatives(|k| match k % 4 {
            0 => s,
            1 => c,
            2 => -s,
            _ => -c,
        });
        self.compose(&d)
    }

    fn cos(self) -> Self {
        let (s, c) = self.value().sin_cos();
        let d = self.scaled_derivatives(|k| match k % 4 {
            0 => c,
            1 => -s,
            2 => -c,
            _ => s,
        });
        self.compose(&d)
    }

    fn exp(self) -> Self {
        let e = self.value().exp();
        let d = self.scaled_derivatives(|_| e);
        self.compose(&d)
    }

    fn sinh(self) -> Self {
        let (s, c) = (self.value().sinh(), self.value().cosh());
        let d = self.scaled_derivatives(|k| if k % 2 == 0 { s } else { c });
        self.compose(&d)
    }

    fn cosh(self) -> Self {
        let (s, c) = (self.value().sinh(), self.value().cosh());
        let d = self.scaled_derivatives(|k| if k % 2 == 0 { c } else { s });
        self.compose(&d)
    }

    fn recip(self) -> Self {
        let inv = self.value().recip();
        // d^k/da^k a^-1 = (-1)^k k! a^-(k+1)
        let d = self.scaled_derivatives(|k| {
            let sign = if k % 2 == 0 { T::one() } else { -T::one() };
            sign * T::from_f64(FACTORIAL[k]) * inv.powi(k as i32 + 1)
        });
        self.compose(&d)
    }
}
