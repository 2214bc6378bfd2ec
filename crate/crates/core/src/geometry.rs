//! Linear algebra of the semi-Euclidean space of signature (−,−,+,+).

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Signature of the pseudo scalar product, one entry per coordinate.
pub const SIGNATURE: [f64; 4] = [-1.0, -1.0, 1.0, 1.0];

/// Default absolute tolerance for causal classification at unit scale.
pub const TOL_ZERO: f64 = 1e-10;

/// A vector of R⁴₂.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vec4<S>(pub [S; 4]);

impl<S: Scalar> Vec4<S> {
    pub fn new(x1: S, x2: S, x3: S, x4: S) -> Self {
        Self([x1, x2, x3, x4])
    }

    /// Rejects non-finite components.
    pub fn try_new(x1: S, x2: S, x3: S, x4: S) -> Result<Self> {
        let v = Self::new(x1, x2, x3, x4);
        if v.0.iter().all(|c| c.re_f64().is_finite()) {
            Ok(v)
        } else {
            Err(Error::NonFinite)
        }
    }

    pub fn zero() -> Self {
        Self([S::zero(); 4])
    }

    /// The i-th standard basis vector.
    pub fn basis(i: usize) -> Self {
        let mut v = Self::zero();
        v.0[i] = S::one();
        v
    }

    pub fn from_real(v: Vec4<S::Real>) -> Self {
        Self(v.0.map(S::from_real))
    }

    pub fn re(&self) -> Vec4<S::Real> {
        Vec4(self.0.map(|c| c.re()))
    }

    pub fn map<U>(&self, f: impl FnMut(S) -> U) -> Vec4<U> {
        Vec4(self.0.map(f))
    }

    pub fn scaled(self, k: S) -> Self {
        Self(self.0.map(|c| c * k))
    }

    pub fn dot(&self, other: &Self) -> S {
        pseudo_dot(self, other)
    }

    /// Squared Euclidean length of the real part.
    pub fn euclid_norm_sq(&self) -> f64 {
        self.0.iter().map(|c| c.re_f64() * c.re_f64()).sum()
    }

    /// Euclidean radius of the timelike coordinate pair `(x1, x2)`.
    pub fn time_radius(&self) -> S {
        (self.0[0] * self.0[0] + self.0[1] * self.0[1]).sqrt()
    }
}

impl Vec4<f64> {
    pub fn x1(&self) -> f64 {
        self.0[0]
    }
    pub fn x2(&self) -> f64 {
        self.0[1]
    }
    pub fn x3(&self) -> f64 {
        self.0[2]
    }
    pub fn x4(&self) -> f64 {
        self.0[3]
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (0..4).map(|i| (self.0[i] - other.0[i]).abs()).fold(0.0, f64::max)
    }
}

impl<S> Index<usize> for Vec4<S> {
    type Output = S;
    fn index(&self, i: usize) -> &S {
        &self.0[i]
    }
}

impl<S> IndexMut<usize> for Vec4<S> {
    fn index_mut(&mut self, i: usize) -> &mut S {
        &mut self.0[i]
    }
}

impl<S: Scalar> Add for Vec4<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self([0, 1, 2, 3].map(|i| self.0[i] + rhs.0[i]))
    }
}

impl<S: Scalar> Sub for Vec4<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self([0, 1, 2, 3].map(|i| self.0[i] - rhs.0[i]))
    }
}

impl<S: Scalar> Neg for Vec4<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Self(self.0.map(|c| -c))
    }
}

impl<S: Scalar> Mul<S> for Vec4<S> {
    type Output = Self;
    fn mul(self, k: S) -> Self {
        self.scaled(k)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CausalClass {
    Spacelike,
    Lightlike,
    Timelike,
}

/// `−u₁v₁ − u₂v₂ + u₃v₃ + u₄v₄`.
#[inline]
pub fn pseudo_dot<S: Scalar>(u: &Vec4<S>, v: &Vec4<S>) -> S {
    u.0[2] * v.0[2] + u.0[3] * v.0[3] - u.0[0] * v.0[0] - u.0[1] * v.0[1]
}

pub fn causal_class<S: Scalar>(v: &Vec4<S>, tol: f64) -> Result<CausalClass> {
    if v.0.iter().all(|c| c.re_f64() == 0.0) {
        return Err(Error::ZeroVector);
    }
    let q = pseudo_dot(v, v).re_f64();
    Ok(if q > tol {
        CausalClass::Spacelike
    } else if q < -tol {
        CausalClass::Timelike
    } else {
        CausalClass::Lightlike
    })
}

/// `sqrt |⟨v, v⟩|`.
pub fn pnorm<S: Scalar>(v: &Vec4<S>) -> S {
    let q = pseudo_dot(v, v);
    if q.re_f64() < 0.0 {
        (-q).sqrt()
    } else {
        q.sqrt()
    }
}

/// Scales a lightlike vector onto S¹ₜ×S¹ₛ (unit timelike pair `(x1, x2)`).
///
/// The full circle is used; no quadrant restriction is imposed.
pub fn lightcone_normalize<S: Scalar>(v: &Vec4<S>, tol: f64) -> Result<Vec4<S>> {
    let scale = v.euclid_norm_sq();
    if scale == 0.0 {
        return Err(Error::ZeroVector);
    }
    let q = pseudo_dot(v, v).re_f64();
    if q.abs() > tol * scale.max(1.0) {
        return Err(Error::NotLightlike(q));
    }
    let r = v.time_radius();
    Ok(v.scaled(r.recip()))
}

/// Returns a pseudo-orthonormal basis `(t, s)` of the Lorentzian plane
/// spanned by `u` and `v`, with `⟨t,t⟩ = −1`, `⟨s,s⟩ = 1` and the same
/// orientation as `(u, v)`.
///
/// If `u` is timelike then `t = u / ‖u‖` and `s` is the Gram–Schmidt
/// remainder of `v`. Otherwise `t` comes from the eigenvector of the Gram
/// matrix with negative eigenvalue; its sign makes the dominant coefficient
/// positive.
pub fn orthonormalize_lorentzian_plane<S: Scalar>(
    u: &Vec4<S>,
    v: &Vec4<S>,
    tol: f64,
) -> Result<(Vec4<S>, Vec4<S>)> {
    let guu = check_lorentzian_plane(u, v, tol)?;
    let t = if guu.re_f64() < -tol { u.scaled((-guu).sqrt().recip()) } else { eigen_timelike(u, v) };
    Ok(complete_basis(u, v, t))
}

/// As [`orthonormalize_lorentzian_plane`], except that a timelike `u` is
/// only used directly while its rapidity relative to the eigen direction
/// stays below `acosh 2`. Near-lightlike `u` would otherwise produce a
/// badly scaled basis.
pub fn orthonormalize_conditioned<S: Scalar>(u: &Vec4<S>, v: &Vec4<S>, tol: f64) -> Result<(Vec4<S>, Vec4<S>)> {
    let guu = check_lorentzian_plane(u, v, tol)?;
    let te = eigen_timelike(u, v);
    let t = if guu.re_f64() < -tol && -pseudo_dot(u, &te).re_f64() <= 2.0 * (-guu.re_f64()).sqrt() {
        u.scaled((-guu).sqrt().recip())
    } else {
        te
    };
    Ok(complete_basis(u, v, t))
}

fn check_lorentzian_plane<S: Scalar>(u: &Vec4<S>, v: &Vec4<S>, tol: f64) -> Result<S> {
    let guu = pseudo_dot(u, u);
    let guv = pseudo_dot(u, v);
    let gvv = pseudo_dot(v, v);
    let det = guu * gvv - guv * guv;
    if !(det.re_f64() < -tol) {
        return Err(Error::NotLorentzian(det.re_f64()));
    }
    Ok(guu)
}

fn eigen_timelike<S: Scalar>(u: &Vec4<S>, v: &Vec4<S>) -> Vec4<S> {
    let (guu, guv, gvv) = (pseudo_dot(u, u), pseudo_dot(u, v), pseudo_dot(v, v));
    let half = S::lit(0.5);
    let diff = guu - gvv;
    let disc = (diff * diff + S::lit(4.0) * guv * guv).sqrt();
    let lam = (guu + gvv - disc) * half;
    let c1 = (guv, lam - guu);
    let c2 = (lam - gvv, guv);
    let n1 = c1.0.re_f64().powi(2) + c1.1.re_f64().powi(2);
    let n2 = c2.0.re_f64().powi(2) + c2.1.re_f64().powi(2);
    let (mut a, mut b) = if n1 >= n2 { c1 } else { c2 };
    let dominant = if a.re_f64().abs() >= b.re_f64().abs() { a } else { b };
    if dominant.re_f64() < 0.0 {
        a = -a;
        b = -b;
    }
    let raw = u.scaled(a) + v.scaled(b);
    raw.scaled((-pseudo_dot(&raw, &raw)).sqrt().recip())
}

fn complete_basis<S: Scalar>(u: &Vec4<S>, v: &Vec4<S>, t: Vec4<S>) -> (Vec4<S>, Vec4<S>) {
    let wu = *u + t.scaled(pseudo_dot(u, &t));
    let wv = *v + t.scaled(pseudo_dot(v, &t));
    let w = if pseudo_dot(&wv, &wv).re_f64() >= pseudo_dot(&wu, &wu).re_f64() {
        wv
    } else {
        wu
    };
    let mut s = w.scaled(pseudo_dot(&w, &w).sqrt().recip());

    // t∧s = k u∧v with sign(k) = −sign(⟨t,u⟩⟨s,v⟩ − ⟨t,v⟩⟨s,u⟩) since det G < 0
    let cross = pseudo_dot(&t, u) * pseudo_dot(&s, v) - pseudo_dot(&t, v) * pseudo_dot(&s, u);
    if cross.re_f64() > 0.0 {
        s = -s;
    }
    (t, s)
}

/// Determinant of the 4×4 matrix whose rows are the given vectors.
pub fn det4<S: Scalar>(rows: [&Vec4<S>; 4]) -> S {
    let m = |r: usize, c: usize| rows[r].0[c];
    let minor = |r0: usize, r1: usize, c0: usize, c1: usize| m(r0, c0) * m(r1, c1) - m(r0, c1) * m(r1, c0);
    // Laplace expansion along the first two rows
    let s = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    let mut acc = S::zero();
    for &(a, b) in &s {
        let (c, d) = complement(a, b);
        let sign = if (a + b + 1) % 2 == 0 { S::one() } else { -S::one() };
        acc += sign * minor(0, 1, a, b) * minor(2, 3, c, d);
    }
    acc
}

fn complement(a: usize, b: usize) -> (usize, usize) {
    let mut rest = (0..4).filter(|&k| k != a && k != b);
    (rest.next().unwrap(), rest.next().unwrap())
}

/// A lightlike hyperplane `{x : ⟨x, n⟩ = c}` with `n` on S¹ₜ×S¹ₛ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LightlikeHyperplane {
    pub normal: Vec4<f64>,
    pub offset: f64,
}

impl LightlikeHyperplane {
    /// Validates and canonically scales the normal; the offset is rescaled
    /// with it so the point set is unchanged.
    pub fn new(normal: Vec4<f64>, offset: f64) -> Result<Self> {
        let r = normal.time_radius();
        let n = lightcone_normalize(&normal, TOL_ZERO)?;
        Ok(Self {
            normal: n,
            offset: offset / r,
        })
    }

    /// `⟨x, n⟩ − c`, zero exactly on the hyperplane.
    pub fn eval(&self, x: &Vec4<f64>) -> f64 {
        pseudo_dot(x, &self.normal) - self.offset
    }
}

/// Convenience alias used by the pedal and height computations.
pub fn hyperplane_eval(h: &LightlikeHyperplane, x: &Vec4<f64>) -> f64 {
    h.eval(x)
}

/// Lorentz boost of a pseudo-orthonormal pair `(timelike, spacelike)`.
pub fn boost_pair<S: Scalar>(t: &Vec4<S>, s: &Vec4<S>, phi: S::Real) -> (Vec4<S>, Vec4<S>) {
    let (ch, sh) = (
        S::from_real(num_traits::Float::cosh(phi)),
        S::from_real(num_traits::Float::sinh(phi)),
    );
    (t.scaled(ch) + s.scaled(sh), t.scaled(sh) + s.scaled(ch))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(a: f64, b: f64, c: f64, d: f64) -> Vec4<f64> {
        Vec4::new(a, b, c, d)
    }

    #[test]
    fn pseudo_dot_examples() {
        assert_eq!(pseudo_dot(&v(1., 0., 0., 0.), &v(1., 0., 0., 0.)), -1.0);
        assert_eq!(pseudo_dot(&v(1., 0., 1., 0.), &v(1., 0., 1., 0.)), 0.0);
        assert_eq!(pseudo_dot(&v(1., 2., 3., 4.), &v(4., 3., 2., 1.)), 0.0);
    }

    #[test]
    fn causal_class_examples() {
        assert_eq!(causal_class(&v(1., 0., 0., 0.), TOL_ZERO), Ok(CausalClass::Timelike));
        assert_eq!(causal_class(&v(0., 0., 1., 0.), TOL_ZERO), Ok(CausalClass::Spacelike));
        assert_eq!(causal_class(&v(1., 0., 0.6, 0.8), TOL_ZERO), Ok(CausalClass::Lightlike));
        assert_eq!(causal_class(&v(0., 0., 0., 0.), TOL_ZERO), Err(Error::ZeroVector));
        assert_eq!(
            Error::ZeroVector.to_string(),
            "causal class undefined for 0"
        );
    }

    #[test]
    fn pnorm_examples() {
        assert_eq!(pnorm(&v(2., 0., 0., 0.)), 2.0);
        assert_eq!(pnorm(&v(1., 0., 1., 0.)), 0.0);
        assert_eq!(pnorm(&v(0., 3., 0., 5.)), 4.0);
    }

    #[test]
    fn lightcone_normalize_examples() {
        assert_eq!(lightcone_normalize(&v(2., 0., 2., 0.), TOL_ZERO).unwrap(), v(1., 0., 1., 0.));
        assert_eq!(lightcone_normalize(&v(1., 0., 1., 0.), TOL_ZERO).unwrap(), v(1., 0., 1., 0.));
        let n = lightcone_normalize(&v(3., 4., 0., 5.), TOL_ZERO).unwrap();
        assert!(n.max_abs_diff(&v(0.6, 0.8, 0.0, 1.0)) < 1e-15);
        assert!(matches!(
            lightcone_normalize(&v(1., 0., 0., 0.), TOL_ZERO),
            Err(Error::NotLightlike(_))
        ));
        assert_eq!(lightcone_normalize(&Vec4::<f64>::zero(), TOL_ZERO), Err(Error::ZeroVector));
    }

    #[test]
    fn hyperplane_eval_examples() {
        let h = LightlikeHyperplane::new(v(0., 1., 0., 1.), 0.0).unwrap();
        assert_eq!(h.eval(&v(5., 2., 7., 2.)), 0.0);
        let h = LightlikeHyperplane::new(v(1., 0., 1., 0.), 1.0).unwrap();
        assert_eq!(h.eval(&Vec4::zero()), -1.0);
        let h = LightlikeHyperplane::new(v(1., 0., 1., 0.), 0.0).unwrap();
        assert_eq!(h.eval(&v(1., 0., 0., 0.)), -1.0);
    }

    #[test]
    fn orthonormalize_examples() {
        let (t, s) =
            orthonormalize_lorentzian_plane(&v(1., 0., 0., 0.), &v(0., 0., 1., 0.), TOL_ZERO).unwrap();
        assert_eq!((t, s), (v(1., 0., 0., 0.), v(0., 0., 1., 0.)));

        let (t, s) =
            orthonormalize_lorentzian_plane(&v(2., 0., 0., 0.), &v(1., 0., 1., 0.), TOL_ZERO).unwrap();
        assert!(t.max_abs_diff(&v(1., 0., 0., 0.)) < 1e-15);
        assert!(s.max_abs_diff(&v(0., 0., 1., 0.)) < 1e-15);

        let (t, s) =
            orthonormalize_lorentzian_plane(&v(0., 0., 1., 0.), &v(1., 0., 0., 0.), TOL_ZERO).unwrap();
        assert!(t.max_abs_diff(&v(1., 0., 0., 0.)) < 1e-15);
        assert!(s.max_abs_diff(&v(0., 0., -1., 0.)) < 1e-15);

        let err = orthonormalize_lorentzian_plane(&v(0., 0., 1., 0.), &v(0., 0., 0., 1.), TOL_ZERO);
        assert!(matches!(err, Err(Error::NotLorentzian(_))));
    }

    #[test]
    fn works_in_single_precision() {
        let a = Vec4::<f32>::new(1.0, 2.0, 3.0, 4.0);
        let b = Vec4::<f32>::new(4.0, 3.0, 2.0, 1.0);
        assert_eq!(pseudo_dot(&a, &b), 0.0);
        let n = lightcone_normalize(&Vec4::<f32>::new(3.0, 4.0, 0.0, 5.0), 1e-6).unwrap();
        assert!((n[3] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn det4_of_permutation() {
        let rows = [v(0., 1., 0., 0.), v(0., 0., 0., 1.), v(1., 0., 0., 0.), v(0., 0., 1., 0.)];
        assert_eq!(det4([&rows[0], &rows[1], &rows[2], &rows[3]]), -1.0);
        let id = [v(1., 0., 0., 0.), v(0., 1., 0., 0.), v(0., 0., 1., 0.), v(0., 0., 0., 1.)];
        assert_eq!(det4([&id[0], &id[1], &id[2], &id[3]]), 1.0);
        let m = [v(2., 1., 0., 3.), v(1., -1., 4., 0.), v(0., 2., 1., 1.), v(3., 0., 1., -2.)];
        // cofactor expansion computed by hand: 2·(−1)(1·(−2)−1·1)... checked against a direct 4×4 formula
        let direct = det_naive(&m);
        assert!((det4([&m[0], &m[1], &m[2], &m[3]]) - direct).abs() < 1e-12);
    }

    fn det_naive(m: &[Vec4<f64>; 4]) -> f64 {
        let mut perm = [0usize, 1, 2, 3];
        let mut total = 0.0;
        heap_permute(&mut perm, 4, &mut |p| {
            let mut inv = 0;
            for i in 0..4 {
                for j in i + 1..4 {
                    if p[i] > p[j] {
                        inv += 1;
                    }
                }
            }
            let sign = if inv % 2 == 0 { 1.0 } else { -1.0 };
            total += sign * (0..4).map(|r| m[r].0[p[r]]).product::<f64>();
        });
        total
    }

    fn heap_permute(a: &mut [usize; 4], k: usize, f: &mut impl FnMut(&[usize; 4])) {
        if k == 1 {
            f(a);
            return;
        }
        for i in 0..k {
            heap_permute(a, k - 1, f);
            if k % 2 == 0 {
                a.swap(i, k - 1);
            } else {
                a.swap(0, k - 1);
            }
        }
    }

    fn vec4() -> impl Strategy<Value = Vec4<f64>> {
        prop::array::uniform4(-10.0f64..10.0).prop_map(Vec4)
    }

    proptest! {
        #[test]
        fn pseudo_dot_symmetric_bilinear(a in vec4(), b in vec4(), c in vec4(), k in -5.0f64..5.0) {
            let ab = pseudo_dot(&a, &b);
            prop_assert!((ab - pseudo_dot(&b, &a)).abs() <= 1e-12 * ab.abs().max(1.0));
            let lhs = pseudo_dot(&(a.scaled(k) + c), &b);
            let rhs = k * ab + pseudo_dot(&c, &b);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(rhs.abs()).max(1.0) * 100.0);
        }

        #[test]
        fn normalize_is_idempotent(theta in 0.0f64..std::f64::consts::TAU, phi in 0.0f64..std::f64::consts::TAU, scale in 0.01f64..50.0) {
            let raw = Vec4::new(theta.cos(), theta.sin(), phi.cos(), phi.sin()).scaled(scale);
            let n = lightcone_normalize(&raw, TOL_ZERO).unwrap();
            let nn = lightcone_normalize(&n, TOL_ZERO).unwrap();
            prop_assert!(n.max_abs_diff(&nn) < 1e-14);
            prop_assert!(pseudo_dot(&n, &n).abs() < 1e-10);
            prop_assert!((n.x1() * n.x1() + n.x2() * n.x2() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn causal_class_is_scale_invariant(a in vec4(), k in prop_oneof![-20.0f64..-0.05, 0.05f64..20.0]) {
            prop_assume!(pseudo_dot(&a, &a).abs() > 1e-6);
            prop_assert_eq!(causal_class(&a, TOL_ZERO).unwrap(), causal_class(&a.scaled(k), TOL_ZERO).unwrap());
        }

        #[test]
        fn orthonormalized_pair_spans_plane(a in vec4(), b in vec4()) {
            let g = pseudo_dot(&a, &a) * pseudo_dot(&b, &b) - pseudo_dot(&a, &b).powi(2);
            prop_assume!(g < -1e-3);
            let (t, s) = orthonormalize_lorentzian_plane(&a, &b, TOL_ZERO).unwrap();
            prop_assert!((pseudo_dot(&t, &t) + 1.0).abs() < 1e-10);
            prop_assert!((pseudo_dot(&s, &s) - 1.0).abs() < 1e-10);
            prop_assert!(pseudo_dot(&t, &s).abs() < 1e-10);
            // residual of projecting t and s onto span{a, b} (Euclidean least squares)
            for w in [t, s] {
                prop_assert!(span_residual(&a, &b, &w) < 1e-10 * (1.0 + w.euclid_norm_sq().sqrt()));
            }
        }
    }

    fn span_residual(a: &Vec4<f64>, b: &Vec4<f64>, w: &Vec4<f64>) -> f64 {
        let e = |p: &Vec4<f64>, q: &Vec4<f64>| (0..4).map(|i| p.0[i] * q.0[i]).sum::<f64>();
        let (aa, ab, bb) = (e(a, a), e(a, b), e(b, b));
        let (aw, bw) = (e(a, w), e(b, w));
        let det = aa * bb - ab * ab;
        let x = (aw * bb - bw * ab) / det;
        let y = (bw * aa - aw * ab) / det;
        let r = *w - (a.scaled(x) + b.scaled(y));
        r.euclid_norm_sq().sqrt()
    }
}
