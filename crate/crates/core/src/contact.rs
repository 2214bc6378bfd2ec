//! Lightcone height functions and recognition of their A_k germs.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::frame::{GaussSign, LocalFrame};
use crate::geometry::{lightcone_normalize, pseudo_dot, Vec4, TOL_ZERO};
use crate::jet::Jet;
use crate::linalg::{singular_values, sym_eigen2};
use crate::surface::SurfacePatch;
use crate::tolerance::Tolerances;

/// Taylor data of a scalar function of `(x, y)` at a point. Higher
/// derivatives are listed by increasing number of `y` derivatives, e.g.
/// `third = [g_xxx, g_xxy, g_xyy, g_yyy]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HeightEval {
    pub value: f64,
    pub gradient: [f64; 2],
    pub hessian: [[f64; 2]; 2],
    pub third: [f64; 4],
    pub fourth: [f64; 5],
}

impl HeightEval {
    pub fn from_jet(j: &Jet<f64>) -> Self {
        let d = |i, k| j.derivative(i, k);
        Self {
            value: j.value(),
            gradient: [d(1, 0), d(0, 1)],
            hessian: [[d(2, 0), d(1, 1)], [d(1, 1), d(0, 2)]],
            third: [d(3, 0), d(2, 1), d(1, 2), d(0, 3)],
            fourth: [d(4, 0), d(3, 1), d(2, 2), d(1, 3), d(0, 4)],
        }
    }

    /// The symmetric `k`-linear form `D^k g` applied to the given vectors.
    pub fn form(&self, vecs: &[[f64; 2]]) -> f64 {
        let coeffs: &[f64] = match vecs.len() {
            1 => &self.gradient,
            2 => &[self.hessian[0][0], self.hessian[0][1], self.hessian[1][1]],
            3 => &self.third,
            4 => &self.fourth,
            n => panic!("no derivative data of order {n}"),
        };
        let n = vecs.len();
        let mut total = 0.0;
        for mask in 0..(1usize << n) {
            let mut prod = 1.0;
            for (bit, v) in vecs.iter().enumerate() {
                prod *= v[(mask >> bit) & 1];
            }
            total += prod * coeffs[mask.count_ones() as usize];
        }
        total
    }
}

fn height_jet(patch: &SurfacePatch, x: f64, y: f64, lambda: &Vec4<f64>) -> Result<Jet<f64>> {
    let xj = patch.jet(x, y, 4)?;
    Ok(pseudo_dot(&xj, &lambda.map(Jet::constant)))
}

/// `h(q) = ⟨X(q), λ⟩` for `λ ∈ S¹ₜ×S¹ₛ`.
pub fn height(patch: &SurfacePatch, x: f64, y: f64, lambda: &Vec4<f64>) -> Result<HeightEval> {
    let q = pseudo_dot(lambda, lambda);
    let r2 = lambda[0] * lambda[0] + lambda[1] * lambda[1];
    if q.abs() > 1e-9 {
        return Err(Error::NotLightlike(q));
    }
    if (r2 - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "height direction must satisfy x1² + x2² = 1, got {r2}"
        )));
    }
    Ok(HeightEval::from_jet(&height_jet(patch, x, y, lambda)?))
}

/// `h̃(q) = ⟨X(q), ṽ⟩ − sqrt(v1² + v2²)` for lightlike `v ≠ 0`.
pub fn extended_height(patch: &SurfacePatch, x: f64, y: f64, v: &Vec4<f64>) -> Result<HeightEval> {
    let vt = lightcone_normalize(v, TOL_ZERO)?;
    let mut h = HeightEval::from_jet(&height_jet(patch, x, y, &vt)?);
    h.value -= v[0].hypot(v[1]);
    Ok(h)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MorseCheck {
    pub ok: bool,
    pub witness: f64,
}

/// Smallest singular value of `[X_x; X_y; w*]` with `w* = (ṽ1, ṽ2, −ṽ3, ṽ4)`.
pub fn morse_witness(xx: &Vec4<f64>, xy: &Vec4<f64>, vt: &Vec4<f64>) -> MorseCheck {
    let w = Vec4::new(vt[0], vt[1], -vt[2], vt[3]);
    let s = singular_values([xx, xy, &w])[0];
    MorseCheck { ok: s > 1e-8, witness: s }
}

/// Verifies that the extended height family is a Morse family at the critical
/// pair `(p, v)`.
pub fn morse_family_check(patch: &SurfacePatch, x: f64, y: f64, v: &Vec4<f64>) -> Result<MorseCheck> {
    let vt = lightcone_normalize(v, TOL_ZERO)?;
    let xj = patch.jet(x, y, 1)?;
    let xx = xj.map(|c| c.derivative(1, 0));
    let xy = xj.map(|c| c.derivative(0, 1));
    let grad = pseudo_dot(&xx, &vt).hypot(pseudo_dot(&xy, &vt));
    if grad > 1e-7 * (1.0 + xx.euclid_norm_sq().sqrt() + xy.euclid_norm_sq().sqrt()) {
        return Err(Error::NotCritical { x, y, grad });
    }
    Ok(morse_witness(&xx, &xy, &vt))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum SingClass {
    A1,
    A2,
    A3,
    Degenerate,
}

impl SingClass {
    pub fn l_ord(self) -> i32 {
        match self {
            SingClass::A1 => 1,
            SingClass::A2 => 2,
            SingClass::A3 => 3,
            SingClass::Degenerate => -1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Discriminators {
    pub d3: Option<f64>,
    pub d4: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ContactReport {
    pub l_corank: u8,
    pub sing_class: SingClass,
    pub l_ord: i32,
    pub kernel_dir: Option<[f64; 2]>,
    pub discriminators: Discriminators,
    /// Hessian eigenvalues, ascending.
    pub hessian_eigenvalues: [f64; 2],
    /// `Hess(ζ, ζ)` on the complement of the kernel (corank 1 only).
    pub q: Option<f64>,
}

impl ContactReport {
    /// For corank 0: whether the Hessian is definite.
    pub fn definite(&self) -> bool {
        self.hessian_eigenvalues[0] * self.hessian_eigenvalues[1] > 0.0
    }
}

/// Absolute floor below which the Hessian counts as zero.
const HESS_FLOOR: f64 = 1e-10;

/// A_k recognition from Taylor data at a critical point.
pub fn classify_height(h: &HeightEval, tol: &Tolerances) -> ContactReport {
    let (ev, vecs) = sym_eigen2(h.hessian);
    let norm = ev[0].abs().max(ev[1].abs());
    let tol_rank = (tol.rank_rel * norm).max(HESS_FLOOR);
    let small = ev.iter().filter(|l| l.abs() <= tol_rank).count();
    let mut r = ContactReport {
        l_corank: small as u8,
        sing_class: SingClass::Degenerate,
        l_ord: -1,
        kernel_dir: None,
        discriminators: Discriminators { d3: None, d4: None },
        hessian_eigenvalues: ev,
        q: None,
    };
    match small {
        0 => {
            r.sing_class = SingClass::A1;
            r.l_ord = 1;
        }
        1 => {
            // the kernel belongs to the eigenvalue of smaller magnitude
            let (k, c) = if ev[0].abs() <= ev[1].abs() { (0, 1) } else { (1, 0) };
            let mut eta = vecs[k];
            let dominant = if eta[0].abs() >= eta[1].abs() { eta[0] } else { eta[1] };
            if dominant < 0.0 {
                eta = [-eta[0], -eta[1]];
            }
            let zeta = [-eta[1], eta[0]];
            let q = ev[c];
            let third_norm = h.third.iter().map(|v| v * v).sum::<f64>().sqrt();
            let fourth_norm = h.fourth.iter().map(|v| v * v).sum::<f64>().sqrt();
            let d3 = h.form(&[eta, eta, eta]);
            r.kernel_dir = Some(eta);
            r.q = Some(q);
            r.discriminators.d3 = Some(d3);
            if d3.abs() > tol.d3_rel * third_norm.max(1.0) {
                r.sing_class = SingClass::A2;
                r.l_ord = 2;
            } else {
                let mixed = h.form(&[eta, eta, zeta]);
                let d4 = h.form(&[eta, eta, eta, eta]) - 3.0 * mixed * mixed / q;
                r.discriminators.d4 = Some(d4);
                if d4.abs() > tol.d4_rel * fourth_norm.max(1.0) {
                    r.sing_class = SingClass::A3;
                    r.l_ord = 3;
                }
            }
        }
        _ => {}
    }
    r
}

/// Taylor data of `g(q) = ⟨X(q), ṽ₀⟩ − c₀` where `ṽ₀ = LG±(p)` and `c₀` is
/// the support at `p`.
pub fn contact_height(patch: &SurfacePatch, x: f64, y: f64, sign: GaussSign, tol: &Tolerances) -> Result<(HeightEval, Vec4<f64>)> {
    let lf = LocalFrame::new(patch, x, y, 1, tol)?;
    let v0 = lf.gauss_jet(sign)?.map(|c| c.value());
    let mut h = HeightEval::from_jet(&height_jet(patch, x, y, &v0)?);
    h.value = 0.0;
    Ok((h, v0))
}

pub fn classify_contact(patch: &SurfacePatch, x: f64, y: f64, sign: GaussSign, tol: &Tolerances) -> Result<ContactReport> {
    let (h, _) = contact_height(patch, x, y, sign, tol)?;
    let grad = h.gradient[0].hypot(h.gradient[1]);
    let hess = h.hessian.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
    if grad > 1e-7 * (1.0 + hess) {
        return Err(Error::NotCritical { x, y, grad });
    }
    Ok(classify_height(&h, tol))
}

pub fn l_ord(patch: &SurfacePatch, x: f64, y: f64, sign: GaussSign, tol: &Tolerances) -> Result<i32> {
    Ok(classify_contact(patch, x, y, sign, tol)?.l_ord)
}

pub fn l_corank(patch: &SurfacePatch, x: f64, y: f64, sign: GaussSign, tol: &Tolerances) -> Result<u8> {
    Ok(classify_contact(patch, x, y, sign, tol)?.l_corank)
}
