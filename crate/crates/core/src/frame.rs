//! Adapted pseudo-orthonormal frames, connection forms and Cartan coefficients.
//!
//! The frame is a deterministic function of the tangent vectors `X_x, X_y`.
//! Evaluating that function on jets yields the frame field's Taylor data, so
//! connection forms come from exact differentiation rather than stencils.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{det4, lightcone_normalize, orthonormalize_conditioned, pseudo_dot, Vec4};
use crate::grid::Grid;
use crate::scalar::Scalar;
use crate::surface::{euclid_rank2, Jet4, SurfacePatch};
use crate::tolerance::Tolerances;

pub use crate::Jet64;

/// `δ(e_i) = ⟨e_i, e_i⟩` for the adapted frame (indices 0..4 for e1..e4).
pub const DELTA: [f64; 4] = [-1.0, 1.0, -1.0, 1.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GaussSign {
    Plus,
    Minus,
}

impl GaussSign {
    pub const BOTH: [GaussSign; 2] = [GaussSign::Plus, GaussSign::Minus];

    pub fn factor(self) -> f64 {
        match self {
            GaussSign::Plus => 1.0,
            GaussSign::Minus => -1.0,
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            GaussSign::Plus => GaussSign::Minus,
            GaussSign::Minus => GaussSign::Plus,
        }
    }
}

/// Builds `(e1, e2, e3, e4)` from the tangent vectors at a point.
///
/// `(e3, e4)` orthonormalizes `(X_x, X_y)`. The normal plane basis comes from
/// projecting the standard basis onto the normal plane and orthonormalizing
/// the best-conditioned pair. Orientation: `det[e1 e2 e3 e4] = −1`. Overall
/// sign of `(e1, e2)`: the unit time parts of `e1 + e2` and `e1 − e2` must sum
/// to a vector with positive component along `(1, 1)`.
pub fn frame_from_tangents<S: Scalar>(
    xx: &Vec4<S>,
    xy: &Vec4<S>,
    at: (f64, f64),
    tol: &Tolerances,
) -> Result<[Vec4<S>; 4]> {
    let (a, b) = (xx.map(|c| c.re_f64()), xy.map(|c| c.re_f64()));
    if euclid_rank2(&a, &b, 1e-12) < 2 {
        return Err(Error::RankDeficient { x: at.0, y: at.1 });
    }
    let det = pseudo_dot(&a, &a) * pseudo_dot(&b, &b) - pseudo_dot(&a, &b).powi(2);
    if det.abs() < tol.degenerate_gram {
        return Err(Error::DegenerateTangent { x: at.0, y: at.1, det });
    }
    if det > 0.0 {
        return Err(Error::NotLorentzian(det));
    }
    let (e3, e4) = orthonormalize_conditioned(xx, xy, tol.zero)?;

    let normal: [Vec4<S>; 4] = [0, 1, 2, 3].map(|k| {
        let v = Vec4::<S>::basis(k);
        v + e3.scaled(pseudo_dot(&v, &e3)) - e4.scaled(pseudo_dot(&v, &e4))
    });
    let mut best = (0, 1, 0.0);
    for k in 0..4 {
        for l in k + 1..4 {
            let (p, q) = (&normal[k], &normal[l]);
            let g = pseudo_dot(p, p) * pseudo_dot(q, q) - pseudo_dot(p, q) * pseudo_dot(p, q);
            let g = g.re_f64().abs();
            if g > best.2 {
                best = (k, l, g);
            }
        }
    }
    let (mut e1, mut e2) = orthonormalize_conditioned(&normal[best.0], &normal[best.1], tol.zero)?;
    if det4([&e1, &e2, &e3, &e4]).re_f64() > 0.0 {
        e2 = -e2;
    }
    if !canonical_sign(&e1, &e2) {
        e1 = -e1;
        e2 = -e2;
    }
    Ok([e1, e2, e3, e4])
}

fn canonical_sign<S: Scalar>(e1: &Vec4<S>, e2: &Vec4<S>) -> bool {
    let unit = |v: Vec4<S>| {
        let (p, q) = (v[0].re_f64(), v[1].re_f64());
        let r = p.hypot(q);
        (p / r, q / r)
    };
    let (a, b) = unit(*e1 + *e2);
    let (c, d) = unit(*e1 - *e2);
    for v in [a + b + c + d, a + c, b + d, a, b] {
        if v.abs() > 1e-12 {
            return v > 0.0;
        }
    }
    true
}

/// The adapted frame at a point, with the orientation of `[e1 e2 e3 e4]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AdaptedFrame {
    pub e: [Vec4<f64>; 4],
    pub at: (f64, f64),
    pub gauge_det: i8,
}

impl AdaptedFrame {
    fn from_vectors(e: [Vec4<f64>; 4], at: (f64, f64)) -> Self {
        let d = det4([&e[0], &e[1], &e[2], &e[3]]);
        Self { e, at, gauge_det: if d >= 0.0 { 1 } else { -1 } }
    }

    /// Matrix of pairwise pseudo scalar products.
    pub fn gram(&self) -> [[f64; 4]; 4] {
        let mut g = [[0.0; 4]; 4];
        for (i, row) in g.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = pseudo_dot(&self.e[i], &self.e[j]);
            }
        }
        g
    }

    /// Flips each `e_i` whose direction disagrees with the reference.
    pub fn align_to(&mut self, reference: &AdaptedFrame) {
        for i in 0..4 {
            if DELTA[i] * pseudo_dot(&self.e[i], &reference.e[i]) < 0.0 {
                self.e[i] = -self.e[i];
            }
        }
        *self = Self::from_vectors(self.e, self.at);
    }

    pub fn gauss(&self, sign: GaussSign) -> Result<Vec4<f64>> {
        lightcone_normalize(&(self.e[0] + self.e[1].scaled(sign.factor())), 1e-9)
    }
}

pub fn adapted_frame(
    patch: &SurfacePatch,
    x: f64,
    y: f64,
    gauge_ref: Option<&AdaptedFrame>,
    tol: &Tolerances,
) -> Result<AdaptedFrame> {
    let j = patch.jet(x, y, 1)?;
    let xx = j.map(|c| c.derivative(1, 0));
    let xy = j.map(|c| c.derivative(0, 1));
    let mut f = AdaptedFrame::from_vectors(frame_from_tangents(&xx, &xy, (x, y), tol)?, (x, y));
    if let Some(r) = gauge_ref {
        f.align_to(r);
    }
    Ok(f)
}

/// Frame field Taylor data at a point.
///
/// With `X` carried to order `n`, the frame is known to order `n − 1` and
/// connection forms to order `n − 2`.
#[derive(Clone, Debug)]
pub struct LocalFrame {
    pub at: (f64, f64),
    pub x: Jet4,
    pub tx: Vec4<Jet64>,
    pub ty: Vec4<Jet64>,
    pub e: [Vec4<Jet64>; 4],
    /// `e3 = c[0][0] X_x + c[0][1] X_y`, `e4 = c[1][0] X_x + c[1][1] X_y`.
    pub c: [[Jet64; 2]; 2],
}

impl LocalFrame {
    pub fn new(patch: &SurfacePatch, x: f64, y: f64, order: usize, tol: &Tolerances) -> Result<Self> {
        let xj = patch.jet(x, y, order)?;
        let tx = xj.map(|c| c.dx());
        let ty = xj.map(|c| c.dy());
        let e = frame_from_tangents(&tx, &ty, (x, y), tol)?;
        Ok(Self::assemble((x, y), xj, tx, ty, e))
    }

    /// The same point with a different (jet-valued) frame field, e.g. a
    /// boosted one. `e[2], e[3]` must span the tangent plane.
    pub fn with_frame(&self, e: [Vec4<Jet64>; 4]) -> Self {
        Self::assemble(self.at, self.x, self.tx, self.ty, e)
    }

    fn assemble(at: (f64, f64), x: Jet4, tx: Vec4<Jet64>, ty: Vec4<Jet64>, e: [Vec4<Jet64>; 4]) -> Self {
        let g11 = pseudo_dot(&tx, &tx);
        let g12 = pseudo_dot(&tx, &ty);
        let g22 = pseudo_dot(&ty, &ty);
        let inv_det = (g11 * g22 - g12 * g12).recip();
        let coef = |v: &Vec4<Jet64>| {
            let (p, q) = (pseudo_dot(v, &tx), pseudo_dot(v, &ty));
            [(p * g22 - q * g12) * inv_det, (q * g11 - p * g12) * inv_det]
        };
        let c = [coef(&e[2]), coef(&e[3])];
        Self { at, x, tx, ty, e, c }
    }

    pub fn frame(&self) -> AdaptedFrame {
        AdaptedFrame::from_vectors(self.e.map(|v| v.map(|c| c.value())), self.at)
    }

    /// Coordinate components `(P, Q)` of `ω_ij = P dx + Q dy` (0-based indices).
    pub fn omega_coord(&self, i: usize, j: usize) -> [Jet64; 2] {
        let ex = self.e[i].map(|c| c.dx());
        let ey = self.e[i].map(|c| c.dy());
        let d = Jet64::constant(DELTA[j]);
        [d * pseudo_dot(&ex, &self.e[j]), d * pseudo_dot(&ey, &self.e[j])]
    }

    /// Coordinate components of `ω_i = δ(e_i)⟨dX, e_i⟩`.
    pub fn coframe_coord(&self, i: usize) -> [Jet64; 2] {
        let d = Jet64::constant(DELTA[i]);
        [d * pseudo_dot(&self.tx, &self.e[i]), d * pseudo_dot(&self.ty, &self.e[i])]
    }

    /// A 1-form given by coordinate components, evaluated on `(e3, e4)`.
    pub fn on_tangent(&self, pq: &[Jet64; 2]) -> [Jet64; 2] {
        [
            self.c[0][0] * pq[0] + self.c[0][1] * pq[1],
            self.c[1][0] * pq[0] + self.c[1][1] * pq[1],
        ]
    }

    /// `(ω_ij(e3), ω_ij(e4))`.
    pub fn omega(&self, i: usize, j: usize) -> [Jet64; 2] {
        self.on_tangent(&self.omega_coord(i, j))
    }

    /// `⟨d²X(e_a, e_b), e_k⟩` for `a, b ∈ {3, 4}`.
    pub fn second_form(&self, k: usize) -> [[Jet64; 2]; 2] {
        let xxx = self.tx.map(|c| c.dx());
        let xxy = self.tx.map(|c| c.dy());
        let xyy = self.ty.map(|c| c.dy());
        let h = [pseudo_dot(&xxx, &self.e[k]), pseudo_dot(&xxy, &self.e[k]), pseudo_dot(&xyy, &self.e[k])];
        let form = |p: &[Jet64; 2], q: &[Jet64; 2]| h[0] * p[0] * q[0] + h[1] * (p[0] * q[1] + p[1] * q[0]) + h[2] * p[1] * q[1];
        [
            [form(&self.c[0], &self.c[0]), form(&self.c[0], &self.c[1])],
            [form(&self.c[1], &self.c[0]), form(&self.c[1], &self.c[1])],
        ]
    }

    /// Cartan coefficients from the connection forms, as jets.
    pub fn coeff_jets(&self) -> CoeffJets {
        let w13 = self.omega(0, 2);
        let w14 = self.omega(0, 3);
        let w23 = self.omega(1, 2);
        let w24 = self.omega(1, 3);
        CoeffJets {
            a: w13[0],
            b: w13[1],
            c: -w14[1],
            abar: w23[0],
            bbar: w23[1],
            cbar: -w24[1],
            b_alt: -w14[0],
            bbar_alt: -w24[0],
        }
    }

    /// `(e1 ± e2)~` as a jet.
    pub fn gauss_jet(&self, sign: GaussSign) -> Result<Vec4<Jet64>> {
        let n = self.e[0] + self.e[1].scaled(Jet64::constant(sign.factor()));
        lightcone_normalize(&n, 1e-9)
    }
}

/// Cartan coefficients carried as jets, with the alternate Cartan-symmetric
/// values of `b` and `b̄`.
#[derive(Clone, Copy, Debug)]
pub struct CoeffJets {
    pub a: Jet64,
    pub b: Jet64,
    pub c: Jet64,
    pub abar: Jet64,
    pub bbar: Jet64,
    pub cbar: Jet64,
    pub b_alt: Jet64,
    pub bbar_alt: Jet64,
}

impl CoeffJets {
    /// `(a x + ā y)(c x + c̄ y) − (b x + b̄ y)²`.
    pub fn kl(&self, wx: f64, wy: f64) -> Jet64 {
        let (wx, wy) = (Jet64::constant(wx), Jet64::constant(wy));
        let p = self.a * wx + self.abar * wy;
        let q = self.c * wx + self.cbar * wy;
        let r = self.b * wx + self.bbar * wy;
        p * q - r * r
    }

    pub fn values(&self) -> FundamentalCoeffs {
        FundamentalCoeffs {
            a: self.a.value(),
            b: self.b.value(),
            c: self.c.value(),
            abar: self.abar.value(),
            bbar: self.bbar.value(),
            cbar: self.cbar.value(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FundamentalCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub abar: f64,
    pub bbar: f64,
    pub cbar: f64,
}

impl FundamentalCoeffs {
    pub fn kl(&self, wx: f64, wy: f64) -> f64 {
        (self.a * wx + self.abar * wy) * (self.c * wx + self.cbar * wy) - (self.b * wx + self.bbar * wy).powi(2)
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.a, self.b, self.c, self.abar, self.bbar, self.cbar]
    }
}

/// `ω_ij(e3), ω_ij(e4)` for all ordered pairs (0-based).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConnectionForms {
    pub omega: [[[f64; 2]; 4]; 4],
}

impl ConnectionForms {
    pub fn get(&self, i: usize, j: usize) -> [f64; 2] {
        self.omega[i][j]
    }
}

pub fn connection_forms(patch: &SurfacePatch, x: f64, y: f64, tol: &Tolerances) -> Result<ConnectionForms> {
    let lf = LocalFrame::new(patch, x, y, 2, tol)?;
    let mut omega = [[[0.0; 2]; 4]; 4];
    for (i, row) in omega.iter_mut().enumerate() {
        for (j, w) in row.iter_mut().enumerate() {
            *w = lf.omega(i, j).map(|c| c.value());
        }
    }
    Ok(ConnectionForms { omega })
}

fn agree(u: f64, v: f64, rtol: f64) -> bool {
    (u - v).abs() <= rtol * u.abs().max(v.abs()) + 1e-9
}

/// Checks that two computations of the Cartan coefficients agree: connection
/// forms versus projections of `d²X`, and `b` versus its Cartan-symmetric twin.
pub fn check_coefficients(lf: &LocalFrame, cj: &CoeffJets) -> Result<()> {
    let rtol = 1e-6;
    let (x, y) = lf.at;
    let h1 = lf.second_form(0);
    let h2 = lf.second_form(1);
    let pairs = [
        ("a", cj.a.value(), h1[0][0].value()),
        ("b", cj.b.value(), h1[0][1].value()),
        ("b (Cartan symmetry)", cj.b.value(), cj.b_alt.value()),
        ("c", cj.c.value(), h1[1][1].value()),
        ("abar", cj.abar.value(), h2[0][0].value()),
        ("bbar", cj.bbar.value(), h2[0][1].value()),
        ("bbar (Cartan symmetry)", cj.bbar.value(), cj.bbar_alt.value()),
        ("cbar", cj.cbar.value(), h2[1][1].value()),
    ];
    for (name, u, v) in pairs {
        if !agree(u, v, rtol) {
            return Err(Error::Consistency(format!(
                "coefficient {name} disagrees at ({x}, {y}): {u:e} vs {v:e}"
            )));
        }
    }
    Ok(())
}

pub fn fundamental_coeffs(patch: &SurfacePatch, x: f64, y: f64, tol: &Tolerances) -> Result<FundamentalCoeffs> {
    let lf = LocalFrame::new(patch, x, y, 2, tol)?;
    let cj = lf.coeff_jets();
    check_coefficients(&lf, &cj)?;
    Ok(cj.values())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct XiFactors {
    pub xi_plus: f64,
    pub xi_minus: f64,
}

pub fn xi_factors(frame: &AdaptedFrame) -> XiFactors {
    let r = |v: Vec4<f64>| v[0].hypot(v[1]);
    XiFactors { xi_plus: r(frame.e[0] + frame.e[1]), xi_minus: r(frame.e[0] - frame.e[1]) }
}

/// Maximum residuals of the structure equations over a grid.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ResidualReport {
    pub nodes: usize,
    /// `ω₁ = ω₂ = 0` on the tangent plane.
    pub coframe: f64,
    /// `ω_ij + δ_iδ_j ω_ji = 0`.
    pub antisymmetry: f64,
    /// `dω_ij − Σ_k ω_ik ∧ ω_kj` on `(e3, e4)`.
    pub codazzi: f64,
    /// `dω_i − Σ_j δ_iδ_j ω_ij ∧ ω_j` on `(e3, e4)`.
    pub torsion: f64,
    /// Derivative identity of the normalized normals `(e1 ± e2)~`.
    pub normalized_row: f64,
    pub failures: Vec<String>,
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        [self.coframe, self.antisymmetry, self.codazzi, self.torsion, self.normalized_row]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct NodeResiduals {
    coframe: f64,
    antisymmetry: f64,
    codazzi: f64,
    torsion: f64,
    normalized_row: f64,
}

/// Residuals at a single point for an arbitrary (jet-valued) frame field.
fn node_residuals(lf: &LocalFrame) -> Result<NodeResiduals> {
    let mut r = NodeResiduals::default();
    let val = |j: &[Jet64; 2]| [j[0].value(), j[1].value()];
    let det_c = (lf.c[0][0] * lf.c[1][1] - lf.c[0][1] * lf.c[1][0]).value();

    let w: Vec<Vec<[Jet64; 2]>> = (0..4).map(|i| (0..4).map(|j| lf.omega_coord(i, j)).collect()).collect();
    let th: Vec<[Jet64; 2]> = (0..4).map(|i| lf.coframe_coord(i)).collect();

    for i in 0..2 {
        let v = val(&lf.on_tangent(&th[i]));
        r.coframe = r.coframe.max(v[0].abs()).max(v[1].abs());
    }
    for i in 0..4 {
        for j in 0..4 {
            let a = val(&lf.on_tangent(&w[i][j]));
            let b = val(&lf.on_tangent(&w[j][i]));
            let s = DELTA[i] * DELTA[j];
            r.antisymmetry = r.antisymmetry.max((a[0] + s * b[0]).abs()).max((a[1] + s * b[1]).abs());
        }
    }
    let wedge = |p: &[Jet64; 2], q: &[Jet64; 2]| p[0].value() * q[1].value() - p[1].value() * q[0].value();
    let ext_d = |p: &[Jet64; 2]| p[1].dx().value() - p[0].dy().value();
    for i in 0..4 {
        for j in 0..4 {
            let rhs: f64 = (0..4).map(|k| wedge(&w[i][k], &w[k][j])).sum();
            r.codazzi = r.codazzi.max(((ext_d(&w[i][j]) - rhs) * det_c).abs());
        }
        let rhs: f64 = (0..4).map(|j| DELTA[i] * DELTA[j] * wedge(&w[i][j], &th[j])).sum();
        r.torsion = r.torsion.max(((ext_d(&th[i]) - rhs) * det_c).abs());
    }

    for sign in GaussSign::BOTH {
        let s = sign.factor();
        let n = lf.e[0] + lf.e[1].scaled(Jet64::constant(s));
        let xi = (n[0] * n[0] + n[1] * n[1]).sqrt();
        let nt = n.scaled(xi.recip());
        let (xiv, xig) = (xi.value(), xi.gradient());
        let ntv = nt.map(|c| c.value());
        let e3 = lf.e[2].map(|c| c.value());
        let e4 = lf.e[3].map(|c| c.value());
        let mut diff = [Vec4::<f64>::zero(); 2];
        for (axis, d) in diff.iter_mut().enumerate() {
            let lhs = nt.map(|c| if axis == 0 { c.dx().value() } else { c.dy().value() });
            let w12 = w[0][1][axis].value();
            let k3 = w[0][2][axis].value() + s * w[1][2][axis].value();
            let k4 = w[0][3][axis].value() + s * w[1][3][axis].value();
            let rhs = ntv.scaled(s * w12 - xig[axis] / xiv) + (e3.scaled(k3) + e4.scaled(k4)).scaled(1.0 / xiv);
            *d = lhs - rhs;
        }
        for c in &lf.c {
            let on = diff[0].scaled(c[0].value()) + diff[1].scaled(c[1].value());
            r.normalized_row = (0..4).map(|k| on[k].abs()).fold(r.normalized_row, f64::max);
        }
    }
    Ok(r)
}

pub fn structure_residuals(patch: &SurfacePatch, grid: &Grid, tol: &Tolerances) -> ResidualReport {
    let nodes = grid.nodes();
    let per_node: Vec<std::result::Result<NodeResiduals, String>> = nodes
        .par_iter()
        .map(|&(x, y)| {
            LocalFrame::new(patch, x, y, 3, tol)
                .and_then(|lf| node_residuals(&lf))
                .map_err(|e| format!("({x}, {y}): {e}"))
        })
        .collect();
    let mut rep = ResidualReport { nodes: nodes.len(), ..Default::default() };
    for r in per_node {
        match r {
            Ok(n) => {
                rep.coframe = rep.coframe.max(n.coframe);
                rep.antisymmetry = rep.antisymmetry.max(n.antisymmetry);
                rep.codazzi = rep.codazzi.max(n.codazzi);
                rep.torsion = rep.torsion.max(n.torsion);
                rep.normalized_row = rep.normalized_row.max(n.normalized_row);
            }
            Err(e) => rep.failures.push(e),
        }
    }
    rep
}

/// Residuals at one point for an explicitly supplied frame field.
pub fn structure_residuals_for_frame(lf: &LocalFrame) -> Result<f64> {
    let r = node_residuals(lf)?;
    Ok([r.coframe, r.antisymmetry, r.codazzi, r.torsion, r.normalized_row].into_iter().fold(0.0, f64::max))
}

/// Applies constant hyperbolic rotations to the normal pair `(e1, e2)` and
/// the tangent pair `(e3, e4)` of a jet frame.
pub fn boosted(e: &[Vec4<Jet64>; 4], normal_phi: f64, tangent_phi: f64) -> [Vec4<Jet64>; 4] {
    let rot = |t: &Vec4<Jet64>, s: &Vec4<Jet64>, phi: f64| {
        let (ch, sh) = (Jet64::constant(phi.cosh()), Jet64::constant(phi.sinh()));
        (t.scaled(ch) + s.scaled(sh), t.scaled(sh) + s.scaled(ch))
    };
    let (e1, e2) = rot(&e[0], &e[1], normal_phi);
    let (e3, e4) = rot(&e[2], &e[3], tangent_phi);
    [e1, e2, e3, e4]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn close(a: &Vec4<f64>, b: &Vec4<f64>) -> bool {
        a.max_abs_diff(b) < 1e-12
    }

    #[test]
    fn plane_frame() {
        let s = SurfacePatch::builtin("plane").unwrap();
        let f = adapted_frame(&s, 0.2, -0.1, None, &tol()).unwrap();
        assert!(close(&f.e[2], &Vec4::new(1.0, 0.0, 0.0, 0.0)));
        assert!(close(&f.e[3], &Vec4::new(0.0, 0.0, 1.0, 0.0)));
        assert!(close(&f.e[0], &Vec4::new(0.0, 1.0, 0.0, 0.0)));
        assert!(close(&f.e[1], &Vec4::new(0.0, 0.0, 0.0, 1.0)));
        assert_eq!(f.gauge_det, -1);
    }

    #[test]
    fn monge_frame_at_origin() {
        for name in ["monge:a1", "monge:a2", "monge:a3", "monge:k34", "monge:tac"] {
            let s = SurfacePatch::builtin(name).unwrap();
            let f = adapted_frame(&s, 0.0, 0.0, None, &tol()).unwrap();
            assert!(close(&f.e[0], &Vec4::new(1.0, 0.0, 0.0, 0.0)), "{name}");
            assert!(close(&f.e[1], &Vec4::new(0.0, 0.0, 1.0, 0.0)), "{name}");
            assert!(close(&f.e[2], &Vec4::new(0.0, 1.0, 0.0, 0.0)), "{name}");
            assert!(close(&f.e[3], &Vec4::new(0.0, 0.0, 0.0, 1.0)), "{name}");
        }
    }

    #[test]
    fn gram_is_diagonal_everywhere() {
        for name in crate::surface::BUILTIN_NAMES {
            let s = SurfacePatch::builtin(name).unwrap();
            for (x, y) in s.default_grid(9).unwrap().nodes() {
                let g = adapted_frame(&s, x, y, None, &tol()).unwrap().gram();
                for i in 0..4 {
                    for j in 0..4 {
                        let want = if i == j { DELTA[i] } else { 0.0 };
                        assert!((g[i][j] - want).abs() < 1e-9, "{name} ({x},{y}) [{i}{j}]");
                    }
                }
            }
        }
    }

    #[test]
    fn coefficient_examples() {
        let s = SurfacePatch::builtin("plane").unwrap();
        assert_eq!(fundamental_coeffs(&s, 0.1, 0.3, &tol()).unwrap().as_array(), [0.0; 6]);

        let k = fundamental_coeffs(&SurfacePatch::builtin("monge:k34").unwrap(), 0.0, 0.0, &tol()).unwrap();
        let want = [-1.0, 0.0, -1.0, 0.0, 0.5, 0.0];
        for (g, w) in k.as_array().iter().zip(want) {
            assert!((g - w).abs() < 1e-14, "{k:?}");
        }
        assert!((k.kl(1.0, 1.0) - 0.75).abs() < 1e-14);

        let a2 = fundamental_coeffs(&SurfacePatch::builtin("monge:a2").unwrap(), 0.0, 0.0, &tol()).unwrap();
        let want = [0.0, 0.0, 0.0, 2.0, 0.0, 0.0];
        for (g, w) in a2.as_array().iter().zip(want) {
            assert!((g - w).abs() < 1e-14, "{a2:?}");
        }
    }

    #[test]
    fn plane_connection_vanishes() {
        let s = SurfacePatch::builtin("plane").unwrap();
        let cf = connection_forms(&s, 0.5, 0.5, &tol()).unwrap();
        assert!(cf.omega.iter().flatten().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn lhp_constant_normal_combination_vanishes() {
        let s = SurfacePatch::builtin("lhp").unwrap();
        for (x, y) in s.default_grid(7).unwrap().nodes() {
            let cf = connection_forms(&s, x, y, &tol()).unwrap();
            for k in 0..2 {
                assert!((cf.get(0, 2)[k] + cf.get(1, 2)[k]).abs() < 1e-12);
                assert!((cf.get(0, 3)[k] + cf.get(1, 3)[k]).abs() < 1e-12);
                assert!((cf.get(0, 1)[k] - cf.get(1, 0)[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gauge_alignment_flips_to_reference() {
        let s = SurfacePatch::builtin("monge:a2").unwrap();
        let f0 = adapted_frame(&s, 0.0, 0.0, None, &tol()).unwrap();
        let mut flipped = f0;
        flipped.e[1] = -flipped.e[1];
        flipped.e[3] = -flipped.e[3];
        flipped.align_to(&f0);
        assert_eq!(flipped.e, f0.e);
        let near = adapted_frame(&s, 0.01, 0.0, Some(&f0), &tol()).unwrap();
        for i in 0..4 {
            assert!(DELTA[i] * pseudo_dot(&near.e[i], &f0.e[i]) > 0.0);
        }
    }

    #[test]
    fn residuals_small_on_builtins() {
        for name in crate::surface::BUILTIN_NAMES {
            let s = SurfacePatch::builtin(name).unwrap();
            let g = Grid::interior(s.domain, 5, 5).unwrap();
            let r = structure_residuals(&s, &g, &tol());
            assert!(r.failures.is_empty(), "{name}: {:?}", r.failures);
            assert!(r.max() < 1e-10, "{name}: {r:?}");
        }
    }

    #[test]
    fn degenerate_and_non_lorentzian_tangents() {
        let t = tol();
        let a = Vec4::new(1.0, 0.0, 1.0, 0.0);
        let b = Vec4::new(0.0, 0.0, 0.0, 1.0);
        assert!(matches!(frame_from_tangents(&a, &b, (0.0, 0.0), &t), Err(Error::DegenerateTangent { .. })));
        let a = Vec4::new(0.0, 0.0, 1.0, 0.0);
        assert!(matches!(frame_from_tangents(&a, &b, (0.0, 0.0), &t), Err(Error::NotLorentzian(_))));
        assert!(matches!(frame_from_tangents(&a, &a, (0.0, 0.0), &t), Err(Error::RankDeficient { .. })));
    }
}
