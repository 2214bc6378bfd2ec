//! Lightcone Gauss maps, lightlike Gauss–Kronecker curvature, pedal surfaces
//! and tangent lightlike hyperplanes.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::frame::{check_coefficients, GaussSign, Jet64, LocalFrame};
use crate::geometry::{pseudo_dot, LightlikeHyperplane, Vec4};
use crate::grid::Grid;
use crate::linalg::singular_values;
use crate::surface::SurfacePatch;
use crate::tolerance::Tolerances;

/// `K_l(wx, wy)` at a point, with the two-route coefficient check.
pub fn lightlike_gk_curvature(
    patch: &SurfacePatch,
    x: f64,
    y: f64,
    weights: (f64, f64),
    tol: &Tolerances,
) -> Result<f64> {
    let lf = LocalFrame::new(patch, x, y, 2, tol)?;
    let cj = lf.coeff_jets();
    check_coefficients(&lf, &cj)?;
    Ok(cj.values().kl(weights.0, weights.1))
}

/// `K_l(1, ±1)` without the cross-check; the hot path for contouring.
pub fn kl_value(patch: &SurfacePatch, x: f64, y: f64, sign: GaussSign, tol: &Tolerances) -> Result<f64> {
    let lf = LocalFrame::new(patch, x, y, 2, tol)?;
    Ok(lf.coeff_jets().kl(1.0, sign.factor()).value())
}

/// `K_l(1, ±1)` as a jet of order `order − 2` (so `order = 3` gives the gradient).
pub fn kl_jet(patch: &SurfacePatch, x: f64, y: f64, sign: GaussSign, order: usize, tol: &Tolerances) -> Result<Jet64> {
    let lf = LocalFrame::new(patch, x, y, order, tol)?;
    Ok(lf.coeff_jets().kl(1.0, sign.factor()))
}

/// `det[⟨X_ij, e1 ± e2⟩]` in coordinates; equals `K_l(1, ±1)` times a
/// positive factor.
pub fn kl_coordinate(patch: &SurfacePatch, x: f64, y: f64, sign: GaussSign, tol: &Tolerances) -> Result<f64> {
    let lf = LocalFrame::new(patch, x, y, 2, tol)?;
    let n = (lf.e[0] + lf.e[1].scaled(Jet64::constant(sign.factor()))).map(|c| c.value());
    let d2 = |i: usize, j: usize| lf.x.map(|c| c.derivative(i, j));
    let (hxx, hxy, hyy) = (pseudo_dot(&d2(2, 0), &n), pseudo_dot(&d2(1, 1), &n), pseudo_dot(&d2(0, 2), &n));
    Ok(hxx * hyy - hxy * hxy)
}

pub fn lightcone_gauss_map(patch: &SurfacePatch, x: f64, y: f64, sign: GaussSign, tol: &Tolerances) -> Result<Vec4<f64>> {
    let lf = LocalFrame::new(patch, x, y, 1, tol)?;
    Ok(lf.gauss_jet(sign)?.map(|c| c.value()))
}

/// Columns `∂LG/∂x, ∂LG/∂y`.
pub fn gauss_jacobian(patch: &SurfacePatch, x: f64, y: f64, sign: GaussSign, tol: &Tolerances) -> Result<[Vec4<f64>; 2]> {
    let lf = LocalFrame::new(patch, x, y, 2, tol)?;
    let g = lf.gauss_jet(sign)?;
    Ok([g.map(|c| c.derivative(1, 0)), g.map(|c| c.derivative(0, 1))])
}

/// Euclidean singular values (ascending) of the 4×2 Gauss-map Jacobian.
pub fn jacobian_singular_values(cols: &[Vec4<f64>; 2]) -> [f64; 2] {
    singular_values([&cols[0], &cols[1]])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PedalPoint {
    pub direction: Vec4<f64>,
    pub support: f64,
    pub point: Vec4<f64>,
}

impl PedalPoint {
    pub fn new(direction: Vec4<f64>, support: f64) -> Self {
        Self { direction, support, point: direction.scaled(support) }
    }
}

pub fn pedal_map(patch: &SurfacePatch, x: f64, y: f64, sign: GaussSign, tol: &Tolerances) -> Result<PedalPoint> {
    let lf = LocalFrame::new(patch, x, y, 1, tol)?;
    let dir = lf.gauss_jet(sign)?.map(|c| c.value());
    let xp = lf.x.map(|c| c.value());
    Ok(PedalPoint::new(dir, pseudo_dot(&xp, &dir)))
}

/// `X(p) + u·LG±(p)`.
pub fn lightlike_hyperplane_along(
    patch: &SurfacePatch,
    x: f64,
    y: f64,
    u: f64,
    sign: GaussSign,
    tol: &Tolerances,
) -> Result<Vec4<f64>> {
    let lf = LocalFrame::new(patch, x, y, 1, tol)?;
    let dir = lf.gauss_jet(sign)?.map(|c| c.value());
    Ok(lf.x.map(|c| c.value()) + dir.scaled(u))
}

pub fn tangent_hyperplane(patch: &SurfacePatch, x: f64, y: f64, sign: GaussSign, tol: &Tolerances) -> Result<LightlikeHyperplane> {
    let p = pedal_map(patch, x, y, sign, tol)?;
    Ok(LightlikeHyperplane { normal: p.direction, offset: p.support })
}

pub fn hyperplanes_parallel(
    patch: &SurfacePatch,
    p1: (f64, f64),
    p2: (f64, f64),
    sign: GaussSign,
    match_tol: f64,
    tol: &Tolerances,
) -> Result<bool> {
    let a = lightcone_gauss_map(patch, p1.0, p1.1, sign, tol)?;
    let b = lightcone_gauss_map(patch, p2.0, p2.1, sign, tol)?;
    Ok(a.max_abs_diff(&b) < match_tol)
}

pub fn hyperplanes_equal(
    patch: &SurfacePatch,
    p1: (f64, f64),
    p2: (f64, f64),
    sign: GaussSign,
    match_tol: f64,
    tol: &Tolerances,
) -> Result<bool> {
    let a = pedal_map(patch, p1.0, p1.1, sign, tol)?;
    let b = pedal_map(patch, p2.0, p2.1, sign, tol)?;
    Ok(a.direction.max_abs_diff(&b.direction) < match_tol && (a.support - b.support).abs() < match_tol)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstancyReport {
    pub sign: GaussSign,
    pub constant: bool,
    pub max_deviation: f64,
    pub support_deviation: f64,
    pub threshold: f64,
    pub witness_hyperplane: Option<LightlikeHyperplane>,
}

/// Whether `LG±` is constant over the grid; if so, the hyperplane containing
/// the patch.
pub fn constancy_report(patch: &SurfacePatch, grid: &Grid, sign: GaussSign, tol: &Tolerances) -> Result<ConstancyReport> {
    let pedals: Vec<PedalPoint> = grid
        .nodes()
        .par_iter()
        .map(|&(x, y)| pedal_map(patch, x, y, sign, tol))
        .collect::<Result<_>>()?;
    let threshold = tol.const_rel * grid.rect.diameter();
    let base = pedals[0];
    let mut dev: f64 = 0.0;
    let mut sdev: f64 = 0.0;
    for p in &pedals {
        dev = dev.max(p.direction.max_abs_diff(&base.direction));
        sdev = sdev.max((p.support - base.support).abs());
    }
    let constant = dev < threshold;
    let witness_hyperplane = constant.then(|| {
        let mean = pedals.iter().map(|p| p.support).sum::<f64>() / pedals.len() as f64;
        LightlikeHyperplane { normal: base.direction, offset: mean }
    });
    Ok(ConstancyReport { sign, constant, max_deviation: dev, support_deviation: sdev, threshold, witness_hyperplane })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstancyAnalysis {
    pub plus: ConstancyReport,
    pub minus: ConstancyReport,
    pub constant_maps: usize,
    /// Both maps constant and every second derivative tangent: a Lorentzian 2-plane.
    pub plane_detected: bool,
    pub max_normal_curvature: Option<f64>,
}

pub fn constancy_analysis(patch: &SurfacePatch, grid: &Grid, tol: &Tolerances) -> Result<ConstancyAnalysis> {
    let plus = constancy_report(patch, grid, GaussSign::Plus, tol)?;
    let minus = constancy_report(patch, grid, GaussSign::Minus, tol)?;
    let constant_maps = plus.constant as usize + minus.constant as usize;
    let (plane_detected, max_normal_curvature) = if constant_maps == 2 {
        let vals: Vec<f64> = grid
            .nodes()
            .par_iter()
            .map(|&(x, y)| -> Result<f64> {
                let lf = LocalFrame::new(patch, x, y, 2, tol)?;
                let mut m: f64 = 0.0;
                for k in 0..2 {
                    for row in lf.second_form(k) {
                        for h in row {
                            m = m.max(h.value().abs());
                        }
                    }
                }
                Ok(m)
            })
            .collect::<Result<_>>()?;
        let m = vals.into_iter().fold(0.0, f64::max);
        (m < plus.threshold, Some(m))
    } else {
        (false, None)
    };
    Ok(ConstancyAnalysis { plus, minus, constant_maps, plane_detected, max_normal_curvature })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Domain;

    fn t() -> Tolerances {
        Tolerances::default()
    }

    fn b(name: &str) -> SurfacePatch {
        SurfacePatch::builtin(name).unwrap()
    }

    #[test]
    fn curvature_examples() {
        assert!((lightlike_gk_curvature(&b("monge:k34"), 0.0, 0.0, (1.0, 1.0), &t()).unwrap() - 0.75).abs() < 1e-14);
        assert_eq!(lightlike_gk_curvature(&b("plane"), 0.3, 0.1, (1.0, -1.0), &t()).unwrap(), 0.0);
        assert_eq!(lightlike_gk_curvature(&b("monge:a2"), 0.1, 0.1, (0.0, 0.0), &t()).unwrap(), 0.0);
    }

    #[test]
    fn gauss_map_examples() {
        let g = lightcone_gauss_map(&b("plane"), 0.2, 0.4, GaussSign::Plus, &t()).unwrap();
        assert!(g.max_abs_diff(&Vec4::new(0.0, 1.0, 0.0, 1.0)) < 1e-15);
        let g = lightcone_gauss_map(&b("monge:a2"), 0.0, 0.0, GaussSign::Plus, &t()).unwrap();
        assert!(g.max_abs_diff(&Vec4::new(1.0, 0.0, 1.0, 0.0)) < 1e-15);
        let lhp = b("lhp");
        for (x, y) in lhp.default_grid(9).unwrap().nodes() {
            let g = lightcone_gauss_map(&lhp, x, y, GaussSign::Plus, &t()).unwrap();
            assert!(g.max_abs_diff(&Vec4::new(0.0, 1.0, 0.0, 1.0)) < 1e-12, "({x},{y}) {g:?}");
        }
    }

    #[test]
    fn pedal_examples() {
        let plane = b("plane");
        let p = pedal_map(&plane, 0.5, -0.5, GaussSign::Plus, &t()).unwrap();
        assert_eq!(p.support, 0.0);
        assert_eq!(p.point, Vec4::new(0.0, 0.0, 0.0, 0.0));
        let p = pedal_map(&b("monge:a3"), 0.0, 0.0, GaussSign::Plus, &t()).unwrap();
        assert_eq!(p.support, 0.0);
        let moved = plane.translated(Vec4::new(0.0, -2.0, 0.0, 0.0));
        let p = pedal_map(&moved, 0.1, 0.2, GaussSign::Plus, &t()).unwrap();
        assert!((p.support - 2.0).abs() < 1e-15);
        assert_eq!(p.point, p.direction.scaled(p.support));
    }

    #[test]
    fn hyperplane_along_examples() {
        let plane = b("plane");
        let x = plane.point(0.3, 0.2).unwrap();
        assert_eq!(lightlike_hyperplane_along(&plane, 0.3, 0.2, 0.0, GaussSign::Minus, &t()).unwrap(), x);
        let v = lightlike_hyperplane_along(&plane, 0.0, 0.0, 1.0, GaussSign::Plus, &t()).unwrap();
        assert!(v.max_abs_diff(&Vec4::new(0.0, 1.0, 0.0, 1.0)) < 1e-15);
        let v = lightlike_hyperplane_along(&plane, 1.0, 0.0, 2.0, GaussSign::Plus, &t()).unwrap();
        assert!(v.max_abs_diff(&Vec4::new(1.0, 2.0, 0.0, 2.0)) < 1e-15);
    }

    #[test]
    fn tangent_hyperplane_examples() {
        let h = tangent_hyperplane(&b("monge:a1"), 0.0, 0.0, GaussSign::Plus, &t()).unwrap();
        assert!(h.normal.max_abs_diff(&Vec4::new(1.0, 0.0, 1.0, 0.0)) < 1e-15);
        assert_eq!(h.offset, 0.0);
        let lhp = b("lhp");
        let h = tangent_hyperplane(&lhp, 0.2, -0.3, GaussSign::Plus, &t()).unwrap();
        assert!(h.normal.max_abs_diff(&Vec4::new(0.0, 1.0, 0.0, 1.0)) < 1e-12);
        assert!(h.offset.abs() < 1e-12);
        assert!(h.eval(&lhp.point(0.2, -0.3).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn parallel_examples() {
        let a1 = b("monge:a1");
        assert!(!hyperplanes_parallel(&a1, (0.1, 0.0), (-0.1, 0.0), GaussSign::Plus, 1e-9, &t()).unwrap());
        let plane = b("plane");
        assert!(hyperplanes_equal(&plane, (0.1, 0.0), (-0.7, 0.4), GaussSign::Plus, 1e-9, &t()).unwrap());
        let lhp = b("lhp");
        assert!(hyperplanes_equal(&lhp, (0.1, 0.3), (-0.2, 0.1), GaussSign::Plus, 1e-9, &t()).unwrap());
    }

    #[test]
    fn constancy_examples() {
        let lhp = b("lhp");
        let r = constancy_analysis(&lhp, &lhp.default_grid(11).unwrap(), &t()).unwrap();
        assert_eq!(r.constant_maps, 1);
        assert!(r.plus.constant && !r.minus.constant);
        let w = r.plus.witness_hyperplane.unwrap();
        assert!(w.normal.max_abs_diff(&Vec4::new(0.0, 1.0, 0.0, 1.0)) < 1e-9 && w.offset.abs() < 1e-9);

        let plane = b("plane");
        let r = constancy_analysis(&plane, &plane.default_grid(11).unwrap(), &t()).unwrap();
        assert_eq!(r.constant_maps, 2);
        assert!(r.plane_detected);

        let a1 = b("monge:a1");
        let r = constancy_analysis(&a1, &a1.default_grid(11).unwrap(), &t()).unwrap();
        assert_eq!(r.constant_maps, 0);
    }

    #[test]
    fn coordinate_curvature_has_same_sign() {
        for name in ["monge:a1", "monge:a2", "monge:k34", "monge:tac", "lhp"] {
            let s = b(name);
            for (x, y) in crate::grid::Grid::new(Domain::square(0.25), 7, 7).unwrap().nodes() {
                for sign in GaussSign::BOTH {
                    let k = kl_value(&s, x, y, sign, &t()).unwrap();
                    let kc = kl_coordinate(&s, x, y, sign, &t()).unwrap();
                    if k.abs() > 1e-9 {
                        assert_eq!(k.signum(), kc.signum(), "{name} ({x},{y}) {sign:?}");
                    } else {
                        assert!(kc.abs() < 1e-8);
                    }
                }
            }
        }
    }
}
