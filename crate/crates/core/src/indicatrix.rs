//! Tracing of the tangent lightlike hyperplane indicatrix `{q : g(q) = 0}`.

use rayon::prelude::*;
use serde::Serialize;

use crate::contact::{classify_contact, ContactReport, SingClass};
use crate::error::{Error, Result};
use crate::frame::{GaussSign, LocalFrame};
use crate::geometry::pseudo_dot;
use crate::surface::SurfacePatch;
use crate::tolerance::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum IndicatrixLabel {
    RegularCurve,
    OrdinaryCusp,
    IsolatedPoint,
    Tacnode,
    Unclassified,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndicatrixResult {
    pub label: IndicatrixLabel,
    pub polylines: Vec<Vec<(f64, f64)>>,
    /// Number of zero crossings on the circle of half the radius.
    pub arms: usize,
    /// Largest `|g|` over all traced vertices.
    pub max_residual: f64,
    pub contact: ContactReport,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IndicatrixOptions {
    pub rays: usize,
    pub rings: usize,
    pub angle_tol: f64,
}

impl Default for IndicatrixOptions {
    fn default() -> Self {
        Self { rays: 720, rings: 100, angle_tol: 1e-10 }
    }
}

/// Label implied by the germ class.
pub fn label_for(report: &ContactReport) -> IndicatrixLabel {
    match report.sing_class {
        SingClass::A1 if report.definite() => IndicatrixLabel::IsolatedPoint,
        SingClass::A1 => IndicatrixLabel::RegularCurve,
        SingClass::A2 => IndicatrixLabel::OrdinaryCusp,
        SingClass::A3 => {
            let q = report.q.unwrap_or(0.0);
            let d4 = report.discriminators.d4.unwrap_or(0.0);
            if q * d4 > 0.0 {
                IndicatrixLabel::IsolatedPoint
            } else {
                IndicatrixLabel::Tacnode
            }
        }
        SingClass::Degenerate => IndicatrixLabel::Unclassified,
    }
}

/// Samples `g` on concentric rings of `rays` points about `p0` and refines
/// each sign change by bisection in the angle.
pub fn indicatrix(
    patch: &SurfacePatch,
    p0: (f64, f64),
    sign: GaussSign,
    radius: f64,
    opts: &IndicatrixOptions,
    tol: &Tolerances,
) -> Result<IndicatrixResult> {
    if !(radius > 0.0) || !patch.domain.contains_disk(p0.0, p0.1, radius) {
        return Err(Error::InvalidArgument(format!(
            "disk of radius {radius} about ({}, {}) leaves the domain",
            p0.0, p0.1
        )));
    }
    if opts.rays < 8 || opts.rings < 2 {
        return Err(Error::InvalidArgument("indicatrix needs at least 8 rays and 2 rings".into()));
    }
    let contact = classify_contact(patch, p0.0, p0.1, sign, tol)?;
    let lf = LocalFrame::new(patch, p0.0, p0.1, 1, tol)?;
    let v0 = lf.gauss_jet(sign)?.map(|c| c.value());
    let c0 = pseudo_dot(&lf.x.map(|c| c.value()), &v0);
    let g = |q: (f64, f64)| -> Result<f64> { Ok(pseudo_dot(&patch.eval(q.0, q.1)?, &v0) - c0) };
    let at = |r: f64, th: f64| (p0.0 + r * th.cos(), p0.1 + r * th.sin());
    let step = std::f64::consts::TAU / opts.rays as f64;

    let rings: Vec<Vec<(f64, (f64, f64), f64)>> = (1..=opts.rings)
        .into_par_iter()
        .map(|k| -> Result<Vec<(f64, (f64, f64), f64)>> {
            let r = radius * k as f64 / opts.rings as f64;
            let vals: Vec<f64> = (0..opts.rays).map(|i| g(at(r, i as f64 * step))).collect::<Result<_>>()?;
            let mut zeros = Vec::new();
            for i in 0..opts.rays {
                let (va, vb) = (vals[i], vals[(i + 1) % opts.rays]);
                let (mut lo, mut hi) = (i as f64 * step, (i + 1) as f64 * step);
                if va == 0.0 {
                    zeros.push((lo, at(r, lo), 0.0));
                    continue;
                }
                if va * vb >= 0.0 {
                    continue;
                }
                let mut glo = va;
                while hi - lo > opts.angle_tol {
                    let mid = 0.5 * (lo + hi);
                    let gm = g(at(r, mid))?;
                    if gm == 0.0 {
                        lo = mid;
                        hi = mid;
                        break;
                    }
                    if (gm < 0.0) == (glo < 0.0) {
                        lo = mid;
                        glo = gm;
                    } else {
                        hi = mid;
                    }
                }
                let th = 0.5 * (lo + hi);
                let q = at(r, th);
                zeros.push((th, q, g(q)?.abs()));
            }
            Ok(zeros)
        })
        .collect::<Result<_>>()?;

    let max_residual = rings.iter().flatten().map(|z| z.2).fold(0.0, f64::max);
    let arms = rings[opts.rings / 2 - 1].len();
    let polylines = chain(&rings, radius / opts.rings as f64);
    Ok(IndicatrixResult { label: label_for(&contact), polylines, arms, max_residual, contact })
}

/// Links zeros on consecutive rings into polylines by nearest neighbour.
fn chain(rings: &[Vec<(f64, (f64, f64), f64)>], dr: f64) -> Vec<Vec<(f64, f64)>> {
    let reach = 4.0 * dr;
    let mut lines: Vec<Vec<(f64, f64)>> = Vec::new();
    let mut open: Vec<usize> = Vec::new();
    for ring in rings {
        let mut next_open = Vec::new();
        let mut taken = vec![false; open.len()];
        for &(_, q, _) in ring {
            let mut best: Option<(usize, f64)> = None;
            for (slot, &li) in open.iter().enumerate() {
                if taken[slot] {
                    continue;
                }
                let last = *lines[li].last().unwrap();
                let d = (last.0 - q.0).hypot(last.1 - q.1);
                if d < reach && best.is_none_or(|b| d < b.1) {
                    best = Some((slot, d));
                }
            }
            match best {
                Some((slot, _)) => {
                    taken[slot] = true;
                    let li = open[slot];
                    lines[li].push(q);
                    next_open.push(li);
                }
                None => {
                    lines.push(vec![q]);
                    next_open.push(lines.len() - 1);
                }
            }
        }
        open = next_open;
    }
    lines
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(name: &str) -> IndicatrixResult {
        let s = SurfacePatch::builtin(name).unwrap();
        indicatrix(&s, (0.0, 0.0), GaussSign::Plus, 0.2, &IndicatrixOptions::default(), &Tolerances::default())
            .unwrap()
    }

    #[test]
    fn cusp_indicatrix() {
        let r = run("monge:a2");
        assert_eq!(r.label, IndicatrixLabel::OrdinaryCusp);
        assert_eq!(r.arms, 2);
        assert!(r.max_residual < 1e-9);
        // vertices lie on x² + y³ = 0
        for q in r.polylines.iter().flatten() {
            assert!((q.0 * q.0 + q.1.powi(3)).abs() < 1e-9);
            assert!(q.1 <= 0.0);
        }
    }

    #[test]
    fn isolated_point_and_tacnode() {
        let r = run("monge:a3");
        assert_eq!(r.label, IndicatrixLabel::IsolatedPoint);
        assert_eq!(r.arms, 0);
        assert!(r.polylines.is_empty());
        let r = run("monge:tac");
        assert_eq!(r.label, IndicatrixLabel::Tacnode);
        assert_eq!(r.arms, 4);
    }

    #[test]
    fn regular_crossing_for_indefinite_a1() {
        let s = SurfacePatch::monge(
            crate::expr::Expr::Const(0.0),
            crate::expr::parse_expression("x^2 - y^2").unwrap(),
            crate::grid::Domain::square(0.3),
            "saddle",
        )
        .unwrap();
        let r = indicatrix(&s, (0.0, 0.0), GaussSign::Plus, 0.2, &IndicatrixOptions::default(), &Tolerances::default())
            .unwrap();
        assert_eq!(r.label, IndicatrixLabel::RegularCurve);
        assert_eq!(r.arms, 4);
    }

    #[test]
    fn disk_must_fit() {
        let s = SurfacePatch::builtin("monge:a2").unwrap();
        let e = indicatrix(&s, (0.2, 0.0), GaussSign::Plus, 0.2, &IndicatrixOptions::default(), &Tolerances::default());
        assert!(matches!(e, Err(Error::InvalidArgument(_))));
    }
}
