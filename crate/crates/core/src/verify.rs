//! Invariant harness: re-checks the properties of every module on one patch.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::contact::{classify_contact, contact_height, extended_height, height, morse_family_check, SingClass};
use crate::error::Result;
use crate::expr::parse_expression;
use crate::frame::{adapted_frame, boosted, check_coefficients, GaussSign, LocalFrame, structure_residuals};
use crate::geometry::{causal_class, lightcone_normalize, orthonormalize_lorentzian_plane, pseudo_dot, Vec4};
use crate::grid::Grid;
use crate::indicatrix::{indicatrix, label_for, IndicatrixLabel, IndicatrixOptions};
use crate::lightcone::{gauss_jacobian, jacobian_singular_values, kl_value, lightcone_gauss_map, pedal_map};
use crate::linalg::sym_eigen2;
use crate::loci::{
    cubic_along, gauss_fold_cusp, parabolic_set, parallel_pair_search, swallowtail_points, GaussLabel, PairMode,
    PairOptions, ParabolicCurve,
};
use crate::surface::{tangent_data, SurfacePatch, BUILTIN_NAMES};
use crate::tolerance::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Nodes per side of the sampling grid.
    pub grid: usize,
    /// Nodes per side of the structure-equation grid.
    pub residual_grid: usize,
    /// Nodes per side of the contouring grid.
    pub trace_grid: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { seed: 1, grid: 21, residual_grid: 11, trace_grid: 41 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Worst observed value (an error magnitude or a count of violations).
    pub value: f64,
    pub threshold: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub surface: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

fn check(name: &str, value: f64, threshold: f64, samples: usize) -> Check {
    Check { name: name.into(), passed: value.is_finite() && value < threshold, value, threshold, samples }
}

/// A check whose value counts violations; passes when there are none.
fn count(name: &str, violations: usize, samples: usize) -> Check {
    check(name, violations as f64, 0.5, samples)
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn random_vec(r: &mut ChaCha8Rng) -> Vec4<f64> {
    Vec4::new(r.random_range(-2.0..2.0), r.random_range(-2.0..2.0), r.random_range(-2.0..2.0), r.random_range(-2.0..2.0))
}

fn edot(u: &Vec4<f64>, v: &Vec4<f64>) -> f64 {
    (0..4).map(|i| u[i] * v[i]).sum()
}

fn enorm(u: &Vec4<f64>) -> f64 {
    edot(u, u).sqrt()
}

pub fn verify_builtins(opts: &VerifyOptions, tol: &Tolerances) -> Result<Vec<VerifyReport>> {
    BUILTIN_NAMES.iter().map(|n| verify_surface(&SurfacePatch::builtin(n)?, opts, tol)).collect()
}

pub fn verify_surface(patch: &SurfacePatch, opts: &VerifyOptions, tol: &Tolerances) -> Result<VerifyReport> {
    let grid = Grid::interior(patch.domain, opts.grid, opts.grid)?;
    let nodes = grid.nodes();
    let seed = opts.seed;
    let mut checks = vec![
        geometry_bilinear(seed),
        geometry_normalize(seed),
        geometry_causal_scaling(seed),
        geometry_orthonormalize(patch, &nodes)?,
        surface_jet_fd(patch)?,
        surface_roundtrip(patch),
        surface_truncation(patch, &nodes)?,
        frames_gram(patch, &nodes, tol)?,
        frames_boost_gauge(patch, &nodes, seed, tol)?,
        frames_two_route(patch, &nodes, tol)?,
    ];
    let res = structure_residuals(patch, &Grid::interior(patch.domain, opts.residual_grid, opts.residual_grid)?, tol);
    checks.push(check(
        "frames.structure_equations",
        if res.failures.is_empty() { res.max() } else { f64::INFINITY },
        1e-6,
        res.nodes,
    ));
    checks.extend([
        lightcone_normalization(patch, &nodes, tol)?,
        lightcone_kl_boost(patch, seed, tol)?,
        lightcone_jacobian_bridge(patch, &nodes, tol)?,
        lightcone_orthogonality(patch, &nodes, tol)?,
        lightcone_pedal_product(patch, &nodes, tol)?,
        contact_hessian_bridge(patch, &nodes, tol)?,
        contact_morse(patch, &nodes, tol)?,
        contact_height_vs_extended(patch, &nodes, tol)?,
    ]);
    let probes = probe_points(patch);
    checks.push(contact_splitting(patch, &probes, tol)?);
    checks.push(contact_equivalence(patch, &probes, tol)?);
    checks.push(contact_reparametrization(patch, seed, tol)?);
    checks.extend(loci_checks(patch, opts, tol)?);
    Ok(VerifyReport { surface: patch.label.clone(), passed: checks.iter().all(|c| c.passed), checks })
}

fn geometry_bilinear(seed: u64) -> Check {
    let mut r = rng(seed, 1);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (u, v, w) = (random_vec(&mut r), random_vec(&mut r), random_vec(&mut r));
        let (a, b) = (r.random_range(-3.0..3.0), r.random_range(-3.0..3.0));
        let scale = 1.0 + enorm(&u) * enorm(&v) + (a * enorm(&u) + b * enorm(&v)).abs() * enorm(&w);
        let sym = (pseudo_dot(&u, &v) - pseudo_dot(&v, &u)).abs();
        let lin = (pseudo_dot(&(u.scaled(a) + v.scaled(b)), &w) - a * pseudo_dot(&u, &w) - b * pseudo_dot(&v, &w)).abs();
        worst = worst.max(sym.max(lin) / scale);
    }
    check("geometry.bilinear", worst, 1e-12, 100)
}

fn geometry_normalize(seed: u64) -> Check {
    let mut r = rng(seed, 2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (rad, a, b) = (r.random_range(0.1..10.0), r.random_range(0.0..6.3), r.random_range(0.0..6.3));
        let v = Vec4::new(rad * f64::cos(a), rad * f64::sin(a), rad * f64::cos(b), rad * f64::sin(b));
        let once = lightcone_normalize(&v, 1e-10);
        let twice = once.as_ref().ok().map(|n| lightcone_normalize(n, 1e-10));
        worst = match (once, twice) {
            (Ok(n1), Some(Ok(n2))) => worst.max(n1.max_abs_diff(&n2)).max(pseudo_dot(&n1, &n1).abs()),
            _ => f64::INFINITY,
        };
    }
    check("geometry.normalize_idempotent", worst, 1e-10, 100)
}

fn geometry_causal_scaling(seed: u64) -> Check {
    let mut r = rng(seed, 3);
    let mut bad = 0;
    for _ in 0..100 {
        let v = random_vec(&mut r);
        let k = r.random_range(0.01..100.0) * if r.random_bool(0.5) { -1.0 } else { 1.0 };
        if causal_class(&v, 1e-10).ok() != causal_class(&v.scaled(k), 1e-10).ok() {
            bad += 1;
        }
    }
    count("geometry.causal_scaling", bad, 100)
}

/// Euclidean residual of `w` after projection onto `span{u, v}`.
fn span_residual(w: &Vec4<f64>, u: &Vec4<f64>, v: &Vec4<f64>) -> f64 {
    let (a, b, d) = (edot(u, u), edot(u, v), edot(v, v));
    let (p, q) = (edot(u, w), edot(v, w));
    let det = a * d - b * b;
    let (cu, cv) = ((d * p - b * q) / det, (a * q - b * p) / det);
    enorm(&(*w - u.scaled(cu) - v.scaled(cv)))
}

fn geometry_orthonormalize(patch: &SurfacePatch, nodes: &[(f64, f64)]) -> Result<Check> {
    let mut worst: f64 = 0.0;
    for &(x, y) in nodes {
        let td = tangent_data(patch, x, y)?;
        let (t, s) = orthonormalize_lorentzian_plane(&td.xx, &td.xy, 1e-10)?;
        let gram = (pseudo_dot(&t, &t) + 1.0).abs().max((pseudo_dot(&s, &s) - 1.0).abs()).max(pseudo_dot(&t, &s).abs());
        worst = worst.max(gram).max(span_residual(&t, &td.xx, &td.xy)).max(span_residual(&s, &td.xx, &td.xy));
    }
    Ok(check("geometry.orthonormalize", worst, 1e-10, nodes.len()))
}

/// Sample points for the finite-difference comparison: a 3×3 lattice well
/// inside the domain.
fn fd_points(patch: &SurfacePatch) -> Vec<(f64, f64)> {
    let d = &patch.domain;
    let at = |r: [f64; 2], k: usize| r[0] + (r[1] - r[0]) * (0.25 + 0.25 * k as f64);
    (0..3).flat_map(|j| (0..3).map(move |i| (at(d.x, i), at(d.y, j)))).collect()
}

fn surface_jet_fd(patch: &SurfacePatch) -> Result<Check> {
    let h = 1e-3;
    let mut worst: f64 = 0.0;
    let pts = fd_points(patch);
    for &(x, y) in &pts {
        let full = patch.jet(x, y, 4)?;
        for total in 1..=4usize {
            for i in 0..=total {
                let j = total - i;
                // differentiate the lower-order jet derivative once more
                let (di, dj, sx, sy) = if i > 0 { (i - 1, j, 1.0, 0.0) } else { (i, j - 1, 0.0, 1.0) };
                let lower = |s: f64| -> Result<Vec4<f64>> {
                    Ok(patch.jet(x + s * sx, y + s * sy, total - 1)?.map(|c| c.derivative(di, dj)))
                };
                let central = |s: f64| -> Result<Vec4<f64>> { Ok((lower(s)? - lower(-s)?).scaled(0.5 / s)) };
                let richardson = (central(0.5 * h)?.scaled(4.0) - central(h)?).scaled(1.0 / 3.0);
                let exact = full.map(|c| c.derivative(i, j));
                for k in 0..4 {
                    let err = (richardson[k] - exact[k]).abs() / exact[k].abs().max(1.0);
                    worst = worst.max(err);
                }
            }
        }
    }
    Ok(check("surface.jet_vs_finite_differences", worst, 1e-5, pts.len()))
}

fn surface_roundtrip(patch: &SurfacePatch) -> Check {
    let bad = patch
        .components
        .iter()
        .filter(|e| parse_expression(&e.to_string()).map(|p| &p != *e).unwrap_or(true))
        .count();
    count("surface.parse_roundtrip", bad, 4)
}

fn surface_truncation(patch: &SurfacePatch, nodes: &[(f64, f64)]) -> Result<Check> {
    let mut worst: f64 = 0.0;
    for &(x, y) in nodes.iter().step_by(7) {
        let full = patch.jet(x, y, 4)?;
        for k in 0..4 {
            let low = patch.jet(x, y, k)?;
            for c in 0..4 {
                for t in 0..=k {
                    for i in 0..=t {
                        let (di, dj) = (i, t - i);
                        let (a, b) = (low[c].coeff(di, dj), full[c].coeff(di, dj));
                        worst = worst.max((a - b).abs() / b.abs().max(1.0));
                    }
                }
            }
        }
    }
    Ok(check("surface.jet_truncation", worst, 1e-12, nodes.len().div_ceil(7)))
}

fn frames_gram(patch: &SurfacePatch, nodes: &[(f64, f64)], tol: &Tolerances) -> Result<Check> {
    let diag = [-1.0, 1.0, -1.0, 1.0];
    let mut worst: f64 = 0.0;
    for &(x, y) in nodes {
        let g = adapted_frame(patch, x, y, None, tol)?.gram();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { diag[i] } else { 0.0 };
                worst = worst.max((g[i][j] - want).abs());
            }
        }
    }
    Ok(check("frames.gram", worst, 1e-9, nodes.len()))
}

fn frames_boost_gauge(patch: &SurfacePatch, nodes: &[(f64, f64)], seed: u64, tol: &Tolerances) -> Result<Check> {
    let mut r = rng(seed, 4);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (x, y) = nodes[r.random_range(0..nodes.len())];
        let phi: f64 = r.random_range(-2.0..=2.0);
        let f = adapted_frame(patch, x, y, None, tol)?;
        let (e1, e2) = (f.e[0], f.e[1]);
        let b1 = e1.scaled(phi.cosh()) + e2.scaled(phi.sinh());
        let b2 = e1.scaled(phi.sinh()) + e2.scaled(phi.cosh());
        for s in [1.0, -1.0] {
            let a = lightcone_normalize(&(e1 + e2.scaled(s)), 1e-9)?;
            let b = lightcone_normalize(&(b1 + b2.scaled(s)), 1e-9)?;
            worst = worst.max(a.max_abs_diff(&b));
        }
    }
    Ok(check("frames.boost_gauge", worst, 1e-9, 100))
}

fn frames_two_route(patch: &SurfacePatch, nodes: &[(f64, f64)], tol: &Tolerances) -> Result<Check> {
    let mut bad = 0;
    for &(x, y) in nodes {
        let lf = LocalFrame::new(patch, x, y, 2, tol)?;
        if check_coefficients(&lf, &lf.coeff_jets()).is_err() {
            bad += 1;
        }
    }
    Ok(count("frames.cartan_two_routes", bad, nodes.len()))
}

fn lightcone_normalization(patch: &SurfacePatch, nodes: &[(f64, f64)], tol: &Tolerances) -> Result<Check> {
    let mut worst: f64 = 0.0;
    for &(x, y) in nodes {
        for s in GaussSign::BOTH {
            let v = lightcone_gauss_map(patch, x, y, s, tol)?;
            worst = worst.max(pseudo_dot(&v, &v).abs()).max((v[0] * v[0] + v[1] * v[1] - 1.0).abs());
        }
    }
    Ok(check("lightcone.gauss_map_normalization", worst, 1e-9, 2 * nodes.len()))
}

fn lightcone_kl_boost(patch: &SurfacePatch, seed: u64, tol: &Tolerances) -> Result<Check> {
    let mut r = rng(seed, 5);
    let d = patch.domain;
    let mut bad = 0;
    for _ in 0..50 {
        let x = r.random_range(0.9 * d.x[0] + 0.1 * d.x[1]..0.1 * d.x[0] + 0.9 * d.x[1]);
        let y = r.random_range(0.9 * d.y[0] + 0.1 * d.y[1]..0.1 * d.y[0] + 0.9 * d.y[1]);
        let lf = LocalFrame::new(patch, x, y, 2, tol)?;
        for _ in 0..20 {
            let (pn, pt) = (r.random_range(-2.0..=2.0), r.random_range(-2.0..=2.0));
            let bf = lf.with_frame(boosted(&lf.e, pn, pt));
            for s in GaussSign::BOTH {
                let k0 = lf.coeff_jets().kl(1.0, s.factor()).value();
                let k1 = bf.coeff_jets().kl(1.0, s.factor()).value();
                // K scales by exp(±2φ) under normal boosts
                let zero = 1e-9 * (4.0f64).exp();
                let z0 = k0.abs() < zero;
                let z1 = k1.abs() < zero;
                if (z0 && z1) || (!z0 && !z1 && k0 * k1 > 0.0) {
                    continue;
                }
                if k0.abs().min(k1.abs()) > 1e-9 * 1e-3 || z0 != z1 {
                    bad += 1;
                }
            }
        }
    }
    Ok(count("lightcone.kl_sign_under_boosts", bad, 50 * 20 * 2))
}

fn lightcone_jacobian_bridge(patch: &SurfacePatch, nodes: &[(f64, f64)], tol: &Tolerances) -> Result<Check> {
    let bad: Vec<usize> = nodes
        .par_iter()
        .map(|&(x, y)| {
            let mut b = 0;
            for s in GaussSign::BOTH {
                let sv = jacobian_singular_values(&gauss_jacobian(patch, x, y, s, tol)?);
                let k = kl_value(patch, x, y, s, tol)?;
                if (sv[0] < 1e-6) != (k.abs() < 1e-6) {
                    b += 1;
                }
            }
            Ok(b)
        })
        .collect::<Result<_>>()?;
    Ok(count("lightcone.jacobian_rank_bridge", bad.iter().sum(), 2 * nodes.len()))
}

fn lightcone_orthogonality(patch: &SurfacePatch, nodes: &[(f64, f64)], tol: &Tolerances) -> Result<Check> {
    let mut worst: f64 = 0.0;
    for &(x, y) in nodes {
        let td = tangent_data(patch, x, y)?;
        for s in GaussSign::BOTH {
            let v = lightcone_gauss_map(patch, x, y, s, tol)?;
            worst = worst
                .max(pseudo_dot(&td.xx, &v).abs() / enorm(&td.xx).max(1.0))
                .max(pseudo_dot(&td.xy, &v).abs() / enorm(&td.xy).max(1.0));
        }
    }
    Ok(check("lightcone.tangent_orthogonality", worst, 1e-9, 2 * nodes.len()))
}

fn lightcone_pedal_product(patch: &SurfacePatch, nodes: &[(f64, f64)], tol: &Tolerances) -> Result<Check> {
    let mut bad = 0;
    for &(x, y) in nodes {
        for s in GaussSign::BOTH {
            let p = pedal_map(patch, x, y, s, tol)?;
            if p.point != p.direction.scaled(p.support) {
                bad += 1;
            }
        }
    }
    Ok(count("lightcone.pedal_is_support_times_direction", bad, 2 * nodes.len()))
}

fn contact_hessian_bridge(patch: &SurfacePatch, nodes: &[(f64, f64)], tol: &Tolerances) -> Result<Check> {
    let bad: Vec<usize> = nodes
        .par_iter()
        .map(|&(x, y)| {
            let mut b = 0;
            for s in GaussSign::BOTH {
                let (h, _) = contact_height(patch, x, y, s, tol)?;
                let det = h.hessian[0][0] * h.hessian[1][1] - h.hessian[0][1] * h.hessian[1][0];
                let k = kl_value(patch, x, y, s, tol)?;
                if (det.abs() < 1e-6) != (k.abs() < 1e-6) {
                    b += 1;
                }
            }
            Ok(b)
        })
        .collect::<Result<_>>()?;
    Ok(count("contact.hessian_curvature_bridge", bad.iter().sum(), 2 * nodes.len()))
}

fn contact_morse(patch: &SurfacePatch, nodes: &[(f64, f64)], tol: &Tolerances) -> Result<Check> {
    let mut worst = f64::INFINITY;
    let mut bad = 0;
    for &(x, y) in nodes {
        for s in GaussSign::BOTH {
            let v = lightcone_gauss_map(patch, x, y, s, tol)?;
            let m = morse_family_check(patch, x, y, &v)?;
            worst = worst.min(m.witness);
            if !(m.ok && m.witness > 1e-8) {
                bad += 1;
            }
        }
    }
    let mut c = count("contact.morse_family", bad, 2 * nodes.len());
    c.value = if bad == 0 { 0.0 } else { bad as f64 };
    let _ = worst;
    Ok(c)
}

fn contact_height_vs_extended(patch: &SurfacePatch, nodes: &[(f64, f64)], tol: &Tolerances) -> Result<Check> {
    let mut worst: f64 = 0.0;
    for &(x, y) in nodes.iter().step_by(5) {
        for s in GaussSign::BOTH {
            let v = lightcone_gauss_map(patch, x, y, s, tol)?;
            let a = height(patch, x, y, &v)?;
            let b = extended_height(patch, x, y, &v)?;
            let diffs = a
                .gradient
                .iter()
                .zip(&b.gradient)
                .chain(a.hessian.iter().flatten().zip(b.hessian.iter().flatten()))
                .chain(a.third.iter().zip(&b.third))
                .chain(a.fourth.iter().zip(&b.fourth));
            for (p, q) in diffs {
                worst = worst.max((p - q).abs());
            }
        }
    }
    Ok(check("contact.height_matches_extended", worst, 1e-12, nodes.len().div_ceil(5)))
}

/// Centre of the domain and the centres of its four quadrants.
fn probe_points(patch: &SurfacePatch) -> Vec<(f64, f64)> {
    let (cx, cy) = patch.domain.center();
    let (hx, hy) = (0.25 * (patch.domain.x[1] - patch.domain.x[0]), 0.25 * (patch.domain.y[1] - patch.domain.y[0]));
    vec![(cx, cy), (cx - hx, cy - hy), (cx + hx, cy - hy), (cx - hx, cy + hy), (cx + hx, cy + hy)]
}

/// Order of the first nonvanishing Taylor coefficient of the reduced function
/// `φ(t) = g(s(t), t)`, where `s(t)` solves `∂g/∂s = 0` along the direction
/// complementary to the Hessian kernel. Uses only point evaluations.
pub fn splitting_order(patch: &SurfacePatch, p: (f64, f64), sign: GaussSign, tol: &Tolerances) -> Result<Option<usize>> {
    let v0 = lightcone_gauss_map(patch, p.0, p.1, sign, tol)?;
    let c0 = pseudo_dot(&patch.eval(p.0, p.1)?, &v0);
    let g = |q: (f64, f64)| -> Result<f64> { Ok(pseudo_dot(&patch.eval(q.0, q.1)?, &v0) - c0) };
    let d = 1e-4;
    let gxx = (g((p.0 + d, p.1))? - 2.0 * g(p)? + g((p.0 - d, p.1))?) / (d * d);
    let gyy = (g((p.0, p.1 + d))? - 2.0 * g(p)? + g((p.0, p.1 - d))?) / (d * d);
    let gxy = (g((p.0 + d, p.1 + d))? - g((p.0 + d, p.1 - d))? - g((p.0 - d, p.1 + d))? + g((p.0 - d, p.1 - d))?)
        / (4.0 * d * d);
    let (ev, vecs) = sym_eigen2([[gxx, gxy], [gxy, gyy]]);
    let (eta, zeta) = if ev[0].abs() <= ev[1].abs() { (vecs[0], vecs[1]) } else { (vecs[1], vecs[0]) };
    let at = |s: f64, t: f64| (p.0 + s * zeta[0] + t * eta[0], p.1 + s * zeta[1] + t * eta[1]);
    let h = 1e-3;
    let mut samples = vec![(0.0, 0.0)];
    for k in (-5..=5).filter(|&k| k != 0) {
        let t = k as f64 * h;
        let mut s = 0.0;
        let ds = 1e-5;
        for _ in 0..60 {
            let (gp, g0, gm) = (g(at(s + ds, t))?, g(at(s, t))?, g(at(s - ds, t))?);
            let d1 = (gp - gm) / (2.0 * ds);
            let d2 = (gp - 2.0 * g0 + gm) / (ds * ds);
            if d2 == 0.0 {
                break;
            }
            let step = d1 / d2;
            s -= step;
            if step.abs() < 1e-14 {
                break;
            }
        }
        samples.push((k as f64 / 5.0, g(at(s, t))?));
    }
    Ok(leading_order(&samples, 5.0))
}

/// Fits a degree-7 polynomial to `(u, φ)` samples with `u = t / (scale h)`
/// and returns the first `k ≤ 4` with `|c_k| h^k > 1e−3 max_j |c_j| h^j`.
fn leading_order(samples: &[(f64, f64)], scale: f64) -> Option<usize> {
    const N: usize = 8;
    let mut m = [[0.0; N + 1]; N];
    for &(u, phi) in samples {
        for r in 0..N {
            for c in 0..N {
                m[r][c] += u.powi((r + c) as i32);
            }
            m[r][N] += u.powi(r as i32) * phi;
        }
    }
    for col in 0..N {
        let piv = (col..N).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs())).unwrap();
        m.swap(col, piv);
        for row in 0..N {
            if row != col {
                let f = m[row][col] / m[col][col];
                for k in col..=N {
                    m[row][k] -= f * m[col][k];
                }
            }
        }
    }
    let a: Vec<f64> = (0..N).map(|k| m[k][N] / m[k][k] / scale.powi(k as i32)).collect();
    let big = a[1..].iter().fold(0.0f64, |b, v| b.max(v.abs()));
    if big < 1e-20 {
        return None;
    }
    (1..N).find(|&k| a[k].abs() > 1e-3 * big).filter(|&k| k <= 4)
}

fn contact_splitting(patch: &SurfacePatch, probes: &[(f64, f64)], tol: &Tolerances) -> Result<Check> {
    let mut bad = 0;
    let mut n = 0;
    for &p in probes {
        for s in GaussSign::BOTH {
            let rep = classify_contact(patch, p.0, p.1, s, tol)?;
            if rep.sing_class == SingClass::Degenerate {
                continue;
            }
            n += 1;
            if splitting_order(patch, p, s, tol)? != Some(1 + rep.l_ord as usize) {
                bad += 1;
            }
        }
    }
    Ok(count("contact.splitting_oracle", bad, n))
}

/// Expected number of indicatrix arms on a small circle.
fn expected_arms(label: IndicatrixLabel) -> Option<usize> {
    match label {
        IndicatrixLabel::RegularCurve | IndicatrixLabel::Tacnode => Some(4),
        IndicatrixLabel::OrdinaryCusp => Some(2),
        IndicatrixLabel::IsolatedPoint => Some(0),
        IndicatrixLabel::Unclassified => None,
    }
}

fn contact_equivalence(patch: &SurfacePatch, probes: &[(f64, f64)], tol: &Tolerances) -> Result<Check> {
    let opts = IndicatrixOptions { rays: 360, rings: 40, angle_tol: 1e-10 };
    let radius = 0.1 * (patch.domain.x[1] - patch.domain.x[0]).min(patch.domain.y[1] - patch.domain.y[0]);
    let mut seen: Vec<(SingClass, IndicatrixLabel, i32, usize)> = Vec::new();
    let mut bad = 0;
    for &p in probes {
        for s in GaussSign::BOTH {
            let rep = classify_contact(patch, p.0, p.1, s, tol)?;
            let label = label_for(&rep);
            let Some(want) = expected_arms(label) else { continue };
            let traced = indicatrix(patch, p, s, radius, &opts, tol)?;
            if traced.arms != want {
                bad += 1;
            }
            for &(c, l, o, arms) in &seen {
                if c == rep.sing_class && l == label && (o != rep.l_ord || arms != traced.arms) {
                    bad += 1;
                }
            }
            seen.push((rep.sing_class, label, rep.l_ord, traced.arms));
        }
    }
    Ok(count("contact.equal_class_equal_invariants", bad, seen.len()))
}

fn contact_reparametrization(patch: &SurfacePatch, seed: u64, tol: &Tolerances) -> Result<Check> {
    let mut r = rng(seed, 6);
    let p = patch.domain.center();
    let base = [
        classify_contact(patch, p.0, p.1, GaussSign::Plus, tol)?,
        classify_contact(patch, p.0, p.1, GaussSign::Minus, tol)?,
    ];
    let mut bad = 0;
    for _ in 0..10 {
        let m = loop {
            let m = [[r.random_range(-1.5..1.5), r.random_range(-1.5..1.5)], [r.random_range(-1.5..1.5), r.random_range(-1.5..1.5)]];
            let det: f64 = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            if (0.3..3.0).contains(&det.abs()) {
                break m;
            }
        };
        let u0: (f64, f64) = (r.random_range(-0.5..0.5), r.random_range(-0.5..0.5));
        let t = [p.0 - m[0][0] * u0.0 - m[0][1] * u0.1, p.1 - m[1][0] * u0.0 - m[1][1] * u0.1];
        let q = patch.reparametrized(m, t)?;
        let flips = m[0][0] * m[1][1] - m[0][1] * m[1][0] < 0.0;
        for (k, s) in GaussSign::BOTH.into_iter().enumerate() {
            // reversing the parameter orientation swaps the two Gauss maps
            let s = if flips { s.opposite() } else { s };
            let rep = classify_contact(&q, u0.0, u0.1, s, tol)?;
            if rep.sing_class != base[k].sing_class || rep.l_ord != base[k].l_ord {
                bad += 1;
            }
        }
    }
    Ok(count("contact.reparametrization_invariance", bad, 20))
}

/// Points at spacing `step` along a polyline.
fn resample(curve: &ParabolicCurve, step: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for (a, b) in curve.segments() {
        let len = (b.0 - a.0).hypot(b.1 - a.1);
        let n = (len / step).ceil().max(1.0) as usize;
        for k in 0..n {
            let t = k as f64 / n as f64;
            out.push((a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1)));
        }
    }
    if let Some(&last) = curve.points.last() {
        if !curve.closed {
            out.push(last);
        }
    }
    out
}

fn loci_checks(patch: &SurfacePatch, opts: &VerifyOptions, tol: &Tolerances) -> Result<Vec<Check>> {
    let grid = Grid::new(patch.domain, opts.trace_grid, opts.trace_grid)?;
    let mut worst_k: f64 = 0.0;
    let mut npts = 0;
    let mut disagree = 0;
    let mut confirmed_pts = 0;
    let mut asym = 0;
    let mut scanned = 0;
    for s in GaussSign::BOTH {
        let set = parabolic_set(patch, &grid, s, tol)?;
        for c in &set.curves {
            npts += c.points.len();
            worst_k = c.kl_values.iter().fold(worst_k, |w, k| w.max(k.abs()));
            let sw = swallowtail_points(patch, c, tol)?;
            let mut confirmed: Vec<(f64, f64)> = sw.iter().filter(|p| p.confirmed).map(|p| p.location).collect();
            if !c.band {
                confirmed.extend(c.points.iter().copied());
            }
            for &p in &confirmed {
                let fc = gauss_fold_cusp(patch, p, s, tol)?;
                confirmed_pts += 1;
                if fc.label != GaussLabel::Unclassified && !fc.agree() {
                    disagree += 1;
                }
            }
            if !c.band {
                // sign changes of d3 on a fine resampling must match the
                // bracketed swallowtails, and conversely
                let fine: Vec<(f64, f64)> = resample(c, 1e-3);
                let d3 = cubic_along(patch, &fine, s, tol)?;
                let changes: Vec<(f64, f64)> =
                    (1..fine.len()).filter(|&k| d3[k - 1] * d3[k] < 0.0).map(|k| fine[k]).collect();
                let found: Vec<(f64, f64)> = sw.iter().filter(|p| p.bracket.is_some()).map(|p| p.location).collect();
                let near = |a: &(f64, f64), set: &[(f64, f64)]| set.iter().any(|b| (a.0 - b.0).hypot(a.1 - b.1) < 5e-3);
                asym += changes.iter().filter(|a| !near(a, &found)).count();
                asym += found.iter().filter(|a| !near(a, &changes)).count();
                scanned += fine.len();
            }
        }
    }
    let mut checks = vec![
        check("loci.refined_points_on_curve", worst_k, 1e-9, npts),
        count("loci.fold_cusp_routes_agree", disagree, confirmed_pts),
        count("loci.swallowtail_cross_scan", asym, scanned),
    ];
    let (cx, cy) = patch.domain.center();
    let eps = 0.05f64.min(0.2 * (patch.domain.x[1] - patch.domain.x[0]));
    let po = PairOptions { samples: 61, max_results: 100_000 };
    let par = parallel_pair_search(patch, (cx, cy), eps, GaussSign::Plus, PairMode::Parallel, &po, tol)?;
    let eq = parallel_pair_search(patch, (cx, cy), eps, GaussSign::Plus, PairMode::Equal, &po, tol)?;
    let outside = if par.truncated { 0 } else { eq.pairs.iter().filter(|p| !par.pairs.contains(p)).count() };
    checks.push(count("loci.equal_pairs_within_parallel", outside, eq.pairs.len()));
    Ok(checks)
}
