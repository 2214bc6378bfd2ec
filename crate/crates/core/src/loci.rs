//! Global loci: lightlike parabolic curves, swallowtails, fold/cusp labels of
//! the Gauss maps, parallel tangent hyperplanes and pedal meshes.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use crate::contact::{classify_contact, classify_height, contact_height, HeightEval, SingClass};
use crate::error::Result;
use crate::frame::{adapted_frame, GaussSign, LocalFrame};
use crate::geometry::{pseudo_dot, Vec4};
use crate::grid::Grid;
use crate::lightcone::{gauss_jacobian, kl_jet, kl_value, PedalPoint};
use crate::linalg::sym_eigen2;
use crate::surface::SurfacePatch;
use crate::tolerance::Tolerances;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParabolicCurve {
    pub points: Vec<(f64, f64)>,
    pub kl_values: Vec<f64>,
    pub sign: GaussSign,
    /// One flag per segment; closed curves include the closing segment.
    pub transversal: Vec<bool>,
    pub closed: bool,
    /// Traced from the band `|K_l| < band` rather than from sign changes.
    pub band: bool,
}

impl ParabolicCurve {
    pub fn segments(&self) -> impl Iterator<Item = ((f64, f64), (f64, f64))> + '_ {
        let n = self.points.len();
        let m = if self.closed { n } else { n.saturating_sub(1) };
        (0..m).map(move |i| (self.points[i], self.points[(i + 1) % n]))
    }

    pub fn fully_transversal(&self) -> bool {
        !self.band && self.transversal.iter().all(|&t| t)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParabolicSet {
    pub sign: GaussSign,
    pub curves: Vec<ParabolicCurve>,
    /// Cells `(i, j)` (lower-left node indices) touching a degenerate zero.
    pub flagged_cells: Vec<(usize, usize)>,
    pub cells: usize,
}

impl ParabolicSet {
    pub fn transversal_curves(&self) -> impl Iterator<Item = &ParabolicCurve> {
        self.curves.iter().filter(|c| !c.band)
    }

    pub fn wholly_degenerate(&self) -> bool {
        self.cells > 0 && self.flagged_cells.len() == self.cells
    }
}

/// Newton projection onto `K_l = 0` along the gradient. Returns the input
/// when the gradient vanishes or the iteration leaves the domain.
fn project(
    patch: &SurfacePatch,
    q: (f64, f64),
    sign: GaussSign,
    max_move: f64,
    tol: &Tolerances,
) -> Result<((f64, f64), f64)> {
    let k0 = kl_value(patch, q.0, q.1, sign, tol)?;
    let mut best = (q, k0);
    let mut cur = q;
    for _ in 0..12 {
        if best.1.abs() < 1e-13 {
            break;
        }
        let j = kl_jet(patch, cur.0, cur.1, sign, 3, tol)?;
        let [gx, gy] = j.gradient();
        let g2 = gx * gx + gy * gy;
        if g2 < 1e-24 {
            break;
        }
        let k = j.value();
        let next = (cur.0 - k * gx / g2, cur.1 - k * gy / g2);
        if (next.0 - q.0).hypot(next.1 - q.1) > max_move || !patch.domain.contains(next.0, next.1) {
            break;
        }
        let kn = kl_value(patch, next.0, next.1, sign, tol)?;
        cur = next;
        if kn.abs() < best.1.abs() {
            best = (cur, kn);
        }
    }
    Ok(best)
}

fn lerp(a: (f64, f64), b: (f64, f64), t: f64) -> (f64, f64) {
    (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1))
}

/// Zero of `K` on the segment `a → b`, by bisection on the sign.
fn refine_edge(
    patch: &SurfacePatch,
    a: ((f64, f64), f64),
    b: ((f64, f64), f64),
    sign: GaussSign,
    cell: f64,
    tol: &Tolerances,
) -> Result<((f64, f64), f64)> {
    let len = (b.0 .0 - a.0 .0).hypot(b.0 .1 - a.0 .1);
    let mut best = if a.1.abs() <= b.1.abs() { a } else { b };
    if a.1 != 0.0 && b.1 != 0.0 && (a.1 < 0.0) != (b.1 < 0.0) {
        let (mut lo, mut hi, mut klo) = (0.0, 1.0, a.1);
        for _ in 0..64 {
            if (hi - lo) * len < tol.trace * 1e-3 || best.1.abs() < 1e-13 {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let q = lerp(a.0, b.0, mid);
            let k = kl_value(patch, q.0, q.1, sign, tol)?;
            if k.abs() < best.1.abs() {
                best = (q, k);
            }
            if k == 0.0 {
                break;
            }
            if (k < 0.0) == (klo < 0.0) {
                lo = mid;
                klo = k;
            } else {
                hi = mid;
            }
        }
    }
    if best.1.abs() >= 1e-12 {
        best = project(patch, best.0, sign, 0.5 * cell, tol)?;
    }
    Ok(best)
}

/// Marching-squares contour of `K_l(1, ±1) = 0` over `grid`.
pub fn parabolic_set(patch: &SurfacePatch, grid: &Grid, sign: GaussSign, tol: &Tolerances) -> Result<ParabolicSet> {
    let (nx, ny) = (grid.nx, grid.ny);
    let nodes = grid.nodes();
    let vals: Vec<f64> = nodes
        .par_iter()
        .map(|&(x, y)| kl_value(patch, x, y, sign, tol))
        .collect::<Result<_>>()?;
    let (hx, hy) = grid.spacing();
    let cell = hx.hypot(hy);
    let k = |i: usize, j: usize| vals[j * nx + i];
    let bit = |v: f64| v > -tol.band;

    // edge ids: 2·node for the edge to the right, 2·node + 1 for the edge upward
    let edge_ends = |e: usize| -> ((usize, usize), (usize, usize)) {
        let n = e / 2;
        let (i, j) = (n % nx, n / nx);
        if e % 2 == 0 {
            ((i, j), (i + 1, j))
        } else {
            ((i, j), (i, j + 1))
        }
    };
    let h_edge = |i: usize, j: usize| 2 * (j * nx + i);
    let v_edge = |i: usize, j: usize| 2 * (j * nx + i) + 1;

    let mut segments: Vec<(usize, usize)> = Vec::new();
    let mut crossing_cells = vec![false; (nx - 1) * (ny - 1)];
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let b = [bit(k(i, j)), bit(k(i + 1, j)), bit(k(i + 1, j + 1)), bit(k(i, j + 1))];
            let edges = [h_edge(i, j), v_edge(i + 1, j), h_edge(i, j + 1), v_edge(i, j)];
            let cut: Vec<usize> = (0..4).filter(|&e| b[e] != b[(e + 1) % 4]).map(|e| edges[e]).collect();
            match cut.len() {
                2 => segments.push((cut[0], cut[1])),
                4 => {
                    let (cx, cy) = (0.5 * (grid.x(i) + grid.x(i + 1)), 0.5 * (grid.y(j) + grid.y(j + 1)));
                    let centre = bit(kl_value(patch, cx, cy, sign, tol)?);
                    if centre == b[0] {
                        // corners 0 and 2 join through the centre; cut off 1 and 3
                        segments.push((edges[0], edges[1]));
                        segments.push((edges[2], edges[3]));
                    } else {
                        segments.push((edges[3], edges[0]));
                        segments.push((edges[1], edges[2]));
                    }
                }
                _ => {}
            }
            crossing_cells[j * (nx - 1) + i] = !cut.is_empty();
        }
    }

    let mut cut_edges: Vec<usize> = segments.iter().flat_map(|&(a, b)| [a, b]).collect();
    cut_edges.sort_unstable();
    cut_edges.dedup();
    let refined: Vec<((f64, f64), f64)> = cut_edges
        .par_iter()
        .map(|&e| {
            let ((i0, j0), (i1, j1)) = edge_ends(e);
            let a = ((grid.x(i0), grid.y(j0)), k(i0, j0));
            let b = ((grid.x(i1), grid.y(j1)), k(i1, j1));
            refine_edge(patch, a, b, sign, cell, tol)
        })
        .collect::<Result<_>>()?;
    let at: HashMap<usize, ((f64, f64), f64)> = cut_edges.iter().copied().zip(refined).collect();

    let mut curves = Vec::new();
    for chain in chain_segments(&segments) {
        let closed = chain.len() > 2 && chain.first() == chain.last();
        let ids = if closed { &chain[..chain.len() - 1] } else { &chain[..] };
        let points: Vec<(f64, f64)> = ids.iter().map(|e| at[e].0).collect();
        let kl_values = ids.iter().map(|e| at[e].1).collect();
        let mut curve = ParabolicCurve { points, kl_values, sign, transversal: Vec::new(), closed, band: false };
        let segs: Vec<_> = curve.segments().collect();
        curve.transversal = segs
            .par_iter()
            .map(|&(a, b)| segment_transversal(patch, a, b, sign, 0.25 * hx.min(hy), tol))
            .collect::<Result<_>>()?;
        curves.push(curve);
    }

    // degenerate zeros: band nodes whose off-band neighbours share one sign
    let in_band = |i: usize, j: usize| k(i, j).abs() < tol.band;
    let mut degenerate = vec![false; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            if !in_band(i, j) {
                continue;
            }
            let mut pos = false;
            let mut neg = false;
            let nb = [(i.wrapping_sub(1), j), (i + 1, j), (i, j.wrapping_sub(1)), (i, j + 1)];
            for (a, b) in nb {
                if a < nx && b < ny && !in_band(a, b) {
                    if k(a, b) > 0.0 {
                        pos = true;
                    } else {
                        neg = true;
                    }
                }
            }
            degenerate[j * nx + i] = !(pos && neg);
        }
    }
    let mut flagged_cells = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let corner = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)].iter().any(|&(a, b)| degenerate[b * nx + a]);
            if corner && !crossing_cells[j * (nx - 1) + i] {
                flagged_cells.push((i, j));
            }
        }
    }
    for comp in components(&degenerate, nx, ny) {
        for piece in walk(&comp, &nodes, cell * 1.01) {
            let pts: Vec<((f64, f64), f64)> = piece
                .iter()
                .map(|&n| project(patch, nodes[n], sign, 0.5 * cell, tol))
                .collect::<Result<_>>()?;
            let m = pts.len().saturating_sub(1);
            curves.push(ParabolicCurve {
                points: pts.iter().map(|p| p.0).collect(),
                kl_values: pts.iter().map(|p| p.1).collect(),
                sign,
                transversal: vec![false; m],
                closed: false,
                band: true,
            });
        }
    }
    Ok(ParabolicSet { sign, curves, flagged_cells, cells: (nx - 1) * (ny - 1) })
}

/// Whether `K` takes opposite signs, clear of the band, on either side of the
/// curve near the segment midpoint.
fn segment_transversal(
    patch: &SurfacePatch,
    a: (f64, f64),
    b: (f64, f64),
    sign: GaussSign,
    offset: f64,
    tol: &Tolerances,
) -> Result<bool> {
    let len = (b.0 - a.0).hypot(b.1 - a.1);
    if len == 0.0 {
        return Ok(true);
    }
    let (m, _) = project(patch, lerp(a, b, 0.5), sign, 4.0 * len, tol)?;
    let offset = offset.min(0.25 * len);
    let [gx, gy] = kl_jet(patch, m.0, m.1, sign, 3, tol)?.gradient();
    let g = gx.hypot(gy);
    if g < 1e-10 {
        return Ok(false);
    }
    let n = (gx / g * offset, gy / g * offset);
    let (p, q) = ((m.0 + n.0, m.1 + n.1), (m.0 - n.0, m.1 - n.1));
    if !patch.domain.contains(p.0, p.1) || !patch.domain.contains(q.0, q.1) {
        return Ok(true);
    }
    let kp = kl_value(patch, p.0, p.1, sign, tol)?;
    let kq = kl_value(patch, q.0, q.1, sign, tol)?;
    Ok(kp.abs() > tol.band && kq.abs() > tol.band && (kp > 0.0) != (kq > 0.0))
}

/// Links segments sharing an edge id into chains; closed chains repeat their
/// first id at the end.
fn chain_segments(segments: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (s, &(a, b)) in segments.iter().enumerate() {
        adj.entry(a).or_default().push(s);
        adj.entry(b).or_default().push(s);
    }
    let mut used = vec![false; segments.len()];
    let mut chains = Vec::new();
    let starts: Vec<usize> = adj
        .iter()
        .filter(|(_, v)| v.len() == 1)
        .map(|(&e, _)| e)
        .chain(adj.keys().copied())
        .collect();
    for start in starts {
        if adj[&start].iter().all(|&s| used[s]) {
            continue;
        }
        let mut chain = vec![start];
        let mut cur = start;
        while let Some(&s) = adj[&cur].iter().find(|&&s| !used[s]) {
            used[s] = true;
            let (a, b) = segments[s];
            cur = if a == cur { b } else { a };
            chain.push(cur);
        }
        chains.push(chain);
    }
    chains
}

/// 8-connected components of the marked nodes, in row-major order.
fn components(mask: &[bool], nx: usize, ny: usize) -> Vec<Vec<usize>> {
    let mut seen = vec![false; mask.len()];
    let mut out = Vec::new();
    for start in 0..mask.len() {
        if !mask[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        let mut comp = vec![start];
        let mut k = 0;
        while k < comp.len() {
            let n = comp[k];
            let (i, j) = ((n % nx) as isize, (n / nx) as isize);
            for dj in -1..=1 {
                for di in -1..=1 {
                    let (a, b) = (i + di, j + dj);
                    if a < 0 || b < 0 || a >= nx as isize || b >= ny as isize {
                        continue;
                    }
                    let m = b as usize * nx + a as usize;
                    if mask[m] && !seen[m] {
                        seen[m] = true;
                        comp.push(m);
                    }
                }
            }
            k += 1;
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Greedy nearest-neighbour ordering, split wherever the next step exceeds
/// `reach`.
fn walk(comp: &[usize], nodes: &[(f64, f64)], reach: f64) -> Vec<Vec<usize>> {
    let mut left: Vec<usize> = comp.to_vec();
    let mut pieces = Vec::new();
    let mut piece = vec![left.remove(0)];
    while !left.is_empty() {
        let last = nodes[*piece.last().unwrap()];
        let (k, d) = left
            .iter()
            .enumerate()
            .map(|(k, &n)| (k, (nodes[n].0 - last.0).hypot(nodes[n].1 - last.1)))
            .fold((0, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
        if d > reach {
            pieces.push(std::mem::take(&mut piece));
        }
        piece.push(left.remove(k));
    }
    pieces.push(piece);
    pieces
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegularityReport {
    pub passed: bool,
    pub curves_checked: usize,
    /// Points where `∇K_l` vanishes or two branches come within the resolution.
    pub branch_points: Vec<(f64, f64)>,
    pub min_gradient: f64,
}

fn seg_point_dist(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let l2 = dx * dx + dy * dy;
    let t = if l2 == 0.0 { 0.0 } else { (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / l2).clamp(0.0, 1.0) };
    (p.0 - a.0 - t * dx).hypot(p.1 - a.1 - t * dy)
}

fn seg_seg_dist(a: ((f64, f64), (f64, f64)), b: ((f64, f64), (f64, f64))) -> f64 {
    let cross = |o: (f64, f64), p: (f64, f64), q: (f64, f64)| (p.0 - o.0) * (q.1 - o.1) - (p.1 - o.1) * (q.0 - o.0);
    let d1 = cross(a.0, a.1, b.0);
    let d2 = cross(a.0, a.1, b.1);
    let d3 = cross(b.0, b.1, a.0);
    let d4 = cross(b.0, b.1, a.1);
    if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
        return 0.0;
    }
    seg_point_dist(a.0, b.0, b.1)
        .min(seg_point_dist(a.1, b.0, b.1))
        .min(seg_point_dist(b.0, a.0, a.1))
        .min(seg_point_dist(b.1, a.0, a.1))
}

/// Checks that the contour curves of `set` form a regular 1-manifold at
/// resolution `resolution`.
pub fn regular_curve_check(
    patch: &SurfacePatch,
    set: &ParabolicSet,
    resolution: f64,
    tol: &Tolerances,
) -> Result<RegularityReport> {
    let curves: Vec<&ParabolicCurve> = set.transversal_curves().collect();
    let mut branch_points = Vec::new();
    let mut min_gradient = f64::INFINITY;
    for c in &curves {
        let grads: Vec<f64> = c
            .points
            .par_iter()
            .map(|&(x, y)| {
                let [gx, gy] = kl_jet(patch, x, y, set.sign, 3, tol)?.gradient();
                Ok(gx.hypot(gy))
            })
            .collect::<Result<_>>()?;
        for (p, g) in c.points.iter().zip(grads) {
            min_gradient = min_gradient.min(g);
            if g < 1e-8 {
                branch_points.push(*p);
            }
        }
    }
    // every segment with its curve index, position and cumulative arclength
    let mut segs = Vec::new();
    for (ci, c) in curves.iter().enumerate() {
        let mut s = 0.0;
        let total: f64 = c.segments().map(|(a, b)| (b.0 - a.0).hypot(b.1 - a.1)).sum();
        for (k, seg) in c.segments().enumerate() {
            let len = (seg.1 .0 - seg.0 .0).hypot(seg.1 .1 - seg.0 .1);
            segs.push((ci, k, seg, s, len, total, c.closed));
            s += len;
        }
    }
    for (u, a) in segs.iter().enumerate() {
        for b in &segs[u + 1..] {
            let bb = |s: &((f64, f64), (f64, f64))| {
                (s.0 .0.min(s.1 .0), s.0 .0.max(s.1 .0), s.0 .1.min(s.1 .1), s.0 .1.max(s.1 .1))
            };
            let (p, q) = (bb(&a.2), bb(&b.2));
            if p.0 > q.1 + resolution || q.0 > p.1 + resolution || p.2 > q.3 + resolution || q.2 > p.3 + resolution {
                continue;
            }
            if seg_seg_dist(a.2, b.2) >= resolution {
                continue;
            }
            if a.0 == b.0 {
                let mut gap = b.3 - (a.3 + a.4);
                if a.6 {
                    gap = gap.min(a.5 - (b.3 + b.4) + a.3);
                }
                if gap <= 3.0 * resolution {
                    continue;
                }
            }
            branch_points.push(a.2 .1);
        }
    }
    Ok(RegularityReport {
        passed: branch_points.is_empty(),
        curves_checked: curves.len(),
        branch_points,
        min_gradient: if min_gradient.is_finite() { min_gradient } else { 0.0 },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SwallowtailPoint {
    pub location: (f64, f64),
    /// Consecutive curve points across which `d3` changes sign.
    pub bracket: Option<[(f64, f64); 2]>,
    pub confirmed: bool,
}

/// Kernel direction of the Hessian (smaller eigenvalue) and the cubic
/// discriminator along it, multiplied by the sign of the other eigenvalue so
/// that it does not depend on the sign of the height function.
pub fn kernel_cubic(h: &HeightEval) -> ([f64; 2], f64) {
    let (ev, vecs) = sym_eigen2(h.hessian);
    let (k, q) = if ev[0].abs() <= ev[1].abs() { (0, ev[1]) } else { (1, ev[0]) };
    let eta = vecs[k];
    (eta, h.form(&[eta, eta, eta]) * q.signum())
}

pub fn aligned_cubic(patch: &SurfacePatch, q: (f64, f64), sign: GaussSign, reference: [f64; 2], tol: &Tolerances) -> Result<([f64; 2], f64)> {
    let (h, _) = contact_height(patch, q.0, q.1, sign, tol)?;
    let (eta, d3) = kernel_cubic(&h);
    Ok(if eta[0] * reference[0] + eta[1] * reference[1] < 0.0 { ([-eta[0], -eta[1]], -d3) } else { (eta, d3) })
}

fn cubic_raw(patch: &SurfacePatch, points: &[(f64, f64)], sign: GaussSign, tol: &Tolerances) -> Result<Vec<([f64; 2], f64)>> {
    points
        .par_iter()
        .map(|&(x, y)| Ok(kernel_cubic(&contact_height(patch, x, y, sign, tol)?.0)))
        .collect()
}

/// `d3` along the curve with the kernel direction carried continuously.
pub fn cubic_along(patch: &SurfacePatch, points: &[(f64, f64)], sign: GaussSign, tol: &Tolerances) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(points.len());
    let mut prev: Option<[f64; 2]> = None;
    for (mut eta, mut d3) in cubic_raw(patch, points, sign, tol)? {
        if let Some(p) = prev {
            if eta[0] * p[0] + eta[1] * p[1] < 0.0 {
                eta = [-eta[0], -eta[1]];
                d3 = -d3;
            }
        }
        prev = Some(eta);
        out.push(d3);
    }
    Ok(out)
}

/// Swallowtail candidates on a traced curve: sign changes of `d3` on
/// transversal segments, refined by bisection, plus points classified A3.
pub fn swallowtail_points(patch: &SurfacePatch, curve: &ParabolicCurve, tol: &Tolerances) -> Result<Vec<SwallowtailPoint>> {
    let sign = curve.sign;
    let raw = cubic_raw(patch, &curve.points, sign, tol)?;
    let n = curve.points.len();
    let mut out: Vec<SwallowtailPoint> = Vec::new();
    for (k, &t) in curve.transversal.iter().enumerate() {
        let (i, j) = (k, (k + 1) % n);
        let ((ei, di), (ej, dj)) = (raw[i], raw[j]);
        let dj = if ei[0] * ej[0] + ei[1] * ej[1] < 0.0 { -dj } else { dj };
        if !t || di * dj >= 0.0 {
            continue;
        }
        let (a, b) = (curve.points[i], curve.points[j]);
        let len = (b.0 - a.0).hypot(b.1 - a.1);
        let (eta_a, da) = aligned_cubic(patch, a, sign, [1.0, 0.0], tol)?;
        let (mut lo, mut hi, mut dlo) = (0.0, 1.0, da);
        let mut q = a;
        for _ in 0..80 {
            if (hi - lo) * len <= 1e-9 {
                break;
            }
            let mid = 0.5 * (lo + hi);
            q = project(patch, lerp(a, b, mid), sign, len, tol)?.0;
            let (_, dm) = aligned_cubic(patch, q, sign, eta_a, tol)?;
            if dm == 0.0 {
                break;
            }
            if (dm < 0.0) == (dlo < 0.0) {
                lo = mid;
                dlo = dm;
            } else {
                hi = mid;
            }
        }
        if len > 0.0 {
            q = project(patch, lerp(a, b, 0.5 * (lo + hi)), sign, len, tol)?.0;
        }
        let confirmed = classify_contact(patch, q.0, q.1, sign, tol)?.sing_class == SingClass::A3;
        out.push(SwallowtailPoint { location: q, bracket: Some([a, b]), confirmed });
    }
    for p in swallowtail_at_points(patch, &curve.points, sign, tol)? {
        let dup = out.iter().any(|s| (s.location.0 - p.location.0).hypot(s.location.1 - p.location.1) < 1e-6);
        if !dup {
            out.push(p);
        }
    }
    Ok(out)
}

/// Points of a list at which the contact germ is A3.
pub fn swallowtail_at_points(
    patch: &SurfacePatch,
    points: &[(f64, f64)],
    sign: GaussSign,
    tol: &Tolerances,
) -> Result<Vec<SwallowtailPoint>> {
    let classes: Vec<SingClass> = points
        .par_iter()
        .map(|&(x, y)| {
            let (h, _) = contact_height(patch, x, y, sign, tol)?;
            Ok(classify_height(&h, tol).sing_class)
        })
        .collect::<Result<_>>()?;
    Ok(points
        .iter()
        .zip(classes)
        .filter(|(_, c)| *c == SingClass::A3)
        .map(|(&location, _)| SwallowtailPoint { location, bracket: None, confirmed: true })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum GaussLabel {
    Regular,
    Fold,
    Cusp,
    Unclassified,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FoldCuspReport {
    /// Label from the contact class.
    pub label: GaussLabel,
    /// Label from the rank of the Gauss-map Jacobian.
    pub jacobian_label: GaussLabel,
    pub sing_class: SingClass,
    /// Singular values of the Jacobian, ascending.
    pub sigma: [f64; 2],
    /// `dK_l(η)` along the Jacobian kernel (rank 1 only).
    pub transverse_derivative: Option<f64>,
}

impl FoldCuspReport {
    pub fn agree(&self) -> bool {
        self.label == self.jacobian_label
    }
}

/// Rank threshold on the smallest singular value of the Gauss-map Jacobian.
pub const JACOBIAN_RANK_TOL: f64 = 1e-6;

pub fn gauss_fold_cusp(patch: &SurfacePatch, p: (f64, f64), sign: GaussSign, tol: &Tolerances) -> Result<FoldCuspReport> {
    let report = classify_contact(patch, p.0, p.1, sign, tol)?;
    let label = match report.sing_class {
        SingClass::A1 => GaussLabel::Regular,
        SingClass::A2 => GaussLabel::Fold,
        SingClass::A3 => GaussLabel::Cusp,
        SingClass::Degenerate => GaussLabel::Unclassified,
    };
    let cols = gauss_jacobian(patch, p.0, p.1, sign, tol)?;
    let ed = |u: &Vec4<f64>, v: &Vec4<f64>| (0..4).map(|i| u[i] * v[i]).sum::<f64>();
    let (ev, vecs) = sym_eigen2([
        [ed(&cols[0], &cols[0]), ed(&cols[0], &cols[1])],
        [ed(&cols[1], &cols[0]), ed(&cols[1], &cols[1])],
    ]);
    let sigma = [ev[0].max(0.0).sqrt(), ev[1].max(0.0).sqrt()];
    let mut transverse_derivative = None;
    let jacobian_label = if sigma[0] >= JACOBIAN_RANK_TOL {
        GaussLabel::Regular
    } else if sigma[1] < JACOBIAN_RANK_TOL {
        GaussLabel::Unclassified
    } else {
        let [gx, gy] = kl_jet(patch, p.0, p.1, sign, 3, tol)?.gradient();
        let eta = vecs[0];
        let d = gx * eta[0] + gy * eta[1];
        transverse_derivative = Some(d);
        if d.abs() > 1e-6 * gx.hypot(gy).max(1.0) {
            GaussLabel::Fold
        } else {
            GaussLabel::Cusp
        }
    };
    Ok(FoldCuspReport { label, jacobian_label, sing_class: report.sing_class, sigma, transverse_derivative })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairMode {
    Parallel,
    Equal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PairOptions {
    /// Samples per side of the square enclosing the disk.
    pub samples: usize,
    pub max_results: usize,
}

impl Default for PairOptions {
    fn default() -> Self {
        Self { samples: 201, max_results: 10_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairSearch {
    pub mode: PairMode,
    pub sign: GaussSign,
    pub match_tolerance: f64,
    pub pairs: Vec<[(f64, f64); 2]>,
    pub triples: Vec<[(f64, f64); 3]>,
    pub samples: usize,
    pub excluded_band: usize,
    pub truncated: bool,
}

struct Sample {
    at: (f64, f64),
    dir: Vec4<f64>,
    support: f64,
}

/// Dense search for distinct points of the `epsilon`-disk about `p0` with
/// matching tangent lightlike hyperplanes (`Parallel`: same direction;
/// `Equal`: same direction and support).
pub fn parallel_pair_search(
    patch: &SurfacePatch,
    p0: (f64, f64),
    epsilon: f64,
    sign: GaussSign,
    mode: PairMode,
    opts: &PairOptions,
    tol: &Tolerances,
) -> Result<PairSearch> {
    if !(epsilon > 0.0) || !patch.domain.contains_disk(p0.0, p0.1, epsilon) {
        return Err(crate::error::Error::InvalidArgument(format!(
            "disk of radius {epsilon} about ({}, {}) leaves the domain",
            p0.0, p0.1
        )));
    }
    let n = opts.samples.max(2);
    let coord = |i: usize| -epsilon + 2.0 * epsilon * i as f64 / (n - 1) as f64;
    let offsets: Vec<(f64, f64)> = (0..n)
        .flat_map(|j| (0..n).map(move |i| (coord(i), coord(j))))
        .filter(|&(u, v)| u.hypot(v) <= epsilon)
        .collect();
    let evaluated: Vec<Option<Sample>> = offsets
        .par_iter()
        .map(|&(u, v)| {
            let at = (p0.0 + u, p0.1 + v);
            let lf = LocalFrame::new(patch, at.0, at.1, 2, tol)?;
            if lf.coeff_jets().kl(1.0, sign.factor()).value().abs() < tol.band {
                return Ok(None);
            }
            let dir = lf.gauss_jet(sign)?.map(|c| c.value());
            let support = pseudo_dot(&lf.x.map(|c| c.value()), &dir);
            Ok(Some(Sample { at, dir, support }))
        })
        .collect::<Result<_>>()?;
    let excluded_band = evaluated.iter().filter(|s| s.is_none()).count();
    let samples: Vec<Sample> = evaluated.into_iter().flatten().collect();

    let m = tol.matching;
    let key = |d: &Vec4<f64>| d.0.map(|c| (c / m).floor() as i64);
    let mut buckets: HashMap<[i64; 4], Vec<usize>> = HashMap::new();
    for (i, s) in samples.iter().enumerate() {
        buckets.entry(key(&s.dir)).or_default().push(i);
    }
    let matches = |a: &Sample, b: &Sample| {
        a.at != b.at
            && a.dir.max_abs_diff(&b.dir) < m
            && (mode == PairMode::Parallel || (a.support - b.support).abs() < m)
    };
    let mut neighbours: Vec<Vec<usize>> = vec![Vec::new(); samples.len()];
    for (i, s) in samples.iter().enumerate() {
        let k = key(&s.dir);
        for code in 0..81 {
            let mut c = k;
            let mut r = code;
            for slot in c.iter_mut() {
                *slot += (r % 3) as i64 - 1;
                r /= 3;
            }
            if let Some(list) = buckets.get(&c) {
                for &j in list {
                    if j > i && matches(s, &samples[j]) {
                        neighbours[i].push(j);
                    }
                }
            }
        }
        neighbours[i].sort_unstable();
    }
    let mut truncated = false;
    let mut pairs = Vec::new();
    let mut triples = Vec::new();
    'outer: for i in 0..samples.len() {
        for &j in &neighbours[i] {
            if pairs.len() >= opts.max_results {
                truncated = true;
                break 'outer;
            }
            pairs.push([samples[i].at, samples[j].at]);
        }
    }
    'tri: for i in 0..samples.len() {
        for (a, &j) in neighbours[i].iter().enumerate() {
            for &k in &neighbours[i][a + 1..] {
                if neighbours[j].binary_search(&k).is_ok() {
                    if triples.len() >= opts.max_results {
                        truncated = true;
                        break 'tri;
                    }
                    triples.push([samples[i].at, samples[j].at, samples[k].at]);
                }
            }
        }
    }
    Ok(PairSearch {
        mode,
        sign,
        match_tolerance: m,
        pairs,
        triples,
        samples: samples.len() + excluded_band,
        excluded_band,
        truncated,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PedalNode {
    pub x: f64,
    pub y: f64,
    #[serde(flatten)]
    pub pedal: PedalPoint,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PedalMesh {
    pub sign: GaussSign,
    pub nx: usize,
    pub ny: usize,
    /// Row-major, `y` outer.
    pub nodes: Vec<PedalNode>,
    /// Largest componentwise change of the direction between grid neighbours.
    pub max_adjacent_deviation: f64,
}

pub fn pedal_mesh(patch: &SurfacePatch, grid: &Grid, sign: GaussSign, tol: &Tolerances) -> Result<PedalMesh> {
    let (nx, ny) = (grid.nx, grid.ny);
    let coords = grid.nodes();
    let mut frames = coords
        .par_iter()
        .map(|&(x, y)| adapted_frame(patch, x, y, None, tol))
        .collect::<Result<Vec<_>>>()?;
    for n in 1..frames.len() {
        let r = if n % nx > 0 { n - 1 } else { n - nx };
        let reference = frames[r];
        frames[n].align_to(&reference);
    }
    let nodes = coords
        .iter()
        .zip(&frames)
        .map(|(&(x, y), f)| {
            let dir = f.gauss(sign)?;
            let support = pseudo_dot(&patch.point(x, y)?, &dir);
            Ok(PedalNode { x, y, pedal: PedalPoint::new(dir, support) })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut dev: f64 = 0.0;
    for j in 0..ny {
        for i in 0..nx {
            let d = &nodes[j * nx + i].pedal.direction;
            if i + 1 < nx {
                dev = dev.max(d.max_abs_diff(&nodes[j * nx + i + 1].pedal.direction));
            }
            if j + 1 < ny {
                dev = dev.max(d.max_abs_diff(&nodes[(j + 1) * nx + i].pedal.direction));
            }
        }
    }
    Ok(PedalMesh { sign, nx, ny, nodes, max_adjacent_deviation: dev })
}
