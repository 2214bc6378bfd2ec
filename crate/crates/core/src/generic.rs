//! Empirical genericity probe over random polynomial Monge surfaces.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::contact::{classify_height, contact_height, SingClass};
use crate::error::{Error, Result};
use crate::expr::parse_expression;
use crate::frame::GaussSign;
use crate::grid::{Domain, Grid};
use crate::loci::{parabolic_set, regular_curve_check, swallowtail_points};
use crate::surface::{tangent_data, SurfacePatch};
use crate::tolerance::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GenericOptions {
    /// Half-width of the square domain.
    pub half: f64,
    /// Nodes per side of the contouring grid.
    pub grid: usize,
    /// Nodes per side of the Lorentzian probe grid.
    pub probe: usize,
    /// Draws are rejected unless `det G` stays below this on the probe grid.
    pub gram_max: f64,
    pub max_attempts: usize,
    /// Resolution of the branch-point check.
    pub resolution: f64,
}

impl Default for GenericOptions {
    fn default() -> Self {
        Self { half: 0.5, grid: 41, probe: 21, gram_max: -0.1, max_attempts: 1000, resolution: 1e-3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialSummary {
    pub trial: usize,
    pub label: String,
    /// Draws needed to pass the Lorentzian conditioning.
    pub attempts: usize,
    pub transversal_curves: usize,
    pub band_curves: usize,
    pub flagged_cells: usize,
    /// Parabolic set of both signs is purely transversal.
    pub transversal_only: bool,
    /// Every cell is flagged for some sign; excluded from statistics.
    pub wholly_degenerate: bool,
    pub curve_points: usize,
    pub a1: usize,
    pub a2: usize,
    pub a3: usize,
    pub degenerate: usize,
    pub swallowtails: usize,
    pub unconfirmed_swallowtails: usize,
    pub regular: bool,
    pub branch_points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenericityReport {
    pub seed: Option<u64>,
    pub trials: usize,
    pub degree: Option<u32>,
    pub excluded: usize,
    pub transversal_fraction: f64,
    pub curve_points: usize,
    pub a2_fraction: f64,
    pub a3_points: usize,
    pub degenerate_count: usize,
    pub swallowtails: usize,
    pub regular_failures: usize,
    pub details: Vec<TrialSummary>,
}

/// Exponents `(i, j)` with `2 ≤ i + j ≤ degree`.
fn monomials(degree: u32) -> Vec<(u32, u32)> {
    (2..=degree).flat_map(|d| (0..=d).map(move |i| (d - i, i))).collect()
}

fn polynomial(coeffs: &[f64], exps: &[(u32, u32)]) -> String {
    let terms: Vec<String> = coeffs.iter().zip(exps).map(|(c, &(i, j))| format!("({c:?})*x^{i}*y^{j}")).collect();
    terms.join(" + ")
}

/// The random Monge surface of `trial`, redrawn until Lorentzian with margin.
pub fn random_monge(seed: u64, trial: usize, degree: u32, opts: &GenericOptions) -> Result<(SurfacePatch, usize)> {
    if degree < 2 {
        return Err(Error::InvalidArgument(format!("degree must be at least 2, got {degree}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    let exps = monomials(degree);
    let domain = Domain::square(opts.half);
    let probe = Grid::new(domain, opts.probe, opts.probe)?;
    for attempt in 1..=opts.max_attempts {
        let mut draw = || -> Vec<f64> { exps.iter().map(|_| rng.random_range(-1.0..=1.0)).collect() };
        let (c1, c2) = (draw(), draw());
        let f1 = parse_expression(&polynomial(&c1, &exps))?;
        let f2 = parse_expression(&polynomial(&c2, &exps))?;
        let patch = SurfacePatch::monge(f1, f2, domain, format!("random:{seed}:{trial}"))?;
        let ok = probe
            .nodes()
            .iter()
            .all(|&(x, y)| tangent_data(&patch, x, y).map(|t| t.det() <= opts.gram_max).unwrap_or(false));
        if ok {
            return Ok((patch, attempt));
        }
    }
    Err(Error::NotConverged(format!("no Lorentzian draw in {} attempts for trial {trial}", opts.max_attempts)))
}

/// Parabolic-curve statistics of one patch over both Gauss maps.
pub fn analyze_patch(patch: &SurfacePatch, trial: usize, opts: &GenericOptions, tol: &Tolerances) -> Result<TrialSummary> {
    let grid = Grid::new(patch.domain, opts.grid, opts.grid)?;
    let mut s = TrialSummary {
        trial,
        label: patch.label.clone(),
        attempts: 1,
        transversal_curves: 0,
        band_curves: 0,
        flagged_cells: 0,
        transversal_only: true,
        wholly_degenerate: false,
        curve_points: 0,
        a1: 0,
        a2: 0,
        a3: 0,
        degenerate: 0,
        swallowtails: 0,
        unconfirmed_swallowtails: 0,
        regular: true,
        branch_points: 0,
    };
    for sign in GaussSign::BOTH {
        let set = parabolic_set(patch, &grid, sign, tol)?;
        s.flagged_cells += set.flagged_cells.len();
        s.wholly_degenerate |= set.wholly_degenerate();
        for c in &set.curves {
            if c.band || !c.fully_transversal() {
                s.transversal_only = false;
            }
            if c.band {
                s.band_curves += 1;
                continue;
            }
            s.transversal_curves += 1;
            let classes: Vec<SingClass> = c
                .points
                .par_iter()
                .map(|&(x, y)| Ok(classify_height(&contact_height(patch, x, y, sign, tol)?.0, tol).sing_class))
                .collect::<Result<_>>()?;
            s.curve_points += classes.len();
            for cl in classes {
                match cl {
                    SingClass::A1 => s.a1 += 1,
                    SingClass::A2 => s.a2 += 1,
                    SingClass::A3 => s.a3 += 1,
                    SingClass::Degenerate => s.degenerate += 1,
                }
            }
            for p in swallowtail_points(patch, c, tol)? {
                if p.confirmed {
                    s.swallowtails += 1;
                } else {
                    s.unconfirmed_swallowtails += 1;
                }
            }
        }
        if !set.flagged_cells.is_empty() {
            s.transversal_only = false;
        }
        let reg = regular_curve_check(patch, &set, opts.resolution, tol)?;
        s.regular &= reg.passed;
        s.branch_points += reg.branch_points.len();
    }
    Ok(s)
}

pub fn summarize(details: Vec<TrialSummary>, seed: Option<u64>, degree: Option<u32>) -> GenericityReport {
    let kept: Vec<&TrialSummary> = details.iter().filter(|t| !t.wholly_degenerate).collect();
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let sum = |f: fn(&TrialSummary) -> usize| kept.iter().map(|t| f(t)).sum::<usize>();
    let curve_points = sum(|t| t.curve_points);
    GenericityReport {
        seed,
        trials: details.len(),
        degree,
        excluded: details.len() - kept.len(),
        transversal_fraction: ratio(kept.iter().filter(|t| t.transversal_only).count(), kept.len()),
        curve_points,
        a2_fraction: ratio(sum(|t| t.a2), curve_points),
        a3_points: sum(|t| t.a3),
        degenerate_count: sum(|t| t.degenerate),
        swallowtails: sum(|t| t.swallowtails),
        regular_failures: kept.iter().filter(|t| !t.regular).count(),
        details,
    }
}

/// Draws `trials` random surfaces of the given degree and reports how their
/// parabolic sets look. Each trial has its own generator stream, so the
/// result does not depend on scheduling.
pub fn genericity_sample(
    seed: u64,
    trials: usize,
    degree: u32,
    opts: &GenericOptions,
    tol: &Tolerances,
) -> Result<GenericityReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let details = (0..trials)
        .into_par_iter()
        .map(|t| {
            let (patch, attempts) = random_monge(seed, t, degree, opts)?;
            let mut s = analyze_patch(&patch, t, opts, tol)?;
            s.attempts = attempts;
            Ok(s)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(details, Some(seed), Some(degree)))
}

/// Same statistics for caller-supplied patches.
pub fn analyze_generic(patches: &[SurfacePatch], opts: &GenericOptions, tol: &Tolerances) -> Result<GenericityReport> {
    let details = patches
        .par_iter()
        .enumerate()
        .map(|(t, p)| analyze_patch(p, t, opts, tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(details, None, None))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_are_reproducible_and_lorentzian() {
        let o = GenericOptions::default();
        let (a, na) = random_monge(7, 3, 4, &o).unwrap();
        let (b, nb) = random_monge(7, 3, 4, &o).unwrap();
        assert_eq!(a, b);
        assert_eq!(na, nb);
        let (c, _) = random_monge(7, 4, 4, &o).unwrap();
        assert_ne!(a, c);
        for (x, y) in Grid::new(a.domain, 9, 9).unwrap().nodes() {
            assert!(tangent_data(&a, x, y).unwrap().det() <= -0.1);
        }
        assert_eq!(monomials(4).len(), 12);
    }

    #[test]
    fn injected_examples() {
        let o = GenericOptions::default();
        let t = Tolerances::default();
        let a2 = SurfacePatch::builtin("monge:a2").unwrap();
        let plane = SurfacePatch::builtin("plane").unwrap();
        let r = analyze_generic(&[a2], &o, &t).unwrap();
        assert!(r.curve_points > 0);
        assert_eq!(r.a2_fraction, 1.0);
        let r = analyze_generic(&[plane], &o, &t).unwrap();
        assert_eq!(r.excluded, 1);
        assert!(r.details[0].wholly_degenerate);
        assert_eq!(r.curve_points, 0);
    }
}
