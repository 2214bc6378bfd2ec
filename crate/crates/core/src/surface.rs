//! Surface patches `X : U → R⁴₂` given by closed-form component expressions.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{parse_expression, Expr};
use crate::geometry::{pseudo_dot, Vec4};
use crate::grid::{Domain, Grid};
use crate::jet::{Jet, MAX_ORDER};
use crate::linalg::singular_values;
use crate::scalar::Scalar;

/// Value and partial derivatives up to order 4 of all four components.
pub type Jet4 = Vec4<Jet<f64>>;

pub const BUILTIN_NAMES: [&str; 7] =
    ["plane", "lhp", "monge:a1", "monge:a2", "monge:a3", "monge:k34", "monge:tac"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PatchKind {
    Monge,
    Parametric,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SurfacePatch {
    pub kind: PatchKind,
    /// The four components `X = (x1, x2, x3, x4)`; Monge patches store the
    /// expansion `(f1, x, f2, y)`.
    pub components: [Expr; 4],
    pub domain: Domain,
    pub label: String,
}

impl SurfacePatch {
    pub fn parametric(components: [Expr; 4], domain: Domain, label: impl Into<String>) -> Result<Self> {
        domain.validate()?;
        Ok(Self { kind: PatchKind::Parametric, components, domain, label: label.into() })
    }

    /// `X(x, y) = (f1, x, f2, y)`.
    pub fn monge(f1: Expr, f2: Expr, domain: Domain, label: impl Into<String>) -> Result<Self> {
        domain.validate()?;
        Ok(Self {
            kind: PatchKind::Monge,
            components: [f1, Expr::X, f2, Expr::Y],
            domain,
            label: label.into(),
        })
    }

    pub fn builtin(name: &str) -> Result<Self> {
        let p = |s: &str| parse_expression(s).expect("built-in expression");
        let monge = |f1: &str, f2: &str| Self::monge(p(f1), p(f2), Domain::square(0.3), name);
        match name {
            "plane" => Self::parametric([p("x"), p("0"), p("y"), p("0")], Domain::square(1.0), name),
            "lhp" => Self::parametric(
                [p("x"), p("x^2 + y^2"), p("y"), p("x^2 + y^2")],
                Domain::square(0.4),
                name,
            ),
            "monge:a1" => monge("0", "x^2 + y^2"),
            "monge:a2" => monge("0", "x^2 + y^3"),
            "monge:a3" => monge("0", "x^2 + y^4"),
            "monge:k34" => monge("(x^2 + y^2)/2", "x*y/2"),
            "monge:tac" => monge("0", "x^2 - y^4"),
            _ => Err(Error::Spec(format!(
                "unknown built-in surface '{name}' (known: {})",
                BUILTIN_NAMES.join(", ")
            ))),
        }
    }

    /// Evaluates `X` without a domain check.
    pub fn eval<S: Scalar>(&self, x: S, y: S) -> Result<Vec4<S>> {
        let c = &self.components;
        Ok(Vec4([c[0].eval(x, y)?, c[1].eval(x, y)?, c[2].eval(x, y)?, c[3].eval(x, y)?]))
    }

    pub fn check_domain(&self, x: f64, y: f64) -> Result<()> {
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::NonFinite);
        }
        if self.domain.contains(x, y) {
            Ok(())
        } else {
            Err(Error::OutsideDomain { x, y })
        }
    }

    pub fn point(&self, x: f64, y: f64) -> Result<Vec4<f64>> {
        self.check_domain(x, y)?;
        self.eval(x, y)
    }

    /// Taylor data of `X` at `(x, y)` truncated above `order` (at most 4).
    pub fn jet(&self, x: f64, y: f64, order: usize) -> Result<Jet4> {
        self.check_domain(x, y)?;
        if order > MAX_ORDER {
            return Err(Error::InvalidArgument(format!("jet order {order} exceeds {MAX_ORDER}")));
        }
        self.eval(Jet::variable_x(x, order), Jet::variable_y(y, order))
    }

    /// Adds a constant vector to `X`.
    pub fn translated(&self, t: Vec4<f64>) -> Self {
        let mut out = self.clone();
        for (c, v) in out.components.iter_mut().zip(t.0) {
            *c = Expr::Add(Box::new(c.clone()), Box::new(Expr::Const(v)));
        }
        out.kind = PatchKind::Parametric;
        out
    }

    /// Precomposes with `u ↦ m·u + t`. The new domain is the bounding box of
    /// the preimage of the old one.
    pub fn reparametrized(&self, m: [[f64; 2]; 2], t: [f64; 2]) -> Result<Self> {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det.abs() < 1e-12 {
            return Err(Error::InvalidArgument("singular reparametrization".into()));
        }
        let sx = Expr::affine(t[0], m[0][0], m[0][1]);
        let sy = Expr::affine(t[1], m[1][0], m[1][1]);
        let comps = self.components.clone().map(|c| c.substitute(&sx, &sy));
        let inv = |px: f64, py: f64| {
            let (dx, dy) = (px - t[0], py - t[1]);
            ((m[1][1] * dx - m[0][1] * dy) / det, (-m[1][0] * dx + m[0][0] * dy) / det)
        };
        let d = &self.domain;
        let corners = [inv(d.x[0], d.y[0]), inv(d.x[1], d.y[0]), inv(d.x[0], d.y[1]), inv(d.x[1], d.y[1])];
        let lo_x = corners.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
        let hi_x = corners.iter().map(|c| c.0).fold(f64::NEG_INFINITY, f64::max);
        let lo_y = corners.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
        let hi_y = corners.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
        Self::parametric(comps, Domain::new([lo_x, hi_x], [lo_y, hi_y])?, format!("{}∘affine", self.label))
    }

    pub fn default_grid(&self, n: usize) -> Result<Grid> {
        Grid::new(self.domain, n, n)
    }
}

/// First fundamental data at a point: tangent vectors and their Gram matrix.
#[derive(Clone, Copy, Debug)]
pub struct TangentData {
    pub xx: Vec4<f64>,
    pub xy: Vec4<f64>,
    pub gram: [[f64; 2]; 2],
}

impl TangentData {
    pub fn det(&self) -> f64 {
        self.gram[0][0] * self.gram[1][1] - self.gram[0][1] * self.gram[1][0]
    }
}

pub fn tangent_data(patch: &SurfacePatch, x: f64, y: f64) -> Result<TangentData> {
    let j = patch.jet(x, y, 1)?;
    let xx = j.map(|c| c.derivative(1, 0));
    let xy = j.map(|c| c.derivative(0, 1));
    let g12 = pseudo_dot(&xx, &xy);
    Ok(TangentData { xx, xy, gram: [[pseudo_dot(&xx, &xx), g12], [g12, pseudo_dot(&xy, &xy)]] })
}

/// Euclidean rank of the 2×4 matrix `[a; b]` by its singular values.
pub fn euclid_rank2(a: &Vec4<f64>, b: &Vec4<f64>, tol: f64) -> usize {
    let [small, big] = singular_values([a, b]);
    if big <= tol {
        0
    } else if small <= tol * big.max(1.0) {
        1
    } else {
        2
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NodeFailure {
    pub x: f64,
    pub y: f64,
    pub rank: usize,
    pub gram_det: f64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub nodes_checked: usize,
    pub failures: Vec<NodeFailure>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks at every node that `X` is immersive with Lorentzian tangent plane.
pub fn validate_lorentzian(patch: &SurfacePatch, grid: &Grid) -> ValidationReport {
    let mut failures = Vec::new();
    let nodes = grid.nodes();
    for &(x, y) in &nodes {
        let td = match patch.eval(Jet::variable_x(x, 1), Jet::variable_y(y, 1)) {
            Ok(j) => {
                let xx = j.map(|c| c.derivative(1, 0));
                let xy = j.map(|c| c.derivative(0, 1));
                let g12 = pseudo_dot(&xx, &xy);
                TangentData { xx, xy, gram: [[pseudo_dot(&xx, &xx), g12], [g12, pseudo_dot(&xy, &xy)]] }
            }
            Err(e) => {
                failures.push(NodeFailure { x, y, rank: 0, gram_det: f64::NAN, reason: e.to_string() });
                continue;
            }
        };
        let rank = euclid_rank2(&td.xx, &td.xy, 1e-12);
        let det = td.det();
        if rank < 2 {
            failures.push(NodeFailure { x, y, rank, gram_det: det, reason: "rank-deficient immersion".into() });
        } else if !(det < 0.0) {
            failures.push(NodeFailure { x, y, rank, gram_det: det, reason: "tangent plane not Lorentzian".into() });
        }
    }
    ValidationReport { nodes_checked: nodes.len(), failures }
}

/// On-disk surface description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSpec {
    pub kind: PatchKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monge: Option<MongeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parametric: Option<ParametricSpec>,
    pub domain: Domain,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MongeSpec {
    pub f1: String,
    pub f2: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParametricSpec {
    pub x1: String,
    pub x2: String,
    pub x3: String,
    pub x4: String,
}

impl SurfaceSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Spec(format!("invalid surface spec: {e}")))
    }

    pub fn into_patch(self) -> Result<SurfacePatch> {
        self.domain.validate()?;
        let field = |name: &str, s: &str| {
            parse_expression(s).map_err(|e| Error::Spec(format!("field {name}: {e}")))
        };
        let label = self.label.unwrap_or_else(|| match self.kind {
            PatchKind::Monge => "monge".to_string(),
            PatchKind::Parametric => "parametric".to_string(),
        });
        match (self.kind, self.monge, self.parametric) {
            (PatchKind::Monge, Some(m), None) => {
                SurfacePatch::monge(field("monge.f1", &m.f1)?, field("monge.f2", &m.f2)?, self.domain, label)
            }
            (PatchKind::Parametric, None, Some(p)) => SurfacePatch::parametric(
                [
                    field("parametric.x1", &p.x1)?,
                    field("parametric.x2", &p.x2)?,
                    field("parametric.x3", &p.x3)?,
                    field("parametric.x4", &p.x4)?,
                ],
                self.domain,
                label,
            ),
            (kind, _, _) => Err(Error::Spec(format!(
                "kind {kind:?} requires exactly the \"{}\" component block",
                match kind {
                    PatchKind::Monge => "monge",
                    PatchKind::Parametric => "parametric",
                }
            ))),
        }
    }
}

/// Reads a surface spec file, or a built-in surface when given `builtin:<name>`.
pub fn load_spec(path: impl AsRef<Path>) -> Result<SurfacePatch> {
    let path = path.as_ref();
    if let Some(name) = path.to_str().and_then(|s| s.strip_prefix("builtin:")) {
        return SurfacePatch::builtin(name);
    }
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Spec(format!("cannot read {}: {e}", path.display())))?;
    SurfaceSpec::from_json(&text)?.into_patch()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monge_a3_jet_at_origin() {
        let s = SurfacePatch::monge(
            Expr::Const(0.0),
            parse_expression("x^2+y^4").unwrap(),
            Domain::square(0.5),
            "t",
        )
        .unwrap();
        let j = s.jet(0.0, 0.0, 4).unwrap();
        for i in 0..=4 {
            for k in 0..=4 - i {
                let want = match (i, k) {
                    (2, 0) => 2.0,
                    (0, 4) => 24.0,
                    _ => 0.0,
                };
                assert_eq!(j[2].derivative(i, k), want, "d^{i},{k}");
            }
        }
    }

    #[test]
    fn plane_jet_is_linear() {
        let s = SurfacePatch::builtin("plane").unwrap();
        let j = s.jet(0.3, -0.2, 4).unwrap();
        assert_eq!(j.map(|c| c.derivative(1, 0)), Vec4::new(1.0, 0.0, 0.0, 0.0));
        assert_eq!(j.map(|c| c.derivative(0, 1)), Vec4::new(0.0, 0.0, 1.0, 0.0));
        for c in 0..4 {
            for (i, k) in [(2, 0), (1, 1), (0, 2), (3, 0), (2, 2), (0, 4)] {
                assert_eq!(j[c].derivative(i, k), 0.0);
            }
        }
    }

    #[test]
    fn sine_component() {
        let s = SurfacePatch::monge(Expr::Const(0.0), parse_expression("sin(x)").unwrap(), Domain::square(1.0), "s")
            .unwrap();
        let j = s.jet(0.0, 0.0, 4).unwrap();
        assert!((j[2].derivative(1, 0) - 1.0).abs() < 1e-15);
        assert!(j[2].derivative(2, 0).abs() < 1e-15);
        assert!((j[2].derivative(3, 0) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn outside_domain_is_rejected() {
        let s = SurfacePatch::builtin("monge:a2").unwrap();
        assert_eq!(s.jet(0.5, 0.0, 2).unwrap_err(), Error::OutsideDomain { x: 0.5, y: 0.0 });
    }

    #[test]
    fn validation_examples() {
        let plane = SurfacePatch::builtin("plane").unwrap();
        assert!(validate_lorentzian(&plane, &plane.default_grid(5).unwrap()).passed());

        let lhp = SurfacePatch::builtin("lhp").unwrap();
        let wide = Grid::new(Domain::square(1.0), 21, 21).unwrap();
        let mut lhp_wide = lhp.clone();
        lhp_wide.domain = Domain::square(1.0);
        let r = validate_lorentzian(&lhp_wide, &wide);
        assert!(r.passed());
        assert_eq!(r.nodes_checked, 441);

        let spacelike = SurfacePatch::parametric(
            [Expr::Const(0.0), Expr::Const(0.0), Expr::X, Expr::Y],
            Domain::square(1.0),
            "bad",
        )
        .unwrap();
        let r = validate_lorentzian(&spacelike, &spacelike.default_grid(4).unwrap());
        assert_eq!(r.failures.len(), 16);
        assert!(r.failures.iter().all(|f| f.gram_det > 0.0));
    }

    #[test]
    fn spec_loading() {
        let s = SurfaceSpec::from_json(
            r#"{"kind":"monge","monge":{"f1":"0","f2":"x^2+y^3"},"domain":{"x":[-0.5,0.5],"y":[-0.5,0.5]}}"#,
        )
        .unwrap()
        .into_patch()
        .unwrap();
        assert_eq!(s.kind, PatchKind::Monge);
        assert_eq!(s.eval(0.5, 2.0).unwrap(), Vec4::new(0.0, 0.5, 8.25, 2.0));

        let missing = SurfaceSpec::from_json(r#"{"kind":"monge","monge":{"f1":"0","f2":"x"}}"#);
        assert!(matches!(missing, Err(Error::Spec(m)) if m.contains("domain")));

        let unknown = SurfaceSpec::from_json(
            r#"{"kind":"monge","monge":{"f1":"0","f2":"x"},"domain":{"x":[0,1],"y":[0,1]},"color":1}"#,
        );
        assert!(unknown.is_err());

        let plane = SurfaceSpec::from_json(
            r#"{"kind":"parametric","parametric":{"x1":"x","x2":"0","x3":"y","x4":"0"},"domain":{"x":[-1,1],"y":[-1,1]},"label":"plane"}"#,
        )
        .unwrap()
        .into_patch()
        .unwrap();
        assert_eq!(plane.eval(0.25, 0.5).unwrap(), Vec4::new(0.25, 0.0, 0.5, 0.0));

        let mismatched = SurfaceSpec::from_json(
            r#"{"kind":"parametric","monge":{"f1":"0","f2":"x"},"domain":{"x":[0,1],"y":[0,1]}}"#,
        )
        .unwrap()
        .into_patch();
        assert!(matches!(mismatched, Err(Error::Spec(_))));

        let bad_expr = SurfaceSpec::from_json(
            r#"{"kind":"monge","monge":{"f1":"0","f2":"x^y"},"domain":{"x":[0,1],"y":[0,1]}}"#,
        )
        .unwrap()
        .into_patch();
        assert!(matches!(bad_expr, Err(Error::Spec(m)) if m.contains("non-integer exponent")));
    }

    #[test]
    fn reparametrization_composes() {
        let s = SurfacePatch::builtin("monge:a2").unwrap();
        let r = s.reparametrized([[0.0, 2.0], [1.0, 0.0]], [0.1, 0.0]).unwrap();
        // u=(u1,u2) ↦ (0.1 + 2 u2, u1)
        let a = r.eval(0.05, -0.02).unwrap();
        let b = s.eval(0.1 - 0.04, 0.05).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-15);
        assert!(r.domain.contains(0.0, -0.2));
    }
}
