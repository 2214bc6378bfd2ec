//! Taylor jets against finite differences of plain evaluations.

use lightcone::expr::{parse_expression, Expr, Func};
use lightcone::Jet;
use proptest::prelude::*;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![Just(Expr::X), Just(Expr::Y), (-2.0..2.0f64).prop_map(Expr::Const)]
}

/// Smooth expressions on `[-1, 1]²`; division only by `2 + e²`.
fn smooth_expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        let b = |e: Expr| Box::new(e);
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(move |(p, q)| Expr::Add(b(p), b(q))),
            (inner.clone(), inner.clone()).prop_map(move |(p, q)| Expr::Sub(b(p), b(q))),
            (inner.clone(), inner.clone()).prop_map(move |(p, q)| Expr::Mul(b(p), b(q))),
            inner.clone().prop_map(move |p| Expr::Neg(b(p))),
            (inner.clone(), 0u32..4).prop_map(move |(p, n)| Expr::Pow(b(p), n)),
            (inner.clone(), inner.clone()).prop_map(move |(p, q)| {
                let den = Expr::Add(b(Expr::Const(2.0)), b(Expr::Pow(b(q), 2)));
                Expr::Div(b(p), b(den))
            }),
            (inner.clone(), prop_oneof![Just(Func::Sin), Just(Func::Cos), Just(Func::Sinh)])
                .prop_map(move |(p, f)| Expr::Call(f, b(p))),
            inner.prop_map(move |p| Expr::Call(Func::Exp, b(Expr::Mul(b(Expr::Const(0.3)), b(p))))),
        ]
    })
}

fn jet_at(e: &Expr, x: f64, y: f64, order: usize) -> Jet<f64> {
    e.eval(Jet::variable_x(x, order), Jet::variable_y(y, order)).unwrap()
}

/// `∂^{i+j} e / ∂x^i ∂y^j` by one Richardson-extrapolated central difference
/// applied to the exact derivative of one order less.
fn fd_derivative(e: &Expr, x: f64, y: f64, i: usize, j: usize) -> f64 {
    let total = i + j;
    let (li, lj, sx, sy) = if i > 0 { (i - 1, j, 1.0, 0.0) } else { (i, j - 1, 0.0, 1.0) };
    let lower = |s: f64| jet_at(e, x + s * sx, y + s * sy, total - 1).derivative(li, lj);
    let central = |h: f64| (lower(h) - lower(-h)) / (2.0 * h);
    let h = 1e-3;
    (4.0 * central(h / 2.0) - central(h)) / 3.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn jets_match_finite_differences(e in smooth_expr(), x in -0.8..0.8f64, y in -0.8..0.8f64) {
        let full = jet_at(&e, x, y, 4);
        prop_assert!((full.value() - e.eval(x, y).unwrap()).abs() <= 1e-12 * (1.0 + full.value().abs()));
        for total in 1..=4 {
            for i in 0..=total {
                let j = total - i;
                let exact = full.derivative(i, j);
                let fd = fd_derivative(&e, x, y, i, j);
                prop_assert!(
                    (exact - fd).abs() <= 1e-5 * exact.abs().max(1.0),
                    "d^({},{}) of {}: jet {} fd {}", i, j, e, exact, fd
                );
            }
        }
    }

    #[test]
    fn printing_reparses_to_the_same_tree(e in smooth_expr()) {
        let printed = e.to_string();
        prop_assert_eq!(parse_expression(&printed).unwrap(), e);
    }

    #[test]
    fn lower_order_jets_are_truncations(e in smooth_expr(), x in -0.8..0.8f64, y in -0.8..0.8f64, k in 0usize..4) {
        let full = jet_at(&e, x, y, 4);
        let low = jet_at(&e, x, y, k);
        for t in 0..=k {
            for i in 0..=t {
                let (a, b) = (low.coeff(i, t - i), full.coeff(i, t - i));
                prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
            }
        }
    }
}

#[test]
fn known_derivatives() {
    // x³y² + sin(x): closed forms at (0.5, -0.25)
    let e = parse_expression("x^3*y^2 + sin(x)").unwrap();
    let (x, y) = (0.5f64, -0.25f64);
    let j = jet_at(&e, x, y, 4);
    let cases = [
        ((1, 0), 3.0 * x * x * y * y + x.cos()),
        ((0, 1), 2.0 * x.powi(3) * y),
        ((1, 1), 6.0 * x * x * y),
        ((2, 2), 12.0 * x),
        ((3, 1), 12.0 * y),
        ((4, 0), x.sin()),
        ((0, 3), 0.0),
    ];
    for ((i, k), want) in cases {
        assert!((j.derivative(i, k) - want).abs() < 1e-13, "d^({i},{k})");
    }
}
