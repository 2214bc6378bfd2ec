//! Small dense symmetric eigenproblems (Euclidean), sizes 2 to 4.

use crate::geometry::Vec4;

/// Eigen-decomposition of a symmetric 2×2 matrix, eigenvalues ascending.
pub fn sym_eigen2(m: [[f64; 2]; 2]) -> ([f64; 2], [[f64; 2]; 2]) {
    let (a, b, d) = (m[0][0], m[0][1], m[1][1]);
    let mean = 0.5 * (a + d);
    let r = (0.5 * (a - d)).hypot(b);
    let (lo, hi) = (mean - r, mean + r);
    if r == 0.0 {
        return ([lo, hi], [[1.0, 0.0], [0.0, 1.0]]);
    }
    // eigenvector of the smaller eigenvalue from the better-conditioned row
    let c1 = [b, lo - a];
    let c2 = [lo - d, b];
    let v = if c1[0].hypot(c1[1]) >= c2[0].hypot(c2[1]) { c1 } else { c2 };
    let n = v[0].hypot(v[1]);
    let v = [v[0] / n, v[1] / n];
    ([lo, hi], [v, [-v[1], v[0]]])
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn sym_eigenvalues<const N: usize>(mut a: [[f64; N]; N]) -> [f64; N] {
    for _sweep in 0..64 {
        let off: f64 = (0..N).flat_map(|i| (0..N).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let diag: f64 = (0..N).map(|i| a[i][i] * a[i][i]).sum();
        if off <= 1e-30 * diag.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..N {
            for q in p + 1..N {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..N {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..N {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev = [0.0; N];
    for (i, e) in ev.iter_mut().enumerate() {
        *e = a[i][i];
    }
    ev.sort_by(f64::total_cmp);
    ev
}

fn edot(a: &Vec4<f64>, b: &Vec4<f64>) -> f64 {
    (0..4).map(|i| a[i] * b[i]).sum()
}

/// Singular values (ascending) of the matrix whose rows are `rows`.
pub fn singular_values<const N: usize>(rows: [&Vec4<f64>; N]) -> [f64; N] {
    let mut g = [[0.0; N]; N];
    for i in 0..N {
        for j in 0..N {
            g[i][j] = edot(rows[i], rows[j]);
        }
    }
    sym_eigenvalues(g).map(|l| l.max(0.0).sqrt())
}
